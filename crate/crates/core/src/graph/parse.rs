use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{self, BufRead};
use std::path::Path;

use thiserror::Error;

use super::{Graph, GraphError, NodeId, UNIT_LENGTH};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: i64 },
    #[error("line {line}: duplicate edge ({u}, {v})")]
    DuplicateEdge { line: usize, u: i64, v: i64 },
    #[error("line {line}: non-positive weight {weight}")]
    NonPositiveWeight { line: usize, weight: f64 },
    #[error("edge ({u}, {v}) connects graph {graph_u} to graph {graph_v}")]
    CrossGraphEdge { u: usize, v: usize, graph_u: usize, graph_v: usize },
    #[error("node {0} has no graph assignment")]
    UnassignedNode(usize),
    #[error("graph ids must be contiguous from 1; graph {0} has no nodes")]
    EmptyGraphId(usize),
    #[error("{labels} labels for {graphs} graphs")]
    LabelCountMismatch { labels: usize, graphs: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parses a whitespace-separated edge list, `u v` or `u v w` per line.
///
/// Node IDs are remapped to `0..n` in order of first appearance. Lines
/// starting with `#` and blank lines are skipped.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<Graph, ParseError> {
    parse_edge_list_with_ids(reader).map(|(g, _)| g)
}

/// Like [`parse_edge_list`], also returning the original ID of every dense node.
pub fn parse_edge_list_with_ids<R: BufRead>(reader: R) -> Result<(Graph, Vec<i64>), ParseError> {
    let mut ids: HashMap<i64, NodeId> = HashMap::new();
    let mut original = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != 2 && tokens.len() != 3 {
            return Err(ParseError::Malformed {
                line: line_no,
                reason: format!("expected `u v` or `u v w`, found {} fields", tokens.len()),
            });
        }
        let parse_id = |tok: &str| {
            tok.parse::<i64>().map_err(|_| ParseError::Malformed {
                line: line_no,
                reason: format!("invalid node id `{tok}`"),
            })
        };
        let a = parse_id(tokens[0])?;
        let b = parse_id(tokens[1])?;
        let weight = match tokens.get(2) {
            Some(tok) => tok.parse::<f64>().map_err(|_| ParseError::Malformed {
                line: line_no,
                reason: format!("invalid weight `{tok}`"),
            })?,
            None => UNIT_LENGTH,
        };
        if a == b {
            return Err(ParseError::SelfLoop { line: line_no, node: a });
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(ParseError::NonPositiveWeight { line: line_no, weight });
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(ParseError::DuplicateEdge { line: line_no, u: a, v: b });
        }
        let mut intern = |id: i64| {
            *ids.entry(id).or_insert_with(|| {
                original.push(id);
                original.len() - 1
            })
        };
        let u = intern(a);
        let v = intern(b);
        edges.push((u, v, weight));
    }
    let graph = Graph::from_edges(original.len(), edges)?;
    Ok((graph, original))
}

/// A labeled collection of graphs, e.g. a TU benchmark dataset.
#[derive(Debug, Clone, Default)]
pub struct GraphCollection {
    pub graphs: Vec<Graph>,
    pub labels: Vec<i64>,
    pub names: Vec<String>,
}

impl GraphCollection {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn distinct_labels(&self) -> usize {
        self.labels.iter().collect::<BTreeSet<_>>().len()
    }
}

fn read_ints<R: BufRead>(reader: R, per_line: usize) -> Result<Vec<Vec<i64>>, ParseError> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let row = text
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ParseError::Malformed { line: idx + 1, reason: e.to_string() })?;
        if row.len() != per_line {
            return Err(ParseError::Malformed {
                line: idx + 1,
                reason: format!("expected {per_line} comma-separated integers"),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

fn positive_index(value: i64, line: usize) -> Result<usize, ParseError> {
    usize::try_from(value)
        .ok()
        .filter(|&v| v >= 1)
        .ok_or_else(|| ParseError::Malformed { line, reason: format!("index {value} is not 1-based") })
}

/// Parses the TU benchmark layout: `<DS>_A.txt` (1-based node pairs, both
/// directions), `<DS>_graph_indicator.txt` (graph of each node) and
/// `<DS>_graph_labels.txt` (class of each graph).
pub fn parse_tu_collection<A: BufRead, I: BufRead, L: BufRead>(
    adjacency: A,
    indicator: I,
    labels: L,
    prefix: &str,
) -> Result<GraphCollection, ParseError> {
    let indicator = read_ints(indicator, 1)?;
    let labels = read_ints(labels, 1)?;
    let pairs = read_ints(adjacency, 2)?;

    let mut graph_of = Vec::with_capacity(indicator.len());
    for (i, row) in indicator.iter().enumerate() {
        graph_of.push(positive_index(row[0], i + 1)? - 1);
    }
    let graph_count = graph_of.iter().map(|&g| g + 1).max().unwrap_or(0);

    // Local IDs follow global node order within each graph.
    let mut local = vec![0usize; graph_of.len()];
    let mut sizes = vec![0usize; graph_count];
    for (node, &g) in graph_of.iter().enumerate() {
        local[node] = sizes[g];
        sizes[g] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(ParseError::EmptyGraphId(empty + 1));
    }
    if labels.len() != graph_count {
        return Err(ParseError::LabelCountMismatch { labels: labels.len(), graphs: graph_count });
    }

    let mut edge_sets: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); graph_count];
    for (i, row) in pairs.iter().enumerate() {
        let a = positive_index(row[0], i + 1)? - 1;
        let b = positive_index(row[1], i + 1)? - 1;
        for node in [a, b] {
            if node >= graph_of.len() {
                return Err(ParseError::UnassignedNode(node + 1));
            }
        }
        let (ga, gb) = (graph_of[a], graph_of[b]);
        if ga != gb {
            return Err(ParseError::CrossGraphEdge { u: a + 1, v: b + 1, graph_u: ga + 1, graph_v: gb + 1 });
        }
        if a == b {
            return Err(ParseError::SelfLoop { line: i + 1, node: row[0] });
        }
        let (u, v) = (local[a].min(local[b]), local[a].max(local[b]));
        edge_sets[ga].insert((u, v));
    }

    let mut collection = GraphCollection::default();
    for (g, edges) in edge_sets.into_iter().enumerate() {
        collection.graphs.push(Graph::from_unweighted_edges(sizes[g], edges)?);
        collection.labels.push(labels[g][0]);
        collection.names.push(format!("{prefix}:{}", g + 1));
    }
    Ok(collection)
}

/// Loads `<dir>/<name>_A.txt` and its companion files. Node and edge label
/// files, if present, are ignored.
pub fn load_tu_collection(dir: &Path, name: &str) -> Result<GraphCollection, ParseError> {
    let open = |suffix: &str| -> Result<io::BufReader<fs::File>, ParseError> {
        let path = dir.join(format!("{name}_{suffix}.txt"));
        let file = fs::File::open(&path)
            .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        Ok(io::BufReader::new(file))
    };
    parse_tu_collection(open("A")?, open("graph_indicator")?, open("graph_labels")?, name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_basic() {
        let g = parse_edge_list("0 1\n1 2".as_bytes()).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert!(g.edges().iter().all(|e| e.length == 1.0));
    }

    #[test]
    fn edge_list_weighted() {
        let g = parse_edge_list("0 1 2.5".as_bytes()).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].length, 2.5);
        assert!(!g.is_unweighted());
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        assert!(matches!(
            parse_edge_list("0 0".as_bytes()),
            Err(ParseError::SelfLoop { line: 1, node: 0 })
        ));
        assert!(matches!(
            parse_edge_list("# c\n0 1\n1 0\n".as_bytes()),
            Err(ParseError::DuplicateEdge { line: 3, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 -2".as_bytes()),
            Err(ParseError::NonPositiveWeight { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1\n0 x\n".as_bytes()),
            Err(ParseError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 2 3".as_bytes()),
            Err(ParseError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn first_appearance_remapping() {
        let (g, ids) = parse_edge_list_with_ids("# header\n\n10 7\n7 42\n".as_bytes()).unwrap();
        assert_eq!(ids, vec![10, 7, 42]);
        assert!(g.has_edge(0, 1));
        assert!(g.has_edge(1, 2));
    }

    #[test]
    fn tu_minimal() {
        let c = parse_tu_collection("1, 2\n2, 1\n".as_bytes(), "1\n1\n".as_bytes(), "1\n".as_bytes(), "T")
            .unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.graphs[0].edge_count(), 1);
        assert_eq!(c.names, vec!["T:1".to_string()]);
    }

    #[test]
    fn tu_two_graphs_local_ids() {
        let c = parse_tu_collection(
            "1,2\n2,1\n3,4\n4,3\n4,5\n5,4\n".as_bytes(),
            "1\n1\n2\n2\n2\n".as_bytes(),
            "-1\n1\n".as_bytes(),
            "X",
        )
        .unwrap();
        assert_eq!(c.labels, vec![-1, 1]);
        assert_eq!(c.graphs[1].node_count(), 3);
        assert!(c.graphs[1].has_edge(0, 1) && c.graphs[1].has_edge(1, 2));
        assert_eq!(c.distinct_labels(), 2);
    }

    #[test]
    fn tu_errors() {
        assert!(matches!(
            parse_tu_collection("1,2\n".as_bytes(), "1\n2\n".as_bytes(), "1\n1\n".as_bytes(), "X"),
            Err(ParseError::CrossGraphEdge { .. })
        ));
        assert!(matches!(
            parse_tu_collection("1,3\n".as_bytes(), "1\n1\n".as_bytes(), "1\n".as_bytes(), "X"),
            Err(ParseError::UnassignedNode(3))
        ));
        assert!(matches!(
            parse_tu_collection("1,2\n".as_bytes(), "1\n1\n".as_bytes(), "1\n2\n".as_bytes(), "X"),
            Err(ParseError::LabelCountMismatch { labels: 2, graphs: 1 })
        ));
    }
}
