//! Text formats: edge lists, curvature CSV, Gram CSV.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::curvature::{CurvatureEntry, CurvatureError, CurvatureMap, DEFAULT_ALPHA};
use crate::graph::{Graph, GraphError, NodeId};
use crate::kernel::{FeatureDescriptor, GramMatrix};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn malformed(line: usize, reason: impl Into<String>) -> IoError {
    IoError::Malformed { line, reason: reason.into() }
}

/// `%.12g`: 12 significant digits, trailing zeros dropped.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Splits one CSV record, honouring double-quoted fields.
fn split_csv(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut field = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                field.push('"');
                chars.next();
            }
            '"' => quoted = !quoted,
            ',' if !quoted => out.push(std::mem::take(&mut field)),
            _ => field.push(c),
        }
    }
    out.push(field);
    out
}

/// Writes `u v` lines (`u v w` if weighted) after `#`-prefixed header lines.
pub fn write_edge_list<W: Write>(mut w: W, g: &Graph, header: &[String]) -> io::Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    for e in g.edges() {
        if g.is_unweighted() {
            writeln!(w, "{} {}", e.u, e.v)?;
        } else {
            writeln!(w, "{} {} {}", e.u, e.v, format_sig12(e.length))?;
        }
    }
    Ok(())
}

/// A curvature CSV as read back from disk. Node IDs are the ones written,
/// typically the IDs of the original input file.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureFile {
    pub rows: Vec<(i64, i64, f64)>,
    pub sampled: bool,
    pub edge_total: usize,
    pub seed: Option<u64>,
    pub alpha: f64,
}

impl CurvatureFile {
    /// `ids` maps dense node IDs back to the IDs to print; identity if `None`.
    pub fn from_map(cm: &CurvatureMap, ids: Option<&[i64]>) -> Self {
        let name = |x: NodeId| ids.map_or(x as i64, |ids| ids[x]);
        Self {
            rows: cm.entries().iter().map(|e| (name(e.u), name(e.v), e.kappa)).collect(),
            sampled: cm.is_sampled(),
            edge_total: cm.edge_total(),
            seed: cm.seed(),
            alpha: cm.alpha(),
        }
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        let seed = self.seed.map_or("none".to_string(), |s| s.to_string());
        writeln!(
            w,
            "# sampled={} edge_total={} seed={} alpha={}",
            self.sampled, self.edge_total, seed, self.alpha
        )?;
        writeln!(w, "u,v,kappa")?;
        for (u, v, k) in &self.rows {
            writeln!(w, "{u},{v},{}", format_sig12(*k))?;
        }
        Ok(())
    }

    /// Reads the format produced by [`CurvatureFile::write`]. A file without
    /// the `#` preamble is taken as a full map.
    pub fn read<R: BufRead>(r: R) -> Result<Self, IoError> {
        let mut file = Self { rows: Vec::new(), sampled: false, edge_total: 0, seed: None, alpha: DEFAULT_ALPHA };
        let mut edge_total = None;
        let mut header_seen = false;
        for (idx, line) in r.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            if let Some(meta) = text.strip_prefix('#') {
                for pair in meta.split_whitespace() {
                    let (key, value) = pair.split_once('=').ok_or_else(|| malformed(line_no, format!("bad metadata `{pair}`")))?;
                    let bad = |_| malformed(line_no, format!("bad value for `{key}`"));
                    match key {
                        "sampled" => file.sampled = value.parse().map_err(|_| malformed(line_no, "bad `sampled`"))?,
                        "edge_total" => edge_total = Some(value.parse().map_err(bad)?),
                        "seed" if value == "none" => file.seed = None,
                        "seed" => file.seed = Some(value.parse().map_err(bad)?),
                        "alpha" => file.alpha = value.parse().map_err(|_| malformed(line_no, "bad `alpha`"))?,
                        _ => {}
                    }
                }
                continue;
            }
            if !header_seen {
                let cols: Vec<&str> = text.split(',').map(str::trim).collect();
                if cols != ["u", "v", "kappa"] {
                    return Err(malformed(line_no, "expected header `u,v,kappa`"));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = text.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(malformed(line_no, "expected 3 fields"));
            }
            let u = fields[0].parse().map_err(|_| malformed(line_no, "bad node id"))?;
            let v = fields[1].parse().map_err(|_| malformed(line_no, "bad node id"))?;
            let k: f64 = fields[2].parse().map_err(|_| malformed(line_no, "bad kappa"))?;
            if !k.is_finite() {
                return Err(malformed(line_no, "non-finite kappa"));
            }
            file.rows.push((u, v, k));
        }
        if !header_seen {
            return Err(malformed(0, "missing header `u,v,kappa`"));
        }
        file.edge_total = edge_total.unwrap_or(file.rows.len());
        Ok(file)
    }

    /// Rebuilds the edge set and the map over it. The graph holds exactly
    /// the listed edges; for a full map these are all edges of the original
    /// graph, which is all a 2D histogram needs.
    pub fn to_graph_and_map(&self) -> Result<(Graph, CurvatureMap, Vec<i64>), IoError> {
        let mut dense: HashMap<i64, NodeId> = HashMap::new();
        let mut ids = Vec::new();
        let mut intern = |x: i64| {
            *dense.entry(x).or_insert_with(|| {
                ids.push(x);
                ids.len() - 1
            })
        };
        let pairs: Vec<(NodeId, NodeId)> = self.rows.iter().map(|&(u, v, _)| (intern(u), intern(v))).collect();
        let g = Graph::from_unweighted_edges(ids.len(), pairs.iter().copied())?;
        let entries = pairs
            .iter()
            .zip(&self.rows)
            .map(|(&(a, b), &(_, _, kappa))| {
                let edge = g.edge_index(a, b).expect("edge was just inserted");
                let e = g.edges()[edge];
                CurvatureEntry { edge, u: e.u, v: e.v, kappa }
            })
            .collect();
        let edge_total = if self.sampled { self.edge_total.max(self.rows.len()) } else { self.rows.len() };
        if !self.sampled && self.edge_total != self.rows.len() {
            return Err(malformed(0, format!("full map lists {} of {} edges", self.rows.len(), self.edge_total)));
        }
        let cm = CurvatureMap::from_entries(entries, edge_total, self.alpha, self.sampled, self.seed)?;
        Ok((g, cm, ids))
    }
}

/// Gram matrix as CSV: a header of graph names after an empty corner cell,
/// then one row per graph, name first.
pub fn write_gram_csv<W: Write>(mut w: W, gm: &GramMatrix, names: &[String]) -> io::Result<()> {
    assert_eq!(names.len(), gm.size(), "one name per graph");
    let header: Vec<String> = std::iter::once(String::new()).chain(names.iter().map(|n| csv_field(n))).collect();
    writeln!(w, "{}", header.join(","))?;
    for (i, name) in names.iter().enumerate() {
        let mut row = vec![csv_field(name)];
        row.extend((0..gm.size()).map(|j| format_sig12(gm.get(i, j))));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads a Gram CSV back. The feature descriptor is not stored in the file
/// and comes back zeroed; sigma comes back as NaN.
pub fn read_gram_csv<R: BufRead>(r: R) -> Result<(Vec<String>, GramMatrix), IoError> {
    let mut lines = r.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
    let (_, header) = lines.next().ok_or_else(|| malformed(1, "empty file"))?;
    let mut cols = split_csv(&header?);
    if cols.first().map(String::as_str) != Some("") {
        return Err(malformed(1, "header must start with an empty cell"));
    }
    cols.remove(0);
    let n = cols.len();
    let mut values = Vec::with_capacity(n * n);
    let mut count = 0;
    for (idx, line) in lines {
        let fields = split_csv(&line?);
        if fields.len() != n + 1 {
            return Err(malformed(idx + 1, format!("expected {} fields", n + 1)));
        }
        if count >= n || fields[0] != cols[count] {
            return Err(malformed(idx + 1, "row names must follow the header order"));
        }
        for f in &fields[1..] {
            values.push(f.trim().parse::<f64>().map_err(|_| malformed(idx + 1, format!("bad value `{f}`")))?);
        }
        count += 1;
    }
    if count != n {
        return Err(malformed(0, format!("{count} rows for {n} columns")));
    }
    let desc = FeatureDescriptor { dims: 0, bins: 0, alpha: None };
    Ok((cols, GramMatrix::from_values(n, values, f64::NAN, desc)))
}
