//! Ollivier-Ricci curvature of graph edges, exact and edge-sampled.
//!
//! For an edge `(u, v)` of length `d`, the curvature is `1 - W(m_u, m_v) / d`
//! where `m_x` is the lazy neighborhood measure of `x` and `W` the earth mover
//! distance under shortest-path ground cost.

use std::cell::RefCell;

use rand::seq::index;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{DistanceWorkspace, Graph, GraphError, NodeId};
use crate::rng::{stream_rng, Stream};
use crate::transport::{emd, neighborhood_measure, TransportError};

/// Mass kept on each endpoint unless configured otherwise.
pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("graph has no edges")]
    EmptyEdgeSet,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("invalid sampling parameter: {0}")]
    BadSampling(String),
    #[error("inconsistent curvature map: {0}")]
    BadMap(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureEntry {
    /// Index into [`Graph::edges`].
    pub edge: usize,
    pub u: NodeId,
    pub v: NodeId,
    pub kappa: f64,
}

/// Curvature values for all or a sample of a graph's edges, sorted by edge.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureMap {
    entries: Vec<CurvatureEntry>,
    edge_total: usize,
    alpha: f64,
    sampled: bool,
    seed: Option<u64>,
}

impl CurvatureMap {
    /// Assembles a map from already computed entries, e.g. read back from a
    /// file. Entries are sorted by edge index; duplicates are rejected.
    pub fn from_entries(
        mut entries: Vec<CurvatureEntry>,
        edge_total: usize,
        alpha: f64,
        sampled: bool,
        seed: Option<u64>,
    ) -> Result<Self, CurvatureError> {
        entries.sort_by_key(|e| e.edge);
        if entries.windows(2).any(|w| w[0].edge == w[1].edge) {
            return Err(CurvatureError::BadMap("edge listed twice".into()));
        }
        if entries.last().is_some_and(|e| e.edge >= edge_total) {
            return Err(CurvatureError::BadMap("edge index beyond edge total".into()));
        }
        if !sampled && entries.len() != edge_total {
            return Err(CurvatureError::BadMap(format!(
                "unsampled map covers {} of {edge_total} edges",
                entries.len()
            )));
        }
        Ok(Self { entries, edge_total, alpha, sampled, seed })
    }

    pub fn entries(&self) -> &[CurvatureEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn edge_total(&self) -> usize {
        self.edge_total
    }

    pub fn coverage(&self) -> f64 {
        if self.edge_total == 0 {
            0.0
        } else {
            self.entries.len() as f64 / self.edge_total as f64
        }
    }

    pub fn is_sampled(&self) -> bool {
        self.sampled
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.kappa).collect()
    }

    pub fn get(&self, edge: usize) -> Option<f64> {
        self.entries
            .binary_search_by_key(&edge, |e| e.edge)
            .ok()
            .map(|i| self.entries[i].kappa)
    }

    pub fn mean(&self) -> f64 {
        self.entries.iter().map(|e| e.kappa).sum::<f64>() / self.entries.len() as f64
    }
}

thread_local! {
    static WORKSPACE: RefCell<DistanceWorkspace> = RefCell::new(DistanceWorkspace::new());
}

/// Earth mover distance between the neighborhood measures of the endpoints
/// of edge `edge`.
fn edge_transport_cost(
    ws: &mut DistanceWorkspace,
    g: &Graph,
    edge: usize,
    alpha: f64,
) -> Result<f64, CurvatureError> {
    let e = g.edges()[edge];
    let mu = neighborhood_measure(g, e.u, alpha)?;
    let mv = neighborhood_measure(g, e.v, alpha)?;
    // Every support pair is joined through the edge itself within 3 hops.
    let cap = if g.is_unweighted() { 3.0 * e.length } else { f64::INFINITY };
    let table = ws.truncated_distances(g, mu.support(), mv.support(), cap)?;
    Ok(emd(&mu, &mv, &table)?.cost)
}

fn entry_for(ws: &mut DistanceWorkspace, g: &Graph, edge: usize, alpha: f64) -> Result<CurvatureEntry, CurvatureError> {
    let e = g.edges()[edge];
    let w = edge_transport_cost(ws, g, edge, alpha)?;
    Ok(CurvatureEntry { edge, u: e.u, v: e.v, kappa: 1.0 - w / e.length })
}

fn check_alpha(alpha: f64) -> Result<(), CurvatureError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(TransportError::BadAlpha(alpha).into())
    }
}

/// `W(m_u, m_v)` for the edge `(u, v)`.
pub fn edge_wasserstein(g: &Graph, u: NodeId, v: NodeId, alpha: f64) -> Result<f64, CurvatureError> {
    check_alpha(alpha)?;
    let edge = g.edge_index(u, v).ok_or(GraphError::NotAnEdge(u, v))?;
    WORKSPACE.with(|ws| edge_transport_cost(&mut ws.borrow_mut(), g, edge, alpha))
}

/// Curvature of the edge `(u, v)`.
pub fn edge_curvature(g: &Graph, u: NodeId, v: NodeId, alpha: f64) -> Result<f64, CurvatureError> {
    check_alpha(alpha)?;
    let edge = g.edge_index(u, v).ok_or(GraphError::NotAnEdge(u, v))?;
    WORKSPACE.with(|ws| entry_for(&mut ws.borrow_mut(), g, edge, alpha)).map(|e| e.kappa)
}

fn compute(g: &Graph, edges: &[usize], alpha: f64) -> Result<Vec<CurvatureEntry>, CurvatureError> {
    edges
        .par_iter()
        .map(|&edge| WORKSPACE.with(|ws| entry_for(&mut ws.borrow_mut(), g, edge, alpha)))
        .collect()
}

/// Curvature of every edge.
pub fn all_curvatures(g: &Graph, alpha: f64) -> Result<CurvatureMap, CurvatureError> {
    check_alpha(alpha)?;
    if g.edge_count() == 0 {
        return Err(CurvatureError::EmptyEdgeSet);
    }
    let edges: Vec<usize> = (0..g.edge_count()).collect();
    let entries = compute(g, &edges, alpha)?;
    Ok(CurvatureMap { entries, edge_total: g.edge_count(), alpha, sampled: false, seed: None })
}

/// Number of uniformly sampled edges for an `epsilon`-accurate curvature
/// distribution with probability `1 - delta`:
/// `ceil(c (ln(1/eps) + ln(1/delta)) / eps^2)`.
pub fn sample_size(epsilon: f64, delta: f64, constant_c: f64) -> Result<usize, CurvatureError> {
    let open_unit = |x: f64| x > 0.0 && x < 1.0;
    if !open_unit(epsilon) {
        return Err(CurvatureError::BadSampling(format!("epsilon = {epsilon} is not in (0, 1)")));
    }
    if !open_unit(delta) {
        return Err(CurvatureError::BadSampling(format!("delta = {delta} is not in (0, 1)")));
    }
    if !(constant_c > 0.0 && constant_c.is_finite()) {
        return Err(CurvatureError::BadSampling(format!("constant c = {constant_c} must be positive")));
    }
    let raw = constant_c * ((1.0 / epsilon).ln() + (1.0 / delta).ln()) / (epsilon * epsilon);
    if raw >= usize::MAX as f64 {
        return Err(CurvatureError::BadSampling("sample size overflows".into()));
    }
    Ok(raw.ceil() as usize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPlan {
    epsilon: f64,
    delta: f64,
    constant_c: f64,
    sample_count: usize,
}

impl SamplingPlan {
    pub fn new(epsilon: f64, delta: f64, constant_c: f64) -> Result<Self, CurvatureError> {
        let sample_count = sample_size(epsilon, delta, constant_c)?;
        Ok(Self { epsilon, delta, constant_c, sample_count })
    }

    /// A plan drawing exactly `count` edges, bypassing the bound.
    pub fn with_count(count: usize) -> Result<Self, CurvatureError> {
        if count == 0 {
            return Err(CurvatureError::BadSampling("sample count must be positive".into()));
        }
        Ok(Self { epsilon: f64::NAN, delta: f64::NAN, constant_c: f64::NAN, sample_count: count })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn constant_c(&self) -> f64 {
        self.constant_c
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }
}

/// Curvature of `min(plan.sample_count(), |E|)` edges drawn uniformly without
/// replacement. Cost depends on the sample and the sampled edges'
/// neighborhoods only, not on the size of the graph.
pub fn sampled_curvatures(g: &Graph, alpha: f64, plan: &SamplingPlan, seed: u64) -> Result<CurvatureMap, CurvatureError> {
    check_alpha(alpha)?;
    if g.edge_count() == 0 {
        return Err(CurvatureError::EmptyEdgeSet);
    }
    let count = plan.sample_count.min(g.edge_count());
    let mut rng = stream_rng(seed, Stream::Sampling);
    let mut edges = index::sample(&mut rng, g.edge_count(), count).into_vec();
    edges.sort_unstable();
    let entries = compute(g, &edges, alpha)?;
    Ok(CurvatureMap { entries, edge_total: g.edge_count(), alpha, sampled: true, seed: Some(seed) })
}
