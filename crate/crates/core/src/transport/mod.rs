//! Neighborhood probability measures and exact earth mover distance between
//! them.

mod bruteforce;
mod solver;

pub use bruteforce::{emd_bruteforce, transport_bruteforce, BRUTEFORCE_MAX_SUPPORT};
pub use solver::solve_transport;

use thiserror::Error;

use crate::graph::{DistanceTable, Graph, NodeId};

/// Tolerance for marginal, cost and optimality checks on transport plans.
pub const PLAN_TOLERANCE: f64 = 1e-9;

const MASS_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("node {0} is isolated; its neighborhood measure is undefined")]
    IsolatedNode(NodeId),
    #[error("alpha = {0} is not in [0, 1]")]
    BadAlpha(f64),
    #[error("invalid mass distribution: {0}")]
    BadDistribution(String),
    #[error("total masses differ: {0} vs {1}")]
    MassMismatch(f64, f64),
    #[error("cost table does not cover node {0}")]
    MissingCost(NodeId),
    #[error("cost matrix has {found} entries, expected {expected}")]
    CostShape { expected: usize, found: usize },
    #[error("cost entry {0} is negative or not finite")]
    BadCost(f64),
    #[error("support of size {0} is too large for exhaustive search")]
    SupportTooLarge(usize),
    #[error("exhaustive search needs integer costs for supports this large")]
    NonIntegerCosts,
    #[error("optimality certificate failed: {0}")]
    CertificateFailed(String),
}

/// A finite probability measure on graph nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct MassDistribution {
    support: Vec<NodeId>,
    mass: Vec<f64>,
}

impl MassDistribution {
    /// Validates distinct support, strictly positive masses summing to 1.
    pub fn new(support: Vec<NodeId>, mass: Vec<f64>) -> Result<Self, TransportError> {
        if support.len() != mass.len() || support.is_empty() {
            return Err(TransportError::BadDistribution("support and mass lengths differ or are empty".into()));
        }
        if let Some(&m) = mass.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(TransportError::BadDistribution(format!("mass {m} is not positive")));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_SUM_TOLERANCE {
            return Err(TransportError::BadDistribution(format!("masses sum to {total}")));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(TransportError::BadDistribution("repeated support node".into()));
        }
        Ok(Self { support, mass })
    }

    pub fn point(node: NodeId) -> Self {
        Self { support: vec![node], mass: vec![1.0] }
    }

    pub fn support(&self) -> &[NodeId] {
        &self.support
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// Lazy random-walk measure: mass `alpha` on `x`, the rest split evenly over
/// its neighbors. Zero-mass points are left out of the support.
pub fn neighborhood_measure(g: &Graph, x: NodeId, alpha: f64) -> Result<MassDistribution, TransportError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(TransportError::BadAlpha(alpha));
    }
    let deg = g.degree(x);
    if deg == 0 {
        return Err(TransportError::IsolatedNode(x));
    }
    if alpha == 1.0 {
        return Ok(MassDistribution::point(x));
    }
    let share = (1.0 - alpha) / deg as f64;
    let mut support = Vec::with_capacity(deg + 1);
    let mut mass = Vec::with_capacity(deg + 1);
    if alpha > 0.0 {
        support.push(x);
        mass.push(alpha);
    }
    for nb in g.neighbors(x) {
        support.push(nb.node);
        mass.push(share);
    }
    Ok(MassDistribution { support, mass })
}

/// An optimal transport plan with the dual potentials certifying it.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// `(source index, target index, amount)` for every positive flow.
    pub flow: Vec<(usize, usize, f64)>,
    pub cost: f64,
    pub row_potentials: Vec<f64>,
    pub col_potentials: Vec<f64>,
}

impl TransportPlan {
    pub fn dual_objective(&self, supply: &[f64], demand: &[f64]) -> f64 {
        let rows: f64 = supply.iter().zip(&self.row_potentials).map(|(a, u)| a * u).sum();
        let cols: f64 = demand.iter().zip(&self.col_potentials).map(|(b, v)| b * v).sum();
        rows + cols
    }

    /// Checks marginals, the reported cost, dual feasibility, complementary
    /// slackness and the primal-dual gap, all at [`PLAN_TOLERANCE`].
    pub fn certify(&self, supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<(), TransportError> {
        let (n, m) = (supply.len(), demand.len());
        let fail = |msg: String| Err(TransportError::CertificateFailed(msg));
        let mut rows = vec![0.0; n];
        let mut cols = vec![0.0; m];
        let mut total = 0.0;
        for &(i, j, f) in &self.flow {
            if f < -PLAN_TOLERANCE {
                return fail(format!("negative flow {f} at ({i}, {j})"));
            }
            rows[i] += f;
            cols[j] += f;
            total += f * cost[i * m + j];
            let slack = cost[i * m + j] - self.row_potentials[i] - self.col_potentials[j];
            if f > PLAN_TOLERANCE && slack.abs() > PLAN_TOLERANCE {
                return fail(format!("flow on ({i}, {j}) with reduced cost {slack}"));
            }
        }
        for (i, (&r, &a)) in rows.iter().zip(supply).enumerate() {
            if (r - a).abs() > PLAN_TOLERANCE {
                return fail(format!("row {i} ships {r}, supply {a}"));
            }
        }
        for (j, (&c, &b)) in cols.iter().zip(demand).enumerate() {
            if (c - b).abs() > PLAN_TOLERANCE {
                return fail(format!("column {j} receives {c}, demand {b}"));
            }
        }
        if (total - self.cost).abs() > PLAN_TOLERANCE {
            return fail(format!("reported cost {} but flows cost {total}", self.cost));
        }
        for i in 0..n {
            for j in 0..m {
                let slack = cost[i * m + j] - self.row_potentials[i] - self.col_potentials[j];
                if slack < -PLAN_TOLERANCE {
                    return fail(format!("dual infeasible at ({i}, {j}): {slack}"));
                }
            }
        }
        let gap = self.cost - self.dual_objective(supply, demand);
        if gap.abs() > PLAN_TOLERANCE {
            return fail(format!("primal-dual gap {gap}"));
        }
        Ok(())
    }
}

/// Dense cost matrix for `mu.support x mv.support`, looked up in `table`.
pub(crate) fn cost_matrix(
    mu: &MassDistribution,
    mv: &MassDistribution,
    table: &DistanceTable,
) -> Result<Vec<f64>, TransportError> {
    if table.sources == mu.support && table.targets == mv.support {
        return Ok(table.dist.clone());
    }
    let index = |nodes: &[NodeId], x: NodeId| {
        nodes.iter().position(|&y| y == x).ok_or(TransportError::MissingCost(x))
    };
    let rows = mu.support.iter().map(|&x| index(&table.sources, x)).collect::<Result<Vec<_>, _>>()?;
    let cols = mv.support.iter().map(|&y| index(&table.targets, y)).collect::<Result<Vec<_>, _>>()?;
    let mut cost = Vec::with_capacity(rows.len() * cols.len());
    for &r in &rows {
        for &c in &cols {
            cost.push(table.get(r, c));
        }
    }
    Ok(cost)
}

/// Exact earth mover distance from `mu` to `mv` under the ground costs in
/// `table`. The returned plan has passed [`TransportPlan::certify`].
pub fn emd(mu: &MassDistribution, mv: &MassDistribution, table: &DistanceTable) -> Result<TransportPlan, TransportError> {
    let cost = cost_matrix(mu, mv, table)?;
    let plan = solve_transport(&mu.mass, &mv.mass, &cost)?;
    plan.certify(&mu.mass, &mv.mass, &cost)?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::truncated_distances;

    fn triangle() -> Graph {
        Graph::from_unweighted_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn measure_on_triangle() {
        let m = neighborhood_measure(&triangle(), 0, 0.5).unwrap();
        assert_eq!(m.support(), &[0, 1, 2]);
        assert_eq!(m.mass(), &[0.5, 0.25, 0.25]);
    }

    #[test]
    fn measure_on_star_center() {
        let star = Graph::from_unweighted_edges(5, (1..5).map(|l| (0, l))).unwrap();
        let m = neighborhood_measure(&star, 0, 0.5).unwrap();
        assert_eq!(m.mass(), &[0.5, 0.125, 0.125, 0.125, 0.125]);
    }

    #[test]
    fn measure_without_laziness_excludes_center() {
        let path = Graph::from_unweighted_edges(3, [(0, 1), (1, 2)]).unwrap();
        let m = neighborhood_measure(&path, 1, 0.0).unwrap();
        assert_eq!(m.support(), &[0, 2]);
        assert_eq!(m.mass(), &[0.5, 0.5]);
        assert_eq!(neighborhood_measure(&path, 1, 1.0).unwrap(), MassDistribution::point(1));
    }

    #[test]
    fn measure_errors() {
        let g = Graph::from_unweighted_edges(3, [(0, 1)]).unwrap();
        assert_eq!(neighborhood_measure(&g, 2, 0.5), Err(TransportError::IsolatedNode(2)));
        assert_eq!(neighborhood_measure(&g, 0, 1.5), Err(TransportError::BadAlpha(1.5)));
    }

    #[test]
    fn distribution_validation() {
        assert!(MassDistribution::new(vec![0, 1], vec![0.5, 0.5]).is_ok());
        assert!(MassDistribution::new(vec![0, 0], vec![0.5, 0.5]).is_err());
        assert!(MassDistribution::new(vec![0, 1], vec![0.5, 0.6]).is_err());
        assert!(MassDistribution::new(vec![0, 1], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn identical_measures_cost_nothing() {
        let g = triangle();
        let m = neighborhood_measure(&g, 0, 0.5).unwrap();
        let t = truncated_distances(&g, m.support(), m.support(), 3.0).unwrap();
        assert!(emd(&m, &m, &t).unwrap().cost.abs() < 1e-12);
    }

    #[test]
    fn point_masses() {
        let table = DistanceTable { sources: vec![0], targets: vec![1], dist: vec![2.5] };
        let plan = emd(&MassDistribution::point(0), &MassDistribution::point(1), &table).unwrap();
        assert_eq!(plan.cost, 2.5);
    }

    #[test]
    fn triangle_edge_costs_a_quarter() {
        let g = triangle();
        let mu = neighborhood_measure(&g, 0, 0.5).unwrap();
        let mv = neighborhood_measure(&g, 1, 0.5).unwrap();
        let t = truncated_distances(&g, mu.support(), mv.support(), 3.0).unwrap();
        assert!((emd(&mu, &mv, &t).unwrap().cost - 0.25).abs() < 1e-12);
    }

    #[test]
    fn cost_lookup_reorders_and_reports_gaps() {
        let table = DistanceTable { sources: vec![5, 3], targets: vec![7], dist: vec![1.0, 2.0] };
        let mu = MassDistribution::new(vec![3, 5], vec![0.25, 0.75]).unwrap();
        let mv = MassDistribution::point(7);
        assert_eq!(cost_matrix(&mu, &mv, &table).unwrap(), vec![2.0, 1.0]);
        assert_eq!(
            cost_matrix(&mu, &MassDistribution::point(8), &table),
            Err(TransportError::MissingCost(8))
        );
    }
}
