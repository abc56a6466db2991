//! Primal-dual min-cost flow on the dense bipartite transportation network.
//!
//! Network: `s -> source i` (capacity a_i), `source i -> sink j` (uncapacitated,
//! cost c_ij), `sink j -> t` (capacity b_j). Each phase runs Dijkstra on
//! reduced costs, shifts the node potentials, then saturates the
//! zero-reduced-cost subnetwork with a Dinic blocking flow. With integer ground
//! costs bounded by C there are at most C + 1 phases.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::{TransportError, TransportPlan};

const MASS_EPS: f64 = 1e-14;

#[derive(Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Solves `min sum f_ij c_ij` subject to row sums `supply` and column sums
/// `demand`. `cost` is row-major `supply.len() x demand.len()`.
pub fn solve_transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportPlan, TransportError> {
    let (n, m) = (supply.len(), demand.len());
    if cost.len() != n * m {
        return Err(TransportError::CostShape { expected: n * m, found: cost.len() });
    }
    if n == 0 || m == 0 {
        return Err(TransportError::BadDistribution("empty support".into()));
    }
    if let Some(&c) = cost.iter().find(|c| !(**c >= 0.0 && c.is_finite())) {
        return Err(TransportError::BadCost(c));
    }
    if let Some(&a) = supply.iter().chain(demand).find(|a| !(**a >= 0.0 && a.is_finite())) {
        return Err(TransportError::BadDistribution(format!("mass {a}")));
    }
    let total_supply: f64 = supply.iter().sum();
    let total_demand: f64 = demand.iter().sum();
    if (total_supply - total_demand).abs() > super::PLAN_TOLERANCE {
        return Err(TransportError::MassMismatch(total_supply, total_demand));
    }

    if n == 1 {
        let flow = (0..m).filter(|&j| demand[j] > 0.0).map(|j| (0, j, demand[j])).collect();
        let cost_total = (0..m).map(|j| demand[j] * cost[j]).sum();
        return Ok(TransportPlan {
            flow,
            cost: cost_total,
            row_potentials: vec![0.0],
            col_potentials: cost.to_vec(),
        });
    }
    if m == 1 {
        let flow = (0..n).filter(|&i| supply[i] > 0.0).map(|i| (i, 0, supply[i])).collect();
        let cost_total = (0..n).map(|i| supply[i] * cost[i]).sum();
        return Ok(TransportPlan {
            flow,
            cost: cost_total,
            row_potentials: cost.to_vec(),
            col_potentials: vec![0.0],
        });
    }

    let mut net = Network::new(supply, demand, cost);
    net.run();
    Ok(net.into_plan())
}

struct Network<'a> {
    n: usize,
    m: usize,
    cost: &'a [f64],
    flow: Vec<f64>,
    supply_left: Vec<f64>,
    demand_left: Vec<f64>,
    /// Node order: sources `0..n`, sinks `n..n+m`, then `s`, then `t`.
    potential: Vec<f64>,
    dist: Vec<f64>,
    level: Vec<u32>,
    cursor: Vec<usize>,
    mass_eps: f64,
    cost_tol: f64,
}

impl<'a> Network<'a> {
    fn new(supply: &[f64], demand: &[f64], cost: &'a [f64]) -> Self {
        let (n, m) = (supply.len(), demand.len());
        let scale = supply.iter().sum::<f64>().max(f64::MIN_POSITIVE);
        let cmax = cost.iter().cloned().fold(0.0, f64::max);
        let nodes = n + m + 2;
        Self {
            n,
            m,
            cost,
            flow: vec![0.0; n * m],
            supply_left: supply.to_vec(),
            demand_left: demand.to_vec(),
            potential: vec![0.0; nodes],
            dist: vec![f64::INFINITY; nodes],
            level: vec![u32::MAX; nodes],
            cursor: vec![0; nodes],
            mass_eps: MASS_EPS * scale,
            cost_tol: 1e-12 * (1.0 + cmax),
        }
    }

    fn s(&self) -> usize {
        self.n + self.m
    }

    fn t(&self) -> usize {
        self.n + self.m + 1
    }

    #[inline]
    fn reduced(&self, from: usize, to: usize, base: f64) -> f64 {
        base + self.potential[from] - self.potential[to]
    }

    fn remaining(&self) -> f64 {
        self.supply_left.iter().filter(|&&r| r > self.mass_eps).sum()
    }

    fn run(&mut self) {
        while self.remaining() > 0.0 {
            if !self.shortest_paths() {
                break;
            }
            self.blocking_flows();
        }
    }

    /// Dijkstra from `s` on non-negative reduced costs, then the potential
    /// shift `p += min(d, d_t)`. Returns false when `t` is unreachable.
    fn shortest_paths(&mut self) -> bool {
        let (n, m, s, t) = (self.n, self.m, self.s(), self.t());
        self.dist.fill(f64::INFINITY);
        let mut done = vec![false; n + m + 2];
        let mut heap = BinaryHeap::new();
        self.dist[s] = 0.0;
        heap.push(Reverse((Key(0.0), s)));
        while let Some(Reverse((Key(d), x))) = heap.pop() {
            if done[x] {
                continue;
            }
            done[x] = true;
            if x == t {
                break;
            }
            let mut relax = |dist: &mut Vec<f64>, y: usize, rc: f64| {
                let nd = d + rc.max(0.0);
                if nd < dist[y] {
                    dist[y] = nd;
                    heap.push(Reverse((Key(nd), y)));
                }
            };
            if x == s {
                for i in 0..n {
                    if self.supply_left[i] > self.mass_eps {
                        let rc = self.reduced(s, i, 0.0);
                        relax(&mut self.dist, i, rc);
                    }
                }
            } else if x < n {
                for j in 0..m {
                    let rc = self.reduced(x, n + j, self.cost[x * m + j]);
                    relax(&mut self.dist, n + j, rc);
                }
            } else {
                let j = x - n;
                if self.demand_left[j] > self.mass_eps {
                    let rc = self.reduced(x, t, 0.0);
                    relax(&mut self.dist, t, rc);
                }
                for i in 0..n {
                    if self.flow[i * m + j] > self.mass_eps {
                        let rc = self.reduced(x, i, -self.cost[i * m + j]);
                        relax(&mut self.dist, i, rc);
                    }
                }
            }
        }
        let dt = self.dist[t];
        if !dt.is_finite() {
            return false;
        }
        for (p, &d) in self.potential.iter_mut().zip(&self.dist) {
            *p += d.min(dt);
        }
        true
    }

    // Residual arcs of the admissible (zero reduced cost) subnetwork.

    fn admissible_source(&self, i: usize) -> bool {
        self.supply_left[i] > self.mass_eps && self.reduced(self.s(), i, 0.0) <= self.cost_tol
    }

    fn admissible_forward(&self, i: usize, j: usize) -> bool {
        self.reduced(i, self.n + j, self.cost[i * self.m + j]) <= self.cost_tol
    }

    fn admissible_backward(&self, j: usize, i: usize) -> bool {
        self.flow[i * self.m + j] > self.mass_eps
            && self.reduced(self.n + j, i, -self.cost[i * self.m + j]) <= self.cost_tol
    }

    fn admissible_sink(&self, j: usize) -> bool {
        self.demand_left[j] > self.mass_eps && self.reduced(self.n + j, self.t(), 0.0) <= self.cost_tol
    }

    fn build_levels(&mut self) -> bool {
        let (n, m, s, t) = (self.n, self.m, self.s(), self.t());
        self.level.fill(u32::MAX);
        self.level[s] = 0;
        let mut queue = std::collections::VecDeque::new();
        for i in 0..n {
            if self.admissible_source(i) {
                self.level[i] = 1;
                queue.push_back(i);
            }
        }
        while let Some(x) = queue.pop_front() {
            let next = self.level[x] + 1;
            if x < n {
                for j in 0..m {
                    if self.level[n + j] == u32::MAX && self.admissible_forward(x, j) {
                        self.level[n + j] = next;
                        queue.push_back(n + j);
                    }
                }
            } else {
                let j = x - n;
                if self.level[t] == u32::MAX && self.admissible_sink(j) {
                    self.level[t] = next;
                }
                for i in 0..n {
                    if self.level[i] == u32::MAX && self.admissible_backward(j, i) {
                        self.level[i] = next;
                        queue.push_back(i);
                    }
                }
            }
        }
        self.level[t] != u32::MAX
    }

    fn blocking_flows(&mut self) {
        while self.build_levels() {
            self.cursor.fill(0);
            let s = self.s();
            loop {
                let pushed = self.augment(s, f64::INFINITY);
                if pushed <= 0.0 {
                    break;
                }
            }
        }
    }

    /// One augmenting path below `x` in the level graph; returns the amount.
    fn augment(&mut self, x: usize, limit: f64) -> f64 {
        let (n, m, s, t) = (self.n, self.m, self.s(), self.t());
        if x == t {
            return limit;
        }
        let want = self.level[x] + 1;
        if x == s {
            while self.cursor[s] < n {
                let i = self.cursor[s];
                if self.level[i] == want && self.admissible_source(i) {
                    let got = self.augment(i, limit.min(self.supply_left[i]));
                    if got > 0.0 {
                        self.supply_left[i] -= got;
                        return got;
                    }
                }
                self.cursor[s] += 1;
            }
        } else if x < n {
            while self.cursor[x] < m {
                let j = self.cursor[x];
                if self.level[n + j] == want && self.admissible_forward(x, j) {
                    let got = self.augment(n + j, limit);
                    if got > 0.0 {
                        self.flow[x * m + j] += got;
                        return got;
                    }
                }
                self.cursor[x] += 1;
            }
        } else {
            let j = x - n;
            // Slot 0 is the arc to t, slots 1..=n the reverse arcs to sources.
            while self.cursor[x] <= n {
                let slot = self.cursor[x];
                if slot == 0 {
                    if self.level[t] == want && self.admissible_sink(j) {
                        let got = limit.min(self.demand_left[j]);
                        self.demand_left[j] -= got;
                        return got;
                    }
                } else {
                    let i = slot - 1;
                    if self.level[i] == want && self.admissible_backward(j, i) {
                        let got = self.augment(i, limit.min(self.flow[i * m + j]));
                        if got > 0.0 {
                            self.flow[i * m + j] -= got;
                            return got;
                        }
                    }
                }
                self.cursor[x] += 1;
            }
        }
        0.0
    }

    fn into_plan(self) -> TransportPlan {
        let m = self.m;
        let mut flow = Vec::new();
        let mut total = 0.0;
        for (idx, &f) in self.flow.iter().enumerate() {
            if f > self.mass_eps {
                flow.push((idx / m, idx % m, f));
                total += f * self.cost[idx];
            }
        }
        // Reduced cost c_ij + p_i - p_j >= 0 gives the dual pair (-p_i, p_j).
        let row_potentials = self.potential[..self.n].iter().map(|p| -p).collect();
        let col_potentials = self.potential[self.n..self.n + m].to_vec();
        TransportPlan { flow, cost: total, row_potentials, col_potentials }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment_picks_cheaper_diagonal() {
        let plan = solve_transport(&[0.5, 0.5], &[0.5, 0.5], &[1.0, 3.0, 3.0, 1.0]).unwrap();
        assert!((plan.cost - 1.0).abs() < 1e-12);
        plan.certify(&[0.5, 0.5], &[0.5, 0.5], &[1.0, 3.0, 3.0, 1.0]).unwrap();
    }

    #[test]
    fn requires_rerouting_through_backward_arc() {
        // Greedy would ship row 0 to column 0 first; optimum sends it to column 1.
        let cost = [0.0, 1.0, 0.0, 10.0];
        let (a, b) = ([0.5, 0.5], [0.5, 0.5]);
        let plan = solve_transport(&a, &b, &cost).unwrap();
        assert!((plan.cost - 0.5).abs() < 1e-12);
        plan.certify(&a, &b, &cost).unwrap();
    }

    #[test]
    fn unequal_sides_and_real_costs() {
        let a = [0.2, 0.3, 0.5];
        let b = [0.6, 0.4];
        let cost = [0.3, 2.2, 1.7, 0.1, 0.9, 0.8];
        let plan = solve_transport(&a, &b, &cost).unwrap();
        plan.certify(&a, &b, &cost).unwrap();
        // Row 1 prefers column 1 (0.1), row 0 column 0 (0.3); row 2 fills the rest:
        // 0.2*0.3 + 0.3*0.1 + 0.4*0.9 + 0.1*0.8
        assert!((plan.cost - 0.53).abs() < 1e-12, "{}", plan.cost);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            solve_transport(&[1.0], &[0.5], &[1.0]),
            Err(TransportError::MassMismatch(..))
        ));
        assert!(matches!(solve_transport(&[1.0], &[1.0], &[]), Err(TransportError::CostShape { .. })));
        assert!(matches!(solve_transport(&[0.5, 0.5], &[1.0], &[1.0, -1.0]), Err(TransportError::BadCost(_))));
    }

    #[test]
    fn zero_mass_rows_are_tolerated() {
        let a = [0.0, 1.0];
        let b = [0.5, 0.5];
        let cost = [0.0, 0.0, 1.0, 2.0];
        let plan = solve_transport(&a, &b, &cost).unwrap();
        assert!((plan.cost - 1.5).abs() < 1e-12);
    }
}
