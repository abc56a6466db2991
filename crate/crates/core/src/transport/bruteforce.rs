//! Exhaustive transportation solvers for small instances, used as oracles.
//!
//! Integer costs: enumerate every integral dual `(f, g)` with `f_0 = 0`,
//! `g = min_i (c_ij - f_i)` and `f_i - f_0` inside the box implied by the
//! double c-transform. The constraint matrix is totally unimodular, so some
//! optimal dual is in that finite set and strong duality gives the optimum.
//!
//! Real costs: enumerate all spanning-tree bases of the bipartite support
//! graph, solve each for its unique flow, keep the cheapest feasible one.

use crate::graph::DistanceTable;

use super::{cost_matrix, MassDistribution, TransportError};

/// Largest support either side may have.
pub const BRUTEFORCE_MAX_SUPPORT: usize = 7;

const MAX_BASES: f64 = 5e6;

/// Exhaustive optimal transport cost between two measures.
pub fn emd_bruteforce(mu: &MassDistribution, mv: &MassDistribution, table: &DistanceTable) -> Result<f64, TransportError> {
    let cost = cost_matrix(mu, mv, table)?;
    transport_bruteforce(mu.mass(), mv.mass(), &cost)
}

pub fn transport_bruteforce(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<f64, TransportError> {
    let (n, m) = (supply.len(), demand.len());
    if cost.len() != n * m {
        return Err(TransportError::CostShape { expected: n * m, found: cost.len() });
    }
    let total_a: f64 = supply.iter().sum();
    let total_b: f64 = demand.iter().sum();
    if (total_a - total_b).abs() > super::PLAN_TOLERANCE {
        return Err(TransportError::MassMismatch(total_a, total_b));
    }
    // A single point on either side forces the plan.
    if n == 1 {
        return Ok(demand.iter().zip(cost).map(|(b, c)| b * c).sum());
    }
    if m == 1 {
        return Ok(supply.iter().zip(cost).map(|(a, c)| a * c).sum());
    }
    if n.max(m) > BRUTEFORCE_MAX_SUPPORT {
        return Err(TransportError::SupportTooLarge(n.max(m)));
    }
    if cost.iter().all(|c| c.fract() == 0.0 && c.abs() < 1e6) {
        Ok(dual_enumeration(supply, demand, cost))
    } else if binomial(n * m, n + m - 1) <= MAX_BASES {
        Ok(basis_enumeration(supply, demand, cost))
    } else {
        Err(TransportError::NonIntegerCosts)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn dual_enumeration(supply: &[f64], demand: &[f64], cost: &[f64]) -> f64 {
    let (n, m) = (supply.len(), demand.len());
    // Make the row side the smaller one; the dual box is over rows.
    let (rows, cols, c): (&[f64], &[f64], Vec<f64>) = if n <= m {
        (supply, demand, cost.to_vec())
    } else {
        let mut t = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                t[j * n + i] = cost[i * m + j];
            }
        }
        (demand, supply, t)
    };
    let (n, m) = (rows.len(), cols.len());
    let c: Vec<i64> = c.iter().map(|&x| x as i64).collect();

    // f_i - f_0 lies in [min_j (c_ij - c_0j), max_j (c_ij - c_0j)].
    let bounds: Vec<(i64, i64)> = (0..n)
        .map(|i| {
            let diffs = (0..m).map(|j| c[i * m + j] - c[j]);
            (diffs.clone().min().unwrap(), diffs.max().unwrap())
        })
        .collect();

    let mut f: Vec<i64> = bounds.iter().map(|b| b.0).collect();
    f[0] = 0;
    let mut best = f64::NEG_INFINITY;
    loop {
        let mut value: f64 = rows.iter().zip(&f).map(|(a, &fi)| a * fi as f64).sum();
        for j in 0..m {
            let g = (0..n).map(|i| c[i * m + j] - f[i]).min().unwrap();
            value += cols[j] * g as f64;
        }
        if value > best {
            best = value;
        }
        // Odometer over f_1..f_{n-1}.
        let mut k = 1;
        loop {
            if k == n {
                return best;
            }
            if f[k] < bounds[k].1 {
                f[k] += 1;
                break;
            }
            f[k] = bounds[k].0;
            k += 1;
        }
    }
}

fn basis_enumeration(supply: &[f64], demand: &[f64], cost: &[f64]) -> f64 {
    let (n, m) = (supply.len(), demand.len());
    let need = n + m - 1;
    let mut chosen = Vec::with_capacity(need);
    let mut best = f64::INFINITY;
    choose_tree(0, n, m, &mut chosen, need, &mut |cells| {
        if let Some(value) = solve_basis(cells, supply, demand, cost) {
            best = best.min(value);
        }
    });
    best
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        x = parent[x];
    }
    x
}

/// Visits every set of `need` cells forming a spanning tree of K_{n,m}.
fn choose_tree(start: usize, n: usize, m: usize, chosen: &mut Vec<usize>, need: usize, visit: &mut dyn FnMut(&[usize])) {
    if chosen.len() == need {
        visit(chosen);
        return;
    }
    let cells = n * m;
    if cells - start < need - chosen.len() {
        return;
    }
    for cell in start..cells {
        if cells - cell < need - chosen.len() {
            break;
        }
        // Acyclicity check against the cells chosen so far.
        let mut parent: Vec<usize> = (0..n + m).collect();
        let mut acyclic = true;
        for &other in chosen.iter().chain(std::iter::once(&cell)) {
            let (a, b) = (find(&mut parent, other / m), find(&mut parent, n + other % m));
            if a == b {
                acyclic = false;
                break;
            }
            parent[a] = b;
        }
        if acyclic {
            chosen.push(cell);
            choose_tree(cell + 1, n, m, chosen, need, visit);
            chosen.pop();
        }
    }
}

/// Unique flow supported on a spanning-tree basis, by peeling leaves.
fn solve_basis(cells: &[usize], supply: &[f64], demand: &[f64], cost: &[f64]) -> Option<f64> {
    let (n, m) = (supply.len(), demand.len());
    let mut left: Vec<f64> = supply.iter().chain(demand).copied().collect();
    let mut open = vec![true; cells.len()];
    let mut degree = vec![0usize; n + m];
    for &c in cells {
        degree[c / m] += 1;
        degree[n + c % m] += 1;
    }
    let mut total = 0.0;
    for _ in 0..cells.len() {
        let (k, leaf) = cells.iter().enumerate().filter(|(k, _)| open[*k]).find_map(|(k, &c)| {
            let (r, col) = (c / m, n + c % m);
            if degree[r] == 1 {
                Some((k, r))
            } else if degree[col] == 1 {
                Some((k, col))
            } else {
                None
            }
        })?;
        let c = cells[k];
        let (r, col) = (c / m, n + c % m);
        let amount = left[leaf];
        if amount < -1e-12 {
            return None;
        }
        left[r] -= amount;
        left[col] -= amount;
        degree[r] -= 1;
        degree[col] -= 1;
        open[k] = false;
        total += amount * cost[c];
    }
    if left.iter().any(|x| x.abs() > 1e-9) {
        return None;
    }
    Some(total)
}
