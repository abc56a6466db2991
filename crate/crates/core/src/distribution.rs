//! Curvature histograms over `[-1, 1]`: the per-edge distribution and the
//! distribution of curvature pairs over adjacent edges.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::CurvatureMap;
use crate::graph::Graph;

pub const DEFAULT_BINS: usize = 20;

pub const RANGE: [f64; 2] = [-1.0, 1.0];

/// Values this close to a bin boundary are placed as if exactly on it.
const BOUNDARY_SNAP: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HistogramError {
    #[error("curvature map is empty")]
    EmptyMap,
    #[error("bin count must be at least 1")]
    NoBins,
    #[error("pair histogram needs every edge's curvature; got {covered} of {total} (sampled: {sampled}). Recompute without sampling or use a 1D histogram")]
    PartialCoverage { covered: usize, total: usize, sampled: bool },
    #[error("curvature map does not belong to this graph")]
    GraphMismatch,
    #[error("graph has no pair of adjacent edges")]
    NoAdjacentPairs,
    #[error("non-finite curvature value {0}")]
    NonFinite(f64),
    #[error("invalid histogram: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HistogramRepr")]
pub struct Histogram {
    dims: u8,
    bins: usize,
    range: [f64; 2],
    weights: Vec<f64>,
    total_samples: u64,
    clamped: u64,
}

#[derive(Deserialize)]
struct HistogramRepr {
    dims: u8,
    bins: usize,
    range: [f64; 2],
    weights: Vec<f64>,
    total_samples: u64,
    #[serde(default)]
    clamped: u64,
}

impl TryFrom<HistogramRepr> for Histogram {
    type Error = HistogramError;

    fn try_from(r: HistogramRepr) -> Result<Self, Self::Error> {
        if r.dims != 1 && r.dims != 2 {
            return Err(HistogramError::Invalid(format!("dims = {}", r.dims)));
        }
        if r.bins == 0 {
            return Err(HistogramError::NoBins);
        }
        if r.range != RANGE {
            return Err(HistogramError::Invalid("range must be [-1, 1]".into()));
        }
        let len = if r.dims == 1 { r.bins } else { r.bins * r.bins };
        if r.weights.len() != len {
            return Err(HistogramError::Invalid(format!("{} weights, expected {len}", r.weights.len())));
        }
        if r.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(HistogramError::Invalid("negative or non-finite weight".into()));
        }
        let sum: f64 = r.weights.iter().sum();
        if r.total_samples > 0 && (sum - 1.0).abs() > 1e-9 {
            return Err(HistogramError::Invalid(format!("weights sum to {sum}")));
        }
        Ok(Self {
            dims: r.dims,
            bins: r.bins,
            range: r.range,
            weights: r.weights,
            total_samples: r.total_samples,
            clamped: r.clamped,
        })
    }
}

impl Histogram {
    pub fn dims(&self) -> u8 {
        self.dims
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Row-major for 2D histograms.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_samples(&self) -> u64 {
        self.total_samples
    }

    /// Number of curvature values outside `[-1, 1]` folded into an end bin.
    pub fn clamped(&self) -> u64 {
        self.clamped
    }

    pub fn weight2(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.bins + j]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.dims == other.dims && self.bins == other.bins && self.range == other.range
    }

    /// Cumulative weights of a 1D histogram.
    pub fn cdf(&self) -> Vec<f64> {
        self.weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect()
    }

    /// Squared Euclidean distance between weight vectors.
    pub fn squared_distance(&self, other: &Self) -> Result<f64, HistogramError> {
        if !self.same_shape(other) {
            return Err(HistogramError::Invalid("histogram shapes differ".into()));
        }
        Ok(self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    /// Gnuplot `matrix` layout: one row of the 2D grid per line.
    pub fn to_matrix_text(&self) -> String {
        let mut out = String::new();
        let width = if self.dims == 2 { self.bins } else { self.weights.len() };
        for row in self.weights.chunks(width) {
            let line: Vec<String> = row.iter().map(|w| crate::io::format_sig12(*w)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Bin of `kappa` among `bins` equal bins over `[-1, 1]`, and whether the
/// value had to be clamped into range.
pub fn bin_index(kappa: f64, bins: usize) -> (usize, bool) {
    let clamped = !(RANGE[0] - BOUNDARY_SNAP..=RANGE[1] + BOUNDARY_SNAP).contains(&kappa);
    let width = bins as f64;
    let t = (kappa + 1.0) * width / 2.0;
    let nearest = t.round();
    let boundary = -1.0 + 2.0 * nearest / width;
    let raw = if (kappa - boundary).abs() <= BOUNDARY_SNAP { nearest } else { t.floor() };
    let idx = if raw <= 0.0 { 0 } else { (raw as usize).min(bins - 1) };
    (idx, clamped)
}

fn check_values(values: &[f64]) -> Result<(), HistogramError> {
    match values.iter().find(|k| !k.is_finite()) {
        Some(&k) => Err(HistogramError::NonFinite(k)),
        None => Ok(()),
    }
}

/// Normalized histogram of raw curvature values.
pub fn histogram_from_values(values: &[f64], bins: usize) -> Result<Histogram, HistogramError> {
    if bins == 0 {
        return Err(HistogramError::NoBins);
    }
    if values.is_empty() {
        return Err(HistogramError::EmptyMap);
    }
    check_values(values)?;
    let mut counts = vec![0u64; bins];
    let mut clamped = 0;
    for &k in values {
        let (idx, c) = bin_index(k, bins);
        counts[idx] += 1;
        clamped += c as u64;
    }
    let total = values.len() as u64;
    Ok(Histogram {
        dims: 1,
        bins,
        range: RANGE,
        weights: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        total_samples: total,
        clamped,
    })
}

/// Distribution of edge curvatures.
pub fn histogram_1d(cm: &CurvatureMap, bins: usize) -> Result<Histogram, HistogramError> {
    histogram_from_values(&cm.kappas(), bins)
}

/// Distribution of `(kappa(e), kappa(e'))` over ordered pairs of distinct
/// edges sharing an endpoint. Needs the full curvature map of `g`.
pub fn histogram_2d(g: &Graph, cm: &CurvatureMap, bins: usize) -> Result<Histogram, HistogramError> {
    if bins == 0 {
        return Err(HistogramError::NoBins);
    }
    if cm.is_sampled() || cm.len() != cm.edge_total() {
        return Err(HistogramError::PartialCoverage {
            covered: cm.len(),
            total: cm.edge_total(),
            sampled: cm.is_sampled(),
        });
    }
    if cm.edge_total() != g.edge_count()
        || cm.entries().iter().any(|e| {
            let edge = g.edges()[e.edge];
            (edge.u, edge.v) != (e.u, e.v)
        })
    {
        return Err(HistogramError::GraphMismatch);
    }
    if cm.is_empty() {
        return Err(HistogramError::EmptyMap);
    }
    let kappas = cm.kappas();
    check_values(&kappas)?;
    let mut clamped = 0u64;
    let edge_bin: Vec<usize> = kappas
        .iter()
        .map(|&k| {
            let (idx, c) = bin_index(k, bins);
            clamped += c as u64;
            idx
        })
        .collect();

    let mut counts = vec![0u64; bins * bins];
    let mut local: Vec<usize> = Vec::new();
    for x in 0..g.node_count() {
        local.clear();
        local.extend(g.neighbors(x).iter().map(|nb| edge_bin[nb.edge]));
        local.sort_unstable();
        // Run-length encode the incident bins, then count ordered pairs.
        let mut runs: Vec<(usize, u64)> = Vec::new();
        for &b in &local {
            match runs.last_mut() {
                Some((last, c)) if *last == b => *c += 1,
                _ => runs.push((b, 1)),
            }
        }
        for &(a, ca) in &runs {
            for &(b, cb) in &runs {
                counts[a * bins + b] += if a == b { ca * (ca - 1) } else { ca * cb };
            }
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(HistogramError::NoAdjacentPairs);
    }
    Ok(Histogram {
        dims: 2,
        bins,
        range: RANGE,
        weights: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        total_samples: total,
        clamped,
    })
}

/// Largest gap between the empirical CDFs of two samples.
pub fn cdf_sup_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}
