//! Graph collections named on the command line, and turning their members
//! into histogram features.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ricci_core::curvature::{all_curvatures, sampled_curvatures};
use ricci_core::distribution::{histogram_1d, histogram_2d, Histogram};
use ricci_core::graph::{load_tu_collection, parse_edge_list_with_ids, Graph};
use ricci_core::io::CurvatureFile;

use crate::config::RunConfig;
use crate::error::CliError;

/// One row of a manifest CSV. `file` is relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub file: String,
    pub label: String,
    #[serde(default)]
    pub name: String,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        let mut row: ManifestRow = row.map_err(|e| CliError::io(path, e))?;
        if row.name.is_empty() {
            row.name = row.file.clone();
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        writer.serialize(row).map_err(|e| CliError::io(path, e))?;
    }
    writer.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone)]
pub enum Source {
    File(PathBuf),
    Graph(Graph),
}

#[derive(Debug, Clone)]
pub struct Member {
    pub name: String,
    pub label: String,
    pub source: Source,
}

pub fn from_manifests(paths: &[PathBuf]) -> Result<Vec<Member>, CliError> {
    let mut members = Vec::new();
    for path in paths {
        let base = path.parent().unwrap_or(Path::new("."));
        for row in read_manifest(path)? {
            members.push(Member { name: row.name, label: row.label, source: Source::File(base.join(&row.file)) });
        }
    }
    Ok(members)
}

pub fn from_tu(dir: &Path, name: &str) -> Result<Vec<Member>, CliError> {
    let collection = load_tu_collection(dir, name)?;
    Ok(collection
        .graphs
        .into_iter()
        .zip(collection.labels)
        .zip(collection.names)
        .map(|((g, label), name)| Member { name, label: label.to_string(), source: Source::Graph(g) })
        .collect())
}

/// Integer class labels: the labels themselves if all are integers,
/// otherwise ranks among the sorted distinct labels.
pub fn numeric_labels(members: &[Member]) -> Vec<i64> {
    let parsed: Option<Vec<i64>> = members.iter().map(|m| m.label.trim().parse().ok()).collect();
    parsed.unwrap_or_else(|| {
        let distinct: Vec<&str> = members.iter().map(|m| m.label.as_str()).collect::<BTreeSet<_>>().into_iter().collect();
        members.iter().map(|m| distinct.binary_search(&m.label.as_str()).unwrap() as i64).collect()
    })
}

pub fn read_graph(path: &Path) -> Result<(Graph, Vec<i64>), CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_edge_list_with_ids(BufReader::new(file)).map_err(|e| CliError::io(path, e))
}

pub fn read_curvature(path: &Path) -> Result<CurvatureFile, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    CurvatureFile::read(BufReader::new(file)).map_err(|e| CliError::io(path, e))
}

pub fn read_histogram(path: &Path) -> Result<Histogram, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| CliError::io(path, e))
}

/// Histogram of a graph under the configured dims and sampling.
pub fn graph_histogram(g: &Graph, cfg: &RunConfig) -> Result<Histogram, CliError> {
    if let Some(plan) = cfg.sampling_plan()? {
        let cm = sampled_curvatures(g, cfg.alpha, &plan, cfg.seed)?;
        return Ok(histogram_1d(&cm, cfg.bins)?);
    }
    let cm = all_curvatures(g, cfg.alpha)?;
    Ok(match cfg.feature_dims {
        1 => histogram_1d(&cm, cfg.bins)?,
        _ => histogram_2d(g, &cm, cfg.bins)?,
    })
}

/// Histogram of a curvature file. Sampled files give 1D histograms unless
/// 2D was asked for explicitly, which is an error.
pub fn curvature_histogram(file: &CurvatureFile, cfg: &RunConfig) -> Result<Histogram, CliError> {
    let (g, cm, _) = file.to_graph_and_map()?;
    let dims = if cm.is_sampled() && !cfg.dims_explicit { 1 } else { cfg.feature_dims };
    Ok(match dims {
        1 => histogram_1d(&cm, cfg.bins)?,
        _ => histogram_2d(&g, &cm, cfg.bins)?,
    })
}

fn is_ext(path: &Path, ext: &str) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn member_histogram(m: &Member, cfg: &RunConfig) -> Result<Histogram, CliError> {
    let tag = |e: CliError| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", m.name)),
        other => other,
    };
    match &m.source {
        Source::Graph(g) => graph_histogram(g, cfg).map_err(tag),
        Source::File(path) if is_ext(path, "json") => read_histogram(path),
        Source::File(path) if is_ext(path, "csv") => curvature_histogram(&read_curvature(path)?, cfg).map_err(tag),
        Source::File(path) => graph_histogram(&read_graph(path)?.0, cfg).map_err(tag),
    }
}

pub fn histograms(members: &[Member], cfg: &RunConfig) -> Result<Vec<Histogram>, CliError> {
    if members.is_empty() {
        return Err(CliError::Data("collection is empty".into()));
    }
    members.par_iter().map(|m| member_histogram(m, cfg)).collect()
}
