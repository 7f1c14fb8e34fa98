//! Experiment driver: paired sampler comparisons, threshold sweeps and
//! overlay verification, with deterministic CSV/JSON reports.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::access::{load_edgelist, AccessLayer, AttributeTable, EdgeMode, DEGREE};
use crate::error::{Error, Result};
use crate::estimation::{importance_estimate, kl_bias, relative_error, Distribution};
use crate::generators::{barbell, latent_space, LatentSpaceConfig};
use crate::graph::Graph;
use crate::samplers::{SamplerConfig, Scheme, Walker};
use crate::spectral::{conductance_exact, mixing_time_from_slem, slem, MixingTime, EXACT_LIMIT};

/// KL is only reported for graphs up to this size.
pub const KL_NODE_LIMIT: usize = 1000;
/// Relative-error levels of the query-cost curve.
pub const ERROR_LEVELS: [f64; 6] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GraphSource {
    Barbell(usize),
    /// Latent-space sample, optionally reduced to its largest component.
    LatentSpace {
        config: LatentSpaceConfig,
        giant: bool,
    },
    EdgeList {
        path: PathBuf,
        #[serde(skip)]
        mode: EdgeMode,
    },
}

impl GraphSource {
    pub fn load(&self) -> Result<Graph> {
        match self {
            GraphSource::Barbell(m) => barbell(*m),
            GraphSource::LatentSpace { config, giant } => {
                let lg = latent_space(config)?;
                if *giant {
                    Ok(lg.giant_component()?.graph)
                } else {
                    Ok(lg.graph)
                }
            }
            GraphSource::EdgeList { path, mode } => load_edgelist(path, *mode),
        }
    }
}

/// Where the reference value for relative errors comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    /// Population mean over the full graph.
    Exact,
    /// Pooled mean of every successful run's estimate.
    Presumptive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub schemes: Vec<Scheme>,
    pub attribute: String,
    pub geweke_threshold: f64,
    pub runs: usize,
    pub seed: u64,
    pub sample_size: usize,
    pub jump_prob: f64,
    pub replace_prob: f64,
    pub budget: Option<usize>,
    pub step_cap: u64,
    pub truth: Truth,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            schemes: vec![Scheme::Srw, Scheme::MTO_BOTH],
            attribute: DEGREE.to_string(),
            geweke_threshold: 0.1,
            runs: 20,
            seed: 0,
            sample_size: 100,
            jump_prob: 0.5,
            replace_prob: 0.5,
            budget: None,
            step_cap: 1_000_000,
            truth: Truth::Exact,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be at least 1".into()));
        }
        if !(self.geweke_threshold > 0.0 && self.geweke_threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "geweke threshold {} outside (0, 1]",
                self.geweke_threshold
            )));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("no schemes selected".into()));
        }
        self.sampler_config(Scheme::Srw, 0).validate()
    }

    /// Walk seed of run `run`; shared by every scheme so runs are paired.
    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed
            .wrapping_add((run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    pub fn sampler_config(&self, scheme: Scheme, run: usize) -> SamplerConfig {
        SamplerConfig {
            scheme,
            jump_prob: self.jump_prob,
            replace_prob: self.replace_prob,
            geweke_threshold: self.geweke_threshold,
            sample_size: self.sample_size,
            step_cap: self.step_cap,
            diagnostic: DEGREE.to_string(),
            seed: self.run_seed(run),
            ..SamplerConfig::default()
        }
    }
}

/// Population mean of `attribute` over every node.
pub fn population_mean(g: &Graph, attrs: Option<&AttributeTable>, attribute: &str) -> Result<f64> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut total = 0.0;
    for v in 0..n {
        total += if attribute == DEGREE {
            g.degree(v)? as f64
        } else {
            attrs
                .and_then(|t| t.get(v, attribute))
                .ok_or_else(|| Error::AttributeMissing(attribute.to_string()))?
        };
    }
    Ok(total / n as f64)
}

/// One scheme x run measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementRow {
    pub scheme: String,
    pub run: usize,
    pub seed: u64,
    pub attribute: String,
    pub n: usize,
    pub estimate: Option<f64>,
    pub truth: Option<f64>,
    pub relative_error: Option<f64>,
    pub unique_queries: usize,
    pub steps: u64,
    pub geweke_z: Option<f64>,
    pub kl: Option<f64>,
    pub status: String,
}

impl MeasurementRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const MEASUREMENT_HEADER: &str =
    "scheme,run,seed,attribute,N,estimate,truth,relative_error,unique_queries,steps,geweke_z,kl,status";

pub fn write_measurements_csv<W: Write>(rows: &[MeasurementRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{MEASUREMENT_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scheme,
            r.run,
            r.seed,
            r.attribute,
            r.n,
            opt(r.estimate),
            opt(r.truth),
            opt(r.relative_error),
            r.unique_queries,
            r.steps,
            opt(r.geweke_z),
            opt(r.kl),
            r.status.replace(',', ";"),
        )?;
    }
    Ok(())
}

/// Stationary law the walk of `scheme` targets on topology `g`.
fn target_law(scheme: Scheme, g: &Graph) -> Result<Distribution> {
    match scheme {
        Scheme::Mhrw | Scheme::Rj => {
            let n = g.node_count();
            Distribution::new(vec![1.0 / n as f64; n])
        }
        Scheme::Srw | Scheme::Mto { .. } => {
            let masses: Vec<f64> = (0..g.node_count())
                .map(|v| g.degree(v).map(|d| d as f64))
                .collect::<Result<_>>()?;
            Distribution::from_masses(&masses)
        }
    }
}

fn measure(
    spec: &ExperimentSpec,
    g: &Graph,
    attrs: Option<&AttributeTable>,
    scheme: Scheme,
    run: usize,
) -> MeasurementRow {
    let seed = spec.run_seed(run);
    let mut row = MeasurementRow {
        scheme: scheme.name().to_string(),
        run,
        seed,
        attribute: spec.attribute.clone(),
        n: spec.sample_size,
        estimate: None,
        truth: None,
        relative_error: None,
        unique_queries: 0,
        steps: 0,
        geweke_z: None,
        kl: None,
        status: "ok".to_string(),
    };
    let mut access = AccessLayer::new(g).with_budget(spec.budget);
    if let Some(t) = attrs {
        access = access.with_attributes(t);
    }
    let mut walker = match Walker::new(access, spec.sampler_config(scheme, run)) {
        Ok(w) => w,
        Err(e) => {
            row.status = e.to_string();
            return row;
        }
    };
    let outcome = walker.run().and_then(|samples| {
        let estimate = importance_estimate(&samples, &spec.attribute)?;
        let z = samples.entries.iter().map(|e| e.geweke_z).sum::<f64>() / samples.len() as f64;
        let kl = if g.node_count() <= KL_NODE_LIMIT {
            let topology = walker.export_overlay(g)?;
            let ideal = target_law(scheme, &topology)?;
            let empirical = Distribution::from_counts(&samples.counts(g.node_count()))?;
            Some(kl_bias(&ideal, &empirical)?)
        } else {
            None
        };
        Ok((estimate, z, kl))
    });
    row.unique_queries = walker.unique_queries();
    row.steps = walker.state().steps;
    match outcome {
        Ok((estimate, z, kl)) => {
            row.estimate = Some(estimate);
            row.geweke_z = Some(z);
            row.kl = kl;
        }
        Err(e) => row.status = e.to_string(),
    }
    row
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeSummary {
    pub scheme: String,
    pub runs: usize,
    pub failures: usize,
    pub mean_unique_queries: f64,
    pub max_unique_queries: usize,
    pub mean_relative_error: Option<f64>,
    pub median_relative_error: Option<f64>,
    pub mean_kl: Option<f64>,
    /// For each relative-error level, the largest query cost among runs
    /// whose error is at most that level.
    pub cost_curve: Vec<(f64, Option<usize>)>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

fn summarize(scheme: &str, rows: &[&MeasurementRow]) -> SchemeSummary {
    let ok: Vec<&&MeasurementRow> = rows.iter().filter(|r| r.ok()).collect();
    let errs: Vec<f64> = ok.iter().filter_map(|r| r.relative_error).collect();
    let kls: Vec<f64> = ok.iter().filter_map(|r| r.kl).collect();
    let queries: Vec<f64> = rows.iter().map(|r| r.unique_queries as f64).collect();
    SchemeSummary {
        scheme: scheme.to_string(),
        runs: rows.len(),
        failures: rows.len() - ok.len(),
        mean_unique_queries: mean(&queries).unwrap_or(0.0),
        max_unique_queries: rows.iter().map(|r| r.unique_queries).max().unwrap_or(0),
        mean_relative_error: mean(&errs),
        median_relative_error: median(&errs),
        mean_kl: mean(&kls),
        cost_curve: ERROR_LEVELS
            .iter()
            .map(|&level| {
                let cost = ok
                    .iter()
                    .filter(|r| r.relative_error.is_some_and(|e| e <= level))
                    .map(|r| r.unique_queries)
                    .max();
                (level, cost)
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub truth: Option<f64>,
    pub truth_mode: Truth,
    pub rows: Vec<MeasurementRow>,
    pub summaries: Vec<SchemeSummary>,
}

impl ExperimentReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.ok()).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        write_measurements_csv(&self.rows, out)
    }

    pub fn summary_json(&self) -> serde_json::Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            truth: Option<f64>,
            truth_mode: Truth,
            failures: usize,
            schemes: &'a [SchemeSummary],
        }
        serde_json::to_string_pretty(&Summary {
            truth: self.truth,
            truth_mode: self.truth_mode,
            failures: self.failures(),
            schemes: &self.summaries,
        })
    }

    /// Writes `measurements.csv` and `summary.json` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut csv = BufWriter::new(File::create(dir.join("measurements.csv"))?);
        self.write_csv(&mut csv)?;
        csv.flush()?;
        let json = self
            .summary_json()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        std::fs::write(dir.join("summary.json"), json + "\n")?;
        Ok(())
    }
}

/// Runs every scheme for every run index. Runs execute in parallel; rows
/// are ordered by (scheme, run).
pub fn run_experiment(
    spec: &ExperimentSpec,
    g: &Graph,
    attrs: Option<&AttributeTable>,
) -> Result<ExperimentReport> {
    spec.validate()?;
    let jobs: Vec<(Scheme, usize)> = spec
        .schemes
        .iter()
        .flat_map(|&s| (0..spec.runs).map(move |r| (s, r)))
        .collect();
    let mut rows: Vec<MeasurementRow> = jobs
        .par_iter()
        .map(|&(s, r)| measure(spec, g, attrs, s, r))
        .collect();

    let truth = match spec.truth {
        Truth::Exact => Some(population_mean(g, attrs, &spec.attribute)?),
        Truth::Presumptive => mean(&rows.iter().filter_map(|r| r.estimate).collect::<Vec<_>>()),
    };
    for r in &mut rows {
        r.truth = truth;
        if let (Some(e), Some(t)) = (r.estimate, truth) {
            r.relative_error = Some(relative_error(e, t));
        }
    }
    let summaries = spec
        .schemes
        .iter()
        .map(|s| {
            let mine: Vec<&MeasurementRow> = rows.iter().filter(|r| r.scheme == s.name()).collect();
            summarize(s.name(), &mine)
        })
        .collect();
    Ok(ExperimentReport {
        truth,
        truth_mode: spec.truth,
        rows,
        summaries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub scheme: String,
    pub mean_unique_queries: f64,
    pub mean_steps: f64,
    pub mean_kl: Option<f64>,
    pub mean_relative_error: Option<f64>,
}

/// Repeats the experiment at each Geweke threshold.
pub fn threshold_sweep(
    spec: &ExperimentSpec,
    g: &Graph,
    attrs: Option<&AttributeTable>,
    thresholds: &[f64],
) -> Result<Vec<SweepRow>> {
    let mut out = Vec::new();
    for &t in thresholds {
        let s = ExperimentSpec {
            geweke_threshold: t,
            ..spec.clone()
        };
        let report = run_experiment(&s, g, attrs)?;
        for summary in &report.summaries {
            let steps: Vec<f64> = report
                .rows
                .iter()
                .filter(|r| r.scheme == summary.scheme)
                .map(|r| r.steps as f64)
                .collect();
            out.push(SweepRow {
                threshold: t,
                scheme: summary.scheme.clone(),
                mean_unique_queries: summary.mean_unique_queries,
                mean_steps: mean(&steps).unwrap_or(0.0),
                mean_kl: summary.mean_kl,
                mean_relative_error: summary.mean_relative_error,
            });
        }
    }
    Ok(out)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "threshold,scheme,mean_unique_queries,mean_steps,mean_kl,mean_relative_error")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.threshold,
            r.scheme,
            r.mean_unique_queries,
            r.mean_steps,
            opt(r.mean_kl),
            opt(r.mean_relative_error)
        )?;
    }
    Ok(())
}

/// Base graph versus the overlay an MTO walk built by visiting every node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlayReport {
    pub scheme: String,
    pub seed: u64,
    pub steps: u64,
    pub unique_queries: usize,
    pub removed: usize,
    pub added: usize,
    pub connected: bool,
    pub phi_base: Option<f64>,
    pub phi_overlay: Option<f64>,
    pub slem_base: Option<f64>,
    pub slem_overlay: Option<f64>,
    pub mixing_base: Option<MixingTime>,
    pub mixing_overlay: Option<MixingTime>,
}

fn phi_of(g: &Graph) -> Result<Option<f64>> {
    if g.node_count() > EXACT_LIMIT || !g.is_connected() {
        return Ok(None);
    }
    Ok(Some(conductance_exact(g)?.phi))
}

fn slem_of(g: &Graph) -> Result<Option<f64>> {
    if g.node_count() > crate::spectral::DENSE_LIMIT || !g.is_connected() {
        return Ok(None);
    }
    slem(g).map(Some)
}

/// Runs an MTO variant until every node is visited and compares the
/// exported overlay against the base graph.
pub fn verify_overlay(
    g: &Graph,
    scheme: Scheme,
    seed: u64,
    replace_prob: f64,
    step_cap: u64,
) -> Result<(OverlayReport, Graph)> {
    if !scheme.is_mto() {
        return Err(Error::InvalidConfig(format!(
            "overlay verification needs an MTO scheme, got {scheme}"
        )));
    }
    let config = SamplerConfig {
        scheme,
        replace_prob,
        seed,
        start: Some(0),
        ..SamplerConfig::default()
    };
    let mut walker = Walker::on_graph(g, config)?;
    walker.walk_until_covered(step_cap)?;
    let overlay = walker.export_overlay(g)?;
    let (slem_base, slem_overlay) = (slem_of(g)?, slem_of(&overlay)?);
    let report = OverlayReport {
        scheme: scheme.name().to_string(),
        seed,
        steps: walker.state().steps,
        unique_queries: walker.unique_queries(),
        removed: walker.overlay().removed().len(),
        added: walker.overlay().added().len(),
        connected: overlay.is_connected(),
        phi_base: phi_of(g)?,
        phi_overlay: phi_of(&overlay)?,
        slem_base,
        slem_overlay,
        mixing_base: slem_base.map(mixing_time_from_slem),
        mixing_overlay: slem_overlay.map(mixing_time_from_slem),
    };
    Ok((report, overlay))
}
