//! Flag values merged with an optional key=value config file. Flags given on
//! the command line win over the file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;

#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// Flat key=value file; keys are the long flag names.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// `barbell:M`, `latent:n=N[,seed=..,giant=..]`, `gnp:n=N,p=P[,seed=..]`
    /// or an edge-list path.
    #[arg(long, global = true)]
    pub graph: Option<String>,
    /// Scheme name, or a comma-separated list for `experiment`.
    #[arg(long, global = true)]
    pub scheme: Option<String>,
    #[arg(long, global = true)]
    pub runs: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub geweke_threshold: Option<f64>,
    #[arg(long, global = true)]
    pub jump_prob: Option<f64>,
    #[arg(long, global = true)]
    pub replace_prob: Option<f64>,
    /// Unique-query budget per walk.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Output file, or directory for `experiment` and `verify-overlay`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Samples drawn per walk.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub attribute: Option<String>,
    /// Sidecar "node_id name value" file.
    #[arg(long, global = true)]
    pub attributes: Option<PathBuf>,
    /// `undirected` or `reciprocal` for edge-list inputs.
    #[arg(long, global = true)]
    pub edge_mode: Option<String>,
    /// `exact` or `presumptive`.
    #[arg(long, global = true)]
    pub truth: Option<String>,
    /// Comma-separated Geweke thresholds for an extra sweep.
    #[arg(long, global = true)]
    pub sweep: Option<String>,
    #[arg(long, global = true)]
    pub step_cap: Option<u64>,
    #[arg(long, global = true)]
    pub t_max: Option<usize>,
    #[arg(long, global = true)]
    pub start: Option<usize>,
    /// Per-step trace CSV for `sample`.
    #[arg(long, global = true)]
    pub trace: Option<PathBuf>,
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key=value", idx + 1))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            bail!("config line {}: duplicate key `{key}`", idx + 1);
        }
    }
    Ok(map)
}

fn fill<T: FromStr>(slot: &mut Option<T>, key: &str, value: &str) -> Result<()>
where
    T::Err: std::fmt::Display,
{
    if slot.is_none() {
        *slot = Some(
            value
                .parse()
                .map_err(|e| anyhow!("config key `{key}`: {e}"))?,
        );
    }
    Ok(())
}

impl Settings {
    /// Fills every unset field from the config file, if one was given.
    pub fn resolve(mut self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        self.merge(&parse_config(&text)?)?;
        Ok(self)
    }

    pub fn merge(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        for (k, v) in map {
            match k.as_str() {
                "graph" => fill(&mut self.graph, k, v)?,
                "scheme" => fill(&mut self.scheme, k, v)?,
                "runs" => fill(&mut self.runs, k, v)?,
                "seed" => fill(&mut self.seed, k, v)?,
                "geweke-threshold" => fill(&mut self.geweke_threshold, k, v)?,
                "jump-prob" => fill(&mut self.jump_prob, k, v)?,
                "replace-prob" => fill(&mut self.replace_prob, k, v)?,
                "budget" => fill(&mut self.budget, k, v)?,
                "out" => fill(&mut self.out, k, v)?,
                "samples" => fill(&mut self.samples, k, v)?,
                "attribute" => fill(&mut self.attribute, k, v)?,
                "attributes" => fill(&mut self.attributes, k, v)?,
                "edge-mode" => fill(&mut self.edge_mode, k, v)?,
                "truth" => fill(&mut self.truth, k, v)?,
                "sweep" => fill(&mut self.sweep, k, v)?,
                "step-cap" => fill(&mut self.step_cap, k, v)?,
                "t-max" => fill(&mut self.t_max, k, v)?,
                "start" => fill(&mut self.start, k, v)?,
                "trace" => fill(&mut self.trace, k, v)?,
                other => bail!("unknown config key `{other}`"),
            }
        }
        Ok(())
    }

    pub fn graph_spec(&self) -> Result<&str> {
        self.graph.as_deref().context("--graph is required")
    }

    pub fn out_path(&self) -> Option<&Path> {
        self.out.as_deref()
    }
}
