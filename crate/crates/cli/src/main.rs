//! `mto`: graph generation, sampling, estimation and experiment driver.

mod graph_spec;
mod settings;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use mto_core::access::{AccessLayer, AttributeTable, EdgeMode};
use mto_core::estimation::{importance_estimate, relative_error, write_estimate_csv, EstimateRow};
use mto_core::experiment::{
    population_mean, run_experiment, threshold_sweep, verify_overlay, write_sweep_csv,
    ExperimentSpec, Truth,
};
use mto_core::graph::Graph;
use mto_core::samplers::{write_trace_csv, Scheme, Walker};
use mto_core::spectral::{mixing_bound, topology_report};

use graph_spec::GraphSpec;
use settings::Settings;

#[derive(Parser)]
#[command(name = "mto", version, about = "Random-walk graph sampling with overlay rewiring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph as an edge list (plus coordinates for latent graphs).
    Generate,
    /// Draw weighted samples with one walk.
    Sample,
    /// Importance-sampling estimates of an attribute mean over several runs.
    Estimate,
    /// Conductance, SLEM, mixing time and distance series as JSON.
    Spectral,
    /// Paired scheme comparison with CSV measurements and a JSON summary.
    Experiment,
    /// Run an MTO walk to full coverage and compare the overlay with the base graph.
    VerifyOverlay,
}

/// Exit code for runs that completed with some failed measurements.
const PARTIAL_FAILURE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = cli.settings.resolve().and_then(|s| dispatch(&cli.command, &s));
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: &Command, s: &Settings) -> Result<u8> {
    match command {
        Command::Generate => generate(s),
        Command::Sample => sample(s),
        Command::Estimate => estimate(s),
        Command::Spectral => spectral(s),
        Command::Experiment => experiment(s),
        Command::VerifyOverlay => overlay(s),
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn edge_mode(s: &Settings) -> Result<EdgeMode> {
    Ok(s.edge_mode.as_deref().unwrap_or("undirected").parse()?)
}

struct Input {
    graph: Graph,
    coords: Option<Vec<[f64; 2]>>,
    attrs: Option<AttributeTable>,
}

fn load(s: &Settings) -> Result<Input> {
    let spec: GraphSpec = s.graph_spec()?.parse()?;
    let built = spec.build(edge_mode(s)?)?;
    let attrs = match &s.attributes {
        Some(p) => Some(
            AttributeTable::load(p, &built.graph).with_context(|| format!("loading {}", p.display()))?,
        ),
        None => None,
    };
    Ok(Input {
        graph: built.graph,
        coords: built.coords,
        attrs,
    })
}

fn schemes(s: &Settings, default: &[Scheme]) -> Result<Vec<Scheme>> {
    match &s.scheme {
        None => Ok(default.to_vec()),
        Some(list) => list
            .split(',')
            .map(|x| x.trim().parse::<Scheme>().map_err(Into::into))
            .collect(),
    }
}

fn single_scheme(s: &Settings, default: Scheme) -> Result<Scheme> {
    match schemes(s, &[default])?[..] {
        [one] => Ok(one),
        _ => bail!("exactly one scheme expected"),
    }
}

fn experiment_spec(s: &Settings, schemes: Vec<Scheme>, runs: usize) -> Result<ExperimentSpec> {
    let d = ExperimentSpec::default();
    let truth = match s.truth.as_deref() {
        None | Some("exact") => Truth::Exact,
        Some("presumptive") => Truth::Presumptive,
        Some(other) => bail!("unknown truth mode `{other}`"),
    };
    Ok(ExperimentSpec {
        schemes,
        attribute: s.attribute.clone().unwrap_or(d.attribute),
        geweke_threshold: s.geweke_threshold.unwrap_or(d.geweke_threshold),
        runs: s.runs.unwrap_or(runs),
        seed: s.seed.unwrap_or(d.seed),
        sample_size: s.samples.unwrap_or(d.sample_size),
        jump_prob: s.jump_prob.unwrap_or(d.jump_prob),
        replace_prob: s.replace_prob.unwrap_or(d.replace_prob),
        budget: s.budget,
        step_cap: s.step_cap.unwrap_or(d.step_cap),
        truth,
    })
}

fn walker<'g>(input: &'g Input, spec: &ExperimentSpec, scheme: Scheme, run: usize, s: &Settings) -> Result<Walker<'g>> {
    let mut access = AccessLayer::new(&input.graph).with_budget(spec.budget);
    if let Some(a) = &input.attrs {
        access = access.with_attributes(a);
    }
    let mut config = spec.sampler_config(scheme, run);
    config.start = s.start;
    Ok(Walker::new(access, config)?)
}

fn generate(s: &Settings) -> Result<u8> {
    let input = load(s)?;
    let mut out = sink(s.out_path())?;
    input.graph.write_edgelist(&mut out)?;
    out.flush()?;
    if let (Some(coords), Some(path)) = (&input.coords, s.out_path()) {
        let mut side = sink(Some(&path.with_extension("coords")))?;
        for (i, [x, y]) in coords.iter().enumerate() {
            writeln!(side, "{i} {x} {y}")?;
        }
        side.flush()?;
    }
    eprintln!(
        "nodes={} edges={}",
        input.graph.node_count(),
        input.graph.edge_count()
    );
    Ok(0)
}

fn sample(s: &Settings) -> Result<u8> {
    let input = load(s)?;
    let scheme = single_scheme(s, Scheme::Srw)?;
    let spec = experiment_spec(s, vec![scheme], 1)?;
    spec.validate()?;
    let mut w = walker(&input, &spec, scheme, 0, s)?;
    let set = w.run()?;
    let mut out = sink(s.out_path())?;
    set.write_csv(&mut out)?;
    out.flush()?;
    if let Some(path) = &s.trace {
        let mut t = sink(Some(path))?;
        write_trace_csv(&w.state().trace, &mut t)?;
        t.flush()?;
    }
    eprintln!("unique_queries={}", w.unique_queries());
    Ok(0)
}

fn estimate(s: &Settings) -> Result<u8> {
    let input = load(s)?;
    let scheme = single_scheme(s, Scheme::Srw)?;
    let spec = experiment_spec(s, vec![scheme], 1)?;
    spec.validate()?;
    let truth = population_mean(&input.graph, input.attrs.as_ref(), &spec.attribute)?;
    let mut rows = Vec::new();
    for run in 0..spec.runs {
        let mut w = walker(&input, &spec, scheme, run, s)?;
        let set = w.run()?;
        let est = importance_estimate(&set, &spec.attribute)?;
        rows.push(EstimateRow {
            scheme: scheme.name().to_string(),
            attribute: spec.attribute.clone(),
            n: set.len(),
            estimate: est,
            relative_error: relative_error(est, truth),
            unique_queries: w.unique_queries(),
            geweke_z: set.entries.last().map_or(f64::NAN, |e| e.geweke_z),
        });
    }
    let mut out = sink(s.out_path())?;
    write_estimate_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(0)
}

fn spectral(s: &Settings) -> Result<u8> {
    let input = load(s)?;
    let g = &input.graph;
    let report = topology_report(g, s.t_max.unwrap_or(100))?;
    let mut json = serde_json::to_value(&report)?;
    if let Some(phi) = report.phi.filter(|&p| p > 0.0 && p < 1.0) {
        json["mixing_bound"] = serde_json::to_value(mixing_bound(phi, g.edge_count(), g.min_degree(), 0.01)?)?;
    }
    json["nodes"] = g.node_count().into();
    json["edges"] = g.edge_count().into();
    let mut out = sink(s.out_path())?;
    writeln!(out, "{}", serde_json::to_string_pretty(&json)?)?;
    out.flush()?;
    Ok(0)
}

fn experiment(s: &Settings) -> Result<u8> {
    let input = load(s)?;
    let spec = experiment_spec(s, schemes(s, &ExperimentSpec::default().schemes)?, 20)?;
    let attrs = input.attrs.as_ref();
    let report = run_experiment(&spec, &input.graph, attrs)?;
    let sweep = match &s.sweep {
        Some(list) => {
            let ts = list
                .split(',')
                .map(|t| t.trim().parse::<f64>().with_context(|| format!("threshold `{t}`")))
                .collect::<Result<Vec<_>>>()?;
            Some(threshold_sweep(&spec, &input.graph, attrs, &ts)?)
        }
        None => None,
    };
    match s.out_path() {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            report.write_to_dir(dir)?;
            if let Some(rows) = &sweep {
                let mut f = sink(Some(&dir.join("sweep.csv")))?;
                write_sweep_csv(rows, &mut f)?;
                f.flush()?;
            }
        }
        None => {
            let mut out = sink(None)?;
            report.write_csv(&mut out)?;
            if let Some(rows) = &sweep {
                write_sweep_csv(rows, &mut out)?;
            }
            out.flush()?;
        }
    }
    let failures = report.failures();
    if failures > 0 {
        eprintln!("{failures} of {} runs failed", report.rows.len());
        return Ok(PARTIAL_FAILURE);
    }
    Ok(0)
}

fn overlay(s: &Settings) -> Result<u8> {
    let input = load(s)?;
    let scheme = single_scheme(s, Scheme::MTO_BOTH)?;
    let (report, overlay) = verify_overlay(
        &input.graph,
        scheme,
        s.seed.unwrap_or(0),
        s.replace_prob.unwrap_or(0.5),
        s.step_cap.unwrap_or(10_000_000),
    )?;
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(dir) = s.out_path() {
        fs::create_dir_all(dir)?;
        let mut f = sink(Some(&dir.join("overlay.edges")))?;
        overlay.write_edgelist(&mut f)?;
        f.flush()?;
        fs::write(dir.join("overlay.json"), format!("{json}\n"))?;
    }
    let mut out = sink(None)?;
    writeln!(out, "{json}")?;
    out.flush()?;
    Ok(0)
}

