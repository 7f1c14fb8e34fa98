//! Random-walk samplers driven only through the access layer.
//!
//! [`Walker`] owns one walk session: the access layer (and with it the
//! query ledger), the overlay ledger, the RNG and the trace. Samples are
//! recorded each time the Geweke monitor fires; the walk then continues from
//! where it stopped with a fresh monitor.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::access::{AccessLayer, NeighborhoodView, DEGREE};
use crate::error::{Error, Result};
use crate::estimation::{
    overlay_degree_estimate, GewekeMonitor, GewekeResult, SampleEntry, SampleSet,
};
use crate::graph::{EdgeKey, Graph, NodeId, OverlayLedger};
use crate::rewiring::{
    apply_addition, apply_replacement, decide_removal, replacement_candidate, AuditAction,
    AuditEntry,
};

/// Walk scheme. The MTO flags switch removal and replacement on or off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Scheme {
    Srw,
    Mhrw,
    Rj,
    Mto { remove: bool, replace: bool },
}

impl Scheme {
    pub const MTO_BOTH: Scheme = Scheme::Mto {
        remove: true,
        replace: true,
    };
    pub const MTO_RM: Scheme = Scheme::Mto {
        remove: true,
        replace: false,
    };
    pub const MTO_RP: Scheme = Scheme::Mto {
        remove: false,
        replace: true,
    };
    pub const MTO_NONE: Scheme = Scheme::Mto {
        remove: false,
        replace: false,
    };

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Srw => "SRW",
            Scheme::Mhrw => "MHRW",
            Scheme::Rj => "RJ",
            Scheme::Mto {
                remove: true,
                replace: true,
            } => "MTO_Both",
            Scheme::Mto {
                remove: true,
                replace: false,
            } => "MTO_RM",
            Scheme::Mto {
                remove: false,
                replace: true,
            } => "MTO_RP",
            Scheme::Mto {
                remove: false,
                replace: false,
            } => "MTO_None",
        }
    }

    pub fn is_mto(self) -> bool {
        matches!(self, Scheme::Mto { .. })
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "srw" => Ok(Scheme::Srw),
            "mhrw" => Ok(Scheme::Mhrw),
            "rj" => Ok(Scheme::Rj),
            "mto" | "mto_both" => Ok(Scheme::MTO_BOTH),
            "mto_rm" => Ok(Scheme::MTO_RM),
            "mto_rp" => Ok(Scheme::MTO_RP),
            "mto_none" => Ok(Scheme::MTO_NONE),
            other => Err(Error::InvalidConfig(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub scheme: Scheme,
    /// Random-jump probability per step (RJ only).
    pub jump_prob: f64,
    /// Probability of replacing rather than adding when a pivot of overlay
    /// degree 3 is met (MTO only).
    pub replace_prob: f64,
    pub geweke_threshold: f64,
    pub burn_in_fraction: f64,
    pub retest_every: usize,
    pub sample_size: usize,
    /// Steps allowed per sample before giving up.
    pub step_cap: u64,
    /// Start node; drawn uniformly when `None`.
    pub start: Option<NodeId>,
    /// Attribute fed to the convergence monitor.
    pub diagnostic: String,
    /// Neighbors drawn per overlay-degree estimate; `min(k, 5)` when `None`.
    pub degree_sample: Option<usize>,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Srw,
            jump_prob: 0.5,
            replace_prob: 0.5,
            geweke_threshold: 0.1,
            burn_in_fraction: 0.1,
            retest_every: 100,
            sample_size: 1,
            step_cap: 1_000_000,
            start: None,
            diagnostic: DEGREE.to_string(),
            degree_sample: None,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("jump_prob", self.jump_prob), ("replace_prob", self.replace_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if !(self.geweke_threshold > 0.0) {
            return Err(Error::InvalidConfig("geweke threshold must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::InvalidConfig("burn-in fraction outside [0, 1)".into()));
        }
        if self.step_cap == 0 {
            return Err(Error::InvalidConfig("step cap must be positive".into()));
        }
        Ok(())
    }
}

/// What a step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepAction {
    Start,
    Move,
    Stay,
    Jump,
}

impl StepAction {
    pub fn as_str(self) -> &'static str {
        match self {
            StepAction::Start => "start",
            StepAction::Move => "move",
            StepAction::Stay => "stay",
            StepAction::Jump => "jump",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub step: u64,
    pub node: NodeId,
    pub action: StepAction,
    pub unique_queries: usize,
    /// Diagnostic attribute of `node`.
    pub value: f64,
}

/// Chain position and history. `trace.len() == steps + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkState {
    pub current: NodeId,
    pub steps: u64,
    pub trace: Vec<TraceRecord>,
    pub rng_seed: u64,
}

/// Writes `step,node,action,unique_queries`.
pub fn write_trace_csv<W: Write>(trace: &[TraceRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "step,node,action,unique_queries")?;
    for r in trace {
        writeln!(out, "{},{},{},{}", r.step, r.node, r.action.as_str(), r.unique_queries)?;
    }
    Ok(())
}

/// One walk session.
pub struct Walker<'g> {
    access: AccessLayer<'g>,
    overlay: OverlayLedger,
    rng: ChaCha8Rng,
    config: SamplerConfig,
    state: WalkState,
    audit: Vec<AuditEntry>,
    visited: BTreeSet<NodeId>,
}

impl<'g> Walker<'g> {
    /// Starts a walk; queries the start node.
    pub fn new(mut access: AccessLayer<'g>, config: SamplerConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let start = match config.start {
            Some(s) => s,
            None => access.random_node(&mut rng).map_err(|e| match e {
                Error::CapabilityUnavailable(_) => Error::InvalidConfig(
                    "no start node configured and the id space is not exposed".into(),
                ),
                other => other,
            })?,
        };
        let view = access.query(start)?;
        let value = diagnostic_value(&view, &config.diagnostic)?;
        let state = WalkState {
            current: start,
            steps: 0,
            trace: vec![TraceRecord {
                step: 0,
                node: start,
                action: StepAction::Start,
                unique_queries: access.unique_queries(),
                value,
            }],
            rng_seed: config.seed,
        };
        Ok(Self {
            access,
            overlay: OverlayLedger::new(),
            rng,
            config,
            state,
            audit: Vec::new(),
            visited: BTreeSet::from([start]),
        })
    }

    /// Convenience constructor over a full graph.
    pub fn on_graph(g: &'g Graph, config: SamplerConfig) -> Result<Self> {
        Self::new(AccessLayer::new(g), config)
    }

    pub fn state(&self) -> &WalkState {
        &self.state
    }

    pub fn current(&self) -> NodeId {
        self.state.current
    }

    pub fn overlay(&self) -> &OverlayLedger {
        &self.overlay
    }

    pub fn access(&self) -> &AccessLayer<'g> {
        &self.access
    }

    pub fn audit(&self) -> &[AuditEntry] {
        &self.audit
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn unique_queries(&self) -> usize {
        self.access.unique_queries()
    }

    /// Nodes the walk has stood on.
    pub fn visited(&self) -> &BTreeSet<NodeId> {
        &self.visited
    }

    fn view(&mut self, v: NodeId) -> Result<Arc<NeighborhoodView>> {
        self.access.query(v)
    }

    fn finish_step(&mut self, next: NodeId, action: StepAction) -> Result<NodeId> {
        let view = self.view(next)?;
        let value = diagnostic_value(&view, &self.config.diagnostic)?;
        self.state.current = next;
        self.state.steps += 1;
        self.visited.insert(next);
        self.state.trace.push(TraceRecord {
            step: self.state.steps,
            node: next,
            action,
            unique_queries: self.access.unique_queries(),
            value,
        });
        Ok(next)
    }

    /// Uniform move to a neighbor.
    pub fn srw_step(&mut self) -> Result<NodeId> {
        let u = self.view(self.state.current)?;
        let &next = u
            .neighbors
            .choose(&mut self.rng)
            .ok_or(Error::IsolatedNode(u.node))?;
        self.finish_step(next, StepAction::Move)
    }

    /// Metropolis-Hastings step towards the uniform law.
    pub fn mhrw_step(&mut self) -> Result<NodeId> {
        let u = self.view(self.state.current)?;
        let &w = u
            .neighbors
            .choose(&mut self.rng)
            .ok_or(Error::IsolatedNode(u.node))?;
        let w_view = self.view(w)?;
        let accept = (u.degree() as f64 / w_view.degree() as f64).min(1.0);
        if self.rng.gen::<f64>() < accept {
            self.finish_step(w, StepAction::Move)
        } else {
            self.finish_step(u.node, StepAction::Stay)
        }
    }

    /// Random jump with probability `jump_prob`, otherwise an MH step.
    pub fn rj_step(&mut self) -> Result<NodeId> {
        if self.rng.gen::<f64>() < self.config.jump_prob {
            let target = self.access.random_node(&mut self.rng)?;
            self.finish_step(target, StepAction::Jump)
        } else {
            self.mhrw_step()
        }
    }

    /// One step of the rewiring walk.
    ///
    /// Picks an overlay neighbor `v` of `u` and queries it. A removable
    /// `(u, v)` is dropped and another neighbor picked. If `v` has overlay
    /// degree 3 and a candidate `w` exists, `(u, v)` is replaced by `(u, w)`
    /// with probability `replace_prob` (and `w` becomes the pick); otherwise
    /// `(u, w)` is added next to `(u, v)` and the walk moves to `v` or `w`
    /// with equal odds. Without a replacement the walk moves to the pick with
    /// probability 1/2 and re-picks otherwise.
    pub fn mto_step(&mut self) -> Result<NodeId> {
        let Scheme::Mto { remove, replace } = self.config.scheme else {
            return Err(Error::InvalidConfig("mto_step on a non-MTO walk".into()));
        };
        let u = self.state.current;
        let u_view = self.view(u)?;
        loop {
            let nu = self.overlay.resolve(u, &u_view.neighbors);
            let &v = nu.choose(&mut self.rng).ok_or(Error::IsolatedNode(u))?;
            let v_view = self.view(v)?;
            let edge = EdgeKey::new(u, v);
            if remove {
                if let Some(entry) =
                    decide_removal(&u_view, &v_view, self.access.ledger(), &mut self.overlay)?
                {
                    self.audit.push(entry);
                    if entry.action == AuditAction::Remove {
                        continue;
                    }
                }
            }
            let mut pick = v;
            if replace {
                if let Some(w) =
                    replacement_candidate(&v_view, &u_view, &self.overlay, &mut self.rng)?
                {
                    let new = EdgeKey::new(u, w);
                    if self.rng.gen::<f64>() < self.config.replace_prob {
                        apply_replacement(&mut self.overlay, edge, new, &u_view)?;
                        self.audit.push(AuditEntry {
                            edge,
                            rule: "replacement",
                            lhs: 3.0,
                            rhs: 3.0,
                            action: AuditAction::Replace { with: new },
                        });
                        pick = w;
                    } else {
                        apply_addition(&mut self.overlay, new, &u_view)?;
                        self.audit.push(AuditEntry {
                            edge: new,
                            rule: "addition",
                            lhs: 3.0,
                            rhs: 3.0,
                            action: AuditAction::Add,
                        });
                        let next = if self.rng.gen::<f64>() < 0.5 { v } else { w };
                        return self.finish_step(next, StepAction::Move);
                    }
                }
            }
            if self.rng.gen::<f64>() < 0.5 {
                return self.finish_step(pick, StepAction::Move);
            }
        }
    }

    /// One step of the configured scheme.
    pub fn step(&mut self) -> Result<NodeId> {
        match self.config.scheme {
            Scheme::Srw => self.srw_step(),
            Scheme::Mhrw => self.mhrw_step(),
            Scheme::Rj => self.rj_step(),
            Scheme::Mto { .. } => self.mto_step(),
        }
    }

    /// Walks `n` steps.
    pub fn walk(&mut self, n: u64) -> Result<()> {
        for _ in 0..n {
            self.step()?;
        }
        Ok(())
    }

    /// Walks until every node of the graph has been visited.
    pub fn walk_until_covered(&mut self, step_cap: u64) -> Result<u64> {
        let n = self.access.node_count();
        let mut taken = 0;
        while self.visited.len() < n {
            if taken >= step_cap {
                return Err(Error::CoverageTimeout { steps: taken });
            }
            self.step()?;
            taken += 1;
        }
        Ok(taken)
    }

    /// Importance weight of the current node toward the uniform law.
    fn weight(&mut self) -> Result<f64> {
        let u = self.state.current;
        match self.config.scheme {
            Scheme::Srw => Ok(1.0 / self.view(u)?.degree() as f64),
            Scheme::Mhrw | Scheme::Rj => Ok(1.0),
            Scheme::Mto { remove, .. } => {
                let k = self.view(u)?.degree();
                let m = self.config.degree_sample.unwrap_or(5).min(k);
                let est = overlay_degree_estimate(
                    u,
                    m,
                    &mut self.access,
                    &mut self.overlay,
                    remove,
                    &mut self.rng,
                )?;
                // an all-removed draw cannot happen at a node the walk
                // stands on, but keep the weight finite regardless
                Ok(1.0 / est.max(1.0))
            }
        }
    }

    /// Walks with a fresh monitor until it fires.
    pub fn walk_until_converged(&mut self) -> Result<GewekeResult> {
        let mut monitor = GewekeMonitor::new(
            self.config.geweke_threshold,
            self.config.burn_in_fraction,
            self.config.retest_every,
        );
        monitor.observe(self.state.trace.last().expect("trace is never empty").value);
        let mut taken = 0u64;
        loop {
            if taken >= self.config.step_cap {
                return Err(Error::ConvergenceTimeout { steps: taken });
            }
            self.step()?;
            taken += 1;
            let value = self.state.trace.last().expect("trace is never empty").value;
            if let Some(r) = monitor.observe(value) {
                return Ok(r);
            }
        }
    }

    /// Walks until the monitor fires, then records the current node.
    pub fn next_sample(&mut self) -> Result<SampleEntry> {
        let result = self.walk_until_converged()?;
        let weight = self.weight()?;
        let view = self.view(self.state.current)?;
        Ok(SampleEntry {
            node: view.node,
            weight,
            attributes: view.attributes.clone(),
            geweke_z: result.z,
        })
    }

    /// Collects `sample_size` samples.
    pub fn run(&mut self) -> Result<SampleSet> {
        let mut set = SampleSet::new(self.config.scheme.name());
        for _ in 0..self.config.sample_size {
            let entry = self.next_sample()?;
            set.push(entry)?;
        }
        Ok(set)
    }

    /// Materialized overlay graph.
    pub fn export_overlay(&self, base: &Graph) -> Result<Graph> {
        self.overlay.materialize(base)
    }

    pub fn into_parts(self) -> (AccessLayer<'g>, OverlayLedger, WalkState, Vec<AuditEntry>) {
        (self.access, self.overlay, self.state, self.audit)
    }
}

fn diagnostic_value(view: &NeighborhoodView, name: &str) -> Result<f64> {
    view.attribute(name)
        .ok_or_else(|| Error::AttributeMissing(name.to_string()))
}

/// Runs a walk from `config` over `access` and returns its samples.
pub fn run_walk(access: AccessLayer<'_>, config: SamplerConfig) -> Result<SampleSet> {
    Walker::new(access, config)?.run()
}
