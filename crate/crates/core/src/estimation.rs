//! Convergence diagnostics, importance-sampling estimates, overlay degree
//! estimation and bias measures.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::access::AccessLayer;
use crate::error::{Error, Result};
use crate::graph::{Decision, EdgeKey, NodeId, OverlayLedger};
use crate::rewiring::decide_removal;

/// Shortest post-burn-in sequence the diagnostic accepts.
pub const GEWEKE_MIN_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GewekeResult {
    pub z: f64,
    pub window_a_mean: f64,
    pub window_b_mean: f64,
    pub window_a_var: f64,
    pub window_b_var: f64,
    pub converged: bool,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Geweke statistic comparing the first 10% and the last 50% of the trace
/// after `burn_in` entries: `Z = |mean_A - mean_B| / sqrt(var_A + var_B)`.
pub fn geweke_z(trace: &[f64], burn_in: usize, threshold: f64) -> Result<GewekeResult> {
    let post = trace.get(burn_in..).unwrap_or(&[]);
    if post.len() < GEWEKE_MIN_LEN {
        return Err(Error::SequenceTooShort {
            len: post.len(),
            min: GEWEKE_MIN_LEN,
        });
    }
    let a = &post[..post.len() / 10];
    let b = &post[post.len() - post.len() / 2..];
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let spread = va + vb;
    if spread <= 0.0 {
        return Err(Error::DegenerateSequence);
    }
    let z = (ma - mb).abs() / spread.sqrt();
    Ok(GewekeResult {
        z,
        window_a_mean: ma,
        window_b_mean: mb,
        window_a_var: va,
        window_b_var: vb,
        converged: z <= threshold,
    })
}

/// Incremental Geweke stopping rule: re-tests every `retest_every`
/// observations with a burn-in of `burn_in_fraction` of the trace.
#[derive(Debug, Clone)]
pub struct GewekeMonitor {
    threshold: f64,
    burn_in_fraction: f64,
    retest_every: usize,
    trace: Vec<f64>,
    last: Option<GewekeResult>,
}

impl GewekeMonitor {
    pub fn new(threshold: f64, burn_in_fraction: f64, retest_every: usize) -> Self {
        Self {
            threshold,
            burn_in_fraction,
            retest_every: retest_every.max(1),
            trace: Vec::new(),
            last: None,
        }
    }

    /// Adds an observation; returns the diagnostic when it fires.
    pub fn observe(&mut self, value: f64) -> Option<GewekeResult> {
        self.trace.push(value);
        if !self.trace.len().is_multiple_of(self.retest_every) {
            return None;
        }
        let burn_in = (self.trace.len() as f64 * self.burn_in_fraction).floor() as usize;
        match geweke_z(&self.trace, burn_in, self.threshold) {
            Ok(r) => {
                self.last = Some(r);
                r.converged.then_some(r)
            }
            // too short or constant so far: keep walking
            Err(_) => None,
        }
    }

    pub fn last(&self) -> Option<GewekeResult> {
        self.last
    }

    pub fn len(&self) -> usize {
        self.trace.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trace.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleEntry {
    pub node: NodeId,
    pub weight: f64,
    pub attributes: BTreeMap<String, f64>,
    /// Diagnostic value when the monitor fired for this sample.
    pub geweke_z: f64,
}

/// Weighted node samples from one walk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    pub scheme: String,
    pub entries: Vec<SampleEntry>,
}

impl SampleSet {
    pub fn new(scheme: impl Into<String>) -> Self {
        Self {
            scheme: scheme.into(),
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, entry: SampleEntry) -> Result<()> {
        if !(entry.weight.is_finite() && entry.weight > 0.0) {
            return Err(Error::Domain(format!("sample weight {}", entry.weight)));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sample counts per node over `0..node_count`.
    pub fn counts(&self, node_count: usize) -> Vec<u64> {
        let mut c = vec![0; node_count];
        for e in &self.entries {
            c[e.node] += 1;
        }
        c
    }

    /// Writes `sample_idx,node,weight,<attr>...` with attribute columns in
    /// sorted order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut names: Vec<&str> = self
            .entries
            .iter()
            .flat_map(|e| e.attributes.keys().map(String::as_str))
            .collect();
        names.sort_unstable();
        names.dedup();
        write!(out, "sample_idx,node,weight")?;
        for n in &names {
            write!(out, ",{n}")?;
        }
        writeln!(out)?;
        for (i, e) in self.entries.iter().enumerate() {
            write!(out, "{i},{},{}", e.node, e.weight)?;
            for n in &names {
                match e.attributes.get(*n) {
                    Some(v) => write!(out, ",{v}")?,
                    None => write!(out, ",")?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Self-normalized estimate `sum(f w) / sum(w)` of the node mean of `f`.
pub fn importance_estimate(samples: &SampleSet, f: &str) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for e in &samples.entries {
        let x = *e
            .attributes
            .get(f)
            .ok_or_else(|| Error::AttributeMissing(f.to_string()))?;
        num += x * e.weight;
        den += e.weight;
    }
    Ok(num / den)
}

/// Probability vector over `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Domain("probabilities must be finite and >= 0".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("probabilities sum to {total}")));
        }
        Ok(Self(probs))
    }

    /// Normalizes nonnegative masses.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Domain("total mass must be positive".into()));
        }
        Self::new(masses.iter().map(|m| m / total).collect())
    }

    /// Empirical law of `counts` with an extra `1/(10N)` pseudo-count on
    /// every entry, `N` the total count, so no entry has zero mass.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let pseudo = 1.0 / (10.0 * n as f64);
        let masses: Vec<f64> = counts.iter().map(|&c| c as f64 + pseudo).collect();
        Self::from_masses(&masses)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }
}

/// Symmetrized KL divergence `D(P||Q) + D(Q||P) = sum (p - q) ln(p / q)`.
///
/// Entries where exactly one side is zero are a support mismatch; smooth
/// empirical laws with [`Distribution::from_counts`] first.
pub fn kl_bias(ideal: &Distribution, empirical: &Distribution) -> Result<f64> {
    let (p, q) = (ideal.probs(), empirical.probs());
    if p.len() != q.len() {
        return Err(Error::SupportMismatch(p.len().min(q.len())));
    }
    let mut total = 0.0;
    for (i, (&a, &b)) in p.iter().zip(q).enumerate() {
        match (a > 0.0, b > 0.0) {
            (true, true) => total += (a - b) * (a / b).ln(),
            (false, false) => {}
            _ => return Err(Error::SupportMismatch(i)),
        }
    }
    Ok(total.max(0.0))
}

/// Estimates the overlay degree of `u` from `m` base neighbors drawn
/// without replacement: `k_u * surviving fraction + added edges at u`.
///
/// Cached decisions are free. Uncached edges are evaluated (querying the
/// neighbor) and the verdict is persisted when `evaluate_removals` is set;
/// otherwise they count as surviving.
pub fn overlay_degree_estimate<R: Rng + ?Sized>(
    u: NodeId,
    m: usize,
    access: &mut AccessLayer<'_>,
    overlay: &mut OverlayLedger,
    evaluate_removals: bool,
    rng: &mut R,
) -> Result<f64> {
    let u_view = access.query(u)?;
    let k = u_view.degree();
    if m > k {
        return Err(Error::SampleTooLarge { m, degree: k });
    }
    if m == 0 {
        return Err(Error::Domain("degree sample size must be positive".into()));
    }
    let mut survivors = 0usize;
    for i in sample(rng, k, m).into_vec() {
        let v = u_view.neighbors[i];
        let edge = EdgeKey::new(u, v);
        if overlay.decision(edge).is_none() && evaluate_removals {
            let v_view = access.query(v)?;
            decide_removal(&u_view, &v_view, access.ledger(), overlay)?;
        }
        match overlay.decision(edge) {
            Some(Decision::Removable) | Some(Decision::Replaced) => {}
            _ => survivors += 1,
        }
    }
    Ok(k as f64 * survivors as f64 / m as f64 + overlay.added_degree(u) as f64)
}

/// One line of the estimation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub scheme: String,
    pub attribute: String,
    pub n: usize,
    pub estimate: f64,
    pub relative_error: f64,
    pub unique_queries: usize,
    pub geweke_z: f64,
}

pub fn relative_error(estimate: f64, truth: f64) -> f64 {
    if truth == 0.0 {
        estimate.abs()
    } else {
        ((estimate - truth) / truth).abs()
    }
}

/// Writes `scheme,attribute,N,estimate,relative_error,unique_queries,geweke_z`.
pub fn write_estimate_csv<W: Write>(rows: &[EstimateRow], mut out: W) -> io::Result<()> {
    writeln!(out, "scheme,attribute,N,estimate,relative_error,unique_queries,geweke_z")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.scheme, r.attribute, r.n, r.estimate, r.relative_error, r.unique_queries, r.geweke_z
        )?;
    }
    Ok(())
}
