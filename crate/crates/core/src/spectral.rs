//! Verification tools that need the full topology: exact conductance by
//! cut enumeration, the cross-cutting edge oracle, the relative point-wise
//! distance of the simple random walk, its SLEM, and the conductance-based
//! mixing-time bounds.

use std::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{EdgeKey, Graph, NodeId};

/// Largest graph the exhaustive cut enumeration accepts.
pub const EXACT_LIMIT: usize = 24;
/// Largest graph the dense matrix routines accept.
pub const DENSE_LIMIT: usize = 2000;
/// Rows of `P^t` are renormalized after this many multiplications.
const RENORMALIZE_EVERY: usize = 32;
/// Upper limit on `n^3 * t` for dense matrix powers.
const POWER_FLOP_BUDGET: f64 = 2e13;

/// A conductance-minimizing cut.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutResult {
    /// The side containing node 0.
    pub s_side: Vec<NodeId>,
    pub cut_edges: usize,
    /// Smaller of the two touched-edge counts.
    pub denominator: usize,
    pub phi: f64,
}

/// Cut statistics for one side mask. Each side's denominator counts edges
/// with at least one endpoint on that side, once each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cut {
    cut: usize,
    den: usize,
    mask: u32,
}

impl Cut {
    fn ratio_cmp(&self, other: &Cut) -> Ordering {
        (self.cut * other.den).cmp(&(other.cut * self.den))
    }

    /// Ratio first, then the smaller mask, so the reduce is order-free.
    fn better(self, other: Cut) -> Cut {
        match self.ratio_cmp(&other).then(self.mask.cmp(&other.mask)) {
            Ordering::Greater => other,
            _ => self,
        }
    }
}

struct CutSpace {
    adj: Vec<u32>,
    n: usize,
    edges: usize,
}

impl CutSpace {
    fn new(g: &Graph) -> Result<Self> {
        let n = g.node_count();
        if n < 2 {
            return Err(Error::TooSmall);
        }
        if n > EXACT_LIMIT {
            return Err(Error::TooLarge {
                nodes: n,
                limit: EXACT_LIMIT,
            });
        }
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        let adj = (0..n)
            .map(|u| {
                g.neighbors(u)
                    .expect("node in range")
                    .iter()
                    .fold(0u32, |m, &v| m | (1 << v))
            })
            .collect();
        Ok(Self {
            adj,
            n,
            edges: g.edge_count(),
        })
    }

    /// Number of side masks with node 0 fixed in S, including the full set.
    fn count(&self) -> u32 {
        1u32 << (self.n - 1)
    }

    fn full(&self) -> u32 {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }

    /// Evaluates the `i`-th side (node 0 always in S). `None` for S = V.
    fn eval(&self, i: u32) -> Option<Cut> {
        let s = (i << 1) | 1;
        let full = self.full();
        if s == full {
            return None;
        }
        let (mut cut, mut inner2) = (0usize, 0usize);
        let mut rest = s;
        while rest != 0 {
            let x = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            cut += (self.adj[x] & !s & full).count_ones() as usize;
            inner2 += (self.adj[x] & s).count_ones() as usize;
        }
        let inner = inner2 / 2;
        let den = (inner + cut).min(self.edges - inner);
        Some(Cut { cut, den, mask: s })
    }

    fn minimum(&self) -> Cut {
        let total = self.count();
        let chunk = (total / 256).max(1);
        let chunks = total.div_ceil(chunk);
        (0..chunks)
            .into_par_iter()
            .filter_map(|c| {
                let lo = c * chunk;
                let hi = (lo + chunk).min(total);
                (lo..hi).filter_map(|i| self.eval(i)).reduce(Cut::better)
            })
            .reduce_with(Cut::better)
            .expect("a connected graph with two nodes has a proper cut")
    }

    fn any_minimizer<F>(&self, best: &Cut, pred: F) -> bool
    where
        F: Fn(u32) -> bool + Sync,
    {
        (0..self.count()).into_par_iter().any(|i| {
            self.eval(i)
                .is_some_and(|c| c.ratio_cmp(best) == Ordering::Equal && pred(c.mask))
        })
    }
}

/// Exact conductance by enumerating every cut up to complementation.
pub fn conductance_exact(g: &Graph) -> Result<CutResult> {
    let space = CutSpace::new(g)?;
    let best = space.minimum();
    Ok(CutResult {
        s_side: (0..space.n).filter(|&x| best.mask >> x & 1 == 1).collect(),
        cut_edges: best.cut,
        denominator: best.den,
        phi: best.cut as f64 / best.den as f64,
    })
}

/// Whether some conductance-minimizing cut separates the endpoints of
/// `edge`. All tied minimizers count.
pub fn cross_cutting_oracle(g: &Graph, edge: EdgeKey) -> Result<bool> {
    let space = CutSpace::new(g)?;
    if !g.has_edge(edge.low(), edge.high()) {
        return Err(Error::EdgeAbsent(edge));
    }
    let best = space.minimum();
    let (a, b) = (edge.low(), edge.high());
    Ok(space.any_minimizer(&best, |s| (s >> a & 1) != (s >> b & 1)))
}

fn check_dense(g: &Graph) -> Result<()> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::TooSmall);
    }
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            nodes: n,
            limit: DENSE_LIMIT,
        });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(())
}

/// Simple-random-walk transition matrix, `P[v][u] = 1 / k_v` for `u` in
/// `N(v)`.
pub fn transition_matrix(g: &Graph) -> Result<DMatrix<f64>> {
    check_dense(g)?;
    let n = g.node_count();
    let mut p = DMatrix::zeros(n, n);
    for v in 0..n {
        let nb = g.neighbors(v)?;
        let w = 1.0 / nb.len() as f64;
        for &u in nb {
            p[(v, u)] = w;
        }
    }
    Ok(p)
}

/// Degree-proportional stationary law `k_v / 2|E|`.
pub fn stationary(g: &Graph) -> Vec<f64> {
    let twice = 2.0 * g.edge_count() as f64;
    (0..g.node_count())
        .map(|v| g.neighbors(v).map_or(0.0, |nb| nb.len() as f64 / twice))
        .collect()
}

fn delta_of(g: &Graph, pt: &DMatrix<f64>, pi: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for u in 0..g.node_count() {
        for &v in g.neighbors(u).expect("node in range") {
            worst = worst.max((pt[(u, v)] - pi[v]).abs() / pi[v]);
        }
    }
    worst
}

fn renormalize_rows(m: &mut DMatrix<f64>) {
    for mut row in m.row_iter_mut() {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row /= s;
        }
    }
}

/// `Δ(t)` for `t = 0..=t_max`: the largest relative deviation
/// `|P^t[u][v] - π(v)| / π(v)` over adjacent pairs.
pub fn rpd_series(g: &Graph, t_max: usize) -> Result<Vec<(usize, f64)>> {
    let p = transition_matrix(g)?;
    let n = g.node_count() as f64;
    if n.powi(3) * t_max as f64 > POWER_FLOP_BUDGET {
        return Err(Error::ComputeBudget);
    }
    let pi = stationary(g);
    let mut pt = DMatrix::identity(g.node_count(), g.node_count());
    let mut out = Vec::with_capacity(t_max + 1);
    out.push((0, delta_of(g, &pt, &pi)));
    for t in 1..=t_max {
        pt = &pt * &p;
        if t % RENORMALIZE_EVERY == 0 {
            renormalize_rows(&mut pt);
        }
        out.push((t, delta_of(g, &pt, &pi)));
    }
    Ok(out)
}

/// `Δ(t)` at a single horizon.
pub fn rpd_delta(g: &Graph, t: usize) -> Result<f64> {
    Ok(rpd_series(g, t)?.pop().expect("series is never empty").1)
}

/// Mixing-time estimate; infinite for periodic chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixingTime {
    Finite(f64),
    Infinite,
}

impl MixingTime {
    pub fn value(self) -> f64 {
        match self {
            MixingTime::Finite(t) => t,
            MixingTime::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for MixingTime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MixingTime::Finite(t) => s.serialize_f64(*t),
            MixingTime::Infinite => s.serialize_str("infinite"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub slem: f64,
    pub mixing_time: MixingTime,
    pub delta_series: Vec<(usize, f64)>,
}

/// Eigenvalues of the walk, descending, computed on the symmetric matrix
/// `D^{1/2} P D^{-1/2}`.
pub fn walk_spectrum(g: &Graph) -> Result<Vec<f64>> {
    check_dense(g)?;
    let n = g.node_count();
    let deg: Vec<f64> = (0..n).map(|v| g.degree(v).map(|d| d as f64)).collect::<Result<_>>()?;
    let mut a = DMatrix::zeros(n, n);
    for e in g.edges() {
        let (u, v) = (e.low(), e.high());
        let w = 1.0 / (deg[u] * deg[v]).sqrt();
        a[(u, v)] = w;
        a[(v, u)] = w;
    }
    let mut eig = SymmetricEigen::new(a).eigenvalues.as_slice().to_vec();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

/// Second-largest eigenvalue modulus of the walk.
pub fn slem(g: &Graph) -> Result<f64> {
    let eig = walk_spectrum(g)?;
    let mu = eig[1..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(mu.min(1.0))
}

/// `1 / ln(1/μ)`, infinite when `μ` is 1 up to rounding.
pub fn mixing_time_from_slem(mu: f64) -> MixingTime {
    if mu >= 1.0 - 1e-10 {
        MixingTime::Infinite
    } else if mu <= 0.0 {
        MixingTime::Finite(0.0)
    } else {
        MixingTime::Finite(1.0 / (1.0 / mu).ln())
    }
}

/// SLEM, mixing-time estimate, and `Δ(t)` for `t = 0..=t_max`.
pub fn slem_mixing_time(g: &Graph, t_max: usize) -> Result<SpectralReport> {
    let mu = slem(g)?;
    Ok(SpectralReport {
        slem: mu,
        mixing_time: mixing_time_from_slem(mu),
        delta_series: rpd_series(g, t_max)?,
    })
}

/// Mixing-time upper bound from conductance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixingBound {
    /// `2|E| / min degree`.
    pub c: f64,
    /// Steps per decade of `c/ε`.
    pub coefficient_per_log10: f64,
    /// Steps until the upper bound drops below `ε`.
    pub t_bound: f64,
}

pub fn mixing_bound(
    phi: f64,
    num_edges: usize,
    min_degree: usize,
    epsilon: f64,
) -> Result<MixingBound> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::Domain(format!("phi = {phi} outside (0, 1)")));
    }
    if !(epsilon > 0.0) || num_edges == 0 || min_degree == 0 {
        return Err(Error::Domain(
            "epsilon, edge count and minimum degree must be positive".into(),
        ));
    }
    let c = 2.0 * num_edges as f64 / min_degree as f64;
    let rate = -(1.0 - phi * phi / 2.0).ln();
    Ok(MixingBound {
        c,
        coefficient_per_log10: std::f64::consts::LN_10 / rate,
        t_bound: (c / epsilon).ln() / rate,
    })
}

/// Lower and upper conductance bounds on `Δ(t)`:
/// `(1 - 2Φ)^t <= Δ(t) <= c (1 - Φ²/2)^t`.
pub fn delta_bounds(phi: f64, c: f64, t: usize) -> (f64, f64) {
    let t = t as i32;
    ((1.0 - 2.0 * phi).powi(t), c * (1.0 - phi * phi / 2.0).powi(t))
}

/// Combined report for a topology.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyReport {
    pub phi: Option<f64>,
    pub cut: Option<Vec<NodeId>>,
    pub slem: f64,
    pub mixing_time: MixingTime,
    pub delta_series: Vec<(usize, f64)>,
}

/// Exact conductance when the graph is small enough, plus the spectral
/// report.
pub fn topology_report(g: &Graph, t_max: usize) -> Result<TopologyReport> {
    let spectral = slem_mixing_time(g, t_max)?;
    let cut = if g.node_count() <= EXACT_LIMIT {
        Some(conductance_exact(g)?)
    } else {
        None
    };
    Ok(TopologyReport {
        phi: cut.as_ref().map(|c| c.phi),
        cut: cut.map(|c| c.s_side),
        slem: spectral.slem,
        mixing_time: spectral.mixing_time,
        delta_series: spectral.delta_series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{barbell, barbell_bridge};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn complete(n: usize) -> Graph {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        Graph::from_edges(n, edges).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    /// Set-based reference: every nonempty proper subset, both sides.
    fn naive_phi(g: &Graph) -> (usize, usize) {
        let n = g.node_count();
        let edges: Vec<EdgeKey> = g.edges().collect();
        let mut best = (1usize, 0usize);
        for mask in 1..(1u64 << n) - 1 {
            let s: BTreeSet<usize> = (0..n).filter(|x| mask >> x & 1 == 1).collect();
            let cut = edges
                .iter()
                .filter(|e| s.contains(&e.low()) != s.contains(&e.high()))
                .count();
            let touch_s = edges
                .iter()
                .filter(|e| s.contains(&e.low()) || s.contains(&e.high()))
                .count();
            let touch_t = edges
                .iter()
                .filter(|e| !s.contains(&e.low()) || !s.contains(&e.high()))
                .count();
            let den = touch_s.min(touch_t);
            if best.1 == 0 || cut * best.1 < best.0 * den {
                best = (cut, den);
            }
        }
        best
    }

    #[test]
    fn barbell_conductance() {
        let c = conductance_exact(&barbell(11).unwrap()).unwrap();
        assert_eq!((c.cut_edges, c.denominator), (1, 56));
        assert_eq!(c.s_side, (0..11).collect::<Vec<_>>());
    }

    #[test]
    fn small_conductances() {
        let c = conductance_exact(&complete(4)).unwrap();
        assert_eq!((c.cut_edges, c.denominator), (4, 5));
        assert_eq!(c.s_side.len(), 2);
        let c = conductance_exact(&complete(2)).unwrap();
        assert_eq!(c.phi, 1.0);
    }

    #[test]
    fn conductance_errors() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(conductance_exact(&g), Err(Error::Disconnected)));
        assert!(matches!(
            conductance_exact(&cycle(25)),
            Err(Error::TooLarge { nodes: 25, .. })
        ));
        let g = Graph::from_edges(1, []).unwrap();
        assert!(matches!(conductance_exact(&g), Err(Error::TooSmall)));
    }

    #[test]
    fn oracle_on_barbell() {
        let g = barbell(11).unwrap();
        assert!(cross_cutting_oracle(&g, barbell_bridge(11)).unwrap());
        assert!(!cross_cutting_oracle(&g, EdgeKey::new(0, 1)).unwrap());
        assert!(!cross_cutting_oracle(&g, EdgeKey::new(12, 20)).unwrap());
        assert!(cross_cutting_oracle(&complete(2), EdgeKey::new(0, 1)).unwrap());
        assert!(matches!(
            cross_cutting_oracle(&g, EdgeKey::new(0, 15)),
            Err(Error::EdgeAbsent(_))
        ));
    }

    #[test]
    fn oracle_counts_ties() {
        // Every edge of C6 is cut by some 3-3 split.
        let g = cycle(6);
        for e in g.edges().collect::<Vec<_>>() {
            assert!(cross_cutting_oracle(&g, e).unwrap());
        }
    }

    #[test]
    fn delta_base_cases() {
        let k4 = complete(4);
        assert!((rpd_delta(&k4, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((rpd_delta(&k4, 1).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((rpd_delta(&barbell(5).unwrap(), 0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn delta_matches_closed_form_on_complete_graph() {
        // On K_n, P^t[u][v] = (1 - (-1/(n-1))^t) / n for u != v.
        let n = 6;
        let g = complete(n);
        for (t, d) in rpd_series(&g, 80).unwrap() {
            let q = (-1.0 / (n as f64 - 1.0)).powi(t as i32);
            let expected = ((1.0 - q) / n as f64 - 1.0 / n as f64).abs() * n as f64;
            assert!((d - expected).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn transition_rows_and_stationarity() {
        let g = barbell(6).unwrap();
        let p = transition_matrix(&g).unwrap();
        for row in p.row_iter() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
        let pi = nalgebra::RowDVector::from_vec(stationary(&g));
        let moved = &pi * &p;
        for (a, b) in moved.iter().zip(pi.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn slem_known_spectra() {
        assert!((slem(&complete(4)).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let c4 = cycle(4);
        assert!((slem(&c4).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(mixing_time_from_slem(slem(&c4).unwrap()), MixingTime::Infinite);
        // Odd cycle: eigenvalues cos(2πk/n).
        let c5 = cycle(5);
        let expected = (4.0 * std::f64::consts::PI / 5.0).cos().abs();
        assert!((slem(&c5).unwrap() - expected).abs() < 1e-12);
        let spec = walk_spectrum(&barbell(5).unwrap()).unwrap();
        assert!((spec[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixing_bound_reference_values() {
        for (phi, want) in [
            (0.010, 46050.5),
            (0.012, 31979.1),
            (0.018, 14212.3),
            (0.053, 1638.3),
            (0.105, 416.6),
        ] {
            let b = mixing_bound(phi, 111, 10, 0.01).unwrap();
            assert!((b.coefficient_per_log10 / want - 1.0).abs() < 1e-3, "{phi}");
        }
        let b = mixing_bound(0.018, 111, 10, 0.01).unwrap();
        assert!((b.c - 22.2).abs() < 1e-12);
        let by_log = b.coefficient_per_log10 * (b.c / 0.01).log10();
        assert!((b.t_bound - by_log).abs() < 1e-6 * b.t_bound);
        assert!(mixing_bound(0.0, 111, 10, 0.01).is_err());
        assert!(mixing_bound(1.0, 111, 10, 0.01).is_err());
    }

    #[test]
    fn report_json_shape() {
        let r = topology_report(&cycle(4), 3).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["mixing_time"], "infinite");
        assert_eq!(v["delta_series"].as_array().unwrap().len(), 4);
        assert!(v["phi"].is_number() && v["cut"].is_array() && v["slem"].is_number());
    }

    fn arb_connected() -> impl Strategy<Value = Graph> {
        (3usize..=9, proptest::collection::vec(any::<bool>(), 36)).prop_map(|(n, bits)| {
            let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
            let mut k = 0;
            for a in 0..n {
                for b in a + 2..n {
                    if bits[k % bits.len()] {
                        edges.push((a, b));
                    }
                    k += 1;
                }
            }
            Graph::from_edges(n, edges).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn enumeration_matches_naive(g in arb_connected()) {
            let c = conductance_exact(&g).unwrap();
            let (cut, den) = naive_phi(&g);
            prop_assert_eq!(c.cut_edges * den, cut * c.denominator);
            prop_assert!(c.phi > 0.0 && c.phi <= 1.0);
        }

        #[test]
        fn rows_stay_stochastic(g in arb_connected(), t in 0usize..70) {
            let p = transition_matrix(&g).unwrap();
            let mut pt = DMatrix::identity(g.node_count(), g.node_count());
            for _ in 0..t {
                pt = &pt * &p;
            }
            for row in pt.row_iter() {
                prop_assert!((row.sum() - 1.0).abs() < 1e-12);
            }
        }
    }
}
