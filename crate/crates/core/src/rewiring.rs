//! Local edge-removal and edge-replacement rules.
//!
//! Every rule here looks only at the overlay neighborhoods of the two
//! endpoints (plus, for the degree-augmented rule, overlay degrees of nodes
//! already in the query cache). Nothing issues new queries.
//!
//! Removal: an overlay edge `(u, v)` with `n` common overlay neighbors is
//! provably not cross-cutting when `ceil(n/2) + 1 > max(k_u, k_v) / 2`. The
//! inequality is strict; equality never removes.
//!
//! Replacement: when the pivot `v` has overlay degree exactly 3, the edge
//! `(u, v)` may be swapped for `(u, w)` with `w` another neighbor of `v`
//! without lowering conductance. Degree 3 is the only safe case.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::access::{NeighborhoodView, QueryLedger};
use crate::error::{Error, Result};
use crate::graph::{sorted_intersection, Decision, EdgeKey, NodeId, OverlayLedger};

/// Which criterion produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    CommonNeighbors,
    DegreeAugmented,
    /// Removal would leave an endpoint with no overlay neighbor.
    Guarded,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::CommonNeighbors => "common_neighbors",
            Rule::DegreeAugmented => "degree_augmented",
            Rule::Guarded => "guarded",
        }
    }
}

/// Removal verdict with both sides of the inequality kept for audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemovalVerdict {
    pub removable: bool,
    pub rule: Rule,
    pub lhs: f64,
    pub rhs: f64,
}

fn overlay_pair(
    u_view: &NeighborhoodView,
    v_view: &NeighborhoodView,
    ledger: &OverlayLedger,
) -> Result<(Vec<NodeId>, Vec<NodeId>)> {
    let (u, v) = (u_view.node, v_view.node);
    if u == v {
        return Err(Error::InvalidPair(u));
    }
    let nu = ledger.resolve(u, &u_view.neighbors);
    if nu.binary_search(&v).is_err() {
        return Err(Error::EdgeAbsent(EdgeKey::new(u, v)));
    }
    let nv = ledger.resolve(v, &v_view.neighbors);
    Ok((nu, nv))
}

/// Evaluates the strict inequality with integers:
/// `2*ceil((n - s)/2) + 2 + sum(4 - k_w) > max_degree`.
fn verdict(
    common: usize,
    augmented: &[usize],
    ku: usize,
    kv: usize,
    rule: Rule,
) -> RemovalVerdict {
    let plain = common - augmented.len();
    let bonus: usize = augmented.iter().map(|&k| 4 - k).sum();
    let twice_lhs = 2 * plain.div_ceil(2) + 2 + bonus;
    let max_degree = ku.max(kv);
    let guarded = ku == 1 && kv == 1;
    RemovalVerdict {
        removable: !guarded && twice_lhs > max_degree,
        rule: if guarded { Rule::Guarded } else { rule },
        lhs: twice_lhs as f64 / 2.0,
        rhs: max_degree as f64 / 2.0,
    }
}

/// Common-neighbor removal test on overlay-resolved neighborhoods.
pub fn is_removable(
    u_view: &NeighborhoodView,
    v_view: &NeighborhoodView,
    ledger: &OverlayLedger,
) -> Result<RemovalVerdict> {
    let (nu, nv) = overlay_pair(u_view, v_view, ledger)?;
    let common = sorted_intersection(&nu, &nv).len();
    Ok(verdict(common, &[], nu.len(), nv.len(), Rule::CommonNeighbors))
}

/// Removal test that also credits common neighbors whose overlay degree is
/// already known to be 2 or 3.
///
/// Every key of `known_degrees` must be a node already in `cache`; the rule
/// may not trigger new queries.
pub fn is_removable_with_degrees(
    u_view: &NeighborhoodView,
    v_view: &NeighborhoodView,
    known_degrees: &BTreeMap<NodeId, usize>,
    cache: &QueryLedger,
    ledger: &OverlayLedger,
) -> Result<RemovalVerdict> {
    if let Some(&w) = known_degrees.keys().find(|&&w| !cache.is_cached(w)) {
        return Err(Error::ProvenanceViolation(w));
    }
    let (nu, nv) = overlay_pair(u_view, v_view, ledger)?;
    let common = sorted_intersection(&nu, &nv);
    let augmented: Vec<usize> = common
        .iter()
        .filter_map(|w| known_degrees.get(w).copied())
        .filter(|k| (2..=3).contains(k))
        .collect();
    let rule = if augmented.is_empty() {
        Rule::CommonNeighbors
    } else {
        Rule::DegreeAugmented
    };
    Ok(verdict(common.len(), &augmented, nu.len(), nv.len(), rule))
}

/// Overlay degrees of the cached nodes among `candidates`.
pub fn known_overlay_degrees(
    candidates: &[NodeId],
    cache: &QueryLedger,
    ledger: &OverlayLedger,
) -> BTreeMap<NodeId, usize> {
    candidates
        .iter()
        .filter_map(|&w| {
            let view = cache.get(w)?;
            Some((w, ledger.resolve(w, &view.neighbors).len()))
        })
        .collect()
}

/// Removal verdict for `(u, v)` crediting every cached common neighbor's
/// overlay degree.
pub fn evaluate_removal(
    u_view: &NeighborhoodView,
    v_view: &NeighborhoodView,
    cache: &QueryLedger,
    ledger: &OverlayLedger,
) -> Result<RemovalVerdict> {
    let (nu, nv) = overlay_pair(u_view, v_view, ledger)?;
    let common = sorted_intersection(&nu, &nv);
    let known = known_overlay_degrees(&common, cache, ledger);
    is_removable_with_degrees(u_view, v_view, &known, cache, ledger)
}

/// Evaluates `(u, v)` unless a decision is already cached, and persists the
/// outcome. Returns the audit entry of a fresh evaluation.
pub fn decide_removal(
    u_view: &NeighborhoodView,
    v_view: &NeighborhoodView,
    cache: &QueryLedger,
    ledger: &mut OverlayLedger,
) -> Result<Option<AuditEntry>> {
    let edge = EdgeKey::new(u_view.node, v_view.node);
    if ledger.decision(edge).is_some() {
        return Ok(None);
    }
    let verdict = evaluate_removal(u_view, v_view, cache, ledger)?;
    if verdict.removable {
        apply_removal(ledger, edge, u_view)?;
    } else {
        apply_keep(ledger, edge)?;
    }
    Ok(Some(AuditEntry::from_verdict(edge, &verdict)))
}

/// Picks the new endpoint `w` for replacing `(u, v)` by `(u, w)`.
///
/// Returns `None` unless the pivot `v` has overlay degree 3. Candidates
/// already adjacent to `u`, or whose edge to `u` was decided earlier in the
/// session, are skipped so the overlay stays simple and decisions never
/// flip.
pub fn replacement_candidate<R: Rng + ?Sized>(
    v_view: &NeighborhoodView,
    u_view: &NeighborhoodView,
    ledger: &OverlayLedger,
    rng: &mut R,
) -> Result<Option<NodeId>> {
    let (v, u) = (v_view.node, u_view.node);
    let nv = ledger.resolve(v, &v_view.neighbors);
    if u == v || nv.binary_search(&u).is_err() {
        return Err(Error::EdgeAbsent(EdgeKey::new(u, v)));
    }
    if nv.len() != 3 {
        return Ok(None);
    }
    let nu = ledger.resolve(u, &u_view.neighbors);
    let options: Vec<NodeId> = nv
        .into_iter()
        .filter(|&w| w != u)
        .filter(|w| nu.binary_search(w).is_err())
        .filter(|&w| ledger.decision(EdgeKey::new(u, w)).is_none())
        .collect();
    Ok(options.choose(rng).copied())
}

fn anchored(edge: EdgeKey, anchor: &NeighborhoodView) -> Result<bool> {
    let other = edge
        .other(anchor.node)
        .ok_or(Error::EdgeAbsent(edge))?;
    Ok(anchor.neighbors.binary_search(&other).is_ok())
}

fn check_returnable(ledger: &OverlayLedger, edge: EdgeKey, in_base: bool) -> Result<()> {
    if ledger.contains(edge, in_base) {
        return Err(Error::EdgeExists(edge));
    }
    if in_base || ledger.decision(edge).is_some() {
        return Err(Error::RetiredEdge(edge));
    }
    Ok(())
}

/// Removes `edge` from the overlay. `anchor` is the base view of either
/// endpoint. Returns `Ok(false)` if the edge was already removed.
pub fn apply_removal(
    ledger: &mut OverlayLedger,
    edge: EdgeKey,
    anchor: &NeighborhoodView,
) -> Result<bool> {
    match ledger.decision(edge) {
        Some(Decision::Removable) => return Ok(false),
        Some(prior) => {
            return Err(Error::DecisionConflict {
                edge,
                prior,
                attempted: Decision::Removable,
            })
        }
        None => {}
    }
    let in_base = anchored(edge, anchor)?;
    if !ledger.contains(edge, in_base) {
        return Err(Error::EdgeAbsent(edge));
    }
    ledger.record(edge, Decision::Removable)?;
    ledger.drop_edge(edge, in_base);
    Ok(true)
}

/// Caches a negative removal verdict.
pub fn apply_keep(ledger: &mut OverlayLedger, edge: EdgeKey) -> Result<bool> {
    ledger.record(edge, Decision::NotRemovable)
}

/// Swaps `old` for `new`; both must share the endpoint viewed by `anchor`.
pub fn apply_replacement(
    ledger: &mut OverlayLedger,
    old: EdgeKey,
    new: EdgeKey,
    anchor: &NeighborhoodView,
) -> Result<bool> {
    if old.shared_endpoint(&new) != Some(anchor.node) {
        return Err(Error::InvalidConfig(format!(
            "replacement {old} -> {new} does not pivot on node {}",
            anchor.node
        )));
    }
    let old_in_base = anchored(old, anchor)?;
    let new_in_base = anchored(new, anchor)?;
    if ledger.decision(old) == Some(Decision::Replaced) && ledger.contains(new, new_in_base) {
        return Ok(false);
    }
    if !ledger.contains(old, old_in_base) {
        return Err(Error::EdgeAbsent(old));
    }
    check_returnable(ledger, new, new_in_base)?;
    ledger.record(old, Decision::Replaced)?;
    ledger.drop_edge(old, old_in_base);
    ledger.add_edge(new);
    Ok(true)
}

/// Adds `new` without removing anything.
pub fn apply_addition(
    ledger: &mut OverlayLedger,
    new: EdgeKey,
    anchor: &NeighborhoodView,
) -> Result<bool> {
    let in_base = anchored(new, anchor)?;
    check_returnable(ledger, new, in_base)?;
    ledger.add_edge(new);
    Ok(true)
}

/// What happened to an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuditAction {
    Remove,
    Keep,
    Replace { with: EdgeKey },
    Add,
}

impl fmt::Display for AuditAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditAction::Remove => f.write_str("remove"),
            AuditAction::Keep => f.write_str("keep"),
            AuditAction::Replace { with } => write!(f, "replace:{with}"),
            AuditAction::Add => f.write_str("add"),
        }
    }
}

/// One audited decision. For replacements and additions `lhs` is the
/// pivot's overlay degree and `rhs` the required degree (3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditEntry {
    pub edge: EdgeKey,
    pub rule: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub action: AuditAction,
}

impl AuditEntry {
    pub fn from_verdict(edge: EdgeKey, verdict: &RemovalVerdict) -> Self {
        Self {
            edge,
            rule: verdict.rule.as_str(),
            lhs: verdict.lhs,
            rhs: verdict.rhs,
            action: if verdict.removable {
                AuditAction::Remove
            } else {
                AuditAction::Keep
            },
        }
    }
}

/// Writes `edge,rule,lhs,rhs,action` rows.
pub fn write_audit_csv<W: Write>(entries: &[AuditEntry], mut out: W) -> io::Result<()> {
    writeln!(out, "edge,rule,lhs,rhs,action")?;
    for e in entries {
        writeln!(out, "{},{},{},{},{}", e.edge, e.rule, e.lhs, e.rhs, e.action)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access::AccessLayer;
    use crate::generators::barbell;
    use crate::graph::{effective_neighbors, Graph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    /// `u = 0`, `v = 1` adjacent, sharing `common` neighbors, with extra
    /// private neighbors on each side.
    fn pair_graph(common: usize, u_private: usize, v_private: usize) -> Graph {
        let mut edges = vec![(0, 1)];
        let mut next = 2;
        for _ in 0..common {
            edges.push((0, next));
            edges.push((1, next));
            next += 1;
        }
        for _ in 0..u_private {
            edges.push((0, next));
            next += 1;
        }
        for _ in 0..v_private {
            edges.push((1, next));
            next += 1;
        }
        Graph::from_edges(next, edges).unwrap()
    }

    fn verdict_for(g: &Graph) -> RemovalVerdict {
        let mut access = AccessLayer::new(g);
        let u = access.query(0).unwrap();
        let v = access.query(1).unwrap();
        is_removable(&u, &v, &OverlayLedger::new()).unwrap()
    }

    #[test]
    fn five_common_neighbors_of_degree_seven() {
        let v = verdict_for(&pair_graph(5, 1, 1));
        assert!(v.removable);
        assert_eq!((v.lhs, v.rhs), (4.0, 3.5));
        assert_eq!(v.rule, Rule::CommonNeighbors);
    }

    #[test]
    fn no_common_neighbors() {
        let v = verdict_for(&pair_graph(0, 4, 4));
        assert!(!v.removable);
        assert_eq!((v.lhs, v.rhs), (1.0, 2.5));
    }

    #[test]
    fn strict_inequality_boundary() {
        let tie = verdict_for(&pair_graph(4, 1, 0));
        assert_eq!((tie.lhs, tie.rhs), (3.0, 3.0));
        assert!(!tie.removable);
        let above = verdict_for(&pair_graph(4, 0, 0));
        assert_eq!((above.lhs, above.rhs), (3.0, 2.5));
        assert!(above.removable);
    }

    #[test]
    fn isolated_pair_is_guarded() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let v = verdict_for(&g);
        assert!(!v.removable);
        assert_eq!(v.rule, Rule::Guarded);
    }

    #[test]
    fn missing_edge_is_rejected() {
        let g = barbell(4).unwrap();
        let mut access = AccessLayer::new(&g);
        let a = access.query(0).unwrap();
        let b = access.query(5).unwrap();
        assert!(matches!(
            is_removable(&a, &b, &OverlayLedger::new()),
            Err(Error::EdgeAbsent(_))
        ));
    }

    /// `u = 0`, `v = 1`, commons 2 and 3 of degree 2, common 4 with a tail,
    /// and three private neighbors of `u`: k_u = 7, n = 3.
    fn augmented_graph() -> Graph {
        let edges = [
            (0, 1),
            (0, 2),
            (1, 2),
            (0, 3),
            (1, 3),
            (0, 4),
            (1, 4),
            (4, 8),
            (0, 5),
            (0, 6),
            (0, 7),
        ];
        Graph::from_edges(9, edges).unwrap()
    }

    #[test]
    fn known_degrees_upgrade_the_verdict() {
        let g = augmented_graph();
        let ledger = OverlayLedger::new();
        let mut access = AccessLayer::new(&g);
        let u = access.query(0).unwrap();
        let v = access.query(1).unwrap();
        assert!(!is_removable(&u, &v, &ledger).unwrap().removable);

        access.query(2).unwrap();
        access.query(3).unwrap();
        let known = known_overlay_degrees(&[2, 3, 4], access.ledger(), &ledger);
        assert_eq!(known, BTreeMap::from([(2, 2), (3, 2)]));
        let up = is_removable_with_degrees(&u, &v, &known, access.ledger(), &ledger).unwrap();
        assert!(up.removable);
        assert_eq!(up.rule, Rule::DegreeAugmented);
        assert_eq!((up.lhs, up.rhs), (4.0, 3.5));
    }

    #[test]
    fn empty_known_set_matches_plain_rule() {
        let g = augmented_graph();
        let ledger = OverlayLedger::new();
        let mut access = AccessLayer::new(&g);
        let u = access.query(0).unwrap();
        let v = access.query(1).unwrap();
        let plain = is_removable(&u, &v, &ledger).unwrap();
        let aug =
            is_removable_with_degrees(&u, &v, &BTreeMap::new(), access.ledger(), &ledger).unwrap();
        assert_eq!(plain, aug);
    }

    #[test]
    fn degree_three_common_neighbor() {
        // n = 1, k_w = 3, max k = 4: 1 + 0.5 > 2 fails
        let g = Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (2, 5), (0, 3), (0, 4)]).unwrap();
        let ledger = OverlayLedger::new();
        let mut access = AccessLayer::new(&g);
        let u = access.query(0).unwrap();
        let v = access.query(1).unwrap();
        access.query(2).unwrap();
        let known = known_overlay_degrees(&[2], access.ledger(), &ledger);
        let r = is_removable_with_degrees(&u, &v, &known, access.ledger(), &ledger).unwrap();
        assert_eq!((r.lhs, r.rhs), (1.5, 2.0));
        assert!(!r.removable);
    }

    #[test]
    fn uncached_known_degree_is_rejected() {
        let g = augmented_graph();
        let ledger = OverlayLedger::new();
        let mut access = AccessLayer::new(&g);
        let u = access.query(0).unwrap();
        let v = access.query(1).unwrap();
        let known = BTreeMap::from([(2, 2)]);
        assert!(matches!(
            is_removable_with_degrees(&u, &v, &known, access.ledger(), &ledger),
            Err(Error::ProvenanceViolation(2))
        ));
    }

    /// Barbell(11) overlay where the bridge node 10 keeps only 8, 9 and 11.
    fn bridge_of_degree_three() -> (Graph, OverlayLedger) {
        let g = barbell(11).unwrap();
        let mut ledger = OverlayLedger::new();
        for r in 0..8 {
            ledger.drop_edge(EdgeKey::new(r, 10), true);
        }
        (g, ledger)
    }

    #[test]
    fn bridge_replacement_candidates() {
        let (g, ledger) = bridge_of_degree_three();
        let mut access = AccessLayer::new(&g);
        let pivot = access.query(10).unwrap();
        let r = access.query(9).unwrap();
        let mut seen = BTreeSet::new();
        for seed in 0..64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            seen.insert(replacement_candidate(&pivot, &r, &ledger, &mut rng).unwrap().unwrap());
        }
        // 8 is already a neighbor of 9, so only the far side of the bridge qualifies
        assert_eq!(seen, BTreeSet::from([11]));

        let mut ledger = ledger;
        assert!(apply_replacement(&mut ledger, EdgeKey::new(9, 10), EdgeKey::new(9, 11), &r).unwrap());
        assert!(effective_neighbors(&g, &ledger, 11).unwrap().contains(&9));
        assert!(!effective_neighbors(&g, &ledger, 10).unwrap().contains(&9));
        assert_eq!(effective_neighbors(&g, &ledger, 10).unwrap(), vec![8, 11]);
        assert_eq!(ledger.decision(EdgeKey::new(9, 10)), Some(Decision::Replaced));
    }

    #[test]
    fn uniform_between_two_free_candidates() {
        // path-like pivot: 1 has neighbors 0, 2, 3 and none of them touch 0
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (1, 3)]).unwrap();
        let ledger = OverlayLedger::new();
        let mut access = AccessLayer::new(&g);
        let pivot = access.query(1).unwrap();
        let u = access.query(0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 4];
        for _ in 0..4000 {
            counts[replacement_candidate(&pivot, &u, &ledger, &mut rng).unwrap().unwrap()] += 1;
        }
        assert_eq!(counts[0] + counts[1], 0);
        assert!((counts[2] as f64 - 2000.0).abs() < 5.0 * 1000f64.sqrt());
    }

    #[test]
    fn replacement_needs_degree_three() {
        let g = barbell(4).unwrap();
        let ledger = OverlayLedger::new();
        let mut access = AccessLayer::new(&g);
        let pivot = access.query(3).unwrap(); // degree 4
        let u = access.query(0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(replacement_candidate(&pivot, &u, &ledger, &mut rng).unwrap(), None);

        let leaf_graph = Graph::from_edges(2, [(0, 1)]).unwrap();
        let mut access = AccessLayer::new(&leaf_graph);
        let pivot = access.query(1).unwrap();
        let u = access.query(0).unwrap();
        assert_eq!(replacement_candidate(&pivot, &u, &ledger, &mut rng).unwrap(), None);

        let far = access.query(1).unwrap();
        let g2 = barbell(4).unwrap();
        let mut access2 = AccessLayer::new(&g2);
        let stranger = access2.query(6).unwrap();
        assert!(matches!(
            replacement_candidate(&far, &stranger, &ledger, &mut rng),
            Err(Error::EdgeAbsent(_))
        ));
    }

    #[test]
    fn removal_is_idempotent_and_symmetric() {
        let g = barbell(4).unwrap();
        let mut ledger = OverlayLedger::new();
        let mut access = AccessLayer::new(&g);
        let a = access.query(0).unwrap();
        let e = EdgeKey::new(0, 1);
        assert!(apply_removal(&mut ledger, e, &a).unwrap());
        assert!(!apply_removal(&mut ledger, e, &a).unwrap());
        assert_eq!(ledger.removed().len(), 1);
        assert!(!effective_neighbors(&g, &ledger, 0).unwrap().contains(&1));
        assert!(!effective_neighbors(&g, &ledger, 1).unwrap().contains(&0));

        let kept = EdgeKey::new(0, 2);
        apply_keep(&mut ledger, kept).unwrap();
        assert!(matches!(
            apply_removal(&mut ledger, kept, &a),
            Err(Error::DecisionConflict { .. })
        ));
        assert!(matches!(
            apply_removal(&mut ledger, EdgeKey::new(0, 6), &a),
            Err(Error::EdgeAbsent(_))
        ));
    }

    #[test]
    fn replacement_moves_the_edge() {
        // u = 0 - v = 1 - w = 2, v also touches 3
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (1, 3)]).unwrap();
        let mut ledger = OverlayLedger::new();
        let mut access = AccessLayer::new(&g);
        let u = access.query(0).unwrap();
        apply_replacement(&mut ledger, EdgeKey::new(0, 1), EdgeKey::new(0, 2), &u).unwrap();
        assert_eq!(effective_neighbors(&g, &ledger, 0).unwrap(), vec![2]);
        assert_eq!(effective_neighbors(&g, &ledger, 2).unwrap(), vec![0, 1]);
        assert_eq!(effective_neighbors(&g, &ledger, 1).unwrap(), vec![2, 3]);
        // repeating is a no-op, re-adding a retired edge is not allowed
        assert!(!apply_replacement(&mut ledger, EdgeKey::new(0, 1), EdgeKey::new(0, 2), &u).unwrap());
        assert!(matches!(
            apply_addition(&mut ledger, EdgeKey::new(0, 1), &u),
            Err(Error::RetiredEdge(_))
        ));
        assert!(matches!(
            apply_addition(&mut ledger, EdgeKey::new(0, 2), &u),
            Err(Error::EdgeExists(_))
        ));
    }

    #[test]
    fn audit_csv_rows() {
        let v = RemovalVerdict {
            removable: true,
            rule: Rule::CommonNeighbors,
            lhs: 4.0,
            rhs: 3.5,
        };
        let rows = [
            AuditEntry::from_verdict(EdgeKey::new(3, 1), &v),
            AuditEntry {
                edge: EdgeKey::new(1, 2),
                rule: "replacement",
                lhs: 3.0,
                rhs: 3.0,
                action: AuditAction::Replace {
                    with: EdgeKey::new(1, 5),
                },
            },
        ];
        let mut buf = Vec::new();
        write_audit_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "edge,rule,lhs,rhs,action\n1-3,common_neighbors,4,3.5,remove\n1-2,replacement,3,3,replace:1-5\n"
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn verdict_matches_inequality(common in 0usize..10, up in 0usize..8, vp in 0usize..8) {
                let g = pair_graph(common, up, vp);
                let v = verdict_for(&g);
                let ku = common + 1 + up;
                let kv = common + 1 + vp;
                let lhs = (common as f64 / 2.0).ceil() + 1.0;
                let rhs = ku.max(kv) as f64 / 2.0;
                prop_assert_eq!(v.lhs, lhs);
                prop_assert_eq!(v.rhs, rhs);
                if v.rule == Rule::Guarded {
                    prop_assert!(!v.removable);
                } else {
                    prop_assert_eq!(v.removable, lhs > rhs);
                }
                if v.removable {
                    prop_assert!(v.lhs > v.rhs);
                }
            }
        }
    }
}
