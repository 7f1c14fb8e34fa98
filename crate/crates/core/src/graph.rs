//! Undirected base topology and the overlay ledger that rewires it.
//!
//! The base [`Graph`] is immutable once built. All rewiring lives in an
//! [`OverlayLedger`], which records removed and added edges on top of the
//! base graph. Overlay neighborhoods are resolved on demand and never
//! materialized unless explicitly exported.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node identifier in `0..node_count`.
pub type NodeId = usize;

/// Unordered node pair with canonical ordering, smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeKey(NodeId, NodeId);

impl EdgeKey {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            Self(a, b)
        } else {
            Self(b, a)
        }
    }

    pub fn low(&self) -> NodeId {
        self.0
    }

    pub fn high(&self) -> NodeId {
        self.1
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.0 == node || self.1 == node
    }

    /// The endpoint opposite `node`, if `node` is an endpoint.
    pub fn other(&self, node: NodeId) -> Option<NodeId> {
        if self.0 == node {
            Some(self.1)
        } else if self.1 == node {
            Some(self.0)
        } else {
            None
        }
    }

    /// The endpoint shared with `other`, if exactly one is shared.
    pub fn shared_endpoint(&self, other: &EdgeKey) -> Option<NodeId> {
        if self == other {
            return None;
        }
        [self.0, self.1].into_iter().find(|&n| other.contains(n))
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// Simple undirected graph over dense node ids with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    num_edges: usize,
    labels: Option<Vec<String>>,
}

impl Graph {
    /// Builds a graph on `node_count` nodes. Self-loops are dropped and
    /// duplicate pairs collapse to a single edge.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut adjacency = vec![Vec::new(); node_count];
        for (a, b) in edges {
            if a >= node_count {
                return Err(Error::NodeNotFound(a));
            }
            if b >= node_count {
                return Err(Error::NodeNotFound(b));
            }
            if a == b {
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut twice = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        Ok(Self {
            adjacency,
            num_edges: twice / 2,
            labels: None,
        })
    }

    /// Attaches original node labels, one per dense id.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.node_count() {
            return Err(Error::InvalidConfig(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.node_count()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.num_edges
    }

    pub fn contains_node(&self, u: NodeId) -> bool {
        u < self.adjacency.len()
    }

    pub fn neighbors(&self, u: NodeId) -> Result<&[NodeId]> {
        self.adjacency
            .get(u)
            .map(Vec::as_slice)
            .ok_or(Error::NodeNotFound(u))
    }

    pub fn degree(&self, u: NodeId) -> Result<usize> {
        self.neighbors(u).map(<[NodeId]>::len)
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency
            .get(a)
            .is_some_and(|list| list.binary_search(&b).is_ok())
    }

    pub fn min_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Edges in ascending canonical order.
    pub fn edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&v| v > u)
                .map(move |&v| EdgeKey::new(u, v))
        })
    }

    pub fn label(&self, u: NodeId) -> Option<&str> {
        self.labels.as_ref()?.get(u).map(String::as_str)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Connected components as sorted node lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut members = Vec::new();
            while let Some(x) = queue.pop_front() {
                members.push(x);
                for &y in &self.adjacency[x] {
                    if !seen[y] {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && self.components().len() == 1
    }

    /// Induced subgraph on `nodes` (sorted, deduplicated), relabelled densely
    /// in the given order. Original labels carry over when present.
    pub fn induced(&self, nodes: &[NodeId]) -> Result<Graph> {
        let mut index = BTreeMap::new();
        for (i, &u) in nodes.iter().enumerate() {
            if !self.contains_node(u) {
                return Err(Error::NodeNotFound(u));
            }
            index.insert(u, i);
        }
        let mut edges = Vec::new();
        for (&u, &iu) in &index {
            for v in &self.adjacency[u] {
                if let Some(&iv) = index.get(v) {
                    if iu < iv {
                        edges.push((iu, iv));
                    }
                }
            }
        }
        let g = Graph::from_edges(nodes.len(), edges)?;
        match &self.labels {
            Some(labels) => g.with_labels(nodes.iter().map(|&u| labels[u].clone()).collect()),
            None => Ok(g),
        }
    }

    /// Largest connected component (ties broken by smallest member) together
    /// with the original id of each new dense id.
    pub fn largest_component(&self) -> Result<(Graph, Vec<NodeId>)> {
        let comps = self.components();
        let best = comps
            .into_iter()
            .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
            .ok_or(Error::EmptyGraph)?;
        let g = self.induced(&best)?;
        Ok((g, best))
    }

    /// Writes "u v" lines in ascending canonical order.
    pub fn write_edgelist<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in self.edges() {
            writeln!(out, "{} {}", e.low(), e.high())?;
        }
        Ok(())
    }
}

/// Outcome recorded for an edge during one sampling session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Removable,
    NotRemovable,
    Replaced,
}

impl Decision {
    /// Whether the edge has left the overlay for good.
    pub fn is_terminal(self) -> bool {
        matches!(self, Decision::Removable | Decision::Replaced)
    }
}

/// Removed and added edges defining the overlay graph on top of a base graph,
/// plus the per-edge decision cache.
///
/// `removed` only ever holds base edges and `added` only non-base edges, so
/// the two sets are disjoint. Decisions are append-only: `Removable` and
/// `Replaced` are terminal and `NotRemovable` may only be upgraded to
/// `Replaced`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OverlayLedger {
    removed: BTreeSet<EdgeKey>,
    added: BTreeSet<EdgeKey>,
    decisions: BTreeMap<EdgeKey, Decision>,
    removed_at: BTreeMap<NodeId, BTreeSet<NodeId>>,
    added_at: BTreeMap<NodeId, BTreeSet<NodeId>>,
    revision: u64,
}

impl OverlayLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// True when the overlay equals the base graph.
    pub fn is_identity(&self) -> bool {
        self.removed.is_empty() && self.added.is_empty()
    }

    pub fn removed(&self) -> &BTreeSet<EdgeKey> {
        &self.removed
    }

    pub fn added(&self) -> &BTreeSet<EdgeKey> {
        &self.added
    }

    pub fn decision(&self, edge: EdgeKey) -> Option<Decision> {
        self.decisions.get(&edge).copied()
    }

    pub fn decisions(&self) -> &BTreeMap<EdgeKey, Decision> {
        &self.decisions
    }

    /// Bumped on every topology change; unchanged revisions mean an
    /// unchanged overlay.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    /// Number of added edges incident to `node`.
    pub fn added_degree(&self, node: NodeId) -> usize {
        self.added_at.get(&node).map_or(0, BTreeSet::len)
    }

    /// Overlay neighborhood of `node` given its base neighbor list.
    pub fn resolve(&self, node: NodeId, base: &[NodeId]) -> Vec<NodeId> {
        let dropped = self.removed_at.get(&node);
        let extra = self.added_at.get(&node);
        if dropped.is_none() && extra.is_none() {
            return base.to_vec();
        }
        let mut out: Vec<NodeId> = base
            .iter()
            .copied()
            .filter(|v| dropped.is_none_or(|d| !d.contains(v)))
            .collect();
        if let Some(extra) = extra {
            out.extend(extra.iter().copied());
            out.sort_unstable();
        }
        out
    }

    /// Whether `edge` is in the overlay, given whether it is a base edge.
    pub fn contains(&self, edge: EdgeKey, in_base: bool) -> bool {
        if in_base {
            !self.removed.contains(&edge)
        } else {
            self.added.contains(&edge)
        }
    }

    /// Records a decision. Returns `Ok(false)` when the same decision was
    /// already cached.
    pub fn record(&mut self, edge: EdgeKey, decision: Decision) -> Result<bool> {
        match self.decisions.get(&edge).copied() {
            None => {
                self.decisions.insert(edge, decision);
                Ok(true)
            }
            Some(prior) if prior == decision => Ok(false),
            Some(Decision::NotRemovable) if decision == Decision::Replaced => {
                self.decisions.insert(edge, decision);
                Ok(true)
            }
            Some(prior) => Err(Error::DecisionConflict {
                edge,
                prior,
                attempted: decision,
            }),
        }
    }

    pub(crate) fn drop_edge(&mut self, edge: EdgeKey, in_base: bool) {
        let (a, b) = (edge.low(), edge.high());
        if in_base {
            if self.removed.insert(edge) {
                self.removed_at.entry(a).or_default().insert(b);
                self.removed_at.entry(b).or_default().insert(a);
                self.revision += 1;
            }
        } else if self.added.remove(&edge) {
            for (x, y) in [(a, b), (b, a)] {
                if let Some(set) = self.added_at.get_mut(&x) {
                    set.remove(&y);
                    if set.is_empty() {
                        self.added_at.remove(&x);
                    }
                }
            }
            self.revision += 1;
        }
    }

    pub(crate) fn add_edge(&mut self, edge: EdgeKey) {
        if self.added.insert(edge) {
            let (a, b) = (edge.low(), edge.high());
            self.added_at.entry(a).or_default().insert(b);
            self.added_at.entry(b).or_default().insert(a);
            self.revision += 1;
        }
    }

    /// Materializes the overlay as a standalone graph.
    pub fn materialize(&self, base: &Graph) -> Result<Graph> {
        let edges = base
            .edges()
            .filter(|e| !self.removed.contains(e))
            .chain(self.added.iter().copied())
            .map(|e| (e.low(), e.high()));
        Graph::from_edges(base.node_count(), edges)
    }
}

/// Overlay-resolved neighbors of `u`; the overlay degree is its length.
pub fn effective_neighbors(g: &Graph, ledger: &OverlayLedger, u: NodeId) -> Result<Vec<NodeId>> {
    Ok(ledger.resolve(u, g.neighbors(u)?))
}

/// Common overlay neighbors of two distinct nodes.
pub fn common_neighbors(
    g: &Graph,
    ledger: &OverlayLedger,
    u: NodeId,
    v: NodeId,
) -> Result<Vec<NodeId>> {
    if u == v {
        return Err(Error::InvalidPair(u));
    }
    let nu = effective_neighbors(g, ledger, u)?;
    let nv = effective_neighbors(g, ledger, v)?;
    Ok(sorted_intersection(&nu, &nv))
}

pub(crate) fn sorted_intersection(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::barbell;

    #[test]
    fn edge_key_is_canonical() {
        assert_eq!(EdgeKey::new(5, 2), EdgeKey::new(2, 5));
        assert_eq!(EdgeKey::new(5, 2).low(), 2);
        assert_eq!(EdgeKey::new(2, 5).other(5), Some(2));
        assert_eq!(EdgeKey::new(2, 5).other(3), None);
        assert_eq!(
            EdgeKey::new(1, 2).shared_endpoint(&EdgeKey::new(2, 7)),
            Some(2)
        );
    }

    #[test]
    fn from_edges_drops_loops_and_duplicates() {
        let g = Graph::from_edges(3, [(0, 1), (1, 0), (1, 1), (1, 2)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1).unwrap(), &[0, 2]);
        assert!(matches!(
            Graph::from_edges(2, [(0, 2)]),
            Err(Error::NodeNotFound(2))
        ));
    }

    #[test]
    fn identity_overlay() {
        let g = barbell(11).unwrap();
        let ledger = OverlayLedger::new();
        for u in 0..g.node_count() {
            assert_eq!(
                effective_neighbors(&g, &ledger, u).unwrap(),
                g.neighbors(u).unwrap()
            );
        }
        assert!(matches!(
            effective_neighbors(&g, &ledger, 99),
            Err(Error::NodeNotFound(99))
        ));
    }

    #[test]
    fn removal_is_symmetric() {
        let g = barbell(11).unwrap();
        let mut ledger = OverlayLedger::new();
        ledger.drop_edge(EdgeKey::new(0, 1), true);
        assert!(!effective_neighbors(&g, &ledger, 0).unwrap().contains(&1));
        assert!(!effective_neighbors(&g, &ledger, 1).unwrap().contains(&0));
        assert_eq!(effective_neighbors(&g, &ledger, 0).unwrap().len(), 9);
    }

    #[test]
    fn added_edge_appears_at_both_endpoints() {
        // bridge u = 10, v = 11; r is a clique-mate of u
        let g = barbell(11).unwrap();
        let mut ledger = OverlayLedger::new();
        let r = 3;
        ledger.drop_edge(EdgeKey::new(r, 10), true);
        ledger.add_edge(EdgeKey::new(r, 11));
        assert!(effective_neighbors(&g, &ledger, r).unwrap().contains(&11));
        assert!(effective_neighbors(&g, &ledger, 11).unwrap().contains(&r));
        assert!(!effective_neighbors(&g, &ledger, 10).unwrap().contains(&r));
    }

    #[test]
    fn common_neighbor_counts() {
        let g = barbell(11).unwrap();
        let ledger = OverlayLedger::new();
        assert_eq!(common_neighbors(&g, &ledger, 0, 1).unwrap().len(), 9);
        assert!(common_neighbors(&g, &ledger, 10, 11).unwrap().is_empty());
        assert!(matches!(
            common_neighbors(&g, &ledger, 4, 4),
            Err(Error::InvalidPair(4))
        ));
    }

    #[test]
    fn five_shared_neighbors() {
        // u = 0, v = 1 share 2..=6, each with one private neighbor
        let mut edges = vec![(0, 1), (0, 7), (1, 8)];
        for w in 2..=6 {
            edges.push((0, w));
            edges.push((1, w));
        }
        let g = Graph::from_edges(9, edges).unwrap();
        let ledger = OverlayLedger::new();
        assert_eq!(common_neighbors(&g, &ledger, 0, 1).unwrap(), vec![2, 3, 4, 5, 6]);
        assert_eq!(g.degree(0).unwrap(), 7);
    }

    #[test]
    fn decisions_are_append_only() {
        let mut ledger = OverlayLedger::new();
        let e = EdgeKey::new(0, 1);
        assert!(ledger.record(e, Decision::NotRemovable).unwrap());
        assert!(!ledger.record(e, Decision::NotRemovable).unwrap());
        assert!(matches!(
            ledger.record(e, Decision::Removable),
            Err(Error::DecisionConflict { .. })
        ));
        assert!(ledger.record(e, Decision::Replaced).unwrap());
        assert!(ledger.record(e, Decision::NotRemovable).is_err());
    }

    #[test]
    fn materialize_and_export() {
        let g = barbell(3).unwrap();
        let mut ledger = OverlayLedger::new();
        ledger.drop_edge(EdgeKey::new(0, 1), true);
        ledger.add_edge(EdgeKey::new(0, 4));
        let star = ledger.materialize(&g).unwrap();
        assert_eq!(star.edge_count(), g.edge_count());
        let mut buf = Vec::new();
        star.write_edgelist(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("0 2"));
        assert!(text.contains("0 4\n"));
        assert!(!text.contains("0 1\n"));
    }

    #[test]
    fn largest_component_relabels() {
        let g = Graph::from_edges(6, [(0, 1), (2, 3), (3, 4), (4, 2)]).unwrap();
        let (lc, ids) = g.largest_component().unwrap();
        assert_eq!(ids, vec![2, 3, 4]);
        assert_eq!(lc.edge_count(), 3);
        assert!(lc.is_connected());
        assert!(!g.is_connected());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_graph() -> impl Strategy<Value = Graph> {
            (3usize..12).prop_flat_map(|n| {
                prop::collection::vec((0..n, 0..n), 0..40)
                    .prop_map(move |edges| Graph::from_edges(n, edges).unwrap())
            })
        }

        proptest! {
            #[test]
            fn overlay_stays_symmetric(g in arb_graph(), picks in prop::collection::vec((0usize..64, any::<bool>()), 0..10)) {
                let mut ledger = OverlayLedger::new();
                let n = g.node_count();
                let base: Vec<EdgeKey> = g.edges().collect();
                for (i, add) in picks {
                    if add {
                        let e = EdgeKey::new(i % n, (i / n + i + 1) % n);
                        if e.low() != e.high() && !g.has_edge(e.low(), e.high()) {
                            ledger.add_edge(e);
                        }
                    } else if !base.is_empty() {
                        ledger.drop_edge(base[i % base.len()], true);
                    }
                }
                let mut twice = 0;
                for u in 0..n {
                    let nu = effective_neighbors(&g, &ledger, u).unwrap();
                    twice += nu.len();
                    if ledger.added().is_empty() {
                        prop_assert!(nu.len() <= g.degree(u).unwrap());
                    }
                    for &v in &nu {
                        prop_assert!(effective_neighbors(&g, &ledger, v).unwrap().contains(&u));
                    }
                    for v in 0..n {
                        if v != u {
                            prop_assert_eq!(
                                common_neighbors(&g, &ledger, u, v).unwrap(),
                                common_neighbors(&g, &ledger, v, u).unwrap()
                            );
                        }
                    }
                }
                prop_assert!(ledger.removed().is_disjoint(ledger.added()));
                prop_assert_eq!(twice / 2, ledger.materialize(&g).unwrap().edge_count());
            }
        }
    }
}
