//! Restricted neighborhood-query interface.
//!
//! Samplers never touch a [`Graph`] directly: they issue `query(v)` calls
//! through an [`AccessLayer`], which answers from a cache when possible and
//! charges one unit of cost per distinct node ever queried.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Name of the attribute every view carries.
pub const DEGREE: &str = "degree";

/// One answered query: a node, its base neighbors and its attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodView {
    pub node: NodeId,
    pub neighbors: Vec<NodeId>,
    pub attributes: BTreeMap<String, f64>,
}

impl NeighborhoodView {
    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }

    pub fn attribute(&self, name: &str) -> Option<f64> {
        self.attributes.get(name).copied()
    }
}

/// Per-node real-valued attributes beyond degree, keyed by attribute name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttributeTable {
    columns: BTreeMap<String, BTreeMap<NodeId, f64>>,
}

impl AttributeTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, node: NodeId, name: &str, value: f64) {
        self.columns
            .entry(name.to_string())
            .or_default()
            .insert(node, value);
    }

    pub fn get(&self, node: NodeId, name: &str) -> Option<f64> {
        self.columns.get(name)?.get(&node).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    fn for_node(&self, node: NodeId) -> impl Iterator<Item = (&str, f64)> {
        self.columns
            .iter()
            .filter_map(move |(k, col)| col.get(&node).map(|&v| (k.as_str(), v)))
    }

    /// Parses "node_id name value" lines. Node ids are matched against the
    /// graph's original labels when present, else read as dense ids.
    pub fn parse<R: BufRead>(reader: R, graph: &Graph) -> Result<Self> {
        let by_label: Option<HashMap<&str, NodeId>> = graph
            .labels()
            .map(|labels| labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect());
        let mut table = Self::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let [id, name, value] = fields[..] else {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected 3 fields, found {}", fields.len()),
                });
            };
            let node = match &by_label {
                Some(map) => map.get(id).copied(),
                None => id.parse::<NodeId>().ok().filter(|&n| graph.contains_node(n)),
            }
            .ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("unknown node `{id}`"),
            })?;
            let value: f64 = value.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad value `{value}`"),
            })?;
            table.insert(node, name, value);
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>, graph: &Graph) -> Result<Self> {
        Self::parse(BufReader::new(File::open(path)?), graph)
    }
}

/// Unique-query counter backed by the response cache.
///
/// `unique_count` always equals the number of cached nodes, so the count
/// never decreases and never double-charges a node.
#[derive(Debug, Clone, Default)]
pub struct QueryLedger {
    cache: BTreeMap<NodeId, Arc<NeighborhoodView>>,
}

impl QueryLedger {
    pub fn unique_count(&self) -> usize {
        self.cache.len()
    }

    pub fn is_cached(&self, v: NodeId) -> bool {
        self.cache.contains_key(&v)
    }

    pub fn get(&self, v: NodeId) -> Option<&Arc<NeighborhoodView>> {
        self.cache.get(&v)
    }

    pub fn cached_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.cache.keys().copied()
    }

    /// Ledger state export line.
    pub fn export_line(&self) -> String {
        format!("unique_queries={}", self.unique_count())
    }
}

/// The only read path samplers have into the backing graph.
#[derive(Debug, Clone)]
pub struct AccessLayer<'g> {
    graph: &'g Graph,
    attributes: Option<&'g AttributeTable>,
    ledger: QueryLedger,
    budget: Option<usize>,
    exposes_id_space: bool,
}

impl<'g> AccessLayer<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Self {
            graph,
            attributes: None,
            ledger: QueryLedger::default(),
            budget: None,
            exposes_id_space: true,
        }
    }

    pub fn with_attributes(mut self, attributes: &'g AttributeTable) -> Self {
        self.attributes = Some(attributes);
        self
    }

    /// Caps the number of unique queries.
    pub fn with_budget(mut self, budget: Option<usize>) -> Self {
        self.budget = budget;
        self
    }

    /// Whether uniform node ids can be drawn (required by random jumps).
    pub fn with_id_space(mut self, exposed: bool) -> Self {
        self.exposes_id_space = exposed;
        self
    }

    pub fn query(&mut self, v: NodeId) -> Result<Arc<NeighborhoodView>> {
        if let Some(view) = self.ledger.cache.get(&v) {
            return Ok(Arc::clone(view));
        }
        let neighbors = self.graph.neighbors(v)?.to_vec();
        if let Some(budget) = self.budget {
            if self.ledger.unique_count() >= budget {
                return Err(Error::BudgetExhausted { budget });
            }
        }
        let mut attributes = BTreeMap::new();
        attributes.insert(DEGREE.to_string(), neighbors.len() as f64);
        if let Some(table) = self.attributes {
            for (name, value) in table.for_node(v) {
                attributes.insert(name.to_string(), value);
            }
        }
        let view = Arc::new(NeighborhoodView {
            node: v,
            neighbors,
            attributes,
        });
        self.ledger.cache.insert(v, Arc::clone(&view));
        Ok(view)
    }

    /// Uniform draw from the node id space.
    pub fn random_node<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<NodeId> {
        if !self.exposes_id_space {
            return Err(Error::CapabilityUnavailable(
                "interface does not expose the node id space",
            ));
        }
        let n = self.graph.node_count();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        Ok(rng.gen_range(0..n))
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn unique_queries(&self) -> usize {
        self.ledger.unique_count()
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }
}

/// How "src dst" lines are turned into undirected edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeMode {
    /// Every line is an undirected edge.
    Undirected,
    /// Keep (u, v) only when both directions appear.
    ReciprocalDirected,
}

impl std::str::FromStr for EdgeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "undirected" => Ok(Self::Undirected),
            "reciprocal" | "reciprocal-directed" => Ok(Self::ReciprocalDirected),
            other => Err(Error::InvalidConfig(format!("unknown edge mode `{other}`"))),
        }
    }
}

/// Parses a SNAP-style edge list. Nodes without any surviving edge are
/// dropped; the remaining labels are sorted (numerically when every label is
/// an integer) and mapped to dense ids, so line order never matters.
pub fn parse_edgelist<R: BufRead>(reader: R, mode: EdgeMode) -> Result<Graph> {
    let mut arcs: BTreeSet<(String, String)> = BTreeSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let [src, dst] = fields[..] else {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        };
        if src != dst {
            arcs.insert((src.to_string(), dst.to_string()));
        }
    }

    let mut pairs: BTreeSet<(&str, &str)> = BTreeSet::new();
    for (a, b) in &arcs {
        let keep = match mode {
            EdgeMode::Undirected => true,
            EdgeMode::ReciprocalDirected => arcs.contains(&(b.clone(), a.clone())),
        };
        if keep {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            pairs.insert((lo.as_str(), hi.as_str()));
        }
    }
    if pairs.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let mut labels: Vec<&str> = pairs
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let numeric: Option<Vec<u64>> = labels.iter().map(|l| l.parse().ok()).collect();
    if let Some(nums) = numeric {
        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.sort_by_key(|&i| nums[i]);
        labels = order.into_iter().map(|i| labels[i]).collect();
    }
    let index: HashMap<&str, NodeId> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let edges = pairs.iter().map(|(a, b)| (index[a], index[b]));
    Graph::from_edges(labels.len(), edges)?
        .with_labels(labels.iter().map(|l| l.to_string()).collect())
}

pub fn load_edgelist(path: impl AsRef<Path>, mode: EdgeMode) -> Result<Graph> {
    parse_edgelist(BufReader::new(File::open(path)?), mode)
}
