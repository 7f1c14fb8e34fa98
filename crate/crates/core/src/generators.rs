//! Synthetic graphs: the barbell family, the 2-D latent-space model, and a
//! few fixture constructions used by the oracle tests.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeKey, Graph, NodeId};

/// Two disjoint `m`-cliques on `0..m` and `m..2m` joined by the bridge
/// `(m - 1, m)`.
pub fn barbell(m: usize) -> Result<Graph> {
    if m < 3 {
        return Err(Error::Domain(format!("barbell clique size {m} < 3")));
    }
    let mut edges = Vec::with_capacity(m * (m - 1) + 1);
    for offset in [0, m] {
        for a in 0..m {
            for b in a + 1..m {
                edges.push((offset + a, offset + b));
            }
        }
    }
    edges.push((m - 1, m));
    Graph::from_edges(2 * m, edges)
}

/// The bridge edge of [`barbell`]`(m)`.
pub fn barbell_bridge(m: usize) -> EdgeKey {
    EdgeKey::new(m - 1, m)
}

/// Logistic sharpness of the connection probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sharpness {
    Finite(f64),
    /// Step function: connect iff distance < radius.
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentSpaceConfig {
    pub n: usize,
    pub width: f64,
    pub height: f64,
    pub radius: f64,
    pub sharpness: Sharpness,
    pub seed: u64,
}

impl LatentSpaceConfig {
    /// `n` nodes on `[0, 4] x [0, 5]` with radius 0.7 and a hard threshold.
    pub fn standard(n: usize, seed: u64) -> Self {
        Self {
            n,
            width: 4.0,
            height: 5.0,
            radius: 0.7,
            sharpness: Sharpness::Infinite,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n = {} < 2", self.n)));
        }
        for (name, v) in [
            ("width", self.width),
            ("height", self.height),
            ("radius", self.radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if let Sharpness::Finite(alpha) = self.sharpness {
            if !alpha.is_finite() || alpha < 0.0 {
                return Err(Error::InvalidConfig("alpha must be finite and >= 0".into()));
            }
        }
        Ok(())
    }

    /// Probability that two points at distance `d` are connected.
    pub fn link_probability(&self, d: f64) -> f64 {
        match self.sharpness {
            Sharpness::Infinite => {
                if d < self.radius {
                    1.0
                } else {
                    0.0
                }
            }
            Sharpness::Finite(alpha) => 1.0 / (1.0 + (alpha * (d - self.radius)).exp()),
        }
    }
}

/// A latent-space sample together with its node coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentGraph {
    pub graph: Graph,
    pub coords: Vec<[f64; 2]>,
}

impl LatentGraph {
    /// Writes "node_id x y" lines.
    pub fn write_coordinates<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (i, [x, y]) in self.coords.iter().enumerate() {
            writeln!(out, "{i} {x} {y}")?;
        }
        Ok(())
    }

    /// Largest connected component with coordinates carried over.
    pub fn giant_component(&self) -> Result<LatentGraph> {
        let (graph, ids) = self.graph.largest_component()?;
        let coords = ids.iter().map(|&i| self.coords[i]).collect();
        Ok(LatentGraph { graph, coords })
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Samples points uniformly on the rectangle and links each pair
/// independently. Isolated nodes are kept.
pub fn latent_space(config: &LatentSpaceConfig) -> Result<LatentGraph> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let coords: Vec<[f64; 2]> = (0..config.n)
        .map(|_| {
            [
                rng.gen::<f64>() * config.width,
                rng.gen::<f64>() * config.height,
            ]
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..config.n {
        for j in i + 1..config.n {
            let p = config.link_probability(distance(coords[i], coords[j]));
            let linked = match config.sharpness {
                Sharpness::Infinite => p == 1.0,
                Sharpness::Finite(_) => rng.gen::<f64>() < p,
            };
            if linked {
                edges.push((i, j));
            }
        }
    }
    Ok(LatentGraph {
        graph: Graph::from_edges(config.n, edges)?,
        coords,
    })
}

/// Lower bound on the expected conductance gain from edge removals in the
/// hard-threshold latent-space model.
///
/// Draws `trials` point pairs uniformly on the rectangle and estimates the
/// probability `p` that the coordinate differences satisfy
/// `dx^2 + dy^2 <= 0.75 r^2`; returns `1 / (1 - p)`.
pub fn removal_gain_factor(config: &LatentSpaceConfig, trials: usize) -> Result<f64> {
    config.validate()?;
    if config.sharpness != Sharpness::Infinite {
        return Err(Error::Domain("gain factor needs a hard threshold".into()));
    }
    if trials < 1000 {
        return Err(Error::InsufficientTrials(trials));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let threshold = 0.75 * config.radius * config.radius;
    let hits = (0..trials)
        .filter(|_| {
            let dx = (rng.gen::<f64>() - rng.gen::<f64>()) * config.width;
            let dy = (rng.gen::<f64>() - rng.gen::<f64>()) * config.height;
            dx * dx + dy * dy <= threshold
        })
        .count();
    let p = hits as f64 / trials as f64;
    Ok(1.0 / (1.0 - p))
}

/// Disjoint union of `g` with a copy of itself plus one edge joining `w` to
/// its clone. Returns the graph and the joining edge.
///
/// Any set of nodes of the original keeps the exact same neighborhoods, so
/// a sampler that only saw those nodes cannot tell the two graphs apart.
pub fn clone_with_bridge(g: &Graph, w: NodeId) -> Result<(Graph, EdgeKey)> {
    let n = g.node_count();
    if w >= n {
        return Err(Error::NodeNotFound(w));
    }
    let edges = g
        .edges()
        .flat_map(|e| [(e.low(), e.high()), (e.low() + n, e.high() + n)])
        .chain(std::iter::once((w, w + n)));
    Ok((Graph::from_edges(2 * n, edges)?, EdgeKey::new(w, w + n)))
}

/// Erdos-Renyi `G(n, p)` resampled until connected.
pub fn gnp_connected(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n < 2 || !(0.0..=1.0).contains(&p) || p == 0.0 {
        return Err(Error::InvalidConfig(format!("G({n}, {p})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen::<f64>() < p {
                    edges.push((a, b));
                }
            }
        }
        let g = Graph::from_edges(n, edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
}
