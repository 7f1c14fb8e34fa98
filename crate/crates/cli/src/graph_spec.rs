//! Parsing of the `--graph` argument.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use mto_core::access::{load_edgelist, EdgeMode};
use mto_core::generators::{barbell, gnp_connected, latent_space, LatentSpaceConfig, Sharpness};
use mto_core::graph::Graph;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    Barbell(usize),
    Latent { config: LatentSpaceConfig, giant: bool },
    Gnp { n: usize, p: f64, seed: u64 },
    File(PathBuf),
}

/// A built graph, with coordinates for latent-space samples.
pub struct Built {
    pub graph: Graph,
    pub coords: Option<Vec<[f64; 2]>>,
}

fn params(body: &str) -> Result<BTreeMap<&str, &str>> {
    let mut map = BTreeMap::new();
    for part in body.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("expected key=value, found `{part}`"))?;
        map.insert(k.trim(), v.trim());
    }
    Ok(map)
}

fn take<T: std::str::FromStr>(map: &mut BTreeMap<&str, &str>, key: &str) -> Result<Option<T>> {
    match map.remove(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| anyhow!("bad value `{v}` for `{key}`")),
    }
}

impl std::str::FromStr for GraphSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let Some((kind, body)) = s.split_once(':') else {
            return Ok(GraphSpec::File(PathBuf::from(s)));
        };
        let spec = match kind {
            "barbell" => GraphSpec::Barbell(body.parse().context("barbell size")?),
            "latent" => {
                let mut p = params(body)?;
                let n = take(&mut p, "n")?.context("latent graph needs n")?;
                let mut config = LatentSpaceConfig::standard(n, take(&mut p, "seed")?.unwrap_or(0));
                if let Some(v) = take(&mut p, "width")? {
                    config.width = v;
                }
                if let Some(v) = take(&mut p, "height")? {
                    config.height = v;
                }
                if let Some(v) = take(&mut p, "radius")? {
                    config.radius = v;
                }
                match p.remove("alpha") {
                    None | Some("inf") => {}
                    Some(a) => config.sharpness = Sharpness::Finite(a.parse().context("alpha")?),
                }
                let giant = take(&mut p, "giant")?.unwrap_or(true);
                if let Some(k) = p.keys().next() {
                    bail!("unknown latent parameter `{k}`");
                }
                GraphSpec::Latent { config, giant }
            }
            "gnp" => {
                let mut p = params(body)?;
                let spec = GraphSpec::Gnp {
                    n: take(&mut p, "n")?.context("gnp needs n")?,
                    p: take(&mut p, "p")?.context("gnp needs p")?,
                    seed: take(&mut p, "seed")?.unwrap_or(0),
                };
                if let Some(k) = p.keys().next() {
                    bail!("unknown gnp parameter `{k}`");
                }
                spec
            }
            "file" => GraphSpec::File(PathBuf::from(body)),
            other => bail!("unknown graph kind `{other}`"),
        };
        Ok(spec)
    }
}

impl GraphSpec {
    pub fn build(&self, mode: EdgeMode) -> Result<Built> {
        Ok(match self {
            GraphSpec::Barbell(m) => Built {
                graph: barbell(*m)?,
                coords: None,
            },
            GraphSpec::Latent { config, giant } => {
                let mut lg = latent_space(config)?;
                if *giant {
                    lg = lg.giant_component()?;
                }
                Built {
                    graph: lg.graph,
                    coords: Some(lg.coords),
                }
            }
            GraphSpec::Gnp { n, p, seed } => Built {
                graph: gnp_connected(*n, *p, *seed)?,
                coords: None,
            },
            GraphSpec::File(path) => Built {
                graph: load_edgelist(path, mode).with_context(|| format!("loading {}", path.display()))?,
                coords: None,
            },
        })
    }
}
