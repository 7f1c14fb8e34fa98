//! Latent-space generator checked against numeric integrals of the
//! coordinate-difference densities.

use mto_core::generators::{
    barbell, clone_with_bridge, latent_space, removal_gain_factor, LatentSpaceConfig, Sharpness,
};

/// Density of `a - b` for `a, b` uniform on `[0, w]`.
fn triangular(x: f64, w: f64) -> f64 {
    if x.abs() >= w {
        0.0
    } else {
        (w - x.abs()) / (w * w)
    }
}

/// `E[link(|d|)]` for two independent uniform points on `width x height`.
fn pair_link_mass(width: f64, height: f64, link: impl Fn(f64) -> f64) -> f64 {
    let steps = 800;
    let (hx, hy) = (2.0 * width / steps as f64, 2.0 * height / steps as f64);
    let mut total = 0.0;
    for i in 0..steps {
        let x = -width + (i as f64 + 0.5) * hx;
        let fx = triangular(x, width);
        for j in 0..steps {
            let y = -height + (j as f64 + 0.5) * hy;
            total += fx * triangular(y, height) * link((x * x + y * y).sqrt());
        }
    }
    total * hx * hy
}

fn mean_degree(cfg: &LatentSpaceConfig, seeds: u64) -> f64 {
    let mut sum = 0.0;
    for s in 0..seeds {
        let g = latent_space(&LatentSpaceConfig { seed: s, ..cfg.clone() }).unwrap().graph;
        sum += 2.0 * g.edge_count() as f64 / g.node_count() as f64;
    }
    sum / seeds as f64
}

#[test]
fn hard_threshold_mean_degree_matches_integral() {
    let cfg = LatentSpaceConfig::standard(400, 0);
    let q = pair_link_mass(4.0, 5.0, |d| if d < 0.7 { 1.0 } else { 0.0 });
    let expected = 399.0 * q;
    let got = mean_degree(&cfg, 20);
    assert!((got - expected).abs() / expected < 0.05, "{got} vs {expected}");
}

#[test]
fn logistic_mean_degree_matches_integral() {
    let cfg = LatentSpaceConfig {
        sharpness: Sharpness::Finite(8.0),
        ..LatentSpaceConfig::standard(300, 0)
    };
    let q = pair_link_mass(4.0, 5.0, |d| cfg.link_probability(d));
    let expected = 299.0 * q;
    let got = mean_degree(&cfg, 20);
    assert!((got - expected).abs() / expected < 0.05, "{got} vs {expected}");
}

#[test]
fn gain_factor_matches_integral() {
    let trials = 200_000;
    let d0 = 0.75f64.sqrt() * 0.7;
    let p = pair_link_mass(4.0, 5.0, |d| if d <= d0 { 1.0 } else { 0.0 });
    let sd = (p * (1.0 - p) / trials as f64).sqrt();
    for seed in 0..5 {
        let cfg = LatentSpaceConfig::standard(100, seed);
        let factor = removal_gain_factor(&cfg, trials).unwrap();
        let p_hat = 1.0 - 1.0 / factor;
        assert!((p_hat - p).abs() < 3.0 * sd, "seed {seed}: {p_hat} vs {p}");
    }
}

#[test]
fn coordinates_stay_in_rectangle_and_giant_is_connected() {
    let lg = latent_space(&LatentSpaceConfig::standard(150, 3)).unwrap();
    assert!(lg.coords.iter().all(|&[x, y]| (0.0..=4.0).contains(&x) && (0.0..=5.0).contains(&y)));
    let giant = lg.giant_component().unwrap();
    assert!(giant.graph.is_connected());
    assert_eq!(giant.coords.len(), giant.graph.node_count());
    let mut buf = Vec::new();
    giant.write_coordinates(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), giant.coords.len());
}

#[test]
fn clone_keeps_neighborhoods() {
    let g = barbell(4).unwrap();
    let (h, e) = clone_with_bridge(&g, 0).unwrap();
    assert_eq!(h.edge_count(), 2 * g.edge_count() + 1);
    assert!(h.has_edge(e.low(), e.high()));
    for u in 1..g.node_count() {
        assert_eq!(h.neighbors(u).unwrap(), g.neighbors(u).unwrap());
    }
}
