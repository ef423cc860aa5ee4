//! Monopoles and the transience dichotomy: a network admits a
//! finite-energy solution of L w = delta exactly when the random walk is
//! transient. Harmonic dimension is estimated from kernel probes.

use rnet::models::{build_model, ModelSpec};
use rnet::potential_theory::classify;
use rnet::solve::monopole;

fn main() {
    let cases: Vec<(&str, ModelSpec, u32, f64)> = vec![
        ("unit line", ModelSpec::SimpleLine, 20, 1e-6),
        ("geometric integers", ModelSpec::GeoInt { c: 2.0 }, 25, 1e-6),
        ("geometric half line", ModelSpec::GeoHalf { c: 2.0 }, 25, 1e-6),
        ("3-armed star", ModelSpec::Star { m: 3, c: 2.0 }, 20, 1e-6),
        ("binary tree", ModelSpec::BinaryTree, 12, 1e-3),
    ];
    for (name, spec, k_max, tol) in cases {
        let net = build_model(&spec).unwrap();
        let rep = classify(&net, k_max, tol).unwrap();
        println!(
            "{name:20} {:?} (harm_dim {} from {} probes{})",
            rep.transience,
            rep.harm_dim,
            rep.probes.len(),
            if rep.probe_caveat { ", probe-window estimate" } else { "" },
        );
    }

    // The monopole itself, where it exists: on the geometric integers
    // w(n) = (1/2) 2^-|n| with energy 1/2.
    let net = build_model(&ModelSpec::GeoInt { c: 2.0 }).unwrap();
    let mono = monopole(&net, net.origin(), 25, 1e-7).unwrap();
    let w = mono.w.unwrap();
    println!("\nmonopole on the geometric integers, E(w) = {:.8}:", mono.energy.unwrap());
    for n in 0i64..=5 {
        println!("  w({n}) = {:.8}", w.get(&rnet::Vertex::Int(n)).unwrap());
    }
}
