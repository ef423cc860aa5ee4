//! Exact identities on a small finite network: the energy form against
//! the Laplacian, effective resistance three ways, and circuit reduction.

use std::collections::BTreeMap;

use rnet::network::{energy_total, laplacian_apply, Potential};
use rnet::resist::{effective_resistance, reduce_two_terminal};
use rnet::solve::solve_grounded;
use rnet::{Network, Vertex};

fn v(s: &str) -> Vertex {
    Vertex::Name(s.into())
}

fn main() {
    // A bridged square: two triangles sharing the edge b-c.
    let net = Network::finite(
        &[
            (v("a"), v("b"), 1.0),
            (v("b"), v("c"), 2.0),
            (v("c"), v("a"), 1.0),
            (v("b"), v("d"), 1.0),
            (v("d"), v("c"), 1.0),
        ],
        v("a"),
    )
    .unwrap();

    // A potential from a unit current injected at d, grounded at a.
    let mut charge = BTreeMap::new();
    charge.insert(v("d"), 1.0);
    let u = solve_grounded(&net, &charge, &v("a")).unwrap();
    for x in net.vertices().unwrap() {
        println!("u({x}) = {:.6}  Lu({x}) = {:+.6}", u.get(&x).unwrap(), laplacian_apply(&net, &u, &x).unwrap());
    }

    // E(u, u) equals the pairing sum_x u(x) (L u)(x): Gauss-Green with no
    // boundary.
    let e = energy_total(&net, &u, &u).unwrap();
    let mut pairing = 0.0;
    for x in net.vertices().unwrap() {
        pairing += u.get(&x).unwrap() * laplacian_apply(&net, &u, &x).unwrap();
    }
    println!("E(u,u) = {e:.12}, pairing = {pairing:.12}, residual = {:.2e}", (e - pairing).abs());

    // Dirac pairing: <1_x, u>_E picks out the Laplacian at x.
    let verts = net.vertices().unwrap();
    let delta = Potential::indicator(&v("b"), &verts);
    let lhs = energy_total(&net, &delta, &u).unwrap();
    println!("<1_b, u>_E = {lhs:.12}, Lu(b) = {:.12}", laplacian_apply(&net, &u, &v("b")).unwrap());

    // R(a, d): dipole drop, energy, and reciprocal Dirichlet energy agree.
    let r = effective_resistance(&net, &v("a"), &v("d")).unwrap();
    println!(
        "R(a,d): drop {:.9}, energy {:.9}, 1/E(s) {:.9}",
        r.potential_drop, r.energy, r.reciprocal_unit_drop
    );

    // Parallel/series/star-triangle rewrites reach the same number.
    let red = reduce_two_terminal(&net, &v("a"), &v("d")).unwrap();
    println!(
        "reduction: {} steps, complete = {}, R = {:.9} (solver {:.9})",
        red.steps.len(),
        red.complete,
        red.resistance,
        red.solver_resistance
    );
}
