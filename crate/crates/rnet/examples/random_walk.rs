//! The probabilistic face of the kernel: dipole values factor through
//! hitting probabilities, checked exactly and by simulation.

use std::collections::BTreeMap;

use rnet::solve::solve_grounded;
use rnet::stochastic::{hitting_probability, random_walk_mc};
use rnet::{Network, Vertex};

fn v(s: &str) -> Vertex {
    Vertex::Name(s.into())
}

fn main() {
    // A weighted 4-cycle with a chord.
    let net = Network::finite(
        &[
            (v("o"), v("a"), 2.0),
            (v("a"), v("x"), 1.0),
            (v("x"), v("b"), 1.0),
            (v("b"), v("o"), 2.0),
            (v("a"), v("b"), 0.5),
        ],
        v("o"),
    )
    .unwrap();

    // The dipole at x grounded at o: v_x(y) = R(x,o) P_y[hit x before o].
    let mut charge = BTreeMap::new();
    charge.insert(v("x"), 1.0);
    let pot = solve_grounded(&net, &charge, &v("o")).unwrap();
    let r = pot.get(&v("x")).unwrap();
    println!("R(x, o) = {r:.6}");
    for y in ["a", "b"] {
        let p = hitting_probability(&net, &v("x"), &v("o"), &v(y)).unwrap();
        println!(
            "  v_x({y}) = {:.6}   R * P_{y}[hit x first] = {:.6}",
            pot.get(&v(y)).unwrap(),
            r * p
        );
    }

    // The conductance-weighted walk estimates the same probability, with
    // a seeded, reproducible run and a binomial confidence interval.
    let p = hitting_probability(&net, &v("x"), &v("o"), &v("a")).unwrap();
    let est = random_walk_mc(&net, &v("a"), &v("x"), &v("o"), 200_000, 1).unwrap();
    println!(
        "\nwalks from a: p_hat = {:.5} +/- {:.5}, exact = {:.5}, inside CI: {}",
        est.p_hat,
        est.ci95,
        p,
        (est.p_hat - p).abs() <= est.ci95
    );
}
