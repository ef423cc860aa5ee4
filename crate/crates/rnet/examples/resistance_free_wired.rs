//! Free against wired effective resistance: they differ exactly when
//! nonconstant harmonic functions of finite energy exist.

use rnet::models::{build_model, ModelSpec};
use rnet::resist::{free_resistance, wired_resistance};
use rnet::Vertex;

fn main() {
    let o = Vertex::Int(0);
    let one = Vertex::Int(1);

    // Two-ended geometric chain: Harm is one-dimensional, so the metrics
    // split. R^F(0,1) = 1/2 but R^W(0,1) = 3/8.
    let geo = build_model(&ModelSpec::GeoInt { c: 2.0 }).unwrap();
    let rf = free_resistance(&geo, &o, &one, 25, 1e-7).unwrap();
    let rw = wired_resistance(&geo, &o, &one, 25, 1e-7).unwrap();
    println!(
        "geometric integers: R^F(0,1) = {:.8}, R^W(0,1) = {:.8}, gap = {:.8}",
        rf.value,
        rw.value,
        rf.value - rw.value
    );

    // One-ended half line: Harm = 0 and the two resistances coincide.
    let half = build_model(&ModelSpec::GeoHalf { c: 2.0 }).unwrap();
    let rf = free_resistance(&half, &o, &Vertex::Int(2), 25, 1e-7).unwrap();
    let rw = wired_resistance(&half, &o, &Vertex::Int(2), 25, 1e-7).unwrap();
    println!(
        "geometric half line: R^F(0,2) = {:.8}, R^W(0,2) = {:.8}",
        rf.value, rw.value
    );

    // The wired metric reaches infinity itself: reduce the wired
    // truncation down to the terminals 0 and the infinity vertex.
    let t = rnet::exhaust::truncate(&geo, 20, rnet::exhaust::Flavor::Wired).unwrap();
    let red = rnet::resist::reduce_two_terminal(t.network(), &o, &Vertex::Infinity).unwrap();
    println!("geometric integers: R^W_20(0, infinity) = {:.8}", red.resistance);

    // On the recurrent unit line the escape resistance diverges like
    // k/2: there is no finite limit to certify.
    let line = build_model(&ModelSpec::SimpleLine).unwrap();
    for k in [5u32, 10, 20] {
        let t = rnet::exhaust::truncate(&line, k, rnet::exhaust::Flavor::Wired).unwrap();
        let red = rnet::resist::reduce_two_terminal(t.network(), &o, &Vertex::Infinity).unwrap();
        println!("unit line: R^W_{k}(0, infinity) = {:.3}", red.resistance);
    }
}
