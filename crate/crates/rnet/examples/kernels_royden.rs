//! The energy kernel and its Royden split v_x = f_x + h_x: the finitely
//! approximable part against the harmonic part, orthogonal in energy.

use rnet::models::{build_model, ModelSpec};
use rnet::network::energy;
use rnet::solve::fin_kernel;
use rnet::Vertex;

fn main() {
    let net = build_model(&ModelSpec::GeoInt { c: 2.0 }).unwrap();
    let x = Vertex::Int(1);

    // v_x is the free-truncation dipole limit, f_x the wired one; their
    // difference h_x is harmonic everywhere.
    let fam = fin_kernel(&net, &x, 25, 1e-7).unwrap();
    let f = fam.f.as_ref().unwrap();
    let h = fam.h.as_ref().unwrap();

    println!("kernel at x = 1, values along the chain:");
    for n in -4i64..=4 {
        let y = Vertex::Int(n);
        println!(
            "  v_1({n:+}) = {:+.6}   f_1({n:+}) = {:+.6}   h_1({n:+}) = {:+.6}",
            fam.v.get(&y).unwrap(),
            f.get(&y).unwrap(),
            h.get(&y).unwrap()
        );
    }

    // E(v_x) = v_x(x) = R^F(o, x); E(f_x) = f_x(x) = R^W(o, x).
    println!(
        "\nE(v_1) = {:.8} (free resistance), E(f_1) = {:.8} (wired resistance)",
        fam.v_energy(),
        fam.f_energy().unwrap()
    );

    // The two parts are orthogonal, so the energies split additively:
    // E(v) = E(f) + E(h) with E(h_1) = 1/8 here.
    let ball = net.ball(24).unwrap();
    let cross = energy(&net, f, h, &ball).unwrap();
    let eh = energy(&net, h, h, &ball).unwrap();
    println!("<f_1, h_1> = {cross:.3e}, E(h_1) = {eh:.8}");

    // The reproducing property: pairing any potential u against v_x reads
    // off u(x) - u(o). With u = v_1 itself this is the resistance again.
    let pairing = energy(&net, &fam.v, &fam.v, &ball).unwrap();
    println!("<v_1, v_1> = {pairing:.8} = v_1(1) - v_1(0) = {:.8}", fam.v.get(&x).unwrap());
}
