//! Truncated Gauss-Green: on every ball the energy pairing splits into
//! an interior charge sum and a boundary flux sum, exactly.

use rnet::models::{build_model, closed_forms, ClosedFormKind, ModelSpec};
use rnet::potential_theory::{charge_balance, gauss_green_split};
use rnet::solve::monopole;
use rnet::Vertex;

fn main() {
    let spec = ModelSpec::GeoInt { c: 2.0 };
    let net = build_model(&spec).unwrap();

    // Split the closed-form monopole against itself: the interior charge
    // term stays at w(0) = 1/2 while the boundary flux term decays, so
    // the windowed energies climb to E(w) = 1/2 with zero residual at
    // every level.
    let forms = closed_forms(&spec);
    let w = forms.iter().find(|f| matches!(f.kind, ClosedFormKind::Monopole)).unwrap();
    println!("E_k(w, w) = interior + boundary:");
    for k in [2u32, 4, 8, 16] {
        let s = gauss_green_split(&net, w, w, k).unwrap();
        println!(
            "  k={k:2}: {:.8} = {:+.8} {:+.8}  (residual {:.1e})",
            s.restricted_energy, s.interior_sum, s.boundary_sum, s.residual
        );
    }

    // For a computed monopole the interior charge is the unit Dirac mass
    // and the flux through any ball boundary is minus one.
    let mono = monopole(&net, &Vertex::Int(0), 25, 1e-7).unwrap();
    let wp = mono.w.unwrap();
    println!("\ncharge balance of the computed monopole:");
    for k in [3u32, 6, 12] {
        let cb = charge_balance(&net, &wp, k).unwrap();
        println!(
            "  k={k}: interior charge {:+.10}, boundary flux {:+.10}",
            cb.interior_charge, cb.boundary_flux
        );
    }
}
