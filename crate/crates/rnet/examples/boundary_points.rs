//! Boundary points seen through harmonic functions: paths to infinity
//! are equivalent when no finite-energy harmonic function separates
//! them, and kernel functionals take definite values at each end.

use rnet::boundary::{count_boundary_points, functional_eval, harmonic_probe_set, InfinitePath};
use rnet::models::{build_model, ModelSpec};
use rnet::solve::fin_kernel;
use rnet::Vertex;

fn main() {
    // An m-armed star of geometric chains has one boundary point per arm.
    for m in [2u32, 3, 4] {
        let spec = ModelSpec::Star { m, c: 2.0 };
        let net = build_model(&spec).unwrap();
        let tests = harmonic_probe_set(&net, 18, 1e-6).unwrap();
        let rays = InfinitePath::standard(&spec);
        let count = count_boundary_points(&tests, &rays, 14, 1e-3).unwrap();
        println!(
            "star with {m} arms: {} boundary points from {} probes, consistent = {}",
            count.classes.len(),
            tests.len(),
            count.consistent
        );
    }

    // The half line has no nonconstant finite-energy harmonics, so every
    // escape route lands in the same single boundary point.
    let spec = ModelSpec::GeoHalf { c: 2.0 };
    let net = build_model(&spec).unwrap();
    let tests = harmonic_probe_set(&net, 18, 1e-6).unwrap();
    let rays: Vec<InfinitePath> = (0i64..3)
        .map(|s| InfinitePath::from_fn(format!("ray+{s}"), move |i| Vertex::Int(i as i64 + s)))
        .collect();
    let count = count_boundary_points(&tests, &rays, 14, 1e-3).unwrap();
    println!(
        "geometric half line: {} boundary point(s), no separating probes ({} found)",
        count.classes.len(),
        tests.len()
    );

    // On the two-ended chain the kernel's harmonic part h_1 takes the
    // values +1/4 and -1/4 at the two ends.
    let spec = ModelSpec::GeoInt { c: 2.0 };
    let net = build_model(&spec).unwrap();
    let fam = fin_kernel(&net, &Vertex::Int(1), 20, 1e-6).unwrap();
    let h = fam.h.as_ref().unwrap();
    for ray in InfinitePath::standard(&spec) {
        let rep = functional_eval(h, &ray, 16, 1e-4).unwrap();
        println!(
            "h_1 along {}: limit {:+.6} (converged: {})",
            ray.label, rep.value, rep.converged
        );
    }
}
