//! The Gaussian field indexed by energy kernels: squared increments
//! recover effective resistance, and moments follow the Gaussian law.

use rnet::exhaust::Flavor;
use rnet::models::{build_model, ModelSpec};
use rnet::resist::free_resistance;
use rnet::solve::energy_kernel;
use rnet::stochastic::{moment_check, sample_field};
use rnet::Vertex;

fn main() {
    let net = build_model(&ModelSpec::GeoInt { c: 2.0 }).unwrap();
    let window: Vec<Vertex> = [1i64, -1, 2, -2].iter().map(|&n| Vertex::Int(n)).collect();
    let kernels: Vec<_> = window
        .iter()
        .map(|x| energy_kernel(&net, x, 25, 1e-7).unwrap())
        .collect();

    // The covariance is the kernel Gram matrix K_ij = v_{x_i}(x_j);
    // sampling is seeded and reproducible.
    let batch = sample_field(&net, &kernels, Flavor::Free, 100_000, 42).unwrap();
    println!(
        "sampled {} fields over window {:?} (generator {}, min eigenvalue {:.2e})",
        batch.n,
        window.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        batch.generator_id,
        batch.min_eigenvalue
    );

    // E[(xi_i - xi_j)^2] = R^F(x_i, x_j): resistance as a squared
    // Gaussian distance.
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 3)] {
        let mut c = vec![0.0; batch.d];
        c[i] = 1.0;
        c[j] = -1.0;
        let m = moment_check(&batch, &c, 2).unwrap();
        let r = free_resistance(&net, &window[i], &window[j], 25, 1e-7).unwrap();
        println!(
            "  E[(xi({}) - xi({}))^2] = {:.5} vs R^F = {:.5}  ({:+.2} sigma)",
            window[i],
            window[j],
            m.empirical,
            r.value,
            (m.empirical - m.predicted) / m.std_error
        );
    }

    // Fourth moment of a centered Gaussian: exactly three times the
    // squared variance.
    let mut e0 = vec![0.0; batch.d];
    e0[0] = 1.0;
    let m4 = moment_check(&batch, &e0, 4).unwrap();
    println!(
        "fourth moment of xi(1): empirical {:.5}, predicted 3 sigma^4 = {:.5}",
        m4.empirical, m4.predicted
    );
}
