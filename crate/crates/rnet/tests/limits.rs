//! Cross-module invariants of the exhaustion limits: reproducing
//! identities, schedule independence, boundedness, and the Gaussian
//! field's covariance contract.

use rnet::boundary::{functional_eval, sup_norm, InfinitePath};
use rnet::exhaust::{boundary_of, normal_derivative, truncate, Flavor, LimitTracker, Schedule};
use rnet::models::{build_model, closed_forms, ClosedFormKind, ModelSpec};
use rnet::network::{energy, Potential};
use rnet::resist::wired_resistance;
use rnet::solve::{energy_kernel, fin_kernel, monopole, Transience};
use rnet::stochastic::{moment_check, sample_field};
use rnet::{Network, Vertex};

fn geo2() -> Network {
    build_model(&ModelSpec::GeoInt { c: 2.0 }).unwrap()
}

fn geo_harmonic() -> rnet::models::ClosedForm {
    closed_forms(&ModelSpec::GeoInt { c: 2.0 })
        .into_iter()
        .find(|f| matches!(f.kind, ClosedFormKind::Harmonic))
        .unwrap()
}

// energy(h_x, h) = h(x) - h(o) for h in the harmonic subspace, and the
// one-dimensional proportionality E(h_1) E(h) = (h(1) - h(0))^2.
#[test]
fn harm_kernel_reproduces_harmonic_values() {
    let net = geo2();
    let ball = net.ball(22).unwrap();
    let fam = fin_kernel(&net, &Vertex::Int(1), 23, 1e-7).unwrap();
    let h1 = fam.h.as_ref().unwrap();
    let h = Potential::from_field(&geo_harmonic(), &ball).unwrap();

    let pairing = energy(&net, h1, &h, &ball).unwrap();
    assert!(
        (pairing - 0.5).abs() <= 1e-5,
        "reproducing pairing {pairing} != 1/2"
    );

    let eh1 = energy(&net, h1, h1, &ball).unwrap();
    let eh = energy(&net, &h, &h, &ball).unwrap();
    assert!(
        (eh1 * eh - 0.25).abs() <= 1e-5,
        "E(h_1) E(h) = {} != 1/4",
        eh1 * eh
    );
}

// The computed monopole is a true Laplacian delta on the interior window.
#[test]
fn monopole_is_pointwise_delta() {
    let net = geo2();
    let mono = monopole(&net, &Vertex::Int(0), 30, 1e-7).unwrap();
    assert_eq!(mono.transience, Transience::Transient);
    let w = mono.w.unwrap();
    for n in -10i64..=10 {
        let lap = rnet::network::laplacian_apply(&net, &w, &Vertex::Int(n)).unwrap();
        let expect = if n == 0 { 1.0 } else { 0.0 };
        assert!(
            (lap - expect).abs() <= 1e-6,
            "Lw({n}) = {lap}, expected {expect}"
        );
    }
}

// The boundary pairing limit does not depend on which exhaustion walks
// toward infinity: plain balls and the shifted schedule agree.
#[test]
fn boundary_sums_are_schedule_independent() {
    let net = geo2();
    let u = geo_harmonic();
    let kernel = energy_kernel(&net, &Vertex::Int(1), 25, 1e-7).unwrap();
    let tol = 1e-6;

    let mut limits = Vec::new();
    for schedule in [Schedule::Balls, Schedule::Shifted] {
        let mut tracker = LimitTracker::new(tol);
        for k in schedule.levels(20) {
            let t = truncate(&net, k, Flavor::Free).unwrap();
            let mut s = 0.0;
            for y in &boundary_of(&t).boundary {
                s += kernel.v.get(y).unwrap() * normal_derivative(&t, &u, y).unwrap();
            }
            tracker.push(k, s);
        }
        let report = tracker.into_report();
        assert!(report.converged, "{schedule:?} did not settle");
        limits.push(report.value);
    }
    assert!(
        (limits[0] - limits[1]).abs() <= 2.0 * tol,
        "schedules disagree: {limits:?}"
    );
}

// Boundary functionals are linear in the potential.
#[test]
fn functionals_are_linear() {
    let net = geo2();
    let f1 = fin_kernel(&net, &Vertex::Int(1), 20, 1e-6).unwrap();
    let f2 = fin_kernel(&net, &Vertex::Int(2), 20, 1e-6).unwrap();
    let h1 = f1.h.as_ref().unwrap();
    let h2 = f2.h.as_ref().unwrap();
    let ball = net.ball(20).unwrap();
    let combo = Potential::raw(
        ball.iter()
            .map(|v| (v.clone(), 2.0 * h1.get(v).unwrap() - 3.0 * h2.get(v).unwrap()))
            .collect(),
    );

    let tol = 1e-4;
    let ray = InfinitePath::from_fn("plus", |i| Vertex::Int(i as i64));
    let bc = functional_eval(&combo, &ray, 16, tol).unwrap();
    let b1 = functional_eval(h1, &ray, 16, tol).unwrap();
    let b2 = functional_eval(h2, &ray, 16, tol).unwrap();
    let defect = (bc.value - (2.0 * b1.value - 3.0 * b2.value)).abs();
    assert!(defect < 3.0 * tol, "linearity defect {defect}");
}

// Two paths into the same boundary point see the same functional.
#[test]
fn equivalent_paths_agree() {
    let net = geo2();
    let fam = fin_kernel(&net, &Vertex::Int(1), 20, 1e-6).unwrap();
    let h = fam.h.as_ref().unwrap();
    let tol = 1e-4;
    let a = functional_eval(h, &InfinitePath::from_fn("plus", |i| Vertex::Int(i as i64)), 16, tol)
        .unwrap();
    let b = functional_eval(
        h,
        &InfinitePath::from_fn("plus-shifted", |i| Vertex::Int(i as i64 + 3)),
        16,
        tol,
    )
    .unwrap();
    assert!(
        (a.value - b.value).abs() <= 2.0 * tol,
        "equivalent paths disagree: {} vs {}",
        a.value,
        b.value
    );
}

// Kernels and monopoles stay bounded: their sup-norm traces settle on
// every built-in model at the depth its growth allows.
#[test]
fn kernels_and_monopoles_are_bounded() {
    let kernel_cases: Vec<(ModelSpec, Vertex, u32)> = vec![
        (ModelSpec::GeoInt { c: 2.0 }, Vertex::Int(1), 25),
        (ModelSpec::GeoHalf { c: 2.0 }, Vertex::Int(1), 25),
        (ModelSpec::Star { m: 3, c: 2.0 }, Vertex::Branch(0, 1), 20),
        (ModelSpec::SimpleLine, Vertex::Int(1), 20),
        (
            ModelSpec::Ladder {
                alpha: 2.0,
                beta: 0.5,
            },
            Vertex::Rail(0, 1),
            15,
        ),
        (ModelSpec::BinaryTree, Vertex::Node(2), 12),
        (
            ModelSpec::LatticeJoin {
                m: 2,
                d: 3,
                width: 6,
            },
            Vertex::Int(0),
            12,
        ),
    ];
    for (spec, x, k_max) in kernel_cases {
        let net = build_model(&spec).unwrap();
        let x = if net.contains(&x) {
            x
        } else {
            let origin = net.origin().clone();
            net.ball(1)
                .unwrap()
                .into_iter()
                .find(|v| *v != origin)
                .unwrap()
        };
        let fam = energy_kernel(&net, &x, k_max, 1e-6).unwrap();
        let sup = sup_norm(&net, &fam.v, k_max, 1e-3).unwrap();
        assert!(
            sup.converged,
            "sup |v_x| trace still moving on {spec:?}: last {}",
            sup.value
        );
    }

    let monopole_cases: Vec<(ModelSpec, u32)> = vec![
        (ModelSpec::GeoInt { c: 2.0 }, 25),
        (ModelSpec::GeoHalf { c: 2.0 }, 25),
        (ModelSpec::Star { m: 3, c: 2.0 }, 20),
        (
            ModelSpec::Ladder {
                alpha: 2.0,
                beta: 0.5,
            },
            22,
        ),
    ];
    for (spec, k_max) in monopole_cases {
        let net = build_model(&spec).unwrap();
        let origin = net.origin().clone();
        let mono = monopole(&net, &origin, k_max, 1e-6).unwrap();
        let w = mono.w.unwrap_or_else(|| panic!("{spec:?} should be transient"));
        let sup = sup_norm(&net, &w, k_max, 1e-3).unwrap();
        assert!(sup.converged, "sup |w| trace still moving on {spec:?}");
    }
}

// The sampled covariance matches the kernel Gram matrix, entry by entry,
// within the standard Gaussian estimator bound.
#[test]
fn sample_covariance_matches_gram() {
    let net = geo2();
    let window: Vec<Vertex> = [1i64, -1, 2, -2, 3, -3].iter().map(|&n| Vertex::Int(n)).collect();
    let kernels: Vec<_> = window
        .iter()
        .map(|x| energy_kernel(&net, x, 20, 1e-7).unwrap())
        .collect();
    let n = 20_000usize;
    let batch = sample_field(&net, &kernels, Flavor::Free, n, 9).unwrap();

    let d = batch.d;
    let max_k = batch.gram.iter().fold(0.0f64, |m, &g| m.max(g.abs()));
    let bound = 5.0 * (max_k * max_k / n as f64).sqrt();
    for i in 0..d {
        for j in 0..d {
            let emp = if i == j {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                moment_check(&batch, &e, 2).unwrap().empirical
            } else {
                let mut plus = vec![0.0; d];
                plus[i] = 1.0;
                plus[j] = 1.0;
                let mut minus = vec![0.0; d];
                minus[i] = 1.0;
                minus[j] = -1.0;
                let a = moment_check(&batch, &plus, 2).unwrap().empirical;
                let b = moment_check(&batch, &minus, 2).unwrap().empirical;
                (a - b) / 4.0
            };
            let err = (emp - batch.gram[i * d + j]).abs();
            assert!(
                err <= bound,
                "covariance entry ({i},{j}) off by {err:.2e}, bound {bound:.2e}"
            );
        }
    }
}

// Wired-flavor fields reproduce the wired resistance distance.
#[test]
fn wired_field_matches_wired_resistance() {
    let net = geo2();
    let xs = [Vertex::Int(1), Vertex::Int(2)];
    let kernels: Vec<_> = xs
        .iter()
        .map(|x| fin_kernel(&net, x, 20, 1e-7).unwrap())
        .collect();
    let batch = sample_field(&net, &kernels, Flavor::Wired, 50_000, 5).unwrap();
    let m2 = moment_check(&batch, &[1.0, -1.0], 2).unwrap();
    let rw = wired_resistance(&net, &xs[0], &xs[1], 20, 1e-7).unwrap();
    let dev = (m2.empirical - rw.value).abs();
    assert!(
        dev <= 3.0 * m2.std_error,
        "E[(xi_1 - xi_2)^2] = {} vs R^W = {} ({} sigma)",
        m2.empirical,
        rw.value,
        dev / m2.std_error
    );
}
