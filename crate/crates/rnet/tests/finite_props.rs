//! Randomized invariants on finite networks: the exact identities that
//! hold with no limit involved, checked over generated connected graphs
//! with log-uniform conductances.

use std::collections::BTreeMap;

use proptest::prelude::*;

use rnet::network::{energy_total, laplacian_apply, Potential};
use rnet::resist::{effective_resistance, reduce_two_terminal};
use rnet::solve::solve_grounded;
use rnet::stochastic::hitting_probability;
use rnet::{Network, Vertex};

#[derive(Clone, Debug)]
struct NetCase {
    net: std::sync::Arc<Network>,
    verts: Vec<Vertex>,
}

// Spanning tree over n vertices (parent of v drawn from 0..v) plus extra
// edges; conductances span two decades so the identities are exercised
// away from the well-conditioned unit-weight case.
fn net_strategy() -> impl Strategy<Value = NetCase> {
    (5usize..=20)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec((any::<u32>(), -1.0f64..1.0), n - 1),
                prop::collection::vec((any::<u32>(), any::<u32>(), -1.0f64..1.0), 0..n),
            )
        })
        .prop_map(|(n, tree, extras)| {
            let mut edges = Vec::new();
            let mut seen = std::collections::BTreeSet::new();
            for (v, (pick, logc)) in tree.iter().enumerate() {
                let v = v + 1;
                let u = (*pick as usize) % v;
                seen.insert((u, v));
                edges.push((
                    Vertex::Int(u as i64),
                    Vertex::Int(v as i64),
                    10f64.powf(*logc),
                ));
            }
            for (a, b, logc) in extras {
                let a = (a as usize) % n;
                let b = (b as usize) % n;
                if a == b {
                    continue;
                }
                let key = (a.min(b), a.max(b));
                if !seen.insert(key) {
                    continue;
                }
                edges.push((
                    Vertex::Int(key.0 as i64),
                    Vertex::Int(key.1 as i64),
                    10f64.powf(logc),
                ));
            }
            let net = Network::finite(&edges, Vertex::Int(0)).unwrap();
            let verts = net.vertices().unwrap();
            NetCase {
                net: std::sync::Arc::new(net),
                verts,
            }
        })
}

fn potential_strategy(case: &NetCase) -> impl Strategy<Value = Potential> {
    let verts = case.verts.clone();
    prop::collection::vec(-1.0f64..1.0, verts.len()).prop_map(move |vals| {
        Potential::raw(verts.iter().cloned().zip(vals).collect())
    })
}

fn case_with_potentials() -> impl Strategy<Value = (NetCase, Potential, Potential)> {
    net_strategy().prop_flat_map(|case| {
        let u = potential_strategy(&case);
        let v = potential_strategy(&case);
        (Just(case), u, v)
    })
}

// Unit dipole at z grounded at the origin; the finite-network energy
// kernel up to the anchoring convention.
fn dipole(net: &Network, z: &Vertex) -> Potential {
    let mut charge = BTreeMap::new();
    if *z != *net.origin() {
        charge.insert(z.clone(), 1.0);
    }
    solve_grounded(net, &charge, net.origin()).unwrap()
}

proptest! {
    // E(u, v) = sum_x u(x) (L v)(x) on finite networks.
    #[test]
    fn gauss_green_pairing((case, u, v) in case_with_potentials()) {
        let e = energy_total(&case.net, &u, &v).unwrap();
        let mut pairing = 0.0;
        for x in &case.verts {
            pairing += u.get(x).unwrap() * laplacian_apply(&case.net, &v, x).unwrap();
        }
        prop_assert!((e - pairing).abs() <= 1e-10, "residual {}", (e - pairing).abs());
    }

    // <1_x, u>_E = (L u)(x): pairing an indicator picks out the Laplacian.
    #[test]
    fn dirac_pairing((case, u, _v) in case_with_potentials()) {
        let n = case.verts.len();
        for x in [&case.verts[0], &case.verts[n / 2], &case.verts[n - 1]] {
            let delta = Potential::indicator(x, &case.verts);
            let e = energy_total(&case.net, &delta, &u).unwrap();
            let lap = laplacian_apply(&case.net, &u, x).unwrap();
            prop_assert!((e - lap).abs() <= 1e-10, "residual {}", (e - lap).abs());
        }
    }

    // E(u, u) >= 0 always; zero energy forces u constant on a connected
    // network.
    #[test]
    fn energy_positive_semidefinite((case, u, _v) in case_with_potentials()) {
        let e = energy_total(&case.net, &u, &u).unwrap();
        prop_assert!(e >= -1e-12, "negative energy {e}");

        let c = Potential::raw(case.verts.iter().map(|v| (v.clone(), 0.25)).collect());
        let ec = energy_total(&case.net, &c, &c).unwrap();
        prop_assert!(ec == 0.0, "constant has energy {ec}");
        if e <= 1e-14 {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for x in &case.verts {
                let val = u.get(x).unwrap();
                lo = lo.min(val);
                hi = hi.max(val);
            }
            prop_assert!(hi - lo <= 1e-6, "zero energy but spread {}", hi - lo);
        }
    }

    // The indicator expands over dipoles: 1_x = c(x) v_x - sum_y c_xy v_y
    // in the energy form, tested against dipole pairings.
    #[test]
    fn dirac_expansion_over_dipoles(case in net_strategy(), zi in any::<u32>(), xi in any::<u32>()) {
        let net = &case.net;
        let x = case.verts[(xi as usize) % case.verts.len()].clone();
        let z = case.verts[(zi as usize) % case.verts.len()].clone();
        let vz = dipole(net, &z);

        let delta = Potential::indicator(&x, &case.verts);
        let lhs = energy_total(net, &delta, &vz).unwrap();

        let vx = dipole(net, &x);
        let mut cx = 0.0;
        let mut combo: BTreeMap<Vertex, f64> =
            case.verts.iter().map(|v| (v.clone(), 0.0)).collect();
        for (y, c) in net.neighbors(&x).unwrap() {
            cx += c;
            let vy = dipole(net, &y);
            for (t, val) in vy.iter() {
                *combo.get_mut(t).unwrap() -= c * val;
            }
        }
        for (t, val) in vx.iter() {
            *combo.get_mut(t).unwrap() += cx * val;
        }
        let rhs = energy_total(net, &Potential::raw(combo), &vz).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9, "residual {}", (lhs - rhs).abs());
    }

    // Effective resistance is a metric, and its three formulations agree.
    #[test]
    fn resistance_metric(case in net_strategy(), picks in any::<[u32; 3]>()) {
        let n = case.verts.len();
        let x = case.verts[(picks[0] as usize) % n].clone();
        let y = case.verts[(picks[1] as usize) % n].clone();
        let z = case.verts[(picks[2] as usize) % n].clone();
        prop_assume!(x != y && y != z && x != z);

        let rxy = effective_resistance(&case.net, &x, &y).unwrap();
        let ryx = effective_resistance(&case.net, &y, &x).unwrap();
        prop_assert!((rxy.value - ryx.value).abs() <= 1e-12 * rxy.value.max(1.0));
        for other in [rxy.potential_drop, rxy.energy, rxy.reciprocal_unit_drop] {
            prop_assert!((rxy.value - other).abs() <= 1e-9, "formulations differ");
        }

        let rxz = effective_resistance(&case.net, &x, &z).unwrap().value;
        let ryz = effective_resistance(&case.net, &y, &z).unwrap().value;
        prop_assert!(rxz <= rxy.value + ryz + 1e-9, "triangle violated");
    }

    // sup formulation: |u(x) - u(y)|^2 <= R(x, y) for unit-energy u.
    #[test]
    fn resistance_dominates_unit_energy_spread((case, u, _v) in case_with_potentials(), picks in any::<[u32; 2]>()) {
        let n = case.verts.len();
        let x = case.verts[(picks[0] as usize) % n].clone();
        let y = case.verts[(picks[1] as usize) % n].clone();
        prop_assume!(x != y);
        let e = energy_total(&case.net, &u, &u).unwrap();
        prop_assume!(e > 1e-12);
        let scale = 1.0 / e.sqrt();
        let spread = scale * (u.get(&x).unwrap() - u.get(&y).unwrap());
        let r = effective_resistance(&case.net, &x, &y).unwrap().value;
        prop_assert!(spread * spread <= r + 1e-9, "spread^2 {} > R {}", spread * spread, r);
    }

    // Parallel/series/star-triangle rewrites preserve the two-terminal
    // resistance; the report carries the solver cross-check.
    #[test]
    fn reduction_preserves_resistance(case in net_strategy(), picks in any::<[u32; 2]>()) {
        let n = case.verts.len();
        let x = case.verts[(picks[0] as usize) % n].clone();
        let y = case.verts[(picks[1] as usize) % n].clone();
        prop_assume!(x != y);
        let rep = reduce_two_terminal(&case.net, &x, &y).unwrap();
        prop_assert!(
            rep.discrepancy <= 1e-12 * rep.solver_resistance.max(1.0),
            "reduction drifted by {} over {} steps (complete: {})",
            rep.discrepancy,
            rep.steps.len(),
            rep.complete,
        );
    }

    // v_x(y) = R(x, o) P_y[hit x before o] for every y at once.
    #[test]
    fn dipoles_factor_through_hitting_probabilities(case in net_strategy(), xi in any::<u32>()) {
        let o = case.net.origin().clone();
        let others: Vec<&Vertex> = case.verts.iter().filter(|v| **v != o).collect();
        let x = others[(xi as usize) % others.len()].clone();
        let vx = dipole(&case.net, &x);
        let r = vx.get(&x).unwrap();
        for y in &case.verts {
            let p = hitting_probability(&case.net, &x, &o, y).unwrap();
            let res = (vx.get(y).unwrap() - r * p).abs();
            prop_assert!(res <= 1e-9, "residual {res} at {y}");
        }
    }

}
