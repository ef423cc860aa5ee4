//! Grounded Dirichlet solves, the energy kernel and its harmonic split,
//! monopoles, and the transient/recurrent dichotomy.
//!
//! On a finite network, `solve_grounded` inverts the Laplacian against a
//! prescribed charge with one vertex held at zero. Everything else here is a
//! limit of such solves along an exhaustion:
//!
//! * the energy kernel `v_x` solves `L v_x = delta_x - delta_o` on free
//!   truncations, grounded at the origin `o`; it reproduces potentials
//!   against the energy form, `<v_x, u> = u(x) - u(o)`;
//! * its wired counterpart `f_x` solves the same dipole on wired
//!   truncations with the infinity vertex left floating; the difference
//!   `h_x = v_x - f_x` is harmonic, and the splitting `v_x = f_x + h_x`
//!   realizes the decomposition of the kernel into its finitely supported
//!   approximable part and its harmonic part;
//! * a monopole `w_x` solves `L w_x = delta_x` on wired truncations grounded
//!   at infinity; its level energies are the wired resistances to infinity,
//!   which stay bounded exactly when the network is transient.
//!
//! Kernel iterations run through every level up to `k_max` so the final
//! window is always the full ball; convergence is recorded, not used to stop
//! early. Kernel traces record the level energies; because consecutive
//! truncated solutions have orthogonal increments in the energy form, each
//! trace delta equals the squared energy-norm distance between the levels,
//! so the scalar Cauchy rule is also a Cauchy rule in the energy space.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exhaust::{truncate, Flavor, LimitReport, LimitTracker};
use crate::linalg::{cg_jacobi, cholesky_factor, cholesky_solve, SparseSym};
use crate::network::{Network, Potential, Vertex};

/// Largest unknown count handled by the dense direct factorization; larger
/// systems go through preconditioned conjugate gradients with a warm start.
const DENSE_LIMIT: usize = 1500;
const CG_REL_TOL: f64 = 1e-12;
const CG_MAX_ITER: usize = 50_000;
/// A monopole energy exceeding this multiple of its first level is treated
/// as divergent.
const DIVERGENCE_FACTOR: f64 = 1e6;

/// Solves `L u = charge` on a finite network with `u(ground) = 0`.
///
/// Vertices absent from `charge` carry zero charge; the ground vertex
/// absorbs whatever net charge the rest injects. Listing the ground itself
/// in `charge` asserts total balance and fails with
/// [`Error::ChargeImbalance`] when the entries do not sum to zero.
pub fn solve_grounded(
    net: &Network,
    charge: &BTreeMap<Vertex, f64>,
    ground: &Vertex,
) -> Result<Potential> {
    solve_grounded_with(net, charge, ground, None, false)
}

pub(crate) fn solve_grounded_with(
    net: &Network,
    charge: &BTreeMap<Vertex, f64>,
    ground: &Vertex,
    warm: Option<&Potential>,
    force_cg: bool,
) -> Result<Potential> {
    let verts = net.vertices()?;
    if !net.contains(ground) {
        return Err(Error::UnknownVertex(ground.to_string()));
    }
    for (x, q) in charge {
        if !net.contains(x) {
            return Err(Error::UnknownVertex(x.to_string()));
        }
        if !q.is_finite() {
            return Err(Error::BadParam(format!("charge {q} at `{x}` is not finite")));
        }
    }
    if charge.contains_key(ground) {
        let total: f64 = charge.values().sum();
        if total.abs() > 1e-12 {
            return Err(Error::ChargeImbalance(total));
        }
    }

    let unknowns: Vec<&Vertex> = verts.iter().filter(|v| *v != ground).collect();
    let n = unknowns.len();
    let index: HashMap<&Vertex, usize> =
        unknowns.iter().enumerate().map(|(i, v)| (*v, i)).collect();

    let mut b = vec![0.0; n];
    for (i, x) in unknowns.iter().enumerate() {
        if let Some(q) = charge.get(x) {
            b[i] = *q;
        }
    }

    let u = if n <= DENSE_LIMIT && !force_cg {
        let mut a = vec![0.0; n * n];
        for (i, x) in unknowns.iter().enumerate() {
            let mut diag = 0.0;
            for (y, c) in net.neighbors(x)? {
                diag += c;
                if let Some(&j) = index.get(&y) {
                    a[i * n + j] = -c;
                }
            }
            a[i * n + i] = diag;
        }
        cholesky_factor(&mut a, n)?;
        cholesky_solve(&a, n, &mut b);
        b
    } else {
        let mut diag = vec![0.0; n];
        let mut off = vec![Vec::new(); n];
        for (i, x) in unknowns.iter().enumerate() {
            for (y, c) in net.neighbors(x)? {
                diag[i] += c;
                if let Some(&j) = index.get(&y) {
                    off[i].push((j, -c));
                }
            }
        }
        let a = SparseSym { n, diag, off };
        let x0 = unknowns
            .iter()
            .map(|v| warm.and_then(|w| w.get(v)).unwrap_or(0.0))
            .collect();
        cg_jacobi(&a, &b, x0, CG_REL_TOL, CG_MAX_ITER)?.0
    };

    let mut values: BTreeMap<Vertex, f64> = unknowns
        .into_iter()
        .cloned()
        .zip(u.into_iter())
        .collect();
    values.insert(ground.clone(), 0.0);
    Potential::anchored(ground.clone(), values)
}

/// Solves the Dirichlet problem on a finite network: `u` takes the
/// prescribed values on the keys of `fixed` and is harmonic everywhere else.
pub fn solve_dirichlet(net: &Network, fixed: &BTreeMap<Vertex, f64>) -> Result<Potential> {
    if fixed.is_empty() {
        return Err(Error::BadParam("no fixed vertices".into()));
    }
    let verts = net.vertices()?;
    for (x, v) in fixed {
        if !net.contains(x) {
            return Err(Error::UnknownVertex(x.to_string()));
        }
        if !v.is_finite() {
            return Err(Error::BadParam(format!("value {v} at `{x}` is not finite")));
        }
    }

    let unknowns: Vec<&Vertex> = verts.iter().filter(|v| !fixed.contains_key(v)).collect();
    let n = unknowns.len();
    let index: HashMap<&Vertex, usize> =
        unknowns.iter().enumerate().map(|(i, v)| (*v, i)).collect();

    let mut diag = vec![0.0; n];
    let mut off = vec![Vec::new(); n];
    let mut b = vec![0.0; n];
    for (i, x) in unknowns.iter().enumerate() {
        for (y, c) in net.neighbors(x)? {
            diag[i] += c;
            if let Some(&j) = index.get(&y) {
                off[i].push((j, -c));
            } else {
                b[i] += c * fixed[&y];
            }
        }
    }

    let u = if n == 0 {
        Vec::new()
    } else if n <= DENSE_LIMIT {
        let mut a = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            a[i * n + i] = *d;
            for &(j, c) in &off[i] {
                a[i * n + j] = c;
            }
        }
        cholesky_factor(&mut a, n)?;
        cholesky_solve(&a, n, &mut b);
        b
    } else {
        let a = SparseSym { n, diag, off };
        cg_jacobi(&a, &b, vec![0.0; n], CG_REL_TOL, CG_MAX_ITER)?.0
    };

    let mut values: BTreeMap<Vertex, f64> =
        unknowns.into_iter().cloned().zip(u.into_iter()).collect();
    for (x, v) in fixed {
        values.insert(x.clone(), *v);
    }
    Ok(Potential::raw(values))
}

// ---------------------------------------------------------------------------
// Energy kernels
// ---------------------------------------------------------------------------

/// The energy kernel at a vertex, with its wired part and harmonic remainder
/// when requested.
///
/// All potentials are anchored at the origin and live on the ball of radius
/// `k_max`. The reports trace the level energies `E_k(u_k) = u_k(x)`, the
/// level resistances between `x` and the origin.
pub struct KernelFamily {
    pub x: Vertex,
    /// Free-truncation limit `v_x`, the energy kernel itself.
    pub v: Potential,
    /// Wired-truncation limit `f_x`; present only for the full split.
    pub f: Option<Potential>,
    /// Harmonic remainder `h_x = v_x - f_x`.
    pub h: Option<Potential>,
    pub v_report: LimitReport,
    pub f_report: Option<LimitReport>,
}

impl KernelFamily {
    /// Energy of the free kernel, `E(v_x) = v_x(x)`.
    pub fn v_energy(&self) -> f64 {
        self.v_report.value
    }

    /// Energy of the wired part, `E(f_x) = f_x(x)`.
    pub fn f_energy(&self) -> Option<f64> {
        self.f_report.as_ref().map(|r| r.value)
    }
}

fn kernel_part(
    net: &Network,
    x: &Vertex,
    k_max: u32,
    tol: f64,
    flavor: Flavor,
) -> Result<(Potential, LimitReport)> {
    let dists = net.distances_up_to(k_max)?;
    let d = *dists.get(x).ok_or_else(|| Error::WindowTooSmall {
        vertex: x.to_string(),
        context: "kernel center must lie within the exhaustion radius",
    })?;
    let origin = net.origin().clone();
    let k0 = d.max(1);

    let mut charge = BTreeMap::new();
    if *x != origin {
        charge.insert(x.clone(), 1.0);
    }

    let mut tracker = LimitTracker::new(tol);
    let mut prev: Option<Potential> = None;
    for k in k0..=k_max {
        let t = truncate(net, k, flavor)?;
        let u = solve_grounded_with(t.network(), &charge, &origin, prev.as_ref(), false)?;
        tracker.push(k, u.get(x).expect("kernel center is inside the ball"));
        prev = Some(u);
    }

    let last = prev.expect("at least one level was solved");
    let values: BTreeMap<Vertex, f64> = last
        .iter()
        .filter(|(v, _)| **v != Vertex::Infinity)
        .map(|(v, x)| (v.clone(), x))
        .collect();
    Ok((Potential::anchored(origin, values)?, tracker.into_report()))
}

/// Energy kernel `v_x` as a limit over free truncations.
pub fn energy_kernel(net: &Network, x: &Vertex, k_max: u32, tol: f64) -> Result<KernelFamily> {
    let (v, v_report) = kernel_part(net, x, k_max, tol, Flavor::Free)?;
    Ok(KernelFamily {
        x: x.clone(),
        v,
        f: None,
        h: None,
        v_report,
        f_report: None,
    })
}

/// Full kernel split `v_x = f_x + h_x` with the wired part `f_x` from wired
/// truncations and the harmonic remainder `h_x` by pointwise difference.
pub fn fin_kernel(net: &Network, x: &Vertex, k_max: u32, tol: f64) -> Result<KernelFamily> {
    let (v, v_report) = kernel_part(net, x, k_max, tol, Flavor::Free)?;
    let (f, f_report) = kernel_part(net, x, k_max, tol, Flavor::Wired)?;
    let h = v.sub(&f)?;
    Ok(KernelFamily {
        x: x.clone(),
        v,
        f: Some(f),
        h: Some(h),
        v_report,
        f_report: Some(f_report),
    })
}

// ---------------------------------------------------------------------------
// Monopoles and transience
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Transience {
    Transient,
    Recurrent,
    Inconclusive,
}

/// A monopole computation `L w_x = delta_x`, grounded at infinity, together
/// with the transience classification its energies decide.
pub struct MonopoleReport {
    pub x: Vertex,
    /// The monopole in the vanish-at-infinity gauge; `None` unless the
    /// network was classified transient. Its window includes the infinity
    /// vertex at value zero.
    pub w: Option<Potential>,
    /// Finite monopole energy `E(w_x) = w_x(x)`, when transient.
    pub energy: Option<f64>,
    pub transience: Transience,
    /// Level energies `E(w_k) = R^W_k(x, infinity)`, monotone increasing.
    pub report: LimitReport,
    pub note: String,
}

/// Computes the monopole at `x` over wired truncations and classifies the
/// network:
///
/// * level energies Cauchy under the tolerance: transient;
/// * energies past `1e6` times the first level: recurrent;
/// * six or more levels whose recent deltas stopped shrinking (ratios at
///   least `0.95`) while still well above tolerance: recurrent;
/// * a truncation that seals (the network is finite): recurrent;
/// * otherwise inconclusive, and a deeper exhaustion is needed.
pub fn monopole(net: &Network, x: &Vertex, k_max: u32, tol: f64) -> Result<MonopoleReport> {
    let dists = net.distances_up_to(k_max)?;
    let d = *dists.get(x).ok_or_else(|| Error::WindowTooSmall {
        vertex: x.to_string(),
        context: "monopole site must lie within the exhaustion radius",
    })?;
    let k0 = d.max(1);

    let mut charge = BTreeMap::new();
    charge.insert(x.clone(), 1.0);

    let mut tracker = LimitTracker::new(tol);
    let mut prev: Option<Potential> = None;
    let mut sealed_at: Option<u32> = None;
    for k in k0..=k_max {
        let t = truncate(net, k, Flavor::Wired)?;
        if !t.has_infinity() {
            sealed_at = Some(k);
            break;
        }
        let u = solve_grounded_with(t.network(), &charge, &Vertex::Infinity, prev.as_ref(), false)?;
        let value = u.get(x).expect("monopole site is inside the ball");
        tracker.push(k, value);
        prev = Some(u);
    }

    let converged = tracker.converged();
    let deltas = tracker.deltas();
    let report = tracker.into_report();

    if let Some(k) = sealed_at {
        return Ok(MonopoleReport {
            x: x.clone(),
            w: None,
            energy: None,
            transience: Transience::Recurrent,
            report,
            note: format!(
                "truncation sealed at level {k}: the network is finite, hence recurrent"
            ),
        });
    }
    if converged {
        let energy = report.value;
        return Ok(MonopoleReport {
            x: x.clone(),
            w: prev,
            energy: Some(energy),
            transience: Transience::Transient,
            report,
            note: format!("monopole energies converged to {energy:.6e}"),
        });
    }

    let first = report.trace.first().map(|l| l.value).unwrap_or(f64::NAN);
    let last = report.value;
    if last > DIVERGENCE_FACTOR * first.abs() {
        return Ok(MonopoleReport {
            x: x.clone(),
            w: None,
            energy: None,
            transience: Transience::Recurrent,
            report,
            note: format!("monopole energy grew from {first:.3e} to {last:.3e}"),
        });
    }
    let trending = report.levels >= 6 && deltas.len() >= 4 && {
        let tail = &deltas[deltas.len() - 4..];
        tail.windows(2).all(|p| p[1] >= 0.95 * p[0]) && *deltas.last().unwrap() > 100.0 * tol
    };
    if trending {
        return Ok(MonopoleReport {
            x: x.clone(),
            w: None,
            energy: None,
            transience: Transience::Recurrent,
            report,
            note: "monopole energy increments stopped shrinking far above tolerance".into(),
        });
    }
    Ok(MonopoleReport {
        x: x.clone(),
        w: None,
        energy: None,
        transience: Transience::Inconclusive,
        report,
        note: "energies neither settled nor clearly diverged; increase the exhaustion depth".into(),
    })
}
