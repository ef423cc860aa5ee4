//! The Gaussian field indexed by the energy form, sampled by seeded Monte
//! Carlo, plus random-walk hitting estimates.
//!
//! Finite-energy potentials embed isometrically into a Gaussian process:
//! vertices `x_1 .. x_d` carry a centered Gaussian vector with covariance
//! `K_ij = v_{x_i}(x_j)`, the kernel values themselves, because the
//! reproducing property turns energy inner products into point evaluations.
//! Sampling that vector makes the abstract embedding testable: polynomial
//! moments, kernel energies, and boundary-measure integrals all become
//! empirical averages with standard errors.
//!
//! Sampling is deterministic by construction: a ChaCha stream cipher keyed
//! by the user seed, with one substream per fixed-size block of samples.
//! The draw order inside a block and the block order in the batch never
//! depend on thread count, so a seed pins the batch bit for bit.
//!
//! The boundary measure of a harmonic function `u` at a vertex `x` is
//! checked through `E[u~ (1 + h~_x)] = u(x) - u(o)`: the harmonic remainder
//! `h_x` tilts the base Gaussian measure, and integrating `u~` against the
//! tilt recovers the point value. The density `1 + h~_x` is a Gaussian
//! variable, so it takes negative values with positive probability; the
//! frequency is reported, not hidden.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use serde::Serialize;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exhaust::Flavor;
use crate::linalg::jacobi_eigen;
use crate::network::{Field, Network, Potential, Vertex};
use crate::potential_theory::require_harmonic;
use crate::solve::{solve_dirichlet, KernelFamily};

/// Identifies the sampling scheme a batch was produced by.
pub const GENERATOR_ID: &str = "chacha12-polar-v1";

/// Samples per RNG substream; parallel reduction happens in block order.
const BLOCK: usize = 2048;

/// Stream id offset separating walk streams from field streams.
const WALK_STREAM_BASE: u64 = 1 << 32;

fn rng_for(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut r = ChaCha12Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Standard normals by the polar method, keeping the spare.
struct Normals {
    rng: ChaCha12Rng,
    spare: Option<f64>,
}

impl Normals {
    fn new(rng: ChaCha12Rng) -> Normals {
        Normals { rng, spare: None }
    }

    fn next(&mut self) -> f64 {
        if let Some(s) = self.spare.take() {
            return s;
        }
        loop {
            let u: f64 = 2.0 * self.rng.random::<f64>() - 1.0;
            let v: f64 = 2.0 * self.rng.random::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * m);
                return u * m;
            }
        }
    }
}

/// A seeded batch of samples of the Gaussian field on a vertex window.
pub struct GaussianFieldBatch {
    /// Kernel centers, in the order rows and columns of `gram` use.
    pub window: Vec<Vertex>,
    pub flavor: Flavor,
    /// Symmetrized covariance `K_ij = u_{x_i}(x_j)`, row major, `d x d`.
    pub gram: Vec<f64>,
    pub d: usize,
    pub n: usize,
    /// Samples, row major, `n x d`.
    pub samples: Vec<f64>,
    pub seed: u64,
    pub generator_id: &'static str,
    /// Smallest eigenvalue of the symmetrized covariance before clipping.
    pub min_eigenvalue: f64,
    /// Eigenvalues clipped to zero to restore positive semidefiniteness.
    pub clipped: usize,
    /// Largest `|K_ij - K_ji|` before symmetrization.
    pub max_asymmetry: f64,
}

impl GaussianFieldBatch {
    pub fn sample(&self, s: usize) -> &[f64] {
        &self.samples[s * self.d..(s + 1) * self.d]
    }
}

/// Draws `n` samples of the Gaussian field spanned by the given kernels.
///
/// `flavor` selects the free kernel `v` or the wired part `f` of each
/// family. The covariance is the matrix of kernel evaluations at the other
/// centers, symmetrized; eigenvalues negative by no more than `1e-9`
/// relative to the largest are clipped to zero, anything worse is an error.
/// The origin cannot be a center (its kernel vanishes identically).
pub fn sample_field(
    net: &Network,
    kernels: &[KernelFamily],
    flavor: Flavor,
    n: usize,
    seed: u64,
) -> Result<GaussianFieldBatch> {
    if kernels.is_empty() {
        return Err(Error::BadParam("no kernel centers".into()));
    }
    let origin = net.origin();
    let d = kernels.len();
    let mut window = Vec::with_capacity(d);
    let mut pots: Vec<&Potential> = Vec::with_capacity(d);
    for fam in kernels {
        if fam.x == *origin {
            return Err(Error::BadParam(
                "the origin cannot index the field: its kernel is identically zero".into(),
            ));
        }
        window.push(fam.x.clone());
        match flavor {
            Flavor::Free => pots.push(&fam.v),
            Flavor::Wired => pots.push(fam.f.as_ref().ok_or_else(|| {
                Error::BadParam("wired flavor needs kernels with the wired part".into())
            })?),
        }
    }

    let mut raw = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            raw[i * d + j] = pots[i].get(&window[j]).ok_or_else(|| Error::WindowTooSmall {
                vertex: window[j].to_string(),
                context: "every center must lie in every kernel window",
            })?;
        }
    }
    let mut max_asymmetry = 0.0f64;
    let mut gram = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            max_asymmetry = max_asymmetry.max((raw[i * d + j] - raw[j * d + i]).abs());
            gram[i * d + j] = 0.5 * (raw[i * d + j] + raw[j * d + i]);
        }
    }

    let (vals, vecs) = jacobi_eigen(&gram, d);
    let top = vals[0].max(0.0);
    let min_eigenvalue = *vals.last().unwrap();
    if min_eigenvalue < -1e-9 * top.max(1.0) {
        return Err(Error::GramNotPsd(min_eigenvalue));
    }
    let clipped = vals.iter().filter(|&&l| l < 0.0).count();
    // Factor A = U sqrt(max(lambda, 0)): samples are A z with z standard.
    let mut factor = vec![0.0; d * d];
    for j in 0..d {
        let s = vals[j].max(0.0).sqrt();
        for i in 0..d {
            factor[i * d + j] = vecs[i * d + j] * s;
        }
    }

    let blocks = n.div_ceil(BLOCK);
    let chunks: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut g = Normals::new(rng_for(seed, b as u64));
            let len = BLOCK.min(n - b * BLOCK);
            let mut out = vec![0.0; len * d];
            let mut z = vec![0.0; d];
            for s in 0..len {
                for zi in z.iter_mut() {
                    *zi = g.next();
                }
                for i in 0..d {
                    let mut acc = 0.0;
                    for j in 0..d {
                        acc += factor[i * d + j] * z[j];
                    }
                    out[s * d + i] = acc;
                }
            }
            out
        })
        .collect();
    let mut samples = Vec::with_capacity(n * d);
    for c in chunks {
        samples.extend_from_slice(&c);
    }

    Ok(GaussianFieldBatch {
        window,
        flavor,
        gram,
        d,
        n,
        samples,
        seed,
        generator_id: GENERATOR_ID,
        min_eigenvalue,
        clipped,
        max_asymmetry,
    })
}

/// An empirical moment against its Gaussian prediction.
#[derive(Clone, Debug, Serialize)]
pub struct MomentCheck {
    pub order: u32,
    /// Variance `c^T K c` of the linear functional.
    pub sigma2: f64,
    pub empirical: f64,
    /// `(p-1)!! sigma^p` for even `p`, zero for odd.
    pub predicted: f64,
    pub std_error: f64,
}

/// Checks the `order`-th moment of the linear combination `sum c_i xi_i`.
pub fn moment_check(batch: &GaussianFieldBatch, coeffs: &[f64], order: u32) -> Result<MomentCheck> {
    if coeffs.len() != batch.d {
        return Err(Error::BadParam(format!(
            "{} coefficients for a window of {}",
            coeffs.len(),
            batch.d
        )));
    }
    if order == 0 || order > 6 {
        return Err(Error::BadParam("moment order must be 1..=6".into()));
    }
    if batch.n == 0 {
        return Err(Error::MissingSamples);
    }
    let d = batch.d;
    let mut sigma2 = 0.0;
    for i in 0..d {
        for j in 0..d {
            sigma2 += coeffs[i] * batch.gram[i * d + j] * coeffs[j];
        }
    }
    let predicted = if order % 2 == 1 {
        0.0
    } else {
        let double_fact: f64 = (1..order as u64).step_by(2).map(|k| k as f64).product();
        double_fact * sigma2.powi(order as i32 / 2)
    };
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for s in 0..batch.n {
        let row = batch.sample(s);
        let y: f64 = row.iter().zip(coeffs).map(|(a, b)| a * b).sum();
        let p = y.powi(order as i32);
        sum += p;
        sumsq += p * p;
    }
    let nf = batch.n as f64;
    let empirical = sum / nf;
    let var = (sumsq / nf - empirical * empirical).max(0.0);
    Ok(MomentCheck {
        order,
        sigma2,
        empirical,
        predicted,
        std_error: (var / nf).sqrt(),
    })
}

// ---------------------------------------------------------------------------
// Random walks
// ---------------------------------------------------------------------------

/// Exact hitting probability `P[walk from start reaches target before
/// absorb]` on a finite network, by a Dirichlet solve.
pub fn hitting_probability(
    net: &Network,
    target: &Vertex,
    absorb: &Vertex,
    start: &Vertex,
) -> Result<f64> {
    if target == absorb {
        return Err(Error::SameVertex(target.to_string()));
    }
    if !net.contains(start) {
        return Err(Error::UnknownVertex(start.to_string()));
    }
    let mut fixed = BTreeMap::new();
    fixed.insert(target.clone(), 1.0);
    fixed.insert(absorb.clone(), 0.0);
    let u = solve_dirichlet(net, &fixed)?;
    Ok(u.get(start).expect("start is in the network"))
}

/// A Monte Carlo hitting estimate with its binomial confidence radius.
#[derive(Clone, Debug, Serialize)]
pub struct WalkEstimate {
    pub p_hat: f64,
    /// `1.96 sqrt(p(1-p)/n)`.
    pub ci95: f64,
    pub hits: u64,
    pub n: u64,
    pub seed: u64,
}

/// Estimates the hitting probability by simulating conductance-weighted
/// walks. Deterministic for a fixed seed, independent of thread count.
pub fn random_walk_mc(
    net: &Network,
    start: &Vertex,
    target: &Vertex,
    absorb: &Vertex,
    n: u64,
    seed: u64,
) -> Result<WalkEstimate> {
    if target == absorb {
        return Err(Error::SameVertex(target.to_string()));
    }
    if n == 0 {
        return Err(Error::MissingSamples);
    }
    for v in [start, target, absorb] {
        if !net.contains(v) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
    }
    // Cumulative transition tables for every vertex up front.
    let verts = net.vertices()?;
    let mut table: HashMap<Vertex, (Vec<Vertex>, Vec<f64>)> = HashMap::new();
    for v in &verts {
        let dist = net.transition_distribution(v)?;
        let mut targets = Vec::with_capacity(dist.len());
        let mut cum = Vec::with_capacity(dist.len());
        let mut acc = 0.0;
        for (y, p) in dist {
            acc += p;
            targets.push(y);
            cum.push(acc);
        }
        table.insert(v.clone(), (targets, cum));
    }

    let blocks = n.div_ceil(BLOCK as u64);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_for(seed, WALK_STREAM_BASE + b);
            let len = (BLOCK as u64).min(n - b * BLOCK as u64);
            let mut h = 0u64;
            for _ in 0..len {
                let mut at = start;
                loop {
                    if at == target {
                        h += 1;
                        break;
                    }
                    if at == absorb {
                        break;
                    }
                    let (targets, cum) = &table[at];
                    let r: f64 = rng.random();
                    let idx = cum.partition_point(|&c| c <= r).min(targets.len() - 1);
                    at = &targets[idx];
                }
            }
            h
        })
        .sum();

    let p_hat = hits as f64 / n as f64;
    Ok(WalkEstimate {
        p_hat,
        ci95: 1.96 * (p_hat * (1.0 - p_hat) / n as f64).sqrt(),
        hits,
        n,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Boundary measure
// ---------------------------------------------------------------------------

/// Monte Carlo check of the boundary-measure identity
/// `E[u~ (1 + h~_x)] = u(x) - u(o)` for a harmonic `u`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryMeasureCheck {
    pub estimate: f64,
    pub exact: f64,
    pub std_error: f64,
    /// Empirical total mass `E[1 + h~_x]`, exactly one in the limit.
    pub gamma_total: f64,
    pub gamma_total_std_error: f64,
    /// Fraction of samples where the density `1 + h~_x` is negative. The
    /// measure is a signed one; this is information, not an error.
    pub negativity_freq: f64,
    /// Energy of `u`'s projection captured by the window, `a^T K a`.
    pub captured_energy_u: f64,
    /// Energy of `h_x`'s projection captured by the window, `b^T K b`.
    pub captured_energy_h: f64,
    pub note: String,
}

/// Least-squares coefficients of a potential against the kernel window:
/// solves `K a = rhs` through the eigendecomposition, dropping tiny modes.
fn project(gram: &[f64], d: usize, rhs: &[f64]) -> Vec<f64> {
    let (vals, vecs) = jacobi_eigen(gram, d);
    let cut = 1e-12 * vals[0].max(1e-30);
    let mut a = vec![0.0; d];
    for j in 0..d {
        if vals[j] <= cut {
            continue;
        }
        let mut dot = 0.0;
        for i in 0..d {
            dot += vecs[i * d + j] * rhs[i];
        }
        let scale = dot / vals[j];
        for i in 0..d {
            a[i] += vecs[i * d + j] * scale;
        }
    }
    a
}

/// Integrates a harmonic function against the boundary measure of `x_family`
/// by Monte Carlo over a free-flavor batch.
///
/// `u` must be harmonic on the ball of radius `check_radius`. Both `u` and
/// the harmonic remainder of `x_family` are projected onto the sampled
/// window by the reproducing property (`<p, v_xi> = p(x_i) - p(o)`),
/// so the estimate carries a bias when the window captures only part of
/// their energy; the captured energies are reported.
pub fn mc_boundary_integral(
    net: &Network,
    batch: &GaussianFieldBatch,
    u: &dyn Field,
    x_family: &KernelFamily,
    check_radius: u32,
) -> Result<BoundaryMeasureCheck> {
    if batch.flavor != Flavor::Free {
        return Err(Error::BadParam(
            "boundary measures integrate over the free-flavor field".into(),
        ));
    }
    if batch.n == 0 {
        return Err(Error::MissingSamples);
    }
    let h = x_family.h.as_ref().ok_or_else(|| {
        Error::BadParam("the kernel family needs its harmonic remainder".into())
    })?;

    let ball = net.ball(check_radius)?;
    let up = Potential::from_field(u, &ball)?;
    require_harmonic(net, &up, check_radius.saturating_sub(1))?;

    let origin = net.origin();
    let uo = u.value(origin).ok_or_else(|| Error::WindowTooSmall {
        vertex: origin.to_string(),
        context: "the harmonic function must cover the origin",
    })?;
    let d = batch.d;
    let mut rhs_u = vec![0.0; d];
    let mut rhs_h = vec![0.0; d];
    for (i, xi) in batch.window.iter().enumerate() {
        rhs_u[i] = u.value(xi).ok_or_else(|| Error::WindowTooSmall {
            vertex: xi.to_string(),
            context: "the harmonic function must cover the window",
        })? - uo;
        rhs_h[i] = h.get(xi).ok_or_else(|| Error::WindowTooSmall {
            vertex: xi.to_string(),
            context: "the harmonic remainder must cover the window",
        })?;
    }
    let a = project(&batch.gram, d, &rhs_u);
    let b = project(&batch.gram, d, &rhs_h);

    let quad = |l: &[f64], r: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += l[i] * batch.gram[i * d + j] * r[j];
            }
        }
        s
    };
    let captured_energy_u = quad(&a, &a);
    let captured_energy_h = quad(&b, &b);

    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let mut mass = 0.0;
    let mut masssq = 0.0;
    let mut neg = 0usize;
    for s in 0..batch.n {
        let row = batch.sample(s);
        let ut: f64 = row.iter().zip(&a).map(|(x, c)| x * c).sum();
        let ht: f64 = row.iter().zip(&b).map(|(x, c)| x * c).sum();
        let density = 1.0 + ht;
        if density < 0.0 {
            neg += 1;
        }
        let val = ut * density;
        sum += val;
        sumsq += val * val;
        mass += density;
        masssq += density * density;
    }
    let nf = batch.n as f64;
    let estimate = sum / nf;
    let var = (sumsq / nf - estimate * estimate).max(0.0);
    let gamma_total = mass / nf;
    let mass_var = (masssq / nf - gamma_total * gamma_total).max(0.0);

    let exact = u.value(&x_family.x).ok_or_else(|| Error::WindowTooSmall {
        vertex: x_family.x.to_string(),
        context: "the harmonic function must cover the target vertex",
    })? - uo;

    Ok(BoundaryMeasureCheck {
        estimate,
        exact,
        std_error: (var / nf).sqrt(),
        gamma_total,
        gamma_total_std_error: (mass_var / nf).sqrt(),
        negativity_freq: neg as f64 / nf,
        captured_energy_u,
        captured_energy_h,
        note: format!(
            "projection onto a {d}-point window; bias shrinks with the energy left outside it"
        ),
    })
}
