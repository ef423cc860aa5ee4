//! Paths to infinity and the boundary points they witness.
//!
//! On a transient network with nonconstant finite-energy harmonic
//! functions, such a function carries a limit along every path that
//! escapes the balls, and two escaping paths end at the same boundary
//! point exactly when no such function separates their tails. This module
//! follows concrete paths: it checks that a claimed path really escapes,
//! compares path tails under a family of harmonic test functions, groups
//! paths into tail-equivalence classes, and evaluates limiting values
//! (boundary-point functionals) along a path.
//!
//! The separating tests are finite windows of harmonic potentials, so
//! every verdict here is evidence at a depth, not a theorem: a pair of
//! paths that no test separates by the inspected depth may still split
//! deeper in, and the class count is a lower bound on the boundary points
//! the path family can see.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exhaust::{LimitReport, LimitTracker};
use crate::models::{standard_rays, ModelSpec};
use crate::network::{Field, Network, Potential, Vertex};
use crate::potential_theory::harmonic_evidence;
use crate::solve::fin_kernel;

/// A one-ended infinite path `x_0, x_1, x_2, ...` given by a generator.
///
/// Nothing is checked at construction; [`validate_path`] decides whether
/// the steps are edges and whether the path escapes.
#[derive(Clone)]
pub struct InfinitePath {
    pub label: String,
    gen: Arc<dyn Fn(usize) -> Vertex + Send + Sync>,
}

impl InfinitePath {
    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(usize) -> Vertex + Send + Sync + 'static,
    ) -> InfinitePath {
        InfinitePath {
            label: label.into(),
            gen: Arc::new(f),
        }
    }

    /// The vertex reached after `i` steps.
    pub fn at(&self, i: usize) -> Vertex {
        (self.gen)(i)
    }

    /// The standard escape routes of a generated model, one per end the
    /// construction makes explicit. Empty for models whose rays are not
    /// singled out.
    pub fn standard(spec: &ModelSpec) -> Vec<InfinitePath> {
        standard_rays(spec)
            .into_iter()
            .map(|(label, gen)| InfinitePath { label, gen })
            .collect()
    }
}

impl fmt::Debug for InfinitePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InfinitePath")
            .field("label", &self.label)
            .finish()
    }
}

/// Checks the first `depth` steps of a path.
///
/// Every consecutive pair must be an edge of the network; a step that is
/// not fails with [`Error::NotAPath`]. For a path made of edges the result
/// reports escape: `true` when the vertex reached after `depth` steps sits
/// at distance at least `depth / 2` from the origin, `false` for a path
/// that wanders without leaving. The distance check only ever explores the
/// ball of radius `depth / 2 - 1`, so validation stays cheap even on
/// networks whose balls grow exponentially.
pub fn validate_path(net: &Network, path: &InfinitePath, depth: usize) -> Result<bool> {
    if depth < 2 {
        return Err(Error::BadParam("path validation needs depth >= 2".into()));
    }
    for i in 0..depth {
        let from = path.at(i);
        let to = path.at(i + 1);
        let is_edge = match net.edge(&from, &to) {
            Ok(Some(_)) => true,
            Ok(None) => false,
            Err(Error::UnknownVertex(_)) => false,
            Err(e) => return Err(e),
        };
        if !is_edge {
            return Err(Error::NotAPath {
                index: i,
                from: from.to_string(),
                to: to.to_string(),
            });
        }
    }
    let reach = (depth / 2) as u32;
    let near = net.ball(reach.saturating_sub(1))?;
    Ok(!near.contains(&path.at(depth)))
}

fn value_at(t: &Potential, path: &InfinitePath, i: usize, context: &'static str) -> Result<f64> {
    let x = path.at(i);
    t.get(&x).ok_or_else(|| Error::WindowTooSmall {
        vertex: x.to_string(),
        context,
    })
}

/// Compares the tails of two paths under labelled test potentials.
///
/// For each test the differences `|t(p_i) - t(q_i)|` at the last three
/// inspected steps `i = depth-2, depth-1, depth` are examined. A test with
/// all three below `tol` matches the tails; all three at or above `tol`
/// separates them. One separating witness settles the pair as inequivalent
/// regardless of the other tests. If no test separates and every test
/// matches, the pair is equivalent at this depth. A test whose differences
/// straddle `tol` leaves the pair undecided and the comparison fails with
/// [`Error::DepthExhausted`] so the caller can look deeper instead of
/// trusting a coin-flip verdict.
pub fn path_equivalent(
    tests: &[(String, Potential)],
    p: &InfinitePath,
    q: &InfinitePath,
    depth: usize,
    tol: f64,
) -> Result<bool> {
    if depth < 3 {
        return Err(Error::BadParam("tail comparison needs depth >= 3".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::BadParam("tail comparison needs tol > 0".into()));
    }
    let mut undecided: Option<&str> = None;
    for (label, t) in tests {
        let mut below = 0usize;
        for i in depth - 2..=depth {
            let a = value_at(t, p, i, "tail comparison")?;
            let b = value_at(t, q, i, "tail comparison")?;
            if (a - b).abs() < tol {
                below += 1;
            }
        }
        match below {
            3 => {}
            0 => return Ok(false),
            _ => undecided = Some(label),
        }
    }
    match undecided {
        Some(label) => Err(Error::DepthExhausted(format!(
            "test `{label}` neither matches nor separates `{}` and `{}` at depth {depth}",
            p.label, q.label
        ))),
        None => Ok(true),
    }
}

/// Tail-equivalence classes of a path family, with the consistency of the
/// pairwise evidence that produced them.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryCount {
    /// Path labels grouped by tail equivalence, in first-appearance order.
    pub classes: Vec<Vec<String>>,
    /// False when the pairwise verdicts were not transitive. The classes
    /// then come from the transitive closure of the matches and the listed
    /// warnings name the pairs that were separated yet ended up together.
    pub consistent: bool,
    pub warnings: Vec<String>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Groups paths into tail-equivalence classes by pairwise comparison.
///
/// Every pair is compared with [`path_equivalent`]; equivalent pairs are
/// merged. Empirical equivalence need not be transitive, so contradictions
/// (a pair judged inequivalent that lands in one class through
/// intermediaries) are never silently resolved: they are reported as
/// warnings and flag the count as inconsistent. An undecided pair aborts
/// with [`Error::DepthExhausted`].
pub fn count_boundary_points(
    tests: &[(String, Potential)],
    paths: &[InfinitePath],
    depth: usize,
    tol: f64,
) -> Result<BoundaryCount> {
    let n = paths.len();
    if n == 0 {
        return Err(Error::BadParam("boundary count needs at least one path".into()));
    }
    let mut equiv = vec![vec![true; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let e = path_equivalent(tests, &paths[i], &paths[j], depth, tol)?;
            equiv[i][j] = e;
            equiv[j][i] = e;
        }
    }

    // Union to the smaller index so each root is its class minimum.
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if equiv[i][j] {
                let ri = find(&mut parent, i);
                let rj = find(&mut parent, j);
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    let mut warnings = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !equiv[i][j] && find(&mut parent, i) == find(&mut parent, j) {
                warnings.push(format!(
                    "paths `{}` and `{}` were separated pairwise but share a class through intermediaries",
                    paths[i].label, paths[j].label
                ));
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(paths[i].label.clone());
    }
    Ok(BoundaryCount {
        classes: groups.into_values().collect(),
        consistent: warnings.is_empty(),
        warnings,
    })
}

/// Limit of a potential along a path, tracked step by step.
///
/// For a finite-energy harmonic `u` and an escaping path this evaluates
/// the boundary-point functional of that path applied to `u`: the value
/// `u` carries out to the end of the network along that route. The window
/// of `u` must cover the path out to `depth`.
pub fn functional_eval(
    u: &Potential,
    path: &InfinitePath,
    depth: usize,
    tol: f64,
) -> Result<LimitReport> {
    if depth < 1 {
        return Err(Error::BadParam("functional evaluation needs depth >= 1".into()));
    }
    let mut tracker = LimitTracker::new(tol);
    for i in 0..=depth {
        tracker.push(i as u32, value_at(u, path, i, "functional evaluation")?);
    }
    Ok(tracker.into_report())
}

/// Growth of `sup_{B_k} |u|` over the exhaustion, as a limit report.
///
/// The per-level maxima are nondecreasing, so a converged report is
/// evidence of boundedness and a report whose deltas keep growing is
/// evidence against it.
pub fn sup_norm(net: &Network, u: &dyn Field, k_max: u32, tol: f64) -> Result<LimitReport> {
    if k_max == 0 {
        return Err(Error::BadParam("sup norm needs k_max >= 1".into()));
    }
    let mut tracker = LimitTracker::new(tol);
    for k in 1..=k_max {
        let mut m = 0.0f64;
        for x in net.ball(k)? {
            let v = u.value(&x).ok_or_else(|| Error::WindowTooSmall {
                vertex: x.to_string(),
                context: "sup norm",
            })?;
            m = m.max(v.abs());
        }
        tracker.push(k, m);
    }
    Ok(tracker.into_report())
}

/// Separating tests for boundary counting: the harmonic remainders `h_x`
/// of the kernel split at probe vertices in the ball of radius two, capped
/// at eight probes, keeping only probes whose harmonic energy does not
/// vanish in the limit.
///
/// Labels name the probe vertex. The returned windows cover `B_{k_max}`,
/// so paths compared against them can be followed to depth `k_max`. An
/// empty result means no probe carries harmonic energy, and every path
/// family then collapses to a single class, which is exactly the expected
/// verdict on a network without nonconstant finite-energy harmonic
/// functions.
pub fn harmonic_probe_set(
    net: &Network,
    k_max: u32,
    tol: f64,
) -> Result<Vec<(String, Potential)>> {
    if k_max < 6 {
        return Err(Error::BadParam("probe set needs k_max >= 6".into()));
    }
    let origin = net.origin().clone();
    let mut out = Vec::new();
    for x in net.ball(2)? {
        if x == origin {
            continue;
        }
        if out.len() == 8 {
            break;
        }
        let fam = fin_kernel(net, &x, k_max, tol)?;
        let (_, _, vanishing) = harmonic_evidence(&fam, tol);
        if !vanishing {
            let h = fam.h.expect("full kernel split carries the harmonic part");
            out.push((x.to_string(), h));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_model;
    use crate::network::FnField;

    fn geo2() -> Network {
        build_model(&ModelSpec::GeoInt { c: 2.0 }).unwrap()
    }

    #[test]
    fn validation_accepts_rays_and_rejects_broken_steps() {
        let net = geo2();
        let rays = InfinitePath::standard(&ModelSpec::GeoInt { c: 2.0 });
        assert_eq!(rays.len(), 2);
        for ray in &rays {
            assert!(validate_path(&net, ray, 12).unwrap());
        }

        // Edges exist but the path keeps bouncing near the origin.
        let bouncing = InfinitePath::from_fn("bounce", |i| Vertex::Int((i % 2) as i64));
        assert!(!validate_path(&net, &bouncing, 12).unwrap());

        // A jump past a vertex is not an edge; the failing step is named.
        let jumping = InfinitePath::from_fn("jump", |i| {
            Vertex::Int(if i < 5 { i as i64 } else { i as i64 + 5 })
        });
        match validate_path(&net, &jumping, 12) {
            Err(Error::NotAPath { index: 4, .. }) => {}
            other => panic!("expected NotAPath at step 4, got {other:?}"),
        }

        // Vertices from a different vertex family are not in the network.
        let alien = InfinitePath::from_fn("alien", |i| Vertex::Node(i as u64 + 1));
        assert!(matches!(
            validate_path(&net, &alien, 12),
            Err(Error::NotAPath { index: 0, .. })
        ));
    }

    #[test]
    fn geo_int_has_two_boundary_points() {
        let net = geo2();
        let tests = harmonic_probe_set(&net, 20, 1e-6).unwrap();
        assert!(!tests.is_empty());
        let rays = InfinitePath::standard(&ModelSpec::GeoInt { c: 2.0 });

        // h_1 tends to +1/4 and -1/4 along the two rays, so the tails are
        // separated by a gap near 1/2.
        assert!(!path_equivalent(&tests, &rays[0], &rays[1], 16, 1e-3).unwrap());

        let count = count_boundary_points(&tests, &rays, 16, 1e-3).unwrap();
        assert_eq!(count.classes.len(), 2);
        assert!(count.consistent);

        // A shifted copy of the positive ray has the same tail.
        let shifted = InfinitePath::from_fn("+inf-shifted", |i| Vertex::Int(i as i64 + 3));
        let family = vec![rays[0].clone(), rays[1].clone(), shifted];
        let count = count_boundary_points(&tests, &family, 16, 1e-3).unwrap();
        assert_eq!(count.classes.len(), 2);
        assert!(count.consistent);
        assert!(count
            .classes
            .iter()
            .any(|c| c.contains(&"+inf".to_string()) && c.contains(&"+inf-shifted".to_string())));
    }

    #[test]
    fn half_line_collapses_to_one_class() {
        let net = build_model(&ModelSpec::GeoHalf { c: 2.0 }).unwrap();
        // Free and wired level resistances coincide on a half line, so no
        // probe survives and the test family is empty.
        let tests = harmonic_probe_set(&net, 20, 1e-6).unwrap();
        assert!(tests.is_empty());

        let staggered = vec![
            InfinitePath::from_fn("ray", |i| Vertex::Int(i as i64)),
            InfinitePath::from_fn("ray+1", |i| Vertex::Int(i as i64 + 1)),
            InfinitePath::from_fn("ray+2", |i| Vertex::Int(i as i64 + 2)),
        ];
        for p in &staggered {
            assert!(validate_path(&net, p, 14).unwrap());
        }
        let count = count_boundary_points(&tests, &staggered, 14, 1e-3).unwrap();
        assert_eq!(count.classes.len(), 1);
        assert!(count.consistent);
        assert!(count.warnings.is_empty());
    }

    #[test]
    fn star_branches_are_distinct_boundary_points() {
        let spec = ModelSpec::Star { m: 3, c: 2.0 };
        let net = build_model(&spec).unwrap();
        let tests = harmonic_probe_set(&net, 18, 1e-6).unwrap();
        assert!(!tests.is_empty());
        let rays = InfinitePath::standard(&spec);
        assert_eq!(rays.len(), 3);
        let count = count_boundary_points(&tests, &rays, 14, 1e-3).unwrap();
        assert_eq!(count.classes.len(), 3);
        assert!(count.consistent);
    }

    #[test]
    fn kernel_functional_on_geo_int() {
        let net = geo2();
        let fam = fin_kernel(&net, &Vertex::Int(1), 20, 1e-6).unwrap();
        let h = fam.h.as_ref().unwrap();
        let rays = InfinitePath::standard(&ModelSpec::GeoInt { c: 2.0 });

        // h_1 = (sign n)(1 - 2^{-|n|})/4 has limits +1/4 and -1/4.
        let plus = functional_eval(h, &rays[0], 16, 1e-4).unwrap();
        assert!(plus.converged);
        assert!((plus.value - 0.25).abs() < 1e-3);
        let minus = functional_eval(h, &rays[1], 16, 1e-4).unwrap();
        assert!(minus.converged);
        assert!((minus.value + 0.25).abs() < 1e-3);

        // The free kernel itself also has tail limits: 1/2 and 0.
        let vplus = functional_eval(&fam.v, &rays[0], 16, 1e-4).unwrap();
        assert!((vplus.value - 0.5).abs() < 1e-3);
        let vminus = functional_eval(&fam.v, &rays[1], 16, 1e-4).unwrap();
        assert!(vminus.value.abs() < 1e-3);
    }

    #[test]
    fn sup_norm_tracks_boundedness() {
        let net = geo2();
        let fam = fin_kernel(&net, &Vertex::Int(1), 20, 1e-6).unwrap();
        let h = fam.h.unwrap();
        let bounded = sup_norm(&net, &h, 18, 1e-4).unwrap();
        assert!(bounded.converged);
        assert!((bounded.value - 0.25).abs() < 1e-2);

        let line = build_model(&ModelSpec::SimpleLine).unwrap();
        let linear = FnField(|x: &Vertex| match x {
            Vertex::Int(n) => *n as f64,
            _ => 0.0,
        });
        let unbounded = sup_norm(&line, &linear, 18, 1e-4).unwrap();
        assert!(!unbounded.converged);
        assert!((unbounded.value - 18.0).abs() < 1e-12);
    }

    #[test]
    fn comparison_guards() {
        let net = geo2();
        let tests = harmonic_probe_set(&net, 12, 1e-6).unwrap();
        let rays = InfinitePath::standard(&ModelSpec::GeoInt { c: 2.0 });

        assert!(matches!(
            path_equivalent(&tests, &rays[0], &rays[1], 2, 1e-3),
            Err(Error::BadParam(_))
        ));
        // Depth beyond the probe windows is a window error, not a panic.
        assert!(matches!(
            path_equivalent(&tests, &rays[0], &rays[1], 40, 1e-3),
            Err(Error::WindowTooSmall { .. })
        ));
        assert!(matches!(
            count_boundary_points(&tests, &[], 10, 1e-3),
            Err(Error::BadParam(_))
        ));
        assert!(matches!(
            harmonic_probe_set(&net, 4, 1e-6),
            Err(Error::BadParam(_))
        ));
    }
}
