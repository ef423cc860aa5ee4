//! Built-in network models and their closed-form potentials.
//!
//! | model          | vertex set                 | conductances                              |
//! |----------------|----------------------------|-------------------------------------------|
//! | `GeoInt`       | integers                   | edge (n-1, n) carries `c^max(|n-1|,|n|)`  |
//! | `GeoHalf`      | nonnegative integers       | edge (n-1, n) carries `c^n`               |
//! | `Star`         | m geometric half-lines     | arm edges as `GeoHalf`, joined at 0       |
//! | `BinaryTree`   | rooted binary tree         | all edges 1                               |
//! | `Ladder`       | two rails plus rungs       | rail edge (n-1, n) `alpha^n`, rung `beta^n` |
//! | `LatticeJoin`  | m boxes in Z^d, joined     | all edges 1; copy origins form an m-cycle |
//! | `SimpleLine`   | integers                   | all edges 1                               |
//!
//! The geometric models with `c > 1` are transient; `GeoInt` carries a
//! one-dimensional space of finite-energy harmonics, `GeoHalf` none. The
//! `LatticeJoin` model is a finite patch (half-width `width` per box) meant
//! for harmonic-dimension probes at truncation levels below `width`.
//!
//! Closed forms, where a model has them, are exact and serve as oracles for
//! the exhaustion machinery:
//!
//! * `GeoInt` monopole `w_o(n) = a r^|n|` with `r = 1/c`, `a = r / (2(1-r))`,
//!   normalized so `(L w_o)(0) = 1`; its energy is `a`.
//! * `GeoInt` harmonic `h(n) = sgn(n)(1 - r^|n|)`, the finite-energy harmonic
//!   with unit current crossing the origin in each direction; energy
//!   `2(1-r)/r`.
//! * `GeoHalf` monopole `w_o(n) = a r^n` with `a = r/(1-r)`.
//!
//! Monopole closed forms are in the vanish-at-infinity gauge, harmonics are
//! pinned to zero at the origin.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{Field, Generator, Network, Vertex};

/// Parameters of a built-in model.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ModelSpec {
    GeoInt { c: f64 },
    GeoHalf { c: f64 },
    Star { m: u32, c: f64 },
    BinaryTree,
    Ladder { alpha: f64, beta: f64 },
    LatticeJoin { m: u32, d: u32, width: u32 },
    SimpleLine,
}

impl ModelSpec {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadParam(msg));
        match *self {
            ModelSpec::GeoInt { c } | ModelSpec::GeoHalf { c } => {
                if !(c > 1.0) || !c.is_finite() {
                    return bad(format!("geometric models need c > 1, got {c}"));
                }
            }
            ModelSpec::Star { m, c } => {
                if m < 2 {
                    return bad(format!("star needs m >= 2 arms, got {m}"));
                }
                if !(c > 1.0) || !c.is_finite() {
                    return bad(format!("star needs c > 1, got {c}"));
                }
            }
            ModelSpec::BinaryTree | ModelSpec::SimpleLine => {}
            ModelSpec::Ladder { alpha, beta } => {
                if !(alpha > 1.0) || !(beta > 0.0) || !(beta < 1.0) {
                    return bad(format!(
                        "ladder needs alpha > 1 > beta > 0, got alpha={alpha}, beta={beta}"
                    ));
                }
            }
            ModelSpec::LatticeJoin { m, d, width } => {
                if m < 2 {
                    return bad(format!("lattice join needs m >= 2 copies, got {m}"));
                }
                if !(3..=4).contains(&d) {
                    return bad(format!("lattice join supports d in 3..=4, got {d}"));
                }
                if !(2..=20).contains(&width) {
                    return bad(format!("lattice join patch half-width must be 2..=20, got {width}"));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::GeoInt { .. } => "geo-int",
            ModelSpec::GeoHalf { .. } => "geo-half",
            ModelSpec::Star { .. } => "star",
            ModelSpec::BinaryTree => "tree",
            ModelSpec::Ladder { .. } => "ladder",
            ModelSpec::LatticeJoin { .. } => "lattice-join",
            ModelSpec::SimpleLine => "line",
        }
    }
}

/// Builds the network for a model spec, rooted at its natural origin.
pub fn build_model(spec: &ModelSpec) -> Result<Network> {
    spec.validate()?;
    let origin = model_origin(spec);
    let gen: Arc<dyn Generator> = match *spec {
        ModelSpec::GeoInt { c } => Arc::new(GeoIntGen { c }),
        ModelSpec::GeoHalf { c } => Arc::new(GeoHalfGen { c }),
        ModelSpec::Star { m, c } => Arc::new(StarGen { m, c }),
        ModelSpec::BinaryTree => Arc::new(TreeGen),
        ModelSpec::Ladder { alpha, beta } => Arc::new(LadderGen { alpha, beta }),
        ModelSpec::LatticeJoin { m, d, width } => Arc::new(LatticeJoinGen {
            m: m as u16,
            d: d as u8,
            width: width as i8,
        }),
        ModelSpec::SimpleLine => Arc::new(LineGen),
    };
    Network::generated(gen, origin)
}

fn model_origin(spec: &ModelSpec) -> Vertex {
    match spec {
        ModelSpec::GeoInt { .. }
        | ModelSpec::GeoHalf { .. }
        | ModelSpec::Star { .. }
        | ModelSpec::SimpleLine => Vertex::Int(0),
        ModelSpec::BinaryTree => Vertex::Node(1),
        ModelSpec::Ladder { .. } => Vertex::Rail(0, 0),
        ModelSpec::LatticeJoin { d, .. } => Vertex::Patch {
            copy: 0,
            coord: [0; 4],
            dim: *d as u8,
        },
    }
}

struct GeoIntGen {
    c: f64,
}

impl Generator for GeoIntGen {
    fn neighbors(&self, x: &Vertex) -> Option<Vec<(Vertex, f64)>> {
        let Vertex::Int(n) = *x else { return None };
        let edge = |a: i64, b: i64| self.c.powi(a.abs().max(b.abs()) as i32);
        Some(vec![
            (Vertex::Int(n - 1), edge(n - 1, n)),
            (Vertex::Int(n + 1), edge(n, n + 1)),
        ])
    }

    fn describe(&self) -> String {
        format!("geo-int(c={})", self.c)
    }
}

struct GeoHalfGen {
    c: f64,
}

impl Generator for GeoHalfGen {
    fn neighbors(&self, x: &Vertex) -> Option<Vec<(Vertex, f64)>> {
        let Vertex::Int(n) = *x else { return None };
        if n < 0 {
            return None;
        }
        let mut out = vec![(Vertex::Int(n + 1), self.c.powi(n as i32 + 1))];
        if n > 0 {
            out.push((Vertex::Int(n - 1), self.c.powi(n as i32)));
        }
        Some(out)
    }

    fn describe(&self) -> String {
        format!("geo-half(c={})", self.c)
    }
}

struct StarGen {
    m: u32,
    c: f64,
}

impl Generator for StarGen {
    fn neighbors(&self, x: &Vertex) -> Option<Vec<(Vertex, f64)>> {
        match *x {
            Vertex::Int(0) => Some(
                (0..self.m)
                    .map(|b| (Vertex::Branch(b, 1), self.c))
                    .collect(),
            ),
            Vertex::Branch(b, d) if b < self.m && d >= 1 => {
                let inward = if d == 1 {
                    Vertex::Int(0)
                } else {
                    Vertex::Branch(b, d - 1)
                };
                Some(vec![
                    (inward, self.c.powi(d as i32)),
                    (Vertex::Branch(b, d + 1), self.c.powi(d as i32 + 1)),
                ])
            }
            _ => None,
        }
    }

    fn describe(&self) -> String {
        format!("star(m={}, c={})", self.m, self.c)
    }
}

struct TreeGen;

impl Generator for TreeGen {
    fn neighbors(&self, x: &Vertex) -> Option<Vec<(Vertex, f64)>> {
        let Vertex::Node(a) = *x else { return None };
        if a == 0 || a >= 1 << 62 {
            return None;
        }
        let mut out = vec![(Vertex::Node(2 * a), 1.0), (Vertex::Node(2 * a + 1), 1.0)];
        if a > 1 {
            out.push((Vertex::Node(a / 2), 1.0));
        }
        Some(out)
    }

    fn describe(&self) -> String {
        "tree".into()
    }
}

struct LadderGen {
    alpha: f64,
    beta: f64,
}

impl Generator for LadderGen {
    fn neighbors(&self, x: &Vertex) -> Option<Vec<(Vertex, f64)>> {
        let Vertex::Rail(s, n) = *x else { return None };
        if s > 1 {
            return None;
        }
        let mut out = vec![
            (Vertex::Rail(1 - s, n), self.beta.powi(n as i32)),
            (Vertex::Rail(s, n + 1), self.alpha.powi(n as i32 + 1)),
        ];
        if n > 0 {
            out.push((Vertex::Rail(s, n - 1), self.alpha.powi(n as i32)));
        }
        Some(out)
    }

    fn describe(&self) -> String {
        format!("ladder(alpha={}, beta={})", self.alpha, self.beta)
    }
}

struct LatticeJoinGen {
    m: u16,
    d: u8,
    width: i8,
}

impl Generator for LatticeJoinGen {
    fn neighbors(&self, x: &Vertex) -> Option<Vec<(Vertex, f64)>> {
        let Vertex::Patch { copy, coord, dim } = *x else {
            return None;
        };
        if copy >= self.m || dim != self.d {
            return None;
        }
        let d = self.d as usize;
        if coord[..d].iter().any(|&v| v.abs() > self.width) || coord[d..].iter().any(|&v| v != 0) {
            return None;
        }
        let mut out = Vec::new();
        for axis in 0..d {
            for step in [-1i8, 1] {
                let mut c2 = coord;
                c2[axis] += step;
                if c2[axis].abs() <= self.width {
                    out.push((
                        Vertex::Patch {
                            copy,
                            coord: c2,
                            dim,
                        },
                        1.0,
                    ));
                }
            }
        }
        if coord[..d].iter().all(|&v| v == 0) {
            // The identified box origins form the cycle on m vertices
            // (a single edge when m = 2).
            let cycle_origin = |k: u16| Vertex::Patch {
                copy: k,
                coord: [0; 4],
                dim,
            };
            if self.m == 2 {
                out.push((cycle_origin(1 - copy), 1.0));
            } else {
                out.push((cycle_origin((copy + 1) % self.m), 1.0));
                out.push((cycle_origin((copy + self.m - 1) % self.m), 1.0));
            }
        }
        Some(out)
    }

    fn describe(&self) -> String {
        format!(
            "lattice-join(m={}, d={}, width={})",
            self.m, self.d, self.width
        )
    }
}

struct LineGen;

impl Generator for LineGen {
    fn neighbors(&self, x: &Vertex) -> Option<Vec<(Vertex, f64)>> {
        let Vertex::Int(n) = *x else { return None };
        Some(vec![(Vertex::Int(n - 1), 1.0), (Vertex::Int(n + 1), 1.0)])
    }

    fn describe(&self) -> String {
        "line".into()
    }
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// What a closed-form potential solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedFormKind {
    /// `(L w)(x) = 1` at the origin, `0` elsewhere; vanish-at-infinity gauge.
    Monopole,
    /// `(L h)(x) = 0` everywhere; pinned to zero at the origin.
    Harmonic,
}

/// An exact potential for a model, evaluable anywhere on the model.
#[derive(Clone)]
pub struct ClosedForm {
    pub kind: ClosedFormKind,
    pub label: String,
    eval: Arc<dyn Fn(&Vertex) -> Option<f64> + Send + Sync>,
}

impl Field for ClosedForm {
    fn value(&self, x: &Vertex) -> Option<f64> {
        (self.eval)(x)
    }
}

/// Exact potentials for a model; empty when none are known.
pub fn closed_forms(spec: &ModelSpec) -> Vec<ClosedForm> {
    match *spec {
        ModelSpec::GeoInt { c } => {
            let r = 1.0 / c;
            let a = r / (2.0 * (1.0 - r));
            vec![
                ClosedForm {
                    kind: ClosedFormKind::Monopole,
                    label: format!("a*r^|n| with a = {a}"),
                    eval: Arc::new(move |x| match *x {
                        Vertex::Int(n) => Some(a * r.powi(n.unsigned_abs() as i32)),
                        _ => None,
                    }),
                },
                ClosedForm {
                    kind: ClosedFormKind::Harmonic,
                    label: "sgn(n)*(1 - r^|n|)".into(),
                    eval: Arc::new(move |x| match *x {
                        Vertex::Int(n) => {
                            Some((n.signum() as f64) * (1.0 - r.powi(n.unsigned_abs() as i32)))
                        }
                        _ => None,
                    }),
                },
            ]
        }
        ModelSpec::GeoHalf { c } => {
            let r = 1.0 / c;
            let a = r / (1.0 - r);
            vec![ClosedForm {
                kind: ClosedFormKind::Monopole,
                label: format!("a*r^n with a = {a}"),
                eval: Arc::new(move |x| match *x {
                    Vertex::Int(n) if n >= 0 => Some(a * r.powi(n as i32)),
                    _ => None,
                }),
            }]
        }
        _ => Vec::new(),
    }
}

/// Named rays to infinity for a model, as step-indexed vertex functions.
/// Index 0 is the starting vertex; consecutive vertices are adjacent.
pub type Ray = (String, Arc<dyn Fn(usize) -> Vertex + Send + Sync>);

fn ray(label: impl Into<String>, f: impl Fn(usize) -> Vertex + Send + Sync + 'static) -> Ray {
    (label.into(), Arc::new(f))
}

pub fn standard_rays(spec: &ModelSpec) -> Vec<Ray> {
    match *spec {
        ModelSpec::GeoInt { .. } | ModelSpec::SimpleLine => vec![
            ray("+inf", |i| Vertex::Int(i as i64)),
            ray("-inf", |i| Vertex::Int(-(i as i64))),
        ],
        ModelSpec::GeoHalf { .. } => vec![ray("ray", |i| Vertex::Int(i as i64))],
        ModelSpec::Star { m, .. } => (0..m)
            .map(|b| {
                ray(format!("branch{b}"), move |i| {
                    if i == 0 {
                        Vertex::Int(0)
                    } else {
                        Vertex::Branch(b, i as u32)
                    }
                })
            })
            .collect(),
        ModelSpec::BinaryTree => vec![
            ray("left", |i| Vertex::Node(1u64 << i)),
            ray("right", |i| Vertex::Node((2u64 << i) - 1)),
        ],
        ModelSpec::Ladder { .. } => vec![
            ray("rail-x", |i| Vertex::Rail(0, i as u32)),
            ray("rail-y", |i| Vertex::Rail(1, i as u32)),
        ],
        ModelSpec::LatticeJoin { .. } => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{laplacian_apply, Potential};

    fn tabulate(net: &Network, f: &ClosedForm, radius: u32) -> Potential {
        Potential::from_field(f, &net.ball(radius).unwrap()).unwrap()
    }

    #[test]
    fn geo_int_conductances() {
        let net = build_model(&ModelSpec::GeoInt { c: 2.0 }).unwrap();
        for (a, b, c) in [(0, 1, 2.0), (1, 2, 4.0), (-1, 0, 2.0), (-2, -1, 4.0)] {
            assert_eq!(
                net.edge(&Vertex::Int(a), &Vertex::Int(b)).unwrap(),
                Some(c),
                "edge ({a},{b})"
            );
        }
        let dist = net.transition_distribution(&Vertex::Int(1)).unwrap();
        assert_eq!(
            dist,
            vec![
                (Vertex::Int(0), 1.0 / 3.0),
                (Vertex::Int(2), 2.0 / 3.0)
            ]
        );
    }

    #[test]
    fn geo_int_monopole_closed_form_solves() {
        for c in [2.0, 3.0] {
            let spec = ModelSpec::GeoInt { c };
            let net = build_model(&spec).unwrap();
            let w = &closed_forms(&spec)[0];
            assert_eq!(w.kind, ClosedFormKind::Monopole);
            let a = (1.0 / c) / (2.0 * (1.0 - 1.0 / c));
            assert_eq!(w.value(&Vertex::Int(0)), Some(a));
            let tab = tabulate(&net, w, 26);
            for x in net.ball(25).unwrap() {
                let lap = laplacian_apply(&net, &tab, &x).unwrap();
                let want = if x == Vertex::Int(0) { 1.0 } else { 0.0 };
                // Scale-aware tolerance: the laplacian at x sums terms of
                // magnitude up to c(x), so eps-level roundoff grows with it.
                let tol = 5e-13 * net.conductance_sum(&x).unwrap().max(1.0);
                assert!(
                    (lap - want).abs() < tol,
                    "c={c}, x={x}: laplacian {lap}, want {want}"
                );
            }
        }
    }

    #[test]
    fn geo_int_harmonic_closed_form_is_harmonic_everywhere() {
        // The normalized form passes the Laplacian check including the seam
        // at n = -1, 0, 1 where the unnormalized product form fails.
        for c in [2.0, 3.0] {
            let spec = ModelSpec::GeoInt { c };
            let net = build_model(&spec).unwrap();
            let h = &closed_forms(&spec)[1];
            assert_eq!(h.kind, ClosedFormKind::Harmonic);
            let tab = tabulate(&net, h, 26);
            for x in net.ball(25).unwrap() {
                let lap = laplacian_apply(&net, &tab, &x).unwrap();
                let tol = 5e-13 * net.conductance_sum(&x).unwrap().max(1.0);
                assert!((lap).abs() < tol, "c={c}, x={x}: laplacian {lap}");
            }
        }
    }

    #[test]
    fn geo_half_monopole_closed_form() {
        let spec = ModelSpec::GeoHalf { c: 2.0 };
        let net = build_model(&spec).unwrap();
        let w = &closed_forms(&spec)[0];
        assert_eq!(w.value(&Vertex::Int(0)), Some(1.0));
        assert_eq!(w.value(&Vertex::Int(-1)), None);
        let tab = tabulate(&net, w, 26);
        for x in net.ball(25).unwrap() {
            let lap = laplacian_apply(&net, &tab, &x).unwrap();
            let want = if x == Vertex::Int(0) { 1.0 } else { 0.0 };
            assert!((lap - want).abs() < 1e-12, "x={x}: laplacian {lap}");
        }
    }

    #[test]
    fn star_shape() {
        let net = build_model(&ModelSpec::Star { m: 3, c: 2.0 }).unwrap();
        for k in 1..=6u32 {
            assert_eq!(net.ball(k).unwrap().len(), (3 * k + 1) as usize);
        }
        assert_eq!(net.neighbors(&Vertex::Int(0)).unwrap().len(), 3);
        assert_eq!(net.neighbors(&Vertex::Branch(2, 4)).unwrap().len(), 2);
        assert_eq!(
            net.edge(&Vertex::Branch(1, 1), &Vertex::Branch(1, 2)).unwrap(),
            Some(4.0)
        );
        assert!(!net.contains(&Vertex::Branch(3, 1)));
        assert!(!net.contains(&Vertex::Int(1)));
    }

    #[test]
    fn tree_shape() {
        let net = build_model(&ModelSpec::BinaryTree).unwrap();
        assert_eq!(net.neighbors(&Vertex::Node(1)).unwrap().len(), 2);
        assert_eq!(net.neighbors(&Vertex::Node(5)).unwrap().len(), 3);
        assert_eq!(net.edge(&Vertex::Node(2), &Vertex::Node(5)).unwrap(), Some(1.0));
        assert_eq!(net.edge(&Vertex::Node(2), &Vertex::Node(6)).unwrap(), None);
        assert_eq!(net.ball(3).unwrap().len(), 1 + 2 + 4 + 8);
    }

    #[test]
    fn ladder_shape() {
        let net = build_model(&ModelSpec::Ladder {
            alpha: 2.0,
            beta: 0.5,
        })
        .unwrap();
        assert_eq!(net.edge(&Vertex::Rail(0, 1), &Vertex::Rail(0, 2)).unwrap(), Some(4.0));
        assert_eq!(net.edge(&Vertex::Rail(0, 2), &Vertex::Rail(1, 2)).unwrap(), Some(0.25));
        assert_eq!(net.edge(&Vertex::Rail(0, 0), &Vertex::Rail(1, 0)).unwrap(), Some(1.0));
    }

    #[test]
    fn lattice_join_shape() {
        let net = build_model(&ModelSpec::LatticeJoin { m: 3, d: 3, width: 2 }).unwrap();
        let o = |copy| Vertex::Patch { copy, coord: [0; 4], dim: 3 };
        // Box origin: 2d box neighbors plus two cycle edges.
        assert_eq!(net.neighbors(&o(0)).unwrap().len(), 8);
        assert_eq!(net.edge(&o(0), &o(1)).unwrap(), Some(1.0));
        assert_eq!(net.edge(&o(0), &o(2)).unwrap(), Some(1.0));
        let inner = Vertex::Patch { copy: 1, coord: [1, 0, 0, 0], dim: 3 };
        assert_eq!(net.neighbors(&inner).unwrap().len(), 6);
        let corner = Vertex::Patch { copy: 1, coord: [2, 2, 2, 0], dim: 3 };
        assert_eq!(net.neighbors(&corner).unwrap().len(), 3);

        let two = build_model(&ModelSpec::LatticeJoin { m: 2, d: 3, width: 2 }).unwrap();
        assert_eq!(two.neighbors(&o(0)).unwrap().len(), 7);
    }

    #[test]
    fn parameter_validation() {
        assert!(build_model(&ModelSpec::GeoInt { c: 1.0 }).is_err());
        assert!(build_model(&ModelSpec::GeoHalf { c: 0.5 }).is_err());
        assert!(build_model(&ModelSpec::Star { m: 1, c: 2.0 }).is_err());
        assert!(build_model(&ModelSpec::Ladder { alpha: 0.9, beta: 0.5 }).is_err());
        assert!(build_model(&ModelSpec::Ladder { alpha: 2.0, beta: 1.5 }).is_err());
        assert!(build_model(&ModelSpec::LatticeJoin { m: 2, d: 2, width: 3 }).is_err());
    }

    #[test]
    fn rays_are_adjacent_paths() {
        for spec in [
            ModelSpec::GeoInt { c: 2.0 },
            ModelSpec::GeoHalf { c: 2.0 },
            ModelSpec::Star { m: 3, c: 2.0 },
            ModelSpec::BinaryTree,
            ModelSpec::Ladder { alpha: 2.0, beta: 0.5 },
            ModelSpec::SimpleLine,
        ] {
            let net = build_model(&spec).unwrap();
            for (label, ray) in standard_rays(&spec) {
                for i in 0..12usize {
                    let (a, b) = (ray(i), ray(i + 1));
                    assert!(
                        net.edge(&a, &b).unwrap().is_some(),
                        "{}: ray {label} step {i} ({a} -> {b})",
                        spec.name()
                    );
                }
            }
        }
    }
}
