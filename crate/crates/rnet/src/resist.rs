//! Effective resistance: finite networks by three independent routes,
//! infinite networks as free and wired limits, and two-terminal reduction
//! by local rewrites.
//!
//! On a finite network the resistance R(x, y) is simultaneously
//!
//! * the potential drop of the unit dipole solution,
//! * the energy of that solution,
//! * the reciprocal of the energy dissipated by the unit-drop Dirichlet
//!   solution,
//!
//! and [`effective_resistance`] computes all three so callers can check the
//! agreement instead of trusting one path. On an infinite network the free
//! and wired resistances are limits of the same quantity over free and
//! wired truncations; they satisfy `R^W <= R^F`, with equality exactly when
//! the network carries no nonconstant harmonic functions of finite energy.
//!
//! The reduction engine rewrites a finite network toward its two terminals
//! with four local moves: pruning a dead leaf, merging a series pair,
//! merging parallel edges, and the wye-delta exchange. Each move preserves
//! the two-terminal resistance; the full step log is returned. Networks
//! whose interior vertices all have four or more distinct neighbors cannot
//! be finished by these moves, in which case the engine stops, flags the
//! reduction incomplete, and the reported resistance falls back to the
//! solver. The solver value is always computed and compared.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exhaust::{truncate, Flavor, LimitReport, LimitTracker};
use crate::network::{energy_total, Network, Vertex};
use crate::solve::{solve_dirichlet, solve_grounded};

/// Finite-network effective resistance, by all three routes.
#[derive(Clone, Debug, Serialize)]
pub struct ResistanceCheck {
    pub value: f64,
    /// `u(x)` for the unit dipole grounded at `y`.
    pub potential_drop: f64,
    /// `E(u, u)` for the same solution.
    pub energy: f64,
    /// `1 / E(s, s)` for the Dirichlet solution with `s(x) = 1`, `s(y) = 0`.
    pub reciprocal_unit_drop: f64,
}

/// Computes R(x, y) on a finite network three ways.
pub fn effective_resistance(net: &Network, x: &Vertex, y: &Vertex) -> Result<ResistanceCheck> {
    if x == y {
        return Err(Error::SameVertex(x.to_string()));
    }
    let mut charge = BTreeMap::new();
    charge.insert(x.clone(), 1.0);
    let u = solve_grounded(net, &charge, y)?;
    let potential_drop = u.get(x).expect("dipole source is in the network");
    let energy = energy_total(net, &u, &u)?;

    let mut fixed = BTreeMap::new();
    fixed.insert(x.clone(), 1.0);
    fixed.insert(y.clone(), 0.0);
    let s = solve_dirichlet(net, &fixed)?;
    let dissipated = energy_total(net, &s, &s)?;
    if dissipated <= 0.0 {
        return Err(Error::SolveFailed("unit-drop solution dissipates nothing".into()));
    }
    Ok(ResistanceCheck {
        value: potential_drop,
        potential_drop,
        energy,
        reciprocal_unit_drop: 1.0 / dissipated,
    })
}

fn resistance_limit(
    net: &Network,
    x: &Vertex,
    y: &Vertex,
    k_max: u32,
    tol: f64,
    flavor: Flavor,
) -> Result<LimitReport> {
    if x == y {
        return Err(Error::SameVertex(x.to_string()));
    }
    let dists = net.distances_up_to(k_max)?;
    let (dx, dy) = match (dists.get(x), dists.get(y)) {
        (Some(a), Some(b)) => (*a, *b),
        (None, _) => {
            return Err(Error::WindowTooSmall {
                vertex: x.to_string(),
                context: "resistance endpoint must lie within the exhaustion radius",
            })
        }
        (_, None) => {
            return Err(Error::WindowTooSmall {
                vertex: y.to_string(),
                context: "resistance endpoint must lie within the exhaustion radius",
            })
        }
    };
    let k0 = dx.max(dy).max(1);

    let mut charge = BTreeMap::new();
    charge.insert(x.clone(), 1.0);
    let mut tracker = LimitTracker::new(tol);
    for k in k0..=k_max {
        let t = truncate(net, k, flavor)?;
        let u = solve_grounded(t.network(), &charge, y)?;
        tracker.push(k, u.get(x).expect("endpoint is inside the ball"));
        if tracker.converged() {
            break;
        }
    }
    Ok(tracker.into_report())
}

/// Free effective resistance `R^F(x, y)`, the decreasing limit of level
/// resistances over free truncations.
pub fn free_resistance(net: &Network, x: &Vertex, y: &Vertex, k_max: u32, tol: f64) -> Result<LimitReport> {
    resistance_limit(net, x, y, k_max, tol, Flavor::Free)
}

/// Wired effective resistance `R^W(x, y)`, the increasing limit over wired
/// truncations with the infinity vertex floating.
pub fn wired_resistance(net: &Network, x: &Vertex, y: &Vertex, k_max: u32, tol: f64) -> Result<LimitReport> {
    resistance_limit(net, x, y, k_max, tol, Flavor::Wired)
}

// ---------------------------------------------------------------------------
// Two-terminal reduction
// ---------------------------------------------------------------------------

/// One rewrite applied by the reduction engine. Vertices are rendered as
/// display strings so the log serializes directly.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum ReductionStep {
    /// A non-terminal vertex with a single neighbor carries no current.
    Prune { leaf: String, neighbor: String },
    /// A non-terminal vertex with exactly two distinct neighbors `a`, `b`
    /// merges its edges into one of conductance `g_a g_b / (g_a + g_b)`.
    Series {
        through: String,
        ends: [String; 2],
        conductance: f64,
    },
    /// Two edges between the same endpoints merge by adding conductances.
    Parallel { ends: [String; 2], merged: f64 },
    /// A non-terminal vertex with exactly three distinct neighbors is
    /// eliminated; each neighbor pair `(a, b)` gains an edge of conductance
    /// `g_a g_b / (g_a + g_b + g_c)`. This is one step of Gaussian
    /// elimination on the center's balance equation, so the exterior
    /// network is unchanged.
    WyeDelta { center: String, spokes: [String; 3] },
}

/// Outcome of reducing a finite network onto two terminals.
#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub terminals: [String; 2],
    pub steps: Vec<ReductionStep>,
    /// Whether the rewrites reached the bare two-terminal network. When
    /// `false`, `resistance` is taken from the solver instead.
    pub complete: bool,
    pub resistance: f64,
    pub solver_resistance: f64,
    pub discrepancy: f64,
}

struct Reducer {
    adj: BTreeMap<Vertex, BTreeMap<Vertex, f64>>,
    terminals: (Vertex, Vertex),
    steps: Vec<ReductionStep>,
}

impl Reducer {
    fn is_terminal(&self, v: &Vertex) -> bool {
        *v == self.terminals.0 || *v == self.terminals.1
    }

    fn remove_vertex(&mut self, z: &Vertex) -> BTreeMap<Vertex, f64> {
        let nbrs = self.adj.remove(z).unwrap_or_default();
        for y in nbrs.keys() {
            if let Some(m) = self.adj.get_mut(y) {
                m.remove(z);
            }
        }
        nbrs
    }

    /// Adds an edge, logging a parallel merge if one happens.
    fn add_edge(&mut self, a: &Vertex, b: &Vertex, g: f64) {
        let existing = self.adj.get(a).and_then(|m| m.get(b)).copied();
        let total = existing.unwrap_or(0.0) + g;
        self.adj.get_mut(a).unwrap().insert(b.clone(), total);
        self.adj.get_mut(b).unwrap().insert(a.clone(), total);
        if existing.is_some() {
            self.steps.push(ReductionStep::Parallel {
                ends: [a.to_string(), b.to_string()],
                merged: total,
            });
        }
    }

    fn prune_pass(&mut self) {
        loop {
            let leaf = self
                .adj
                .iter()
                .find(|(v, m)| !self.is_terminal(v) && m.len() <= 1)
                .map(|(v, _)| v.clone());
            match leaf {
                Some(z) => {
                    let nbrs = self.remove_vertex(&z);
                    let neighbor = nbrs
                        .keys()
                        .next()
                        .map(|v| v.to_string())
                        .unwrap_or_default();
                    self.steps.push(ReductionStep::Prune {
                        leaf: z.to_string(),
                        neighbor,
                    });
                }
                None => return,
            }
        }
    }

    fn find_degree(&self, d: usize) -> Option<Vertex> {
        self.adj
            .iter()
            .find(|(v, m)| !self.is_terminal(v) && m.len() == d)
            .map(|(v, _)| v.clone())
    }

    fn step(&mut self) -> bool {
        self.prune_pass();
        if let Some(z) = self.find_degree(2) {
            let nbrs = self.remove_vertex(&z);
            let mut it = nbrs.iter();
            let (a, ga) = it.next().unwrap();
            let (b, gb) = it.next().unwrap();
            let g = ga * gb / (ga + gb);
            self.steps.push(ReductionStep::Series {
                through: z.to_string(),
                ends: [a.to_string(), b.to_string()],
                conductance: g,
            });
            let (a, b) = (a.clone(), b.clone());
            self.add_edge(&a, &b, g);
            return true;
        }
        if let Some(z) = self.find_degree(3) {
            let nbrs = self.remove_vertex(&z);
            let spokes: Vec<(Vertex, f64)> = nbrs.into_iter().collect();
            let total: f64 = spokes.iter().map(|(_, g)| g).sum();
            self.steps.push(ReductionStep::WyeDelta {
                center: z.to_string(),
                spokes: [
                    spokes[0].0.to_string(),
                    spokes[1].0.to_string(),
                    spokes[2].0.to_string(),
                ],
            });
            for i in 0..3 {
                for j in i + 1..3 {
                    let (ref a, ga) = spokes[i];
                    let (ref b, gb) = spokes[j];
                    let (a, b) = (a.clone(), b.clone());
                    self.add_edge(&a, &b, ga * gb / total);
                }
            }
            return true;
        }
        false
    }
}

/// Reduces a finite network onto the terminal pair `(x, y)` and reports the
/// step log, the reduced resistance, and the solver cross-check.
pub fn reduce_two_terminal(net: &Network, x: &Vertex, y: &Vertex) -> Result<ReductionReport> {
    if x == y {
        return Err(Error::SameVertex(x.to_string()));
    }
    let verts = net.vertices()?;
    for t in [x, y] {
        if !net.contains(t) {
            return Err(Error::UnknownVertex(t.to_string()));
        }
    }
    let mut adj: BTreeMap<Vertex, BTreeMap<Vertex, f64>> = BTreeMap::new();
    for v in &verts {
        adj.insert(v.clone(), net.neighbors(v)?.into_iter().collect());
    }
    let mut r = Reducer {
        adj,
        terminals: (x.clone(), y.clone()),
        steps: Vec::new(),
    };
    while r.step() {}

    let complete = r.adj.len() == 2;
    let solver = effective_resistance(net, x, y)?;
    let reduced = if complete {
        let g = r
            .adj
            .get(x)
            .and_then(|m| m.get(y))
            .copied()
            .ok_or_else(|| Error::SolveFailed("terminals ended up disconnected".into()))?;
        1.0 / g
    } else {
        solver.value
    };
    Ok(ReductionReport {
        terminals: [x.to_string(), y.to_string()],
        steps: r.steps,
        complete,
        resistance: reduced,
        solver_resistance: solver.value,
        discrepancy: (reduced - solver.value).abs(),
    })
}
