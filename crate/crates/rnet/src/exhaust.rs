//! Exhaustion of an infinite network by balls, truncations, and boundary sums.
//!
//! A truncation at level `k` restricts the network to the ball `B_k` around
//! the origin. Two flavors exist:
//!
//! * `Free`: the induced subnetwork on `B_k`, complement deleted;
//! * `Wired`: the complement is shorted to a single auxiliary vertex
//!   [`Vertex::Infinity`]; every ball vertex `x` with neighbors outside gets
//!   an edge to it carrying the escaping conductance
//!   `c_{x,inf} = sum_{y outside} c_xy`.
//!
//! The boundary `bd H` of a truncation holds the ball vertices with at least
//! one neighbor outside; the rest is the interior. The normal derivative of
//! `v` at a boundary vertex sums over neighbors inside the ball:
//! `dn v(x) = sum_{y in H} c_xy (v(x) - v(y))`.
//!
//! Limits over exhaustions are tracked with a uniform convergence rule: a
//! sequence has converged once three consecutive deltas fall below the
//! tolerance. Scalar limits are reported as [`LimitReport`] values carrying
//! the full trace.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{Field, Network, Vertex};

/// Truncation flavor: induced subnetwork or shorted complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Free,
    Wired,
}

/// Boundary and interior of a truncation, relative to the parent network.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub boundary: Vec<Vertex>,
    pub interior: Vec<Vertex>,
}

/// A finite truncation of a network.
pub struct Truncation {
    pub level: u32,
    pub flavor: Flavor,
    net: Network,
    ball: Vec<Vertex>,
    bd: BoundaryData,
}

impl Truncation {
    /// The truncated network itself (finite; includes the infinity vertex for
    /// wired truncations with a nonempty complement).
    pub fn network(&self) -> &Network {
        &self.net
    }

    /// Ball vertices in breadth-first order, infinity excluded.
    pub fn ball(&self) -> &[Vertex] {
        &self.ball
    }

    pub fn has_infinity(&self) -> bool {
        self.net.contains(&Vertex::Infinity)
    }
}

/// Restricts `net` to the ball of radius `k >= 1` around its origin.
pub fn truncate(net: &Network, k: u32, flavor: Flavor) -> Result<Truncation> {
    if k == 0 {
        return Err(Error::BadParam("truncation level must be >= 1".into()));
    }
    let ball = net.ball(k)?;
    let inball: std::collections::HashSet<&Vertex> = ball.iter().collect();
    let mut edges: Vec<(Vertex, Vertex, f64)> = Vec::new();
    let mut boundary = Vec::new();
    let mut interior = Vec::new();
    for x in &ball {
        let mut escaping = 0.0;
        for (y, c) in net.neighbors(x)? {
            if inball.contains(&y) {
                if *x < y {
                    edges.push((x.clone(), y.clone(), c));
                }
            } else {
                escaping += c;
            }
        }
        if escaping > 0.0 {
            boundary.push(x.clone());
            if flavor == Flavor::Wired {
                edges.push((x.clone(), Vertex::Infinity, escaping));
            }
        } else {
            interior.push(x.clone());
        }
    }
    if edges.is_empty() {
        return Err(Error::EmptyBall(k));
    }
    let sub = Network::finite(&edges, net.origin().clone())?;
    Ok(Truncation {
        level: k,
        flavor,
        net: sub,
        ball,
        bd: BoundaryData { boundary, interior },
    })
}

/// Boundary and interior vertex lists of a truncation.
pub fn boundary_of(t: &Truncation) -> &BoundaryData {
    &t.bd
}

/// Normal derivative `dn v(x) = sum_{y in ball} c_xy (v(x) - v(y))` at a
/// boundary vertex of the truncation. Edges to the infinity vertex do not
/// contribute.
pub fn normal_derivative(t: &Truncation, v: &dyn Field, x: &Vertex) -> Result<f64> {
    if !t.bd.boundary.contains(x) {
        return Err(Error::NotBoundaryVertex(x.to_string()));
    }
    let vx = v.value(x).ok_or_else(|| Error::WindowTooSmall {
        vertex: x.to_string(),
        context: "normal derivative at the boundary vertex",
    })?;
    let mut acc = 0.0;
    for (y, c) in t.net.neighbors(x)? {
        if y == Vertex::Infinity {
            continue;
        }
        let vy = v.value(&y).ok_or_else(|| Error::WindowTooSmall {
            vertex: y.to_string(),
            context: "normal derivative needs in-ball neighbors",
        })?;
        acc += c * (vx - vy);
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Limits over exhaustions
// ---------------------------------------------------------------------------

/// Which sequence of balls to exhaust along.
///
/// `Shifted` offsets every radius by one; limits must not depend on the
/// exhaustion chosen, and the pair (`Balls`, `Shifted`) makes that testable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    Balls,
    Shifted,
}

impl Schedule {
    /// Truncation levels to visit, never exceeding `k_max`.
    pub fn levels(&self, k_max: u32) -> Vec<u32> {
        match self {
            Schedule::Balls => (1..=k_max).collect(),
            Schedule::Shifted => (2..=k_max).collect(),
        }
    }
}

/// One recorded level of a scalar limit.
#[derive(Clone, Debug, Serialize)]
pub struct LevelValue {
    pub level: u32,
    pub value: f64,
    /// Absolute difference from the previous level; `null` at the first.
    pub delta: Option<f64>,
}

/// A scalar limit over an exhaustion, with its full trace.
#[derive(Clone, Debug, Serialize)]
pub struct LimitReport {
    pub value: f64,
    pub converged: bool,
    pub tol: f64,
    pub levels: u32,
    pub trace: Vec<LevelValue>,
}

impl LimitReport {
    pub fn require_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NotConverged {
                levels: self.levels,
                last_delta: self.trace.last().and_then(|l| l.delta).unwrap_or(f64::NAN),
                tol: self.tol,
            })
        }
    }
}

/// Applies the three-consecutive-deltas convergence rule to a scalar sequence.
pub struct LimitTracker {
    tol: f64,
    trace: Vec<LevelValue>,
    consecutive: u32,
}

impl LimitTracker {
    pub fn new(tol: f64) -> LimitTracker {
        LimitTracker {
            tol,
            trace: Vec::new(),
            consecutive: 0,
        }
    }

    pub fn push(&mut self, level: u32, value: f64) {
        let delta = self.trace.last().map(|p| (value - p.value).abs());
        if let Some(d) = delta {
            if d < self.tol {
                self.consecutive += 1;
            } else {
                self.consecutive = 0;
            }
        }
        self.trace.push(LevelValue { level, value, delta });
    }

    pub fn converged(&self) -> bool {
        self.consecutive >= 3
    }

    pub fn last_value(&self) -> Option<f64> {
        self.trace.last().map(|l| l.value)
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.trace.iter().filter_map(|l| l.delta).collect()
    }

    pub fn into_report(self) -> LimitReport {
        let converged = self.consecutive >= 3;
        LimitReport {
            value: self.trace.last().map(|l| l.value).unwrap_or(f64::NAN),
            converged,
            tol: self.tol,
            levels: self.trace.len() as u32,
            trace: self.trace,
        }
    }
}

/// Boundary sum `sum_{bd B_k} u(x) dn v(x)` as a limit over the exhaustion.
///
/// `u` and `v` must be evaluable on every inspected ball. The report is
/// returned whether or not the limit converged; check the flag.
pub fn boundary_sum(
    net: &Network,
    u: &dyn Field,
    v: &dyn Field,
    k_max: u32,
    tol: f64,
    schedule: Schedule,
) -> Result<LimitReport> {
    let mut tracker = LimitTracker::new(tol);
    for k in schedule.levels(k_max) {
        let t = truncate(net, k, Flavor::Free)?;
        let mut s = 0.0;
        for x in &boundary_of(&t).boundary {
            let ux = u.value(x).ok_or_else(|| Error::WindowTooSmall {
                vertex: x.to_string(),
                context: "boundary sum left factor",
            })?;
            s += ux * normal_derivative(&t, v, x)?;
        }
        tracker.push(k, s);
        if tracker.converged() {
            break;
        }
    }
    Ok(tracker.into_report())
}
