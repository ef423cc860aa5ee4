//! Core graph model: weighted networks, potentials, Laplacian, and energy.
//!
//! A network is a connected graph with symmetric positive conductances and a
//! marked origin. Networks come in two sources:
//!
//! * finite, built from an explicit edge list or parsed from a network file;
//! * generated, backed by a neighbor function over a structured vertex set
//!   (the built-in models in [`crate::models`]).
//!
//! Conventions used throughout the crate:
//!
//! * conductance `c(x)` is the sum of edge conductances at `x`;
//! * the Laplacian acts by `(Lv)(x) = sum_y c_xy (v(x) - v(y))`;
//! * the Dirichlet energy is
//!   `E(u, v) = 1/2 sum_{x,y} c_xy (u(x) - u(y)) (v(x) - v(y))`,
//!   where each edge is counted once;
//! * potentials are partial functions on vertices, carried on an explicit
//!   window, optionally pinned to zero at an anchor vertex.
//!
//! On a finite network the summation-by-parts identity
//! `E(u, v) = sum_x u(x) (Lv)(x)` holds exactly; the exhaustion machinery in
//! [`crate::exhaust`] extends it to infinite networks with boundary terms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Vertex of a network.
///
/// Structured variants serve the generated models; `Name` serves networks read
/// from files (numeric-looking ids are normalized to `Int` so that file and
/// model addressing agree). `Infinity` is reserved for the auxiliary vertex a
/// wired truncation introduces and never appears in a parent network.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Vertex {
    /// Integer site of a chain model on the integers or half-integers.
    Int(i64),
    /// Arm vertex of a star: branch index and distance from the join, distance >= 1.
    Branch(u32, u32),
    /// Ladder vertex: rail (0 or 1) and position along the rail.
    Rail(u8, u32),
    /// Binary tree vertex in heap addressing: root is 1, children of k are 2k and 2k+1.
    Node(u64),
    /// Lattice-join vertex: copy index, coordinates, and the dimension in use.
    Patch { copy: u16, coord: [i8; 4], dim: u8 },
    /// Named vertex of a network read from a file.
    Name(String),
    /// The shorted complement a wired truncation adds.
    Infinity,
}

impl Vertex {
    fn rank(&self) -> u8 {
        match self {
            Vertex::Int(_) => 0,
            Vertex::Branch(..) => 1,
            Vertex::Rail(..) => 2,
            Vertex::Node(_) => 3,
            Vertex::Patch { .. } => 4,
            Vertex::Name(_) => 5,
            Vertex::Infinity => 6,
        }
    }
}

impl Ord for Vertex {
    fn cmp(&self, other: &Self) -> Ordering {
        use Vertex::*;
        match (self, other) {
            (Int(a), Int(b)) => a.cmp(b),
            (Branch(a, b), Branch(c, d)) => (a, b).cmp(&(c, d)),
            (Rail(a, b), Rail(c, d)) => (a, b).cmp(&(c, d)),
            (Node(a), Node(b)) => a.cmp(b),
            (
                Patch { copy: a, coord: x, .. },
                Patch { copy: b, coord: y, .. },
            ) => (a, x).cmp(&(b, y)),
            (Name(a), Name(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Vertex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Int(n) => write!(f, "{n}"),
            Vertex::Branch(b, d) => write!(f, "{b}:{d}"),
            Vertex::Rail(s, n) => write!(f, "{}{n}", if *s == 0 { 'x' } else { 'y' }),
            Vertex::Node(a) => {
                write!(f, ".")?;
                // Bits below the leading one, most significant first: the root path.
                let depth = 63 - a.leading_zeros();
                for i in (0..depth).rev() {
                    write!(f, "{}", (a >> i) & 1)?;
                }
                Ok(())
            }
            Vertex::Patch { copy, coord, dim } => {
                write!(f, "{copy}:(")?;
                for i in 0..*dim as usize {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", coord[i])?;
                }
                write!(f, ")")
            }
            Vertex::Name(s) => write!(f, "{s}"),
            Vertex::Infinity => write!(f, "inf"),
        }
    }
}

/// Parses the textual vertex syntax used by the CLI and the file format.
///
/// `inf`, integers, `.y<bits>` tree paths (`.` is the root, `.01` the path
/// left-right), `x3`/`y3` ladder rails, `b:d` star arms, `c:(x,y,z)` lattice
/// patches; anything else is a `Name`.
pub fn parse_vertex(s: &str) -> Result<Vertex> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::BadParam("empty vertex token".into()));
    }
    if s == "inf" {
        return Ok(Vertex::Infinity);
    }
    if let Ok(n) = s.parse::<i64>() {
        return Ok(Vertex::Int(n));
    }
    if let Some(bits) = s.strip_prefix('.') {
        if bits.chars().all(|c| c == '0' || c == '1') {
            if bits.len() > 60 {
                return Err(Error::BadParam(format!("tree path too deep: {s}")));
            }
            let mut a: u64 = 1;
            for c in bits.chars() {
                a = a * 2 + if c == '1' { 1 } else { 0 };
            }
            return Ok(Vertex::Node(a));
        }
    }
    if let Some(rest) = s.strip_prefix('x') {
        if let Ok(n) = rest.parse::<u32>() {
            return Ok(Vertex::Rail(0, n));
        }
    }
    if let Some(rest) = s.strip_prefix('y') {
        if let Ok(n) = rest.parse::<u32>() {
            return Ok(Vertex::Rail(1, n));
        }
    }
    if let Some((head, tail)) = s.split_once(':') {
        if let Ok(copy) = head.parse::<u32>() {
            if let Ok(d) = tail.parse::<u32>() {
                return Ok(Vertex::Branch(copy, d));
            }
            if let Some(inner) = tail.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
                let parts: Vec<_> = inner.split(',').collect();
                if (1..=4).contains(&parts.len()) && copy <= u16::MAX as u32 {
                    let mut coord = [0i8; 4];
                    for (i, p) in parts.iter().enumerate() {
                        coord[i] = p
                            .trim()
                            .parse::<i8>()
                            .map_err(|_| Error::BadParam(format!("bad coordinate in `{s}`")))?;
                    }
                    return Ok(Vertex::Patch {
                        copy: copy as u16,
                        coord,
                        dim: parts.len() as u8,
                    });
                }
            }
        }
    }
    Ok(Vertex::Name(s.to_string()))
}

/// Neighbor function behind a generated network.
///
/// Implementations must be symmetric (`y` listing `x` with the same
/// conductance whenever `x` lists `y`), locally finite, and must return `None`
/// for vertices outside the model. They must never emit [`Vertex::Infinity`].
pub trait Generator: Send + Sync {
    fn neighbors(&self, x: &Vertex) -> Option<Vec<(Vertex, f64)>>;
    fn describe(&self) -> String;
}

#[derive(Clone)]
struct FiniteGraph {
    verts: Vec<Vertex>,
    index: HashMap<Vertex, usize>,
    adj: Vec<Vec<(usize, f64)>>,
}

enum Source {
    Finite(FiniteGraph),
    Generated(Arc<dyn Generator>),
}

/// A connected resistance network with a marked origin.
pub struct Network {
    source: Source,
    origin: Vertex,
    label: String,
}

impl std::fmt::Debug for Network {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Network")
            .field("label", &self.label)
            .field("origin", &self.origin)
            .field("finite", &self.is_finite())
            .finish()
    }
}

impl Network {
    /// Builds a finite network from an edge list.
    ///
    /// Parallel edges are merged by summing conductances and zero-conductance
    /// edges are dropped; self loops, negative or non-finite conductances, and
    /// graphs with vertices unreachable from the origin are rejected.
    pub fn finite(edges: &[(Vertex, Vertex, f64)], origin: Vertex) -> Result<Network> {
        let mut merged: BTreeMap<(Vertex, Vertex), f64> = BTreeMap::new();
        for (a, b, c) in edges {
            if !c.is_finite() || *c < 0.0 {
                return Err(Error::BadParam(format!(
                    "conductance {c} on edge `{a}` `{b}` is not a nonnegative finite number"
                )));
            }
            if a == b {
                return Err(Error::BadParam(format!("self loop at `{a}`")));
            }
            if *c == 0.0 {
                continue;
            }
            let key = if a <= b {
                (a.clone(), b.clone())
            } else {
                (b.clone(), a.clone())
            };
            *merged.entry(key).or_insert(0.0) += c;
        }
        let mut vset: BTreeSet<Vertex> = BTreeSet::new();
        vset.insert(origin.clone());
        for (a, b) in merged.keys() {
            vset.insert(a.clone());
            vset.insert(b.clone());
        }
        let verts: Vec<Vertex> = vset.into_iter().collect();
        let index: HashMap<Vertex, usize> =
            verts.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); verts.len()];
        for ((a, b), c) in &merged {
            let (i, j) = (index[a], index[b]);
            adj[i].push((j, *c));
            adj[j].push((i, *c));
        }
        for list in &mut adj {
            list.sort_by_key(|(j, _)| *j);
        }
        let g = FiniteGraph { verts, index, adj };
        let net = Network {
            source: Source::Finite(g),
            origin,
            label: "finite".into(),
        };
        let reach = net.ball_indexed(u32::MAX)?.len();
        let total = net.vertex_count().unwrap();
        if reach < total {
            return Err(Error::Disconnected(total - reach));
        }
        Ok(net)
    }

    /// Wraps a neighbor generator as a network rooted at `origin`.
    pub fn generated(gen: Arc<dyn Generator>, origin: Vertex) -> Result<Network> {
        let label = gen.describe();
        if gen.neighbors(&origin).is_none() {
            return Err(Error::UnknownVertex(origin.to_string()));
        }
        Ok(Network {
            source: Source::Generated(gen),
            origin,
            label,
        })
    }

    pub fn origin(&self) -> &Vertex {
        &self.origin
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.source, Source::Finite(_))
    }

    /// Number of vertices; `None` for generated networks.
    pub fn vertex_count(&self) -> Option<usize> {
        match &self.source {
            Source::Finite(g) => Some(g.verts.len()),
            Source::Generated(_) => None,
        }
    }

    /// All vertices of a finite network, in sorted order.
    pub fn vertices(&self) -> Result<Vec<Vertex>> {
        match &self.source {
            Source::Finite(g) => Ok(g.verts.clone()),
            Source::Generated(_) => Err(Error::BadParam(
                "vertex enumeration needs a finite network".into(),
            )),
        }
    }

    pub fn contains(&self, x: &Vertex) -> bool {
        match &self.source {
            Source::Finite(g) => g.index.contains_key(x),
            Source::Generated(gen) => gen.neighbors(x).is_some(),
        }
    }

    /// Neighbors of `x` with conductances, sorted by vertex.
    pub fn neighbors(&self, x: &Vertex) -> Result<Vec<(Vertex, f64)>> {
        match &self.source {
            Source::Finite(g) => {
                let i = *g
                    .index
                    .get(x)
                    .ok_or_else(|| Error::UnknownVertex(x.to_string()))?;
                Ok(g.adj[i]
                    .iter()
                    .map(|&(j, c)| (g.verts[j].clone(), c))
                    .collect())
            }
            Source::Generated(gen) => {
                let mut list = gen
                    .neighbors(x)
                    .ok_or_else(|| Error::UnknownVertex(x.to_string()))?;
                list.sort_by(|a, b| a.0.cmp(&b.0));
                Ok(list)
            }
        }
    }

    /// Edge conductance between `x` and `y`, if the edge exists.
    pub fn edge(&self, x: &Vertex, y: &Vertex) -> Result<Option<f64>> {
        Ok(self
            .neighbors(x)?
            .into_iter()
            .find(|(v, _)| v == y)
            .map(|(_, c)| c))
    }

    /// Total conductance `c(x)` at a vertex.
    pub fn conductance_sum(&self, x: &Vertex) -> Result<f64> {
        Ok(self.neighbors(x)?.iter().map(|(_, c)| c).sum())
    }

    /// One-step transition distribution of the associated random walk,
    /// `p(x, y) = c_xy / c(x)`, sorted by vertex. Probabilities sum to one
    /// within 1e-12.
    pub fn transition_distribution(&self, x: &Vertex) -> Result<Vec<(Vertex, f64)>> {
        let nbrs = self.neighbors(x)?;
        let total: f64 = nbrs.iter().map(|(_, c)| c).sum();
        if total <= 0.0 {
            return Err(Error::BadParam(format!("isolated vertex `{x}`")));
        }
        let dist: Vec<(Vertex, f64)> = nbrs.into_iter().map(|(v, c)| (v, c / total)).collect();
        debug_assert!((dist.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-12);
        Ok(dist)
    }

    fn ball_indexed(&self, radius: u32) -> Result<Vec<(Vertex, u32)>> {
        let mut dist: HashMap<Vertex, u32> = HashMap::new();
        let mut order: Vec<(Vertex, u32)> = Vec::new();
        dist.insert(self.origin.clone(), 0);
        order.push((self.origin.clone(), 0));
        let mut frontier = vec![self.origin.clone()];
        let mut d = 0u32;
        while !frontier.is_empty() && d < radius {
            d += 1;
            let mut layer: BTreeSet<Vertex> = BTreeSet::new();
            for v in &frontier {
                for (w, _) in self.neighbors(v)? {
                    if !dist.contains_key(&w) {
                        layer.insert(w);
                    }
                }
            }
            frontier = layer.into_iter().collect();
            for w in &frontier {
                dist.insert(w.clone(), d);
                order.push((w.clone(), d));
            }
        }
        Ok(order)
    }

    /// Vertices within graph distance `radius` of the origin, in breadth-first
    /// order with each layer sorted. Deterministic for a given network.
    pub fn ball(&self, radius: u32) -> Result<Vec<Vertex>> {
        Ok(self
            .ball_indexed(radius)?
            .into_iter()
            .map(|(v, _)| v)
            .collect())
    }

    /// Graph distances from the origin for the ball of the given radius.
    pub fn distances_up_to(&self, radius: u32) -> Result<BTreeMap<Vertex, u32>> {
        Ok(self.ball_indexed(radius)?.into_iter().collect())
    }
}

/// Anything evaluable on vertices. `None` means "outside my window".
pub trait Field {
    fn value(&self, x: &Vertex) -> Option<f64>;
}

/// Wraps a closure as a total [`Field`].
pub struct FnField<F: Fn(&Vertex) -> f64>(pub F);

impl<F: Fn(&Vertex) -> f64> Field for FnField<F> {
    fn value(&self, x: &Vertex) -> Option<f64> {
        Some((self.0)(x))
    }
}

/// A function on a finite window of vertices.
///
/// Kernel-type potentials are pinned to zero at an anchor vertex (the network
/// origin for energy kernels, the wired vertex for monopoles); scratch
/// potentials built with [`Potential::raw`] carry no anchor.
#[derive(Clone, Debug)]
pub struct Potential {
    values: BTreeMap<Vertex, f64>,
    anchor: Option<Vertex>,
}

impl Potential {
    /// A potential with no anchor convention.
    pub fn raw(values: BTreeMap<Vertex, f64>) -> Potential {
        Potential {
            values,
            anchor: None,
        }
    }

    /// Pins the representative to zero at `anchor`, which must be in the
    /// window; all values are shifted so the anchor value is exactly `0.0`.
    pub fn anchored(anchor: Vertex, mut values: BTreeMap<Vertex, f64>) -> Result<Potential> {
        let base = *values
            .get(&anchor)
            .ok_or_else(|| Error::WindowTooSmall {
                vertex: anchor.to_string(),
                context: "anchoring a potential",
            })?;
        if base != 0.0 {
            for v in values.values_mut() {
                *v -= base;
            }
        }
        values.insert(anchor.clone(), 0.0);
        Ok(Potential {
            values,
            anchor: Some(anchor),
        })
    }

    /// Tabulates a field over a window (no anchor). Fails if the field is
    /// undefined anywhere on the window.
    pub fn from_field(f: &dyn Field, window: &[Vertex]) -> Result<Potential> {
        let mut values = BTreeMap::new();
        for v in window {
            let x = f.value(v).ok_or_else(|| Error::WindowTooSmall {
                vertex: v.to_string(),
                context: "tabulating a field",
            })?;
            values.insert(v.clone(), x);
        }
        Ok(Potential::raw(values))
    }

    /// Indicator of `x` over a window (no anchor).
    pub fn indicator(x: &Vertex, window: &[Vertex]) -> Potential {
        let values = window
            .iter()
            .map(|v| (v.clone(), if v == x { 1.0 } else { 0.0 }))
            .collect();
        Potential::raw(values)
    }

    pub fn anchor(&self) -> Option<&Vertex> {
        self.anchor.as_ref()
    }

    pub fn get(&self, x: &Vertex) -> Option<f64> {
        self.values.get(x).copied()
    }

    pub fn window(&self) -> impl Iterator<Item = &Vertex> {
        self.values.keys()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vertex, f64)> {
        self.values.iter().map(|(v, &x)| (v, x))
    }

    pub fn contains(&self, x: &Vertex) -> bool {
        self.values.contains_key(x)
    }

    /// Re-pins the representative at a different window vertex.
    pub fn re_anchor(&self, anchor: &Vertex) -> Result<Potential> {
        Potential::anchored(anchor.clone(), self.values.clone())
    }

    /// Pointwise difference on the common window; anchors must agree if both
    /// are present.
    pub fn sub(&self, other: &Potential) -> Result<Potential> {
        if let (Some(a), Some(b)) = (&self.anchor, &other.anchor) {
            if a != b {
                return Err(Error::WindowMismatch(format!(
                    "anchors differ: `{a}` vs `{b}`"
                )));
            }
        }
        let values: BTreeMap<Vertex, f64> = self
            .values
            .iter()
            .filter_map(|(v, &x)| other.get(v).map(|y| (v.clone(), x - y)))
            .collect();
        if values.is_empty() {
            return Err(Error::WindowMismatch("windows are disjoint".into()));
        }
        Ok(Potential {
            values,
            anchor: self.anchor.clone().or_else(|| other.anchor.clone()),
        })
    }

    /// Linear combination over the common window of all terms.
    pub fn combine(terms: &[(f64, &Potential)]) -> Result<Potential> {
        let first = terms
            .first()
            .ok_or_else(|| Error::BadParam("empty combination".into()))?;
        let mut keys: BTreeSet<Vertex> = first.1.values.keys().cloned().collect();
        for (_, p) in &terms[1..] {
            keys.retain(|k| p.contains(k));
        }
        if keys.is_empty() {
            return Err(Error::WindowMismatch("windows are disjoint".into()));
        }
        let values = keys
            .into_iter()
            .map(|k| {
                let s = terms.iter().map(|(a, p)| a * p.get(&k).unwrap()).sum();
                (k, s)
            })
            .collect();
        Ok(Potential {
            values,
            anchor: first.1.anchor.clone(),
        })
    }
}

impl Field for Potential {
    fn value(&self, x: &Vertex) -> Option<f64> {
        self.get(x)
    }
}

impl Field for &Potential {
    fn value(&self, x: &Vertex) -> Option<f64> {
        self.get(x)
    }
}

/// Applies the Laplacian `(Lu)(x) = sum_y c_xy (u(x) - u(y))` at one vertex.
///
/// Needs `x` and every neighbor of `x` inside the window of `u`.
pub fn laplacian_apply(net: &Network, u: &Potential, x: &Vertex) -> Result<f64> {
    let nbrs = net.neighbors(x)?;
    let ux = u.get(x).ok_or_else(|| Error::WindowTooSmall {
        vertex: x.to_string(),
        context: "laplacian at the center vertex",
    })?;
    let mut acc = 0.0;
    for (y, c) in nbrs {
        let uy = u.get(&y).ok_or_else(|| Error::WindowTooSmall {
            vertex: y.to_string(),
            context: "laplacian needs every neighbor",
        })?;
        acc += c * (ux - uy);
    }
    Ok(acc)
}

/// Dirichlet energy pairing restricted to edges with both endpoints in
/// `edge_window`:
/// `E_W(u, v) = sum_{edges xy in W} c_xy (u(x) - u(y)) (v(x) - v(y))`.
///
/// The window must be contained in the windows of both `u` and `v`.
pub fn energy(net: &Network, u: &Potential, v: &Potential, edge_window: &[Vertex]) -> Result<f64> {
    let set: BTreeSet<&Vertex> = edge_window.iter().collect();
    for x in edge_window {
        if u.get(x).is_none() || v.get(x).is_none() {
            return Err(Error::WindowMismatch(format!(
                "edge window vertex `{x}` is outside a potential window"
            )));
        }
    }
    let mut acc = 0.0;
    for x in edge_window {
        let (ux, vx) = (u.get(x).unwrap(), v.get(x).unwrap());
        for (y, c) in net.neighbors(x)? {
            // Each unordered edge exactly once.
            if set.contains(&y) && *x < y {
                let (uy, vy) = (u.get(&y).unwrap(), v.get(&y).unwrap());
                acc += c * (ux - uy) * (vx - vy);
            }
        }
    }
    Ok(acc)
}

/// Full-graph energy of a finite network.
pub fn energy_total(net: &Network, u: &Potential, v: &Potential) -> Result<f64> {
    energy(net, u, v, &net.vertices()?)
}

// ---------------------------------------------------------------------------
// Network file format
// ---------------------------------------------------------------------------

/// Parses the network file format:
///
/// ```text
/// # conductances are positive reals
/// @origin a
/// a b 1.5
/// b c 2e-3
/// ```
///
/// One edge per line as `<id> <id> <conductance>`; `#` starts a comment;
/// `@origin <id>` names the origin (default: the first endpoint of the first
/// edge; a later directive overrides an earlier one). Numeric ids become
/// integer vertices. Errors carry 1-based line numbers.
pub fn parse_network(text: &str) -> Result<Network> {
    let mut edges: Vec<(Vertex, Vertex, f64)> = Vec::new();
    let mut origin: Option<Vertex> = None;
    let mut first_endpoint: Option<Vertex> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('@') {
            let mut toks = rest.split_whitespace();
            match (toks.next(), toks.next(), toks.next()) {
                (Some("origin"), Some(id), None) => {
                    origin = Some(parse_vertex(id).map_err(|e| Error::Parse {
                        line,
                        msg: e.to_string(),
                    })?);
                }
                _ => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown directive `@{rest}`"),
                    })
                }
            }
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected `<id> <id> <conductance>`, got {} tokens", toks.len()),
            });
        }
        let a = parse_vertex(toks[0]).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        let b = parse_vertex(toks[1]).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        let c: f64 = toks[2].parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad conductance `{}`", toks[2]),
        })?;
        if !c.is_finite() || c < 0.0 {
            return Err(Error::Parse {
                line,
                msg: format!("conductance must be a nonnegative finite number, got `{c}`"),
            });
        }
        if a == b {
            return Err(Error::Parse {
                line,
                msg: format!("self loop at `{a}`"),
            });
        }
        if matches!(a, Vertex::Infinity) || matches!(b, Vertex::Infinity) {
            return Err(Error::Parse {
                line,
                msg: "`inf` is reserved for wired truncations".into(),
            });
        }
        if first_endpoint.is_none() {
            first_endpoint = Some(a.clone());
        }
        edges.push((a, b, c));
    }
    let origin = origin.or(first_endpoint).ok_or(Error::Parse {
        line: text.lines().count().max(1),
        msg: "no edges in file".into(),
    })?;
    Network::finite(&edges, origin)
}

/// Writes a finite network in the canonical file form (origin directive first,
/// edges sorted). Round-trips through [`parse_network`].
pub fn write_network(net: &Network) -> Result<String> {
    let mut out = format!("@origin {}\n", net.origin());
    let mut lines = Vec::new();
    for x in net.vertices()? {
        for (y, c) in net.neighbors(&x)? {
            if x < y {
                lines.push(format!("{x} {y} {c}"));
            }
        }
    }
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn v(s: &str) -> Vertex {
        parse_vertex(s).unwrap()
    }

    pub(crate) fn triangle() -> Network {
        Network::finite(
            &[
                (v("a"), v("b"), 1.0),
                (v("b"), v("c"), 1.0),
                (v("a"), v("c"), 1.0),
            ],
            v("a"),
        )
        .unwrap()
    }

    #[test]
    fn laplacian_of_indicator_on_triangle() {
        let net = triangle();
        let u = Potential::indicator(&v("a"), &net.vertices().unwrap());
        assert_eq!(laplacian_apply(&net, &u, &v("a")).unwrap(), 2.0);
        assert_eq!(laplacian_apply(&net, &u, &v("b")).unwrap(), -1.0);
        assert_eq!(laplacian_apply(&net, &u, &v("c")).unwrap(), -1.0);
    }

    #[test]
    fn laplacian_window_errors() {
        let net = triangle();
        let u = Potential::indicator(&v("a"), &[v("a"), v("b")]);
        match laplacian_apply(&net, &u, &v("a")) {
            Err(Error::WindowTooSmall { vertex, .. }) => assert_eq!(vertex, "c"),
            other => panic!("expected WindowTooSmall, got {other:?}"),
        }
        let full = Potential::indicator(&v("a"), &net.vertices().unwrap());
        assert!(matches!(
            laplacian_apply(&net, &full, &v("zz")),
            Err(Error::UnknownVertex(_))
        ));
    }

    #[test]
    fn energy_of_dirac_is_vertex_conductance() {
        // Single edge of conductance 5: E(delta_x) = c(x) = 5.
        let net = Network::finite(&[(v("p"), v("q"), 5.0)], v("p")).unwrap();
        let d = Potential::indicator(&v("p"), &net.vertices().unwrap());
        assert_eq!(energy_total(&net, &d, &d).unwrap(), 5.0);
        // Adjacent Diracs pair to minus the edge conductance.
        let dq = Potential::indicator(&v("q"), &net.vertices().unwrap());
        assert_eq!(energy_total(&net, &d, &dq).unwrap(), -5.0);
    }

    #[test]
    fn dirac_pairing_equals_laplacian() {
        let net = triangle();
        let w = net.vertices().unwrap();
        let u = Potential::raw(
            [(v("a"), 0.3), (v("b"), -1.2), (v("c"), 0.7)]
                .into_iter()
                .collect(),
        );
        for x in &w {
            let d = Potential::indicator(x, &w);
            let lhs = energy_total(&net, &d, &u).unwrap();
            let rhs = laplacian_apply(&net, &u, x).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn finite_summation_by_parts() {
        let net = Network::finite(
            &[
                (v("a"), v("b"), 2.0),
                (v("b"), v("c"), 0.5),
                (v("c"), v("d"), 1.25),
                (v("a"), v("d"), 3.0),
                (v("b"), v("d"), 0.75),
            ],
            v("a"),
        )
        .unwrap();
        let u = Potential::raw(
            [(v("a"), 1.0), (v("b"), -0.25), (v("c"), 0.5), (v("d"), 2.0)]
                .into_iter()
                .collect(),
        );
        let w = Potential::raw(
            [(v("a"), 0.0), (v("b"), 1.5), (v("c"), -2.0), (v("d"), 0.25)]
                .into_iter()
                .collect(),
        );
        let e = energy_total(&net, &u, &w).unwrap();
        let s: f64 = net
            .vertices()
            .unwrap()
            .iter()
            .map(|x| u.get(x).unwrap() * laplacian_apply(&net, &w, x).unwrap())
            .sum();
        assert!((e - s).abs() < 1e-12, "E = {e}, sum = {s}");
    }

    #[test]
    fn energy_window_mismatch() {
        let net = triangle();
        let u = Potential::indicator(&v("a"), &[v("a"), v("b")]);
        let w = net.vertices().unwrap();
        assert!(matches!(
            energy(&net, &u, &u, &w),
            Err(Error::WindowMismatch(_))
        ));
    }

    #[test]
    fn transition_distribution_normalizes() {
        let net = Network::finite(
            &[(v("a"), v("b"), 2.0), (v("b"), v("c"), 4.0)],
            v("a"),
        )
        .unwrap();
        let dist = net.transition_distribution(&v("b")).unwrap();
        assert_eq!(dist, vec![(v("a"), 1.0 / 3.0), (v("c"), 2.0 / 3.0)]);
    }

    #[test]
    fn build_rejections() {
        assert!(matches!(
            Network::finite(&[(v("a"), v("a"), 1.0)], v("a")),
            Err(Error::BadParam(_))
        ));
        assert!(matches!(
            Network::finite(&[(v("a"), v("b"), -1.0)], v("a")),
            Err(Error::BadParam(_))
        ));
        // Zero-conductance edges are dropped along with any vertex they
        // alone would have introduced.
        let dropped =
            Network::finite(&[(v("a"), v("c"), 1.0), (v("a"), v("b"), 0.0)], v("a")).unwrap();
        assert_eq!(dropped.vertex_count(), Some(2));
        assert!(!dropped.contains(&v("b")));
        assert!(matches!(
            Network::finite(
                &[(v("a"), v("b"), 1.0), (v("c"), v("d"), 1.0)],
                v("a")
            ),
            Err(Error::Disconnected(2))
        ));
    }

    #[test]
    fn parallel_edges_merge() {
        let net = Network::finite(
            &[(v("a"), v("b"), 1.0), (v("b"), v("a"), 2.5)],
            v("a"),
        )
        .unwrap();
        assert_eq!(net.edge(&v("a"), &v("b")).unwrap(), Some(3.5));
    }

    #[test]
    fn ball_orders_layers() {
        let net = Network::finite(
            &[
                (v("0"), v("1"), 1.0),
                (v("0"), v("-1"), 1.0),
                (v("1"), v("2"), 1.0),
            ],
            v("0"),
        )
        .unwrap();
        assert_eq!(net.ball(1).unwrap(), vec![v("0"), v("-1"), v("1")]);
        assert_eq!(net.ball(5).unwrap(), vec![v("0"), v("-1"), v("1"), v("2")]);
        let d = net.distances_up_to(5).unwrap();
        assert_eq!(d[&v("2")], 2);
    }

    #[test]
    fn parse_round_trip_and_origin_directive() {
        let text = "# demo\n@origin b\na b 1.5\nb c 2e-3  # tail comment\n";
        let net = parse_network(text).unwrap();
        assert_eq!(net.origin(), &v("b"));
        assert_eq!(net.edge(&v("b"), &v("c")).unwrap(), Some(2e-3));
        let emitted = write_network(&net).unwrap();
        let again = parse_network(&emitted).unwrap();
        assert_eq!(write_network(&again).unwrap(), emitted);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_network("a b 1.0\na c nope\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_network("a b 1.0\n\nc c 2.0\n") {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("self loop"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_network("@origin a\n@bogus x\na b 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            parse_network("# nothing\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn numeric_ids_normalize_to_int() {
        let net = parse_network("0 1 2.0\n1 2 4.0\n").unwrap();
        assert_eq!(net.origin(), &Vertex::Int(0));
        let dist = net.transition_distribution(&Vertex::Int(1)).unwrap();
        assert_eq!(
            dist,
            vec![(Vertex::Int(0), 1.0 / 3.0), (Vertex::Int(2), 2.0 / 3.0)]
        );
    }

    #[test]
    fn vertex_display_and_parse() {
        for s in ["5", "-3", "2:7", "x4", "y0", ".", ".01", "0:(1,0,-1)", "hub", "inf"] {
            assert_eq!(v(s).to_string(), s);
        }
        assert_eq!(v("."), Vertex::Node(1));
        assert_eq!(v(".01"), Vertex::Node(5));
        assert_eq!(v(".0"), Vertex::Node(2));
    }

    #[test]
    fn anchoring_pins_exact_zero() {
        let p = Potential::anchored(
            v("a"),
            [(v("a"), 0.3), (v("b"), 1.3)].into_iter().collect(),
        )
        .unwrap();
        assert_eq!(p.get(&v("a")), Some(0.0));
        assert_eq!(p.get(&v("b")), Some(1.0));
        assert!(Potential::anchored(v("zz"), [(v("a"), 0.3)].into_iter().collect()).is_err());
    }
}
