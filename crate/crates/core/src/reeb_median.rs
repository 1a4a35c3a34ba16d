//! Contour trees of sphere fields and the median quasi-state.
//!
//! A field's contour tree carries the lumped vertex measure: critical
//! vertices become nodes with their own mass, regular vertices become ordered
//! atoms on the arcs. The median is the point whose removal leaves
//! components of measure at most 1/2, and ζ_med(H) is its level.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::sphere_field::{poisson_bracket, ScalarField, SphereMesh};

/// Generic direction used to order equal values.
pub const TIE_DIRECTION: Vec3 = [0.097_590_007_294_853_32, 0.195_180_014_589_706_64, 0.975_900_072_948_533_2];

/// Slack for detecting an exact split of the measure into halves.
pub const HALF_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReebNode {
    /// Mesh vertex realizing the node, if built from a field.
    pub vertex: Option<usize>,
    pub level: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub vertex: Option<usize>,
    pub level: f64,
    pub mass: f64,
}

/// Measure carried by the open arc.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EdgeMeasure {
    /// Point masses ordered from the lower end to the upper end.
    Atoms { atoms: Vec<Atom> },
    /// Mass spread uniformly in level along the arc.
    Uniform { mass: f64 },
}

impl EdgeMeasure {
    pub fn total(&self) -> f64 {
        match self {
            EdgeMeasure::Atoms { atoms } => atoms.iter().map(|a| a.mass).sum(),
            EdgeMeasure::Uniform { mass } => *mass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReebEdge {
    pub lower: usize,
    pub upper: usize,
    pub measure: EdgeMeasure,
}

/// Where a mesh vertex sits in the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Place {
    Node(usize),
    Atom { edge: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReebGraph {
    pub nodes: Vec<ReebNode>,
    pub edges: Vec<ReebEdge>,
    #[serde(skip)]
    pub places: Vec<Place>,
    #[serde(skip)]
    incident: Vec<Vec<usize>>,
}

impl ReebGraph {
    /// Assembles a tree from explicit nodes and edges.
    pub fn from_parts(nodes: Vec<ReebNode>, edges: Vec<ReebEdge>) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::Config("a Reeb graph needs at least one node".into()));
        }
        let mut incident = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            if e.lower >= n || e.upper >= n || e.lower == e.upper {
                return Err(Error::Config(format!("edge {i} has invalid endpoints")));
            }
            if nodes[e.lower].level > nodes[e.upper].level {
                return Err(Error::Config(format!("edge {i} runs downward")));
            }
            incident[e.lower].push(i);
            incident[e.upper].push(i);
        }
        let g = ReebGraph {
            nodes,
            edges,
            places: Vec::new(),
            incident,
        };
        if g.edges.len() + 1 != n || !g.connected() {
            return Err(Error::Disconnected);
        }
        let total = g.total_measure();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("total measure {total} is not 1")));
        }
        Ok(g)
    }

    fn connected(&self) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &e in &self.incident[v] {
                let w = self.other(e, v);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn other(&self, e: usize, v: usize) -> usize {
        let edge = &self.edges[e];
        if edge.lower == v {
            edge.upper
        } else {
            edge.lower
        }
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }

    pub fn leaves(&self) -> usize {
        (0..self.nodes.len()).filter(|&v| self.degree(v) == 1).count()
    }

    /// Nodes of degree at least three.
    pub fn branch_nodes(&self) -> usize {
        (0..self.nodes.len()).filter(|&v| self.degree(v) >= 3).count()
    }

    pub fn node_measure(&self) -> f64 {
        self.nodes.iter().map(|n| n.mass).sum()
    }

    pub fn edge_measure(&self) -> f64 {
        self.edges.iter().map(|e| e.measure.total()).sum()
    }

    pub fn total_measure(&self) -> f64 {
        self.node_measure() + self.edge_measure()
    }

    /// Mass of the component containing `v` once edge `cut` is removed.
    pub fn component_mass(&self, v: usize, cut: usize) -> f64 {
        let mut total = 0.0;
        let mut stack = vec![(v, cut)];
        while let Some((x, from)) = stack.pop() {
            total += self.nodes[x].mass;
            for &e in &self.incident[x] {
                if e != from {
                    total += self.edges[e].measure.total();
                    stack.push((self.other(e, x), e));
                }
            }
        }
        total
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Sort key: value, then height along [`TIE_DIRECTION`], then index.
fn order(mesh: &SphereMesh, values: &[f64]) -> Vec<usize> {
    let heights: Vec<f64> = mesh.vertices().iter().map(|&p| geom::dot(p, TIE_DIRECTION)).collect();
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[a]
            .total_cmp(&values[b])
            .then(heights[a].total_cmp(&heights[b]))
            .then(a.cmp(&b))
    });
    idx
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Sweeps vertices in `seq` order, joining each with already-seen neighbours.
/// Returns for each vertex the earlier vertices it attaches to.
fn sweep(mesh: &SphereMesh, seq: &[usize], rank: &[usize], ascending: bool) -> Vec<Vec<usize>> {
    let n = seq.len();
    let mut uf = UnionFind::new(n);
    let mut head = vec![usize::MAX; n];
    let mut children = vec![Vec::new(); n];
    let before = |a: usize, b: usize| if ascending { rank[a] < rank[b] } else { rank[a] > rank[b] };
    for &v in seq {
        let mut roots: Vec<usize> = Vec::new();
        for &u in mesh.neighbors(v) {
            if before(u, v) {
                let r = uf.find(u);
                if !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
        for &r in &roots {
            children[v].push(head[r]);
            uf.parent[r] = v;
        }
        head[v] = v;
    }
    children
}

/// Contour tree by the join/split sweep and leaf-pruning merge.
pub fn build_reeb(h: &ScalarField) -> Result<ReebGraph> {
    let mesh = h.mesh();
    if !mesh.is_connected() {
        return Err(Error::Disconnected);
    }
    let values = h.values();
    let n = values.len();
    let seq = order(mesh, values);
    let mut rank = vec![0; n];
    for (i, &v) in seq.iter().enumerate() {
        rank[v] = i;
    }

    // sublevel tree: each vertex links down to the heads of merged components
    let s_down_raw = sweep(mesh, &seq, &rank, true);
    let rev: Vec<usize> = seq.iter().rev().copied().collect();
    let t_up_raw = sweep(mesh, &rev, &rank, false);

    let mut s_down: Vec<Vec<usize>> = s_down_raw;
    let mut s_up: Vec<Option<usize>> = vec![None; n];
    for v in 0..n {
        for &c in &s_down[v] {
            s_up[c] = Some(v);
        }
    }
    let mut t_up: Vec<Vec<usize>> = t_up_raw;
    let mut t_down: Vec<Option<usize>> = vec![None; n];
    for v in 0..n {
        for &c in &t_up[v] {
            t_down[c] = Some(v);
        }
    }

    let mut arcs: Vec<(usize, usize)> = Vec::with_capacity(n.saturating_sub(1));
    let mut alive = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n)
        .filter(|&v| t_up[v].len() + s_down[v].len() == 1)
        .collect();
    let mut remaining = n;
    while remaining > 1 {
        let v = match queue.pop_front() {
            Some(v) => v,
            None => return Err(Error::Config("contour tree merge stalled".into())),
        };
        if !alive[v] || t_up[v].len() + s_down[v].len() != 1 {
            continue;
        }
        alive[v] = false;
        remaining -= 1;
        if s_down[v].len() == 1 {
            // upper leaf: a maximum of the superlevel tree
            let w = t_down[v].ok_or_else(|| Error::Config("contour tree merge lost a vertex".into()))?;
            arcs.push((w, v));
            t_up[w].retain(|&c| c != v);
            let x = s_down[v][0];
            let p = s_up[v];
            s_up[x] = p;
            if let Some(p) = p {
                for c in s_down[p].iter_mut() {
                    if *c == v {
                        *c = x;
                    }
                }
            }
            queue.push_back(w);
            queue.push_back(x);
        } else {
            // lower leaf: a minimum of the sublevel tree
            let w = s_up[v].ok_or_else(|| Error::Config("contour tree merge lost a vertex".into()))?;
            arcs.push((v, w));
            s_down[w].retain(|&c| c != v);
            let x = t_up[v][0];
            let q = t_down[v];
            t_down[x] = q;
            if let Some(q) = q {
                for c in t_up[q].iter_mut() {
                    if *c == v {
                        *c = x;
                    }
                }
            }
            queue.push_back(w);
            queue.push_back(x);
        }
    }

    compress(mesh, values, &arcs)
}

/// Collapses chains of regular vertices into arcs with atoms.
fn compress(mesh: &SphereMesh, values: &[f64], arcs: &[(usize, usize)]) -> Result<ReebGraph> {
    let n = values.len();
    let mut up: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut down: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(lo, hi) in arcs {
        up[lo].push(hi);
        down[hi].push(lo);
    }
    let w = mesh.weights();
    let critical: Vec<bool> = (0..n).map(|v| !(up[v].len() == 1 && down[v].len() == 1)).collect();
    let mut node_id = vec![usize::MAX; n];
    let mut nodes = Vec::new();
    for v in 0..n {
        if critical[v] {
            node_id[v] = nodes.len();
            nodes.push(ReebNode {
                vertex: Some(v),
                level: values[v],
                mass: w[v],
            });
        }
    }
    let mut places = vec![Place::Node(0); n];
    let mut edges = Vec::new();
    for v in 0..n {
        if !critical[v] {
            continue;
        }
        places[v] = Place::Node(node_id[v]);
        for &start in &up[v] {
            let mut atoms = Vec::new();
            let mut x = start;
            while !critical[x] {
                places[x] = Place::Atom {
                    edge: edges.len(),
                    index: atoms.len(),
                };
                atoms.push(Atom {
                    vertex: Some(x),
                    level: values[x],
                    mass: w[x],
                });
                x = up[x][0];
            }
            edges.push(ReebEdge {
                lower: node_id[v],
                upper: node_id[x],
                measure: EdgeMeasure::Atoms { atoms },
            });
        }
    }
    let mut g = ReebGraph::from_parts(nodes, edges)?;
    g.places = places;
    Ok(g)
}

/// Location of a median in the tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MedianPlace {
    Node(usize),
    Atom { edge: usize, index: usize },
    /// Fraction of a uniform arc measured from the lower end.
    Interior { edge: usize, fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedianPoint {
    pub place: MedianPlace,
    pub level: f64,
    /// Set when the measure split into two exact halves; the higher of the
    /// two candidate points was taken.
    pub tie: bool,
    /// Measures of the components left after removing the point.
    pub components: Vec<f64>,
}

impl MedianPoint {
    pub fn is_balanced(&self) -> bool {
        self.components.iter().all(|&m| m <= 0.5 + 1e-9)
    }
}

/// Masses of the components of the tree with the point removed.
pub fn components_at(g: &ReebGraph, place: MedianPlace) -> Vec<f64> {
    match place {
        MedianPlace::Node(v) => g
            .incident(v)
            .iter()
            .map(|&e| g.edges[e].measure.total() + g.component_mass(g.other(e, v), e))
            .collect(),
        MedianPlace::Atom { edge, index } => {
            let e = &g.edges[edge];
            let atoms = match &e.measure {
                EdgeMeasure::Atoms { atoms } => atoms,
                EdgeMeasure::Uniform { .. } => unreachable!("atom place on a uniform edge"),
            };
            let below: f64 = atoms[..index].iter().map(|a| a.mass).sum();
            let above: f64 = atoms[index + 1..].iter().map(|a| a.mass).sum();
            vec![
                below + g.component_mass(e.lower, edge),
                above + g.component_mass(e.upper, edge),
            ]
        }
        MedianPlace::Interior { edge, fraction } => {
            let e = &g.edges[edge];
            let m = e.measure.total();
            vec![
                fraction * m + g.component_mass(e.lower, edge),
                (1.0 - fraction) * m + g.component_mass(e.upper, edge),
            ]
        }
    }
}

fn level_of(g: &ReebGraph, place: MedianPlace) -> f64 {
    match place {
        MedianPlace::Node(v) => g.nodes[v].level,
        MedianPlace::Atom { edge, index } => match &g.edges[edge].measure {
            EdgeMeasure::Atoms { atoms } => atoms[index].level,
            EdgeMeasure::Uniform { .. } => unreachable!(),
        },
        MedianPlace::Interior { edge, fraction } => {
            let e = &g.edges[edge];
            let (a, b) = (g.nodes[e.lower].level, g.nodes[e.upper].level);
            a + fraction * (b - a)
        }
    }
}

/// First point met when leaving node `v` along edge `e`.
fn first_step(g: &ReebGraph, v: usize, e: usize) -> MedianPlace {
    let edge = &g.edges[e];
    match &edge.measure {
        EdgeMeasure::Atoms { atoms } if !atoms.is_empty() => {
            let index = if edge.lower == v { 0 } else { atoms.len() - 1 };
            MedianPlace::Atom { edge: e, index }
        }
        _ => MedianPlace::Node(g.other(e, v)),
    }
}

fn finish(g: &ReebGraph, place: MedianPlace, tie: bool) -> MedianPoint {
    MedianPoint {
        place,
        level: level_of(g, place),
        tie,
        components: components_at(g, place),
    }
}

/// Median point by leaf pruning with accumulated mass.
pub fn median(g: &ReebGraph) -> MedianPoint {
    let n = g.nodes.len();
    let mut acc: Vec<f64> = g.nodes.iter().map(|x| x.mass).collect();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut edge_alive = vec![true; g.edges.len()];
    let mut done = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();

    while let Some(u) = queue.pop_front() {
        if done[u] {
            continue;
        }
        if deg[u] == 0 {
            return finish(g, MedianPlace::Node(u), false);
        }
        let e = *g.incident(u).iter().find(|&&e| edge_alive[e]).expect("leaf has an edge");
        let edge = &g.edges[e];
        let upward = edge.lower == u;
        let v = g.other(e, u);

        if acc[u] >= 0.5 - HALF_TOLERANCE {
            let tie = (acc[u] - 0.5).abs() <= HALF_TOLERANCE;
            let place = if tie && upward { first_step(g, u, e) } else { MedianPlace::Node(u) };
            return finish(g, place, tie);
        }

        let mut c = acc[u];
        match &edge.measure {
            EdgeMeasure::Atoms { atoms } => {
                let k_count = atoms.len();
                for step in 0..k_count {
                    let k = if upward { step } else { k_count - 1 - step };
                    let m = atoms[k].mass;
                    if c + m >= 0.5 - HALF_TOLERANCE {
                        let tie = (c + m - 0.5).abs() <= HALF_TOLERANCE;
                        let place = if tie && upward {
                            if k + 1 < k_count {
                                MedianPlace::Atom { edge: e, index: k + 1 }
                            } else {
                                MedianPlace::Node(v)
                            }
                        } else {
                            MedianPlace::Atom { edge: e, index: k }
                        };
                        return finish(g, place, tie);
                    }
                    c += m;
                }
            }
            EdgeMeasure::Uniform { mass } => {
                if c + mass >= 0.5 && *mass > 0.0 {
                    let from_u = ((0.5 - c) / mass).clamp(0.0, 1.0);
                    let fraction = if upward { from_u } else { 1.0 - from_u };
                    let place = if fraction <= 0.0 {
                        MedianPlace::Node(edge.lower)
                    } else if fraction >= 1.0 {
                        MedianPlace::Node(edge.upper)
                    } else {
                        MedianPlace::Interior { edge: e, fraction }
                    };
                    return finish(g, place, false);
                }
                c += mass;
            }
        }
        acc[v] += c;
        edge_alive[e] = false;
        done[u] = true;
        deg[u] = 0;
        deg[v] -= 1;
        if deg[v] <= 1 {
            queue.push_back(v);
        }
    }
    unreachable!("a finite tree always has a median")
}

/// Evaluator for quasi-states on sphere fields.
pub trait QuasiStateOracle {
    fn name(&self) -> &str;
    fn evaluate(&self, h: &ScalarField) -> Result<f64>;
}

/// The median quasi-state.
#[derive(Debug, Clone, Copy, Default)]
pub struct MedianQuasiState;

impl QuasiStateOracle for MedianQuasiState {
    fn name(&self) -> &str {
        "median"
    }

    fn evaluate(&self, h: &ScalarField) -> Result<f64> {
        zeta_med(h)
    }
}

/// ζ_med(H), the level of the median of the contour tree of H.
pub fn zeta_med(h: &ScalarField) -> Result<f64> {
    Ok(median(&build_reeb(h)?).level)
}

/// Upper bound for τ_med(C) from a one-parameter family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauEstimate {
    pub value: f64,
    /// Shoulder width of the minimizing member.
    pub width: f64,
    pub members: usize,
}

/// Geodesic distance from each vertex to the closest vertex of `c`.
pub fn distance_to_set(mesh: &SphereMesh, c: &[bool]) -> Vec<f64> {
    let members: Vec<Vec3> = mesh
        .vertices()
        .iter()
        .zip(c)
        .filter_map(|(&p, &inside)| inside.then_some(p))
        .collect();
    mesh.vertices()
        .iter()
        .zip(c)
        .map(|(&p, &inside)| {
            if inside {
                0.0
            } else {
                members.iter().map(|&q| geom::angle(p, q)).fold(f64::INFINITY, f64::min)
            }
        })
        .collect()
}

/// F_s = 1 on C, 1 − d/s within distance s of C, 0 beyond.
pub fn shoulder_family(mesh: &Arc<SphereMesh>, c: &[bool], widths: &[f64]) -> Result<Vec<ScalarField>> {
    let d = distance_to_set(mesh, c);
    widths
        .iter()
        .map(|&s| ScalarField::new(mesh, d.iter().map(|&di| (1.0 - di / s).max(0.0)).collect()))
        .collect()
}

/// Minimum of ζ_med over an explicit admissible family.
pub fn tau_med_with_family(c: &[bool], family: &[ScalarField], widths: &[f64]) -> Result<TauEstimate> {
    if !c.iter().any(|&x| x) {
        return Err(Error::Config("closed set is empty".into()));
    }
    let mut best = TauEstimate {
        value: f64::INFINITY,
        width: f64::NAN,
        members: family.len(),
    };
    for (i, f) in family.iter().enumerate() {
        let ok = f
            .values()
            .iter()
            .zip(c)
            .all(|(&v, &inside)| (0.0..=1.0).contains(&v) && (!inside || v >= 1.0));
        if !ok {
            return Err(Error::InadmissibleFamily(i));
        }
        let z = zeta_med(f)?;
        if z < best.value {
            best.value = z;
            best.width = widths.get(i).copied().unwrap_or(f64::NAN);
        }
    }
    Ok(best)
}

/// τ_med(C) bounded above by `budget` shoulder functions with widths spaced
/// geometrically from one mesh edge to π.
pub fn tau_med(mesh: &Arc<SphereMesh>, c: &[bool], budget: usize) -> Result<TauEstimate> {
    let budget = budget.max(1);
    let lo = mesh.mesh_size();
    let hi = std::f64::consts::PI;
    let widths: Vec<f64> = (0..budget)
        .map(|i| {
            if budget == 1 {
                lo
            } else {
                lo * (hi / lo).powf(i as f64 / (budget - 1) as f64)
            }
        })
        .collect();
    let family = shoulder_family(mesh, c, &widths)?;
    tau_med_with_family(c, &family, &widths)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketRow {
    /// |ζ(H+K) − ζ(H) − ζ(K)|
    pub pi: f64,
    pub bracket_norm: f64,
    pub sqrt_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketReport {
    pub oracle: String,
    pub rows: Vec<BracketRow>,
    pub max_ratio: f64,
}

/// Π_ζ against the square root of the bracket's sup norm for each pair.
pub fn bracket_inequality_report(
    pairs: &[(ScalarField, ScalarField)],
    zeta: &dyn QuasiStateOracle,
) -> Result<BracketReport> {
    let mut rows = Vec::with_capacity(pairs.len());
    for (h, k) in pairs {
        let pi = (zeta.evaluate(&h.add(k)?)? - zeta.evaluate(h)? - zeta.evaluate(k)?).abs();
        let bracket_norm = poisson_bracket(h, k)?.sup_norm();
        let sqrt_norm = bracket_norm.sqrt();
        let ratio = if sqrt_norm > 0.0 {
            pi / sqrt_norm
        } else if pi == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        rows.push(BracketRow {
            pi,
            bracket_norm,
            sqrt_norm,
            ratio,
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(BracketReport {
        oracle: zeta.name().to_string(),
        rows,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_field::{cap_mask, make_mesh};

    fn uniform_tree(levels: &[f64], edges: &[(usize, usize, f64)]) -> ReebGraph {
        let nodes = levels
            .iter()
            .map(|&level| ReebNode { vertex: None, level, mass: 0.0 })
            .collect();
        let edges = edges
            .iter()
            .map(|&(lower, upper, mass)| ReebEdge {
                lower,
                upper,
                measure: EdgeMeasure::Uniform { mass },
            })
            .collect();
        ReebGraph::from_parts(nodes, edges).unwrap()
    }

    /// Every candidate point of an atom tree, checked directly.
    fn brute_force_medians(g: &ReebGraph) -> Vec<MedianPlace> {
        let mut out = Vec::new();
        for v in 0..g.nodes.len() {
            if components_at(g, MedianPlace::Node(v)).iter().all(|&m| m <= 0.5) {
                out.push(MedianPlace::Node(v));
            }
        }
        for (e, edge) in g.edges.iter().enumerate() {
            if let EdgeMeasure::Atoms { atoms } = &edge.measure {
                for index in 0..atoms.len() {
                    let p = MedianPlace::Atom { edge: e, index };
                    if components_at(g, p).iter().all(|&m| m <= 0.5) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn height_gives_a_path() {
        let m = make_mesh(3);
        let g = build_reeb(&ScalarField::coordinate(&m, 2)).unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.leaves(), 2);
        assert!((g.total_measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_gives_a_path() {
        let m = make_mesh(2);
        let g = build_reeb(&ScalarField::constant(&m, 0.7)).unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(zeta_med(&ScalarField::constant(&m, 0.7)).unwrap(), 0.7);
    }

    #[test]
    fn two_bumps_give_three_leaves() {
        let m = make_mesh(3);
        let c1 = TIE_DIRECTION;
        let c2 = geom::normalize([1.0, 0.0, -0.3]);
        let bump = |c: Vec3, p: Vec3| (geom::dot(c, p) - 0.8).max(0.0) / 0.2;
        let h = ScalarField::from_fn(&m, |p| bump(c1, p) + 2.0 * bump(c2, p)).unwrap();
        let g = build_reeb(&h).unwrap();
        assert_eq!(g.leaves(), 3);
        assert_eq!(g.branch_nodes(), 1);
        assert!((g.total_measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn places_cover_every_vertex() {
        let m = make_mesh(2);
        let h = ScalarField::from_fn(&m, |p| p[0] * p[1] + 0.3 * p[2]).unwrap();
        let g = build_reeb(&h).unwrap();
        for (v, place) in g.places.iter().enumerate() {
            let level = match *place {
                Place::Node(i) => g.nodes[i].level,
                Place::Atom { edge, index } => match &g.edges[edge].measure {
                    EdgeMeasure::Atoms { atoms } => atoms[index].level,
                    _ => unreachable!(),
                },
            };
            assert_eq!(level, h.value(v));
        }
    }

    #[test]
    fn median_of_height_is_near_zero() {
        let m = make_mesh(4);
        let z = zeta_med(&ScalarField::coordinate(&m, 2)).unwrap();
        assert!(z.abs() <= 1e-2, "{z}");
    }

    #[test]
    fn three_leaf_tree_median_at_merge() {
        // leaves 1, 2, 3 hang off the merge node 0
        let g = uniform_tree(&[0.0, -1.0, -2.0, 1.0], &[(1, 0, 0.2), (2, 0, 0.3), (0, 3, 0.5)]);
        let mp = median(&g);
        assert_eq!(mp.place, MedianPlace::Node(0));
        assert!(mp.is_balanced());
        // brute-force scan: interior points of every edge leave a side > 1/2
        for e in 0..3 {
            for i in 1..100 {
                let p = MedianPlace::Interior { edge: e, fraction: i as f64 / 100.0 };
                assert!(components_at(&g, p).iter().any(|&m| m > 0.5));
            }
        }
    }

    #[test]
    fn single_uniform_edge_median_is_midpoint() {
        let g = uniform_tree(&[-3.0, 5.0], &[(0, 1, 1.0)]);
        let mp = median(&g);
        assert_eq!(mp.place, MedianPlace::Interior { edge: 0, fraction: 0.5 });
        assert_eq!(mp.level, 1.0);
    }

    #[test]
    fn median_matches_brute_force_on_fields() {
        for seed in 0..8 {
            let m = make_mesh(2);
            let p = crate::sphere_field::Polynomial::random(3, seed);
            let g = build_reeb(&p.sample(&m).unwrap()).unwrap();
            let mp = median(&g);
            assert!(mp.is_balanced());
            let brute = brute_force_medians(&g);
            assert!(brute.contains(&mp.place), "seed {seed}");
        }
    }

    #[test]
    fn exact_half_split_takes_higher_point() {
        let atom = |level, mass| Atom { vertex: None, level, mass };
        let nodes = vec![
            ReebNode { vertex: None, level: 0.0, mass: 0.25 },
            ReebNode { vertex: None, level: 10.0, mass: 0.25 },
        ];
        let edges = vec![ReebEdge {
            lower: 0,
            upper: 1,
            measure: EdgeMeasure::Atoms { atoms: vec![atom(1.0, 0.25), atom(2.0, 0.25)] },
        }];
        let g = ReebGraph::from_parts(nodes, edges).unwrap();
        let mp = median(&g);
        assert!(mp.tie);
        assert_eq!(mp.level, 2.0);
        assert!(mp.is_balanced());
    }

    #[test]
    fn cap_supported_field_has_zero_median() {
        let m = make_mesh(4);
        let c = geom::normalize([0.2, -0.5, 0.8]);
        let cos_r = 1.0 - 2.0 * 0.3;
        let h = ScalarField::from_fn(&m, |p| ((geom::dot(p, c) - cos_r) * 3.0).max(0.0)).unwrap();
        // oracle: the zero plateau carries measure ≥ 0.7
        let zero_mass: f64 = h.values().iter().zip(m.weights()).filter(|(v, _)| **v == 0.0).map(|(_, w)| w).sum();
        assert!(zero_mass > 0.5);
        assert_eq!(zeta_med(&h).unwrap(), 0.0);
    }

    #[test]
    fn tau_examples() {
        let m = make_mesh(3);
        let c = [0.1, 0.3, 0.9];
        let small = cap_mask(&m, c, 0.4);
        assert_eq!(tau_med(&m, &small, 12).unwrap().value, 0.0);
        let big = cap_mask(&m, c, 0.6);
        assert_eq!(tau_med(&m, &big, 12).unwrap().value, 1.0);
        let all = vec![true; m.num_vertices()];
        assert_eq!(tau_med(&m, &all, 4).unwrap().value, 1.0);
        let bad = vec![ScalarField::constant(&m, 0.5)];
        assert_eq!(tau_med_with_family(&small, &bad, &[1.0]), Err(Error::InadmissibleFamily(0)));
    }

    #[test]
    fn bracket_report_for_commuting_pairs() {
        let m = make_mesh(4);
        let z = ScalarField::coordinate(&m, 2);
        let z2 = z.map(|v| v * v).unwrap();
        let f = ScalarField::from_fn(&m, |p| p[0] + 0.5 * p[2]).unwrap();
        let pairs = vec![(z.clone(), z2), (f.map(|v| v * v).unwrap(), f.map(f64::sin).unwrap())];
        let rep = bracket_inequality_report(&pairs, &MedianQuasiState).unwrap();
        for row in &rep.rows {
            assert!(row.pi <= 1e-2, "{row:?}");
            assert!(row.bracket_norm <= 1e-2, "{row:?}");
        }
    }

    #[test]
    fn json_export() {
        let m = make_mesh(1);
        let g = build_reeb(&ScalarField::coordinate(&m, 0)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&g.to_json().unwrap()).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 2);
        assert_eq!(v["edges"][0]["measure"]["kind"], "atoms");
    }
}
