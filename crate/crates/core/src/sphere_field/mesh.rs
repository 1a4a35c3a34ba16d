use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};

/// Triangulated unit sphere with lumped vertex weights summing to 1.
///
/// Triangles are oriented counter-clockwise seen from outside.
#[derive(Debug, Clone)]
pub struct SphereMesh {
    level: Option<u32>,
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    weights: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
    /// Triangle across edge (k, k+1) of each triangle.
    adjacent: Vec<[usize; 3]>,
    grad_ops: std::result::Result<Vec<GradOp>, Error>,
}

/// Ambient gradient stencil: g = Σ c_j (f_j − f_i).
#[derive(Debug, Clone)]
struct GradOp {
    coeffs: Vec<(usize, Vec3)>,
}

/// A point located in a triangle with normalized barycentric weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub triangle: usize,
    pub weights: [f64; 3],
}

impl SphereMesh {
    /// Icosphere after `level` rounds of 4-to-1 subdivision.
    pub fn icosphere(level: u32) -> SphereMesh {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let raw: [Vec3; 12] = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ];
        let mut vertices: Vec<Vec3> = raw.iter().map(|&v| geom::normalize(v)).collect();
        let mut triangles: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..level {
            let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
            let mut next = Vec::with_capacity(triangles.len() * 4);
            let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec3>| {
                let key = (a.min(b), a.max(b));
                *mid.entry(key).or_insert_with(|| {
                    vertices.push(geom::normalize(geom::add(vertices[a], vertices[b])));
                    vertices.len() - 1
                })
            };
            for &[a, b, c] in &triangles {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.push([a, ab, ca]);
                next.push([b, bc, ab]);
                next.push([c, ca, bc]);
                next.push([ab, bc, ca]);
            }
            triangles = next;
        }
        let mut mesh = SphereMesh::from_parts(vertices, triangles)
            .expect("icosphere construction is always valid");
        mesh.level = Some(level);
        mesh
    }

    /// Builds a mesh from explicit data. Vertices are projected to the unit
    /// sphere and triangles re-oriented outward.
    pub fn from_parts(vertices: Vec<Vec3>, mut triangles: Vec<[usize; 3]>) -> Result<SphereMesh> {
        let n = vertices.len();
        let vertices: Vec<Vec3> = vertices.into_iter().map(geom::normalize).collect();
        for (i, v) in vertices.iter().enumerate() {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        for t in &mut triangles {
            if t.iter().any(|&i| i >= n) {
                return Err(Error::Parse(format!("triangle {t:?} references a missing vertex")));
            }
            let [a, b, c] = *t;
            let nrm = geom::cross(geom::sub(vertices[b], vertices[a]), geom::sub(vertices[c], vertices[a]));
            if geom::dot(nrm, vertices[a]) < 0.0 {
                t.swap(1, 2);
            }
        }

        let mut weights = vec![0.0; n];
        for &[a, b, c] in &triangles {
            let nrm = geom::cross(geom::sub(vertices[b], vertices[a]), geom::sub(vertices[c], vertices[a]));
            let area = 0.5 * geom::norm(nrm);
            for v in [a, b, c] {
                weights[v] += area / 3.0;
            }
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }

        let mut edge_tri: HashMap<(usize, usize), usize> = HashMap::new();
        for (ti, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                edge_tri.insert((t[k], t[(k + 1) % 3]), ti);
            }
        }
        let mut adjacent = vec![[usize::MAX; 3]; triangles.len()];
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (ti, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if let Some(&other) = edge_tri.get(&(b, a)) {
                    adjacent[ti][k] = other;
                }
                if !neighbors[a].contains(&b) {
                    neighbors[a].push(b);
                }
                if !neighbors[b].contains(&a) {
                    neighbors[b].push(a);
                }
            }
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }

        let grad_ops = build_grad_ops(&vertices, &neighbors);
        Ok(SphereMesh {
            level: None,
            vertices,
            triangles,
            weights,
            neighbors,
            adjacent,
            grad_ops,
        })
    }

    pub fn level(&self) -> Option<u32> {
        self.level
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Vec3 {
        self.vertices[i]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.triangles.len() as i64
    }

    /// Mean edge length, the mesh size h.
    pub fn mesh_size(&self) -> f64 {
        let mut total = 0.0;
        let mut count = 0usize;
        for (i, nb) in self.neighbors.iter().enumerate() {
            for &j in nb.iter().filter(|&&j| j > i) {
                total += geom::norm(geom::sub(self.vertices[i], self.vertices[j]));
                count += 1;
            }
        }
        total / count as f64
    }

    /// Whether the vertex graph is connected.
    pub fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    /// Ambient least-squares gradients at every vertex. Exact for restrictions
    /// of linear functions.
    pub fn ambient_gradients(&self, values: &[f64]) -> Result<Vec<Vec3>> {
        let ops = self.grad_ops.as_ref().map_err(Clone::clone)?;
        Ok(ops
            .iter()
            .enumerate()
            .map(|(i, op)| {
                op.coeffs.iter().fold([0.0; 3], |g, &(j, c)| {
                    geom::axpy(g, values[j] - values[i], c)
                })
            })
            .collect())
    }

    /// Tangential gradients at every vertex.
    pub fn tangent_gradients(&self, values: &[f64]) -> Result<Vec<Vec3>> {
        let g = self.ambient_gradients(values)?;
        Ok(g.into_iter()
            .zip(&self.vertices)
            .map(|(g, &p)| geom::tangent(p, g))
            .collect())
    }

    /// Locates a unit vector by walking from the `hint` triangle, falling back
    /// to a full scan.
    pub fn locate(&self, p: Vec3, hint: usize) -> Result<Location> {
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::LocateFailed(p));
        }
        let mut t = if hint < self.triangles.len() { hint } else { 0 };
        let max_steps = 4 * (self.triangles.len() as f64).sqrt() as usize + 64;
        for _ in 0..max_steps {
            let s = self.raw_barycentric(t, p);
            let (k_min, s_min) = s
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
            if s_min >= -1e-14 && s.iter().sum::<f64>() > 0.0 {
                return Ok(self.finish(t, s));
            }
            // the edge opposite vertex k is (k+1, k+2)
            let next = self.adjacent[t][(k_min + 1) % 3];
            if next == usize::MAX {
                break;
            }
            t = next;
        }
        for t in 0..self.triangles.len() {
            let s = self.raw_barycentric(t, p);
            if s.iter().all(|&v| v >= -1e-12) && s.iter().sum::<f64>() > 0.0 {
                return Ok(self.finish(t, s));
            }
        }
        Err(Error::LocateFailed(p))
    }

    fn raw_barycentric(&self, t: usize, p: Vec3) -> [f64; 3] {
        let [a, b, c] = self.triangles[t];
        let (a, b, c) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [
            geom::dot(p, geom::cross(b, c)),
            geom::dot(p, geom::cross(c, a)),
            geom::dot(p, geom::cross(a, b)),
        ]
    }

    fn finish(&self, t: usize, s: [f64; 3]) -> Location {
        let s = s.map(|v| v.max(0.0));
        let sum: f64 = s.iter().sum();
        Location {
            triangle: t,
            weights: s.map(|v| v / sum),
        }
    }

    /// Barycentric blend of per-vertex data at a location.
    pub fn blend<T: Copy + Into<f64>>(&self, loc: &Location, data: &[T]) -> f64 {
        let tri = self.triangles[loc.triangle];
        (0..3).map(|k| loc.weights[k] * data[tri[k]].into()).sum()
    }

    pub fn blend_vec(&self, loc: &Location, data: &[Vec3]) -> Vec3 {
        let tri = self.triangles[loc.triangle];
        (0..3).fold([0.0; 3], |acc, k| geom::axpy(acc, loc.weights[k], data[tri[k]]))
    }
}

/// Stencil per vertex over its 2-ring: fits f_j − f_i ≈ g·d + α(s² − t²) + β st,
/// where (s, t) are tangent coordinates of d = p_j − p_i. The normal part of g
/// absorbs the isotropic curvature term, so linear functions are reproduced
/// exactly and the tangential gradient is second order.
fn build_grad_ops(vertices: &[Vec3], neighbors: &[Vec<usize>]) -> std::result::Result<Vec<GradOp>, Error> {
    let mut ops = Vec::with_capacity(vertices.len());
    for (i, nb) in neighbors.iter().enumerate() {
        if nb.len() < 3 {
            return Err(Error::DegenerateStar {
                vertex: i,
                neighbors: nb.len(),
            });
        }
        let mut ring: Vec<usize> = nb.clone();
        for &j in nb {
            ring.extend(neighbors[j].iter().copied().filter(|&k| k != i));
        }
        ring.sort_unstable();
        ring.dedup();
        let n = vertices[i];
        let e1 = geom::orthogonal(n);
        let e2 = geom::cross(n, e1);
        let rows: Vec<[f64; 6]> = ring
            .iter()
            .map(|&j| {
                let d = geom::sub(vertices[j], n);
                let (s, t) = (geom::dot(d, e1), geom::dot(d, e2));
                let w = 1.0 / geom::dot(d, d);
                [w * d[0], w * d[1], w * d[2], w * (s * s - t * t), w * s * t, w]
            })
            .collect();
        let degenerate = Error::DegenerateStar {
            vertex: i,
            neighbors: nb.len(),
        };
        let mut m = [[0.0; 5]; 5];
        for r in &rows {
            for a in 0..5 {
                for b in 0..5 {
                    m[a][b] += r[a] * r[b];
                }
            }
        }
        let dims = if rows.len() >= 6 { 5 } else { 3 };
        let inv = invert_sym(&m, dims).ok_or(degenerate)?;
        let coeffs = ring
            .iter()
            .zip(&rows)
            .map(|(&j, r)| {
                let mut c = [0.0; 3];
                for (a, ca) in c.iter_mut().enumerate() {
                    *ca = r[5] * (0..dims).map(|b| inv[a][b] * r[b]).sum::<f64>();
                }
                (j, c)
            })
            .collect();
        ops.push(GradOp { coeffs });
    }
    Ok(ops)
}

/// Gauss–Jordan inverse of the leading `dims × dims` block.
fn invert_sym(m: &[[f64; 5]; 5], dims: usize) -> Option<[[f64; 5]; 5]> {
    let mut a = *m;
    let mut inv = [[0.0; 5]; 5];
    for (k, row) in inv.iter_mut().enumerate().take(dims) {
        row[k] = 1.0;
    }
    let scale = (0..dims).map(|k| a[k][k].abs()).fold(0.0, f64::max);
    for col in 0..dims {
        let piv = (col..dims).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if !(a[piv][col].abs() > 1e-14 * scale) {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for k in 0..dims {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..dims {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for k in 0..dims {
                        a[r][k] -= f * a[col][k];
                        inv[r][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        let mut v = 12usize;
        for level in 0..5 {
            let m = SphereMesh::icosphere(level);
            assert_eq!(m.num_vertices(), v, "level {level}");
            assert_eq!(m.euler_characteristic(), 2);
            assert_eq!(m.triangles().len(), 20 * 4usize.pow(level));
            // V_{k+1} = V_k + E_k
            v += m.num_edges();
        }
        assert_eq!(SphereMesh::icosphere(0).triangles().len(), 20);
        assert_eq!(SphereMesh::icosphere(1).num_vertices(), 42);
        assert_eq!(SphereMesh::icosphere(3).num_vertices(), 642);
    }

    #[test]
    fn weights_and_positions() {
        let m = SphereMesh::icosphere(3);
        assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.weights().iter().all(|&w| w > 0.0));
        for &v in m.vertices() {
            assert!((geom::norm(v) - 1.0).abs() < 1e-12);
        }
        for &[a, b, c] in m.triangles() {
            let (a, b, c) = (m.vertex(a), m.vertex(b), m.vertex(c));
            let n = geom::cross(geom::sub(b, a), geom::sub(c, a));
            assert!(geom::dot(n, a) > 0.0);
        }
    }

    #[test]
    fn gradient_exact_for_linear() {
        let m = SphereMesh::icosphere(2);
        let a = [0.3, -1.2, 0.7];
        let vals: Vec<f64> = m.vertices().iter().map(|&p| geom::dot(a, p)).collect();
        for g in m.ambient_gradients(&vals).unwrap() {
            for k in 0..3 {
                assert!((g[k] - a[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn locate_finds_containing_triangle() {
        let m = SphereMesh::icosphere(3);
        let mut hint = 0;
        for i in 0..200 {
            let th = i as f64 * 0.37;
            let p = geom::normalize([th.cos(), th.sin(), (i as f64 * 0.11).sin()]);
            let loc = m.locate(p, hint).unwrap();
            hint = loc.triangle;
            let tri = m.triangles()[loc.triangle];
            let q = (0..3).fold([0.0; 3], |acc, k| geom::axpy(acc, loc.weights[k], m.vertex(tri[k])));
            assert!(geom::norm(geom::cross(geom::normalize(q), p)) < 1e-12);
        }
        assert!(m.locate([f64::NAN, 0.0, 1.0], 0).is_err());
    }

    #[test]
    fn degenerate_star_reported() {
        // a tetrahedron has 3 neighbours per vertex and works
        let v = vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
        let t = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        let m = SphereMesh::from_parts(v.clone(), t).unwrap();
        assert!(m.ambient_gradients(&[0.0; 4]).is_ok());
        // a lone triangle does not
        let m = SphereMesh::from_parts(v[..3].to_vec(), vec![[0, 1, 2]]).unwrap();
        assert!(matches!(
            m.ambient_gradients(&[0.0; 3]),
            Err(Error::DegenerateStar { neighbors: 2, .. })
        ));
    }
}
