//! Incremental isotropic remeshing: split long edges, collapse short ones,
//! flip towards Delaunay, then relax vertices tangentially.
//!
//! Every operation preserves the vertex/edge/face counts' alternating sum, so
//! the genus of each component is unchanged.

use std::collections::HashSet;

use crate::mesh::{TriMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemeshParams {
    pub min_edge: f64,
    pub max_edge: f64,
    pub smoothing: f64,
    pub flips: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RemeshStats {
    pub splits: usize,
    pub collapses: usize,
    pub flips: usize,
}

struct Work {
    verts: Vec<Vec3>,
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    vfaces: Vec<Vec<usize>>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Work {
    fn new(mesh: &TriMesh) -> Self {
        let mut vfaces = vec![Vec::new(); mesh.vertices.len()];
        for (f, t) in mesh.triangles.iter().enumerate() {
            for &v in t {
                vfaces[v].push(f);
            }
        }
        Work {
            verts: mesh.vertices.clone(),
            tris: mesh.triangles.clone(),
            alive: vec![true; mesh.triangles.len()],
            vfaces,
        }
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        let mut set = HashSet::new();
        let mut out = Vec::new();
        for (f, t) in self.tris.iter().enumerate() {
            if !self.alive[f] {
                continue;
            }
            for c in 0..3 {
                let k = key(t[c], t[(c + 1) % 3]);
                if set.insert(k) {
                    out.push(k);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// The two faces of edge `(a, b)`: `(face with a→b, face with b→a)`.
    fn edge_faces(&self, a: usize, b: usize) -> Option<(usize, usize)> {
        let mut fwd = None;
        let mut bwd = None;
        for &f in &self.vfaces[a] {
            let t = self.tris[f];
            for c in 0..3 {
                if t[c] == a && t[(c + 1) % 3] == b {
                    fwd = Some(f);
                }
                if t[c] == b && t[(c + 1) % 3] == a {
                    bwd = Some(f);
                }
            }
        }
        Some((fwd?, bwd?))
    }

    fn rotated(&self, f: usize, first: usize) -> [usize; 3] {
        let t = self.tris[f];
        let c = t.iter().position(|&v| v == first).expect("vertex in face");
        [t[c], t[(c + 1) % 3], t[(c + 2) % 3]]
    }

    fn neighbors(&self, v: usize) -> HashSet<usize> {
        let mut n = HashSet::new();
        for &f in &self.vfaces[v] {
            for &w in &self.tris[f] {
                if w != v {
                    n.insert(w);
                }
            }
        }
        n
    }

    fn normal(&self, t: [usize; 3]) -> Vec3 {
        let [a, b, c] = t.map(|v| self.verts[v]);
        (b - a).cross(&(c - a))
    }

    fn replace_face(&mut self, f: usize, t: [usize; 3]) {
        let old = self.tris[f];
        for v in old {
            if !t.contains(&v) {
                self.vfaces[v].retain(|&g| g != f);
            }
        }
        for v in t {
            if !old.contains(&v) {
                self.vfaces[v].push(f);
            }
        }
        self.tris[f] = t;
    }

    fn add_face(&mut self, t: [usize; 3]) {
        let f = self.tris.len();
        self.tris.push(t);
        self.alive.push(true);
        for v in t {
            self.vfaces[v].push(f);
        }
    }

    fn kill_face(&mut self, f: usize) {
        self.alive[f] = false;
        for v in self.tris[f] {
            self.vfaces[v].retain(|&g| g != f);
        }
    }

    fn vertex_normal(&self, v: usize) -> Vec3 {
        self.vfaces[v]
            .iter()
            .map(|&f| self.normal(self.tris[f]))
            .sum::<Vec3>()
            .try_normalize(0.0)
            .unwrap_or_else(Vec3::zeros)
    }

    /// Midpoint of the curved edge interpolating the two vertex normals, so
    /// that splitting does not flatten the surface.
    fn curved_midpoint(&self, a: usize, b: usize) -> Vec3 {
        let (pa, pb) = (self.verts[a], self.verts[b]);
        let (na, nb) = (self.vertex_normal(a), self.vertex_normal(b));
        let mid = (pa + pb) * 0.5;
        match (na + nb).try_normalize(1e-12) {
            Some(n) => mid + n * ((pb - pa).dot(&(nb - na)) / 8.0),
            None => mid,
        }
    }

    fn split(&mut self, a: usize, b: usize) -> bool {
        let Some((f1, f2)) = self.edge_faces(a, b) else {
            return false;
        };
        let [_, _, c] = self.rotated(f1, a);
        let [_, _, d] = self.rotated(f2, b);
        let m = self.verts.len();
        self.verts.push(self.curved_midpoint(a, b));
        self.vfaces.push(Vec::new());
        self.replace_face(f1, [a, m, c]);
        self.add_face([m, b, c]);
        self.replace_face(f2, [b, m, d]);
        self.add_face([m, a, d]);
        true
    }

    /// Merges `b` into `a` at the edge midpoint when the result stays a
    /// manifold with well-shaped, unflipped faces.
    fn collapse(&mut self, a: usize, b: usize, max_edge: f64) -> bool {
        let Some((f1, f2)) = self.edge_faces(a, b) else {
            return false;
        };
        let [_, _, c] = self.rotated(f1, a);
        let [_, _, d] = self.rotated(f2, b);
        let na = self.neighbors(a);
        let nb = self.neighbors(b);
        let common: HashSet<usize> = na.intersection(&nb).copied().collect();
        if common.len() != 2 || !common.contains(&c) || !common.contains(&d) {
            return false;
        }
        if self.vfaces[c].len() <= 3 || self.vfaces[d].len() <= 3 {
            return false;
        }
        if na.len() + nb.len() - 4 < 3 {
            return false;
        }
        let m = (self.verts[a] + self.verts[b]) * 0.5;
        for &w in na.union(&nb) {
            if w != a && w != b && (self.verts[w] - m).norm() > max_edge {
                return false;
            }
        }
        let affected: Vec<usize> = self.vfaces[a]
            .iter()
            .chain(&self.vfaces[b])
            .copied()
            .filter(|&f| f != f1 && f != f2)
            .collect();
        for &f in &affected {
            let old = self.normal(self.tris[f]);
            let t = self.tris[f].map(|v| if v == b { a } else { v });
            let p = t.map(|v| if v == a { m } else { self.verts[v] });
            let new = (p[1] - p[0]).cross(&(p[2] - p[0]));
            if new.dot(&old) <= 0.2 * old.norm() * new.norm() {
                return false;
            }
        }
        self.kill_face(f1);
        self.kill_face(f2);
        self.verts[a] = m;
        for f in self.vfaces[b].clone() {
            let t = self.tris[f].map(|v| if v == b { a } else { v });
            self.replace_face(f, t);
        }
        true
    }

    fn angle_at(&self, apex: usize, p: usize, q: usize) -> f64 {
        let u = self.verts[p] - self.verts[apex];
        let v = self.verts[q] - self.verts[apex];
        u.cross(&v).norm().atan2(u.dot(&v))
    }

    fn flip(&mut self, a: usize, b: usize) -> bool {
        let Some((f1, f2)) = self.edge_faces(a, b) else {
            return false;
        };
        let [_, _, c] = self.rotated(f1, a);
        let [_, _, d] = self.rotated(f2, b);
        if c == d || self.vfaces[a].len() <= 3 || self.vfaces[b].len() <= 3 {
            return false;
        }
        if self.angle_at(c, a, b) + self.angle_at(d, a, b) <= std::f64::consts::PI + 1e-9 {
            return false;
        }
        if self.neighbors(c).contains(&d) {
            return false;
        }
        let n1 = self.normal([a, b, c]);
        let n2 = self.normal([b, a, d]);
        if n1.dot(&n2) < 0.9 * n1.norm() * n2.norm() {
            return false;
        }
        let avg = n1 + n2;
        let m1 = self.normal([c, a, d]);
        let m2 = self.normal([d, b, c]);
        if m1.dot(&avg) <= 0.0 || m2.dot(&avg) <= 0.0 {
            return false;
        }
        self.replace_face(f1, [c, a, d]);
        self.replace_face(f2, [d, b, c]);
        true
    }

    fn smooth(&mut self, factor: f64) {
        let n = self.verts.len();
        let mut normals = vec![Vec3::zeros(); n];
        for (f, t) in self.tris.iter().enumerate() {
            if self.alive[f] {
                let nrm = self.normal(*t);
                for &v in t {
                    normals[v] += nrm;
                }
            }
        }
        let mut next = self.verts.clone();
        for v in 0..n {
            if self.vfaces[v].is_empty() {
                continue;
            }
            let nb = self.neighbors(v);
            let mut nbs: Vec<usize> = nb.into_iter().collect();
            nbs.sort_unstable();
            let centroid = nbs.iter().map(|&w| self.verts[w]).sum::<Vec3>() / nbs.len() as f64;
            let mut delta = centroid - self.verts[v];
            if let Some(nrm) = normals[v].try_normalize(0.0) {
                delta -= nrm * nrm.dot(&delta);
            }
            next[v] = self.verts[v] + delta * factor;
        }
        self.verts = next;
    }

    fn finish(self) -> TriMesh {
        let triangles = self
            .tris
            .iter()
            .zip(&self.alive)
            .filter(|(_, &a)| a)
            .map(|(t, _)| *t)
            .collect();
        TriMesh::new(self.verts, triangles).compacted()
    }
}

pub fn remesh(mesh: &TriMesh, params: &RemeshParams) -> (TriMesh, RemeshStats) {
    let mut w = Work::new(mesh);
    let mut stats = RemeshStats::default();
    let len = |w: &Work, (a, b): (usize, usize)| (w.verts[a] - w.verts[b]).norm();

    let mut long: Vec<((usize, usize), f64)> = w
        .edges()
        .into_iter()
        .map(|e| (e, len(&w, e)))
        .filter(|&(_, l)| l > params.max_edge)
        .collect();
    long.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    for ((a, b), _) in long {
        if w.split(a, b) {
            stats.splits += 1;
        }
    }

    let short: Vec<(usize, usize)> = w
        .edges()
        .into_iter()
        .filter(|&e| len(&w, e) < params.min_edge)
        .collect();
    let mut removed = vec![false; w.verts.len()];
    for (a, b) in short {
        if removed[a] || removed[b] || len(&w, (a, b)) >= params.min_edge {
            continue;
        }
        if w.collapse(a, b, params.max_edge) {
            removed[b] = true;
            stats.collapses += 1;
        }
    }

    if params.flips {
        for (a, b) in w.edges() {
            if w.flip(a, b) {
                stats.flips += 1;
            }
        }
    }

    if params.smoothing > 0.0 {
        w.smooth(params.smoothing);
    } else if stats == RemeshStats::default() {
        return (mesh.clone(), stats);
    }
    (w.finish(), stats)
}
