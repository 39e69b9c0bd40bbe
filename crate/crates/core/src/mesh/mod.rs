//! Closed, oriented, indexed triangle meshes.
//!
//! [`TriMesh`] is the exchange type for every other module: a flat list of
//! vertex positions and counterclockwise vertex-index triples. Adjacency is
//! never stored; it is rebuilt on demand by the routines that need it.

mod obj;
mod topology;

pub use obj::{read_obj, read_obj_str, write_obj, write_obj_string, ObjError};
pub use topology::{components, EdgeMap};

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Points and displacements in ambient space.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Default relative degeneracy floor: a triangle is degenerate when its area
/// is below `DEFAULT_DEGENERACY_FACTOR * diag²`, `diag` being the bounding box
/// diagonal of the mesh.
pub const DEFAULT_DEGENERACY_FACTOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    /// Optional per-triangle labels (e.g. the Dante sphere index).
    pub labels: Option<Vec<usize>>,
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid mesh: {0}")]
    Invalid(ValidationReport),
    #[error("mesh has no triangles")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    IndexOutOfRange { triangle: usize },
    RepeatedVertex { triangle: usize },
    BoundaryEdge { edge: (usize, usize) },
    NonManifoldEdge { edge: (usize, usize), faces: usize },
    InconsistentOrientation { edge: (usize, usize) },
    DegenerateTriangle { triangle: usize, area: f64 },
    NonFinitePosition { vertex: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IndexOutOfRange { triangle } => {
                write!(f, "vertex index out of range in triangle {triangle}")
            }
            Violation::RepeatedVertex { triangle } => {
                write!(f, "repeated vertex in triangle {triangle}")
            }
            Violation::BoundaryEdge { edge } => {
                write!(f, "edge with one incident face ({}, {})", edge.0, edge.1)
            }
            Violation::NonManifoldEdge { edge, faces } => write!(
                f,
                "edge ({}, {}) shared by {faces} faces",
                edge.0, edge.1
            ),
            Violation::InconsistentOrientation { edge } => {
                write!(f, "inconsistent orientation at edge ({}, {})", edge.0, edge.1)
            }
            Violation::DegenerateTriangle { triangle, area } => {
                write!(f, "degenerate triangle {triangle} (area {area:e})")
            }
            Violation::NonFinitePosition { vertex } => {
                write!(f, "non-finite position at vertex {vertex}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        let shown: Vec<String> = self.violations.iter().take(8).map(|v| v.to_string()).collect();
        write!(f, "{}", shown.join("; "))?;
        if self.violations.len() > 8 {
            write!(f, "; ... ({} total)", self.violations.len())?;
        }
        Ok(())
    }
}

/// Global metric and topological quantities of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshMetrics {
    pub area: f64,
    pub diameter: f64,
    pub component_count: usize,
    pub euler_characteristic: Vec<i64>,
    pub genus: Vec<i64>,
    pub vertex_count: usize,
    pub triangle_count: usize,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Self {
        TriMesh {
            vertices,
            triangles,
            labels: None,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        let [i, j, k] = self.triangles[t];
        [self.vertices[i], self.vertices[j], self.vertices[k]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// Unit normal of triangle `t` (zero for a degenerate triangle).
    pub fn triangle_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.corners(t);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            Vec3::zeros()
        }
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Signed enclosed volume (positive for outward orientation).
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&[i, j, k]| {
                self.vertices[i].dot(&self.vertices[j].cross(&self.vertices[k])) / 6.0
            })
            .sum()
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    pub fn bounding_box_diagonal(&self) -> f64 {
        if self.vertices.is_empty() {
            return 0.0;
        }
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    pub fn centroid(&self) -> Vec3 {
        if self.vertices.is_empty() {
            return Vec3::zeros();
        }
        self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64
    }

    /// Largest distance of any vertex from `center`.
    pub fn max_radius(&self, center: &Vec3) -> f64 {
        self.vertices
            .iter()
            .map(|v| (v - center).norm())
            .fold(0.0, f64::max)
    }

    pub fn mean_edge_length(&self) -> f64 {
        let mut total = 0.0;
        let mut count = 0usize;
        for &[i, j, k] in &self.triangles {
            for (a, b) in [(i, j), (j, k), (k, i)] {
                total += (self.vertices[a] - self.vertices[b]).norm();
                count += 1;
            }
        }
        if count == 0 {
            0.0
        } else {
            total / count as f64
        }
    }

    /// Uniform dilation about the origin.
    pub fn rescaled(&self, alpha: f64) -> TriMesh {
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v *= alpha;
        }
        out
    }

    pub fn translated(&self, t: &Vec3) -> TriMesh {
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v += t;
        }
        out
    }

    pub fn transformed(&self, f: impl Fn(&Vec3) -> Vec3) -> TriMesh {
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v = f(v);
        }
        out
    }

    /// Reverses the winding of every triangle.
    pub fn flipped(&self) -> TriMesh {
        let mut out = self.clone();
        for t in &mut out.triangles {
            t.swap(1, 2);
        }
        out
    }

    /// Re-orients every edge-connected component so that its enclosed signed
    /// volume is positive.
    pub fn oriented_outward(&self) -> TriMesh {
        let mut out = self.clone();
        let labels = components(self);
        let count = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut volume = vec![0.0; count];
        for (t, &[i, j, k]) in self.triangles.iter().enumerate() {
            volume[labels[t]] +=
                self.vertices[i].dot(&self.vertices[j].cross(&self.vertices[k])) / 6.0;
        }
        for (t, tri) in out.triangles.iter_mut().enumerate() {
            if volume[labels[t]] < 0.0 {
                tri.swap(1, 2);
            }
        }
        out
    }

    /// Concatenates meshes, reindexing vertices. Labels record the source index.
    pub fn disjoint_union(parts: &[TriMesh]) -> TriMesh {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut labels = Vec::new();
        for (p, part) in parts.iter().enumerate() {
            let offset = vertices.len();
            vertices.extend_from_slice(&part.vertices);
            for t in &part.triangles {
                triangles.push([t[0] + offset, t[1] + offset, t[2] + offset]);
                labels.push(p);
            }
        }
        TriMesh {
            vertices,
            triangles,
            labels: Some(labels),
        }
    }

    /// Drops vertices no triangle references and renumbers the rest.
    pub fn compacted(&self) -> TriMesh {
        let mut map = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        let mut triangles = Vec::with_capacity(self.triangles.len());
        for t in &self.triangles {
            let mut nt = [0; 3];
            for (c, &v) in t.iter().enumerate() {
                if map[v] == usize::MAX {
                    map[v] = vertices.len();
                    vertices.push(self.vertices[v]);
                }
                nt[c] = map[v];
            }
            triangles.push(nt);
        }
        TriMesh {
            vertices,
            triangles,
            labels: self.labels.clone(),
        }
    }

    /// Order-independent fingerprint of the geometry, used to identify meshes in reports.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: u64| {
            h ^= x;
            h = h.wrapping_mul(0x0100_0000_01b3);
        };
        feed(self.vertices.len() as u64);
        feed(self.triangles.len() as u64);
        for v in &self.vertices {
            for c in v.iter() {
                feed(c.to_bits());
            }
        }
        for t in &self.triangles {
            for &i in t {
                feed(i as u64);
            }
        }
        format!("{h:016x}")
    }

    pub fn validate(&self) -> ValidationReport {
        validate_with(self, DEFAULT_DEGENERACY_FACTOR)
    }

    /// Returns `self` if valid, otherwise the full violation list.
    pub fn validated(self) -> Result<TriMesh, MeshError> {
        if self.triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let report = self.validate();
        if report.is_ok() {
            Ok(self)
        } else {
            Err(MeshError::Invalid(report))
        }
    }

    pub fn metrics(&self) -> Result<MeshMetrics, MeshError> {
        if self.triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let report = self.validate();
        if !report.is_ok() {
            return Err(MeshError::Invalid(report));
        }
        Ok(metrics_unchecked(self))
    }

    /// Splits the mesh into its edge-connected components.
    pub fn split_components(&self) -> Vec<TriMesh> {
        let labels = components(self);
        let count = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut parts: Vec<TriMesh> = (0..count)
            .map(|_| TriMesh::new(self.vertices.clone(), Vec::new()))
            .collect();
        for (t, tri) in self.triangles.iter().enumerate() {
            parts[labels[t]].triangles.push(*tri);
        }
        parts.into_iter().map(|p| p.compacted()).collect()
    }
}

/// Checks every [`TriMesh`] invariant; `degeneracy_factor` scales the area
/// floor relative to the squared bounding-box diagonal.
pub fn validate_with(mesh: &TriMesh, degeneracy_factor: f64) -> ValidationReport {
    let mut violations = Vec::new();
    let n = mesh.vertices.len();
    for (v, p) in mesh.vertices.iter().enumerate() {
        if !p.iter().all(|c| c.is_finite()) {
            violations.push(Violation::NonFinitePosition { vertex: v });
        }
    }
    let mut well_formed = vec![true; mesh.triangles.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if tri.iter().any(|&i| i >= n) {
            violations.push(Violation::IndexOutOfRange { triangle: t });
            well_formed[t] = false;
        } else if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            violations.push(Violation::RepeatedVertex { triangle: t });
            well_formed[t] = false;
        }
    }

    // Directed traversals per undirected edge: (forward count, backward count).
    let mut edges: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if !well_formed[t] {
            continue;
        }
        for c in 0..3 {
            let (a, b) = (tri[c], tri[(c + 1) % 3]);
            let entry = edges.entry((a.min(b), a.max(b))).or_insert((0, 0));
            if a < b {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
    }
    let mut edge_list: Vec<_> = edges.into_iter().collect();
    edge_list.sort_unstable_by_key(|(e, _)| *e);
    for (edge, (fwd, bwd)) in edge_list {
        match fwd + bwd {
            1 => violations.push(Violation::BoundaryEdge { edge }),
            2 => {
                if fwd != 1 {
                    violations.push(Violation::InconsistentOrientation { edge });
                }
            }
            faces => violations.push(Violation::NonManifoldEdge { edge, faces }),
        }
    }

    let diag = mesh.bounding_box_diagonal();
    let floor = degeneracy_factor * diag * diag;
    for t in 0..mesh.triangles.len() {
        if !well_formed[t] {
            continue;
        }
        let area = mesh.triangle_area(t);
        if !(area > floor) {
            violations.push(Violation::DegenerateTriangle { triangle: t, area });
        }
    }
    ValidationReport { violations }
}

fn metrics_unchecked(mesh: &TriMesh) -> MeshMetrics {
    let labels = components(mesh);
    let count = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut faces = vec![0i64; count];
    let mut edge_sets: Vec<std::collections::HashSet<(usize, usize)>> =
        vec![Default::default(); count];
    let mut vertex_sets: Vec<std::collections::HashSet<usize>> = vec![Default::default(); count];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let c = labels[t];
        faces[c] += 1;
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            edge_sets[c].insert((a.min(b), a.max(b)));
            vertex_sets[c].insert(a);
        }
    }
    let euler: Vec<i64> = (0..count)
        .map(|c| vertex_sets[c].len() as i64 - edge_sets[c].len() as i64 + faces[c])
        .collect();
    let genus = euler.iter().map(|chi| (2 - chi) / 2).collect();
    MeshMetrics {
        area: mesh.area(),
        diameter: diameter(&mesh.vertices),
        component_count: count,
        euler_characteristic: euler,
        genus,
        vertex_count: mesh.vertices.len(),
        triangle_count: mesh.triangles.len(),
    }
}

/// Exact maximum pairwise distance between the given points.
pub fn diameter(points: &[Vec3]) -> f64 {
    let mut best2 = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best2 = best2.max((p - q).norm_squared());
        }
    }
    best2.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetrahedron() -> TriMesh {
        TriMesh::new(
            vec![
                Vec3::new(1.0, 1.0, 1.0),
                Vec3::new(1.0, -1.0, -1.0),
                Vec3::new(-1.0, 1.0, -1.0),
                Vec3::new(-1.0, -1.0, 1.0),
            ],
            vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]],
        )
    }

    #[test]
    fn tetrahedron_is_valid_genus_zero() {
        let m = tetrahedron();
        assert!(m.validate().is_ok(), "{}", m.validate());
        let metrics = m.metrics().unwrap();
        assert_eq!(metrics.euler_characteristic, vec![2]);
        assert_eq!(metrics.genus, vec![0]);
        assert!((metrics.diameter - 8f64.sqrt()).abs() < 1e-14);
        assert!(m.signed_volume() > 0.0);
    }

    #[test]
    fn deleted_triangle_reports_boundary() {
        let mut m = tetrahedron();
        m.triangles.pop();
        let report = m.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.to_string().contains("edge with one incident face")));
    }

    #[test]
    fn reversed_triangle_reports_orientation() {
        let mut m = tetrahedron();
        m.triangles[0].swap(1, 2);
        let report = m.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.to_string().contains("inconsistent orientation")));
    }

    #[test]
    fn out_of_range_and_repeated_indices() {
        let mut m = tetrahedron();
        m.triangles[0] = [0, 0, 1];
        m.triangles[1] = [0, 9, 1];
        let report = m.validate();
        assert!(report.violations.contains(&Violation::RepeatedVertex { triangle: 0 }));
        assert!(report.violations.contains(&Violation::IndexOutOfRange { triangle: 1 }));
    }

    #[test]
    fn collapsed_triangle_is_degenerate() {
        let mut m = tetrahedron();
        m.vertices[3] = (m.vertices[0] + m.vertices[2]) * 0.5;
        let report = m.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DegenerateTriangle { .. })));
    }

    #[test]
    fn orientation_fix_per_component() {
        let a = tetrahedron();
        let b = tetrahedron().translated(&Vec3::new(5.0, 0.0, 0.0)).flipped();
        let u = TriMesh::disjoint_union(&[a, b]);
        assert!(u.validate().is_ok());
        let fixed = u.oriented_outward();
        for part in fixed.split_components() {
            assert!(part.signed_volume() > 0.0);
        }
    }
}
