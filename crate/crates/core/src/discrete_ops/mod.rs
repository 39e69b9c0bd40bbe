//! Discrete curvature operators and the scalar functionals built on them.
//!
//! The mean-curvature vector at vertex `i` is the cotangent Laplacian of the
//! embedding normalized by the mixed Voronoi area,
//!
//! ```text
//! H_i = 1/(4 A_i) · Σ_j (cot α_ij + cot β_ij) (x_j − x_i)
//! ```
//!
//! which is the arithmetic-mean convention: a round sphere of radius `r`
//! gives `|H| = 1/r`, pointing to the center. The Willmore energy is
//! `W = Σ_i |H_i|² A_i`, so a round sphere has `W ≈ 4π` at any radius.
//! Gaussian curvature is the angle defect over the same vertex area.

mod gradient;
mod monotonicity;

pub use gradient::{energy_and_gradient, wlambda_gradient, EnergyValue};
pub use monotonicity::{monotonicity_residual, MonotonicityResidual};

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use crate::mesh::{TriMesh, Vec3, DEFAULT_DEGENERACY_FACTOR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("degenerate triangle {triangle} (area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("vertex {vertex} has zero area")]
    IsolatedVertex { vertex: usize },
    #[error("lambda must be finite and nonnegative, got {0}")]
    BadLambda(f64),
    #[error("monotonicity radii must satisfy 0 < sigma < rho (sigma = {sigma}, rho = {rho})")]
    BadRadii { sigma: f64, rho: f64 },
}

/// Per-vertex curvature quantities.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub mean_curvature: Vec<Vec3>,
    pub gaussian_curvature: Vec<f64>,
    pub vertex_area: Vec<f64>,
    /// `2π − Σ angles`; sums exactly to `2πχ`.
    pub angle_defect: Vec<f64>,
}

impl CurvatureField {
    pub fn total_gaussian_curvature(&self) -> f64 {
        self.angle_defect.iter().sum()
    }
}

/// Per-triangle quantities shared by the energy, its gradient and the cell
/// decomposition of the monotonicity residual.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TriangleGeometry {
    /// Cotangent of the interior angle at each corner.
    pub cot: [f64; 3],
    pub area: f64,
    /// Corner with an obtuse angle, if any.
    pub obtuse: Option<usize>,
}

impl TriangleGeometry {
    pub fn new(p: [Vec3; 3]) -> Self {
        let mut cot = [0.0; 3];
        let double_area = (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
        let mut obtuse = None;
        for c in 0..3 {
            let u = p[(c + 1) % 3] - p[c];
            let v = p[(c + 2) % 3] - p[c];
            let d = u.dot(&v);
            cot[c] = d / double_area;
            if d < 0.0 {
                obtuse = Some(c);
            }
        }
        TriangleGeometry {
            cot,
            area: 0.5 * double_area,
            obtuse,
        }
    }

    /// Mixed Voronoi area contributed to each corner.
    pub fn mixed_areas(&self, p: &[Vec3; 3]) -> [f64; 3] {
        match self.obtuse {
            Some(o) => {
                let mut a = [0.25 * self.area; 3];
                a[o] = 0.5 * self.area;
                a
            }
            None => {
                let mut a = [0.0; 3];
                for c in 0..3 {
                    let (i, j) = ((c + 1) % 3, (c + 2) % 3);
                    let share = self.cot[c] * (p[i] - p[j]).norm_squared() / 8.0;
                    a[i] += share;
                    a[j] += share;
                }
                a
            }
        }
    }
}

pub(crate) fn degeneracy_floor(mesh: &TriMesh) -> f64 {
    let diag = mesh.bounding_box_diagonal();
    DEFAULT_DEGENERACY_FACTOR * diag * diag
}

/// Cotangent Laplacian `L_i = Σ_j (cot α + cot β)(x_j − x_i)` and mixed areas.
pub(crate) fn laplacian_and_areas(mesh: &TriMesh) -> Result<(Vec<Vec3>, Vec<f64>), CurvatureError> {
    let floor = degeneracy_floor(mesh);
    let n = mesh.vertices.len();
    let mut lap = vec![Vec3::zeros(); n];
    let mut area = vec![0.0; n];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = mesh.corners(t);
        let g = TriangleGeometry::new(p);
        if !(g.area > floor) {
            return Err(CurvatureError::DegenerateTriangle {
                triangle: t,
                area: g.area,
            });
        }
        for c in 0..3 {
            let (a, b) = ((c + 1) % 3, (c + 2) % 3);
            let d = p[b] - p[a];
            lap[tri[a]] += g.cot[c] * d;
            lap[tri[b]] -= g.cot[c] * d;
        }
        let mixed = g.mixed_areas(&p);
        for c in 0..3 {
            area[tri[c]] += mixed[c];
        }
    }
    for (v, &a) in area.iter().enumerate() {
        if !(a > 0.0) {
            return Err(CurvatureError::IsolatedVertex { vertex: v });
        }
    }
    Ok((lap, area))
}

pub fn curvature(mesh: &TriMesh) -> Result<CurvatureField, CurvatureError> {
    let (lap, vertex_area) = laplacian_and_areas(mesh)?;
    let mut angle_sum = vec![0.0; mesh.vertices.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = mesh.corners(t);
        for c in 0..3 {
            let u = p[(c + 1) % 3] - p[c];
            let v = p[(c + 2) % 3] - p[c];
            angle_sum[tri[c]] += u.cross(&v).norm().atan2(u.dot(&v));
        }
    }
    let angle_defect: Vec<f64> = angle_sum.iter().map(|s| 2.0 * PI - s).collect();
    let mean_curvature = lap
        .iter()
        .zip(&vertex_area)
        .map(|(l, a)| l / (4.0 * a))
        .collect();
    let gaussian_curvature = angle_defect
        .iter()
        .zip(&vertex_area)
        .map(|(d, a)| d / a)
        .collect();
    Ok(CurvatureField {
        mean_curvature,
        gaussian_curvature,
        vertex_area,
        angle_defect,
    })
}

/// `(W, |Σ|)` without building the full curvature field.
pub fn willmore_and_area(mesh: &TriMesh) -> Result<(f64, f64), CurvatureError> {
    let (lap, area) = laplacian_and_areas(mesh)?;
    let w = lap
        .iter()
        .zip(&area)
        .map(|(l, a)| l.norm_squared() / (16.0 * a))
        .sum();
    Ok((w, area.iter().sum()))
}

/// `W_Λ = W − Λ|Σ|`.
pub fn wlambda(mesh: &TriMesh, lambda: f64) -> Result<f64, CurvatureError> {
    let (w, a) = willmore_and_area(mesh)?;
    Ok(w - lambda * a)
}

pub(crate) fn euler_characteristic(mesh: &TriMesh) -> i64 {
    let mut edges = std::collections::HashSet::with_capacity(mesh.triangles.len() * 3 / 2);
    let mut used = vec![false; mesh.vertices.len()];
    for tri in &mesh.triangles {
        for c in 0..3 {
            let (a, b) = (tri[c], tri[(c + 1) % 3]);
            edges.insert((a.min(b), a.max(b)));
            used[a] = true;
        }
    }
    let v = used.iter().filter(|&&u| u).count() as i64;
    v - edges.len() as i64 + mesh.triangles.len() as i64
}

/// All scalar functionals of one mesh at a given `Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub willmore: f64,
    pub area: f64,
    pub w_lambda: f64,
    /// `W / |Σ|`.
    pub ratio: f64,
    /// `∫|A|² = 4W − 2·(2πχ)`.
    pub sq_second_ff: f64,
    pub lambda: f64,
    pub euler_characteristic: i64,
}

impl EnergyReport {
    pub const CSV_HEADER: &'static str = "W,area,wLambda,ratio,sqA2,lambda";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.willmore, self.area, self.w_lambda, self.ratio, self.sq_second_ff, self.lambda
        )
    }

    pub fn to_record(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "willmore = {}", self.willmore);
        let _ = writeln!(s, "area = {}", self.area);
        let _ = writeln!(s, "w_lambda = {}", self.w_lambda);
        let _ = writeln!(s, "ratio = {}", self.ratio);
        let _ = writeln!(s, "sq_second_ff = {}", self.sq_second_ff);
        let _ = writeln!(s, "lambda = {}", self.lambda);
        let _ = writeln!(s, "euler_characteristic = {}", self.euler_characteristic);
        s
    }
}

pub fn energy_report(mesh: &TriMesh, lambda: f64) -> Result<EnergyReport, CurvatureError> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(CurvatureError::BadLambda(lambda));
    }
    let (willmore, _) = willmore_and_area(mesh)?;
    let area = mesh.area();
    let chi = euler_characteristic(mesh);
    Ok(EnergyReport {
        willmore,
        area,
        w_lambda: willmore - lambda * area,
        ratio: willmore / area,
        sq_second_ff: 4.0 * willmore - 4.0 * PI * chi as f64,
        lambda,
        euler_characteristic: chi,
    })
}
