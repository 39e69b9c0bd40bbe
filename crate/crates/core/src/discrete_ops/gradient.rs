//! Analytic shape gradient of `W_Λ` with respect to vertex positions.
//!
//! Reverse-mode differentiation of
//! `W = Σ_i |L_i|² / (16 A_i)` through the cotangent weights, the mixed
//! Voronoi areas and the triangle areas. The mixed area is only piecewise
//! smooth: the gradient is exact away from right-angled triangles.

use super::{laplacian_and_areas, CurvatureError, TriangleGeometry};
use crate::mesh::{TriMesh, Vec3};

/// Energy terms evaluated alongside the gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyValue {
    pub willmore: f64,
    pub area: f64,
    pub w_lambda: f64,
}

/// Derivatives of `cot(angle at c)` with respect to the two edge vectors
/// `u = x_a − x_c` and `v = x_b − x_c`.
fn cot_derivatives(u: &Vec3, v: &Vec3) -> (Vec3, Vec3) {
    let s = u.cross(v).norm();
    let uv = u.dot(v);
    let s3 = s * s * s;
    let du = v / s - (u * v.norm_squared() - v * uv) * (uv / s3);
    let dv = u / s - (v * u.norm_squared() - u * uv) * (uv / s3);
    (du, dv)
}

pub fn energy_and_gradient(
    mesh: &TriMesh,
    lambda: f64,
) -> Result<(EnergyValue, Vec<Vec3>), CurvatureError> {
    let (lap, area) = laplacian_and_areas(mesh)?;
    let n = mesh.vertices.len();
    let mut willmore = 0.0;
    let mut grad_lap = Vec::with_capacity(n);
    let mut grad_area = Vec::with_capacity(n);
    for (l, &a) in lap.iter().zip(&area) {
        willmore += l.norm_squared() / (16.0 * a);
        grad_lap.push(l / (8.0 * a));
        grad_area.push(-l.norm_squared() / (16.0 * a * a));
    }

    let mut grad = vec![Vec3::zeros(); n];
    let mut total_area = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = mesh.corners(t);
        let g = TriangleGeometry::new(p);
        total_area += g.area;
        for c in 0..3 {
            let (a, b) = ((c + 1) % 3, (c + 2) % 3);
            let (ia, ib, ic) = (tri[a], tri[b], tri[c]);
            let d = p[b] - p[a];
            let diff = grad_lap[ia] - grad_lap[ib];
            let mut g_cot = diff.dot(&d);
            grad[ib] += g.cot[c] * diff;
            grad[ia] -= g.cot[c] * diff;
            if g.obtuse.is_none() {
                let s = (grad_area[ia] + grad_area[ib]) / 8.0;
                g_cot += s * d.norm_squared();
                grad[ib] += (2.0 * s * g.cot[c]) * d;
                grad[ia] -= (2.0 * s * g.cot[c]) * d;
            }
            let (du, dv) = cot_derivatives(&(p[a] - p[c]), &(p[b] - p[c]));
            grad[ia] += g_cot * du;
            grad[ib] += g_cot * dv;
            grad[ic] -= g_cot * (du + dv);
        }

        // d(triangle area) carries both the obtuse mixed-area split and −Λ|Σ|.
        let mut g_tri = -lambda;
        if let Some(o) = g.obtuse {
            for c in 0..3 {
                g_tri += grad_area[tri[c]] * if c == o { 0.5 } else { 0.25 };
            }
        }
        let normal = (p[1] - p[0]).cross(&(p[2] - p[0])).normalize();
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            grad[tri[i]] += (0.5 * g_tri) * normal.cross(&(p[k] - p[j]));
        }
    }
    Ok((
        EnergyValue {
            willmore,
            area: total_area,
            w_lambda: willmore - lambda * total_area,
        },
        grad,
    ))
}

pub fn wlambda_gradient(mesh: &TriMesh, lambda: f64) -> Result<Vec<Vec3>, CurvatureError> {
    energy_and_gradient(mesh, lambda).map(|(_, g)| g)
}
