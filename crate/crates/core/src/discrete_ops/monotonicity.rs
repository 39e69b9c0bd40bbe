//! Discrete evaluation of the two-radius monotonicity identity around a point `y`:
//!
//! ```text
//! |Σ_σ|/σ² + ∫_{Σ_σρ} |H/2 + X⊥/|X|²|²
//!     = |Σ_ρ|/ρ² + ¼∫_{Σ_σρ} |H|² + ∫_{Σ_ρ} ⟨X,H⟩/ρ² − ∫_{Σ_σ} ⟨X,H⟩/σ²
//! ```
//!
//! with `X = x − y`, `Σ_r = Σ ∩ B_r(y)` and `Σ_σρ = Σ_ρ \ Σ_σ`.
//!
//! The surface is split into mixed Voronoi cells, one per (triangle, corner).
//! Every integrand is constant on a cell: `H` and `X` are taken at the cell's
//! vertex and `X⊥` is the component of `X` along the triangle normal. Only the
//! measure of each cell inside each ball comes from geometric clipping
//! (edge/sphere intersections joined by chords). With this choice the identity
//! is exact up to roundoff when both balls contain the whole mesh.

use super::{curvature, CurvatureError, TriangleGeometry};
use crate::mesh::{TriMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityResidual {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / max(|lhs|, 1)`.
    pub residual: f64,
    pub area_sigma: f64,
    pub area_rho: f64,
}

fn circumcenter(a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let n = ab.cross(&ac);
    let num = n.cross(&ab) * ac.norm_squared() + ac.cross(&n) * ab.norm_squared();
    a + num / (2.0 * n.norm_squared())
}

/// The mixed Voronoi cell of each corner as a convex polygon.
fn mixed_cells(p: &[Vec3; 3], g: &TriangleGeometry) -> [Vec<Vec3>; 3] {
    let mid = |i: usize, j: usize| (p[i] + p[j]) * 0.5;
    match g.obtuse {
        None => {
            let cc = circumcenter(&p[0], &p[1], &p[2]);
            std::array::from_fn(|i| {
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                vec![p[i], mid(i, j), cc, mid(i, k)]
            })
        }
        Some(o) => {
            let (j, k) = ((o + 1) % 3, (o + 2) % 3);
            let mut cells: [Vec<Vec3>; 3] = Default::default();
            cells[o] = vec![p[o], mid(o, j), mid(j, k), mid(k, o)];
            cells[j] = vec![p[j], mid(j, k), mid(j, o)];
            cells[k] = vec![p[k], mid(k, o), mid(k, j)];
            cells
        }
    }
}

fn polygon_area(poly: &[Vec3]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = Vec3::zeros();
    for w in 1..poly.len() - 1 {
        acc += (poly[w] - poly[0]).cross(&(poly[w + 1] - poly[0]));
    }
    0.5 * acc.norm()
}

fn point_in_convex_polygon(poly: &[Vec3], q: &Vec3, normal: &Vec3) -> bool {
    let mut sign = 0.0;
    for i in 0..poly.len() {
        let s = (poly[(i + 1) % poly.len()] - poly[i])
            .cross(&(q - poly[i]))
            .dot(normal);
        if s * sign < 0.0 {
            return false;
        }
        if s != 0.0 {
            sign = s;
        }
    }
    true
}

/// Area of the part of a planar convex polygon inside the closed ball `B_r(y)`.
fn clipped_area(poly: &[Vec3], y: &Vec3, r: f64, normal: &Vec3) -> f64 {
    let r2 = r * r;
    let inside = |p: &Vec3| (p - y).norm_squared() <= r2;
    let mut out = Vec::with_capacity(poly.len() * 2);
    let mut crossings = 0usize;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        if inside(&p) {
            out.push(p);
        }
        let d = q - p;
        let f = p - y;
        let a = d.norm_squared();
        let b = 2.0 * f.dot(&d);
        let c = f.norm_squared() - r2;
        let disc = b * b - 4.0 * a * c;
        if a == 0.0 || disc <= 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        // Numerically stable roots of a t² + b t + c.
        let qq = -0.5 * (b + b.signum() * sq);
        let (mut t1, mut t2) = (qq / a, if qq != 0.0 { c / qq } else { -b / (2.0 * a) });
        if t1 > t2 {
            std::mem::swap(&mut t1, &mut t2);
        }
        for t in [t1, t2] {
            if t > 0.0 && t < 1.0 {
                out.push(p + d * t);
                crossings += 1;
            }
        }
    }
    if out.is_empty() && crossings == 0 {
        // The ball may cut the plane in a disc strictly inside the polygon.
        let h = (y - poly[0]).dot(normal);
        let foot = y - normal * h;
        if h * h < r2 && point_in_convex_polygon(poly, &foot, normal) {
            return std::f64::consts::PI * (r2 - h * h);
        }
        return 0.0;
    }
    polygon_area(&out)
}

pub fn monotonicity_residual(
    mesh: &TriMesh,
    y: &Vec3,
    sigma: f64,
    rho: f64,
) -> Result<MonotonicityResidual, CurvatureError> {
    if !(sigma > 0.0 && sigma < rho && rho.is_finite()) {
        return Err(CurvatureError::BadRadii { sigma, rho });
    }
    let field = curvature(mesh)?;
    let (mut area_sigma, mut area_rho) = (0.0, 0.0);
    let (mut perp_term, mut h2_term, mut xh_rho, mut xh_sigma) = (0.0, 0.0, 0.0, 0.0);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = mesh.corners(t);
        let g = TriangleGeometry::new(p);
        let normal = mesh.triangle_normal(t);
        let cells = mixed_cells(&p, &g);
        for (c, cell) in cells.iter().enumerate() {
            let v = tri[c];
            let m_sigma = clipped_area(cell, y, sigma, &normal);
            let m_rho = clipped_area(cell, y, rho, &normal);
            if m_rho == 0.0 && m_sigma == 0.0 {
                continue;
            }
            let h = field.mean_curvature[v];
            let x = mesh.vertices[v] - y;
            let xh = x.dot(&h);
            area_sigma += m_sigma;
            area_rho += m_rho;
            xh_rho += m_rho * xh / (rho * rho);
            xh_sigma += m_sigma * xh / (sigma * sigma);
            let annulus = m_rho - m_sigma;
            if annulus != 0.0 {
                let x2 = x.norm_squared();
                let perp = if x2 > 0.0 {
                    normal * (x.dot(&normal) / x2)
                } else {
                    Vec3::zeros()
                };
                perp_term += annulus * (h * 0.5 + perp).norm_squared();
                h2_term += annulus * 0.25 * h.norm_squared();
            }
        }
    }
    let lhs = area_sigma / (sigma * sigma) + perp_term;
    let rhs = area_rho / (rho * rho) + h2_term + xh_rho - xh_sigma;
    Ok(MonotonicityResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / lhs.abs().max(1.0),
        area_sigma,
        area_rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::icosphere;

    #[test]
    fn cells_reproduce_mixed_areas() {
        for p in [
            [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.3, 0.8, 0.0)],
            [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.5, 0.1, 0.2)],
        ] {
            let g = TriangleGeometry::new(p);
            let mixed = g.mixed_areas(&p);
            let cells = mixed_cells(&p, &g);
            for c in 0..3 {
                assert!((polygon_area(&cells[c]) - mixed[c]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn clipping_full_partial_and_interior_disc() {
        let sq = vec![
            Vec3::new(-1.0, -1.0, 0.0),
            Vec3::new(1.0, -1.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(-1.0, 1.0, 0.0),
        ];
        let n = Vec3::z();
        assert_eq!(clipped_area(&sq, &Vec3::zeros(), 10.0, &n), 4.0);
        let disc = clipped_area(&sq, &Vec3::new(0.0, 0.0, 0.6), 1.0, &n);
        assert!((disc - std::f64::consts::PI * 0.64).abs() < 1e-12);
        // Ball centered on a corner covers a quarter disc (chord-approximated).
        let corner = clipped_area(&sq, &Vec3::new(1.0, 1.0, 0.0), 0.5, &n);
        assert!((corner - 0.125).abs() < 1e-12);
        assert_eq!(clipped_area(&sq, &Vec3::new(5.0, 0.0, 0.0), 1.0, &n), 0.0);
    }

    #[test]
    fn radii_order_enforced() {
        let m = icosphere(1.0, 1);
        assert!(monotonicity_residual(&m, &Vec3::zeros(), 0.5, 0.5).is_err());
        assert!(monotonicity_residual(&m, &Vec3::zeros(), 0.0, 0.5).is_err());
    }
}
