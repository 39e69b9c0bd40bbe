//! Confinement regions: exact signed distances, closest-point projection and
//! the analytic threshold bracket `[1/R², 1/ε_Ω²]`.

use std::fmt;

use crate::generators::Axis;
use crate::mesh::{TriMesh, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Ball {
        center: Vec3,
        radius: f64,
    },
    /// `r_inner ≤ |x − center| ≤ r_outer`.
    SphericalShell {
        center: Vec3,
        r_outer: f64,
        r_inner: f64,
    },
    /// `|x_axis| ≤ half_width`.
    Slab {
        half_width: f64,
        axis: Axis,
    },
    /// Distance to the coordinate axis at most `radius`.
    InfiniteCylinder {
        axis: Axis,
        radius: f64,
    },
    /// Points of the spheroid `x²/a² + y²/a² + z²/c² ≤ 1` within distance
    /// `delta` of its boundary.
    EllipsoidShell {
        a: f64,
        c: f64,
        delta: f64,
    },
    UnionOfBalls(Vec<(Vec3, f64)>),
    /// `α·Ω`.
    Rescale {
        alpha: f64,
        inner: Box<Domain>,
    },
    /// `Ω + t`.
    Translate {
        offset: Vec3,
        inner: Box<Domain>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainAnalysis {
    /// Radius of the largest thin spherical shell inside Ω̄, when known.
    pub epsilon_omega: Option<f64>,
    pub lambda_lower: f64,
    /// `1/ε_Ω²`, or `1/r²` for the largest contained sphere of radius `r`
    /// on unbounded domains; `+∞` when nothing is known.
    pub lambda_upper: f64,
    pub enclosing_ball_radius: f64,
}

impl DomainAnalysis {
    pub fn contains(&self, lambda: f64, rel_tol: f64) -> bool {
        lambda >= self.lambda_lower * (1.0 - rel_tol) && lambda <= self.lambda_upper * (1.0 + rel_tol)
    }
}

impl Domain {
    pub fn ball(radius: f64) -> Self {
        Domain::Ball {
            center: Vec3::zeros(),
            radius,
        }
    }

    pub fn shell(r_outer: f64, r_inner: f64) -> Self {
        Domain::SphericalShell {
            center: Vec3::zeros(),
            r_outer,
            r_inner,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be positive, got {v}"))
            }
        };
        match self {
            Domain::Ball { radius, .. } => pos("radius", *radius),
            Domain::SphericalShell {
                r_outer, r_inner, ..
            } => {
                pos("r_outer", *r_outer)?;
                pos("r_inner", *r_inner)?;
                if r_inner >= r_outer {
                    return Err("shell requires r_inner < r_outer".into());
                }
                Ok(())
            }
            Domain::Slab { half_width, .. } => pos("half_width", *half_width),
            Domain::InfiniteCylinder { radius, .. } => pos("radius", *radius),
            Domain::EllipsoidShell { a, c, delta } => {
                pos("a", *a)?;
                pos("c", *c)?;
                pos("delta", *delta)?;
                if *delta >= a.min(*c) {
                    return Err("ellipsoid shell requires delta < min(a, c)".into());
                }
                Ok(())
            }
            Domain::UnionOfBalls(balls) => {
                if balls.is_empty() {
                    return Err("union needs at least one ball".into());
                }
                balls.iter().try_for_each(|(_, r)| pos("radius", *r))
            }
            Domain::Rescale { alpha, inner } => {
                pos("alpha", *alpha)?;
                inner.check()
            }
            Domain::Translate { offset, inner } => {
                if !offset.iter().all(|v| v.is_finite()) {
                    return Err("translation must be finite".into());
                }
                inner.check()
            }
        }
    }

    pub fn bounded(&self) -> bool {
        match self {
            Domain::Slab { .. } | Domain::InfiniteCylinder { .. } => false,
            Domain::Rescale { inner, .. } | Domain::Translate { inner, .. } => inner.bounded(),
            _ => true,
        }
    }

    /// Characteristic length used to scale feasibility tolerances.
    pub fn scale(&self) -> f64 {
        match self {
            Domain::Ball { radius, .. } => *radius,
            Domain::SphericalShell { r_outer, .. } => *r_outer,
            Domain::Slab { half_width, .. } => *half_width,
            Domain::InfiniteCylinder { radius, .. } => *radius,
            Domain::EllipsoidShell { a, c, .. } => a.max(*c),
            Domain::UnionOfBalls(balls) => balls.iter().map(|b| b.1).fold(0.0, f64::max),
            Domain::Rescale { alpha, inner } => alpha * inner.scale(),
            Domain::Translate { inner, .. } => inner.scale(),
        }
    }

    /// Exact signed distance to the boundary, negative inside. For a union
    /// of balls the inside value is the deepest member distance, which is
    /// still 1-Lipschitz.
    pub fn signed_distance(&self, x: &Vec3) -> f64 {
        match self {
            Domain::Ball { center, radius } => (x - center).norm() - radius,
            Domain::SphericalShell {
                center,
                r_outer,
                r_inner,
            } => {
                let d = (x - center).norm();
                (d - r_outer).max(r_inner - d)
            }
            Domain::Slab { half_width, axis } => x[axis.index()].abs() - half_width,
            Domain::InfiniteCylinder { axis, radius } => {
                let k = axis.index();
                let mut r = *x;
                r[k] = 0.0;
                r.norm() - radius
            }
            Domain::EllipsoidShell { a, c, delta } => {
                let sd = spheroid_closest(*a, *c, x).1;
                sd.max(-delta - sd)
            }
            Domain::UnionOfBalls(balls) => balls
                .iter()
                .map(|(c, r)| (x - c).norm() - r)
                .fold(f64::INFINITY, f64::min),
            Domain::Rescale { alpha, inner } => alpha * inner.signed_distance(&(x / *alpha)),
            Domain::Translate { offset, inner } => inner.signed_distance(&(x - offset)),
        }
    }

    /// Closest point of the closed domain; the identity on Ω̄.
    pub fn project(&self, x: &Vec3) -> Vec3 {
        match self {
            Domain::Ball { center, radius } => {
                let d = x - center;
                let n = d.norm();
                if n <= *radius {
                    *x
                } else {
                    center + d * (radius / n)
                }
            }
            Domain::SphericalShell {
                center,
                r_outer,
                r_inner,
            } => {
                let d = x - center;
                let n = d.norm();
                if n > *r_outer {
                    center + d * (r_outer / n)
                } else if n < *r_inner {
                    if n == 0.0 {
                        center + Vec3::x() * *r_inner
                    } else {
                        center + d * (r_inner / n)
                    }
                } else {
                    *x
                }
            }
            Domain::Slab { half_width, axis } => {
                let mut p = *x;
                let k = axis.index();
                p[k] = p[k].clamp(-half_width, *half_width);
                p
            }
            Domain::InfiniteCylinder { axis, radius } => {
                let k = axis.index();
                let mut r = *x;
                r[k] = 0.0;
                let n = r.norm();
                if n <= *radius {
                    *x
                } else {
                    x - r * (1.0 - radius / n)
                }
            }
            Domain::EllipsoidShell { a, c, delta } => {
                let (q, sd) = spheroid_closest(*a, *c, x);
                if sd > 0.0 {
                    q
                } else if sd < -delta {
                    // Move toward the boundary until the depth is exactly delta.
                    let depth = -sd;
                    x + (q - x) * ((depth - delta) / depth)
                } else {
                    *x
                }
            }
            Domain::UnionOfBalls(balls) => {
                if balls.iter().any(|(c, r)| (x - c).norm() <= *r) {
                    return *x;
                }
                let mut best = *x;
                let mut best_d = f64::INFINITY;
                for (c, r) in balls {
                    let d = x - c;
                    let n = d.norm();
                    if n - r < best_d {
                        best_d = n - r;
                        best = c + d * (r / n);
                    }
                }
                best
            }
            Domain::Rescale { alpha, inner } => inner.project(&(x / *alpha)) * *alpha,
            Domain::Translate { offset, inner } => inner.project(&(x - offset)) + offset,
        }
    }

    pub fn project_mesh(&self, mesh: &mut TriMesh) -> usize {
        let mut moved = 0;
        for v in &mut mesh.vertices {
            let p = self.project(v);
            if p != *v {
                *v = p;
                moved += 1;
            }
        }
        moved
    }

    pub fn max_signed_distance(&self, mesh: &TriMesh) -> f64 {
        mesh.vertices
            .iter()
            .map(|v| self.signed_distance(v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// A point of Ω̄ suitable as the center of initial surfaces.
    pub fn anchor(&self) -> Vec3 {
        match self {
            Domain::Ball { center, .. } | Domain::SphericalShell { center, .. } => *center,
            Domain::UnionOfBalls(balls) => {
                balls
                    .iter()
                    .fold(&balls[0], |best, b| if b.1 > best.1 { b } else { best })
                    .0
            }
            Domain::Rescale { alpha, inner } => inner.anchor() * *alpha,
            Domain::Translate { offset, inner } => inner.anchor() + offset,
            _ => Vec3::zeros(),
        }
    }

    pub fn analyze(&self) -> DomainAnalysis {
        let (eps, fit, enclosing) = self.radii();
        let enclosing_ball_radius = enclosing.unwrap_or(f64::INFINITY);
        let lambda_upper = match (eps, fit) {
            (Some(e), _) => 1.0 / (e * e),
            (None, Some(r)) => 1.0 / (r * r),
            (None, None) => f64::INFINITY,
        };
        DomainAnalysis {
            epsilon_omega: eps,
            lambda_lower: if enclosing_ball_radius.is_finite() {
                1.0 / (enclosing_ball_radius * enclosing_ball_radius)
            } else {
                0.0
            },
            lambda_upper,
            enclosing_ball_radius,
        }
    }

    /// `(ε_Ω, radius of the largest contained sphere on unbounded domains,
    /// enclosing ball radius)`.
    fn radii(&self) -> (Option<f64>, Option<f64>, Option<f64>) {
        match self {
            Domain::Ball { radius, .. } => (Some(*radius), None, Some(*radius)),
            Domain::SphericalShell { r_outer, .. } => (Some(*r_outer), None, Some(*r_outer)),
            Domain::Slab { half_width, .. } => (None, Some(*half_width), None),
            Domain::InfiniteCylinder { radius, .. } => (None, Some(*radius), None),
            Domain::EllipsoidShell { a, c, delta } => (Some(0.5 * delta), None, Some(a.max(*c))),
            Domain::UnionOfBalls(balls) => {
                let eps = balls.iter().map(|b| b.1).fold(0.0, f64::max);
                (Some(eps), None, Some(union_enclosing_radius(balls)))
            }
            Domain::Rescale { alpha, inner } => {
                let (e, f, r) = inner.radii();
                (e.map(|v| v * alpha), f.map(|v| v * alpha), r.map(|v| v * alpha))
            }
            Domain::Translate { inner, .. } => inner.radii(),
        }
    }
}

/// Smallest `max_i |p − c_i| + r_i` over the member centers, their
/// centroid, and the origin.
fn union_enclosing_radius(balls: &[(Vec3, f64)]) -> f64 {
    let centroid = balls.iter().map(|b| b.0).sum::<Vec3>() / balls.len() as f64;
    balls
        .iter()
        .map(|b| b.0)
        .chain([centroid, Vec3::zeros()])
        .map(|p| {
            balls
                .iter()
                .map(|(c, r)| (p - c).norm() + r)
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Closest point on the spheroid `(x² + y²)/a² + z²/c² = 1` and the signed
/// distance to it.
fn spheroid_closest(a: f64, c: f64, x: &Vec3) -> (Vec3, f64) {
    let rho = (x.x * x.x + x.y * x.y).sqrt();
    let (qr, qz) = ellipse_closest(a, c, rho, x.z.abs());
    let qz = qz.copysign(x.z);
    let (ux, uy) = if rho > 0.0 {
        (x.x / rho, x.y / rho)
    } else {
        (1.0, 0.0)
    };
    let q = Vec3::new(qr * ux, qr * uy, qz);
    let inside = (rho / a).powi(2) + (x.z / c).powi(2) < 1.0;
    let d = (x - q).norm();
    (q, if inside { -d } else { d })
}

/// Closest point on the ellipse `u²/e0² + v²/e1² = 1` to `(y0, y1)` in the
/// first quadrant, by bisection on the Lagrange parameter.
fn ellipse_closest(e0: f64, e1: f64, y0: f64, y1: f64) -> (f64, f64) {
    // Reduce to e0 ≥ e1 by swapping axes.
    if e0 < e1 {
        let (v, u) = ellipse_closest(e1, e0, y1, y0);
        return (u, v);
    }
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g != 0.0 {
                let r0 = (e0 / e1).powi(2);
                let s = root_bisect(r0, z0, z1, g);
                return (r0 * y0 / (s + r0), y1 / (s + 1.0));
            }
            return (y0, y1);
        }
        return (0.0, e1);
    }
    let numer = e0 * y0;
    let denom = e0 * e0 - e1 * e1;
    if numer < denom {
        let xde0 = numer / denom;
        return (e0 * xde0, e1 * (1.0 - xde0 * xde0).max(0.0).sqrt());
    }
    (e0, 0.0)
}

fn root_bisect(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 {
        0.0
    } else {
        (n0 * n0 + z1 * z1).sqrt() - 1.0
    };
    let mut s = 0.0;
    for _ in 0..200 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if gs > 0.0 {
            s0 = s;
        } else if gs < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

fn fmt_vec(v: &Vec3) -> String {
    format!("{},{},{}", v.x, v.y, v.z)
}

/// Renders the config grammar accepted by `crate::config::parse_domain`.
impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Ball { center, radius } => {
                write!(f, "ball(center={}; r={})", fmt_vec(center), radius)
            }
            Domain::SphericalShell {
                center,
                r_outer,
                r_inner,
            } => write!(
                f,
                "shell(center={}; r_outer={}; r_inner={})",
                fmt_vec(center),
                r_outer,
                r_inner
            ),
            Domain::Slab { half_width, axis } => {
                write!(f, "slab(half_width={}; axis={})", half_width, axis.name())
            }
            Domain::InfiniteCylinder { axis, radius } => {
                write!(f, "cylinder(axis={}; r={})", axis.name(), radius)
            }
            Domain::EllipsoidShell { a, c, delta } => {
                write!(f, "ellipsoid_shell(a={a}; c={c}; delta={delta})")
            }
            Domain::UnionOfBalls(balls) => {
                write!(f, "union(")?;
                for (i, (c, r)) in balls.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    write!(f, "ball(center={}; r={})", fmt_vec(c), r)?;
                }
                write!(f, ")")
            }
            Domain::Rescale { alpha, inner } => write!(f, "rescale({alpha}; {inner})"),
            Domain::Translate { offset, inner } => {
                write!(f, "translate({}; {inner})", fmt_vec(offset))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_distance_examples() {
        assert_eq!(Domain::ball(1.0).signed_distance(&Vec3::new(2.0, 0.0, 0.0)), 1.0);
        assert!((Domain::shell(0.5, 0.4).signed_distance(&Vec3::zeros()) - 0.4).abs() < 1e-15);
        let slab = Domain::Slab {
            half_width: 1.0,
            axis: Axis::Z,
        };
        assert_eq!(slab.signed_distance(&Vec3::new(100.0, 100.0, 0.5)), -0.5);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(
            Domain::ball(1.0).project(&Vec3::new(2.0, 0.0, 0.0)),
            Vec3::new(1.0, 0.0, 0.0)
        );
        let inside = Vec3::new(0.1, 0.2, -0.3);
        assert_eq!(Domain::ball(1.0).project(&inside), inside);
        let p = Domain::shell(0.5, 0.4).project(&Vec3::zeros());
        assert!((p - Vec3::new(0.4, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn analysis_brackets() {
        let s = Domain::shell(0.5, 0.5 - 1e-3).analyze();
        assert_eq!(s.epsilon_omega, Some(0.5));
        assert!((s.lambda_lower - 4.0).abs() < 1e-12 && (s.lambda_upper - 4.0).abs() < 1e-12);
        let b = Domain::ball(0.5).analyze();
        assert!((b.lambda_lower - 4.0).abs() < 1e-12 && (b.lambda_upper - 4.0).abs() < 1e-12);
        let r = 0.3;
        let u = Domain::UnionOfBalls(vec![
            (Vec3::new(0.5 - r, 0.0, 0.0), r),
            (Vec3::new(-0.45, 0.0, 0.0), 0.05),
        ])
        .analyze();
        assert_eq!(u.epsilon_omega, Some(r));
        assert!(u.lambda_upper > 4.0);
        assert!(u.lambda_lower <= u.lambda_upper);
        let c = Domain::InfiniteCylinder {
            axis: Axis::Z,
            radius: 1.0,
        }
        .analyze();
        assert_eq!(c.epsilon_omega, None);
        assert!(c.lambda_upper <= 1.0);
        assert_eq!(c.lambda_lower, 0.0);
    }

    #[test]
    fn rescale_divides_bracket() {
        let d = Domain::shell(0.5, 0.4);
        let r = Domain::Rescale {
            alpha: 3.0,
            inner: Box::new(d.clone()),
        };
        assert!((r.analyze().lambda_upper - d.analyze().lambda_upper / 9.0).abs() < 1e-12);
        assert!((r.signed_distance(&Vec3::new(3.0, 0.0, 0.0)) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn spheroid_distance_on_axes_and_for_a_sphere() {
        let d = Domain::EllipsoidShell {
            a: 2.0,
            c: 1.0,
            delta: 0.3,
        };
        assert!((d.signed_distance(&Vec3::new(3.0, 0.0, 0.0)) - 1.0).abs() < 1e-12);
        assert!((d.signed_distance(&Vec3::new(0.0, 0.0, 1.5)) - 0.5).abs() < 1e-12);
        // Depth 0.15 on the short axis: inside the shell.
        assert!((d.signed_distance(&Vec3::new(0.0, 0.0, 0.85)) + 0.15).abs() < 1e-12);
        let round = Domain::EllipsoidShell {
            a: 1.0,
            c: 1.0,
            delta: 0.2,
        };
        let x = Vec3::new(0.3, -0.4, 0.5);
        assert!((round.signed_distance(&x) - (-0.2 - (x.norm() - 1.0))).abs() < 1e-12);
    }

    #[test]
    fn ellipsoid_shell_projection_lands_on_the_shell() {
        let d = Domain::EllipsoidShell {
            a: 1.5,
            c: 0.8,
            delta: 0.2,
        };
        for x in [Vec3::zeros(), Vec3::new(0.2, 0.1, 0.1), Vec3::new(3.0, 1.0, -2.0)] {
            let p = d.project(&x);
            assert!(d.signed_distance(&p) <= 1e-9, "{x:?} -> {p:?}");
        }
    }

    #[test]
    fn display_is_stable() {
        assert_eq!(Domain::ball(0.5).to_string(), "ball(center=0,0,0; r=0.5)");
    }
}
