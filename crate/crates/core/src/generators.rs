//! Analytic test surfaces and conformal transforms.
//!
//! Every constructor returns a closed mesh oriented with outward normals.
//! Surfaces of revolution (capped cylinder, pancake) are built around the
//! `z` axis from a meridian profile and then rotated onto the requested axis.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::Rng;
use thiserror::Error;

use crate::mesh::{TriMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit(self) -> Vec3 {
        let mut v = Vec3::zeros();
        v[self.index()] = 1.0;
        v
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    pub fn parse(s: &str) -> Option<Axis> {
        match s.trim() {
            "x" | "X" => Some(Axis::X),
            "y" | "Y" => Some(Axis::Y),
            "z" | "Z" => Some(Axis::Z),
            _ => None,
        }
    }

    /// Maps a point expressed with the symmetry axis along `z` onto this axis.
    fn from_z(self, p: Vec3) -> Vec3 {
        match self {
            Axis::Z => p,
            Axis::X => Vec3::new(p.z, p.x, p.y),
            Axis::Y => Vec3::new(p.y, p.z, p.x),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

fn invalid(msg: impl Into<String>) -> GeneratorError {
    GeneratorError::InvalidSpec(msg.into())
}

/// Parameters of one analytic surface.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Icosphere {
        radius: f64,
        center: Vec3,
        level: u32,
    },
    /// Concentric spheres with radii `r_i = 1/√Λ' + ((i−1)/k)(1 − 1/√Λ')`
    /// (`Λ' = Λ R²`), scaled into the ball of radius `R = ball_radius`.
    Dante {
        lambda: f64,
        k: usize,
        level: u32,
        ball_radius: f64,
    },
    Torus {
        major: f64,
        minor: f64,
        center: Vec3,
        segments_major: usize,
        segments_minor: usize,
    },
    /// Cylinder of the given radius and height closed by two hemispheres.
    CappedCylinder {
        radius: f64,
        height: f64,
        center: Vec3,
        axis: Axis,
        segments: usize,
    },
    /// Spheroid `x²/a² + y²/a² + z²/c² = 1`.
    Ellipsoid {
        a: f64,
        c: f64,
        center: Vec3,
        level: u32,
    },
    /// Two parallel discs of the given radius joined by the outer half of a
    /// torus tube of diameter `thickness`.
    Pancake {
        radius: f64,
        thickness: f64,
        center: Vec3,
        axis: Axis,
        segments: usize,
    },
    DisjointUnion(Vec<GeneratorSpec>),
    /// Image of `base` under the inversion in the sphere `S(center, radius)`.
    Inversion {
        base: Box<GeneratorSpec>,
        center: Vec3,
        radius: f64,
    },
}

impl GeneratorSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorSpec::Icosphere { .. } => "icosphere",
            GeneratorSpec::Dante { .. } => "dante",
            GeneratorSpec::Torus { .. } => "torus",
            GeneratorSpec::CappedCylinder { .. } => "capped_cylinder",
            GeneratorSpec::Ellipsoid { .. } => "ellipsoid",
            GeneratorSpec::Pancake { .. } => "pancake",
            GeneratorSpec::DisjointUnion(_) => "disjoint_union",
            GeneratorSpec::Inversion { .. } => "inversion",
        }
    }

    pub fn icosphere(radius: f64, level: u32) -> Self {
        GeneratorSpec::Icosphere {
            radius,
            center: Vec3::zeros(),
            level,
        }
    }

    pub fn dante(lambda: f64, k: usize) -> Self {
        GeneratorSpec::Dante {
            lambda,
            k,
            level: 3,
            ball_radius: 1.0,
        }
    }

    pub fn torus(major: f64, minor: f64) -> Self {
        GeneratorSpec::Torus {
            major,
            minor,
            center: Vec3::zeros(),
            segments_major: 96,
            segments_minor: 48,
        }
    }

    pub fn capped_cylinder(radius: f64, height: f64) -> Self {
        GeneratorSpec::CappedCylinder {
            radius,
            height,
            center: Vec3::zeros(),
            axis: Axis::Z,
            segments: 32,
        }
    }

    pub fn ellipsoid(a: f64, c: f64) -> Self {
        GeneratorSpec::Ellipsoid {
            a,
            c,
            center: Vec3::zeros(),
            level: 3,
        }
    }

    pub fn pancake(radius: f64, thickness: f64) -> Self {
        GeneratorSpec::Pancake {
            radius,
            thickness,
            center: Vec3::zeros(),
            axis: Axis::Z,
            segments: 48,
        }
    }

    /// The same surface at the next resolution step.
    pub fn refined(&self) -> Self {
        let mut s = self.clone();
        match &mut s {
            GeneratorSpec::Icosphere { level, .. }
            | GeneratorSpec::Dante { level, .. }
            | GeneratorSpec::Ellipsoid { level, .. } => *level += 1,
            GeneratorSpec::Torus {
                segments_major,
                segments_minor,
                ..
            } => {
                *segments_major *= 2;
                *segments_minor *= 2;
            }
            GeneratorSpec::CappedCylinder { segments, .. }
            | GeneratorSpec::Pancake { segments, .. } => *segments *= 2,
            GeneratorSpec::DisjointUnion(parts) => {
                for p in parts.iter_mut() {
                    *p = p.refined();
                }
            }
            GeneratorSpec::Inversion { base, .. } => **base = base.refined(),
        }
        s
    }

    pub fn check(&self) -> Result<(), GeneratorError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            GeneratorSpec::Icosphere { radius, .. } => positive("radius", *radius),
            GeneratorSpec::Dante {
                lambda,
                k,
                ball_radius,
                ..
            } => {
                positive("ball_radius", *ball_radius)?;
                if !(lambda * ball_radius * ball_radius > 1.0) || !lambda.is_finite() {
                    return Err(invalid(format!(
                        "dante requires lambda > 1 (in the unit ball), got lambda = {lambda}"
                    )));
                }
                if *k == 0 {
                    return Err(invalid("dante requires k >= 1"));
                }
                Ok(())
            }
            GeneratorSpec::Torus {
                major,
                minor,
                segments_major,
                segments_minor,
                ..
            } => {
                positive("major", *major)?;
                positive("minor", *minor)?;
                if minor >= major {
                    return Err(invalid("torus requires major radius > minor radius"));
                }
                if *segments_major < 3 || *segments_minor < 3 {
                    return Err(invalid("torus needs at least 3 segments per direction"));
                }
                Ok(())
            }
            GeneratorSpec::CappedCylinder {
                radius,
                height,
                segments,
                ..
            } => {
                positive("radius", *radius)?;
                positive("height", *height)?;
                if *segments < 4 {
                    return Err(invalid("capped cylinder needs at least 4 segments"));
                }
                Ok(())
            }
            GeneratorSpec::Ellipsoid { a, c, .. } => {
                positive("a", *a)?;
                positive("c", *c)
            }
            GeneratorSpec::Pancake {
                radius,
                thickness,
                segments,
                ..
            } => {
                positive("radius", *radius)?;
                positive("thickness", *thickness)?;
                if *segments < 4 {
                    return Err(invalid("pancake needs at least 4 segments"));
                }
                Ok(())
            }
            GeneratorSpec::DisjointUnion(parts) => {
                if parts.is_empty() {
                    return Err(invalid("disjoint union needs at least one part"));
                }
                parts.iter().try_for_each(|p| p.check())
            }
            GeneratorSpec::Inversion { base, radius, .. } => {
                positive("radius", *radius)?;
                base.check()
            }
        }
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<TriMesh, GeneratorError> {
    spec.check()?;
    Ok(match spec {
        GeneratorSpec::Icosphere {
            radius,
            center,
            level,
        } => icosphere(*radius, *level).translated(center),
        GeneratorSpec::Dante {
            lambda,
            k,
            level,
            ball_radius,
        } => {
            let radii = dante_radii(lambda * ball_radius * ball_radius, *k)?;
            let parts: Vec<TriMesh> = radii
                .iter()
                .map(|r| icosphere(r * ball_radius, *level))
                .collect();
            TriMesh::disjoint_union(&parts)
        }
        GeneratorSpec::Torus {
            major,
            minor,
            center,
            segments_major,
            segments_minor,
        } => torus(*major, *minor, *segments_major, *segments_minor).translated(center),
        GeneratorSpec::CappedCylinder {
            radius,
            height,
            center,
            axis,
            segments,
        } => capped_cylinder(*radius, *height, *segments)
            .transformed(|p| axis.from_z(*p))
            .translated(center),
        GeneratorSpec::Ellipsoid {
            a,
            c,
            center,
            level,
        } => icosphere(1.0, *level)
            .transformed(|p| Vec3::new(a * p.x, a * p.y, c * p.z))
            .translated(center),
        GeneratorSpec::Pancake {
            radius,
            thickness,
            center,
            axis,
            segments,
        } => pancake(*radius, *thickness, *segments)
            .transformed(|p| axis.from_z(*p))
            .translated(center),
        GeneratorSpec::DisjointUnion(parts) => {
            let meshes = parts.iter().map(generate).collect::<Result<Vec<_>, _>>()?;
            TriMesh::disjoint_union(&meshes)
        }
        GeneratorSpec::Inversion {
            base,
            center,
            radius,
        } => invert(&generate(base)?, center, *radius)?,
    })
}

/// Radii of Dante's k-surface in the unit ball.
pub fn dante_radii(lambda: f64, k: usize) -> Result<Vec<f64>, GeneratorError> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(invalid(format!("dante requires lambda > 1, got {lambda}")));
    }
    if k == 0 {
        return Err(invalid("dante requires k >= 1"));
    }
    let r1 = 1.0 / lambda.sqrt();
    Ok((1..=k)
        .map(|i| r1 + (i - 1) as f64 / k as f64 * (1.0 - r1))
        .collect())
}

/// `W_Λ(D^k) = 4πk − Λ Σ 4π r_i²` for the unit-ball Dante surface.
pub fn dante_energy_analytic(lambda: f64, k: usize) -> Result<f64, GeneratorError> {
    let radii = dante_radii(lambda, k)?;
    Ok(4.0 * PI * k as f64 - lambda * radii.iter().map(|r| 4.0 * PI * r * r).sum::<f64>())
}

/// Subdivided icosahedron with every vertex on the sphere of the given radius.
pub fn icosphere(radius: f64, level: u32) -> TriMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
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
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for &[a, b, c] in &triangles {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        triangles = next;
    }
    for v in &mut vertices {
        *v *= radius;
    }
    TriMesh::new(vertices, triangles)
}

pub fn torus(major: f64, minor: f64, segments_major: usize, segments_minor: usize) -> TriMesh {
    let mut vertices = Vec::with_capacity(segments_major * segments_minor);
    for i in 0..segments_major {
        let u = 2.0 * PI * i as f64 / segments_major as f64;
        for j in 0..segments_minor {
            let v = 2.0 * PI * j as f64 / segments_minor as f64;
            let rho = major + minor * v.cos();
            vertices.push(Vec3::new(rho * u.cos(), rho * u.sin(), minor * v.sin()));
        }
    }
    let idx = |i: usize, j: usize| (i % segments_major) * segments_minor + (j % segments_minor);
    let mut triangles = Vec::with_capacity(2 * segments_major * segments_minor);
    for i in 0..segments_major {
        for j in 0..segments_minor {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    TriMesh::new(vertices, triangles).oriented_outward()
}

/// Surface of revolution about `z` from a meridian profile `(ρ, z)` running
/// from a pole (`ρ = 0`) to a pole.
fn revolve(profile: &[(f64, f64)], segments: usize) -> TriMesh {
    let rings = profile.len() - 2;
    let mut vertices = Vec::with_capacity(rings * segments + 2);
    vertices.push(Vec3::new(0.0, 0.0, profile[0].1));
    for &(rho, z) in &profile[1..profile.len() - 1] {
        for j in 0..segments {
            let phi = 2.0 * PI * j as f64 / segments as f64;
            vertices.push(Vec3::new(rho * phi.cos(), rho * phi.sin(), z));
        }
    }
    let north = vertices.len();
    vertices.push(Vec3::new(0.0, 0.0, profile[profile.len() - 1].1));
    let ring = |r: usize, j: usize| 1 + r * segments + (j % segments);
    let mut triangles = Vec::new();
    for j in 0..segments {
        triangles.push([0, ring(0, j + 1), ring(0, j)]);
        triangles.push([north, ring(rings - 1, j), ring(rings - 1, j + 1)]);
    }
    for r in 0..rings - 1 {
        for j in 0..segments {
            let (a, b, c, d) = (ring(r, j), ring(r, j + 1), ring(r + 1, j + 1), ring(r + 1, j));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    TriMesh::new(vertices, triangles).oriented_outward()
}

pub fn capped_cylinder(radius: f64, height: f64, segments: usize) -> TriMesh {
    let spacing = 2.0 * PI * radius / segments as f64;
    let cap_steps = (segments / 4).max(2);
    let side_steps = ((height / spacing).round() as usize).max(1);
    let half = 0.5 * height;
    let mut profile = Vec::new();
    for s in 0..=cap_steps {
        let theta = -0.5 * PI + 0.5 * PI * s as f64 / cap_steps as f64;
        profile.push((radius * theta.cos(), -half + radius * theta.sin()));
    }
    for s in 1..side_steps {
        profile.push((radius, -half + height * s as f64 / side_steps as f64));
    }
    for s in 0..=cap_steps {
        let theta = 0.5 * PI * s as f64 / cap_steps as f64;
        profile.push((radius * theta.cos(), half + radius * theta.sin()));
    }
    profile[0].0 = 0.0;
    let last = profile.len() - 1;
    profile[last].0 = 0.0;
    revolve(&profile, segments)
}

pub fn pancake(radius: f64, thickness: f64, segments: usize) -> TriMesh {
    let tube = 0.5 * thickness;
    let spacing = 2.0 * PI * (radius + tube) / segments as f64;
    let rim_steps = ((PI * tube / spacing).round() as usize).max(4);
    let disc_steps = ((radius / spacing).round() as usize).max(2);
    let mut profile = Vec::new();
    for s in 0..disc_steps {
        profile.push((radius * s as f64 / disc_steps as f64, -tube));
    }
    for s in 0..=rim_steps {
        let theta = -0.5 * PI + PI * s as f64 / rim_steps as f64;
        profile.push((radius + tube * theta.cos(), tube * theta.sin()));
    }
    for s in (0..disc_steps).rev() {
        profile.push((radius * s as f64 / disc_steps as f64, tube));
    }
    revolve(&profile, segments)
}

/// Inversion `x ↦ c + ρ²(x − c)/|x − c|²`, re-oriented outward.
pub fn invert(mesh: &TriMesh, center: &Vec3, radius: f64) -> Result<TriMesh, GeneratorError> {
    let scale = mesh.bounding_box_diagonal().max(radius);
    if mesh
        .vertices
        .iter()
        .any(|v| (v - center).norm() <= 1e-12 * scale)
    {
        return Err(invalid("inversion center coincides with a mesh vertex"));
    }
    let r2 = radius * radius;
    Ok(mesh
        .transformed(|x| {
            let d = x - center;
            center + d * (r2 / d.norm_squared())
        })
        .oriented_outward())
}

/// Displaces every vertex along its area-weighted normal by
/// `U(−1, 1) · amplitude · (mean incident edge length)`.
pub fn perturb_normal<R: Rng>(mesh: &TriMesh, amplitude: f64, rng: &mut R) -> TriMesh {
    let n = mesh.vertices.len();
    let mut normals = vec![Vec3::zeros(); n];
    let mut edge_sum = vec![0.0; n];
    let mut edge_count = vec![0usize; n];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = mesh.corners(t);
        let nrm = (b - a).cross(&(c - a));
        for k in 0..3 {
            normals[tri[k]] += nrm;
            let len = (mesh.vertices[tri[k]] - mesh.vertices[tri[(k + 1) % 3]]).norm();
            edge_sum[tri[k]] += len;
            edge_count[tri[k]] += 1;
        }
    }
    let mut out = mesh.clone();
    for v in 0..n {
        let ell = edge_sum[v] / edge_count[v].max(1) as f64;
        let dir = normals[v].try_normalize(0.0).unwrap_or_else(Vec3::zeros);
        out.vertices[v] += dir * (rng.gen_range(-1.0..1.0) * amplitude * ell);
    }
    out
}

/// Multiplies each vertex's distance from `center` by `1 + U(−f, f)`.
pub fn perturb_radial<R: Rng>(mesh: &TriMesh, center: &Vec3, fraction: f64, rng: &mut R) -> TriMesh {
    let mut out = mesh.clone();
    for v in &mut out.vertices {
        let d = *v - center;
        *v = center + d * (1.0 + rng.gen_range(-fraction..fraction));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosahedron_has_unit_circumradius() {
        let m = icosphere(1.0, 0);
        assert_eq!(m.vertices.len(), 12);
        assert_eq!(m.triangles.len(), 20);
        for v in &m.vertices {
            assert!((v.norm() - 1.0).abs() < 1e-15);
        }
        assert!(m.validate().is_ok());
        assert!(m.signed_volume() > 0.0);
    }

    #[test]
    fn icosphere_level_three_vertex_count() {
        assert_eq!(icosphere(1.0, 3).vertices.len(), 642);
    }

    #[test]
    fn dante_radii_for_lambda_four() {
        assert_eq!(dante_radii(4.0, 2).unwrap(), vec![0.5, 0.75]);
        assert!(dante_radii(1.0, 2).is_err());
        assert!(dante_radii(0.5, 1).is_err());
    }

    #[test]
    fn dante_spec_rejects_small_lambda() {
        let err = generate(&GeneratorSpec::dante(0.5, 2)).unwrap_err();
        assert!(err.to_string().contains("requires lambda > 1"));
    }

    #[test]
    fn analytic_dante_values() {
        assert_eq!(dante_energy_analytic(4.0, 1).unwrap(), 0.0);
        // 8π − 4(4π·0.25 + 4π·0.5625) = 8π − 13π
        let expected = 8.0 * PI - 4.0 * (4.0 * PI * 0.25 + 4.0 * PI * 0.5625);
        assert!((dante_energy_analytic(4.0, 2).unwrap() - expected).abs() < 1e-12);
        assert!((expected + 5.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn rescaled_dante_fits_smaller_ball() {
        let spec = GeneratorSpec::Dante {
            lambda: 4.5,
            k: 3,
            level: 1,
            ball_radius: 0.5,
        };
        let m = generate(&spec).unwrap();
        assert!(m.max_radius(&Vec3::zeros()) <= 0.5 + 1e-12);
        assert_eq!(m.split_components().len(), 3);
    }

    #[test]
    fn inversion_rejects_vertex_at_center() {
        let m = icosphere(1.0, 1);
        assert!(invert(&m, &m.vertices[0].clone(), 1.0).is_err());
    }

    #[test]
    fn perturbations_are_seeded() {
        use rand::SeedableRng;
        let m = icosphere(1.0, 2);
        let a = perturb_normal(&m, 0.05, &mut rand_chacha::ChaCha8Rng::seed_from_u64(7));
        let b = perturb_normal(&m, 0.05, &mut rand_chacha::ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
        assert_ne!(a, m);
    }
}
