//! Sobolev-type preconditioner for the fourth-order energy.
//!
//! Descent directions solve `M d = −g` with
//! `M = D + s² K + s⁴ K D⁻¹ K`, where `K` is the cotangent stiffness matrix,
//! `D` the lumped (mixed) vertex areas and `s` a length scale. All three terms
//! carry units of area, so the direction is scale-covariant, and the `K D⁻¹ K`
//! term flattens the spectrum of the Willmore Hessian so that long-wavelength
//! modes (growth, elongation) are not throttled by the finest edges.

use crate::discrete_ops::TriangleGeometry;
use crate::mesh::{TriMesh, Vec3};

pub(crate) struct SobolevMetric {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    mass: Vec<f64>,
    s2: f64,
    diag: Vec<f64>,
}

impl SobolevMetric {
    pub fn new(mesh: &TriMesh, mass: &[f64], scale: f64) -> Self {
        let n = mesh.vertices.len();
        let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let g = TriangleGeometry::new(mesh.corners(t));
            for c in 0..3 {
                let (a, b) = (tri[(c + 1) % 3], tri[(c + 2) % 3]);
                let w = 0.5 * g.cot[c];
                entries[a].push((b, -w));
                entries[b].push((a, -w));
                entries[a].push((a, w));
                entries[b].push((b, w));
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in &mut entries {
            row.sort_unstable_by_key(|e| e.0);
            let mut last = usize::MAX;
            for &(j, w) in row.iter() {
                if j == last {
                    *vals.last_mut().unwrap() += w;
                } else {
                    cols.push(j);
                    vals.push(w);
                    last = j;
                }
            }
            row_ptr.push(cols.len());
        }
        let s2 = scale * scale;
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let mut kk = 0.0;
            let mut kii = 0.0;
            for e in row_ptr[i]..row_ptr[i + 1] {
                let j = cols[e];
                kk += vals[e] * vals[e] / mass[j];
                if j == i {
                    kii = vals[e];
                }
            }
            diag[i] = mass[i] + s2 * kii + s2 * s2 * kk;
        }
        SobolevMetric {
            row_ptr,
            cols,
            vals,
            mass: mass.to_vec(),
            s2,
            diag,
        }
    }

    fn stiffness(&self, x: &[Vec3], out: &mut [Vec3]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = Vec3::zeros();
            for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += x[self.cols[e]] * self.vals[e];
            }
            *o = acc;
        }
    }

    fn apply(&self, x: &[Vec3], out: &mut [Vec3], tmp: &mut [Vec3]) {
        self.stiffness(x, tmp);
        let kx: Vec<Vec3> = tmp.to_vec();
        for (t, m) in tmp.iter_mut().zip(&self.mass) {
            *t /= *m;
        }
        self.stiffness(tmp, out);
        for i in 0..x.len() {
            out[i] = out[i] * (self.s2 * self.s2) + kx[i] * self.s2 + x[i] * self.mass[i];
        }
    }

    /// Jacobi-preconditioned conjugate gradients for `P M P d = P rhs`, where
    /// `P` removes the component along `normals[i]` at constrained vertices.
    /// Started from zero, so every iterate is a descent direction for `−rhs`
    /// that keeps constrained vertices tangent to the boundary.
    pub fn solve(
        &self,
        rhs: &[Vec3],
        normals: &[Option<Vec3>],
        rel_tol: f64,
        max_iter: usize,
    ) -> Vec<Vec3> {
        let n = rhs.len();
        let dot = |a: &[Vec3], b: &[Vec3]| a.iter().zip(b).map(|(x, y)| x.dot(y)).sum::<f64>();
        let project = |v: &mut [Vec3]| {
            for (x, nrm) in v.iter_mut().zip(normals) {
                if let Some(nrm) = nrm {
                    *x -= nrm * nrm.dot(x);
                }
            }
        };
        let mut x = vec![Vec3::zeros(); n];
        let mut r = rhs.to_vec();
        project(&mut r);
        let mut z: Vec<Vec3> = r.iter().zip(&self.diag).map(|(v, d)| v / *d).collect();
        let mut p = z.clone();
        let mut ap = vec![Vec3::zeros(); n];
        let mut tmp = vec![Vec3::zeros(); n];
        let mut rz = dot(&r, &z);
        let r0 = dot(&r, &r).sqrt();
        if r0 == 0.0 {
            return x;
        }
        for _ in 0..max_iter {
            self.apply(&p, &mut ap, &mut tmp);
            project(&mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += p[i] * alpha;
                r[i] -= ap[i] * alpha;
            }
            if dot(&r, &r).sqrt() <= rel_tol * r0 {
                break;
            }
            for i in 0..n {
                z[i] = r[i] / self.diag[i];
            }
            project(&mut z);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + p[i] * beta;
            }
        }
        x
    }
}
