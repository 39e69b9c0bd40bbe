//! Projected gradient descent for `W_Λ` over vertex positions in Ω̄.
//!
//! Each iteration moves along `−∇W_Λ / Ā` (`Ā` the mean vertex area), projects
//! every vertex back into the domain and backtracks until the Armijo
//! condition holds for the projected point. Remeshing runs on a fixed cadence.
//!
//! A run stops as
//! * `Converged` when the projected gradient, the energy decrease over a
//!   window, or the line search all stall;
//! * `DivergenceDetected` when the energy drops below the floor, the area
//!   grows past the limit, or (optionally) the energy falls below
//!   `−negative_energy_margin`: any admissible surface with negative energy
//!   already forces `C_Λ = −∞`;
//! * `MeshDegenerate` when a step or remesh cannot produce a valid mesh.

mod precondition;
pub mod remesh;

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use precondition::SobolevMetric;
pub use remesh::{remesh, RemeshParams, RemeshStats};

use crate::discrete_ops::{energy_and_gradient, laplacian_and_areas, CurvatureError, EnergyValue};
use crate::domains::Domain;
use crate::mesh::{TriMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionMode {
    EveryStep,
}

/// Metric used to turn the energy gradient into a descent direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    /// `−∇W_Λ / Ā`.
    None,
    /// `−M⁻¹∇W_Λ` with the Sobolev metric at the surface's own length scale
    /// `√(|Σ|/4π)`.
    Sobolev,
}

impl Preconditioner {
    pub fn as_str(self) -> &'static str {
        match self {
            Preconditioner::None => "none",
            Preconditioner::Sobolev => "sobolev",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Preconditioner::None),
            "sobolev" => Some(Preconditioner::Sobolev),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Largest vertex displacement of a trial step, in mean edge lengths.
    pub initial_step: f64,
    pub backtracking: f64,
    pub sufficient_decrease: f64,
    /// Threshold on the scale-free projected gradient norm.
    pub gradient_tolerance: f64,
    /// Relative energy decrease over `stagnation_window` iterations below
    /// which the run is considered converged.
    pub energy_tolerance: f64,
    pub stagnation_window: usize,
    pub energy_floor: f64,
    pub area_growth_limit: f64,
    pub negative_energy_margin: Option<f64>,
    /// Remesh every this many iterations; `0` disables remeshing.
    pub remesh_every: usize,
    /// Target band `[ℓmin, ℓmax]`; derived from the initial mesh when absent.
    pub edge_band: Option<(f64, f64)>,
    pub rng_seed: u64,
    pub projection: ProjectionMode,
    pub preconditioner: Preconditioner,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iterations: 2000,
            initial_step: 0.1,
            backtracking: 0.5,
            sufficient_decrease: 1e-4,
            gradient_tolerance: 1e-4,
            energy_tolerance: 1e-5,
            stagnation_window: 50,
            energy_floor: -1e3,
            area_growth_limit: 50.0,
            negative_energy_margin: Some(0.5),
            remesh_every: 25,
            edge_band: None,
            rng_seed: 0,
            projection: ProjectionMode::EveryStep,
            preconditioner: Preconditioner::Sobolev,
        }
    }
}

impl OptimizerConfig {
    pub fn check(&self) -> Result<(), OptimizerError> {
        let bad = |m: &str| Err(OptimizerError::BadConfig(m.to_string()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.backtracking > 0.0 && self.backtracking < 1.0) {
            return bad("backtracking must lie in (0, 1)");
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return bad("sufficient_decrease must lie in (0, 1)");
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad("initial_step must be positive");
        }
        if !(self.area_growth_limit > 1.0) {
            return bad("area_growth_limit must exceed 1");
        }
        if let Some(m) = self.negative_energy_margin {
            if !(m >= 0.0 && m.is_finite()) {
                return bad("negative_energy_margin must be nonnegative");
            }
        }
        if let Some((lo, hi)) = self.edge_band {
            if !(lo > 0.0 && lo < hi) {
                return bad("edge band requires 0 < min_edge < max_edge");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    DivergenceDetected,
    MeshDegenerate,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "maxIterations",
            Termination::DivergenceDetected => "divergenceDetected",
            Termination::MeshDegenerate => "meshDegenerate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Termination::Converged,
            Termination::MaxIterations,
            Termination::DivergenceDetected,
            Termination::MeshDegenerate,
        ]
        .into_iter()
        .find(|t| t.as_str() == s)
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub w_lambda: f64,
    pub willmore: f64,
    pub area: f64,
    pub step_taken: f64,
    pub max_vertex_displacement: f64,
    pub projected_vertex_count: usize,
    /// Energy change caused by remeshing at the end of this iteration.
    pub remesh_energy_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    pub reason: String,
    pub wall_time: Duration,
    pub initial_area: f64,
}

impl RunTrace {
    pub const CSV_HEADER: &'static str = "iteration,wLambda,willmore,area,stepTaken,maxVertexDisplacement,projectedVertexCount,remeshEnergyChange";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.iteration,
                r.w_lambda,
                r.willmore,
                r.area,
                r.step_taken,
                r.max_vertex_displacement,
                r.projected_vertex_count,
                r.remesh_energy_change.map(|v| v.to_string()).unwrap_or_default()
            ));
        }
        s
    }

    pub fn final_record(&self) -> &IterationRecord {
        self.records.last().expect("trace has the initial record")
    }

    pub fn iterations(&self) -> usize {
        self.final_record().iteration
    }

    /// Lowest energy seen along the run.
    pub fn best_energy(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.w_lambda)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("initial mesh is invalid: {0}")]
    InvalidInitial(String),
    #[error("initial mesh cannot be projected into the domain: {0}")]
    InfeasibleStart(String),
    #[error("lambda must be finite and nonnegative, got {0}")]
    BadLambda(f64),
    #[error("invalid optimizer config: {0}")]
    BadConfig(String),
    #[error("invalid domain: {0}")]
    BadDomain(String),
}

/// Outward unit normal of the domain boundary near `x`, by central
/// differences of the signed distance.
fn boundary_normal(domain: &Domain, x: &Vec3, h: f64) -> Option<Vec3> {
    let mut g = Vec3::zeros();
    for k in 0..3 {
        let mut p = *x;
        let mut m = *x;
        p[k] += h;
        m[k] -= h;
        g[k] = (domain.signed_distance(&p) - domain.signed_distance(&m)) / (2.0 * h);
    }
    g.try_normalize(1e-12)
}

/// Area-weighted unit vertex normals.
fn vertex_normals(mesh: &TriMesh) -> Vec<Vec3> {
    let mut normals = vec![Vec3::zeros(); mesh.vertices.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = mesh.corners(t);
        let w = (b - a).cross(&(c - a));
        for &v in tri {
            normals[v] += w;
        }
    }
    for nrm in &mut normals {
        *nrm = nrm.try_normalize(0.0).unwrap_or_else(Vec3::zeros);
    }
    normals
}

struct State {
    mesh: TriMesh,
    energy: EnergyValue,
    grad: Vec<Vec3>,
}

fn evaluate(mesh: TriMesh, lambda: f64) -> Result<State, CurvatureError> {
    let (energy, grad) = energy_and_gradient(&mesh, lambda)?;
    Ok(State { mesh, energy, grad })
}

pub fn minimize(
    initial: &TriMesh,
    lambda: f64,
    domain: &Domain,
    config: &OptimizerConfig,
) -> Result<(TriMesh, RunTrace), OptimizerError> {
    let started = Instant::now();
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(OptimizerError::BadLambda(lambda));
    }
    config.check()?;
    domain.check().map_err(OptimizerError::BadDomain)?;
    let report = initial.validate();
    if !report.is_ok() {
        return Err(OptimizerError::InvalidInitial(report.to_string()));
    }
    let scale = domain.scale();
    let feasibility = 1e-9 * scale;
    let normal_h = 1e-7 * scale;

    let mut mesh = initial.clone();
    let projected_initially = domain.project_mesh(&mut mesh);
    if projected_initially > 0 {
        let report = mesh.validate();
        if !report.is_ok() {
            return Err(OptimizerError::InfeasibleStart(report.to_string()));
        }
    }
    let mut state =
        evaluate(mesh, lambda).map_err(|e| OptimizerError::InfeasibleStart(e.to_string()))?;

    let initial_area = state.energy.area;
    let initial_edge = state.mesh.mean_edge_length();
    let (min_edge, max_edge) = config
        .edge_band
        .unwrap_or((0.5 * initial_edge, 1.5 * initial_edge));
    let remesh_params = RemeshParams {
        min_edge,
        max_edge,
        smoothing: 0.5,
        flips: true,
    };

    let mut records = vec![IterationRecord {
        iteration: 0,
        w_lambda: state.energy.w_lambda,
        willmore: state.energy.willmore,
        area: state.energy.area,
        step_taken: 0.0,
        max_vertex_displacement: 0.0,
        projected_vertex_count: projected_initially,
        remesh_energy_change: None,
    }];
    // Energies after each iteration, for the stagnation window.
    let mut history = vec![state.energy.w_lambda];
    let mut step = f64::NAN;

    let finish = |mesh: TriMesh,
                  records: Vec<IterationRecord>,
                  termination: Termination,
                  reason: String| {
        (
            mesh,
            RunTrace {
                records,
                termination,
                reason,
                wall_time: started.elapsed(),
                initial_area,
            },
        )
    };

    if let Some(reason) = divergence(&state.energy, initial_area, config) {
        return Ok(finish(state.mesh, records, Termination::DivergenceDetected, reason));
    }

    for iteration in 1..=config.max_iterations {
        let n = state.mesh.vertices.len();
        // Tangential motion only redistributes vertices, which the discrete
        // energy would otherwise exploit; remeshing owns the tangential part.
        let normals = vertex_normals(&state.mesh);
        let to_normal = |v: &mut [Vec3]| {
            for (x, nrm) in v.iter_mut().zip(&normals) {
                *x = nrm * nrm.dot(x);
            }
        };
        let mut free = state.grad.clone();
        to_normal(&mut free);
        // Drop the outward component of the descent direction at vertices
        // sitting on the boundary.
        let mut active = vec![None; n];
        for (v, g) in free.iter_mut().enumerate() {
            let x = state.mesh.vertices[v];
            if domain.signed_distance(&x) > -feasibility {
                if let Some(nrm) = boundary_normal(domain, &x, normal_h) {
                    let outward = -g.dot(&nrm);
                    if outward > 0.0 {
                        *g += nrm * outward;
                        active[v] = Some(nrm);
                    }
                }
            }
        }
        let (_, areas) = laplacian_and_areas(&state.mesh).expect("state mesh was evaluated");
        let gradient_measure = state.energy.area
            * free
                .iter()
                .zip(&areas)
                .map(|(g, a)| g.norm_squared() / a)
                .sum::<f64>()
                .sqrt()
            / (4.0 * std::f64::consts::PI);
        if gradient_measure < config.gradient_tolerance {
            return Ok(finish(
                state.mesh,
                records,
                Termination::Converged,
                format!("projected gradient {gradient_measure:.3e} below tolerance"),
            ));
        }

        let mut dir: Vec<Vec3> = match config.preconditioner {
            Preconditioner::None => {
                let mean_area = state.energy.area / n as f64;
                free.iter().map(|g| -g / mean_area).collect()
            }
            Preconditioner::Sobolev => {
                let scale = (state.energy.area / (4.0 * std::f64::consts::PI)).sqrt();
                let metric = SobolevMetric::new(&state.mesh, &areas, scale);
                let rhs: Vec<Vec3> = free.iter().map(|g| -g).collect();
                metric.solve(&rhs, &active, 1e-4, 200)
            }
        };
        to_normal(&mut dir);
        let max_dir = dir.iter().map(|d| d.norm()).fold(0.0, f64::max);
        if !(max_dir > 0.0) {
            return Ok(finish(
                state.mesh,
                records,
                Termination::Converged,
                "no admissible descent direction".into(),
            ));
        }
        let edge = state.mesh.mean_edge_length();
        let step_cap = config.initial_step * edge / max_dir;
        step = if step.is_finite() {
            (2.0 * step).min(step_cap)
        } else {
            step_cap
        };

        let mut accepted = None;
        for _ in 0..60 {
            let mut trial = state.mesh.clone();
            let mut projected = 0;
            for (v, d) in trial.vertices.iter_mut().zip(&dir) {
                let moved = *v + d * step;
                let p = domain.project(&moved);
                if p != moved {
                    projected += 1;
                }
                *v = p;
            }
            let decrease: f64 = state
                .grad
                .iter()
                .zip(trial.vertices.iter().zip(&state.mesh.vertices))
                .map(|(g, (a, b))| g.dot(&(a - b)))
                .sum();
            if let Ok(next) = evaluate(trial, lambda) {
                let e0 = state.energy.w_lambda;
                let e1 = next.energy.w_lambda;
                if e1 <= e0 && e1 <= e0 + config.sufficient_decrease * decrease.min(0.0) {
                    accepted = Some((next, projected));
                    break;
                }
            }
            step *= config.backtracking;
        }
        let Some((next, projected)) = accepted else {
            return Ok(finish(
                state.mesh,
                records,
                Termination::Converged,
                "line search found no decrease".into(),
            ));
        };
        let max_disp = next
            .mesh
            .vertices
            .iter()
            .zip(&state.mesh.vertices)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        state = next;
        let mut record = IterationRecord {
            iteration,
            w_lambda: state.energy.w_lambda,
            willmore: state.energy.willmore,
            area: state.energy.area,
            step_taken: step,
            max_vertex_displacement: max_disp,
            projected_vertex_count: projected,
            remesh_energy_change: None,
        };
        history.push(state.energy.w_lambda);

        if let Some(reason) = divergence(&state.energy, initial_area, config) {
            records.push(record);
            return Ok(finish(state.mesh, records, Termination::DivergenceDetected, reason));
        }

        if config.remesh_every > 0 && iteration % config.remesh_every == 0 {
            let before = state.energy.w_lambda;
            let (mut remeshed, stats) = remesh(&state.mesh, &remesh_params);
            if stats != RemeshStats::default() || remesh_params.smoothing > 0.0 {
                domain.project_mesh(&mut remeshed);
                let valid = remeshed.validate();
                if !valid.is_ok() {
                    records.push(record);
                    return Ok(finish(
                        state.mesh,
                        records,
                        Termination::MeshDegenerate,
                        format!("remeshing produced an invalid mesh: {valid}"),
                    ));
                }
                match evaluate(remeshed, lambda) {
                    Ok(s) => {
                        // Keep the smoother mesh only if it does not cost energy
                        // beyond a small tolerance, or if the topology of the
                        // sampling actually changed.
                        let changed = stats != RemeshStats::default();
                        let delta = s.energy.w_lambda - before;
                        if changed || delta <= 0.0 {
                            state = s;
                            record.remesh_energy_change = Some(delta);
                            step = f64::NAN;
                        }
                    }
                    Err(e) => {
                        records.push(record);
                        return Ok(finish(
                            state.mesh,
                            records,
                            Termination::MeshDegenerate,
                            format!("remeshing produced a degenerate mesh: {e}"),
                        ));
                    }
                }
            }
        }
        if let Some(delta) = record.remesh_energy_change {
            // The window measures descent progress only, not remeshing jumps.
            for h in &mut history {
                *h += delta;
            }
        }
        records.push(record);

        let w = config.stagnation_window;
        if w > 0 && history.len() > w {
            let old = history[history.len() - 1 - w];
            let now = state.energy.w_lambda;
            if old - now <= config.energy_tolerance * now.abs().max(1.0) {
                return Ok(finish(
                    state.mesh,
                    records,
                    Termination::Converged,
                    format!("energy decrease below tolerance over {w} iterations"),
                ));
            }
        }
    }
    Ok(finish(
        state.mesh,
        records,
        Termination::MaxIterations,
        "iteration budget exhausted".into(),
    ))
}

fn divergence(energy: &EnergyValue, initial_area: f64, config: &OptimizerConfig) -> Option<String> {
    if energy.w_lambda < config.energy_floor {
        return Some(format!(
            "energy {} below floor {}",
            energy.w_lambda, config.energy_floor
        ));
    }
    if energy.area > config.area_growth_limit * initial_area {
        return Some(format!(
            "area grew by a factor {:.1}",
            energy.area / initial_area
        ));
    }
    if let Some(margin) = config.negative_energy_margin {
        if energy.w_lambda < -margin {
            return Some(format!(
                "negative energy witness {} < -{}",
                energy.w_lambda, margin
            ));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::icosphere;

    #[test]
    fn config_validation() {
        let c = OptimizerConfig {
            backtracking: 1.0,
            ..Default::default()
        };
        assert!(c.check().is_err());
        assert!(OptimizerConfig::default().check().is_ok());
    }

    #[test]
    fn optimal_sphere_converges_quickly() {
        let (out, trace) = minimize(
            &icosphere(1.0, 2),
            1.0,
            &Domain::ball(1.0),
            &OptimizerConfig::default(),
        )
        .unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert!(trace.final_record().w_lambda.abs() < 0.3);
        assert!(out.validate().is_ok());
    }

    #[test]
    fn small_sphere_grows() {
        let m = icosphere(0.3, 2);
        let (_, trace) = minimize(&m, 0.5, &Domain::ball(1.0), &OptimizerConfig::default()).unwrap();
        let first = &trace.records[0];
        let last = trace.final_record();
        assert!(last.area > first.area);
        assert!(last.w_lambda < first.w_lambda);
    }

    #[test]
    fn accepted_steps_never_increase_energy() {
        let m = icosphere(0.5, 2).transformed(|v| Vec3::new(1.2 * v.x, v.y, 0.8 * v.z));
        let config = OptimizerConfig {
            max_iterations: 150,
            ..Default::default()
        };
        let (_, trace) = minimize(&m, 0.5, &Domain::ball(1.0), &config).unwrap();
        for pair in trace.records.windows(2) {
            let before = pair[0].w_lambda + pair[0].remesh_energy_change.unwrap_or(0.0);
            assert!(pair[1].w_lambda <= before + 1e-12);
        }
    }
}
