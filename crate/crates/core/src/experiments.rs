//! Λ-sweeps of the empirical infimum `C_Λ`, threshold estimation, the
//! Dante blow-up table, and the dyadic decay-bound check.

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use crate::discrete_ops::wlambda;
use crate::domains::{Domain, DomainAnalysis};
use crate::generators::{self, Axis, GeneratorSpec};
use crate::mesh::{diameter, Vec3};
use crate::optimizer::{minimize, OptimizerConfig, Termination};
use crate::parallel::parallel_map;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("lambda grid is empty")]
    EmptyGrid,
    #[error("no initializers given")]
    NoInitializers,
    #[error("lambda grid must be strictly increasing and positive")]
    BadGrid,
    #[error("every run failed at lambda = {lambda}: {message}")]
    AllRunsFailed { lambda: f64, message: String },
    #[error("insufficient points: need at least {needed} converged records, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("no sign change or divergence onset in the lambda range")]
    NoCrossing,
    #[error("dante study requires lambda > 1, got {0}")]
    DanteLambda(f64),
    #[error("{0}")]
    Generator(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Converged,
    Diverged,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Converged => "converged",
            Classification::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub lambda: f64,
    /// Empirical upper bound on `C_Λ`.
    pub best_energy: f64,
    pub best_area: f64,
    pub best_willmore: f64,
    pub best_diameter: f64,
    pub classification: Classification,
    pub initializer: String,
    pub seed: u64,
    pub iterations: usize,
    pub termination: Termination,
}

impl SweepRecord {
    pub const CSV_HEADER: &'static str = "lambda,best_energy,best_area,best_willmore,best_diameter,classification,initializer,seed,iterations";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},\"{}\",{},{}",
            self.lambda,
            self.best_energy,
            self.best_area,
            self.best_willmore,
            self.best_diameter,
            self.classification.as_str(),
            self.initializer.replace('"', "'"),
            self.seed,
            self.iterations
        )
    }
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut s = String::from(SweepRecord::CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// `λ` against best energy and best area, for external plotting.
pub fn plot_data_csv(records: &[SweepRecord]) -> String {
    let mut s = String::from("lambda,best_energy,best_area\n");
    for r in records {
        let _ = writeln!(s, "{},{},{}", r.lambda, r.best_energy, r.best_area);
    }
    s
}

/// Initial surfaces adapted to the domain: three nested icospheres, an
/// ellipsoid and a capped cylinder for bounded domains; elongated or flat
/// surfaces for the unbounded ones.
pub fn default_initializers(domain: &Domain) -> Vec<GeneratorSpec> {
    match domain {
        Domain::InfiniteCylinder { axis, radius } => vec![GeneratorSpec::CappedCylinder {
            radius: 0.8 * radius,
            height: 1.25 * radius,
            center: Vec3::zeros(),
            axis: *axis,
            segments: 24,
        }],
        Domain::Slab { half_width, axis } => vec![GeneratorSpec::Pancake {
            radius: 3.0 * half_width,
            thickness: 1.9 * half_width,
            center: Vec3::zeros(),
            axis: *axis,
            segments: 48,
        }],
        _ if !domain.bounded() => vec![GeneratorSpec::icosphere(0.5 * domain.scale(), 3)],
        _ => {
            let center = domain.anchor();
            let r = domain.analyze().enclosing_ball_radius;
            let mut out: Vec<GeneratorSpec> = [0.5, 0.7, 0.9]
                .iter()
                .map(|f| GeneratorSpec::Icosphere {
                    radius: f * r,
                    center,
                    level: 3,
                })
                .collect();
            out.push(GeneratorSpec::Ellipsoid {
                a: 0.8 * r,
                c: 0.5 * r,
                center,
                level: 3,
            });
            out.push(GeneratorSpec::CappedCylinder {
                radius: 0.35 * r,
                height: 0.8 * r,
                center,
                axis: Axis::Z,
                segments: 32,
            });
            out
        }
    }
}

/// Fractions of the bracket's upper end `1/ε_Ω²` sampled by default: five
/// points below the threshold and one above it.
pub const DEFAULT_GRID_FRACTIONS: [f64; 6] = [0.125, 0.25, 0.5, 0.75, 0.875, 1.125];

pub fn default_grid(analysis: &DomainAnalysis) -> Vec<f64> {
    DEFAULT_GRID_FRACTIONS
        .iter()
        .map(|f| f * analysis.lambda_upper)
        .collect()
}

struct RunOutcome {
    energy: f64,
    willmore: f64,
    area: f64,
    diameter: f64,
    termination: Termination,
    iterations: usize,
}

fn run_one(
    domain: &Domain,
    lambda: f64,
    spec: &GeneratorSpec,
    config: &OptimizerConfig,
) -> Result<RunOutcome, String> {
    let mesh = generators::generate(spec).map_err(|e| e.to_string())?;
    let (out, trace) = minimize(&mesh, lambda, domain, config).map_err(|e| e.to_string())?;
    if trace.termination == Termination::MeshDegenerate && trace.records.len() <= 1 {
        return Err(trace.reason);
    }
    let last = trace.final_record();
    Ok(RunOutcome {
        energy: last.w_lambda,
        willmore: last.willmore,
        area: last.area,
        diameter: diameter(&out.vertices),
        termination: trace.termination,
        iterations: trace.iterations(),
    })
}

/// For each `λ`, minimizes from every initializer and keeps the lowest final
/// energy. A grid point is `Diverged` when any of its runs detected
/// divergence; the record then reports that run.
pub fn sweep(
    domain: &Domain,
    lambda_grid: &[f64],
    initializers: &[GeneratorSpec],
    config: &OptimizerConfig,
    threads: usize,
) -> Result<Vec<SweepRecord>, ExperimentError> {
    if lambda_grid.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    if initializers.is_empty() {
        return Err(ExperimentError::NoInitializers);
    }
    if lambda_grid.iter().any(|&l| !(l > 0.0 && l.is_finite()))
        || lambda_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(ExperimentError::BadGrid);
    }
    let jobs: Vec<(usize, usize)> = (0..lambda_grid.len())
        .flat_map(|i| (0..initializers.len()).map(move |j| (i, j)))
        .collect();
    let outcomes = parallel_map(&jobs, threads, |&(i, j)| {
        run_one(domain, lambda_grid[i], &initializers[j], config)
    });

    let mut records = Vec::with_capacity(lambda_grid.len());
    for (i, &lambda) in lambda_grid.iter().enumerate() {
        let runs: Vec<(usize, &Result<RunOutcome, String>)> = jobs
            .iter()
            .zip(&outcomes)
            .filter(|((gi, _), _)| *gi == i)
            .map(|((_, j), o)| (*j, o))
            .collect();
        let ok: Vec<(usize, &RunOutcome)> = runs
            .iter()
            .filter_map(|(j, o)| o.as_ref().ok().map(|o| (*j, o)))
            .collect();
        if ok.is_empty() {
            let message = runs
                .iter()
                .filter_map(|(_, o)| o.as_ref().err().cloned())
                .next()
                .unwrap_or_default();
            return Err(ExperimentError::AllRunsFailed { lambda, message });
        }
        let diverged = ok
            .iter()
            .any(|(_, o)| o.termination == Termination::DivergenceDetected);
        let pool: Vec<&(usize, &RunOutcome)> = ok
            .iter()
            .filter(|(_, o)| !diverged || o.termination == Termination::DivergenceDetected)
            .collect();
        let &&(j, best) = pool
            .iter()
            .min_by(|a, b| a.1.energy.total_cmp(&b.1.energy))
            .expect("pool is nonempty");
        records.push(SweepRecord {
            lambda,
            best_energy: best.energy,
            best_area: best.area,
            best_willmore: best.willmore,
            best_diameter: best.diameter,
            classification: if diverged {
                Classification::Diverged
            } else {
                Classification::Converged
            },
            initializer: initializers[j].to_string(),
            seed: config.rng_seed,
            iterations: best.iterations,
            termination: best.termination,
        });
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity (positive means violated
    /// for the sign-type checks).
    pub measured: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    pub checks: Vec<ShapeCheck>,
}

impl ShapeReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&ShapeCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for ShapeReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<22} {}  measured {:.6e}  tolerance {:.3e}",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.measured,
                c.tolerance
            )?;
        }
        Ok(())
    }
}

/// Default concavity slack: 2% of `4π`.
pub const DEFAULT_SHAPE_SLACK: f64 = 0.02 * 4.0 * PI;
/// Relative tolerance on the nondecrease of best areas.
pub const DEFAULT_AREA_TOLERANCE: f64 = 0.01;

/// Checks strict decrease, concavity, nonnegativity and nondecreasing best
/// area on the converged part of a sweep table.
pub fn check_clambda_shape(
    records: &[SweepRecord],
    slack: f64,
    area_tolerance: f64,
) -> Result<ShapeReport, ExperimentError> {
    let pts: Vec<&SweepRecord> = records
        .iter()
        .filter(|r| r.classification == Classification::Converged)
        .collect();
    if pts.len() < 3 {
        return Err(ExperimentError::TooFewPoints {
            needed: 3,
            got: pts.len(),
        });
    }
    let rise = pts
        .windows(2)
        .map(|w| w[1].best_energy - w[0].best_energy)
        .fold(f64::NEG_INFINITY, f64::max);
    let concavity = pts
        .windows(3)
        .map(|w| {
            let t = (w[1].lambda - w[0].lambda) / (w[2].lambda - w[0].lambda);
            let chord = w[0].best_energy + t * (w[2].best_energy - w[0].best_energy);
            chord - w[1].best_energy
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let lowest = pts
        .iter()
        .map(|r| r.best_energy)
        .fold(f64::INFINITY, f64::min);
    let max_area = pts.iter().map(|r| r.best_area).fold(0.0, f64::max);
    let area_drop = pts
        .windows(2)
        .map(|w| w[0].best_area - w[1].best_area)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ShapeReport {
        checks: vec![
            ShapeCheck {
                name: "strictly_decreasing",
                passed: rise < 0.0,
                measured: rise,
                tolerance: 0.0,
            },
            ShapeCheck {
                name: "concave",
                passed: concavity <= slack,
                measured: concavity,
                tolerance: slack,
            },
            ShapeCheck {
                name: "nonnegative",
                passed: lowest >= -slack,
                measured: lowest,
                tolerance: slack,
            },
            ShapeCheck {
                name: "area_nondecreasing",
                passed: area_drop <= area_tolerance * max_area,
                measured: area_drop,
                tolerance: area_tolerance * max_area,
            },
        ],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdEstimate {
    /// Zero crossing of the best energy.
    pub crossing: f64,
    /// `min W/|Σ|` over converged records.
    pub ratio: Option<f64>,
    pub bracket: (f64, f64),
    /// `|crossing − ratio| / crossing`.
    pub disagreement: Option<f64>,
    pub estimators_agree: bool,
    /// The crossing fell back to the midpoint of the onset interval.
    pub midpoint_fallback: bool,
}

impl ThresholdEstimate {
    /// Whether `crossing` lies in the analytic bracket, up to a relative
    /// tolerance (needed when the bracket collapses to a point).
    pub fn inside_bracket(&self, rel_tol: f64) -> bool {
        self.crossing >= self.bracket.0 * (1.0 - rel_tol)
            && self.crossing <= self.bracket.1 * (1.0 + rel_tol)
    }
}

/// Zero crossing of the best energy. Between two converged records of
/// opposite sign it is the linear interpolant. When the first record past
/// zero diverged (its energy is a witness, not a sample of `C_Λ`), the secant
/// through the last two converged records is extended to zero and clamped to
/// the onset interval; by concavity this overestimates the threshold. With a
/// single converged record before the onset, the interval midpoint is used.
pub fn detect_threshold(
    records: &[SweepRecord],
    analysis: &DomainAnalysis,
) -> Result<ThresholdEstimate, ExperimentError> {
    let converged = |r: &SweepRecord| r.classification == Classification::Converged;
    let mut crossing = None;
    for i in 0..records.len().saturating_sub(1) {
        let (a, b) = (&records[i], &records[i + 1]);
        if !(converged(a) && a.best_energy >= 0.0) {
            continue;
        }
        if converged(b) && b.best_energy < 0.0 {
            let t = a.best_energy / (a.best_energy - b.best_energy);
            crossing = Some((a.lambda + t * (b.lambda - a.lambda), false));
            break;
        }
        if !converged(b) {
            let secant = (i > 0 && converged(&records[i - 1]))
                .then(|| &records[i - 1])
                .filter(|p| p.best_energy > a.best_energy)
                .map(|p| {
                    let slope = (a.best_energy - p.best_energy) / (a.lambda - p.lambda);
                    (a.lambda - a.best_energy / slope).clamp(a.lambda, b.lambda)
                });
            crossing = Some(match secant {
                Some(z) => (z, false),
                None => (0.5 * (a.lambda + b.lambda), true),
            });
            break;
        }
    }
    let (crossing, midpoint_fallback) = crossing.ok_or(ExperimentError::NoCrossing)?;
    let ratio = records
        .iter()
        .filter(|r| r.classification == Classification::Converged && r.best_area > 0.0)
        .map(|r| r.best_willmore / r.best_area)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    let disagreement = ratio.map(|r| (crossing - r).abs() / crossing);
    Ok(ThresholdEstimate {
        crossing,
        ratio,
        bracket: (analysis.lambda_lower, analysis.lambda_upper),
        disagreement,
        estimators_agree: disagreement.is_some_and(|d| d <= 0.10),
        midpoint_fallback,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DanteRow {
    pub k: usize,
    pub analytic: f64,
    pub discrete: f64,
    /// `|discrete − analytic| / max(|analytic|, 4π)`; the floor keeps the
    /// critical `k = 1` row (analytic value 0 at `λ = 4`) meaningful.
    pub relative_error: f64,
}

pub fn dante_blowup_study(
    lambda: f64,
    k_max: usize,
    level: u32,
) -> Result<Vec<DanteRow>, ExperimentError> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(ExperimentError::DanteLambda(lambda));
    }
    (1..=k_max)
        .map(|k| {
            let spec = GeneratorSpec::Dante {
                lambda,
                k,
                level,
                ball_radius: 1.0,
            };
            let mesh =
                generators::generate(&spec).map_err(|e| ExperimentError::Generator(e.to_string()))?;
            let analytic = generators::dante_energy_analytic(lambda, k)
                .map_err(|e| ExperimentError::Generator(e.to_string()))?;
            let discrete =
                wlambda(&mesh, lambda).map_err(|e| ExperimentError::Generator(e.to_string()))?;
            Ok(DanteRow {
                k,
                analytic,
                discrete,
                relative_error: (discrete - analytic).abs() / analytic.abs().max(4.0 * PI),
            })
        })
        .collect()
}

pub fn strictly_decreasing(values: impl IntoIterator<Item = f64>) -> bool {
    let v: Vec<f64> = values.into_iter().collect();
    v.windows(2).all(|w| w[1] < w[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub passed: bool,
    pub c: f64,
    pub beta: f64,
    /// Largest `f(x) / (C (x/x₀)^β f(x₀))` over the table.
    pub worst_ratio: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecayHypothesisError {
    #[error("gamma must lie in (1/2, 1), got {0}")]
    Gamma(f64),
    #[error("alpha must lie in (0, 1/8), got {0}")]
    Alpha(f64),
    #[error("x0 must be positive, got {0}")]
    X0(f64),
    #[error("need at least two table values")]
    ShortTable,
    #[error("f(x0) must be positive")]
    ZeroAtX0,
    #[error("value at x0/2^{0} is negative or not finite")]
    Negative(usize),
    #[error("f is not nondecreasing: f(x0/2^{0}) > f(x0/2^{prev})", prev = .0 - 1)]
    NotMonotone(usize),
    #[error("recursion f(x/2) <= gamma f(x) + alpha x^2 fails at x = x0/2^{0}")]
    Recursion(usize),
}

/// `values[n] = f(x₀ / 2ⁿ)`.
pub fn dyadic_table(f: impl Fn(f64) -> f64, x0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|n| f(x0 / 2f64.powi(n as i32))).collect()
}

/// Verifies `f(x) ≤ C (x/x₀)^β f(x₀)` on a dyadic table with the constants
/// of the decay corollary: `h = f + x²`, `β = log₂(1/γ)` (capped by
/// `chosen_beta` if given), `K = 1/γ`, `a = x₀²/f(x₀)` and `C = K(1 + a)`.
pub fn decay_bound_check(
    values: &[f64],
    x0: f64,
    gamma: f64,
    alpha: f64,
    chosen_beta: Option<f64>,
) -> Result<DecayReport, DecayHypothesisError> {
    if !(gamma > 0.5 && gamma < 1.0) {
        return Err(DecayHypothesisError::Gamma(gamma));
    }
    if !(alpha > 0.0 && alpha < 0.125) {
        return Err(DecayHypothesisError::Alpha(alpha));
    }
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(DecayHypothesisError::X0(x0));
    }
    if values.len() < 2 {
        return Err(DecayHypothesisError::ShortTable);
    }
    for (n, &v) in values.iter().enumerate() {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(DecayHypothesisError::Negative(n));
        }
    }
    if !(values[0] > 0.0) {
        return Err(DecayHypothesisError::ZeroAtX0);
    }
    let x = |n: usize| x0 / 2f64.powi(n as i32);
    for n in 1..values.len() {
        if values[n] > values[n - 1] {
            return Err(DecayHypothesisError::NotMonotone(n));
        }
        let xp = x(n - 1);
        if values[n] > gamma * values[n - 1] + alpha * xp * xp {
            return Err(DecayHypothesisError::Recursion(n));
        }
    }
    let mut beta = (1.0 / gamma).log2();
    if let Some(b) = chosen_beta {
        beta = beta.min(b);
    }
    let k = 1.0 / gamma;
    let a = x0 * x0 / values[0];
    let c = k * (1.0 + a);
    let worst_ratio = values
        .iter()
        .enumerate()
        .map(|(n, &v)| v / (c * (x(n) / x0).powf(beta) * values[0]))
        .fold(0.0, f64::max);
    Ok(DecayReport {
        passed: worst_ratio <= 1.0,
        c,
        beta,
        worst_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(lambda: f64, energy: f64, area: f64, willmore: f64) -> SweepRecord {
        SweepRecord {
            lambda,
            best_energy: energy,
            best_area: area,
            best_willmore: willmore,
            best_diameter: 1.0,
            classification: Classification::Converged,
            initializer: String::new(),
            seed: 0,
            iterations: 0,
            termination: Termination::Converged,
        }
    }

    fn line_table() -> Vec<SweepRecord> {
        [0.5, 1.0, 2.0, 3.0, 3.5]
            .iter()
            .map(|&l| record(l, 4.0 * PI - PI * l, PI, 4.0 * PI))
            .collect()
    }

    #[test]
    fn exact_line_passes_shape() {
        let report = check_clambda_shape(&line_table(), DEFAULT_SHAPE_SLACK, 0.0).unwrap();
        assert!(report.passed(), "{report}");
        assert!(report.check("concave").unwrap().measured.abs() < 1e-12);
    }

    #[test]
    fn convex_table_fails_concavity() {
        let table: Vec<SweepRecord> = [0.5, 1.0, 2.0, 3.0]
            .iter()
            .map(|&l| record(l, 10.0 / l, 1.0, 1.0))
            .collect();
        let report = check_clambda_shape(&table, DEFAULT_SHAPE_SLACK, 0.0).unwrap();
        assert!(!report.check("concave").unwrap().passed);
    }

    #[test]
    fn too_few_points() {
        let err = check_clambda_shape(&line_table()[..2], DEFAULT_SHAPE_SLACK, 0.0).unwrap_err();
        assert!(err.to_string().contains("insufficient points"));
    }

    #[test]
    fn crossing_of_the_line_is_four() {
        let mut table = line_table();
        let mut over = record(4.5, 4.0 * PI - 4.5 * PI, PI, 4.0 * PI);
        over.classification = Classification::Diverged;
        table.push(over);
        let analysis = Domain::ball(0.5).analyze();
        let est = detect_threshold(&table, &analysis).unwrap();
        assert!((est.crossing - 4.0).abs() < 1e-12);
        assert!((est.ratio.unwrap() - 4.0).abs() < 1e-12);
        assert!(est.estimators_agree);
        assert!(est.inside_bracket(1e-9));
    }

    #[test]
    fn lone_point_before_onset_uses_midpoint() {
        let mut over = record(4.5, -1e3, PI, 4.0 * PI);
        over.classification = Classification::Diverged;
        let table = vec![record(3.5, PI / 2.0, PI, 4.0 * PI), over];
        let est = detect_threshold(&table, &Domain::ball(0.5).analyze()).unwrap();
        assert!(est.midpoint_fallback);
        assert_eq!(est.crossing, 4.0);
    }

    #[test]
    fn secant_is_clamped_to_the_onset_interval() {
        let mut over = record(3.2, -1e3, PI, 4.0 * PI);
        over.classification = Classification::Diverged;
        let table = vec![record(2.0, 2.0 * PI, PI, 4.0 * PI), record(3.0, 1.9 * PI, PI, 4.0 * PI), over];
        let est = detect_threshold(&table, &Domain::ball(0.5).analyze()).unwrap();
        assert_eq!(est.crossing, 3.2);
    }

    #[test]
    fn no_crossing_is_an_error() {
        let est = detect_threshold(&line_table(), &Domain::ball(0.5).analyze());
        assert_eq!(est, Err(ExperimentError::NoCrossing));
    }

    #[test]
    fn sign_change_interpolates() {
        let table = vec![record(1.0, 2.0, 1.0, 1.0), record(2.0, -2.0, 1.0, 1.0)];
        let est = detect_threshold(&table, &Domain::ball(0.5).analyze()).unwrap();
        assert_eq!(est.crossing, 1.5);
        assert!(!est.midpoint_fallback);
    }

    #[test]
    fn default_grid_of_the_half_ball() {
        let grid = default_grid(&Domain::ball(0.5).analyze());
        let expected = [0.5, 1.0, 2.0, 3.0, 3.5, 4.5];
        for (g, e) in grid.iter().zip(expected) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn dante_rejects_small_lambda() {
        assert_eq!(
            dante_blowup_study(1.0, 3, 1),
            Err(ExperimentError::DanteLambda(1.0))
        );
    }

    #[test]
    fn decay_examples() {
        let t = dyadic_table(|x| x, 1.0, 20);
        assert!(decay_bound_check(&t, 1.0, 0.6, 0.1, None).unwrap().passed);
        let t = dyadic_table(|x| x.powf(0.3), 1.0, 30);
        let r = decay_bound_check(&t, 1.0, 0.9, 0.1, None).unwrap();
        assert!(r.passed);
        assert!((r.beta - (1.0f64 / 0.9).log2()).abs() < 1e-15);
        let mut bad = dyadic_table(|x| x, 1.0, 10);
        bad[4] = 2.0;
        assert!(matches!(
            decay_bound_check(&bad, 1.0, 0.6, 0.1, None),
            Err(DecayHypothesisError::NotMonotone(4))
        ));
    }

    #[test]
    fn decay_parameter_ranges() {
        let t = dyadic_table(|x| x, 1.0, 5);
        assert!(decay_bound_check(&t, 1.0, 0.5, 0.1, None).is_err());
        assert!(decay_bound_check(&t, 1.0, 0.7, 0.125, None).is_err());
    }
}
