//! Randomized property suite: every identity and inequality of the
//! confined-Willmore theory that has a mesh-level shadow, checked over a
//! perturbed population of generator meshes.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::discrete_ops::{curvature, monotonicity_residual, willmore_and_area, wlambda};
use crate::generators::{self, GeneratorSpec};
use crate::mesh::{diameter, TriMesh, Vec3};
use crate::parallel::parallel_map;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropertyId {
    ScaleInvariance,
    GaussBonnet,
    SimonLowerBound,
    SphereLowerBound,
    WillmoreVsAreaUnitBall,
    WillmoreVsAreaHalfBall,
    InversionInvariance,
    Monotonicity,
}

impl PropertyId {
    pub const ALL: [PropertyId; 8] = [
        PropertyId::ScaleInvariance,
        PropertyId::GaussBonnet,
        PropertyId::SimonLowerBound,
        PropertyId::SphereLowerBound,
        PropertyId::WillmoreVsAreaUnitBall,
        PropertyId::WillmoreVsAreaHalfBall,
        PropertyId::InversionInvariance,
        PropertyId::Monotonicity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PropertyId::ScaleInvariance => "scale_invariance",
            PropertyId::GaussBonnet => "gauss_bonnet",
            PropertyId::SimonLowerBound => "simon_lower_bound",
            PropertyId::SphereLowerBound => "sphere_lower_bound",
            PropertyId::WillmoreVsAreaUnitBall => "willmore_vs_area_unit_ball",
            PropertyId::WillmoreVsAreaHalfBall => "willmore_vs_area_half_ball",
            PropertyId::InversionInvariance => "inversion_invariance",
            PropertyId::Monotonicity => "monotonicity_identity",
        }
    }

    /// The statement being checked.
    pub fn statement(self) -> &'static str {
        match self {
            PropertyId::ScaleInvariance => {
                "W(aS) = W(S), |aS| = a^2 |S|, W_L(S) = W_{L/a^2}(aS) for a in {0.5, 2, 10}"
            }
            PropertyId::GaussBonnet => "sum of angle defects = 2 pi chi",
            PropertyId::SimonLowerBound => "sqrt(|S|/W) <= diam(S)",
            PropertyId::SphereLowerBound => "W >= 4 pi for connected genus-0 surfaces",
            PropertyId::WillmoreVsAreaUnitBall => "W >= |S| for S inside the closed unit ball",
            PropertyId::WillmoreVsAreaHalfBall => {
                "W >= (7/4)|S| for S inside the closed ball of radius 1/2"
            }
            PropertyId::InversionInvariance => {
                "W(I(S)) = W(S) for a sphere inversion centered off S, improving under refinement"
            }
            PropertyId::Monotonicity => "two-radius monotonicity identity holds up to discretization",
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-property tolerances, scaled uniformly by
/// [`SuiteConfig::tolerance_scale`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Relative error of the exact identities.
    pub identity: f64,
    /// Relative slack of the Simon bound.
    pub simon: f64,
    /// Relative deficit allowed below `4π`.
    pub sphere: f64,
    /// Additive slack of the Willmore-vs-area bounds, in units of area.
    pub willmore_area: f64,
    /// Relative change of `W` under inversion at the finer resolution.
    pub inversion: f64,
    /// Relative residual of the monotonicity identity.
    pub monotonicity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-10,
            simon: 1e-6,
            sphere: 0.01,
            willmore_area: 1e-6,
            inversion: 0.05,
            monotonicity: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub population: Vec<GeneratorSpec>,
    pub samples_per_spec: usize,
    /// Normal noise amplitude range, as a fraction of local edge length.
    pub noise: (f64, f64),
    pub max_retries: usize,
    pub monotonicity_triples: usize,
    pub tolerances: Tolerances,
    pub tolerance_scale: f64,
    pub threads: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            population: default_population(),
            samples_per_spec: 20,
            noise: (0.01, 0.05),
            max_retries: 10,
            monotonicity_triples: 3,
            tolerances: Tolerances::default(),
            tolerance_scale: 1.0,
            threads: 1,
        }
    }
}

pub fn default_population() -> Vec<GeneratorSpec> {
    vec![
        GeneratorSpec::icosphere(1.0, 3),
        GeneratorSpec::icosphere(0.3, 3),
        GeneratorSpec::ellipsoid(1.0, 0.6),
        GeneratorSpec::torus(2f64.sqrt(), 1.0),
        GeneratorSpec::capped_cylinder(0.5, 1.0),
        GeneratorSpec::Dante {
            lambda: 4.0,
            k: 2,
            level: 3,
            ball_radius: 1.0,
        },
    ]
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropertyError {
    #[error("population is empty")]
    EmptyPopulation,
    #[error("invalid suite configuration: {0}")]
    BadConfig(String),
    #[error("population member {spec}: {message}")]
    Generator { spec: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub fingerprint: String,
    /// Signed margin; negative beyond the tolerance means violated.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub id: PropertyId,
    pub statement: &'static str,
    /// Generator specs, noise range and seed that produced the population.
    pub population: String,
    pub meshes_checked: usize,
    pub tolerance: f64,
    pub violations: Vec<Violation>,
    /// Smallest margin over the population (`+∞` if nothing was checked).
    pub worst_slack: f64,
    pub pass: bool,
}

impl PropertyReport {
    pub const CSV_HEADER: &'static str =
        "property,meshes_checked,tolerance,violations,worst_slack,pass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.id,
            self.meshes_checked,
            self.tolerance,
            self.violations.len(),
            self.worst_slack,
            self.pass
        )
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} {}  meshes {:>4}  violations {:>3}  worst slack {:+.3e}  tol {:.1e}  [{}]",
            self.id.as_str(),
            if self.pass { "PASS" } else { "FAIL" },
            self.meshes_checked,
            self.violations.len(),
            self.worst_slack,
            self.tolerance,
            self.statement
        )
    }
}

pub fn suite_csv(reports: &[PropertyReport]) -> String {
    let mut s = String::from(PropertyReport::CSV_HEADER);
    s.push('\n');
    for r in reports {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// One sample's margins: `(property, fingerprint, slack)`.
type Margins = Vec<(PropertyId, String, f64)>;

fn tolerance(id: PropertyId, t: &Tolerances) -> f64 {
    match id {
        PropertyId::ScaleInvariance | PropertyId::GaussBonnet => t.identity,
        PropertyId::SimonLowerBound => t.simon,
        PropertyId::SphereLowerBound => t.sphere,
        PropertyId::WillmoreVsAreaUnitBall | PropertyId::WillmoreVsAreaHalfBall => t.willmore_area,
        PropertyId::InversionInvariance => t.inversion,
        PropertyId::Monotonicity => t.monotonicity,
    }
}

fn sample_rng(seed: u64, spec: usize, sample: usize) -> ChaCha8Rng {
    let mut s = ChaCha8Rng::seed_from_u64(seed);
    let a: u64 = s.gen();
    ChaCha8Rng::seed_from_u64(a ^ ((spec as u64) << 32) ^ sample as u64)
}

/// Scales `mesh` about its bounding-box center, placed at the origin, so
/// that it lies in the closed ball of radius `r`.
fn confine(mesh: &TriMesh, r: f64) -> TriMesh {
    let (lo, hi) = mesh.bounding_box();
    let c = (lo + hi) * 0.5;
    let moved = mesh.translated(&-c);
    let reach = moved.max_radius(&Vec3::zeros());
    let mut out = moved.rescaled(r / reach);
    // Guard against the last ulp landing outside the ball.
    for v in &mut out.vertices {
        let n = v.norm();
        if n > r {
            *v *= r / n;
        }
    }
    out
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn sample_margins(mesh: &TriMesh, rng: &mut ChaCha8Rng, triples: usize) -> Margins {
    let fp = mesh.fingerprint();
    let mut out = Margins::new();
    let mut push = |id, slack: f64| out.push((id, fp.clone(), slack));
    let Ok((w, area)) = willmore_and_area(mesh) else {
        for id in PropertyId::ALL {
            if id != PropertyId::InversionInvariance {
                push(id, f64::NEG_INFINITY);
            }
        }
        return out;
    };

    let mut scale_err: f64 = 0.0;
    for alpha in [0.5, 2.0, 10.0] {
        let scaled = mesh.rescaled(alpha);
        match (willmore_and_area(&scaled), wlambda(mesh, 1.0), wlambda(&scaled, 1.0 / (alpha * alpha))) {
            (Ok((ws, as_)), Ok(e), Ok(es)) => {
                scale_err = scale_err
                    .max(relative(ws, w))
                    .max(relative(as_, alpha * alpha * area))
                    .max((es - e).abs() / e.abs().max(w));
            }
            _ => scale_err = f64::INFINITY,
        }
    }
    push(PropertyId::ScaleInvariance, -scale_err);

    let Ok(metrics) = mesh.metrics() else {
        push(PropertyId::GaussBonnet, f64::NEG_INFINITY);
        return out;
    };
    let chi: i64 = metrics.euler_characteristic.iter().sum();
    let gb = match curvature(mesh) {
        Ok(field) => {
            (field.total_gaussian_curvature() - 2.0 * PI * chi as f64).abs()
                / (2.0 * PI * (chi.unsigned_abs().max(1)) as f64)
        }
        Err(_) => f64::INFINITY,
    };
    push(PropertyId::GaussBonnet, -gb);

    let d = diameter(&mesh.vertices);
    push(PropertyId::SimonLowerBound, (d - (area / w).sqrt()) / d);

    if metrics.component_count == 1 && metrics.genus[0] == 0 {
        push(PropertyId::SphereLowerBound, w / (4.0 * PI) - 1.0);
    }

    for (id, r, k) in [
        (PropertyId::WillmoreVsAreaUnitBall, 1.0, 1.0),
        (PropertyId::WillmoreVsAreaHalfBall, 0.5, 1.75),
    ] {
        let confined = confine(mesh, r);
        let slack = match willmore_and_area(&confined) {
            Ok((wc, ac)) => (wc - k * ac) / ac,
            Err(_) => f64::NEG_INFINITY,
        };
        push(id, slack);
    }

    let scale = d.max(f64::MIN_POSITIVE);
    for _ in 0..triples {
        let y = mesh.vertices[rng.gen_range(0..mesh.vertices.len())];
        let rho = rng.gen_range(0.3..1.0) * scale;
        let sigma = rng.gen_range(0.2..0.8) * rho;
        let res = monotonicity_residual(mesh, &y, sigma, rho)
            .map(|r| r.residual)
            .unwrap_or(f64::INFINITY);
        push(PropertyId::Monotonicity, -res);
    }
    out
}

/// Relative change of `W` under inversion at the spec's resolution and one
/// refinement step finer. The inversion center sits `1.5 R` from the
/// bounding-box center along a random direction, `R` the mesh reach.
fn inversion_margin(
    spec: &GeneratorSpec,
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Result<(String, f64), String> {
    let coarse = generators::generate(spec).map_err(|e| e.to_string())?;
    let fine = generators::generate(&spec.refined()).map_err(|e| e.to_string())?;
    let (lo, hi) = coarse.bounding_box();
    let c = (lo + hi) * 0.5;
    let reach = coarse
        .vertices
        .iter()
        .map(|v| (v - c).norm())
        .fold(0.0, f64::max);
    let dir = loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            break v / n;
        }
    };
    let center = c + dir * (1.5 * reach);
    let change = |m: &TriMesh| -> Result<f64, String> {
        let inv = generators::invert(m, &center, reach).map_err(|e| e.to_string())?;
        let (w0, _) = willmore_and_area(m).map_err(|e| e.to_string())?;
        let (w1, _) = willmore_and_area(&inv).map_err(|e| e.to_string())?;
        Ok(relative(w1, w0))
    };
    let (rc, rf) = (change(&coarse)?, change(&fine)?);
    // Failing either requirement yields a negative margin.
    let slack = if rf > rc { tol.min(rc) - rf } else { tol - rf };
    Ok((fine.fingerprint(), slack))
}

fn perturbed_sample(
    base: &TriMesh,
    rng: &mut ChaCha8Rng,
    noise: (f64, f64),
    retries: usize,
) -> Option<TriMesh> {
    for _ in 0..=retries {
        let amp = if noise.1 > noise.0 {
            rng.gen_range(noise.0..noise.1)
        } else {
            noise.0
        };
        let m = generators::perturb_normal(base, amp, rng);
        if m.validate().is_ok() {
            return Some(m);
        }
    }
    None
}

pub fn describe_population(config: &SuiteConfig, seed: u64) -> String {
    let specs: Vec<String> = config.population.iter().map(|s| s.to_string()).collect();
    format!(
        "{} x {} samples, normal noise {}..{} of edge length, seed {}: {}",
        config.population.len(),
        config.samples_per_spec,
        config.noise.0,
        config.noise.1,
        seed,
        specs.join(" | ")
    )
}

/// Evaluates every property over the perturbed population. Deterministic for
/// a given `seed`, independent of `config.threads`.
pub fn run_suite(config: &SuiteConfig, seed: u64) -> Result<Vec<PropertyReport>, PropertyError> {
    if config.population.is_empty() {
        return Err(PropertyError::EmptyPopulation);
    }
    let (lo, hi) = config.noise;
    if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
        return Err(PropertyError::BadConfig(format!("bad noise range {lo}..{hi}")));
    }
    if !(config.tolerance_scale >= 0.0 && config.tolerance_scale.is_finite()) {
        return Err(PropertyError::BadConfig("tolerance_scale must be nonnegative".into()));
    }
    let bases: Vec<TriMesh> = config
        .population
        .iter()
        .map(|s| {
            generators::generate(s).map_err(|e| PropertyError::Generator {
                spec: s.to_string(),
                message: e.to_string(),
            })
        })
        .collect::<Result<_, _>>()?;
    let tol = |id| tolerance(id, &config.tolerances) * config.tolerance_scale;

    let jobs: Vec<(usize, usize)> = (0..bases.len())
        .flat_map(|i| (0..config.samples_per_spec).map(move |j| (i, j)))
        .collect();
    let sample_results: Vec<Margins> = parallel_map(&jobs, config.threads, |&(i, j)| {
        let mut rng = sample_rng(seed, i, j);
        match perturbed_sample(&bases[i], &mut rng, config.noise, config.max_retries) {
            Some(m) => sample_margins(&m, &mut rng, config.monotonicity_triples),
            None => vec![(PropertyId::GaussBonnet, bases[i].fingerprint(), f64::NEG_INFINITY)],
        }
    });
    let spec_idx: Vec<usize> = (0..config.population.len()).collect();
    let inversion: Vec<Result<(String, f64), String>> =
        parallel_map(&spec_idx, config.threads, |&i| {
            let mut rng = sample_rng(seed, i, usize::MAX >> 1);
            inversion_margin(
                &config.population[i],
                &mut rng,
                tol(PropertyId::InversionInvariance),
            )
        });

    let population = describe_population(config, seed);
    let mut reports = Vec::new();
    for id in PropertyId::ALL {
        let margins: Vec<(String, f64)> = if id == PropertyId::InversionInvariance {
            inversion
                .iter()
                .zip(&bases)
                .map(|(r, b)| match r {
                    Ok(m) => m.clone(),
                    Err(_) => (b.fingerprint(), f64::NEG_INFINITY),
                })
                .collect()
        } else {
            sample_results
                .iter()
                .flatten()
                .filter(|(p, _, _)| *p == id)
                .map(|(_, fp, s)| (fp.clone(), *s))
                .collect()
        };
        let t = tol(id);
        // The inversion margin already folds its tolerance in.
        let threshold = if id == PropertyId::InversionInvariance { 0.0 } else { -t };
        let violations: Vec<Violation> = margins
            .iter()
            .filter(|(_, s)| !(*s >= threshold))
            .map(|(fp, s)| Violation {
                fingerprint: fp.clone(),
                slack: *s,
            })
            .collect();
        let worst_slack = margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
        reports.push(PropertyReport {
            id,
            statement: id.statement(),
            population: population.clone(),
            meshes_checked: margins.len(),
            tolerance: t,
            pass: violations.is_empty(),
            violations,
            worst_slack,
        });
    }
    Ok(reports)
}
