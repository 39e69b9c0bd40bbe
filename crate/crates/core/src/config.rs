//! Text formats: the domain and generator expression grammar, the
//! line-oriented configuration file, and run manifests.
//!
//! # Expressions
//!
//! ```text
//! expr   := name "(" args ")"
//! args   := arg (";" arg)*          arguments of union(...) use "|" instead
//! arg    := key "=" value | expr | value
//! vec3   := x "," y "," z
//! ```
//!
//! Domains (lengths in model units, `center` defaults to the origin):
//!
//! ```text
//! ball(center=0,0,0; r=1)
//! shell(center=0,0,0; r_outer=0.5; r_inner=0.4)
//! slab(half_width=1; axis=z)
//! cylinder(axis=z; r=1)
//! ellipsoid_shell(a=1; c=0.6; delta=0.1)
//! union(ball(r=1) | ball(center=1.5,0,0; r=1))
//! rescale(2; ball(r=1))
//! translate(1,0,0; ball(r=1))
//! ```
//!
//! Generators (`λ` in 1/length², omitted keys take the defaults shown):
//!
//! ```text
//! icosphere(r=1; center=0,0,0; level=3)
//! dante(lambda=4; k=3; level=3; ball_r=1)
//! torus(major=1.414; minor=1; center=0,0,0; segments=96,48)
//! capped_cylinder(r=0.5; h=1; center=0,0,0; axis=z; segments=32)
//! ellipsoid(a=1; c=0.6; center=0,0,0; level=3)
//! pancake(r=3; thickness=1.9; center=0,0,0; axis=z; segments=48)
//! union(icosphere(r=1) | icosphere(r=0.5))
//! inversion(center=0,0,1.5; r=1; base=icosphere(r=1))
//! ```
//!
//! # Configuration file
//!
//! One `key = value` per line; `#` starts a comment line; `[section]`
//! headers open the `run`, `domain`, `optimizer`, `sweep` and `check`
//! tables. Keys before the first header belong to `run` (`seed`). Repeated
//! `initializer` and `spec` keys accumulate. Manifest sections (`manifest`,
//! `arguments`, `outputs`, `terminations`) are skipped, so a manifest is
//! itself a valid configuration file.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::domains::Domain;
use crate::generators::{Axis, GeneratorSpec};
use crate::mesh::Vec3;
use crate::optimizer::{OptimizerConfig, Preconditioner, ProjectionMode};
use crate::properties::{default_population, SuiteConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("syntax error in `{text}`: {message}")]
    Syntax { text: String, message: String },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn syntax(text: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Syntax {
        text: text.to_string(),
        message: message.into(),
    }
}

/// Splits on `sep` at parenthesis depth zero.
fn split_top(s: &str, sep: char) -> Result<Vec<&str>, ConfigError> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(syntax(s, "unbalanced ')'"));
                }
            }
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(syntax(s, "unbalanced '('"));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

struct Call<'a> {
    text: &'a str,
    name: &'a str,
    named: Vec<(&'a str, &'a str)>,
    positional: Vec<&'a str>,
}

impl<'a> Call<'a> {
    fn parse(text: &'a str, sep: char) -> Result<Self, ConfigError> {
        let t = text.trim();
        let open = t
            .find('(')
            .ok_or_else(|| syntax(t, "expected name(arguments)"))?;
        if !t.ends_with(')') {
            return Err(syntax(t, "expected closing ')'"));
        }
        let name = t[..open].trim();
        let inner = &t[open + 1..t.len() - 1];
        let mut named = Vec::new();
        let mut positional = Vec::new();
        if !inner.trim().is_empty() {
            for part in split_top(inner, sep)? {
                let part = part.trim();
                let eq = part.find('=');
                let paren = part.find('(');
                match eq {
                    Some(e) if paren.map_or(true, |p| e < p) => {
                        let key = part[..e].trim();
                        if named.iter().any(|(k, _)| *k == key) {
                            return Err(syntax(t, format!("duplicate key `{key}`")));
                        }
                        named.push((key, part[e + 1..].trim()));
                    }
                    _ => positional.push(part),
                }
            }
        }
        Ok(Call {
            text: t,
            name,
            named,
            positional,
        })
    }

    fn allow(&self, keys: &[&str]) -> Result<(), ConfigError> {
        for (k, _) in &self.named {
            if !keys.contains(k) {
                return Err(syntax(
                    self.text,
                    format!("unknown key `{k}` for {}; expected one of {}", self.name, keys.join(", ")),
                ));
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.named.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    fn get<T: FromStr>(&self, key: &str, default: Option<T>) -> Result<T, ConfigError> {
        match self.raw(key) {
            Some(v) => v
                .parse()
                .map_err(|_| syntax(self.text, format!("cannot parse `{key}` from `{v}`"))),
            None => default.ok_or_else(|| syntax(self.text, format!("missing `{key}`"))),
        }
    }

    fn vec3(&self, key: &str) -> Result<Vec3, ConfigError> {
        self.raw(key).map_or(Ok(Vec3::zeros()), parse_vec3)
    }

    fn axis(&self) -> Result<Axis, ConfigError> {
        match self.raw("axis") {
            None => Ok(Axis::Z),
            Some(a) => Axis::parse(a).ok_or_else(|| syntax(self.text, format!("bad axis `{a}`"))),
        }
    }
}

pub fn parse_vec3(s: &str) -> Result<Vec3, ConfigError> {
    let xs = parse_list::<f64>(s)?;
    if xs.len() != 3 {
        return Err(syntax(s, "expected three comma-separated numbers"));
    }
    Ok(Vec3::new(xs[0], xs[1], xs[2]))
}

pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, ConfigError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| syntax(s, format!("cannot parse `{}`", x.trim())))
        })
        .collect()
}

fn fmt_vec(v: &Vec3) -> String {
    format!("{},{},{}", v.x, v.y, v.z)
}

fn fmt_list<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn parse_domain(text: &str) -> Result<Domain, ConfigError> {
    let d = parse_domain_unchecked(text)?;
    d.check().map_err(ConfigError::Invalid)?;
    Ok(d)
}

fn parse_domain_unchecked(text: &str) -> Result<Domain, ConfigError> {
    let head = Call::parse(text, if text.trim().starts_with("union") { '|' } else { ';' })?;
    let c = &head;
    Ok(match c.name {
        "ball" => {
            c.allow(&["center", "r"])?;
            Domain::Ball {
                center: c.vec3("center")?,
                radius: c.get("r", None)?,
            }
        }
        "shell" => {
            c.allow(&["center", "r_outer", "r_inner"])?;
            Domain::SphericalShell {
                center: c.vec3("center")?,
                r_outer: c.get("r_outer", None)?,
                r_inner: c.get("r_inner", None)?,
            }
        }
        "slab" => {
            c.allow(&["half_width", "axis"])?;
            Domain::Slab {
                half_width: c.get("half_width", None)?,
                axis: c.axis()?,
            }
        }
        "cylinder" => {
            c.allow(&["axis", "r"])?;
            Domain::InfiniteCylinder {
                axis: c.axis()?,
                radius: c.get("r", None)?,
            }
        }
        "ellipsoid_shell" => {
            c.allow(&["a", "c", "delta"])?;
            Domain::EllipsoidShell {
                a: c.get("a", None)?,
                c: c.get("c", None)?,
                delta: c.get("delta", None)?,
            }
        }
        "union" => {
            c.allow(&[])?;
            let balls = c
                .positional
                .iter()
                .map(|p| match parse_domain_unchecked(p)? {
                    Domain::Ball { center, radius } => Ok((center, radius)),
                    _ => Err(syntax(p, "union members must be balls")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Domain::UnionOfBalls(balls)
        }
        "rescale" | "translate" => {
            c.allow(&[])?;
            let [first, inner] = c.positional[..] else {
                return Err(syntax(c.text, "expected two arguments"));
            };
            let inner = Box::new(parse_domain_unchecked(inner)?);
            if c.name == "rescale" {
                Domain::Rescale {
                    alpha: first
                        .parse()
                        .map_err(|_| syntax(c.text, "bad scale factor"))?,
                    inner,
                }
            } else {
                Domain::Translate {
                    offset: parse_vec3(first)?,
                    inner,
                }
            }
        }
        other => return Err(syntax(c.text, format!("unknown domain `{other}`"))),
    })
}

pub fn parse_generator(text: &str) -> Result<GeneratorSpec, ConfigError> {
    let spec = parse_generator_unchecked(text)?;
    spec.check().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(spec)
}

fn parse_generator_unchecked(text: &str) -> Result<GeneratorSpec, ConfigError> {
    let sep = if text.trim().starts_with("union") { '|' } else { ';' };
    let c = Call::parse(text, sep)?;
    Ok(match c.name {
        "icosphere" => {
            c.allow(&["r", "center", "level"])?;
            GeneratorSpec::Icosphere {
                radius: c.get("r", Some(1.0))?,
                center: c.vec3("center")?,
                level: c.get("level", Some(3))?,
            }
        }
        "dante" => {
            c.allow(&["lambda", "k", "level", "ball_r"])?;
            GeneratorSpec::Dante {
                lambda: c.get("lambda", None)?,
                k: c.get("k", Some(1))?,
                level: c.get("level", Some(3))?,
                ball_radius: c.get("ball_r", Some(1.0))?,
            }
        }
        "torus" => {
            c.allow(&["major", "minor", "center", "segments"])?;
            let segs: Vec<usize> = c.raw("segments").map_or(Ok(vec![96, 48]), parse_list)?;
            let [segments_major, segments_minor] = segs[..] else {
                return Err(syntax(c.text, "segments takes two counts"));
            };
            GeneratorSpec::Torus {
                major: c.get("major", None)?,
                minor: c.get("minor", None)?,
                center: c.vec3("center")?,
                segments_major,
                segments_minor,
            }
        }
        "capped_cylinder" => {
            c.allow(&["r", "h", "center", "axis", "segments"])?;
            GeneratorSpec::CappedCylinder {
                radius: c.get("r", None)?,
                height: c.get("h", None)?,
                center: c.vec3("center")?,
                axis: c.axis()?,
                segments: c.get("segments", Some(32))?,
            }
        }
        "ellipsoid" => {
            c.allow(&["a", "c", "center", "level"])?;
            GeneratorSpec::Ellipsoid {
                a: c.get("a", None)?,
                c: c.get("c", None)?,
                center: c.vec3("center")?,
                level: c.get("level", Some(3))?,
            }
        }
        "pancake" => {
            c.allow(&["r", "thickness", "center", "axis", "segments"])?;
            GeneratorSpec::Pancake {
                radius: c.get("r", None)?,
                thickness: c.get("thickness", None)?,
                center: c.vec3("center")?,
                axis: c.axis()?,
                segments: c.get("segments", Some(48))?,
            }
        }
        "union" => {
            c.allow(&[])?;
            GeneratorSpec::DisjointUnion(
                c.positional
                    .iter()
                    .map(|p| parse_generator_unchecked(p))
                    .collect::<Result<_, _>>()?,
            )
        }
        "inversion" => {
            c.allow(&["center", "r", "base"])?;
            let base = c.raw("base").ok_or_else(|| syntax(c.text, "missing `base`"))?;
            GeneratorSpec::Inversion {
                base: Box::new(parse_generator_unchecked(base)?),
                center: c.vec3("center")?,
                radius: c.get("r", None)?,
            }
        }
        other => return Err(syntax(c.text, format!("unknown generator `{other}`"))),
    })
}

/// Renders the grammar accepted by [`parse_generator`], every field explicit.
impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Icosphere {
                radius,
                center,
                level,
            } => write!(f, "icosphere(r={radius}; center={}; level={level})", fmt_vec(center)),
            GeneratorSpec::Dante {
                lambda,
                k,
                level,
                ball_radius,
            } => write!(f, "dante(lambda={lambda}; k={k}; level={level}; ball_r={ball_radius})"),
            GeneratorSpec::Torus {
                major,
                minor,
                center,
                segments_major,
                segments_minor,
            } => write!(
                f,
                "torus(major={major}; minor={minor}; center={}; segments={segments_major},{segments_minor})",
                fmt_vec(center)
            ),
            GeneratorSpec::CappedCylinder {
                radius,
                height,
                center,
                axis,
                segments,
            } => write!(
                f,
                "capped_cylinder(r={radius}; h={height}; center={}; axis={}; segments={segments})",
                fmt_vec(center),
                axis.name()
            ),
            GeneratorSpec::Ellipsoid {
                a,
                c,
                center,
                level,
            } => write!(f, "ellipsoid(a={a}; c={c}; center={}; level={level})", fmt_vec(center)),
            GeneratorSpec::Pancake {
                radius,
                thickness,
                center,
                axis,
                segments,
            } => write!(
                f,
                "pancake(r={radius}; thickness={thickness}; center={}; axis={}; segments={segments})",
                fmt_vec(center),
                axis.name()
            ),
            GeneratorSpec::DisjointUnion(parts) => {
                write!(f, "union(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
            GeneratorSpec::Inversion {
                base,
                center,
                radius,
            } => write!(f, "inversion(center={}; r={radius}; base={base})", fmt_vec(center)),
        }
    }
}

/// Fully resolved settings of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct LabConfig {
    pub seed: u64,
    pub domain: Option<Domain>,
    pub optimizer: OptimizerConfig,
    /// `λ` grid in 1/length²; `None` selects the domain's default grid.
    pub lambdas: Option<Vec<f64>>,
    /// `None` selects the domain's default initializers.
    pub initializers: Option<Vec<GeneratorSpec>>,
    pub suite: SuiteConfig,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            seed: 0,
            domain: None,
            optimizer: OptimizerConfig::default(),
            lambdas: None,
            initializers: None,
            suite: SuiteConfig::default(),
        }
    }
}

const MANIFEST_SECTIONS: [&str; 4] = ["manifest", "arguments", "outputs", "terminations"];

/// `(line number, section, key, value)` for every assignment.
fn lines(text: &str) -> Result<Vec<(usize, String, String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let n = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or(ConfigError::Line {
                line: n,
                message: "unterminated section header".into(),
            })?;
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Line {
            line: n,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        out.push((n, section.clone(), k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_value<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError::Line {
        line,
        message: format!("cannot parse `{key}` from `{v}`"),
    })
}

fn parse_option<T: FromStr>(line: usize, key: &str, v: &str) -> Result<Option<T>, ConfigError> {
    if v == "none" {
        Ok(None)
    } else {
        parse_value(line, key, v).map(Some)
    }
}

impl LabConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = LabConfig::default();
        let mut initializers: Option<Vec<GeneratorSpec>> = None;
        let mut population: Option<Vec<GeneratorSpec>> = None;
        for (n, section, key, v) in lines(text)? {
            let at = |e: ConfigError| ConfigError::Line {
                line: n,
                message: e.to_string(),
            };
            let unknown = || ConfigError::Line {
                line: n,
                message: format!("unknown key `{key}` in section [{section}]"),
            };
            let o = &mut cfg.optimizer;
            let s = &mut cfg.suite;
            match (section.as_str(), key.as_str()) {
                (sec, _) if MANIFEST_SECTIONS.contains(&sec) => {}
                ("" | "run", "seed") => cfg.seed = parse_value(n, &key, &v)?,
                ("domain", "domain") => {
                    cfg.domain = if v == "none" {
                        None
                    } else {
                        Some(parse_domain(&v).map_err(at)?)
                    }
                }
                ("optimizer", "max_iterations") => o.max_iterations = parse_value(n, &key, &v)?,
                ("optimizer", "initial_step") => o.initial_step = parse_value(n, &key, &v)?,
                ("optimizer", "backtracking") => o.backtracking = parse_value(n, &key, &v)?,
                ("optimizer", "sufficient_decrease") => {
                    o.sufficient_decrease = parse_value(n, &key, &v)?
                }
                ("optimizer", "gradient_tolerance") => {
                    o.gradient_tolerance = parse_value(n, &key, &v)?
                }
                ("optimizer", "energy_tolerance") => o.energy_tolerance = parse_value(n, &key, &v)?,
                ("optimizer", "stagnation_window") => {
                    o.stagnation_window = parse_value(n, &key, &v)?
                }
                ("optimizer", "energy_floor") => o.energy_floor = parse_value(n, &key, &v)?,
                ("optimizer", "area_growth_limit") => {
                    o.area_growth_limit = parse_value(n, &key, &v)?
                }
                ("optimizer", "negative_energy_margin") => {
                    o.negative_energy_margin = parse_option(n, &key, &v)?
                }
                ("optimizer", "remesh_every") => o.remesh_every = parse_value(n, &key, &v)?,
                ("optimizer", "edge_band") => {
                    o.edge_band = if v == "none" {
                        None
                    } else {
                        let xs: Vec<f64> = parse_list(&v).map_err(at)?;
                        let [lo, hi] = xs[..] else {
                            return Err(at(syntax(&v, "edge_band takes two lengths")));
                        };
                        Some((lo, hi))
                    }
                }
                ("optimizer", "rng_seed") => o.rng_seed = parse_value(n, &key, &v)?,
                ("optimizer", "projection") => {
                    if v != "every_step" {
                        return Err(at(syntax(&v, "projection must be every_step")));
                    }
                    o.projection = ProjectionMode::EveryStep;
                }
                ("optimizer", "preconditioner") => {
                    o.preconditioner = Preconditioner::parse(&v)
                        .ok_or_else(|| at(syntax(&v, "expected none or sobolev")))?
                }
                ("sweep", "lambdas") => {
                    cfg.lambdas = if v == "default" {
                        None
                    } else {
                        Some(parse_list(&v).map_err(at)?)
                    }
                }
                ("sweep", "initializer") => initializers
                    .get_or_insert_with(Vec::new)
                    .push(parse_generator(&v).map_err(at)?),
                ("check", "spec") => population
                    .get_or_insert_with(Vec::new)
                    .push(parse_generator(&v).map_err(at)?),
                ("check", "population") => {
                    if v == "default" {
                        population = Some(default_population());
                    } else if v == "empty" {
                        population = Some(Vec::new());
                    } else {
                        return Err(at(syntax(&v, "expected default or empty; list members with `spec =`")));
                    }
                }
                ("check", "samples_per_spec") => s.samples_per_spec = parse_value(n, &key, &v)?,
                ("check", "noise") => {
                    let xs: Vec<f64> = parse_list(&v).map_err(at)?;
                    let [lo, hi] = xs[..] else {
                        return Err(at(syntax(&v, "noise takes two fractions")));
                    };
                    s.noise = (lo, hi);
                }
                ("check", "max_retries") => s.max_retries = parse_value(n, &key, &v)?,
                ("check", "monotonicity_triples") => {
                    s.monotonicity_triples = parse_value(n, &key, &v)?
                }
                ("check", "tolerance_scale") => s.tolerance_scale = parse_value(n, &key, &v)?,
                ("check", "tol_identity") => s.tolerances.identity = parse_value(n, &key, &v)?,
                ("check", "tol_simon") => s.tolerances.simon = parse_value(n, &key, &v)?,
                ("check", "tol_sphere") => s.tolerances.sphere = parse_value(n, &key, &v)?,
                ("check", "tol_willmore_area") => {
                    s.tolerances.willmore_area = parse_value(n, &key, &v)?
                }
                ("check", "tol_inversion") => s.tolerances.inversion = parse_value(n, &key, &v)?,
                ("check", "tol_monotonicity") => {
                    s.tolerances.monotonicity = parse_value(n, &key, &v)?
                }
                _ => return Err(unknown()),
            }
        }
        cfg.initializers = initializers;
        if let Some(p) = population {
            cfg.suite.population = p;
        }
        cfg.optimizer
            .check()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let o = &self.optimizer;
        let s = &self.suite;
        let t = &s.tolerances;
        let opt = |x: Option<f64>| x.map_or("none".to_string(), |v| v.to_string());
        let mut out = format!("[run]\nseed = {}\n\n[domain]\n", self.seed);
        out += &format!(
            "domain = {}\n\n",
            self.domain.as_ref().map_or("none".to_string(), |d| d.to_string())
        );
        out += "[optimizer]\n";
        out += &format!("max_iterations = {}\n", o.max_iterations);
        out += &format!("initial_step = {}\n", o.initial_step);
        out += &format!("backtracking = {}\n", o.backtracking);
        out += &format!("sufficient_decrease = {}\n", o.sufficient_decrease);
        out += &format!("gradient_tolerance = {}\n", o.gradient_tolerance);
        out += &format!("energy_tolerance = {}\n", o.energy_tolerance);
        out += &format!("stagnation_window = {}\n", o.stagnation_window);
        out += &format!("energy_floor = {}\n", o.energy_floor);
        out += &format!("area_growth_limit = {}\n", o.area_growth_limit);
        out += &format!("negative_energy_margin = {}\n", opt(o.negative_energy_margin));
        out += &format!("remesh_every = {}\n", o.remesh_every);
        out += &format!(
            "edge_band = {}\n",
            o.edge_band
                .map_or("none".to_string(), |(a, b)| format!("{a},{b}"))
        );
        out += &format!("rng_seed = {}\n", o.rng_seed);
        out += "projection = every_step\n";
        out += &format!("preconditioner = {}\n\n", o.preconditioner.as_str());
        out += "[sweep]\n";
        out += &format!(
            "lambdas = {}\n",
            self.lambdas
                .as_ref()
                .map_or("default".to_string(), |l| fmt_list(l))
        );
        for g in self.initializers.iter().flatten() {
            out += &format!("initializer = {g}\n");
        }
        out += "\n[check]\n";
        if s.population.is_empty() {
            out += "population = empty\n";
        }
        for g in &s.population {
            out += &format!("spec = {g}\n");
        }
        out += &format!("samples_per_spec = {}\n", s.samples_per_spec);
        out += &format!("noise = {},{}\n", s.noise.0, s.noise.1);
        out += &format!("max_retries = {}\n", s.max_retries);
        out += &format!("monotonicity_triples = {}\n", s.monotonicity_triples);
        out += &format!("tolerance_scale = {}\n", s.tolerance_scale);
        out += &format!("tol_identity = {}\n", t.identity);
        out += &format!("tol_simon = {}\n", t.simon);
        out += &format!("tol_sphere = {}\n", t.sphere);
        out += &format!("tol_willmore_area = {}\n", t.willmore_area);
        out += &format!("tol_inversion = {}\n", t.inversion);
        out += &format!("tol_monotonicity = {}\n", t.monotonicity);
        out
    }
}

/// Record of one command invocation: what ran, with which resolved
/// configuration, what it read and wrote, and how each run ended.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub threads: usize,
    /// Seconds.
    pub wall_time: f64,
    pub arguments: Vec<(String, String)>,
    pub outputs: Vec<(String, String)>,
    pub terminations: Vec<(String, String)>,
    pub config: LabConfig,
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut out = String::from("[manifest]\n");
        out += &format!("command = {}\n", self.command);
        out += &format!("version = {}\n", self.version);
        out += &format!("threads = {}\n", self.threads);
        out += &format!("wall_time = {}\n", self.wall_time);
        for (name, rows) in [
            ("arguments", &self.arguments),
            ("outputs", &self.outputs),
            ("terminations", &self.terminations),
        ] {
            out += &format!("\n[{name}]\n");
            for (k, v) in rows {
                out += &format!("{} = {}\n", k, one_line(v));
            }
        }
        out.push('\n');
        out += &self.config.to_text();
        out
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut m = RunManifest {
            command: String::new(),
            version: String::new(),
            threads: 1,
            wall_time: 0.0,
            arguments: Vec::new(),
            outputs: Vec::new(),
            terminations: Vec::new(),
            config: LabConfig::parse(text)?,
        };
        let mut seen_command = false;
        for (n, section, key, v) in lines(text)? {
            match section.as_str() {
                "manifest" => match key.as_str() {
                    "command" => {
                        m.command = v;
                        seen_command = true;
                    }
                    "version" => m.version = v,
                    "threads" => m.threads = parse_value(n, &key, &v)?,
                    "wall_time" => m.wall_time = parse_value(n, &key, &v)?,
                    _ => {
                        return Err(ConfigError::Line {
                            line: n,
                            message: format!("unknown manifest key `{key}`"),
                        })
                    }
                },
                "arguments" => m.arguments.push((key, v)),
                "outputs" => m.outputs.push((key, v)),
                "terminations" => m.terminations.push((key, v)),
                _ => {}
            }
        }
        if !seen_command {
            return Err(ConfigError::Invalid("manifest lacks `command`".into()));
        }
        Ok(m)
    }

    pub fn argument(&self, key: &str) -> Option<&str> {
        self.arguments
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_examples() {
        let d = parse_domain("shell(center=0,0,0; r_outer=0.5; r_inner=0.4)").unwrap();
        assert_eq!(
            d,
            Domain::SphericalShell {
                center: Vec3::zeros(),
                r_outer: 0.5,
                r_inner: 0.4
            }
        );
        let u = parse_domain("union(ball(r=1) | ball(center=1.5,0,0; r=1))").unwrap();
        assert!(matches!(u, Domain::UnionOfBalls(ref b) if b.len() == 2));
        let t = parse_domain("translate(1,0,0; rescale(2; ball(r=1)))").unwrap();
        assert_eq!(parse_domain(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn domain_errors() {
        assert!(parse_domain("ball(r=-1)").is_err());
        assert!(parse_domain("ball(radius=1)").is_err());
        assert!(parse_domain("cube(r=1)").is_err());
        assert!(parse_domain("ball(r=1").is_err());
        assert!(parse_domain("shell(r_outer=0.4; r_inner=0.5)").is_err());
    }

    #[test]
    fn generator_display_round_trips() {
        let specs = [
            GeneratorSpec::icosphere(0.7, 2),
            GeneratorSpec::dante(4.0, 3),
            GeneratorSpec::torus(2f64.sqrt(), 1.0),
            GeneratorSpec::capped_cylinder(0.8, 1.0),
            GeneratorSpec::ellipsoid(1.0, 0.6),
            GeneratorSpec::pancake(3.0, 1.9),
            GeneratorSpec::DisjointUnion(vec![
                GeneratorSpec::icosphere(1.0, 1),
                GeneratorSpec::icosphere(0.5, 1),
            ]),
            GeneratorSpec::Inversion {
                base: Box::new(GeneratorSpec::icosphere(1.0, 2)),
                center: Vec3::new(0.0, 0.0, 1.5),
                radius: 1.0,
            },
        ];
        for s in specs {
            assert_eq!(parse_generator(&s.to_string()).unwrap(), s, "{s}");
        }
    }

    #[test]
    fn generator_defaults_and_checks() {
        assert_eq!(
            parse_generator("icosphere()").unwrap(),
            GeneratorSpec::icosphere(1.0, 3)
        );
        let err = parse_generator("dante(lambda=0.5; k=2)").unwrap_err();
        assert!(err.to_string().contains("requires lambda > 1"));
    }

    #[test]
    fn config_file() {
        let text = "seed = 9\n# comment\n[domain]\ndomain = ball(r=0.5)\n[optimizer]\nmax_iterations = 10\nedge_band = 0.1,0.3\n[sweep]\nlambdas = 1, 2\ninitializer = icosphere(r=0.3)\n";
        let cfg = LabConfig::parse(text).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.optimizer.max_iterations, 10);
        assert_eq!(cfg.optimizer.edge_band, Some((0.1, 0.3)));
        assert_eq!(cfg.lambdas, Some(vec![1.0, 2.0]));
        assert_eq!(cfg.initializers.as_ref().unwrap().len(), 1);
        assert_eq!(LabConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn config_errors_name_the_line() {
        let err = LabConfig::parse("seed = 1\n[optimizer]\nmax_iterations = x\n").unwrap_err();
        assert!(err.to_string().starts_with("line 3"), "{err}");
        assert!(LabConfig::parse("[optimizer]\nbogus = 1\n").is_err());
        assert!(LabConfig::parse("[optimizer]\nbacktracking = 2\n").is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let m = RunManifest {
            command: "minimize".into(),
            version: "0.1.0".into(),
            threads: 2,
            wall_time: 0.125,
            arguments: vec![("lambda".into(), "0.5".into())],
            outputs: vec![("mesh".into(), "out/final.obj".into())],
            terminations: vec![("run".into(), "Converged: gradient below tolerance".into())],
            config: LabConfig::default(),
        };
        assert_eq!(RunManifest::parse(&m.to_text()).unwrap(), m);
    }
}
