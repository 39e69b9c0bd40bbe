use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use willmore_core::config::{parse_domain, parse_generator, parse_list, LabConfig, RunManifest};
use willmore_core::discrete_ops::energy_report;
use willmore_core::domains::Domain;
use willmore_core::experiments::{
    check_clambda_shape, default_grid, default_initializers, detect_threshold, plot_data_csv,
    sweep, sweep_csv, ExperimentError, DEFAULT_AREA_TOLERANCE, DEFAULT_SHAPE_SLACK,
};
use willmore_core::generators::{generate, perturb_radial};
use willmore_core::mesh::{read_obj, write_obj, TriMesh};
use willmore_core::optimizer::{minimize, OptimizerError, Termination};
use willmore_core::properties::{run_suite, suite_csv, PropertyError};

use crate::{CheckArgs, Cli, Command, EvaluateArgs, GenerateArgs, MinimizeArgs, SweepArgs};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_COMPUTATION: u8 = 2;
pub const EXIT_PROPERTY: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Computation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Computation(_) => EXIT_COMPUTATION,
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

struct Context {
    config: LabConfig,
    threads: usize,
    out_dir: PathBuf,
    started: Instant,
}

struct Outcome {
    code: u8,
    arguments: Vec<(String, String)>,
    outputs: Vec<(String, String)>,
    terminations: Vec<(String, String)>,
}

impl Outcome {
    fn new(code: u8) -> Self {
        Outcome {
            code,
            arguments: Vec::new(),
            outputs: Vec::new(),
            terminations: Vec::new(),
        }
    }

    fn arg(&mut self, k: &str, v: impl ToString) {
        self.arguments.push((k.to_string(), v.to_string()));
    }

    fn output(&mut self, k: &str, p: &Path) {
        self.outputs.push((k.to_string(), p.display().to_string()));
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            LabConfig::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => LabConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
        config.optimizer.rng_seed = seed;
    }
    let threads = match cli.threads {
        Some(0) => return Err(usage("--threads must be positive")),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    config.suite.threads = threads;
    fs::create_dir_all(&cli.out_dir)
        .map_err(|e| usage(format!("cannot create {}: {e}", cli.out_dir.display())))?;
    let mut ctx = Context {
        config,
        threads,
        out_dir: cli.out_dir.clone(),
        started: Instant::now(),
    };
    let (name, outcome) = match &cli.command {
        Command::Generate(a) => ("generate", cmd_generate(&mut ctx, a)?),
        Command::Evaluate(a) => ("evaluate", cmd_evaluate(&mut ctx, a)?),
        Command::Minimize(a) => ("minimize", cmd_minimize(&mut ctx, a)?),
        Command::Sweep(a) => ("sweep", cmd_sweep(&mut ctx, a)?),
        Command::Check(a) => ("check", cmd_check(&mut ctx, a)?),
    };
    let manifest = RunManifest {
        command: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        threads: ctx.threads,
        wall_time: ctx.started.elapsed().as_secs_f64(),
        arguments: outcome.arguments,
        outputs: outcome.outputs,
        terminations: outcome.terminations,
        config: ctx.config,
    };
    let path = ctx.out_dir.join(format!("{name}.manifest"));
    write_file(&path, &manifest.to_text())?;
    println!("manifest: {}", path.display());
    Ok(outcome.code)
}

fn generator_expression(a: &GenerateArgs) -> Result<String, CliError> {
    if let Some(spec) = &a.spec {
        return Ok(spec.clone());
    }
    let kind = a.kind.ok_or_else(|| usage("give a surface kind or --spec"))?;
    let mut args: Vec<String> = Vec::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            args.push(format!("{k}={v}"));
        }
    };
    put("r", a.r.map(|v| v.to_string()));
    put("level", a.level.map(|v| v.to_string()));
    put("lambda", a.lambda.map(|v| v.to_string()));
    put("k", a.k.map(|v| v.to_string()));
    put("ball_r", a.ball_r.map(|v| v.to_string()));
    put("major", a.major.map(|v| v.to_string()));
    put("minor", a.minor.map(|v| v.to_string()));
    put("segments", a.segments.clone());
    put("h", a.h.map(|v| v.to_string()));
    put("a", a.a.map(|v| v.to_string()));
    put("c", a.c.map(|v| v.to_string()));
    put("thickness", a.thickness.map(|v| v.to_string()));
    put("center", a.center.clone());
    put("axis", a.axis.clone());
    Ok(format!("{}({})", kind.grammar_name(), args.join("; ")))
}

fn print_metrics(mesh: &TriMesh) -> Result<(), CliError> {
    let m = mesh
        .metrics()
        .map_err(|e| CliError::Computation(e.to_string()))?;
    println!("vertices = {}", m.vertex_count);
    println!("triangles = {}", m.triangle_count);
    println!("components = {}", m.component_count);
    println!("euler_characteristic = {:?}", m.euler_characteristic);
    println!("genus = {:?}", m.genus);
    println!("area = {}", m.area);
    println!("diameter = {}", m.diameter);
    Ok(())
}

fn cmd_generate(ctx: &mut Context, a: &GenerateArgs) -> Result<Outcome, CliError> {
    let expr = generator_expression(a)?;
    let spec = parse_generator(&expr).map_err(usage)?;
    let mut mesh = generate(&spec).map_err(usage)?;
    if let Some(f) = a.perturb {
        if !(0.0..1.0).contains(&f) {
            return Err(usage("--perturb must lie in [0, 1)"));
        }
        if f > 0.0 {
            let (lo, hi) = mesh.bounding_box();
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
            mesh = perturb_radial(&mesh, &((lo + hi) * 0.5), f, &mut rng);
        }
    }
    let path = a
        .output
        .clone()
        .unwrap_or_else(|| ctx.out_dir.join(format!("{}.obj", spec.kind())));
    write_obj(&mesh, &path).map_err(usage)?;
    println!("spec = {spec}");
    print_metrics(&mesh)?;
    println!("wrote {}", path.display());
    let mut out = Outcome::new(0);
    out.arg("spec", &spec);
    if let Some(f) = a.perturb {
        out.arg("perturb", f);
    }
    out.output("mesh", &path);
    Ok(out)
}

fn load_mesh(path: &Path) -> Result<TriMesh, CliError> {
    let mesh = read_obj(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    mesh.validated()
        .map_err(|e| CliError::Computation(format!("{}: {e}", path.display())))
}

fn check_lambda(lambda: f64) -> Result<(), CliError> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(usage(format!("lambda must be a nonnegative number (1/length^2), got {lambda}")))
    }
}

fn resolve_domain(ctx: &mut Context, flag: &Option<String>) -> Result<Domain, CliError> {
    if let Some(text) = flag {
        let d = parse_domain(text).map_err(usage)?;
        ctx.config.domain = Some(d);
    }
    ctx.config
        .domain
        .clone()
        .ok_or_else(|| usage("no domain: pass --domain or set it in the [domain] section"))
}

fn cmd_evaluate(ctx: &mut Context, a: &EvaluateArgs) -> Result<Outcome, CliError> {
    check_lambda(a.lambda)?;
    let mesh = load_mesh(&a.mesh)?;
    let report = energy_report(&mesh, a.lambda).map_err(|e| CliError::Computation(e.to_string()))?;
    print!("{}", report.to_record());
    let mut out = Outcome::new(0);
    out.arg("mesh", a.mesh.display());
    out.arg("lambda", a.lambda);
    if a.domain.is_some() {
        let domain = resolve_domain(ctx, &a.domain)?;
        let sd = domain.max_signed_distance(&mesh);
        let confined = sd <= 1e-9 * domain.scale();
        println!("domain = {domain}");
        println!("max_signed_distance = {sd}");
        println!("confined = {confined}");
        out.arg("domain", &domain);
    }
    let path = ctx.out_dir.join("evaluate.csv");
    write_file(&path, &format!("{}\n{}\n", willmore_core::discrete_ops::EnergyReport::CSV_HEADER, report.csv_row()))?;
    out.output("report", &path);
    Ok(out)
}

fn cmd_minimize(ctx: &mut Context, a: &MinimizeArgs) -> Result<Outcome, CliError> {
    check_lambda(a.lambda)?;
    let domain = resolve_domain(ctx, &a.domain)?;
    let mesh = load_mesh(&a.mesh)?;
    let (result, trace) = minimize(&mesh, a.lambda, &domain, &ctx.config.optimizer).map_err(|e| match e {
        OptimizerError::InvalidInitial(_) | OptimizerError::InfeasibleStart(_) => {
            CliError::Computation(e.to_string())
        }
        _ => usage(e),
    })?;
    let mesh_path = ctx.out_dir.join("final.obj");
    let trace_path = ctx.out_dir.join("trace.csv");
    write_obj(&result, &mesh_path).map_err(usage)?;
    write_file(&trace_path, &trace.to_csv())?;
    let last = trace.final_record();
    println!("termination = {}", trace.termination);
    println!("reason = {}", trace.reason);
    println!("iterations = {}", trace.iterations());
    println!("w_lambda = {}", last.w_lambda);
    println!("willmore = {}", last.willmore);
    println!("area = {}", last.area);
    println!("wrote {} and {}", mesh_path.display(), trace_path.display());
    let code = if trace.termination == Termination::MeshDegenerate {
        EXIT_COMPUTATION
    } else {
        0
    };
    let mut out = Outcome::new(code);
    out.arg("mesh", a.mesh.display());
    out.arg("lambda", a.lambda);
    out.arg("domain", &domain);
    out.output("mesh", &mesh_path);
    out.output("trace", &trace_path);
    out.terminations
        .push(("run".into(), format!("{}: {}", trace.termination, trace.reason)));
    Ok(out)
}

fn cmd_sweep(ctx: &mut Context, a: &SweepArgs) -> Result<Outcome, CliError> {
    let domain = resolve_domain(ctx, &a.domain)?;
    if let Some(text) = &a.lambdas {
        ctx.config.lambdas = Some(parse_list(text).map_err(usage)?);
    }
    let grid = ctx
        .config
        .lambdas
        .clone()
        .unwrap_or_else(|| default_grid(&domain.analyze()));
    let inits = ctx
        .config
        .initializers
        .clone()
        .unwrap_or_else(|| default_initializers(&domain));
    let records = sweep(&domain, &grid, &inits, &ctx.config.optimizer, ctx.threads).map_err(|e| match e {
        ExperimentError::AllRunsFailed { .. } => CliError::Computation(e.to_string()),
        _ => usage(e),
    })?;

    let analysis = domain.analyze();
    let mut summary = format!(
        "domain = {domain}\nbracket = [{}, {}]\nepsilon = {}\n",
        analysis.lambda_lower,
        analysis.lambda_upper,
        analysis
            .epsilon_omega
            .map_or("unknown".to_string(), |e| e.to_string())
    );
    summary += "# best energies are upper bounds on C_lambda; divergence is evidence, not proof\n";
    summary += "\n[shape]\n";
    match check_clambda_shape(&records, DEFAULT_SHAPE_SLACK, DEFAULT_AREA_TOLERANCE) {
        Ok(report) => summary += &report.to_string(),
        Err(e) => summary += &format!("{e}\n"),
    }
    summary += "\n[threshold]\n";
    match detect_threshold(&records, &analysis) {
        Ok(t) => {
            summary += &format!("crossing = {}\n", t.crossing);
            summary += &format!(
                "ratio = {}\n",
                t.ratio.map_or("none".to_string(), |r| r.to_string())
            );
            summary += &format!(
                "disagreement = {}\n",
                t.disagreement.map_or("none".to_string(), |d| d.to_string())
            );
            summary += &format!("estimators_agree = {}\n", t.estimators_agree);
            summary += &format!("inside_bracket = {}\n", t.inside_bracket(0.05));
            summary += &format!("midpoint_fallback = {}\n", t.midpoint_fallback);
        }
        Err(e) => summary += &format!("{e}\n"),
    }
    let table = ctx.out_dir.join("sweep.csv");
    let plot = ctx.out_dir.join("sweep_plot.csv");
    let report = ctx.out_dir.join("sweep_report.txt");
    write_file(&table, &sweep_csv(&records))?;
    write_file(&plot, &plot_data_csv(&records))?;
    write_file(&report, &summary)?;
    print!("{}", sweep_csv(&records));
    print!("{summary}");

    let mut out = Outcome::new(0);
    out.arg("domain", &domain);
    out.arg(
        "lambdas",
        grid.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","),
    );
    out.output("table", &table);
    out.output("plot_data", &plot);
    out.output("report", &report);
    for r in &records {
        out.terminations.push((
            format!("lambda_{}", r.lambda),
            format!("{} ({}) via {}", r.classification.as_str(), r.termination, r.initializer),
        ));
    }
    Ok(out)
}

fn cmd_check(ctx: &mut Context, a: &CheckArgs) -> Result<Outcome, CliError> {
    if let Some(s) = a.tolerance_scale {
        ctx.config.suite.tolerance_scale = s;
    }
    if let Some(n) = a.samples {
        ctx.config.suite.samples_per_spec = n;
    }
    let reports = run_suite(&ctx.config.suite, ctx.config.seed).map_err(|e| match e {
        PropertyError::EmptyPopulation | PropertyError::BadConfig(_) => usage(e),
        PropertyError::Generator { .. } => usage(e),
    })?;
    for r in &reports {
        println!("{r}");
    }
    if let Some(r) = reports.first() {
        println!("population: {}", r.population);
    }
    let path = ctx.out_dir.join("check.csv");
    write_file(&path, &suite_csv(&reports))?;
    let failed = reports.iter().filter(|r| !r.pass).count();
    println!(
        "{} of {} properties pass",
        reports.len() - failed,
        reports.len()
    );
    let mut out = Outcome::new(if failed > 0 { EXIT_PROPERTY } else { 0 });
    out.arg("tolerance_scale", ctx.config.suite.tolerance_scale);
    out.output("report", &path);
    for r in &reports {
        out.terminations.push((
            r.id.as_str().to_string(),
            if r.pass { "pass" } else { "fail" }.to_string(),
        ));
    }
    Ok(out)
}
