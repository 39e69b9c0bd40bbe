use std::f64::consts::PI;

use willmore_core::config::{parse_domain, parse_generator, LabConfig};
use willmore_core::discrete_ops::energy_report;
use willmore_core::experiments::{plot_data_csv, sweep, sweep_csv, Classification, SweepRecord};
use willmore_core::mesh::{read_obj_str, write_obj_string};
use willmore_core::optimizer::{minimize, OptimizerConfig, Termination};
use willmore_core::properties::{run_suite, suite_csv, PropertyReport, SuiteConfig};

#[test]
fn generate_write_read_minimize() {
    let spec = parse_generator("ellipsoid(a=0.9; c=0.6; level=3)").unwrap();
    let mesh = willmore_core::generators::generate(&spec).unwrap();
    let loaded = read_obj_str(&write_obj_string(&mesh)).unwrap().validated().unwrap();
    let domain = parse_domain("ball(r=1)").unwrap();
    let (out, trace) = minimize(&loaded, 0.5, &domain, &OptimizerConfig::default()).unwrap();
    assert_eq!(trace.termination, Termination::Converged);
    assert!(out.validate().is_ok());
    assert!(domain.max_signed_distance(&out) <= 1e-9);
    let report = energy_report(&out, 0.5).unwrap();
    assert!((report.w_lambda / (2.0 * PI) - 1.0).abs() < 0.03);
    assert!(trace.to_csv().lines().count() > trace.iterations());
}

#[test]
fn sweep_from_a_config_file() {
    let cfg = LabConfig::parse(
        "seed = 4\n[domain]\ndomain = ball(r=0.5)\n[sweep]\nlambdas = 1, 2\ninitializer = icosphere(r=0.4; level=2)\n",
    )
    .unwrap();
    let records = sweep(
        cfg.domain.as_ref().unwrap(),
        cfg.lambdas.as_ref().unwrap(),
        cfg.initializers.as_ref().unwrap(),
        &cfg.optimizer,
        1,
    )
    .unwrap();
    assert_eq!(records.len(), 2);
    for r in &records {
        assert_eq!(r.classification, Classification::Converged);
        assert!((r.best_energy / (4.0 * PI - PI * r.lambda) - 1.0).abs() < 0.05);
    }
    let csv = sweep_csv(&records);
    assert!(csv.starts_with(SweepRecord::CSV_HEADER));
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(plot_data_csv(&records).lines().count(), 3);
}

#[test]
fn small_suite_passes_and_serializes() {
    let config = SuiteConfig {
        samples_per_spec: 2,
        ..SuiteConfig::default()
    };
    let reports = run_suite(&config, 5).unwrap();
    assert!(reports.iter().all(|r| r.pass), "{}", suite_csv(&reports));
    let csv = suite_csv(&reports);
    assert!(csv.starts_with(PropertyReport::CSV_HEADER));
    assert_eq!(csv.lines().count(), reports.len() + 1);
}
