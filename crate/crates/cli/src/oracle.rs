use std::f64::consts::PI;

use degensemi_core::halfline::{
    base_resolvent, oracle_norm_sweep, HalflineFunction, HalflineProblem, OracleSweep, SectorPoint,
};
use degensemi_core::verify::{EstimateReport, ReportPoint};

use crate::config::{radians, RunConfig};
use crate::output::{num, Sink, Verdicts};
use crate::CliError;

/// Tolerance of `R(λ)1 = 1/λ`.
const IDENTITY_TOL: f64 = 1e-12;

/// Largest admissible Neumann-series contraction.
const CONTRACTION_LIMIT: f64 = 0.5;

/// Twelve `λ` spread over `|θ| ≤ 3π/4` and three decades of `|λ|`.
fn identity_points() -> Vec<(f64, f64)> {
    (0..12)
        .map(|k| {
            let theta = -0.75 * PI + 1.5 * PI * k as f64 / 11.0;
            let mag = [0.5, 4.0, 100.0][k % 3];
            (theta, mag)
        })
        .collect()
}

/// `|λ R(λ)1 − 1|` on a spread of sample points.
fn constant_identity(seed: u64) -> Result<EstimateReport, CliError> {
    let mut report = EstimateReport::new("identity", 1.0, seed);
    let xs: Vec<f64> = (0..=50).map(|k| 0.02 * (k * k) as f64).collect();
    for (theta, mag) in identity_points() {
        let sp = SectorPoint::polar(mag, theta)?;
        let v = base_resolvent(&sp, &HalflineFunction::Constant(1.0), &xs)?;
        let err = v.iter().map(|z| (z * sp.lambda() - 1.0).norm()).fold(0.0, f64::max);
        let params = vec![("theta".into(), theta), ("mag".into(), mag)];
        report.push(ReportPoint::new("constant", params, err, IDENTITY_TOL));
    }
    Ok(report)
}

/// The proven contraction bound `‖b (R(λ)·)′‖ ≤ b/(√(γ|λ|) cos(θ/2))` wherever
/// the series is admissible.
fn contraction_rows(cfg: &RunConfig, seed: u64) -> Result<EstimateReport, CliError> {
    let o = &cfg.oracle;
    let mut report = EstimateReport::new("contraction", 1.0, seed);
    for &gamma in &o.gammas {
        for &b in o.drifts.iter().filter(|&&b| b > 0.0) {
            let hp = HalflineProblem::new(gamma, b)?;
            for &theta in &radians(&o.thetas_deg) {
                for &mag in &o.magnitudes {
                    if theta.abs() >= PI / 2.0 || mag <= hp.threshold() {
                        continue;
                    }
                    let sp = SectorPoint::polar(mag, theta)?;
                    let params = vec![
                        ("theta".into(), theta),
                        ("mag".into(), mag),
                        ("b".into(), b),
                        ("gamma".into(), gamma),
                    ];
                    report.push(ReportPoint::new("contraction", params, hp.contraction_bound(&sp), CONTRACTION_LIMIT));
                }
            }
        }
    }
    Ok(report)
}

pub fn run(cfg: &RunConfig, seed: u64, sink: &Sink) -> Result<bool, CliError> {
    let o = &cfg.oracle;
    let sweep = oracle_norm_sweep(&OracleSweep {
        thetas: radians(&o.thetas_deg),
        magnitudes: o.magnitudes.clone(),
        drifts: o.drifts.clone(),
        gammas: o.gammas.clone(),
        nprobe: o.nprobe,
        seed,
    })?;
    let rows: Vec<Vec<String>> = sweep
        .points
        .iter()
        .map(|p| {
            vec![
                num(p.param("theta").unwrap_or(f64::NAN)),
                num(p.param("mag").unwrap_or(f64::NAN)),
                num(p.bound),
                num(p.measured),
                num(p.ratio()),
                sweep.point_passes(p).to_string(),
            ]
        })
        .collect();
    sink.csv(
        "oracle_sweep.csv",
        &[format!("max_ratio = {}", num(sweep.max_ratio))],
        &["theta", "mag", "bound", "measured", "ratio", "pass"],
        &rows,
    )?;
    sink.report("oracle_detail.csv", &sweep)?;

    let identity = constant_identity(seed)?;
    sink.report("oracle_identity.csv", &identity)?;
    let contraction = contraction_rows(cfg, seed)?;
    sink.report("oracle_contraction.csv", &contraction)?;

    let mut verdicts = Verdicts::default();
    verdicts.record("oracle/halfline", &sweep);
    verdicts.record("oracle/identity", &identity);
    verdicts.record("oracle/contraction", &contraction);
    let text = verdicts.render();
    sink.raw("verdicts.txt", &text)?;
    print!("{text}");
    Ok(verdicts.passed())
}
