//! The `verify` suites. Each returns its reports keyed by a file stem.

use degensemi_core::coefficients::{CoefficientField, CoefficientSpec, DriftField};
use degensemi_core::grid::{Grid1D, TensorGrid};
use degensemi_core::linalg::{sup_dist, sup_norm, to_complex};
use degensemi_core::operator1d::discrete_resolvent;
use degensemi_core::tensor::{kronecker_from_field, TensorOperator};
use degensemi_core::varcoeff::corners::{corner_assemble, corner_glued_resolvent};
use degensemi_core::varcoeff::freeze::{freeze_gamma_resolvent, FreezeSolver};
use degensemi_core::varcoeff::partition::{choose_refinement, oscillation_target};
use degensemi_core::varcoeff::CONTRACTION_LIMIT;
use degensemi_core::varcoeff::perturbation::{perturbation_resolvent, relative_bound_probe, PerturbationSolver};
use degensemi_core::verify::interpolation::{dyadic_eps, interpolation_inequality};
use degensemi_core::verify::minimum::check_minimum_principle;
use degensemi_core::verify::resolvent::{boundary_vanishing, drift_uniformity, resolvent_sweep, Smoothing};
use degensemi_core::verify::sector::{minkowski_defect, sector_probe, SectorSweep};
use degensemi_core::verify::semigroup::semigroup_sweep;
use degensemi_core::verify::{EstimateReport, ReportPoint};
use degensemi_core::C64;

use crate::config::{radians, RunConfig};
use crate::CliError;

/// Agreement of every series or glued solve with the direct sparse solve.
pub const AGREEMENT_TOL: f64 = 1e-6;

/// Tolerance of `λ R(λ)1 = 1`.
const CONSTANT_TOL: f64 = 1e-9;

/// Minkowski-sum identity of the spectrum.
const MINKOWSKI_TOL: f64 = 1e-8;

/// Largest number of series terms.
const MAX_TERMS: usize = 200;

/// Largest partition refinement tried by the freezing suite.
const MAX_REFINEMENT: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Oned,
    Tensor,
    Perturb,
    Freeze,
    Corners,
    All,
}

pub type Keyed = Vec<(String, EstimateReport)>;

pub fn run(cfg: &RunConfig, suite: Suite, seed: u64) -> Result<Keyed, CliError> {
    match suite {
        Suite::Oned => oned(cfg, seed),
        Suite::Tensor => tensor(cfg, seed),
        Suite::Perturb => perturb(cfg, seed),
        Suite::Freeze => freeze(cfg, seed),
        Suite::Corners => corners(cfg, seed),
        Suite::All => {
            if cfg.problem.d < 2 {
                return Err(tensor_needs_d2());
            }
            let mut out = oned(cfg, seed)?;
            out.extend(tensor(cfg, seed)?);
            out.extend(perturb(cfg, seed)?);
            out.extend(freeze(cfg, seed)?);
            out.extend(corners(cfg, seed)?);
            Ok(out)
        }
    }
}

fn tensor_needs_d2() -> CliError {
    CliError::Config("the tensor suite needs problem.d >= 2".into())
}

fn graded(cfg: &RunConfig, d: usize, n: usize) -> Result<TensorGrid, CliError> {
    let axis = Grid1D::graded(cfg.problem.m, n, cfg.discretization.grading)?;
    Ok(TensorGrid::new(vec![axis; d])?)
}

/// Mirror-symmetric grid on `[0, M]` with an odd node count, so that the
/// midpoint is a node.
fn symmetric(cfg: &RunConfig, m: f64, d: usize, n: usize) -> Result<TensorGrid, CliError> {
    let axis = Grid1D::symmetric(m, n | 1, cfg.discretization.grading)?;
    Ok(TensorGrid::new(vec![axis; d])?)
}

fn nodes(cfg: &RunConfig, d: usize) -> usize {
    if d == 1 {
        cfg.discretization.n
    } else {
        cfg.discretization.n_tensor
    }
}

/// Kronecker operator with `γ`, constant drift `b` on every axis.
fn constant_drift(cfg: &RunConfig, grid: &TensorGrid, b: f64) -> degensemi_core::Result<TensorOperator> {
    let d = grid.dim();
    let spec = CoefficientSpec::simple(d, cfg.problem.m, cfg.problem.gamma, DriftField::Constant { values: vec![b; d] });
    kronecker_from_field(&CoefficientField::new(spec)?, grid)
}

fn lambdas(cfg: &RunConfig) -> Vec<C64> {
    let mut out = Vec::new();
    for theta in radians(&cfg.sweep.rays_deg) {
        for &mag in &cfg.sweep.magnitudes {
            out.push(C64::from_polar(mag, theta));
        }
    }
    out
}

/// Real `λ = ε⁻²` over the interpolation grid, so that the fitted `d₂` covers it.
fn interpolation(cfg: &RunConfig, topr: &TensorOperator, seed: u64) -> Result<EstimateReport, CliError> {
    let s = &cfg.sweep;
    let eps = dyadic_eps(s.eps_bar, s.eps_levels);
    let lams: Vec<C64> = eps.iter().map(|e| C64::new(e.powi(-2), 0.0)).collect();
    let fit = resolvent_sweep(topr, &lams, s.probes, seed)?;
    let d2 = fit
        .constant("d2")
        .ok_or_else(|| CliError::Numerical("resolvent sweep produced no d2".into()))?;
    let mut report = interpolation_inequality(topr, d2, &eps, s.lambda0, s.interpolation_probes, seed)?;
    report.set_constant("d2_fit", d2);
    Ok(report)
}

fn vanishing(
    cfg: &RunConfig,
    grid: &TensorGrid,
    seed: u64,
) -> Result<[EstimateReport; 2], CliError> {
    let s = &cfg.sweep;
    let build = |g: &TensorGrid| constant_drift(cfg, g, cfg.problem.drift);
    Ok([
        boundary_vanishing(build, grid, Smoothing::Resolvent(s.vanishing_lambda), s.vanishing_probes, seed)?,
        boundary_vanishing(build, grid, Smoothing::Semigroup(s.vanishing_time), s.vanishing_probes, seed)?,
    ])
}

fn sector(cfg: &RunConfig, topr: &TensorOperator, seed: u64) -> Result<EstimateReport, CliError> {
    let sweep = SectorSweep {
        rays: radians(&cfg.sweep.sector_rays_deg),
        magnitudes: cfg.sweep.magnitudes.clone(),
        shift: 0.0,
        seed,
    };
    Ok(sector_probe(topr, &sweep)?)
}

fn oned(cfg: &RunConfig, seed: u64) -> Result<Keyed, CliError> {
    let s = &cfg.sweep;
    let grid = graded(cfg, 1, cfg.discretization.n)?;
    let a = constant_drift(cfg, &grid, cfg.problem.drift)?;
    let mut out = Keyed::new();
    out.push(("oned_resolvent".into(), resolvent_sweep(&a, &lambdas(cfg), s.probes, seed)?));
    let uniform = drift_uniformity(|b| constant_drift(cfg, &grid, b), &cfg.drift_grid(), &lambdas(cfg), s.probes, seed)?;
    out.push(("oned_resolvent_drift".into(), uniform));
    out.push(("oned_semigroup".into(), semigroup_sweep(&a, &s.times, s.t_bar, s.probes, seed)?));
    out.push(("oned_interpolation".into(), interpolation(cfg, &a, seed)?));
    out.push(("oned_minimum".into(), check_minimum_principle(&a, &grid, s.trials, seed)?));
    let [res, sem] = vanishing(cfg, &grid, seed)?;
    out.push(("oned_vanishing_resolvent".into(), res));
    out.push(("oned_vanishing_semigroup".into(), sem));
    out.push(("oned_sector".into(), sector(cfg, &a, seed)?));
    Ok(out)
}

fn tensor(cfg: &RunConfig, seed: u64) -> Result<Keyed, CliError> {
    let d = cfg.problem.d;
    if d < 2 {
        return Err(tensor_needs_d2());
    }
    let s = &cfg.sweep;
    let grid = graded(cfg, d, cfg.discretization.n_tensor)?;
    let a = constant_drift(cfg, &grid, cfg.problem.drift)?;
    let mut out = Keyed::new();
    out.push(("tensor_resolvent".into(), resolvent_sweep(&a, &lambdas(cfg), s.probes, seed)?));
    out.push(("tensor_semigroup".into(), semigroup_sweep(&a, &s.times, s.t_bar, s.probes, seed)?));
    out.push(("tensor_interpolation".into(), interpolation(cfg, &a, seed)?));
    out.push(("tensor_minimum".into(), check_minimum_principle(&a, &grid, s.trials, seed)?));
    let [res, sem] = vanishing(cfg, &grid, seed)?;
    out.push(("tensor_vanishing_resolvent".into(), res));
    out.push(("tensor_vanishing_semigroup".into(), sem));

    let small = graded(cfg, d, cfg.discretization.n_spectral)?;
    let b = constant_drift(cfg, &small, cfg.problem.drift)?;
    let mut spectral = sector(cfg, &b, seed)?;
    let defect = minkowski_defect(&b)?;
    spectral.set_constant("minkowski_defect", defect);
    spectral.push(ReportPoint::new("minkowski", vec![], defect, MINKOWSKI_TOL).with_slack(1.0));
    out.push(("tensor_sector".into(), spectral));
    Ok(out)
}

/// A smooth, non-constant right-hand side.
fn datum(grid: &TensorGrid) -> Vec<C64> {
    to_complex(&grid.sample(|x| x.iter().map(|v| (4.0 * v).cos() + 0.5 * v).sum()))
}

/// Relative sup-norm distance.
fn rel_dist(u: &[C64], v: &[C64]) -> f64 {
    sup_dist(u, v) / sup_norm(v).max(f64::MIN_POSITIVE)
}

/// `sup |λ u − 1|` for `u = R(λ)1`.
fn constant_defect(u: &[C64], lambda: C64) -> f64 {
    u.iter().map(|z| (z * lambda - 1.0).norm()).fold(0.0, f64::max)
}

fn exact(label: &str, params: &[(String, f64)], measured: f64, bound: f64) -> ReportPoint {
    ReportPoint::new(label, params.to_vec(), measured, bound).with_slack(1.0)
}

fn perturb(cfg: &RunConfig, seed: u64) -> Result<Keyed, CliError> {
    let s = &cfg.sweep;
    let lambda = C64::new(s.lambda_perturb, 0.0);
    let mut out = Keyed::new();
    for name in &cfg.problem.perturb {
        let cf = cfg.family(name)?;
        let d = cf.dim();
        let grid = graded(cfg, d, nodes(cfg, d))?;
        let solver = PerturbationSolver::new(&cf, &grid)?;
        let params = vec![("lambda".to_string(), lambda.re)];

        let mut report = EstimateReport::new("perturbation", 1.0, seed);
        let threshold = solver.locate_threshold(1.0)?;
        report.set_constant("R", threshold.threshold);
        report.set_constant("nodes", grid.len() as f64);
        let q = solver.contraction(lambda)?;
        report.push(exact("contraction", &params, q, CONTRACTION_LIMIT));
        if q >= CONTRACTION_LIMIT {
            report.note(format!("series not admissible at lambda {}; located threshold {}", lambda.re, threshold.threshold));
            out.push((format!("perturb_{name}"), report));
            continue;
        }
        let f = datum(&grid);
        let sol = perturbation_resolvent(&solver, lambda, &f, MAX_TERMS)?;
        let direct = discrete_resolvent(solver.direct(), lambda, &f)?;
        report.push(exact("agreement", &params, rel_dist(&sol.values, &direct), AGREEMENT_TOL));
        let ones = to_complex(&vec![1.0; grid.len()]);
        let unit = perturbation_resolvent(&solver, lambda, &ones, MAX_TERMS)?;
        report.push(exact("constants", &params, constant_defect(&unit.values, lambda), CONSTANT_TOL));
        report.set_constant("terms", sol.terms as f64);
        report.set_constant("tail", sol.tail);
        report.set_constant("contraction", sol.contraction);
        out.push((format!("perturb_{name}"), report));

        let bound = relative_bound_probe(&solver, &[0.5, 0.1, 0.02], s.lambda0, s.interpolation_probes, seed)?;
        out.push((format!("perturb_{name}_relative"), bound));
        let minimum = check_minimum_principle(solver.direct(), &grid, s.trials, seed)?;
        out.push((format!("perturb_{name}_minimum"), minimum));
    }
    Ok(out)
}

fn freeze(cfg: &RunConfig, seed: u64) -> Result<Keyed, CliError> {
    let Some(name) = &cfg.problem.freeze else {
        return Ok(Keyed::new());
    };
    let s = &cfg.sweep;
    let cf = cfg.family(name)?;
    let d = cf.dim();
    let grid = graded(cfg, d, nodes(cfg, d))?;
    let target = oscillation_target(cf.gamma_cap0(), d, s.freeze_d1);
    let pou = choose_refinement(&cf, target, MAX_REFINEMENT)?;
    let refinement = pou.refinement();
    let solver = FreezeSolver::new(&cf, &grid, pou)?;

    let mut report = EstimateReport::new("freeze", 1.0, seed);
    let requested = s.lambda_freeze;
    let defect_requested = solver.defect_norm(C64::new(requested, 0.0))?;
    let threshold = solver.locate_threshold(requested)?;
    let used = requested.max(threshold.threshold);
    if defect_requested >= 0.5 {
        report.note(format!(
            "defect {defect_requested} at the requested lambda {requested} is not below 1/2; solving at the located threshold {used}"
        ));
    }
    let lambda = C64::new(used, 0.0);
    let params = vec![("lambda".to_string(), used)];
    let f = datum(&grid);
    let (u, diag) = freeze_gamma_resolvent(&cf, &solver, target, lambda, &f)?;
    let direct = discrete_resolvent(solver.direct(), lambda, &f)?;
    report.push(exact("agreement", &params, rel_dist(&u, &direct), AGREEMENT_TOL));
    report.push(exact("defect", &params, diag.defect_norm, CONTRACTION_LIMIT));
    report.push(exact("residual", &params, diag.residual, AGREEMENT_TOL));
    report.push(exact("oscillation", &params, diag.oscillation, target));
    let ones = to_complex(&vec![1.0; grid.len()]);
    let (unit, _) = freeze_gamma_resolvent(&cf, &solver, target, lambda, &ones)?;
    report.push(exact("constants", &params, constant_defect(&unit, lambda), CONSTANT_TOL));
    for (k, v) in [
        ("target", target),
        ("refinement", refinement as f64),
        ("lambda_requested", requested),
        ("defect_requested", defect_requested),
        ("R_prime", threshold.threshold),
        ("lambda_used", used),
        ("terms", diag.terms as f64),
        ("split_freezing", diag.split.freezing),
        ("split_bump", diag.split.bump),
        ("split_cross", diag.split.cross),
    ] {
        report.set_constant(k, v);
    }
    Ok(vec![(format!("freeze_{name}"), report)])
}

fn corners(cfg: &RunConfig, seed: u64) -> Result<Keyed, CliError> {
    let s = &cfg.sweep;
    let lambda = C64::new(s.lambda_corners, 0.0);
    let mut out = Keyed::new();
    for name in &cfg.problem.corners {
        let cf = cfg.family(name)?;
        let d = cf.dim();
        let grid = symmetric(cfg, cf.edge(), d, nodes(cfg, d))?;
        let asm = corner_assemble(&cf, &grid)?;
        let params = vec![("lambda".to_string(), lambda.re)];

        let mut report = EstimateReport::new("corners", 1.0, seed);
        report.set_constant("charts", asm.charts().len() as f64);
        report.set_constant("R_prime", asm.locate_threshold(1.0)?.threshold);
        let defect = asm.defect_norm(lambda)?;
        report.push(exact("defect", &params, defect, CONTRACTION_LIMIT));
        if defect >= CONTRACTION_LIMIT {
            report.note(format!("gluing not admissible at lambda {}", lambda.re));
            out.push((format!("corners_{name}"), report));
            continue;
        }
        let f = datum(&grid);
        let (u, diag) = corner_glued_resolvent(&asm, lambda, &f)?;
        let direct = discrete_resolvent(asm.direct(), lambda, &f)?;
        report.push(exact("agreement", &params, rel_dist(&u, &direct), AGREEMENT_TOL));
        report.push(exact("residual", &params, diag.residual, AGREEMENT_TOL));
        // Positivity gives ‖λR(λ)‖ = 1 at real λ.
        report.push(exact("scaled", &params, diag.scaled_norm, 1.0 + 1e-9));
        let ones = to_complex(&vec![1.0; grid.len()]);
        let (unit, _) = corner_glued_resolvent(&asm, lambda, &ones)?;
        report.push(exact("constants", &params, constant_defect(&unit, lambda), CONSTANT_TOL));
        report.set_constant("terms", diag.terms as f64);
        out.push((format!("corners_{name}"), report));

        out.push((format!("corners_{name}_resolvent"), resolvent_sweep(asm.direct(), &lambdas(cfg), s.probes, seed)?));
        out.push((format!("corners_{name}_interpolation"), interpolation(cfg, asm.direct(), seed)?));
    }
    Ok(out)
}
