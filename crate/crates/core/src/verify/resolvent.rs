//! Calibrated resolvent sweeps:
//!
//! ```text
//! ‖R(λ)f‖∞ ≤ d₁‖f‖∞/|λ|,   ‖w(xᵢ)^{1/2} ∂ᵢ R(λ)f‖∞ ≤ d₂‖f‖∞/√|λ|,
//! ```
//!
//! with `d₁`, `d₂` fitted on the even-numbered probes and checked on the
//! odd-numbered ones, plus uniformity in the drift and the vanishing of the
//! weighted gradient at the degenerate face under refinement.

use rayon::prelude::*;

use crate::error::Result;
use crate::grid::TensorGrid;
use crate::linalg::{real_parts, sup_norm, to_complex, ShiftedLu, C64};
use crate::operator1d::{Generator, GradientWeight};
use crate::tensor::{directional_weighted_gradient, TensorOperator};

use super::probes::{probe_family, smooth_family, TestFunction, TestKind};
use super::report::{EstimateReport, ReportPoint};
use super::semigroup::Propagator;
use super::HOLDOUT_SLACK;

/// Largest ratio `max/min` of fitted constants over a drift sweep.
pub const UNIFORMITY_LIMIT: f64 = 5.0;

/// Fraction of probes whose first-slab gradient must drop under refinement.
pub const VANISHING_FRACTION: f64 = 0.9;

/// Largest directional weighted gradient over all axes.
pub fn weighted_gradient<T>(u: &[T], grid: &TensorGrid, weight: GradientWeight) -> f64
where
    T: crate::linalg::Modulus + std::ops::Sub<Output = T> + Copy,
{
    (0..grid.dim())
        .map(|i| directional_weighted_gradient(u, grid, i, weight).sup)
        .fold(0.0, f64::max)
}

/// Largest weighted gradient on the slabs next to the faces `xᵢ = 0`.
pub fn first_slab_gradient(u: &[f64], grid: &TensorGrid, weight: GradientWeight) -> f64 {
    (0..grid.dim())
        .map(|i| directional_weighted_gradient(u, grid, i, weight).first)
        .fold(0.0, f64::max)
}

/// The constant probe followed by a mixed family.
fn probes_with_constant(grid: &TensorGrid, count: usize, seed: u64) -> Vec<TestFunction> {
    let mut out = vec![TestFunction {
        kind: TestKind::Polynomial,
        values: vec![1.0; grid.len()],
        neumann_defect: 0.0,
    }];
    out.extend(probe_family(grid, count.saturating_sub(1), seed));
    out
}

/// `(|λ|‖u‖/‖f‖, √|λ|·gradient/‖f‖)` for every probe at one `λ`.
fn measure(topr: &TensorOperator, lambda: C64, probes: &[TestFunction]) -> Result<Vec<(f64, f64)>> {
    let lu = ShiftedLu::new(topr.matrix(), lambda)?;
    let weight = GradientWeight::for_weight(topr.weight());
    let mag = lambda.norm();
    probes
        .iter()
        .map(|p| {
            let u = lu.solve(&to_complex(&p.values))?;
            let f = sup_norm(&p.values);
            Ok((
                mag * sup_norm(&u) / f,
                mag.sqrt() * weighted_gradient(&u, topr.grid(), weight) / f,
            ))
        })
        .collect()
}

/// Fits `d₁`, `d₂` on the calibration half and checks the holdout half with
/// slack `1.25`.
pub fn resolvent_sweep(
    topr: &TensorOperator,
    lambdas: &[C64],
    probes: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let family = probes_with_constant(topr.grid(), probes, seed);
    let rows: Vec<Vec<(f64, f64)>> = lambdas
        .par_iter()
        .map(|&l| measure(topr, l, &family))
        .collect::<Result<_>>()?;
    let (mut d1, mut d2) = (0.0f64, 0.0f64);
    for row in &rows {
        for &(r1, r2) in row.iter().step_by(2) {
            d1 = d1.max(r1);
            d2 = d2.max(r2);
        }
    }
    let mut report = EstimateReport::new("resolvent", HOLDOUT_SLACK, seed);
    report.add_axis("lambda_re", lambdas.iter().map(|l| l.re).collect());
    report.add_axis("lambda_im", lambdas.iter().map(|l| l.im).collect());
    report.set_constant("d1", d1);
    report.set_constant("d2", d2);
    for (l, row) in lambdas.iter().zip(&rows) {
        for (k, &(r1, r2)) in row.iter().enumerate().skip(1).step_by(2) {
            let params = vec![
                ("mag".to_string(), l.norm()),
                ("theta".to_string(), l.arg()),
                ("probe".to_string(), k as f64),
            ];
            report.push(ReportPoint::new("holdout-norm", params.clone(), r1, d1));
            report.push(ReportPoint::new("holdout-gradient", params, r2, d2));
        }
    }
    Ok(report)
}

/// Runs [`resolvent_sweep`] for every drift value and checks that the
/// fitted `d₁`, `d₂` vary by at most a factor `5`.
pub fn drift_uniformity<F>(
    build: F,
    drifts: &[f64],
    lambdas: &[C64],
    probes: usize,
    seed: u64,
) -> Result<EstimateReport>
where
    F: Fn(f64) -> Result<TensorOperator>,
{
    let mut report = EstimateReport::new("resolvent-drift", HOLDOUT_SLACK, seed);
    report.add_axis("b", drifts.to_vec());
    let (mut d1s, mut d2s) = (Vec::new(), Vec::new());
    for &b in drifts {
        let topr = build(b)?;
        let mut sub = resolvent_sweep(&topr, lambdas, probes, seed)?;
        for p in &mut sub.points {
            p.params.push(("b".into(), b));
        }
        d1s.push(sub.constant("d1").unwrap_or(0.0));
        d2s.push(sub.constant("d2").unwrap_or(0.0));
        report.absorb(&format!("b:{b}:"), sub);
    }
    for (name, v) in [("d1", &d1s), ("d2", &d2s)] {
        let max = v.iter().copied().fold(0.0, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = if min > 0.0 { max / min } else { f64::INFINITY };
        report.set_constant(&format!("{name}_spread"), spread);
        report.push(
            ReportPoint::new(&format!("uniformity-{name}"), vec![], spread, UNIFORMITY_LIMIT)
                .with_slack(1.0),
        );
    }
    Ok(report)
}

/// What is applied to the probes before measuring the first-slab gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Smoothing {
    Resolvent(f64),
    Semigroup(f64),
}

/// Compares first-slab weighted gradients of `R(λ)u` (or `T(t)u`) on
/// `grid` and on its refinement for continuous probes `u`; passes when they
/// strictly decrease for at least 90% of the probes.
pub fn boundary_vanishing<F>(
    build: F,
    grid: &TensorGrid,
    smoothing: Smoothing,
    probes: usize,
    seed: u64,
) -> Result<EstimateReport>
where
    F: Fn(&TensorGrid) -> Result<TensorOperator>,
{
    let fine_grid = TensorGrid::new(
        grid.axes()
            .iter()
            .map(|a| a.refined())
            .collect::<Result<Vec<_>>>()?,
    )?;
    let coarse = build(grid)?;
    let fine = build(&fine_grid)?;
    let weight = GradientWeight::for_weight(coarse.weight());
    // The same seed draws the same continuous functions on both grids; the
    // fine samples are rescaled to agree with the coarse ones at shared nodes.
    let pc = smooth_family(grid, probes, seed);
    let mut pf = smooth_family(&fine_grid, probes, seed);
    let shared: Vec<usize> = (0..grid.len())
        .map(|k| fine_grid.flat(&grid.multi(k).iter().map(|j| 2 * j).collect::<Vec<_>>()))
        .collect();
    for (c, f) in pc.iter().zip(pf.iter_mut()) {
        let restricted = sup_norm(&shared.iter().map(|&k| f.values[k]).collect::<Vec<_>>());
        if restricted > 0.0 {
            let s = sup_norm(&c.values) / restricted;
            f.values.iter_mut().for_each(|v| *v *= s);
        }
    }
    let smooth = |topr: &TensorOperator, p: &[TestFunction]| -> Result<Vec<f64>> {
        let map: Box<dyn Fn(&[f64]) -> Result<Vec<f64>>> = match smoothing {
            Smoothing::Resolvent(l) => {
                let lu = ShiftedLu::new(topr.matrix(), C64::new(l, 0.0))?;
                Box::new(move |u| Ok(real_parts(&lu.solve(&to_complex(u))?)))
            }
            Smoothing::Semigroup(t) => {
                let prop = Propagator::new(topr, t)?;
                Box::new(move |u| Ok(prop.apply(u)))
            }
        };
        p.iter()
            .map(|f| Ok(first_slab_gradient(&map(&f.values)?, topr.grid(), weight)))
            .collect()
    };
    let gc = smooth(&coarse, &pc)?;
    let gf = smooth(&fine, &pf)?;
    let mut report = EstimateReport::new("boundary-vanishing", 1.0, seed);
    let mut decreased = 0usize;
    let considered = gc.len();
    for (k, (c, f)) in gc.iter().zip(&gf).enumerate() {
        if f < c {
            decreased += 1;
        }
        report.push(
            ReportPoint::new("first-slab", vec![("probe".into(), k as f64)], *f, *c)
                .with_slack(f64::INFINITY),
        );
    }
    let fraction = if considered == 0 {
        1.0
    } else {
        decreased as f64 / considered as f64
    };
    report.set_constant("fraction", fraction);
    report.set_constant("probes", considered as f64);
    report.push(
        ReportPoint::new("decrease-fraction", vec![], VANISHING_FRACTION, fraction).with_slack(1.0),
    );
    Ok(report)
}
