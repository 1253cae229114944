//! Discrete minimum principle: at a grid minimum of `u` both the diffusion
//! part and the drift part of the generator are nonnegative, and the
//! resolvent maps nonnegative data to nonnegative solutions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::TensorGrid;
use crate::linalg::{ShiftedLu, C64};
use crate::operator1d::Generator;

use super::probes::{cosine, random_smooth};
use super::report::{EstimateReport, ReportPoint};

/// Negativity tolerated at the minimum.
pub const SIGN_TOL: f64 = 1e-9;

/// Negativity tolerated in resolvent images of nonnegative data.
pub const POSITIVITY_TOL: f64 = 1e-12;

/// Runs `trials` random domain-compatible functions through both parts of
/// the splitting and checks resolvent positivity at `λ ∈ {0.5, 5}`. Every
/// point records the worst negativity against its tolerance.
pub fn check_minimum_principle<G: Generator + ?Sized>(
    a: &G,
    grid: &TensorGrid,
    trials: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts = a.splitting();
    let mut report = EstimateReport::new("minimum-principle", 1.0, seed);
    let (mut worst_diff, mut worst_drift) = (0.0f64, 0.0f64);
    for k in 0..trials {
        let u = if k % 2 == 0 {
            cosine(grid, 4, 8, &mut rng).values
        } else {
            random_smooth(grid, &mut rng).values
        };
        let (x0, _) = u
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("grid is nonempty");
        let diff = row_apply(&parts.diffusion, x0, &u);
        let drift = row_apply(&parts.drift, x0, &u);
        worst_diff = worst_diff.max(-diff);
        worst_drift = worst_drift.max(-drift);
    }
    report.set_constant("trials", trials as f64);
    report.push(ReportPoint::new("diffusion-at-min", vec![], worst_diff.max(0.0), SIGN_TOL));
    report.push(ReportPoint::new("drift-at-min", vec![], worst_drift.max(0.0), SIGN_TOL));
    for lambda in [0.5, 5.0] {
        let lu = ShiftedLu::new(a.matrix(), C64::new(lambda, 0.0))?;
        let mut worst = 0.0f64;
        for _ in 0..trials.clamp(1, 20) {
            let g: Vec<C64> = (0..grid.len())
                .map(|_| C64::new(rng.gen_range(0.0..1.0), 0.0))
                .collect();
            let u = lu.solve(&g)?;
            worst = worst.max(u.iter().map(|z| -z.re).fold(0.0, f64::max));
        }
        report.push(ReportPoint::new(
            "resolvent-positivity",
            vec![("lambda".into(), lambda)],
            worst,
            POSITIVITY_TOL,
        ));
    }
    Ok(report)
}

/// `(Au)ᵢ` written as `Σⱼ aᵢⱼ (uⱼ − uᵢ)`, which is exact in sign at a minimum
/// whenever the row sums vanish.
fn row_apply(a: &crate::linalg::CsrMatrix, i: usize, u: &[f64]) -> f64 {
    a.row(i)
        .filter(|&(j, _)| j != i)
        .map(|(j, v)| v * (u[j] - u[i]))
        .sum::<f64>()
        + a.row_sum(i) * u[i]
}
