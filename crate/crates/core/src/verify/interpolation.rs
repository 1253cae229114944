//! The interpolation inequality
//!
//! ```text
//! ‖w(xᵢ)^{1/2} ∂ᵢ u‖∞ ≤ (C/ε)‖u‖∞ + Dε‖Au‖∞
//! ```
//!
//! with `C`, `D` taken from a resolvent sweep: writing `u = R(λ)(λu − Au)`
//! with real `λ = ε⁻²` gives the inequality with `C = D = d₂`.

use crate::error::Result;
use crate::linalg::sup_norm;
use crate::operator1d::GradientWeight;
use crate::tensor::TensorOperator;

use super::probes::resolvent_images;
use super::report::{EstimateReport, ReportPoint};
use super::resolvent::weighted_gradient;
use super::HOLDOUT_SLACK;

/// `ε̄/2ᵏ` for `k = 0, …, levels − 1`.
pub fn dyadic_eps(eps_bar: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| eps_bar / 2f64.powi(k as i32)).collect()
}

/// Checks the inequality on resolvent images `R(λ₀)g` at every `ε`. `d2` must
/// come from a sweep whose real `λ` cover `[ε_max⁻², ε_min⁻²]`.
pub fn interpolation_inequality(
    topr: &TensorOperator,
    d2: f64,
    eps: &[f64],
    lambda0: f64,
    probes: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let (c, d) = (d2, d2);
    let weight = GradientWeight::for_weight(topr.weight());
    let images = resolvent_images(topr, topr.grid(), lambda0, probes, seed)?;
    let mut report = EstimateReport::new("interpolation", HOLDOUT_SLACK, seed);
    report.add_axis("eps", eps.to_vec());
    report.set_constant("C", c);
    report.set_constant("D", d);
    report.set_constant("eps_bar", eps.iter().copied().fold(0.0, f64::max));
    report.set_constant("lambda0", lambda0);
    for (k, u) in images.iter().enumerate() {
        let grad = weighted_gradient(&u.values, topr.grid(), weight);
        let un = sup_norm(&u.values);
        let au = sup_norm(&topr.apply(&u.values));
        for &e in eps {
            report.push(ReportPoint::new(
                "probe",
                vec![("probe".into(), k as f64), ("eps".into(), e)],
                grad,
                c / e * un + d * e * au,
            ));
        }
    }
    Ok(report)
}
