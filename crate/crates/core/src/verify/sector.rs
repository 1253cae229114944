//! Spectral and sectorial checks on assembled operators.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{sup_norm, ShiftedLu, C64};
use crate::operator1d::Generator;
use crate::tensor::TensorOperator;
use crate::varcoeff::induced_sup_norm;

use super::report::{EstimateReport, ReportPoint};

/// Largest operator size for dense eigenvalues.
pub const EIGEN_LIMIT: usize = 4096;

/// Largest operator size for the singular values of `R(1, A)`.
const SVD_LIMIT: usize = 1024;

/// Tolerance on `Re σ(A)`.
pub const SPECTRUM_TOL: f64 = 1e-10;

/// Eigenvalues of a dense real matrix.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex<f64>> {
    a.complex_eigenvalues().iter().copied().collect()
}

fn sorted(mut v: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

/// Largest distance between the eigenvalues of the materialized Kronecker sum
/// and the sorted Minkowski sum of the factor spectra.
pub fn minkowski_defect(topr: &TensorOperator) -> Result<f64> {
    let factors = topr
        .factors()
        .ok_or_else(|| Error::InvalidInput("the spectral identity needs Kronecker factors".into()))?;
    if topr.size() > EIGEN_LIMIT {
        return Err(Error::TooLargeForDense {
            size: topr.size(),
            limit: EIGEN_LIMIT,
        });
    }
    let mut sums = vec![Complex::new(0.0, 0.0)];
    for f in factors {
        let ev = eigenvalues(&f.matrix().to_dense());
        sums = sums
            .iter()
            .flat_map(|s| ev.iter().map(move |e| s + e))
            .collect();
    }
    let full = eigenvalues(&topr.matrix().to_dense());
    Ok(sorted(sums)
        .iter()
        .zip(sorted(full))
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// Parameters of [`sector_probe`].
#[derive(Clone, Debug, PartialEq)]
pub struct SectorSweep {
    pub rays: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// Added to `Re λ` on every ray.
    pub shift: f64,
    pub seed: u64,
}

/// Checks `Re σ(A) ≤ 1e−10`, `|λ|‖R(λ)1‖∞ = 1` on the positive axis and the
/// boundedness of `|λ|‖R(λ)‖∞` along each ray: the larger half of the
/// magnitudes must stay within `1.25` times the maximum over the smaller
/// half. Singular values of `R(1, A)` are reported, not asserted.
pub fn sector_probe(topr: &TensorOperator, sweep: &SectorSweep) -> Result<EstimateReport> {
    let mut report = EstimateReport::new("sector", super::HOLDOUT_SLACK, sweep.seed);
    report.add_axis("theta", sweep.rays.clone());
    report.add_axis("mag", sweep.magnitudes.clone());
    report.set_constant("shift", sweep.shift);
    let n = topr.size();
    if n <= EIGEN_LIMIT {
        let ev = eigenvalues(&topr.matrix().to_dense());
        let max_re = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        report.set_constant("max_re_spectrum", max_re);
        report.push(ReportPoint::new("spectrum", vec![], max_re.max(0.0), SPECTRUM_TOL).with_slack(1.0));
    } else {
        report.note(format!("spectrum skipped: size {n} exceeds {EIGEN_LIMIT}"));
    }
    let ones = vec![C64::new(1.0, 0.0); n];
    for &theta in &sweep.rays {
        let mut values = Vec::with_capacity(sweep.magnitudes.len());
        for &mag in &sweep.magnitudes {
            let lambda = C64::from_polar(mag, theta) + sweep.shift;
            let lu = ShiftedLu::new(topr.matrix(), lambda)?;
            let norm = induced_sup_norm(n, |v| lu.solve(v), sweep.seed)?;
            values.push((mag, lambda.norm() * norm));
            if theta == 0.0 {
                let r1 = sup_norm(&lu.solve(&ones)?);
                report.push(
                    ReportPoint::new("constant", vec![("mag".into(), mag)], lambda.norm() * r1, 1.0)
                        .with_slack(1.0 + 1e-10),
                );
            }
        }
        let half = values.len().div_ceil(2);
        let ceiling = values[..half].iter().map(|v| v.1).fold(0.0, f64::max);
        report.set_constant(&format!("ceiling@theta:{theta:.4}"), ceiling);
        for &(mag, v) in &values[half..] {
            report.push(ReportPoint::new(
                "ray",
                vec![("theta".into(), theta), ("mag".into(), mag)],
                v,
                ceiling,
            ));
        }
    }
    if n <= SVD_LIMIT {
        let dense = topr.matrix().to_dense();
        let shifted = DMatrix::<f64>::identity(n, n) - dense;
        if let Some(inv) = shifted.try_inverse() {
            let mut sv: Vec<f64> = inv.singular_values().iter().copied().collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            report.set_constant("sv_first", sv[0]);
            report.set_constant("sv_middle", sv[n / 2]);
            report.set_constant("sv_last", sv[n - 1]);
            report.note(format!(
                "singular values of R(1,A) decay from {:.3e} to {:.3e}",
                sv[0],
                sv[n - 1]
            ));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::operator1d::assemble_1d;

    #[test]
    fn symmetric_case_has_real_nonpositive_spectrum() {
        let g = Grid1D::graded(1.0, 25, 2.0).unwrap();
        let a = assemble_1d(&g, |_| 1.0, 0.0).unwrap();
        let ev = eigenvalues(&a.matrix().to_dense());
        assert!(ev.iter().all(|z| z.im.abs() < 1e-8 && z.re <= 1e-10));
    }

    #[test]
    fn minkowski_identity_small() {
        let g = Grid1D::graded(1.0, 6, 2.0).unwrap();
        let a = TensorOperator::kronecker(vec![
            assemble_1d(&g, |_| 1.0, 0.5).unwrap(),
            assemble_1d(&g, |x| 1.0 + x, 0.0).unwrap(),
        ])
        .unwrap();
        assert!(minkowski_defect(&a).unwrap() < 1e-8);
    }
}
