//! Variable-coefficient solvers built from constant-coefficient pieces:
//!
//! * [`perturbation`]: variable drift as a perturbation of the drift frozen
//!   at the origin, summed as a Neumann series;
//! * [`freeze`]: variable `Γ` by freezing it on the boxes of a partition of
//!   unity and correcting the glued resolvent;
//! * [`corners`]: the `x(1 − x)` operator from reflected corner charts of
//!   `x`-weight type, glued the same way.
//!
//! Every solver is checked against a direct solve of the assembled
//! variable-coefficient operator.

pub mod corners;
pub mod freeze;
pub mod partition;
pub mod perturbation;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{sup_norm, CsrMatrix, ShiftedLu, C64};

pub use partition::PartitionOfUnity;

/// Largest size for which induced norms are computed column by column.
pub const DENSE_NORM_LIMIT: usize = 2048;

/// Contraction level every correction series must stay below.
pub const CONTRACTION_LIMIT: f64 = 0.5;

/// Relative size of the last series term at which summation stops.
pub const SERIES_TOL: f64 = 1e-13;

const NORM_PROBES: usize = 24;

/// Columns per parallel task of the exact induced norm.
const NORM_BLOCK: usize = 32;

/// Induced sup-norm of a linear map on `C^n`: the exact maximum absolute row
/// sum from all columns when `n ≤ 2048`, otherwise the largest ratio over
/// random sign probes (a lower bound).
pub fn induced_sup_norm<F>(n: usize, apply: F, seed: u64) -> Result<f64>
where
    F: Fn(&[C64]) -> Result<Vec<C64>> + Sync,
{
    if n <= DENSE_NORM_LIMIT {
        // Fixed column blocks summed in order, so the result does not depend
        // on the number of workers.
        let blocks: Vec<Vec<f64>> = (0..n.div_ceil(NORM_BLOCK))
            .into_par_iter()
            .map(|b| {
                let mut acc = vec![0.0; n];
                for j in b * NORM_BLOCK..((b + 1) * NORM_BLOCK).min(n) {
                    let mut e = vec![C64::new(0.0, 0.0); n];
                    e[j] = C64::new(1.0, 0.0);
                    for (a, z) in acc.iter_mut().zip(apply(&e)?) {
                        *a += z.norm();
                    }
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        let mut sums = vec![0.0; n];
        for block in blocks {
            for (s, v) in sums.iter_mut().zip(block) {
                *s += v;
            }
        }
        return Ok(sums.into_iter().fold(0.0, f64::max));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..NORM_PROBES {
        let p: Vec<C64> = (0..n)
            .map(|_| C64::new(if rng.gen_bool(0.5) { 1.0 } else { -1.0 }, 0.0))
            .collect();
        best = best.max(sup_norm(&apply(&p)?));
    }
    Ok(best)
}

/// Location of the smallest real `λ` at which a contraction quantity drops
/// below one half.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Threshold {
    /// Smallest sampled `λ` with quantity `< 1/2`.
    pub crossing: f64,
    /// Quantity measured at `crossing`.
    pub measured: f64,
    /// `2 · crossing`, the threshold used by the solvers.
    pub threshold: f64,
}

/// Doubles `λ` from `start` until `q(λ) < 1/2`, then bisects geometrically
/// to relative width `1e−3`.
pub fn locate_threshold<Q>(q: Q, start: f64, limit: f64) -> Result<Threshold>
where
    Q: Fn(f64) -> Result<f64>,
{
    let mut hi = start;
    let mut q_hi = q(hi)?;
    let mut lo = None;
    while q_hi >= CONTRACTION_LIMIT {
        lo = Some(hi);
        hi *= 2.0;
        if hi > limit {
            return Err(Error::ContractionTooLarge { measured: q_hi });
        }
        q_hi = q(hi)?;
    }
    if let Some(mut lo) = lo {
        while hi / lo > 1.001 {
            let mid = (lo * hi).sqrt();
            let qm = q(mid)?;
            if qm < CONTRACTION_LIMIT {
                hi = mid;
                q_hi = qm;
            } else {
                lo = mid;
            }
        }
    }
    Ok(Threshold {
        crossing: hi,
        measured: q_hi,
        threshold: 2.0 * hi,
    })
}

/// A local resolvent glued into the global grid.
pub(crate) struct Patch {
    /// Global index of every local node.
    pub map: Vec<usize>,
    /// Bump values at the global nodes.
    pub weight: Vec<f64>,
    pub lu: ShiftedLu,
    /// Factor applied to local solutions.
    pub scale: f64,
}

/// Norms of the three defect contributions on one datum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DefectSplit {
    /// `Σ Φ (λ − A) vₚ − Σ Φ² f`: local operators differing from the global one.
    pub freezing: f64,
    /// `−Σ (AΦ) vₚ`: the operator falling on the bump.
    pub bump: f64,
    /// The remaining cross terms `−Σ ([A, Φ] − (AΦ)) vₚ`.
    pub cross: f64,
}

/// `S(λ)f = Σₚ Φₚ · scaleₚ Rₚ(λ)(Φₚ f)` and its defect `(λ − A)S − I`.
pub(crate) struct GluedResolvent<'a> {
    pub global: &'a CsrMatrix,
    pub lambda: C64,
    pub patches: Vec<Patch>,
}

/// Output of a corrected glued solve.
#[derive(Clone, Debug)]
pub struct GluedSolution {
    pub values: Vec<C64>,
    /// Induced sup-norm of the defect operator.
    pub defect_norm: f64,
    /// Terms of `Σ (−δ)ᵏ f` summed, the `k = 0` term included.
    pub terms: usize,
    /// Bound on the neglected part relative to `‖f‖∞`.
    pub tail: f64,
    pub split: DefectSplit,
}

impl GluedResolvent<'_> {
    fn n(&self) -> usize {
        self.global.dim()
    }

    /// Local solutions extended by zero, one per patch.
    fn local_solutions(&self, f: &[C64]) -> Result<Vec<Vec<C64>>> {
        self.patches
            .par_iter()
            .map(|p| {
                let local: Vec<C64> = p.map.iter().map(|&g| f[g] * p.weight[g]).collect();
                let mut out = vec![C64::new(0.0, 0.0); self.n()];
                if local.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                    return Ok(out);
                }
                let v = p.lu.solve(&local)?;
                for (&g, vi) in p.map.iter().zip(v) {
                    out[g] = vi * p.scale;
                }
                Ok(out)
            })
            .collect()
    }

    pub fn approximate(&self, f: &[C64]) -> Result<Vec<C64>> {
        let vs = self.local_solutions(f)?;
        let mut s = vec![C64::new(0.0, 0.0); self.n()];
        for (p, v) in self.patches.iter().zip(&vs) {
            for (i, si) in s.iter_mut().enumerate() {
                *si += v[i] * p.weight[i];
            }
        }
        Ok(s)
    }

    /// `δf = (λ − A)Sf − f`.
    pub fn defect(&self, f: &[C64]) -> Result<Vec<C64>> {
        let s = self.approximate(f)?;
        let a = self.global.matvec_c(&s);
        Ok(s.iter()
            .zip(a)
            .zip(f)
            .map(|((si, ai), fi)| self.lambda * si - ai - fi)
            .collect())
    }

    pub fn defect_norm(&self, seed: u64) -> Result<f64> {
        induced_sup_norm(self.n(), |v| self.defect(v), seed)
    }

    pub fn split(&self, f: &[C64]) -> Result<DefectSplit> {
        let n = self.n();
        let vs = self.local_solutions(f)?;
        let mut freezing = vec![C64::new(0.0, 0.0); n];
        let mut bump = vec![C64::new(0.0, 0.0); n];
        for (p, v) in self.patches.iter().zip(&vs) {
            let av = self.global.matvec_c(v);
            let aphi = self.global.matvec(&p.weight);
            for i in 0..n {
                let w = p.weight[i];
                freezing[i] += w * (self.lambda * v[i] - av[i]) - f[i] * (w * w);
                bump[i] -= v[i] * aphi[i];
            }
        }
        let delta = self.defect(f)?;
        let cross: Vec<C64> = (0..n).map(|i| delta[i] - freezing[i] - bump[i]).collect();
        Ok(DefectSplit {
            freezing: sup_norm(&freezing),
            bump: sup_norm(&bump),
            cross: sup_norm(&cross),
        })
    }

    /// `S Σₖ (−δ)ᵏ f`, admissible only while `‖δ‖ < 1/2`.
    pub fn solve(&self, f: &[C64], max_terms: usize, seed: u64) -> Result<GluedSolution> {
        let q = self.defect_norm(seed)?;
        if q >= CONTRACTION_LIMIT {
            return Err(Error::ContractionTooLarge { measured: q });
        }
        let fnorm = sup_norm(f);
        let mut acc = f.to_vec();
        let mut g = f.to_vec();
        let mut terms = 1;
        let mut tail = if fnorm == 0.0 { 0.0 } else { f64::INFINITY };
        while tail > SERIES_TOL {
            if terms >= max_terms {
                return Err(Error::ConvergenceFailure { terms, tail });
            }
            g = self.defect(&g)?.into_iter().map(|z| -z).collect();
            for (a, gi) in acc.iter_mut().zip(&g) {
                *a += gi;
            }
            terms += 1;
            tail = sup_norm(&g) * q / (1.0 - q) / fnorm;
        }
        Ok(GluedSolution {
            values: self.approximate(&acc)?,
            defect_norm: q,
            terms,
            tail,
            split: self.split(f)?,
        })
    }
}

/// `‖(λI − A)u − f‖∞ / ‖f‖∞`.
pub fn relative_residual(a: &CsrMatrix, lambda: C64, u: &[C64], f: &[C64]) -> f64 {
    let au = a.matvec_c(u);
    let r: Vec<C64> = u
        .iter()
        .zip(au)
        .zip(f)
        .map(|((ui, ai), fi)| lambda * ui - ai - fi)
        .collect();
    let fnorm = sup_norm(f);
    if fnorm == 0.0 {
        sup_norm(&r)
    } else {
        sup_norm(&r) / fnorm
    }
}
