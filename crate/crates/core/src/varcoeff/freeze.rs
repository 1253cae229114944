//! Variable `Γ` by freezing: on every product bump `Φᵢ` the factor `Γ` is
//! replaced by its value `Γᵢ` at the center of the support box, the local
//! resolvents `Rᵢ(λ) = (λ − Γᵢ L₁)⁻¹ = Γᵢ⁻¹ R(λ/Γᵢ, L₁)` are glued as
//! `S(λ)f = Σ Φᵢ Rᵢ(λ)(Φᵢ f)`, and `(λ − L)S = I + δ` is inverted by the
//! geometric series in `δ`.

use crate::coefficients::CoefficientField;
use crate::error::{Error, Result};
use crate::grid::TensorGrid;
use crate::linalg::{ShiftedLu, C64};
use crate::operator1d::Generator;
use crate::tensor::{assemble_direct, TensorOperator};

use super::partition::{check_oscillation, PartitionOfUnity};
use super::{locate_threshold, relative_residual, DefectSplit, GluedResolvent, Patch, Threshold};

const MAX_TERMS: usize = 400;

/// Direct operator `L = diag(Γ)L₁`, the operator `L₁` with `Γ ≡ 1`, and the
/// frozen values on a partition.
pub struct FreezeSolver {
    direct: TensorOperator,
    unit: TensorOperator,
    pou: PartitionOfUnity,
    frozen: Vec<f64>,
    weights: Vec<Vec<f64>>,
    seed: u64,
}

impl FreezeSolver {
    pub fn new(cf: &CoefficientField, grid: &TensorGrid, pou: PartitionOfUnity) -> Result<Self> {
        if pou.dim() != cf.dim() || (pou.edge() - cf.edge()).abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "partition and coefficients live on different cubes".into(),
            ));
        }
        let direct = assemble_direct(cf, grid)?;
        let unit = assemble_direct(&cf.without_gamma_cap(), grid)?;
        let mut frozen = Vec::with_capacity(pou.count());
        let mut weights = Vec::with_capacity(pou.count());
        for flat in 0..pou.count() {
            let multi = pou.multi_index(flat);
            frozen.push(cf.gamma_cap(&pou.center(&multi)));
            weights.push(grid.sample(|x| pou.product(&multi, x)));
        }
        Ok(Self {
            direct,
            unit,
            pou,
            frozen,
            weights,
            seed: 0xF001,
        })
    }

    pub fn direct(&self) -> &TensorOperator {
        &self.direct
    }

    pub fn partition(&self) -> &PartitionOfUnity {
        &self.pou
    }

    /// Frozen values `Γᵢ`, one per product bump.
    pub fn frozen_values(&self) -> &[f64] {
        &self.frozen
    }

    fn glued(&self, lambda: C64) -> Result<GluedResolvent<'_>> {
        let n = self.direct.size();
        let map: Vec<usize> = (0..n).collect();
        let patches = self
            .frozen
            .iter()
            .zip(&self.weights)
            .map(|(&g, w)| {
                Ok(Patch {
                    map: map.clone(),
                    weight: w.clone(),
                    lu: ShiftedLu::new(self.unit.matrix(), lambda / g)?,
                    scale: 1.0 / g,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GluedResolvent {
            global: self.direct.matrix(),
            lambda,
            patches,
        })
    }

    /// `S(λ)f` without correction.
    pub fn approximate(&self, lambda: C64, f: &[C64]) -> Result<Vec<C64>> {
        self.glued(lambda)?.approximate(f)
    }

    /// Induced sup-norm of the defect `(λ − L)S(λ) − I`.
    pub fn defect_norm(&self, lambda: C64) -> Result<f64> {
        self.glued(lambda)?.defect_norm(self.seed)
    }

    /// Real threshold above which the defect norm is below one half.
    pub fn locate_threshold(&self, start: f64) -> Result<Threshold> {
        locate_threshold(|l| self.defect_norm(C64::new(l, 0.0)), start, 1e9)
    }
}

/// Diagnostics of a corrected frozen-coefficient solve.
#[derive(Clone, Debug)]
pub struct FreezeDiagnostics {
    /// `n` of the uniform partition.
    pub refinement: usize,
    pub target: f64,
    pub oscillation: f64,
    pub defect_norm: f64,
    pub split: DefectSplit,
    pub terms: usize,
    pub tail: f64,
    /// Residual against the directly assembled operator, relative to `‖f‖∞`.
    pub residual: f64,
}

/// Corrected frozen-coefficient resolvent. Rejects partitions on which `Γ`
/// oscillates by `≥ target` on some support box, and `λ` at which the defect
/// norm is `≥ 1/2`.
pub fn freeze_gamma_resolvent(
    cf: &CoefficientField,
    solver: &FreezeSolver,
    target: f64,
    lambda: C64,
    f: &[C64],
) -> Result<(Vec<C64>, FreezeDiagnostics)> {
    let oscillation = check_oscillation(cf, &solver.pou, target)?;
    if f.len() != solver.direct.size() {
        return Err(Error::ShapeMismatch {
            expected: solver.direct.size(),
            got: f.len(),
        });
    }
    let glued = solver.glued(lambda)?;
    let sol = glued.solve(f, MAX_TERMS, solver.seed)?;
    let residual = relative_residual(solver.direct.matrix(), lambda, &sol.values, f);
    Ok((
        sol.values,
        FreezeDiagnostics {
            refinement: solver.pou.refinement(),
            target,
            oscillation,
            defect_norm: sol.defect_norm,
            split: sol.split,
            terms: sol.terms,
            tail: sol.tail,
            residual,
        },
    ))
}
