//! Operators on tensor grids: the Kronecker sum of one-dimensional
//! discretizations for constant drift, and the direct assembly of the full
//! variable-coefficient operator.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::coefficients::{CoefficientField, Weight};
use crate::error::{Error, Result};
use crate::grid::TensorGrid;
use crate::linalg::{CsrMatrix, ShiftedLu, C64};
use crate::operator1d::{
    axis_row, dense_exp, weighted_gradient_strided, DiscreteOperator, Generator, GradientWeight,
    Splitting, WeightedGradient,
};

/// A generator on a tensor grid.
#[derive(Debug)]
pub struct TensorOperator {
    grid: TensorGrid,
    weight: Weight,
    factors: Option<Vec<DiscreteOperator>>,
    parts: OnceLock<Splitting>,
}

impl Clone for TensorOperator {
    fn clone(&self) -> Self {
        let parts = OnceLock::new();
        if let Some(p) = self.parts.get() {
            let _ = parts.set(p.clone());
        }
        Self {
            grid: self.grid.clone(),
            weight: self.weight,
            factors: self.factors.clone(),
            parts,
        }
    }
}

impl Generator for TensorOperator {
    fn splitting(&self) -> &Splitting {
        self.parts.get_or_init(|| {
            let factors = self
                .factors
                .as_ref()
                .expect("directly assembled operators are materialized at construction");
            kronecker_sum(&self.grid, factors)
        })
    }

    fn size(&self) -> usize {
        self.grid.len()
    }
}

impl TensorOperator {
    /// `Σᵢ I ⊗ … ⊗ Aᵢ ⊗ … ⊗ I`; the matrix is formed on first use.
    pub fn kronecker(factors: Vec<DiscreteOperator>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("a tensor operator needs a factor".into()));
        }
        let weight = factors[0].weight();
        if factors.iter().any(|f| f.weight() != weight) {
            return Err(Error::InvalidInput("factors must share one weight".into()));
        }
        let grid = TensorGrid::new(factors.iter().map(|f| f.grid().clone()).collect())?;
        Ok(Self {
            grid,
            weight,
            factors: Some(factors),
            parts: OnceLock::new(),
        })
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }

    pub fn factors(&self) -> Option<&[DiscreteOperator]> {
        self.factors.as_deref()
    }

    pub fn is_materialized(&self) -> bool {
        self.parts.get().is_some()
    }

    /// Entry `(row, col)` of the Kronecker sum read off the factors.
    pub fn kronecker_entry(&self, row: usize, col: usize) -> Option<f64> {
        let factors = self.factors.as_ref()?;
        let r = self.grid.multi(row);
        let c = self.grid.multi(col);
        let differing: Vec<usize> = (0..r.len()).filter(|&i| r[i] != c[i]).collect();
        Some(match differing.len() {
            // Summed in the order used by the materialized splitting.
            0 => {
                let part = |pick: fn(&Splitting) -> &CsrMatrix| -> f64 {
                    factors
                        .iter()
                        .enumerate()
                        .map(|(i, f)| pick(f.splitting()).get(r[i], r[i]))
                        .sum()
                };
                part(|s| &s.diffusion) + part(|s| &s.drift)
            }
            1 => {
                let i = differing[0];
                factors[i].matrix().get(r[i], c[i])
            }
            _ => 0.0,
        })
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.matrix().matvec(u)
    }
}

fn kronecker_sum(grid: &TensorGrid, factors: &[DiscreteOperator]) -> Splitting {
    let n = grid.len();
    let mut diff = vec![Vec::new(); n];
    let mut drift = vec![Vec::new(); n];
    for (k, (dr, dt)) in diff.iter_mut().zip(drift.iter_mut()).enumerate() {
        let multi = grid.multi(k);
        for (i, f) in factors.iter().enumerate() {
            let s = grid.stride(i);
            let j = multi[i];
            let parts = f.splitting();
            for (jj, v) in parts.diffusion.row(j) {
                dr.push((k + jj * s - j * s, v));
            }
            for (jj, v) in parts.drift.row(j) {
                dt.push((k + jj * s - j * s, v));
            }
        }
    }
    Splitting::from_rows(n, diff, drift)
}

/// Direct discretization of `Γ(x) Σᵢ [γᵢ(xᵢ) w(xᵢ) ∂²ᵢ + bᵢ(x) ∂ᵢ]`: every row
/// is `Γ(x)` times the sum of the one-dimensional stencils with the local
/// coefficients, so with `L₁` the operator for `Γ ≡ 1` the identity
/// `L = diag(Γ) L₁` holds exactly.
pub fn assemble_direct(cf: &CoefficientField, grid: &TensorGrid) -> Result<TensorOperator> {
    if grid.dim() != cf.dim() {
        return Err(Error::ShapeMismatch {
            expected: cf.dim(),
            got: grid.dim(),
        });
    }
    for i in 0..grid.dim() {
        if (grid.axis(i).edge() - cf.edge()).abs() > 1e-12 * cf.edge() {
            return Err(Error::InvalidInput(format!(
                "axis {i} has edge {} but the cube edge is {}",
                grid.axis(i).edge(),
                cf.edge()
            )));
        }
    }
    assemble_with(
        grid,
        cf.weight(),
        |x| cf.gamma_cap(x),
        |i, x| {
            let xi = x[i];
            let w = match cf.weight() {
                Weight::Linear => xi,
                Weight::Quadratic => xi * (1.0 - xi),
            };
            cf.gamma(i, xi) * w.max(0.0)
        },
        |i, x| cf.drift(i, x),
    )
}

/// Row-wise assembly from pointwise coefficients: `cap(x)` times the sum over
/// axes of the stencils for `diffusion(i, x) ∂²ᵢ + drift(i, x) ∂ᵢ`, where
/// `diffusion` already includes the degenerate weight.
pub(crate) fn assemble_with<C, A, B>(
    grid: &TensorGrid,
    weight: Weight,
    cap: C,
    diffusion: A,
    drift: B,
) -> Result<TensorOperator>
where
    C: Fn(&[f64]) -> f64 + Sync,
    A: Fn(usize, &[f64]) -> f64 + Sync,
    B: Fn(usize, &[f64]) -> f64 + Sync,
{
    let n = grid.len();
    let rows: Vec<Result<(Vec<(usize, f64)>, Vec<(usize, f64)>)>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let multi = grid.multi(k);
            let x = grid.point(k);
            let c = cap(&x);
            let mut dr = Vec::new();
            let mut dt = Vec::new();
            for i in 0..grid.dim() {
                let (d1, t1) = axis_row(grid.axis(i).nodes(), multi[i], diffusion(i, &x), drift(i, &x), weight)?;
                let s = grid.stride(i);
                let j = multi[i];
                dr.extend(d1.into_iter().map(|(jj, v)| (k + jj * s - j * s, c * v)));
                dt.extend(t1.into_iter().map(|(jj, v)| (k + jj * s - j * s, c * v)));
            }
            Ok((dr, dt))
        })
        .collect();
    let mut diff = Vec::with_capacity(n);
    let mut drift_rows = Vec::with_capacity(n);
    for r in rows {
        let (a, b) = r?;
        diff.push(a);
        drift_rows.push(b);
    }
    let parts = OnceLock::new();
    let _ = parts.set(Splitting::from_rows(n, diff, drift_rows));
    Ok(TensorOperator {
        grid: grid.clone(),
        weight,
        factors: None,
        parts,
    })
}

/// Kronecker sum of the one-dimensional operators of a constant-drift,
/// `Γ ≡ 1` problem.
pub fn kronecker_from_field(cf: &CoefficientField, grid: &TensorGrid) -> Result<TensorOperator> {
    if !cf.has_constant_drift() || !cf.has_constant_gamma_cap() || cf.gamma_cap(&vec![0.0; cf.dim()]) != 1.0 {
        return Err(Error::InvalidInput(
            "the Kronecker sum needs constant drift and Gamma = 1".into(),
        ));
    }
    let b = cf.drift_vector(&vec![0.0; cf.dim()]);
    let factors = (0..cf.dim())
        .map(|i| {
            crate::operator1d::assemble_weighted(grid.axis(i), cf.weight(), |x| cf.gamma(i, x), b[i])
        })
        .collect::<Result<Vec<_>>>()?;
    TensorOperator::kronecker(factors)
}

/// Applies a dense `N_axis × N_axis` matrix along every lane of `axis`.
pub fn apply_along_axis(grid: &TensorGrid, axis: usize, m: &DMatrix<f64>, u: &[f64]) -> Vec<f64> {
    let n = grid.axis(axis).len();
    let s = grid.stride(axis);
    let starts = grid.lane_starts(axis);
    let lanes: Vec<(usize, Vec<f64>)> = starts
        .par_iter()
        .map(|&st| {
            let lane: Vec<f64> = (0..n).map(|j| u[st + j * s]).collect();
            let out = (0..n)
                .map(|r| (0..n).map(|c| m[(r, c)] * lane[c]).sum())
                .collect();
            (st, out)
        })
        .collect();
    let mut out = vec![0.0; u.len()];
    for (st, lane) in lanes {
        for (j, v) in lane.into_iter().enumerate() {
            out[st + j * s] = v;
        }
    }
    out
}

/// `T(t)u₀ = (⊗ᵢ exp(tAᵢ)) u₀`, one axis at a time.
pub fn tensor_semigroup(topr: &TensorOperator, t: f64, u0: &[f64]) -> Result<Vec<f64>> {
    if u0.len() != topr.grid.len() {
        return Err(Error::ShapeMismatch {
            expected: topr.grid.len(),
            got: u0.len(),
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("time t = {t} must be nonnegative")));
    }
    if t == 0.0 {
        return Ok(u0.to_vec());
    }
    let factors = topr.factors().ok_or_else(|| {
        Error::InvalidInput("the split semigroup needs Kronecker factors".into())
    })?;
    let mut u = u0.to_vec();
    for (i, f) in factors.iter().enumerate() {
        let e = dense_exp(f.matrix(), t)?;
        u = apply_along_axis(&topr.grid, i, &e, &u);
    }
    Ok(u)
}

/// `(λI − L)⁻¹f` by a direct solve of the assembled system.
pub fn tensor_resolvent(topr: &TensorOperator, lambda: C64, f: &[C64]) -> Result<Vec<C64>> {
    if f.len() != topr.grid.len() {
        return Err(Error::ShapeMismatch {
            expected: topr.grid.len(),
            got: f.len(),
        });
    }
    ShiftedLu::new(topr.matrix(), lambda)?.solve(f)
}

/// `max` over lanes of the weighted difference quotients along `axis`; the
/// `first` field is the value on the slab next to `xᵢ = 0`.
pub fn directional_weighted_gradient<T>(
    u: &[T],
    grid: &TensorGrid,
    axis: usize,
    weight: GradientWeight,
) -> WeightedGradient
where
    T: crate::linalg::Modulus + std::ops::Sub<Output = T>,
{
    let s = grid.stride(axis);
    let x = grid.axis(axis).nodes();
    let mut acc = WeightedGradient {
        sup: 0.0,
        first: 0.0,
        last: 0.0,
    };
    for st in grid.lane_starts(axis) {
        let g = weighted_gradient_strided(u, x, st, s, weight);
        acc.sup = acc.sup.max(g.sup);
        acc.first = acc.first.max(g.first);
        acc.last = acc.last.max(g.last);
    }
    acc
}

/// Dense copy of the assembled matrix, for oracles.
pub fn dense(topr: &TensorOperator) -> DMatrix<f64> {
    topr.matrix().to_dense()
}

/// Entrywise `A − B` of two assembled operators on the same grid.
pub fn difference(a: &TensorOperator, b: &TensorOperator) -> CsrMatrix {
    a.matrix().sub(b.matrix())
}
