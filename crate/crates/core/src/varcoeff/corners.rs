//! The `x(1 − x)` operator on `[0, 1]^d` from corner charts.
//!
//! For a corner `𝐢 ∈ {1, 2}^d` the reflection `ψ` maps `x_h ↦ x_h` when
//! `i_h = 1` and `x_h ↦ 1 − x_h` when `i_h = 2`. In the reflected coordinates
//! `y = ψ(x)` the operator is of `x`-weight type near the vertex `y = 0`:
//!
//! ```text
//! γ̃_h(y) = γ_h(ψ(y)_h)(1 − y_h),   b̃_h(y) = c_h b_h(ψ(y)),   c_h = ±1.
//! ```
//!
//! Each chart covers `y_h ≤ y_cut`, the first grid node at or beyond `2/3`,
//! with a Neumann row at the cut. On a mirror-symmetric grid the chart nodes
//! are global nodes, so chart rows coincide with the direct rows they
//! replace. Chart resolvents are glued with the two-bump partition
//! exchanging on `[1/3, 2/3]` and corrected by the defect series.

use crate::coefficients::{CoefficientField, Weight};
use crate::error::{Error, Result};
use crate::grid::{Grading, Grid1D, TensorGrid};
use crate::linalg::{ShiftedLu, C64};
use crate::operator1d::Generator;
use crate::tensor::{assemble_direct, assemble_with, TensorOperator};

use super::partition::PartitionOfUnity;
use super::{locate_threshold, relative_residual, DefectSplit, GluedResolvent, Patch, Threshold};

const MAX_TERMS: usize = 400;

/// Corner `𝐢` with entries in `{1, 2}`.
#[derive(Clone, Debug)]
pub struct CornerChart {
    corner: Vec<u8>,
    grid: TensorGrid,
    /// Global flat index of every chart node.
    map: Vec<usize>,
    operator: TensorOperator,
}

impl CornerChart {
    pub fn corner(&self) -> &[u8] {
        &self.corner
    }

    /// The vertex `V^𝐢`.
    pub fn vertex(&self) -> Vec<f64> {
        self.corner.iter().map(|&c| if c == 1 { 0.0 } else { 1.0 }).collect()
    }

    /// `c_h = +1` for `i_h = 1`, `−1` for `i_h = 2`.
    pub fn signs(&self) -> Vec<f64> {
        signs(&self.corner)
    }

    /// `ψ(x)`; an involution.
    pub fn psi(&self, x: &[f64]) -> Vec<f64> {
        psi(&self.corner, x)
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn operator(&self) -> &TensorOperator {
        &self.operator
    }

    /// `γ̃_h(y)`.
    pub fn gamma_tilde(&self, cf: &CoefficientField, h: usize, y: &[f64]) -> f64 {
        cf.gamma(h, self.psi(y)[h]) * (1.0 - y[h])
    }

    /// `b̃_h(y)`.
    pub fn drift_tilde(&self, cf: &CoefficientField, h: usize, y: &[f64]) -> f64 {
        cf.drift(h, &self.psi(y)) * self.signs()[h]
    }

    /// Pulls a chart function back to the global nodes it covers.
    pub fn pull_back<T: Copy + Default>(&self, local: &[T], global_len: usize) -> Vec<T> {
        let mut out = vec![T::default(); global_len];
        for (&g, &v) in self.map.iter().zip(local) {
            out[g] = v;
        }
        out
    }
}

fn signs(corner: &[u8]) -> Vec<f64> {
    corner.iter().map(|&c| if c == 1 { 1.0 } else { -1.0 }).collect()
}

fn psi(corner: &[u8], x: &[f64]) -> Vec<f64> {
    corner
        .iter()
        .zip(x)
        .map(|(&c, &xi)| if c == 1 { xi } else { 1.0 - xi })
        .collect()
}

/// Charts, the direct global operator and the gluing partition.
pub struct CornerAssembly {
    grid: TensorGrid,
    direct: TensorOperator,
    charts: Vec<CornerChart>,
    pou: PartitionOfUnity,
    weights: Vec<Vec<f64>>,
}

impl CornerAssembly {
    pub fn direct(&self) -> &TensorOperator {
        &self.direct
    }

    pub fn charts(&self) -> &[CornerChart] {
        &self.charts
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn partition(&self) -> &PartitionOfUnity {
        &self.pou
    }

    fn glued(&self, lambda: C64) -> Result<GluedResolvent<'_>> {
        let patches = self
            .charts
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| {
                Ok(Patch {
                    map: c.map.clone(),
                    weight: w.clone(),
                    lu: ShiftedLu::new(c.operator.matrix(), lambda)?,
                    scale: 1.0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GluedResolvent {
            global: self.direct.matrix(),
            lambda,
            patches,
        })
    }

    pub fn defect_norm(&self, lambda: C64) -> Result<f64> {
        self.glued(lambda)?.defect_norm(0xF001)
    }

    pub fn locate_threshold(&self, start: f64) -> Result<Threshold> {
        locate_threshold(|l| self.defect_norm(C64::new(l, 0.0)), start, 1e9)
    }
}

/// Builds the `2^d` charts and the direct discretization of the `x(1 − x)`
/// operator. Every axis grid must be mirror-symmetric.
pub fn corner_assemble(cf: &CoefficientField, grid: &TensorGrid) -> Result<CornerAssembly> {
    if cf.weight() != Weight::Quadratic {
        return Err(Error::InvalidInput("corner charts need the x(1-x) weight".into()));
    }
    let inward = crate::coefficients::validate_inward_drift(cf, 9)?;
    if let crate::coefficients::HypothesisVerdict::Fail { point, component, value } = inward {
        return Err(Error::Hypothesis(format!(
            "drift component {component} = {value} points outward at {point:?}"
        )));
    }
    for i in 0..grid.dim() {
        if grid.axis(i).grading() != Grading::Symmetric {
            return Err(Error::InvalidInput(
                "corner charts need mirror-symmetric axis grids".into(),
            ));
        }
    }
    let d = cf.dim();
    let direct = assemble_direct(cf, grid)?;
    let pou = PartitionOfUnity::corners(d)?;
    let mut charts = Vec::with_capacity(1 << d);
    let mut weights = Vec::with_capacity(1 << d);
    for flat in 0..(1usize << d) {
        let corner: Vec<u8> = (0..d).map(|h| 1 + ((flat >> (d - 1 - h)) & 1) as u8).collect();
        let axes: Vec<Grid1D> = (0..d)
            .map(|h| {
                let x = grid.axis(h).nodes();
                let cut = x.iter().position(|&v| v >= 2.0 / 3.0).unwrap_or(x.len() - 1);
                Grid1D::from_nodes(x[..=cut].to_vec())
            })
            .collect::<Result<_>>()?;
        let cgrid = TensorGrid::new(axes)?;
        let map: Vec<usize> = (0..cgrid.len())
            .map(|k| {
                let local = cgrid.multi(k);
                let global: Vec<usize> = local
                    .iter()
                    .enumerate()
                    .map(|(h, &j)| if corner[h] == 1 { j } else { grid.axis(h).len() - 1 - j })
                    .collect();
                grid.flat(&global)
            })
            .collect();
        let c = signs(&corner);
        let operator = assemble_with(
            &cgrid,
            Weight::Linear,
            |y| cf.gamma_cap(&psi(&corner, y)),
            |h, y| cf.gamma(h, psi(&corner, y)[h]) * (1.0 - y[h]) * y[h],
            |h, y| cf.drift(h, &psi(&corner, y)) * c[h],
        )?;
        let multi: Vec<usize> = corner.iter().map(|&ci| (ci - 1) as usize).collect();
        weights.push(grid.sample(|x| pou.product(&multi, x)));
        charts.push(CornerChart {
            corner,
            grid: cgrid,
            map,
            operator,
        });
    }
    Ok(CornerAssembly {
        grid: grid.clone(),
        direct,
        charts,
        pou,
        weights,
    })
}

/// Diagnostics of a glued corner solve.
#[derive(Clone, Debug)]
pub struct CornerDiagnostics {
    pub defect_norm: f64,
    pub split: DefectSplit,
    pub terms: usize,
    pub tail: f64,
    pub residual: f64,
    /// `|λ| ‖u‖∞ / ‖f‖∞`.
    pub scaled_norm: f64,
}

/// Corrected glued resolvent of the `x(1 − x)` operator.
pub fn corner_glued_resolvent(
    asm: &CornerAssembly,
    lambda: C64,
    f: &[C64],
) -> Result<(Vec<C64>, CornerDiagnostics)> {
    if f.len() != asm.grid.len() {
        return Err(Error::ShapeMismatch {
            expected: asm.grid.len(),
            got: f.len(),
        });
    }
    let sol = asm.glued(lambda)?.solve(f, MAX_TERMS, 0xF001)?;
    let residual = relative_residual(asm.direct.matrix(), lambda, &sol.values, f);
    let fnorm = crate::linalg::sup_norm(f);
    let scaled_norm = if fnorm == 0.0 {
        0.0
    } else {
        lambda.norm() * crate::linalg::sup_norm(&sol.values) / fnorm
    };
    Ok((
        sol.values,
        CornerDiagnostics {
            defect_norm: sol.defect_norm,
            split: sol.split,
            terms: sol.terms,
            tail: sol.tail,
            residual,
            scaled_norm,
        },
    ))
}
