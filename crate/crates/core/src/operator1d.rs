//! Monotone finite differences for `a(x) u″ + β(x) u′` with degenerate
//! diffusion, discrete resolvents and semigroups.
//!
//! Second derivatives use the three-point formula exact on quadratics. The
//! drift uses the centered three-point derivative where the mesh Péclet
//! number `|β| max(h₋, h₊) / (2a)` is at most one and first-order upwinding
//! otherwise, so every row has nonnegative off-diagonals and zero sum.
//! Boundary rows:
//!
//! * degenerate face with inward drift `β > 0`: `β (u₁ − u₀)/h`;
//! * degenerate face without drift: the zero row (the generator vanishes);
//! * `x = M` with the weight `x`: Neumann, the ghost node eliminated,
//!   `a · 2(u_{N−2} − u_{N−1})/h²`.
//!
//! Each operator is stored together with its diffusion and drift parts. The
//! drift part is the upwind first difference; the diffusion part is the
//! second difference plus the centered-minus-upwind correction. Both parts
//! are M-matrices on their own.

use std::ops::Sub;

use nalgebra::DMatrix;

use crate::coefficients::Weight;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::linalg::{sup_norm, to_complex, CsrMatrix, Modulus, ShiftedLu, C64};

/// Largest size for which dense matrix exponentials are formed.
pub const EXPM_LIMIT: usize = 400;

/// Boundary behaviour at a degenerate face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeftBoundary {
    /// No drift: the generator row vanishes.
    Absorbing,
    /// Inward drift: the row is the one-sided drift derivative.
    Entrance,
}

/// Behaviour at `x = M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RightBoundary {
    Neumann,
    /// Degenerate face of the `x(1 − x)` weight.
    Degenerate(LeftBoundary),
}

/// Row entries `(node, value)` of the diffusion and drift parts.
pub(crate) type RowParts = (Vec<(usize, f64)>, Vec<(usize, f64)>);

/// Stencil of node `j` for `a u″ + β u′`, where `a` already contains the
/// degenerate weight (so `a = 0` at degenerate faces).
pub(crate) fn axis_row(x: &[f64], j: usize, a: f64, beta: f64, weight: Weight) -> Result<RowParts> {
    let n = x.len();
    let mut diff = Vec::with_capacity(3);
    let mut drift = Vec::with_capacity(3);
    let degenerate_end = j == n - 1 && weight == Weight::Quadratic;
    if j == 0 || degenerate_end {
        let inward = if j == 0 { beta } else { -beta };
        if inward < -crate::coefficients::TOL_HYP {
            return Err(Error::Hypothesis(format!(
                "drift {beta} points outward at the degenerate face x = {}",
                x[j]
            )));
        }
        if inward > 0.0 {
            let (k, h) = if j == 0 { (1, x[1] - x[0]) } else { (n - 2, x[n - 1] - x[n - 2]) };
            drift.push((k, inward / h));
            drift.push((j, -inward / h));
        }
        return Ok((diff, drift));
    }
    if j == n - 1 {
        let h = x[n - 1] - x[n - 2];
        let c = 2.0 * a / (h * h);
        diff.push((n - 2, c));
        diff.push((n - 1, -c));
        return Ok((diff, drift));
    }
    let hm = x[j] - x[j - 1];
    let hp = x[j + 1] - x[j];
    let s = hm + hp;
    let cl = 2.0 * a / (hm * s);
    let cr = 2.0 * a / (hp * s);
    diff.push((j - 1, cl));
    diff.push((j, -cl - cr));
    diff.push((j + 1, cr));
    if beta != 0.0 {
        if beta > 0.0 {
            drift.push((j + 1, beta / hp));
            drift.push((j, -beta / hp));
        } else {
            drift.push((j - 1, -beta / hm));
            drift.push((j, beta / hm));
        }
        let peclet = beta.abs() * hm.max(hp) / (2.0 * a);
        if peclet <= 1.0 {
            // Centered minus upwind, exact on quadratics.
            let centered = [
                (j - 1, -hp / (hm * s)),
                (j, (hp - hm) / (hm * hp)),
                (j + 1, hm / (hp * s)),
            ];
            for (k, c) in centered {
                diff.push((k, beta * c));
            }
            for &(k, v) in drift.clone().iter() {
                diff.push((k, -v));
            }
        }
    }
    Ok((diff, drift))
}

/// Matrix of an operator together with its diffusion and drift parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Splitting {
    pub matrix: CsrMatrix,
    pub diffusion: CsrMatrix,
    pub drift: CsrMatrix,
}

impl Splitting {
    pub(crate) fn from_rows(n: usize, diff: Vec<Vec<(usize, f64)>>, drift: Vec<Vec<(usize, f64)>>) -> Self {
        let diffusion = CsrMatrix::from_rows(n, diff);
        let drift = CsrMatrix::from_rows(n, drift);
        let matrix = diffusion.add(&drift);
        Self {
            matrix,
            diffusion,
            drift,
        }
    }
}

/// Anything with a generator matrix split into diffusion and drift.
pub trait Generator {
    fn splitting(&self) -> &Splitting;

    fn matrix(&self) -> &CsrMatrix {
        &self.splitting().matrix
    }

    fn size(&self) -> usize {
        self.matrix().dim()
    }
}

impl Generator for Splitting {
    fn splitting(&self) -> &Splitting {
        self
    }
}

/// Discretization of `γ(x) x u″ + b u′` (or `γ(x) x(1−x) u″ + b u′`).
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteOperator {
    grid: Grid1D,
    parts: Splitting,
    left: LeftBoundary,
    right: RightBoundary,
    drift: f64,
    weight: Weight,
}

impl Generator for DiscreteOperator {
    fn splitting(&self) -> &Splitting {
        &self.parts
    }
}

impl DiscreteOperator {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn left_boundary(&self) -> LeftBoundary {
        self.left
    }

    pub fn right_boundary(&self) -> RightBoundary {
        self.right
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.parts.matrix.matvec(u)
    }
}

/// `γ(x) x u″ + b u′` on `grid` with Neumann at `x = M`.
pub fn assemble_1d(grid: &Grid1D, gamma: impl Fn(f64) -> f64, b: f64) -> Result<DiscreteOperator> {
    assemble_weighted(grid, Weight::Linear, gamma, b)
}

/// As [`assemble_1d`] with a choice of weight; `Weight::Quadratic` needs
/// `M = 1` and then requires no drift at `x = 1` beyond the zero row.
pub fn assemble_weighted(
    grid: &Grid1D,
    weight: Weight,
    gamma: impl Fn(f64) -> f64,
    b: f64,
) -> Result<DiscreteOperator> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::InvalidInput(format!("drift b = {b} must be nonnegative")));
    }
    if weight == Weight::Quadratic && (grid.edge() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("the x(1-x) weight requires M = 1".into()));
    }
    let x = grid.nodes();
    let n = x.len();
    let mut diff = Vec::with_capacity(n);
    let mut drift = Vec::with_capacity(n);
    for (j, &xj) in x.iter().enumerate() {
        let g = gamma(xj);
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "gamma({xj}) = {g} must be positive"
            )));
        }
        let w = match weight {
            Weight::Linear => xj,
            Weight::Quadratic => xj * (1.0 - xj),
        };
        // A constant drift cannot point inward at x = 1: there the row is zero.
        let beta = if weight == Weight::Quadratic && j == n - 1 { 0.0 } else { b };
        let (dr, dt) = axis_row(x, j, g * w.max(0.0), beta, weight)?;
        diff.push(dr);
        drift.push(dt);
    }
    let kind = if b > 0.0 {
        LeftBoundary::Entrance
    } else {
        LeftBoundary::Absorbing
    };
    Ok(DiscreteOperator {
        grid: grid.clone(),
        parts: Splitting::from_rows(n, diff, drift),
        left: kind,
        right: match weight {
            Weight::Linear => RightBoundary::Neumann,
            Weight::Quadratic => RightBoundary::Degenerate(LeftBoundary::Absorbing),
        },
        drift: b,
        weight,
    })
}

/// Largest deviation from the M-matrix pattern: `(max |row sum|, max negative
/// off-diagonal magnitude, max positive diagonal)`.
pub fn m_matrix_defect(a: &CsrMatrix) -> (f64, f64, f64) {
    let mut row_sum: f64 = 0.0;
    let mut neg_off: f64 = 0.0;
    let mut pos_diag: f64 = 0.0;
    for i in 0..a.dim() {
        let mut scale: f64 = 0.0;
        for (j, v) in a.row(i) {
            scale = scale.max(v.abs());
            if i == j {
                pos_diag = pos_diag.max(v);
            } else {
                neg_off = neg_off.max(-v);
            }
        }
        row_sum = row_sum.max(a.row_sum(i).abs() / scale.max(1.0));
    }
    (row_sum, neg_off, pos_diag)
}

/// `u` with `(λI − A)u = f`.
pub fn discrete_resolvent<G: Generator + ?Sized>(a: &G, lambda: C64, f: &[C64]) -> Result<Vec<C64>> {
    if f.len() != a.size() {
        return Err(Error::ShapeMismatch {
            expected: a.size(),
            got: f.len(),
        });
    }
    ShiftedLu::new(a.matrix(), lambda)?.solve(f)
}

/// Time integrators for `u′ = Au`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Dense matrix exponential (`N ≤ 400`).
    Expm,
    CrankNicolson,
    ImplicitEuler,
}

/// `exp(tA)` as a dense matrix.
pub fn dense_exp(a: &CsrMatrix, t: f64) -> Result<DMatrix<f64>> {
    if a.dim() > EXPM_LIMIT {
        return Err(Error::TooLargeForDense {
            size: a.dim(),
            limit: EXPM_LIMIT,
        });
    }
    Ok((a.to_dense() * t).exp())
}

/// `T(t)u₀` by the chosen scheme with `steps` equal steps.
pub fn semigroup_step<G: Generator + ?Sized>(
    a: &G,
    t: f64,
    u0: &[f64],
    scheme: Scheme,
    steps: usize,
) -> Result<Vec<f64>> {
    let n = a.size();
    if u0.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            got: u0.len(),
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("time t = {t} must be nonnegative")));
    }
    if t == 0.0 {
        return Ok(u0.to_vec());
    }
    match scheme {
        Scheme::Expm => {
            let e = dense_exp(a.matrix(), t)?;
            Ok((e * nalgebra::DVector::from_column_slice(u0)).as_slice().to_vec())
        }
        Scheme::ImplicitEuler | Scheme::CrankNicolson => {
            if steps == 0 {
                return Err(Error::InvalidInput("at least one time step is needed".into()));
            }
            let tau = t / steps as f64;
            let cn = scheme == Scheme::CrankNicolson;
            let shift = if cn { 2.0 / tau } else { 1.0 / tau };
            let lu = ShiftedLu::new(a.matrix(), C64::new(shift, 0.0))?;
            let mut u = u0.to_vec();
            for _ in 0..steps {
                let rhs: Vec<f64> = if cn {
                    let au = a.matrix().matvec(&u);
                    u.iter().zip(au).map(|(ui, ai)| shift * ui + ai).collect()
                } else {
                    u.iter().map(|ui| shift * ui).collect()
                };
                if sup_norm(&rhs) == 0.0 {
                    u = vec![0.0; n];
                    continue;
                }
                u = lu.solve(&to_complex(&rhs))?.iter().map(|z| z.re).collect();
            }
            Ok(u)
        }
    }
}

/// Weights for the gradient sup-norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientWeight {
    SqrtX,
    SqrtXOneMinusX,
}

impl GradientWeight {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            GradientWeight::SqrtX => x.max(0.0).sqrt(),
            GradientWeight::SqrtXOneMinusX => (x * (1.0 - x)).max(0.0).sqrt(),
        }
    }

    pub fn for_weight(weight: Weight) -> Self {
        match weight {
            Weight::Linear => GradientWeight::SqrtX,
            Weight::Quadratic => GradientWeight::SqrtXOneMinusX,
        }
    }
}

/// Weighted difference quotients over all grid intervals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedGradient {
    pub sup: f64,
    /// Value on `[x₀, x₁]`.
    pub first: f64,
    /// Value on `[x_{N−2}, x_{N−1}]`.
    pub last: f64,
}

/// `max_j w(m_j) |u_{j+1} − u_j| / (x_{j+1} − x_j)` over midpoints `m_j`.
pub fn weighted_gradient_sup<T>(u: &[T], grid: &Grid1D, weight: GradientWeight) -> WeightedGradient
where
    T: Modulus + Sub<Output = T>,
{
    weighted_gradient_strided(u, grid.nodes(), 0, 1, weight)
}

/// As [`weighted_gradient_sup`] along one lane `u[start + k·stride]`.
pub(crate) fn weighted_gradient_strided<T>(
    u: &[T],
    x: &[f64],
    start: usize,
    stride: usize,
    weight: GradientWeight,
) -> WeightedGradient
where
    T: Modulus + Sub<Output = T>,
{
    let n = x.len();
    let mut sup: f64 = 0.0;
    let mut first = 0.0;
    let mut last = 0.0;
    for j in 0..n - 1 {
        let h = x[j + 1] - x[j];
        let m = 0.5 * (x[j] + x[j + 1]);
        let du = (u[start + (j + 1) * stride] - u[start + j * stride]).modulus();
        let v = weight.eval(m) * du / h;
        sup = sup.max(v);
        if j == 0 {
            first = v;
        }
        if j == n - 2 {
            last = v;
        }
    }
    WeightedGradient { sup, first, last }
}
