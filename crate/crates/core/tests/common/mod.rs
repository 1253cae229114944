//! Independent oracles shared by the integration tests: a Chebyshev
//! collocation solver for the half-line resolvent equation and dense
//! linear-algebra references for the discrete operators.
#![allow(dead_code)]

use degensemi_core::linalg::{CsrMatrix, C64};
use nalgebra::DMatrix;

/// Chebyshev points on `[0, length]` (increasing) with the differentiation
/// matrix acting on values at those points.
pub fn chebyshev(n: usize, length: f64) -> (Vec<f64>, DMatrix<f64>) {
    // Standard construction on [-1, 1] with points cos(πj/n), j = 0..n.
    let m = n + 1;
    let t: Vec<f64> = (0..m)
        .map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos())
        .collect();
    let c: Vec<f64> = (0..m)
        .map(|j| {
            let base = if j == 0 || j == n { 2.0 } else { 1.0 };
            if j % 2 == 0 {
                base
            } else {
                -base
            }
        })
        .collect();
    let mut d = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if i != j {
                d[(i, j)] = c[i] / c[j] / (t[i] - t[j]);
            }
        }
    }
    for i in 0..m {
        let s: f64 = (0..m).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    // Map t ∈ [-1, 1] to x = (1 − t)·length/2 so that x increases with j.
    let x: Vec<f64> = t.iter().map(|ti| (1.0 - ti) * length / 2.0).collect();
    let d = d * (-2.0 / length);
    (x, d)
}

/// Collocation solution of `λv − γv″ − bv′ = u` on `[0, length]` with
/// `v′(0) = 0` and `v′(length) = 0`.
pub struct Collocation {
    pub nodes: Vec<f64>,
    pub values: Vec<C64>,
    weights: Vec<f64>,
}

pub fn collocation_halfline(
    lambda: C64,
    gamma: f64,
    b: f64,
    u: &dyn Fn(f64) -> f64,
    length: f64,
    n: usize,
) -> Collocation {
    let (x, d) = chebyshev(n, length);
    let m = x.len();
    let d2 = &d * &d;
    let mut a = DMatrix::<C64>::zeros(m, m);
    let mut rhs = nalgebra::DVector::<C64>::zeros(m);
    for i in 0..m {
        if i == 0 || i == m - 1 {
            for j in 0..m {
                a[(i, j)] = C64::new(d[(i, j)], 0.0);
            }
            continue;
        }
        for j in 0..m {
            a[(i, j)] = C64::new(-gamma * d2[(i, j)] - b * d[(i, j)], 0.0);
        }
        a[(i, i)] += lambda;
        rhs[i] = C64::new(u(x[i]), 0.0);
    }
    let v = a.lu().solve(&rhs).expect("collocation system is nonsingular");
    let weights = (0..m)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == m - 1 {
                0.5 * s
            } else {
                s
            }
        })
        .collect();
    Collocation {
        nodes: x,
        values: v.iter().copied().collect(),
        weights,
    }
}

impl Collocation {
    /// Barycentric interpolation of the collocation solution.
    pub fn eval(&self, x: f64) -> C64 {
        let mut num = C64::new(0.0, 0.0);
        let mut den = 0.0;
        for ((&xj, &vj), &wj) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
            let diff = x - xj;
            if diff == 0.0 {
                return vj;
            }
            let c = wj / diff;
            num += vj * c;
            den += c;
        }
        num / den
    }
}

/// `max |λv − γv″ − bv′ − u| / ‖u‖∞` over interior Chebyshev nodes, with
/// derivatives taken by the collocation matrix.
pub fn collocation_residual(
    lambda: C64,
    gamma: f64,
    b: f64,
    nodes: &[f64],
    d: &DMatrix<f64>,
    values: &[C64],
    u: &dyn Fn(f64) -> f64,
) -> f64 {
    let m = nodes.len();
    let mut worst: f64 = 0.0;
    let mut unorm: f64 = 0.0;
    for i in 1..m - 1 {
        let mut dv = C64::new(0.0, 0.0);
        let mut d2v = C64::new(0.0, 0.0);
        for j in 0..m {
            dv += values[j] * d[(i, j)];
            let d2 = (0..m).map(|k| d[(i, k)] * d[(k, j)]).sum::<f64>();
            d2v += values[j] * d2;
        }
        let r = lambda * values[i] - d2v * gamma - dv * b - u(nodes[i]);
        worst = worst.max(r.norm());
        unorm = unorm.max(u(nodes[i]).abs());
    }
    worst / unorm
}

/// Dense `(λI − A)⁻¹` for real `λ`.
pub fn dense_resolvent(a: &CsrMatrix, lambda: f64) -> DMatrix<f64> {
    let n = a.dim();
    (DMatrix::<f64>::identity(n, n) * lambda - a.to_dense())
        .try_inverse()
        .expect("shifted matrix is invertible")
}

/// Largest entrywise distance between two complex vectors, relative to the
/// sup-norm of the second.
pub fn rel_dist(a: &[C64], b: &[C64]) -> f64 {
    let d = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let n = b.iter().map(|y| y.norm()).fold(0.0, f64::max);
    if n == 0.0 {
        d
    } else {
        d / n
    }
}

pub fn real_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn c(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

/// `Σᵢ I ⊗ … ⊗ Aᵢ ⊗ … ⊗ I` from dense factors, first axis slowest.
pub fn dense_kronecker_sum(factors: &[DMatrix<f64>]) -> DMatrix<f64> {
    let sizes: Vec<usize> = factors.iter().map(|f| f.nrows()).collect();
    let n: usize = sizes.iter().product();
    let mut out = DMatrix::<f64>::zeros(n, n);
    for (i, f) in factors.iter().enumerate() {
        let mut term = DMatrix::<f64>::identity(1, 1);
        for (j, &s) in sizes.iter().enumerate() {
            let piece = if i == j { f.clone() } else { DMatrix::identity(s, s) };
            term = term.kronecker(&piece);
        }
        out += term;
    }
    out
}

/// `exp(tA)` by nalgebra's Padé scaling and squaring.
pub fn dense_exp(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    (a * t).exp()
}

pub fn matvec(a: &DMatrix<f64>, u: &[f64]) -> Vec<f64> {
    (a * nalgebra::DVector::from_column_slice(u)).as_slice().to_vec()
}

pub mod fixtures {
    use degensemi_core::coefficients::{
        CoefficientField, CoefficientSpec, DriftField, Profile, ScalarField, Weight,
    };
    use degensemi_core::grid::{Grid1D, TensorGrid};

    /// `bᵢ(x) = ½√xᵢ · Π_{j≠i}(1 + x_j/2)`: square-root modulus at the faces.
    pub fn separated_drift(d: usize) -> CoefficientField {
        CoefficientField::new(CoefficientSpec::simple(
            d,
            1.0,
            1.0,
            DriftField::Separated {
                c: vec![Profile::PowerSum { terms: vec![[0.5, 0.5]] }; d],
                m: vec![Profile::Polynomial { coeffs: vec![1.0, 0.5] }; d],
            },
        ))
        .unwrap()
    }

    /// `b(x) = √x(1 + x)/4` in one dimension.
    pub fn root_drift() -> CoefficientField {
        CoefficientField::new(CoefficientSpec::simple(
            1,
            1.0,
            1.0,
            DriftField::Axial {
                components: vec![Profile::PowerSum { terms: vec![[0.25, 0.5], [0.25, 1.5]] }],
            },
        ))
        .unwrap()
    }

    /// `Γ(x) = 1 + x/2`, `γ ≡ 1`, no drift.
    pub fn variable_gamma() -> CoefficientField {
        let mut spec = CoefficientSpec::simple(1, 1.0, 1.0, DriftField::zero(1));
        spec.gamma_cap = ScalarField::Product {
            factors: vec![Profile::Polynomial { coeffs: vec![1.0, 0.5] }],
        };
        CoefficientField::new(spec).unwrap()
    }

    /// `x(1 − x)` weight with selection drift `cᵢ(x) = ½(1 − x)`.
    pub fn selection(d: usize) -> CoefficientField {
        let mut spec = CoefficientSpec::simple(
            d,
            1.0,
            1.0,
            DriftField::Selection {
                c: vec![Profile::Polynomial { coeffs: vec![0.5, -0.5] }; d],
            },
        );
        spec.weight = Weight::Quadratic;
        CoefficientField::new(spec).unwrap()
    }

    pub fn graded(d: usize, n: usize) -> TensorGrid {
        TensorGrid::new(vec![Grid1D::graded(1.0, n, 2.0).unwrap(); d]).unwrap()
    }

    pub fn symmetric(d: usize, n: usize) -> TensorGrid {
        TensorGrid::new(vec![Grid1D::symmetric(1.0, n, 2.0).unwrap(); d]).unwrap()
    }
}
