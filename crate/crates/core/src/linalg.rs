//! Sparse storage and direct solvers used by every discretization in the crate.
//!
//! Operators are stored as real CSR matrices. Shifted systems `(λI − A)u = f`
//! with complex `λ` are solved by banded LU without pivoting; for `Re λ > 0`
//! and an operator with zero row sums and nonnegative off-diagonals the
//! shifted matrix is strictly diagonally dominant by rows, so elimination
//! without pivoting is stable. Every solve checks its residual.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Row-compressed real sparse matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a square matrix from per-row `(column, value)` lists. Duplicate
    /// columns within a row are summed and explicit zeros are kept out.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), n, "row count must equal dimension");
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                assert!(c < n, "column {c} out of range");
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        let mut m = Self {
            n,
            row_ptr,
            cols,
            vals,
        };
        m.prune_zeros();
        m
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_rows(n, vec![Vec::new(); n])
    }

    fn prune_zeros(&mut self) {
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        row_ptr.push(0);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.vals[k] != 0.0 {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr.push(cols.len());
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v).sum()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn matvec_c(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| x[j] * v).sum())
            .collect()
    }

    /// `self + other`.
    pub fn add(&self, other: &CsrMatrix) -> CsrMatrix {
        self.combine(other, 1.0)
    }

    /// `self − other`.
    pub fn sub(&self, other: &CsrMatrix) -> CsrMatrix {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &CsrMatrix, sign: f64) -> CsrMatrix {
        assert_eq!(self.n, other.n);
        let rows = (0..self.n)
            .map(|i| {
                self.row(i)
                    .chain(other.row(i).map(|(j, v)| (j, sign * v)))
                    .collect()
            })
            .collect();
        CsrMatrix::from_rows(self.n, rows)
    }

    /// `diag(d) · self`.
    pub fn scale_rows(&self, d: &[f64]) -> CsrMatrix {
        assert_eq!(d.len(), self.n);
        let mut out = self.clone();
        for i in 0..self.n {
            for k in out.row_ptr[i]..out.row_ptr[i + 1] {
                out.vals[k] *= d[i];
            }
        }
        out.prune_zeros();
        out
    }

    pub fn scale(&self, s: f64) -> CsrMatrix {
        self.scale_rows(&vec![s; self.n])
    }

    /// Lower and upper bandwidth.
    pub fn bandwidth(&self) -> (usize, usize) {
        let mut lo = 0;
        let mut up = 0;
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if j < i {
                    lo = lo.max(i - j);
                } else {
                    up = up.max(j - i);
                }
            }
        }
        (lo, up)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Induced sup-norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// LU factors of `λI − A` in row-major band storage.
#[derive(Clone, Debug)]
pub struct ShiftedLu {
    n: usize,
    lower: usize,
    upper: usize,
    band: Vec<C64>,
    lambda: C64,
    matrix: CsrMatrix,
}

pub const RESIDUAL_TOL: f64 = 1e-10;

impl ShiftedLu {
    pub fn new(matrix: &CsrMatrix, lambda: C64) -> Result<Self> {
        let n = matrix.dim();
        let (lower, upper) = matrix.bandwidth();
        let width = lower + upper + 1;
        let mut band = vec![C64::new(0.0, 0.0); n * width];
        let idx = |i: usize, j: usize| i * width + (j + lower - i);
        for i in 0..n {
            band[idx(i, i)] += lambda;
            for (j, v) in matrix.row(i) {
                band[idx(i, j)] -= v;
            }
        }
        let scale = matrix.norm_inf() + lambda.norm();
        for k in 0..n {
            let pivot = band[idx(k, k)];
            if pivot.norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::Singular {
                    row: k,
                    condition: f64::INFINITY,
                });
            }
            let last_row = (k + lower).min(n - 1);
            let last_col = (k + upper).min(n - 1);
            for i in k + 1..=last_row {
                let l = band[idx(i, k)] / pivot;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                band[idx(i, k)] = l;
                for j in k + 1..=last_col {
                    let ukj = band[idx(k, j)];
                    band[idx(i, j)] -= l * ukj;
                }
            }
        }
        Ok(Self {
            n,
            lower,
            upper,
            band,
            lambda,
            matrix: matrix.clone(),
        })
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn substitute(&self, rhs: &[C64]) -> Vec<C64> {
        let n = self.n;
        let width = self.lower + self.upper + 1;
        let idx = |i: usize, j: usize| i * width + (j + self.lower - i);
        let mut x = rhs.to_vec();
        for i in 0..n {
            let first = i.saturating_sub(self.lower);
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(i).skip(first) {
                s -= self.band[idx(i, j)] * xj;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let last = (i + self.upper).min(n - 1);
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(last + 1).skip(i + 1) {
                s -= self.band[idx(i, j)] * xj;
            }
            x[i] = s / self.band[idx(i, i)];
        }
        x
    }

    /// `(λI − A)x − f`.
    pub fn residual(&self, x: &[C64], f: &[C64]) -> Vec<C64> {
        let ax = self.matrix.matvec_c(x);
        x.iter()
            .zip(ax)
            .zip(f)
            .map(|((xi, axi), fi)| self.lambda * xi - axi - fi)
            .collect()
    }

    /// Solves with one step of iterative refinement when the first residual
    /// misses the tolerance.
    pub fn solve(&self, f: &[C64]) -> Result<Vec<C64>> {
        if f.len() != self.n {
            return Err(Error::ShapeMismatch {
                expected: self.n,
                got: f.len(),
            });
        }
        let fnorm = sup_norm(f);
        if fnorm == 0.0 {
            return Ok(vec![C64::new(0.0, 0.0); self.n]);
        }
        let mut x = self.substitute(f);
        let mut r = self.residual(&x, f);
        if sup_norm(&r) > RESIDUAL_TOL * fnorm {
            let dx = self.substitute(&r);
            for (xi, di) in x.iter_mut().zip(dx) {
                *xi -= di;
            }
            r = self.residual(&x, f);
        }
        let res = sup_norm(&r);
        if !res.is_finite() || res > RESIDUAL_TOL * fnorm {
            return Err(Error::IllConditioned {
                residual: res / fnorm,
                tolerance: RESIDUAL_TOL,
                condition: self.condition_estimate(),
            });
        }
        Ok(x)
    }

    pub fn solve_real(&self, f: &[f64]) -> Result<Vec<C64>> {
        self.solve(&to_complex(f))
    }

    /// Crude sup-norm condition estimate: `‖M‖ · max_p ‖M⁻¹p‖` over a few sign
    /// probes.
    pub fn condition_estimate(&self) -> f64 {
        let norm_m = self.matrix.norm_inf() + self.lambda.norm();
        let n = self.n;
        let probes: [Box<dyn Fn(usize) -> f64>; 3] = [
            Box::new(|_| 1.0),
            Box::new(|i| if i % 2 == 0 { 1.0 } else { -1.0 }),
            Box::new(move |i| if i < n / 2 { 1.0 } else { -1.0 }),
        ];
        let inv = probes
            .iter()
            .map(|p| {
                let v: Vec<C64> = (0..n).map(|i| C64::new(p(i), 0.0)).collect();
                sup_norm(&self.substitute(&v))
            })
            .fold(0.0, f64::max);
        norm_m * inv
    }
}

pub fn to_complex(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

pub fn real_parts(v: &[C64]) -> Vec<f64> {
    v.iter().map(|z| z.re).collect()
}

/// Values whose modulus can be taken; lets sup-norm helpers accept real and
/// complex vectors alike.
pub trait Modulus: Copy {
    fn modulus(self) -> f64;
}

impl Modulus for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Modulus for C64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

pub fn sup_norm<T: Modulus>(v: &[T]) -> f64 {
    v.iter().map(|x| x.modulus()).fold(0.0, f64::max)
}

pub fn sup_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
