//! Graded one-dimensional grids and their tensor products.

use crate::error::{Error, Result};

/// Where the nodes cluster.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grading {
    /// `x_j = M (j/(N−1))^p`: clustered at `0` only.
    Left,
    /// Mirror-symmetric about `M/2`, clustered at both ends.
    Symmetric,
    /// Nodes supplied explicitly.
    Custom,
}

/// Strictly increasing nodes `0 = x₀ < … < x_{N−1} = M`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D {
    m: f64,
    nodes: Vec<f64>,
    p: f64,
    grading: Grading,
}

impl Grid1D {
    /// Nodes `x_j = M (j/(N−1))^p`.
    pub fn graded(m: f64, n: usize, p: f64) -> Result<Self> {
        check(m, n, p)?;
        let mut nodes: Vec<f64> = (0..n)
            .map(|j| m * (j as f64 / (n - 1) as f64).powf(p))
            .collect();
        nodes[n - 1] = m;
        Ok(Self {
            m,
            nodes,
            p,
            grading: Grading::Left,
        })
    }

    pub fn uniform(m: f64, n: usize) -> Result<Self> {
        Self::graded(m, n, 1.0)
    }

    /// Grading `p` towards both ends; `x_{N−1−j} = M − x_j` holds exactly.
    pub fn symmetric(m: f64, n: usize, p: f64) -> Result<Self> {
        check(m, n, p)?;
        let mut nodes = vec![0.0; n];
        for j in 0..n.div_ceil(2) {
            let s = j as f64 / (n - 1) as f64;
            let x = if 2 * j == n - 1 {
                m / 2.0
            } else {
                0.5 * m * (2.0 * s).powf(p)
            };
            nodes[j] = x;
            nodes[n - 1 - j] = m - x;
        }
        nodes[0] = 0.0;
        nodes[n - 1] = m;
        Ok(Self {
            m,
            nodes,
            p,
            grading: Grading::Symmetric,
        })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidInput("a grid needs at least 3 nodes".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidInput("grids start at 0".into()));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput(
                "grid nodes must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            m: *nodes.last().unwrap(),
            nodes,
            p: f64::NAN,
            grading: Grading::Custom,
        })
    }

    /// Same family with `2(N−1)+1` nodes; every old node is kept for `p = 1`,
    /// and the grading law is preserved otherwise.
    pub fn refined(&self) -> Result<Self> {
        let n = 2 * (self.len() - 1) + 1;
        match self.grading {
            Grading::Left => Self::graded(self.m, n, self.p),
            Grading::Symmetric => Self::symmetric(self.m, n, self.p),
            Grading::Custom => {
                let mut nodes = Vec::with_capacity(n);
                for w in self.nodes.windows(2) {
                    nodes.push(w[0]);
                    nodes.push(0.5 * (w[0] + w[1]));
                }
                nodes.push(self.m);
                Self::from_nodes(nodes)
            }
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge(&self) -> f64 {
        self.m
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    /// `x_{j+1} − x_j`.
    pub fn spacing(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }
}

fn check(m: f64, n: usize, p: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidInput("grid edge must be positive".into()));
    }
    if n < 3 {
        return Err(Error::InvalidInput("a grid needs at least 3 nodes".into()));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidInput("grading exponent must be >= 1".into()));
    }
    Ok(())
}

/// Tensor product of 1D grids; flat indices are row-major with the last axis
/// varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorGrid {
    axes: Vec<Grid1D>,
    strides: Vec<usize>,
    len: usize,
}

impl TensorGrid {
    pub fn new(axes: Vec<Grid1D>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidInput("tensor grid needs an axis".into()));
        }
        let d = axes.len();
        let mut strides = vec![1; d];
        for i in (0..d - 1).rev() {
            strides[i] = strides[i + 1] * axes[i + 1].len();
        }
        let len = strides[0] * axes[0].len();
        Ok(Self { axes, strides, len })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> &Grid1D {
        &self.axes[i]
    }

    pub fn axes(&self) -> &[Grid1D] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Grid1D::len).collect()
    }

    pub fn stride(&self, i: usize) -> usize {
        self.strides[i]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn flat(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(j, s)| j * s).sum()
    }

    pub fn multi(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for (i, s) in self.strides.iter().enumerate() {
            out[i] = flat / s;
            flat %= s;
        }
        out
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&j, g)| g.nodes()[j])
            .collect()
    }

    /// Evaluates `f` at every node.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.len).map(|k| f(&self.point(k))).collect()
    }

    /// Flat index of the first entry of every lane along `axis`; the lane
    /// continues with step [`TensorGrid::stride`]`(axis)`.
    pub fn lane_starts(&self, axis: usize) -> Vec<usize> {
        let stride = self.strides[axis];
        let n = self.axes[axis].len();
        (0..self.len)
            .filter(|k| (k / stride) % n == 0)
            .collect()
    }
}
