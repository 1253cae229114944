//! Smooth partitions of unity `Σ φ² ≡ 1` on `[0, M]` and their products on
//! `[0, M]^d`.

use std::f64::consts::FRAC_PI_2;

use crate::coefficients::CoefficientField;
use crate::error::{Error, Result};

/// Points per axis used to sample oscillations on support boxes.
const OSCILLATION_SAMPLES: usize = 9;

fn mollifier(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn mollifier_derivative(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp() / (t * t)
    }
}

/// `C^∞` step from `0` at `t ≤ 0` to `1` at `t ≥ 1`.
pub fn smooth_step(t: f64) -> f64 {
    let a = mollifier(t);
    let b = mollifier(1.0 - t);
    a / (a + b)
}

fn smooth_step_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = mollifier(t);
    let b = mollifier(1.0 - t);
    let da = mollifier_derivative(t);
    let db = -mollifier_derivative(1.0 - t);
    (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
}

/// Bumps `φ_1, …, φ_K` on `[0, M]` separated by disjoint transition
/// intervals: `φ_k` rises as `sin(π/2 · s)` on the transition before it and
/// falls as `cos(π/2 · s)` on the one after, so squares sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionOfUnity {
    d: usize,
    m: f64,
    transitions: Vec<(f64, f64)>,
}

impl PartitionOfUnity {
    /// The family indexed by `n ≥ 2`: `n − 1` bumps with supports
    /// `[(k−1)M/n, (k+1)M/n] ∩ [0, M]`, `k = 1, …, n − 1`.
    pub fn uniform(n: usize, d: usize, m: f64) -> Result<Self> {
        if n < 2 || d == 0 || !(m > 0.0) {
            return Err(Error::InvalidInput(
                "partition needs n >= 2, d >= 1 and M > 0".into(),
            ));
        }
        let transitions = (1..n - 1)
            .map(|i| (m * i as f64 / n as f64, m * (i + 1) as f64 / n as f64))
            .collect();
        Ok(Self { d, m, transitions })
    }

    /// Two bumps on `[0, 1]` exchanging on `[1/3, 2/3]`; the products are
    /// indexed by the corners `{1, 2}^d`.
    pub fn corners(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        Ok(Self {
            d,
            m: 1.0,
            transitions: vec![(1.0 / 3.0, 2.0 / 3.0)],
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn edge(&self) -> f64 {
        self.m
    }

    /// Number of one-dimensional bumps.
    pub fn bumps(&self) -> usize {
        self.transitions.len() + 1
    }

    /// `n` with `bumps = n − 1` for the uniform family.
    pub fn refinement(&self) -> usize {
        self.bumps() + 1
    }

    /// Number of product bumps.
    pub fn count(&self) -> usize {
        self.bumps().pow(self.d as u32)
    }

    /// `φ_k(x)` with 0-based `k`.
    pub fn phi(&self, k: usize, x: f64) -> f64 {
        let mut v = 1.0;
        if k > 0 {
            let (a, b) = self.transitions[k - 1];
            if x <= a {
                return 0.0;
            }
            if x < b {
                v *= (FRAC_PI_2 * smooth_step((x - a) / (b - a))).sin();
            }
        }
        if k < self.transitions.len() {
            let (a, b) = self.transitions[k];
            if x >= b {
                return 0.0;
            }
            if x > a {
                v *= (FRAC_PI_2 * smooth_step((x - a) / (b - a))).cos();
            }
        }
        v
    }

    pub fn dphi(&self, k: usize, x: f64) -> f64 {
        let rise = |x: f64| -> (f64, f64) {
            if k == 0 {
                return (1.0, 0.0);
            }
            let (a, b) = self.transitions[k - 1];
            let t = (x - a) / (b - a);
            let s = FRAC_PI_2 * smooth_step(t);
            (s.sin(), s.cos() * FRAC_PI_2 * smooth_step_derivative(t) / (b - a))
        };
        let fall = |x: f64| -> (f64, f64) {
            if k == self.transitions.len() {
                return (1.0, 0.0);
            }
            let (a, b) = self.transitions[k];
            let t = (x - a) / (b - a);
            let s = FRAC_PI_2 * smooth_step(t);
            (s.cos(), -s.sin() * FRAC_PI_2 * smooth_step_derivative(t) / (b - a))
        };
        let (r, dr) = rise(x);
        let (f, df) = fall(x);
        dr * f + r * df
    }

    /// Closed support `[lo, hi]` of `φ_k`.
    pub fn support(&self, k: usize) -> (f64, f64) {
        let lo = if k == 0 { 0.0 } else { self.transitions[k - 1].0 };
        let hi = if k == self.transitions.len() {
            self.m
        } else {
            self.transitions[k].1
        };
        (lo, hi)
    }

    /// Multi-index of the `flat`-th product bump.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let k = self.bumps();
        let mut out = vec![0; self.d];
        let mut r = flat;
        for i in (0..self.d).rev() {
            out[i] = r % k;
            r /= k;
        }
        out
    }

    /// `Φ(x) = Π_h φ_{multi[h]}(x_h)`.
    pub fn product(&self, multi: &[usize], x: &[f64]) -> f64 {
        multi.iter().zip(x).map(|(&k, &xi)| self.phi(k, xi)).product()
    }

    /// Support box of the product bump.
    pub fn support_box(&self, multi: &[usize]) -> Vec<(f64, f64)> {
        multi.iter().map(|&k| self.support(k)).collect()
    }

    /// Center of the support box, where the frozen coefficients are taken.
    pub fn center(&self, multi: &[usize]) -> Vec<f64> {
        self.support_box(multi)
            .iter()
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }
}

/// `ε₀ = Γ₀² / (4 · 3^d (Γ₀ + d₁))`.
pub fn oscillation_target(gamma_cap0: f64, d: usize, d1: f64) -> f64 {
    gamma_cap0 * gamma_cap0 / (4.0 * 3f64.powi(d as i32) * (gamma_cap0 + d1))
}

/// Largest sampled `sup Γ − inf Γ` over a support box, and the box.
pub fn max_oscillation(cf: &CoefficientField, pou: &PartitionOfUnity) -> (f64, Vec<usize>) {
    let d = pou.dim();
    let mut worst = (0.0, vec![0; d]);
    for flat in 0..pou.count() {
        let multi = pou.multi_index(flat);
        let sbox = pou.support_box(&multi);
        let total = OSCILLATION_SAMPLES.pow(d as u32);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut x = vec![0.0; d];
        for s in 0..total {
            let mut r = s;
            for (h, xh) in x.iter_mut().enumerate() {
                let (a, b) = sbox[h];
                let t = (r % OSCILLATION_SAMPLES) as f64 / (OSCILLATION_SAMPLES - 1) as f64;
                *xh = a + (b - a) * t;
                r /= OSCILLATION_SAMPLES;
            }
            let g = cf.gamma_cap(&x);
            lo = lo.min(g);
            hi = hi.max(g);
        }
        if hi - lo > worst.0 {
            worst = (hi - lo, multi);
        }
    }
    worst
}

/// Rejects the partition when some support box oscillates by `≥ target`.
pub fn check_oscillation(cf: &CoefficientField, pou: &PartitionOfUnity, target: f64) -> Result<f64> {
    let (osc, patch) = max_oscillation(cf, pou);
    if osc >= target {
        return Err(Error::OscillationTargetUnmet {
            patch,
            oscillation: osc,
            target,
        });
    }
    Ok(osc)
}

/// Smallest `n ≤ n_max` of the uniform family meeting the oscillation target.
pub fn choose_refinement(cf: &CoefficientField, target: f64, n_max: usize) -> Result<PartitionOfUnity> {
    let mut last = None;
    for n in 2..=n_max {
        let pou = PartitionOfUnity::uniform(n, cf.dim(), cf.edge())?;
        match check_oscillation(cf, &pou, target) {
            Ok(_) => return Ok(pou),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::InvalidInput("n_max must be at least 2".into())))
}
