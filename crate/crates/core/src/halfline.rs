//! Reference resolvent of `G^{γ,b}u = γu″ + bu′` on `[0, ∞)` with `u′(0) = 0`.
//!
//! For `b = 0, γ = 1` the resolvent has the closed form
//!
//! ```text
//! R(λ, G)u(x) = 1/(2μ) [ ∫₀^∞ e^{−μ|x−s|} u(s) ds + e^{−μx} ∫₀^∞ e^{−μs} u(s) ds ],
//! ```
//!
//! `μ² = λ`, `Re μ > 0`. It is evaluated with composite 16-point
//! Gauss–Legendre panels aligned with the features of `u`; beyond the last
//! panel `u` is replaced by its limit at infinity and integrated exactly.
//! Diffusion `γ` enters through `R(λ, G^{γ,0}) = γ⁻¹ R(λ/γ, G)` and the drift
//! through the Neumann series `R(λ, G^{γ,b}) = R(λ, G^{γ,0}) Σₙ (H^b R(λ, G^{γ,0}))ⁿ`
//! with `H^b u = b u′`.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quadrature::{barycentric_coefficients, barycentric_weights, gauss_legendre};
use crate::verify::report::{EstimateReport, ReportPoint};

type C64 = Complex64;

const NQ: usize = 16;

/// Kernel decay (in units of `1/Re μ`) covered by panels past the last feature.
const DECAY_SPAN: f64 = 40.0;

/// Relative tail tolerance of the drift series.
pub const SERIES_TOL: f64 = 1e-10;

/// Slack on the analytic bounds in [`oracle_norm_sweep`].
pub const QUADRATURE_SLACK: f64 = 1e-3;

/// A spectral parameter `λ = |λ|e^{iθ}` off the closed negative axis, with
/// its root `μ`, `μ² = λ`, `Re μ > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorPoint {
    lambda: C64,
    theta: f64,
    mu: C64,
}

impl SectorPoint {
    pub fn new(lambda: C64) -> Result<Self> {
        if !(lambda.re.is_finite() && lambda.im.is_finite())
            || (lambda.im == 0.0 && lambda.re <= 0.0)
        {
            return Err(Error::OutsideResolventSet { lambda });
        }
        let mu = lambda.sqrt();
        debug_assert!(mu.re > 0.0);
        Ok(Self {
            lambda,
            theta: lambda.arg(),
            mu,
        })
    }

    /// `λ = magnitude · e^{iθ}`.
    pub fn polar(magnitude: f64, theta: f64) -> Result<Self> {
        if !(magnitude > 0.0) || theta.abs() >= std::f64::consts::PI {
            return Err(Error::OutsideResolventSet {
                lambda: C64::from_polar(magnitude, theta),
            });
        }
        Self::new(C64::from_polar(magnitude, theta))
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn mu(&self) -> C64 {
        self.mu
    }

    pub fn magnitude(&self) -> f64 {
        self.lambda.norm()
    }

    /// The point `λ/γ`.
    pub fn divided(&self, gamma: f64) -> Result<Self> {
        Self::new(self.lambda / gamma)
    }
}

/// Bounded functions on the half-line with a limit at infinity.
#[derive(Clone, Debug, PartialEq)]
pub enum HalflineFunction {
    Constant(f64),
    /// `amplitude · e^{−rate·s}`, `rate > 0`.
    Exponential { amplitude: f64, rate: f64 },
    /// `values[k]` on `[edges[k−1], edges[k])` with `edges[−1] = 0`; the last
    /// value holds on `[edges.last(), ∞)`.
    Steps { edges: Vec<f64>, values: Vec<f64> },
    /// Piecewise linear through `(nodes, values)` with `nodes[0] = 0`, then the
    /// constant `limit`.
    Sampled {
        nodes: Vec<f64>,
        values: Vec<f64>,
        limit: f64,
    },
}

impl HalflineFunction {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            HalflineFunction::Constant(c) => *c,
            HalflineFunction::Exponential { amplitude, rate } => amplitude * (-rate * s).exp(),
            HalflineFunction::Steps { edges, values } => values[edges.partition_point(|&e| e <= s)],
            HalflineFunction::Sampled {
                nodes,
                values,
                limit,
            } => {
                if s > *nodes.last().unwrap() {
                    return *limit;
                }
                let k = nodes.partition_point(|&t| t <= s).clamp(1, nodes.len() - 1);
                let (a, b) = (nodes[k - 1], nodes[k]);
                let w = (s - a) / (b - a);
                values[k - 1] + w * (values[k] - values[k - 1])
            }
        }
    }

    pub fn limit(&self) -> f64 {
        match self {
            HalflineFunction::Constant(c) => *c,
            HalflineFunction::Exponential { .. } => 0.0,
            HalflineFunction::Steps { values, .. } => *values.last().unwrap(),
            HalflineFunction::Sampled { limit, .. } => *limit,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            HalflineFunction::Constant(c) => c.abs(),
            HalflineFunction::Exponential { amplitude, .. } => amplitude.abs(),
            HalflineFunction::Steps { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
            HalflineFunction::Sampled { values, limit, .. } => {
                values.iter().fold(limit.abs(), |m, v| m.max(v.abs()))
            }
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(msg.to_string()));
        match self {
            HalflineFunction::Constant(c) if !c.is_finite() => bad("constant must be finite"),
            HalflineFunction::Exponential { amplitude, rate }
                if !(amplitude.is_finite() && *rate > 0.0 && rate.is_finite()) =>
            {
                bad("exponential needs a finite amplitude and positive rate")
            }
            HalflineFunction::Steps { edges, values } => {
                if values.len() != edges.len() + 1 {
                    return bad("steps need one more value than edges");
                }
                if edges.first().is_some_and(|&e| e <= 0.0)
                    || edges.windows(2).any(|w| !(w[0] < w[1]))
                {
                    return bad("step edges must be positive and strictly increasing");
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("step values must be finite");
                }
                Ok(())
            }
            HalflineFunction::Sampled {
                nodes,
                values,
                limit,
            } => {
                if nodes.len() < 2 || nodes.len() != values.len() || nodes[0] != 0.0 {
                    return bad("sampled function needs matching nodes starting at 0");
                }
                if nodes.windows(2).any(|w| !(w[0] < w[1])) {
                    return bad("sample nodes must be strictly increasing");
                }
                if values.iter().any(|v| !v.is_finite()) || !limit.is_finite() {
                    return bad("sampled values must be finite");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Points where `u` is not smooth, and the scale on which it varies.
    fn features(&self) -> (Vec<f64>, Option<f64>) {
        match self {
            HalflineFunction::Constant(_) => (Vec::new(), None),
            HalflineFunction::Exponential { rate, .. } => (Vec::new(), Some(*rate)),
            HalflineFunction::Steps { edges, .. } => (edges.clone(), None),
            HalflineFunction::Sampled { nodes, .. } => (nodes[1..].to_vec(), None),
        }
    }
}

/// Constant-coefficient data `γ > 0`, `b ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalflineProblem {
    pub gamma: f64,
    pub b: f64,
}

impl HalflineProblem {
    pub fn new(gamma: f64, b: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput("gamma must be positive".into()));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::InvalidInput("drift must be nonnegative".into()));
        }
        Ok(Self { gamma, b })
    }

    /// `8b²/γ`, above which the drift series converges on `|θ| < π/2`.
    pub fn threshold(&self) -> f64 {
        8.0 * self.b * self.b / self.gamma
    }

    /// The bound `b/(√(γ|λ|) cos(θ/2))` on `‖H^b R(λ, G^{γ,0})‖`.
    pub fn contraction_bound(&self, sp: &SectorPoint) -> f64 {
        self.b / ((self.gamma * sp.magnitude()).sqrt() * (sp.theta() / 2.0).cos())
    }
}

/// Reference Gauss–Legendre data and the interpolation tables for partial
/// panel integrals, shared by every solver.
struct Tables {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `left[k][q]`: interpolation coefficients at the `q`-th quadrature node
    /// of `[−1, t_k]`; `right[k][q]` likewise for `[t_k, 1]`.
    left: Vec<Vec<(f64, Vec<f64>)>>,
    right: Vec<Vec<(f64, Vec<f64>)>>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let (nodes, weights) = gauss_legendre(NQ);
        let bw = barycentric_weights(&nodes);
        let sub = |a: f64, b: f64| -> Vec<(f64, Vec<f64>)> {
            nodes
                .iter()
                .map(|&tau| {
                    let t = a + (b - a) * (tau + 1.0) / 2.0;
                    (t, barycentric_coefficients(&nodes, &bw, t))
                })
                .collect()
        };
        let left = nodes.iter().map(|&tk| sub(-1.0, tk)).collect();
        let right = nodes.iter().map(|&tk| sub(tk, 1.0)).collect();
        Tables {
            nodes,
            weights,
            left,
            right,
        }
    })
}

/// Partial-integral matrices of one panel width.
struct PanelKernel {
    width: f64,
    /// `left[k][j]`: weight of `u_j` in `∫_a^{x_k} e^{−μ(x_k−s)}u(s) ds`.
    left: Vec<[C64; NQ]>,
    /// `right[k][j]`: weight of `u_j` in `∫_{x_k}^{b} e^{−μ(s−x_k)}u(s) ds`.
    right: Vec<[C64; NQ]>,
    /// Full-panel weights for `∫_a^b e^{−μ(b−s)}u` and `∫_a^b e^{−μ(s−a)}u`.
    full_left: [C64; NQ],
    full_right: [C64; NQ],
    decay: C64,
}

impl PanelKernel {
    fn new(mu: C64, h: f64) -> Self {
        let tb = tables();
        let half = h / 2.0;
        let mut left = vec![[C64::new(0.0, 0.0); NQ]; NQ];
        let mut right = vec![[C64::new(0.0, 0.0); NQ]; NQ];
        for k in 0..NQ {
            let tk = tb.nodes[k];
            let len_l = half * (tk + 1.0) / 2.0;
            for (q, (t, coeffs)) in tb.left[k].iter().enumerate() {
                let kern = (-mu * (half * (tk - t))).exp() * (len_l * tb.weights[q]);
                for j in 0..NQ {
                    left[k][j] += kern * coeffs[j];
                }
            }
            let len_r = half * (1.0 - tk) / 2.0;
            for (q, (t, coeffs)) in tb.right[k].iter().enumerate() {
                let kern = (-mu * (half * (t - tk))).exp() * (len_r * tb.weights[q]);
                for j in 0..NQ {
                    right[k][j] += kern * coeffs[j];
                }
            }
        }
        let mut full_left = [C64::new(0.0, 0.0); NQ];
        let mut full_right = [C64::new(0.0, 0.0); NQ];
        for j in 0..NQ {
            let t = tb.nodes[j];
            full_left[j] = (-mu * (half * (1.0 - t))).exp() * (half * tb.weights[j]);
            full_right[j] = (-mu * (half * (t + 1.0))).exp() * (half * tb.weights[j]);
        }
        Self {
            width: h,
            left,
            right,
            full_left,
            full_right,
            decay: (-mu * h).exp(),
        }
    }
}

/// Function values at the panel nodes plus the value beyond the last panel.
#[derive(Clone, Debug)]
struct PanelFunction {
    values: Vec<C64>,
    limit: C64,
}

impl PanelFunction {
    fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .fold(self.limit.norm(), |m, v| m.max(v.norm()))
    }
}

/// The kernel integrals `left(x)`, `right(x)` at every panel boundary.
struct Sweep<'a> {
    u: &'a PanelFunction,
    left_at: Vec<C64>,
    right_at: Vec<C64>,
}

/// Evaluates `R(λ', G)` for one `μ' = √λ'` on a fixed panel layout.
struct KernelSolver {
    mu: C64,
    edges: Vec<f64>,
    kernel_of_panel: Vec<usize>,
    kernels: Vec<PanelKernel>,
}

impl KernelSolver {
    fn new(mu: C64, features: &[f64], rate: Option<f64>) -> Self {
        let mut breaks: Vec<f64> = features.iter().copied().filter(|&f| f > 0.0).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let last = breaks.last().copied().unwrap_or(0.0);
        let span = DECAY_SPAN / mu.re.min(rate.unwrap_or(f64::INFINITY));
        let mut max_width = 2.0 / mu.norm();
        if let Some(r) = rate {
            max_width = max_width.min(2.0 / r);
        }
        let mut points = vec![0.0];
        points.extend(breaks);
        points.push(last + span);
        let mut edges = vec![0.0];
        for w in points.windows(2) {
            let count = ((w[1] - w[0]) / max_width).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / count as f64;
            for i in 1..count {
                edges.push(w[0] + h * i as f64);
            }
            edges.push(w[1]);
        }
        let mut kernels: Vec<PanelKernel> = Vec::new();
        let mut kernel_of_panel = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            let h = w[1] - w[0];
            let found = kernels
                .iter()
                .position(|k| (k.width - h).abs() <= 1e-14 * h);
            let idx = match found {
                Some(i) => i,
                None => {
                    kernels.push(PanelKernel::new(mu, h));
                    kernels.len() - 1
                }
            };
            kernel_of_panel.push(idx);
        }
        Self {
            mu,
            edges,
            kernel_of_panel,
            kernels,
        }
    }

    fn panels(&self) -> usize {
        self.edges.len() - 1
    }

    fn end(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    fn node(&self, p: usize, k: usize) -> f64 {
        let (a, b) = (self.edges[p], self.edges[p + 1]);
        a + (b - a) * (tables().nodes[k] + 1.0) / 2.0
    }

    fn sample(&self, u: &HalflineFunction) -> PanelFunction {
        let mut values = Vec::with_capacity(self.panels() * NQ);
        for p in 0..self.panels() {
            for k in 0..NQ {
                values.push(C64::new(u.eval(self.node(p, k)), 0.0));
            }
        }
        PanelFunction {
            values,
            limit: C64::new(u.limit(), 0.0),
        }
    }

    fn sweep<'a>(&self, u: &'a PanelFunction) -> Sweep<'a> {
        let np = self.panels();
        let mut left_at = vec![C64::new(0.0, 0.0); np + 1];
        let mut right_at = vec![C64::new(0.0, 0.0); np + 1];
        right_at[np] = u.limit / self.mu;
        for p in 0..np {
            let kern = &self.kernels[self.kernel_of_panel[p]];
            let vals = &u.values[p * NQ..(p + 1) * NQ];
            let inc: C64 = kern.full_left.iter().zip(vals).map(|(w, v)| w * v).sum();
            left_at[p + 1] = kern.decay * left_at[p] + inc;
        }
        for p in (0..np).rev() {
            let kern = &self.kernels[self.kernel_of_panel[p]];
            let vals = &u.values[p * NQ..(p + 1) * NQ];
            let inc: C64 = kern.full_right.iter().zip(vals).map(|(w, v)| w * v).sum();
            right_at[p] = kern.decay * right_at[p + 1] + inc;
        }
        Sweep {
            u,
            left_at,
            right_at,
        }
    }

    /// `(left, right)` at every panel node.
    fn at_nodes(&self, sw: &Sweep) -> Vec<(C64, C64)> {
        let tb = tables();
        let mut out = Vec::with_capacity(self.panels() * NQ);
        for p in 0..self.panels() {
            let kern = &self.kernels[self.kernel_of_panel[p]];
            let vals = &sw.u.values[p * NQ..(p + 1) * NQ];
            let half = kern.width / 2.0;
            for k in 0..NQ {
                let t = tb.nodes[k];
                let pl: C64 = kern.left[k].iter().zip(vals).map(|(w, v)| w * v).sum();
                let pr: C64 = kern.right[k].iter().zip(vals).map(|(w, v)| w * v).sum();
                let l = (-self.mu * (half * (t + 1.0))).exp() * sw.left_at[p] + pl;
                let r = (-self.mu * (half * (1.0 - t))).exp() * sw.right_at[p + 1] + pr;
                out.push((l, r));
            }
        }
        out
    }

    /// `(left, right)` at an arbitrary `x ≥ 0`.
    fn at_point(&self, sw: &Sweep, x: f64) -> (C64, C64) {
        let mu = self.mu;
        let end = self.end();
        let np = self.panels();
        if x >= end {
            let e = (-mu * (x - end)).exp();
            let l = e * sw.left_at[np] + sw.u.limit * (1.0 - e) / mu;
            return (l, sw.u.limit / mu);
        }
        let tb = tables();
        let p = (self.edges.partition_point(|&e| e <= x) - 1).min(np - 1);
        let (a, b) = (self.edges[p], self.edges[p + 1]);
        let vals = &sw.u.values[p * NQ..(p + 1) * NQ];
        let bw = barycentric_weights(&tb.nodes);
        let to_ref = |s: f64| 2.0 * (s - a) / (b - a) - 1.0;
        let interp = |s: f64| -> C64 {
            barycentric_coefficients(&tb.nodes, &bw, to_ref(s))
                .iter()
                .zip(vals)
                .map(|(c, v)| v * c)
                .sum()
        };
        let mut pl = C64::new(0.0, 0.0);
        let mut pr = C64::new(0.0, 0.0);
        for q in 0..NQ {
            let tau = tb.nodes[q];
            let sl = a + (x - a) * (tau + 1.0) / 2.0;
            pl += (-mu * (x - sl)).exp() * interp(sl) * ((x - a) / 2.0 * tb.weights[q]);
            let sr = x + (b - x) * (tau + 1.0) / 2.0;
            pr += (-mu * (sr - x)).exp() * interp(sr) * ((b - x) / 2.0 * tb.weights[q]);
        }
        let l = (-mu * (x - a)).exp() * sw.left_at[p] + pl;
        let r = (-mu * (b - x)).exp() * sw.right_at[p + 1] + pr;
        (l, r)
    }

    /// Value and derivative of `R(μ², G)u` from the kernel integrals at `x`.
    fn combine(&self, sw: &Sweep, x: f64, (l, r): (C64, C64)) -> (C64, C64) {
        let c = sw.right_at[0];
        let e = (-self.mu * x).exp() * c;
        ((l + r + e) / (2.0 * self.mu), (r - l - e) / 2.0)
    }

    /// Value and derivative at every panel node.
    fn apply(&self, u: &PanelFunction) -> (PanelFunction, PanelFunction) {
        let sw = self.sweep(u);
        let lr = self.at_nodes(&sw);
        let mut v = Vec::with_capacity(lr.len());
        let mut dv = Vec::with_capacity(lr.len());
        for p in 0..self.panels() {
            for k in 0..NQ {
                let (val, der) = self.combine(&sw, self.node(p, k), lr[p * NQ + k]);
                v.push(val);
                dv.push(der);
            }
        }
        let lambda = self.mu * self.mu;
        (
            PanelFunction {
                values: v,
                limit: u.limit / lambda,
            },
            PanelFunction {
                values: dv,
                limit: C64::new(0.0, 0.0),
            },
        )
    }

    fn evaluate(&self, u: &PanelFunction, xs: &[f64]) -> (Vec<C64>, Vec<C64>) {
        let sw = self.sweep(u);
        xs.iter()
            .map(|&x| self.combine(&sw, x, self.at_point(&sw, x)))
            .unzip()
    }
}

fn check_points(x: &[f64]) -> Result<()> {
    if x.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput(
            "evaluation points must be finite and nonnegative".into(),
        ));
    }
    Ok(())
}

/// `R(λ, G)u` at the points `x`.
pub fn base_resolvent(sp: &SectorPoint, u: &HalflineFunction, x: &[f64]) -> Result<Vec<C64>> {
    Ok(base_resolvent_with_derivative(sp, u, x)?.0)
}

/// `R(λ, G)u` and its derivative (from the differentiated kernel) at `x`.
pub fn base_resolvent_with_derivative(
    sp: &SectorPoint,
    u: &HalflineFunction,
    x: &[f64],
) -> Result<(Vec<C64>, Vec<C64>)> {
    u.check()?;
    check_points(x)?;
    let (features, rate) = u.features();
    let solver = KernelSolver::new(sp.mu(), &features, rate);
    let pf = solver.sample(u);
    Ok(solver.evaluate(&pf, x))
}

/// `R(λ, G^{γ,0})u = γ⁻¹ R(λ/γ, G)u` at `x`.
pub fn scaled_resolvent(
    sp: &SectorPoint,
    gamma: f64,
    u: &HalflineFunction,
    x: &[f64],
) -> Result<Vec<C64>> {
    HalflineProblem::new(gamma, 0.0)?;
    let inner = sp.divided(gamma)?;
    let values = base_resolvent(&inner, u, x)?;
    Ok(values.into_iter().map(|v| v / gamma).collect())
}

/// Output of [`drift_resolvent`].
#[derive(Clone, Debug)]
pub struct DriftSolution {
    pub values: Vec<C64>,
    pub derivative: Vec<C64>,
    /// Number of series terms summed (the `n = 0` term counts).
    pub terms: usize,
    /// Bound on the neglected part of `Σ wₙ`, relative to `‖u‖∞`.
    pub tail: f64,
    /// `b/(√(γ|λ|) cos(θ/2))`.
    pub contraction: f64,
    /// Sampled `‖wₙ‖∞` of the series terms `w₀ = u`, `wₙ₊₁ = b (R wₙ)′`.
    pub term_norms: Vec<f64>,
}

/// `R(λ, G^{γ,b})u` at `x` through the drift series.
pub fn drift_resolvent(
    sp: &SectorPoint,
    hp: &HalflineProblem,
    u: &HalflineFunction,
    x: &[f64],
    nmax: usize,
) -> Result<DriftSolution> {
    u.check()?;
    check_points(x)?;
    HalflineProblem::new(hp.gamma, hp.b)?;
    let threshold = hp.threshold();
    if sp.theta().abs() >= FRAC_PI_2 || !(sp.magnitude() > threshold) {
        return Err(Error::BelowThreshold {
            magnitude: sp.magnitude(),
            required: threshold,
        });
    }
    let q = hp.contraction_bound(sp);
    let inner = sp.divided(hp.gamma)?;
    let (features, rate) = u.features();
    let solver = KernelSolver::new(inner.mu(), &features, rate);
    let w0 = solver.sample(u);
    let unorm = w0.sup_norm();
    let mut sum = w0.clone();
    let mut term_norms = vec![unorm];
    let mut current = w0;
    let mut terms = 1;
    let mut tail = if hp.b == 0.0 { 0.0 } else { f64::INFINITY };
    let scale = if unorm > 0.0 { unorm } else { 1.0 };
    while tail > SERIES_TOL {
        if terms >= nmax {
            return Err(Error::ConvergenceFailure { terms, tail });
        }
        let (_, dv) = solver.apply(&current);
        let next = PanelFunction {
            values: dv.values.iter().map(|d| d * (hp.b / hp.gamma)).collect(),
            limit: C64::new(0.0, 0.0),
        };
        let norm = next.sup_norm();
        term_norms.push(norm);
        for (s, w) in sum.values.iter_mut().zip(&next.values) {
            *s += w;
        }
        terms += 1;
        tail = norm * q / (1.0 - q) / scale;
        current = next;
    }
    let (values, derivative) = solver.evaluate(&sum, x);
    Ok(DriftSolution {
        values: values.into_iter().map(|v| v / hp.gamma).collect(),
        derivative: derivative.into_iter().map(|v| v / hp.gamma).collect(),
        terms,
        tail,
        contraction: q,
        term_norms,
    })
}

/// Parameters of [`oracle_norm_sweep`].
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSweep {
    pub thetas: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub drifts: Vec<f64>,
    pub gammas: Vec<f64>,
    pub nprobe: usize,
    pub seed: u64,
}

/// Random `±1` steps on the scale `1/Re μ`, preceded by the constant probe.
fn step_probes(mu: C64, count: usize, rng: &mut ChaCha8Rng) -> Vec<HalflineFunction> {
    let mut probes = vec![HalflineFunction::Constant(1.0)];
    let scale = 4.0 / mu.re;
    for _ in 1..count {
        let k = rng.gen_range(1..=8);
        let mut edges: Vec<f64> = (0..k).map(|_| rng.gen_range(0.02..1.0) * scale).collect();
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let values = (0..=edges.len())
            .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        probes.push(HalflineFunction::Steps { edges, values });
    }
    probes
}

/// Sampling points on which sup-norms of resolvent images are taken.
fn sample_points(mu: C64) -> Vec<f64> {
    let span = 30.0 / mu.re;
    let mut xs: Vec<f64> = (0..=600).map(|k| span * (k as f64 / 600.0).powi(2)).collect();
    xs.dedup();
    xs
}

/// Sweeps the half-line bounds over `θ × |λ| × b × γ`. Each point records the
/// largest probe ratio `‖Ru‖/‖u‖` (or of the derivative) against the proven
/// bound. Points with `b > 0` are taken only where the series is admissible
/// (`|θ| < π/2`, `|λ| > 8b²/γ`). Labels: `resolvent` and `derivative` for
/// `b = 0, γ = 1`, the `-scaled` variants for `b = 0, γ ≠ 1`, and
/// `drift-resolvent`, `drift-derivative` for the series.
pub fn oracle_norm_sweep(cfg: &OracleSweep) -> Result<EstimateReport> {
    use rayon::prelude::*;
    let mut tasks = Vec::new();
    for &gamma in &cfg.gammas {
        for &b in &cfg.drifts {
            for &theta in &cfg.thetas {
                for &mag in &cfg.magnitudes {
                    tasks.push((gamma, b, theta, mag));
                }
            }
        }
    }
    let rows: Vec<Result<Vec<ReportPoint>>> = tasks
        .par_iter()
        .enumerate()
        .map(|(idx, &(gamma, b, theta, mag))| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (idx as u64).wrapping_mul(0x9E37_79B9));
            sweep_point(gamma, b, theta, mag, cfg.nprobe.max(1), &mut rng)
        })
        .collect();
    let mut report = EstimateReport::new("halfline", 1.0 + QUADRATURE_SLACK, cfg.seed);
    report.add_axis("theta", cfg.thetas.clone());
    report.add_axis("mag", cfg.magnitudes.clone());
    report.add_axis("b", cfg.drifts.clone());
    report.add_axis("gamma", cfg.gammas.clone());
    for r in rows {
        for p in r? {
            report.push(p);
        }
    }
    Ok(report)
}

fn sweep_point(
    gamma: f64,
    b: f64,
    theta: f64,
    mag: f64,
    nprobe: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<ReportPoint>> {
    let sp = SectorPoint::polar(mag, theta)?;
    let hp = HalflineProblem::new(gamma, b)?;
    let cos = (theta / 2.0).cos();
    let params = vec![
        ("theta".to_string(), theta),
        ("mag".to_string(), mag),
        ("b".to_string(), b),
        ("gamma".to_string(), gamma),
    ];
    let inner = sp.divided(gamma)?;
    let probes = step_probes(inner.mu(), nprobe, rng);
    let xs = sample_points(inner.mu());
    let mut out = Vec::new();
    if b == 0.0 {
        let (mut mv, mut md) = (0.0f64, 0.0f64);
        for u in &probes {
            let (v, dv) = base_resolvent_with_derivative(&inner, u, &xs)?;
            let n = u.sup_norm();
            mv = mv.max(sup(&v) / gamma / n);
            md = md.max(sup(&dv) / gamma / n);
        }
        let unit = gamma == 1.0;
        out.push(ReportPoint::new(
            if unit { "resolvent" } else { "resolvent-scaled" },
            params.clone(),
            mv,
            3.0 / (2.0 * mag * cos),
        ));
        out.push(ReportPoint::new(
            if unit { "derivative" } else { "derivative-scaled" },
            params.clone(),
            md,
            1.0 / ((gamma * mag).sqrt() * cos),
        ));
    }
    if theta.abs() < FRAC_PI_2 && mag > hp.threshold() {
        let (mut mv, mut md) = (0.0f64, 0.0f64);
        for u in &probes {
            let sol = drift_resolvent(&sp, &hp, u, &xs, 200)?;
            let n = u.sup_norm();
            mv = mv.max(sup(&sol.values) / n);
            md = md.max(sup(&sol.derivative) / n);
        }
        out.push(ReportPoint::new("drift-resolvent", params.clone(), mv, 3.0 / (mag * cos)));
        out.push(ReportPoint::new(
            "drift-derivative",
            params,
            md,
            2.0 / ((gamma * mag).sqrt() * cos),
        ));
    }
    Ok(out)
}

fn sup(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}
