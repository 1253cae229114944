//! Coefficient data `Γ`, `γᵢ`, `bᵢ` of the operators
//! `Γ(x) Σᵢ [γᵢ(xᵢ) w(xᵢ) ∂²ᵢ + bᵢ(x) ∂ᵢ]` on `[0, M]^d`, where the weight `w`
//! is either `x` or `x(1 − x)`, together with sampling-based checks of the
//! standing hypotheses.
//!
//! Coefficients are opaque to the solvers: they are evaluated pointwise and
//! every hypothesis is checked on sampling lattices, never symbolically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the sign checks on boundary faces.
pub const TOL_HYP: f64 = 1e-12;

/// Points per axis of the lattice used to derive `γ₀`, `Γ₀` and `max |bᵢ|`.
const VALIDATION_POINTS: usize = 17;

/// Points per transverse axis used by [`validate_drift_modulus`].
const TRANSVERSE_POINTS: usize = 9;

/// A scalar function on an interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { value: f64 },
    /// `Σₖ coeffs[k] xᵏ`.
    Polynomial { coeffs: Vec<f64> },
    /// `Σ a · x^p` for `[a, p]` pairs; covers `√x` and `x^{1/4}` type terms.
    PowerSum { terms: Vec<[f64; 2]> },
    /// `scale · (x(1 − x))^power`, intended for `[0, 1]`.
    Bridge { scale: f64, power: f64 },
    /// Piecewise linear through `(xs, ys)`, constant beyond the ends.
    Tabulated { xs: Vec<f64>, ys: Vec<f64> },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            Profile::PowerSum { terms } => terms
                .iter()
                .map(|[a, p]| if *p == 0.0 { *a } else { a * x.max(0.0).powf(*p) })
                .sum(),
            Profile::Bridge { scale, power } => scale * (x * (1.0 - x)).max(0.0).powf(*power),
            Profile::Tabulated { xs, ys } => interpolate(xs, ys, x),
        }
    }

    fn check(&self) -> Result<()> {
        if let Profile::Tabulated { xs, ys } = self {
            if xs.len() != ys.len() || xs.is_empty() {
                return Err(Error::InvalidInput(
                    "tabulated profile needs equally many xs and ys".into(),
                ));
            }
            if xs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(
                    "tabulated profile abscissae must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let k = xs.partition_point(|&t| t <= x) - 1;
    let s = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + s * (ys[k + 1] - ys[k])
}

/// `coef · Π xᵢ^{powers[i]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

fn eval_poly(terms: &[Monomial], x: &[f64]) -> f64 {
    terms
        .iter()
        .map(|m| {
            m.powers
                .iter()
                .zip(x)
                .fold(m.coef, |acc, (&p, &xi)| acc * xi.powi(p as i32))
        })
        .sum()
}

/// The scalar factor `Γ` on `Q^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarField {
    Constant { value: f64 },
    Polynomial { terms: Vec<Monomial> },
    /// `Π fᵢ(xᵢ)`.
    Product { factors: Vec<Profile> },
}

impl ScalarField {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::Constant { value } => *value,
            ScalarField::Polynomial { terms } => eval_poly(terms, x),
            ScalarField::Product { factors } => {
                factors.iter().zip(x).map(|(f, &xi)| f.eval(xi)).product()
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, ScalarField::Constant { .. })
    }
}

/// The drift vector field `b = (b₁, …, b_d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriftField {
    Constant { values: Vec<f64> },
    /// `bᵢ(x) = pᵢ(xᵢ)`.
    Axial { components: Vec<Profile> },
    /// One multivariate polynomial per component.
    Polynomial { components: Vec<Vec<Monomial>> },
    /// `bᵢ(x) = cᵢ(xᵢ) · Π_{j≠i} mᵢ(x_j)`.
    Separated { c: Vec<Profile>, m: Vec<Profile> },
    /// `bᵢ(x) = cᵢ(xᵢ) − (Σⱼ cⱼ(xⱼ)) xᵢ(1 − xᵢ)`, the selection-type drift of
    /// Wright–Fisher models.
    Selection { c: Vec<Profile> },
}

impl DriftField {
    pub fn zero(d: usize) -> Self {
        DriftField::Constant {
            values: vec![0.0; d],
        }
    }

    fn components(&self) -> usize {
        match self {
            DriftField::Constant { values } => values.len(),
            DriftField::Axial { components } => components.len(),
            DriftField::Polynomial { components } => components.len(),
            DriftField::Separated { c, m } => c.len().min(m.len()),
            DriftField::Selection { c } => c.len(),
        }
    }

    pub fn component(&self, i: usize, x: &[f64]) -> f64 {
        match self {
            DriftField::Constant { values } => values[i],
            DriftField::Axial { components } => components[i].eval(x[i]),
            DriftField::Polynomial { components } => eval_poly(&components[i], x),
            DriftField::Separated { c, m } => {
                let transverse: f64 = x
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &xj)| m[i].eval(xj))
                    .product();
                c[i].eval(x[i]) * transverse
            }
            DriftField::Selection { c } => {
                let total: f64 = c.iter().zip(x).map(|(ci, &xj)| ci.eval(xj)).sum();
                c[i].eval(x[i]) - total * x[i] * (1.0 - x[i])
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, DriftField::Constant { .. })
    }
}

/// Which degenerate weight multiplies the second derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// `xᵢ`: degenerate at `xᵢ = 0`, Neumann at `xᵢ = M`.
    #[default]
    Linear,
    /// `xᵢ(1 − xᵢ)` on `[0, 1]`: degenerate at both faces.
    Quadratic,
}

/// Serializable description of a problem, before validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpec {
    pub d: usize,
    pub m: f64,
    #[serde(default)]
    pub weight: Weight,
    pub gamma_cap: ScalarField,
    pub gamma: Vec<Profile>,
    pub drift: DriftField,
    /// Declared bound `B ≥ maxᵢ ‖bᵢ‖∞`; measured when absent.
    #[serde(default)]
    pub bound: Option<f64>,
    /// Width of the boundary layer in the drift modulus check; `M/4` when
    /// absent.
    #[serde(default)]
    pub delta: Option<f64>,
}

impl CoefficientSpec {
    /// `Γ ≡ 1`, constant `γᵢ`, given drift.
    pub fn simple(d: usize, m: f64, gamma: f64, drift: DriftField) -> Self {
        Self {
            d,
            m,
            weight: Weight::Linear,
            gamma_cap: ScalarField::Constant { value: 1.0 },
            gamma: vec![Profile::constant(gamma); d],
            drift,
            bound: None,
            delta: None,
        }
    }
}

/// Validated coefficient data with the derived constants `γ₀`, `Γ₀`, `B`, `δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    spec: CoefficientSpec,
    gamma0: f64,
    gamma_cap0: f64,
    gamma_cap_max: f64,
    bound: f64,
    delta: f64,
}

impl CoefficientField {
    pub fn new(spec: CoefficientSpec) -> Result<Self> {
        let d = spec.d;
        if d == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if !(spec.m > 0.0 && spec.m.is_finite()) {
            return Err(Error::InvalidInput("cube edge M must be positive".into()));
        }
        if spec.weight == Weight::Quadratic && (spec.m - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "the x(1-x) weight requires M = 1".into(),
            ));
        }
        if spec.gamma.len() != d {
            return Err(Error::InvalidInput(format!(
                "expected {d} gamma profiles, got {}",
                spec.gamma.len()
            )));
        }
        if spec.drift.components() != d {
            return Err(Error::InvalidInput(format!(
                "expected {d} drift components, got {}",
                spec.drift.components()
            )));
        }
        for p in &spec.gamma {
            p.check()?;
        }
        match &spec.gamma_cap {
            ScalarField::Product { factors } => {
                if factors.len() != d {
                    return Err(Error::InvalidInput(format!(
                        "expected {d} Gamma factors, got {}",
                        factors.len()
                    )));
                }
                for f in factors {
                    f.check()?;
                }
            }
            ScalarField::Polynomial { terms } => {
                if terms.iter().any(|t| t.powers.len() != d) {
                    return Err(Error::InvalidInput(
                        "Gamma monomials need one power per axis".into(),
                    ));
                }
            }
            ScalarField::Constant { .. } => {}
        }
        let m = spec.m;
        let delta = spec.delta.unwrap_or(m / 4.0);
        if !(delta > 0.0 && delta < m) {
            return Err(Error::InvalidInput(format!("delta = {delta} not in (0, M)")));
        }

        let per_axis = lattice_size(d);
        let axis: Vec<f64> = (0..per_axis)
            .map(|k| m * k as f64 / (per_axis - 1) as f64)
            .collect();
        let mut gamma0 = f64::INFINITY;
        for g in &spec.gamma {
            for &x in &axis {
                gamma0 = gamma0.min(g.eval(x));
            }
        }
        let mut gamma_cap0 = f64::INFINITY;
        let mut gamma_cap_max: f64 = 0.0;
        let mut drift_max: f64 = 0.0;
        for_each_lattice_point(d, &axis, |x| {
            let g = spec.gamma_cap.eval(x);
            gamma_cap0 = gamma_cap0.min(g);
            gamma_cap_max = gamma_cap_max.max(g);
            for i in 0..d {
                drift_max = drift_max.max(spec.drift.component(i, x).abs());
            }
        });
        if !(gamma0 > 0.0) {
            return Err(Error::Hypothesis(format!(
                "gamma_i must be strictly positive (sampled minimum {gamma0})"
            )));
        }
        if !(gamma_cap0 > 0.0) {
            return Err(Error::Hypothesis(format!(
                "Gamma must be strictly positive (sampled minimum {gamma_cap0})"
            )));
        }
        if !drift_max.is_finite() {
            return Err(Error::InvalidInput("drift is not finite".into()));
        }
        let bound = match spec.bound {
            Some(b) if b + 1e-12 < drift_max => {
                return Err(Error::InvalidInput(format!(
                    "declared B = {b} is below the sampled max |b_i| = {drift_max}"
                )))
            }
            Some(b) => b,
            None => drift_max,
        };
        Ok(Self {
            spec,
            gamma0,
            gamma_cap0,
            gamma_cap_max,
            bound,
            delta,
        })
    }

    pub fn spec(&self) -> &CoefficientSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.d
    }

    pub fn edge(&self) -> f64 {
        self.spec.m
    }

    pub fn weight(&self) -> Weight {
        self.spec.weight
    }

    pub fn quadratic_weight(&self) -> bool {
        self.spec.weight == Weight::Quadratic
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn gamma_cap0(&self) -> f64 {
        self.gamma_cap0
    }

    pub fn gamma_cap_max(&self) -> f64 {
        self.gamma_cap_max
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gamma_cap(&self, x: &[f64]) -> f64 {
        self.spec.gamma_cap.eval(x)
    }

    pub fn gamma(&self, i: usize, xi: f64) -> f64 {
        self.spec.gamma[i].eval(xi)
    }

    pub fn drift(&self, i: usize, x: &[f64]) -> f64 {
        self.spec.drift.component(i, x)
    }

    pub fn drift_vector(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|i| self.drift(i, x)).collect()
    }

    pub fn has_constant_drift(&self) -> bool {
        self.spec.drift.is_constant()
    }

    pub fn has_constant_gamma_cap(&self) -> bool {
        self.spec.gamma_cap.is_constant()
    }

    /// Same data with `Γ ≡ 1`.
    pub fn without_gamma_cap(&self) -> Self {
        let mut spec = self.spec.clone();
        spec.gamma_cap = ScalarField::Constant { value: 1.0 };
        Self {
            spec,
            gamma_cap0: 1.0,
            gamma_cap_max: 1.0,
            ..self.clone()
        }
    }

    /// Same data with the drift replaced by the constant vector `values`.
    pub fn with_constant_drift(&self, values: Vec<f64>) -> Self {
        let mut spec = self.spec.clone();
        spec.drift = DriftField::Constant { values };
        Self {
            spec,
            ..self.clone()
        }
    }
}

fn lattice_size(d: usize) -> usize {
    let cap = (20_000f64).powf(1.0 / d as f64).floor() as usize;
    VALIDATION_POINTS.min(cap).max(2)
}

fn for_each_lattice_point(d: usize, axis: &[f64], mut f: impl FnMut(&[f64])) {
    let n = axis.len();
    let total = n.pow(d as u32);
    let mut x = vec![0.0; d];
    for flat in 0..total {
        let mut r = flat;
        for xi in x.iter_mut() {
            *xi = axis[r % n];
            r /= n;
        }
        f(&x);
    }
}

/// Outcome of a sampled hypothesis check.
#[derive(Clone, Debug, PartialEq)]
pub enum HypothesisVerdict {
    Pass,
    Fail {
        point: Vec<f64>,
        component: usize,
        value: f64,
    },
}

impl HypothesisVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, HypothesisVerdict::Pass)
    }
}

/// Checks `⟨b, ν⟩ ≥ 0` with `ν` the inward normal on the faces `xᵢ = 0` (and
/// `xᵢ = 1` for the quadratic weight), sampling each face on an
/// `ngrid^{d−1}` lattice. Returns the first violating point.
pub fn validate_inward_drift(cf: &CoefficientField, ngrid: usize) -> Result<HypothesisVerdict> {
    if ngrid < 2 {
        return Err(Error::InvalidInput("ngrid must be at least 2".into()));
    }
    let d = cf.dim();
    let m = cf.edge();
    let axis: Vec<f64> = (0..ngrid)
        .map(|k| m * k as f64 / (ngrid - 1) as f64)
        .collect();
    let faces: Vec<(f64, f64)> = if cf.quadratic_weight() {
        vec![(0.0, 1.0), (m, -1.0)]
    } else {
        vec![(0.0, 1.0)]
    };
    for i in 0..d {
        for &(face, normal) in &faces {
            let mut failure = None;
            for_each_lattice_point(d - 1, &axis, |t| {
                if failure.is_some() {
                    return;
                }
                let x = insert(t, i, face);
                let bi = cf.drift(i, &x);
                if normal * bi < -TOL_HYP {
                    failure = Some(HypothesisVerdict::Fail {
                        point: x,
                        component: i,
                        value: bi,
                    });
                }
            });
            if let Some(f) = failure {
                return Ok(f);
            }
        }
    }
    Ok(HypothesisVerdict::Pass)
}

fn insert(t: &[f64], i: usize, value: f64) -> Vec<f64> {
    let mut x = Vec::with_capacity(t.len() + 1);
    x.extend_from_slice(&t[..i]);
    x.push(value);
    x.extend_from_slice(&t[i..]);
    x
}

/// Measured drift modulus and its refinement check.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftModulus {
    /// `C_meas` on the `ngrid` lattice.
    pub measured: f64,
    /// `C_meas` after one refinement (`2·ngrid`).
    pub refined: f64,
    pub pass: bool,
}

/// Measures `max |bᵢ(x) − bᵢ(x|ₓᵢ₌₀)| / √xᵢ` over `0 < xᵢ ≤ δ` (and the mirrored
/// quantity at `xᵢ = 1` for the quadratic weight). The normal samples are the
/// lattice points `M·k/ngrid` inside the layer, so refining or shrinking `δ`
/// only ever adds or removes samples. Passes when the value is finite and
/// grows by at most a factor 1.1 under one refinement.
pub fn validate_drift_modulus(cf: &CoefficientField, ngrid: usize) -> Result<DriftModulus> {
    if ngrid < 4 {
        return Err(Error::InvalidInput("ngrid must be at least 4".into()));
    }
    let measured = drift_modulus_at(cf, ngrid, cf.delta());
    let refined = drift_modulus_at(cf, 2 * ngrid, cf.delta());
    let pass = measured.is_finite() && refined.is_finite() && refined <= 1.1 * measured;
    Ok(DriftModulus {
        measured,
        refined,
        pass,
    })
}

/// `C_meas` for an explicit lattice size and layer width.
pub fn drift_modulus_at(cf: &CoefficientField, ngrid: usize, delta: f64) -> f64 {
    let d = cf.dim();
    let m = cf.edge();
    let transverse: Vec<f64> = (0..TRANSVERSE_POINTS)
        .map(|k| m * k as f64 / (TRANSVERSE_POINTS - 1) as f64)
        .collect();
    let layer: Vec<f64> = (1..=ngrid)
        .map(|k| m * k as f64 / ngrid as f64)
        .filter(|&s| s <= delta * (1.0 + 1e-14))
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for_each_lattice_point(d - 1, &transverse, |t| {
            let at_zero = cf.drift(i, &insert(t, i, 0.0));
            let at_one = cf.drift(i, &insert(t, i, m));
            for &s in &layer {
                let near_zero = cf.drift(i, &insert(t, i, s));
                worst = worst.max((near_zero - at_zero).abs() / s.sqrt());
                if cf.quadratic_weight() {
                    let near_one = cf.drift(i, &insert(t, i, m - s));
                    worst = worst.max((near_one - at_one).abs() / s.sqrt());
                }
            }
        });
    }
    worst
}

/// The constant drift `(b₁(0), …, b_d(0))` at the degenerate vertex.
pub fn frozen_drift(cf: &CoefficientField) -> Vec<f64> {
    cf.drift_vector(&vec![0.0; cf.dim()])
}
