//! Test functions on tensor grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::TensorGrid;
use crate::linalg::{real_parts, sup_norm, to_complex, ShiftedLu, C64};
use crate::operator1d::Generator;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestKind {
    Polynomial,
    Cosine,
    ResolventImage,
    RandomSmooth,
    /// Random `±1` on blocks of nodes, for extremal sign patterns.
    SignSteps,
}

/// Grid values of a test function with the boundary conditions it meets.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub kind: TestKind,
    pub values: Vec<f64>,
    /// Upper bound on `|∂ᵢu|` at the faces `xᵢ = M`, largest over axes.
    pub neumann_defect: f64,
}

impl TestFunction {
    /// Whether the flagged boundary conditions hold to `1e−8`.
    pub fn compatible(&self) -> bool {
        self.neumann_defect <= 1e-8
    }
}

/// `Σ cₖ Πᵢ cos(kᵢπxᵢ/M)` with random integer frequencies: satisfies
/// `∂ᵢu = 0` on every face `xᵢ = 0` and `xᵢ = M` exactly.
pub fn cosine(grid: &TensorGrid, modes: usize, max_freq: u32, rng: &mut ChaCha8Rng) -> TestFunction {
    let d = grid.dim();
    let m = grid.axis(0).edge();
    let terms: Vec<(f64, Vec<f64>)> = (0..modes)
        .map(|_| {
            let c = rng.gen_range(-1.0..1.0);
            let k = (0..d).map(|_| rng.gen_range(0..=max_freq) as f64).collect();
            (c, k)
        })
        .collect();
    let values = grid.sample(|x| {
        terms
            .iter()
            .map(|(c, k)| {
                c * k
                    .iter()
                    .zip(x)
                    .map(|(ki, xi)| (std::f64::consts::PI * ki * xi / m).cos())
                    .product::<f64>()
            })
            .sum()
    });
    TestFunction {
        kind: TestKind::Cosine,
        values: normalized(values),
        neumann_defect: 0.0,
    }
}

/// A random smooth function without boundary constraints.
pub fn random_smooth(grid: &TensorGrid, rng: &mut ChaCha8Rng) -> TestFunction {
    let d = grid.dim();
    let m = grid.axis(0).edge();
    let terms: Vec<(f64, Vec<f64>, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                (0..d).map(|_| rng.gen_range(0.0..4.0)).collect(),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let values = grid.sample(|x| {
        terms
            .iter()
            .map(|(a, k, ph)| {
                let arg: f64 = k.iter().zip(x).map(|(ki, xi)| ki * xi / m).sum();
                a * (std::f64::consts::PI * arg + ph).sin()
            })
            .sum()
    });
    let neumann_defect = (0..d)
        .map(|i| {
            terms
                .iter()
                .map(|(a, k, _)| (a * k[i] * std::f64::consts::PI / m).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    TestFunction {
        kind: TestKind::RandomSmooth,
        values: normalized(values),
        neumann_defect,
    }
}

/// `(xᵢ − M/2)²` summed over axes.
pub fn centered_quadratic(grid: &TensorGrid) -> TestFunction {
    let m = grid.axis(0).edge();
    TestFunction {
        kind: TestKind::Polynomial,
        values: grid.sample(|x| x.iter().map(|xi| (xi - 0.5 * m).powi(2)).sum()),
        neumann_defect: m,
    }
}

/// Random `±1` on `blocks` contiguous pieces of the flat index range.
pub fn sign_steps(grid: &TensorGrid, blocks: usize, rng: &mut ChaCha8Rng) -> TestFunction {
    let n = grid.len();
    let blocks = blocks.clamp(1, n);
    let signs: Vec<f64> = (0..blocks)
        .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    TestFunction {
        kind: TestKind::SignSteps,
        values: (0..n).map(|k| signs[k * blocks / n]).collect(),
        neumann_defect: f64::INFINITY,
    }
}

/// `R(λ₀, A)g`, a member of the discrete domain.
pub fn resolvent_image(lu: &ShiftedLu, g: &[f64]) -> Result<TestFunction> {
    let u = real_parts(&lu.solve(&to_complex(g))?);
    Ok(TestFunction {
        kind: TestKind::ResolventImage,
        values: u,
        neumann_defect: 0.0,
    })
}

/// Mixed probe family: cosines, random smooth data and sign steps.
pub fn probe_family(grid: &TensorGrid, count: usize, seed: u64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| match k % 3 {
            0 => cosine(grid, 3, 6, &mut rng),
            1 => random_smooth(grid, &mut rng),
            _ => {
                let blocks = rng.gen_range(2..=12);
                sign_steps(grid, blocks, &mut rng)
            }
        })
        .collect()
}

/// Continuous probes only: cosines alternating with random smooth data.
pub fn smooth_family(grid: &TensorGrid, count: usize, seed: u64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            if k % 2 == 0 {
                cosine(grid, 3, 6, &mut rng)
            } else {
                random_smooth(grid, &mut rng)
            }
        })
        .collect()
}

/// Resolvent images `R(λ₀, A)g` of a mixed family `g`.
pub fn resolvent_images<G: Generator + ?Sized>(
    a: &G,
    grid: &TensorGrid,
    lambda0: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<TestFunction>> {
    let lu = ShiftedLu::new(a.matrix(), C64::new(lambda0, 0.0))?;
    probe_family(grid, count, seed)
        .iter()
        .map(|g| resolvent_image(&lu, &g.values))
        .collect()
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let n = sup_norm(&v);
    if n == 0.0 {
        vec![1.0; v.len()]
    } else {
        v.into_iter().map(|x| x / n).collect()
    }
}
