use degensemi_core::coefficients::{CoefficientField, CoefficientSpec, DriftField};
use degensemi_core::grid::{Grid1D, TensorGrid};
use degensemi_core::tensor::{kronecker_from_field, tensor_semigroup};

use crate::config::{Datum, RunConfig};
use crate::output::{num, Sink};
use crate::plot;
use crate::CliError;

/// Trapezoidal weights of one axis.
fn trapezoid(axis: &Grid1D) -> Vec<f64> {
    let x = axis.nodes();
    let n = x.len();
    (0..n)
        .map(|j| {
            let left = if j > 0 { x[j] - x[j - 1] } else { 0.0 };
            let right = if j + 1 < n { x[j + 1] - x[j] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Integral and first moments of `u` over the grid.
pub fn moments(u: &[f64], grid: &TensorGrid) -> (f64, Vec<f64>) {
    let w: Vec<Vec<f64>> = grid.axes().iter().map(trapezoid).collect();
    let d = grid.dim();
    let (mut mass, mut first) = (0.0, vec![0.0; d]);
    for (k, &v) in u.iter().enumerate() {
        let m = grid.multi(k);
        let weight: f64 = (0..d).map(|i| w[i][m[i]]).product();
        mass += weight * v;
        let x = grid.point(k);
        for i in 0..d {
            first[i] += weight * v * x[i];
        }
    }
    (mass, first.into_iter().map(|f| f / mass).collect())
}

pub struct Snapshot {
    pub t: f64,
    pub values: Vec<f64>,
}

/// Evolves `datum` under the constant-drift Kronecker operator of `cfg`.
pub fn evolve(cfg: &RunConfig, times: &[f64], datum: &Datum) -> Result<(TensorGrid, Vec<Snapshot>), CliError> {
    let p = &cfg.problem;
    let n = if p.d == 1 { cfg.discretization.n } else { cfg.discretization.n_tensor };
    let axis = Grid1D::graded(p.m, n, cfg.discretization.grading)?;
    let grid = TensorGrid::new(vec![axis; p.d])?;
    let spec = CoefficientSpec::simple(p.d, p.m, p.gamma, DriftField::Constant { values: vec![p.drift; p.d] });
    let a = kronecker_from_field(&CoefficientField::new(spec)?, &grid)?;
    let u0 = grid.sample(|x| datum.eval(x, p.m));
    let snaps = times
        .iter()
        .map(|&t| {
            Ok(Snapshot {
                t,
                values: tensor_semigroup(&a, t, &u0)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok((grid, snaps))
}

pub fn run(cfg: &RunConfig, times: &[f64], plots: bool, sink: &Sink) -> Result<(), CliError> {
    let (grid, snaps) = evolve(cfg, times, &cfg.evolve.datum)?;
    let d = grid.dim();
    let mut columns: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    columns.push("u".into());
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();

    let mut summary = Vec::new();
    for (k, snap) in snaps.iter().enumerate() {
        let rows: Vec<Vec<String>> = snap
            .values
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let mut row: Vec<String> = grid.point(j).into_iter().map(num).collect();
                row.push(num(v));
                row
            })
            .collect();
        let stem = format!("snapshot_{k:03}");
        sink.csv(&format!("{stem}.csv"), &[format!("t = {}", num(snap.t))], &columns, &rows)?;
        if plots {
            let title = format!("t = {}", num(snap.t));
            let svg = if d == 1 {
                plot::line(grid.axis(0).nodes(), &snap.values, &title)
            } else if d == 2 {
                plot::heatmap(&grid, &snap.values, &title)
            } else {
                continue;
            };
            sink.raw(&format!("{stem}.svg"), &svg)?;
        }
        let (mass, center) = moments(&snap.values, &grid);
        let min = snap.values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = snap.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut row = vec![num(snap.t), num(min), num(max), num(mass)];
        row.extend(center.into_iter().map(num));
        summary.push(row);
    }
    let mut columns: Vec<String> = ["t", "min", "max", "mass"].map(String::from).to_vec();
    columns.extend((1..=d).map(|i| format!("center{i}")));
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    sink.csv("evolve_summary.csv", &[], &columns, &summary)?;
    println!("wrote {} snapshots to {}", snaps.len(), sink.dir().display());
    Ok(())
}
