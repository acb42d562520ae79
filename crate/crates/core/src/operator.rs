//! Fourier-collocation discretization of the transfer operator.
//!
//! A grid function is identified with its balanced trigonometric
//! interpolant (Nyquist mode split symmetrically). The transfer matrix row
//! for node `x_k` is the functional `g ↦ Σ_j e^{φ(y_j)} I_g(y_j)` over the
//! preimages `y_j` of `x_k`, written in the cardinal basis.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::dynamics::{wrap, Branch, CircleDynamics, Observable, TrigPoly};
use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 128;
pub const MAX_NODES: usize = 1024;

/// Equispaced nodes `x_k = k/N` on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
}

impl Grid {
    /// `N` must be even with `8 ≤ N ≤ 1024`.
    pub fn new(n: usize) -> Result<Self> {
        if !n.is_multiple_of(2) || !(8..=MAX_NODES).contains(&n) {
            return Err(Error::InvalidGrid(format!("node count {n} must be even and within 8..={MAX_NODES}")));
        }
        Ok(Grid { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, k: usize) -> f64 {
        k as f64 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|k| self.node(k))
    }

    /// Normalized cardinal weights `w_l(x)`, so that `I_g(x) = Σ_l w_l g_l`.
    ///
    /// Uses the barycentric form for even `N`:
    /// `w_l ∝ (−1)^l cot(π(x − x_l))`.
    pub fn cardinal_weights(&self, x: f64, out: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(out.len(), n);
        let x = wrap(x);
        let s = x * n as f64;
        let nearest = s.round();
        if (s - nearest).abs() < 1e-13 {
            out.fill(0.0);
            out[nearest as usize % n] = 1.0;
            return;
        }
        let mut total = 0.0;
        for (l, w) in out.iter_mut().enumerate() {
            let c = 1.0 / (PI * (x - self.node(l))).tan();
            *w = if l % 2 == 0 { c } else { -c };
            total += *w;
        }
        for w in out.iter_mut() {
            *w /= total;
        }
    }

    /// Spectral differentiation matrix, row-major.
    pub fn differentiation_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for k in 0..n {
            for l in 0..n {
                if k != l {
                    let diff = k as isize - l as isize;
                    let sign = if diff.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    d[k * n + l] = PI * sign / (PI * diff as f64 / n as f64).tan();
                }
            }
        }
        d
    }
}

/// Node values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        GridFunction { grid, values: grid.nodes().map(f).collect() }
    }

    pub fn sample<O: Observable + ?Sized>(grid: Grid, obs: &O) -> Self {
        GridFunction::from_fn(grid, |x| obs.value(x))
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        GridFunction { grid, values: vec![c; grid.len()] }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.check_grid(other.grid)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    fn check_grid(&self, grid: Grid) -> Result<()> {
        if grid != self.grid {
            return Err(Error::DimensionMismatch { expected: self.grid.len(), found: grid.len() });
        }
        Ok(())
    }

    /// Value of the trigonometric interpolant at `x`.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.grid.len();
        let x = wrap(x);
        let s = x * n as f64;
        let nearest = s.round();
        if (s - nearest).abs() < 1e-13 {
            return self.values[nearest as usize % n];
        }
        let (mut num, mut den) = (0.0, 0.0);
        for (l, &v) in self.values.iter().enumerate() {
            let c = 1.0 / (PI * (x - self.grid.node(l))).tan();
            let c = if l % 2 == 0 { c } else { -c };
            num += c * v;
            den += c;
        }
        num / den
    }

    /// Node values of the interpolant's derivative.
    pub fn differentiate(&self) -> GridFunction {
        let n = self.grid.len();
        let d = self.grid.differentiation_matrix();
        let values = (0..n).map(|k| d[k * n..(k + 1) * n].iter().zip(&self.values).map(|(a, b)| a * b).sum()).collect();
        GridFunction { grid: self.grid, values }
    }

    /// Fourier coefficients of the interpolant, with negligible trailing
    /// modes dropped. Cheaper to evaluate off-grid than the barycentric form.
    pub fn to_trig_poly(&self) -> TrigPoly {
        let n = self.grid.len();
        let half = n / 2;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mean = self.values.iter().sum::<f64>() / n as f64;
        let mut cos = vec![0.0; half];
        let mut sin = vec![0.0; half];
        for k in 1..=half {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, &v) in self.values.iter().enumerate() {
                let (s, c) = (2.0 * PI * ((k * j) % n) as f64 / n as f64).sin_cos();
                a += v * c;
                b += v * s;
            }
            let w = if k == half { 1.0 } else { 2.0 } / n as f64;
            cos[k - 1] = a * w;
            sin[k - 1] = if k == half { 0.0 } else { b * w };
        }
        let keep = (0..half).rev().find(|&i| cos[i].abs() + sin[i].abs() > 1e-13 * scale).map_or(0, |i| i + 1);
        cos.truncate(keep);
        sin.truncate(keep);
        TrigPoly::new(mean, cos, sin)
    }
}

/// Trigonometric interpolation at `x`.
pub fn trig_interpolate(gf: &GridFunction, x: f64) -> f64 {
    gf.interpolate(x)
}

/// Derivative of the interpolant at the nodes.
pub fn trig_differentiate(gf: &GridFunction) -> GridFunction {
    gf.differentiate()
}

/// Dense collocation matrix of `L_{f,φ}`.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    grid: Grid,
    entries: Vec<f64>,
    pub map_label: String,
    pub potential_label: String,
}

/// Assembles `M[k][l] = Σ_j e^{φ(y_{j,k})} w_l(y_{j,k})`.
pub fn assemble_transfer<M, P>(map: &M, potential: &P, grid: Grid) -> Result<TransferMatrix>
where
    M: CircleDynamics + ?Sized,
    P: Observable + ?Sized,
{
    let n = grid.len();
    let mut entries = vec![0.0; n * n];
    entries.par_chunks_mut(n).enumerate().try_for_each_init(
        || (Vec::<Branch>::new(), vec![0.0; n]),
        |(branches, weights), (k, row)| -> Result<()> {
            map.inverse_branches_into(grid.node(k), branches)?;
            for b in branches.iter() {
                let factor = potential.value(b.point).exp();
                grid.cardinal_weights(b.point, weights);
                for (r, w) in row.iter_mut().zip(weights.iter()) {
                    *r += factor * w;
                }
            }
            Ok(())
        },
    )?;
    if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite transfer matrix entry {bad}")));
    }
    Ok(TransferMatrix { grid, entries, map_label: map.label(), potential_label: format!("{potential:?}") })
}

impl TransferMatrix {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.entries[k * self.grid.len() + l]
    }

    pub fn apply_slice(&self, v: &[f64], out: &mut [f64]) {
        let n = self.grid.len();
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.entries[k * n..(k + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    /// `out = Mᵀ v`.
    pub fn apply_transpose_slice(&self, v: &[f64], out: &mut [f64]) {
        let n = self.grid.len();
        out.fill(0.0);
        for (k, &vk) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(&self.entries[k * n..(k + 1) * n]) {
                *o += vk * a;
            }
        }
    }

    pub fn apply(&self, gf: &GridFunction) -> Result<GridFunction> {
        gf.check_grid(self.grid)?;
        let mut out = vec![0.0; self.grid.len()];
        self.apply_slice(gf.values(), &mut out);
        Ok(GridFunction { grid: self.grid, values: out })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let n = self.grid.len();
        self.entries.chunks(n).map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        self.apply_transpose_slice(&vec![1.0; self.grid.len()], &mut out);
        out
    }

    /// Row-major CSV dump (debugging aid).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for row in self.entries.chunks(self.grid.len()) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// `apply_transfer` with the operation name used elsewhere in the docs.
pub fn apply_transfer(tm: &TransferMatrix, gf: &GridFunction) -> Result<GridFunction> {
    tm.apply(gf)
}
