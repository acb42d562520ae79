use rayon::prelude::*;

use crate::dynamics::{wrap, CircleMap, Observable};
use crate::error::{Error, Result};

/// Largest number of periodic points we are willing to enumerate.
pub const MAX_PERIODIC_POINTS: u64 = 1_000_000;

const MAX_SWEEPS: usize = 40;

/// All solutions of `fⁿ(p) = p` on the circle.
#[derive(Debug, Clone)]
pub struct PeriodicOrbitSet {
    pub period: usize,
    pub points: Vec<f64>,
    /// Fixed-point residual `|p − F⁻ⁿ(p + m)|` of the final sweep.
    pub residuals: Vec<f64>,
}

struct Solved {
    point: f64,
    residual: f64,
    birkhoff: f64,
}

fn count_for(map: &CircleMap, n: usize) -> Result<u64> {
    let d = map.degree_u32() as u64;
    let count = d.checked_pow(n as u32).unwrap_or(u64::MAX);
    if n == 0 || count > MAX_PERIODIC_POINTS {
        return Err(Error::TooManyPoints { count, limit: MAX_PERIODIC_POINTS });
    }
    Ok(count)
}

/// Solves `Fⁿ(p) − p = m` for `p ∈ [0, 1)` as the fixed point of the
/// contraction `p ↦ F⁻ⁿ(p + m)` and accumulates `ψ` along the orbit, which
/// the backward sweep visits for free.
fn solve_one<O: Observable + ?Sized>(map: &CircleMap, n: usize, m: f64, guess: f64, psi: Option<&O>) -> Result<Solved> {
    let mut p = guess;
    let mut polished = false;
    for _ in 0..MAX_SWEEPS {
        let mut z = p + m;
        let mut birkhoff = 0.0;
        for _ in 0..n {
            z = map.lift_inverse(z)?;
            if let Some(psi) = psi {
                birkhoff += psi.value(wrap(z));
            }
        }
        let residual = (z - p).abs();
        p = z;
        if residual <= 1e-14 {
            // one extra sweep once converged
            if polished {
                return Ok(Solved { point: wrap(p), residual, birkhoff });
            }
            polished = true;
        }
    }
    Err(Error::NewtonDivergence { target: m, iterations: MAX_SWEEPS })
}

fn solve_all<O: Observable + ?Sized>(map: &CircleMap, n: usize, psi: Option<&O>) -> Result<Vec<Solved>> {
    let count = count_for(map, n)?;
    // Fⁿ(0) fixes the integer offsets: Fⁿ(p) − p sweeps [Fⁿ(0), Fⁿ(0) + dⁿ − 1).
    let start = (0..n).fold(0.0, |y, _| map.lift(y));
    let m0 = start.ceil();
    let slope = (count - 1) as f64;
    (0..count - 1)
        .into_par_iter()
        .map(|i| {
            let m = m0 + i as f64;
            let guess = ((m - start) / slope).clamp(0.0, 1.0);
            solve_one(map, n, m, guess, psi)
        })
        .collect()
}

/// All `dⁿ − 1` points of period dividing `n`, in increasing order.
pub fn periodic_points(map: &CircleMap, n: usize) -> Result<PeriodicOrbitSet> {
    let solved = solve_all::<dyn Observable>(map, n, None)?;
    let mut pairs: Vec<(f64, f64)> = solved.iter().map(|s| (s.point, s.residual)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(PeriodicOrbitSet {
        period: n,
        points: pairs.iter().map(|p| p.0).collect(),
        residuals: pairs.iter().map(|p| p.1).collect(),
    })
}

/// `S_nψ(p)` for every periodic point `p` of period dividing `n`
/// (unordered).
pub fn periodic_birkhoff_sums<O: Observable + ?Sized>(map: &CircleMap, psi: &O, n: usize) -> Result<Vec<f64>> {
    Ok(solve_all(map, n, Some(psi))?.into_iter().map(|s| s.birkhoff).collect())
}
