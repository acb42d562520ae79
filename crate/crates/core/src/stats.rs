//! CLT variance by correlation series and by resolvent, the periodic-orbit
//! coboundary test, and an empirical CLT check.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dynamics::{periodic_birkhoff_sums, CircleMap, Coboundary, Observable, Potential, TrigPoly};
use crate::error::{Error, Result};
use crate::ldp::EquilibriumSampler;
use crate::operator::{assemble_transfer, Grid, GridFunction, TransferMatrix};
use crate::spectral::{dominant_triple, solve, SpectralTriple};

/// Variances at or below this count as coboundaries.
pub const COBOUNDARY_THRESHOLD: f64 = 1e-8;
const MIN_SERIES_TERMS: usize = 10;
const MAX_SERIES_TERMS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    pub mean: f64,
    pub sigma2_series: f64,
    pub sigma2_resolvent: f64,
    pub series_terms: usize,
    pub is_coboundary: bool,
}

fn nu_dot(nu: &[f64], a: &[f64], b: &[f64]) -> f64 {
    nu.iter().zip(a).zip(b).map(|((n, x), y)| n * x * y).sum()
}

/// `∫ψ dμ` and the centred node values `ψ̃_k`.
fn centre(triple: &SpectralTriple, psi: &[f64]) -> (f64, Vec<f64>) {
    let mean = nu_dot(&triple.nu, triple.h.values(), psi);
    (mean, psi.iter().map(|p| p - mean).collect())
}

/// `σ² = ν(ψ̃²h) + 2 Σ_{n≥1} ν(ψ̃ L̃ⁿ(ψ̃h))` by direct summation.
pub fn series_variance(tm: &TransferMatrix, triple: &SpectralTriple, psi: &[f64]) -> (f64, usize) {
    let (_, centred) = centre(triple, psi);
    let mut v: Vec<f64> = centred.iter().zip(triple.h.values()).map(|(a, b)| a * b).collect();
    let mut w = vec![0.0; v.len()];
    let ones = vec![1.0; v.len()];
    let mut sigma2 = nu_dot(&triple.nu, &centred, &v);
    let mut terms = 0;
    for n in 1..=MAX_SERIES_TERMS {
        tm.apply_slice(&v, &mut w);
        w.iter_mut().for_each(|x| *x /= triple.lambda);
        std::mem::swap(&mut v, &mut w);
        let term = nu_dot(&triple.nu, &centred, &v);
        sigma2 += 2.0 * term;
        terms = n;
        if n >= MIN_SERIES_TERMS && term.abs() < 1e-14 {
            break;
        }
        // keep the iterate mean-zero against rounding drift
        let drift = nu_dot(&triple.nu, &ones, &v);
        v.iter_mut().zip(triple.h.values()).for_each(|(x, h)| *x -= drift * h);
    }
    (sigma2, terms)
}

/// `σ² = ν(ψ̃²h) + 2ν(ψ̃w)` with `(I − L̃ + hνᵀ) w = L̃(ψ̃h)`, solved densely.
pub fn resolvent_variance(tm: &TransferMatrix, triple: &SpectralTriple, psi: &[f64]) -> f64 {
    let n = psi.len();
    let (_, centred) = centre(triple, psi);
    let v: Vec<f64> = centred.iter().zip(triple.h.values()).map(|(a, b)| a * b).collect();
    let mut rhs = vec![0.0; n];
    tm.apply_slice(&v, &mut rhs);
    rhs.iter_mut().for_each(|x| *x /= triple.lambda);
    let h = triple.h.values();
    let a = DMatrix::from_fn(n, n, |k, l| {
        let id = if k == l { 1.0 } else { 0.0 };
        id - tm.entry(k, l) / triple.lambda + h[k] * triple.nu[l]
    });
    let w = a
        .lu()
        .solve(&DVector::from_vec(rhs))
        .expect("resolvent matrix is invertible when the spectral gap is positive");
    nu_dot(&triple.nu, &centred, &v) + 2.0 * nu_dot(&triple.nu, &centred, w.as_slice())
}

pub fn variance_report(tm: &TransferMatrix, triple: &SpectralTriple, psi: &[f64]) -> VarianceReport {
    let (mean, _) = centre(triple, psi);
    let (sigma2_series, series_terms) = series_variance(tm, triple, psi);
    let sigma2_resolvent = resolvent_variance(tm, triple, psi);
    VarianceReport {
        mean,
        sigma2_series,
        sigma2_resolvent,
        series_terms,
        is_coboundary: sigma2_series <= COBOUNDARY_THRESHOLD,
    }
}

/// Mean and asymptotic variance of `ψ` under `μ_{f,φ}`.
pub fn clt_variance(map: &CircleMap, phi: &Potential, psi: &Potential, grid: Grid) -> Result<VarianceReport> {
    let tm = assemble_transfer(map, phi, grid)?;
    let triple = dominant_triple(&tm)?;
    let values = GridFunction::sample(grid, psi);
    Ok(variance_report(&tm, &triple, values.values()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LivsicReport {
    pub is_coboundary_candidate: bool,
    /// `max |S_nψ(p) − n·m| / n` over periodic points of period `n ≤ n_max`.
    pub max_periodic_defect: f64,
    pub worst_period: usize,
}

/// Periodic-orbit test for `ψ` being cohomologous to the constant `mean`.
pub fn livsic_check<O: Observable + ?Sized>(map: &CircleMap, psi: &O, mean: f64, n_max: usize) -> Result<LivsicReport> {
    let mut worst = (0.0, 1);
    for n in 1..=n_max {
        let sums = periodic_birkhoff_sums(map, psi, n)?;
        let defect = sums.iter().map(|s| (s - n as f64 * mean).abs()).fold(0.0, f64::max) / n as f64;
        if defect > worst.0 {
            worst = (defect, n);
        }
    }
    Ok(LivsicReport {
        is_coboundary_candidate: worst.0 <= COBOUNDARY_THRESHOLD,
        max_periodic_defect: worst.0,
        worst_period: worst.1,
    })
}

/// For `ψ = u∘f − u`, the spread of `log h_ψ − u` over the nodes, where
/// `h_ψ` is the eigenfunction of `L_{f,ψ}`. Zero up to discretization error.
pub fn transfer_function_residual(map: &CircleMap, u: &TrigPoly, grid: Grid) -> Result<f64> {
    let psi = Coboundary { map: map.clone(), transfer: u.clone() };
    let triple = solve(map, &psi, grid)?;
    let diffs: Vec<f64> = triple.h.values().iter().zip(grid.nodes()).map(|(h, x)| h.ln() - u.eval(x)).collect();
    let max = diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = diffs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltReport {
    pub ks_statistic: f64,
    pub mean: f64,
    pub sigma2: f64,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
}

/// Kolmogorov–Smirnov distance of `data` to `Normal(0, σ²)`.
pub fn ks_statistic_normal(data: &mut [f64], sigma: f64) -> f64 {
    let normal = Normal::new(0.0, sigma).expect("positive standard deviation");
    data.sort_by(f64::total_cmp);
    let m = data.len() as f64;
    data.iter()
        .enumerate()
        .map(|(i, &z)| {
            let c = normal.cdf(z);
            ((i + 1) as f64 / m - c).max(c - i as f64 / m)
        })
        .fold(0.0, f64::max)
}

/// Compares `(S_nψ − n·m)/√n` over equilibrium samples with the limiting
/// normal law.
pub fn clt_empirical(
    map: &CircleMap,
    phi: &Potential,
    psi: &Potential,
    n: usize,
    samples: usize,
    seed: u64,
    grid: Grid,
) -> Result<CltReport> {
    let tm = assemble_transfer(map, phi, grid)?;
    let triple = dominant_triple(&tm)?;
    let var = variance_report(&tm, &triple, GridFunction::sample(grid, psi).values());
    if var.sigma2_resolvent <= 1e-6 {
        return Err(Error::DegenerateVariance(var.sigma2_resolvent));
    }
    let sampler = EquilibriumSampler::from_triple(map, phi, &triple);
    let sums = sampler.birkhoff_sums(psi, n, samples, seed)?;
    let root = (n as f64).sqrt();
    let mut z: Vec<f64> = sums.iter().map(|s| (s - n as f64 * var.mean) / root).collect();
    Ok(CltReport {
        ks_statistic: ks_statistic_normal(&mut z, var.sigma2_resolvent.sqrt()),
        mean: var.mean,
        sigma2: var.sigma2_resolvent,
        n,
        samples,
        seed,
    })
}
