//! Dominant eigendata of transfer matrices, spectral-gap estimates, Hilbert
//! projective metrics and cone diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{circle_offset, CircleDynamics, CircleMap, Observable, Potential, TrigPoly};
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::operator::{assemble_transfer, Grid, GridFunction, TransferMatrix};

const MAX_POWER_STEPS: usize = 100_000;
const GAP_STEPS: usize = 40;
const STALL_STEPS: usize = 2000;

/// Dominant eigenvalue with right and left eigenvectors.
///
/// Normalized so that `Σ ν_k = 1` and `Σ ν_k h_k = 1`.
#[derive(Debug, Clone)]
pub struct SpectralTriple {
    pub lambda: f64,
    pub pressure: f64,
    pub h: GridFunction,
    pub nu: Vec<f64>,
    /// Estimate of `|λ₂| / λ`.
    pub gap_ratio: f64,
}

impl SpectralTriple {
    pub fn grid(&self) -> Grid {
        self.h.grid()
    }

    /// `ν(g) = Σ ν_k g_k`.
    pub fn nu_integral(&self, g: &[f64]) -> f64 {
        self.nu.iter().zip(g).map(|(a, b)| a * b).sum()
    }

    /// Weights `μ_k = ν_k h_k` of the equilibrium measure.
    pub fn mu(&self) -> Vec<f64> {
        self.nu.iter().zip(self.h.values()).map(|(a, b)| a * b).collect()
    }

    /// `‖Mh − λh‖_∞ / λ`.
    pub fn right_residual(&self, tm: &TransferMatrix) -> f64 {
        let mut mh = vec![0.0; self.nu.len()];
        tm.apply_slice(self.h.values(), &mut mh);
        mh.iter().zip(self.h.values()).map(|(a, b)| (a - self.lambda * b).abs()).fold(0.0, f64::max) / self.lambda
    }

    /// `‖νᵀM − λνᵀ‖₁ / λ`.
    pub fn left_residual(&self, tm: &TransferMatrix) -> f64 {
        let mut nm = vec![0.0; self.nu.len()];
        tm.apply_transpose_slice(&self.nu, &mut nm);
        nm.iter().zip(&self.nu).map(|(a, b)| (a - self.lambda * b).abs()).sum::<f64>() / self.lambda
    }
}

enum PowerOutcome {
    Converged(Vec<f64>),
    /// No progress; carries the modulus of the last normalization factor.
    Stalled(f64),
}

/// Power iteration on `A + shift·I`, normalized by the entry of largest
/// modulus.
fn power_iterate_shifted(
    n: usize,
    shift: f64,
    amplitude: f64,
    apply: &impl Fn(&[f64], &mut [f64]),
) -> Result<PowerOutcome> {
    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let mut scale = 0.0;
    for _ in 0..MAX_POWER_STEPS {
        apply(&v, &mut w);
        for (a, b) in w.iter_mut().zip(&v) {
            *a += shift * b;
        }
        scale = w.iter().copied().fold(0.0, |m: f64, x| if x.abs() > m.abs() { x } else { m });
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::NoConvergence(format!("power iteration hit scale {scale}")));
        }
        let mut diff: f64 = 0.0;
        for (a, b) in w.iter_mut().zip(&v) {
            *a /= scale;
            diff = diff.max((*a - b).abs());
        }
        std::mem::swap(&mut v, &mut w);
        if diff <= 1e-14 {
            return Ok(PowerOutcome::Converged(v));
        }
        if diff < best {
            best = diff;
            since_best = 0;
        } else {
            since_best += 1;
            // rounding floor reached, relative to the size of the entries
            let floor = 1e-11 * (amplitude + shift.abs()).max(scale.abs()) / scale.abs();
            if best <= floor && since_best >= 50 {
                return Ok(PowerOutcome::Converged(v));
            }
            if since_best >= STALL_STEPS {
                return Ok(PowerOutcome::Stalled(scale.abs() - shift));
            }
        }
    }
    Ok(PowerOutcome::Stalled(scale.abs() - shift))
}

/// Dominant positive eigenvector. When an eigenvalue of nearly equal
/// modulus blocks plain iteration, retries with the spectrum shifted by
/// the observed growth rate.
fn power_iterate(n: usize, amplitude: f64, apply: impl Fn(&[f64], &mut [f64])) -> Result<Vec<f64>> {
    let growth = match power_iterate_shifted(n, 0.0, amplitude, &apply)? {
        PowerOutcome::Converged(v) => return Ok(v),
        PowerOutcome::Stalled(g) => g,
    };
    match power_iterate_shifted(n, growth, amplitude, &apply)? {
        PowerOutcome::Converged(v) => Ok(v),
        PowerOutcome::Stalled(_) => {
            Err(Error::NoConvergence(format!("power iteration stalled with and without shift {growth:e}")))
        }
    }
}

/// Dominant eigentriple of a transfer matrix.
pub fn dominant_triple(tm: &TransferMatrix) -> Result<SpectralTriple> {
    let grid = tm.grid();
    let n = grid.len();
    let abs_rows = (0..n).map(|i| (0..n).map(|j| tm.entry(i, j).abs()).sum::<f64>()).fold(0.0, f64::max);
    let abs_cols = (0..n).map(|j| (0..n).map(|i| tm.entry(i, j).abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut h = power_iterate(n, abs_rows, |v, out| tm.apply_slice(v, out))?;
    let mut nu = power_iterate(n, abs_cols, |v, out| tm.apply_transpose_slice(v, out))?;
    let total: f64 = nu.iter().sum();
    nu.iter_mut().for_each(|x| *x /= total);
    let nh: f64 = nu.iter().zip(&h).map(|(a, b)| a * b).sum();
    h.iter_mut().for_each(|x| *x /= nh);
    let mut mh = vec![0.0; n];
    tm.apply_slice(&h, &mut mh);
    let lambda: f64 = nu.iter().zip(&mh).map(|(a, b)| a * b).sum();
    if lambda <= 0.0 {
        return Err(Error::NoConvergence(format!("dominant eigenvalue {lambda} is not positive")));
    }
    if let Some(index) = h.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NotPositive { index, value: h[index] });
    }
    let gap_ratio = deflated_ratio(tm, lambda, &h, &nu);
    Ok(SpectralTriple { lambda, pressure: lambda.ln(), h: GridFunction::new(grid, h)?, nu, gap_ratio })
}

/// Growth rate of `M − λhνᵀ` over `λ`, from the geometric mean of the last
/// half of the iteration's growth factors.
fn deflated_ratio(tm: &TransferMatrix, lambda: f64, h: &[f64], nu: &[f64]) -> f64 {
    let n = h.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut w = vec![0.0; n];
    let norm = |x: &[f64]| x.iter().fold(0.0, |m: f64, a| m.max(a.abs()));
    let mut log_growth = Vec::with_capacity(GAP_STEPS);
    for _ in 0..GAP_STEPS {
        let before = norm(&v);
        if before == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= before);
        tm.apply_slice(&v, &mut w);
        let c: f64 = nu.iter().zip(&v).map(|(a, b)| a * b).sum();
        for (wi, hi) in w.iter_mut().zip(h) {
            *wi -= lambda * hi * c;
        }
        let after = norm(&w);
        if after == 0.0 {
            return 0.0;
        }
        log_growth.push(after.ln());
        std::mem::swap(&mut v, &mut w);
    }
    let tail = &log_growth[GAP_STEPS / 2..];
    (tail.iter().sum::<f64>() / tail.len() as f64).exp() / lambda
}

/// Assembles the operator of `(map, φ)` and extracts its eigentriple.
pub fn solve<M, P>(map: &M, potential: &P, grid: Grid) -> Result<SpectralTriple>
where
    M: CircleDynamics + ?Sized,
    P: Observable + ?Sized,
{
    dominant_triple(&assemble_transfer(map, potential, grid)?)
}

fn check_positive(gf: &GridFunction) -> Result<()> {
    match gf.values().iter().position(|&v| v <= 0.0 || v.is_nan()) {
        Some(index) => Err(Error::NotPositive { index, value: gf.values()[index] }),
        None => Ok(()),
    }
}

/// Hilbert metric of the cone of positive grid functions,
/// `log(max f/g · max g/f)`.
pub fn hilbert_metric_positive(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    check_positive(f)?;
    check_positive(g)?;
    if f.grid() != g.grid() {
        return Err(Error::DimensionMismatch { expected: f.grid().len(), found: g.grid().len() });
    }
    let (mut beta, mut inv_alpha) = (0.0f64, 0.0f64);
    for (a, b) in f.values().iter().zip(g.values()) {
        beta = beta.max(a / b);
        inv_alpha = inv_alpha.max(b / a);
    }
    Ok((beta * inv_alpha).ln().max(0.0))
}

/// `(e^Θ − 1)‖f‖_∞` together with the actual `‖f − g‖_∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformBound {
    pub bound: f64,
    pub actual: f64,
}

/// Uniform distance bound from the projective distance, for `f`, `g`
/// normalized by the caller to equal integrals.
pub fn projective_to_uniform_bound(f: &GridFunction, g: &GridFunction) -> Result<UniformBound> {
    let theta = hilbert_metric_positive(f, g)?;
    let actual = f.values().iter().zip(g.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(UniformBound { bound: theta.exp_m1() * f.max_abs(), actual })
}

/// Membership in the cone `{g > 0 : |Dg/g| ≤ κ}` tested at the nodes.
pub fn cone_membership_c1(gf: &GridFunction, kappa: f64) -> Result<bool> {
    check_positive(gf)?;
    let dg = gf.differentiate();
    Ok(dg.values().iter().zip(gf.values()).all(|(d, g)| (d / g).abs() <= kappa))
}

/// Hilbert metric of the log-Lipschitz cone
/// `{g > 0 : g(x) ≤ e^{κ d(x,y)} g(y)}` restricted to the sample points.
pub fn hilbert_metric_c1(points: &[f64], f: &[f64], g: &[f64], kappa: f64) -> f64 {
    // Θ = log(β/α), α/β = inf/sup of g/f and of the two-point ratios
    let (mut alpha, mut beta) = (f64::INFINITY, 0.0f64);
    for i in 0..points.len() {
        let r = g[i] / f[i];
        alpha = alpha.min(r);
        beta = beta.max(r);
        for j in 0..points.len() {
            if i == j {
                continue;
            }
            let e = (kappa * circle_offset(points[i] - points[j]).abs()).exp();
            let den = e * f[i] - f[j];
            if den > 0.0 {
                let r = (e * g[i] - g[j]) / den;
                alpha = alpha.min(r);
                beta = beta.max(r);
            }
        }
    }
    if alpha <= 0.0 {
        f64::INFINITY
    } else {
        (beta / alpha).ln()
    }
}

/// Cone constants of the invariance argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeParams {
    /// `2‖Dφ‖₀/(σ − 1)`.
    pub kappa0: f64,
    /// `(1 + σ⁻¹)/2`.
    pub rho: f64,
    /// Largest sampled projective distance in `Λ_κ` between elements of
    /// `Λ_{ρκ}`, for the first tested κ.
    pub diameter_bound: f64,
    /// `1 − e^{−Δ}`.
    pub tau: f64,
}

#[derive(Debug, Clone)]
pub struct ConeReport {
    pub params: ConeParams,
    pub kappas: Vec<f64>,
    pub samples_per_kappa: usize,
    /// Worst `sup|D(Lg)/Lg| / κ` for each tested κ.
    pub worst_ratio_per_kappa: Vec<f64>,
    pub worst_ratio: f64,
    /// Samples with `sup|D(Lg)/Lg| > ρκ`.
    pub violations: usize,
}

const CONE_POINTS: usize = 256;
const DIAMETER_POINTS: usize = 64;
const DIAMETER_PAIRS: usize = 100;

/// Random `q` with bandwidth ≤ 8 and `Σ 2πk(|a_k|+|b_k|) = bound`.
fn random_log_density(rng: &mut ChaCha8Rng, bound: f64) -> TrigPoly {
    let k = rng.random_range(1..=8);
    let mut cos = vec![0.0; k];
    let mut sin = vec![0.0; k];
    for i in 0..k {
        let w = 1.0 / ((i + 1) * (i + 1)) as f64;
        cos[i] = w * (rng.random::<f64>() * 2.0 - 1.0);
        sin[i] = w * (rng.random::<f64>() * 2.0 - 1.0);
    }
    let q = TrigPoly::new(0.0, cos, sin);
    let b = q.derivative_sup_bound();
    if b == 0.0 {
        q
    } else {
        q.scaled(bound / b)
    }
}

fn potential_derivative_sup(phi: &Potential) -> f64 {
    if phi.is_trig() {
        phi.trig().derivative_sup_bound()
    } else {
        phi.derivative_sup(4096)
    }
}

/// Samples cone elements `g = exp(q)` with `|q'| ≤ κ` and checks that
/// `L g` lies in the cone of aperture `ρκ`.
pub fn cone_invariance_check(map: &CircleMap, phi: &Potential, samples: usize, seed: u64) -> Result<ConeReport> {
    let sigma = map.sigma();
    let kappa0 = 2.0 * potential_derivative_sup(phi) / (sigma - 1.0);
    let rho = 0.5 * (1.0 + 1.0 / sigma);
    let kappas: Vec<f64> = if kappa0 > 0.0 { vec![kappa0, 2.0 * kappa0, 4.0 * kappa0] } else { vec![1.0, 2.0, 4.0] };

    // branch data per evaluation point: (y, e^{φ(y)}, φ'(y), f'(y))
    let mut table = Vec::with_capacity(CONE_POINTS);
    for k in 0..CONE_POINTS {
        let x = k as f64 / CONE_POINTS as f64;
        let branches = map.inverse_branches(x)?;
        table.push(
            branches
                .iter()
                .map(|b| (b.point, phi.value(b.point).exp(), phi.derivative(b.point), b.derivative))
                .collect::<Vec<_>>(),
        );
    }

    let mut worst_ratio_per_kappa = Vec::with_capacity(kappas.len());
    let mut violations = 0;
    for (ki, &kappa) in kappas.iter().enumerate() {
        let results: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((ki * samples + s) as u64);
                let u = rng.random::<f64>();
                let q = random_log_density(&mut rng, u * kappa);
                let mut worst: f64 = 0.0;
                for row in &table {
                    let (mut lg, mut dlg) = (0.0, 0.0);
                    for &(y, w, dphi, df) in row {
                        let g = q.eval(y).exp();
                        lg += w * g;
                        dlg += w * (dphi * g + Observable::derivative(&q, y) * g) / df;
                    }
                    worst = worst.max((dlg / lg).abs());
                }
                worst / kappa
            })
            .collect();
        violations += results.iter().filter(|&&r| r > rho * (1.0 + 1e-12)).count();
        worst_ratio_per_kappa.push(results.iter().copied().fold(0.0, f64::max));
    }
    let worst_ratio = worst_ratio_per_kappa.iter().copied().fold(0.0, f64::max);

    let diameter_bound = sampled_diameter(kappas[0], rho, seed);
    Ok(ConeReport {
        params: ConeParams { kappa0, rho, diameter_bound, tau: 1.0 - (-diameter_bound).exp() },
        kappas,
        samples_per_kappa: samples,
        worst_ratio_per_kappa,
        worst_ratio,
        violations,
    })
}

/// Largest `Θ_κ(f, g)` over random pairs `f, g ∈ Λ_{ρκ}`.
fn sampled_diameter(kappa: f64, rho: f64, seed: u64) -> f64 {
    let points: Vec<f64> = (0..DIAMETER_POINTS).map(|k| k as f64 / DIAMETER_POINTS as f64).collect();
    (0..DIAMETER_PAIRS)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd1a3);
            rng.set_stream(s as u64);
            let mut element = || {
                let u = rng.random::<f64>();
                let q = random_log_density(&mut rng, u * rho * kappa);
                points.iter().map(|&x| q.eval(x).exp()).collect::<Vec<f64>>()
            };
            let f = element();
            let g = element();
            hilbert_metric_c1(&points, &f, &g, kappa)
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionTrial {
    pub theta_before: f64,
    pub theta_after: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub trials: Vec<ContractionTrial>,
    pub median_ratio: f64,
}

impl ContractionReport {
    pub fn max_ratio(&self) -> f64 {
        self.trials.iter().map(|t| t.ratio).fold(0.0, f64::max)
    }
}

/// `Θ(Lf, Lg)/Θ(f, g)` with the convention `0/0 = 0`.
pub fn contraction_ratio(tm: &TransferMatrix, f: &GridFunction, g: &GridFunction) -> Result<ContractionTrial> {
    let theta_before = hilbert_metric_positive(f, g)?;
    let theta_after = hilbert_metric_positive(&tm.apply(f)?, &tm.apply(g)?)?;
    let ratio = if theta_before < 1e-15 { 0.0 } else { theta_after / theta_before };
    Ok(ContractionTrial { theta_before, theta_after, ratio })
}

/// Median contraction ratio over random positive pairs `exp(q)`.
pub fn contraction_factor_estimate(tm: &TransferMatrix, trials: usize, seed: u64) -> Result<ContractionReport> {
    let grid = tm.grid();
    let trials: Vec<ContractionTrial> = (0..trials)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let (b1, b2) = (2.0 + 8.0 * rng.random::<f64>(), 2.0 + 8.0 * rng.random::<f64>());
            let q1 = random_log_density(&mut rng, b1);
            let q2 = random_log_density(&mut rng, b2);
            let f = GridFunction::from_fn(grid, |x| q1.eval(x).exp());
            let g = GridFunction::from_fn(grid, |x| q2.eval(x).exp());
            contraction_ratio(tm, &f, &g)
        })
        .collect::<Result<_>>()?;
    let mut ratios: Vec<f64> = trials.iter().map(|t| t.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median_ratio = if ratios.is_empty() { 0.0 } else { ratios[ratios.len() / 2] };
    Ok(ContractionReport { trials, median_ratio })
}

/// `‖L̃ⁿ1 − ν(1)h‖_∞` for `n = 1..=n_max` and its log-linear fit.
#[derive(Debug, Clone)]
pub struct DecayProfile {
    pub errors: Vec<f64>,
    /// Fitted per-step rate `e^{slope}`.
    pub fitted_rate: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    /// Number of leading terms above the rounding floor used in the fit.
    pub fitted_terms: usize,
}

/// Errors below this are treated as rounding noise and left out of the fit.
pub const DECAY_FLOOR: f64 = 1e-13;

pub fn decay_profile(tm: &TransferMatrix, triple: &SpectralTriple, n_max: usize) -> DecayProfile {
    let n = tm.grid().len();
    let nu_one: f64 = triple.nu.iter().sum();
    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    let mut errors = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        tm.apply_slice(&v, &mut w);
        w.iter_mut().for_each(|x| *x /= triple.lambda);
        std::mem::swap(&mut v, &mut w);
        let err = v.iter().zip(triple.h.values()).map(|(a, b)| (a - nu_one * b).abs()).fold(0.0, f64::max);
        errors.push(err);
    }
    let fitted_terms = errors.iter().take_while(|&&e| e > DECAY_FLOOR).count();
    if fitted_terms < 3 {
        return DecayProfile { errors, fitted_rate: 0.0, prefactor: 0.0, r_squared: 1.0, fitted_terms };
    }
    let x: Vec<f64> = (1..=fitted_terms).map(|k| k as f64).collect();
    let y: Vec<f64> = errors[..fitted_terms].iter().map(|e| e.ln()).collect();
    let fit = linear_fit(&x, &y);
    DecayProfile {
        errors,
        fitted_rate: fit.slope.exp(),
        prefactor: fit.intercept.exp(),
        r_squared: fit.r_squared,
        fitted_terms,
    }
}
