//! Free energy, rate function, large-deviation checks, equilibrium
//! sampling and the multifractal pressure spectrum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{Branch, CircleDynamics, CircleMap, Observable, Potential, TrigPoly};
use crate::error::{Error, Result};
use crate::fit::proportional_fit;
use crate::operator::{assemble_transfer, Grid, GridFunction};
use crate::spectral::{dominant_triple, solve, SpectralTriple};
use crate::stats::{clt_variance, resolvent_variance};

/// Half-width of the `t` range used to delimit the rate-function domain.
pub const T_MAX: f64 = 40.0;
/// Smallest half-width tried by [`domain_curve`].
pub const MIN_T_MAX: f64 = 2.5;
/// Step of the five-point stencil for `E''(0)`.
pub const CURVATURE_STEP: f64 = 1e-3;
pub const BURN_IN: usize = 1000;
pub const THIN: usize = 10;
/// Independent chains per sampling run.
pub const CHAINS: usize = 16;
const START: f64 = 0.5;

/// `E(t)` with first and second derivatives.
pub trait FreeEnergy: Sync {
    /// `(E(t), E'(t))`.
    fn value_and_slope(&self, t: f64) -> Result<(f64, f64)>;

    /// `(E(t), E'(t), E''(t))`.
    fn full(&self, t: f64) -> Result<(f64, f64, f64)>;
}

/// `E(t) = P(φ + tψ) − P(φ)` from spectral solves.
#[derive(Debug, Clone)]
pub struct SpectralFreeEnergy {
    map: CircleMap,
    phi: Potential,
    psi: Potential,
    grid: Grid,
    base_pressure: f64,
    psi_values: Vec<f64>,
}

impl SpectralFreeEnergy {
    pub fn new(map: &CircleMap, phi: &Potential, psi: &Potential, grid: Grid) -> Result<Self> {
        Ok(SpectralFreeEnergy {
            map: map.clone(),
            phi: phi.clone(),
            psi: psi.clone(),
            grid,
            base_pressure: solve(map, phi, grid)?.pressure,
            psi_values: GridFunction::sample(grid, psi).into_values(),
        })
    }

    pub fn base_pressure(&self) -> f64 {
        self.base_pressure
    }

    fn solve_at(&self, t: f64) -> Result<(crate::operator::TransferMatrix, SpectralTriple)> {
        let tm = assemble_transfer(&self.map, &self.phi.add_scaled(t, &self.psi), self.grid)?;
        let triple = dominant_triple(&tm)?;
        Ok((tm, triple))
    }
}

impl FreeEnergy for SpectralFreeEnergy {
    fn value_and_slope(&self, t: f64) -> Result<(f64, f64)> {
        let (_, triple) = self.solve_at(t)?;
        let mu = triple.mu();
        let slope = mu.iter().zip(&self.psi_values).map(|(a, b)| a * b).sum::<f64>() / mu.iter().sum::<f64>();
        Ok((triple.pressure - self.base_pressure, slope))
    }

    fn full(&self, t: f64) -> Result<(f64, f64, f64)> {
        let (tm, triple) = self.solve_at(t)?;
        let mu = triple.mu();
        let slope = mu.iter().zip(&self.psi_values).map(|(a, b)| a * b).sum::<f64>() / mu.iter().sum::<f64>();
        let curvature = resolvent_variance(&tm, &triple, &self.psi_values);
        Ok((triple.pressure - self.base_pressure, slope, curvature))
    }
}

/// `E(t) = mean·t + curvature·t²/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFreeEnergy {
    pub mean: f64,
    pub curvature: f64,
}

impl FreeEnergy for QuadraticFreeEnergy {
    fn value_and_slope(&self, t: f64) -> Result<(f64, f64)> {
        Ok((self.mean * t + 0.5 * self.curvature * t * t, self.mean + self.curvature * t))
    }

    fn full(&self, t: f64) -> Result<(f64, f64, f64)> {
        let (e, e1) = self.value_and_slope(t)?;
        Ok((e, e1, self.curvature))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeEnergyCurve {
    pub t_grid: Vec<f64>,
    pub e: Vec<f64>,
    pub e_prime: Vec<f64>,
    pub e_second_at_0: f64,
}

impl FreeEnergyCurve {
    /// Second differences, scaled to the local mean spacing (plain
    /// `E_{i+1} − 2E_i + E_{i−1}` on uniform grids).
    pub fn second_differences(&self) -> Vec<f64> {
        second_differences(&self.t_grid, &self.e)
    }

    pub fn min_second_difference(&self) -> f64 {
        self.second_differences().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn is_convex(&self, tol: f64) -> bool {
        self.min_second_difference() >= -tol
    }

    pub fn slope_nondecreasing(&self) -> bool {
        self.e_prime.windows(2).all(|w| w[1] >= w[0])
    }

    pub fn slope_range(&self) -> (f64, f64) {
        (self.e_prime[0], self.e_prime[self.e_prime.len() - 1])
    }
}

fn second_differences(x: &[f64], y: &[f64]) -> Vec<f64> {
    (1..x.len().saturating_sub(1))
        .map(|i| {
            let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            let d2 = 2.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0) / (h0 + h1);
            d2 * (0.5 * (h0 + h1)).powi(2)
        })
        .collect()
}

/// Samples `E` and `E'` on an increasing `t` grid; `E''(0)` by the
/// five-point stencil on `E`.
pub fn free_energy_curve<F: FreeEnergy + ?Sized>(fe: &F, t_grid: &[f64]) -> Result<FreeEnergyCurve> {
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("t grid must be strictly increasing".into()));
    }
    let pts: Vec<(f64, f64)> = t_grid.par_iter().map(|&t| fe.value_and_slope(t)).collect::<Result<_>>()?;
    let h = CURVATURE_STEP;
    let stencil: Vec<f64> =
        [-2.0, -1.0, 0.0, 1.0, 2.0].par_iter().map(|&k| Ok(fe.value_and_slope(k * h)?.0)).collect::<Result<_>>()?;
    let e_second_at_0 =
        (-stencil[4] + 16.0 * stencil[3] - 30.0 * stencil[2] + 16.0 * stencil[1] - stencil[0]) / (12.0 * h * h);
    Ok(FreeEnergyCurve {
        t_grid: t_grid.to_vec(),
        e: pts.iter().map(|p| p.0).collect(),
        e_prime: pts.iter().map(|p| p.1).collect(),
        e_second_at_0,
    })
}

pub fn free_energy(
    map: &CircleMap,
    phi: &Potential,
    psi: &Potential,
    t_grid: &[f64],
    grid: Grid,
) -> Result<FreeEnergyCurve> {
    free_energy_curve(&SpectralFreeEnergy::new(map, phi, psi, grid)?, t_grid)
}

/// `n` equispaced points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFunction {
    pub s_grid: Vec<f64>,
    pub t_of_s: Vec<f64>,
    pub i: Vec<f64>,
    pub mean: f64,
}

impl RateFunction {
    pub fn min_second_difference(&self) -> f64 {
        second_differences(&self.s_grid, &self.i).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn min_value(&self) -> f64 {
        self.i.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Solves `E'(t) = s` by safeguarded Newton inside `[lo, hi]`; returns
/// `(t, s·t − E(t))`.
fn legendre_point<F: FreeEnergy + ?Sized>(fe: &F, s: f64, mut lo: f64, mut hi: f64, mut t: f64) -> Result<(f64, f64)> {
    for _ in 0..200 {
        let (e, e1, e2) = fe.full(t)?;
        let r = e1 - s;
        if r.abs() <= 1e-12 || hi - lo <= 1e-15 * (1.0 + t.abs()) {
            return Ok((t, s * t - e));
        }
        if r < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - r / e2;
        t = if e2 > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::NoConvergence(format!("Legendre solve for s = {s} did not converge")))
}

/// `I(s) = sup_t (s·t − E(t))` for each `s`, with `t(s)` from fresh
/// evaluations of `E'`. The stretch of the curve bracketing the requested
/// levels must not be affine.
pub fn legendre<F: FreeEnergy + ?Sized>(fe: &F, curve: &FreeEnergyCurve, s_grid: &[f64]) -> Result<RateFunction> {
    let last = curve.t_grid.len() - 1;
    let bracket = |s: f64| curve.e_prime.partition_point(|&d| d < s).clamp(1, last);
    let k_lo = s_grid.iter().map(|&s| bracket(s)).min().unwrap_or(1);
    let k_hi = s_grid.iter().map(|&s| bracket(s)).max().unwrap_or(last);
    let (w_lo, w_hi) = (k_lo.saturating_sub(2), (k_hi + 1).min(last));
    let max_d2 = second_differences(&curve.t_grid[w_lo..=w_hi], &curve.e[w_lo..=w_hi])
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(max_d2 > 1e-8) {
        return Err(Error::NotStrictlyConvex(max_d2));
    }
    let (lo, hi) = curve.slope_range();
    if let Some(&s) = s_grid.iter().find(|&&s| !(s > lo && s < hi)) {
        return Err(Error::SOutOfRange { s, lo, hi });
    }
    let solved: Vec<(f64, f64)> = s_grid
        .par_iter()
        .map(|&s| {
            let k = bracket(s);
            let (t0, t1) = (curve.t_grid[k - 1], curve.t_grid[k]);
            let (d0, d1) = (curve.e_prime[k - 1], curve.e_prime[k]);
            let guess = if d1 > d0 { t0 + (s - d0) / (d1 - d0) * (t1 - t0) } else { 0.5 * (t0 + t1) };
            legendre_point(fe, s, t0, t1, guess)
        })
        .collect::<Result<_>>()?;
    Ok(RateFunction {
        s_grid: s_grid.to_vec(),
        t_of_s: solved.iter().map(|p| p.0).collect(),
        i: solved.iter().map(|p| p.1).collect(),
        mean: fe.value_and_slope(0.0)?.1,
    })
}

/// `max_i |I(E'(t_i)) − (t_i E'(t_i) − E(t_i))|` over interior grid points.
pub fn variational_residual<F: FreeEnergy + ?Sized>(fe: &F, curve: &FreeEnergyCurve) -> Result<f64> {
    let last = curve.t_grid.len() - 1;
    let idx: Vec<usize> =
        (1..last).filter(|&i| curve.e_prime[i] > curve.e_prime[0] && curve.e_prime[i] < curve.e_prime[last]).collect();
    let s: Vec<f64> = idx.iter().map(|&i| curve.e_prime[i]).collect();
    let rate = legendre(fe, curve, &s)?;
    Ok(idx
        .iter()
        .zip(&rate.i)
        .map(|(&k, i)| (i - (curve.t_grid[k] * curve.e_prime[k] - curve.e[k])).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicLdpReport {
    pub n: Vec<usize>,
    /// `a_n = (1/n) log ∫ e^{tS_nψ} dμ`.
    pub a: Vec<f64>,
    pub e_t: f64,
    /// `C` in the fit `|a_n − E(t)| ≈ C/n` over `n ≥ 5`.
    pub constant: f64,
    pub r_squared: f64,
    pub residual_at_n_max: f64,
}

/// Exact finite-`n` free energies through `ν_φ(L_{φ+tψ}ⁿ h_φ) / λ_φⁿ`.
pub fn ldp_deterministic_check(
    map: &CircleMap,
    phi: &Potential,
    psi: &Potential,
    t: f64,
    n_max: usize,
    grid: Grid,
) -> Result<DeterministicLdpReport> {
    let base = solve(map, phi, grid)?;
    let tm = assemble_transfer(map, &phi.add_scaled(t, psi), grid)?;
    let e_t = dominant_triple(&tm)?.pressure - base.pressure;
    let mut v = base.h.values().to_vec();
    let mut w = vec![0.0; v.len()];
    let mut log_scale = 0.0;
    let mut a = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        tm.apply_slice(&v, &mut w);
        let s = w.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        w.iter_mut().for_each(|x| *x /= s);
        std::mem::swap(&mut v, &mut w);
        log_scale += s.ln();
        a.push(((base.nu_integral(&v)).ln() + log_scale) / n as f64 - base.pressure);
    }
    let ns: Vec<usize> = (1..=n_max).collect();
    let fit_n: Vec<usize> = ns.iter().copied().filter(|&n| n >= 5).collect();
    let x: Vec<f64> = fit_n.iter().map(|&n| 1.0 / n as f64).collect();
    let y: Vec<f64> = fit_n.iter().map(|&n| (a[n - 1] - e_t).abs()).collect();
    let (constant, r_squared) = if x.is_empty() { (0.0, 1.0) } else { proportional_fit(&x, &y) };
    let residual_at_n_max = a.last().map_or(0.0, |v| (v - e_t).abs());
    Ok(DeterministicLdpReport { n: ns, a, e_t, constant, r_squared, residual_at_n_max })
}

/// Backward Markov chain whose stationary law is `μ_{f,φ}`: from `x` move
/// to the preimage `y_j` with probability `e^{φ(y_j)} h(y_j) / (λ h(x))`.
#[derive(Debug, Clone)]
pub struct EquilibriumSampler {
    map: CircleMap,
    phi: Potential,
    h: TrigPoly,
    lambda: f64,
}

impl EquilibriumSampler {
    pub fn new(map: &CircleMap, phi: &Potential, grid: Grid) -> Result<Self> {
        Ok(EquilibriumSampler::from_triple(map, phi, &solve(map, phi, grid)?))
    }

    pub fn from_triple(map: &CircleMap, phi: &Potential, triple: &SpectralTriple) -> Self {
        EquilibriumSampler { map: map.clone(), phi: phi.clone(), h: triple.h.to_trig_poly(), lambda: triple.lambda }
    }

    /// Unnormalized transition probabilities at `x`; they sum to one up to
    /// the discretization error of the eigenpair.
    pub fn branch_probabilities(&self, x: f64) -> Result<Vec<f64>> {
        let hx = self.h.eval(x);
        Ok(self
            .map
            .inverse_branches(x)?
            .iter()
            .map(|b| self.phi.value(b.point).exp() * self.h.eval(b.point) / (self.lambda * hx))
            .collect())
    }

    fn step(&self, x: f64, rng: &mut ChaCha8Rng, branches: &mut Vec<Branch>, weights: &mut Vec<f64>) -> Result<f64> {
        self.map.inverse_branches_into(x, branches)?;
        weights.clear();
        let mut total = 0.0;
        for b in branches.iter() {
            let w = self.phi.value(b.point).exp() * self.h.eval(b.point);
            total += w;
            weights.push(total);
        }
        let u = rng.random::<f64>() * total;
        let j = weights.iter().position(|&c| u < c).unwrap_or(branches.len() - 1);
        Ok(branches[j].point)
    }

    fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chain as u64);
        rng
    }

    fn per_chain(total: usize, chain: usize) -> usize {
        total / CHAINS + usize::from(chain < total % CHAINS)
    }

    /// `count` states, every `THIN`-th after a burn-in, from `CHAINS`
    /// independent chains.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        let chunks: Vec<Vec<f64>> = (0..CHAINS)
            .into_par_iter()
            .map(|c| {
                let mut rng = Self::chain_rng(seed, c);
                let (mut br, mut wt) = (Vec::new(), Vec::new());
                let mut x = START;
                for _ in 0..BURN_IN {
                    x = self.step(x, &mut rng, &mut br, &mut wt)?;
                }
                let m = Self::per_chain(count, c);
                let mut out = Vec::with_capacity(m);
                for _ in 0..m {
                    for _ in 0..THIN {
                        x = self.step(x, &mut rng, &mut br, &mut wt)?;
                    }
                    out.push(x);
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        Ok(chunks.concat())
    }

    /// `samples` values of `S_nψ` at equilibrium-distributed points. Along
    /// a backward block `x_1, …, x_n` the forward orbit of `x_n` visits
    /// `x_n, …, x_1`, so `S_nψ(x_n) = Σ ψ(x_i)`.
    pub fn birkhoff_sums<O: Observable + ?Sized>(
        &self,
        psi: &O,
        n: usize,
        samples: usize,
        seed: u64,
    ) -> Result<Vec<f64>> {
        let chunks: Vec<Vec<f64>> = (0..CHAINS)
            .into_par_iter()
            .map(|c| {
                let mut rng = Self::chain_rng(seed, c);
                let (mut br, mut wt) = (Vec::new(), Vec::new());
                let mut x = START;
                for _ in 0..BURN_IN {
                    x = self.step(x, &mut rng, &mut br, &mut wt)?;
                }
                let m = Self::per_chain(samples, c);
                let mut out = Vec::with_capacity(m);
                for _ in 0..m {
                    let mut s = 0.0;
                    for _ in 0..n {
                        x = self.step(x, &mut rng, &mut br, &mut wt)?;
                        s += psi.value(x);
                    }
                    out.push(s);
                    for _ in 0..THIN {
                        x = self.step(x, &mut rng, &mut br, &mut wt)?;
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        Ok(chunks.concat())
    }
}

pub fn sample_equilibrium(map: &CircleMap, phi: &Potential, grid: Grid, count: usize, seed: u64) -> Result<Vec<f64>> {
    EquilibriumSampler::new(map, phi, grid)?.sample(count, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloLdpReport {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub samples: usize,
    pub hits: usize,
    pub empirical_rate: f64,
    pub predicted_rate: f64,
    pub mean: f64,
    /// `[a, b]` contains the mean, so both rates are zero in the limit.
    pub trivial_interval: bool,
}

impl MonteCarloLdpReport {
    pub fn relative_gap(&self) -> f64 {
        (self.empirical_rate - self.predicted_rate).abs() / self.predicted_rate.abs()
    }
}

/// Symmetric 81-point `t` grid on `[−t_max, t_max]`.
pub fn symmetric_t_grid(t_max: f64) -> Vec<f64> {
    linspace(-t_max, t_max, 81)
}

/// Free-energy curve on `[−T, T]` delimiting the rate-function domain.
/// Starts at `T_MAX` and halves `T` while the discretized operator at the
/// ends fails to yield a positive eigentriple.
pub fn domain_curve<F: FreeEnergy + ?Sized>(fe: &F) -> Result<(FreeEnergyCurve, f64)> {
    let mut t_max = T_MAX;
    loop {
        match free_energy_curve(fe, &symmetric_t_grid(t_max)) {
            Ok(curve) => return Ok((curve, t_max)),
            Err(Error::NoConvergence(_) | Error::NotPositive { .. }) if t_max > MIN_T_MAX => t_max /= 2.0,
            Err(e) => return Err(e),
        }
    }
}

/// `−inf_{[a,b]} I` sampled on 11 points of the interval.
pub fn predicted_rate(fe: &SpectralFreeEnergy, a: f64, b: f64) -> Result<f64> {
    let (curve, _) = domain_curve(fe)?;
    let rate = legendre(fe, &curve, &linspace(a, b, 11))?;
    Ok(-rate.min_value())
}

/// Empirical frequency of `S_nψ/n ∈ [a, b]` at equilibrium against the rate
/// function.
#[allow(clippy::too_many_arguments)]
pub fn ldp_monte_carlo(
    map: &CircleMap,
    phi: &Potential,
    psi: &Potential,
    a: f64,
    b: f64,
    n: usize,
    samples: usize,
    seed: u64,
    grid: Grid,
) -> Result<MonteCarloLdpReport> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("interval [{a}, {b}] is empty")));
    }
    let tm = assemble_transfer(map, phi, grid)?;
    let triple = dominant_triple(&tm)?;
    let mean = triple.nu_integral(&triple.h.zip_with(&GridFunction::sample(grid, psi), |h, p| h * p)?.into_values());
    let trivial_interval = a <= mean && mean <= b;
    let predicted =
        if trivial_interval { 0.0 } else { predicted_rate(&SpectralFreeEnergy::new(map, phi, psi, grid)?, a, b)? };
    let sums = EquilibriumSampler::from_triple(map, phi, &triple).birkhoff_sums(psi, n, samples, seed)?;
    let hits = sums.iter().filter(|&&s| (a..=b).contains(&(s / n as f64))).count();
    if hits == 0 {
        return Err(Error::NoHits { a, b, samples });
    }
    Ok(MonteCarloLdpReport {
        a,
        b,
        n,
        samples,
        hits,
        empirical_rate: (hits as f64 / samples as f64).ln() / n as f64,
        predicted_rate: predicted,
        mean,
        trivial_interval,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultifractalSpectrum {
    /// Levels `c < c_max` that were evaluated.
    pub c_grid: Vec<f64>,
    pub pressure_of_level_set: Vec<f64>,
    pub c_max: f64,
    /// Requested levels at or beyond `c_max`.
    pub excluded: Vec<f64>,
    pub pressure: f64,
    pub mean: f64,
    /// Half-width of the `t` range that delimited `c_max`.
    pub t_max: f64,
}

impl MultifractalSpectrum {
    pub fn is_nonincreasing(&self, tol: f64) -> bool {
        self.pressure_of_level_set.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

/// `P − inf_{|s−m| ≥ c} I(s) = P − min(I(m−c), I(m+c))` for each level
/// `c ≥ 0` below `c_max`.
pub fn multifractal_spectrum(
    map: &CircleMap,
    phi: &Potential,
    psi: &Potential,
    c_grid: &[f64],
    grid: Grid,
) -> Result<MultifractalSpectrum> {
    let var = clt_variance(map, phi, psi, grid)?;
    if var.is_coboundary {
        return Err(Error::CoboundaryObservable(var.sigma2_series));
    }
    if let Some(&c) = c_grid.iter().find(|&&c| !(c >= 0.0)) {
        return Err(Error::InvalidArgument(format!("level {c} must be nonnegative")));
    }
    let fe = SpectralFreeEnergy::new(map, phi, psi, grid)?;
    let (curve, t_max) = domain_curve(&fe)?;
    let (lo, hi) = curve.slope_range();
    let m = var.mean;
    let c_max = (m - lo).min(hi - m);
    let (kept, excluded): (Vec<f64>, Vec<f64>) = c_grid.iter().partition(|&&c| c < c_max);
    let positive: Vec<f64> = kept.iter().copied().filter(|&c| c > 0.0).collect();
    let s: Vec<f64> = positive.iter().flat_map(|&c| [m - c, m + c]).collect();
    let rate = legendre(&fe, &curve, &s)?;
    let p = fe.base_pressure();
    let mut it = rate.i.chunks(2);
    let values =
        kept.iter().map(|&c| if c > 0.0 { it.next().map_or(p, |pair| p - pair[0].min(pair[1])) } else { p }).collect();
    Ok(MultifractalSpectrum {
        c_grid: kept,
        pressure_of_level_set: values,
        c_max,
        excluded,
        pressure: p,
        mean: m,
        t_max,
    })
}
