//! Pressure, equilibrium measures, entropy and Lyapunov exponents.
//!
//! `log|det Df|` and `log‖Df⁻¹‖⁻¹` coincide with `log f'` on the circle, so
//! only [`LogDerivative`] is provided.

use rayon::prelude::*;

use crate::dynamics::{periodic_birkhoff_sums, CircleDynamics, CircleMap, LogDerivative, Observable, Potential};
use crate::error::{Error, Result};
use crate::operator::{Grid, GridFunction};
use crate::spectral::{solve, SpectralTriple};

/// `P(f, φ) = log λ`.
pub fn pressure<M, P>(map: &M, phi: &P, grid: Grid) -> Result<f64>
where
    M: CircleDynamics + ?Sized,
    P: Observable + ?Sized,
{
    Ok(solve(map, phi, grid)?.pressure)
}

/// `μ = hν` on the grid.
#[derive(Debug, Clone)]
pub struct EquilibriumMeasure {
    pub triple: SpectralTriple,
    pub weights: Vec<f64>,
}

impl EquilibriumMeasure {
    pub fn new(triple: SpectralTriple) -> Self {
        let mut weights = triple.mu();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        EquilibriumMeasure { triple, weights }
    }

    pub fn grid(&self) -> Grid {
        self.triple.grid()
    }

    pub fn pressure(&self) -> f64 {
        self.triple.pressure
    }

    /// `Σ μ_k g_k`.
    pub fn integrate(&self, g: &GridFunction) -> Result<f64> {
        if g.grid() != self.grid() {
            return Err(Error::DimensionMismatch { expected: self.grid().len(), found: g.grid().len() });
        }
        Ok(self.dot(g.values()))
    }

    pub fn integrate_fn(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.grid().nodes().zip(&self.weights).map(|(x, w)| w * g(x)).sum()
    }

    pub fn integrate_obs<O: Observable + ?Sized>(&self, g: &O) -> f64 {
        self.integrate_fn(|x| g.value(x))
    }

    fn dot(&self, v: &[f64]) -> f64 {
        self.weights.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// `|∫ g∘f dμ − ∫ g dμ|`.
    pub fn invariance_residual<M, O>(&self, map: &M, g: &O) -> f64
    where
        M: CircleDynamics + ?Sized,
        O: Observable + ?Sized,
    {
        (self.integrate_fn(|x| g.value(map.eval(x))) - self.integrate_obs(g)).abs()
    }

    /// `h_μ(f) = P − ∫φ dμ`.
    pub fn entropy<P: Observable + ?Sized>(&self, phi: &P) -> f64 {
        self.pressure() - self.integrate_obs(phi)
    }

    /// `∫ log f' dμ`.
    pub fn lyapunov_exponent(&self, map: &CircleMap) -> f64 {
        self.integrate_fn(|x| map.derivative(x).ln())
    }
}

pub fn equilibrium_measure<M, P>(map: &M, phi: &P, grid: Grid) -> Result<EquilibriumMeasure>
where
    M: CircleDynamics + ?Sized,
    P: Observable + ?Sized,
{
    Ok(EquilibriumMeasure::new(solve(map, phi, grid)?))
}

pub fn integrate(mu: &EquilibriumMeasure, g: &GridFunction) -> Result<f64> {
    mu.integrate(g)
}

pub fn entropy<P: Observable + ?Sized>(map: &CircleMap, phi: &P, grid: Grid) -> Result<f64> {
    Ok(equilibrium_measure(map, phi, grid)?.entropy(phi))
}

pub fn lyapunov_exponent<P: Observable + ?Sized>(map: &CircleMap, phi: &P, grid: Grid) -> Result<f64> {
    Ok(equilibrium_measure(map, phi, grid)?.lyapunov_exponent(map))
}

/// `(1/n) log Σ_{fⁿp = p} e^{S_nφ(p)}`.
pub fn periodic_orbit_pressure<P: Observable + ?Sized>(map: &CircleMap, phi: &P, n: usize) -> Result<f64> {
    let sums = periodic_birkhoff_sums(map, phi, n)?;
    let top = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = sums.iter().map(|s| (s - top).exp()).sum();
    Ok((top + total.ln()) / n as f64)
}

/// One row of a pressure sweep `t ↦ P(f, t·φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub t: f64,
    pub pressure: f64,
    pub entropy: f64,
    pub lyapunov: f64,
    pub gap_ratio: f64,
}

/// Pressure, entropy, Lyapunov exponent and gap along `t ↦ t·φ`.
pub fn pressure_sweep(map: &CircleMap, phi: &Potential, t_grid: &[f64], grid: Grid) -> Result<Vec<SweepPoint>> {
    t_grid
        .par_iter()
        .map(|&t| {
            let pot = phi.scaled(t);
            let mu = equilibrium_measure(map, &pot, grid)?;
            Ok(SweepPoint {
                t,
                pressure: mu.pressure(),
                entropy: mu.entropy(&pot),
                lyapunov: mu.lyapunov_exponent(map),
                gap_ratio: mu.triple.gap_ratio,
            })
        })
        .collect()
}

/// The geometric sweep `t ↦ P(f, t·log f')`.
pub fn geometric_pressure_sweep(map: &CircleMap, t_grid: &[f64], grid: Grid) -> Result<Vec<SweepPoint>> {
    let phi = Potential::zero().with_term(1.0, LogDerivative { map: map.clone() });
    pressure_sweep(map, &phi, t_grid, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{BirkhoffSum, IteratedMap, TrigPoly};
    use crate::operator::assemble_transfer;
    use std::f64::consts::{LN_2, TAU};

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn doubling() -> CircleMap {
        CircleMap::linear(2).unwrap()
    }

    fn sine_map(a: f64) -> CircleMap {
        CircleMap::new(2, TrigPoly::sin_mode(1, a)).unwrap()
    }

    #[test]
    fn pressure_examples() {
        assert!((pressure(&doubling(), &Potential::zero(), grid(64)).unwrap() - LN_2).abs() < 1e-12);
        let c = 0.7;
        assert!((pressure(&doubling(), &Potential::constant(c), grid(64)).unwrap() - LN_2 - c).abs() < 1e-12);
        let f = sine_map(0.1);
        assert!(pressure(&f, &Potential::neg_log_derivative(&f), grid(128)).unwrap().abs() < 1e-9);
    }

    #[test]
    fn acip_oracle_column_sums() {
        // Lebesgue is the left eigenvector of L_{−log f'}: ∫L g = ∫g
        let f = sine_map(0.1);
        let tm = assemble_transfer(&f, &Potential::neg_log_derivative(&f), grid(128)).unwrap();
        assert!(tm.column_sums().iter().all(|s| (s - 1.0).abs() < 1e-10));
    }

    #[test]
    fn translation_and_monotonicity() {
        let f = sine_map(0.08);
        let phi: Potential = TrigPoly::new(0.0, vec![0.5], vec![0.2]).into();
        let p = pressure(&f, &phi, grid(96)).unwrap();
        for c in [-1.0, 0.5, 2.0] {
            let pc = pressure(&f, &phi.add(&Potential::constant(c)), grid(96)).unwrap();
            assert!((pc - p - c).abs() < 1e-12);
        }
        let bigger = phi.add(&TrigPoly::new(0.3, vec![0.1], vec![]).into());
        assert!(pressure(&f, &bigger, grid(96)).unwrap() >= p);
    }

    #[test]
    fn iteration_consistency() {
        let f = sine_map(0.1);
        let phi: Potential = TrigPoly::cos_mode(1, 0.6).into();
        let p = pressure(&f, &phi, grid(128)).unwrap();
        let f2 = IteratedMap::new(f.clone(), 2);
        let s2 = BirkhoffSum { map: f.clone(), inner: phi.clone(), iterations: 2 };
        let p2 = pressure(&f2, &s2, grid(128)).unwrap();
        assert!((p2 - 2.0 * p).abs() < 1e-9, "{p2} vs {}", 2.0 * p);
    }

    #[test]
    fn integration_examples() {
        let mu = equilibrium_measure(&doubling(), &Potential::zero(), grid(64)).unwrap();
        assert!((mu.integrate(&GridFunction::constant(grid(64), 1.0)).unwrap() - 1.0).abs() < 1e-14);
        let c = GridFunction::from_fn(grid(64), |x| (TAU * x).cos());
        assert!(mu.integrate(&c).unwrap().abs() < 1e-12);
        let c2 = GridFunction::from_fn(grid(64), |x| (TAU * x).cos().powi(2));
        assert!((integrate(&mu, &c2).unwrap() - 0.5).abs() < 1e-12);
        assert!(mu.integrate(&GridFunction::constant(grid(32), 1.0)).is_err());
    }

    #[test]
    fn equilibrium_invariance() {
        let f = sine_map(0.1);
        let cases: Vec<Potential> =
            vec![Potential::zero(), TrigPoly::cos_mode(1, 1.0).into(), Potential::neg_log_derivative(&f)];
        for phi in &cases {
            let mu = equilibrium_measure(&f, phi, grid(128)).unwrap();
            assert!((mu.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for g in [TrigPoly::cos_mode(1, 1.0), TrigPoly::sin_mode(1, 1.0), TrigPoly::cos_mode(2, 1.0)] {
                let r = mu.invariance_residual(&f, &g);
                assert!(r <= 1e-9, "{phi}: {r}");
            }
        }
    }

    #[test]
    fn entropy_and_lyapunov_examples() {
        let g = grid(64);
        assert!((entropy(&doubling(), &Potential::zero(), g).unwrap() - LN_2).abs() < 1e-12);
        assert!((entropy(&doubling(), &Potential::constant(-LN_2), g).unwrap() - LN_2).abs() < 1e-12);
        let phi: Potential = TrigPoly::cos_mode(1, 1.0).into();
        let h = entropy(&doubling(), &phi, grid(128)).unwrap();
        assert!((-1e-9..=LN_2 + 1e-12).contains(&h));
        assert!((lyapunov_exponent(&doubling(), &phi, g).unwrap() - LN_2).abs() < 1e-12);
        let tripling = CircleMap::linear(3).unwrap();
        assert!((lyapunov_exponent(&tripling, &Potential::zero(), g).unwrap() - 3f64.ln()).abs() < 1e-12);
        let f = sine_map(0.1);
        let lyap = lyapunov_exponent(&f, &Potential::neg_log_derivative(&f), grid(128)).unwrap();
        assert!(lyap >= f.sigma().ln());
        // ACIP: entropy equals the Lyapunov exponent
        let h = entropy(&f, &Potential::neg_log_derivative(&f), grid(128)).unwrap();
        assert!((h - lyap).abs() < 1e-9);
    }

    #[test]
    fn periodic_orbit_pressure_examples() {
        let f = doubling();
        let p = periodic_orbit_pressure(&f, &Potential::zero(), 5).unwrap();
        assert!((p - 31f64.ln() / 5.0).abs() < 1e-14);
        let p = periodic_orbit_pressure(&f, &Potential::constant(-LN_2), 5).unwrap();
        assert!((p - (31.0f64 / 32.0).ln() / 5.0).abs() < 1e-14);
        let p = periodic_orbit_pressure(&f, &Potential::zero(), 18).unwrap();
        assert!((p - LN_2).abs() < 1e-4);
    }

    #[test]
    fn sweeps() {
        let ts = [0.0, 0.5, 1.0];
        let rows = geometric_pressure_sweep(&sine_map(0.1), &[-1.0, 0.0], grid(64)).unwrap();
        assert!(rows[0].pressure.abs() < 1e-9);
        assert!((rows[1].pressure - LN_2).abs() < 1e-12);
        let rows = pressure_sweep(&doubling(), &TrigPoly::cos_mode(1, 1.0).into(), &ts, grid(64)).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.windows(2).all(|w| w[1].pressure >= w[0].pressure));
        assert!(rows.iter().all(|r| r.gap_ratio < 1.0 && r.entropy >= -1e-9));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(8))]
            #[test]
            fn constant_shift(c in -3.0..3.0f64, a in -1.0..1.0f64, eps in 0.0..0.1f64) {
                let f = CircleMap::new(2, TrigPoly::sin_mode(1, eps)).unwrap();
                let phi: Potential = TrigPoly::cos_mode(1, a).into();
                let g = Grid::new(64).unwrap();
                let p = pressure(&f, &phi, g).unwrap();
                let q = pressure(&f, &phi.add(&Potential::constant(c)), g).unwrap();
                prop_assert!((q - p - c).abs() <= 1e-12);
            }

            #[test]
            fn zero_potential_gives_log_degree(d in 2u32..5, eps in 0.0..0.05f64) {
                let f = CircleMap::new(d, TrigPoly::sin_mode(1, eps)).unwrap();
                let p = pressure(&f, &Potential::zero(), Grid::new(64).unwrap()).unwrap();
                prop_assert!((p - f64::from(d).ln()).abs() <= 1e-10);
            }
        }
    }
}
