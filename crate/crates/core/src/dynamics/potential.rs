use std::fmt;
use std::sync::Arc;

use crate::dynamics::{CircleDynamics, CircleMap, TrigPoly};

/// A smooth real function on the circle with a computable derivative.
pub trait Observable: Send + Sync + fmt::Debug {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
}

impl Observable for TrigPoly {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        // allocation-free derivative of the series
        let k_max = self.bandwidth();
        if k_max == 0 {
            return 0.0;
        }
        let (a, b) = (self.cos_coeffs(), self.sin_coeffs());
        let (s1, c1) = (std::f64::consts::TAU * x).sin_cos();
        let (mut s, mut c) = (s1, c1);
        let mut acc = 0.0;
        for k in 0..k_max {
            acc += std::f64::consts::TAU * (k + 1) as f64 * (b[k] * c - a[k] * s);
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
        }
        acc
    }
}

/// `log f'(x)`; for circle maps this is also `log|det Df|` and
/// `log ‖Df⁻¹‖⁻¹`.
#[derive(Debug, Clone)]
pub struct LogDerivative {
    pub map: CircleMap,
}

impl Observable for LogDerivative {
    fn value(&self, x: f64) -> f64 {
        self.map.derivative(x).ln()
    }

    fn derivative(&self, x: f64) -> f64 {
        self.map.second_derivative(x) / self.map.derivative(x)
    }
}

/// `H'(x) / f'(x)`, the ε-derivative of `log f'_ε` along the family `g + εH`.
#[derive(Debug, Clone)]
pub struct DerivativeRatio {
    pub map: CircleMap,
    pub direction: TrigPoly,
}

impl Observable for DerivativeRatio {
    fn value(&self, x: f64) -> f64 {
        Observable::derivative(&self.direction, x) / self.map.derivative(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        let dh = Observable::derivative(&self.direction, x);
        let ddh = self.direction.derivative().derivative().eval(x);
        let df = self.map.derivative(x);
        (ddh * df - dh * self.map.second_derivative(x)) / (df * df)
    }
}

/// `u∘f − u`.
#[derive(Debug, Clone)]
pub struct Coboundary {
    pub map: CircleMap,
    pub transfer: TrigPoly,
}

impl Observable for Coboundary {
    fn value(&self, x: f64) -> f64 {
        self.transfer.eval(self.map.eval(x)) - self.transfer.eval(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        Observable::derivative(&self.transfer, self.map.eval(x)) * self.map.derivative(x)
            - Observable::derivative(&self.transfer, x)
    }
}

/// `S_nψ = Σ_{j<n} ψ∘f^j`, used as the potential of an iterated map.
#[derive(Debug, Clone)]
pub struct BirkhoffSum {
    pub map: CircleMap,
    pub inner: Potential,
    pub iterations: usize,
}

impl Observable for BirkhoffSum {
    fn value(&self, x: f64) -> f64 {
        self.map.birkhoff_sum(&self.inner, x, self.iterations)
    }

    fn derivative(&self, x: f64) -> f64 {
        let mut y = x;
        let mut jac = 1.0;
        let mut acc = 0.0;
        for _ in 0..self.iterations {
            acc += self.inner.derivative(y) * jac;
            jac *= self.map.derivative(y);
            y = self.map.eval(y);
        }
        acc
    }
}

/// Linear combination of a trigonometric polynomial and arbitrary
/// observables. Potentials, observables and perturbation directions that
/// are not trigonometric polynomials (e.g. `−log f'`) are expressed this way.
#[derive(Debug, Clone, Default)]
pub struct Potential {
    trig: TrigPoly,
    terms: Vec<(f64, Arc<dyn Observable>)>,
}

impl Potential {
    pub fn zero() -> Self {
        Potential::default()
    }

    pub fn constant(c: f64) -> Self {
        TrigPoly::constant(c).into()
    }

    /// `coeff · log f'`.
    pub fn log_derivative(map: &CircleMap, coeff: f64) -> Self {
        Potential::zero().with_term(coeff, LogDerivative { map: map.clone() })
    }

    /// The geometric potential `−log f'`.
    pub fn neg_log_derivative(map: &CircleMap) -> Self {
        Potential::log_derivative(map, -1.0)
    }

    pub fn with_term<O: Observable + 'static>(mut self, coeff: f64, obs: O) -> Self {
        if coeff != 0.0 {
            self.terms.push((coeff, Arc::new(obs)));
        }
        self
    }

    pub fn trig(&self) -> &TrigPoly {
        &self.trig
    }

    /// True when the potential is a pure trigonometric polynomial.
    pub fn is_trig(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.is_trig() && self.trig.is_constant()
    }

    pub fn scaled(&self, s: f64) -> Potential {
        Potential {
            trig: self.trig.scaled(s),
            terms: self.terms.iter().filter(|_| s != 0.0).map(|(c, o)| (c * s, o.clone())).collect(),
        }
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, s: f64, other: &Potential) -> Potential {
        let mut terms = self.terms.clone();
        if s != 0.0 {
            terms.extend(other.terms.iter().map(|(c, o)| (c * s, o.clone())));
        }
        Potential { trig: self.trig.add_scaled(s, &other.trig), terms }
    }

    pub fn add(&self, other: &Potential) -> Potential {
        self.add_scaled(1.0, other)
    }

    /// Sup of `|φ'|` sampled on `points` equispaced points (exact coefficient
    /// bound when the potential is a single trigonometric mode).
    pub fn derivative_sup(&self, points: usize) -> f64 {
        (0..points).map(|k| self.derivative(k as f64 / points as f64).abs()).fold(0.0, f64::max)
    }
}

impl Observable for Potential {
    fn value(&self, x: f64) -> f64 {
        self.trig.eval(x) + self.terms.iter().map(|(c, o)| c * o.value(x)).sum::<f64>()
    }

    fn derivative(&self, x: f64) -> f64 {
        Observable::derivative(&self.trig, x) + self.terms.iter().map(|(c, o)| c * o.derivative(x)).sum::<f64>()
    }
}

impl From<TrigPoly> for Potential {
    fn from(trig: TrigPoly) -> Self {
        Potential { trig, terms: Vec::new() }
    }
}

impl From<&TrigPoly> for Potential {
    fn from(trig: &TrigPoly) -> Self {
        trig.clone().into()
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.trig)?;
        for (c, o) in &self.terms {
            write!(f, " + {c}·{o:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd<O: Observable + ?Sized>(o: &O, x: f64) -> f64 {
        let h = 1e-6;
        (o.value(x + h) - o.value(x - h)) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let map = CircleMap::new(2, TrigPoly::sin_mode(1, 0.1)).unwrap();
        let dir = TrigPoly::new(0.0, vec![0.2], vec![0.1, 0.3]);
        let obs: Vec<Box<dyn Observable>> = vec![
            Box::new(dir.clone()),
            Box::new(LogDerivative { map: map.clone() }),
            Box::new(DerivativeRatio { map: map.clone(), direction: dir.clone() }),
            Box::new(Coboundary { map: map.clone(), transfer: dir.clone() }),
            Box::new(BirkhoffSum { map: map.clone(), inner: dir.clone().into(), iterations: 3 }),
            Box::new(Potential::neg_log_derivative(&map).add_scaled(0.5, &dir.into())),
        ];
        for o in &obs {
            for &x in &[0.05, 0.3, 0.61, 0.9] {
                let d = o.derivative(x);
                assert!((d - fd(o.as_ref(), x)).abs() < 1e-6 * (1.0 + d.abs()), "{o:?} at {x}");
            }
        }
    }

    #[test]
    fn potential_arithmetic() {
        let map = CircleMap::linear(2).unwrap();
        let phi = Potential::from(TrigPoly::cos_mode(1, 1.0));
        let psi = Potential::log_derivative(&map, 1.0);
        let s = phi.add_scaled(2.0, &psi);
        assert!((s.value(0.0) - (1.0 + 2.0 * 2f64.ln())).abs() < 1e-15);
        assert!((s.scaled(-1.0).value(0.0) + s.value(0.0)).abs() < 1e-15);
        assert!(phi.is_trig() && !s.is_trig());
        assert!(Potential::constant(3.0).is_constant());
    }
}
