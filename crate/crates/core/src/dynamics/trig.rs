use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Real trigonometric polynomial of period one,
/// `c + Σ_k a_k cos(2πkx) + b_k sin(2πkx)` for `k = 1..=K`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigPoly {
    constant: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigPoly {
    /// Builds a polynomial; the shorter coefficient list is zero-padded.
    pub fn new(constant: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        let mut p = TrigPoly { constant, cos, sin };
        let k = p.cos.len().max(p.sin.len());
        p.cos.resize(k, 0.0);
        p.sin.resize(k, 0.0);
        p
    }

    pub fn zero() -> Self {
        TrigPoly::default()
    }

    pub fn constant(c: f64) -> Self {
        TrigPoly::new(c, vec![], vec![])
    }

    /// `amplitude · cos(2π·k·x)`.
    pub fn cos_mode(k: usize, amplitude: f64) -> Self {
        assert!(k >= 1, "mode index starts at 1");
        let mut cos = vec![0.0; k];
        cos[k - 1] = amplitude;
        TrigPoly::new(0.0, cos, vec![])
    }

    /// `amplitude · sin(2π·k·x)`.
    pub fn sin_mode(k: usize, amplitude: f64) -> Self {
        assert!(k >= 1, "mode index starts at 1");
        let mut sin = vec![0.0; k];
        sin[k - 1] = amplitude;
        TrigPoly::new(0.0, vec![], sin)
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    /// Highest frequency index with a nonzero coefficient.
    pub fn bandwidth(&self) -> usize {
        (0..self.cos.len()).rev().find(|&i| self.cos[i] != 0.0 || self.sin[i] != 0.0).map_or(0, |i| i + 1)
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.bandwidth() == 0
    }

    pub fn is_constant(&self) -> bool {
        self.bandwidth() == 0
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k_max = self.bandwidth();
        if k_max == 0 {
            return self.constant;
        }
        let (s1, c1) = (TAU * x).sin_cos();
        let (mut s, mut c) = (s1, c1);
        let mut acc = self.constant;
        for k in 0..k_max {
            acc += self.cos[k] * c + self.sin[k] * s;
            // angle addition: (k+1)θ from kθ and θ
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
        }
        acc
    }

    /// Exact derivative; same bandwidth, zero constant.
    pub fn derivative(&self) -> TrigPoly {
        let k = self.cos.len();
        let mut cos = vec![0.0; k];
        let mut sin = vec![0.0; k];
        for i in 0..k {
            let w = TAU * (i + 1) as f64;
            cos[i] = w * self.sin[i];
            sin[i] = -w * self.cos[i];
        }
        TrigPoly { constant: 0.0, cos, sin }
    }

    /// Upper bound `|c| + Σ(|a_k| + |b_k|)` for the sup norm.
    pub fn sup_norm_bound(&self) -> f64 {
        self.constant.abs() + self.cos.iter().zip(&self.sin).map(|(a, b)| a.abs() + b.abs()).sum::<f64>()
    }

    /// Upper bound for `sup |p'|`, i.e. `Σ 2πk(|a_k| + |b_k|)`.
    pub fn derivative_sup_bound(&self) -> f64 {
        self.cos.iter().zip(&self.sin).enumerate().map(|(i, (a, b))| TAU * (i + 1) as f64 * (a.abs() + b.abs())).sum()
    }

    pub fn scaled(&self, s: f64) -> TrigPoly {
        TrigPoly {
            constant: s * self.constant,
            cos: self.cos.iter().map(|a| s * a).collect(),
            sin: self.sin.iter().map(|b| s * b).collect(),
        }
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, s: f64, other: &TrigPoly) -> TrigPoly {
        let k = self.cos.len().max(other.cos.len());
        let mut cos = self.cos.clone();
        let mut sin = self.sin.clone();
        cos.resize(k, 0.0);
        sin.resize(k, 0.0);
        for i in 0..other.cos.len() {
            cos[i] += s * other.cos[i];
            sin[i] += s * other.sin[i];
        }
        TrigPoly { constant: self.constant + s * other.constant, cos, sin }
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        self.add_scaled(1.0, other)
    }
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        for k in 0..self.bandwidth() {
            if self.cos[k] != 0.0 {
                write!(f, " + {}·cos(2π·{}x)", self.cos[k], k + 1)?;
            }
            if self.sin[k] != 0.0 {
                write!(f, " + {}·sin(2π·{}x)", self.sin[k], k + 1)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn evaluates_modes() {
        let p = TrigPoly::new(0.5, vec![1.0, 0.0, -2.0], vec![0.0, 3.0]);
        for &x in &[0.0, 0.1, 0.37, 0.9] {
            let expect = 0.5 + (TAU * x).cos() - 2.0 * (3.0 * TAU * x).cos() + 3.0 * (2.0 * TAU * x).sin();
            assert!((p.eval(x) - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = TrigPoly::new(0.1, vec![0.3, -0.2], vec![0.05, 0.4]);
        let dp = p.derivative();
        assert_eq!(dp.bandwidth(), p.bandwidth());
        let h = 1e-6;
        for &x in &[0.0, 0.21, 0.5, 0.77] {
            let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
            assert!((dp.eval(x) - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn bounds() {
        let p = TrigPoly::new(-1.0, vec![0.5], vec![0.0, -0.25]);
        assert_eq!(p.sup_norm_bound(), 1.75);
        assert!((p.derivative_sup_bound() - TAU * (0.5 + 2.0 * 0.25)).abs() < 1e-15);
        assert_eq!(TrigPoly::constant(3.0).bandwidth(), 0);
        assert!(TrigPoly::zero().is_zero());
    }

    proptest! {
        #[test]
        fn periodic(c in -1.0..1.0f64, a in prop::collection::vec(-1.0..1.0f64, 0..6),
                    b in prop::collection::vec(-1.0..1.0f64, 0..6), x in -3.0..3.0f64) {
            let p = TrigPoly::new(c, a, b);
            prop_assert!((p.eval(x) - p.eval(x + 1.0)).abs() < 1e-12);
            prop_assert!(p.eval(x).abs() <= p.sup_norm_bound() + 1e-12);
        }
    }
}
