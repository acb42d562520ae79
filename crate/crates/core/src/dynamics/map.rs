use std::fmt;

use crate::dynamics::{Observable, TrigPoly};
use crate::error::{Error, Result};

/// Points where the expansion is checked at construction.
pub const EXPANSION_CHECK_POINTS: usize = 4096;

const NEWTON_MAX_ITER: usize = 60;
const BISECTION_WIDTH: f64 = 1e-3;

/// Reduces `x` to `[0, 1)`; values within `1e-15` of 1 collapse to 0.
pub fn wrap(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 - 1e-15 {
        0.0
    } else {
        r
    }
}

/// Signed distance on the circle, in `[-1/2, 1/2)`.
pub fn circle_offset(x: f64) -> f64 {
    x - (x + 0.5).floor()
}

/// A preimage of a point together with the map derivative there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub point: f64,
    pub derivative: f64,
}

/// Anything that behaves like a smooth expanding self-cover of the circle.
pub trait CircleDynamics: Send + Sync {
    fn degree(&self) -> usize;

    fn eval(&self, x: f64) -> f64;

    /// Writes the preimages of `x` into `out`, ordered by increasing point.
    fn inverse_branches_into(&self, x: f64, out: &mut Vec<Branch>) -> Result<()>;

    fn inverse_branches(&self, x: f64) -> Result<Vec<Branch>> {
        let mut out = Vec::with_capacity(self.degree());
        self.inverse_branches_into(x, &mut out)?;
        Ok(out)
    }

    /// Lower bound on the derivative.
    fn expansion(&self) -> f64;

    fn label(&self) -> String;
}

/// `f(x) = d·x + g(x) mod 1` with `f' > 1` everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleMap {
    degree: u32,
    perturbation: TrigPoly,
    sigma: f64,
    max_derivative: f64,
    g0: f64,
    dg: TrigPoly,
    ddg: TrigPoly,
}

impl CircleMap {
    /// Validates expansion on a 4096-point grid (with a second-derivative
    /// cell correction) and through the coefficient bound; `sigma` is the
    /// larger of the two certified lower bounds.
    pub fn new(degree: u32, perturbation: TrigPoly) -> Result<Self> {
        if degree < 2 {
            return Err(Error::NotExpanding(format!("degree {degree} < 2")));
        }
        let d = degree as f64;
        let dg = perturbation.derivative();
        let grid_min = (0..EXPANSION_CHECK_POINTS)
            .map(|k| d + dg.eval(k as f64 / EXPANSION_CHECK_POINTS as f64))
            .fold(f64::INFINITY, f64::min);
        if !(grid_min > 1.0) {
            return Err(Error::NotExpanding(format!("min f' on the check grid is {grid_min}")));
        }
        let coefficient_bound = d - perturbation.derivative_sup_bound();
        let cell_bound = grid_min - 0.5 / EXPANSION_CHECK_POINTS as f64 * dg.derivative_sup_bound();
        let sigma = coefficient_bound.max(cell_bound);
        if !(sigma > 1.0) {
            return Err(Error::NotExpanding(format!("certified expansion bound {sigma} does not exceed 1")));
        }
        let g0 = perturbation.eval(0.0);
        let ddg = dg.derivative();
        Ok(CircleMap {
            degree,
            max_derivative: d + perturbation.derivative_sup_bound(),
            perturbation,
            sigma,
            g0,
            dg,
            ddg,
        })
    }

    /// `x ↦ d·x mod 1`.
    pub fn linear(degree: u32) -> Result<Self> {
        CircleMap::new(degree, TrigPoly::zero())
    }

    pub fn degree_u32(&self) -> u32 {
        self.degree
    }

    pub fn perturbation(&self) -> &TrigPoly {
        &self.perturbation
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The lift `F(y) = d·y + g(y)` on the real line.
    pub fn lift(&self, y: f64) -> f64 {
        self.degree as f64 * y + self.perturbation.eval(y)
    }

    pub fn derivative(&self, y: f64) -> f64 {
        self.degree as f64 + self.dg.eval(y)
    }

    pub fn second_derivative(&self, y: f64) -> f64 {
        self.ddg.eval(y)
    }

    fn lift_and_derivative(&self, y: f64) -> (f64, f64) {
        let (g, dg) = eval_with_derivative(&self.perturbation, y);
        (self.degree as f64 * y + g, self.degree as f64 + dg)
    }

    /// Solves `F(y) = z` on the real line: bisection inside the bracket
    /// given by the derivative bounds down to width 1e-3, then Newton.
    pub fn lift_inverse(&self, z: f64) -> Result<f64> {
        let d = self.degree as f64;
        if self.perturbation.is_zero() {
            return Ok(z / d);
        }
        let u = z - self.g0;
        let (mut lo, mut hi) = if u >= 0.0 {
            (u / self.max_derivative, u / self.sigma)
        } else {
            (u / self.sigma, u / self.max_derivative)
        };
        let pad = 1e-12 * (1.0 + u.abs());
        lo -= pad;
        hi += pad;
        let mut iterations = 0;
        while hi - lo > BISECTION_WIDTH {
            let mid = 0.5 * (lo + hi);
            if self.lift(mid) < z {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
        }
        let mut y = 0.5 * (lo + hi);
        for _ in 0..NEWTON_MAX_ITER {
            let (fy, dfy) = self.lift_and_derivative(y);
            let step = (fy - z) / dfy;
            y -= step;
            if step.abs() <= 4.0 * f64::EPSILON * (1.0 + y.abs()) {
                return Ok(y);
            }
        }
        Err(Error::NewtonDivergence { target: z, iterations: iterations + NEWTON_MAX_ITER })
    }

    /// Derivative in ε at ε = 0 of each inverse branch of `g + εH` at `x`:
    /// `t_j = −H(f_j x) / f'(f_j x)`.
    pub fn branch_response(&self, direction: &TrigPoly, x: f64) -> Result<Vec<f64>> {
        Ok(self.inverse_branches(x)?.iter().map(|b| -direction.eval(b.point) / b.derivative).collect())
    }

    /// `Σ_{j<n} ψ(f^j x)`.
    pub fn birkhoff_sum<O: Observable + ?Sized>(&self, psi: &O, x: f64, n: usize) -> f64 {
        let mut y = wrap(x);
        let mut acc = 0.0;
        for _ in 0..n {
            acc += psi.value(y);
            y = self.eval(y);
        }
        acc
    }

    /// `f` perturbed by `eps · direction`.
    pub fn perturbed(&self, direction: &TrigPoly, eps: f64) -> Result<CircleMap> {
        if eps == 0.0 {
            return Ok(self.clone());
        }
        CircleMap::new(self.degree, self.perturbation.add_scaled(eps, direction))
    }
}

fn eval_with_derivative(p: &TrigPoly, x: f64) -> (f64, f64) {
    let k_max = p.bandwidth();
    if k_max == 0 {
        return (p.constant_term(), 0.0);
    }
    let (a, b) = (p.cos_coeffs(), p.sin_coeffs());
    let (s1, c1) = (std::f64::consts::TAU * x).sin_cos();
    let (mut s, mut c) = (s1, c1);
    let mut v = p.constant_term();
    let mut dv = 0.0;
    for k in 0..k_max {
        let w = std::f64::consts::TAU * (k + 1) as f64;
        v += a[k] * c + b[k] * s;
        dv += w * (b[k] * c - a[k] * s);
        let cn = c * c1 - s * s1;
        s = s * c1 + c * s1;
        c = cn;
    }
    (v, dv)
}

impl CircleDynamics for CircleMap {
    fn degree(&self) -> usize {
        self.degree as usize
    }

    fn eval(&self, x: f64) -> f64 {
        wrap(self.lift(wrap(x)))
    }

    fn inverse_branches_into(&self, x: f64, out: &mut Vec<Branch>) -> Result<()> {
        out.clear();
        let x = wrap(x);
        let m0 = (self.g0 - x).ceil();
        let mut wrapped = false;
        for j in 0..self.degree {
            let y = self.lift_inverse(x + m0 + j as f64)?;
            let point = wrap(y);
            wrapped |= point < y - 0.5;
            out.push(Branch { point, derivative: self.derivative(point) });
        }
        if wrapped {
            out.sort_by(|a, b| a.point.total_cmp(&b.point));
        }
        Ok(())
    }

    fn expansion(&self) -> f64 {
        self.sigma
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CircleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.perturbation.is_zero() {
            write!(f, "{}x", self.degree)
        } else {
            write!(f, "{}x + [{}]", self.degree, self.perturbation)
        }
    }
}

/// The n-th iterate of a circle map, with preimages obtained by composing
/// inverse branches.
#[derive(Debug, Clone)]
pub struct IteratedMap {
    map: CircleMap,
    iterations: u32,
}

impl IteratedMap {
    pub fn new(map: CircleMap, iterations: u32) -> Self {
        assert!(iterations >= 1);
        IteratedMap { map, iterations }
    }
}

impl CircleDynamics for IteratedMap {
    fn degree(&self) -> usize {
        (self.map.degree as usize).pow(self.iterations)
    }

    fn eval(&self, x: f64) -> f64 {
        (0..self.iterations).fold(wrap(x), |y, _| self.map.eval(y))
    }

    fn inverse_branches_into(&self, x: f64, out: &mut Vec<Branch>) -> Result<()> {
        out.clear();
        out.push(Branch { point: wrap(x), derivative: 1.0 });
        let mut level = Vec::new();
        let mut scratch = Vec::new();
        for _ in 0..self.iterations {
            level.clear();
            for b in out.iter() {
                self.map.inverse_branches_into(b.point, &mut scratch)?;
                level
                    .extend(scratch.iter().map(|c| Branch { point: c.point, derivative: c.derivative * b.derivative }));
            }
            std::mem::swap(out, &mut level);
        }
        out.sort_by(|a, b| a.point.total_cmp(&b.point));
        Ok(())
    }

    fn expansion(&self) -> f64 {
        self.map.sigma.powi(self.iterations as i32)
    }

    fn label(&self) -> String {
        format!("({})^{}", self.map, self.iterations)
    }
}

/// One-parameter family `g + εH` through a base map.
#[derive(Debug, Clone)]
pub struct MapFamily {
    base: CircleMap,
    direction: TrigPoly,
    eps_max: f64,
}

impl MapFamily {
    pub fn new(base: CircleMap, direction: TrigPoly) -> Self {
        let slope = direction.derivative_sup_bound();
        let eps_max = if slope == 0.0 { f64::INFINITY } else { (base.sigma - 1.0) / slope * (1.0 - 1e-9) };
        MapFamily { base, direction, eps_max }
    }

    /// Every member with `|ε| ≤ eps_max` is expanding.
    pub fn eps_max(&self) -> f64 {
        self.eps_max
    }

    pub fn base(&self) -> &CircleMap {
        &self.base
    }

    pub fn direction(&self) -> &TrigPoly {
        &self.direction
    }

    pub fn at(&self, eps: f64) -> Result<CircleMap> {
        self.base.perturbed(&self.direction, eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine_map(amp: f64) -> CircleMap {
        CircleMap::new(2, TrigPoly::sin_mode(1, amp)).unwrap()
    }

    #[test]
    fn eval_examples() {
        let doubling = CircleMap::linear(2).unwrap();
        assert!((doubling.eval(0.3) - 0.6).abs() < 1e-15);
        assert_eq!(doubling.eval(0.75), 0.5);
        assert!((sine_map(0.1).eval(0.25) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_expanding() {
        assert!(matches!(CircleMap::linear(1), Err(Error::NotExpanding(_))));
        // f' = 2 + 2π·0.2 cos dips below 1
        assert!(matches!(CircleMap::new(2, TrigPoly::sin_mode(1, 0.2)), Err(Error::NotExpanding(_))));
        assert!(CircleMap::new(2, TrigPoly::sin_mode(1, 0.15)).is_ok());
    }

    #[test]
    fn sigma_bounds() {
        let f = sine_map(0.1);
        let inf = 2.0 - 0.2 * std::f64::consts::PI;
        assert!(f.sigma() <= inf + 1e-12);
        assert!(f.sigma() > inf - 1e-6);
        assert_eq!(CircleMap::linear(3).unwrap().sigma(), 3.0);
    }

    #[test]
    fn doubling_branches() {
        let f = CircleMap::linear(2).unwrap();
        let b = f.inverse_branches(0.5).unwrap();
        assert_eq!(b, vec![Branch { point: 0.25, derivative: 2.0 }, Branch { point: 0.75, derivative: 2.0 }]);
        let b = f.inverse_branches(0.0).unwrap();
        assert_eq!(b[0].point, 0.0);
        assert_eq!(b[1].point, 0.5);
    }

    /// Root of `F(y) = target` by plain bisection on a monotone bracket.
    fn bisect(f: &CircleMap, target: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f.lift(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn perturbed_branches_match_bisection() {
        let f = sine_map(0.1);
        let b = f.inverse_branches(0.6).unwrap();
        assert_eq!(b.len(), 2);
        // the lift is increasing with F(0) = 0 and F(1) = 2
        let y0 = bisect(&f, 0.6, 0.0, 1.0);
        let y1 = bisect(&f, 1.6, 0.0, 1.0);
        assert!((b[0].point - y0).abs() < 1e-13);
        assert!((b[1].point - y1).abs() < 1e-13);
        for br in &b {
            assert!((br.derivative - f.derivative(br.point)).abs() < 1e-12);
            assert!(br.derivative > 1.0);
        }
    }

    #[test]
    fn branches_round_trip_on_a_grid() {
        for f in
            [sine_map(0.1), sine_map(0.14), CircleMap::new(3, TrigPoly::new(0.3, vec![0.1], vec![0.0, 0.05])).unwrap()]
        {
            for k in 0..500 {
                let x = k as f64 / 500.0;
                let b = f.inverse_branches(x).unwrap();
                assert_eq!(b.len(), f.degree());
                for w in b.windows(2) {
                    assert!(w[0].point < w[1].point);
                }
                for br in &b {
                    let r = circle_offset(f.eval(br.point) - x).abs();
                    assert!(r <= 1e-12, "residual {r} at x={x}");
                }
            }
        }
    }

    #[test]
    fn branch_response_examples() {
        let f = CircleMap::linear(2).unwrap();
        let t = f.branch_response(&TrigPoly::sin_mode(1, 1.0), 0.5).unwrap();
        assert!((t[0] + 0.5).abs() < 1e-15 && (t[1] - 0.5).abs() < 1e-15);
        assert_eq!(f.branch_response(&TrigPoly::zero(), 0.3).unwrap(), vec![-0.0, -0.0]);
        let t = f.branch_response(&TrigPoly::constant(1.0), 0.5).unwrap();
        assert_eq!(t, vec![-0.5, -0.5]);
    }

    #[test]
    fn branch_response_matches_finite_differences() {
        let h = TrigPoly::new(0.2, vec![0.3], vec![0.1, -0.2]);
        for base in [CircleMap::linear(2).unwrap(), sine_map(0.1)] {
            let family = MapFamily::new(base.clone(), h.clone());
            let delta = 1e-5;
            let plus = family.at(delta).unwrap();
            let minus = family.at(-delta).unwrap();
            for k in 0..64 {
                let x = k as f64 / 64.0;
                let t = base.branch_response(&h, x).unwrap();
                let bp = plus.inverse_branches(x).unwrap();
                let bm = minus.inverse_branches(x).unwrap();
                let b0 = base.inverse_branches(x).unwrap();
                // pair branches by proximity, not index: a branch may wrap past 0
                let nearest = |bs: &[Branch], y: f64| {
                    bs.iter()
                        .map(|b| b.point)
                        .min_by(|a, b| circle_offset(a - y).abs().total_cmp(&circle_offset(b - y).abs()))
                        .unwrap()
                };
                for j in 0..2 {
                    let y = b0[j].point;
                    let fd = circle_offset(nearest(&bp, y) - nearest(&bm, y)) / (2.0 * delta);
                    assert!((fd - t[j]).abs() < 1e-6, "x={x} j={j}: {fd} vs {}", t[j]);
                }
            }
        }
    }

    #[test]
    fn birkhoff_examples() {
        let f = CircleMap::linear(2).unwrap();
        assert_eq!(f.birkhoff_sum(&TrigPoly::constant(1.0), 0.2, 5), 5.0);
        let c = TrigPoly::cos_mode(1, 1.0);
        assert_eq!(f.birkhoff_sum(&c, 0.0, 3), 3.0);
        assert!((f.birkhoff_sum(&c, 1.0 / 3.0, 2) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn birkhoff_cocycle() {
        let f = sine_map(0.1);
        let psi = TrigPoly::new(0.1, vec![0.5, 0.2], vec![0.3]);
        for &x in &[0.1, 0.33, 0.8] {
            for (n, m) in [(3, 4), (1, 7), (5, 5)] {
                let whole = f.birkhoff_sum(&psi, x, n + m);
                let y = (0..n).fold(x, |y, _| f.eval(y));
                let split = f.birkhoff_sum(&psi, x, n) + f.birkhoff_sum(&psi, y, m);
                assert!((whole - split).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn family_basics() {
        let base = CircleMap::linear(2).unwrap();
        let fam = MapFamily::new(base.clone(), TrigPoly::sin_mode(1, 1.0));
        assert_eq!(fam.at(0.0).unwrap(), base);
        assert!((fam.eps_max() - 1.0 / std::f64::consts::TAU).abs() < 1e-9);
        assert!(fam.at(0.99 * fam.eps_max()).is_ok());
        assert!(fam.at(-0.99 * fam.eps_max()).is_ok());
    }

    #[test]
    fn iterated_map_branches() {
        let f = sine_map(0.1);
        let f2 = IteratedMap::new(f.clone(), 2);
        let b = f2.inverse_branches(0.37).unwrap();
        assert_eq!(b.len(), 4);
        for br in &b {
            assert!(circle_offset(f.eval(f.eval(br.point)) - 0.37).abs() < 1e-12);
            let expect = f.derivative(br.point) * f.derivative(f.eval(br.point));
            assert!((br.derivative - expect).abs() < 1e-11);
        }
    }
}
