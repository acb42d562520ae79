//! First-order response of pressure and equilibrium averages to
//! perturbations of the map and of the potential, with central
//! finite-difference oracles.

use crate::dynamics::{CircleDynamics, CircleMap, DerivativeRatio, MapFamily, Observable, Potential, TrigPoly};
use crate::error::{Error, Result};
use crate::operator::Grid;
use crate::spectral::{solve, SpectralTriple};
use crate::thermo::{equilibrium_measure, pressure, EquilibriumMeasure};

/// Central-difference step for the oracles.
pub const FD_STEP: f64 = 1e-5;
/// Step in `t` used to difference first-order formulas.
pub const MIXED_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseReport {
    pub formula_value: f64,
    pub fd_value: f64,
    pub fd_step: f64,
    pub discrepancy: f64,
}

impl ResponseReport {
    fn new(formula_value: f64, fd_value: f64, fd_step: f64) -> Self {
        ResponseReport { formula_value, fd_value, fd_step, discrepancy: (formula_value - fd_value).abs() }
    }
}

/// Where the branch response `t_j = −H₁/f'` is evaluated in the potential
/// term of the map derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// `t_j` at the preimage `f_j(x)` of the integration point `x`, as in
    /// the `Dh` term. Agrees with the finite-difference oracle.
    BasePoint,
    /// `t_j` at `f_j(f_j(x))`. Kept for the regression test only.
    Preimage,
}

fn family(map: &CircleMap, h1: &TrigPoly, step: f64) -> Result<MapFamily> {
    let fam = MapFamily::new(map.clone(), h1.clone());
    if fam.eps_max() < step {
        return Err(Error::FamilyNotExpanding { eps_max: fam.eps_max(), step });
    }
    Ok(fam)
}

/// `∫ H₂ dμ` against `[P(φ+δH₂) − P(φ−δH₂)]/(2δ)`.
pub fn pressure_derivative_potential(
    map: &CircleMap,
    phi: &Potential,
    h2: &Potential,
    grid: Grid,
) -> Result<ResponseReport> {
    let (mu, (plus, minus)) = rayon::join(
        || equilibrium_measure(map, phi, grid),
        || {
            rayon::join(
                || pressure(map, &phi.add_scaled(FD_STEP, h2), grid),
                || pressure(map, &phi.add_scaled(-FD_STEP, h2), grid),
            )
        },
    );
    let formula = mu?.integrate_obs(h2);
    Ok(ResponseReport::new(formula, (plus? - minus?) / (2.0 * FD_STEP), FD_STEP))
}

/// Map part of the pressure derivative evaluated from precomputed
/// eigendata:
/// `λ⁻¹ Σ_k ν_k Σ_j e^{φ(y_j)} [Dh(y_j) + h(y_j) Dφ(y_j)] t_j`, with `y_j`
/// the preimages of node `x_k` and `t_j` the branch response of `H₁`.
pub fn map_derivative_formula<P: Observable + ?Sized>(
    map: &CircleMap,
    phi: &P,
    triple: &SpectralTriple,
    h1: &TrigPoly,
    placement: Placement,
) -> Result<f64> {
    if h1.is_zero() {
        return Ok(0.0);
    }
    let h = &triple.h;
    let dh = h.differentiate();
    let mut branches = Vec::new();
    let mut total = 0.0;
    for (x, nu) in triple.grid().nodes().zip(&triple.nu) {
        map.inverse_branches_into(x, &mut branches)?;
        let mut row = 0.0;
        for (j, b) in branches.iter().enumerate() {
            let y = b.point;
            let shift = -h1.eval(y) / b.derivative;
            let weight = phi.value(y).exp();
            let t_pot = match placement {
                Placement::BasePoint => shift,
                Placement::Preimage => map.branch_response(h1, y)?[j],
            };
            row += weight * (dh.interpolate(y) * shift + h.interpolate(y) * phi.derivative(y) * t_pot);
        }
        total += nu * row;
    }
    Ok(total / triple.lambda)
}

/// Derivative of `ε ↦ P(f + εH₁, φ)` at `ε = 0` with `φ` held fixed.
pub fn pressure_derivative_map(map: &CircleMap, phi: &Potential, h1: &TrigPoly, grid: Grid) -> Result<ResponseReport> {
    pressure_derivative_map_with(map, phi, h1, grid, Placement::BasePoint)
}

pub fn pressure_derivative_map_with(
    map: &CircleMap,
    phi: &Potential,
    h1: &TrigPoly,
    grid: Grid,
    placement: Placement,
) -> Result<ResponseReport> {
    let fam = family(map, h1, FD_STEP)?;
    let (triple, (plus, minus)) = rayon::join(
        || solve(map, phi, grid),
        || {
            rayon::join(
                || fam.at(FD_STEP).and_then(|f| pressure(&f, phi, grid)),
                || fam.at(-FD_STEP).and_then(|f| pressure(&f, phi, grid)),
            )
        },
    );
    let formula = map_derivative_formula(map, phi, &triple?, h1, placement)?;
    Ok(ResponseReport::new(formula, (plus? - minus?) / (2.0 * FD_STEP), FD_STEP))
}

/// `−∂_ε log f'_ε = −H₁'/f'`.
pub fn log_derivative_direction(map: &CircleMap, h1: &TrigPoly) -> Potential {
    Potential::zero().with_term(-1.0, DerivativeRatio { map: map.clone(), direction: h1.clone() })
}

/// Decomposition of `d/dε P(f_ε, −log f'_ε)`, which vanishes identically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainRuleReport {
    pub map_term: f64,
    pub potential_term: f64,
    pub total: f64,
    /// Central difference of the full family.
    pub fd_total: f64,
}

pub fn acip_chain_rule(map: &CircleMap, h1: &TrigPoly, grid: Grid) -> Result<ChainRuleReport> {
    let fam = family(map, h1, FD_STEP)?;
    let phi = Potential::neg_log_derivative(map);
    let mu = equilibrium_measure(map, &phi, grid)?;
    let map_term = map_derivative_formula(map, &phi, &mu.triple, h1, Placement::BasePoint)?;
    let potential_term = mu.integrate_obs(&log_derivative_direction(map, h1));
    let acip = |eps: f64| -> Result<f64> {
        let f = fam.at(eps)?;
        pressure(&f, &Potential::neg_log_derivative(&f), grid)
    };
    let (plus, minus) = rayon::join(|| acip(FD_STEP), || acip(-FD_STEP));
    Ok(ChainRuleReport {
        map_term,
        potential_term,
        total: map_term + potential_term,
        fd_total: (plus? - minus?) / (2.0 * FD_STEP),
    })
}

/// Total first-order pressure response to `(H₁, H₂)` from eigendata.
fn total_response(
    map: &CircleMap,
    phi: &Potential,
    mu: &EquilibriumMeasure,
    h1: &TrigPoly,
    h2: &Potential,
) -> Result<f64> {
    Ok(map_derivative_formula(map, phi, &mu.triple, h1, Placement::BasePoint)? + mu.integrate_obs(h2))
}

/// Derivative of `ε ↦ ∫ψ dμ_{f+εH₁, φ+εH₂}` at `ε = 0`.
///
/// The formula value differences the first-order response in `t` along
/// `φ + tψ`; the oracle differences the integral along `ε`.
pub fn equilibrium_average_derivative(
    map: &CircleMap,
    phi: &Potential,
    psi: &Potential,
    h1: &TrigPoly,
    h2: &Potential,
    grid: Grid,
) -> Result<ResponseReport> {
    let fam = family(map, h1, FD_STEP)?;
    let response_at = |t: f64| -> Result<f64> {
        let pot = phi.add_scaled(t, psi);
        let mu = equilibrium_measure(map, &pot, grid)?;
        total_response(map, &pot, &mu, h1, h2)
    };
    let average_at = |eps: f64| -> Result<f64> {
        let f = fam.at(eps)?;
        Ok(equilibrium_measure(&f, &phi.add_scaled(eps, h2), grid)?.integrate_obs(psi))
    };
    let ((rp, rm), (ap, am)) = rayon::join(
        || rayon::join(|| response_at(MIXED_STEP), || response_at(-MIXED_STEP)),
        || rayon::join(|| average_at(FD_STEP), || average_at(-FD_STEP)),
    );
    let formula = (rp? - rm?) / (2.0 * MIXED_STEP);
    Ok(ResponseReport::new(formula, (ap? - am?) / (2.0 * FD_STEP), FD_STEP))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> Grid {
        Grid::new(128).unwrap()
    }

    fn doubling() -> CircleMap {
        CircleMap::linear(2).unwrap()
    }

    fn cos1() -> TrigPoly {
        TrigPoly::cos_mode(1, 1.0)
    }

    fn sin1() -> TrigPoly {
        TrigPoly::sin_mode(1, 1.0)
    }

    #[test]
    fn potential_derivative_examples() {
        let r = pressure_derivative_potential(&doubling(), &Potential::zero(), &cos1().into(), grid()).unwrap();
        assert!(r.formula_value.abs() < 1e-12);
        assert!(r.fd_value.abs() < 1e-8);
        let f = CircleMap::new(2, TrigPoly::sin_mode(1, 0.1)).unwrap();
        let r = pressure_derivative_potential(&f, &cos1().into(), &Potential::constant(1.0), grid()).unwrap();
        assert!((r.formula_value - 1.0).abs() < 1e-12);
        let r = pressure_derivative_potential(&doubling(), &cos1().into(), &sin1().into(), grid()).unwrap();
        assert!(r.discrepancy <= 1e-6);
    }

    #[test]
    fn map_derivative_examples() {
        for h1 in [sin1(), cos1(), TrigPoly::new(0.3, vec![0.1], vec![0.0, 0.2])] {
            let r = pressure_derivative_map(&doubling(), &Potential::zero(), &h1, grid()).unwrap();
            assert!(r.formula_value.abs() < 1e-8 && r.fd_value.abs() < 1e-8);
        }
        let r = pressure_derivative_map(&doubling(), &cos1().into(), &sin1(), grid()).unwrap();
        assert!(r.discrepancy <= 1e-5, "{r:?}");
        assert!(r.formula_value.abs() > 1e-3);
    }

    #[test]
    fn base_point_placement_matches_oracle() {
        let f = CircleMap::new(2, TrigPoly::sin_mode(1, 0.1)).unwrap();
        for map in [doubling(), f] {
            let phi: Potential = cos1().into();
            let base = pressure_derivative_map_with(&map, &phi, &sin1(), grid(), Placement::BasePoint).unwrap();
            let pre = pressure_derivative_map_with(&map, &phi, &sin1(), grid(), Placement::Preimage).unwrap();
            assert!(base.discrepancy <= 1e-8, "{base:?}");
            assert!(pre.discrepancy > 1e-3, "{pre:?}");
        }
    }

    #[test]
    fn chain_rule_vanishes() {
        let f = CircleMap::new(2, TrigPoly::sin_mode(1, 0.1)).unwrap();
        for map in [doubling(), f] {
            for h1 in [sin1(), cos1()] {
                let r = acip_chain_rule(&map, &h1, grid()).unwrap();
                assert!(r.total.abs() <= 1e-6, "{r:?}");
                assert!(r.fd_total.abs() <= 1e-6, "{r:?}");
            }
        }
    }

    #[test]
    fn family_must_stay_expanding() {
        let f = CircleMap::new(2, TrigPoly::sin_mode(1, 0.15915)).unwrap();
        let h1 = TrigPoly::sin_mode(1, 1.0);
        let r = pressure_derivative_map(&f, &Potential::zero(), &h1, grid());
        assert!(matches!(r, Err(Error::FamilyNotExpanding { .. })), "{r:?}");
    }

    #[test]
    fn equilibrium_average_examples() {
        let g = Grid::new(64).unwrap();
        let zero = TrigPoly::zero();
        let r = equilibrium_average_derivative(
            &doubling(),
            &cos1().into(),
            &Potential::constant(1.0),
            &sin1(),
            &cos1().into(),
            g,
        )
        .unwrap();
        assert!(r.formula_value.abs() < 1e-9 && r.fd_value.abs() < 1e-9);
        let r =
            equilibrium_average_derivative(&doubling(), &Potential::zero(), &cos1().into(), &zero, &cos1().into(), g)
                .unwrap();
        assert!((r.formula_value - 0.5).abs() < 1e-6);
        assert!(r.discrepancy <= 1e-5, "{r:?}");
        let r = equilibrium_average_derivative(
            &doubling(),
            &Potential::zero(),
            &cos1().into(),
            &sin1(),
            &Potential::zero(),
            g,
        )
        .unwrap();
        assert!(r.discrepancy <= 1e-4, "{r:?}");
        let r =
            equilibrium_average_derivative(&doubling(), &cos1().into(), &sin1().into(), &sin1(), &Potential::zero(), g)
                .unwrap();
        assert!(r.discrepancy <= 1e-4, "{r:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn response_is_linear(a in -2.0..2.0f64) {
            let f = CircleMap::new(2, TrigPoly::sin_mode(1, 0.05)).unwrap();
            let phi: Potential = cos1().into();
            let triple = solve(&f, &phi, Grid::new(64).unwrap()).unwrap();
            let d = |h: &TrigPoly| map_derivative_formula(&f, &phi, &triple, h, Placement::BasePoint).unwrap();
            let combo = sin1().scaled(a).add(&cos1());
            prop_assert!((d(&combo) - (a * d(&sin1()) + d(&cos1()))).abs() < 1e-9);
            let mu = EquilibriumMeasure::new(triple.clone());
            let p1: Potential = sin1().into();
            let p2: Potential = TrigPoly::cos_mode(2, 1.0).into();
            let lhs = mu.integrate_obs(&p1.scaled(a).add(&p2));
            prop_assert!((lhs - (a * mu.integrate_obs(&p1) + mu.integrate_obs(&p2))).abs() < 1e-9);
        }
    }
}
