//! Cross-module invariants on a small corpus of maps and potentials.

use circle_thermo::dynamics::{CircleMap, Coboundary, MapFamily, Observable, Potential, TrigPoly};
use circle_thermo::ldp::{
    free_energy_curve, legendre, linspace, multifractal_spectrum, sample_equilibrium, SpectralFreeEnergy,
};
use circle_thermo::operator::Grid;
use circle_thermo::response::{equilibrium_average_derivative, map_derivative_formula, Placement};
use circle_thermo::spectral::solve;
use circle_thermo::stats::{clt_variance, livsic_check};
use circle_thermo::thermo::equilibrium_measure;

fn grid() -> Grid {
    Grid::new(128).unwrap()
}

fn perturbed() -> CircleMap {
    CircleMap::new(2, TrigPoly::sin_mode(1, 0.1)).unwrap()
}

fn cases() -> Vec<(CircleMap, Potential)> {
    let mut out = Vec::new();
    for f in [CircleMap::linear(2).unwrap(), perturbed()] {
        out.push((f.clone(), Potential::zero()));
        out.push((f.clone(), TrigPoly::cos_mode(1, 1.0).into()));
        out.push((f.clone(), Potential::neg_log_derivative(&f)));
    }
    out
}

#[test]
fn sampler_averages_within_three_sigma() {
    let samples = 50_000;
    for (i, (f, phi)) in cases().into_iter().enumerate() {
        let mu = equilibrium_measure(&f, &phi, grid()).unwrap();
        let xs = sample_equilibrium(&f, &phi, grid(), samples, 200 + i as u64).unwrap();
        for g in [TrigPoly::cos_mode(1, 1.0), TrigPoly::sin_mode(1, 1.0), TrigPoly::cos_mode(2, 1.0)] {
            let vals: Vec<f64> = xs.iter().map(|&x| g.eval(x)).collect();
            let m = vals.iter().sum::<f64>() / samples as f64;
            let sd = (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / samples as f64).sqrt();
            let exact = mu.integrate_obs(&g);
            assert!((m - exact).abs() <= 3.0 * sd / (samples as f64).sqrt(), "case {i}, {g}: {m} vs {exact}");
        }
    }
}

#[test]
fn map_response_is_linear() {
    let (a, b) = (TrigPoly::sin_mode(1, 1.0), TrigPoly::new(0.2, vec![0.0, 0.5], vec![]));
    let combo = TrigPoly::new(0.2, vec![0.0, 0.5], vec![-1.5]);
    for (f, phi) in cases() {
        let triple = solve(&f, &phi, grid()).unwrap();
        let v = |h: &TrigPoly| map_derivative_formula(&f, &phi, &triple, h, Placement::BasePoint).unwrap();
        assert!((v(&combo) - (-1.5 * v(&a) + v(&b))).abs() <= 1e-9);
    }
}

#[test]
fn variance_is_cohomology_invariant() {
    let f = perturbed();
    let phi: Potential = TrigPoly::cos_mode(1, 0.5).into();
    let psi: Potential = TrigPoly::new(0.0, vec![1.0], vec![0.3]).into();
    let base = clt_variance(&f, &phi, &psi, grid()).unwrap().sigma2_resolvent;
    let shifted = clt_variance(&f, &phi, &psi.add(&Potential::constant(0.7)), grid()).unwrap();
    let cob = psi.clone().with_term(1.0, Coboundary { map: f.clone(), transfer: TrigPoly::sin_mode(1, 0.4) });
    let twisted = clt_variance(&f, &phi, &cob, grid()).unwrap();
    assert!((shifted.sigma2_resolvent - base).abs() <= 1e-8);
    assert!((twisted.sigma2_resolvent - base).abs() <= 1e-8, "{} vs {base}", twisted.sigma2_resolvent);
}

#[test]
fn livsic_agrees_with_variance_dichotomy() {
    let f = CircleMap::linear(2).unwrap();
    let observables: Vec<Potential> = vec![
        TrigPoly::cos_mode(1, 1.0).into(),
        TrigPoly::new(0.0, vec![-1.0, 1.0], vec![]).into(),
        Potential::constant(0.3),
        TrigPoly::new(0.0, vec![0.0, 0.0, 0.0, 1.0], vec![0.0, -1.0]).into(),
    ];
    for psi in observables {
        let v = clt_variance(&f, &Potential::zero(), &psi, grid()).unwrap();
        let l = livsic_check(&f, &psi, v.mean, 10).unwrap();
        assert_eq!(l.is_coboundary_candidate, v.is_coboundary);
    }
}

#[test]
fn mixed_partials_agree() {
    let f = perturbed();
    let phi: Potential = TrigPoly::cos_mode(1, 1.0).into();
    let psi: Potential = TrigPoly::sin_mode(1, 1.0).into();
    let r = equilibrium_average_derivative(&f, &phi, &psi, &TrigPoly::cos_mode(1, 1.0), &psi, grid()).unwrap();
    assert!(r.discrepancy <= 1e-4, "{r:?}");
}

#[test]
fn rate_function_is_smooth_along_family() {
    let family = MapFamily::new(CircleMap::linear(2).unwrap(), TrigPoly::sin_mode(1, 1.0));
    let psi: Potential = TrigPoly::cos_mode(1, 1.0).into();
    let eps = linspace(-0.01, 0.01, 11);
    let step = eps[1] - eps[0];
    let values: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let f = family.at(e).unwrap();
            let fe = SpectralFreeEnergy::new(&f, &Potential::zero(), &psi, grid()).unwrap();
            let curve = free_energy_curve(&fe, &linspace(-2.0, 2.0, 9)).unwrap();
            legendre(&fe, &curve, &[0.2]).unwrap().i[0]
        })
        .collect();
    for w in values.windows(3) {
        assert!(((w[2] - 2.0 * w[1] + w[0]) / (step * step)).abs() <= 1e3);
    }
}

#[test]
fn level_set_pressure_is_continuous_at_zero() {
    let f = perturbed();
    let psi: Potential = TrigPoly::cos_mode(1, 1.0).into();
    let spec = multifractal_spectrum(&f, &Potential::zero(), &psi, &[1e-4, 1e-3, 1e-2], grid()).unwrap();
    let gaps: Vec<f64> = spec.pressure_of_level_set.iter().map(|v| spec.pressure - v).collect();
    assert!(gaps.iter().all(|&g| g >= -1e-12));
    assert!(gaps[0] <= gaps[1] && gaps[1] <= gaps[2] && gaps[0] <= 1e-7, "{gaps:?}");
    assert!(psi.value(0.0) == 1.0);
}
