//! One function per experiment kind.

use circle_thermo::dynamics::{CircleMap, FunctionSpec, MapFamily};
use circle_thermo::ldp::{
    free_energy_curve, ldp_deterministic_check, ldp_monte_carlo, legendre, linspace, multifractal_spectrum,
    variational_residual, MultifractalSpectrum, SpectralFreeEnergy,
};
use circle_thermo::operator::assemble_transfer;
use circle_thermo::report::{fmt_num, Table};
use circle_thermo::response::{
    acip_chain_rule, pressure_derivative_map, pressure_derivative_potential, ResponseReport,
};
use circle_thermo::spectral::{cone_invariance_check, contraction_factor_estimate, decay_profile, dominant_triple};
use circle_thermo::stats::{clt_empirical, clt_variance, livsic_check};
use circle_thermo::thermo::{periodic_orbit_pressure, pressure_sweep, EquilibriumMeasure};
use rayon::prelude::*;

use crate::{Command, ExperimentConfig, Outcome, RunError};

const DEFAULT_DECAY_STEPS: usize = 40;
const DEFAULT_CONE_SAMPLES: usize = 1000;
const CONTRACTION_TRIALS: usize = 20;
const DEFAULT_DETERMINISTIC_N: usize = 30;

pub(crate) fn dispatch(command: Command, cfg: &ExperimentConfig, case_id: &str) -> Result<Outcome, RunError> {
    let compute = |error| RunError::Compute { case_id: case_id.to_string(), error };
    let result = match command {
        Command::Pressure => pressure(cfg),
        Command::Response => response(cfg, case_id),
        Command::Variance => variance(cfg, case_id),
        Command::Ldp => ldp(cfg),
        Command::Multifractal => multifractal(cfg),
        Command::ConeCheck => cone_check(cfg),
        Command::Clt => clt(cfg, case_id),
    };
    match result {
        Ok(Ok(outcome)) => Ok(outcome),
        Ok(Err(e)) => Err(compute(e)),
        Err(message) => Err(RunError::Config(format!("{case_id}: {message}"))),
    }
}

/// Outer error: configuration incomplete for the command. Inner error:
/// computation failed.
type Staged = Result<circle_thermo::Result<Outcome>, String>;

macro_rules! try_compute {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return Ok(Err(e)),
        }
    };
}

fn bool_metric(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn pressure(cfg: &ExperimentConfig) -> Staged {
    let map = cfg.circle_map();
    let phi = cfg.phi(&map)?;
    let grid = cfg.grid();
    let t_grid = cfg.t_grid.clone().unwrap_or_else(|| vec![1.0]);
    let mut out = Outcome::default();
    let tm = try_compute!(assemble_transfer(&map, &phi, grid));
    let mu = EquilibriumMeasure::new(try_compute!(dominant_triple(&tm)));
    out.push("pressure", mu.pressure());
    out.push("gap_ratio", mu.triple.gap_ratio);
    out.push("entropy", mu.entropy(&phi));
    out.push("lyapunov", mu.lyapunov_exponent(&map));
    out.push("eigen_residual", mu.triple.right_residual(&tm).max(mu.triple.left_residual(&tm)));
    if let Some(period) = cfg.period {
        let orbit = try_compute!(periodic_orbit_pressure(&map, &phi, period));
        out.push("periodic_orbit_pressure", orbit);
        out.push("periodic_discrepancy", (orbit - mu.pressure()).abs());
    }
    out.table = Table::new(&["t", "pressure", "entropy", "lyapunov", "gap_ratio"]);
    for p in try_compute!(pressure_sweep(&map, &phi, &t_grid, grid)) {
        out.table.push_nums(&[p.t, p.pressure, p.entropy, p.lyapunov, p.gap_ratio]);
    }
    Ok(Ok(out))
}

fn response_row(table: &mut Table, case: String, r: &ResponseReport) {
    table.push(vec![case, fmt_num(r.formula_value), fmt_num(r.fd_value), fmt_num(r.fd_step), fmt_num(r.discrepancy)]);
}

fn response(cfg: &ExperimentConfig, case_id: &str) -> Staged {
    let map = cfg.circle_map();
    let phi = cfg.phi(&map)?;
    let grid = cfg.grid();
    if cfg.directions.is_empty() {
        return Err("missing \"directions\"".into());
    }
    let parts = cfg.directions.iter().map(|d| d.parts(&map)).collect::<Result<Vec<_>, _>>()?;
    let mut out = Outcome {
        table: Table::new(&["case_id", "formula_value", "fd_value", "fd_step", "discrepancy"]),
        ..Outcome::default()
    };
    let (mut max_disc, mut max_map, mut max_chain) = (0.0f64, 0.0f64, 0.0f64);
    for (i, ((h1, h2), dir)) in parts.iter().zip(&cfg.directions).enumerate() {
        if !h1.is_zero() {
            let r = try_compute!(pressure_derivative_map(&map, &phi, h1, grid));
            max_disc = max_disc.max(r.discrepancy);
            max_map = max_map.max(r.formula_value.abs());
            response_row(&mut out.table, format!("{case_id}/{i}/map"), &r);
            if cfg.chain_rule {
                let c = try_compute!(acip_chain_rule(&map, h1, grid));
                max_chain = max_chain.max(c.total.abs());
                let disc = (c.total - c.fd_total).abs();
                max_disc = max_disc.max(disc);
                out.table.push(vec![
                    format!("{case_id}/{i}/chain"),
                    fmt_num(c.total),
                    fmt_num(c.fd_total),
                    fmt_num(r.fd_step),
                    fmt_num(disc),
                ]);
            }
        }
        if dir.h2 != FunctionSpec::default() {
            let r = try_compute!(pressure_derivative_potential(&map, &phi, h2, grid));
            max_disc = max_disc.max(r.discrepancy);
            response_row(&mut out.table, format!("{case_id}/{i}/potential"), &r);
        }
    }
    out.push("max_discrepancy", max_disc);
    out.push("max_abs_map_formula", max_map);
    if cfg.chain_rule {
        out.push("max_abs_chain_total", max_chain);
    }
    Ok(Ok(out))
}

const VARIANCE_HEADER: [&str; 7] =
    ["case_id", "mean", "sigma2_series", "sigma2_resolvent", "is_coboundary", "ks_statistic", "seed"];

fn variance(cfg: &ExperimentConfig, case_id: &str) -> Staged {
    let map = cfg.circle_map();
    let phi = cfg.phi(&map)?;
    let psi = cfg.psi()?;
    let v = try_compute!(clt_variance(&map, &phi, &psi, cfg.grid()));
    let mut out = Outcome { table: Table::new(&VARIANCE_HEADER), ..Outcome::default() };
    out.push("mean", v.mean);
    out.push("sigma2_series", v.sigma2_series);
    out.push("sigma2_resolvent", v.sigma2_resolvent);
    out.push("series_resolvent_gap", (v.sigma2_series - v.sigma2_resolvent).abs());
    out.push("is_coboundary", bool_metric(v.is_coboundary));
    if let Some(period) = cfg.period {
        let l = try_compute!(livsic_check(&map, &psi, v.mean, period));
        out.push("livsic_defect", l.max_periodic_defect);
        out.push("livsic_candidate", bool_metric(l.is_coboundary_candidate));
    }
    out.table.push(vec![
        case_id.to_string(),
        fmt_num(v.mean),
        fmt_num(v.sigma2_series),
        fmt_num(v.sigma2_resolvent),
        v.is_coboundary.to_string(),
        String::new(),
        String::new(),
    ]);
    Ok(Ok(out))
}

fn clt(cfg: &ExperimentConfig, case_id: &str) -> Staged {
    let map = cfg.circle_map();
    let phi = cfg.phi(&map)?;
    let psi = cfg.psi()?;
    let n = cfg.require(&cfg.n, "n")?;
    let samples = cfg.require(&cfg.samples, "samples")?;
    let seed = cfg.require(&cfg.seed, "seed")?;
    let r = try_compute!(clt_empirical(&map, &phi, &psi, n, samples, seed, cfg.grid()));
    let v = try_compute!(clt_variance(&map, &phi, &psi, cfg.grid()));
    let mut out = Outcome { table: Table::new(&VARIANCE_HEADER), ..Outcome::default() };
    out.push("ks_statistic", r.ks_statistic);
    out.push("sigma2", r.sigma2);
    out.table.push(vec![
        case_id.to_string(),
        fmt_num(v.mean),
        fmt_num(v.sigma2_series),
        fmt_num(v.sigma2_resolvent),
        v.is_coboundary.to_string(),
        fmt_num(r.ks_statistic),
        seed.to_string(),
    ]);
    Ok(Ok(out))
}

fn ldp(cfg: &ExperimentConfig) -> Staged {
    let map = cfg.circle_map();
    let phi = cfg.phi(&map)?;
    let psi = cfg.psi()?;
    let grid = cfg.grid();
    let t_grid = cfg.t_grid.clone().unwrap_or_else(|| linspace(-4.0, 4.0, 33));
    let mut out = Outcome { table: Table::new(&["t", "E", "E_prime"]), ..Outcome::default() };
    let fe = try_compute!(SpectralFreeEnergy::new(&map, &phi, &psi, grid));
    let curve = try_compute!(free_energy_curve(&fe, &t_grid));
    for i in 0..curve.t_grid.len() {
        out.table.push_nums(&[curve.t_grid[i], curve.e[i], curve.e_prime[i]]);
    }
    let mean = try_compute!(clt_variance(&map, &phi, &psi, grid)).mean;
    out.push("mean", mean);
    out.push("e_second_at_0", curve.e_second_at_0);
    out.push("min_e_second_difference", curve.min_second_difference());
    out.push("e_prime_nondecreasing", bool_metric(curve.slope_nondecreasing()));
    if let Some(s_grid) = &cfg.s_grid {
        let rate = try_compute!(legendre(&fe, &curve, s_grid));
        let mut table = Table::new(&["s", "t_of_s", "I"]);
        for i in 0..rate.s_grid.len() {
            table.push_nums(&[rate.s_grid[i], rate.t_of_s[i], rate.i[i]]);
        }
        out.extra_tables.push(("rate".into(), table));
        out.push("rate_min", rate.min_value());
        out.push("rate_min_second_difference", rate.min_second_difference());
        out.push("rate_at_mean", try_compute!(legendre(&fe, &curve, &[mean])).i[0]);
        out.push("variational_residual", try_compute!(variational_residual(&fe, &curve)));
    }
    if let Some(t) = cfg.tilt {
        let n_max = cfg.n_max.unwrap_or(DEFAULT_DETERMINISTIC_N);
        let d = try_compute!(ldp_deterministic_check(&map, &phi, &psi, t, n_max, grid));
        out.push("deterministic_constant", d.constant);
        out.push("deterministic_r_squared", d.r_squared);
        out.push("deterministic_residual", d.residual_at_n_max);
    }
    if let Some([a, b]) = cfg.interval {
        let ns = match (&cfg.n_values, cfg.n) {
            (Some(ns), _) => ns.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => return Err("missing \"n\" or \"n_values\"".into()),
        };
        let samples = cfg.require(&cfg.samples, "samples")?;
        let seed = cfg.require(&cfg.seed, "seed")?;
        let mut table = Table::new(&["a", "b", "n", "samples", "hits", "empirical_rate", "predicted_rate"]);
        let mut gaps = Vec::new();
        let mut trivial = false;
        for &n in &ns {
            let r = try_compute!(ldp_monte_carlo(&map, &phi, &psi, a, b, n, samples, seed, grid));
            trivial = r.trivial_interval;
            gaps.push((r.empirical_rate - r.predicted_rate).abs());
            table.push(vec![
                fmt_num(a),
                fmt_num(b),
                n.to_string(),
                samples.to_string(),
                r.hits.to_string(),
                fmt_num(r.empirical_rate),
                fmt_num(r.predicted_rate),
            ]);
            if !trivial {
                out.push(&format!("relative_gap_n{n}"), r.relative_gap());
            }
        }
        out.extra_tables.push(("mc".into(), table));
        out.push("gap_decreasing", bool_metric(gaps.windows(2).all(|w| w[1] < w[0])));
        if trivial {
            out.notes.push("trivial interval".into());
        }
    }
    Ok(Ok(out))
}

fn multifractal(cfg: &ExperimentConfig) -> Staged {
    let map = cfg.circle_map();
    let phi = cfg.phi(&map)?;
    let psi = cfg.psi()?;
    let grid = cfg.grid();
    let c_grid = cfg.require(&cfg.c_grid, "c_grid")?;
    let spec = try_compute!(multifractal_spectrum(&map, &phi, &psi, &c_grid, grid));
    let mut out = Outcome { table: Table::new(&["c", "pressure_of_level_set"]), ..Outcome::default() };
    for (c, v) in spec.c_grid.iter().zip(&spec.pressure_of_level_set) {
        out.table.push_nums(&[*c, *v]);
    }
    if spec.c_grid.first() == Some(&0.0) {
        out.push("value_at_zero_error", (spec.pressure_of_level_set[0] - spec.pressure).abs());
    }
    let max_increase = spec.pressure_of_level_set.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    out.push("max_increase", max_increase.max(0.0));
    out.push("c_max", spec.c_max);
    out.push("excluded", spec.excluded.len() as f64);
    if let Some(fam) = &cfg.family {
        let dir = fam.direction.to_trig().map_err(|e| format!("family.direction: {e}"))?;
        let family = MapFamily::new(map.clone(), dir);
        let spectra: Vec<MultifractalSpectrum> = try_compute!(fam
            .eps
            .par_iter()
            .map(|&eps| {
                let f: CircleMap = family.at(eps)?;
                let phi = cfg.potential.to_potential(&f)?;
                multifractal_spectrum(&f, &phi, &psi, &c_grid, grid)
            })
            .collect::<circle_thermo::Result<Vec<_>>>());
        let jump = spectra
            .windows(2)
            .flat_map(|w| {
                w[0].pressure_of_level_set.iter().zip(&w[1].pressure_of_level_set).map(|(a, b)| (a - b).abs())
            })
            .fold(0.0, f64::max);
        out.push("max_family_jump", jump);
    }
    Ok(Ok(out))
}

fn cone_check(cfg: &ExperimentConfig) -> Staged {
    let map = cfg.circle_map();
    let phi = cfg.phi(&map)?;
    let samples = cfg.samples.unwrap_or(DEFAULT_CONE_SAMPLES);
    let seed = cfg.seed.unwrap_or(0);
    let cones = try_compute!(cone_invariance_check(&map, &phi, samples, seed));
    let tm = try_compute!(assemble_transfer(&map, &phi, cfg.grid()));
    let triple = try_compute!(dominant_triple(&tm));
    let decay = decay_profile(&tm, &triple, cfg.n_max.unwrap_or(DEFAULT_DECAY_STEPS));
    let contraction = try_compute!(contraction_factor_estimate(&tm, CONTRACTION_TRIALS, seed));
    let mut out = Outcome { table: Table::new(&["n", "sup_error", "fitted_rate"]), ..Outcome::default() };
    for (i, e) in decay.errors.iter().enumerate() {
        out.table.push(vec![(i + 1).to_string(), fmt_num(*e), fmt_num(decay.fitted_rate)]);
    }
    let mut table = Table::new(&["trial", "theta_before", "theta_after", "ratio"]);
    for (i, t) in contraction.trials.iter().enumerate() {
        table.push(vec![i.to_string(), fmt_num(t.theta_before), fmt_num(t.theta_after), fmt_num(t.ratio)]);
    }
    out.extra_tables.push(("contraction".into(), table));
    out.push("gap_ratio", triple.gap_ratio);
    out.push("kappa0", cones.params.kappa0);
    out.push("rho", cones.params.rho);
    out.push("cone_violations", cones.violations as f64);
    out.push("cone_worst_ratio", cones.worst_ratio);
    out.push("decay_rate", decay.fitted_rate);
    out.push("decay_r_squared", decay.r_squared);
    out.push("max_contraction_ratio", contraction.max_ratio());
    Ok(Ok(out))
}
