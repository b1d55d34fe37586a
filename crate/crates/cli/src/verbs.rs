use std::f64::consts::PI;

use onemirror::oracle::{run_suite, SuiteConfig};
use onemirror::{
    visibility_1d_numeric, AngularSettings, DensityMode, FoldRule, FoldSettings, Kinematics1D, Kinematics2D,
    OracleSuite, Params64,
};

use crate::{Cell, CliError, Mode, Table, Verb};

fn density_mode(mode: Mode) -> DensityMode {
    match mode {
        Mode::Exact => DensityMode::Exact,
        Mode::Cosine => DensityMode::CosineApprox,
    }
}

/// Degrees with float noise from the grid arithmetic trimmed.
fn tidy_degrees(rad: f64) -> f64 {
    (rad.to_degrees() * 1e9).round() / 1e9
}

fn join_degrees(angles: &[f64]) -> String {
    angles
        .iter()
        .map(|&a| tidy_degrees(a).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub(crate) fn run_verb(verb: &Verb, params: &Params64, seed: u64) -> Result<Table, CliError> {
    match verb {
        Verb::DensityDump { points, mode } => density_dump(params, *points, *mode),
        Verb::Scan1d { mode } => scan_1d(params, *mode),
        Verb::Visibility1d => visibility_1d(params),
        Verb::Angular {
            theta_min,
            theta_max,
            theta_step,
        } => angular(params, *theta_min, *theta_max, *theta_step),
        Verb::Visibility2d { theta_fin } => visibility_2d(params, *theta_fin),
        Verb::TransferCondition { theta_fin } => transfer_condition(params, *theta_fin),
        Verb::Oracle {
            suite,
            theta_fin,
            events,
        } => oracle(params, suite, *theta_fin, *events, seed),
    }
}

fn density_dump(params: &Params64, points: usize, mode: Mode) -> Result<Table, CliError> {
    let density = params.target.density(density_mode(mode));
    let span = 6.0 * density.envelope_width();
    let mut table = Table::new(&["p_target", "density"]);
    table
        .comments
        .push(format!("fringe_period: {}", density.fringe_period()));
    for i in 0..points {
        let p = -span + 2.0 * span * i as f64 / (points - 1) as f64;
        table.push(vec![p.into(), density.eval(p).into()]);
    }
    Ok(table)
}

fn kinematics_1d(params: &Params64) -> Kinematics1D<f64> {
    Kinematics1D::new(params.masses).with_coupling(params.coupling)
}

fn rule_name(rule: FoldRule) -> String {
    match rule {
        FoldRule::Sharp => "sharp".into(),
        FoldRule::Hermite { nodes } => format!("hermite:{nodes}"),
        FoldRule::CompositeLegendre { panels } => format!("legendre:{panels}"),
    }
}

fn scan_1d(params: &Params64, mode: Mode) -> Result<Table, CliError> {
    let k = kinematics_1d(params);
    let density = params.target.density(density_mode(mode));
    let grid = k.default_grid(&density, &params.beam);
    let dist = k.fold(&density, &params.beam, &grid, &FoldSettings::default())?;
    let mut table = Table::new(&["p_fin", "density", "raw"]);
    table.comments.push(format!(
        "fold: {} fringe_spacing: {} normalization: {}",
        rule_name(dist.rule),
        dist.fringe_spacing,
        dist.normalization
    ));
    for (&p, &v) in dist.grid.iter().zip(&dist.density) {
        table.push(vec![p.into(), v.into(), (v * dist.normalization).into()]);
    }
    Ok(table)
}

fn visibility_1d(params: &Params64) -> Result<Table, CliError> {
    let k = kinematics_1d(params);
    let density = params.target.cosine_approx();
    let grid = k.default_grid(&density, &params.beam);
    let dist = k.fold(&density, &params.beam, &grid, &FoldSettings::default())?;
    let numeric = visibility_1d_numeric(&dist)?.visibility;
    let analytic = k.visibility_analytic(&params.target, &params.beam).visibility;
    let mut table = Table::new(&["visibility_numeric", "visibility_analytic"]);
    table
        .comments
        .push(format!("density: cosine fold: {}", rule_name(dist.rule)));
    table.push(vec![numeric.into(), analytic.into()]);
    Ok(table)
}

fn kinematics_2d(params: &Params64) -> Kinematics2D<f64> {
    Kinematics2D::new(params.masses).with_coupling(params.coupling)
}

fn angular(params: &Params64, lo: f64, hi: f64, step: f64) -> Result<Table, CliError> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| (lo + step * i as f64).to_radians()).collect();
    let scan = kinematics_2d(params).angular_scan(&params.target, &params.beam, &grid, &AngularSettings::default())?;
    let zero = scan.distribution(0.0)?;
    let flip = scan.distribution(PI)?;
    let mut table = Table::new(&["theta_fin_deg", "density_alpha0", "density_alphapi"]);
    let (wlo, whi) = scan.forward_window;
    table.comments.push(format!(
        "forward_window_deg: {} {}",
        tidy_degrees(wlo),
        tidy_degrees(whi)
    ));
    table
        .comments
        .push(format!("excluded_deg: {}", join_degrees(&scan.excluded)));
    let mut warnings = zero.root_warnings.clone();
    warnings.dedup();
    table
        .comments
        .push(format!("root_warnings_deg: {}", join_degrees(&warnings)));
    for ((t, a), b) in zero.theta_grid.iter().zip(&zero.density).zip(&flip.density) {
        table.push(vec![tidy_degrees(*t).into(), (*a).into(), (*b).into()]);
    }
    Ok(table)
}

fn visibility_2d(params: &Params64, theta_fin: f64) -> Result<Table, CliError> {
    let k = kinematics_2d(params);
    let theta = theta_fin.to_radians();
    let v = k.visibility_2d(&params.target, &params.beam, theta, &AngularSettings::default())?;
    let env = k.visibility_envelope_2d(&params.target, &params.beam, theta);
    let mut table = Table::new(&["theta_fin_deg", "visibility", "best_alpha", "envelope"]);
    table.push(vec![
        theta_fin.into(),
        v.visibility.into(),
        v.best_alpha.map_or(Cell::Empty, Cell::Num),
        env.visibility.into(),
    ]);
    Ok(table)
}

fn transfer_condition(params: &Params64, theta_fin: f64) -> Result<Table, CliError> {
    let k = kinematics_2d(params);
    let beam = params.beam;
    let p_target_fin = k.transfer_condition(&beam);
    let (m, big) = (params.masses.probe(), params.masses.target());
    let d = params.target.separation();
    let target_time = big * d / p_target_fin;
    let probe_time = m * d * beam.theta_in().cos() / beam.momentum();
    let theta = theta_fin.to_radians();
    let (p_fin, slope) = match k.transfer_event(&beam, theta) {
        Ok(e) => {
            let pf = e.fin.probe();
            let slope = k.dpstar_dpin(beam.theta_in(), beam.momentum(), pf)?;
            (pf[0].hypot(pf[1]), slope)
        }
        Err(_) => (f64::NAN, f64::NAN),
    };
    let mut table = Table::new(&[
        "p_target_fin",
        "target_time",
        "probe_time",
        "theta_fin_deg",
        "p_fin",
        "dpstar_dp",
    ]);
    table.push(vec![
        p_target_fin.into(),
        target_time.into(),
        probe_time.into(),
        theta_fin.into(),
        p_fin.into(),
        slope.into(),
    ]);
    Ok(table)
}

fn oracle(params: &Params64, suite: &str, theta_fin: f64, events: u64, seed: u64) -> Result<Table, CliError> {
    let suite = OracleSuite::parse(suite).ok_or_else(|| CliError::Usage(format!("unknown oracle suite `{suite}`")))?;
    let config = SuiteConfig {
        theta_fin: theta_fin.to_radians(),
        seed,
        events,
        ..SuiteConfig::default()
    };
    let reports = run_suite(suite, params, &config)?;
    let mut table = Table::new(&["name", "value", "reference", "rel_err", "samples", "seed"]);
    for r in reports {
        table.push(vec![
            Cell::Text(r.name),
            r.value.into(),
            r.reference.into(),
            r.rel_err.into(),
            Cell::Int(r.samples),
            r.seed.map_or(Cell::Empty, Cell::Int),
        ]);
    }
    Ok(table)
}
