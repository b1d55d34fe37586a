use std::f64::consts::PI;

use onemirror::{
    visibility_1d_numeric, DensityMode, FoldSettings, Kinematics1D, MassPair, ProbeBeam, TargetSuperposition,
};

fn numeric(m: f64, big: f64, target: &TargetSuperposition<f64>, beam: &ProbeBeam<f64>, mode: DensityMode) -> f64 {
    let k = Kinematics1D::new(MassPair::new(m, big).unwrap());
    let rho = target.density(mode);
    let grid = k.default_grid(&rho, beam);
    let dist = k.fold(&rho, beam, &grid, &FoldSettings::default()).unwrap();
    visibility_1d_numeric(&dist).unwrap().visibility
}

fn analytic(m: f64, big: f64, target: &TargetSuperposition<f64>, beam: &ProbeBeam<f64>) -> f64 {
    Kinematics1D::new(MassPair::new(m, big).unwrap())
        .visibility_analytic(target, beam)
        .visibility
}

#[test]
fn envelope_of_one_eighth() {
    // d (M-m) Δp / m = 1 with m = 1, M = 2
    let t = TargetSuperposition::new(7.0, 0.7, 0.0).unwrap();
    let beam = ProbeBeam::new(2.0 * PI, 0.0, 1.0 / 7.0).unwrap();
    let v = numeric(1.0, 2.0, &t, &beam, DensityMode::CosineApprox);
    assert!((v - (-0.125f64).exp()).abs() < 1e-3, "{v}");
}

#[test]
fn spread_sweep_tracks_envelope() {
    let t = TargetSuperposition::new(7.0, 0.7, 0.0).unwrap();
    for k in 0..10 {
        let dp = 0.03 * k as f64;
        let beam = ProbeBeam::new(2.0 * PI, 0.0, dp).unwrap();
        let v = numeric(1.0, 2.0, &t, &beam, DensityMode::CosineApprox);
        let a = analytic(1.0, 2.0, &t, &beam);
        assert!((v - a).abs() <= 2e-3, "dp {dp}: {v} vs {a}");
    }
}

#[test]
fn equal_masses_keep_full_contrast() {
    let t = TargetSuperposition::new(7.0, 0.7, 0.0).unwrap();
    let beam = ProbeBeam::new(2.0 * PI, 0.0, 0.2 * 2.0 * PI).unwrap();
    let v = numeric(1.0, 1.0, &t, &beam, DensityMode::Exact);
    assert!(v >= 1.0 - 1e-6, "{v}");
}

#[test]
fn heavy_target_washes_out() {
    let t = TargetSuperposition::new(7.0, 0.7, 0.0).unwrap();
    let beam = ProbeBeam::new(2.0 * PI, 0.0, 1.0 / 7.0).unwrap();
    let mut last = f64::INFINITY;
    for ratio in [3.0, 10.0, 30.0] {
        let v = numeric(1.0, ratio, &t, &beam, DensityMode::CosineApprox);
        assert!(v < last);
        last = v;
    }
    assert!(last < 1e-6);
}

#[test]
fn analytic_envelope_is_monotone() {
    let beam = |dp: f64| ProbeBeam::new(2.0 * PI, 0.0, dp).unwrap();
    let t = |d: f64| TargetSuperposition::new(d, 0.1, 0.0).unwrap();
    let mut prev = 2.0;
    for dp in [0.0, 0.05, 0.1, 0.2] {
        let a = analytic(1.0, 2.0, &t(3.0), &beam(dp));
        assert!(a <= prev);
        prev = a;
    }
    let mut prev = 2.0;
    for d in [1.0, 2.0, 4.0] {
        let a = analytic(1.0, 2.0, &t(d), &beam(0.1));
        assert!(a <= prev);
        prev = a;
    }
    let mut prev = 2.0;
    for big in [1.0, 1.5, 3.0] {
        let a = analytic(1.0, big, &t(3.0), &beam(0.1));
        assert!(a <= prev);
        prev = a;
    }
}

#[test]
fn fringe_spacing_from_peaks() {
    let t = TargetSuperposition::new(7.0, 0.1, 0.0).unwrap();
    let beam = ProbeBeam::new(2.0 * PI, 0.0, 0.0).unwrap();
    for big in [0.5, 1.0, 2.0] {
        let k = Kinematics1D::new(MassPair::new(1.0, big).unwrap());
        let rho = t.exact();
        let grid = k.default_grid(&rho, &beam);
        let dist = k.fold(&rho, &beam, &grid, &FoldSettings::default()).unwrap();
        let peak = dist.density.iter().cloned().fold(0.0, f64::max);
        let maxima: Vec<f64> = dist
            .extrema()
            .into_iter()
            .filter(|&i| dist.density[i] >= dist.density[i - 1] && dist.density[i] > dist.density[i + 1])
            .filter(|&i| dist.density[i] > 0.5 * peak)
            .map(|i| {
                let (x, _) = onemirror::quad::refine_extremum(&dist.density, i).unwrap();
                let step = grid[1] - grid[0];
                grid[0] + x * step
            })
            .collect();
        let mean = (maxima[maxima.len() - 1] - maxima[0]) / (maxima.len() - 1) as f64;
        let expected = 2.0 / (1.0 + big) * 2.0 * PI / 7.0;
        assert!((mean / expected - 1.0).abs() < 5e-3, "{big}: {mean} vs {expected}");
    }
}

#[test]
fn phase_shift_translates_pattern() {
    let k = Kinematics1D::new(MassPair::new(1.0, 2.0).unwrap());
    let beam = ProbeBeam::new(2.0 * PI, 0.0, 0.05).unwrap();
    let a = TargetSuperposition::new(7.0, 0.7, 0.2).unwrap();
    let grid = k.default_grid(&a.cosine_approx(), &beam);
    let step = grid[1] - grid[0];
    // a phase step that moves the fringes by exactly seven grid points
    let shift_points = 7;
    let delta = shift_points as f64 * step * 7.0 / k.transfer_coeff();
    let b = a.with_phase(0.2 + delta);
    let fa = k.fold(&a.cosine_approx(), &beam, &grid, &FoldSettings::default()).unwrap();
    let fb = k.fold(&b.cosine_approx(), &beam, &grid, &FoldSettings::default()).unwrap();
    let raw = |d: &onemirror::Distribution1D<f64>, i: usize| d.density[i] * d.normalization;
    for i in (100..grid.len() - 100).step_by(97) {
        let expected = raw(&fa, i + shift_points);
        assert!((raw(&fb, i) - expected).abs() < 1e-9 * expected.abs().max(1.0));
    }
}

#[test]
fn single_precision_runs() {
    let t = TargetSuperposition::new(7.0_f32, 0.7, 0.0).unwrap();
    let beam = ProbeBeam::new(2.0 * std::f32::consts::PI, 0.0, 0.0).unwrap();
    let k = Kinematics1D::new(MassPair::new(1.0_f32, 1.0).unwrap());
    let grid = k.default_grid(&t.cosine_approx(), &beam);
    let dist = k.fold(&t.cosine_approx(), &beam, &grid, &FoldSettings::default()).unwrap();
    let v = visibility_1d_numeric(&dist).unwrap().visibility;
    assert!((v - 1.0).abs() < 1e-3, "{v}");
}
