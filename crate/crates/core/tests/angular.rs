use onemirror::quad::trapezoid;
use onemirror::{
    AngularSettings, CouplingConstant, Error, Kinematics2D, MassPair, ParamSet, Params64, ProbeBeam,
    TargetSuperposition,
};
use std::f64::consts::PI;

fn fixture() -> Params64 {
    ParamSet::default().validate().unwrap()
}

fn kin(params: &Params64) -> Kinematics2D<f64> {
    Kinematics2D::new(params.masses).with_coupling(params.coupling)
}

fn degrees(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| (lo + step * i as f64).to_radians()).collect()
}

fn with_spread(beam: &ProbeBeam<f64>, dp_over_p: f64) -> ProbeBeam<f64> {
    beam.with_spread(dp_over_p * beam.momentum()).unwrap()
}

/// Radial integral of `|p_fin| prob_2d` along one ray, with `|p_fin| = c ± h e^u`
/// on either side of the forward cut so the integrand stays smooth in `u`.
fn radial_reference(k: &Kinematics2D<f64>, t: &TargetSuperposition<f64>, beam: &ProbeBeam<f64>, theta: f64) -> f64 {
    let p = beam.momentum();
    let p_in = beam.direction_scaled(p);
    let (cf, sf) = (theta.cos(), theta.sin());
    let rho = t.exact();
    let f = |r: f64| {
        k.prob_2d(&rho, p_in, [r * cf, r * sf])
            .map(|v| r * v)
            .unwrap_or(0.0)
    };
    let p_max = 3.0 * (p * p + (8.0 / t.width()).powi(2) / k.masses().ratio()).sqrt();
    let centre = p_in[0] / cf;
    let h = k.forward_cut() * p / cf.abs();
    let n = 400_000;
    if !(centre > h && centre < p_max - h) {
        return trapezoid(f, 0.0, p_max, 4 * n);
    }
    let below = {
        let top = (centre / h).ln();
        trapezoid(|u: f64| f(centre - h * u.exp()) * h * u.exp(), 0.0, top, n)
    };
    let above = {
        let top = ((p_max - centre) / h).ln();
        trapezoid(|u: f64| f(centre + h * u.exp()) * h * u.exp(), 0.0, top, n)
    };
    below + above
}

#[test]
fn components_match_direct_radial_integration() {
    let params = fixture();
    let k = kin(&params);
    let settings = AngularSettings::default();
    for deg in [30.0, 60.0, 100.0, 150.0] {
        let theta: f64 = f64::to_radians(deg);
        for alpha in [0.0, PI, 1.1] {
            let t = params.target.with_phase(alpha);
            let comps = k.angular_components(&t, &params.beam, theta, &settings).unwrap();
            let fast = comps.density(&t, alpha);
            let slow = radial_reference(&k, &t, &params.beam, theta);
            let rel = (fast - slow).abs() / slow;
            assert!(rel < 1e-6, "{deg}° α={alpha}: {fast} vs {slow}");
        }
    }
}

#[test]
fn opposite_phases_are_complementary() {
    let params = fixture();
    let k = kin(&params);
    let t = params.target;
    for theta in degrees(10.0, 170.0, 7.3) {
        if (theta - params.beam.theta_in()).abs() < 0.01 {
            continue;
        }
        let c = k
            .angular_components(&t, &params.beam, theta, &AngularSettings::default())
            .unwrap();
        let base = c.density(&t, 0.0) + c.density(&t, PI);
        for alpha in [0.4, 1.3, 2.2, 4.0] {
            let sum = c.density(&t, alpha) + c.density(&t, alpha + PI);
            assert!((sum / base - 1.0).abs() < 1e-3);
        }
    }
}

#[test]
fn tighter_radial_tolerance_changes_little() {
    let params = fixture();
    let k = kin(&params);
    let loose = AngularSettings::default();
    let tight = AngularSettings {
        radial_tol: 1e-10,
        ..loose
    };
    for deg in [20.0, 58.0, 90.0, 133.0] {
        let theta: f64 = f64::to_radians(deg);
        let a = k.angular_components(&params.target, &params.beam, theta, &loose).unwrap();
        let b = k.angular_components(&params.target, &params.beam, theta, &tight).unwrap();
        for alpha in [0.0, PI] {
            let (x, y) = (a.density(&params.target, alpha), b.density(&params.target, alpha));
            assert!((x - y).abs() <= 1e-6 * y.max(1e-3 * b.envelope), "{deg}: {x} vs {y}");
        }
    }
}

#[test]
fn spread_suppression_follows_envelope() {
    let params = fixture();
    let k = kin(&params);
    let settings = AngularSettings::default();
    let theta = 60f64.to_radians();
    let sharp = k
        .visibility_2d(&params.target, &params.beam, theta, &settings)
        .unwrap()
        .visibility;
    for dp in [0.002, 0.004, 0.007, 0.012] {
        let beam = with_spread(&params.beam, dp);
        let v = k.visibility_2d(&params.target, &beam, theta, &settings).unwrap().visibility;
        let env = k.visibility_envelope_2d(&params.target, &beam, theta).visibility;
        assert!((v / sharp - env).abs() < 5e-2, "dp/p={dp}: {} vs {env}", v / sharp);
    }
}

#[test]
fn sharp_beam_envelope_is_one() {
    let params = fixture();
    let k = kin(&params);
    let env = k.visibility_envelope_2d(&params.target, &params.beam, 1.0);
    assert_eq!(env.visibility, 1.0);
}

#[test]
fn heavier_targets_lose_contrast() {
    let params = fixture();
    let beam = with_spread(&params.beam, 0.05);
    let theta = 60f64.to_radians();
    let mut last = f64::INFINITY;
    for ratio in [0.5, 1.0, 1.5] {
        let k = Kinematics2D::new(MassPair::new(1.0, ratio).unwrap());
        let v = k
            .visibility_2d(&params.target, &beam, theta, &AngularSettings::default())
            .unwrap()
            .visibility;
        assert!(v < last, "M/m={ratio}: {v} after {last}");
        last = v;
    }
}

#[test]
fn immovable_target_shows_no_fringes() {
    let params = fixture();
    let t = params.target;
    // d Δp = 1
    let beam = params.beam.with_spread(1.0 / t.separation()).unwrap();
    let theta = 60f64.to_radians();
    let visibility = |ratio: f64| {
        Kinematics2D::new(MassPair::new(1.0, ratio).unwrap())
            .visibility_2d(&t, &beam, theta, &AngularSettings::default())
            .unwrap()
            .visibility
    };
    let (light, heavy) = (visibility(1.0), visibility(2.0));
    assert!(heavy < light);
    for ratio in [4.0, 10.0, 20.0] {
        let v = visibility(ratio);
        assert!(v < 1e-6 * light, "M/m={ratio}: {v}");
    }
}

#[test]
fn mass_and_momentum_scaling_leaves_distribution_unchanged() {
    let base = ParamSet::default();
    let scaled = ParamSet {
        mass_probe: 2.0 * base.mass_probe,
        mass_target: 2.0 * base.mass_target,
        lambda_in: 0.5 * base.lambda_in,
        ..base
    };
    let grid = degrees(10.0, 170.0, 0.5);
    let run = |set: &ParamSet| {
        let p: Params64 = set.validate().unwrap();
        kin(&p)
            .angular_distribution(&p.target, &p.beam, &grid, &AngularSettings::default())
            .unwrap()
    };
    let (a, b) = (run(&base), run(&scaled));
    assert_eq!(a.theta_grid, b.theta_grid);
    for (x, y) in a.density.iter().zip(&b.density) {
        assert!((x - y).abs() <= 1e-10 * x.abs().max(1e-12), "{x} vs {y}");
    }
}

#[test]
fn coupling_drops_out_of_normalized_distribution() {
    let params = fixture();
    let grid = degrees(20.0, 160.0, 0.5);
    let s = AngularSettings::default();
    let a = kin(&params)
        .angular_distribution(&params.target, &params.beam, &grid, &s)
        .unwrap();
    let strong = params.with_coupling(CouplingConstant::new(3.7).unwrap());
    let b = kin(&strong)
        .angular_distribution(&strong.target, &strong.beam, &grid, &s)
        .unwrap();
    for (x, y) in a.density.iter().zip(&b.density) {
        assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-12));
    }
    for (x, y) in a.raw.iter().zip(&b.raw) {
        assert!((y / x - 3.7 * 3.7).abs() < 1e-10);
    }
}

#[test]
fn forward_angles_are_reported_not_sampled() {
    let params = fixture();
    let k = kin(&params);
    let grid = degrees(40.0, 50.0, 0.25);
    let dist = k
        .angular_distribution(&params.target, &params.beam, &grid, &AngularSettings::default())
        .unwrap();
    assert_eq!(dist.excluded, vec![45f64.to_radians()]);
    assert_eq!(dist.density.len(), grid.len() - 1);
    let (lo, hi) = dist.forward_window;
    assert!(lo < PI / 4.0 && hi > PI / 4.0);
    assert!(dist.theta_grid.iter().all(|&t| t < lo || t > hi));
    assert!(matches!(
        k.angular_components(&params.target, &params.beam, PI / 4.0, &AngularSettings::default()),
        Err(Error::ForwardSingularity { .. })
    ));
}

#[test]
fn coarse_angular_grid_rejected() {
    let params = fixture();
    let grid = degrees(46.0, 60.0, 3.5);
    let err = kin(&params)
        .angular_distribution(&params.target, &params.beam, &grid, &AngularSettings::default())
        .unwrap_err();
    assert!(matches!(err, Error::GridTooCoarse { .. }), "{err}");
}

#[test]
fn distribution_is_normalized_and_nonnegative() {
    let params = fixture();
    let grid = degrees(10.0, 170.0, 0.5);
    let dist = kin(&params)
        .angular_distribution(&params.target, &params.beam, &grid, &AngularSettings::default())
        .unwrap();
    assert!(dist.density.iter().all(|&v| v >= 0.0));
    let mut total = 0.0;
    for (i, w) in dist.theta_grid.windows(2).enumerate() {
        if w[0] < PI / 4.0 && w[1] > PI / 4.0 {
            continue;
        }
        total += 0.5 * (w[1] - w[0]) * (dist.density[i] + dist.density[i + 1]);
    }
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn phase_flip_moves_fringes_between_curves() {
    let params = fixture();
    let grid = degrees(10.0, 170.0, 0.25);
    let scan = kin(&params)
        .angular_scan(&params.target, &params.beam, &grid, &AngularSettings::default())
        .unwrap();
    let a = scan.distribution(0.0).unwrap();
    let b = scan.distribution(PI).unwrap();
    let diff: Vec<f64> = a.raw.iter().zip(&b.raw).map(|(x, y)| x - y).collect();
    let flips = diff.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    assert!(flips >= 6, "{flips}");
}

#[test]
fn single_precision_components_track_double() {
    let params = fixture();
    let set = ParamSet::default();
    let p32 = set.validate::<f32>().unwrap();
    let k32 = Kinematics2D::new(p32.masses);
    let theta = 100f64.to_radians();
    let a = kin(&params)
        .angular_components(&params.target, &params.beam, theta, &AngularSettings::default())
        .unwrap();
    let settings = AngularSettings {
        radial_tol: 1e-4,
        ..AngularSettings::default()
    };
    let b = k32
        .angular_components(&p32.target, &p32.beam, theta as f32, &settings)
        .unwrap();
    assert!(((b.envelope as f64) / a.envelope - 1.0).abs() < 1e-3);
}
