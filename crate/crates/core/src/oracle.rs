//! Brute-force cross-checks for the closed-form fast paths.
//!
//! Each oracle recomputes a quantity by a route that shares as little code
//! as possible with the fast path (direct Fourier sums, Newton solves of the
//! raw conservation laws, finite-difference Jacobians, Monte-Carlo sampling
//! of the rotated-frame scattering) and reports the discrepancy.
//!
//! Random numbers come from ChaCha8, seeded with `seed_from_u64(seed)` and
//! split into [`MC_SHARDS`] streams so results do not depend on the thread
//! count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kin1d::{Event1D, Kinematics1D};
use crate::kin2d::{AngularSettings, Event2D, FinalState2D, Kinematics2D};
use crate::params::{ProbeBeam, ValidatedParams};
use crate::quad::{find_root, gauss_legendre, integrate, trapezoid, QuadSpec};
use crate::scalar::Scalar;
use crate::target::TargetSuperposition;

/// Number of independent RNG streams a Monte-Carlo run is split into.
pub const MC_SHARDS: u64 = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    /// Oracle estimate.
    pub value: f64,
    /// Fast-path result.
    pub reference: f64,
    pub rel_err: f64,
    /// Work performed: function evaluations, iterations or events.
    pub samples: u64,
    pub seed: Option<u64>,
}

impl OracleReport {
    pub fn new(name: impl Into<String>, value: f64, reference: f64, samples: u64) -> Self {
        let scale = reference.abs().max(f64::MIN_POSITIVE);
        Self {
            name: name.into(),
            value,
            reference,
            rel_err: (value - reference).abs() / scale,
            samples,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Replaces the pointwise discrepancy with one measured on a wider
    /// scale, for curve comparisons.
    pub fn with_rel_err(mut self, rel_err: f64) -> Self {
        self.rel_err = rel_err.abs();
        self
    }
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

fn shard_sizes(n: u64) -> impl Iterator<Item = (u64, u64)> {
    (0..MC_SHARDS).map(move |k| (k, n / MC_SHARDS + u64::from(k < n % MC_SHARDS)))
}

/// Target momentum drawn from the exact density `ρ(P)`: a Gaussian
/// proposal for the envelope thinned by `(1 + cos(Pd + α)) / 2`.
pub fn sample_target_momentum<T: Scalar, R: Rng + ?Sized>(target: &TargetSuperposition<T>, rng: &mut R) -> T {
    let sigma = 1.0 / (target.width().as_f64() * std::f64::consts::SQRT_2);
    let normal = Normal::new(0.0, sigma).expect("positive width");
    let (d, alpha) = (target.separation().as_f64(), target.phase().as_f64());
    loop {
        let p = normal.sample(rng);
        if rng.gen::<f64>() * 2.0 < 1.0 + (p * d + alpha).cos() {
            return T::lit(p);
        }
    }
}

/// Incident momentum magnitude drawn from the beam, restricted to `p > 0`.
pub fn sample_beam_momentum<T: Scalar, R: Rng + ?Sized>(beam: &ProbeBeam<T>, rng: &mut R) -> T {
    let (mean, spread) = (beam.momentum().as_f64(), beam.spread().as_f64());
    if spread == 0.0 {
        return beam.momentum();
    }
    let normal = Normal::new(mean, spread).expect("finite spread");
    loop {
        let p = normal.sample(rng);
        if p > 0.0 {
            return T::lit(p);
        }
    }
}

/// One head-on collision with target and probe momenta drawn from their
/// distributions.
pub fn sample_event_1d<T: Scalar, R: Rng + ?Sized>(
    kin: &Kinematics1D<T>,
    target: &TargetSuperposition<T>,
    beam: &ProbeBeam<T>,
    rng: &mut R,
) -> Event1D<T> {
    let big_p = sample_target_momentum(target, rng);
    let p = sample_beam_momentum(beam, rng);
    kin.event(p, big_p)
}

/// One planar collision: the incident state is carried into the rotated
/// frame, given a uniform azimuth about the `p̄_z` axis and carried back.
pub fn sample_event_2d<T: Scalar, R: Rng + ?Sized>(
    kin: &Kinematics2D<T>,
    target: &TargetSuperposition<T>,
    beam: &ProbeBeam<T>,
    rng: &mut R,
) -> Event2D<T> {
    let frame = kin.frame();
    let big_p = sample_target_momentum(target, rng);
    let p = sample_beam_momentum(beam, rng);
    let p_in = beam.direction_scaled(p);
    let q = frame.state_to_rotated(p_in, big_p);
    let radius = q[0].hypot(q[1]);
    let phi = T::lit(rng.gen::<f64>()) * T::tau();
    let (probe, target_fin) = frame.state_from_rotated([radius * phi.cos(), radius * phi.sin(), q[2]]);
    Event2D {
        p_in,
        target_in: big_p,
        fin: FinalState2D {
            p_x_fin: probe[0],
            p_y_fin: probe[1],
            target_fin,
        },
    }
}

/// Counts of `|θ_fin|` in bins, with `θ_fin` the polar angle of the final
/// probe momentum folded onto `[0, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularHistogram {
    /// Bin edges in radians, ascending.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Events outside every bin.
    pub outside: u64,
    pub events: u64,
    pub seed: u64,
}

impl AngularHistogram {
    /// Uniform bins over `[lo, hi]` degrees.
    pub fn uniform_edges(lo_deg: f64, hi_deg: f64, bins: usize) -> Vec<f64> {
        (0..=bins)
            .map(|i| (lo_deg + (hi_deg - lo_deg) * i as f64 / bins as f64).to_radians())
            .collect()
    }
}

/// Monte-Carlo angular histogram of `n` scattering events.
pub fn mc_sample_rotated<T: Scalar>(
    kin: &Kinematics2D<T>,
    target: &TargetSuperposition<T>,
    beam: &ProbeBeam<T>,
    n: u64,
    seed: u64,
    edges: &[f64],
) -> Result<AngularHistogram> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "events",
            reason: "need at least one event".into(),
        });
    }
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter {
            name: "edges",
            reason: "need at least 2 strictly increasing edges".into(),
        });
    }
    let bins = edges.len() - 1;
    let shards: Vec<(u64, u64)> = shard_sizes(n).collect();
    let partial: Vec<(Vec<u64>, u64)> = shards
        .par_iter()
        .map(|&(shard, size)| {
            let mut rng = shard_rng(seed, shard);
            let mut counts = vec![0u64; bins];
            let mut outside = 0;
            for _ in 0..size {
                let e = sample_event_2d(kin, target, beam, &mut rng);
                let theta = e.fin.p_y_fin.as_f64().atan2(e.fin.p_x_fin.as_f64()).abs();
                let k = edges.partition_point(|&x| x <= theta);
                if k == 0 || k > bins {
                    outside += 1;
                } else {
                    counts[k - 1] += 1;
                }
            }
            (counts, outside)
        })
        .collect();
    let mut counts = vec![0u64; bins];
    let mut outside = 0;
    for (c, o) in partial {
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
        outside += o;
    }
    Ok(AngularHistogram {
        edges: edges.to_vec(),
        counts,
        outside,
        events: n,
        seed,
    })
}

/// Probability of landing in each bin of `|θ_fin|`, `2 ∫ P_α(θ) dθ / ε²`,
/// from the angular distribution. `None` for bins that touch the forward
/// window.
pub fn expected_bin_probabilities<T: Scalar>(
    kin: &Kinematics2D<T>,
    target: &TargetSuperposition<T>,
    beam: &ProbeBeam<T>,
    edges: &[f64],
    settings: &AngularSettings,
) -> Result<Vec<Option<f64>>> {
    let (lo, hi) = kin.forward_window(beam.theta_in());
    let (lo, hi) = (lo.as_f64(), hi.as_f64());
    let (x, w) = gauss_legendre(8);
    let sub = 4;
    let eps2 = kin.prefactor().as_f64()
        / Kinematics2D::new(*kin.masses()).prefactor().as_f64();
    edges
        .par_windows(2)
        .map(|e| -> Result<Option<f64>> {
            if e[1] >= lo && e[0] <= hi {
                return Ok(None);
            }
            let width = (e[1] - e[0]) / sub as f64;
            let mut total = 0.0;
            for k in 0..sub {
                let c = e[0] + (k as f64 + 0.5) * width;
                for (xi, wi) in x.iter().zip(&w) {
                    let theta = T::lit(c + 0.5 * width * xi);
                    let comps = kin.angular_components(target, beam, theta, settings)?;
                    total += 0.5 * width * wi * comps.density(target, target.phase()).as_f64();
                }
            }
            Ok(Some(2.0 * total / eps2))
        })
        .collect()
}

/// Per-bin comparison of a histogram with expected probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct BinComparison {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub observed: u64,
    pub expected: f64,
    pub sigma: f64,
}

impl BinComparison {
    /// `(observed - expected) / σ`.
    pub fn pull(&self) -> f64 {
        (self.observed as f64 - self.expected) / self.sigma
    }
}

/// Binomial comparison over the bins with an expectation.
pub fn compare_histogram(hist: &AngularHistogram, probabilities: &[Option<f64>]) -> Vec<BinComparison> {
    let n = hist.events as f64;
    hist.edges
        .windows(2)
        .zip(&hist.counts)
        .zip(probabilities)
        .filter_map(|((e, &observed), q)| {
            q.map(|q| BinComparison {
                theta_lo: e[0],
                theta_hi: e[1],
                observed,
                expected: n * q,
                sigma: (n * q * (1.0 - q)).sqrt(),
            })
        })
        .collect()
}

/// Momentum density by direct quadrature of the position wavefunction's
/// Fourier integral, `|∫ ψ(X) e^{-iPX} dX|² / 2π`.
pub fn density_by_fourier<T: Scalar>(target: &TargetSuperposition<T>, p: T) -> T {
    let (d, w) = (target.separation(), target.width());
    let half = d * T::half() + T::lit(12.0) * w;
    let n = ((T::two() * half / (w / T::lit(40.0))).ceil().as_f64() as usize).max(1000);
    let re = trapezoid(
        |x: T| {
            let (a, b) = target.position_amplitude(x);
            a * (p * x).cos() + b * (p * x).sin()
        },
        -half,
        half,
        n,
    );
    let im = trapezoid(
        |x: T| {
            let (a, b) = target.position_amplitude(x);
            b * (p * x).cos() - a * (p * x).sin()
        },
        -half,
        half,
        n,
    );
    (re * re + im * im) / T::tau()
}

/// Fourier-quadrature density against the closed form over `±4/w`.
pub fn density_dft_oracle<T: Scalar>(target: &TargetSuperposition<T>, points: usize) -> OracleReport {
    let span = 4.0 / target.width().as_f64();
    let points = points.max(2);
    let mut worst = (0.0_f64, 0.0_f64);
    let mut peak = 0.0_f64;
    for i in 0..points {
        let p = T::lit(-span + 2.0 * span * i as f64 / (points - 1) as f64);
        let fast = target.momentum_density(p).as_f64();
        let slow = density_by_fourier(target, p).as_f64();
        peak = peak.max(fast);
        if (slow - fast).abs() >= (worst.0 - worst.1).abs() {
            worst = (slow, fast);
        }
    }
    let err = (worst.0 - worst.1).abs() / peak;
    OracleReport::new("density-dft", worst.0, worst.1, points as u64).with_rel_err(err)
}

/// Newton solve of the raw conservation laws for `(P_in, P_fin)` given
/// both probe momenta:
///
/// ```text
/// p_x_in + P_in = p_x_fin + P_fin
/// |p_in|²/m + P_in²/M = |p_fin|²/m + P_fin²/M
/// ```
pub fn solve_conservation<T: Scalar>(kin: &Kinematics2D<T>, p_in: [T; 2], p_fin: [T; 2]) -> Result<(T, T, usize)> {
    let (m, big) = (kin.masses().probe().as_f64(), kin.masses().target().as_f64());
    let pi = [p_in[0].as_f64(), p_in[1].as_f64()];
    let pf = [p_fin[0].as_f64(), p_fin[1].as_f64()];
    let residual = |u: [f64; 2]| {
        [
            pi[0] + u[0] - pf[0] - u[1],
            (pi[0] * pi[0] + pi[1] * pi[1] - pf[0] * pf[0] - pf[1] * pf[1]) / m + (u[0] * u[0] - u[1] * u[1]) / big,
        ]
    };
    newton2(residual, [0.0, pi[0] - pf[0]]).map(|(u, it)| (T::lit(u[0]), T::lit(u[1]), it))
}

fn newton2<F: Fn([f64; 2]) -> [f64; 2]>(f: F, mut u: [f64; 2]) -> Result<([f64; 2], usize)> {
    for it in 1..=100 {
        let r = f(u);
        let scale = u[0].abs().max(u[1].abs()).max(1.0);
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let h = 1e-6 * scale;
            let (mut up, mut dn) = (u, u);
            up[j] += h;
            dn[j] -= h;
            let (fp, fm) = (f(up), f(dn));
            for i in 0..2 {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (r[0] * jac[1][1] - r[1] * jac[0][1]) / det;
        let dy = (jac[0][0] * r[1] - jac[1][0] * r[0]) / det;
        u = [u[0] - dx, u[1] - dy];
        if dx.abs().max(dy.abs()) <= 1e-14 * scale {
            return Ok((u, it));
        }
    }
    let r = f(u);
    let scale = u[0].abs().max(u[1].abs()).max(1.0);
    if r[0].abs().max(r[1].abs()) < 1e-12 * scale * scale {
        return Ok((u, 100));
    }
    Err(Error::ToleranceNotReached {
        estimate: u[0],
        error: r[0].abs().max(r[1].abs()),
    })
}

pub fn pstar_oracle<T: Scalar>(kin: &Kinematics2D<T>, p_in: [T; 2], p_fin: [T; 2]) -> Result<OracleReport> {
    let fast = kin.pstar_in(p_in, p_fin)?.as_f64();
    let (slow, _, iters) = solve_conservation(kin, p_in, p_fin)?;
    Ok(OracleReport::new("pstar", slow.as_f64(), fast, iters as u64))
}

/// `prob_2d` rebuilt in the rotated frame. The final state is uniform on
/// the circle `|p̄_ρ| = const` at fixed `p̄_z`; pushing that measure back
/// to `(p_x, p_y, P)` and integrating out both target momenta leaves
///
/// ```text
/// ε² ρ(P_in) √(m/M) / (2π |p̄_ρ| |det J|)
/// ```
///
/// with `J` the finite-difference Jacobian of the two rotated-frame
/// constraints in `(P_in, P_fin)`.
pub fn frame_jacobian_density<T: Scalar>(
    kin: &Kinematics2D<T>,
    target: &TargetSuperposition<T>,
    p_in: [T; 2],
    p_fin: [T; 2],
) -> Result<f64> {
    let frame = kin.frame();
    let constraints = |u: [f64; 2]| {
        let qi = frame.state_to_rotated(p_in, T::lit(u[0]));
        let qf = frame.state_to_rotated(p_fin, T::lit(u[1]));
        let ri = qi[0].hypot(qi[1]).as_f64();
        let rf = qf[0].hypot(qf[1]).as_f64();
        [qf[2].as_f64() - qi[2].as_f64(), rf - ri]
    };
    let guess = solve_conservation(kin, p_in, p_fin).map(|(a, b, _)| [a.as_f64(), b.as_f64()])?;
    let (u, _) = newton2(constraints, guess)?;
    let scale = u[0].abs().max(u[1].abs()).max(1.0);
    let h = 1e-5 * scale;
    let mut jac = [[0.0; 2]; 2];
    for j in 0..2 {
        let (mut up, mut dn) = (u, u);
        up[j] += h;
        dn[j] -= h;
        let (fp, fm) = (constraints(up), constraints(dn));
        for i in 0..2 {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let det = (jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]).abs();
    let qf = frame.state_to_rotated(p_fin, T::lit(u[1]));
    let radius = qf[0].hypot(qf[1]).as_f64();
    let eps2 = kin.prefactor().as_f64() / Kinematics2D::new(*kin.masses()).prefactor().as_f64();
    let ratio = (kin.masses().probe() / kin.masses().target()).as_f64().sqrt();
    let rho = target.momentum_density(T::lit(u[0])).as_f64();
    Ok(eps2 * rho * ratio / (std::f64::consts::TAU * radius * det))
}

pub fn frame_oracle<T: Scalar>(
    kin: &Kinematics2D<T>,
    target: &TargetSuperposition<T>,
    p_in: [T; 2],
    p_fin: [T; 2],
) -> Result<OracleReport> {
    let fast = kin.prob_2d(&target.exact(), p_in, p_fin)?.as_f64();
    let slow = frame_jacobian_density(kin, target, p_in, p_fin)?;
    Ok(OracleReport::new("frame-jacobian", slow, fast, 1))
}

/// `∂P*/∂p` along the beam axis by central differences with step
/// `1e-5 p`.
pub fn dpstar_central<T: Scalar>(kin: &Kinematics2D<T>, theta_in: T, p: T, p_fin: [T; 2]) -> Result<T> {
    let h = T::lit(1e-5) * p;
    let at = |p: T| kin.pstar_in([p * theta_in.cos(), p * theta_in.sin()], p_fin);
    Ok((at(p + h)? - at(p - h)?) / (T::two() * h))
}

/// Locates the zero of the finite-difference `∂P*/∂p` along `theta_fin`
/// and reports the final target momentum there against the transfer
/// condition. The scan starts at `|p_fin| = 0`: at `M/m = cos² θ_in` the
/// zero sits exactly there and is touched rather than crossed.
pub fn transfer_root_oracle<T: Scalar>(kin: &Kinematics2D<T>, beam: &ProbeBeam<T>, theta_fin: T) -> Result<OracleReport> {
    let p = beam.momentum();
    let theta_in = beam.theta_in();
    let (cf, sf) = (theta_fin.cos(), theta_fin.sin());
    let g = |r: T| dpstar_central(kin, theta_in, p, [r * cf, r * sf]);
    let steps = 4000;
    let hi = T::lit(20.0) * p;
    let step = hi / T::from_usize_lossy(steps);
    let mut evaluations = 0u64;
    let mut prev: Option<(T, T)> = None;
    let mut found = None;
    for i in 0..=steps {
        let r = step * T::from_usize_lossy(i);
        evaluations += 1;
        let cur = g(r).ok().map(|v| (r, v));
        if let Some((r, v)) = cur {
            if v.abs() < T::lit(1e-9) {
                found = Some(r);
                break;
            }
        }
        if let (Some((a, fa)), Some((b, fb))) = (prev, cur) {
            if fa * fb < T::zero() {
                let root = find_root(|r| g(r).unwrap_or(T::nan()), a, b, T::lit(1e-13) * p)?;
                // a sign change through the forward pole is not a zero
                if g(root)?.abs() < T::lit(1e-6) {
                    found = Some(root);
                    break;
                }
            }
        }
        prev = cur;
    }
    let root = found.ok_or(Error::NoSignChange {
        a: 0.0,
        b: hi.as_f64(),
    })?;
    let event = kin.event(beam.direction_scaled(p), [root * cf, root * sf])?;
    Ok(OracleReport::new(
        "transfer-root",
        event.fin.target_fin.as_f64(),
        kin.transfer_condition(beam).as_f64(),
        evaluations,
    ))
}

/// `∫ [1 + cos(14πx)] e^{-x²}` over `±8`: adaptive Gauss-Kronrod against
/// a 200k-panel trapezoid.
pub fn quadrature_oracle() -> Result<OracleReport> {
    let f = |x: f64| (1.0 + (7.0 * std::f64::consts::TAU * x).cos()) * (-x * x).exp();
    let fast = integrate(f, -8.0, 8.0, &QuadSpec::adaptive(1e-12))?;
    let slow = trapezoid(f, -8.0, 8.0, 200_000);
    Ok(OracleReport::new("quadrature", slow, fast, 200_001))
}

/// Named groups of oracles the command line can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleSuite {
    Quadrature,
    DensityDft,
    Pstar,
    Frame,
    Derivative,
    Transfer,
    AngularMc,
    All,
}

impl OracleSuite {
    pub const NAMES: [&'static str; 8] = [
        "quadrature",
        "density-dft",
        "pstar",
        "frame",
        "derivative",
        "transfer",
        "angular-mc",
        "all",
    ];

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "quadrature" => Self::Quadrature,
            "density-dft" => Self::DensityDft,
            "pstar" => Self::Pstar,
            "frame" => Self::Frame,
            "derivative" => Self::Derivative,
            "transfer" => Self::Transfer,
            "angular-mc" => Self::AngularMc,
            "all" => Self::All,
            _ => return None,
        })
    }

    fn includes(self, other: Self) -> bool {
        self == other || self == Self::All
    }
}

/// Inputs shared by the oracle suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub theta_fin: f64,
    pub seed: u64,
    pub events: u64,
    /// Final momenta probed by the pointwise oracles, in units of `|p_in|`.
    pub pfin_ratios: [f64; 3],
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            theta_fin: 60f64.to_radians(),
            seed: 1,
            events: 1_000_000,
            pfin_ratios: [0.6, 0.9, 1.2],
        }
    }
}

/// Runs every oracle in `suite` at the given parameters.
pub fn run_suite(suite: OracleSuite, params: &ValidatedParams<f64>, config: &SuiteConfig) -> Result<Vec<OracleReport>> {
    let kin = Kinematics2D::new(params.masses).with_coupling(params.coupling);
    let (beam, target) = (params.beam, params.target);
    let p = beam.momentum();
    let p_in = beam.direction_scaled(p);
    let (cf, sf) = (config.theta_fin.cos(), config.theta_fin.sin());
    let finals: Vec<[f64; 2]> = config
        .pfin_ratios
        .iter()
        .map(|r| [r * p * cf, r * p * sf])
        .collect();
    let mut out = Vec::new();
    if suite.includes(OracleSuite::Quadrature) {
        out.push(quadrature_oracle()?);
    }
    if suite.includes(OracleSuite::DensityDft) {
        out.push(density_dft_oracle(&target, 41));
    }
    if suite.includes(OracleSuite::Pstar) {
        for pf in &finals {
            out.push(pstar_oracle(&kin, p_in, *pf)?);
        }
    }
    if suite.includes(OracleSuite::Frame) {
        for pf in &finals {
            out.push(frame_oracle(&kin, &target, p_in, *pf)?);
        }
    }
    if suite.includes(OracleSuite::Derivative) {
        for pf in &finals {
            let fd = dpstar_central(&kin, beam.theta_in(), p, *pf)?;
            let an = kin.dpstar_dpin(beam.theta_in(), p, *pf)?;
            out.push(OracleReport::new("dpstar-dp", fd, an, 2).with_rel_err((fd - an).abs() / an.abs().max(1.0)));
        }
    }
    if suite.includes(OracleSuite::Transfer) {
        out.push(transfer_root_oracle(&kin, &beam, config.theta_fin)?);
    }
    if suite.includes(OracleSuite::AngularMc) {
        out.push(angular_mc_report(&kin, &target, &beam, config)?);
    }
    Ok(out)
}

/// Fraction of 2° bins over `[10°, 170°]` whose Monte-Carlo count lies
/// within 3σ of the quadrature expectation. Bins within 2° of the
/// incidence direction are skipped: the forward cut and the logarithmic
/// peak there make the binned expectation unreliable.
fn angular_mc_report(
    kin: &Kinematics2D<f64>,
    target: &TargetSuperposition<f64>,
    beam: &ProbeBeam<f64>,
    config: &SuiteConfig,
) -> Result<OracleReport> {
    let edges = AngularHistogram::uniform_edges(10.0, 170.0, 80);
    let hist = mc_sample_rotated(kin, target, beam, config.events, config.seed, &edges)?;
    let mut probs = expected_bin_probabilities(kin, target, beam, &edges, &AngularSettings::default())?;
    mask_forward_bins(&mut probs, &edges, beam.theta_in(), 2f64.to_radians());
    let rows = compare_histogram(&hist, &probs);
    let within = rows.iter().filter(|r| r.pull().abs() <= 3.0).count();
    let fraction = within as f64 / rows.len().max(1) as f64;
    Ok(OracleReport::new("angular-mc", fraction, 1.0, config.events).with_seed(config.seed))
}

/// Drops the expectation of every bin that comes within `margin` of
/// `theta_in`.
pub fn mask_forward_bins(probs: &mut [Option<f64>], edges: &[f64], theta_in: f64, margin: f64) {
    for (q, e) in probs.iter_mut().zip(edges.windows(2)) {
        if e[1] > theta_in - margin && e[0] < theta_in + margin {
            *q = None;
        }
    }
}
