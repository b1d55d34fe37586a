//! Two-dimensional model: a probe moving in the plane scatters off a target
//! that is free to move only along `x` ("one-slit Young").
//!
//! With the target coordinate rescaled, `p_z = P √(m/M)`, and the axes
//! turned by `κ = arctan √(m/M)`, the contact interaction becomes scattering
//! off a fixed line: the rotated `p̄_z` and `|p̄_ρ|` are conserved while the
//! azimuth in the `(p̄_x, p̄_y)` plane is uniform. Back in the lab frame
//! `p_x + P` and the kinetic energy survive, `p_y` does not.
//!
//! For a sharp incident momentum the final-state density is
//!
//! ```text
//! prob(p_fin) = ε² √M √(M+m) / (2π m) · ρ(P*) / |Δ|,
//! Δ  = p_x_fin - p_x_in,
//! P* = ½ [Δ + (M/m)(|p_fin|² - |p_in|²) / Δ]
//! ```

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{CouplingConstant, MassPair, ProbeBeam};
use crate::quad::{integrate_over, normal_hermite_nodes, normal_legendre_nodes, QuadSpec};
use crate::scalar::{wrap_phase, Scalar};
use crate::target::{MomentumDensity, TargetSuperposition};
use crate::visibility::VisibilityResult;

/// Mass-rescaled frame turned by `κ = arctan √(m/M)` about the `y` axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedFrame<T> {
    kappa: T,
    sin: T,
    cos: T,
    tan: T,
    scale: T,
}

impl<T: Scalar> RotatedFrame<T> {
    pub fn new(masses: &MassPair<T>) -> Self {
        let scale = (masses.probe() / masses.target()).sqrt();
        let kappa = scale.atan();
        Self {
            kappa,
            sin: kappa.sin(),
            cos: kappa.cos(),
            tan: scale,
            scale,
        }
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn sin_kappa(&self) -> T {
        self.sin
    }

    pub fn cos_kappa(&self) -> T {
        self.cos
    }

    pub fn tan_kappa(&self) -> T {
        self.tan
    }

    /// `p_z = P √(m/M)`.
    pub fn scale_target(&self, target: T) -> T {
        target * self.scale
    }

    pub fn unscale_target(&self, p_z: T) -> T {
        p_z / self.scale
    }

    pub fn to_rotated(&self, p: [T; 3]) -> [T; 3] {
        [
            p[0] * self.cos - p[2] * self.sin,
            p[1],
            p[0] * self.sin + p[2] * self.cos,
        ]
    }

    pub fn from_rotated(&self, q: [T; 3]) -> [T; 3] {
        [
            q[0] * self.cos + q[2] * self.sin,
            q[1],
            -q[0] * self.sin + q[2] * self.cos,
        ]
    }

    /// Rotated three-vector of a probe momentum and target momentum.
    pub fn state_to_rotated(&self, probe: [T; 2], target: T) -> [T; 3] {
        self.to_rotated([probe[0], probe[1], self.scale_target(target)])
    }

    /// Inverse of [`RotatedFrame::state_to_rotated`].
    pub fn state_from_rotated(&self, q: [T; 3]) -> ([T; 2], T) {
        let p = self.from_rotated(q);
        ([p[0], p[1]], self.unscale_target(p[2]))
    }
}

/// Probe and target momenta after the collision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalState2D<T> {
    pub p_x_fin: T,
    pub p_y_fin: T,
    pub target_fin: T,
}

impl<T: Scalar> FinalState2D<T> {
    pub fn probe(&self) -> [T; 2] {
        [self.p_x_fin, self.p_y_fin]
    }
}

/// A complete collision: incident state plus final state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event2D<T> {
    pub p_in: [T; 2],
    pub target_in: T,
    pub fin: FinalState2D<T>,
}

impl<T: Scalar> Event2D<T> {
    pub fn x_momentum_in(&self) -> T {
        self.p_in[0] + self.target_in
    }

    pub fn x_momentum_out(&self) -> T {
        self.fin.p_x_fin + self.fin.target_fin
    }

    pub fn energy_in(&self, masses: &MassPair<T>) -> T {
        kinetic(masses, self.p_in, self.target_in)
    }

    pub fn energy_out(&self, masses: &MassPair<T>) -> T {
        kinetic(masses, self.fin.probe(), self.fin.target_fin)
    }
}

fn kinetic<T: Scalar>(masses: &MassPair<T>, p: [T; 2], target: T) -> T {
    (p[0] * p[0] + p[1] * p[1]) / (T::two() * masses.probe())
        + target * target / (T::two() * masses.target())
}

/// Numerical controls for angular distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularSettings {
    /// Relative tolerance of the radial integral.
    pub radial_tol: f64,
    /// Gauss-Hermite node count the beam fold starts from.
    pub initial_nodes: usize,
    pub max_nodes: usize,
    /// Relative change between node doublings at which the fold stops.
    pub fold_tol: f64,
}

impl Default for AngularSettings {
    fn default() -> Self {
        Self {
            radial_tol: 1e-7,
            initial_nodes: 16,
            max_nodes: 256,
            fold_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics2D<T> {
    masses: MassPair<T>,
    coupling: CouplingConstant<T>,
    frame: RotatedFrame<T>,
    forward_cut: T,
}

impl<T: Scalar> Kinematics2D<T> {
    pub fn new(masses: MassPair<T>) -> Self {
        Self {
            masses,
            coupling: CouplingConstant::default(),
            frame: RotatedFrame::new(&masses),
            forward_cut: T::lit(1e-3),
        }
    }

    pub fn with_coupling(mut self, coupling: CouplingConstant<T>) -> Self {
        self.coupling = coupling;
        self
    }

    /// Sets the excluded strip `|Δ| ≤ cut · |p_in|` around the forward
    /// direction.
    pub fn with_forward_cut(mut self, cut: T) -> Result<Self> {
        if !(cut > T::zero() && cut < T::one()) {
            return Err(Error::InvalidParameter {
                name: "forward_cut",
                reason: format!("must lie in (0, 1), got {cut}"),
            });
        }
        self.forward_cut = cut;
        Ok(self)
    }

    pub fn masses(&self) -> &MassPair<T> {
        &self.masses
    }

    pub fn frame(&self) -> &RotatedFrame<T> {
        &self.frame
    }

    pub fn forward_cut(&self) -> T {
        self.forward_cut
    }

    fn mu(&self) -> T {
        self.masses.target() / self.masses.probe()
    }

    fn check_forward(&self, delta: T, p_in_norm: T) -> Result<()> {
        let cut = self.forward_cut * p_in_norm;
        if delta.abs() <= cut {
            return Err(Error::ForwardSingularity {
                delta: delta.abs().as_f64(),
                cut: cut.as_f64(),
            });
        }
        Ok(())
    }

    fn pstar_raw(&self, p_in: [T; 2], p_fin: [T; 2]) -> T {
        let delta = p_fin[0] - p_in[0];
        let ef = p_fin[0] * p_fin[0] + p_fin[1] * p_fin[1];
        let ei = p_in[0] * p_in[0] + p_in[1] * p_in[1];
        T::half() * (delta + self.mu() * (ef - ei) / delta)
    }

    /// Initial target momentum consistent with `p_in → p_fin`.
    pub fn pstar_in(&self, p_in: [T; 2], p_fin: [T; 2]) -> Result<T> {
        self.check_forward(p_fin[0] - p_in[0], norm(p_in))?;
        Ok(self.pstar_raw(p_in, p_fin))
    }

    /// The collision taking `p_in` to `p_fin`, with the target momenta
    /// fixed by conservation.
    pub fn event(&self, p_in: [T; 2], p_fin: [T; 2]) -> Result<Event2D<T>> {
        let target_in = self.pstar_in(p_in, p_fin)?;
        Ok(Event2D {
            p_in,
            target_in,
            fin: FinalState2D {
                p_x_fin: p_fin[0],
                p_y_fin: p_fin[1],
                target_fin: target_in + p_in[0] - p_fin[0],
            },
        })
    }

    /// `ε² √M √(M+m) / (2π m)`.
    pub fn prefactor(&self) -> T {
        let (m, big) = (self.masses.probe(), self.masses.target());
        self.coupling.squared() * big.sqrt() * (big + m).sqrt() / (T::tau() * m)
    }

    /// Density of the final probe momentum `(p_x, p_y)` for a sharp
    /// incident momentum.
    pub fn prob_2d(&self, density: &MomentumDensity<T>, p_in: [T; 2], p_fin: [T; 2]) -> Result<T> {
        let pstar = self.pstar_in(p_in, p_fin)?;
        let delta = (p_fin[0] - p_in[0]).abs();
        Ok(self.prefactor() * density.eval(pstar) / delta)
    }

    /// `∂P*/∂p` along the beam axis at incident magnitude `p`, holding the
    /// final probe momentum fixed.
    pub fn dpstar_dpin(&self, theta_in: T, p: T, p_fin: [T; 2]) -> Result<T> {
        let ci = theta_in.cos();
        let p_in = [p * ci, p * theta_in.sin()];
        let pstar = self.pstar_in(p_in, p_fin)?;
        let delta = p_fin[0] - p_in[0];
        Ok(-ci + (ci * pstar - self.mu() * p) / delta)
    }

    /// Radial final momenta along `theta_fin` at which `P* = 0`, the peak of
    /// the target envelope.
    pub fn envelope_peak_pfin(&self, p: T, theta_in: T, theta_fin: T) -> Vec<T> {
        let (ci, cf) = (theta_in.cos(), theta_fin.cos());
        let mu = self.mu();
        let roots = quadratic_roots(mu + cf * cf, -T::two() * p * ci * cf, p * p * (ci * ci - mu));
        self.admissible(roots, p, ci, cf)
    }

    /// Radial final momenta along `theta_fin` at which `P*` is stationary in
    /// `|p_fin|`. Only there do the target fringes survive the radial
    /// integration.
    pub fn stationary_pfin(&self, p: T, theta_in: T, theta_fin: T) -> Vec<T> {
        let (ci, cf) = (theta_in.cos(), theta_fin.cos());
        let mu = self.mu();
        let c = p * p * cf * (ci * ci + mu) / (cf * cf + mu);
        let roots = quadratic_roots(cf, -T::two() * p * ci, c);
        self.admissible(roots, p, ci, cf)
    }

    fn admissible(&self, roots: Vec<T>, p: T, ci: T, cf: T) -> Vec<T> {
        roots
            .into_iter()
            .filter(|&x| x > T::zero() && (x * cf - p * ci).abs() > self.forward_cut * p)
            .collect()
    }

    /// Final momentum along `theta_fin` that carries the fringe contrast:
    /// the stationary point with the largest radial weight, falling back to
    /// the envelope peak when `P*` has no stationary point on the ray.
    pub fn dominant_pfin(&self, target: &TargetSuperposition<T>, p: T, theta_in: T, theta_fin: T) -> Option<T> {
        let (ci, cf) = (theta_in.cos(), theta_fin.cos());
        let weight = |pf: T| {
            let p_in = [p * ci, p * theta_in.sin()];
            let p_fin = [pf * cf, pf * theta_fin.sin()];
            let pstar = self.pstar_raw(p_in, p_fin);
            let x = pstar * target.width();
            pf / (p_fin[0] - p_in[0]).abs() * (-x * x).exp()
        };
        let pick = |cands: Vec<T>| {
            cands
                .into_iter()
                .map(|pf| (pf, weight(pf)))
                .filter(|(_, w)| w.is_finite())
                .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite weights"))
                .map(|(pf, _)| pf)
        };
        pick(self.stationary_pfin(p, theta_in, theta_fin))
            .or_else(|| pick(self.envelope_peak_pfin(p, theta_in, theta_fin)))
    }

    /// Target final momentum `M p / (m cos θ_in)` at which the orthogonality
    /// of the two target states is handed over completely to the probe.
    pub fn transfer_condition(&self, beam: &ProbeBeam<T>) -> T {
        self.mu() * beam.momentum() / beam.theta_in().cos()
    }

    /// Collision along `theta_fin` whose final target momentum meets the
    /// transfer condition.
    pub fn transfer_event(&self, beam: &ProbeBeam<T>, theta_fin: T) -> Result<Event2D<T>> {
        let p = beam.momentum();
        let (ci, cf, sf) = (beam.theta_in().cos(), theta_fin.cos(), theta_fin.sin());
        let mu = self.mu();
        // P* - Δ = μ p / cos θ_in along the ray, quadratic in |p_fin|
        let a = mu - cf * cf;
        let b = T::two() * p * cf * (ci - mu / ci);
        let c = p * p * (mu - ci * ci);
        let roots = quadratic_roots(a, b, c);
        let p_in = beam.direction_scaled(p);
        roots
            .into_iter()
            // a probe brought to rest lies on every ray
            .filter(|&r| r >= -T::lit(64.0) * T::epsilon() * p)
            .map(|r| r.max(T::zero()))
            .filter(|&r| (r * cf - p_in[0]).abs() > self.forward_cut * p)
            .map(|r| self.event(p_in, [r * cf, r * sf]))
            .find(|e| e.is_ok())
            .unwrap_or(Err(Error::InvalidParameter {
                name: "theta_fin",
                reason: "no final state on this ray meets the transfer condition".into(),
            }))
    }

    /// Incident magnitudes along the beam axis that reach the given final
    /// state, ascending. A double root appears once.
    pub fn kinematic_roots(&self, p_fin: [T; 2], target_fin: T, theta_in: T) -> Vec<T> {
        let ci = theta_in.cos();
        let mu = self.mu();
        let s = target_fin + p_fin[0];
        let ef = p_fin[0] * p_fin[0] + p_fin[1] * p_fin[1];
        let a = T::one() + ci * ci / mu;
        let b = -T::two() * ci * s / mu;
        let c = (s * s - target_fin * target_fin) / mu - ef;
        let mut roots: Vec<T> = quadratic_roots(a, b, c)
            .into_iter()
            .filter(|&r| r > T::zero())
            .collect();
        roots.sort_by(|x, y| x.partial_cmp(y).expect("finite roots"));
        roots
    }

    pub fn count_kinematic_roots(&self, p_fin: [T; 2], target_fin: T, beam: &ProbeBeam<T>) -> usize {
        self.kinematic_roots(p_fin, target_fin, beam.theta_in()).len()
    }

    /// Angular interval around `theta_in` where `|cos θ - cos θ_in|` falls
    /// inside the forward cut.
    pub fn forward_window(&self, theta_in: T) -> (T, T) {
        let ci = theta_in.cos();
        let hi = (ci - self.forward_cut).max(-T::one()).acos();
        let lo = (ci + self.forward_cut).min(T::one()).acos();
        (lo, hi)
    }

    fn in_forward_window(&self, theta_in: T, theta: T) -> bool {
        (theta.cos() - theta_in.cos()).abs() <= self.forward_cut
    }

    /// Radial envelope, cosine and sine integrals along `theta` for a sharp
    /// incident magnitude `p`, without the phase-dependent norm.
    fn radial_components(
        &self,
        target: &TargetSuperposition<T>,
        theta_in: T,
        p: T,
        theta: T,
        p_max: T,
        settings: &AngularSettings,
    ) -> Result<[T; 3]> {
        let (ci, cf) = (theta_in.cos(), theta.cos());
        let mu = self.mu();
        let (d, w) = (target.separation(), target.width());
        let px_in = p * ci;
        let cut = self.forward_cut * p;
        let kernel = move |pf: T| -> Option<(T, T)> {
            let delta = pf * cf - px_in;
            if delta.abs() <= cut {
                return None;
            }
            let pstar = T::half() * (delta + mu * (pf * pf - p * p) / delta);
            let x = pstar * w;
            let g = pf / delta.abs() * (-x * x).exp();
            Some((g, pstar * d))
        };

        let mut breaks = vec![T::zero(), p_max];
        let panels = 8;
        for k in 1..panels {
            breaks.push(p_max * T::from_usize_lossy(k) / T::from_usize_lossy(panels));
        }
        breaks.extend(self.stationary_pfin(p, theta_in, theta));
        breaks.extend(self.envelope_peak_pfin(p, theta_in, theta));
        if cf != T::zero() {
            let centre = px_in / cf;
            let half = cut / cf.abs();
            breaks.push(centre - half);
            breaks.push(centre + half);
        }
        let mut breaks: Vec<T> = breaks
            .into_iter()
            .filter(|&b| b >= T::zero() && b <= p_max)
            .collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        breaks.dedup();

        let spec = QuadSpec::adaptive(T::lit(settings.radial_tol));
        let base = integrate_over(|pf| kernel(pf).map_or(T::zero(), |(g, _)| g), &breaks, &spec)?.value;
        let floor = spec.with_abs_tol(T::lit(settings.radial_tol) * base.abs());
        let cos = integrate_over(
            |pf| kernel(pf).map_or(T::zero(), |(g, ph)| g * ph.cos()),
            &breaks,
            &floor,
        )?
        .value;
        let sin = integrate_over(
            |pf| kernel(pf).map_or(T::zero(), |(g, ph)| g * ph.sin()),
            &breaks,
            &floor,
        )?
        .value;
        let c = self.prefactor();
        Ok([c * base, c * cos, c * sin])
    }

    fn p_max(&self, target: &TargetSuperposition<T>, beam: &ProbeBeam<T>) -> T {
        let top = beam.momentum() + T::lit(4.0) * beam.spread();
        let support = T::lit(8.0) / target.width();
        T::lit(3.0) * (top * top + support * support / self.mu()).sqrt()
    }

    /// Components of `P_α(θ)` at one angle, folded over the beam spread.
    pub fn angular_components(
        &self,
        target: &TargetSuperposition<T>,
        beam: &ProbeBeam<T>,
        theta: T,
        settings: &AngularSettings,
    ) -> Result<AngularComponents<T>> {
        let theta_in = beam.theta_in();
        if self.in_forward_window(theta_in, theta) {
            return Err(Error::ForwardSingularity {
                delta: (theta.cos() - theta_in.cos()).abs().as_f64(),
                cut: self.forward_cut.as_f64(),
            });
        }
        let p_max = self.p_max(target, beam);
        let eval = |nodes: &[(T, T)]| -> Result<[T; 3]> {
            let mut acc = [T::zero(); 3];
            for &(p, wt) in nodes {
                let v = self.radial_components(target, theta_in, p, theta, p_max, settings)?;
                for (a, x) in acc.iter_mut().zip(v) {
                    *a = *a + wt * x;
                }
            }
            Ok(acc)
        };
        let values = if beam.spread() == T::zero() {
            eval(&[(beam.momentum(), T::one())])?
        } else {
            let settled = |prev: &[T; 3], next: &[T; 3]| {
                let change = prev
                    .iter()
                    .zip(next)
                    .fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs()));
                change <= T::lit(settings.fold_tol) * next[0].abs()
            };
            let mut folded = None;
            let rate = self.fringe_phase_rate(target, beam, theta);
            let k = (rate * T::SQRT_2() * beam.spread()).as_f64();
            if k * k <= settings.max_nodes as f64 {
                let mut n = settings.initial_nodes.max(2);
                let mut prev = eval(&beam_nodes(normal_hermite_nodes(beam.momentum(), beam.spread(), n)))?;
                while 2 * n <= settings.max_nodes {
                    n *= 2;
                    let next = eval(&beam_nodes(normal_hermite_nodes(beam.momentum(), beam.spread(), n)))?;
                    let done = settled(&prev, &next);
                    prev = next;
                    if done {
                        folded = Some(prev);
                        break;
                    }
                }
            }
            match folded {
                Some(v) => v,
                None => {
                    let phase = (rate * T::lit(17.0) * beam.spread()).as_f64();
                    let mut panels = ((phase / 2.0).ceil() as usize).max(16);
                    let legendre = |panels| beam_nodes(normal_legendre_nodes(beam.momentum(), beam.spread(), panels));
                    let mut prev = eval(&legendre(panels))?;
                    let mut out = None;
                    for _ in 0..4 {
                        panels *= 2;
                        let next = eval(&legendre(panels))?;
                        let done = settled(&prev, &next);
                        prev = next;
                        if done {
                            out = Some(prev);
                            break;
                        }
                    }
                    out.ok_or(Error::ToleranceNotReached {
                        estimate: prev[0].as_f64(),
                        error: settings.fold_tol,
                    })?
                }
            }
        };
        Ok(AngularComponents {
            theta,
            envelope: values[0],
            cos: values[1],
            sin: values[2],
            root_warning: self.both_roots_in_window(target, beam, theta),
        })
    }

    fn both_roots_in_window(&self, target: &TargetSuperposition<T>, beam: &ProbeBeam<T>, theta: T) -> bool {
        if beam.spread() == T::zero() {
            return false;
        }
        let p = beam.momentum();
        let p_in = beam.direction_scaled(p);
        let Some(pf) = self.dominant_pfin(target, p, beam.theta_in(), theta) else {
            return false;
        };
        let p_fin = [pf * theta.cos(), pf * theta.sin()];
        let Ok(event) = self.event(p_in, p_fin) else {
            return false;
        };
        let lo = p - T::lit(4.0) * beam.spread();
        let hi = p + T::lit(4.0) * beam.spread();
        let roots = self.kinematic_roots(p_fin, event.fin.target_fin, beam.theta_in());
        roots.len() == 2 && roots.iter().all(|&r| r >= lo && r <= hi)
    }

    /// `d |∂P*/∂p|` at the dominant final momentum: how fast the target
    /// fringes turn over as the incident magnitude moves across the beam.
    fn fringe_phase_rate(&self, target: &TargetSuperposition<T>, beam: &ProbeBeam<T>, theta: T) -> T {
        let p = beam.momentum();
        self.dominant_pfin(target, p, beam.theta_in(), theta)
            .and_then(|pf| self.dpstar_dpin(beam.theta_in(), p, [pf * theta.cos(), pf * theta.sin()]).ok())
            .map_or(T::zero(), |slope| target.separation() * slope.abs())
    }

    /// Estimated angular period of the fringes near `theta`, from the rate
    /// at which `P*` sweeps through the comb `2π/d` at the dominant final
    /// momentum. `None` where no final momentum dominates.
    pub fn angular_fringe_period(&self, target: &TargetSuperposition<T>, beam: &ProbeBeam<T>, theta: T) -> Option<T> {
        let p = beam.momentum();
        let pf = self.dominant_pfin(target, p, beam.theta_in(), theta)?;
        let delta = pf * theta.cos() - p * beam.theta_in().cos();
        if delta.abs() <= self.forward_cut * p {
            return None;
        }
        let energy = self.mu() * (pf * pf - p * p);
        let dpstar_ddelta = T::half() * (T::one() - energy / (delta * delta));
        let rate = (dpstar_ddelta * pf * theta.sin()).abs();
        let period = T::tau() / (target.separation() * rate);
        period.is_finite().then_some(period)
    }

    /// `P_α(θ)` components over a grid of final angles in `(0, π)`. Angles
    /// inside the forward window are dropped and reported.
    pub fn angular_scan(
        &self,
        target: &TargetSuperposition<T>,
        beam: &ProbeBeam<T>,
        theta_grid: &[T],
        settings: &AngularSettings,
    ) -> Result<AngularScan<T>> {
        if theta_grid.len() < 2 || theta_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter {
                name: "theta_grid",
                reason: "need at least 2 strictly increasing angles".into(),
            });
        }
        if let Some(&bad) = theta_grid.iter().find(|&&t| !(t > T::zero() && t < T::PI())) {
            return Err(Error::AngleOutOfRange(bad.as_f64()));
        }
        let theta_in = beam.theta_in();
        let (kept, excluded): (Vec<T>, Vec<T>) = theta_grid
            .iter()
            .partition(|&&t| !self.in_forward_window(theta_in, t));
        for w in kept.windows(2) {
            let straddles_cut = w[0] < theta_in && w[1] > theta_in;
            if straddles_cut {
                continue;
            }
            let period = [w[0], w[1]]
                .iter()
                .filter_map(|&t| self.angular_fringe_period(target, beam, t))
                .fold(T::infinity(), |a, b| a.min(b));
            if w[1] - w[0] > T::half() * period {
                return Err(Error::GridTooCoarse {
                    spacing: (w[1] - w[0]).as_f64(),
                    fringe: period.as_f64(),
                });
            }
        }
        let points = kept
            .par_iter()
            .map(|&t| self.angular_components(target, beam, t, settings))
            .collect::<Result<Vec<_>>>()?;
        Ok(AngularScan {
            target: *target,
            theta_in,
            points,
            excluded,
            forward_window: self.forward_window(theta_in),
        })
    }

    /// Normalized angular distribution at the target's own phase.
    pub fn angular_distribution(
        &self,
        target: &TargetSuperposition<T>,
        beam: &ProbeBeam<T>,
        theta_grid: &[T],
        settings: &AngularSettings,
    ) -> Result<AngularDistribution<T>> {
        self.angular_scan(target, beam, theta_grid, settings)?
            .distribution(target.phase())
    }

    /// `[P_α - P_{α+π}] / [P_α + P_{α+π}]` at `theta_fin`, maximized in
    /// magnitude over α by a coarse scan refined with golden sections.
    /// `best_alpha` is the phase at which the contrast is positive.
    pub fn visibility_2d(
        &self,
        target: &TargetSuperposition<T>,
        beam: &ProbeBeam<T>,
        theta_fin: T,
        settings: &AngularSettings,
    ) -> Result<VisibilityResult<T>> {
        let comps = self.angular_components(target, beam, theta_fin, settings)?;
        let contrast = |alpha: T| -> Result<T> {
            let a = comps.density(target, alpha);
            let b = comps.density(target, alpha + T::PI());
            let sum = a + b;
            if !(sum > T::zero()) {
                return Err(Error::DegenerateDensity(theta_fin.as_f64()));
            }
            Ok((a - b) / sum)
        };
        let coarse = 16;
        let step = T::PI() / T::from_usize_lossy(coarse);
        let mut best = (T::zero(), T::neg_infinity());
        for k in 0..coarse {
            let alpha = step * T::from_usize_lossy(k);
            let v = contrast(alpha)?.abs();
            if v > best.1 {
                best = (alpha, v);
            }
        }
        let objective = |alpha: T| contrast(alpha).map(|v| -v.abs());
        let alpha = golden_min(objective, best.0 - step, best.0 + step, T::lit(1e-4))?;
        let v = contrast(alpha)?;
        let alpha = if v < T::zero() { alpha + T::PI() } else { alpha };
        let mut result = VisibilityResult::numeric(v.abs());
        result.best_alpha = Some(wrap_phase(alpha));
        Ok(result)
    }

    /// `exp(-d² (∂P*/∂p)² Δp² / 2)` with the derivative taken at the
    /// dominant final momentum along `theta_fin`. Zero when no final
    /// momentum dominates.
    pub fn visibility_envelope_2d(
        &self,
        target: &TargetSuperposition<T>,
        beam: &ProbeBeam<T>,
        theta_fin: T,
    ) -> VisibilityResult<T> {
        if beam.spread() == T::zero() {
            return VisibilityResult::analytic(T::one());
        }
        let p = beam.momentum();
        let Some(pf) = self.dominant_pfin(target, p, beam.theta_in(), theta_fin) else {
            return VisibilityResult::analytic(T::zero());
        };
        let p_fin = [pf * theta_fin.cos(), pf * theta_fin.sin()];
        let slope = self
            .dpstar_dpin(beam.theta_in(), p, p_fin)
            .unwrap_or_else(|_| T::infinity());
        let x = target.separation() * slope * beam.spread();
        VisibilityResult::analytic((-x * x / T::two()).exp())
    }
}

fn norm<T: Scalar>(v: [T; 2]) -> T {
    v[0].hypot(v[1])
}

/// Real roots of `a x² + b x + c`, a double root reported once.
fn quadratic_roots<T: Scalar>(a: T, b: T, c: T) -> Vec<T> {
    if a == T::zero() {
        return if b == T::zero() { Vec::new() } else { vec![-c / b] };
    }
    let disc = b * b - T::lit(4.0) * a * c;
    let scale = b * b + (T::lit(4.0) * a * c).abs();
    if disc.abs() <= T::lit(64.0) * T::epsilon() * scale {
        return vec![-b / (T::two() * a)];
    }
    if disc < T::zero() {
        return Vec::new();
    }
    // stable form avoids cancellation in the smaller root
    let q = -T::half() * (b + b.signum() * disc.sqrt());
    let (r1, r2) = (q / a, c / q);
    if r1 < r2 {
        vec![r1, r2]
    } else {
        vec![r2, r1]
    }
}

fn beam_nodes<T: Scalar>(nodes: Vec<(T, T)>) -> Vec<(T, T)> {
    nodes
        .into_iter()
        .filter(|&(p, w)| p > T::zero() && w > T::zero())
        .collect()
}

fn golden_min<T: Scalar, F: Fn(T) -> Result<T>>(f: F, mut a: T, mut b: T, tol: T) -> Result<T> {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::two();
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(T::half() * (a + b))
}

/// α-independent pieces of `P_α(θ)`:
/// `P_α = N(α) [envelope + cos α · cos - sin α · sin]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularComponents<T> {
    pub theta: T,
    pub envelope: T,
    pub cos: T,
    pub sin: T,
    /// Both incident-momentum roots of the dominant final state lie within
    /// ±4Δp of the beam centre, so folding probabilities is unreliable.
    pub root_warning: bool,
}

impl<T: Scalar> AngularComponents<T> {
    /// `P_α(θ)` for the target's separation and width at phase `alpha`.
    pub fn density(&self, target: &TargetSuperposition<T>, alpha: T) -> T {
        let norm = target.with_phase(alpha).momentum_norm();
        let v = norm * (self.envelope + alpha.cos() * self.cos - alpha.sin() * self.sin);
        v.max(T::zero())
    }
}

/// Angular components over a grid, reusable for any phase α.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularScan<T> {
    target: TargetSuperposition<T>,
    theta_in: T,
    pub points: Vec<AngularComponents<T>>,
    /// Requested angles dropped for lying inside the forward window.
    pub excluded: Vec<T>,
    pub forward_window: (T, T),
}

impl<T: Scalar> AngularScan<T> {
    pub fn distribution(&self, alpha: T) -> Result<AngularDistribution<T>> {
        let theta_grid: Vec<T> = self.points.iter().map(|c| c.theta).collect();
        let raw: Vec<T> = self
            .points
            .iter()
            .map(|c| c.density(&self.target, alpha))
            .collect();
        // trapezoid over the grid without bridging the forward window
        let mut normalization = T::zero();
        for (i, w) in theta_grid.windows(2).enumerate() {
            if w[0] < self.theta_in && w[1] > self.theta_in {
                continue;
            }
            normalization = normalization + T::half() * (w[1] - w[0]) * (raw[i] + raw[i + 1]);
        }
        if !(normalization > T::zero()) {
            return Err(Error::DegenerateDensity(f64::NAN));
        }
        Ok(AngularDistribution {
            density: raw.iter().map(|&v| v / normalization).collect(),
            theta_grid,
            raw,
            alpha: wrap_phase(alpha),
            normalization,
            excluded: self.excluded.clone(),
            forward_window: self.forward_window,
            root_warnings: self
                .points
                .iter()
                .filter(|c| c.root_warning)
                .map(|c| c.theta)
                .collect(),
        })
    }
}

/// `P_α(θ_fin)` on a grid of final angles, normalized to unit integral over
/// the sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularDistribution<T> {
    pub theta_grid: Vec<T>,
    pub density: Vec<T>,
    /// Absolute probability per unit angle on one side of the incidence
    /// plane, before normalization.
    pub raw: Vec<T>,
    pub alpha: T,
    pub normalization: T,
    pub excluded: Vec<T>,
    pub forward_window: (T, T),
    pub root_warnings: Vec<T>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn kin(ratio: f64) -> Kinematics2D<f64> {
        Kinematics2D::new(MassPair::new(1.0, ratio).unwrap())
    }

    #[test]
    fn frame_angle_and_round_trip() {
        let f = *kin(1.0).frame();
        assert!((f.kappa() - PI / 4.0).abs() < 1e-15);
        let f = *kin(0.5).frame();
        assert!((f.kappa() - 2f64.sqrt().atan()).abs() < 1e-15);
        assert!((f.tan_kappa().powi(2) - 2.0).abs() < 1e-14);
        let v = [1.3, -0.2, 0.7];
        let back = f.from_rotated(f.to_rotated(v));
        for i in 0..3 {
            assert!((back[i] - v[i]).abs() < 1e-14);
        }
        let r = f.to_rotated(v);
        let n0: f64 = v.iter().map(|x| x * x).sum();
        let n1: f64 = r.iter().map(|x| x * x).sum();
        assert!((n0 - n1).abs() < 1e-14);
    }

    #[test]
    fn mirror_in_x() {
        let k = kin(0.5);
        let p_in = [0.8, 0.6];
        let p = k.pstar_in(p_in, [-0.8, 0.6]).unwrap();
        assert!((p + 0.8).abs() < 1e-15);
    }

    #[test]
    fn forward_cut_is_enforced() {
        let k = kin(0.5);
        let err = k.pstar_in([1.0, 0.0], [1.0 + 1e-4, 0.3]);
        assert!(matches!(err, Err(Error::ForwardSingularity { .. })));
        assert!(k.with_forward_cut(0.0).is_err());
    }

    #[test]
    fn events_conserve_x_momentum_and_energy() {
        let k = kin(0.5);
        let th = PI / 4.0;
        let p_in = [th.cos(), th.sin()];
        let thf = PI / 3.0;
        let p_fin = [1.2 * thf.cos(), 1.2 * thf.sin()];
        let e = k.event(p_in, p_fin).unwrap();
        assert!((e.x_momentum_in() - e.x_momentum_out()).abs() < 1e-14);
        let m = k.masses();
        assert!((e.energy_in(m) - e.energy_out(m)).abs() < 1e-14 * e.energy_in(m));
    }

    #[test]
    fn analytic_derivative_matches_central_difference() {
        let k = kin(0.7);
        let th: f64 = 0.6;
        let p_fin = [-1.1, 2.4];
        let p = 2.0;
        let h = 1e-5 * p;
        let f = |p: f64| k.pstar_in([p * th.cos(), p * th.sin()], p_fin).unwrap();
        let fd = (f(p + h) - f(p - h)) / (2.0 * h);
        let an = k.dpstar_dpin(th, p, p_fin).unwrap();
        assert!((fd - an).abs() < 1e-8, "{fd} {an}");
    }

    #[test]
    fn transfer_condition_zeroes_derivative() {
        let k = kin(0.5);
        let beam = ProbeBeam::new(2.0 * PI, PI / 4.0, 0.0).unwrap();
        let tc = k.transfer_condition(&beam);
        assert!((tc - 0.5 * 2.0 * PI / (PI / 4.0).cos()).abs() < 1e-12);
        let e = k.transfer_event(&beam, PI / 3.0).unwrap();
        assert!((e.fin.target_fin - tc).abs() < 1e-9 * tc);
        let slope = k.dpstar_dpin(beam.theta_in(), beam.momentum(), e.fin.probe()).unwrap();
        assert!(slope.abs() < 1e-10, "{slope}");
        let head_on = kin(1.0).transfer_condition(&ProbeBeam::new(3.0, 0.0, 0.0).unwrap());
        assert!((head_on - 3.0).abs() < 1e-15);
    }

    #[test]
    fn envelope_peaks_zero_pstar() {
        let k = kin(0.5);
        let (ti, tf, p) = (PI / 4.0, PI / 3.0, 2.0 * PI);
        let roots = k.envelope_peak_pfin(p, ti, tf);
        assert!(!roots.is_empty());
        for r in roots {
            let v = k.pstar_in([p * ti.cos(), p * ti.sin()], [r * tf.cos(), r * tf.sin()]).unwrap();
            assert!(v.abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn stationary_points_flatten_pstar() {
        let k = kin(0.5);
        let (ti, tf, p) = (PI / 4.0, PI / 3.0, 2.0 * PI);
        let roots = k.stationary_pfin(p, ti, tf);
        assert_eq!(roots.len(), 2);
        let f = |r: f64| k.pstar_in([p * ti.cos(), p * ti.sin()], [r * tf.cos(), r * tf.sin()]).unwrap();
        for r in roots {
            let h = 1e-5 * r;
            let slope = (f(r + h) - f(r - h)) / (2.0 * h);
            assert!(slope.abs() < 1e-8, "{slope}");
        }
    }

    #[test]
    fn kinematic_roots_recover_the_incident_momentum() {
        let k = kin(0.5);
        let ti = PI / 4.0;
        let p_in = [1.5 * ti.cos(), 1.5 * ti.sin()];
        let e = k.event(p_in, [0.2, 1.7]).unwrap();
        let roots = k.kinematic_roots(e.fin.probe(), e.fin.target_fin, ti);
        assert!(roots.len() <= 2);
        assert!(roots.iter().any(|r| (r - 1.5).abs() < 1e-12), "{roots:?}");
        assert!(k.kinematic_roots([3.0, 0.0], 1.0, ti).is_empty());
    }

    #[test]
    fn quadratic_edge_cases() {
        assert_eq!(quadratic_roots(1.0, -2.0, 1.0), vec![1.0]);
        assert!(quadratic_roots(1.0, 0.0, 1.0).is_empty());
        assert_eq!(quadratic_roots(0.0, 2.0, -4.0), vec![2.0]);
        let r = quadratic_roots(1.0_f64, -1e8, 1.0);
        assert!((r[0] - 1e-8).abs() < 1e-22);
    }

    #[test]
    fn golden_section_finds_minimum() {
        let x = golden_min(|x: f64| Ok((x - 0.3).powi(2)), 0.0, 1.0, 1e-8).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
    }
}
