//! One-dimensional model: a probe bouncing elastically off a free target
//! prepared in two places at once ("one-mirror Fabry-Perot").
//!
//! For a probe of momentum `p` hitting a target of momentum `P`,
//!
//! ```text
//! p_fin = a P - b p,   a = 2m/(M+m),   b = (M-m)/(M+m)
//! ```
//!
//! so each final probe momentum selects exactly one target momentum
//! `P* = ((M+m) p_fin + (M-m) p) / 2m` and the scattered probe inherits the
//! target's fringe comb, compressed by `a`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{CouplingConstant, MassPair, ProbeBeam};
use crate::quad::{normal_hermite_nodes, normal_legendre_nodes, refine_extremum_quartic, trapezoid_samples};
use crate::scalar::Scalar;
use crate::target::{MomentumDensity, TargetSuperposition};
use crate::visibility::VisibilityResult;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics1D<T> {
    masses: MassPair<T>,
    coupling: CouplingConstant<T>,
    transfer: T,
    reflection: T,
}

impl<T: Scalar> Kinematics1D<T> {
    pub fn new(masses: MassPair<T>) -> Self {
        let (m, big) = (masses.probe(), masses.target());
        Self {
            masses,
            coupling: CouplingConstant::default(),
            transfer: T::two() * m / (big + m),
            reflection: (big - m) / (big + m),
        }
    }

    pub fn with_coupling(mut self, coupling: CouplingConstant<T>) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn masses(&self) -> &MassPair<T> {
        &self.masses
    }

    /// `a = 2m/(M+m)`.
    pub fn transfer_coeff(&self) -> T {
        self.transfer
    }

    /// `b = (M-m)/(M+m)`.
    pub fn reflection_coeff(&self) -> T {
        self.reflection
    }

    /// Final probe momentum after an elastic collision.
    pub fn pfin_of(&self, p_in: T, target_in: T) -> T {
        self.transfer * target_in - self.reflection * p_in
    }

    /// Final target momentum implied by momentum conservation.
    pub fn target_final(&self, p_in: T, target_in: T, p_fin: T) -> T {
        target_in + p_in - p_fin
    }

    /// The collision of a probe at `p_in` with a target at `target_in`.
    pub fn event(&self, p_in: T, target_in: T) -> Event1D<T> {
        let p_fin = self.pfin_of(p_in, target_in);
        Event1D {
            p_in,
            target_in,
            p_fin,
            target_fin: self.target_final(p_in, target_in, p_fin),
        }
    }

    /// Initial target momentum that sends the probe from `p_in` to `p_fin`.
    pub fn pstar_in(&self, p_in: T, p_fin: T) -> T {
        let two_m = T::two() * self.masses.probe();
        let (m, big) = (self.masses.probe(), self.masses.target());
        ((big + m) * p_fin + (big - m) * p_in) / two_m
    }

    /// `dP*/dp_in = (M-m)/2m`.
    pub fn pstar_slope(&self) -> T {
        (self.masses.target() - self.masses.probe()) / (T::two() * self.masses.probe())
    }

    /// Kinetic energy `p²/2m + P²/2M`.
    pub fn energy(&self, p: T, target: T) -> T {
        p * p / (T::two() * self.masses.probe()) + target * target / (T::two() * self.masses.target())
    }

    /// Density of final probe momentum for a sharp incident momentum.
    pub fn prob_pfin(&self, density: &MomentumDensity<T>, p_in: T, p_fin: T) -> T {
        let scale = T::one() / self.transfer;
        self.coupling.squared() * scale * density.eval(self.pstar_in(p_in, p_fin))
    }

    /// Spacing of the final-momentum fringes, `a · 2πħ/d`.
    pub fn fringe_spacing(&self, density: &MomentumDensity<T>) -> T {
        self.transfer * density.fringe_period()
    }

    /// Uniform grid centred where `P* = 0`, spanning six envelope widths
    /// either side, with at least 4096 points and 20 points per fringe.
    pub fn default_grid(&self, density: &MomentumDensity<T>, beam: &ProbeBeam<T>) -> Vec<T> {
        let centre = -self.reflection * beam.momentum();
        let half_span = T::lit(6.0) * self.transfer * density.envelope_width();
        let fringe = self.fringe_spacing(density);
        let needed = (T::lit(20.0) * T::two() * half_span / fringe).ceil().as_f64() as usize + 1;
        let n = needed.max(4096);
        let step = T::two() * half_span / T::from_usize_lossy(n - 1);
        (0..n)
            .map(|i| centre - half_span + step * T::from_usize_lossy(i))
            .collect()
    }

    /// Convolution of [`Kinematics1D::prob_pfin`] with the Gaussian spread
    /// of the incident momentum, sampled on `grid` and normalized to unit
    /// trapezoid integral.
    ///
    /// The spread is integrated with Gauss-Hermite nodes, starting at 64 and
    /// doubling until the sampled density stops changing; when the target
    /// fringes oscillate too fast in `p_in` for Hermite nodes to resolve, a
    /// composite Gauss-Legendre rule over ±8.5σ takes over.
    pub fn fold(
        &self,
        density: &MomentumDensity<T>,
        beam: &ProbeBeam<T>,
        grid: &[T],
        settings: &FoldSettings,
    ) -> Result<Distribution1D<T>> {
        if grid.len() < 3 || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: "need at least 3 strictly increasing points".into(),
            });
        }
        let fringe = self.fringe_spacing(density);
        let spacing = grid
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(T::zero(), |a, b| a.max(b));
        if spacing > fringe / T::lit(10.0) {
            return Err(Error::GridTooCoarse {
                spacing: spacing.as_f64(),
                fringe: fringe.as_f64(),
            });
        }

        let mean = beam.momentum();
        let sigma = beam.spread();
        let sample = |nodes: &[(T, T)]| -> Vec<T> {
            grid.par_iter()
                .map(|&pf| {
                    nodes
                        .iter()
                        .fold(T::zero(), |s, &(p, w)| s + w * self.prob_pfin(density, p, pf))
                })
                .collect()
        };
        let converged = |old: &[T], new: &[T]| {
            let peak = new.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
            let diff = old
                .iter()
                .zip(new)
                .fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs()));
            diff <= T::lit(settings.tolerance) * peak
        };

        let (raw, rule) = if sigma == T::zero() {
            (sample(&[(mean, T::one())]), FoldRule::Sharp)
        } else {
            let phase_rate = density.target().separation() * self.pstar_slope().abs();
            let k = (phase_rate * T::SQRT_2() * sigma).as_f64();
            let mut result = None;
            if k * k <= settings.max_hermite_nodes as f64 {
                let mut n = settings.initial_nodes.max(1);
                let mut prev = sample(&normal_hermite_nodes(mean, sigma, n));
                while 2 * n <= settings.max_hermite_nodes {
                    let next = sample(&normal_hermite_nodes(mean, sigma, 2 * n));
                    let done = converged(&prev, &next);
                    prev = next;
                    n *= 2;
                    if done {
                        result = Some((prev.clone(), FoldRule::Hermite { nodes: n }));
                        break;
                    }
                }
            }
            match result {
                Some(r) => r,
                None => {
                    let window = T::lit(17.0) * sigma;
                    let phase = (phase_rate * window).as_f64();
                    let mut panels = ((phase / 2.0).ceil() as usize).max(16);
                    let mut prev = sample(&normal_legendre_nodes(mean, sigma, panels));
                    let mut out = None;
                    for _ in 0..6 {
                        let next = sample(&normal_legendre_nodes(mean, sigma, 2 * panels));
                        panels *= 2;
                        let done = converged(&prev, &next);
                        prev = next;
                        if done {
                            out = Some(prev.clone());
                            break;
                        }
                    }
                    let raw = out.ok_or(Error::ToleranceNotReached {
                        estimate: f64::NAN,
                        error: settings.tolerance,
                    })?;
                    (raw, FoldRule::CompositeLegendre { panels })
                }
            }
        };

        let normalization = trapezoid_samples(grid, &raw);
        if !(normalization > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: "distribution vanishes on the grid".into(),
            });
        }
        let density_values = raw.iter().map(|&v| v / normalization).collect();
        Ok(Distribution1D {
            grid: grid.to_vec(),
            density: density_values,
            normalization,
            fringe_spacing: fringe,
            rule,
        })
    }

    /// `A = exp(-d²(M-m)²Δp²/8m²ħ²)`, the contrast left after folding the
    /// cosine-approximated density with the incident spread.
    pub fn visibility_analytic(
        &self,
        target: &TargetSuperposition<T>,
        beam: &ProbeBeam<T>,
    ) -> VisibilityResult<T> {
        let x = target.separation() * self.pstar_slope() * beam.spread();
        VisibilityResult::analytic((-x * x / T::two()).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event1D<T> {
    pub p_in: T,
    pub target_in: T,
    pub p_fin: T,
    pub target_fin: T,
}

impl<T: Scalar> Event1D<T> {
    pub fn momentum_in(&self) -> T {
        self.p_in + self.target_in
    }

    pub fn momentum_out(&self) -> T {
        self.p_fin + self.target_fin
    }

    pub fn energy_in(&self, masses: &MassPair<T>) -> T {
        kinetic(masses, self.p_in, self.target_in)
    }

    pub fn energy_out(&self, masses: &MassPair<T>) -> T {
        kinetic(masses, self.p_fin, self.target_fin)
    }
}

fn kinetic<T: Scalar>(masses: &MassPair<T>, p: T, target: T) -> T {
    p * p / (T::two() * masses.probe()) + target * target / (T::two() * masses.target())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldSettings {
    pub initial_nodes: usize,
    pub max_hermite_nodes: usize,
    /// Sup-norm change between successive refinements, relative to the
    /// peak density, at which folding stops.
    pub tolerance: f64,
}

impl Default for FoldSettings {
    fn default() -> Self {
        Self {
            initial_nodes: 64,
            max_hermite_nodes: 512,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldRule {
    /// No spread: the distribution is sampled at the mean momentum.
    Sharp,
    Hermite { nodes: usize },
    CompositeLegendre { panels: usize },
}

/// Sampled final-momentum density.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution1D<T> {
    pub grid: Vec<T>,
    /// Normalized to unit trapezoid integral over `grid`.
    pub density: Vec<T>,
    /// Trapezoid integral of the density before normalization.
    pub normalization: T,
    pub fringe_spacing: T,
    pub rule: FoldRule,
}

impl<T: Scalar> Distribution1D<T> {
    /// Wraps externally sampled values; `fringe_spacing` is only used as
    /// metadata.
    pub fn from_samples(grid: Vec<T>, values: Vec<T>, fringe_spacing: T) -> Result<Self> {
        if grid.len() != values.len()
            || grid.len() < 3
            || grid.windows(2).any(|w| !(w[1] > w[0]))
            || values.iter().any(|v| !(*v >= T::zero()))
        {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "need matching, increasing grid and nonnegative values".into(),
            });
        }
        let normalization = trapezoid_samples(&grid, &values);
        if !(normalization > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "zero integral".into(),
            });
        }
        let density = values.iter().map(|&v| v / normalization).collect();
        Ok(Self {
            grid,
            density,
            normalization,
            fringe_spacing,
            rule: FoldRule::Sharp,
        })
    }

    /// Density-weighted mean of the grid.
    pub fn mean(&self) -> T {
        let xy: Vec<T> = self
            .grid
            .iter()
            .zip(&self.density)
            .map(|(&x, &y)| x * y)
            .collect();
        trapezoid_samples(&self.grid, &xy)
    }

    /// Indices of interior local extrema (maxima and minima alternate).
    pub fn extrema(&self) -> Vec<usize> {
        let y = &self.density;
        let mut out = Vec::new();
        let mut last_slope = 0i8;
        for i in 1..y.len() {
            let slope = match y[i].partial_cmp(&y[i - 1]) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            };
            if slope != 0 {
                if last_slope != 0 && slope != last_slope {
                    out.push(i - 1);
                }
                last_slope = slope;
            }
        }
        out
    }
}

/// Fringe visibility read off a sampled distribution: the extremum
/// nearest the density-weighted centre is paired with its two neighbours,
/// each extremum value refined sub-grid, and `(max-min)/(max+min)` averaged
/// over the two pairs. Assumes a uniform grid.
pub fn visibility_1d_numeric<T: Scalar>(dist: &Distribution1D<T>) -> Result<VisibilityResult<T>> {
    let ext = dist.extrema();
    if ext.len() < 3 {
        return Err(Error::TooFewFringes { found: ext.len() });
    }
    let centre = dist.mean();
    let nearest = ext
        .iter()
        .enumerate()
        .min_by(|(_, &a), (_, &b)| {
            (dist.grid[a] - centre)
                .abs()
                .as_f64()
                .total_cmp(&(dist.grid[b] - centre).abs().as_f64())
        })
        .map(|(k, _)| k)
        .unwrap_or(0)
        .clamp(1, ext.len() - 2);
    let value = |idx: usize| -> Result<T> {
        let (_, v) = refine_extremum_quartic(&dist.density, idx)?;
        Ok(v.max(T::zero()))
    };
    let mid = value(ext[nearest])?;
    let contrast = |other: T| {
        let (hi, lo) = if mid >= other { (mid, other) } else { (other, mid) };
        if hi + lo == T::zero() {
            T::zero()
        } else {
            (hi - lo) / (hi + lo)
        }
    };
    let left = contrast(value(ext[nearest - 1])?);
    let right = contrast(value(ext[nearest + 1])?);
    Ok(VisibilityResult::numeric((left + right) * T::half()))
}
