//! Unit system, physical parameter bundles and the flat `key = value`
//! parameter file.
//!
//! Internally ħ = 1 and lengths are measured in the unit the incident
//! wavelength is quoted in (micrometres by default), so an incident
//! wavelength λ gives a momentum 2π/λ. SI only appears through
//! [`UnitSystem::length_unit`] when converting at I/O boundaries.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::target::TargetSuperposition;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem<T> {
    length_unit: T,
}

impl<T: Scalar> UnitSystem<T> {
    /// `length_unit` is the number of metres in one internal length unit.
    pub fn new(length_unit: T) -> Result<Self> {
        if !(length_unit > T::zero() && length_unit.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "length_unit",
                reason: format!("must be positive, got {length_unit}"),
            });
        }
        Ok(Self { length_unit })
    }

    pub fn micrometres() -> Self {
        Self {
            length_unit: T::lit(1e-6),
        }
    }

    /// Reduced Planck constant in internal units.
    pub fn hbar(&self) -> T {
        T::one()
    }

    pub fn length_unit(&self) -> T {
        self.length_unit
    }

    pub fn to_metres(&self, length: T) -> T {
        length * self.length_unit
    }
}

impl<T: Scalar> Default for UnitSystem<T> {
    fn default() -> Self {
        Self::micrometres()
    }
}

/// Probe mass `m` and target mass `M`. Only `M/m` enters the physics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassPair<T> {
    probe: T,
    target: T,
}

impl<T: Scalar> MassPair<T> {
    pub fn new(probe: T, target: T) -> Result<Self> {
        let ok = |x: T| x > T::zero() && x.is_finite();
        if !(ok(probe) && ok(target)) {
            return Err(Error::NonPositiveMass {
                probe: probe.as_f64(),
                target: target.as_f64(),
            });
        }
        Ok(Self { probe, target })
    }

    pub fn probe(&self) -> T {
        self.probe
    }

    pub fn target(&self) -> T {
        self.target
    }

    /// `M/m`.
    pub fn ratio(&self) -> T {
        self.target / self.probe
    }
}

/// Incident probe: mean momentum magnitude, incidence angle measured from
/// the target axis, and Gaussian spread of the momentum magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeBeam<T> {
    momentum: T,
    theta_in: T,
    spread: T,
}

impl<T: Scalar> ProbeBeam<T> {
    pub fn new(momentum: T, theta_in: T, spread: T) -> Result<Self> {
        if !(momentum > T::zero() && momentum.is_finite()) {
            return Err(Error::NonPositiveMomentum(momentum.as_f64()));
        }
        if !(theta_in >= T::zero() && theta_in < T::FRAC_PI_2()) {
            return Err(Error::AngleOutOfRange(theta_in.as_f64()));
        }
        let rel = spread / momentum;
        if !(spread >= T::zero() && rel < T::one()) {
            return Err(Error::SpreadTooWide(rel.as_f64()));
        }
        Ok(Self {
            momentum,
            theta_in,
            spread,
        })
    }

    /// Beam defined by its wavelength, `p = 2πħ/λ`, and relative spread.
    pub fn from_wavelength(lambda: T, theta_in: T, dp_over_p: T) -> Result<Self> {
        if !(lambda > T::zero() && lambda.is_finite()) {
            return Err(Error::NonPositiveMomentum(lambda.as_f64()));
        }
        let p = T::tau() / lambda;
        Self::new(p, theta_in, dp_over_p * p)
    }

    pub fn momentum(&self) -> T {
        self.momentum
    }

    pub fn theta_in(&self) -> T {
        self.theta_in
    }

    pub fn spread(&self) -> T {
        self.spread
    }

    pub fn wavelength(&self) -> T {
        T::tau() / self.momentum
    }

    /// Incident momentum vector `(p_x, p_y)` for magnitude `p`.
    pub fn direction_scaled(&self, p: T) -> [T; 2] {
        [p * self.theta_in.cos(), p * self.theta_in.sin()]
    }

    pub fn with_spread(self, spread: T) -> Result<Self> {
        Self::new(self.momentum, self.theta_in, spread)
    }

    pub fn with_theta_in(self, theta_in: T) -> Result<Self> {
        Self::new(self.momentum, theta_in, self.spread)
    }
}

/// Overall scattering amplitude ε; probabilities scale as ε².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConstant<T>(T);

impl<T: Scalar> CouplingConstant<T> {
    pub fn new(epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero() && epsilon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("must be positive, got {epsilon}"),
            });
        }
        Ok(Self(epsilon))
    }

    pub fn epsilon(&self) -> T {
        self.0
    }

    pub fn squared(&self) -> T {
        self.0 * self.0
    }
}

impl<T: Scalar> Default for CouplingConstant<T> {
    fn default() -> Self {
        Self(T::one())
    }
}

/// Parameters that passed every per-type and cross-type check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedParams<T> {
    pub units: UnitSystem<T>,
    pub masses: MassPair<T>,
    pub beam: ProbeBeam<T>,
    pub target: TargetSuperposition<T>,
    pub coupling: CouplingConstant<T>,
}

impl<T: Scalar> ValidatedParams<T> {
    pub fn with_coupling(mut self, coupling: CouplingConstant<T>) -> Self {
        self.coupling = coupling;
        self
    }
}

/// Re-checks every invariant of the parts and the cross-type support
/// condition `w < d/2`.
pub fn validate_params<T: Scalar>(
    masses: MassPair<T>,
    beam: ProbeBeam<T>,
    target: TargetSuperposition<T>,
) -> Result<ValidatedParams<T>> {
    let masses = MassPair::new(masses.probe(), masses.target())?;
    let beam = ProbeBeam::new(beam.momentum(), beam.theta_in(), beam.spread())?;
    let target = TargetSuperposition::new(target.separation(), target.width(), target.phase())?;
    Ok(ValidatedParams {
        units: UnitSystem::default(),
        masses,
        beam,
        target,
        coupling: CouplingConstant::default(),
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamFileError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("unknown key `{0}`")]
    UnknownOverride(String),
    #[error("line {line}: `{value}` is not a number for `{key}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
}

/// Raw contents of a parameter file, before validation.
///
/// Defaults reproduce the two-dimensional reference setup: `M/m = 0.5`,
/// λ = 0.5 µm, θ = 45°, d = 7λ, w = λ/5, α = 0, no momentum spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    pub mass_probe: f64,
    pub mass_target: f64,
    pub lambda_in: f64,
    pub dp_over_p: f64,
    pub theta_in_deg: f64,
    pub d_over_lambda: f64,
    pub w_over_lambda: f64,
    pub alpha: f64,
}

impl Default for ParamSet {
    fn default() -> Self {
        Self {
            mass_probe: 1.0,
            mass_target: 0.5,
            lambda_in: 0.5,
            dp_over_p: 0.0,
            theta_in_deg: 45.0,
            d_over_lambda: 7.0,
            w_over_lambda: 0.2,
            alpha: 0.0,
        }
    }
}

impl ParamSet {
    pub const KEYS: [&'static str; 8] = [
        "mass_probe",
        "mass_target",
        "lambda_in",
        "dp_over_p",
        "theta_in_deg",
        "d_over_lambda",
        "w_over_lambda",
        "alpha",
    ];

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "mass_probe" => &mut self.mass_probe,
            "mass_target" => &mut self.mass_target,
            "lambda_in" => &mut self.lambda_in,
            "dp_over_p" => &mut self.dp_over_p,
            "theta_in_deg" => &mut self.theta_in_deg,
            "d_over_lambda" => &mut self.d_over_lambda,
            "w_over_lambda" => &mut self.w_over_lambda,
            "alpha" => &mut self.alpha,
            _ => return None,
        })
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        let mut copy = *self;
        copy.slot(key).map(|v| *v)
    }

    pub fn set(&mut self, key: &str, value: f64) -> std::result::Result<(), ParamFileError> {
        match self.slot(key) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(ParamFileError::UnknownOverride(key.to_string())),
        }
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and text
    /// after `#` are ignored.
    pub fn apply_text(&mut self, text: &str) -> std::result::Result<(), ParamFileError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or(ParamFileError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            let parsed = f64::from_str(value).map_err(|_| ParamFileError::BadValue {
                line,
                key: key.to_string(),
                value: value.to_string(),
            })?;
            match self.slot(key) {
                Some(slot) => *slot = parsed,
                None => {
                    return Err(ParamFileError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }
        Ok(())
    }

    /// Parses a whole file starting from the defaults.
    pub fn parse(text: &str) -> std::result::Result<Self, ParamFileError> {
        let mut set = Self::default();
        set.apply_text(text)?;
        Ok(set)
    }

    /// One-line `key=value` echo, reparseable after splitting on spaces.
    pub fn echo(&self) -> String {
        Self::KEYS
            .iter()
            .map(|k| format!("{k}={}", self.get(k).unwrap_or(f64::NAN)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Inverse of [`ParamSet::echo`].
    pub fn from_echo(echo: &str) -> std::result::Result<Self, ParamFileError> {
        Self::parse(&echo.split_whitespace().collect::<Vec<_>>().join("\n"))
    }

    pub fn validate<T: Scalar>(&self) -> Result<ValidatedParams<T>> {
        let masses = MassPair::new(T::lit(self.mass_probe), T::lit(self.mass_target))?;
        let lambda = T::lit(self.lambda_in);
        let beam = ProbeBeam::from_wavelength(
            lambda,
            T::lit(self.theta_in_deg.to_radians()),
            T::lit(self.dp_over_p),
        )?;
        let target = TargetSuperposition::new(
            T::lit(self.d_over_lambda) * lambda,
            T::lit(self.w_over_lambda) * lambda,
            T::lit(self.alpha),
        )?;
        validate_params(masses, beam, target)
    }
}

impl fmt::Display for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in Self::KEYS {
            writeln!(f, "{k} = {}", self.get(k).unwrap_or(f64::NAN))?;
        }
        Ok(())
    }
}
