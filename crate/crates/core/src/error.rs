use thiserror::Error;

/// Every failure the physics and numerics layers can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("masses must be positive and finite (probe {probe}, target {target})")]
    NonPositiveMass { probe: f64, target: f64 },
    #[error("incident momentum must be positive and finite, got {0}")]
    NonPositiveMomentum(f64),
    #[error("momentum spread must satisfy 0 <= dp/p < 1, got dp/p = {0}")]
    SpreadTooWide(f64),
    #[error("packet width {width} must be below half the separation {separation}")]
    PacketsOverlap { separation: f64, width: f64 },
    #[error("incidence angle {0} rad outside [0, pi/2)")]
    AngleOutOfRange(f64),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("targets differ in separation or width")]
    ParamsMismatch,
    #[error("grid spacing {spacing} too coarse for fringe spacing {fringe}")]
    GridTooCoarse { spacing: f64, fringe: f64 },
    #[error("distribution has {found} interior extrema, need at least 3")]
    TooFewFringes { found: usize },
    #[error("|dp_x| = {delta} inside the forward cut {cut}")]
    ForwardSingularity { delta: f64, cut: f64 },
    #[error("both phase densities vanish at theta_fin = {0} rad")]
    DegenerateDensity(f64),
    #[error("quadrature tolerance not reached: estimate {estimate}, error {error}")]
    ToleranceNotReached { estimate: f64, error: f64 },
    #[error("no sign change on [{a}, {b}]")]
    NoSignChange { a: f64, b: f64 },
    #[error("sample {0} is not an interior local extremum")]
    NotAnExtremum(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
