//! Scattering of a light probe off a single heavy particle held in a
//! superposition of two locations, in one and two dimensions.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod error;
pub mod kin1d;
pub mod kin2d;
pub mod oracle;
pub mod params;
pub mod quad;
pub mod scalar;
pub mod target;
pub mod visibility;

pub use error::{Error, Result};
pub use kin1d::{visibility_1d_numeric, Distribution1D, Event1D, FoldRule, FoldSettings, Kinematics1D};
pub use kin2d::{
    AngularComponents, AngularDistribution, AngularScan, AngularSettings, Event2D, FinalState2D,
    Kinematics2D, RotatedFrame,
};
pub use oracle::{OracleReport, OracleSuite};
pub use params::{
    validate_params, CouplingConstant, MassPair, ParamFileError, ParamSet, ProbeBeam, UnitSystem,
    ValidatedParams,
};
pub use scalar::Scalar;
pub use target::{fringe_phase_shift, DensityMode, MomentumDensity, TargetSuperposition};
pub use visibility::{VisibilityMethod, VisibilityResult};

pub type MassPair64 = MassPair<f64>;
pub type ProbeBeam64 = ProbeBeam<f64>;
pub type Target64 = TargetSuperposition<f64>;
pub type Params64 = ValidatedParams<f64>;
pub type Kinematics1D64 = Kinematics1D<f64>;
pub type Kinematics2D64 = Kinematics2D<f64>;
pub type Distribution1D64 = Distribution1D<f64>;
pub type AngularDistribution64 = AngularDistribution<f64>;

pub type Kinematics1D32 = Kinematics1D<f32>;
pub type Kinematics2D32 = Kinematics2D<f32>;
