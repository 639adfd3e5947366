//! Projection-based tests of distributional invariance under a group of
//! linear maps.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, or `f32` where noted.

pub mod copula;
pub mod data_io;
pub mod error;
pub mod group;
pub mod invariance;
pub mod ks;
pub mod projection;
pub mod rng;
pub mod sample;
pub mod scalar;
pub mod simulate;
pub mod stabilizer;

pub use copula::{rank_transform, RankSample};
pub use data_io::{load_csv, Dataset};
pub use error::{Error, Result};
pub use group::{closure, permutation_generators, signed_permutation_generators, GroupSpec, LinearMap, SignedPermutation};
pub use invariance::{
    d_statistic, permutation_null_test, test_procedure_a, test_procedure_b, BootstrapScheme, Procedure,
    ProcedureAConfig, ProcedureBConfig, PermutationNullConfig, TestPlan, TestReport,
};
pub use ks::{ks_critical_value, ks_two_sample, Ecdf};
pub use projection::{project, Direction, DirectionKind, DirectionSampler};
pub use rng::{RngSeed, SimRng};
pub use sample::{FunctionalLayout, Sample};
pub use scalar::Scalar;
pub use simulate::{power_curve, PowerCurve, Scenario, ScenarioKind};

pub type Sample64 = Sample<f64>;
pub type Sample32 = Sample<f32>;
pub type LinearMap64 = LinearMap<f64>;
pub type LinearMap32 = LinearMap<f32>;
pub type GroupSpec64 = GroupSpec<f64>;
pub type GroupSpec32 = GroupSpec<f32>;
pub type Direction64 = Direction<f64>;
pub type Direction32 = Direction<f32>;
