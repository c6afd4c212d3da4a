//! Verification toolkit for the storage–download tradeoff of private
//! information retrieval codes.
//!
//! * [`entropy`]: entropy vectors, information expressions and the elemental
//!   Shannon inequalities.
//! * [`lp`]: entropy-space linear programs with exact dual certificates.
//! * [`models`]: the two-database, two-message LP encodings.
//! * [`bounds`]: closed-form outer bounds in exact arithmetic.
//! * [`scheme`]: executable PIR codes with exhaustive verification.
//! * [`documents`]: JSON model and certificate formats.

pub mod bounds;
pub mod documents;
pub mod entropy;
pub mod lp;
pub mod models;
pub mod rational;
pub mod scheme;

pub use bounds::{BoundLine, BoundSource, PirParameters, TradeoffPoint};
pub use documents::{CertificateDocument, DocumentError, ModelDocument};
pub use entropy::{Constraint, EntropyVector, GroundSet, JointDistribution, LinearForm, Sense, SubsetId};
pub use lp::{DualCertificate, LinearProgram, LpConfig, LpError, Solution, Status};
pub use models::{ModelOptions, PirLpModel};
pub use rational::Rational;
pub use scheme::{SchemeError, SchemeSpec};
