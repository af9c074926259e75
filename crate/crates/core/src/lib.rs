//! Families of Wach modules over Q_p[X]: p-adic arithmetic with tracked
//! precision, truncated series in π with the Frobenius and Γ actions, the
//! λ± products, the X-parametrized lifting of the Frobenius matrix, and
//! specialization to crystalline data.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod claims;
pub mod error;
pub mod lab;
pub mod lambda;
pub mod matrix;
pub mod padic;
pub mod series;
pub mod wach;

pub use error::{Error, Result};
pub use lab::{specialize, FilBasis, FilteredPhiModule, ReductionLabel, SpecializedWachModule};
pub use lambda::{LambdaEngine, LambdaPair, ZData, ZOutcome};
pub use matrix::{Mat2, RingElement};
pub use padic::{binomial, PadicScalar, PrecisionProfile, Valuation};
pub use series::{FamilySeries, GammaElement, PiPoly, PiSeries, Substitution, XPoly};
pub use wach::{FrobeniusMatrix, Lift, LiftContext, P0Matrix, WachFamily};
