//! Exact construction of generalised Kac-Moody algebras ĝ(𝓜) over compact
//! manifolds (tori, the two-sphere, SU(2) ≅ 𝕊³) and verification of their
//! algebraic axioms, cross-checked against a numerical quadrature oracle.

pub mod checks;
pub mod dump;
pub mod error;
pub mod gkm;
pub mod liealg;
pub mod modes;
pub mod oracle;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod wigner;

pub use checks::{verify, Suite, VerifyOptions};
pub use dump::AlgebraDumpV1;
pub use error::{GkmError, Result};
pub use gkm::{Generator, GkmAlgebra, GkmElement, RootSpaceLabel};
pub use liealg::{BaseKind, CartanWeylData, FiniteAlgebra};
pub use modes::{Manifold, ModeLabel, ModeSystem};
pub use report::{CheckResult, Regime, VerificationReport, Witness};
pub use scalar::{ComplexSurd, Rational, SurdScalar};
