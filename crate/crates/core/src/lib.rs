//! Signatures of SU(2) TQFT vector spaces at odd level, computed by several
//! independent algorithms, together with the Dedekind-sum and Eichler-integral
//! quantities that govern their asymptotics.
//!
//! Modules, bottom-up:
//!
//! * [`numtheory`]: exact rationals, continued fractions, sign sequences.
//! * [`verlinde`]: the signed Verlinde Frobenius algebra and the reference
//!   signature formula.
//! * [`polytrace`]: integer polynomials and the tridiagonal charpoly/trace
//!   algorithm.
//! * [`genus2`]: the lattice sum and trigonometric formula for genus two.
//! * [`dedekind`]: Dedekind sums and their 2-smoothed variant.
//! * [`hp`]: configurable-precision real and complex floats.
//! * [`modular`]: eta, theta, `g`, the Eichler integral `G` and `Lambda`.
//! * [`harness`]: sweeps, experiments, figure data and reports.

pub mod dedekind;
pub mod error;
pub mod genus2;
pub mod harness;
pub mod hp;
pub mod modular;
pub mod numtheory;
pub mod polytrace;
pub mod verlinde;

pub use error::{Error, ErrorKind, Result};
