//! Computational objects of the circle method over `F_q[t]`.
//!
//! The crate is layered bottom-up:
//!
//! * [`field`]: `F_q` and `F_q[t]` arithmetic, enumeration and canonical indices.
//! * [`torus`]: truncated torus elements, residues and the additive character.
//! * [`expsum`]: Weyl sums, the multiplier `M_n` and Gauss sums, with exact
//!   cyclotomic accumulation.
//! * [`arcs`]: rational centers, major-arc boxes and classification.
//! * [`normalform`]: grouping polynomial iterates by the `p`-free part of
//!   their exponents.
//! * [`operators`]: the spatial kernels of `M_n`, `C_{s,n}`, `D_{s,n}`,
//!   `L_{s,n}` and `G_s` on finitely supported grid functions.
//! * [`functionals`]: oscillation, maximal functions, the Hardy-Littlewood
//!   maximal operator with Vitali selection and the dyadic maximal bound.
//! * [`inverse`]: the Lucas order, shadows, rational approximation search and
//!   empirical decay fits.
//! * [`ergodic`]: finite translation systems, ergodic averages and transference.

pub mod arcs;
pub mod ergodic;
pub mod error;
pub mod expsum;
pub mod field;
pub mod functionals;
pub mod inverse;
pub mod normalform;
pub mod operators;
pub mod torus;

pub use error::{Error, Result};
pub use field::{Field, FieldParams, Poly};
