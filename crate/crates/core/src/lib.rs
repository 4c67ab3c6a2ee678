//! Two-sided grand Lebesgue spaces: psi-function algebra, weighted radial
//! L^p norms, G(psi) norms and numerical checks of the classical operator
//! inequalities in these spaces.

pub mod error;
pub mod numeric;
pub mod operators;
pub mod gnorm;
pub mod measure;
pub mod psi;
pub mod verify;

pub use error::{Error, Result};
pub use psi::{ConvexWeight, ExponentInterval, PsiFunction, PsiSpec, SlowlyVarying};
