//! Numerical building blocks shared by the norm and operator modules.

pub mod fit;
pub mod interp;
pub mod optimize;
pub mod quad;
