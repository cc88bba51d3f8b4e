//! Shared numerical building blocks: compensated summation with a
//! deterministic tree reduction, a Lanczos gamma function, and adaptive
//! Gauss-Kronrod quadrature.

pub mod gamma;
pub mod quad;
pub mod sum;

pub use gamma::gamma;
pub use quad::integrate;
pub use sum::{neumaier_sum, tree_sum};
