//! Simulation and kernel entropy estimation for long-memory linear processes
//! with infinite-variance (stable-domain) innovations.
//!
//! The crate simulates moving averages `X_t = sum_i a_i eps_{t-i}` with
//! power-law coefficients `a_i = c0 * i^{-beta}` and heavy-tailed innovations,
//! estimates the quadratic functional `int f^2(x) dx` of the marginal density
//! with the pairwise kernel statistic
//!
//! ```text
//! T_n(h) = 2 / (n (n-1) h) * sum_{j<i} K((X_i - X_j) / h)
//! ```
//!
//! and derives the quadratic Renyi entropy `-ln T_n`. Ground truth for
//! symmetric stable innovations, Monte Carlo experiment orchestration, rate
//! and limit-law diagnostics, and a CLI front end live in the submodules:
//!
//! - [`stable`]: stable laws (sampling, characteristic function, density,
//!   tail constants) and innovation families;
//! - [`linproc`]: coefficient sums, truncated moving-average simulation,
//!   memory-regime classification;
//! - [`estimator`]: kernels, bandwidth rules, the pairwise estimator, and
//!   the centered-representation diagnostic;
//! - [`truth`]: closed-form and quadrature ground truth, limit-case
//!   classification, scale constants, bandwidth-condition checks;
//! - [`montecarlo`]: replication runs, summary tables, tail-index and
//!   second-moment diagnostics;
//! - [`cli`]: command-line front end used by the `stable-entropy` binary.
//!
//! All randomness flows through splittable counter-based streams
//! ([`rng`]): a `(base_seed, stream_id)` pair fully determines a stream, so
//! results are reproducible for any worker count.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod linproc;
pub mod montecarlo;
pub mod numeric;
pub mod rng;
pub mod stable;
pub mod truth;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
