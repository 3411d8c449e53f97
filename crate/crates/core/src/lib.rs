//! Convergence-rate certificates for Nesterov's accelerated method on
//! strongly convex functions.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: exact-size symmetric linear algebra (Jacobi eigensolver,
//!   pseudoinverse, minors).
//! - [`model`]: condition classes, the iteration itself, its state-space
//!   realization and the classical reference rates.
//! - [`certificate`]: the Lyapunov LMI, the closed-form certificate and its
//!   numerical verification.
//! - [`sdpsearch`]: bisection over the rate with a small SDP feasibility
//!   solve at each probe.
//! - [`bench`]: test functions, trajectories and rate tables.
//! - [`cli`]: the `nesterov-cert` command-line front end.
//!
//! ```
//! use nesterov_cert::{certificate::certified_rate, model::ConditionClass};
//!
//! let cond = ConditionClass::new(1.0, 4.0)?;
//! let rate = certified_rate(&cond)?;
//! assert!((rate.tau - 0.581_860_956).abs() < 1e-9);
//! assert!(rate.verified().unwrap().passed());
//! # Ok::<(), nesterov_cert::Error>(())
//! ```

// Index loops read closer to the matrix formulas, and `!(x > 0.0)` also
// rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod certificate;
pub mod cli;
mod error;
pub mod linalg;
pub mod model;
pub mod sdpsearch;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/iteration.md")]
    mod iteration {}
    #[doc = include_str!("../../../book/src/lmi.md")]
    mod lmi {}
    #[doc = include_str!("../../../book/src/closed_form.md")]
    mod closed_form {}
    #[doc = include_str!("../../../book/src/bisection.md")]
    mod bisection {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
