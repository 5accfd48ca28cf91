//! A numerical lab for positive definite kernels.
//!
//! A kernel `k: X × X → 𝔽` is described by a [`KernelSpec`] (a zoo entry,
//! a lift `f(x + x*)` through an involution, or a finite grid of values) and
//! turned into an evaluable [`KernelHandle`] by [`make_kernel`]. Every check
//! then runs against the handle:
//!
//! - [`psd`] certifies Gram matrices and the pointwise properties,
//! - [`ineq`] evaluates finite-increment inequalities as signed defects,
//! - [`findiff`] covers increments, difference quotients and their limits,
//! - [`holo`] does contour integrals and sesquiholomorphy checks,
//! - [`lift`] studies kernels built from one-variable functions,
//! - [`report`] strings suites together into JSON reports.
//!
//! All randomness is drawn from seeded per-trial streams, so every suite is
//! reproducible bit for bit.
//!
//! ```
//! use pdklab::{make_kernel, psd::random_psd_suite, KernelSpec};
//!
//! let k = make_kernel(&KernelSpec::builtin("gaussian"))?;
//! let report = random_psd_suite(&k, 8, 50, 7, 1e-9, 1e-10)?;
//! assert!(report.all_psd());
//! # Ok::<(), pdklab::Error>(())
//! ```

// `!(x > 0.0)` is deliberate: it rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod domain;
pub mod error;
pub mod findiff;
pub mod function;
pub mod holo;
pub mod ineq;
pub mod kernel;
pub mod lift;
pub mod psd;
pub mod report;
pub mod rng;
pub mod scalar;

pub use domain::{Domain, Field};
pub use error::{Error, Result};
pub use function::{FunctionHandle, FunctionKind};
pub use kernel::{make_kernel, GramMatrix, KernelHandle, KernelKind, KernelSpec};
pub use lift::StarMap;
pub use num_complex::Complex64;
pub use scalar::{re, ComplexScalar};

// The guide's snippets are compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/psd.md")]
    mod psd {}
    #[doc = include_str!("../../../book/src/inequalities.md")]
    mod inequalities {}
    #[doc = include_str!("../../../book/src/increments.md")]
    mod increments {}
    #[doc = include_str!("../../../book/src/contours.md")]
    mod contours {}
    #[doc = include_str!("../../../book/src/lifts.md")]
    mod lifts {}
    #[doc = include_str!("../../../book/src/reports.md")]
    mod reports {}
}
