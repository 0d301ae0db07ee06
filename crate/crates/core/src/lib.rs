//! Exact and numerical machinery for diagonal cubic forms
//! `F = F_1 x_1^3 + … + F_m x_m^3`.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: integers, valuations, factorization, finite fields.
//! * [`form`]: the form `F` and dual tuples `c`.
//! * [`dual`]: the dual form `F^∨` by an exact sign-product recursion.
//! * [`expsum`]: complete exponential sums `S_c(n)` and their structure.
//! * [`pointcount`]: point counts over finite fields, singular loci, conic bundles.
//! * [`lfactor`]: Frobenius data and local L-factor bookkeeping.
//! * [`delta`]: the delta-method kernel and oscillatory integrals.
//! * [`cubes`]: sums-of-three-cubes statistics.
//! * [`sieve`]: zero-density counts and divisor statistics.
//!
//! ```
//! use dcubic::{expsum, form::DiagonalCubicForm};
//!
//! let f = DiagonalCubicForm::fermat(4);
//! // At a prime p with p ∤ F^∨(c), the sums vanish from p^2 on.
//! assert!(dcubic::lfactor::is_good_prime(&f, &[1, 2, 3, 4], 7));
//! assert_eq!(expsum::exp_sum(&f, &[1, 2, 3, 4], 49).unwrap().value, 0);
//! assert_eq!(expsum::exp_sum(&f, &[1, 2, 3, 4], 343).unwrap().value, 0);
//! ```

pub mod arith;
pub mod cubes;
pub mod delta;
pub mod dual;
pub mod error;
pub mod expsum;
pub mod fit;
pub mod form;
pub mod lfactor;
pub mod pointcount;
pub mod quad;
pub mod rng;
pub mod sieve;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/exponential-sums.md")]
    mod exponential_sums {}
    #[doc = include_str!("../../../book/src/dual-form.md")]
    mod dual_form {}
    #[doc = include_str!("../../../book/src/point-counts.md")]
    mod point_counts {}
    #[doc = include_str!("../../../book/src/local-factors.md")]
    mod local_factors {}
    #[doc = include_str!("../../../book/src/delta-method.md")]
    mod delta_method {}
    #[doc = include_str!("../../../book/src/three-cubes.md")]
    mod three_cubes {}
    #[doc = include_str!("../../../book/src/sieve.md")]
    mod sieve {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
