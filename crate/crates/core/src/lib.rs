//! Moment operators of exact and approximate quantum t-designs, their
//! pushforwards under decoherence, partial trace and channel maps, and the
//! Schatten-norm Lipschitz bounds relating the approximation parameters on
//! either side of the map.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense complex matrices on tensor-product spaces (Kronecker
//!   products, singular values, Schatten norms, partial traces, permutation
//!   operators, symmetric projectors, reshuffling).
//! * [`ensemble`]: finite weighted point sets (pure states, density matrices,
//!   probability vectors, unitaries).
//! * [`moments`]: empirical and exact Haar moment operators, distances,
//!   frame potentials and Welch gaps.
//! * [`pushforward`]: the three measurable maps at ensemble and moment level.
//! * [`bounds`]: Lipschitz constants and certification reports.
//! * [`catalog`]: seeded random sources, known exact designs and ensemble I/O.
//! * [`experiment`] and [`report`]: the Monte Carlo convergence experiment and
//!   one-shot report builders used by the command-line tool.
//!
//! Tensor factors of a bipartite `t`-copy space are always ordered
//! `(A1, B1, A2, B2, ..., At, Bt)` with row-major composite indices.

pub mod bounds;
pub mod catalog;
pub mod ensemble;
mod error;
pub mod experiment;
pub mod linalg;
pub mod moments;
pub mod pushforward;
pub mod report;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Largest total matrix dimension any dense construction will accept.
pub const MAX_DIM: usize = 10_000;

/// `base^exp` as a guarded dimension.
pub(crate) fn guarded_pow(base: usize, exp: usize) -> Result<usize> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
        if acc > MAX_DIM as u128 {
            return Err(Error::SizeGuard {
                dim: acc,
                limit: MAX_DIM,
            });
        }
    }
    Ok(acc as usize)
}
