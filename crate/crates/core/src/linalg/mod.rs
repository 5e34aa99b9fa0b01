//! Dense complex linear algebra on tensor-product spaces.

mod matrix;
mod norms;
mod perm;
mod tensor;

pub use matrix::{kron, kron_vector_power, ComplexMatrix};
pub use norms::{
    product_norm_bound_check, rank, schatten_from_singular_values, schatten_norm, singular_values,
    ProductNormWitness, SchattenIndex, RANK_TOL,
};
pub(crate) use perm::digits_of;
pub use perm::{cycle_count, permutation_operator, symmetric_projector, Permutation};
pub use tensor::{partial_trace, reshuffle, reshuffle_copies, FactorShape};

#[cfg(test)]
pub(crate) mod test_util;
