use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::{Error, Result};

/// Local dimensions of the tensor factors of a space, in order.
///
/// Composite indices are row-major: the first factor is the most significant
/// digit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactorShape {
    dims: Vec<usize>,
}

impl FactorShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::invalid(format!(
                "factor dimensions must be positive: {dims:?}"
            )));
        }
        Ok(FactorShape { dims })
    }

    /// `per_copy` repeated `t` times, e.g. `[dA, dB]` → `[dA, dB, dA, dB, ...]`.
    pub fn repeated(per_copy: &[usize], t: usize) -> Result<Self> {
        Self::new(
            per_copy
                .iter()
                .copied()
                .cycle()
                .take(per_copy.len() * t)
                .collect(),
        )
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Product of the local dimensions.
    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Row-major strides of each factor.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Offsets of every composite index over the given factor positions, with
    /// the other positions' digits set to zero. Enumerated row-major in the
    /// order of `positions`.
    fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &pos in positions {
            let mut next = Vec::with_capacity(out.len() * self.dims[pos]);
            for &base in &out {
                for digit in 0..self.dims[pos] {
                    next.push(base + digit * strides[pos]);
                }
            }
            out = next;
        }
        out
    }
}

/// Partial trace over the factor positions in `traced`.
///
/// The result acts on the kept factors in their original order. Tracing every
/// factor yields the 1x1 matrix `[Tr a]`.
pub fn partial_trace(
    a: &ComplexMatrix,
    shape: &FactorShape,
    traced: &[usize],
) -> Result<ComplexMatrix> {
    if !a.is_square() || a.rows() != shape.total() {
        return Err(Error::dims(format!(
            "{}x{} matrix does not act on a space of shape {:?}",
            a.rows(),
            a.cols(),
            shape.dims()
        )));
    }
    let mut is_traced = vec![false; shape.len()];
    for &pos in traced {
        if pos >= shape.len() {
            return Err(Error::invalid(format!(
                "traced factor {pos} out of range for {} factors",
                shape.len()
            )));
        }
        is_traced[pos] = true;
    }
    let kept: Vec<usize> = (0..shape.len()).filter(|&k| !is_traced[k]).collect();
    let traced: Vec<usize> = (0..shape.len()).filter(|&k| is_traced[k]).collect();

    let kept_offsets = shape.offsets(&kept);
    let traced_offsets = shape.offsets(&traced);
    let n = kept_offsets.len();
    let src = a.as_slice();
    let stride = a.cols();

    let mut out = ComplexMatrix::zeros(n, n);
    let dst = out.as_mut_slice();
    for (i, &ri) in kept_offsets.iter().enumerate() {
        for (j, &cj) in kept_offsets.iter().enumerate() {
            dst[i * n + j] = traced_offsets
                .iter()
                .map(|&s| src[(ri + s) * stride + cj + s])
                .sum();
        }
    }
    Ok(out)
}

/// Reshuffle of an operator on `C^{d1} ⊗ C^{d2}`:
/// `A[(i,k),(j,l)] → A^R[(i,j),(k,l)]`, where `i, j` address factor 1 and
/// `k, l` factor 2. The result is `d1² x d2²`.
///
/// Worked example on `C² ⊗ C²` (rows/cols labelled by `(i,k)` pairs
/// `00, 01, 10, 11`): the entry `A[(0,1),(1,0)]` (row `01`, column `10`) moves
/// to `A^R[(0,1),(1,0)]`, while `A[(0,0),(1,1)]` (row `00`, column `11`) moves
/// to `A^R[(0,1),(0,1)]`. In particular `I₄^R = |Φ⟩⟨Φ|` with
/// `|Φ⟩ = |00⟩ + |11⟩`, and `(U ⊗ V)^R = |U⟩⟩⟨⟨V*|` with row-major
/// vectorisation.
pub fn reshuffle(a: &ComplexMatrix, shape: &FactorShape) -> Result<ComplexMatrix> {
    if shape.len() != 2 {
        return Err(Error::invalid(format!(
            "reshuffle needs a bipartite shape, got {} factors",
            shape.len()
        )));
    }
    reshuffle_copies(a, shape.dims()[0], shape.dims()[1], 1)
}

/// Applies [`reshuffle`] independently to each of `copies` bipartite blocks of
/// an operator on `(C^{d1} ⊗ C^{d2})^{⊗copies}` (copy-major ordering).
pub fn reshuffle_copies(
    a: &ComplexMatrix,
    d1: usize,
    d2: usize,
    copies: usize,
) -> Result<ComplexMatrix> {
    let shape = FactorShape::repeated(&[d1, d2], copies)?;
    if !a.is_square() || a.rows() != shape.total() {
        return Err(Error::dims(format!(
            "{}x{} matrix does not act on (C^{d1} ⊗ C^{d2})^{{⊗{copies}}}",
            a.rows(),
            a.cols()
        )));
    }
    let out_rows = (d1 * d1).pow(copies as u32);
    let out_cols = (d2 * d2).pow(copies as u32);
    let mut out = ComplexMatrix::zeros(out_rows, out_cols);
    let n = a.rows();
    for r in 0..n {
        for c in 0..n {
            // Peel digits copy by copy from the least significant end.
            let (mut rr, mut cc) = (r, c);
            let (mut new_r, mut new_c) = (0usize, 0usize);
            let (mut wr, mut wc) = (1usize, 1usize);
            for _ in 0..copies {
                let k = rr % d2;
                let i = (rr / d2) % d1;
                let l = cc % d2;
                let j = (cc / d2) % d1;
                rr /= d1 * d2;
                cc /= d1 * d2;
                new_r += (i * d1 + j) * wr;
                new_c += (k * d2 + l) * wc;
                wr *= d1 * d1;
                wc *= d2 * d2;
            }
            out[(new_r, new_c)] = a[(r, c)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::test_util::{random_hermitian, random_matrix};
    use crate::linalg::{schatten_norm, singular_values, SchattenIndex};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shape(d: &[usize]) -> FactorShape {
        FactorShape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn shape_validation_and_strides() {
        assert!(FactorShape::new(vec![]).is_err());
        assert!(FactorShape::new(vec![2, 0]).is_err());
        let s = shape(&[2, 3, 4]);
        assert_eq!(s.total(), 24);
        assert_eq!(s.strides(), vec![12, 4, 1]);
        assert_eq!(
            FactorShape::repeated(&[2, 3], 2).unwrap().dims(),
            &[2, 3, 2, 3]
        );
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [h, 0.0, 0.0, h].map(|x| Complex64::new(x, 0.0));
        let rho = ComplexMatrix::outer(&bell, &bell);
        let red = partial_trace(&rho, &shape(&[2, 2]), &[1]).unwrap();
        let expected = ComplexMatrix::identity(2).scale(0.5);
        assert!((&red - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn product_state_reduces_to_first_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zero = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let mut rho_b = random_hermitian(&mut rng, 3);
        let tr = rho_b.trace();
        rho_b = rho_b.map(|z| z / tr);
        let red = partial_trace(&zero.kron(&rho_b), &shape(&[2, 3]), &[1]).unwrap();
        assert!((&red - &zero).max_abs() < 1e-14);
        // tracing the first factor instead leaves rho_b
        let red_b = partial_trace(&zero.kron(&rho_b), &shape(&[2, 3]), &[0]).unwrap();
        assert!((&red_b - &rho_b).max_abs() < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_bad_input() {
        let a = ComplexMatrix::identity(4);
        assert!(partial_trace(&a, &shape(&[2, 2]), &[2]).is_err());
        assert!(partial_trace(&a, &shape(&[2, 3]), &[0]).is_err());
    }

    #[test]
    fn tracing_everything_gives_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(&mut rng, 6, 6);
        let full = partial_trace(&a, &shape(&[2, 3]), &[0, 1]).unwrap();
        assert_eq!((full.rows(), full.cols()), (1, 1));
        assert!((full[(0, 0)] - a.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_contracts_trace_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let q = random_hermitian(&mut rng, 6);
            let qa = partial_trace(&q, &shape(&[3, 2]), &[1]).unwrap();
            assert!(
                schatten_norm(&qa, SchattenIndex::ONE).unwrap()
                    <= schatten_norm(&q, SchattenIndex::ONE).unwrap() + 1e-10
            );
        }
    }

    #[test]
    fn partial_trace_lipschitz_in_every_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d_b = 3.0f64;
        for _ in 0..1000 {
            let q = random_hermitian(&mut rng, 6);
            let qa = partial_trace(&q, &shape(&[2, 3]), &[1]).unwrap();
            let (sa, sq) = (singular_values(&qa).unwrap(), singular_values(&q).unwrap());
            for p in SchattenIndex::standard() {
                let lhs = crate::linalg::schatten_from_singular_values(&sa, p);
                let rhs = d_b.powf(p.dual_exponent())
                    * crate::linalg::schatten_from_singular_values(&sq, p);
                assert!(lhs <= rhs + 1e-10, "p={p}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn reshuffle_of_identity_is_maximally_entangled() {
        let r = reshuffle(&ComplexMatrix::identity(4), &shape(&[2, 2])).unwrap();
        // direct relabeling oracle: I[(i,k),(j,l)] = δij δkl lands at R[(i,j),(k,l)]
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let expected = if i == j && k == l { 1.0 } else { 0.0 };
                        assert_eq!(r[(i * 2 + j, k * 2 + l)].re, expected);
                    }
                }
            }
        }
        let s = singular_values(&r).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-14);
        assert!(s[1..].iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn reshuffle_worked_example() {
        let mut a = ComplexMatrix::zeros(4, 4);
        a[(0b01, 0b10)] = Complex64::new(7.0, 0.0);
        a[(0b00, 0b11)] = Complex64::new(0.0, 3.0);
        let r = reshuffle(&a, &shape(&[2, 2])).unwrap();
        assert_eq!(r[(0b01, 0b10)], Complex64::new(7.0, 0.0));
        assert_eq!(r[(0b01, 0b01)], Complex64::new(0.0, 3.0));
    }

    #[test]
    fn reshuffle_non_square_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 6, 6);
        let r = reshuffle(&a, &shape(&[2, 3])).unwrap();
        assert_eq!((r.rows(), r.cols()), (4, 9));
        assert!((r.frobenius_norm() - a.frobenius_norm()).abs() < 1e-12);
        assert!(reshuffle(&a, &shape(&[6])).is_err());
    }

    #[test]
    fn reshuffle_copies_is_copywise() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_matrix(&mut rng, 4, 4);
        let b = random_matrix(&mut rng, 4, 4);
        let s = shape(&[2, 2]);
        let lhs = reshuffle_copies(&a.kron(&b), 2, 2, 2).unwrap();
        let rhs = reshuffle(&a, &s).unwrap().kron(&reshuffle(&b, &s).unwrap());
        assert!((&lhs - &rhs).max_abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn reshuffle_is_an_isometric_involution(seed in any::<u64>(), d in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, d * d, d * d);
            let s = shape(&[d, d]);
            let r = reshuffle(&a, &s).unwrap();
            prop_assert!((r.frobenius_norm() - a.frobenius_norm()).abs() < 1e-12);
            prop_assert_eq!(reshuffle(&r, &s).unwrap(), a);
        }

        #[test]
        fn partial_trace_order_independent(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 12, 12);
            let s = shape(&[2, 3, 2]);
            let both = partial_trace(&a, &s, &[0, 2]).unwrap();
            let first = partial_trace(&partial_trace(&a, &s, &[2]).unwrap(), &shape(&[2, 3]), &[0]).unwrap();
            let second = partial_trace(&partial_trace(&a, &s, &[0]).unwrap(), &shape(&[3, 2]), &[1]).unwrap();
            prop_assert!((&both - &first).max_abs() < 1e-12);
            prop_assert!((&both - &second).max_abs() < 1e-12);
            prop_assert!((both.trace() - a.trace()).norm() < 1e-10);
        }
    }
}
