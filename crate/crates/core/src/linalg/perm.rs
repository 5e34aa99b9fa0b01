use itertools::Itertools;
use num_complex::Complex64;

use super::ComplexMatrix;
use crate::{guarded_pow, Error, Result};

/// A permutation of `{0, ..., t-1}` stored as its image list: `σ(k) = images[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            if x >= images.len() || std::mem::replace(&mut seen[x], true) {
                return Err(Error::invalid(format!("{images:?} is not a permutation")));
            }
        }
        Ok(Permutation { images })
    }

    pub fn identity(t: usize) -> Self {
        Permutation {
            images: (0..t).collect(),
        }
    }

    /// All `t!` permutations in lexicographic order of image lists; the
    /// identity comes first.
    pub fn all(t: usize) -> Vec<Permutation> {
        (0..t)
            .permutations(t)
            .map(|images| Permutation { images })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, k: usize) -> usize {
        self.images[k]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (k, &x) in self.images.iter().enumerate() {
            inv[x] = k;
        }
        Permutation { images: inv }
    }

    /// `(self ∘ other)(k) = self(other(k))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&k| self.images[k]).collect(),
        }
    }

    /// Number of disjoint cycles, fixed points included.
    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.images.len()];
        let mut cycles = 0;
        for start in 0..self.images.len() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.images[k];
            }
        }
        cycles
    }

    /// Moves tensor slots: `out[σ(k)] = digits[k]`, i.e.
    /// `out[k] = digits[σ⁻¹(k)]`.
    pub fn permute_slots<T: Copy>(&self, digits: &[T]) -> Vec<T> {
        let mut out = digits.to_vec();
        for (k, &x) in digits.iter().enumerate() {
            out[self.images[k]] = x;
        }
        out
    }

    /// Whether `P_σ |a⟩ = |a⟩` for the multi-index `a`.
    pub fn fixes(&self, a: &[usize]) -> bool {
        self.images.iter().enumerate().all(|(k, &x)| a[k] == a[x])
    }
}

/// Number of cycles of `sigma`.
pub fn cycle_count(sigma: &Permutation) -> usize {
    sigma.cycle_count()
}

pub(crate) fn digits_of(mut index: usize, d: usize, t: usize) -> Vec<usize> {
    let mut digits = vec![0; t];
    for k in (0..t).rev() {
        digits[k] = index % d;
        index /= d;
    }
    digits
}

pub(crate) fn index_of(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

/// Column images of `P_σ` on `(C^d)^{⊗t}`: `P_σ |c⟩ = |perm[c]⟩`.
pub(crate) fn permutation_images(sigma: &Permutation, d: usize) -> Result<Vec<usize>> {
    let t = sigma.len();
    let n = guarded_pow(d, t)?;
    Ok((0..n)
        .map(|c| index_of(&sigma.permute_slots(&digits_of(c, d, t)), d))
        .collect())
}

/// The 0/1 matrix `P_σ |i₁…i_t⟩ = |i_{σ⁻¹(1)}…i_{σ⁻¹(t)}⟩` on `(C^d)^{⊗t}`.
///
/// `P_σ P_τ = P_{σ∘τ}`.
pub fn permutation_operator(sigma: &Permutation, d: usize) -> Result<ComplexMatrix> {
    let images = permutation_images(sigma, d)?;
    let n = images.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for (c, &r) in images.iter().enumerate() {
        m[(r, c)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// Projector onto `Sym_t(C^d)`, `Π = (1/t!) Σ_σ P_σ`.
pub fn symmetric_projector(d: usize, t: usize) -> Result<ComplexMatrix> {
    if d == 0 || t == 0 {
        return Err(Error::invalid("symmetric projector needs d, t >= 1"));
    }
    let n = guarded_pow(d, t)?;
    let perms = Permutation::all(t);
    let weight = 1.0 / perms.len() as f64;
    let mut m = ComplexMatrix::zeros(n, n);
    for sigma in &perms {
        for (c, r) in permutation_images(sigma, d)?.into_iter().enumerate() {
            m[(r, c)].re += weight;
        }
    }
    Ok(m)
}
