use nalgebra::{DMatrix, SymmetricEigen};

use crate::linalg::Permutation;
use crate::{Error, Result};

/// Largest `t` for which the Weingarten matrix is built (`t! = 24`).
pub const MAX_WEINGARTEN_T: usize = 4;

/// Weingarten matrix for `U(d)` at order `t`, indexed by `S_t x S_t` in the
/// order of [`Permutation::all`].
#[derive(Clone, Debug)]
pub struct WeingartenMatrix {
    d: usize,
    permutations: Vec<Permutation>,
    values: DMatrix<f64>,
}

impl WeingartenMatrix {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn t(&self) -> usize {
        self.permutations.first().map_or(0, Permutation::len)
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.permutations
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn size(&self) -> usize {
        self.permutations.len()
    }
}

/// `G[σ,τ] = d^{cycl(σ⁻¹τ)}`, the Gram matrix of the permutation operators
/// under the Hilbert-Schmidt inner product.
pub fn gram_matrix(d: usize, t: usize) -> (Vec<Permutation>, DMatrix<f64>) {
    let perms = Permutation::all(t);
    let n = perms.len();
    let g = DMatrix::from_fn(n, n, |i, j| {
        let c = perms[i].inverse().compose(&perms[j]).cycle_count();
        (d as f64).powi(c as i32)
    });
    (perms, g)
}

/// Moore-Penrose pseudo-inverse of the Gram matrix. For `d >= t` this is the
/// ordinary inverse; for `d < t` the Gram matrix is singular and the
/// pseudo-inverse still yields exact unitary moments.
pub fn weingarten_matrix(d: usize, t: usize) -> Result<WeingartenMatrix> {
    if t == 0 || d == 0 {
        return Err(Error::invalid("Weingarten matrix needs d, t >= 1"));
    }
    if t > MAX_WEINGARTEN_T {
        return Err(Error::invalid(format!(
            "Weingarten matrix supported for t <= {MAX_WEINGARTEN_T}, got {t}"
        )));
    }
    let (permutations, g) = gram_matrix(d, t);
    let n = g.nrows();
    let eig = SymmetricEigen::new(g);
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let cutoff = 1e-10 * max;
    let mut values = DMatrix::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cutoff {
            let v = eig.eigenvectors.column(k);
            values += (v * v.transpose()) / lambda;
        }
    }
    // symmetrize away rounding
    let values = (&values + values.transpose()) * 0.5;
    Ok(WeingartenMatrix {
        d,
        permutations,
        values,
    })
}
