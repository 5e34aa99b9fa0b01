use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
///
/// Serialized as `{"rows": n, "cols": m, "entries": [[re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        let data = repr
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        ComplexMatrix::from_vec(repr.rows, repr.cols, data)
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        MatrixRepr {
            rows: m.rows,
            cols: m.cols,
            entries: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(
            rows,
            cols,
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in diag.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in diag.iter().enumerate() {
            m.data[i * n + i] = Complex64::new(x, 0.0);
        }
        m
    }

    /// Column vector.
    pub fn column(entries: &[Complex64]) -> Self {
        ComplexMatrix {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    /// `|v><w|`.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|z| z * factor)
    }

    pub fn scale_mut(&mut self, factor: f64) {
        for z in &mut self.data {
            *z *= factor;
        }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &ComplexMatrix, factor: Complex64) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
        Ok(())
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal().into_iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entrywise 2-norm, equal to the Schatten-2 norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max_ij |A_ij - conj(A_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Hermitian up to `rel_tol * max|A|`.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= rel_tol * self.max_abs()
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::dims(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = vec![ZERO; rows * cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    let base = (i * other.rows + k) * cols + j * other.cols;
                    for (l, &b) in other.row(k).iter().enumerate() {
                        data[base + l] = a * b;
                    }
                }
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// `self^{⊗t}`; `t = 0` gives the 1x1 identity.
    pub fn kron_power(&self, t: usize) -> ComplexMatrix {
        let mut acc = ComplexMatrix::identity(1);
        for _ in 0..t {
            acc = acc.kron(self);
        }
        acc
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> ComplexMatrix {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub(crate) fn check_same_shape(&self, other: &ComplexMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dims(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

/// `v^{⊗t}` for a vector given as a slice.
pub fn kron_vector_power(v: &[Complex64], t: usize) -> Vec<Complex64> {
    let mut acc = vec![ONE];
    for _ in 0..t {
        let mut next = Vec::with_capacity(acc.len() * v.len());
        for &a in &acc {
            next.extend(v.iter().map(|&b| a * b));
        }
        acc = next;
    }
    acc
}

/// Kronecker product of two matrices.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

// Operator impls panic on shape mismatch, like the std numeric operators on
// overflow; use `matmul` / `add_scaled` for fallible versions.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(rhs, ONE).expect("matrix sum shape mismatch");
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(rhs, -ONE)
            .expect("matrix difference shape mismatch");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::test_util::random_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_of_basis_projectors() {
        let a = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let b = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        assert_eq!(
            kron(&a, &b),
            ComplexMatrix::from_real_diag(&[0.0, 1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn kron_frobenius_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = random_matrix(&mut rng, 3, 2);
            let b = random_matrix(&mut rng, 2, 4);
            // Direct entry sum over the product, independent of `kron`.
            let mut direct = 0.0;
            for x in a.as_slice() {
                for y in b.as_slice() {
                    direct += (x * y).norm_sqr();
                }
            }
            let k = kron(&a, &b);
            assert_eq!((k.rows(), k.cols()), (6, 8));
            assert!((k.frobenius_norm() - direct.sqrt()).abs() < 1e-12);
            assert!((k.frobenius_norm() - a.frobenius_norm() * b.frobenius_norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn from_vec_rejects_wrong_count() {
        assert!(ComplexMatrix::from_vec(2, 2, vec![c(1.0); 3]).is_err());
        assert!(ComplexMatrix::from_vec(0, 2, vec![]).is_err());
    }

    #[test]
    fn matmul_matches_hand_computation() {
        let a =
            ComplexMatrix::from_vec(2, 2, vec![c(1.0), Complex64::i(), c(0.0), c(2.0)]).unwrap();
        let b = ComplexMatrix::from_vec(2, 1, vec![c(1.0), c(1.0)]).unwrap();
        let ab = &a * &b;
        assert_eq!(ab.as_slice(), &[Complex64::new(1.0, 1.0), c(2.0)]);
        assert!(b.matmul(&a).is_err());
    }

    #[test]
    fn json_shape() {
        let m = ComplexMatrix::from_vec(1, 2, vec![Complex64::new(0.5, -1.0), c(2.0)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"entries":[[0.5,-1.0],[2.0,0.0]]}"#);
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(
            serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"entries":[[1,0]]}"#)
                .is_err()
        );
    }

    #[test]
    fn kron_vector_power_matches_matrix_kron() {
        let v = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let col = ComplexMatrix::column(&v);
        let p = kron_vector_power(&v, 3);
        assert_eq!(p, col.kron_power(3).into_vec());
    }
}
