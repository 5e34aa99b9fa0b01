use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::ComplexMatrix;

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n, n);
    (&g + &g.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations on its real
/// symmetric embedding `[[Re, -Im], [Im, Re]]`, whose spectrum is that of the
/// input with every eigenvalue doubled. Independent of the library's
/// decomposition backend.
pub fn jacobi_hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.rows();
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            a[i * m + j] = z.re;
            a[(i + n) * m + j + n] = z.re;
            a[i * m + j + n] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * m + j] * a[i * m + j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut diag: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    diag.sort_by(|x, y| x.total_cmp(y));
    // each eigenvalue appears twice in the embedding
    diag.into_iter().step_by(2).collect()
}
