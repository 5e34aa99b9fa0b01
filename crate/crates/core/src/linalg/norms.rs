use std::fmt;
use std::str::FromStr;

use nalgebra::linalg::SVD;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ComplexMatrix;
use crate::{Error, Result};

/// Relative threshold below which singular values count as zero for rank.
pub const RANK_TOL: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-12;
const SVD_MAX_ITER: usize = 10_000;

/// Schatten norm order `p ∈ [1, ∞]`.
///
/// Displays and serializes as the number itself, or `"inf"` for `p = ∞`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct SchattenIndex(f64);

impl SchattenIndex {
    pub const ONE: SchattenIndex = SchattenIndex(1.0);
    pub const TWO: SchattenIndex = SchattenIndex(2.0);
    pub const INFINITY: SchattenIndex = SchattenIndex(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::invalid(format!(
                "Schatten index must be >= 1, got {p}"
            )));
        }
        Ok(SchattenIndex(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `(p-1)/p`, exactly 0 at `p = 1` and exactly 1 at `p = ∞`.
    pub fn dual_exponent(self) -> f64 {
        if self.is_infinite() {
            1.0
        } else {
            (self.0 - 1.0) / self.0
        }
    }

    /// `1/p`, exactly 0 at `p = ∞`.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }

    /// The four orders used throughout the experiments.
    pub fn standard() -> Vec<SchattenIndex> {
        vec![Self::ONE, Self::TWO, SchattenIndex(3.0), Self::INFINITY]
    }
}

impl fmt::Display for SchattenIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for SchattenIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" | "∞" => Ok(Self::INFINITY),
            other => {
                let p: f64 = other.parse().map_err(|_| {
                    Error::invalid(format!("cannot parse Schatten index {other:?}"))
                })?;
                Self::new(p)
            }
        }
    }
}

impl Serialize for SchattenIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for SchattenIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => SchattenIndex::new(p),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Singular values in descending order, `min(rows, cols)` of them.
///
/// Hermitian inputs go through the eigenvalue route (`s_i = |λ_i|`), which is
/// both faster and more accurate than a general SVD.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let mut s: Vec<f64> = if a.is_hermitian(HERMITIAN_TOL) {
        a.to_nalgebra()
            .symmetric_eigenvalues()
            .iter()
            .map(|l| l.abs())
            .collect()
    } else {
        let svd = SVD::try_new(a.to_nalgebra(), false, false, f64::EPSILON, SVD_MAX_ITER)
            .ok_or_else(|| Error::Computation("SVD did not converge".into()))?;
        svd.singular_values.iter().copied().collect()
    };
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Schatten norm of a precomputed singular-value list.
pub fn schatten_from_singular_values(s: &[f64], p: SchattenIndex) -> f64 {
    let max = s.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return max;
    }
    let p = p.value();
    if p == 1.0 {
        return s.iter().sum();
    }
    if p == 2.0 {
        return s.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    // Scale by the largest value so high orders do not overflow.
    max * s
        .iter()
        .map(|x| (x / max).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// `(Σ s_i^p)^{1/p}`; the largest singular value at `p = ∞`.
pub fn schatten_norm(a: &ComplexMatrix, p: SchattenIndex) -> Result<f64> {
    if p == SchattenIndex::TWO {
        return Ok(a.frobenius_norm());
    }
    Ok(schatten_from_singular_values(&singular_values(a)?, p))
}

/// Numerical rank with the [`RANK_TOL`] relative cutoff.
pub fn rank(a: &ComplexMatrix) -> Result<usize> {
    let s = singular_values(a)?;
    let cutoff = RANK_TOL * s.first().copied().unwrap_or(0.0);
    Ok(s.iter().filter(|&&x| x > cutoff).count())
}

/// Measured norms and bounds for `‖AB‖_p` and `‖ABA†‖_p` against the
/// unitarily-invariant product inequalities.
#[derive(Clone, Debug, Serialize)]
pub struct ProductNormWitness {
    pub p: SchattenIndex,
    pub norm_ab: f64,
    /// `‖A‖_p ‖B‖_∞`
    pub bound_a_p: f64,
    /// `‖B‖_p ‖A‖_∞`
    pub bound_b_p: f64,
    pub product_holds: bool,
    /// `‖ABA†‖_p`, present when `B` is square with size `A.cols()`.
    pub norm_aba: Option<f64>,
    /// `min(‖A‖_p ‖A‖_∞ ‖B‖_∞, ‖B‖_p ‖A‖_∞²)`
    pub bound_aba: Option<f64>,
    pub sandwich_holds: bool,
}

fn within(measured: f64, bound: f64) -> bool {
    measured <= bound + 1e-10 * bound.max(1.0)
}

pub fn product_norm_bound_check(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    p: SchattenIndex,
) -> Result<ProductNormWitness> {
    let ab = a.matmul(b)?;
    let inf = SchattenIndex::INFINITY;
    let (a_p, a_inf) = (schatten_norm(a, p)?, schatten_norm(a, inf)?);
    let (b_p, b_inf) = (schatten_norm(b, p)?, schatten_norm(b, inf)?);
    let norm_ab = schatten_norm(&ab, p)?;
    let bound_a_p = a_p * b_inf;
    let bound_b_p = b_p * a_inf;

    let (norm_aba, bound_aba) = if b.is_square() && b.rows() == a.cols() {
        let aba = ab.matmul(&a.adjoint())?;
        let bound = (a_p * a_inf * b_inf).min(b_p * a_inf * a_inf);
        (Some(schatten_norm(&aba, p)?), Some(bound))
    } else {
        (None, None)
    };

    Ok(ProductNormWitness {
        p,
        norm_ab,
        bound_a_p,
        bound_b_p,
        product_holds: within(norm_ab, bound_a_p.min(bound_b_p)),
        sandwich_holds: match (norm_aba, bound_aba) {
            (Some(n), Some(b)) => within(n, b),
            _ => true,
        },
        norm_aba,
        bound_aba,
    })
}
