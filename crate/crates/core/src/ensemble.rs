//! Finite weighted point sets: the discrete measures whose moments are
//! compared against Haar references.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::ComplexMatrix;
use crate::{Error, Result};

const WEIGHT_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Column vectors `d x 1` of unit norm.
    PureState,
    /// `d x d` density matrices.
    DensityMatrix,
    /// Column vectors `d x 1` with nonnegative real entries summing to one.
    ProbabilityVector,
    /// `d x d` unitaries.
    Unitary,
}

/// A normalized discrete measure.
///
/// JSON: `{"kind": ..., "weights": [...], "points": [matrix, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnsembleRepr")]
pub struct Ensemble {
    kind: EnsembleKind,
    weights: Vec<f64>,
    points: Vec<ComplexMatrix>,
}

#[derive(Deserialize)]
struct EnsembleRepr {
    kind: EnsembleKind,
    weights: Vec<f64>,
    points: Vec<ComplexMatrix>,
}

impl TryFrom<EnsembleRepr> for Ensemble {
    type Error = Error;

    fn try_from(r: EnsembleRepr) -> Result<Self> {
        Ensemble::new(r.kind, r.points, r.weights)
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(xs: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &x in xs {
        let s = sum + x;
        comp += if sum.abs() >= x.abs() {
            (sum - s) + x
        } else {
            (x - s) + sum
        };
        sum = s;
    }
    sum + comp
}

impl Ensemble {
    /// Validates every invariant; errors name the offending point index.
    pub fn new(kind: EnsembleKind, points: Vec<ComplexMatrix>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::validation("ensemble is empty"));
        }
        if points.len() != weights.len() {
            return Err(Error::validation(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::validation(format!(
                "weight {i} is {} (must be >= 0)",
                weights[i]
            )));
        }
        let total = compensated_sum(&weights);
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::validation(format!(
                "weights sum {total} (must be 1)"
            )));
        }

        let (rows, cols) = (points[0].rows(), points[0].cols());
        for (i, x) in points.iter().enumerate() {
            if (x.rows(), x.cols()) != (rows, cols) {
                return Err(Error::validation(format!(
                    "point {i} is {}x{}, expected {rows}x{cols}",
                    x.rows(),
                    x.cols()
                )));
            }
            check_point(kind, x).map_err(|msg| Error::validation(format!("point {i}: {msg}")))?;
        }
        Ok(Ensemble {
            kind,
            weights,
            points,
        })
    }

    /// Equal weights `1/m`.
    pub fn uniform(kind: EnsembleKind, points: Vec<ComplexMatrix>) -> Result<Self> {
        let m = points.len();
        let weights = vec![1.0 / m as f64; m];
        Self::new(kind, points, weights)
    }

    /// Uniform ensemble of pure states from plain vectors.
    pub fn from_states(states: &[Vec<Complex64>]) -> Result<Self> {
        Self::uniform(
            EnsembleKind::PureState,
            states.iter().map(|s| ComplexMatrix::column(s)).collect(),
        )
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn points(&self) -> &[ComplexMatrix] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Hilbert-space (or simplex) dimension of the points.
    pub fn dim(&self) -> usize {
        self.points[0].rows()
    }

    pub fn is_uniform(&self) -> bool {
        let w0 = self.weights[0];
        self.weights.iter().all(|&w| w == w0)
    }

    pub(crate) fn require_kind(&self, kind: EnsembleKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::invalid(format!(
                "expected a {kind:?} ensemble, got {:?}",
                self.kind
            )));
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(
        kind: EnsembleKind,
        points: Vec<ComplexMatrix>,
        weights: Vec<f64>,
    ) -> Self {
        Ensemble {
            kind,
            weights,
            points,
        }
    }
}

fn check_point(kind: EnsembleKind, x: &ComplexMatrix) -> std::result::Result<(), String> {
    match kind {
        EnsembleKind::PureState => {
            if x.cols() != 1 {
                return Err("pure states must be column vectors".into());
            }
            let norm = x.frobenius_norm();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(format!("norm {norm} (must be 1)"));
            }
        }
        EnsembleKind::ProbabilityVector => {
            if x.cols() != 1 {
                return Err("probability vectors must be column vectors".into());
            }
            for z in x.as_slice() {
                if z.im.abs() > NORM_TOL || z.re < -NORM_TOL {
                    return Err(format!("entry {z} is not a probability"));
                }
            }
            let total: f64 = x.as_slice().iter().map(|z| z.re).sum();
            if (total - 1.0).abs() > NORM_TOL {
                return Err(format!("entries sum {total} (must be 1)"));
            }
        }
        EnsembleKind::DensityMatrix => {
            if !x.is_square() {
                return Err("density matrices must be square".into());
            }
            if !x.is_hermitian(1e-12) {
                return Err(format!("not Hermitian (defect {})", x.hermiticity_defect()));
            }
            let tr = x.trace();
            if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
                return Err(format!("trace {tr} (must be 1)"));
            }
            let min = x
                .to_nalgebra()
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if min < -PSD_TOL {
                return Err(format!("negative eigenvalue {min}"));
            }
        }
        EnsembleKind::Unitary => {
            if !x.is_square() {
                return Err("unitaries must be square".into());
            }
            let defect =
                (&(&x.adjoint() * x) - &ComplexMatrix::identity(x.rows())).frobenius_norm();
            if defect > UNITARY_TOL {
                return Err(format!("‖U†U - I‖₂ = {defect}"));
            }
        }
    }
    Ok(())
}
