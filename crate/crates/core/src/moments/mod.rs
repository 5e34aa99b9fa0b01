//! Moment operators: empirical ones built from ensembles and exact Haar
//! references on projective space, the probability simplex, the induced
//! mixed-state body and the unitary group.

mod weingarten;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::sym_dim;
use crate::ensemble::{Ensemble, EnsembleKind};
use crate::linalg::{
    digits_of, kron_vector_power, partial_trace, schatten_norm, symmetric_projector, ComplexMatrix,
    FactorShape, SchattenIndex,
};
use crate::{guarded_pow, Error, Result};

pub use weingarten::{gram_matrix, weingarten_matrix, WeingartenMatrix, MAX_WEINGARTEN_T};

const HERMITIAN_TOL: f64 = 1e-12;
const STATE_TOL: f64 = 1e-10;

/// The space a moment operator lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Projective,
    Simplex,
    Mixed,
    Channel,
}

impl Space {
    pub fn is_state_space(self) -> bool {
        !matches!(self, Space::Channel)
    }
}

/// Hermitian operator `T_t` on a `t`-fold tensor space.
///
/// `local_dims` is the factor shape of one copy: `[d]` for projective,
/// simplex and mixed spaces, `[d_out, d_in]` for channel space. The full
/// operator acts on `local_dims` repeated `t` times.
///
/// JSON: the matrix object plus `"space"`, `"dims"` and `"t"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MomentRepr")]
pub struct MomentOperator {
    space: Space,
    #[serde(rename = "dims")]
    local_dims: FactorShape,
    t: usize,
    #[serde(flatten)]
    matrix: ComplexMatrix,
}

#[derive(Deserialize)]
struct MomentRepr {
    space: Space,
    dims: FactorShape,
    t: usize,
    #[serde(flatten)]
    matrix: ComplexMatrix,
}

impl TryFrom<MomentRepr> for MomentOperator {
    type Error = Error;

    fn try_from(r: MomentRepr) -> Result<Self> {
        MomentOperator::new(r.space, r.dims, r.t, r.matrix)
    }
}

impl MomentOperator {
    /// Validates shape, Hermiticity, and for state spaces positivity, unit
    /// trace and (projective only) support on the symmetric subspace.
    pub fn new(
        space: Space,
        local_dims: FactorShape,
        t: usize,
        matrix: ComplexMatrix,
    ) -> Result<Self> {
        if t == 0 {
            return Err(Error::invalid("moment order t must be >= 1"));
        }
        let dim = guarded_pow(local_dims.total(), t)?;
        if !matrix.is_square() || matrix.rows() != dim {
            return Err(Error::dims(format!(
                "{}x{} matrix for a moment of order {t} on local dims {:?}",
                matrix.rows(),
                matrix.cols(),
                local_dims.dims()
            )));
        }
        if space == Space::Channel && local_dims.len() != 2 {
            return Err(Error::invalid(
                "channel moments need local dims [d_out, d_in]",
            ));
        }
        if space != Space::Channel && local_dims.len() != 1 {
            return Err(Error::invalid(
                "state moments need a single local dimension",
            ));
        }
        if !matrix.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::validation(format!(
                "moment operator not Hermitian (defect {})",
                matrix.hermiticity_defect()
            )));
        }
        if space.is_state_space() {
            let tr = matrix.trace();
            if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
                return Err(Error::validation(format!(
                    "moment operator trace {tr} (must be 1)"
                )));
            }
            let min = matrix
                .to_nalgebra()
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if min < -STATE_TOL {
                return Err(Error::validation(format!(
                    "moment operator has eigenvalue {min}"
                )));
            }
        }
        if space == Space::Projective {
            let pi = symmetric_projector(local_dims.total(), t)?;
            let defect = (&(&(&pi * &matrix) * &pi) - &matrix).frobenius_norm();
            if defect > STATE_TOL {
                return Err(Error::validation(format!(
                    "projective moment not supported on the symmetric subspace (‖ΠTΠ - T‖₂ = {defect})"
                )));
            }
        }
        Ok(MomentOperator {
            space,
            local_dims,
            t,
            matrix,
        })
    }

    pub(crate) fn from_parts_unchecked(
        space: Space,
        local_dims: Vec<usize>,
        t: usize,
        matrix: ComplexMatrix,
    ) -> Self {
        MomentOperator {
            space,
            local_dims: FactorShape::new(local_dims).expect("positive local dims"),
            t,
            matrix,
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn local_dims(&self) -> &FactorShape {
        &self.local_dims
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Factor shape of the whole `t`-copy space.
    pub fn full_shape(&self) -> FactorShape {
        FactorShape::repeated(self.local_dims.dims(), self.t).expect("nonempty local dims")
    }

    pub fn same_kind(&self, other: &MomentOperator) -> bool {
        self.space == other.space && self.local_dims == other.local_dims && self.t == other.t
    }

    pub(crate) fn require_same_kind(&self, other: &MomentOperator) -> Result<()> {
        if !self.same_kind(other) {
            return Err(Error::invalid(format!(
                "moment operators differ: {:?} {:?} t={} vs {:?} {:?} t={}",
                self.space,
                self.local_dims.dims(),
                self.t,
                other.space,
                other.local_dims.dims(),
                other.t
            )));
        }
        Ok(())
    }
}

/// `acc += w |v⟩⟨v|` on a row-major `n x n` buffer.
pub(crate) fn add_weighted_projector(acc: &mut [Complex64], v: &[Complex64], w: f64) {
    let n = v.len();
    for (i, &vi) in v.iter().enumerate() {
        let wi = vi * w;
        let row = &mut acc[i * n..(i + 1) * n];
        for (a, &vj) in row.iter_mut().zip(v) {
            *a += wi * vj.conj();
        }
    }
}

/// Row-major vectorisation `|U⟩⟩ = Σ U_ij |i⟩|j⟩`.
pub fn vectorize(u: &ComplexMatrix) -> Vec<Complex64> {
    u.as_slice().to_vec()
}

/// Moment operator of an ensemble.
///
/// Pure states give `Σ w (|ψ⟩⟨ψ|)^{⊗t}` on projective space, density
/// matrices `Σ w ρ^{⊗t}`, probability vectors `Σ w diag(p)^{⊗t}` and unitaries
/// the reshuffled `Σ w ((U ⊗ U*)^{⊗t})^R = Σ w (|U⟩⟩⟨⟨U|)^{⊗t}`.
pub fn empirical_moment(e: &Ensemble, t: usize) -> Result<MomentOperator> {
    if t == 0 {
        return Err(Error::invalid("moment order t must be >= 1"));
    }
    let d = e.dim();
    let (space, local) = match e.kind() {
        EnsembleKind::PureState => (Space::Projective, vec![d]),
        EnsembleKind::DensityMatrix => (Space::Mixed, vec![d]),
        EnsembleKind::ProbabilityVector => (Space::Simplex, vec![d]),
        EnsembleKind::Unitary => (Space::Channel, vec![d, d]),
    };
    let n = guarded_pow(local.iter().product(), t)?;
    let mut acc = ComplexMatrix::zeros(n, n);
    for (x, &w) in e.points().iter().zip(e.weights()) {
        match e.kind() {
            EnsembleKind::PureState => {
                add_weighted_projector(acc.as_mut_slice(), &kron_vector_power(x.as_slice(), t), w)
            }
            EnsembleKind::Unitary => {
                add_weighted_projector(acc.as_mut_slice(), &kron_vector_power(&vectorize(x), t), w)
            }
            EnsembleKind::DensityMatrix => {
                acc.add_scaled(&x.kron_power(t), Complex64::new(w, 0.0))?
            }
            EnsembleKind::ProbabilityVector => {
                let diag = kron_vector_power(x.as_slice(), t);
                for (i, p) in diag.into_iter().enumerate() {
                    acc[(i, i)] += p * w;
                }
            }
        }
    }
    Ok(MomentOperator::from_parts_unchecked(space, local, t, acc))
}

/// `Π_{d,t} / D_t`, the moment operator of the Haar measure on `CP^{d-1}`.
pub fn haar_projective_moment(d: usize, t: usize) -> Result<MomentOperator> {
    let pi = symmetric_projector(d, t)?;
    let dim = sym_dim(d, t)? as f64;
    Ok(MomentOperator::from_parts_unchecked(
        Space::Projective,
        vec![d],
        t,
        pi.scale(1.0 / dim),
    ))
}

/// Flat (Dirichlet(1,…,1)) moment `E[p_{i1}⋯p_{it}] = (∏ a_k!) (d-1)!/(d+t-1)!`
/// where `a_k` counts how often `k` occurs in the multi-index.
pub fn flat_simplex_moment_entry(multi_index: &[usize], d: usize) -> f64 {
    let t = multi_index.len();
    let mut counts = vec![0usize; d];
    for &i in multi_index {
        counts[i] += 1;
    }
    let numerator: f64 = counts
        .iter()
        .map(|&a| (1..=a).map(|k| k as f64).product::<f64>())
        .product();
    let denominator: f64 = (d..d + t).map(|k| k as f64).product();
    numerator / denominator
}

/// Diagonal moment operator of the flat measure on the probability simplex.
pub fn haar_simplex_moment(d: usize, t: usize) -> Result<MomentOperator> {
    if d == 0 || t == 0 {
        return Err(Error::invalid("simplex moment needs d, t >= 1"));
    }
    let n = guarded_pow(d, t)?;
    let diag: Vec<f64> = (0..n)
        .map(|idx| flat_simplex_moment_entry(&digits_of(idx, d, t), d))
        .collect();
    Ok(MomentOperator::from_parts_unchecked(
        Space::Simplex,
        vec![d],
        t,
        ComplexMatrix::from_real_diag(&diag),
    ))
}

/// Factor positions of the `B` subsystems in `(A1, B1, ..., At, Bt)`.
pub(crate) fn b_positions(t: usize) -> Vec<usize> {
    (0..t).map(|k| 2 * k + 1).collect()
}

/// Moment operator of the induced measure on `d_A x d_A` density matrices:
/// the partial trace over every `B` factor of the projective Haar moment on
/// `C^{d_A d_B}`.
pub fn haar_mixed_moment(d_a: usize, d_b: usize, t: usize) -> Result<MomentOperator> {
    let projective = haar_projective_moment(d_a * d_b, t)?;
    let shape = FactorShape::repeated(&[d_a, d_b], t)?;
    let reduced = partial_trace(projective.matrix(), &shape, &b_positions(t))?;
    Ok(MomentOperator::from_parts_unchecked(
        Space::Mixed,
        vec![d_a],
        t,
        reduced,
    ))
}

/// Largest `t` for exact unitary channel moments.
pub const MAX_CHANNEL_T: usize = 3;

/// Exact `∫ ((U ⊗ U*)^{⊗t})^R dU = ∫ (|U⟩⟩⟨⟨U|)^{⊗t} dU` over Haar `U(d)`,
/// via Weingarten sums:
/// `∫ ∏ U_{i_m j_m} conj(U_{k_m l_m}) = Σ_{σ,τ} ∏ δ(i_m, k_σ(m)) δ(j_m, l_τ(m)) Wg(σ, τ)`.
///
/// Each copy's index is `(i, j)` with `i` the row (output) and `j` the
/// column (input) of `U`; copies are ordered copy-major.
pub fn haar_unitary_channel_moment(d: usize, t: usize) -> Result<MomentOperator> {
    if t == 0 || t > MAX_CHANNEL_T {
        return Err(Error::invalid(format!(
            "exact unitary moments supported for 1 <= t <= {MAX_CHANNEL_T}, got {t}"
        )));
    }
    let n = guarded_pow(d * d, t)?;
    let wg = weingarten_matrix(d, t)?;
    let perms = wg.permutations();
    let mut out = ComplexMatrix::zeros(n, n);
    for row in 0..n {
        let digits = digits_of(row, d, 2 * t);
        let outs: Vec<usize> = (0..t).map(|m| digits[2 * m]).collect();
        let ins: Vec<usize> = (0..t).map(|m| digits[2 * m + 1]).collect();
        for (a, sigma) in perms.iter().enumerate() {
            let k = sigma.permute_slots(&outs);
            for (b, tau) in perms.iter().enumerate() {
                let w = wg.get(a, b);
                if w == 0.0 {
                    continue;
                }
                let l = tau.permute_slots(&ins);
                let col = (0..t).fold(0, |acc, m| (acc * d + k[m]) * d + l[m]);
                out[(row, col)].re += w;
            }
        }
    }
    Ok(MomentOperator::from_parts_unchecked(
        Space::Channel,
        vec![d, d],
        t,
        out,
    ))
}

/// `‖T₁ - T₂‖_p` for moment operators of the same space, dims and order.
pub fn delta(t1: &MomentOperator, t2: &MomentOperator, p: SchattenIndex) -> Result<f64> {
    t1.require_same_kind(t2)?;
    schatten_norm(&(t1.matrix() - t2.matrix()), p)
}

/// Hermitian coefficient matrix `G_t` of a balanced degree-`t` polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialCoefficients {
    t: usize,
    matrix: ComplexMatrix,
}

impl PolynomialCoefficients {
    pub fn new(t: usize, matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::validation(
                "polynomial coefficient matrix must be Hermitian",
            ));
        }
        Ok(PolynomialCoefficients { t, matrix })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// `⟨g_t⟩ = Tr(G_t T_t)`.
pub fn average_polynomial(g: &PolynomialCoefficients, moment: &MomentOperator) -> Result<f64> {
    if g.t != moment.t() {
        return Err(Error::invalid(format!(
            "polynomial of order {} vs moment of order {}",
            g.t,
            moment.t()
        )));
    }
    g.matrix.check_same_shape(moment.matrix())?;
    let n = g.matrix.rows();
    let (a, b) = (g.matrix.as_slice(), moment.matrix().as_slice());
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            total += a[i * n + j] * b[j * n + i];
        }
    }
    Ok(total.re)
}

/// Weighted frame potential `Σ_ij w_i w_j |⟨ψ_i|ψ_j⟩|^{2t}`.
pub fn frame_potential(e: &Ensemble, t: usize) -> Result<f64> {
    e.require_kind(EnsembleKind::PureState)?;
    let pts = e.points();
    let w = e.weights();
    let mut total = 0.0;
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            let overlap: Complex64 = pts[i]
                .as_slice()
                .iter()
                .zip(pts[j].as_slice())
                .map(|(a, b)| a.conj() * b)
                .sum();
            total += w[i] * w[j] * overlap.norm_sqr().powi(t as i32);
        }
    }
    Ok(total)
}

/// `sqrt((D-1)/D · (F_t - 1/D))` with `D = binom(d+t-1, t)`; zero exactly for
/// `t`-designs.
pub fn welch_gap(e: &Ensemble, t: usize) -> Result<f64> {
    let f = frame_potential(e, t)?;
    let dim = sym_dim(e.dim(), t)? as f64;
    let radicand = (dim - 1.0) / dim * (f - 1.0 / dim);
    if radicand < -1e-12 {
        return Err(Error::Computation(format!(
            "frame potential {f} below the Welch bound 1/{dim}"
        )));
    }
    Ok(radicand.max(0.0).sqrt())
}
