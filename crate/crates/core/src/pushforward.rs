//! The three measurable maps (decoherence to the simplex, partial trace over
//! `B`, and the `B`-trace of channel moments) at ensemble and moment level.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::sym_dim;
use crate::ensemble::{Ensemble, EnsembleKind};
use crate::linalg::{
    digits_of, partial_trace, symmetric_projector, ComplexMatrix, FactorShape, Permutation,
};
use crate::moments::{b_positions, MomentOperator, Space};
use crate::{guarded_pow, Complex64, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    /// Pure states to probability vectors, `p_j = |⟨j|ψ⟩|²`.
    Decohere,
    /// Pure states on `A ⊗ B` to density matrices on `A`.
    #[serde(rename = "ptrace_b")]
    PartialTraceB,
    /// Channel moments on `AB` to channel moments on `A`.
    #[serde(rename = "channel_trace_b")]
    ChannelTraceB,
}

/// A pushforward map at a fixed moment order.
///
/// For [`MapKind::Decohere`] the space is `C^{d_a}` and `d_b = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PushforwardMap {
    kind: MapKind,
    d_a: usize,
    d_b: usize,
    t: usize,
}

impl PushforwardMap {
    pub fn decohere(d: usize, t: usize) -> Result<Self> {
        Self::new(MapKind::Decohere, d, 1, t)
    }

    pub fn partial_trace_b(d_a: usize, d_b: usize, t: usize) -> Result<Self> {
        Self::new(MapKind::PartialTraceB, d_a, d_b, t)
    }

    pub fn channel_trace_b(d_a: usize, d_b: usize, t: usize) -> Result<Self> {
        Self::new(MapKind::ChannelTraceB, d_a, d_b, t)
    }

    pub fn new(kind: MapKind, d_a: usize, d_b: usize, t: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 || t == 0 {
            return Err(Error::invalid(
                "pushforward map needs positive dimensions and t >= 1",
            ));
        }
        if kind == MapKind::Decohere && d_b != 1 {
            return Err(Error::invalid("decoherence acts on a single system"));
        }
        Ok(PushforwardMap { kind, d_a, d_b, t })
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn source_space(&self) -> Space {
        match self.kind {
            MapKind::Decohere | MapKind::PartialTraceB => Space::Projective,
            MapKind::ChannelTraceB => Space::Channel,
        }
    }

    pub fn target_space(&self) -> Space {
        match self.kind {
            MapKind::Decohere => Space::Simplex,
            MapKind::PartialTraceB => Space::Mixed,
            MapKind::ChannelTraceB => Space::Channel,
        }
    }

    /// Per-copy local dims of the source moment operator.
    pub fn source_local_dims(&self) -> Vec<usize> {
        let d = self.d_a * self.d_b;
        match self.kind {
            MapKind::ChannelTraceB => vec![d, d],
            _ => vec![d],
        }
    }

    pub fn target_local_dims(&self) -> Vec<usize> {
        match self.kind {
            MapKind::ChannelTraceB => vec![self.d_a, self.d_a],
            _ => vec![self.d_a],
        }
    }

    fn check_source(&self, m: &MomentOperator) -> Result<()> {
        if m.space() != self.source_space()
            || m.local_dims().dims() != self.source_local_dims()
            || m.t() != self.t
        {
            return Err(Error::invalid(format!(
                "{:?} map with d_a={}, d_b={}, t={} cannot act on a {:?} moment with dims {:?} and t={}",
                self.kind,
                self.d_a,
                self.d_b,
                self.t,
                m.space(),
                m.local_dims().dims(),
                m.t()
            )));
        }
        Ok(())
    }
}

/// `(p_i)_j = |⟨j|ψ_i⟩|²`, keeping weights and order.
pub fn decohere_ensemble(e: &Ensemble) -> Result<Ensemble> {
    e.require_kind(EnsembleKind::PureState)?;
    let points = e
        .points()
        .par_iter()
        .map(|psi| {
            let probs: Vec<Complex64> = psi
                .as_slice()
                .iter()
                .map(|z| Complex64::new(z.norm_sqr(), 0.0))
                .collect();
            ComplexMatrix::column(&probs)
        })
        .collect();
    Ok(Ensemble::from_parts_unchecked(
        EnsembleKind::ProbabilityVector,
        points,
        e.weights().to_vec(),
    ))
}

/// `Tr_B |ψ_i⟩⟨ψ_i|` for every point, keeping weights and order.
pub fn ptrace_ensemble(e: &Ensemble, d_a: usize, d_b: usize) -> Result<Ensemble> {
    e.require_kind(EnsembleKind::PureState)?;
    if e.dim() != d_a * d_b {
        return Err(Error::dims(format!(
            "state dimension {} is not d_a * d_b = {d_a} * {d_b}",
            e.dim()
        )));
    }
    let points = e
        .points()
        .par_iter()
        .map(|psi| {
            // ψ as a d_a x d_b coefficient matrix M, so Tr_B |ψ⟩⟨ψ| = M M†
            let m =
                ComplexMatrix::from_vec(d_a, d_b, psi.as_slice().to_vec()).expect("shape checked");
            &m * &m.adjoint()
        })
        .collect();
    Ok(Ensemble::from_parts_unchecked(
        EnsembleKind::DensityMatrix,
        points,
        e.weights().to_vec(),
    ))
}

/// Zeroes every off-diagonal entry.
pub fn dephase(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_diag(&a.diagonal())
}

/// Image moment operator under `map`.
pub fn pushforward_moment(m: &MomentOperator, map: &PushforwardMap) -> Result<MomentOperator> {
    map.check_source(m)?;
    let t = map.t;
    let matrix = match map.kind {
        MapKind::Decohere => dephase(m.matrix()),
        MapKind::PartialTraceB => {
            let shape = FactorShape::repeated(&[map.d_a, map.d_b], t)?;
            partial_trace(m.matrix(), &shape, &b_positions(t))?
        }
        MapKind::ChannelTraceB => {
            // each copy is (A_out, B_out, A_in, B_in)
            let shape = FactorShape::repeated(&[map.d_a, map.d_b, map.d_a, map.d_b], t)?;
            let traced: Vec<usize> = (0..t).flat_map(|k| [4 * k + 1, 4 * k + 3]).collect();
            partial_trace(m.matrix(), &shape, &traced)?
        }
    };
    Ok(MomentOperator::from_parts_unchecked(
        map.target_space(),
        map.target_local_dims(),
        t,
        matrix,
    ))
}

/// Single-copy Kraus operators: `|j⟩⟨j|` for decoherence and
/// `K_j = Σ_i |i⟩⟨i, j|` (`d_a x d_a d_b`) for the partial trace.
pub fn kraus_operators(map: &PushforwardMap) -> Result<Vec<ComplexMatrix>> {
    match map.kind {
        MapKind::Decohere => Ok((0..map.d_a)
            .map(|j| {
                let mut k = ComplexMatrix::zeros(map.d_a, map.d_a);
                k[(j, j)] = Complex64::new(1.0, 0.0);
                k
            })
            .collect()),
        MapKind::PartialTraceB => Ok((0..map.d_b)
            .map(|j| ptrace_kraus(map.d_a, map.d_b, j))
            .collect()),
        MapKind::ChannelTraceB => Err(Error::invalid("no Kraus form for the channel trace map")),
    }
}

fn ptrace_kraus(d_a: usize, d_b: usize, j: usize) -> ComplexMatrix {
    let mut k = ComplexMatrix::zeros(d_a, d_a * d_b);
    for i in 0..d_a {
        k[(i, i * d_b + j)] = Complex64::new(1.0, 0.0);
    }
    k
}

/// `K_a = K_{a_1} ⊗ ... ⊗ K_{a_t}` on the interleaved `t`-copy space.
pub fn multi_copy_kraus(a: &[usize], d_a: usize, d_b: usize) -> Result<ComplexMatrix> {
    if let Some(&j) = a.iter().find(|&&j| j >= d_b) {
        return Err(Error::invalid(format!(
            "Kraus index {j} out of range for d_b = {d_b}"
        )));
    }
    guarded_pow(d_a * d_b, a.len())?;
    let mut k = ComplexMatrix::identity(1);
    for &j in a {
        k = k.kron(&ptrace_kraus(d_a, d_b, j));
    }
    Ok(k)
}

/// Largest `d_b^t` accepted by [`kraus_multi_indices`].
pub const MAX_MULTI_INDICES: usize = 729;

/// Every multi-index in `{0..d_b}^t`, row-major.
pub fn kraus_multi_indices(d_b: usize, t: usize) -> Result<Vec<Vec<usize>>> {
    let count = (d_b as u128).checked_pow(t as u32).unwrap_or(u128::MAX);
    if count > MAX_MULTI_INDICES as u128 {
        return Err(Error::SizeGuard {
            dim: count,
            limit: MAX_MULTI_INDICES,
        });
    }
    Ok((0..count as usize)
        .map(|idx| digits_of(idx, d_b, t))
        .collect())
}

/// Spectrum audit of `P = K_a Π_{AB,t} K_a†`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KrausProjectorSpectrum {
    pub multi_index: Vec<usize>,
    /// `(1/t!) Σ_σ d_a^{cycl σ} [σ fixes a]`
    pub trace_formula: f64,
    pub matrix_trace: f64,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `binom(d_a + t - 1, t)`
    pub sym_dim_a: u64,
    pub trace_consistent: bool,
    /// Every eigenvalue within `1e-10` of 0 or 1.
    pub idempotent: bool,
}

pub fn kraus_projector_spectrum(
    a: &[usize],
    d_a: usize,
    d_b: usize,
    t: usize,
) -> Result<KrausProjectorSpectrum> {
    if a.len() != t {
        return Err(Error::invalid(format!(
            "multi-index of length {} for t = {t}",
            a.len()
        )));
    }
    let ka = multi_copy_kraus(a, d_a, d_b)?;
    let pi = symmetric_projector(d_a * d_b, t)?;
    let p = &(&ka * &pi) * &ka.adjoint();

    let perms = Permutation::all(t);
    let trace_formula = perms
        .iter()
        .filter(|s| s.fixes(a))
        .map(|s| (d_a as f64).powi(s.cycle_count() as i32))
        .sum::<f64>()
        / perms.len() as f64;

    let mut eigenvalues: Vec<f64> = p
        .to_nalgebra()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    eigenvalues.sort_by(|x, y| y.total_cmp(x));
    let matrix_trace = p.trace().re;
    Ok(KrausProjectorSpectrum {
        multi_index: a.to_vec(),
        trace_formula,
        matrix_trace,
        idempotent: eigenvalues
            .iter()
            .all(|&l| l.abs() <= 1e-10 || (l - 1.0).abs() <= 1e-10),
        eigenvalues,
        sym_dim_a: sym_dim(d_a, t)?,
        trace_consistent: (trace_formula - matrix_trace).abs() <= 1e-10,
    })
}
