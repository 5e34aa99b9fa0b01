//! One-shot reports: design quality of an ensemble, the table of Lipschitz
//! constants, and exact Haar references.

use serde::{Deserialize, Serialize};

use crate::bounds::{certify, lipschitz_constant, sym_dim, BoundReport, LipschitzKind};
use crate::ensemble::{Ensemble, EnsembleKind};
use crate::linalg::SchattenIndex;
use crate::moments::{
    delta, empirical_moment, frame_potential, haar_mixed_moment, haar_projective_moment,
    haar_simplex_moment, haar_unitary_channel_moment, welch_gap, MomentOperator, Space,
};
use crate::pushforward::PushforwardMap;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEntry {
    pub p: SchattenIndex,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub kind: EnsembleKind,
    pub dim: usize,
    pub size: usize,
    pub t: usize,
    pub reference: Space,
    pub deltas: Vec<DeltaEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_potential: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub welch_gap: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub bound_reports: Vec<BoundReport>,
}

/// Distances of the ensemble's moment from the matching Haar reference.
///
/// `bipartite = Some((d_a, d_b))` splits the space: pure-state ensembles on
/// `C^{d_a d_b}` then get a [`BoundReport`] per `p` for the partial trace over
/// `B`, and density-matrix ensembles on `C^{d_a}` are compared with the
/// measure induced from `C^{d_a d_b}`. Density matrices need the split.
pub fn design_report(
    e: &Ensemble,
    t: usize,
    p_list: &[SchattenIndex],
    bipartite: Option<(usize, usize)>,
) -> Result<DesignReport> {
    let d = e.dim();
    let emp = empirical_moment(e, t)?;
    let reference = match e.kind() {
        EnsembleKind::PureState => haar_projective_moment(d, t)?,
        EnsembleKind::ProbabilityVector => haar_simplex_moment(d, t)?,
        EnsembleKind::Unitary => haar_unitary_channel_moment(d, t)?,
        EnsembleKind::DensityMatrix => {
            let (d_a, d_b) = bipartite.ok_or_else(|| {
                Error::invalid("density-matrix ensembles need --dA/--dB for the induced reference")
            })?;
            if d_a != d {
                return Err(Error::dims(format!(
                    "density matrices are {d}x{d} but d_a = {d_a}"
                )));
            }
            haar_mixed_moment(d_a, d_b, t)?
        }
    };
    let deltas = p_list
        .iter()
        .map(|&p| {
            Ok(DeltaEntry {
                p,
                delta: delta(&emp, &reference, p)?,
            })
        })
        .collect::<Result<_>>()?;

    let pure = e.kind() == EnsembleKind::PureState;
    let mut bound_reports = Vec::new();
    if let (true, Some((d_a, d_b))) = (pure, bipartite) {
        if d_a * d_b != d {
            return Err(Error::dims(format!(
                "states have dimension {d}, not {d_a} * {d_b}"
            )));
        }
        let map = PushforwardMap::partial_trace_b(d_a, d_b, t)?;
        for &p in p_list {
            bound_reports.push(certify(&emp, &reference, &map, p)?);
        }
    }
    Ok(DesignReport {
        kind: e.kind(),
        dim: d,
        size: e.len(),
        t,
        reference: reference.space(),
        deltas,
        frame_potential: if pure {
            Some(frame_potential(e, t)?)
        } else {
            None
        },
        welch_gap: if pure { Some(welch_gap(e, t)?) } else { None },
        bound_reports,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsTable {
    pub d_a: usize,
    pub d_b: usize,
    pub t: usize,
    pub p: SchattenIndex,
    pub sym_dim_a: u64,
    pub sym_dim_b: u64,
    pub sym_dim_ab: u64,
    /// Decoherence of the full `C^{d_a d_b}`.
    pub thm1_simplex: f64,
    pub obs1_naive: f64,
    pub thm4_sym: f64,
    pub chan_lip_1: f64,
}

/// Every Lipschitz constant for the given dimensions.
pub fn bounds_table(d_a: usize, d_b: usize, t: usize, p: SchattenIndex) -> Result<BoundsTable> {
    if d_a == 0 || d_b == 0 || t == 0 {
        return Err(Error::invalid("dimensions and t must be >= 1"));
    }
    let table = BoundsTable {
        d_a,
        d_b,
        t,
        p,
        sym_dim_a: sym_dim(d_a, t)?,
        sym_dim_b: sym_dim(d_b, t)?,
        sym_dim_ab: sym_dim(d_a * d_b, t)?,
        thm1_simplex: lipschitz_constant(LipschitzKind::Simplex, d_a * d_b, t, p)?,
        obs1_naive: lipschitz_constant(LipschitzKind::PtraceNaive, d_b, t, p)?,
        thm4_sym: lipschitz_constant(LipschitzKind::PtraceSym, d_b, t, p)?,
        chan_lip_1: lipschitz_constant(LipschitzKind::Channel, d_b, t, p)?,
    };
    if table.thm4_sym > table.obs1_naive * (1.0 + 1e-12) {
        return Err(Error::Computation(format!(
            "symmetric constant {} exceeds naive constant {}",
            table.thm4_sym, table.obs1_naive
        )));
    }
    Ok(table)
}

/// Exact Haar moment for `space`. `dims` is `[d]`, except `[d_a, d_b]` for
/// the mixed space.
pub fn haar_reference(space: Space, dims: &[usize], t: usize) -> Result<MomentOperator> {
    match (space, dims) {
        (Space::Projective, &[d]) => haar_projective_moment(d, t),
        (Space::Simplex, &[d]) => haar_simplex_moment(d, t),
        (Space::Channel, &[d]) => haar_unitary_channel_moment(d, t),
        (Space::Mixed, &[d_a, d_b]) => haar_mixed_moment(d_a, d_b, t),
        (Space::Mixed, _) => Err(Error::invalid("mixed space needs dims [d_a, d_b]")),
        _ => Err(Error::invalid(format!(
            "{space:?} space needs a single dimension, got {dims:?}"
        ))),
    }
}
