//! Combinatorial dimensions, Lipschitz constants of the pushforward maps and
//! certification of measured pushforward distances against every bound.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ensemble::{Ensemble, EnsembleKind};
use crate::linalg::{schatten_norm, SchattenIndex};
use crate::moments::{delta, empirical_moment, haar_simplex_moment, welch_gap, MomentOperator};
use crate::pushforward::{dephase, pushforward_moment, MapKind, PushforwardMap};
use crate::{Error, Result};

/// Additive slack when comparing a measured distance with a bound.
pub const BOUND_TOL: f64 = 1e-10;

/// `binom(d + t - 1, t)`, the dimension of `Sym_t(C^d)`.
pub fn sym_dim(d: usize, t: usize) -> Result<u64> {
    if d == 0 || t == 0 {
        return Err(Error::invalid("sym_dim needs d, t >= 1"));
    }
    binomial(d as u64 + t as u64 - 1, t as u64)
}

fn binomial(n: u64, k: u64) -> Result<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact: acc · (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return Err(Error::invalid(format!("binom({n}, {k}) overflows u64")));
        }
    }
    Ok(acc as u64)
}

/// `(p-1)/p`, with the limit `1` at `p = ∞`.
fn lipschitz_exponent(p: SchattenIndex) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        (p.value() - 1.0) / p.value()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipschitzKind {
    /// Decoherence of `C^d`: `d^{t(p-1)/p}`.
    Simplex,
    /// Partial trace over `B`, generic operators: `d_B^{t(p-1)/p}`.
    PtraceNaive,
    /// Partial trace over `B` on symmetric-subspace operators:
    /// `binom(d_B + t - 1, t)^{(p-1)/p}`.
    PtraceSym,
    /// `B`-trace of channel moments: `binom(d_B² + t - 1, t)^{(p-1)/p}`.
    Channel,
}

/// Lipschitz constant of the map in Schatten-`p` distance.
///
/// `dim` is the decohered dimension for [`LipschitzKind::Simplex`] and
/// `d_B` for the others.
pub fn lipschitz_constant(
    kind: LipschitzKind,
    dim: usize,
    t: usize,
    p: SchattenIndex,
) -> Result<f64> {
    if dim == 0 || t == 0 {
        return Err(Error::invalid(
            "Lipschitz constant needs a positive dimension and t >= 1",
        ));
    }
    let base = match kind {
        LipschitzKind::Simplex | LipschitzKind::PtraceNaive => (dim as f64).powi(t as i32),
        LipschitzKind::PtraceSym => sym_dim(dim, t)? as f64,
        LipschitzKind::Channel => sym_dim(dim * dim, t)? as f64,
    };
    let e = lipschitz_exponent(p);
    Ok(if e == 0.0 { 1.0 } else { base.powf(e) })
}

/// The three bounds on `δ'_p` that mix `δ_p` and `δ_∞` of the source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedStateBounds {
    /// `min(δ_p d_B^t, δ_∞ d_B^t d_A^{t/p})`
    pub asym_basic: f64,
    /// `min(δ_p d_B^t, δ_∞ d_B^t D_{A,t}^{1/p})`
    pub asym_improved: f64,
    /// `min(δ_p d_B^{t/2} D_{B,t}^{1/2}, δ_∞ D_{A,t}^{1/p} d_B^{t/2} D_{B,t}^{1/2})`
    pub thm5_final: f64,
}

pub fn mixed_state_bound_report(
    dp: f64,
    dinf: f64,
    d_a: usize,
    d_b: usize,
    t: usize,
    p: SchattenIndex,
) -> Result<MixedStateBounds> {
    if !(dp >= 0.0 && dinf >= 0.0) {
        return Err(Error::invalid(format!(
            "distances must be nonnegative: {dp}, {dinf}"
        )));
    }
    let inv_p = p.reciprocal();
    let (da, db, tf) = (d_a as f64, d_b as f64, t as i32);
    let sym_a = sym_dim(d_a, t)? as f64;
    let sym_b = sym_dim(d_b, t)? as f64;
    let db_t = db.powi(tf);
    let sqrt_part = db_t.sqrt() * sym_b.sqrt();
    Ok(MixedStateBounds {
        asym_basic: (dp * db_t).min(dinf * db_t * da.powf(t as f64 * inv_p)),
        asym_improved: (dp * db_t).min(dinf * db_t * sym_a.powf(inv_p)),
        thm5_final: (dp * sqrt_part).min(dinf * sym_a.powf(inv_p) * sqrt_part),
    })
}

/// Keys of [`BoundReport::bounds`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BoundName {
    #[serde(rename = "thm1_simplex")]
    SimplexLipschitz,
    #[serde(rename = "obs1_naive")]
    NaivePartialTrace,
    #[serde(rename = "thm4_sym")]
    SymmetricPartialTrace,
    #[serde(rename = "asym_basic")]
    MixedNormBasic,
    #[serde(rename = "asym_improved")]
    MixedNormImproved,
    #[serde(rename = "thm5_final")]
    MixedNormFinal,
    #[serde(rename = "chan_lip_1")]
    ChannelLipschitz,
}

impl BoundName {
    pub const ALL: [BoundName; 7] = [
        BoundName::SimplexLipschitz,
        BoundName::NaivePartialTrace,
        BoundName::SymmetricPartialTrace,
        BoundName::MixedNormBasic,
        BoundName::MixedNormImproved,
        BoundName::MixedNormFinal,
        BoundName::ChannelLipschitz,
    ];

    /// Serialized key.
    pub fn key(self) -> &'static str {
        match self {
            BoundName::SimplexLipschitz => "thm1_simplex",
            BoundName::NaivePartialTrace => "obs1_naive",
            BoundName::SymmetricPartialTrace => "thm4_sym",
            BoundName::MixedNormBasic => "asym_basic",
            BoundName::MixedNormImproved => "asym_improved",
            BoundName::MixedNormFinal => "thm5_final",
            BoundName::ChannelLipschitz => "chan_lip_1",
        }
    }
}

/// Measured pushforward distance against every bound applicable to the map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub map: PushforwardMap,
    pub p: SchattenIndex,
    pub delta_source_p: f64,
    pub delta_source_inf: f64,
    pub delta_pushed: f64,
    pub bounds: BTreeMap<BoundName, f64>,
    pub satisfied: BTreeMap<BoundName, bool>,
}

impl BoundReport {
    pub fn all_satisfied(&self) -> bool {
        self.satisfied.values().all(|&ok| ok)
    }

    pub fn violations(&self) -> Vec<BoundName> {
        self.satisfied
            .iter()
            .filter(|(_, &ok)| !ok)
            .map(|(&b, _)| b)
            .collect()
    }
}

/// Compares `δ'_p = ‖F_*(T_μ) - F_*(T_ν)‖_p` with every bound for `map`.
pub fn certify(
    source_mu: &MomentOperator,
    source_nu: &MomentOperator,
    map: &PushforwardMap,
    p: SchattenIndex,
) -> Result<BoundReport> {
    let delta_source_p = delta(source_mu, source_nu, p)?;
    let delta_source_inf = delta(source_mu, source_nu, SchattenIndex::INFINITY)?;
    let pushed_mu = pushforward_moment(source_mu, map)?;
    let pushed_nu = pushforward_moment(source_nu, map)?;
    let delta_pushed = delta(&pushed_mu, &pushed_nu, p)?;

    let t = map.t();
    let mut bounds = BTreeMap::new();
    match map.kind() {
        MapKind::Decohere => {
            let l = lipschitz_constant(LipschitzKind::Simplex, map.d_a(), t, p)?;
            bounds.insert(BoundName::SimplexLipschitz, l * delta_source_p);
        }
        MapKind::PartialTraceB => {
            let naive = lipschitz_constant(LipschitzKind::PtraceNaive, map.d_b(), t, p)?;
            let sym = lipschitz_constant(LipschitzKind::PtraceSym, map.d_b(), t, p)?;
            bounds.insert(BoundName::NaivePartialTrace, naive * delta_source_p);
            bounds.insert(BoundName::SymmetricPartialTrace, sym * delta_source_p);
            let mixed = mixed_state_bound_report(
                delta_source_p,
                delta_source_inf,
                map.d_a(),
                map.d_b(),
                t,
                p,
            )?;
            bounds.insert(BoundName::MixedNormBasic, mixed.asym_basic);
            bounds.insert(BoundName::MixedNormImproved, mixed.asym_improved);
            bounds.insert(BoundName::MixedNormFinal, mixed.thm5_final);
        }
        MapKind::ChannelTraceB => {
            let l = lipschitz_constant(LipschitzKind::Channel, map.d_b(), t, p)?;
            bounds.insert(BoundName::ChannelLipschitz, l * delta_source_p);
        }
    }
    let satisfied = bounds
        .iter()
        .map(|(&name, &bound)| (name, delta_pushed <= bound + BOUND_TOL))
        .collect();
    Ok(BoundReport {
        map: *map,
        p,
        delta_source_p,
        delta_source_inf,
        delta_pushed,
        bounds,
        satisfied,
    })
}

/// `δ'_∞` of the decohered ensemble against `d^t` times its Welch gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WelchDeltaRelation {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn welch_delta_relation(e: &Ensemble, t: usize) -> Result<WelchDeltaRelation> {
    e.require_kind(EnsembleKind::PureState)?;
    let d = e.dim();
    let dephased = dephase(empirical_moment(e, t)?.matrix());
    let flat = haar_simplex_moment(d, t)?;
    let lhs = schatten_norm(&(&dephased - flat.matrix()), SchattenIndex::INFINITY)?;
    let rhs = (d as f64).powi(t as i32) * welch_gap(e, t)?;
    Ok(WelchDeltaRelation {
        lhs,
        rhs,
        holds: lhs <= rhs + BOUND_TOL,
    })
}
