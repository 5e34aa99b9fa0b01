//! Monte Carlo convergence of empirical moments of Haar-random bipartite
//! states, measured on both sides of the partial trace against exact
//! references and compared with the two Lipschitz bounds.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{lipschitz_constant, LipschitzKind, BOUND_TOL};
use crate::catalog::{sample_haar_state, RngStream, GENERATOR_VERSION};
use crate::linalg::{
    digits_of, kron_vector_power, partial_trace, schatten_from_singular_values, singular_values,
    ComplexMatrix, FactorShape, SchattenIndex,
};
use crate::moments::{b_positions, haar_mixed_moment, haar_projective_moment};
use crate::{guarded_pow, Complex64, Error, Result};

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_RUNS: usize = 100;
pub const DEFAULT_SEED: u64 = 1;
pub const CHECKPOINTS_PER_DECADE: usize = 20;

pub const CSV_HEADER: &str = "run_id,M,p,delta_source,delta_pushed,bound_obs1,bound_thm4";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub d_a: usize,
    pub d_b: usize,
    pub t: usize,
    pub n_samples: usize,
    pub n_runs: usize,
    pub p_list: Vec<SchattenIndex>,
    pub master_seed: u64,
    pub checkpoints: Vec<usize>,
}

impl ExperimentConfig {
    /// Defaults for everything but the dimensions and order.
    pub fn new(d_a: usize, d_b: usize, t: usize) -> Self {
        ExperimentConfig {
            d_a,
            d_b,
            t,
            n_samples: DEFAULT_SAMPLES,
            n_runs: DEFAULT_RUNS,
            p_list: SchattenIndex::standard(),
            master_seed: DEFAULT_SEED,
            checkpoints: default_checkpoints(DEFAULT_SAMPLES),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_a == 0 || self.d_b == 0 || self.t == 0 {
            return Err(Error::invalid("dimensions and t must be >= 1"));
        }
        if self.n_samples == 0 || self.n_runs == 0 {
            return Err(Error::invalid("need at least one sample and one run"));
        }
        if self.p_list.is_empty() {
            return Err(Error::invalid("p list is empty"));
        }
        if self.checkpoints.is_empty() || self.checkpoints[0] == 0 {
            return Err(Error::invalid("checkpoints must be positive and non-empty"));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("checkpoints must be strictly increasing"));
        }
        let last = *self.checkpoints.last().expect("non-empty");
        if last > self.n_samples {
            return Err(Error::invalid(format!(
                "last checkpoint {last} exceeds the sample count {}",
                self.n_samples
            )));
        }
        guarded_pow(self.d_a * self.d_b, self.t)?;
        Ok(())
    }
}

/// `round(10^{k/20})` for every `k` with value at most `n`, deduplicated,
/// ending at `n`.
pub fn default_checkpoints(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for k in 0.. {
        let m = 10f64.powf(k as f64 / CHECKPOINTS_PER_DECADE as f64).round() as usize;
        if m > n {
            break;
        }
        if out.last() != Some(&m) {
            out.push(m);
        }
    }
    if out.last() != Some(&n) {
        out.push(n);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub run_id: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub p: SchattenIndex,
    pub delta_source: f64,
    pub delta_pushed: f64,
    pub bound_obs1: f64,
    pub bound_thm4: f64,
}

impl TrajectoryRecord {
    pub fn violates_obs1(&self) -> bool {
        self.delta_pushed > self.bound_obs1 + BOUND_TOL
    }

    pub fn violates_thm4(&self) -> bool {
        self.delta_pushed > self.bound_thm4 + BOUND_TOL
    }
}

pub fn write_trajectories_csv<W: Write>(records: &[TrajectoryRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.run_id, r.m, r.p, r.delta_source, r.delta_pushed, r.bound_obs1, r.bound_thm4
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PSummary {
    pub p: SchattenIndex,
    pub violations_obs1: usize,
    pub violations_thm4: usize,
    /// Records with `bound_thm4 > bound_obs1 + tol`.
    pub thm4_above_obs1: usize,
    pub mean_final_delta_source: f64,
    pub mean_final_delta_pushed: f64,
    /// Least-squares slope of `ln(mean δ)` against `ln M` over `M >= 100`.
    pub slope_source: Option<f64>,
    pub slope_pushed: Option<f64>,
    /// Max over runs of `delta_pushed / bound_thm4` at the final checkpoint.
    pub max_final_tightness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub generator_version: String,
    pub n_records: usize,
    pub total_violations: usize,
    pub per_p: Vec<PSummary>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub records: Vec<TrajectoryRecord>,
    pub summary: ExperimentSummary,
}

pub const SLOPE_MIN_M: usize = 100;

/// Orthonormal basis of `Sym_t(C^D)`: one vector per multiset of indices,
/// `|S_a⟩ = |O_a|^{-1/2} Σ_{i ∈ O_a} |i⟩` over the orbit `O_a`.
struct SymmetricBasis {
    /// Orbit of every composite index.
    class: Vec<usize>,
    /// A representative composite index per orbit.
    representative: Vec<usize>,
    orbit_size: Vec<f64>,
}

impl SymmetricBasis {
    fn new(d: usize, t: usize) -> Result<Self> {
        let n = guarded_pow(d, t)?;
        let mut ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut class = Vec::with_capacity(n);
        let mut representative = Vec::new();
        let mut orbit_size = Vec::new();
        for i in 0..n {
            let mut key = digits_of(i, d, t);
            key.sort_unstable();
            let next = ids.len();
            let a = *ids.entry(key).or_insert(next);
            if a == representative.len() {
                representative.push(i);
                orbit_size.push(0.0);
            }
            orbit_size[a] += 1.0;
            class.push(a);
        }
        Ok(SymmetricBasis {
            class,
            representative,
            orbit_size,
        })
    }

    fn dim(&self) -> usize {
        self.representative.len()
    }

    /// Coordinates of a symmetric vector `v`: `⟨S_a|v⟩ = |O_a|^{1/2} v_rep(a)`.
    fn coordinates(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.representative
            .iter()
            .zip(&self.orbit_size)
            .map(|(&i, &size)| v[i] * size.sqrt())
            .collect()
    }

    /// `V S V†` for a Hermitian `S` in symmetric coordinates.
    fn embed(&self, s: &ComplexMatrix) -> ComplexMatrix {
        let n = self.class.len();
        let k = self.dim();
        let scale: Vec<f64> = self.orbit_size.iter().map(|x| 1.0 / x.sqrt()).collect();
        let src = s.as_slice();
        ComplexMatrix::from_fn(n, n, |i, j| {
            let (a, b) = (self.class[i], self.class[j]);
            src[a * k + b] * (scale[a] * scale[b])
        })
    }

    /// `V† X V` for `X` supported on the symmetric subspace.
    fn restrict(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let k = self.dim();
        let mut out = ComplexMatrix::zeros(k, k);
        let n = self.class.len();
        let src = x.as_slice();
        let dst = out.as_mut_slice();
        for i in 0..n {
            for j in 0..n {
                dst[self.class[i] * k + self.class[j]] += src[i * n + j];
            }
        }
        let scale: Vec<f64> = self.orbit_size.iter().map(|x| 1.0 / x.sqrt()).collect();
        for a in 0..k {
            for b in 0..k {
                dst[a * k + b] *= scale[a] * scale[b];
            }
        }
        out
    }
}

struct References {
    basis: SymmetricBasis,
    /// Projective Haar moment in symmetric coordinates.
    projective: ComplexMatrix,
    mixed: ComplexMatrix,
    shape: FactorShape,
    naive: Vec<f64>,
    sym: Vec<f64>,
}

impl References {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let d = cfg.d_a * cfg.d_b;
        let basis = SymmetricBasis::new(d, cfg.t)?;
        let projective = basis.restrict(haar_projective_moment(d, cfg.t)?.matrix());
        let mixed = haar_mixed_moment(cfg.d_a, cfg.d_b, cfg.t)?.into_matrix();
        let naive = cfg
            .p_list
            .iter()
            .map(|&p| lipschitz_constant(LipschitzKind::PtraceNaive, cfg.d_b, cfg.t, p))
            .collect::<Result<_>>()?;
        let sym = cfg
            .p_list
            .iter()
            .map(|&p| lipschitz_constant(LipschitzKind::PtraceSym, cfg.d_b, cfg.t, p))
            .collect::<Result<_>>()?;
        Ok(References {
            basis,
            projective,
            mixed,
            shape: FactorShape::repeated(&[cfg.d_a, cfg.d_b], cfg.t)?,
            naive,
            sym,
        })
    }
}

fn run_single(
    cfg: &ExperimentConfig,
    refs: &References,
    run_id: usize,
) -> Result<Vec<TrajectoryRecord>> {
    let d = cfg.d_a * cfg.d_b;
    let k = refs.basis.dim();
    let mut rng = RngStream::new(cfg.master_seed, run_id as u64);
    // upper triangle of Σ |v⟩⟨v| in symmetric coordinates
    let mut sum = vec![Complex64::new(0.0, 0.0); k * k];
    let mut records = Vec::with_capacity(cfg.checkpoints.len() * cfg.p_list.len());
    let mut next = cfg.checkpoints.iter().peekable();
    let last = *cfg.checkpoints.last().expect("validated");

    for m in 1..=last {
        let psi = sample_haar_state(d, &mut rng);
        let v = refs.basis.coordinates(&kron_vector_power(&psi, cfg.t));
        for i in 0..k {
            let vi = v[i];
            for j in i..k {
                sum[i * k + j] += vi * v[j].conj();
            }
        }
        if next.peek() != Some(&&m) {
            continue;
        }
        next.next();

        let inv = 1.0 / m as f64;
        let avg = ComplexMatrix::from_fn(k, k, |i, j| {
            if i <= j {
                sum[i * k + j] * inv
            } else {
                sum[j * k + i].conj() * inv
            }
        });
        let s_source = singular_values(&(&avg - &refs.projective))?;
        let reduced = partial_trace(&refs.basis.embed(&avg), &refs.shape, &b_positions(cfg.t))?;
        let s_pushed = singular_values(&(&reduced - &refs.mixed))?;
        for (idx, &p) in cfg.p_list.iter().enumerate() {
            let delta_source = schatten_from_singular_values(&s_source, p);
            records.push(TrajectoryRecord {
                run_id,
                m,
                p,
                delta_source,
                delta_pushed: schatten_from_singular_values(&s_pushed, p),
                bound_obs1: refs.naive[idx] * delta_source,
                bound_thm4: refs.sym[idx] * delta_source,
            });
        }
    }
    Ok(records)
}

/// Runs every run in parallel on the current rayon pool. Output is ordered by
/// run, then checkpoint, then `p`, and does not depend on scheduling.
pub fn run_mc_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let refs = References::new(cfg)?;
    let per_run: Vec<Vec<TrajectoryRecord>> = (0..cfg.n_runs)
        .into_par_iter()
        .map(|r| run_single(cfg, &refs, r))
        .collect::<Result<_>>()?;
    let records: Vec<TrajectoryRecord> = per_run.into_iter().flatten().collect();
    let summary = summarize(cfg, &records);
    Ok(ExperimentOutput { records, summary })
}

fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Log-log slope of the run-averaged trajectories over `M >= 100`.
fn log_log_slope(
    records: &[&TrajectoryRecord],
    pick: impl Fn(&TrajectoryRecord) -> f64,
) -> Option<f64> {
    let mut by_m: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.m >= SLOPE_MIN_M) {
        let e = by_m.entry(r.m).or_insert((0.0, 0));
        e.0 += pick(r);
        e.1 += 1;
    }
    let points: Vec<(f64, f64)> = by_m
        .into_iter()
        .filter(|(_, (s, _))| *s > 0.0)
        .map(|(m, (s, c))| ((m as f64).ln(), (s / c as f64).ln()))
        .collect();
    fit_slope(&points)
}

fn summarize(cfg: &ExperimentConfig, records: &[TrajectoryRecord]) -> ExperimentSummary {
    let final_m = *cfg.checkpoints.last().expect("validated");
    let per_p: Vec<PSummary> = cfg
        .p_list
        .iter()
        .map(|&p| {
            let rs: Vec<&TrajectoryRecord> = records.iter().filter(|r| r.p == p).collect();
            let finals: Vec<&&TrajectoryRecord> = rs.iter().filter(|r| r.m == final_m).collect();
            let nf = finals.len().max(1) as f64;
            PSummary {
                p,
                violations_obs1: rs.iter().filter(|r| r.violates_obs1()).count(),
                violations_thm4: rs.iter().filter(|r| r.violates_thm4()).count(),
                thm4_above_obs1: rs
                    .iter()
                    .filter(|r| r.bound_thm4 > r.bound_obs1 + BOUND_TOL)
                    .count(),
                mean_final_delta_source: finals.iter().map(|r| r.delta_source).sum::<f64>() / nf,
                mean_final_delta_pushed: finals.iter().map(|r| r.delta_pushed).sum::<f64>() / nf,
                slope_source: log_log_slope(&rs, |r| r.delta_source),
                slope_pushed: log_log_slope(&rs, |r| r.delta_pushed),
                max_final_tightness: finals
                    .iter()
                    .filter(|r| r.bound_thm4 > 0.0)
                    .map(|r| r.delta_pushed / r.bound_thm4)
                    .fold(0.0, f64::max),
            }
        })
        .collect();
    ExperimentSummary {
        config: cfg.clone(),
        generator_version: GENERATOR_VERSION.to_owned(),
        n_records: records.len(),
        total_violations: per_p
            .iter()
            .map(|s| s.violations_obs1 + s.violations_thm4)
            .sum(),
        per_p,
    }
}
