//! Randomized and grid-based search drivers: the Schmidt-aligned benchmark
//! construction and magnitude scan, the coarse-grained multi-start witness
//! search, and the finite-time accessibility sweep.
//!
//! All drivers are deterministic functions of their configuration. Trials are
//! embarrassingly parallel: each trial's generator comes from
//! [`crate::rng::trial_rng`]`(seed, trial)`, and results are reduced by
//! maximum `|S|` with ties broken lexicographically on `(seed, trial, x0)`,
//! so parallel and serial runs produce bit-identical output.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{
    check_admissible, check_no_signaling, joint_table, sign_binning, threshold_binning,
    BellReport, CoinObservable, JointTable, WalkerObservable,
};
use crate::error::{Error, Result};
use crate::prep::{coin_state_from_direction, signed_decomposition, BlochVector, EvolvedEnsemble};
use crate::rng::trial_rng;
use crate::schmidt::{
    optimal_chsh_settings, schmidt_decompose, ChshSettings, EmbeddedWalkerObservable, SchmidtData,
};
use crate::walk::LatticeState;

/// Uniform direction on the unit sphere: three Box–Muller standard normals,
/// normalized; vectors shorter than 1e-6 are rejected and redrawn.
///
/// Consumes four uniform doubles per attempt.
pub fn sample_unit_sphere<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let (z0, z1) = normal_pair(rng);
        let (z2, _) = normal_pair(rng);
        let norm = (z0 * z0 + z1 * z1 + z2 * z2).sqrt();
        if norm >= 1e-6 {
            return [z0 / norm, z1 / norm, z2 / norm];
        }
    }
}

fn normal_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    use rand::RngExt;
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    let radius = (-2.0 * u1.ln()).sqrt();
    let (sin, cos) = (std::f64::consts::TAU * u2).sin_cos();
    (radius * cos, radius * sin)
}

/// Parameters of the randomized searches.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Walk steps (also the lattice half-width).
    pub t_steps: usize,
    /// Preparation magnitude `‖r‖`.
    pub r_norm: f64,
    /// Directions per magnitude in the fixed-settings scan.
    pub n_direction_samples: u64,
    /// Trials per (seed, threshold) in the coarse search.
    pub n_trials: u64,
    /// Threshold grid: integer values are sites, fractional values are
    /// ratios of `t_steps` rounded to the nearest site (ties toward zero).
    pub x0_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    pub tol: f64,
    /// Label assigned to `x = 0` by the sign binning.
    pub sign_of_zero: i8,
}

impl SearchConfig {
    /// Resolves the threshold grid to integer sites for a given walk time.
    pub fn resolve_x0(&self, t_steps: usize) -> Result<Vec<usize>> {
        if self.x0_grid.is_empty() {
            return Err(Error::Domain("x0 grid must be nonempty".into()));
        }
        self.x0_grid
            .iter()
            .map(|&v| {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Domain(format!("invalid threshold {v}")));
                }
                let site = if v.fract() == 0.0 {
                    v
                } else {
                    round_ties_toward_zero(v * t_steps as f64)
                };
                let site = site as usize;
                if site > t_steps + 1 {
                    return Err(Error::Domain(format!(
                        "threshold {v} resolves to site {site} > {}",
                        t_steps + 1
                    )));
                }
                Ok(site)
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.n_trials < 1 {
            return Err(Error::Domain("n_trials must be >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Domain("seed list must be nonempty".into()));
        }
        if !(self.r_norm.is_finite() && self.r_norm >= 0.0) {
            return Err(Error::Domain(format!("invalid r_norm {}", self.r_norm)));
        }
        if self.sign_of_zero != 1 && self.sign_of_zero != -1 {
            return Err(Error::Domain("sign_of_zero must be ±1".into()));
        }
        Ok(())
    }
}

fn round_ties_toward_zero(y: f64) -> f64 {
    let floor = y.floor();
    if y - floor > 0.5 {
        floor + 1.0
    } else {
        floor
    }
}

/// Serializable description of a walker observable, sufficient to rebuild it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum WalkerObsDescriptor {
    Sign { sign_of_zero: i8 },
    Threshold { x0: usize },
    SchmidtEmbedded { observable: EmbeddedWalkerObservable },
}

impl WalkerObsDescriptor {
    pub fn materialize(&self, t_max: usize) -> Result<WalkerObservable> {
        match self {
            WalkerObsDescriptor::Sign { sign_of_zero } => Ok(sign_binning(t_max, *sign_of_zero)),
            WalkerObsDescriptor::Threshold { x0 } => threshold_binning(t_max, *x0),
            WalkerObsDescriptor::SchmidtEmbedded { observable } => {
                if observable.t_max() != t_max {
                    return Err(Error::ShapeMismatch(format!(
                        "embedded observable window {} does not match {t_max}",
                        observable.t_max()
                    )));
                }
                Ok(WalkerObservable::Embedded(observable.clone()))
            }
        }
    }
}

impl From<&WalkerObservable> for WalkerObsDescriptor {
    fn from(obs: &WalkerObservable) -> Self {
        match obs {
            WalkerObservable::Embedded(e) => WalkerObsDescriptor::SchmidtEmbedded {
                observable: e.clone(),
            },
            WalkerObservable::Diagonal(_) => unreachable!("binnings are described explicitly"),
        }
    }
}

/// One fully specified admissible Bell witness with its provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub prep_dir: [f64; 3],
    pub r_norm: f64,
    pub coin_dirs: [[f64; 3]; 2],
    pub walker_obs: [WalkerObsDescriptor; 2],
    pub t_steps: usize,
    pub tol: f64,
    pub report: BellReport,
    pub seed: u64,
    pub trial: u64,
}

impl WitnessRecord {
    /// Re-evaluates the witness from scratch at the given tolerance.
    pub fn reevaluate(&self, tol: f64) -> Result<(BellReport, JointTable)> {
        let prep = BlochVector::from_direction(self.prep_dir, self.r_norm)?;
        let a0 = CoinObservable::new(self.coin_dirs[0])?;
        let a1 = CoinObservable::new(self.coin_dirs[1])?;
        let b0 = self.walker_obs[0].materialize(self.t_steps)?;
        let b1 = self.walker_obs[1].materialize(self.t_steps)?;
        crate::bell::evaluate_witness(&prep, (&a0, &a1), (&b0, &b1), self.t_steps, tol)
    }

    /// The per-branch exact tables of this witness (plus branch first), used
    /// by the finite-shot emulation protocol.
    pub fn branch_tables(&self) -> Result<(JointTable, JointTable, (f64, f64))> {
        let prep = BlochVector::from_direction(self.prep_dir, self.r_norm)?;
        let ensemble = signed_decomposition(&prep).evolve(self.t_steps, self.t_steps)?;
        let a0 = CoinObservable::new(self.coin_dirs[0])?;
        let a1 = CoinObservable::new(self.coin_dirs[1])?;
        let b0 = self.walker_obs[0].materialize(self.t_steps)?;
        let b1 = self.walker_obs[1].materialize(self.t_steps)?;
        let branches = ensemble.branches();
        let mut tables = Vec::with_capacity(2);
        let mut weights = Vec::with_capacity(2);
        for (w, state) in branches {
            let single = EvolvedEnsemble::from_branches(vec![(1.0, state.clone())])?;
            tables.push(joint_table(&single, &a0, &a1, &b0, &b1, self.tol)?);
            weights.push(*w);
        }
        let minus = tables.pop().expect("two branches");
        let plus = tables.pop().expect("two branches");
        Ok((plus, minus, (weights[0], weights[1])))
    }
}

/// Outcome of the benchmark-direction discovery.
#[derive(Debug, Clone)]
pub struct DiscoveryReport {
    /// Whether some tested direction matched the target within tolerance.
    pub matched: bool,
    /// The matched direction, or the nearest candidate when none matched.
    pub direction: [f64; 3],
    pub schmidt: SchmidtData,
    /// Largest coefficient deviation from the target at `direction`.
    pub distance: f64,
    pub candidates_tested: usize,
}

/// Searches canonical axes and then a Fibonacci sphere grid for a
/// preparation direction whose `T`-step Schmidt coefficients match the
/// target pair within `tol`.
///
/// All six canonical axes are ranked by coefficient distance and the best
/// match is returned: nearby axes (e.g. ŷ and ẑ at moderate `T`) can both
/// land inside a loose tolerance, and the closest one is the right
/// benchmark. The grid fallback returns its first match; if nothing
/// matches, the report carries the nearest candidate seen.
pub fn discover_benchmark_direction(
    t_steps: usize,
    target: (f64, f64),
    tol: f64,
) -> Result<DiscoveryReport> {
    let (t0, t1) = target;
    if !(t0.is_finite() && t1.is_finite()) || t1 < 0.0 || t0 < t1 {
        return Err(Error::Domain(format!(
            "target coefficients must satisfy s0 >= s1 >= 0, got ({t0}, {t1})"
        )));
    }
    let norm = t0 * t0 + t1 * t1;
    if (norm - 1.0).abs() > 1e-2 {
        return Err(Error::Domain(format!(
            "target coefficients squared sum to {norm:.4}, expected 1"
        )));
    }
    let canonical: [[f64; 3]; 6] = [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let mut best: Option<(f64, [f64; 3], SchmidtData)> = None;
    let mut tested = 0usize;
    let mut consider = |dir: [f64; 3],
                        best: &mut Option<(f64, [f64; 3], SchmidtData)>|
     -> Result<f64> {
        tested += 1;
        let (a0, a1) = coin_state_from_direction(dir)?;
        let state = LatticeState::localized(t_steps, a0, a1)?.evolve(t_steps)?;
        let sd = schmidt_decompose(&state)?;
        let distance = (sd.s0() - t0).abs().max((sd.s1() - t1).abs());
        if best.as_ref().is_none_or(|(d, _, _)| distance < *d) {
            *best = Some((distance, dir, sd));
        }
        Ok(distance)
    };
    for dir in canonical {
        consider(dir, &mut best)?;
    }
    let canonical_best = best.clone().expect("canonical axes tested");
    if canonical_best.0 <= tol {
        let (distance, direction, schmidt) = canonical_best;
        return Ok(DiscoveryReport {
            matched: true,
            direction,
            schmidt,
            distance,
            candidates_tested: tested,
        });
    }
    for dir in fibonacci_sphere(1024) {
        let distance = consider(dir, &mut best)?;
        if distance <= tol {
            let (distance, direction, schmidt) = best.expect("candidate recorded");
            return Ok(DiscoveryReport {
                matched: true,
                direction,
                schmidt,
                distance,
                candidates_tested: tested,
            });
        }
    }
    let (distance, direction, schmidt) = best.expect("at least one candidate tested");
    Ok(DiscoveryReport {
        matched: false,
        direction,
        schmidt,
        distance,
        candidates_tested: tested,
    })
}

fn fibonacci_sphere(n: usize) -> impl Iterator<Item = [f64; 3]> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..n).map(move |k| {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
        let rho = (1.0 - z * z).sqrt();
        let phi = golden_angle * k as f64;
        [rho * phi.cos(), rho * phi.sin(), z]
    })
}

/// The discovered benchmark direction together with its Schmidt-aligned
/// optimal settings.
#[derive(Debug, Clone)]
pub struct SchmidtBenchmark {
    pub discovery: DiscoveryReport,
    pub settings: ChshSettings,
}

/// Runs the discovery and constructs the optimal settings at `‖r‖ = 1`.
pub fn build_benchmark(
    t_steps: usize,
    target: (f64, f64),
    direction_tol: f64,
) -> Result<SchmidtBenchmark> {
    let discovery = discover_benchmark_direction(t_steps, target, direction_tol)?;
    let settings = optimal_chsh_settings(&discovery.schmidt)?;
    Ok(SchmidtBenchmark {
        discovery,
        settings,
    })
}

/// Default admissibility-margin floor when picking a representative witness
/// from a scan: the unconstrained maximizer hugs the admissibility boundary,
/// so a robust witness is the best candidate whose minimum probability stays
/// above this floor.
pub const DEFAULT_WITNESS_MARGIN: f64 = 3e-3;

/// Best admissible candidate found at one scanned magnitude.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScanBest {
    pub s: f64,
    pub s_abs: f64,
    pub min_p: f64,
    pub direction: [f64; 3],
    pub dir_index: u64,
}

/// Scan record for one magnitude; `best` is absent when no sampled direction
/// was admissible there.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanPoint {
    pub r_norm: f64,
    pub n_admissible: u64,
    /// Best admissible candidate by `|S|`.
    pub best: Option<ScanBest>,
    /// Best admissible candidate holding at least the configured margin
    /// floor: the representative witness at this magnitude. The plain
    /// maximizer typically sits on the admissibility boundary with a
    /// vanishing margin; requiring a floor picks a robust interior witness.
    pub best_with_margin: Option<ScanBest>,
}

/// Fixed-measurement directional scan over preparation magnitudes.
///
/// For every direction sample the two physical branch tables are computed
/// once and reused across the whole magnitude grid (the reconstruction is
/// affine in `r`), then each magnitude keeps its best admissible,
/// no-signaling candidate by `|S|`, both unconstrained and subject to a
/// minimum admissibility margin of `margin_floor`.
pub fn benchmark_scan_r(
    t_steps: usize,
    settings: &ChshSettings,
    r_grid: &[f64],
    n_dirs: u64,
    seed: u64,
    tol: f64,
    margin_floor: f64,
) -> Result<Vec<ScanPoint>> {
    if r_grid.is_empty() {
        return Err(Error::Domain("magnitude grid must be nonempty".into()));
    }
    if n_dirs == 0 {
        return Err(Error::Domain("direction sample count must be >= 1".into()));
    }
    let b0 = WalkerObservable::Embedded(settings.bob[0].clone());
    let b1 = WalkerObservable::Embedded(settings.bob[1].clone());
    let a0 = settings.alice[0];
    let a1 = settings.alice[1];

    let per_dir = |dir_index: u64| -> Result<ScanAcc> {
        let mut rng = trial_rng(seed, dir_index);
        let dir = sample_unit_sphere(&mut rng);
        let (plus, minus) = branch_rows(dir, t_steps, &a0, &a1, &b0, &b1, tol)?;
        let mut per_r = Vec::with_capacity(r_grid.len());
        for &r in r_grid {
            let w_plus = (1.0 + r) / 2.0;
            let w_minus = 1.0 - w_plus;
            let mut rows = [[0.0; 4]; 4];
            for s in 0..4 {
                for o in 0..4 {
                    rows[s][o] = w_plus * plus[s][o] + w_minus * minus[s][o];
                }
            }
            let table = JointTable::from_rows(rows, tol);
            let (adm, min_p) = check_admissible(&table);
            let (nosig, _) = check_no_signaling(&table);
            per_r.push(if adm && nosig {
                let s_val = table.chsh();
                let cand = ScanBest {
                    s: s_val,
                    s_abs: s_val.abs(),
                    min_p,
                    direction: dir,
                    dir_index,
                };
                ScanSlot {
                    admissible: 1,
                    best: Some(cand),
                    best_with_margin: (min_p >= margin_floor).then_some(cand),
                }
            } else {
                ScanSlot::default()
            });
        }
        Ok(per_r)
    };

    let merged: ScanAcc = (0..n_dirs)
        .into_par_iter()
        .map(per_dir)
        .try_reduce(|| vec![ScanSlot::default(); r_grid.len()], |a, b| Ok(merge_scan(a, b)))?;

    Ok(r_grid
        .iter()
        .zip(merged)
        .map(|(&r_norm, slot)| ScanPoint {
            r_norm,
            n_admissible: slot.admissible,
            best: slot.best,
            best_with_margin: slot.best_with_margin,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, Default)]
struct ScanSlot {
    admissible: u64,
    best: Option<ScanBest>,
    best_with_margin: Option<ScanBest>,
}

type ScanAcc = Vec<ScanSlot>;

fn merge_scan(mut acc: ScanAcc, item: ScanAcc) -> ScanAcc {
    for (slot, other) in acc.iter_mut().zip(item) {
        slot.admissible += other.admissible;
        slot.best = merge_scan_best(slot.best, other.best);
        slot.best_with_margin = merge_scan_best(slot.best_with_margin, other.best_with_margin);
    }
    acc
}

fn merge_scan_best(a: Option<ScanBest>, b: Option<ScanBest>) -> Option<ScanBest> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(better_scan(a, b)),
    }
}

fn better_scan(a: ScanBest, b: ScanBest) -> ScanBest {
    // Larger |S| wins; exact ties go to the smaller direction index.
    if b.s_abs > a.s_abs || (b.s_abs == a.s_abs && b.dir_index < a.dir_index) {
        b
    } else {
        a
    }
}

type TableRows = [[f64; 4]; 4];

/// Sixteen-entry rows of both physical branch tables for one preparation
/// direction under fixed settings.
fn branch_rows(
    dir: [f64; 3],
    t_steps: usize,
    a0: &CoinObservable,
    a1: &CoinObservable,
    b0: &WalkerObservable,
    b1: &WalkerObservable,
    tol: f64,
) -> Result<(TableRows, TableRows)> {
    let unit = BlochVector::from_direction(dir, 1.0)?;
    let ensemble = signed_decomposition(&unit).evolve(t_steps, t_steps)?;
    let branches = ensemble.branches();
    let mut rows = Vec::with_capacity(2);
    for (_, state) in branches {
        let single = EvolvedEnsemble::from_branches(vec![(1.0, state.clone())])?;
        rows.push(*joint_table(&single, a0, a1, b0, b1, tol)?.rows());
    }
    Ok((rows[0], rows[1]))
}

/// Accumulated acceptance statistics for one seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedStat {
    pub seed: u64,
    pub accepted: u64,
    pub violating: u64,
    pub best_s_abs: Option<f64>,
    pub best_min_p: Option<f64>,
}

/// Pooled statistics of a coarse search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoarseStats {
    pub trials_total: u64,
    pub accepted: u64,
    /// Accepted trials with `|S| > 2`.
    pub violating: u64,
    pub per_seed: Vec<SeedStat>,
}

/// Result of [`coarse_search`]: the best witness plus acceptance statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoarseSearchOutcome {
    pub best: WitnessRecord,
    pub stats: CoarseStats,
    pub x0_sites: Vec<usize>,
}

struct TrialOutcome {
    seed_idx: usize,
    accepted: u64,
    violating: u64,
    best: Option<Candidate>,
}

#[derive(Clone)]
struct Candidate {
    s_abs: f64,
    min_p: f64,
    record: WitnessRecord,
    order: (u64, u64, usize),
}

/// Randomized multi-start search over preparation direction and Alice's coin
/// directions, with Bob fixed to the sign binning and a threshold binning
/// taken from the config grid.
///
/// Each trial draws `r̂`, `â`, `â′` from its own stream (shared across the
/// threshold grid so grid subsets reproduce the full run's draws), evaluates
/// the witness at every threshold, and keeps candidates that pass
/// admissibility and no-signaling at `cfg.tol`.
pub fn coarse_search(cfg: &SearchConfig) -> Result<CoarseSearchOutcome> {
    cfg.validate()?;
    let x0_sites = cfg.resolve_x0(cfg.t_steps)?;
    let t_steps = cfg.t_steps;
    let b0 = sign_binning(t_steps, cfg.sign_of_zero);
    let b1s = x0_sites
        .iter()
        .map(|&x0| threshold_binning(t_steps, x0))
        .collect::<Result<Vec<_>>>()?;

    let n_seeds = cfg.seeds.len();
    let total = cfg.n_trials.checked_mul(n_seeds as u64).ok_or_else(|| {
        Error::Domain("trial budget overflows".into())
    })?;

    let run_trial = |global: u64| -> Result<TrialOutcome> {
        let seed_idx = (global / cfg.n_trials) as usize;
        let trial = global % cfg.n_trials;
        let seed = cfg.seeds[seed_idx];
        let mut rng = trial_rng(seed, trial);
        let prep_dir = sample_unit_sphere(&mut rng);
        let a_dir = sample_unit_sphere(&mut rng);
        let a_prime_dir = sample_unit_sphere(&mut rng);
        let prep = BlochVector::from_direction(prep_dir, cfg.r_norm)?;
        let a0 = CoinObservable::new(a_dir)?;
        let a1 = CoinObservable::new(a_prime_dir)?;
        let ensemble = signed_decomposition(&prep).evolve(t_steps, t_steps)?;

        let mut out = TrialOutcome {
            seed_idx,
            accepted: 0,
            violating: 0,
            best: None,
        };
        for (x0_idx, b1) in b1s.iter().enumerate() {
            let table = joint_table(&ensemble, &a0, &a1, &b0, b1, cfg.tol)?;
            let (adm, min_p) = check_admissible(&table);
            let (nosig, _) = check_no_signaling(&table);
            if !(adm && nosig) {
                continue;
            }
            out.accepted += 1;
            let report = BellReport::from_table(&table);
            if report.s.abs() > 2.0 {
                out.violating += 1;
            }
            let cand = Candidate {
                s_abs: report.s.abs(),
                min_p,
                record: WitnessRecord {
                    prep_dir,
                    r_norm: cfg.r_norm,
                    coin_dirs: [a_dir, a_prime_dir],
                    walker_obs: [
                        WalkerObsDescriptor::Sign {
                            sign_of_zero: cfg.sign_of_zero,
                        },
                        WalkerObsDescriptor::Threshold {
                            x0: x0_sites[x0_idx],
                        },
                    ],
                    t_steps,
                    tol: cfg.tol,
                    report,
                    seed,
                    trial,
                },
                order: (seed, trial, x0_idx),
            };
            out.best = Some(match out.best.take() {
                None => cand,
                Some(prev) => better_candidate(prev, cand),
            });
        }
        Ok(out)
    };

    let acc = (0..total)
        .into_par_iter()
        .map(run_trial)
        .try_fold(
            || Accumulator::new(n_seeds),
            |mut acc, trial| {
                acc.absorb(trial?);
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(|| Accumulator::new(n_seeds), |a, b| Ok(a.merge(b)));
    let acc = acc?;

    let per_seed = cfg
        .seeds
        .iter()
        .zip(acc.per_seed)
        .map(|(&seed, s)| SeedStat {
            seed,
            accepted: s.accepted,
            violating: s.violating,
            best_s_abs: s.best.as_ref().map(|c| c.s_abs),
            best_min_p: s.best.as_ref().map(|c| c.min_p),
        })
        .collect();

    let best = acc
        .best
        .ok_or_else(|| {
            Error::EmptySearchResult(format!(
                "no admissible candidate in {total} trials at r_norm = {}, T = {}",
                cfg.r_norm, cfg.t_steps
            ))
        })?
        .record;

    Ok(CoarseSearchOutcome {
        best,
        stats: CoarseStats {
            trials_total: total,
            accepted: acc.accepted,
            violating: acc.violating,
            per_seed,
        },
        x0_sites,
    })
}

fn better_candidate(a: Candidate, b: Candidate) -> Candidate {
    // Larger |S| wins; exact ties go to the lexicographically smaller
    // (seed, trial, x0).
    if b.s_abs > a.s_abs || (b.s_abs == a.s_abs && b.order < a.order) {
        b
    } else {
        a
    }
}

struct PerSeedAcc {
    accepted: u64,
    violating: u64,
    best: Option<Candidate>,
}

struct Accumulator {
    accepted: u64,
    violating: u64,
    best: Option<Candidate>,
    per_seed: Vec<PerSeedAcc>,
}

impl Accumulator {
    fn new(n_seeds: usize) -> Self {
        Self {
            accepted: 0,
            violating: 0,
            best: None,
            per_seed: (0..n_seeds)
                .map(|_| PerSeedAcc {
                    accepted: 0,
                    violating: 0,
                    best: None,
                })
                .collect(),
        }
    }

    fn absorb(&mut self, trial: TrialOutcome) {
        self.accepted += trial.accepted;
        self.violating += trial.violating;
        let slot = &mut self.per_seed[trial.seed_idx];
        slot.accepted += trial.accepted;
        slot.violating += trial.violating;
        if let Some(cand) = trial.best {
            slot.best = Some(match slot.best.take() {
                None => cand.clone(),
                Some(prev) => better_candidate(prev, cand.clone()),
            });
            self.best = Some(match self.best.take() {
                None => cand,
                Some(prev) => better_candidate(prev, cand),
            });
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.accepted += other.accepted;
        self.violating += other.violating;
        self.best = merge_best(self.best, other.best);
        for (mine, theirs) in self.per_seed.iter_mut().zip(other.per_seed) {
            mine.accepted += theirs.accepted;
            mine.violating += theirs.violating;
            mine.best = merge_best(mine.best.take(), theirs.best);
        }
        self
    }
}

fn merge_best(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(better_candidate(a, b)),
    }
}

/// Per-walk-time summary of the finite-time sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRecord {
    pub t_steps: usize,
    /// Best `|S|` over all seeds and trials.
    pub best_s_abs: f64,
    /// Median over seeds of the per-seed best `|S|`.
    pub median_best_s: f64,
    /// Fraction of accepted trials (pooled over seeds) with `|S| > 2`.
    pub fraction_gt2: f64,
    /// Median over seeds of the per-seed best witness's minimum probability.
    pub median_min_p: f64,
    pub x0_sites: Vec<usize>,
    pub per_seed: Vec<SeedStat>,
    pub best: WitnessRecord,
    pub trials_total: u64,
    pub accepted: u64,
}

/// Finite-time sweep outcome across walk times.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub r_norm: f64,
    pub records: Vec<SweepRecord>,
}

/// Repeats the coarse multi-start search for each walk time in `t_list`,
/// defaulting the threshold grid to every site in `[0, T]` when the config
/// grid is empty.
pub fn finite_time_sweep(t_list: &[usize], cfg: &SearchConfig) -> Result<SweepResult> {
    if t_list.is_empty() {
        return Err(Error::Domain("walk time list must be nonempty".into()));
    }
    let mut records = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let mut per_t = cfg.clone();
        per_t.t_steps = t;
        if per_t.x0_grid.is_empty() {
            per_t.x0_grid = (0..=t).map(|x| x as f64).collect();
        }
        let outcome = coarse_search(&per_t)?;
        let mut best_list: Vec<f64> = outcome
            .stats
            .per_seed
            .iter()
            .filter_map(|s| s.best_s_abs)
            .collect();
        let mut minp_list: Vec<f64> = outcome
            .stats
            .per_seed
            .iter()
            .filter_map(|s| s.best_min_p)
            .collect();
        let fraction = if outcome.stats.accepted == 0 {
            0.0
        } else {
            outcome.stats.violating as f64 / outcome.stats.accepted as f64
        };
        records.push(SweepRecord {
            t_steps: t,
            best_s_abs: outcome.best.report.s.abs(),
            median_best_s: median(&mut best_list),
            fraction_gt2: fraction,
            median_min_p: median(&mut minp_list),
            x0_sites: outcome.x0_sites.clone(),
            per_seed: outcome.stats.per_seed.clone(),
            best: outcome.best,
            trials_total: outcome.stats.trials_total,
            accepted: outcome.stats.accepted,
        });
    }
    Ok(SweepResult {
        r_norm: cfg.r_norm,
        records,
    })
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;

    #[test]
    fn sphere_sampling_is_deterministic_and_unit() {
        let mut a = trial_rng(3, 5);
        let mut b = trial_rng(3, 5);
        for _ in 0..32 {
            let va = sample_unit_sphere(&mut a);
            let vb = sample_unit_sphere(&mut b);
            assert_eq!(va, vb);
            let norm: f64 = va.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_sampling_moments() {
        let mut rng = trial_rng(11, 0);
        let n = 100_000;
        let mut mean = [0.0; 3];
        let mut mean_sq = [0.0; 3];
        for _ in 0..n {
            let v = sample_unit_sphere(&mut rng);
            for k in 0..3 {
                mean[k] += v[k];
                mean_sq[k] += v[k] * v[k];
            }
        }
        for k in 0..3 {
            mean[k] /= n as f64;
            mean_sq[k] /= n as f64;
            assert!(mean[k].abs() < 0.02, "axis {k} mean {}", mean[k]);
            assert!(
                (mean_sq[k] - 1.0 / 3.0).abs() < 0.02,
                "axis {k} mean square {}",
                mean_sq[k]
            );
        }
    }

    #[test]
    fn x0_grid_resolution() {
        let mut cfg = test_config();
        cfg.x0_grid = vec![0.6, 36.0, 0.0, 0.25];
        let sites = cfg.resolve_x0(60).unwrap();
        assert_eq!(sites, vec![36, 36, 0, 15]);
        // Ratio ties round toward zero: 0.25 * 2 = 0.5 -> 0.
        cfg.x0_grid = vec![0.25];
        assert_eq!(cfg.resolve_x0(2).unwrap(), vec![0]);
        cfg.x0_grid = vec![];
        assert!(cfg.resolve_x0(2).is_err());
    }

    #[test]
    fn discovery_rejects_invalid_target() {
        assert!(discover_benchmark_direction(2, (0.9, 0.9), 0.005).is_err());
        assert!(discover_benchmark_direction(2, (0.3, 0.7), 0.005).is_err());
    }

    #[test]
    fn discovery_matches_product_target_at_t0() {
        let report = discover_benchmark_direction(0, (1.0, 0.0), 1e-6).unwrap();
        assert!(report.matched);
        assert_eq!(report.candidates_tested, 6);
        assert!(report.schmidt.is_degenerate_product());
    }

    fn test_config() -> SearchConfig {
        SearchConfig {
            t_steps: 6,
            r_norm: 1.45,
            n_direction_samples: 10,
            n_trials: 50,
            x0_grid: vec![0.6],
            seeds: vec![1, 2],
            tol: 1e-9,
            sign_of_zero: 1,
        }
    }

    #[test]
    fn coarse_search_is_reproducible() {
        let cfg = test_config();
        let a = coarse_search(&cfg).unwrap();
        let b = coarse_search(&cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn coarse_search_single_trial_is_deterministic() {
        let mut cfg = test_config();
        cfg.n_trials = 1;
        cfg.seeds = vec![9];
        cfg.r_norm = 0.5;
        let out = coarse_search(&cfg).unwrap();
        assert_eq!(out.best.seed, 9);
        assert_eq!(out.best.trial, 0);
        assert_eq!(out.stats.trials_total, 1);
    }

    #[test]
    fn quantum_preparations_respect_tsirelson_in_search() {
        let mut cfg = test_config();
        cfg.r_norm = 0.0;
        cfg.n_trials = 200;
        let out = coarse_search(&cfg).unwrap();
        // Maximally mixed coin: every trial admissible.
        assert_eq!(out.stats.accepted, out.stats.trials_total);
        assert!(out.best.report.s.abs() <= 2.0 * std::f64::consts::SQRT_2 + 1e-9);
    }

    #[test]
    fn subset_of_x0_grid_reproduces_full_run_candidates() {
        let mut full = test_config();
        full.x0_grid = vec![0.0, 2.0, 4.0];
        let mut sub = full.clone();
        sub.x0_grid = vec![2.0];
        let full_out = coarse_search(&full).unwrap();
        let sub_out = coarse_search(&sub).unwrap();
        // The subset's best candidate must appear identically in the full
        // run when the winning threshold is the shared one.
        if full_out.best.walker_obs.iter().any(|d| matches!(d, WalkerObsDescriptor::Threshold { x0: 2 })) {
            assert_eq!(
                serde_json::to_string(&full_out.best).unwrap(),
                serde_json::to_string(&sub_out.best).unwrap()
            );
        } else {
            assert!(sub_out.best.report.s.abs() <= full_out.best.report.s.abs());
        }
    }

    #[test]
    fn scan_respects_quantum_ceiling_and_rejects_empty_grid() {
        let bench = build_benchmark(6, (0.716, 0.698), 0.2).unwrap();
        let points = benchmark_scan_r(6, &bench.settings, &[0.0, 0.5, 1.0], 200, 3, 1e-9, 3e-3)
            .unwrap();
        for p in &points {
            assert_eq!(p.n_admissible, 200, "all quantum preparations admissible");
            let best = p.best.unwrap();
            assert!(best.s_abs <= 2.0 * std::f64::consts::SQRT_2 + 1e-9);
        }
        assert!(benchmark_scan_r(6, &bench.settings, &[], 200, 3, 1e-9, 3e-3).is_err());
        assert!(benchmark_scan_r(6, &bench.settings, &[1.0], 0, 3, 1e-9, 3e-3).is_err());
    }

    #[test]
    fn scan_is_identical_across_thread_counts() {
        let bench = build_benchmark(5, (0.716, 0.698), 0.2).unwrap();
        let grid = [0.8, 1.45];
        let parallel =
            benchmark_scan_r(5, &bench.settings, &grid, 400, 9, 1e-9, 3e-3).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let serial = pool
            .install(|| benchmark_scan_r(5, &bench.settings, &grid, 400, 9, 1e-9, 3e-3))
            .unwrap();
        assert_eq!(
            serde_json::to_string(&parallel).unwrap(),
            serde_json::to_string(&serial).unwrap()
        );
    }

    #[test]
    fn witness_reevaluates_at_tighter_tolerance() {
        let cfg = test_config();
        let out = coarse_search(&cfg).unwrap();
        let (report, table) = out.best.reevaluate(cfg.tol / 10.0).unwrap();
        assert!(report.admissible);
        let (ok, _) = check_no_signaling(&table);
        assert!(ok);
        assert!((report.s - out.best.report.s).abs() < 1e-12);
    }
}
