//! Bloch-parametrized coin preparations as signed ensembles of physical pure
//! coin states, with the quasiprobability weights, negativity cost, sampling
//! overhead, and finite-shot emulation protocol attached to them.
//!
//! A coin operator `½(𝕀 + r·σ)` is a physical density operator only for
//! `‖r‖ ≤ 1`. For any `r` it decomposes over the antipodal pure states along
//! `±r̂` with weights `(1 ± ‖r‖)/2`; for `‖r‖ > 1` the second weight is
//! negative. The operator itself is never materialized as a matrix — every
//! downstream quantity is an affine combination over the two physical
//! branches, which is exact and keeps the extension purely in the
//! reconstruction rule.

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bell::JointTable;
use crate::error::{Error, Result};
use crate::walk::LatticeState;

/// Tolerance for unit-direction and weight-sum checks.
pub const DIR_TOL: f64 = 1e-10;

/// Real three-component Bloch vector. Physical iff `‖r‖ ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
}

impl BlochVector {
    /// Rejects non-finite components.
    pub fn new(rx: f64, ry: f64, rz: f64) -> Result<Self> {
        if !(rx.is_finite() && ry.is_finite() && rz.is_finite()) {
            return Err(Error::Domain(format!(
                "Bloch vector components must be finite, got ({rx}, {ry}, {rz})"
            )));
        }
        Ok(Self { rx, ry, rz })
    }

    pub fn from_array(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }

    /// Direction scaled to the given magnitude. The direction must be unit.
    pub fn from_direction(dir: [f64; 3], norm: f64) -> Result<Self> {
        check_unit(dir)?;
        Self::new(dir[0] * norm, dir[1] * norm, dir[2] * norm)
    }

    pub fn norm(&self) -> f64 {
        (self.rx * self.rx + self.ry * self.ry + self.rz * self.rz).sqrt()
    }

    pub fn components(&self) -> [f64; 3] {
        [self.rx, self.ry, self.rz]
    }
}

fn check_unit(dir: [f64; 3]) -> Result<()> {
    let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > DIR_TOL {
        return Err(Error::Domain(format!(
            "direction has norm {norm:.17e}, expected 1 within {DIR_TOL:e}"
        )));
    }
    Ok(())
}

/// One weighted pure coin state of a signed ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleMember {
    pub weight: f64,
    pub amp0: Complex64,
    pub amp1: Complex64,
}

/// JSON form of an ensemble member: `{weight, amp0_re, amp0_im, amp1_re, amp1_im}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnsembleMemberRecord {
    pub weight: f64,
    pub amp0_re: f64,
    pub amp0_im: f64,
    pub amp1_re: f64,
    pub amp1_im: f64,
}

impl From<&EnsembleMember> for EnsembleMemberRecord {
    fn from(m: &EnsembleMember) -> Self {
        Self {
            weight: m.weight,
            amp0_re: m.amp0.re,
            amp0_im: m.amp0.im,
            amp1_re: m.amp1.re,
            amp1_im: m.amp1.im,
        }
    }
}

impl From<&EnsembleMemberRecord> for EnsembleMember {
    fn from(r: &EnsembleMemberRecord) -> Self {
        Self {
            weight: r.weight,
            amp0: Complex64::new(r.amp0_re, r.amp0_im),
            amp1: Complex64::new(r.amp1_re, r.amp1_im),
        }
    }
}

/// Weighted list of pure coin states representing a Hermitian trace-one coin
/// operator. Weights sum to 1 but may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedEnsemble {
    members: Vec<EnsembleMember>,
}

impl SignedEnsemble {
    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    pub fn weights(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.weight).collect()
    }

    /// ℓ1 norm of the weights.
    pub fn l1_norm(&self) -> f64 {
        self.members.iter().map(|m| m.weight.abs()).sum()
    }

    pub fn has_negative_weight(&self) -> bool {
        self.members.iter().any(|m| m.weight < 0.0)
    }

    pub fn to_records(&self) -> Vec<EnsembleMemberRecord> {
        self.members.iter().map(EnsembleMemberRecord::from).collect()
    }

    /// Evolves every member from the origin through `n_steps` walk steps on a
    /// window of half-width `t_max`.
    pub fn evolve(&self, t_max: usize, n_steps: usize) -> Result<EvolvedEnsemble> {
        let branches = self
            .members
            .iter()
            .map(|m| {
                LatticeState::localized(t_max, m.amp0, m.amp1)?
                    .evolve(n_steps)
                    .map(|s| (m.weight, s))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvolvedEnsemble { branches })
    }
}

/// A signed ensemble after walk evolution: weighted pure lattice states
/// sharing one window and step count.
#[derive(Debug, Clone)]
pub struct EvolvedEnsemble {
    branches: Vec<(f64, LatticeState)>,
}

impl EvolvedEnsemble {
    pub fn branches(&self) -> &[(f64, LatticeState)] {
        &self.branches
    }

    pub fn from_branches(branches: Vec<(f64, LatticeState)>) -> Result<Self> {
        let mut it = branches.iter();
        if let Some((_, first)) = it.next() {
            for (_, s) in it {
                if s.t_max() != first.t_max() || s.steps_taken() != first.steps_taken() {
                    return Err(Error::ShapeMismatch(
                        "ensemble branches do not share a lattice window".into(),
                    ));
                }
            }
        }
        Ok(Self { branches })
    }

    pub fn position_distribution(&self) -> Result<crate::walk::PositionDistribution> {
        crate::walk::position_distribution(self.branches.iter().map(|(w, s)| (*w, s)))
    }
}

/// Pure coin state with Bloch vector equal to `unit_dir`: the +1 eigenvector
/// of `r̂·σ`, with the first nonzero amplitude real and positive.
pub fn coin_state_from_direction(unit_dir: [f64; 3]) -> Result<(Complex64, Complex64)> {
    check_unit(unit_dir)?;
    Ok(coin_state_for_cosines(unit_dir))
}

/// Two-member signed decomposition of `½(𝕀 + r·σ)` over the antipodal pure
/// states along `±r̂`, with weights `(1 ± ‖r‖)/2`.
///
/// `r = 0` yields the equal-weight ensemble along `±ẑ` (the maximally mixed
/// coin). Weights always sum to 1 exactly.
///
/// ```
/// use walkbell_core::{signed_decomposition, BlochVector};
///
/// let r = BlochVector::new(0.0, 1.45, 0.0).unwrap();
/// let ensemble = signed_decomposition(&r);
/// let w = ensemble.weights();
/// assert!((w[0] - 1.225).abs() < 1e-15 && (w[1] + 0.225).abs() < 1e-15);
/// assert_eq!(w[0] + w[1], 1.0);
/// assert!((ensemble.l1_norm() - 1.45).abs() < 1e-15);
/// ```
pub fn signed_decomposition(r: &BlochVector) -> SignedEnsemble {
    let norm = r.norm();
    let dir = if norm == 0.0 {
        [0.0, 0.0, 1.0]
    } else {
        [r.rx / norm, r.ry / norm, r.rz / norm]
    };
    // Normalized components can land epsilon off the unit sphere; the
    // eigenvector formula only needs the direction cosines.
    let (p0, p1) = coin_state_for_cosines(dir);
    let (m0, m1) = coin_state_for_cosines([-dir[0], -dir[1], -dir[2]]);
    let w_plus = (1.0 + norm) / 2.0;
    let w_minus = 1.0 - w_plus;
    SignedEnsemble {
        members: vec![
            EnsembleMember {
                weight: w_plus,
                amp0: p0,
                amp1: p1,
            },
            EnsembleMember {
                weight: w_minus,
                amp0: m0,
                amp1: m1,
            },
        ],
    }
}

/// +1 eigenvector of `n̂·σ`. Uses the hemisphere-stable half-angle form, so
/// neither pole divides by a small component, then normalizes exactly and
/// fixes the global phase (first nonzero amplitude real positive).
fn coin_state_for_cosines(dir: [f64; 3]) -> (Complex64, Complex64) {
    let [nx, ny, nz] = dir;
    let (mut a, mut b) = if nz >= 0.0 {
        let alpha = ((1.0 + nz) / 2.0).sqrt();
        (
            Complex64::new(alpha, 0.0),
            Complex64::new(nx, ny) / (2.0 * alpha),
        )
    } else {
        let beta = ((1.0 - nz) / 2.0).sqrt();
        (
            Complex64::new(nx, -ny) / (2.0 * beta),
            Complex64::new(beta, 0.0),
        )
    };
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    a /= norm;
    b /= norm;
    let lead = if a.norm() > 1e-12 { a } else { b };
    let phase = lead / lead.norm();
    (a / phase, b / phase)
}

/// ℓ1 norm of the signed weights, `max(‖r‖, 1)`.
pub fn negativity_cost(r: &BlochVector) -> f64 {
    r.norm().max(1.0)
}

/// Nominal variance scale `𝒩²/n_shots` for a reconstructed ±1-valued
/// correlator estimated from `n_shots` shots.
pub fn sampling_overhead(r: &BlochVector, n_shots: u64) -> Result<f64> {
    if n_shots < 1 {
        return Err(Error::Domain("sampling overhead needs n_shots >= 1".into()));
    }
    let n = negativity_cost(r);
    Ok(n * n / n_shots as f64)
}

/// Finite-shot reconstruction of a signed-weighted joint table.
#[derive(Debug, Clone)]
pub struct EmulationOutcome {
    /// Signed combination of the empirical branch frequencies.
    pub table: JointTable,
    /// Per-entry standard error, indexed like the table.
    pub std_err: [[f64; 4]; 4],
    /// Empirical outcome frequencies of each physical branch.
    pub freq_plus: [[f64; 4]; 4],
    pub freq_minus: [[f64; 4]; 4],
    pub weights: (f64, f64),
    pub n_shots_per_branch: u64,
}

impl EmulationOutcome {
    /// Standard error of the reconstructed CHSH estimator, from the
    /// empirical branch correlators (outcomes within one setting share a
    /// multinomial draw; settings and branches are independent).
    pub fn chsh_std_err(&self) -> f64 {
        let corr = |rows: &[[f64; 4]; 4], s: usize| rows[s][0] - rows[s][1] - rows[s][2] + rows[s][3];
        let (w_plus, w_minus) = self.weights;
        let n = self.n_shots_per_branch as f64;
        let mut var = 0.0;
        for s in 0..4 {
            let ep = corr(&self.freq_plus, s);
            let em = corr(&self.freq_minus, s);
            var += (w_plus * w_plus * (1.0 - ep * ep) + w_minus * w_minus * (1.0 - em * em)) / n;
        }
        var.max(0.0).sqrt()
    }
}

/// Draws `n_shots_per_branch` multinomial samples per setting pair from each
/// physical branch's four-outcome distribution and returns the signed
/// combination `w₊ p̂₊ + w₋ p̂₋` of the empirical frequencies, with per-entry
/// standard errors.
///
/// The generator is ChaCha8 seeded with `rng_seed`; reusing a seed reproduces
/// the draw exactly. Consumption order is setting pairs `(i,j)` row-major,
/// plus branch before minus branch.
pub fn emulate_shots(
    exact_plus: &JointTable,
    exact_minus: &JointTable,
    weights: (f64, f64),
    n_shots_per_branch: u64,
    rng_seed: u64,
) -> Result<EmulationOutcome> {
    if n_shots_per_branch == 0 {
        return Err(Error::Domain("emulation needs at least one shot".into()));
    }
    let (w_plus, w_minus) = weights;
    if ((w_plus + w_minus) - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "branch weights sum to {:.17e}, expected 1",
            w_plus + w_minus
        )));
    }
    for (name, t) in [("plus", exact_plus), ("minus", exact_minus)] {
        let dev = t.normalization_error();
        if dev > 1e-10 {
            return Err(Error::Domain(format!(
                "{name} branch table normalization off by {dev:e}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = n_shots_per_branch as f64;
    let mut entries = [[0.0; 4]; 4];
    let mut std_err = [[0.0; 4]; 4];
    let mut freq_plus = [[0.0; 4]; 4];
    let mut freq_minus = [[0.0; 4]; 4];
    for setting in 0..4 {
        freq_plus[setting] =
            sample_frequencies(exact_plus.setting_row(setting), n_shots_per_branch, &mut rng);
        freq_minus[setting] =
            sample_frequencies(exact_minus.setting_row(setting), n_shots_per_branch, &mut rng);
        for outcome in 0..4 {
            let fp = freq_plus[setting][outcome];
            let fm = freq_minus[setting][outcome];
            entries[setting][outcome] = w_plus * fp + w_minus * fm;
            std_err[setting][outcome] = ((w_plus * w_plus * fp * (1.0 - fp)
                + w_minus * w_minus * fm * (1.0 - fm))
                / n)
                .sqrt();
        }
    }
    Ok(EmulationOutcome {
        table: JointTable::from_rows(entries, exact_plus.tol()),
        std_err,
        freq_plus,
        freq_minus,
        weights,
        n_shots_per_branch,
    })
}

/// Empirical outcome frequencies of `n` draws from a four-outcome
/// distribution. Tiny negative rounding residue in the inputs is clamped for
/// sampling only.
fn sample_frequencies(probs: [f64; 4], n: u64, rng: &mut ChaCha8Rng) -> [f64; 4] {
    let clamped: [f64; 4] = std::array::from_fn(|k| probs[k].max(0.0));
    let total: f64 = clamped.iter().sum();
    let mut counts = [0u64; 4];
    for _ in 0..n {
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut drawn = 3;
        for (k, p) in clamped.iter().enumerate() {
            acc += p;
            if u < acc {
                drawn = k;
                break;
            }
        }
        counts[drawn] += 1;
    }
    std::array::from_fn(|k| counts[k] as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const S2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn bloch_of_state(a0: Complex64, a1: Complex64) -> [f64; 3] {
        let cross = a0.conj() * a1;
        [2.0 * cross.re, 2.0 * cross.im, a0.norm_sqr() - a1.norm_sqr()]
    }

    #[test]
    fn coin_state_along_axes() {
        let (a0, a1) = coin_state_from_direction([0.0, 0.0, 1.0]).unwrap();
        assert!((a0 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(a1.norm() < 1e-15);

        let (a0, a1) = coin_state_from_direction([1.0, 0.0, 0.0]).unwrap();
        assert!((a0 - Complex64::new(S2, 0.0)).norm() < 1e-15);
        assert!((a1 - Complex64::new(S2, 0.0)).norm() < 1e-15);

        let (a0, a1) = coin_state_from_direction([0.0, 1.0, 0.0]).unwrap();
        assert!((a0 - Complex64::new(S2, 0.0)).norm() < 1e-15);
        assert!((a1 - Complex64::new(0.0, S2)).norm() < 1e-15);
    }

    #[test]
    fn coin_state_matches_requested_bloch_vector() {
        let dirs = [
            [0.6, 0.0, 0.8],
            [-0.6, 0.8, 0.0],
            [0.0, 0.0, -1.0],
            [0.36, -0.48, 0.8],
            [-1.0, 0.0, 0.0],
        ];
        for dir in dirs {
            let (a0, a1) = coin_state_from_direction(dir).unwrap();
            assert!((a0.norm_sqr() + a1.norm_sqr() - 1.0).abs() < 1e-12);
            let got = bloch_of_state(a0, a1);
            for k in 0..3 {
                assert!((got[k] - dir[k]).abs() < 1e-10, "dir {dir:?} axis {k}");
            }
            // Phase convention: first nonzero amplitude real positive.
            if a0.norm() > 1e-12 {
                assert!(a0.im.abs() < 1e-15 && a0.re > 0.0);
            } else {
                assert!(a1.im.abs() < 1e-15 && a1.re > 0.0);
            }
        }
    }

    #[test]
    fn coin_state_rejects_non_unit_direction() {
        assert!(coin_state_from_direction([0.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn decomposition_weights() {
        let pure = BlochVector::new(0.0, 1.0, 0.0).unwrap();
        let e = signed_decomposition(&pure);
        let w = e.weights();
        assert!((w[0] - 1.0).abs() < 1e-15);
        assert!(w[1].abs() < 1e-15);
        assert!(!e.has_negative_weight());

        let ext = BlochVector::new(0.0, 1.45, 0.0).unwrap();
        let e = signed_decomposition(&ext);
        let w = e.weights();
        assert!((w[0] - 1.225).abs() < 1e-15);
        assert!((w[1] + 0.225).abs() < 1e-15);
        assert!(e.has_negative_weight());

        let mix = BlochVector::new(0.3, 0.0, 0.4).unwrap();
        let e = signed_decomposition(&mix);
        let w = e.weights();
        assert!((w[0] - 0.75).abs() < 1e-15);
        assert!((w[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn decomposition_weights_sum_exactly() {
        for norm in [0.0, 0.3, 1.0, 1.45, 2.0, 17.0] {
            let r = BlochVector::new(0.0, 0.0, norm).unwrap();
            let e = signed_decomposition(&r);
            let w = e.weights();
            assert_eq!(w[0] + w[1], 1.0, "norm {norm}");
        }
    }

    #[test]
    fn decomposition_of_zero_is_maximally_mixed_along_z() {
        let e = signed_decomposition(&BlochVector::new(0.0, 0.0, 0.0).unwrap());
        let m = e.members();
        assert_eq!(m[0].weight, 0.5);
        assert_eq!(m[1].weight, 0.5);
        assert!((m[0].amp0 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((m[1].amp1 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn decomposition_members_are_antipodal() {
        let r = BlochVector::new(0.8, -0.55, 0.2).unwrap();
        let e = signed_decomposition(&r);
        let b_plus = bloch_of_state(e.members()[0].amp0, e.members()[0].amp1);
        let b_minus = bloch_of_state(e.members()[1].amp0, e.members()[1].amp1);
        for k in 0..3 {
            assert!((b_plus[k] + b_minus[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn bloch_vector_rejects_nan() {
        assert!(BlochVector::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn negativity_examples() {
        let r145 = BlochVector::new(0.0, 1.45, 0.0).unwrap();
        assert!((negativity_cost(&r145) - 1.45).abs() < 1e-15);
        let r1 = BlochVector::new(1.0, 0.0, 0.0).unwrap();
        assert!((negativity_cost(&r1) - 1.0).abs() < 1e-15);
        let r05 = BlochVector::new(0.0, 0.0, 0.5).unwrap();
        assert!((negativity_cost(&r05) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overhead_examples() {
        let r145 = BlochVector::new(0.0, 1.45, 0.0).unwrap();
        assert!((sampling_overhead(&r145, 10_000).unwrap() - 2.1025e-4).abs() < 1e-18);
        let r1 = BlochVector::new(0.0, 0.0, 1.0).unwrap();
        assert!((sampling_overhead(&r1, 777).unwrap() - 1.0 / 777.0).abs() < 1e-18);
        let r2 = BlochVector::new(2.0, 0.0, 0.0).unwrap();
        assert!((sampling_overhead(&r2, 4).unwrap() - 1.0).abs() < 1e-15);
        assert!(sampling_overhead(&r2, 0).is_err());
    }

    fn toy_tables() -> (JointTable, JointTable) {
        let plus = JointTable::from_rows([[0.25; 4]; 4], 1e-9);
        let minus = JointTable::from_rows([[0.4, 0.3, 0.2, 0.1]; 4], 1e-9);
        (plus, minus)
    }

    #[test]
    fn emulation_single_branch_limit() {
        let (plus, minus) = toy_tables();
        let out = emulate_shots(&plus, &minus, (1.0, 0.0), 200_000, 11).unwrap();
        for s in 0..4 {
            for o in 0..4 {
                let got = out.table.setting_row(s)[o];
                assert!(
                    (got - 0.25).abs() < 5e-3,
                    "entry ({s},{o}) = {got} far from the plus branch"
                );
            }
        }
    }

    #[test]
    fn emulation_single_draw_support() {
        let (plus, minus) = toy_tables();
        let (w_plus, w_minus) = (1.225, -0.225);
        let out = emulate_shots(&plus, &minus, (w_plus, w_minus), 1, 5).unwrap();
        let allowed = [0.0, w_plus, w_minus, w_plus + w_minus];
        for s in 0..4 {
            for o in 0..4 {
                let got = out.table.setting_row(s)[o];
                assert!(
                    allowed.iter().any(|a| (got - a).abs() < 1e-15),
                    "entry ({s},{o}) = {got} outside single-draw support"
                );
            }
        }
    }

    #[test]
    fn emulation_is_deterministic_and_rejects_zero_shots() {
        let (plus, minus) = toy_tables();
        let a = emulate_shots(&plus, &minus, (1.225, -0.225), 500, 77).unwrap();
        let b = emulate_shots(&plus, &minus, (1.225, -0.225), 500, 77).unwrap();
        assert_eq!(a.table, b.table);
        assert!(emulate_shots(&plus, &minus, (1.225, -0.225), 0, 77).is_err());
        assert!(emulate_shots(&plus, &minus, (0.7, 0.7), 10, 77).is_err());
    }

    #[test]
    fn ensemble_record_round_trip() {
        let r = BlochVector::new(0.3, -1.2, 0.4).unwrap();
        let e = signed_decomposition(&r);
        let records = e.to_records();
        let json = serde_json::to_string(&records).unwrap();
        let back: Vec<EnsembleMemberRecord> = serde_json::from_str(&json).unwrap();
        for (orig, rec) in e.members().iter().zip(back.iter()) {
            let m = EnsembleMember::from(rec);
            assert_eq!(orig.weight, m.weight);
            assert_eq!(orig.amp0, m.amp0);
            assert_eq!(orig.amp1, m.amp1);
        }
    }
}
