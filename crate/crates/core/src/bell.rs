//! Correlators, joint probability tables, CHSH values, admissibility, and
//! no-signaling checks for evolved signed-ensemble preparations and pairs of
//! dichotomic measurements.
//!
//! Alice's observables are coin Bloch directions `â·σ`; Bob's are either
//! deterministic ±1 position binnings (diagonal in the position basis) or
//! observables embedded on the two-dimensional Schmidt subspace. All observed
//! statistics are affine combinations over the physical branches of the
//! ensemble, so the sixteen entries of a joint table always normalize per
//! setting pair, but individual entries may be negative for extended
//! preparations: admissibility is a verdict, never a repair, and raw values
//! are reported unclamped.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::prep::{signed_decomposition, BlochVector, EvolvedEnsemble};
use crate::schmidt::EmbeddedWalkerObservable;
use crate::walk::LatticeState;

/// Default verification tolerance for admissibility and no-signaling.
pub const DEFAULT_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dichotomic coin observable `â·σ` for a unit Bloch direction `â`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinObservable {
    bloch_dir: [f64; 3],
}

impl CoinObservable {
    pub fn new(bloch_dir: [f64; 3]) -> Result<Self> {
        let norm_sq: f64 = bloch_dir.iter().map(|v| v * v).sum();
        if !norm_sq.is_finite() || (norm_sq.sqrt() - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!(
                "coin observable direction has norm {:.17e}, expected 1",
                norm_sq.sqrt()
            )));
        }
        Ok(Self { bloch_dir })
    }

    pub fn bloch_dir(&self) -> [f64; 3] {
        self.bloch_dir
    }

    pub fn negated(&self) -> Self {
        Self {
            bloch_dir: [-self.bloch_dir[0], -self.bloch_dir[1], -self.bloch_dir[2]],
        }
    }

    /// The observable as a 2×2 matrix, `A[c'][c] = ⟨c'|â·σ|c⟩`.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let [ax, ay, az] = self.bloch_dir;
        [
            [Complex64::new(az, 0.0), Complex64::new(ax, -ay)],
            [Complex64::new(ax, ay), Complex64::new(-az, 0.0)],
        ]
    }
}

/// Deterministic ±1 labeling of lattice sites, diagonal in the position basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalBinning {
    t_max: usize,
    labels: Vec<i8>,
}

impl DiagonalBinning {
    pub fn new(t_max: usize, labels: Vec<i8>) -> Result<Self> {
        if labels.len() != 2 * t_max + 1 {
            return Err(Error::ShapeMismatch(format!(
                "binning over {} sites does not match window of half-width {t_max}",
                labels.len()
            )));
        }
        if labels.iter().any(|&l| l != 1 && l != -1) {
            return Err(Error::Domain("binning labels must be ±1".into()));
        }
        Ok(Self { t_max, labels })
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn label(&self, x: i64) -> i8 {
        self.labels[(x + self.t_max as i64) as usize]
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }
}

/// Bob's walker measurement: a position binning or a Schmidt-subspace
/// embedded observable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum WalkerObservable {
    Diagonal(DiagonalBinning),
    Embedded(EmbeddedWalkerObservable),
}

impl WalkerObservable {
    pub fn t_max(&self) -> usize {
        match self {
            WalkerObservable::Diagonal(d) => d.t_max(),
            WalkerObservable::Embedded(e) => e.t_max(),
        }
    }
}

/// Sign binning `B(x) = sgn(x)`, with an explicit choice for `sgn(0)`
/// (default +1 elsewhere in this crate).
pub fn sign_binning(t_max: usize, sign_of_zero: i8) -> WalkerObservable {
    assert!(
        sign_of_zero == 1 || sign_of_zero == -1,
        "sign_of_zero must be ±1"
    );
    let t = t_max as i64;
    let labels = (-t..=t)
        .map(|x| {
            if x > 0 {
                1
            } else if x < 0 {
                -1
            } else {
                sign_of_zero
            }
        })
        .collect();
    WalkerObservable::Diagonal(DiagonalBinning { t_max, labels })
}

/// Single-threshold binning `B(x) = +1` iff `|x| ≥ x0`. `x0 = 0` labels every
/// site +1; `x0 = t_max + 1` labels every site −1.
pub fn threshold_binning(t_max: usize, x0: usize) -> Result<WalkerObservable> {
    if x0 > t_max + 1 {
        return Err(Error::Domain(format!(
            "threshold x0 = {x0} outside [0, {}]",
            t_max + 1
        )));
    }
    let t = t_max as i64;
    let labels = (-t..=t)
        .map(|x| if x.unsigned_abs() as usize >= x0 { 1 } else { -1 })
        .collect();
    Ok(WalkerObservable::Diagonal(DiagonalBinning { t_max, labels }))
}

/// The sixteen observed probabilities `p(a,b|i,j)` of a (2,2,2) Bell
/// scenario, stored per setting pair, plus the verification tolerance in
/// force.
///
/// Setting index is `2i + j`; outcome index is `2·[a=−1] + [b=−1]`, so the
/// outcome order is `(+,+), (+,−), (−,+), (−,−)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    rows: [[f64; 4]; 4],
    tol: f64,
}

impl JointTable {
    pub fn from_rows(rows: [[f64; 4]; 4], tol: f64) -> Self {
        Self { rows, tol }
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_tol(&self, tol: f64) -> Self {
        Self {
            rows: self.rows,
            tol,
        }
    }

    pub fn get(&self, a: i8, b: i8, i: usize, j: usize) -> f64 {
        debug_assert!(a.abs() == 1 && b.abs() == 1 && i < 2 && j < 2);
        self.rows[2 * i + j][outcome_index(a, b)]
    }

    pub fn setting_row(&self, setting: usize) -> [f64; 4] {
        self.rows[setting]
    }

    pub fn rows(&self) -> &[[f64; 4]; 4] {
        &self.rows
    }

    pub fn min_entry(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest deviation of a setting-pair sum from 1.
    pub fn normalization_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `E_ij = Σ_{a,b} a b p(a,b|i,j)` from the table's own entries.
    pub fn correlator(&self, i: usize, j: usize) -> f64 {
        let row = self.rows[2 * i + j];
        row[0] - row[1] - row[2] + row[3]
    }

    /// `⟨A_i⟩` under setting pair `(i,j)`.
    pub fn alice_expectation(&self, i: usize, j: usize) -> f64 {
        let row = self.rows[2 * i + j];
        row[0] + row[1] - row[2] - row[3]
    }

    /// `⟨B_j⟩` under setting pair `(i,j)`.
    pub fn bob_expectation(&self, i: usize, j: usize) -> f64 {
        let row = self.rows[2 * i + j];
        row[0] - row[1] + row[2] - row[3]
    }

    /// `S = E00 + E01 + E10 − E11`.
    pub fn chsh(&self) -> f64 {
        self.correlator(0, 0) + self.correlator(0, 1) + self.correlator(1, 0)
            - self.correlator(1, 1)
    }

    pub fn to_record(&self) -> JointTableRecord {
        let mut entries = Vec::with_capacity(16);
        for i in 0..2 {
            for j in 0..2 {
                for (a, b) in OUTCOMES {
                    entries.push(JointTableEntry {
                        a,
                        b,
                        i,
                        j,
                        p: self.get(a, b, i, j),
                    });
                }
            }
        }
        JointTableRecord {
            tol: self.tol,
            entries,
        }
    }

    pub fn from_record(record: &JointTableRecord) -> Result<Self> {
        let mut rows = [[f64::NAN; 4]; 4];
        for e in &record.entries {
            if e.a.abs() != 1 || e.b.abs() != 1 || e.i > 1 || e.j > 1 {
                return Err(Error::Domain(format!(
                    "invalid table entry labels (a={}, b={}, i={}, j={})",
                    e.a, e.b, e.i, e.j
                )));
            }
            rows[2 * e.i + e.j][outcome_index(e.a, e.b)] = e.p;
        }
        if rows.iter().flatten().any(|p| p.is_nan()) {
            return Err(Error::Domain("joint table record is missing entries".into()));
        }
        Ok(Self {
            rows,
            tol: record.tol,
        })
    }

    /// CSV with header `a,b,i,j,p`, sixteen rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "a,b,i,j,p")?;
        for i in 0..2 {
            for j in 0..2 {
                for (a, b) in OUTCOMES {
                    writeln!(
                        out,
                        "{},{},{},{},{}",
                        a,
                        b,
                        i,
                        j,
                        crate::io::format_f64(self.get(a, b, i, j))
                    )?;
                }
            }
        }
        Ok(())
    }
}

const OUTCOMES: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

fn outcome_index(a: i8, b: i8) -> usize {
    2 * usize::from(a == -1) + usize::from(b == -1)
}

/// Serializable form of [`JointTable`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointTableRecord {
    pub tol: f64,
    pub entries: Vec<JointTableEntry>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct JointTableEntry {
    pub a: i8,
    pub b: i8,
    pub i: usize,
    pub j: usize,
    pub p: f64,
}

/// Correlators, CHSH value, and operational verdicts of one joint table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellReport {
    pub e00: f64,
    pub e01: f64,
    pub e10: f64,
    pub e11: f64,
    pub s: f64,
    pub min_p: f64,
    pub ns_deviation: f64,
    pub admissible: bool,
}

impl BellReport {
    pub fn from_table(table: &JointTable) -> Self {
        let (admissible, min_p) = check_admissible(table);
        let (_, ns_deviation) = check_no_signaling(table);
        Self {
            e00: table.correlator(0, 0),
            e01: table.correlator(0, 1),
            e10: table.correlator(1, 0),
            e11: table.correlator(1, 1),
            s: table.chsh(),
            min_p,
            ns_deviation,
            admissible,
        }
    }

    pub fn correlators(&self) -> [f64; 4] {
        [self.e00, self.e01, self.e10, self.e11]
    }
}

/// Admissibility verdict: every entry ≥ −tol and every setting pair sums to 1
/// within tol. Returns the raw minimum entry unclamped.
pub fn check_admissible(table: &JointTable) -> (bool, f64) {
    let min_p = table.min_entry();
    let ok = min_p >= -table.tol && table.normalization_error() <= table.tol;
    (ok, min_p)
}

/// No-signaling verdict: the largest mismatch between one party's outcome
/// marginals across the other party's settings.
pub fn check_no_signaling(table: &JointTable) -> (bool, f64) {
    let mut dev: f64 = 0.0;
    // Alice's marginals must not depend on j.
    for i in 0..2 {
        for a in [1i8, -1] {
            let m0: f64 = [1i8, -1].iter().map(|&b| table.get(a, b, i, 0)).sum();
            let m1: f64 = [1i8, -1].iter().map(|&b| table.get(a, b, i, 1)).sum();
            dev = dev.max((m0 - m1).abs());
        }
    }
    // Bob's marginals must not depend on i.
    for j in 0..2 {
        for b in [1i8, -1] {
            let m0: f64 = [1i8, -1].iter().map(|&a| table.get(a, b, 0, j)).sum();
            let m1: f64 = [1i8, -1].iter().map(|&a| table.get(a, b, 1, j)).sum();
            dev = dev.max((m0 - m1).abs());
        }
    }
    (dev <= table.tol, dev)
}

/// Single-branch expectations `(⟨A⟩, ⟨B⟩, ⟨B⊗A⟩)` of a pure lattice state.
#[allow(clippy::needless_range_loop)]
fn branch_expectations(
    state: &LatticeState,
    b: &WalkerObservable,
    a: &CoinObservable,
) -> Result<(f64, f64, f64)> {
    if b.t_max() != state.t_max() {
        return Err(Error::ShapeMismatch(format!(
            "walker observable window {} does not match state window {}",
            b.t_max(),
            state.t_max()
        )));
    }
    match b {
        WalkerObservable::Diagonal(binning) => {
            let [ax, ay, az] = a.bloch_dir();
            let width = state.width();
            let mut e_b = 0.0;
            let mut m_tot = [0.0; 3];
            let mut m_lab = [0.0; 3];
            for xi in 0..width {
                let (g0, g1) = state.coin_block(xi);
                if g0 == ZERO && g1 == ZERO {
                    continue;
                }
                let n = g0.norm_sqr() + g1.norm_sqr();
                let cross = g0.conj() * g1;
                let m = [2.0 * cross.re, 2.0 * cross.im, g0.norm_sqr() - g1.norm_sqr()];
                let lab = f64::from(binning.labels[xi]);
                e_b += lab * n;
                for k in 0..3 {
                    m_tot[k] += m[k];
                    m_lab[k] += lab * m[k];
                }
            }
            let e_a = ax * m_tot[0] + ay * m_tot[1] + az * m_tot[2];
            let e_ab = ax * m_lab[0] + ay * m_lab[1] + az * m_lab[2];
            Ok((e_a, e_b, e_ab))
        }
        WalkerObservable::Embedded(emb) => {
            let width = state.width();
            let basis = emb.basis();
            // Projections q[mu][c] = <b_mu|psi_c> and the coin Gram matrix
            // G[c'][c] = <psi_c'|psi_c>.
            let mut q = [[ZERO; 2]; 2];
            let mut gram = [[ZERO; 2]; 2];
            for xi in 0..width {
                let (g0, g1) = state.coin_block(xi);
                let psi = [g0, g1];
                for mu in 0..2 {
                    let bc = basis[mu][xi].conj();
                    q[mu][0] += bc * g0;
                    q[mu][1] += bc * g1;
                }
                for cp in 0..2 {
                    for cc in 0..2 {
                        gram[cp][cc] += psi[cp].conj() * psi[cc];
                    }
                }
            }
            // W[c'][c] = <psi_c'| B |psi_c>: Schmidt-subspace part plus +1 on
            // the complement.
            let sub = emb.sub();
            let mut w = [[ZERO; 2]; 2];
            for cp in 0..2 {
                for cc in 0..2 {
                    let mut sub_part = ZERO;
                    let mut proj_part = ZERO;
                    for mu in 0..2 {
                        proj_part += q[mu][cp].conj() * q[mu][cc];
                        for nu in 0..2 {
                            sub_part += q[mu][cp].conj() * sub[mu][nu] * q[nu][cc];
                        }
                    }
                    w[cp][cc] = sub_part + gram[cp][cc] - proj_part;
                }
            }
            let a_mat = a.matrix();
            let mut e_a = ZERO;
            let mut e_b = ZERO;
            let mut e_ab = ZERO;
            for cp in 0..2 {
                e_b += w[cp][cp];
                for cc in 0..2 {
                    e_a += a_mat[cp][cc] * gram[cp][cc];
                    e_ab += a_mat[cp][cc] * w[cp][cc];
                }
            }
            debug_assert!(e_a.im.abs() < 1e-10 && e_b.im.abs() < 1e-10 && e_ab.im.abs() < 1e-10);
            Ok((e_a.re, e_b.re, e_ab.re))
        }
    }
}

/// `E = Σ_k w_k ⟨ψ_k|B⊗A|ψ_k⟩` over the evolved ensemble branches.
pub fn correlator(
    ensemble: &EvolvedEnsemble,
    b: &WalkerObservable,
    a: &CoinObservable,
) -> Result<f64> {
    let mut total = 0.0;
    for (weight, state) in ensemble.branches() {
        let (_, _, e_ab) = branch_expectations(state, b, a)?;
        total += weight * e_ab;
    }
    Ok(total)
}

/// The sixteen observed probabilities for both setting pairs, built from
/// projector expectations on each signed branch and combined with the
/// ensemble weights.
pub fn joint_table(
    ensemble: &EvolvedEnsemble,
    a0: &CoinObservable,
    a1: &CoinObservable,
    b0: &WalkerObservable,
    b1: &WalkerObservable,
    tol: f64,
) -> Result<JointTable> {
    let alice = [a0, a1];
    let bob = [b0, b1];
    let mut rows = [[0.0; 4]; 4];
    for (weight, state) in ensemble.branches() {
        for i in 0..2 {
            for j in 0..2 {
                let (e_a, e_b, e_ab) = branch_expectations(state, bob[j], alice[i])?;
                let row = &mut rows[2 * i + j];
                for (idx, (a, b)) in OUTCOMES.iter().enumerate() {
                    let (af, bf) = (f64::from(*a), f64::from(*b));
                    // Born rule for the product projectors
                    // (I + a A)/2 ⊗ (I + b B)/2 expanded over expectations.
                    row[idx] += weight * 0.25 * (1.0 + af * e_a + bf * e_b + af * bf * e_ab);
                }
            }
        }
    }
    Ok(JointTable { rows, tol })
}

/// Builds the signed ensemble for `prep`, evolves both branches `t_steps`
/// walk steps, and evaluates the full Bell scenario.
pub fn evaluate_witness(
    prep: &BlochVector,
    coin_dirs: (&CoinObservable, &CoinObservable),
    walker_obs: (&WalkerObservable, &WalkerObservable),
    t_steps: usize,
    tol: f64,
) -> Result<(BellReport, JointTable)> {
    let ensemble = signed_decomposition(prep).evolve(t_steps, t_steps)?;
    let table = joint_table(
        &ensemble,
        coin_dirs.0,
        coin_dirs.1,
        walker_obs.0,
        walker_obs.1,
        tol,
    )?;
    Ok((BellReport::from_table(&table), table))
}
