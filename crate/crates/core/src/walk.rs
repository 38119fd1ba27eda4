//! Exact simulation of the standard one-dimensional Hadamard coined
//! discrete-time quantum walk on a finite lattice window.
//!
//! One step applies the Hadamard coin to every site's coin pair and then
//! shifts the coin-0 amplitude from `x` to `x - 1` and the coin-1 amplitude
//! from `x` to `x + 1`. The window `x ∈ [-t_max, t_max]` is exact, not a
//! truncation: after `T ≤ t_max` steps from the origin the light cone bounds
//! all support to `|x| ≤ T`, so no amplitude ever reaches the boundary.
//!
//! Tensor ordering is walker ⊗ coin throughout: the amplitude array is
//! walker-major, and all joint observables downstream follow `B ⊗ A` with
//! `B` on the walker and `A` on the coin.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;

use crate::error::{Error, Result};

/// Tolerance for unit-norm checks on constructed states.
pub const NORM_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pure coin–walker state on positions `x ∈ [-t_max, t_max]`.
///
/// Entry `(x + t_max) * 2 + c` of the amplitude vector holds the amplitude on
/// position `x` with coin basis state `c ∈ {0, 1}`. Values are immutable after
/// construction; every operation returns a fresh state, so instances are safe
/// to share read-only across parallel search workers.
///
/// ```
/// use num_complex::Complex64;
/// use walkbell_core::LatticeState;
///
/// let start = LatticeState::localized(2, Complex64::new(1.0, 0.0), Complex64::ZERO).unwrap();
/// let after = start.evolve(2).unwrap();
/// assert!((after.amp(-2, 0).re - 0.5).abs() < 1e-15);
/// assert!((after.amp(2, 1).re + 0.5).abs() < 1e-15);
/// assert_eq!(after.amp(1, 0), Complex64::ZERO); // odd sites stay empty
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    t_max: usize,
    steps_taken: usize,
    amplitudes: Vec<Complex64>,
}

impl LatticeState {
    /// All amplitude mass at the origin with the given coin pair.
    ///
    /// Rejects coin amplitudes whose squared norm differs from 1 by more than
    /// [`NORM_TOL`].
    pub fn localized(t_max: usize, coin_amp0: Complex64, coin_amp1: Complex64) -> Result<Self> {
        let norm_sq = coin_amp0.norm_sqr() + coin_amp1.norm_sqr();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NormalizationViolation {
                norm_sq,
                tol: NORM_TOL,
            });
        }
        let mut amplitudes = vec![ZERO; (2 * t_max + 1) * 2];
        amplitudes[2 * t_max] = coin_amp0;
        amplitudes[2 * t_max + 1] = coin_amp1;
        Ok(Self {
            t_max,
            steps_taken: 0,
            amplitudes,
        })
    }

    /// Builds a state from a raw walker-major amplitude vector of length
    /// `(2 t_max + 1) * 2`.
    ///
    /// Intended for synthetic states (tests, oracles). `steps_taken` is set to
    /// `t_max` so the walk-provenance invariants (light cone, parity) place no
    /// constraint, and the state cannot be stepped further.
    pub fn from_amplitudes(t_max: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let expected = (2 * t_max + 1) * 2;
        if amplitudes.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "amplitude vector has length {}, expected {expected}",
                amplitudes.len()
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NormalizationViolation {
                norm_sq,
                tol: NORM_TOL,
            });
        }
        Ok(Self {
            t_max,
            steps_taken: t_max,
            amplitudes,
        })
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    /// Number of lattice sites, `2 t_max + 1`.
    pub fn width(&self) -> usize {
        2 * self.t_max + 1
    }

    /// Amplitude on position `x`, coin `c`.
    pub fn amp(&self, x: i64, c: usize) -> Complex64 {
        debug_assert!(c < 2);
        let xi = (x + self.t_max as i64) as usize;
        self.amplitudes[2 * xi + c]
    }

    /// The coin pair on site index `xi = x + t_max`.
    pub fn coin_block(&self, xi: usize) -> (Complex64, Complex64) {
        (self.amplitudes[2 * xi], self.amplitudes[2 * xi + 1])
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// One walk step: Hadamard on the coin, then the conditional shift.
    ///
    /// Coin 0 moves left, coin 1 moves right. Fails once the light cone would
    /// touch the window boundary.
    pub fn step(&self) -> Result<Self> {
        if self.steps_taken >= self.t_max {
            return Err(Error::WindowExhausted {
                steps_taken: self.steps_taken,
                requested: 1,
                t_max: self.t_max,
            });
        }
        let w = self.width();
        let mut next = vec![ZERO; w * 2];
        for xi in 0..w {
            let a0 = self.amplitudes[2 * xi];
            let a1 = self.amplitudes[2 * xi + 1];
            if a0 == ZERO && a1 == ZERO {
                continue;
            }
            // Occupied sites are strictly inside the window here: support is
            // bounded by |x| <= steps_taken < t_max.
            let h0 = (a0 + a1) * FRAC_1_SQRT_2;
            let h1 = (a0 - a1) * FRAC_1_SQRT_2;
            next[2 * (xi - 1)] += h0;
            next[2 * (xi + 1) + 1] += h1;
        }
        Ok(Self {
            t_max: self.t_max,
            steps_taken: self.steps_taken + 1,
            amplitudes: next,
        })
    }

    /// `n_steps` successive applications of [`step`](Self::step).
    pub fn evolve(&self, n_steps: usize) -> Result<Self> {
        if self.steps_taken + n_steps > self.t_max {
            return Err(Error::WindowExhausted {
                steps_taken: self.steps_taken,
                requested: n_steps,
                t_max: self.t_max,
            });
        }
        let mut state = self.clone();
        for _ in 0..n_steps {
            state = state.step()?;
        }
        Ok(state)
    }
}

/// Weighted walker position distribution `P(x) = Σ_k w_k Σ_c |amp_k(x,c)|²`.
///
/// Entries may be negative when some weights are negative; values are reported
/// raw, with [`has_negative`](PositionDistribution::has_negative) flagging any
/// entry below zero.
#[derive(Debug, Clone)]
pub struct PositionDistribution {
    t_max: usize,
    probs: Vec<f64>,
    has_negative: bool,
}

impl PositionDistribution {
    pub fn t_max(&self) -> usize {
        self.t_max
    }

    /// Probability (possibly negative for signed ensembles) at position `x`.
    pub fn prob(&self, x: i64) -> f64 {
        self.probs[(x + self.t_max as i64) as usize]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn has_negative(&self) -> bool {
        self.has_negative
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Mean and standard deviation of the position variable.
    pub fn mean_std(&self) -> (f64, f64) {
        let t = self.t_max as i64;
        let mean: f64 = (-t..=t).map(|x| x as f64 * self.prob(x)).sum();
        let var: f64 = (-t..=t)
            .map(|x| (x as f64 - mean).powi(2) * self.prob(x))
            .sum();
        (mean, var.max(0.0).sqrt())
    }

    /// Writes the distribution as CSV with header `x,P`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,P")?;
        let t = self.t_max as i64;
        for x in -t..=t {
            writeln!(out, "{},{}", x, crate::io::format_f64(self.prob(x)))?;
        }
        Ok(())
    }
}

/// Position distribution of a weighted set of states sharing one window.
///
/// Weights must sum to 1 within [`NORM_TOL`]; all states must share `t_max`
/// and `steps_taken`.
pub fn position_distribution<'a, I>(members: I) -> Result<PositionDistribution>
where
    I: IntoIterator<Item = (f64, &'a LatticeState)>,
{
    let mut iter = members.into_iter();
    let (w0, first) = iter
        .next()
        .ok_or_else(|| Error::Domain("position distribution of an empty ensemble".into()))?;
    let width = first.width();
    let mut probs = vec![0.0; width];
    let mut weight_sum = w0;
    accumulate(&mut probs, w0, first);
    for (w, state) in iter {
        if state.t_max != first.t_max || state.steps_taken != first.steps_taken {
            return Err(Error::ShapeMismatch(format!(
                "ensemble member with (t_max, steps) = ({}, {}) differs from ({}, {})",
                state.t_max, state.steps_taken, first.t_max, first.steps_taken
            )));
        }
        weight_sum += w;
        accumulate(&mut probs, w, state);
    }
    if (weight_sum - 1.0).abs() > NORM_TOL {
        return Err(Error::Domain(format!(
            "ensemble weights sum to {weight_sum:.17e}, expected 1 within {NORM_TOL:e}"
        )));
    }
    let has_negative = probs.iter().any(|&p| p < 0.0);
    Ok(PositionDistribution {
        t_max: first.t_max,
        probs,
        has_negative,
    })
}

fn accumulate(probs: &mut [f64], w: f64, state: &LatticeState) {
    for (xi, p) in probs.iter_mut().enumerate() {
        let (a0, a1) = state.coin_block(xi);
        *p += w * (a0.norm_sqr() + a1.norm_sqr());
    }
}
