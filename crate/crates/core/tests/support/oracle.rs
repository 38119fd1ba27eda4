#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

//! Dense-matrix test oracle, independent of the streaming evaluation path.
//!
//! Joint operators are materialized as full `2(2T+1)`-dimensional matrices
//! (walker ⊗ coin, row index `2(x + t_max) + c`) and expectation values taken
//! by direct quadratic forms, so any bookkeeping error in the O(T) kernels
//! shows up as a mismatch here.

use num_complex::Complex64;
use walkbell_core::{CoinObservable, LatticeState, WalkerObservable};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<Complex64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            a: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = ONE;
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.a[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.a[r * self.n + c] = v;
    }

    pub fn mul(&self, other: &Dense) -> Dense {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Dense::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let lhs = self.get(r, k);
                if lhs == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.a[r * n + c] += lhs * other.get(k, c);
                }
            }
        }
        out
    }

    pub fn scale_add(&mut self, other: &Dense, factor: Complex64) {
        assert_eq!(self.n, other.n);
        for (x, y) in self.a.iter_mut().zip(other.a.iter()) {
            *x += factor * y;
        }
    }

    /// Walker ⊗ coin Kronecker product with row index `x * 2 + c`.
    pub fn kron(walker: &Dense, coin: &Dense) -> Dense {
        let n = walker.n * coin.n;
        let mut out = Dense::zeros(n);
        for wr in 0..walker.n {
            for wc in 0..walker.n {
                let b = walker.get(wr, wc);
                if b == ZERO {
                    continue;
                }
                for cr in 0..coin.n {
                    for cc in 0..coin.n {
                        out.set(wr * coin.n + cr, wc * coin.n + cc, b * coin.get(cr, cc));
                    }
                }
            }
        }
        out
    }

    pub fn expectation(&self, psi: &[Complex64]) -> Complex64 {
        assert_eq!(psi.len(), self.n);
        let mut total = ZERO;
        for r in 0..self.n {
            let mut row = ZERO;
            for c in 0..self.n {
                row += self.get(r, c) * psi[c];
            }
            total += psi[r].conj() * row;
        }
        total
    }

    pub fn max_deviation_from_identity(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for r in 0..self.n {
            for c in 0..self.n {
                let expect = if r == c { ONE } else { ZERO };
                dev = dev.max((self.get(r, c) - expect).norm());
            }
        }
        dev
    }
}

pub fn coin_dense(a: &CoinObservable) -> Dense {
    let m = a.matrix();
    let mut out = Dense::zeros(2);
    for r in 0..2 {
        for c in 0..2 {
            out.set(r, c, m[r][c]);
        }
    }
    out
}

pub fn walker_dense(obs: &WalkerObservable) -> Dense {
    match obs {
        WalkerObservable::Diagonal(binning) => {
            let width = 2 * binning.t_max() + 1;
            let mut out = Dense::zeros(width);
            for (xi, &label) in binning.labels().iter().enumerate() {
                out.set(xi, xi, Complex64::new(f64::from(label), 0.0));
            }
            out
        }
        WalkerObservable::Embedded(emb) => {
            let width = 2 * emb.t_max() + 1;
            let basis = emb.basis();
            let sub = emb.sub();
            // Identity on the complement: I - P + sum sub_{mu nu} |b_mu><b_nu|.
            let mut out = Dense::identity(width);
            for mu in 0..2 {
                for nu in 0..2 {
                    let coeff = sub[mu][nu] - if mu == nu { ONE } else { ZERO };
                    if coeff == ZERO {
                        continue;
                    }
                    let mut outer = Dense::zeros(width);
                    for r in 0..width {
                        for c in 0..width {
                            outer.set(r, c, basis[mu][r] * basis[nu][c].conj());
                        }
                    }
                    out.scale_add(&outer, coeff);
                }
            }
            out
        }
    }
}

/// Full joint observable `B ⊗ A` for one setting pair.
pub fn joint_dense(b: &WalkerObservable, a: &CoinObservable) -> Dense {
    Dense::kron(&walker_dense(b), &coin_dense(a))
}

/// The projector-product expectation `⟨(𝕀 + bB)/2 ⊗ (𝕀 + aA)/2⟩` of a pure
/// state, evaluated fully densely.
pub fn dense_outcome_probability(
    state: &LatticeState,
    b: &WalkerObservable,
    a: &CoinObservable,
    a_sign: i8,
    b_sign: i8,
) -> f64 {
    let width = state.width();
    let mut proj_b = Dense::identity(width);
    proj_b.scale_add(&walker_dense(b), Complex64::new(f64::from(b_sign), 0.0));
    for v in proj_b.a.iter_mut() {
        *v *= 0.5;
    }
    let mut proj_a = Dense::identity(2);
    proj_a.scale_add(&coin_dense(a), Complex64::new(f64::from(a_sign), 0.0));
    for v in proj_a.a.iter_mut() {
        *v *= 0.5;
    }
    let joint = Dense::kron(&proj_b, &proj_a);
    let val = joint.expectation(state.amplitudes());
    assert!(val.im.abs() < 1e-12);
    val.re
}

/// Maximal CHSH value of the two-qubit state `s0|00⟩ + s1|11⟩` over planar
/// measurement angles, by dense 4×4 evaluation: coarse grid then cyclic
/// golden-section refinement. Independent of the closed-form construction.
pub fn brute_force_max_chsh(s0: f64, s1: f64) -> f64 {
    let psi = [
        Complex64::new(s0, 0.0),
        ZERO,
        ZERO,
        Complex64::new(s1, 0.0),
    ];
    // State index is 2c + w (coin-major) so the joint operator is A ⊗ B.
    let s_of = |angles: [f64; 4]| -> f64 {
        let e = |ai: usize, bj: usize| {
            let joint = Dense::kron(&planar(angles[ai]), &planar(angles[2 + bj]));
            let v = joint.expectation(&psi);
            assert!(v.im.abs() < 1e-12);
            v.re
        };
        e(0, 0) + e(0, 1) + e(1, 0) - e(1, 1)
    };
    let mut best = f64::NEG_INFINITY;
    let mut best_angles = [0.0; 4];
    let grid = 12;
    let step = std::f64::consts::TAU / grid as f64;
    for i0 in 0..grid {
        for i1 in 0..grid {
            for j0 in 0..grid {
                for j1 in 0..grid {
                    let angles = [
                        i0 as f64 * step,
                        i1 as f64 * step,
                        j0 as f64 * step,
                        j1 as f64 * step,
                    ];
                    let v = s_of(angles);
                    if v > best {
                        best = v;
                        best_angles = angles;
                    }
                }
            }
        }
    }
    // Cyclic golden-section refinement of each angle.
    let mut angles = best_angles;
    for _ in 0..60 {
        for k in 0..4 {
            let f = |x: f64| {
                let mut a = angles;
                a[k] = x;
                s_of(a)
            };
            angles[k] = golden_max(f, angles[k] - step, angles[k] + step);
        }
        let v = s_of(angles);
        if v - best < 1e-13 {
            best = best.max(v);
            break;
        }
        best = v;
    }
    best
}

/// `cos θ σz + sin θ σx` as a dense 2×2.
fn planar(theta: f64) -> Dense {
    let mut m = Dense::zeros(2);
    let (sin, cos) = theta.sin_cos();
    m.set(0, 0, Complex64::new(cos, 0.0));
    m.set(0, 1, Complex64::new(sin, 0.0));
    m.set(1, 0, Complex64::new(sin, 0.0));
    m.set(1, 1, Complex64::new(-cos, 0.0));
    m
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}
