//! Two coupled modes in a truncated number basis.
//!
//! The periodic chain with two sites has `H = ½(p₀² + q₀² + p₁² + q₁²) − α q₀q₁`.
//! In the unit-frequency number basis this is `n₀ + n₁ + 1 − α q₀q₁`, which
//! conserves the parity of `n₀ + n₁`; the ground state lives in the even
//! sector and has real amplitudes, so everything here is real arithmetic.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::gaussian_state::CovarianceMatrix;

pub const DEFAULT_CUTOFF: usize = 25;
pub const MIN_CUTOFF: usize = 10;
/// Largest tolerated marginal population on the highest retained level.
pub const TOP_LEVEL_POPULATION: f64 = 1e-6;

/// Pure two-mode state `Σ ψ[a,b] |a⟩|b⟩`, with `a, b < cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub cutoff: usize,
    pub amplitudes: DMatrix<f64>,
}

/// Ladder-operator combinations on `cutoff + 1` levels, so that applying them
/// to a state supported on the first `cutoff` levels is exact.
struct Quadratures {
    /// `(a + a†)/√2`
    q: DMatrix<f64>,
    /// `(a† − a)/√2`, so that `p = i·d`
    d: DMatrix<f64>,
}

impl Quadratures {
    fn new(levels: usize) -> Self {
        let mut q = DMatrix::zeros(levels, levels);
        let mut d = DMatrix::zeros(levels, levels);
        for n in 1..levels {
            let s = (n as f64 / 2.0).sqrt();
            q[(n - 1, n)] = s;
            q[(n, n - 1)] = s;
            d[(n, n - 1)] = s;
            d[(n - 1, n)] = -s;
        }
        Self { q, d }
    }
}

impl FockState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Product of real coherent states `|c₀⟩|c₁⟩`, truncated and renormalised.
    pub fn coherent_product(cutoff: usize, c0: f64, c1: f64) -> Self {
        let column = |c: f64| {
            let mut v = vec![0.0; cutoff];
            let mut term = (-0.5 * c * c).exp();
            for (n, slot) in v.iter_mut().enumerate() {
                *slot = term;
                term *= c / ((n + 1) as f64).sqrt();
            }
            v
        };
        let (u, v) = (column(c0), column(c1));
        let mut amplitudes = DMatrix::from_fn(cutoff, cutoff, |a, b| u[a] * v[b]);
        let norm = amplitudes.norm();
        amplitudes /= norm;
        Self { cutoff, amplitudes }
    }

    fn padded(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.cutoff + 1, self.cutoff + 1);
        m.view_mut((0, 0), (self.cutoff, self.cutoff))
            .copy_from(&self.amplitudes);
        m
    }

    /// Raw first and second moments: `(means, ⟨r_i r_j⟩ symmetrised)` in
    /// the interleaved order `(q₀, p₀, q₁, p₁)`.
    fn moments(&self) -> ([f64; 4], [[f64; 4]; 4]) {
        let psi = self.padded();
        let ops = Quadratures::new(self.cutoff + 1);
        // mode 0 acts on rows, mode 1 on columns
        let q0 = &ops.q * &psi;
        let d0 = &ops.d * &psi;
        let q1 = &psi * ops.q.transpose();
        let d1 = &psi * ops.d.transpose();

        // ⟨q⟩ = ⟨ψ, Qψ⟩; ⟨p⟩ = i⟨ψ, Dψ⟩ vanishes for real ψ and antisymmetric D.
        let means = [psi.dot(&q0), 0.0, psi.dot(&q1), 0.0];

        // Q symmetric, D antisymmetric, different modes commute:
        // ⟨q_i q_j⟩ = ⟨Q_iψ, Q_jψ⟩, ⟨p_i p_j⟩ = ⟨D_iψ, D_jψ⟩, ⟨{q_i, p_j}⟩/2 = 0.
        let vecs = [&q0, &d0, &q1, &d1];
        let mut second = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let same_kind = i % 2 == j % 2;
                second[i][j] = if same_kind { vecs[i].dot(vecs[j]) } else { 0.0 };
            }
        }
        (means, second)
    }

    /// Centred, symmetrised covariance matrix of the two modes.
    pub fn covariance(&self) -> Result<CovarianceMatrix> {
        let (mu, second) = self.moments();
        let m = DMatrix::from_fn(4, 4, |i, j| second[i][j] - mu[i] * mu[j]);
        CovarianceMatrix::new(m)
    }

    /// `⟨H⟩` for the two-site chain with coupling `alpha`.
    pub fn energy(&self, alpha: f64) -> f64 {
        let (_, s) = self.moments();
        0.5 * (s[0][0] + s[1][1] + s[2][2] + s[3][3]) - alpha * s[0][2]
    }

    /// Marginal populations of the highest retained level of each mode.
    fn top_level_population(&self) -> f64 {
        let top = self.cutoff - 1;
        let row = self.amplitudes.row(top).norm_squared();
        let col = self.amplitudes.column(top).norm_squared();
        row.max(col)
    }
}

/// Ground state of the two-site chain with `cutoff` levels per mode.
pub fn fock_ground_state(alpha: f64, cutoff: usize) -> Result<FockState> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParams(format!(
            "alpha must lie in [0, 1), got {alpha}"
        )));
    }
    if cutoff < MIN_CUTOFF {
        return Err(Error::InvalidParams(format!(
            "cutoff must be at least {MIN_CUTOFF}, got {cutoff}"
        )));
    }
    let basis: Vec<(usize, usize)> = (0..cutoff)
        .flat_map(|a| (0..cutoff).map(move |b| (a, b)))
        .filter(|(a, b)| (a + b) % 2 == 0)
        .collect();
    let index = |a: usize, b: usize| basis.binary_search(&(a, b)).ok();

    let dim = basis.len();
    let mut h = DMatrix::zeros(dim, dim);
    for (col, &(a, b)) in basis.iter().enumerate() {
        h[(col, col)] = (a + b + 1) as f64;
        // −α q₀q₁ = −(α/2)(a₀ + a₀†)(a₁ + a₁†)
        let raise = |n: usize| (n + 1 < cutoff).then(|| (n + 1, ((n + 1) as f64).sqrt()));
        let lower = |n: usize| (n > 0).then(|| (n - 1, (n as f64).sqrt()));
        for (a2, xa) in [raise(a), lower(a)].into_iter().flatten() {
            for (b2, xb) in [raise(b), lower(b)].into_iter().flatten() {
                if let Some(row) = index(a2, b2) {
                    h[(row, col)] -= 0.5 * alpha * xa * xb;
                }
            }
        }
    }

    let eig = SymmetricEigen::new(h);
    let lowest = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .expect("non-empty basis");
    let v = eig.eigenvectors.column(lowest);

    let mut amplitudes = DMatrix::zeros(cutoff, cutoff);
    for (k, &(a, b)) in basis.iter().enumerate() {
        amplitudes[(a, b)] = v[k];
    }
    // fix the global sign so the vacuum amplitude is positive
    if amplitudes[(0, 0)] < 0.0 {
        amplitudes.neg_mut();
    }
    let state = FockState { cutoff, amplitudes };
    let population = state.top_level_population();
    if population > TOP_LEVEL_POPULATION {
        return Err(Error::CutoffTooSmall { cutoff, population });
    }
    Ok(state)
}

/// `log₂ ‖ρ^{T₁}‖₁` from the explicit partial transpose of `|ψ⟩⟨ψ|`.
pub fn fock_log_negativity(state: &FockState) -> Result<f64> {
    let c = state.cutoff;
    let psi = &state.amplitudes;
    let dim = c * c;
    // ρ^{T₁}[(a,b),(a',b')] = ⟨a',b|ρ|a,b'⟩ = ψ[a',b]·ψ[a,b']
    let rho_t = DMatrix::from_fn(dim, dim, |r, s| {
        let (a, b) = (r / c, r % c);
        let (a2, b2) = (s / c, s % c);
        psi[(a2, b)] * psi[(a, b2)]
    });
    let trace_norm: f64 = SymmetricEigen::new(rho_t)
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .sum();
    let norm2 = psi.norm_squared();
    if norm2 <= 0.0 {
        return Err(Error::InvalidParams("zero Fock state".into()));
    }
    Ok((trace_norm / norm2).log2().max(0.0))
}
