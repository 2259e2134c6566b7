//! Ground state of the periodic harmonic chain
//! `H = 1/2 Σ_j (p_j² + q_j² − α q_j q_{j−1})`.
//!
//! The ground state is Gaussian with `⟨q_i q_j⟩ = g_{|i−j|}` and
//! `⟨p_i p_j⟩ = h_{|i−j|}`, obtained from direct mode sums over the
//! dispersion `ω_k² = 1 − α cos(2πk/N)`. Sites are 0-based.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian_state::CovarianceMatrix;

/// POVM frequency used when none is given.
pub const DEFAULT_OMEGA: f64 = 1.0;

/// Named couplings used in the reference runs.
pub const ALPHA_PRESETS: [(&str, f64); 4] =
    [("a1", 0.90), ("a2", 0.95), ("a3", 0.99), ("a4", 1.0 - 1e-7)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    n_sites: usize,
    alpha: f64,
    omega: f64,
}

impl ChainParams {
    pub fn new(n_sites: usize, alpha: f64, omega: f64) -> Result<Self> {
        if n_sites < 4 || !n_sites.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "n_sites must be even and at least 4, got {n_sites}"
            )));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParams(format!(
                "alpha must lie in [0, 1), got {alpha}"
            )));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "omega must be positive, got {omega}"
            )));
        }
        Ok(Self {
            n_sites,
            alpha,
            omega,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// Translation-invariant ground-state correlators.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlations {
    /// `g[r] = ⟨q_i q_{i+r}⟩`
    pub g: Vec<f64>,
    /// `h[r] = ⟨p_i p_{i+r}⟩`
    pub h: Vec<f64>,
    /// Offset making the expected local energy of every site vanish.
    pub epsilon: f64,
}

impl Correlations {
    pub fn n_sites(&self) -> usize {
        self.g.len()
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        let n = self.g.len();
        (i % n + n - j % n) % n
    }

    /// `⟨q_i q_j⟩` with periodic wrap.
    pub fn qq(&self, i: usize, j: usize) -> f64 {
        self.g[self.offset(i, j)]
    }

    /// `⟨p_i p_j⟩` with periodic wrap.
    pub fn pp(&self, i: usize, j: usize) -> f64 {
        self.h[self.offset(i, j)]
    }
}

/// Normal-mode frequency `ω_k = sqrt(1 − α cos θ_k)`.
pub fn dispersion(params: &ChainParams, k: usize) -> f64 {
    debug_assert!(k < params.n_sites);
    mode_frequency(params.n_sites, params.alpha, k)
}

fn mode_frequency(n_sites: usize, alpha: f64, k: usize) -> f64 {
    let theta = 2.0 * PI * (k % n_sites) as f64 / n_sites as f64;
    (1.0 - alpha * theta.cos()).sqrt()
}

/// Mode sums for an even chain of any size `n_sites ≥ 2`.
///
/// [`build_correlations`] is the entry point for validated parameters; this
/// also admits the two-site chain used by the Fock-space cross-check.
pub fn mode_sum_correlations(n_sites: usize, alpha: f64) -> Result<Correlations> {
    if n_sites < 2 || !n_sites.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "mode sums need an even chain of at least 2 sites, got {n_sites}"
        )));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParams(format!(
            "alpha must lie in [0, 1), got {alpha}"
        )));
    }
    let n = n_sites;
    // cos(2π m / N) for m = 0..N; cos(r θ_k) = table[(r k) mod N].
    let cos_table: Vec<f64> = (0..n)
        .map(|m| (2.0 * PI * m as f64 / n as f64).cos())
        .collect();
    let omegas: Vec<f64> = (0..n).map(|k| mode_frequency(n, alpha, k)).collect();

    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];
    for r in 0..=n / 2 {
        let (mut gs, mut hs) = (0.0, 0.0);
        for (k, &w) in omegas.iter().enumerate() {
            let c = cos_table[(r * k) % n];
            gs += c / (2.0 * w);
            hs += c * w / 2.0;
        }
        g[r] = gs / n as f64;
        h[r] = hs / n as f64;
    }
    // mirror so that g[r] == g[N - r] holds bit for bit
    for r in (n / 2 + 1)..n {
        g[r] = g[n - r];
        h[r] = h[n - r];
    }
    let epsilon = h[0] + g[0] - alpha * g[1];
    Ok(Correlations { g, h, epsilon })
}

pub fn build_correlations(params: &ChainParams) -> Correlations {
    mode_sum_correlations(params.n_sites, params.alpha)
        .expect("ChainParams are validated on construction")
}

/// `(G-block, H-block)` with `G[a][b] = g(row_a − col_b)` and likewise for `H`.
pub fn correlation_submatrices(
    params: &ChainParams,
    row_sites: &[usize],
    col_sites: &[usize],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let corr = build_correlations(params);
    correlation_blocks(&corr, row_sites, col_sites)
}

pub(crate) fn correlation_blocks(
    corr: &Correlations,
    row_sites: &[usize],
    col_sites: &[usize],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = corr.n_sites();
    if let Some(&bad) = row_sites.iter().chain(col_sites).find(|&&s| s >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    let g = DMatrix::from_fn(row_sites.len(), col_sites.len(), |a, b| {
        corr.qq(row_sites[a], col_sites[b])
    });
    let h = DMatrix::from_fn(row_sites.len(), col_sites.len(), |a, b| {
        corr.pp(row_sites[a], col_sites[b])
    });
    Ok((g, h))
}

/// Full-chain ground-state covariance, `qp` blocks zero.
pub fn ground_covariance(params: &ChainParams) -> CovarianceMatrix {
    covariance_from_correlations(&build_correlations(params))
}

pub(crate) fn covariance_from_correlations(corr: &Correlations) -> CovarianceMatrix {
    let n = corr.n_sites();
    let qq = DMatrix::from_fn(n, n, |i, j| corr.qq(i, j));
    let pp = DMatrix::from_fn(n, n, |i, j| corr.pp(i, j));
    CovarianceMatrix::from_blocks(&qq, &pp).expect("correlation matrices are symmetric")
}
