//! Coherent-state POVM on a set of chain sites.
//!
//! Each measured site `n` is projected onto coherent states of
//! `b_n = sqrt(ω/2) q_n + i p_n / sqrt(2ω)` with outcome `(X_n, P_n)`. Splitting
//! the ground-state correlators into measured (`L`, `C`), cross (`K`, `D`) and
//! unmeasured (`H_u`, `G_u`) blocks, the unmeasured sites are left in a pure
//! Gaussian state with momentum covariance
//!
//! `M = H_u − Kᵀ (L + ω/2)⁻¹ K`
//!
//! and position covariance `¼ M⁻¹`, independent of the outcome. Measured sites
//! end up in coherent states with variances `1/(2ω)` and `ω/2`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::chain_model::{build_correlations, correlation_blocks, ChainParams, Correlations};
use crate::error::{Error, Result};
use crate::gaussian_state::CovarianceMatrix;
use crate::linalg::{cholesky, symmetrize, validate_subset};

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSpec {
    measured_sites: Vec<usize>,
    omega: f64,
    n_sites: usize,
}

impl MeasurementSpec {
    /// Measures `sites` (any distinct subset leaving at least one site
    /// unmeasured) at the POVM frequency of `params`.
    pub fn new(params: &ChainParams, sites: Vec<usize>) -> Result<Self> {
        let n = params.n_sites();
        validate_subset(&sites, n).map_err(|e| Error::InvalidMeasurement(e.to_string()))?;
        if sites.len() >= n {
            return Err(Error::InvalidMeasurement(
                "at least one site must stay unmeasured".into(),
            ));
        }
        Ok(Self {
            measured_sites: sites,
            omega: params.omega(),
            n_sites: n,
        })
    }

    /// The contiguous block `0..=2ℓ` with `1 ≤ ℓ ≤ N/2 − 2`.
    pub fn centered_block(params: &ChainParams, ell: usize) -> Result<Self> {
        let n = params.n_sites();
        if ell < 1 || ell + 2 > n / 2 {
            return Err(Error::InvalidMeasurement(format!(
                "ell must satisfy 1 <= ell <= N/2 - 2 (N = {n}), got {ell}"
            )));
        }
        Self::new(params, (0..=2 * ell).collect())
    }

    pub fn measured_sites(&self) -> &[usize] {
        &self.measured_sites
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.measured_sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measured_sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.measured_sites.contains(&site)
    }

    /// Unmeasured sites in ascending order; this is the row order of `M`.
    pub fn unmeasured_sites(&self) -> Vec<usize> {
        (0..self.n_sites).filter(|s| !self.contains(*s)).collect()
    }

    fn check_chain(&self, params: &ChainParams) -> Result<()> {
        if params.n_sites() != self.n_sites {
            return Err(Error::InvalidMeasurement(format!(
                "measurement built for {} sites used on a chain of {}",
                self.n_sites,
                params.n_sites()
            )));
        }
        Ok(())
    }
}

/// Zero-mean Gaussian law of the outcomes: `X ~ N(0, C + 1/(2ω))`,
/// `P ~ N(0, L + ω/2)`, independent of each other.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    x_covariance: DMatrix<f64>,
    p_covariance: DMatrix<f64>,
    x_factor: DMatrix<f64>,
    p_factor: DMatrix<f64>,
}

impl OutcomeDistribution {
    pub fn x_covariance(&self) -> &DMatrix<f64> {
        &self.x_covariance
    }

    pub fn p_covariance(&self) -> &DMatrix<f64> {
        &self.p_covariance
    }

    pub fn dim(&self) -> usize {
        self.x_covariance.nrows()
    }

    /// Outcomes are always zero-mean.
    pub fn means(&self) -> (DVector<f64>, DVector<f64>) {
        (DVector::zeros(self.dim()), DVector::zeros(self.dim()))
    }

    /// Deterministic stream of outcomes for `seed`.
    pub fn sampler(&self, seed: u64) -> OutcomeSampler<'_> {
        OutcomeSampler {
            dist: self,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub(crate) fn sampler_with_stream(&self, seed: u64, stream: u64) -> OutcomeSampler<'_> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        OutcomeSampler { dist: self, rng }
    }
}

/// One POVM outcome `(X, P)` over the measured sites, in measurement order.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub x: DVector<f64>,
    pub p: DVector<f64>,
}

pub struct OutcomeSampler<'a> {
    dist: &'a OutcomeDistribution,
    rng: ChaCha8Rng,
}

impl Iterator for OutcomeSampler<'_> {
    type Item = Outcome;

    fn next(&mut self) -> Option<Outcome> {
        let n = self.dist.dim();
        let zx = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut self.rng));
        let zp = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut self.rng));
        Some(Outcome {
            x: &self.dist.x_factor * zx,
            p: &self.dist.p_factor * zp,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PostMeasurementState {
    /// Full-chain covariance after the measurement (outcome independent).
    pub covariance: CovarianceMatrix,
    /// Momentum covariance `M` of the unmeasured sites.
    pub m_matrix: DMatrix<f64>,
    /// Site order of the rows of `m_matrix`.
    pub unmeasured_sites: Vec<usize>,
}

struct Blocks {
    /// `L`, momentum correlations among measured sites
    l: DMatrix<f64>,
    /// `C`, position correlations among measured sites
    c: DMatrix<f64>,
    /// `K`, measured × unmeasured momentum correlations
    k: DMatrix<f64>,
    /// `H_u`
    h_u: DMatrix<f64>,
}

fn blocks(corr: &Correlations, spec: &MeasurementSpec) -> Blocks {
    let a = spec.measured_sites();
    let u = spec.unmeasured_sites();
    let (c, l) = correlation_blocks(corr, a, a).expect("validated sites");
    let (_, k) = correlation_blocks(corr, a, &u).expect("validated sites");
    let (_, h_u) = correlation_blocks(corr, &u, &u).expect("validated sites");
    Blocks { l, c, k, h_u }
}

pub(crate) fn m_matrix_from(corr: &Correlations, spec: &MeasurementSpec) -> Result<DMatrix<f64>> {
    let b = blocks(corr, spec);
    let shifted = &b.l + DMatrix::identity(spec.len(), spec.len()) * (spec.omega() / 2.0);
    let factor = cholesky(&shifted, "L + ω/2")?;
    let mut m = &b.h_u - b.k.transpose() * factor.solve(&b.k);
    symmetrize(&mut m);
    Ok(m)
}

/// `M = H_u − Kᵀ (L + ω/2)⁻¹ K` over the unmeasured sites.
pub fn build_m_matrix(params: &ChainParams, spec: &MeasurementSpec) -> Result<DMatrix<f64>> {
    spec.check_chain(params)?;
    m_matrix_from(&build_correlations(params), spec)
}

pub(crate) fn post_measurement_from(
    corr: &Correlations,
    spec: &MeasurementSpec,
) -> Result<PostMeasurementState> {
    let n = corr.n_sites();
    let omega = spec.omega();
    let m = m_matrix_from(corr, spec)?;
    let mut m_inv = cholesky(&m, "M")?.inverse();
    symmetrize(&mut m_inv);

    let mut qq = DMatrix::zeros(n, n);
    let mut pp = DMatrix::zeros(n, n);
    for &s in spec.measured_sites() {
        qq[(s, s)] = 1.0 / (2.0 * omega);
        pp[(s, s)] = omega / 2.0;
    }
    let u = spec.unmeasured_sites();
    for (a, &i) in u.iter().enumerate() {
        for (b, &j) in u.iter().enumerate() {
            qq[(i, j)] = 0.25 * m_inv[(a, b)];
            pp[(i, j)] = m[(a, b)];
        }
    }
    Ok(PostMeasurementState {
        covariance: CovarianceMatrix::from_blocks(&qq, &pp)?,
        m_matrix: m,
        unmeasured_sites: u,
    })
}

pub fn post_measurement_covariance(
    params: &ChainParams,
    spec: &MeasurementSpec,
) -> Result<PostMeasurementState> {
    spec.check_chain(params)?;
    post_measurement_from(&build_correlations(params), spec)
}

pub(crate) fn outcome_distribution_from(
    corr: &Correlations,
    spec: &MeasurementSpec,
) -> Result<OutcomeDistribution> {
    let b = blocks(corr, spec);
    let id = DMatrix::<f64>::identity(spec.len(), spec.len());
    let x_covariance = &b.c + &id * (1.0 / (2.0 * spec.omega()));
    let p_covariance = &b.l + &id * (spec.omega() / 2.0);
    let x_factor = cholesky(&x_covariance, "C + 1/(2ω)")?.l();
    let p_factor = cholesky(&p_covariance, "L + ω/2")?.l();
    Ok(OutcomeDistribution {
        x_covariance,
        p_covariance,
        x_factor,
        p_factor,
    })
}

pub fn outcome_distribution(
    params: &ChainParams,
    spec: &MeasurementSpec,
) -> Result<OutcomeDistribution> {
    spec.check_chain(params)?;
    outcome_distribution_from(&build_correlations(params), spec)
}

/// Draws `count` outcomes; identical `(seed, count)` gives identical samples.
pub fn sample_outcomes(dist: &OutcomeDistribution, seed: u64, count: usize) -> Vec<Outcome> {
    dist.sampler(seed).take(count).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian_state::{reduce, symplectic_eigenvalues};
    use crate::linalg::max_abs_diff;

    fn params(n: usize, alpha: f64, omega: f64) -> ChainParams {
        ChainParams::new(n, alpha, omega).unwrap()
    }

    #[test]
    fn spec_validation() {
        let p = params(8, 0.5, 1.0);
        assert!(MeasurementSpec::new(&p, vec![]).is_err());
        assert!(MeasurementSpec::new(&p, vec![1, 1]).is_err());
        assert!(MeasurementSpec::new(&p, vec![8]).is_err());
        assert!(MeasurementSpec::new(&p, (0..8).collect()).is_err());
        assert!(MeasurementSpec::centered_block(&p, 0).is_err());
        assert!(MeasurementSpec::centered_block(&p, 3).is_err());
        let s = MeasurementSpec::centered_block(&p, 2).unwrap();
        assert_eq!(s.measured_sites(), &[0, 1, 2, 3, 4]);
        assert_eq!(s.unmeasured_sites(), vec![5, 6, 7]);
    }

    #[test]
    fn decoupled_chain_is_untouched() {
        let p = params(6, 0.0, 1.0);
        let spec = MeasurementSpec::new(&p, vec![0, 2]).unwrap();
        let m = build_m_matrix(&p, &spec).unwrap();
        assert!(max_abs_diff(&m, &(DMatrix::identity(4, 4) * 0.5)) < 1e-15);
        let post = post_measurement_covariance(&p, &spec).unwrap();
        let vac = CovarianceMatrix::vacuum(6);
        assert!(max_abs_diff(post.covariance.matrix(), vac.matrix()) < 1e-15);
        let dist = outcome_distribution(&p, &spec).unwrap();
        assert!(max_abs_diff(dist.x_covariance(), &DMatrix::identity(2, 2)) < 1e-15);
        assert!(max_abs_diff(dist.p_covariance(), &DMatrix::identity(2, 2)) < 1e-15);
    }

    #[test]
    fn four_site_outcome_variance() {
        let p = params(4, 0.9, 1.0);
        let spec = MeasurementSpec::new(&p, vec![0]).unwrap();
        let dist = outcome_distribution(&p, &spec).unwrap();
        assert!((dist.x_covariance()[(0, 0)] - 1.2359692).abs() < 1e-7);
    }

    #[test]
    fn m_is_symmetric_and_state_is_pure() {
        for &(n, alpha, omega) in &[(4, 0.9, 1.0), (10, 0.99, 0.5), (12, 1.0 - 1e-7, 2.0)] {
            let p = params(n, alpha, omega);
            let spec = MeasurementSpec::new(&p, vec![0, 1, 3]).unwrap();
            let post = post_measurement_covariance(&p, &spec).unwrap();
            let m = &post.m_matrix;
            assert!(crate::linalg::max_asymmetry(m) < 1e-12);

            let u = &post.unmeasured_sites;
            let block = reduce(&post.covariance, u).unwrap();
            for nu in symplectic_eigenvalues(&block).unwrap().values() {
                assert!((nu - 0.5).abs() < 1e-8, "{nu}");
            }
            let qq = DMatrix::from_fn(u.len(), u.len(), |a, b| post.covariance.qq(u[a], u[b]));
            let prod = qq * m - DMatrix::identity(u.len(), u.len()) * 0.25;
            assert!(prod.abs().max() < 1e-10);

            for &s in spec.measured_sites() {
                assert_eq!(post.covariance.qq(s, s), 1.0 / (2.0 * omega));
                assert_eq!(post.covariance.pp(s, s), omega / 2.0);
                for &t in u {
                    assert_eq!(post.covariance.qq(s, t), 0.0);
                    assert_eq!(post.covariance.pp(s, t), 0.0);
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = params(8, 0.9, 1.0);
        let spec = MeasurementSpec::new(&p, vec![0, 1]).unwrap();
        let dist = outcome_distribution(&p, &spec).unwrap();
        assert_eq!(sample_outcomes(&dist, 7, 50), sample_outcomes(&dist, 7, 50));
        assert_ne!(sample_outcomes(&dist, 7, 5), sample_outcomes(&dist, 8, 5));
    }

    #[test]
    fn sample_moments() {
        let count = 100_000;
        for &(alpha, expect) in &[(0.0, 1.0), (0.9, 1.2359692)] {
            let p = params(4, alpha, 1.0);
            let spec = MeasurementSpec::new(&p, vec![0]).unwrap();
            let dist = outcome_distribution(&p, &spec).unwrap();
            let samples = sample_outcomes(&dist, 11, count);
            let mean_x = samples.iter().map(|o| o.x[0]).sum::<f64>() / count as f64;
            let mean_p = samples.iter().map(|o| o.p[0]).sum::<f64>() / count as f64;
            let var_x = samples.iter().map(|o| o.x[0] * o.x[0]).sum::<f64>() / count as f64;
            let var_p = dist.p_covariance()[(0, 0)];
            assert!(mean_x.abs() < 4.0 * (expect / count as f64).sqrt());
            assert!(mean_p.abs() < 4.0 * (var_p / count as f64).sqrt());
            assert!((var_x / expect - 1.0).abs() < 0.05);
        }
    }
}
