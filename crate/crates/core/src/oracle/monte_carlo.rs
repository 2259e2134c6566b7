//! Monte Carlo estimate of the energy released by displacing the target.
//!
//! For every sampled outcome the post-measurement state is Gaussian with
//! known moments: measured sites sit in coherent states centred on the
//! outcome, unmeasured sites follow the general-dyne conditional law. The
//! local energies `H_{B−1} + H_B + H_{B+1}` are evaluated from those moments
//! with and without the displacement; the difference is the chain energy
//! change caused by the local operation on `B`.
//!
//! If a neighbour of `B` is itself measured, the estimate includes the
//! measurement's disturbance of that bond. The analytic quadratic form keeps
//! ground-state correlators there, so the two only agree when `B±1` are
//! unmeasured.

use std::collections::BTreeMap;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::chain_model::{build_correlations, covariance_from_correlations, ChainParams};
use crate::error::{Error, Result};
use crate::oracle::general_dyne::{general_dyne_update, GeneralDyneUpdate};
use crate::povm_measurement::{outcome_distribution_from, MeasurementSpec, Outcome};
use crate::qet_protocol::DisplacementPlan;

pub const MIN_SAMPLES: usize = 1_000;
const BATCH: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Running mean / sum of squared deviations, merged pairwise.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        if other.count == 0.0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * other.count / count,
            m2: self.m2 + other.m2 + d * d * self.count * other.count / count,
        }
    }
}

/// Phase-space moments of the sites around the target for one outcome.
struct Neighbourhood {
    /// site → local slot
    slots: BTreeMap<usize, usize>,
    /// site of each slot, with its index into the measured list if measured
    kind: Vec<SiteKind>,
    /// conditional covariance (interleaved over slots), outcome independent
    cov: Vec<Vec<f64>>,
    alpha: f64,
    epsilon: f64,
    n_sites: usize,
    target: usize,
}

#[derive(Clone, Copy)]
enum SiteKind {
    Measured(usize),
    /// row offset (q row) into the general-dyne gain
    Unmeasured(usize),
}

impl Neighbourhood {
    fn new(
        params: &ChainParams,
        epsilon: f64,
        spec: &MeasurementSpec,
        update: &GeneralDyneUpdate,
        target: usize,
    ) -> Self {
        let n = params.n_sites();
        let mut slots = BTreeMap::new();
        let mut kind = Vec::new();
        for shift in [n - 2, n - 1, 0, 1, 2] {
            let site = (target + shift) % n;
            if slots.contains_key(&site) {
                continue;
            }
            slots.insert(site, kind.len());
            let k = match spec.measured_sites().iter().position(|&s| s == site) {
                Some(a) => SiteKind::Measured(a),
                None => {
                    let u = update.unmeasured.iter().position(|&s| s == site).unwrap();
                    SiteKind::Unmeasured(2 * u)
                }
            };
            kind.push(k);
        }
        let omega = spec.omega();
        let dim = 2 * kind.len();
        let mut cov = vec![vec![0.0; dim]; dim];
        let cc = update.conditional_covariance.matrix();
        for (i, ki) in kind.iter().enumerate() {
            for (j, kj) in kind.iter().enumerate() {
                for (di, dj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    cov[2 * i + di][2 * j + dj] = match (ki, kj) {
                        (SiteKind::Unmeasured(ri), SiteKind::Unmeasured(rj)) => {
                            cc[(ri + di, rj + dj)]
                        }
                        (SiteKind::Measured(a), SiteKind::Measured(b)) if a == b && di == dj => {
                            if di == 0 {
                                1.0 / (2.0 * omega)
                            } else {
                                omega / 2.0
                            }
                        }
                        _ => 0.0,
                    };
                }
            }
        }
        Self {
            slots,
            kind,
            cov,
            alpha: params.alpha(),
            epsilon,
            n_sites: n,
            target,
        }
    }

    /// Conditional means (interleaved over slots) for an outcome.
    fn means(&self, update: &GeneralDyneUpdate, outcome: &Outcome) -> Vec<f64> {
        let mut r = DVector::zeros(2 * outcome.x.len());
        for a in 0..outcome.x.len() {
            r[2 * a] = outcome.x[a];
            r[2 * a + 1] = outcome.p[a];
        }
        let mut mu = vec![0.0; 2 * self.kind.len()];
        for (slot, k) in self.kind.iter().enumerate() {
            match *k {
                SiteKind::Measured(a) => {
                    mu[2 * slot] = outcome.x[a];
                    mu[2 * slot + 1] = outcome.p[a];
                }
                SiteKind::Unmeasured(row) => {
                    mu[2 * slot] = update.gain.row(row).dot(&r.transpose());
                    mu[2 * slot + 1] = update.gain.row(row + 1).dot(&r.transpose());
                }
            }
        }
        mu
    }

    fn second_moment(&self, mu: &[f64], a: usize, b: usize) -> f64 {
        self.cov[a][b] + mu[a] * mu[b]
    }

    fn local_energy(&self, mu: &[f64], site: usize) -> f64 {
        let n = self.n_sites;
        let s = self.slots[&site];
        let l = self.slots[&((site + n - 1) % n)];
        let r = self.slots[&((site + 1) % n)];
        let (q, p) = (2 * s, 2 * s + 1);
        0.5 * (self.second_moment(mu, p, p) + self.second_moment(mu, q, q)
            - 0.5
                * self.alpha
                * (self.second_moment(mu, q, 2 * l) + self.second_moment(mu, q, 2 * r))
            - self.epsilon)
    }

    fn energy(&self, mu: &[f64]) -> f64 {
        let n = self.n_sites;
        let b = self.target;
        [(b + n - 1) % n, b, (b + 1) % n]
            .iter()
            .map(|&site| self.local_energy(mu, site))
            .sum()
    }
}

/// Mean energy change from applying `plan` at `target_site`, with its
/// standard error. Deterministic for a given `seed` regardless of the number
/// of worker threads.
pub fn monte_carlo_energy(
    params: &ChainParams,
    spec: &MeasurementSpec,
    target_site: usize,
    plan: &DisplacementPlan,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if plan.len() != spec.len() || plan.phi.len() != spec.len() {
        return Err(Error::InvalidParams(format!(
            "plan has {} weights for {} measured sites",
            plan.len(),
            spec.len()
        )));
    }
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidParams(format!(
            "need at least {MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    if target_site >= params.n_sites() {
        return Err(Error::IndexOutOfRange {
            index: target_site,
            len: params.n_sites(),
        });
    }
    if spec.contains(target_site) {
        return Err(Error::TargetMeasured(target_site));
    }

    let corr = build_correlations(params);
    let ground = covariance_from_correlations(&corr);
    let update = general_dyne_update(&ground, spec.measured_sites(), spec.omega())?;
    let dist = outcome_distribution_from(&corr, spec)?;
    let hood = Neighbourhood::new(params, corr.epsilon, spec, &update, target_site);
    let target_slot = hood.slots[&target_site];

    let batches = n_samples.div_ceil(BATCH);
    let per_batch: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let count = BATCH.min(n_samples - batch * BATCH);
            let mut acc = Moments::default();
            for outcome in dist.sampler_with_stream(seed, batch as u64).take(count) {
                let mu = hood.means(&update, &outcome);
                let before = hood.energy(&mu);
                let mut shifted = mu;
                shifted[2 * target_slot] += plan.phi.dot(&outcome.x);
                shifted[2 * target_slot + 1] += plan.theta.dot(&outcome.p);
                acc.push(hood.energy(&shifted) - before);
            }
            acc
        })
        .collect();
    let total = per_batch
        .into_iter()
        .fold(Moments::default(), Moments::merge);
    let variance = total.m2 / (total.count - 1.0);
    Ok(McEstimate {
        mean: total.mean,
        std_error: (variance / total.count).sqrt(),
        n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qet_protocol::{build_quadratics, optimal_plan, optimized_energy};

    #[test]
    fn zero_plan_on_decoupled_chain() {
        let p = ChainParams::new(8, 0.0, 1.0).unwrap();
        let spec = MeasurementSpec::new(&p, vec![0]).unwrap();
        let est = monte_carlo_energy(&p, &spec, 3, &DisplacementPlan::zeros(1), 5_000, 1).unwrap();
        assert!(est.mean.abs() <= 3.0 * est.std_error + 1e-15);
    }

    #[test]
    fn agrees_with_analytic_optimum_on_small_chain() {
        let p = ChainParams::new(10, 0.95, 1.0).unwrap();
        let spec = MeasurementSpec::new(&p, vec![0, 1]).unwrap();
        let q = build_quadratics(&p, &spec, 4).unwrap();
        let plan = optimal_plan(&q).unwrap();
        let exact = optimized_energy(&q).unwrap();
        let est = monte_carlo_energy(&p, &spec, 4, &plan, 200_000, 5).unwrap();
        assert!(
            (est.mean - exact).abs() < 3.0 * est.std_error,
            "{est:?} vs {exact}"
        );

        // a non-optimal plan is also reproduced, so the sign conventions match
        let off = plan.scaled(-0.5, 2.0);
        let est = monte_carlo_energy(&p, &spec, 4, &off, 200_000, 6).unwrap();
        assert!((est.mean - q.energy_of(&off)).abs() < 3.0 * est.std_error);
    }

    #[test]
    fn deterministic_and_validated() {
        let p = ChainParams::new(8, 0.9, 1.0).unwrap();
        let spec = MeasurementSpec::new(&p, vec![0]).unwrap();
        let plan = optimal_plan(&build_quadratics(&p, &spec, 3).unwrap()).unwrap();
        let a = monte_carlo_energy(&p, &spec, 3, &plan, 40_000, 9).unwrap();
        let b = monte_carlo_energy(&p, &spec, 3, &plan, 40_000, 9).unwrap();
        assert_eq!(a, b);
        assert!(monte_carlo_energy(&p, &spec, 3, &plan, 10, 9).is_err());
        assert!(monte_carlo_energy(&p, &spec, 0, &plan, 5_000, 9).is_err());
        assert!(monte_carlo_energy(&p, &spec, 3, &DisplacementPlan::zeros(2), 5_000, 9).is_err());
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (left, right) = xs.split_at(333);
        let mut a = Moments::default();
        let mut b = Moments::default();
        left.iter().for_each(|&x| a.push(x));
        right.iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.m2 - whole.m2).abs() < 1e-9);
    }
}
