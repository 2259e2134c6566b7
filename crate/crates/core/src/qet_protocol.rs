//! Energy extraction at the target site and the per-run protocol report.
//!
//! Given outcomes `(X, P)` on the measured sites, the target `B` is displaced
//! by `q_B → q_B + φ·X`, `p_B → p_B + θ·P`. Averaged over outcomes the energy
//! change is the quadratic form
//!
//! `½ θᵀ T_p θ + J_p·θ + ½ φᵀ T_q φ + J_q·φ`
//!
//! with `T_p = h(j−k) + ω/2·δ`, `T_q = g(j−k) + 1/(2ω)·δ`, `J_p = h(j−B)` and
//! `J_q = g(j−B) − α/2·(g(j−B+1) + g(j−B−1))`. The neighbour term is the full
//! chain-energy change caused by moving `q_B`, which includes the two bonds
//! shared with `B±1`. Its minimum is `−½ J_pᵀT_p⁻¹J_p − ½ J_qᵀT_q⁻¹J_q`.

use nalgebra::{DMatrix, DVector};

use crate::chain_model::{build_correlations, correlation_blocks, ChainParams, Correlations};
use crate::error::{Error, Result};
use crate::gaussian_state::{
    entropy_function, log_negativity, mutual_information, pure_single_mode_log_negativity, reduce,
    CovarianceMatrix,
};
use crate::linalg::{cholesky, inverse_quadratic_form};
use crate::povm_measurement::{post_measurement_from, MeasurementSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementPlan {
    /// Momentum kick weights, `p_B += θ·P`.
    pub theta: DVector<f64>,
    /// Position shift weights, `q_B += φ·X`.
    pub phi: DVector<f64>,
}

impl DisplacementPlan {
    pub fn zeros(len: usize) -> Self {
        Self {
            theta: DVector::zeros(len),
            phi: DVector::zeros(len),
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn scaled(&self, theta_scale: f64, phi_scale: f64) -> Self {
        Self {
            theta: &self.theta * theta_scale,
            phi: &self.phi * phi_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QetQuadratics {
    pub t_p: DMatrix<f64>,
    pub t_q: DMatrix<f64>,
    pub j_p: DVector<f64>,
    pub j_q: DVector<f64>,
}

impl QetQuadratics {
    /// Outcome-averaged energy change of `plan` (no optimisation).
    pub fn energy_of(&self, plan: &DisplacementPlan) -> f64 {
        let th = &plan.theta;
        let ph = &plan.phi;
        0.5 * th.dot(&(&self.t_p * th))
            + self.j_p.dot(th)
            + 0.5 * ph.dot(&(&self.t_q * ph))
            + self.j_q.dot(ph)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QetReport {
    pub target_site: usize,
    /// `⟨H_B⟩_opt ≤ 0` in chain units.
    pub optimized_energy: f64,
    pub plan: DisplacementPlan,
    pub e_n_before: f64,
    pub e_n_after: f64,
    pub delta_log_negativity: f64,
    pub s_m_before: f64,
    pub s_m_after: f64,
    pub delta_mutual_information: f64,
}

fn check_target(spec: &MeasurementSpec, target: usize) -> Result<()> {
    if target >= spec.n_sites() {
        return Err(Error::IndexOutOfRange {
            index: target,
            len: spec.n_sites(),
        });
    }
    if spec.contains(target) {
        return Err(Error::TargetMeasured(target));
    }
    Ok(())
}

pub(crate) fn quadratics_from(
    corr: &Correlations,
    alpha: f64,
    spec: &MeasurementSpec,
    target: usize,
) -> Result<QetQuadratics> {
    check_target(spec, target)?;
    let n = corr.n_sites();
    let omega = spec.omega();
    let a = spec.measured_sites();
    let (c, l) = correlation_blocks(corr, a, a)?;
    let id = DMatrix::<f64>::identity(a.len(), a.len());
    let left = (target + n - 1) % n;
    let right = (target + 1) % n;
    Ok(QetQuadratics {
        t_p: l + &id * (omega / 2.0),
        t_q: c + &id * (1.0 / (2.0 * omega)),
        j_p: DVector::from_iterator(a.len(), a.iter().map(|&j| corr.pp(j, target))),
        j_q: DVector::from_iterator(
            a.len(),
            a.iter().map(|&j| {
                corr.qq(j, target) - 0.5 * alpha * (corr.qq(j, left) + corr.qq(j, right))
            }),
        ),
    })
}

pub fn build_quadratics(
    params: &ChainParams,
    spec: &MeasurementSpec,
    target_site: usize,
) -> Result<QetQuadratics> {
    quadratics_from(
        &build_correlations(params),
        params.alpha(),
        spec,
        target_site,
    )
}

/// `θ = −T_p⁻¹ J_p`, `φ = −T_q⁻¹ J_q`.
pub fn optimal_plan(quadratics: &QetQuadratics) -> Result<DisplacementPlan> {
    let fp = cholesky(&quadratics.t_p, "T_p")?;
    let fq = cholesky(&quadratics.t_q, "T_q")?;
    Ok(DisplacementPlan {
        theta: -fp.solve(&quadratics.j_p),
        phi: -fq.solve(&quadratics.j_q),
    })
}

/// `−½ J_pᵀT_p⁻¹J_p − ½ J_qᵀT_q⁻¹J_q`, never positive.
pub fn optimized_energy(quadratics: &QetQuadratics) -> Result<f64> {
    let fp = cholesky(&quadratics.t_p, "T_p")?;
    let fq = cholesky(&quadratics.t_q, "T_q")?;
    Ok(-0.5 * inverse_quadratic_form(&fp, &quadratics.j_p)
        - 0.5 * inverse_quadratic_form(&fq, &quadratics.j_q))
}

/// Single measured site `A = 0`, single target `B = d + 1`; `d` counts the
/// sites strictly between them, so `d = 0` means nearest neighbours.
pub struct Setting1 {
    params: ChainParams,
    corr: Correlations,
    ground: CovarianceMatrix,
    after: CovarianceMatrix,
    spec: MeasurementSpec,
}

impl Setting1 {
    pub const MEASURED_SITE: usize = 0;

    pub fn new(params: &ChainParams) -> Result<Self> {
        let corr = build_correlations(params);
        let spec = MeasurementSpec::new(params, vec![Self::MEASURED_SITE])?;
        let after = post_measurement_from(&corr, &spec)?.covariance;
        Ok(Self {
            params: *params,
            ground: crate::chain_model::covariance_from_correlations(&corr),
            corr,
            after,
            spec,
        })
    }

    pub fn target_site(&self, d: usize) -> Result<usize> {
        let b = d + 1;
        if b >= self.params.n_sites() {
            return Err(Error::InvalidParams(format!(
                "separation {d} puts B on A (or beyond) for N = {}",
                self.params.n_sites()
            )));
        }
        Ok(b)
    }

    pub fn run(&self, d: usize) -> Result<QetReport> {
        let b = self.target_site(d)?;
        let a = Self::MEASURED_SITE;
        let q = quadratics_from(&self.corr, self.params.alpha(), &self.spec, b)?;

        let pair_before = reduce(&self.ground, &[a, b])?;
        let pair_after = reduce(&self.after, &[a, b])?;
        let e_n_before = log_negativity(&pair_before, &[1])?;
        let e_n_after = log_negativity(&pair_after, &[1])?;
        let s_m_before = mutual_information(&self.ground, &[a], &[b])?;
        let s_m_after = mutual_information(&self.after, &[a], &[b])?;

        Ok(QetReport {
            target_site: b,
            optimized_energy: optimized_energy(&q)?,
            plan: optimal_plan(&q)?,
            e_n_before,
            e_n_after,
            delta_log_negativity: e_n_before - e_n_after,
            s_m_before,
            s_m_after,
            delta_mutual_information: s_m_before - s_m_after,
        })
    }
}

pub fn run_setting1(params: &ChainParams, d: usize) -> Result<QetReport> {
    Setting1::new(params)?.run(d)
}

/// Target site `N/2 + ℓ` for the measured block `0..=2ℓ`.
pub fn setting2_target(params: &ChainParams, ell: usize) -> usize {
    params.n_sites() / 2 + ell
}

/// Reduction of the target's variances caused by the measurement,
/// `(Δ⟨q_B²⟩, Δ⟨p_B²⟩) = (g_Bᵀ T_q⁻¹ g_B, h_Bᵀ T_p⁻¹ h_B)` with
/// `g_B = g(j − B)`, `h_B = h(j − B) = J_p`.
///
/// These are Schur-complement corrections evaluated directly, so they keep
/// full relative precision even when they are many orders of magnitude below
/// `g₀`, `h₀`.
pub(crate) fn target_variance_reduction(
    corr: &Correlations,
    spec: &MeasurementSpec,
    quadratics: &QetQuadratics,
    target: usize,
) -> Result<(f64, f64)> {
    let a = spec.measured_sites();
    let g_b = DVector::from_iterator(a.len(), a.iter().map(|&j| corr.qq(j, target)));
    let dq = inverse_quadratic_form(&cholesky(&quadratics.t_q, "T_q")?, &g_b);
    let dp = inverse_quadratic_form(&cholesky(&quadratics.t_p, "T_p")?, &quadratics.j_p);
    Ok((dq, dp))
}

/// `log₂(u₀/u₁)` for `u(s) = 2√s + √(4s − 1)` and `s₁ = s₀ − Δ`, without
/// subtracting nearly equal numbers.
fn log_negativity_drop(s0: f64, delta: f64) -> f64 {
    let s1 = s0 - delta;
    let u1 = 2.0 * s1.sqrt() + (4.0 * s1 - 1.0).max(0.0).sqrt();
    let du = 2.0 * delta / (s0.sqrt() + s1.sqrt())
        + 4.0 * delta / ((4.0 * s0 - 1.0).max(0.0).sqrt() + (4.0 * s1 - 1.0).max(0.0).sqrt());
    (du / u1).ln_1p() / std::f64::consts::LN_2
}

/// Measured block `0..=2ℓ`, party `A` = every site except `B = N/2 + ℓ`.
///
/// The chain is in a pure state before and after the measurement and `B` is a
/// single mode, so `E_N(A:B)` and `S_M(A:B)` depend only on the reduced
/// symplectic eigenvalue of `B`; `ΔE_N` is evaluated from the variance
/// reductions of [`target_variance_reduction`].
pub fn run_setting2(params: &ChainParams, ell: usize) -> Result<QetReport> {
    let spec = MeasurementSpec::centered_block(params, ell)?;
    let corr = build_correlations(params);
    let b = setting2_target(params, ell);
    let q = quadratics_from(&corr, params.alpha(), &spec, b)?;

    let (g0, h0) = (corr.g[0], corr.h[0]);
    let (dq, dp) = target_variance_reduction(&corr, &spec, &q, b)?;
    let s0 = g0 * h0;
    let delta = g0 * dp + h0 * dq - dq * dp;
    let s1 = s0 - delta;

    let e_n_before = pure_single_mode_log_negativity(s0.sqrt());
    let e_n_after = pure_single_mode_log_negativity(s1.sqrt());
    let s_m_before = 2.0 * entropy_function(s0.sqrt());
    let s_m_after = 2.0 * entropy_function(s1.sqrt());

    Ok(QetReport {
        target_site: b,
        optimized_energy: optimized_energy(&q)?,
        plan: optimal_plan(&q)?,
        e_n_before,
        e_n_after,
        delta_log_negativity: log_negativity_drop(s0, delta),
        s_m_before,
        s_m_after,
        delta_mutual_information: s_m_before - s_m_after,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_model::ground_covariance;
    use crate::povm_measurement::post_measurement_covariance;
    use proptest::prelude::*;

    const A4: f64 = 1.0 - 1e-7;

    fn params(n: usize, alpha: f64) -> ChainParams {
        ChainParams::new(n, alpha, 1.0).unwrap()
    }

    #[test]
    fn decoupled_chain_has_nothing_to_extract() {
        let p = params(8, 0.0);
        let spec = MeasurementSpec::new(&p, vec![0, 1]).unwrap();
        let q = build_quadratics(&p, &spec, 5).unwrap();
        assert!(q.j_p.amax() < 1e-15 && q.j_q.amax() < 1e-15);
        let plan = optimal_plan(&q).unwrap();
        assert!(plan.theta.amax() < 1e-15 && plan.phi.amax() < 1e-15);
        assert!(optimized_energy(&q).unwrap().abs() < 1e-30);
    }

    #[test]
    fn four_site_quadratics() {
        let p = params(4, 0.9);
        let spec = MeasurementSpec::new(&p, vec![0]).unwrap();
        let q = build_quadratics(&p, &spec, 2).unwrap();
        assert!((q.t_p[(0, 0)] - 0.9618291).abs() < 1e-7);
        assert!(matches!(
            build_quadratics(&p, &spec, 0),
            Err(Error::TargetMeasured(0))
        ));
    }

    #[test]
    fn coupling_entries_depend_on_distance_only() {
        let p = params(20, 0.95);
        let spec = MeasurementSpec::new(&p, vec![2, 5, 17]).unwrap();
        let q = build_quadratics(&p, &spec, 10).unwrap();
        let shifted = MeasurementSpec::new(&p, vec![5, 8, 0]).unwrap();
        let qs = build_quadratics(&p, &shifted, 13).unwrap();
        assert!((&q.j_p - &qs.j_p).abs().max() < 1e-15);
        assert!((&q.j_q - &qs.j_q).abs().max() < 1e-15);
    }

    #[test]
    fn optimum_is_stationary_and_consistent() {
        let p = params(16, 0.99);
        let spec = MeasurementSpec::new(&p, vec![0, 1, 2]).unwrap();
        let q = build_quadratics(&p, &spec, 9).unwrap();
        let plan = optimal_plan(&q).unwrap();
        let grad_p = &q.t_p * &plan.theta + &q.j_p;
        let grad_q = &q.t_q * &plan.phi + &q.j_q;
        assert!(grad_p.abs().max() < 1e-9 && grad_q.abs().max() < 1e-9);
        let e = optimized_energy(&q).unwrap();
        assert!(e < 0.0);
        assert!((q.energy_of(&plan) - e).abs() < 1e-10);
        assert!(q.energy_of(&plan.scaled(1.1, 1.0)) > e);
        assert!(q.energy_of(&plan.scaled(1.0, 0.9)) > e);
    }

    #[test]
    fn setting1_separability() {
        let s1 = Setting1::new(&params(100, A4)).unwrap();
        let adjacent = s1.run(0).unwrap();
        assert!(adjacent.e_n_before > 0.0);
        assert!(adjacent.e_n_after < 1e-10);
        assert!(adjacent.s_m_after.abs() < 1e-10);
        for d in [1, 2, 7, 30] {
            let r = s1.run(d).unwrap();
            assert!(r.e_n_before < 1e-10 && r.e_n_after < 1e-10, "d={d}");
            assert!(r.optimized_energy < 0.0);
            assert_eq!(r.target_site, d + 1);
        }
        assert!(s1.run(99).is_err());
    }

    #[test]
    fn setting2_shortcut_matches_general_measures() {
        let p = params(30, A4);
        for ell in [1, 6, 13] {
            let r = run_setting2(&p, ell).unwrap();
            let b = setting2_target(&p, ell);
            let before = ground_covariance(&p);
            let spec = MeasurementSpec::centered_block(&p, ell).unwrap();
            let after = post_measurement_covariance(&p, &spec).unwrap().covariance;
            let e0 = log_negativity(&before, &[b]).unwrap();
            let e1 = log_negativity(&after, &[b]).unwrap();
            assert!((r.e_n_before - e0).abs() < 1e-8, "{} vs {e0}", r.e_n_before);
            assert!((r.e_n_after - e1).abs() < 1e-8, "{} vs {e1}", r.e_n_after);
            assert!((r.delta_log_negativity - (e0 - e1)).abs() < 1e-8);

            let a: Vec<usize> = (0..30).filter(|&s| s != b).collect();
            let m1 = mutual_information(&after, &a, &[b]).unwrap();
            assert!((r.s_m_after - m1).abs() < 1e-6);
        }
    }

    #[test]
    fn variance_reduction_matches_post_measurement_block() {
        let p = params(24, 0.95);
        let corr = build_correlations(&p);
        let spec = MeasurementSpec::centered_block(&p, 4).unwrap();
        let b = setting2_target(&p, 4);
        let q = quadratics_from(&corr, p.alpha(), &spec, b).unwrap();
        let (dq, dp) = target_variance_reduction(&corr, &spec, &q, b).unwrap();
        let after = post_measurement_from(&corr, &spec).unwrap().covariance;
        assert!((corr.g[0] - dq - after.qq(b, b)).abs() < 1e-12);
        assert!((corr.h[0] - dp - after.pp(b, b)).abs() < 1e-12);
    }

    #[test]
    fn negativity_drop_is_stable() {
        let s0: f64 = 0.4;
        for delta in [1e-3, 1e-9, 1e-20] {
            let direct = pure_single_mode_log_negativity(s0.sqrt())
                - pure_single_mode_log_negativity((s0 - delta).sqrt());
            let stable = log_negativity_drop(s0, delta);
            if delta > 1e-10 {
                assert!((stable / direct - 1.0).abs() < 1e-5);
            }
            assert!(stable > 0.0);
        }
        // linear regime: dE/ds at s0
        let slope = (1.0 / s0.sqrt() + 2.0 / (4.0 * s0 - 1.0).sqrt())
            / (2.0 * s0.sqrt() + (4.0 * s0 - 1.0).sqrt())
            / std::f64::consts::LN_2;
        assert!((log_negativity_drop(s0, 1e-20) / (slope * 1e-20) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn setting2_range() {
        let p = params(20, 0.9);
        assert!(run_setting2(&p, 0).is_err());
        assert!(run_setting2(&p, 9).is_err());
        let r = run_setting2(&p, 8).unwrap();
        assert!(r.delta_log_negativity > 0.0 && r.optimized_energy < 0.0);
    }

    proptest! {
        #[test]
        fn optimized_energy_is_never_positive(
            n in (2usize..10).prop_map(|k| 2 * k),
            alpha in 0.0f64..0.9999,
            omega in 0.2f64..5.0,
            first in 0usize..20,
            target_offset in 1usize..20,
        ) {
            let p = ChainParams::new(n, alpha, omega).unwrap();
            let a = first % n;
            let b = (a + 1 + target_offset % (n - 1)) % n;
            let spec = MeasurementSpec::new(&p, vec![a]).unwrap();
            let q = build_quadratics(&p, &spec, b).unwrap();
            let e = optimized_energy(&q).unwrap();
            prop_assert!(e <= 0.0);
            let plan = optimal_plan(&q).unwrap();
            prop_assert!((q.energy_of(&plan) - e).abs() < 1e-10);
        }

        #[test]
        fn optimized_energy_ignores_measurement_order(
            alpha in 0.5f64..0.999,
            seed in 0u64..1000,
        ) {
            let p = ChainParams::new(16, alpha, 1.0).unwrap();
            let mut sites = vec![0usize, 1, 2, 4];
            let spec = MeasurementSpec::new(&p, sites.clone()).unwrap();
            let e = optimized_energy(&build_quadratics(&p, &spec, 10).unwrap()).unwrap();
            sites.rotate_left((seed % 4) as usize);
            sites.swap(0, (seed as usize / 4) % 4);
            let spec2 = MeasurementSpec::new(&p, sites).unwrap();
            let e2 = optimized_energy(&build_quadratics(&p, &spec2, 10).unwrap()).unwrap();
            prop_assert!((e - e2).abs() <= 1e-12 * e.abs().max(1e-300));
        }
    }
}
