use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian_state::CovarianceMatrix;
use crate::linalg::{cholesky, select, symmetrize, validate_subset};

#[derive(Debug, Clone)]
pub struct GeneralDyneUpdate {
    /// Covariance of the unmeasured modes given any outcome.
    pub conditional_covariance: CovarianceMatrix,
    /// Maps the interleaved outcome `(X₀, P₀, X₁, P₁, ...)` to the conditional
    /// mean of the unmeasured modes (interleaved, ascending mode order).
    pub gain: DMatrix<f64>,
    pub measured: Vec<usize>,
    pub unmeasured: Vec<usize>,
}

impl GeneralDyneUpdate {
    pub fn conditional_mean(&self, outcome: &DVector<f64>) -> DVector<f64> {
        &self.gain * outcome
    }
}

fn interleaved(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

/// `V_uu − V_uA (V_AA + V_m)⁻¹ V_Au` with `V_m = ⊕ diag(1/(2ω), ω/2)`.
pub fn general_dyne_update(
    v: &CovarianceMatrix,
    measured: &[usize],
    omega: f64,
) -> Result<GeneralDyneUpdate> {
    let n = v.n_modes();
    validate_subset(measured, n)?;
    if measured.len() == n {
        return Err(Error::InvalidMeasurement(
            "conditioning needs at least one unmeasured mode".into(),
        ));
    }
    if omega.is_nan() || omega <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "omega must be positive, got {omega}"
        )));
    }
    let unmeasured: Vec<usize> = (0..n).filter(|m| !measured.contains(m)).collect();
    let ia = interleaved(measured);
    let iu = interleaved(&unmeasured);
    let vm = v.matrix();

    let mut v_aa = select(vm, &ia, &ia);
    for a in 0..measured.len() {
        v_aa[(2 * a, 2 * a)] += 1.0 / (2.0 * omega);
        v_aa[(2 * a + 1, 2 * a + 1)] += omega / 2.0;
    }
    let v_au = select(vm, &ia, &iu);
    let factor = cholesky(&v_aa, "V_AA + V_m")?;
    let gain = factor.solve(&v_au).transpose();
    let mut cond = select(vm, &iu, &iu) - &gain * &v_au;
    symmetrize(&mut cond);

    Ok(GeneralDyneUpdate {
        conditional_covariance: CovarianceMatrix::new(cond)?,
        gain,
        measured: measured.to_vec(),
        unmeasured,
    })
}
