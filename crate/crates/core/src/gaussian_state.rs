//! Covariance-matrix algebra for Gaussian states.
//!
//! A state of `n` modes is described by the symmetric `2n × 2n` matrix
//! `V_jk = ½⟨ξ_j ξ_k + ξ_k ξ_j⟩ − ⟨ξ_j⟩⟨ξ_k⟩` over the interleaved phase-space
//! vector `ξ = (q0, p0, q1, p1, ...)`. Physical states have every symplectic
//! eigenvalue `ν ≥ 1/2`.
//!
//! Units follow the usual convention: logarithmic negativity in bits
//! (`log₂`), von Neumann entropy in nats (`ln`).

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{max_asymmetry, validate_subset};

/// Asymmetry accepted when wrapping a matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Negative eigenvalues of `−(ΩV)²` above this are rounding and get clamped.
pub const SPECTRUM_TOLERANCE: f64 = 1e-9;
/// Entropy refuses states with `ν < 1/2 − UNPHYSICAL_TOLERANCE`.
pub const UNPHYSICAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    data: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = data.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(Error::BadShape { rows, cols });
        }
        let max_asymmetry = max_asymmetry(&data);
        if max_asymmetry > SYMMETRY_TOLERANCE {
            return Err(Error::NotSymmetric { max_asymmetry });
        }
        Ok(Self { data })
    }

    /// Interleaves an `n × n` position block and momentum block; `qp` entries are zero.
    pub fn from_blocks(qq: &DMatrix<f64>, pp: &DMatrix<f64>) -> Result<Self> {
        let n = qq.nrows();
        if qq.shape() != (n, n) || pp.shape() != (n, n) {
            return Err(Error::BadShape {
                rows: pp.nrows(),
                cols: pp.ncols(),
            });
        }
        let mut data = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                data[(2 * i, 2 * j)] = qq[(i, j)];
                data[(2 * i + 1, 2 * j + 1)] = pp[(i, j)];
            }
        }
        Self::new(data)
    }

    /// `½·I`, the vacuum of `n_modes` unit-frequency oscillators.
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            data: DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.data.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// `⟨Δq_i Δq_j⟩`
    pub fn qq(&self, i: usize, j: usize) -> f64 {
        self.data[(2 * i, 2 * j)]
    }

    /// `⟨Δp_i Δp_j⟩`
    pub fn pp(&self, i: usize, j: usize) -> f64 {
        self.data[(2 * i + 1, 2 * j + 1)]
    }
}

/// Symplectic eigenvalues, one per mode, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `Ω` applied on both sides: `Ωᵀ V Ω`, with `Ω = ⊕ (0 1; −1 0)`.
fn omega_sandwich(v: &DMatrix<f64>) -> DMatrix<f64> {
    // (ΩᵀVΩ)_{ab} = s_a s_b V_{π(a)π(b)} with π swapping q/p in each pair
    // and s = +1 on q rows, −1 on p rows.
    let dim = v.nrows();
    DMatrix::from_fn(dim, dim, |a, b| {
        let sa = if a % 2 == 0 { 1.0 } else { -1.0 };
        let sb = if b % 2 == 0 { 1.0 } else { -1.0 };
        sa * sb * v[(a ^ 1, b ^ 1)]
    })
}

fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for i in 0..n_modes {
        omega[(2 * i, 2 * i + 1)] = 1.0;
        omega[(2 * i + 1, 2 * i)] = -1.0;
    }
    omega
}

/// Eigenvalues of `−(ΩV)²` (each `ν²` appears twice).
///
/// For positive-definite `V = LLᵀ` this equals the spectrum of the symmetric
/// matrix `Lᵀ(ΩᵀVΩ)L`; otherwise the general non-symmetric eigenproblem is
/// solved directly.
fn squared_spectrum(v: &DMatrix<f64>) -> Result<Vec<f64>> {
    if let Some(chol) = v.clone().cholesky() {
        let l = chol.l();
        let s = l.transpose() * omega_sandwich(v) * &l;
        let s = (&s + s.transpose()) * 0.5;
        return Ok(SymmetricEigen::new(s).eigenvalues.iter().copied().collect());
    }
    let omega = symplectic_form(v.nrows() / 2);
    let ov = &omega * v;
    let m = -(&ov * &ov);
    let eig = m.complex_eigenvalues();
    Ok(eig.iter().map(|z| z.re).collect())
}

pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let mut squares = squared_spectrum(v.matrix())?;
    if let Some(&bad) = squares
        .iter()
        .find(|&&x| x < -SPECTRUM_TOLERANCE || !x.is_finite())
    {
        return Err(Error::InvalidSpectrum(format!(
            "eigenvalue {bad:e} of -(ΩV)^2"
        )));
    }
    squares.sort_by(f64::total_cmp);
    // eigenvalues come in degenerate pairs; average each pair
    let values = squares
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect();
    Ok(SymplecticSpectrum { values })
}

/// Principal submatrix on the `(q, p)` rows of `sites`, in the given order.
pub fn reduce(v: &CovarianceMatrix, sites: &[usize]) -> Result<CovarianceMatrix> {
    validate_subset(sites, v.n_modes())?;
    let idx: Vec<usize> = sites.iter().flat_map(|&s| [2 * s, 2 * s + 1]).collect();
    let data = DMatrix::from_fn(idx.len(), idx.len(), |a, b| v.data[(idx[a], idx[b])]);
    Ok(CovarianceMatrix { data })
}

/// Flips the sign of the momenta of `b_sites` (`ΛVΛ`).
pub fn partial_transpose(v: &CovarianceMatrix, b_sites: &[usize]) -> Result<CovarianceMatrix> {
    if b_sites.is_empty() {
        return Ok(v.clone());
    }
    validate_subset(b_sites, v.n_modes())?;
    let mut sign = vec![1.0; 2 * v.n_modes()];
    for &s in b_sites {
        sign[2 * s + 1] = -1.0;
    }
    let data = DMatrix::from_fn(v.data.nrows(), v.data.ncols(), |a, b| {
        sign[a] * sign[b] * v.data[(a, b)]
    });
    Ok(CovarianceMatrix { data })
}

/// `E_N = −Σ min(0, log₂ 2ν̃)` over the spectrum of the partial transpose.
///
/// The sum runs over the modes of `v` itself, so pass the reduced bipartite
/// matrix when the parties do not cover the whole system.
pub fn log_negativity(v: &CovarianceMatrix, b_sites: &[usize]) -> Result<f64> {
    let spectrum = symplectic_eigenvalues(&partial_transpose(v, b_sites)?)?;
    let e = spectrum
        .values()
        .iter()
        .map(|&nu| -(2.0 * nu).log2().min(0.0))
        .sum::<f64>();
    Ok(e.max(0.0))
}

/// Logarithmic negativity of a pure Gaussian state across a cut that isolates
/// one mode whose reduced symplectic eigenvalue is `nu`.
///
/// The partial transpose then has a single eigenvalue `ν − sqrt(ν² − ¼)`
/// below one half, giving `log₂(2ν + sqrt(4ν² − 1))`.
pub fn pure_single_mode_log_negativity(nu: f64) -> f64 {
    let s = (nu * nu).max(0.25);
    (2.0 * s.sqrt() + (4.0 * s - 1.0).sqrt()).log2()
}

/// `f(x) = (x + ½)ln(x + ½) − (x − ½)ln(x − ½)`, with `f(½) = 0`.
pub fn entropy_function(x: f64) -> f64 {
    let x = x.max(0.5);
    let upper = (x + 0.5) * (x + 0.5).ln();
    let lower = if x - 0.5 < 1e-12 {
        0.0
    } else {
        (x - 0.5) * (x - 0.5).ln()
    };
    upper - lower
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(v: &CovarianceMatrix) -> Result<f64> {
    let spectrum = symplectic_eigenvalues(v)?;
    let mut s = 0.0;
    for &nu in spectrum.values() {
        if nu < 0.5 - UNPHYSICAL_TOLERANCE {
            return Err(Error::Unphysical { nu });
        }
        s += entropy_function(nu);
    }
    Ok(s)
}

/// `S(A) + S(B) − S(A ∪ B)` for disjoint mode subsets.
pub fn mutual_information(
    v: &CovarianceMatrix,
    a_sites: &[usize],
    b_sites: &[usize],
) -> Result<f64> {
    validate_subset(a_sites, v.n_modes())?;
    validate_subset(b_sites, v.n_modes())?;
    if let Some(&shared) = a_sites.iter().find(|s| b_sites.contains(s)) {
        return Err(Error::OverlappingSubsets(shared));
    }
    let union: Vec<usize> = a_sites.iter().chain(b_sites).copied().collect();
    let s_a = von_neumann_entropy(&reduce(v, a_sites)?)?;
    let s_b = von_neumann_entropy(&reduce(v, b_sites)?)?;
    let s_ab = von_neumann_entropy(&reduce(v, &union)?)?;
    Ok(s_a + s_b - s_ab)
}
