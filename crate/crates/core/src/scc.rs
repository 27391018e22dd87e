//! Sample canonical correlation spectra and rigidity diagnostics.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resolvent::build_h_real;
use crate::sampler::DataPair;
use crate::spectral_model::SpectralModel;

const SINGULAR_RATIO: f64 = 1e-10;
const CLAMP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Covariances {
    pub sxx: DMatrix<f64>,
    pub syy: DMatrix<f64>,
    pub sxy: DMatrix<f64>,
}

/// `S_xx = XXᵀ`, `S_yy = YYᵀ`, `S_xy = XYᵀ`; the `1/n` lives in the entries.
pub fn sample_covariances(pair: &DataPair) -> Covariances {
    Covariances {
        sxx: &pair.x * pair.x.transpose(),
        syy: &pair.y * pair.y.transpose(),
        sxy: &pair.x * pair.y.transpose(),
    }
}

/// Eigendecomposition of a Gram matrix together with `S^{-1/2}`.
#[derive(Debug, Clone)]
pub struct Whitening {
    pub eigenvalues: nalgebra::DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub inv_sqrt: DMatrix<f64>,
    pub min_eig: f64,
    pub max_eig: f64,
}

impl Whitening {
    pub fn new(s: &DMatrix<f64>, which: &'static str) -> Result<Self> {
        let eig = SymmetricEigen::new(s.clone());
        let min_eig = eig.eigenvalues.min();
        let max_eig = eig.eigenvalues.max();
        if !(min_eig > SINGULAR_RATIO * max_eig) {
            return Err(Error::Singular { which, min_eig, max_eig });
        }
        let v = &eig.eigenvectors;
        let mut scaled = v.clone();
        for (mut col, &d) in scaled.column_iter_mut().zip(eig.eigenvalues.iter()) {
            col /= d.sqrt();
        }
        let inv_sqrt = &scaled * v.transpose();
        Ok(Self {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
            inv_sqrt,
            min_eig,
            max_eig,
        })
    }

    /// `S^{-1}` from the stored decomposition.
    pub fn inverse(&self) -> DMatrix<f64> {
        &self.inv_sqrt * &self.inv_sqrt
    }
}

/// Whitened cross matrix `𝓗 = S_xx^{-1/2} S_xy S_yy^{-1/2}` and its pieces.
#[derive(Debug, Clone)]
pub struct WhitenedPair {
    pub cov: Covariances,
    pub wx: Whitening,
    pub wy: Whitening,
    pub cross: DMatrix<f64>,
}

impl WhitenedPair {
    pub fn new(pair: &DataPair) -> Result<Self> {
        let cov = sample_covariances(pair);
        let wx = Whitening::new(&cov.sxx, "S_xx")?;
        let wy = Whitening::new(&cov.syy, "S_yy")?;
        let cross = &wx.inv_sqrt * &cov.sxy * &wy.inv_sqrt;
        Ok(Self { cov, wx, wy, cross })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// `λ_1 ≥ … ≥ λ_q`, all in `[0, 1]`.
    pub eigenvalues: Vec<f64>,
    pub min_eig_sxx: f64,
    pub min_eig_syy: f64,
    pub n: usize,
    pub p: usize,
    pub q: usize,
}

pub(crate) fn squared_correlations(singular_values: impl IntoIterator<Item = f64>) -> Result<Vec<f64>> {
    let mut eigenvalues = Vec::new();
    for s in singular_values {
        let mut l = s * s;
        if l > 1.0 {
            if l - 1.0 <= CLAMP_TOL {
                l = 1.0;
            } else {
                return Err(Error::OutOfRange { value: l });
            }
        }
        eigenvalues.push(l);
    }
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    Ok(eigenvalues)
}

/// Eigenvalues of `C_YX = 𝓗ᵀ𝓗` as squared singular values of `𝓗`.
pub fn ccc_eigenvalues(pair: &DataPair) -> Result<SpectrumResult> {
    let w = WhitenedPair::new(pair)?;
    let svd = SVD::new(w.cross, false, false);
    Ok(SpectrumResult {
        eigenvalues: squared_correlations(svd.singular_values.iter().copied())?,
        min_eig_sxx: w.wx.min_eig,
        min_eig_syy: w.wy.min_eig,
        n: pair.n(),
        p: pair.p(),
        q: pair.q(),
    })
}

/// Spectrum of `C_XY = 𝓗𝓗ᵀ` (length `p`), computed by a symmetric eigensolve.
pub fn cxy_eigenvalues(pair: &DataPair) -> Result<Vec<f64>> {
    let w = WhitenedPair::new(pair)?;
    let c = &w.cross * w.cross.transpose();
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

/// Smallest singular value of the real linearization `H(λ)`.
///
/// Vanishes exactly when `λ` is an eigenvalue of `C_XY`.
pub fn det_characterization_residual(pair: &DataPair, lambda: f64) -> Result<f64> {
    let h = build_h_real(pair, lambda)?;
    Ok(SVD::new(h, false, false).singular_values.min())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityProfile {
    /// `d_i = |λ_i − γ_i| · [i ∧ (q+1−i)]^{1/3} · n^{2/3}` for `i = 1..q`.
    pub deviations: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Indices `1..=admissible` are covered by the rigidity estimate.
    pub admissible: usize,
}

impl RigidityProfile {
    pub fn max_admissible(&self) -> f64 {
        self.deviations[..self.admissible]
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

/// Normalized rigidity deviations. When `λ− < lower_edge_eps` the lower edge
/// is treated as soft and only `i ≤ (1 − eps)·q` count as admissible.
pub fn rigidity_profile(spec: &SpectrumResult, model: &SpectralModel, lower_edge_eps: f64) -> Result<RigidityProfile> {
    model.check_dims(spec.p, spec.q, spec.n)?;
    let q = spec.q;
    let gammas = model.classical_locations(q)?;
    Ok(profile_with_gammas(spec, gammas, model.lambda_minus, lower_edge_eps))
}

pub(crate) fn profile_with_gammas(
    spec: &SpectrumResult,
    gammas: Vec<f64>,
    lambda_minus: f64,
    lower_edge_eps: f64,
) -> RigidityProfile {
    let q = spec.q;
    let scale = (spec.n as f64).powf(2.0 / 3.0);
    let deviations = spec
        .eigenvalues
        .iter()
        .zip(&gammas)
        .enumerate()
        .map(|(k, (l, g))| {
            let i = k + 1;
            let w = (i.min(q + 1 - i) as f64).cbrt();
            (l - g).abs() * w * scale
        })
        .collect();
    let admissible = if lambda_minus >= lower_edge_eps {
        q
    } else {
        (((1.0 - lower_edge_eps) * q as f64).floor() as usize).max(1)
    };
    RigidityProfile {
        deviations,
        gammas,
        admissible,
    }
}

/// CSV with columns `index,lambda,gamma,normalized_deviation`.
pub fn write_spectrum_csv<W: Write>(spec: &SpectrumResult, profile: &RigidityProfile, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "lambda", "gamma", "normalized_deviation"])?;
    for (k, l) in spec.eigenvalues.iter().enumerate() {
        out.write_record([
            (k + 1).to_string(),
            l.to_string(),
            profile.gammas[k].to_string(),
            profile.deviations[k].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
