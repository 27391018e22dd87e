//! The `(p+q+2n)`-dimensional linearization `H(z)`, its resolvent
//! `G(z) = H(z)⁻¹` by dense LU or by the Schur-block formulas, and finite-n
//! local-law error measurements against `Π(z)`.
//!
//! Index layout: `I₁ = 0..p`, `I₂ = p..p+q`, `I₃ = p+q..p+q+n`,
//! `I₄ = p+q+n..p+q+2n`; `μ ∈ I₃` pairs with `μ̄ = μ + n`.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::aux_stream;
use crate::sampler::DataPair;
use crate::scc::WhitenedPair;
use crate::spectral_model::{kappa, sqrt_z, SpectralDomain, SpectralModel, SpectralParameter};

type C = Complex64;

/// Default regularization exponent: `z·n^{-10}` is subtracted on `I₁ ∪ I₂`.
pub const DEFAULT_REG_EXPONENT: f64 = 10.0;

/// `[[z, z^{1/2}], [z^{1/2}, z]]`.
pub fn kernel(z: C) -> [[C; 2]; 2] {
    let r = sqrt_z(z);
    [[z, r], [r, z]]
}

/// Closed-form inverse of [`kernel`]: `(z(z−1))⁻¹ [[z, −z^{1/2}], [−z^{1/2}, z]]`.
pub fn kernel_inverse(z: C) -> Result<[[C; 2]; 2]> {
    if z == C::new(0.0, 0.0) || z == C::new(1.0, 0.0) {
        return Err(Error::BranchCut {
            re: z.re,
            im: z.im,
            reason: "2x2 kernel is singular at z in {0, 1}",
        });
    }
    let d = 1.0 / (z * (z - 1.0));
    let r = sqrt_z(z);
    Ok([[z * d, -r * d], [-r * d, z * d]])
}

#[derive(Debug, Clone)]
pub struct LinearizationMatrix {
    pub h: DMatrix<C>,
    pub z: C,
    pub p: usize,
    pub q: usize,
    pub n: usize,
}

fn assemble<T: nalgebra::Scalar + Copy>(
    pair: &DataPair,
    kinv: [[T; 2]; 2],
    zero: T,
    lift: impl Fn(f64) -> T,
) -> DMatrix<T> {
    let (p, q, n) = (pair.p(), pair.q(), pair.n());
    let r = p + q;
    let dim = r + 2 * n;
    let mut h = DMatrix::from_element(dim, dim, zero);
    for i in 0..p {
        for mu in 0..n {
            let v = lift(pair.x[(i, mu)]);
            h[(i, r + mu)] = v;
            h[(r + mu, i)] = v;
        }
    }
    for j in 0..q {
        for nu in 0..n {
            let v = lift(pair.y[(j, nu)]);
            h[(p + j, r + n + nu)] = v;
            h[(r + n + nu, p + j)] = v;
        }
    }
    for mu in 0..n {
        for a in 0..2 {
            for b in 0..2 {
                h[(r + a * n + mu, r + b * n + mu)] = kinv[a][b];
            }
        }
    }
    h
}

/// Assemble `H(z)`; the lower-right block uses the closed-form kernel inverse.
pub fn build_h(pair: &DataPair, z: C) -> Result<LinearizationMatrix> {
    let kinv = kernel_inverse(z)?;
    Ok(LinearizationMatrix {
        h: assemble(pair, kinv, C::new(0.0, 0.0), |v| C::new(v, 0.0)),
        z,
        p: pair.p(),
        q: pair.q(),
        n: pair.n(),
    })
}

/// Real symmetric `H(λ)` for `λ ∈ (0, 1)`.
pub fn build_h_real(pair: &DataPair, lambda: f64) -> Result<DMatrix<f64>> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameters(format!(
            "lambda in (0, 1) required for the real linearization (lambda={lambda})"
        )));
    }
    let k = kernel_inverse(C::new(lambda, 0.0))?;
    let kinv = [[k[0][0].re, k[0][1].re], [k[1][0].re, k[1][1].re]];
    Ok(assemble(pair, kinv, 0.0, |v| v))
}

#[derive(Debug, Clone)]
pub struct ResolventBundle {
    pub g: DMatrix<C>,
    pub z: C,
    pub p: usize,
    pub q: usize,
    pub n: usize,
    /// `m_α = n⁻¹ tr 𝓖_α`, α = 1..4.
    pub m: [C; 4],
    /// `q⁻¹ tr R₂`.
    pub m_r2: C,
    pub regularized: bool,
    /// `max |H G − I|` when the direct route computed it.
    pub residual: Option<f64>,
}

impl ResolventBundle {
    fn from_g(g: DMatrix<C>, z: C, pair: &DataPair, m_r2: C, regularized: bool, residual: Option<f64>) -> Self {
        let (p, q, n) = (pair.p(), pair.q(), pair.n());
        let r = p + q;
        let nf = n as f64;
        let trace = |lo: usize, hi: usize| (lo..hi).map(|a| g[(a, a)]).sum::<C>() / nf;
        let m = [trace(0, p), trace(p, r), trace(r, r + n), trace(r + n, r + 2 * n)];
        Self {
            g,
            z,
            p,
            q,
            n,
            m,
            m_r2,
            regularized,
            residual,
        }
    }

    pub fn dim(&self) -> usize {
        self.p + self.q + 2 * self.n
    }

    /// `m3 − m4 − (1−z)(c1−c2)`, zero for every unregularized realization.
    pub fn m34_defect(&self) -> C {
        let (c1, c2) = self.ratios();
        self.m[2] - self.m[3] - (1.0 - self.z) * (c1 - c2)
    }

    /// `m3 − c2 z(1−z) m − (1−c1−c2) z`, zero for every unregularized realization.
    pub fn m3m_defect(&self) -> C {
        let (c1, c2) = self.ratios();
        let z = self.z;
        self.m[2] - c2 * z * (1.0 - z) * self.m_r2 - (1.0 - c1 - c2) * z
    }

    fn ratios(&self) -> (f64, f64) {
        let n = self.n as f64;
        (self.p as f64 / n, self.q as f64 / n)
    }

    /// The `(I₃ ∪ I₄)²` block `𝓖_R`.
    pub fn right_block(&self) -> DMatrix<C> {
        let r = self.p + self.q;
        self.g.view((r, r), (2 * self.n, 2 * self.n)).into_owned()
    }
}

/// `G(z)` by dense LU with partial pivoting.
///
/// With `regularize = Some(k)` the matrix `H − z n^{−k}` (on `I₁ ∪ I₂`) is inverted.
pub fn resolvent(pair: &DataPair, z: C, regularize: Option<f64>) -> Result<ResolventBundle> {
    let lin = build_h(pair, z)?;
    let mut h = lin.h;
    let (p, q, n) = (pair.p(), pair.q(), pair.n());
    let shift = regularize.map(|k| (n as f64).powf(-k)).unwrap_or(0.0);
    if shift != 0.0 {
        for a in 0..p + q {
            h[(a, a)] -= z * shift;
        }
    }
    let g = h
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::Conditioning { residual: f64::INFINITY })?;
    let mut prod = &h * &g;
    for a in 0..prod.nrows() {
        prod[(a, a)] -= C::new(1.0, 0.0);
    }
    let residual = prod.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(residual <= 1e-6) {
        return Err(Error::Conditioning { residual });
    }
    // q⁻¹ tr R₂ = q⁻¹ tr(Ŝ_yy 𝓖₂) with Ŝ_yy = S_yy + shift
    let mut syy = &pair.y * pair.y.transpose();
    for j in 0..q {
        syy[(j, j)] += shift;
    }
    let mut tr = C::new(0.0, 0.0);
    for a in 0..q {
        for b in 0..q {
            tr += syy[(a, b)] * g[(p + b, p + a)];
        }
    }
    Ok(ResolventBundle::from_g(g, z, pair, tr / q as f64, regularize.is_some(), Some(residual)))
}

/// Real and imaginary parts of `A · diag(w) · Bᵀ`.
fn weighted_product(a: &DMatrix<f64>, w: &[C], b: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut are = a.clone();
    let mut aim = a.clone();
    for (k, wk) in w.iter().enumerate() {
        are.column_mut(k).scale_mut(wk.re);
        aim.column_mut(k).scale_mut(wk.im);
    }
    let bt = b.transpose();
    (&are * &bt, &aim * &bt)
}

/// Spectral pieces of the Schur route, reusable across spectral parameters.
#[derive(Debug, Clone)]
pub struct SchurFactors {
    whitened: WhitenedPair,
    /// `S_xx^{-1/2} U`, `p×q`.
    a: DMatrix<f64>,
    /// `S_yy^{-1/2} V`, `q×q`.
    b: DMatrix<f64>,
    sxx_inv: DMatrix<f64>,
    sigma: Vec<f64>,
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

impl SchurFactors {
    pub fn new(pair: &DataPair) -> Result<Self> {
        let whitened = WhitenedPair::new(pair)?;
        let svd = SVD::new(whitened.cross.clone(), true, true);
        let u = svd.u.as_ref().expect("requested U");
        let vt = svd.v_t.as_ref().expect("requested Vᵀ");
        let a = &whitened.wx.inv_sqrt * u;
        let b = &whitened.wy.inv_sqrt * vt.transpose();
        let sxx_inv = whitened.wx.inverse();
        Ok(Self {
            a,
            b,
            sxx_inv,
            sigma: svd.singular_values.iter().copied().collect(),
            whitened,
            x: pair.x.clone(),
            y: pair.y.clone(),
        })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.sigma.iter().map(|s| s * s).collect()
    }

    pub fn whitened(&self) -> &WhitenedPair {
        &self.whitened
    }

    /// `tr R₁(z)` and `tr R₂(z)` from the spectral decomposition.
    pub fn traces(&self, z: C) -> (C, C) {
        let (p, q) = (self.a.nrows(), self.b.nrows());
        let tr2: C = self.sigma.iter().map(|s| 1.0 / (s * s - z)).sum();
        (tr2 - (p - q) as f64 / z, tr2)
    }

    /// `G(z)` assembled from the block formulas, never inverting `H`.
    pub fn resolvent(&self, z: C) -> Result<ResolventBundle> {
        kernel_inverse(z)?;
        let (p, q, n) = (self.x.nrows(), self.y.nrows(), self.x.ncols());
        let r = p + q;
        let w: Vec<C> = self.sigma.iter().map(|s| 1.0 / (s * s - z)).collect();
        let inv_z = 1.0 / z;
        let inv_rz = 1.0 / sqrt_z(z);

        // 𝓖₁ = A diag(w) Aᵀ − z⁻¹ (S_xx⁻¹ − A Aᵀ)
        let shifted: Vec<C> = w.iter().map(|wk| wk + inv_z).collect();
        let (mut g1re, mut g1im) = weighted_product(&self.a, &shifted, &self.a);
        g1re -= &self.sxx_inv * inv_z.re;
        g1im -= &self.sxx_inv * inv_z.im;
        // 𝓖₂ = B diag(w) Bᵀ
        let (g2re, g2im) = weighted_product(&self.b, &w, &self.b);
        // 𝓖₁₂ = −z^{−1/2} A diag(wσ) Bᵀ
        let cw: Vec<C> = w.iter().zip(&self.sigma).map(|(wk, s)| -inv_rz * wk * *s).collect();
        let (g12re, g12im) = weighted_product(&self.a, &cw, &self.b);

        let mut glre = DMatrix::zeros(r, r);
        let mut glim = DMatrix::zeros(r, r);
        for (dst, src1, src2, src12) in [(&mut glre, &g1re, &g2re, &g12re), (&mut glim, &g1im, &g2im, &g12im)] {
            dst.view_mut((0, 0), (p, p)).copy_from(src1);
            dst.view_mut((p, p), (q, q)).copy_from(src2);
            dst.view_mut((0, p), (p, q)).copy_from(src12);
            dst.view_mut((p, 0), (q, p)).copy_from(&src12.transpose());
        }

        // 𝓖_L W with W = diag(X, Y): column blocks (𝓖_L[:, I₁] X, 𝓖_L[:, I₂] Y)
        let lw = |gl: &DMatrix<f64>| -> [DMatrix<f64>; 2] {
            [
                gl.view((0, 0), (r, p)) * &self.x,
                gl.view((0, p), (r, q)) * &self.y,
            ]
        };
        let lw_re = lw(&glre);
        let lw_im = lw(&glim);
        // M = Wᵀ 𝓖_L W, block (c, d) = W_cᵀ (𝓖_L W)[rows of c, block d]
        let rows = [(0usize, p), (p, q)];
        let wmat = [&self.x, &self.y];
        let mblock = |c: usize, d: usize| -> DMatrix<C> {
            let (off, len) = rows[c];
            let re = wmat[c].transpose() * lw_re[d].view((off, 0), (len, n));
            let im = wmat[c].transpose() * lw_im[d].view((off, 0), (len, n));
            DMatrix::from_fn(n, n, |i, j| C::new(re[(i, j)], im[(i, j)]))
        };
        let mb = [[mblock(0, 0), mblock(0, 1)], [mblock(1, 0), mblock(1, 1)]];
        let k = kernel(z);

        let mut g = DMatrix::from_element(r + 2 * n, r + 2 * n, C::new(0.0, 0.0));
        for i in 0..r {
            for j in 0..r {
                g[(i, j)] = C::new(glre[(i, j)], glim[(i, j)]);
            }
        }
        // 𝓖_R = K + K M K
        for a in 0..2 {
            for b in 0..2 {
                let mut block = DMatrix::from_element(n, n, C::new(0.0, 0.0));
                for c in 0..2 {
                    for d in 0..2 {
                        let s = k[a][c] * k[d][b];
                        block.zip_apply(&mb[c][d], |x, m| *x += s * m);
                    }
                }
                for mu in 0..n {
                    block[(mu, mu)] += k[a][b];
                }
                g.view_mut((r + a * n, r + b * n), (n, n)).copy_from(&block);
            }
        }
        // 𝓖_LR = −𝓖_L W K, 𝓖_RL = 𝓖_LRᵀ
        for b in 0..2 {
            let mut block = DMatrix::from_element(r, n, C::new(0.0, 0.0));
            for c in 0..2 {
                let s = -k[c][b];
                for i in 0..r {
                    for j in 0..n {
                        block[(i, j)] += s * C::new(lw_re[c][(i, j)], lw_im[c][(i, j)]);
                    }
                }
            }
            g.view_mut((0, r + b * n), (r, n)).copy_from(&block);
            g.view_mut((r + b * n, 0), (n, r)).copy_from(&block.transpose());
        }

        let m_r2 = w.iter().sum::<C>() / q as f64;
        let pair_dims = DataPair::from_matrices(DMatrix::zeros(p, n), DMatrix::zeros(q, n))?;
        Ok(ResolventBundle::from_g(g, z, &pair_dims, m_r2, false, None))
    }
}

/// `G(z)` through the Schur formulas.
pub fn blocks_via_schur(pair: &DataPair, z: C) -> Result<ResolventBundle> {
    SchurFactors::new(pair)?.resolvent(z)
}

/// Operator (spectral) norm of a complex matrix.
pub fn op_norm(m: &DMatrix<C>) -> f64 {
    SVD::new(m.clone(), false, false).singular_values.max()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ResolventRoute {
    Direct,
    #[default]
    Schur,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalLawOptions {
    pub n_vectors: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub route: ResolventRoute,
}

impl Default for LocalLawOptions {
    fn default() -> Self {
        Self {
            n_vectors: 8,
            seed: 0,
            epsilon: 0.05,
            route: ResolventRoute::Schur,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Benchmarks {
    /// `φ_n + Ψ(z)`: anisotropic / entrywise scale.
    pub phi_plus_psi: f64,
    /// `1/(nη)`: strong averaged scale inside the spectrum.
    pub inv_n_eta: f64,
    /// `1/(n(κ+η)) + 1/((nη)²√(κ+η))`: averaged scale outside the spectrum.
    pub outside: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalLawReport {
    pub z: [f64; 2],
    pub n: usize,
    pub p: usize,
    pub q: usize,
    /// `max_{a,b} |G_ab − Π_ab|` over all entries.
    pub entrywise_err: f64,
    /// Max over the diagonal entries only.
    pub diagonal_err: f64,
    /// Max over the paired `(μ, μ̄)` entries, where `Π = h(z)`.
    pub paired_err: f64,
    /// Max over all entries where `Π` vanishes.
    pub offdiag_err: f64,
    /// `max |⟨u, (G − Π) v⟩|` over the test-vector pairs.
    pub aniso_err: f64,
    /// `|m_α − m_{αc}|`, α = 1..4, then `|m − m_c|`.
    pub avg_err: [f64; 5],
    pub psi: f64,
    pub phi_n: f64,
    pub kappa: f64,
    pub outside_spectrum: bool,
    pub benchmarks: Benchmarks,
}

fn random_unit(rng: &mut impl Rng, dim: usize, range: std::ops::Range<usize>) -> DVector<f64> {
    let mut v = DVector::<f64>::zeros(dim);
    for a in range {
        v[a] = rng.sample::<f64, _>(StandardNormal);
    }
    let norm = v.norm();
    v / norm
}

/// Finite-n local-law errors of `G(z)` against `Π(z)`.
pub fn local_law_errors(
    pair: &DataPair,
    model: &SpectralModel,
    z: &SpectralParameter,
    opts: &LocalLawOptions,
) -> Result<LocalLawReport> {
    let (p, q, n) = (pair.p(), pair.q(), pair.n());
    SpectralDomain::new(opts.epsilon)?.check(z.e, z.eta, n)?;
    model.check_dims(p, q, n)?;
    let bundle = match opts.route {
        ResolventRoute::Direct => resolvent(pair, z.z(), None)?,
        ResolventRoute::Schur => blocks_via_schur(pair, z.z())?,
    };
    local_law_from_bundle(&bundle, pair.meta.support, z, opts)
}

/// Compare an already computed resolvent against `Π(z)` at finite-n ratios.
pub fn local_law_from_bundle(
    bundle: &ResolventBundle,
    phi_n: f64,
    z: &SpectralParameter,
    opts: &LocalLawOptions,
) -> Result<LocalLawReport> {
    let (p, q, n) = (bundle.p, bundle.q, bundle.n);
    let finite = SpectralModel::from_dims(p, q, n)?;
    let pi = finite.pi_limit(z.z(), p, q, n)?;
    let sq = finite.stieltjes(z.z())?;
    let dim = bundle.dim();
    let r = p + q;

    let mut diff = bundle.g.clone();
    let (mut diag, mut paired, mut off) = (0.0_f64, 0.0_f64, 0.0_f64);
    for b in 0..dim {
        for a in 0..dim {
            let target = pi.entry(a, b);
            let d = bundle.g[(a, b)] - target;
            diff[(a, b)] = d;
            let e = d.norm();
            if a == b {
                diag = diag.max(e);
            } else if a >= r && b >= r && (a - r) % n == (b - r) % n {
                paired = paired.max(e);
            } else {
                off = off.max(e);
            }
        }
    }
    let entrywise = diag.max(paired).max(off);

    let mut rng = aux_stream(opts.seed, 0x616e_6973);
    let blocks = [0..p, p..r, r..r + n, r + n..dim];
    let mut vectors: Vec<(DVector<f64>, DVector<f64>)> = Vec::new();
    for blk in &blocks {
        let mut e = DVector::zeros(dim);
        e[blk.start] = 1.0;
        vectors.push((e.clone(), e));
        let u = random_unit(&mut rng, dim, blk.clone());
        vectors.push((u.clone(), u));
    }
    for k in 0..blocks.len() {
        let u = random_unit(&mut rng, dim, blocks[k].clone());
        let v = random_unit(&mut rng, dim, blocks[(k + 1) % blocks.len()].clone());
        vectors.push((u, v));
    }
    for _ in 0..opts.n_vectors {
        let u = random_unit(&mut rng, dim, 0..dim);
        let v = random_unit(&mut rng, dim, 0..dim);
        vectors.push((u, v));
    }
    let aniso = vectors
        .iter()
        .map(|(u, v)| {
            let dv = &diff * v.map(|x| C::new(x, 0.0));
            u.iter().zip(dv.iter()).map(|(ui, di)| di * *ui).sum::<C>().norm()
        })
        .fold(0.0, f64::max);

    let limits = [pi.x_diag * finite.c1, pi.y_diag * finite.c2, sq.m3, sq.m4];
    let mut avg = [0.0; 5];
    for a in 0..4 {
        avg[a] = (bundle.m[a] - limits[a]).norm();
    }
    avg[4] = (bundle.m_r2 - sq.m).norm();

    let psi = finite.psi_control(z, n)?;
    let nf = n as f64;
    let kap = kappa(&finite, z.e);
    let ke = kap + z.eta;
    Ok(LocalLawReport {
        z: [z.e, z.eta],
        n,
        p,
        q,
        entrywise_err: entrywise,
        diagonal_err: diag,
        paired_err: paired,
        offdiag_err: off,
        aniso_err: aniso,
        avg_err: avg,
        psi,
        phi_n,
        kappa: kap,
        outside_spectrum: z.e < finite.lambda_minus || z.e > finite.lambda_plus,
        benchmarks: Benchmarks {
            phi_plus_psi: phi_n + psi,
            inv_n_eta: 1.0 / (nf * z.eta),
            outside: 1.0 / (nf * ke) + 1.0 / ((nf * z.eta).powi(2) * ke.sqrt()),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::sample_gaussian;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn kernel_pair_is_inverse() {
        for z in [c(0.6, 0.3), c(0.3, 0.0), c(-1.0, 2.0), c(2.5, 1e-3)] {
            let k = kernel(z);
            let ki = kernel_inverse(z).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let v = k[i][0] * ki[0][j] + k[i][1] * ki[1][j];
                    assert!((v - if i == j { 1.0 } else { 0.0 }).norm() < 1e-14);
                }
            }
        }
        assert!(kernel_inverse(c(0.0, 0.0)).is_err());
        assert!(kernel_inverse(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn h_is_symmetric_with_zero_corner() {
        let pair = sample_gaussian(6, 4, 15, 1).unwrap();
        let lin = build_h(&pair, c(0.4, 0.2)).unwrap();
        assert_eq!(lin.h, lin.h.transpose());
        assert!(lin.h.view((0, 0), (10, 10)).iter().all(|v| *v == c(0.0, 0.0)));
        let real = build_h_real(&pair, 0.3).unwrap();
        assert_eq!(real, real.transpose());
        let as_complex = build_h(&pair, c(0.3, 0.0)).unwrap().h;
        assert!(as_complex.iter().zip(real.iter()).all(|(a, b)| a.im == 0.0 && (a.re - b).abs() < 1e-15));
        assert!(build_h_real(&pair, 1.0).is_err());
        assert!(build_h(&pair, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn trace_identities_hold_exactly() {
        let pair = sample_gaussian(15, 10, 50, 4).unwrap();
        let z = c(0.5, 0.5);
        let b = resolvent(&pair, z, None).unwrap();
        assert!(b.m34_defect().norm() < 1e-12, "{}", b.m34_defect());
        assert!(b.m3m_defect().norm() < 1e-12, "{}", b.m3m_defect());
        assert!(b.residual.unwrap() < 1e-10);
    }

    #[test]
    fn regularization_is_a_small_perturbation() {
        let pair = sample_gaussian(15, 10, 50, 4).unwrap();
        let z = c(0.6, 0.5);
        let plain = resolvent(&pair, z, None).unwrap();
        let reg = resolvent(&pair, z, Some(4.0)).unwrap();
        let diff = (&plain.g - &reg.g).iter().map(|v| v.norm()).fold(0.0, f64::max);
        let gnorm = op_norm(&plain.g);
        // first-order perturbation bound ‖G‖² · |z| n^{-4}
        let bound = gnorm * gnorm * z.norm() * 50f64.powi(-4) * 1.5;
        assert!(diff > 0.0 && diff <= bound, "{diff} vs {bound}");
        let reg10 = resolvent(&pair, z, Some(DEFAULT_REG_EXPONENT)).unwrap();
        assert!(reg10.regularized);
    }

    #[test]
    fn schur_matches_direct_small() {
        let pair = sample_gaussian(9, 6, 30, 8).unwrap();
        let z = c(0.6, 0.3);
        let d = resolvent(&pair, z, None).unwrap();
        let s = blocks_via_schur(&pair, z).unwrap();
        let scale = d.g.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let diff = (&d.g - &s.g).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-10 * scale, "{diff}");
        assert!((d.m_r2 - s.m_r2).norm() < 1e-10);
    }

    #[test]
    fn local_law_rejects_points_outside_domain() {
        let pair = sample_gaussian(30, 20, 100, 1).unwrap();
        let model = SpectralModel::from_dims(30, 20, 100).unwrap();
        let opts = LocalLawOptions::default();
        let z = SpectralParameter::new(&model, 0.7, 1e-4).unwrap();
        assert!(matches!(local_law_errors(&pair, &model, &z, &opts), Err(Error::Domain(_))));
    }
}
