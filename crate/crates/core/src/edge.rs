//! Edge statistics: Tracy–Widom rescaling of the largest sample canonical
//! correlations, a GOE reference sampler, two-sample KS, and the TW and
//! rigidity Monte Carlo experiments.

use std::io::Write;
use std::ops::Range;

use nalgebra::{DMatrix, SymmetricTridiagonal};
#[cfg(test)]
use nalgebra::SymmetricEigen;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::map_indexed;
use crate::rng::derive_seed;
use crate::sampler::{sample, truncate_center_rescale, DataPair, Law};
use crate::scc::{ccc_eigenvalues, profile_with_gammas, SpectrumResult};
use crate::spectral_model::SpectralModel;

const TAG_TW: u64 = 0x7477_6564_6765;
const TAG_GOE: u64 = 0x676f_65;
const TAG_RESAMPLE: u64 = 0x7265_7361_6d70;
const TAG_RIGIDITY: u64 = 0x7269_6769_64;

/// Attempts per trial before a singular draw counts as a hard failure.
const MAX_RESAMPLES: u32 = 8;

/// `(p, q) = (round(c1 n), round(c2 n))`.
pub fn dims_for(n: usize, c1: f64, c2: f64) -> (usize, usize) {
    ((c1 * n as f64).round() as usize, (c2 * n as f64).round() as usize)
}

/// `n^{2/3}(λ_k − λ+)/c_TW` for `k ≤ k_max`.
pub fn tw_rescale(spec: &SpectrumResult, model: &SpectralModel, k_max: usize) -> Result<Vec<f64>> {
    model.check_dims(spec.p, spec.q, spec.n)?;
    let scale = (spec.n as f64).powf(2.0 / 3.0) / model.c_tw;
    Ok(spec
        .eigenvalues
        .iter()
        .take(k_max)
        .map(|l| scale * (l - model.lambda_plus))
        .collect())
}

/// Symmetric tridiagonal GOE model with edge at 2: diagonal `N(0, 2/n)`,
/// off-diagonals `χ_{n−k}/√n`.
pub fn goe_tridiagonal<R: Rng>(n: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let sd = (2.0 / nf).sqrt();
    let diag = (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
    let off = (1..n)
        .map(|k| {
            let chi2 = ChiSquared::new((n - k) as f64).expect("positive degrees of freedom");
            (chi2.sample(rng) / nf).sqrt()
        })
        .collect();
    (diag, off)
}

/// Number of eigenvalues strictly below `x` (Sturm sequence).
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        d = diag[i] - x - if i == 0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (diag[i].abs() + x.abs() + 1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k` largest eigenvalues of a symmetric tridiagonal matrix, descending.
pub fn tridiagonal_top_k(diag: &[f64], off: &[f64], k: usize) -> Vec<f64> {
    let n = diag.len();
    let k = k.min(n);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        // the (j+1)-th largest is where count(< x) crosses n − j − 1
        let target = n - j - 1;
        let (mut a, mut b) = (lo, hi);
        while b - a > 1e-13 * (1.0 + a.abs().max(b.abs())) {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if sturm_count(diag, off, mid) > target {
                b = mid;
            } else {
                a = mid;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// `k` largest eigenvalues of a dense GOE with off-diagonal variance `1/n`,
/// via Householder reduction of the full matrix.
pub fn goe_dense_top_k<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let m = (&g + g.transpose()) / (2.0 * n as f64).sqrt();
    let tri = SymmetricTridiagonal::new(m);
    let diag: Vec<f64> = tri.diagonal().iter().copied().collect();
    let off: Vec<f64> = tri.off_diagonal().iter().copied().collect();
    tridiagonal_top_k(&diag, &off, k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoeReference {
    pub n_goe: usize,
    pub trials: usize,
    pub k_max: usize,
    /// Per trial, `n^{2/3}(λ_k − 2)` for `k = 1..k_max`, descending.
    pub values: Vec<Vec<f64>>,
}

impl GoeReference {
    pub fn marginal(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[k]).collect()
    }
}

pub fn goe_reference(n_goe: usize, trials: usize, k_max: usize, seed: u64) -> Result<GoeReference> {
    if n_goe < 50 {
        return Err(Error::InvalidParameters(format!("n_goe >= 50 required (n_goe={n_goe})")));
    }
    if trials == 0 || k_max == 0 {
        return Err(Error::InvalidParameters("trials and k_max must be positive".into()));
    }
    let scale = (n_goe as f64).powf(2.0 / 3.0);
    let values = map_indexed(0..trials, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_GOE, t as u64));
        let (d, o) = goe_tridiagonal(n_goe, &mut rng);
        tridiagonal_top_k(&d, &o, k_max)
            .into_iter()
            .map(|l| scale * (l - 2.0))
            .collect()
    });
    Ok(GoeReference {
        n_goe,
        trials,
        k_max,
        values,
    })
}

/// Two-sample Kolmogorov–Smirnov statistic `sup_x |F_a(x) − F_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameters("KS needs two non-empty samples".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::InvalidParameters("KS samples contain NaN".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwConfig {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub law: Law,
    pub c_phi: Option<f64>,
    pub trials: usize,
    pub k_max: usize,
    pub seed: u64,
    pub n_goe: usize,
    pub goe_trials: usize,
}

impl TwConfig {
    pub fn from_ratios(n: usize, c1: f64, c2: f64, law: Law, trials: usize, seed: u64) -> Self {
        let (p, q) = dims_for(n, c1, c2);
        Self {
            n,
            p,
            q,
            law,
            c_phi: None,
            trials,
            k_max: 3,
            seed,
            n_goe: n,
            goe_trials: trials,
        }
    }

    pub fn model(&self) -> Result<SpectralModel> {
        SpectralModel::from_dims(self.p, self.q, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTrial {
    pub index: usize,
    /// Seed of the accepted draw.
    pub seed: u64,
    /// Singular draws replaced before acceptance.
    pub resamples: u32,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSamples {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub law: Law,
    pub k_max: usize,
    /// Sorted by trial index.
    pub trials: Vec<EdgeTrial>,
    /// Trial indices that exhausted their resample budget.
    pub failed: Vec<usize>,
}

impl EdgeSamples {
    pub fn marginal(&self, k: usize) -> Vec<f64> {
        self.trials.iter().map(|t| t.values[k]).collect()
    }

    pub fn resampled(&self) -> u32 {
        self.trials.iter().map(|t| t.resamples).sum()
    }

    /// Union of two runs over disjoint trial ranges.
    pub fn merge(mut self, other: EdgeSamples) -> Result<EdgeSamples> {
        if (self.n, self.p, self.q, self.k_max, self.law) != (other.n, other.p, other.q, other.k_max, other.law) {
            return Err(Error::InvalidParameters("cannot merge edge samples from different configurations".into()));
        }
        self.trials.extend(other.trials);
        self.trials.sort_by_key(|t| t.index);
        if self.trials.windows(2).any(|w| w[0].index == w[1].index) {
            return Err(Error::InvalidParameters("merged edge samples share a trial index".into()));
        }
        self.failed.extend(other.failed);
        self.failed.sort_unstable();
        Ok(self)
    }

    /// CSV with columns `trial,seed,resamples,stat_1..stat_k`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["trial".to_string(), "seed".into(), "resamples".into()];
        header.extend((1..=self.k_max).map(|k| format!("stat_{k}")));
        out.write_record(&header)?;
        for t in &self.trials {
            let mut row = vec![t.index.to_string(), t.seed.to_string(), t.resamples.to_string()];
            row.extend(t.values.iter().map(|v| format!("{v:.17e}")));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Pair for a seed, passed through the truncation pipeline when requested.
fn draw_pair(p: usize, q: usize, n: usize, seed: u64, law: Law, c_phi: Option<f64>) -> Result<DataPair> {
    let pair = sample(p, q, n, seed, law)?;
    match c_phi {
        Some(c) => truncate_center_rescale(&pair, c),
        None => Ok(pair),
    }
}

/// Sample spectrum for a trial seed, resampling with derived seeds on
/// singular draws. Returns the accepted seed, the resample count and the spectrum.
fn trial_spectrum(
    p: usize,
    q: usize,
    n: usize,
    seed: u64,
    law: Law,
    c_phi: Option<f64>,
) -> Result<Option<(u64, u32, SpectrumResult)>> {
    let mut s = seed;
    for attempt in 0..=MAX_RESAMPLES {
        match ccc_eigenvalues(&draw_pair(p, q, n, s, law, c_phi)?) {
            Ok(spec) => return Ok(Some((s, attempt, spec))),
            Err(Error::Singular { .. }) | Err(Error::OutOfRange { .. }) => {
                s = derive_seed(seed, TAG_RESAMPLE, attempt as u64 + 1);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

fn check_failure_rate(failed: usize, trials: usize) -> Result<()> {
    if failed * 100 > trials {
        return Err(Error::Numerical {
            what: "failed-trial fraction above 1%",
            achieved: failed as f64 / trials as f64,
        });
    }
    Ok(())
}

/// Edge samples for the trial indices in `range`.
pub fn tw_trials(cfg: &TwConfig, range: Range<usize>) -> Result<EdgeSamples> {
    let model = cfg.model()?;
    cfg.law.validate()?;
    if cfg.k_max == 0 || cfg.k_max > cfg.q {
        return Err(Error::InvalidParameters(format!("1 <= k_max <= q required (k_max={})", cfg.k_max)));
    }
    let outcomes = map_indexed(range.clone(), |t| {
        let seed = derive_seed(cfg.seed, TAG_TW, t as u64);
        trial_spectrum(cfg.p, cfg.q, cfg.n, seed, cfg.law, cfg.c_phi).and_then(|r| {
            r.map(|(s, resamples, spec)| {
                tw_rescale(&spec, &model, cfg.k_max).map(|values| EdgeTrial {
                    index: t,
                    seed: s,
                    resamples,
                    values,
                })
            })
            .transpose()
        })
    });
    let mut trials = Vec::with_capacity(range.len());
    let mut failed = Vec::new();
    for (t, o) in range.zip(outcomes) {
        match o? {
            Some(tr) => trials.push(tr),
            None => failed.push(t),
        }
    }
    Ok(EdgeSamples {
        n: cfg.n,
        p: cfg.p,
        q: cfg.q,
        law: cfg.law,
        k_max: cfg.k_max,
        trials,
        failed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    pub k: usize,
    pub mean: f64,
    pub variance: f64,
    pub goe_mean: f64,
    pub goe_variance: f64,
    pub ks: f64,
    /// Quantiles at 5, 25, 50, 75, 95 percent.
    pub quantiles: [f64; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwReport {
    pub config: TwConfig,
    pub lambda_plus: f64,
    pub c_tw: f64,
    pub accepted: usize,
    pub failed: usize,
    pub resampled: u32,
    pub marginals: Vec<Marginal>,
    /// KS of the top-1 statistic against the GOE reference.
    pub ks_top1: f64,
    /// Fraction of top-1 statistics above the GOE 99% quantile.
    pub upper_tail_mass: f64,
    /// Set when `upper_tail_mass` exceeds 1% by more than four binomial sd.
    pub upper_tail_flag: bool,
}

pub fn summarize_tw(cfg: &TwConfig, samples: &EdgeSamples, goe: &GoeReference) -> Result<TwReport> {
    let model = cfg.model()?;
    if samples.trials.is_empty() {
        return Err(Error::Numerical {
            what: "no accepted trials",
            achieved: 0.0,
        });
    }
    let k_max = cfg.k_max.min(goe.k_max);
    let mut marginals = Vec::with_capacity(k_max);
    for k in 0..k_max {
        let mut a = samples.marginal(k);
        let b = goe.marginal(k);
        let (mean, variance) = mean_var(&a);
        let (goe_mean, goe_variance) = mean_var(&b);
        let ks = ks_two_sample(&a, &b)?;
        a.sort_by(f64::total_cmp);
        let quantiles = [0.05, 0.25, 0.5, 0.75, 0.95].map(|p| quantile_sorted(&a, p));
        marginals.push(Marginal {
            k: k + 1,
            mean,
            variance,
            goe_mean,
            goe_variance,
            ks,
            quantiles,
        });
    }
    let mut g1 = goe.marginal(0);
    g1.sort_by(f64::total_cmp);
    let q99 = quantile_sorted(&g1, 0.99);
    let top = samples.marginal(0);
    let upper = top.iter().filter(|v| **v > q99).count() as f64 / top.len() as f64;
    let sd = (0.01 * 0.99 / top.len() as f64).sqrt();
    Ok(TwReport {
        config: *cfg,
        lambda_plus: model.lambda_plus,
        c_tw: model.c_tw,
        accepted: samples.trials.len(),
        failed: samples.failed.len(),
        resampled: samples.resampled(),
        ks_top1: marginals[0].ks,
        marginals,
        upper_tail_mass: upper,
        upper_tail_flag: upper > 0.01 + 4.0 * sd,
    })
}

/// Full TW run: edge samples, GOE reference and their comparison.
pub fn tw_experiment(cfg: &TwConfig) -> Result<(TwReport, EdgeSamples, GoeReference)> {
    let samples = tw_trials(cfg, 0..cfg.trials)?;
    check_failure_rate(samples.failed.len(), cfg.trials)?;
    let goe = goe_reference(cfg.n_goe, cfg.goe_trials, cfg.k_max, cfg.seed)?;
    let report = summarize_tw(cfg, &samples, &goe)?;
    Ok((report, samples, goe))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidityConfig {
    pub n0: usize,
    pub c1: f64,
    pub c2: f64,
    pub law: Law,
    pub trials: usize,
    pub seed: u64,
    /// Indices `i > (1−ε)q` are excluded when `λ− < ε`.
    pub lower_edge_eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityTrial {
    pub n: usize,
    pub index: usize,
    pub seed: u64,
    pub resamples: u32,
    /// `|λ_{q/2} − γ_{q/2}|`.
    pub mid_dev: f64,
    /// `|λ_1 − λ+|`.
    pub edge_dev: f64,
    /// Largest normalized deviation over admissible indices.
    pub max_normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityLevel {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub accepted: usize,
    pub failed: usize,
    pub mean_mid_dev: f64,
    pub mean_edge_dev: f64,
    pub median_max_normalized: f64,
    pub max_max_normalized: f64,
    /// Per-index median and 95% quantile of the normalized deviations.
    pub index_median: Vec<f64>,
    pub index_q95: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub config: RigidityConfig,
    pub levels: Vec<RigidityLevel>,
    /// Least-squares slope of `log mean |λ_{q/2} − γ_{q/2}|` against `log n`.
    pub bulk_slope: f64,
    /// Same for `|λ_1 − λ+|`.
    pub edge_slope: f64,
    pub trials: Vec<RigidityTrial>,
}

/// Least-squares slope of `log y` on `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mx, _) = mean_var(&lx);
    let (my, _) = mean_var(&ly);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Rigidity profiles at `n ∈ {n₀, 2n₀, 4n₀}` and the fitted decay exponents.
pub fn rigidity_experiment(cfg: &RigidityConfig) -> Result<RigidityReport> {
    SpectralModel::new(cfg.c1, cfg.c2)?;
    cfg.law.validate()?;
    if cfg.trials == 0 {
        return Err(Error::InvalidParameters("trials must be positive".into()));
    }
    let mut levels = Vec::new();
    let mut all = Vec::new();
    for n in [cfg.n0, 2 * cfg.n0, 4 * cfg.n0] {
        let (p, q) = dims_for(n, cfg.c1, cfg.c2);
        let model = SpectralModel::from_dims(p, q, n)?;
        let gammas = model.classical_locations(q)?;
        let mid = (q / 2).max(1) - 1;
        let outcomes = map_indexed(0..cfg.trials, |t| {
            let seed = derive_seed(cfg.seed, TAG_RIGIDITY ^ n as u64, t as u64);
            trial_spectrum(p, q, n, seed, cfg.law, None).map(|r| {
                r.map(|(s, resamples, spec)| {
                    let prof = profile_with_gammas(&spec, gammas.clone(), model.lambda_minus, cfg.lower_edge_eps);
                    let trial = RigidityTrial {
                        n,
                        index: t,
                        seed: s,
                        resamples,
                        mid_dev: (spec.eigenvalues[mid] - gammas[mid]).abs(),
                        edge_dev: (spec.eigenvalues[0] - model.lambda_plus).abs(),
                        max_normalized: prof.max_admissible(),
                    };
                    (trial, prof.deviations)
                })
            })
        });
        let mut trials = Vec::new();
        let mut devs = Vec::new();
        let mut failed = 0;
        for o in outcomes {
            match o? {
                Some((t, d)) => {
                    trials.push(t);
                    devs.push(d);
                }
                None => failed += 1,
            }
        }
        check_failure_rate(failed, cfg.trials)?;
        let (mean_mid, _) = mean_var(&trials.iter().map(|t| t.mid_dev).collect::<Vec<_>>());
        let (mean_edge, _) = mean_var(&trials.iter().map(|t| t.edge_dev).collect::<Vec<_>>());
        let mut maxes: Vec<f64> = trials.iter().map(|t| t.max_normalized).collect();
        maxes.sort_by(f64::total_cmp);
        let (mut index_median, mut index_q95) = (Vec::with_capacity(q), Vec::with_capacity(q));
        for i in 0..q {
            let mut col: Vec<f64> = devs.iter().map(|d| d[i]).collect();
            col.sort_by(f64::total_cmp);
            index_median.push(quantile_sorted(&col, 0.5));
            index_q95.push(quantile_sorted(&col, 0.95));
        }
        levels.push(RigidityLevel {
            n,
            p,
            q,
            accepted: trials.len(),
            failed,
            mean_mid_dev: mean_mid,
            mean_edge_dev: mean_edge,
            median_max_normalized: quantile_sorted(&maxes, 0.5),
            max_max_normalized: *maxes.last().unwrap(),
            index_median,
            index_q95,
        });
        all.extend(trials);
    }
    let ns: Vec<f64> = levels.iter().map(|l| l.n as f64).collect();
    let bulk: Vec<f64> = levels.iter().map(|l| l.mean_mid_dev).collect();
    let edge: Vec<f64> = levels.iter().map(|l| l.mean_edge_dev).collect();
    Ok(RigidityReport {
        config: *cfg,
        bulk_slope: loglog_slope(&ns, &bulk),
        edge_slope: loglog_slope(&ns, &edge),
        levels,
        trials: all,
    })
}
