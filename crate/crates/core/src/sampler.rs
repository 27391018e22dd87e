//! Null-model data pairs `(X, Y)` with independent entries of variance `1/n`,
//! plus the truncation / recentering pipeline used for heavy-tailed input.
//!
//! The pipeline clips each entry at `n^{-c_φ}`, subtracts the mean of the
//! clipped law and rescales to variance `1/n`. This is the observable effect
//! of splitting entries into small, large and cutoff parts: the simulated
//! spectrum only sees the clipped, recentred matrix.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Pareto, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::row_stream;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Tail specification `P(|û| > t) = (t/t₀)^{-β}` for `t ≥ t₀`, unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSpec {
    pub beta: f64,
    pub scale: f64,
}

impl TailSpec {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 2.0) || !beta.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "tail exponent beta > 2 required for finite variance (beta={beta})"
            )));
        }
        Ok(Self {
            beta,
            scale: ((beta - 2.0) / beta).sqrt(),
        })
    }

    /// Whether `t⁴ P(|û| ≥ t) → 0`.
    pub fn satisfies_tail_condition(&self) -> bool {
        self.beta > 4.0
    }

    /// `P(|û| > t)`.
    pub fn exceedance(&self, t: f64) -> f64 {
        if t <= self.scale {
            1.0
        } else {
            (t / self.scale).powf(-self.beta)
        }
    }

    /// `t⁴ P(|û| ≥ t)`.
    pub fn fourth_moment_tail(&self, t: f64) -> f64 {
        t.powi(4) * self.exceedance(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Law {
    Gaussian,
    Rademacher,
    /// Uniform on `[−√3, √3]`.
    Uniform,
    HeavyTail { beta: f64 },
    /// Matrices supplied by the caller; only empirical moments are known.
    External,
}

impl Law {
    pub fn validate(&self) -> Result<()> {
        match self {
            Law::HeavyTail { beta } => TailSpec::new(*beta).map(|_| ()),
            Law::External => Err(Error::InvalidParameters("an external law cannot be sampled".into())),
            _ => Ok(()),
        }
    }

    pub fn tag(&self) -> u32 {
        match self {
            Law::Gaussian => 0,
            Law::Rademacher => 1,
            Law::Uniform => 2,
            Law::HeavyTail { .. } => 3,
            Law::External => 4,
        }
    }

    pub fn param(&self) -> f64 {
        match self {
            Law::HeavyTail { beta } => *beta,
            _ => 0.0,
        }
    }

    pub fn from_tag(tag: u32, param: f64) -> Result<Self> {
        Ok(match tag {
            0 => Law::Gaussian,
            1 => Law::Rademacher,
            2 => Law::Uniform,
            3 => Law::HeavyTail { beta: param },
            4 => Law::External,
            _ => return Err(Error::Format(format!("unknown law tag {tag}"))),
        })
    }

    pub fn name(&self) -> String {
        match self {
            Law::Gaussian => "gaussian".into(),
            Law::Rademacher => "rademacher".into(),
            Law::Uniform => "uniform".into(),
            Law::HeavyTail { beta } => format!("heavy_tail(beta={beta})"),
            Law::External => "external".into(),
        }
    }

    /// Almost-sure bound on `|û|`, if the law is bounded.
    pub fn bound(&self) -> Option<f64> {
        match self {
            Law::Rademacher => Some(1.0),
            Law::Uniform => Some(SQRT3),
            _ => None,
        }
    }

    /// `(E[û 1{|û|≤a}], E[û² 1{|û|≤a}])` for the unit-variance base law.
    pub fn truncated_moments(&self, a: f64) -> Option<(f64, f64)> {
        let second = match self {
            Law::External => return None,
            Law::Gaussian => {
                let phi = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt();
                libm::erf(a / std::f64::consts::SQRT_2) - 2.0 * a * phi
            }
            Law::Rademacher => {
                if a >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Law::Uniform => {
                if a >= SQRT3 {
                    1.0
                } else {
                    a.powi(3) / (3.0 * SQRT3)
                }
            }
            Law::HeavyTail { beta } => {
                let t0 = ((beta - 2.0) / beta).sqrt();
                if a <= t0 {
                    0.0
                } else {
                    1.0 - beta * t0.powf(*beta) * a.powf(2.0 - beta) / (beta - 2.0)
                }
            }
        };
        // all base laws are symmetric
        Some((0.0, second))
    }

    /// One mean-zero, unit-variance draw.
    fn draw<R: Rng>(&self, rng: &mut R, pareto: Option<&Pareto<f64>>) -> f64 {
        match self {
            Law::Gaussian => rng.sample(StandardNormal),
            Law::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Law::Uniform => SQRT3 * (2.0 * rng.random::<f64>() - 1.0),
            Law::External => unreachable!("validate rejects external laws"),
            Law::HeavyTail { .. } => {
                let mag = pareto.expect("pareto distribution for heavy tail").sample(rng);
                if rng.random::<bool>() {
                    mag
                } else {
                    -mag
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMeta {
    pub law: Law,
    pub seed: u64,
    /// Support level `φ_n`.
    pub support: f64,
    /// Truncation exponent, if the pair went through the clipping pipeline.
    pub c_phi: Option<f64>,
}

/// A realization of the `p×n` and `q×n` data matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPair {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub meta: PairMeta,
}

impl DataPair {
    pub fn p(&self) -> usize {
        self.x.nrows()
    }
    pub fn q(&self) -> usize {
        self.y.nrows()
    }
    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    /// Build a pair from explicit matrices (no distributional claim).
    pub fn from_matrices(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.ncols() != y.ncols() {
            return Err(Error::Dimension(format!(
                "X has {} columns but Y has {}",
                x.ncols(),
                y.ncols()
            )));
        }
        let support = x.amax().max(y.amax());
        Ok(Self {
            x,
            y,
            meta: PairMeta {
                law: Law::External,
                seed: 0,
                support,
                c_phi: None,
            },
        })
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.x.amax().max(self.y.amax())
    }
}

fn check_dims(p: usize, q: usize, n: usize) -> Result<()> {
    if p == 0 || q == 0 {
        return Err(Error::Dimension("p and q must be positive".into()));
    }
    if p >= n || q >= n {
        return Err(Error::Dimension(format!("p < n and q < n required (p={p}, q={q}, n={n})")));
    }
    if p > u32::MAX as usize || q > u32::MAX as usize {
        return Err(Error::Dimension("row count exceeds stream index range".into()));
    }
    Ok(())
}

fn fill_rows(rows: usize, n: usize, seed: u64, matrix_id: u32, law: Law) -> DMatrix<f64> {
    let pareto = match law {
        Law::HeavyTail { beta } => {
            Some(Pareto::new(((beta - 2.0) / beta).sqrt(), beta).expect("validated tail exponent"))
        }
        _ => None,
    };
    let scale = 1.0 / (n as f64).sqrt();
    let draw_row = |i: usize| -> Vec<f64> {
        let mut rng = row_stream(seed, matrix_id, i as u32);
        (0..n).map(|_| scale * law.draw(&mut rng, pareto.as_ref())).collect()
    };
    #[cfg(feature = "parallel")]
    let data: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..rows).into_par_iter().map(draw_row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let data: Vec<Vec<f64>> = (0..rows).map(draw_row).collect();
    DMatrix::from_fn(rows, n, |i, j| data[i][j])
}

/// Sample a pair with i.i.d. entries `n^{-1/2}·û`, `û` drawn from `law`.
pub fn sample(p: usize, q: usize, n: usize, seed: u64, law: Law) -> Result<DataPair> {
    check_dims(p, q, n)?;
    law.validate()?;
    let x = fill_rows(p, n, seed, 0, law);
    let y = fill_rows(q, n, seed, 1, law);
    let root_n = (n as f64).sqrt();
    let support = match law {
        Law::Gaussian => 1.0 / root_n,
        Law::Rademacher | Law::Uniform => law.bound().unwrap_or(1.0) / root_n,
        Law::HeavyTail { .. } | Law::External => x.amax().max(y.amax()),
    };
    Ok(DataPair {
        x,
        y,
        meta: PairMeta {
            law,
            seed,
            support,
            c_phi: None,
        },
    })
}

pub fn sample_gaussian(p: usize, q: usize, n: usize, seed: u64) -> Result<DataPair> {
    sample(p, q, n, seed, Law::Gaussian)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundedLaw {
    Rademacher,
    Uniform,
}

pub fn sample_bounded(p: usize, q: usize, n: usize, seed: u64, law: BoundedLaw) -> Result<DataPair> {
    let law = match law {
        BoundedLaw::Rademacher => Law::Rademacher,
        BoundedLaw::Uniform => Law::Uniform,
    };
    sample(p, q, n, seed, law)
}

pub fn sample_heavy_tail(p: usize, q: usize, n: usize, seed: u64, tail: TailSpec) -> Result<DataPair> {
    sample(p, q, n, seed, Law::HeavyTail { beta: tail.beta })
}

/// Clip entries at `n^{-c_φ}`, recentre and rescale to variance `1/n`.
///
/// Moments of the clipped law are analytic when the pair came straight from
/// a known base law, otherwise estimated from all entries of both matrices.
pub fn truncate_center_rescale(pair: &DataPair, c_phi: f64) -> Result<DataPair> {
    if !(c_phi > 0.0 && c_phi < 0.5) {
        return Err(Error::InvalidParameters(format!("0 < c_phi < 1/2 required (c_phi={c_phi})")));
    }
    let n = pair.n();
    let root_n = (n as f64).sqrt();
    let cutoff = (n as f64).powf(0.5 - c_phi);
    let clip = |v: f64| {
        let u = v * root_n;
        if u.abs() <= cutoff {
            u
        } else {
            0.0
        }
    };
    let analytic = match pair.meta.c_phi {
        None => pair.meta.law.truncated_moments(cutoff),
        Some(_) => None,
    };
    let (mean, second) = if let Some(m) = analytic {
        m
    } else {
        let count = (pair.x.len() + pair.y.len()) as f64;
        let (s1, s2) = pair
            .x
            .iter()
            .chain(pair.y.iter())
            .map(|&v| clip(v))
            .fold((0.0, 0.0), |(a, b), u| (a + u, b + u * u));
        (s1 / count, s2 / count)
    };
    let var = second - mean * mean;
    if !(var > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "degenerate truncation: clipped law has zero variance at cutoff {cutoff}"
        )));
    }
    let sd = var.sqrt();
    let map = |v: f64| (clip(v) - mean) / (sd * root_n);
    let x = pair.x.map(map);
    let y = pair.y.map(map);
    let support = x.amax().max(y.amax());
    Ok(DataPair {
        x,
        y,
        meta: PairMeta {
            support,
            c_phi: Some(c_phi),
            ..pair.meta
        },
    })
}

const MAGIC: &[u8; 8] = b"CCAPAIR\0";
const VERSION: u32 = 1;

/// Write a pair: header then `X` and `Y` as row-major little-endian `f64`.
///
/// Header layout (little-endian): magic `CCAPAIR\0`, version `u32`, `p`, `q`,
/// `n`, seed as `u64`, law tag `u32`, law parameter `f64`, support `f64`,
/// truncation exponent `f64` (NaN when untruncated).
pub fn write_pair<W: Write>(pair: &DataPair, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    for d in [pair.p(), pair.q(), pair.n()] {
        w.write_u64::<LittleEndian>(d as u64)?;
    }
    w.write_u64::<LittleEndian>(pair.meta.seed)?;
    w.write_u32::<LittleEndian>(pair.meta.law.tag())?;
    w.write_f64::<LittleEndian>(pair.meta.law.param())?;
    w.write_f64::<LittleEndian>(pair.meta.support)?;
    w.write_f64::<LittleEndian>(pair.meta.c_phi.unwrap_or(f64::NAN))?;
    for m in [&pair.x, &pair.y] {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                w.write_f64::<LittleEndian>(m[(i, j)])?;
            }
        }
    }
    Ok(())
}

pub fn read_pair<R: Read>(mut r: R) -> Result<DataPair> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let p = r.read_u64::<LittleEndian>()? as usize;
    let q = r.read_u64::<LittleEndian>()? as usize;
    let n = r.read_u64::<LittleEndian>()? as usize;
    let seed = r.read_u64::<LittleEndian>()?;
    let tag = r.read_u32::<LittleEndian>()?;
    let param = r.read_f64::<LittleEndian>()?;
    let support = r.read_f64::<LittleEndian>()?;
    let c_phi = r.read_f64::<LittleEndian>()?;
    let law = Law::from_tag(tag, param)?;
    let mut read_matrix = |rows: usize| -> Result<DMatrix<f64>> {
        let mut data = vec![0.0; rows * n];
        r.read_f64_into::<LittleEndian>(&mut data)?;
        Ok(DMatrix::from_row_slice(rows, n, &data))
    };
    let x = read_matrix(p)?;
    let y = read_matrix(q)?;
    Ok(DataPair {
        x,
        y,
        meta: PairMeta {
            law,
            seed,
            support,
            c_phi: if c_phi.is_nan() { None } else { Some(c_phi) },
        },
    })
}
