//! Deterministic limit objects of the null CCA model: Wachter density, its
//! quantiles, the Stieltjes transforms `m_{1c}..m_{4c}`, `h`, `m_c`, the
//! deterministic resolvent limit `Π(z)` and the control parameter `Ψ(z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Square root on the branch with non-negative imaginary part.
///
/// For `w` on the non-negative real axis this is the positive root.
pub fn sqrt_upper(w: Complex64) -> Complex64 {
    let r = w.sqrt();
    if r.im < 0.0 || (r.im == 0.0 && r.re < 0.0) {
        -r
    } else {
        r
    }
}

/// Principal `z^{1/2}`; on the upper half plane this is the root with
/// positive imaginary part.
pub fn sqrt_z(z: Complex64) -> Complex64 {
    z.sqrt()
}

/// Edges `(λ−, λ+)` of the Wachter law.
///
/// No constraint checks, so degenerate substitutions such as `c2 = 0` are allowed.
pub fn edges(c1: f64, c2: f64) -> (f64, f64) {
    let a = (c1 * (1.0 - c2)).sqrt();
    let b = (c2 * (1.0 - c1)).sqrt();
    ((a - b).powi(2), (a + b).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub c1: f64,
    pub c2: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub c_tw: f64,
}

impl SpectralModel {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(c1.is_finite() && c2.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "ratios must be finite (c1={c1}, c2={c2})"
            )));
        }
        if c2 <= 0.0 {
            return Err(Error::InvalidParameters(format!("0 < c2 violated (c2={c2})")));
        }
        if c2 > c1 {
            return Err(Error::InvalidParameters(format!(
                "c2 <= c1 violated (c1={c1}, c2={c2})"
            )));
        }
        if c1 + c2 >= 1.0 {
            return Err(Error::InvalidParameters(format!(
                "c1 + c2 < 1 violated (c1 + c2 = {})",
                c1 + c2
            )));
        }
        let (lambda_minus, lambda_plus) = edges(c1, c2);
        let c_tw = (lambda_plus.powi(2) * (1.0 - lambda_plus).powi(2)
            / (c1 * c2 * (1.0 - c1) * (1.0 - c2)).sqrt())
        .cbrt();
        Ok(Self {
            c1,
            c2,
            lambda_minus,
            lambda_plus,
            c_tw,
        })
    }

    /// Model at the finite-sample ratios `p/n`, `q/n`.
    pub fn from_dims(p: usize, q: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("n must be positive".into()));
        }
        Self::new(p as f64 / n as f64, q as f64 / n as f64)
    }

    /// True when `p/n`, `q/n` match the model ratios within `1/n`.
    pub fn matches_dims(&self, p: usize, q: usize, n: usize) -> bool {
        let tol = 1.0 / n as f64 + 1e-12;
        (p as f64 / n as f64 - self.c1).abs() <= tol && (q as f64 / n as f64 - self.c2).abs() <= tol
    }

    pub(crate) fn check_dims(&self, p: usize, q: usize, n: usize) -> Result<()> {
        if self.matches_dims(p, q, n) {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!(
                "model ratios ({}, {}) do not match p/n={}/{n}, q/n={}/{n}",
                self.c1, self.c2, p, q
            )))
        }
    }

    /// `(λ+ + λ−)/2` and `(λ+ − λ−)/2`.
    fn center_half(&self) -> (f64, f64) {
        (
            0.5 * (self.lambda_plus + self.lambda_minus),
            0.5 * (self.lambda_plus - self.lambda_minus),
        )
    }

    /// Wachter density; zero outside `[λ−, λ+]` and at the endpoints.
    pub fn density(&self, x: f64) -> f64 {
        if x <= self.lambda_minus || x >= self.lambda_plus {
            return 0.0;
        }
        let r = ((self.lambda_plus - x) * (x - self.lambda_minus)).sqrt();
        r / (2.0 * PI * self.c2 * x * (1.0 - x))
    }

    /// Density mass in the angle variable `x = center + half·cos θ`, which
    /// removes both square-root edges.
    fn angular_density(&self, theta: f64) -> f64 {
        let (center, half) = self.center_half();
        let x = center + half * theta.cos();
        let s = theta.sin();
        if x <= 0.0 {
            // lower edge at the origin: the integrand tends to half/(2π c2)·(1 − cos θ)
            return half * (1.0 - theta.cos()) / (2.0 * PI * self.c2);
        }
        half * half * s * s / (2.0 * PI * self.c2 * x * (1.0 - x))
    }

    fn angle_of(&self, x: f64) -> f64 {
        let (center, half) = self.center_half();
        if half == 0.0 {
            return 0.0;
        }
        ((x - center) / half).clamp(-1.0, 1.0).acos()
    }

    fn tail_mass_angle(&self, theta: f64) -> Result<f64> {
        quadrature::integrate(|t| self.angular_density(t), 0.0, theta, 1e-14, 1e-13)
    }

    /// `∫_x^∞ f`.
    pub fn tail_mass(&self, x: f64) -> Result<f64> {
        if x >= self.lambda_plus {
            return Ok(0.0);
        }
        let x = x.max(self.lambda_minus);
        self.tail_mass_angle(self.angle_of(x))
    }

    /// Total mass of the density.
    pub fn total_mass(&self) -> Result<f64> {
        self.tail_mass_angle(PI)
    }

    /// Classical location `γ_j = sup{x : ∫_x^∞ f > (j−1)/q}`.
    pub fn classical_location(&self, j: usize, q: usize) -> Result<f64> {
        if j == 0 || j > q {
            return Err(Error::InvalidParameters(format!("1 <= j <= q violated (j={j}, q={q})")));
        }
        if j == 1 {
            return Ok(self.lambda_plus);
        }
        let target = (j - 1) as f64 / q as f64;
        let (center, half) = self.center_half();
        let (mut lo, mut hi) = (0.0_f64, PI);
        // bisection in θ; |dx| <= half·|dθ|
        while half * (hi - lo) > 1e-11 {
            let mid = 0.5 * (lo + hi);
            if self.tail_mass_angle(mid)? > target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(center + half * (0.5 * (lo + hi)).cos())
    }

    /// `γ_1, …, γ_q`.
    pub fn classical_locations(&self, q: usize) -> Result<Vec<f64>> {
        (1..=q).map(|j| self.classical_location(j, q)).collect()
    }

    /// `√((z−λ−)(z−λ+))` on the branch with non-negative imaginary part.
    ///
    /// For real `z` outside the support the boundary value from the upper
    /// half plane is returned: positive above `λ+`, negative below `λ−`.
    pub fn edge_sqrt(&self, z: Complex64) -> Complex64 {
        let w = (z - self.lambda_minus) * (z - self.lambda_plus);
        if z.im == 0.0 {
            let r = w.re.max(0.0).sqrt();
            let (center, _) = self.center_half();
            return Complex64::new(if z.re < center { -r } else { r }, 0.0);
        }
        sqrt_upper(w)
    }

    fn check_spectral_arg(&self, z: Complex64) -> Result<()> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.im < 0.0 {
            return Err(Error::Domain(format!("Im z >= 0 required, got {z}")));
        }
        if z.im == 0.0 {
            if z.re == 0.0 {
                return Err(Error::BranchCut { re: z.re, im: 0.0, reason: "pole at z = 0" });
            }
            if z.re >= self.lambda_minus && z.re <= self.lambda_plus {
                return Err(Error::BranchCut {
                    re: z.re,
                    im: 0.0,
                    reason: "real z inside the support",
                });
            }
        }
        Ok(())
    }

    /// Closed-form Stieltjes transforms at `z`.
    pub fn stieltjes(&self, z: Complex64) -> Result<StieltjesQuadruple> {
        self.check_spectral_arg(z)?;
        let (c1, c2) = (self.c1, self.c2);
        let s = self.edge_sqrt(z);
        let m3 = 0.5 * ((1.0 - 2.0 * c1) * z + c1 - c2 + s);
        let m4 = 0.5 * ((1.0 - 2.0 * c2) * z + c2 - c1 + s);
        let (m1, m2) = if (z - 1.0).norm() < 1e-6 {
            // The closed forms are 0/0 at z = 1; their limits are −c1/m3c and
            // −c2/m4c, i.e. −c_α/(1 − c1 − c2) at z = 1 exactly.
            (-c1 / m3, -c2 / m4)
        } else {
            let num = -z + c1 + c2 + s;
            let zz = z * (1.0 - z);
            (
                num / (2.0 * (1.0 - c1) * zz) - c1 / ((1.0 - c1) * z),
                num / (2.0 * (1.0 - c2) * zz) - c2 / ((1.0 - c2) * z),
            )
        };
        let h = 0.5 * sqrt_z(z) * (-z + (2.0 - c1 - c2) + s);
        let m = (1.0 - c2) / c2 * m2;
        Ok(StieltjesQuadruple { m1, m2, m3, m4, h, m })
    }

    /// Absolute residuals of the self-consistent system at `z`:
    /// `m1 + c1/m3`, `m2 + c2/m4`, `m3 − m4 − (1−z)(c1−c2)`,
    /// the `m3` fixed-point relation and the quadratic for `m3`.
    pub fn sc_residuals(&self, q: &StieltjesQuadruple, z: Complex64) -> [f64; 5] {
        let (c1, c2) = (self.c1, self.c2);
        let zm1 = z - 1.0;
        [
            (q.m1 + c1 / q.m3).norm(),
            (q.m2 + c2 / q.m4).norm(),
            (q.m3 - q.m4 - (1.0 - z) * (c1 - c2)).norm(),
            (q.m3 * (1.0 / z - (q.m1 + q.m2) + zm1 * q.m1 * q.m2) - (1.0 - zm1 * q.m2)).norm(),
            (q.m3 * q.m3 + self.quadratic_linear_coeff(z) * q.m3 + c1 * (c1 - 1.0) * z * zm1).norm(),
        ]
    }

    fn quadratic_linear_coeff(&self, z: Complex64) -> Complex64 {
        (2.0 * self.c1 - 1.0) * z - self.c1 + self.c2
    }

    /// Discriminant of the `m3` quadratic, `B² − 4C`.
    pub fn discriminant(&self, z: Complex64) -> Complex64 {
        let b = self.quadratic_linear_coeff(z);
        b * b - 4.0 * self.c1 * (self.c1 - 1.0) * z * (z - 1.0)
    }

    /// Root of the `m3` quadratic lying on the Stieltjes branch.
    pub fn solve_m3(&self, z: Complex64) -> Result<Complex64> {
        if !(z.im > 0.0) {
            return Err(Error::Domain(format!("Im z > 0 required, got {z}")));
        }
        let b = self.quadratic_linear_coeff(z);
        let disc = self.discriminant(z);
        let edge_form = (z - self.lambda_minus) * (z - self.lambda_plus);
        let scale = 1.0 + disc.norm() + edge_form.norm();
        if (disc - edge_form).norm() > 1e-10 * scale {
            return Err(Error::Numerical {
                what: "discriminant identity",
                achieved: (disc - edge_form).norm(),
            });
        }
        let root = 0.5 * (-b + sqrt_upper(disc));
        if root.im < -1e-14 * (1.0 + root.norm()) {
            let other = 0.5 * (-b - sqrt_upper(disc));
            return Err(Error::Numerical {
                what: "m3 root selection (no root with Im >= 0)",
                achieved: root.im.max(other.im),
            });
        }
        Ok(root)
    }

    /// Deterministic limit `Π(z)` for dimensions `(p, q, n)`.
    pub fn pi_limit(&self, z: Complex64, p: usize, q: usize, n: usize) -> Result<PiLimit> {
        self.check_dims(p, q, n)?;
        let sq = self.stieltjes(z)?;
        Ok(PiLimit {
            z,
            p,
            q,
            n,
            x_diag: sq.m1 / self.c1,
            y_diag: sq.m2 / self.c2,
            kernel: [[sq.m3, sq.h], [sq.h, sq.m4]],
            m1: sq.m1,
            m2: sq.m2,
        })
    }

    /// `Ψ(z) = √(Im m_c / (nη)) + 1/(nη)`.
    pub fn psi_control(&self, z: &SpectralParameter, n: usize) -> Result<f64> {
        if !(z.eta > 0.0) {
            return Err(Error::Domain(format!("eta > 0 required, got {}", z.eta)));
        }
        let m = self.stieltjes(z.z())?.m;
        let neta = n as f64 * z.eta;
        Ok((m.im.max(0.0) / neta).sqrt() + 1.0 / neta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParameter {
    pub e: f64,
    pub eta: f64,
    pub kappa: f64,
}

impl SpectralParameter {
    pub fn new(model: &SpectralModel, e: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !e.is_finite() {
            return Err(Error::Domain(format!("eta > 0 required, got E={e}, eta={eta}")));
        }
        Ok(Self {
            e,
            eta,
            kappa: kappa(model, e),
        })
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.e, self.eta)
    }
}

/// Distance from `E` to the nearer spectral edge.
pub fn kappa(model: &SpectralModel, e: f64) -> f64 {
    (e - model.lambda_minus).abs().min((e - model.lambda_plus).abs())
}

/// Admissible spectral domain `{ε ≤ E ≤ 1, n^{−1+ε} ≤ η ≤ 1/ε}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDomain {
    pub epsilon: f64,
}

impl SpectralDomain {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameters(format!("epsilon in (0,1) required, got {epsilon}")));
        }
        Ok(Self { epsilon })
    }

    pub fn eta_floor(&self, n: usize) -> f64 {
        (n as f64).powf(-1.0 + self.epsilon)
    }

    pub fn check(&self, e: f64, eta: f64, n: usize) -> Result<()> {
        if e < self.epsilon || e > 1.0 {
            return Err(Error::Domain(format!(
                "E={e} outside [{}, 1] of the admissible spectral domain",
                self.epsilon
            )));
        }
        let floor = self.eta_floor(n);
        if eta < floor {
            return Err(Error::Domain(format!(
                "eta={eta} below the n^(-1+eps)={floor:.6e} floor of the admissible spectral domain"
            )));
        }
        if eta > 1.0 / self.epsilon {
            return Err(Error::Domain(format!(
                "eta={eta} above the 1/eps={} ceiling of the admissible spectral domain",
                1.0 / self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StieltjesQuadruple {
    pub m1: Complex64,
    pub m2: Complex64,
    pub m3: Complex64,
    pub m4: Complex64,
    pub h: Complex64,
    /// Limit of `q⁻¹ tr R₂`.
    pub m: Complex64,
}

/// Structured description of `Π(z)`: scalar diagonals on `I₁` and `I₂` and a
/// 2×2 kernel `π(z)` coupling each `μ ∈ I₃` with `μ̄ = μ + n ∈ I₄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiLimit {
    pub z: Complex64,
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub x_diag: Complex64,
    pub y_diag: Complex64,
    pub kernel: [[Complex64; 2]; 2],
    m1: Complex64,
    m2: Complex64,
}

impl PiLimit {
    pub fn dim(&self) -> usize {
        self.p + self.q + 2 * self.n
    }

    /// `π(z)⁻¹ = (z−1)⁻¹ [[1 − (z−1)m1c, −z^{−1/2}], [−z^{−1/2}, 1 − (z−1)m2c]]`.
    pub fn kernel_inverse(&self) -> [[Complex64; 2]; 2] {
        let zm1 = self.z - 1.0;
        let off = -1.0 / sqrt_z(self.z) / zm1;
        [
            [(1.0 - zm1 * self.m1) / zm1, off],
            [off, (1.0 - zm1 * self.m2) / zm1],
        ]
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        let (p, q, n) = (self.p, self.q, self.n);
        let zero = Complex64::new(0.0, 0.0);
        let r = p + q;
        if a < r || b < r {
            if a != b {
                return zero;
            }
            return if a < p { self.x_diag } else { self.y_diag };
        }
        let (ka, ia) = ((a - r) / n, (a - r) % n);
        let (kb, ib) = ((b - r) / n, (b - r) % n);
        if ia != ib {
            return zero;
        }
        self.kernel[ka][kb]
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let d = self.dim();
        nalgebra::DMatrix::from_fn(d, d, |a, b| self.entry(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn edges_match_direct_evaluation() {
        let m = SpectralModel::new(0.4, 0.2).unwrap();
        // √0.32 ± √0.12, squared
        let a = 0.32_f64.sqrt();
        let b = 0.12_f64.sqrt();
        assert!((m.lambda_minus - (a - b).powi(2)).abs() < 1e-15);
        assert!((m.lambda_plus - (a + b).powi(2)).abs() < 1e-15);
        assert!((m.lambda_minus - 0.04808).abs() < 1e-5);
        assert!((m.lambda_plus - 0.83192).abs() < 1e-5);
    }

    #[test]
    fn degenerate_c2_collapses_edges() {
        let (lo, hi) = edges(0.3, 0.0);
        assert!((lo - 0.3).abs() < 1e-15 && (hi - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rejects_inadmissible_ratios() {
        let err = SpectralModel::new(0.5, 0.5).unwrap_err().to_string();
        assert!(err.contains("c1 + c2 < 1"), "{err}");
        assert!(SpectralModel::new(0.2, 0.3).unwrap_err().to_string().contains("c2 <= c1"));
        assert!(SpectralModel::new(0.2, 0.0).is_err());
    }

    #[test]
    fn density_at_edges_and_outside() {
        let m = SpectralModel::new(0.4, 0.2).unwrap();
        assert_eq!(m.density(m.lambda_plus), 0.0);
        assert_eq!(m.density(m.lambda_minus), 0.0);
        assert_eq!(m.density(m.lambda_minus - 0.01), 0.0);
        let x = 0.5 * (m.lambda_minus + m.lambda_plus);
        let direct = ((m.lambda_plus - x) * (x - m.lambda_minus)).sqrt() / (x * (1.0 - x)) / (2.0 * PI * 0.2);
        assert!((m.density(x) - direct).abs() < 1e-15);
    }

    #[test]
    fn classical_locations_basic() {
        let m = SpectralModel::new(0.4, 0.2).unwrap();
        assert_eq!(m.classical_location(1, 100).unwrap(), m.lambda_plus);
        let g = m.classical_locations(100).unwrap();
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        assert!(m.classical_location(0, 10).is_err());
        assert!(m.classical_location(11, 10).is_err());
    }

    #[test]
    fn median_matches_tabulated_cdf() {
        let m = SpectralModel::new(0.4, 0.2).unwrap();
        // dense trapezoid tabulation of the CDF in x, independent of the angle route
        let steps = 400_000;
        let h = (m.lambda_plus - m.lambda_minus) / steps as f64;
        let mut acc = 0.0;
        let mut prev = m.density(m.lambda_plus);
        let mut median = f64::NAN;
        for k in 1..=steps {
            let x = m.lambda_plus - k as f64 * h;
            let f = m.density(x);
            acc += 0.5 * (prev + f) * h;
            prev = f;
            if acc > 0.5 {
                median = x;
                break;
            }
        }
        let g = m.classical_location(51, 100).unwrap();
        assert!((g - median).abs() < 1e-5, "{g} vs {median}");
    }

    #[test]
    fn tail_mass_bookkeeping_between_locations() {
        let m = SpectralModel::new(0.3, 0.2).unwrap();
        let q = 50;
        let g = m.classical_locations(q).unwrap();
        for j in 1..q {
            let e = 0.5 * (g[j - 1] + g[j]);
            let count = g.iter().filter(|&&x| x >= e).count();
            let expected = q as f64 * m.tail_mass(e).unwrap();
            assert!((count as f64 - expected).abs() <= 1.0, "j={j}: {count} vs {expected}");
        }
    }

    #[test]
    fn real_axis_branch_is_boundary_value() {
        let m = SpectralModel::new(0.3, 0.2).unwrap();
        for &e in &[-0.5, 0.005, 0.9, 1.5] {
            let on_axis = m.stieltjes(c(e, 0.0)).unwrap();
            let above = m.stieltjes(c(e, 1e-9)).unwrap();
            assert!((on_axis.m3 - above.m3).norm() < 1e-6, "E={e}");
            assert!((on_axis.m1 - above.m1).norm() < 1e-5, "E={e}");
        }
        assert!(m.stieltjes(c(0.5, 0.0)).is_err());
        assert!(m.stieltjes(c(0.0, 0.0)).is_err());
        assert!(m.stieltjes(c(0.5, -0.1)).is_err());
    }

    #[test]
    fn limits_at_one() {
        let m = SpectralModel::new(0.3, 0.2).unwrap();
        let at_one = m.stieltjes(c(1.0, 0.0)).unwrap();
        assert!((at_one.m1 - (-0.3 / 0.5)).norm() < 1e-14);
        assert!((at_one.m2 - (-0.2 / 0.5)).norm() < 1e-14);
        let near = m.stieltjes(c(1.0 + 1e-4, 0.0)).unwrap();
        assert!((near.m1 - at_one.m1).norm() < 1e-3);
        assert!((near.m2 - at_one.m2).norm() < 1e-3);
    }

    #[test]
    fn closed_forms_solve_the_system() {
        let m = SpectralModel::new(0.4, 0.2).unwrap();
        let z = c(0.5, 0.1);
        let sq = m.stieltjes(z).unwrap();
        assert!(m.sc_residuals(&sq, z).iter().all(|&r| r < 1e-10));
        let mut bumped = sq;
        bumped.m3 += 0.1;
        let r = m.sc_residuals(&bumped, z);
        assert!(r[0] > 0.0 && r[3] > 0.0 && r[4] > 0.0);
    }

    #[test]
    fn quadratic_route_matches_closed_form() {
        let m = SpectralModel::new(0.4, 0.2).unwrap();
        for &z in &[c(0.5, 0.1), c(0.95, 1e-3), c(0.01, 0.02), c(-2.0, 3.0), c(3.0, 0.5)] {
            assert!((m.solve_m3(z).unwrap() - m.stieltjes(z).unwrap().m3).norm() < 1e-12, "{z}");
        }
        assert!(m.solve_m3(c(0.5, 0.0)).is_err());
    }

    #[test]
    fn equal_ratios_give_equal_m3_m4() {
        let m = SpectralModel::new(0.3, 0.3).unwrap();
        assert_eq!(m.lambda_minus, 0.0);
        let z = c(0.4, 0.2);
        let sq = m.stieltjes(z).unwrap();
        assert!((m.solve_m3(z).unwrap() - sq.m4).norm() < 1e-12);
    }

    #[test]
    fn h_three_forms_agree() {
        let m = SpectralModel::new(0.4, 0.2).unwrap();
        let z = c(0.6, 0.3);
        let sq = m.stieltjes(z).unwrap();
        let zr = sqrt_z(z);
        let first = sq.m3 / zr / (1.0 + (1.0 - z) * sq.m2);
        let second = sq.m4 / zr / (1.0 + (1.0 - z) * sq.m1);
        assert!((first - sq.h).norm() < 1e-12);
        assert!((second - sq.h).norm() < 1e-12);
    }

    #[test]
    fn pi_kernel_inverse_pair() {
        let m = SpectralModel::from_dims(18, 12, 60).unwrap();
        let pi = m.pi_limit(c(0.6, 0.3), 18, 12, 60).unwrap();
        let k = pi.kernel;
        let ki = pi.kernel_inverse();
        for i in 0..2 {
            for j in 0..2 {
                let v = k[i][0] * ki[0][j] + k[i][1] * ki[1][j];
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((v - target).norm() < 1e-12);
            }
        }
        // pairing structure
        let r = 30;
        assert_eq!(pi.entry(r + 3, r + 60 + 3), pi.kernel[0][1]);
        assert_eq!(pi.entry(r + 3, r + 60 + 4), c(0.0, 0.0));
        assert_eq!(pi.entry(2, 5), c(0.0, 0.0));
        assert_eq!(pi.entry(2, r + 2), c(0.0, 0.0));
        assert!(m.pi_limit(c(0.6, 0.3), 30, 12, 60).is_err());
    }

    #[test]
    fn psi_bounds() {
        let m = SpectralModel::new(0.3, 0.2).unwrap();
        let z = SpectralParameter::new(&m, 0.5, 0.05).unwrap();
        let a = m.psi_control(&z, 100).unwrap();
        let b = m.psi_control(&z, 200).unwrap();
        assert!(a >= 1.0 / (100.0 * 0.05));
        assert!(b < a);
        assert!(a >= 100f64.powf(-0.5));
        assert!((z.kappa - (0.5 - m.lambda_minus).abs().min((0.5 - m.lambda_plus).abs())).abs() < 1e-15);
    }

    #[test]
    fn domain_guard() {
        let d = SpectralDomain::new(0.1).unwrap();
        assert!(d.check(0.7, 0.5, 400).is_ok());
        assert!(d.check(0.7, 1e-3, 400).is_err());
        assert!(d.check(0.05, 0.5, 400).is_err());
        assert!(d.check(0.7, 20.0, 400).is_err());
    }
}
