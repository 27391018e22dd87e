use ccalab::quadrature::integrate;
use ccalab::spectral_model::{sqrt_upper, SpectralModel};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn admissible_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..=9 {
        for j in 1..=9 {
            let (c1, c2) = (0.05 * i as f64, 0.05 * j as f64);
            if c2 <= c1 + 1e-12 && c1 + c2 <= 0.9 + 1e-12 {
                out.push((c1, c2.min(c1)));
            }
        }
    }
    out
}

#[test]
fn density_integrates_to_one_on_grid() {
    for (c1, c2) in admissible_grid() {
        let m = SpectralModel::new(c1, c2).unwrap();
        let total = m.total_mass().unwrap();
        assert!((total - 1.0).abs() <= 1e-6, "({c1},{c2}) substituted: {total}");
        // second route: plain adaptive quadrature of f in x
        let plain = integrate(|x| m.density(x), m.lambda_minus, m.lambda_plus, 1e-10, 1e-10).unwrap();
        assert!((plain - 1.0).abs() <= 1e-6, "({c1},{c2}) plain: {plain}");
    }
}

#[test]
fn edge_gap_grows_with_two_thirds_exponent() {
    let m = SpectralModel::new(0.4, 0.2).unwrap();
    let q = 500;
    let g = m.classical_locations(q).unwrap();
    assert_eq!(g[0], m.lambda_plus);
    assert!(g.windows(2).all(|w| w[1] < w[0]));
    // γ_j sits at mass (j−1)/q below λ+, so the gap goes like (j−1)^{2/3}.
    // Past roughly q/20 the density's curvature pushes the local slope up.
    let (xs, ys): (Vec<f64>, Vec<f64>) = (2..=q / 20)
        .map(|j| (((j - 1) as f64).ln(), (m.lambda_plus - g[j - 1]).ln()))
        .unzip();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((0.6..=0.75).contains(&slope), "{slope}");
}

fn ratios() -> impl Strategy<Value = (f64, f64)> {
    (0.02f64..0.95, 0.02f64..1.0).prop_filter_map("admissible", |(s, t)| {
        // c1 + c2 = s, c2 = t·c1 with c2 <= c1
        let c1 = s / (1.0 + t);
        let c2 = t * c1;
        (c1 + c2 < 0.97 && c2 > 0.005).then_some((c1, c2))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_forms_solve_the_system((c1, c2) in ratios(), re in -1.0f64..2.0, log_eta in (1e-3f64).ln()..(10f64).ln()) {
        let m = SpectralModel::new(c1, c2).unwrap();
        let z = C::new(re, log_eta.exp());
        let s = m.stieltjes(z).unwrap();
        let r = m.sc_residuals(&s, z);
        for (k, v) in r.iter().enumerate() {
            prop_assert!(*v < 1e-10, "residual {} = {:e} at z={} c=({},{})", k + 1, v, z, c1, c2);
        }
        prop_assert!(sqrt_upper((z - m.lambda_minus) * (z - m.lambda_plus)).im >= 0.0);
        for mv in [s.m1, s.m2, s.m3, s.m4] {
            prop_assert!(mv.im >= 0.0);
        }
        prop_assert!((s.m - (1.0 - c2) / c2 * s.m2).norm() <= 1e-12 * s.m.norm().max(1.0));
        let root = m.solve_m3(z).unwrap();
        prop_assert!((root - s.m3).norm() <= 1e-12 * s.m3.norm().max(1.0));
        let disc = m.discriminant(z);
        prop_assert!((disc - (z - m.lambda_minus) * (z - m.lambda_plus)).norm() <= 1e-12 * disc.norm().max(1.0));
    }
}
