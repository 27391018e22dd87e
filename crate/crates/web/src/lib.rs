//! Browser bindings: the Wachter curve, a simulated canonical-correlation
//! spectrum, and a Tracy–Widom edge histogram against a GOE reference.

use ccalab::edge::{dims_for, tw_experiment, TwConfig};
use ccalab::sampler::{sample, Law};
use ccalab::scc::ccc_eigenvalues;
use ccalab::SpectralModel;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js(e: ccalab::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn law_from(name: &str, beta: f64) -> Result<Law, JsError> {
    match name {
        "gaussian" => Ok(Law::Gaussian),
        "rademacher" => Ok(Law::Rademacher),
        "uniform" => Ok(Law::Uniform),
        "heavy_tail" => Ok(Law::HeavyTail { beta }),
        other => Err(JsError::new(&format!("unknown law {other}"))),
    }
}

/// `[λ−, λ+, c_TW]`.
#[wasm_bindgen]
pub fn model_edges(c1: f64, c2: f64) -> Result<Vec<f64>, JsError> {
    let m = SpectralModel::new(c1, c2).map_err(js)?;
    Ok(vec![m.lambda_minus, m.lambda_plus, m.c_tw])
}

/// Interleaved `x, f(x)` pairs on a uniform grid over `[λ−, λ+]`.
#[wasm_bindgen]
pub fn wachter_curve(c1: f64, c2: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let m = SpectralModel::new(c1, c2).map_err(js)?;
    let k = points.max(2);
    let mut out = Vec::with_capacity(2 * k);
    for i in 0..k {
        let x = m.lambda_minus + (m.lambda_plus - m.lambda_minus) * i as f64 / (k - 1) as f64;
        out.push(x);
        out.push(m.density(x));
    }
    Ok(out)
}

/// Sample canonical correlation eigenvalues for one seeded draw, descending.
#[wasm_bindgen]
pub fn simulated_spectrum(n: usize, c1: f64, c2: f64, seed: u64, law: &str, beta: f64) -> Result<Vec<f64>, JsError> {
    SpectralModel::new(c1, c2).map_err(js)?;
    let (p, q) = dims_for(n, c1, c2);
    let pair = sample(p, q, n, seed, law_from(law, beta)?).map_err(js)?;
    Ok(ccc_eigenvalues(&pair).map_err(js)?.eigenvalues)
}

/// JSON with the rescaled top-1 statistics, the GOE reference and their KS distance.
#[wasm_bindgen]
pub fn edge_histogram(n: usize, c1: f64, c2: f64, trials: usize, seed: u64, law: &str, beta: f64) -> Result<String, JsError> {
    SpectralModel::new(c1, c2).map_err(js)?;
    let mut cfg = TwConfig::from_ratios(n, c1, c2, law_from(law, beta)?, trials, seed);
    cfg.k_max = 1;
    cfg.n_goe = n.max(50);
    let (report, samples, goe) = tw_experiment(&cfg).map_err(js)?;
    Ok(json!({
        "ccc": samples.marginal(0),
        "goe": goe.marginal(0),
        "ks": report.ks_top1,
        "mean": report.marginals[0].mean,
        "goe_mean": report.marginals[0].goe_mean,
        "c_tw": report.c_tw,
    })
    .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_has_requested_points() {
        let c = wachter_curve(0.4, 0.2, 50).unwrap();
        assert_eq!(c.len(), 100);
        assert_eq!(c[0], model_edges(0.4, 0.2).unwrap()[0]);
    }

    #[test]
    fn histogram_is_deterministic() {
        let a = edge_histogram(60, 0.3, 0.2, 5, 9, "gaussian", 0.0).unwrap();
        assert_eq!(a, edge_histogram(60, 0.3, 0.2, 5, 9, "gaussian", 0.0).unwrap());
    }
}
