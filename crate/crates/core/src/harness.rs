//! Experiment configuration, validation, dispatch and on-disk artifacts.
//!
//! A run writes `results.csv`, `results.json` and `manifest.json` into its
//! output directory. The manifest echoes the resolved configuration, so
//! pointing `--config` at it reproduces the results files byte for byte.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::edge::{dims_for, rigidity_experiment, tw_experiment, RigidityConfig, TwConfig};
use crate::error::Error;
use crate::par::map_indexed;
use crate::resolvent::{local_law_from_bundle, resolvent, LocalLawOptions, LocalLawReport, ResolventRoute, SchurFactors};
use crate::rng::derive_seed;
use crate::sampler::{sample, truncate_center_rescale, DataPair, Law};
use crate::scc::{ccc_eigenvalues, rigidity_profile, write_spectrum_csv};
use crate::spectral_model::{SpectralDomain, SpectralModel, SpectralParameter};

const TAG_SPECTRUM: u64 = 0x7370_6563;
const TAG_LOCAL_LAW: u64 = 0x6c6f_6361_6c;
const TAG_VECTORS: u64 = 0x7665_6373;

/// Calibrated KS thresholds for the TW comparison, recorded in tw-edge manifests.
pub const KS_THRESHOLD_GAUSSIAN: f64 = 0.08;
pub const KS_THRESHOLD_HEAVY_TAIL: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    DensityTable,
    Quantiles,
    Spectrum,
    LocalLawSweep,
    TwEdge,
    RigidityScaling,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::DensityTable => "density-table",
            Kind::Quantiles => "quantiles",
            Kind::Spectrum => "spectrum",
            Kind::LocalLawSweep => "local-law-sweep",
            Kind::TwEdge => "tw-edge",
            Kind::RigidityScaling => "rigidity-scaling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridScale {
    #[default]
    Linear,
    Log,
}

/// Rectangular grid of spectral parameters `E + iη`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZGrid {
    pub e_min: f64,
    pub e_max: f64,
    pub e_points: usize,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_points: usize,
    #[serde(default)]
    pub eta_scale: GridScale,
}

fn axis(lo: f64, hi: f64, k: usize, scale: GridScale) -> Vec<f64> {
    if k == 1 {
        return vec![lo];
    }
    (0..k)
        .map(|i| {
            let t = i as f64 / (k - 1) as f64;
            match scale {
                GridScale::Linear => lo + t * (hi - lo),
                GridScale::Log => (lo.ln() + t * (hi.ln() - lo.ln())).exp(),
            }
        })
        .collect()
}

impl ZGrid {
    pub fn points(&self) -> Vec<(f64, f64)> {
        let es = axis(self.e_min, self.e_max, self.e_points, GridScale::Linear);
        let etas = axis(self.eta_min, self.eta_max, self.eta_points, self.eta_scale);
        es.iter().flat_map(|&e| etas.iter().map(move |&h| (e, h))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default)]
    pub c2: Option<f64>,
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default)]
    pub q: Option<usize>,
    #[serde(default = "default_law")]
    pub law: Law,
    #[serde(default)]
    pub c_phi: Option<f64>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub k_max: Option<usize>,
    #[serde(default)]
    pub n_goe: Option<usize>,
    #[serde(default)]
    pub goe_trials: Option<usize>,
    #[serde(default)]
    pub grid: Option<ZGrid>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub n_vectors: Option<usize>,
    #[serde(default)]
    pub route: Option<ResolventRoute>,
    /// Rows in a density table.
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub lower_edge_eps: Option<f64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<String>,
}

fn default_law() -> Law {
    Law::Gaussian
}

impl ExperimentConfig {
    fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(0.05)
    }

    fn trials(&self) -> usize {
        self.trials.unwrap_or(match self.kind {
            Kind::TwEdge => 2000,
            Kind::RigidityScaling => 50,
            _ => 1,
        })
    }

    /// `(c1, c2)` from explicit ratios, or from `p/n`, `q/n`.
    fn ratios(&self) -> std::result::Result<(f64, f64), String> {
        match (self.c1, self.c2, self.p, self.q, self.n) {
            (Some(c1), Some(c2), ..) => Ok((c1, c2)),
            (_, _, Some(p), Some(q), Some(n)) if n > 0 => Ok((p as f64 / n as f64, q as f64 / n as f64)),
            _ => Err("ratios: give c1 and c2, or p, q and n".into()),
        }
    }

    /// `(n, p, q)`, rounding `c·n` when only ratios are given.
    fn dims(&self) -> std::result::Result<(usize, usize, usize), String> {
        let n = self.n.ok_or("n: required for this kind")?;
        let (p, q) = match (self.p, self.q) {
            (Some(p), Some(q)) => (p, q),
            _ => {
                let (c1, c2) = self.ratios()?;
                dims_for(n, c1, c2)
            }
        };
        Ok((n, p, q))
    }

    /// Every violated precondition, one line each.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        match self.ratios() {
            Ok((c1, c2)) => {
                if let Err(e) = SpectralModel::new(c1, c2) {
                    v.push(format!("ratios: {}", strip(&e)));
                }
            }
            Err(e) => {
                if self.kind != Kind::Quantiles || self.q.is_none() || self.c1.is_none() {
                    v.push(e);
                }
            }
        }
        if let Err(e) = self.law.validate() {
            v.push(format!("law: {}", strip(&e)));
        }
        if let Some(c) = self.c_phi {
            if !(c > 0.0 && c < 0.5) {
                v.push(format!("c_phi: 0 < c_phi < 1/2 violated (c_phi={c})"));
            }
        }
        if self.threads == Some(0) {
            v.push("threads: must be at least 1".into());
        }
        let eps = self.epsilon();
        if !(eps > 0.0 && eps < 1.0) {
            v.push(format!("epsilon: 0 < epsilon < 1 violated (epsilon={eps})"));
        }
        if self.trials == Some(0) {
            v.push("trials: must be at least 1".into());
        }
        let needs_dims = matches!(
            self.kind,
            Kind::Spectrum | Kind::LocalLawSweep | Kind::TwEdge | Kind::RigidityScaling
        );
        if needs_dims {
            match self.dims() {
                Ok((n, p, q)) => {
                    if q == 0 || p < q || p >= n || q >= n {
                        v.push(format!("dims: 1 <= q <= p < n violated (n={n}, p={p}, q={q})"));
                    } else if p + q >= n {
                        v.push(format!("dims: p + q < n violated (n={n}, p={p}, q={q})"));
                    }
                    if self.kind == Kind::TwEdge {
                        let k = self.k_max.unwrap_or(3);
                        if k == 0 || k > q {
                            v.push(format!("k_max: 1 <= k_max <= q violated (k_max={k})"));
                        }
                        if self.n_goe.unwrap_or(n) < 50 {
                            v.push("n_goe: must be at least 50".into());
                        }
                    }
                    if self.kind == Kind::LocalLawSweep {
                        self.validate_grid(n, &mut v);
                    }
                }
                Err(e) => v.push(e),
            }
        }
        match self.kind {
            Kind::Quantiles if self.q.is_none() => v.push("q: required for quantiles".into()),
            Kind::DensityTable if self.points.is_some_and(|k| k < 2) => {
                v.push("points: must be at least 2".into())
            }
            _ => {}
        }
        v
    }

    fn validate_grid(&self, n: usize, v: &mut Vec<String>) {
        let Some(g) = self.grid else {
            v.push("grid: required for local-law-sweep".into());
            return;
        };
        if g.e_points == 0 || g.eta_points == 0 {
            v.push("grid: point counts must be positive".into());
            return;
        }
        let Ok(domain) = SpectralDomain::new(self.epsilon()) else {
            return;
        };
        for (e, eta) in g.points() {
            if let Err(err) = domain.check(e, eta, n) {
                v.push(format!("grid: {}", strip(&err)));
                break;
            }
        }
    }
}

fn strip(e: &Error) -> String {
    match e {
        Error::InvalidParameters(s) | Error::Domain(s) | Error::Dimension(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Set `key` (dotted path) in a JSON object; the value is parsed as JSON,
/// falling back to a string. A bare string for `law` names its type.
pub fn apply_override(root: &mut Value, assignment: &str) -> std::result::Result<(), String> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override: expected key=value, got {assignment:?}"))?;
    let mut value = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    if key == "law" {
        if let Value::String(s) = &value {
            value = json!({ "type": s });
        }
    }
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("override: malformed key {key:?}"));
    }
    let mut cur = root;
    for part in &parts[..parts.len() - 1] {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| format!("override: {key:?} descends into a non-object"))?;
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
        if cur.is_null() {
            *cur = Value::Object(Map::new());
        }
    }
    cur.as_object_mut()
        .ok_or_else(|| format!("override: {key:?} descends into a non-object"))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Read a config file; manifests are unwrapped to the configuration they echo.
pub fn load_config_value(path: &Path) -> std::result::Result<Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("config: cannot read {}: {e}", path.display()))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| format!("config: {e}"))?;
    match value {
        Value::Object(mut m) if m.contains_key("config") && m.contains_key("code_version") => {
            Ok(m.remove("config").expect("checked"))
        }
        v @ Value::Object(_) => Ok(v),
        _ => Err("config: top level must be a JSON object".into()),
    }
}

pub fn parse_config(value: Value) -> std::result::Result<ExperimentConfig, String> {
    serde_json::from_value(value).map_err(|e| format!("config: {e}"))
}

#[derive(Debug)]
pub enum RunError {
    Validation(Vec<String>),
    Numerical { error: Error, diagnostics: Option<PathBuf> },
    Io(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 2,
            RunError::Numerical { .. } => 3,
            RunError::Io(_) => 1,
        }
    }

    /// One machine-parsable line.
    pub fn reason(&self) -> String {
        match self {
            RunError::Validation(v) => format!("validation: {}", v.join("; ")),
            RunError::Numerical { error, diagnostics } => match diagnostics {
                Some(p) => format!("numerical: {error} (diagnostics: {})", p.display()),
                None => format!("numerical: {error}"),
            },
            RunError::Io(e) => format!("io: {e}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

struct Artifacts {
    csv: Vec<u8>,
    json: Value,
    extra: Vec<(&'static str, Vec<u8>)>,
    notes: Value,
}

fn is_numerical(e: &Error) -> bool {
    matches!(
        e,
        Error::Singular { .. }
            | Error::BranchCut { .. }
            | Error::Numerical { .. }
            | Error::Conditioning { .. }
            | Error::OutOfRange { .. }
    )
}

/// Validate, dispatch and write artifacts into `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> std::result::Result<RunSummary, RunError> {
    let violations = cfg.validate();
    if !violations.is_empty() {
        return Err(RunError::Validation(violations));
    }
    let start = Instant::now();
    let result = with_threads(cfg.threads, || dispatch(cfg));
    let elapsed = start.elapsed();
    fs::create_dir_all(out_dir).map_err(|e| RunError::Io(e.into()))?;
    let art = match result {
        Ok(a) => a,
        Err(e) if is_numerical(&e) => {
            let path = out_dir.join("diagnostics.json");
            let diag = json!({ "error": e.to_string(), "config": cfg });
            let written = fs::write(&path, serde_json::to_vec_pretty(&diag).expect("json")).is_ok();
            return Err(RunError::Numerical {
                error: e,
                diagnostics: written.then_some(path),
            });
        }
        Err(e) => return Err(RunError::Validation(vec![strip(&e)])),
    };
    let mut files = Vec::new();
    let mut write = |name: &str, bytes: &[u8]| -> std::result::Result<(), RunError> {
        let path = out_dir.join(name);
        fs::write(&path, bytes).map_err(|e| RunError::Io(e.into()))?;
        files.push(path);
        Ok(())
    };
    let mut json_bytes = serde_json::to_vec_pretty(&art.json).expect("json");
    json_bytes.push(b'\n');
    let mut outputs = vec!["results.csv", "results.json"];
    outputs.extend(art.extra.iter().map(|(name, _)| *name));
    let manifest = json!({
        "config": cfg,
        "code_version": env!("CARGO_PKG_VERSION"),
        "kind": cfg.kind.name(),
        "seeds": {
            "master": cfg.seed,
            "derivation": "per-trial seeds are splitmix64 mixes of (master, tag, trial index)",
        },
        "timings": { "wall_seconds": elapsed.as_secs_f64() },
        "outputs": outputs,
        "notes": art.notes,
    });
    let mut mbytes = serde_json::to_vec_pretty(&manifest).expect("json");
    mbytes.push(b'\n');
    write("results.csv", &art.csv)?;
    write("results.json", &json_bytes)?;
    for (name, bytes) in &art.extra {
        write(name, bytes)?;
    }
    write("manifest.json", &mbytes)?;
    Ok(RunSummary {
        out_dir: out_dir.to_path_buf(),
        files,
    })
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T>(_threads: Option<usize>, f: impl FnOnce() -> T) -> T {
    f()
}

fn dispatch(cfg: &ExperimentConfig) -> crate::Result<Artifacts> {
    match cfg.kind {
        Kind::DensityTable => density_table(cfg),
        Kind::Quantiles => quantiles(cfg),
        Kind::Spectrum => spectrum(cfg),
        Kind::LocalLawSweep => local_law_sweep(cfg),
        Kind::TwEdge => tw_edge(cfg),
        Kind::RigidityScaling => rigidity_scaling(cfg),
    }
}

fn model_of(cfg: &ExperimentConfig) -> crate::Result<SpectralModel> {
    let (c1, c2) = cfg.ratios().map_err(Error::InvalidParameters)?;
    SpectralModel::new(c1, c2)
}

fn dims_of(cfg: &ExperimentConfig) -> crate::Result<(usize, usize, usize)> {
    cfg.dims().map_err(Error::InvalidParameters)
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> crate::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn f(v: f64) -> String {
    format!("{v:.17e}")
}

fn density_table(cfg: &ExperimentConfig) -> crate::Result<Artifacts> {
    let model = model_of(cfg)?;
    let k = cfg.points.unwrap_or(200);
    let xs = axis(model.lambda_minus, model.lambda_plus, k, GridScale::Linear);
    let mut rows = Vec::with_capacity(k);
    for &x in &xs {
        rows.push(vec![f(x), f(model.density(x)), f(model.tail_mass(x)?)]);
    }
    Ok(Artifacts {
        csv: csv_bytes(&["x", "density", "tail_mass"], rows)?,
        json: json!({ "model": model, "total_mass": model.total_mass()?, "points": k }),
        extra: vec![],
        notes: Value::Null,
    })
}

fn quantiles(cfg: &ExperimentConfig) -> crate::Result<Artifacts> {
    let model = model_of(cfg)?;
    let q = cfg.q.expect("validated");
    let gammas = model.classical_locations(q)?;
    let rows = gammas.iter().enumerate().map(|(i, g)| vec![(i + 1).to_string(), f(*g)]);
    Ok(Artifacts {
        csv: csv_bytes(&["index", "gamma"], rows)?,
        json: json!({ "model": model, "q": q, "gammas": gammas }),
        extra: vec![],
        notes: Value::Null,
    })
}

fn draw(cfg: &ExperimentConfig, n: usize, p: usize, q: usize, seed: u64) -> crate::Result<DataPair> {
    let pair = sample(p, q, n, seed, cfg.law)?;
    match cfg.c_phi {
        Some(c) => truncate_center_rescale(&pair, c),
        None => Ok(pair),
    }
}

fn spectrum(cfg: &ExperimentConfig) -> crate::Result<Artifacts> {
    let (n, p, q) = dims_of(cfg)?;
    let seed = derive_seed(cfg.seed, TAG_SPECTRUM, 0);
    let pair = draw(cfg, n, p, q, seed)?;
    let spec = ccc_eigenvalues(&pair)?;
    let model = SpectralModel::from_dims(p, q, n)?;
    let profile = rigidity_profile(&spec, &model, cfg.lower_edge_eps.unwrap_or(0.05))?;
    let mut csv = Vec::new();
    write_spectrum_csv(&spec, &profile, &mut csv)?;
    Ok(Artifacts {
        csv,
        json: json!({
            "model": model,
            "spectrum": spec,
            "pair_seed": seed,
            "support": pair.meta.support,
            "admissible": profile.admissible,
            "max_normalized_deviation": profile.max_admissible(),
        }),
        extra: vec![],
        notes: Value::Null,
    })
}

#[derive(Serialize)]
struct SweepEntry {
    trial: usize,
    seed: u64,
    report: LocalLawReport,
}

fn local_law_sweep(cfg: &ExperimentConfig) -> crate::Result<Artifacts> {
    let (n, p, q) = dims_of(cfg)?;
    let model = SpectralModel::from_dims(p, q, n)?;
    let grid = cfg.grid.expect("validated");
    let points = grid.points();
    let route = cfg.route.unwrap_or_default();
    let per_trial = map_indexed(0..cfg.trials(), |t| -> crate::Result<Vec<SweepEntry>> {
        let seed = derive_seed(cfg.seed, TAG_LOCAL_LAW, t as u64);
        let pair = draw(cfg, n, p, q, seed)?;
        let factors = match route {
            ResolventRoute::Schur => Some(SchurFactors::new(&pair)?),
            ResolventRoute::Direct => None,
        };
        let opts = LocalLawOptions {
            n_vectors: cfg.n_vectors.unwrap_or(8),
            seed: derive_seed(cfg.seed, TAG_VECTORS, t as u64),
            epsilon: cfg.epsilon(),
            route,
        };
        let mut out = Vec::with_capacity(points.len());
        for &(e, eta) in &points {
            let z = SpectralParameter::new(&model, e, eta)?;
            let bundle = match &factors {
                Some(fa) => fa.resolvent(z.z())?,
                None => resolvent(&pair, z.z(), None)?,
            };
            let report = local_law_from_bundle(&bundle, pair.meta.support, &z, &opts)?;
            out.push(SweepEntry { trial: t, seed, report });
        }
        Ok(out)
    });
    let mut entries = Vec::new();
    for r in per_trial {
        entries.extend(r?);
    }
    let header = [
        "trial", "seed", "e", "eta", "entrywise_err", "diagonal_err", "paired_err", "offdiag_err", "aniso_err",
        "avg_m1", "avg_m2", "avg_m3", "avg_m4", "avg_m", "psi", "phi_n", "inv_n_eta",
    ];
    let rows = entries.iter().map(|s| {
        let r = &s.report;
        let mut row = vec![s.trial.to_string(), s.seed.to_string(), f(r.z[0]), f(r.z[1])];
        row.extend([r.entrywise_err, r.diagonal_err, r.paired_err, r.offdiag_err, r.aniso_err].map(f));
        row.extend(r.avg_err.map(f));
        row.extend([r.psi, r.phi_n, r.benchmarks.inv_n_eta].map(f));
        row
    });
    let csv = csv_bytes(&header, rows)?;
    let medians: Vec<Value> = points
        .iter()
        .map(|&(e, eta)| {
            let mut ent: Vec<f64> = entries
                .iter()
                .filter(|s| s.report.z == [e, eta])
                .map(|s| s.report.entrywise_err)
                .collect();
            ent.sort_by(f64::total_cmp);
            json!({ "e": e, "eta": eta, "median_entrywise_err": ent[ent.len() / 2] })
        })
        .collect();
    Ok(Artifacts {
        csv,
        json: json!({ "model": model, "n": n, "p": p, "q": q, "medians": medians, "entries": entries }),
        extra: vec![],
        notes: Value::Null,
    })
}

fn tw_edge(cfg: &ExperimentConfig) -> crate::Result<Artifacts> {
    let (n, p, q) = dims_of(cfg)?;
    let trials = cfg.trials();
    let tw = TwConfig {
        n,
        p,
        q,
        law: cfg.law,
        c_phi: cfg.c_phi,
        trials,
        k_max: cfg.k_max.unwrap_or(3),
        seed: cfg.seed,
        n_goe: cfg.n_goe.unwrap_or(n),
        goe_trials: cfg.goe_trials.unwrap_or(trials),
    };
    let (report, samples, goe) = tw_experiment(&tw)?;
    let mut csv = Vec::new();
    samples.write_csv(&mut csv)?;
    let mut raw = serde_json::to_vec(&json!({ "edge_samples": samples, "goe_reference": goe }))?;
    raw.push(b'\n');
    Ok(Artifacts {
        csv,
        json: serde_json::to_value(&report)?,
        extra: vec![("edge_samples.json", raw)],
        notes: json!({
            "ks_thresholds": {
                "gaussian": KS_THRESHOLD_GAUSSIAN,
                "heavy_tail_beta_4_5": KS_THRESHOLD_HEAVY_TAIL,
                "origin": "Monte Carlo calibration at n = 400, 2000 trials; not asymptotic constants",
            }
        }),
    })
}

fn rigidity_scaling(cfg: &ExperimentConfig) -> crate::Result<Artifacts> {
    let (n0, _, _) = dims_of(cfg)?;
    let (c1, c2) = cfg.ratios().map_err(Error::InvalidParameters)?;
    let rc = RigidityConfig {
        n0,
        c1,
        c2,
        law: cfg.law,
        trials: cfg.trials(),
        seed: cfg.seed,
        lower_edge_eps: cfg.lower_edge_eps.unwrap_or(0.05),
    };
    let report = rigidity_experiment(&rc)?;
    let rows = report.trials.iter().map(|t| {
        vec![
            t.n.to_string(),
            t.index.to_string(),
            t.seed.to_string(),
            t.resamples.to_string(),
            f(t.mid_dev),
            f(t.edge_dev),
            f(t.max_normalized),
        ]
    });
    Ok(Artifacts {
        csv: csv_bytes(&["n", "trial", "seed", "resamples", "mid_dev", "edge_dev", "max_normalized"], rows)?,
        json: serde_json::to_value(&report)?,
        extra: vec![],
        notes: Value::Null,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(kind: &str) -> Value {
        json!({ "kind": kind, "seed": 1, "c1": 0.3, "c2": 0.2, "n": 100 })
    }

    #[test]
    fn seed_is_mandatory() {
        let err = parse_config(json!({ "kind": "quantiles", "c1": 0.4, "c2": 0.2, "q": 10 })).unwrap_err();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn ratio_violations_are_reported() {
        let mut v = base("spectrum");
        apply_override(&mut v, "c1=0.6").unwrap();
        apply_override(&mut v, "c2=0.5").unwrap();
        let cfg = parse_config(v).unwrap();
        let errs = cfg.validate();
        assert!(errs.iter().any(|e| e.contains("c1 + c2 < 1")), "{errs:?}");
    }

    #[test]
    fn heavy_tail_beta_checked() {
        let mut v = base("tw-edge");
        apply_override(&mut v, "law.type=heavy_tail").unwrap();
        apply_override(&mut v, "law.beta=2.0").unwrap();
        let errs = parse_config(v).unwrap().validate();
        assert!(errs.iter().any(|e| e.starts_with("law:")), "{errs:?}");
    }

    #[test]
    fn overrides_parse_json_then_string() {
        let mut v = json!({});
        apply_override(&mut v, "grid.eta_min=0.25").unwrap();
        apply_override(&mut v, "law=rademacher").unwrap();
        apply_override(&mut v, "kind=tw-edge").unwrap();
        assert_eq!(v["grid"]["eta_min"], json!(0.25));
        assert_eq!(v["law"], json!({ "type": "rademacher" }));
        assert_eq!(v["kind"], json!("tw-edge"));
        assert!(apply_override(&mut v, "novalue").is_err());
        assert!(apply_override(&mut v, "kind.x=1").is_err());
    }

    #[test]
    fn small_eta_rejected_by_domain_guard() {
        let mut v = base("local-law-sweep");
        v["grid"] = json!({ "e_min": 0.5, "e_max": 0.5, "e_points": 1, "eta_min": 1e-4, "eta_max": 0.5, "eta_points": 3 });
        let errs = parse_config(v).unwrap().validate();
        assert!(errs.iter().any(|e| e.contains("floor of the admissible spectral domain")), "{errs:?}");
    }

    #[test]
    fn log_axis_hits_endpoints() {
        let a = axis(0.125, 0.5, 3, GridScale::Log);
        assert!((a[0] - 0.125).abs() < 1e-15 && (a[1] - 0.25).abs() < 1e-15 && (a[2] - 0.5).abs() < 1e-15);
    }
}
