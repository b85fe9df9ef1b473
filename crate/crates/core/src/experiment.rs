//! Config-driven experiments behind the command-line interface.
//!
//! A run is described by an [`ExperimentConfig`], resolved from built-in
//! defaults, then a TOML config file, then `ATTRNET_<KEY>` environment
//! variables, then command-line flags. Replication `r` always uses
//! [`replication_seed`]`(seed, r)`, results are collected in replication
//! order and reduced sequentially, so outputs do not depend on the number of
//! worker threads.
//!
//! Every output file starts with `# config_hash` and `# seed` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::centrality::{katz_centrality, katz_limit_check, BlockWeightedGraph, DEFAULT_MAX_ITER, DEFAULT_TOL, KATZ_LADDER};
use crate::crawl::{crawl_two_layers, rns_baseline, CrawlConfig, Selector};
use crate::degree::{argmax_expected_degree, degree_ci, degree_clt_test};
use crate::error::{Error, Result};
use crate::estimate::{estimate_from_crawl, EstimatorConfig, FillRule, KernelEstimate, PairEstimator};
use crate::model::{edge_marginal, generate_graph, ClassDistribution, ClassKernel, GraphSample, Model};
use crate::rng::{replication_seed, stage_seed};
use crate::spectral::{centered_scaled, planarity_confidence, semicircle_gof, spectral_screen, ScreenThresholds, SpectralSummary};
use crate::stats::{kendall_tau, mean, ranking, standard_error};
use crate::walk::{classify_all, first_return_probs, transition_from_kernel, Normalization};

pub const ENV_PREFIX: &str = "ATTRNET_";

/// Keys accepted in config files and as `ATTRNET_<KEY>` variables.
pub const CONFIG_KEYS: &[&str] = &[
    "model",
    "graph",
    "h0",
    "n",
    "n0",
    "fanout",
    "beta",
    "selector",
    "fill_rule",
    "literal_step3",
    "level",
    "coverage",
    "alpha",
    "gof_threshold",
    "screen_upper",
    "screen_lower",
    "survival",
    "normalize",
    "horizon",
    "tail_tol",
    "katz_fraction",
    "reps",
    "seed",
    "out",
];

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Option<PathBuf>,
    graph: Option<PathBuf>,
    h0: Option<PathBuf>,
    n: Option<usize>,
    n0: Option<usize>,
    fanout: Option<usize>,
    beta: Option<f64>,
    selector: Option<String>,
    fill_rule: Option<String>,
    literal_step3: Option<bool>,
    level: Option<f64>,
    coverage: Option<f64>,
    alpha: Option<f64>,
    gof_threshold: Option<f64>,
    screen_upper: Option<f64>,
    screen_lower: Option<f64>,
    survival: Option<f64>,
    normalize: Option<String>,
    horizon: Option<usize>,
    tail_tol: Option<f64>,
    katz_fraction: Option<f64>,
    reps: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectorKind {
    Estimate,
    TrueKernel,
    Uniform,
}

/// Fully resolved experiment parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub h0: Option<PathBuf>,
    pub n: usize,
    pub n0: usize,
    pub fanout: usize,
    pub beta: f64,
    pub selector: SelectorKind,
    pub fill_rule: FillRule,
    pub literal_step3: bool,
    pub level: f64,
    pub coverage: f64,
    pub alpha: f64,
    pub gof_threshold: f64,
    pub screen: ScreenThresholds,
    pub survival: f64,
    pub normalize: Normalization,
    pub horizon: usize,
    pub tail_tol: f64,
    pub katz_fraction: f64,
    pub reps: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: None,
            graph: None,
            h0: None,
            n: 200,
            n0: 20,
            fanout: 1,
            beta: crate::estimate::DEFAULT_BETA,
            selector: SelectorKind::Estimate,
            fill_rule: FillRule::SumBound,
            literal_step3: false,
            level: 0.05,
            coverage: 0.95,
            alpha: 0.05,
            gof_threshold: crate::spectral::DEFAULT_GOF_THRESHOLD,
            screen: ScreenThresholds::default(),
            survival: 1.0,
            normalize: Normalization::Abundance,
            horizon: crate::walk::DEFAULT_HORIZON,
            tail_tol: crate::walk::DEFAULT_TAIL_TOL,
            katz_fraction: crate::centrality::DEFAULT_KATZ_FRACTION,
            reps: 1,
            seed: 0,
            out: PathBuf::from("out"),
        }
    }
}

/// Command-line values that take precedence over file and environment.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub reps: Option<usize>,
}

fn env_value(raw: &str) -> toml::Value {
    // numbers and booleans parse as TOML; anything else is taken as a string
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl ExperimentConfig {
    /// Resolves defaults < config file < environment < overrides.
    ///
    /// Relative paths in the file are taken relative to the file's directory.
    pub fn resolve(
        config_path: Option<&Path>,
        env: &BTreeMap<String, String>,
        overrides: &Overrides,
    ) -> Result<Self> {
        let mut table = match config_path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str::<toml::Table>(&text).map_err(|e| Error::Config(e.to_string()))?
            }
            None => toml::Table::new(),
        };
        let base = config_path.and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default();
        for key in ["model", "graph", "h0"] {
            if let Some(toml::Value::String(s)) = table.get(key) {
                let joined = base.join(s).to_string_lossy().into_owned();
                table.insert(key.into(), toml::Value::String(joined));
            }
        }
        for key in CONFIG_KEYS {
            if let Some(v) = env.get(&format!("{ENV_PREFIX}{}", key.to_uppercase())) {
                let value = match *key {
                    "model" | "graph" | "h0" | "out" | "selector" | "fill_rule" | "normalize" => {
                        toml::Value::String(v.clone())
                    }
                    _ => env_value(v),
                };
                table.insert((*key).into(), value);
            }
        }
        let raw: RawConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut cfg = ExperimentConfig::default();
        cfg.apply(raw)?;
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        if let Some(o) = &overrides.out {
            cfg.out = o.clone();
        }
        if let Some(r) = overrides.reps {
            cfg.reps = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, raw: RawConfig) -> Result<()> {
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = raw.$field { self.$field = v; } )* };
        }
        take!(n, n0, fanout, beta, literal_step3, level, coverage, alpha, gof_threshold, survival, horizon, tail_tol, katz_fraction, reps, seed, out);
        self.model = raw.model.or(self.model.take());
        self.graph = raw.graph.or(self.graph.take());
        self.h0 = raw.h0.or(self.h0.take());
        if let Some(v) = raw.screen_upper {
            self.screen.upper = v;
        }
        if let Some(v) = raw.screen_lower {
            self.screen.lower = v;
        }
        if let Some(s) = raw.selector {
            self.selector = match s.as_str() {
                "estimate" => SelectorKind::Estimate,
                "true-kernel" => SelectorKind::TrueKernel,
                "uniform" => SelectorKind::Uniform,
                other => return Err(Error::Config(format!("unknown selector '{other}'"))),
            };
        }
        if let Some(s) = raw.fill_rule {
            self.fill_rule = match s.as_str() {
                "sum-bound" => FillRule::SumBound,
                "min-cap" => FillRule::MinCap,
                other => return Err(Error::Config(format!("unknown fill_rule '{other}'"))),
            };
        }
        if let Some(s) = raw.normalize {
            self.normalize = match s.as_str() {
                "abundance" => Normalization::Abundance,
                "none" => Normalization::None,
                other => return Err(Error::Config(format!("unknown normalize '{other}'"))),
            };
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.reps == 0 {
            return fail("reps must be at least 1".into());
        }
        if self.n == 0 {
            return fail("n must be at least 1".into());
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return fail(format!("beta {} is outside (0, 1)", self.beta));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return fail(format!("level {} is outside (0, 1)", self.level));
        }
        if !(0.0..1.0).contains(&self.coverage) {
            return fail(format!("coverage {} is outside [0, 1)", self.coverage));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return fail(format!("alpha {} is outside (0, 1]", self.alpha));
        }
        if !(self.survival > 0.0 && self.survival <= 1.0) {
            return fail(format!("survival {} is outside (0, 1]", self.survival));
        }
        if !(self.katz_fraction > 0.0 && self.katz_fraction < 1.0) {
            return fail(format!("katz_fraction {} is outside (0, 1)", self.katz_fraction));
        }
        for (name, path) in [("model", &self.model), ("graph", &self.graph), ("h0", &self.h0)] {
            if let Some(p) = path {
                if !p.is_file() {
                    return fail(format!("{name} file {} does not exist", p.display()));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 over the resolved parameters and the bytes of every input
    /// file. The output directory does not contribute.
    pub fn hash(&self) -> Result<String> {
        let mut h = Sha256::new();
        let canonical = format!(
            "n={} n0={} fanout={} beta={} selector={:?} fill_rule={:?} literal_step3={} level={} coverage={} alpha={} gof={} screen={}/{} survival={} normalize={:?} horizon={} tail_tol={} katz={} reps={} seed={}",
            self.n, self.n0, self.fanout, self.beta, self.selector, self.fill_rule, self.literal_step3,
            self.level, self.coverage, self.alpha, self.gof_threshold, self.screen.upper, self.screen.lower,
            self.survival, self.normalize, self.horizon, self.tail_tol, self.katz_fraction, self.reps, self.seed
        );
        h.update(canonical.as_bytes());
        for (name, path) in [("model", &self.model), ("graph", &self.graph), ("h0", &self.h0)] {
            h.update(name.as_bytes());
            match path {
                Some(p) => h.update(fs::read(p)?),
                None => h.update(b"-"),
            }
        }
        Ok(h.finalize().iter().fold(String::new(), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        }))
    }
}

/// Runs `reps` replications in the current rayon pool, results in replication order.
pub fn replicate<T, F>(reps: usize, master_seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64) -> Result<T> + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|r| f(r, replication_seed(master_seed, r as u64)))
        .collect()
}

/// Writes output files with a provenance header.
struct Writer {
    dir: PathBuf,
    header: String,
    written: Vec<PathBuf>,
}

impl Writer {
    fn new(cfg: &ExperimentConfig, command: &str) -> Result<Self> {
        fs::create_dir_all(&cfg.out)?;
        Ok(Writer {
            dir: cfg.out.clone(),
            header: format!("# command {command}\n# config_hash {}\n# seed {}\n", cfg.hash()?, cfg.seed),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, format!("{}{}", self.header, body))?;
        self.written.push(path);
        Ok(())
    }
}

/// Outcome of a command: files written and a short human summary.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn load_model(path: &Option<PathBuf>, what: &str) -> Result<Option<Model>> {
    match path {
        Some(p) => Model::load(p)
            .map(Some)
            .map_err(|e| Error::Config(format!("{what} {}: {e}", p.display()))),
        None => Ok(None),
    }
}

fn require_model(cfg: &ExperimentConfig) -> Result<Model> {
    load_model(&cfg.model, "model")?.ok_or_else(|| Error::Config("a model file is required".into()))
}

fn load_graph(cfg: &ExperimentConfig) -> Result<Option<GraphSample>> {
    match &cfg.graph {
        Some(p) => GraphSample::from_edge_list(&fs::read_to_string(p)?).map(Some),
        None => Ok(None),
    }
}

/// The graph for one replication: the loaded graph, or a fresh draw.
fn replicate_graph(loaded: &Option<GraphSample>, model: Option<&Model>, n: usize, seed: u64) -> Result<GraphSample> {
    match (loaded, model) {
        (Some(g), _) => Ok(g.clone()),
        (None, Some(m)) => generate_graph(&m.kernel, &m.dist, n, stage_seed(seed, "graph")),
        (None, None) => Err(Error::Config("need a model or a graph file".into())),
    }
}

fn fmt_matrix(out: &mut String, name: &str, m: &crate::linalg::Matrix) {
    writeln!(out, "{name}").unwrap();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
}

/// `generate`: draw graphs from the model and compare density to the edge marginal.
pub fn cmd_generate(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let model = require_model(cfg)?;
    let marginal = edge_marginal(&model.kernel, &model.dist);
    let graphs = replicate(cfg.reps, cfg.seed, |r, seed| {
        let g = generate_graph(&model.kernel, &model.dist, cfg.n, seed)?;
        let text = (r == 0).then(|| g.to_edge_list());
        Ok((g.edge_count(), g.density(), text))
    })?;
    let mut w = Writer::new(cfg, "generate")?;
    w.write("graph.txt", graphs[0].2.as_deref().unwrap_or_default())?;
    let mut table = String::from("rep,edges,density\n");
    for (r, (e, d, _)) in graphs.iter().enumerate() {
        writeln!(table, "{r},{e},{d}").unwrap();
    }
    w.write("densities.csv", &table)?;
    let densities: Vec<f64> = graphs.iter().map(|g| g.1).collect();
    let mean_density = mean(&densities);
    let se = if densities.len() > 1 { standard_error(&densities) } else { f64::NAN };
    let mut summary = String::new();
    writeln!(summary, "n {}", cfg.n).unwrap();
    writeln!(summary, "reps {}", cfg.reps).unwrap();
    writeln!(summary, "edges_rep0 {}", graphs[0].0).unwrap();
    writeln!(summary, "density_rep0 {}", graphs[0].1).unwrap();
    writeln!(summary, "edge_marginal {marginal}").unwrap();
    writeln!(summary, "mean_density {mean_density}").unwrap();
    writeln!(summary, "density_se {se}").unwrap();
    writeln!(summary, "within_3se {}", (mean_density - marginal).abs() <= 3.0 * se).unwrap();
    w.write("generate_summary.txt", &summary)?;
    Ok(CommandOutput {
        files: w.written,
        summary,
    })
}

fn crawl_config(cfg: &ExperimentConfig, model: Option<&Model>) -> Result<CrawlConfig> {
    let selector = match cfg.selector {
        SelectorKind::Estimate => Selector::Estimate,
        SelectorKind::Uniform => Selector::Uniform,
        SelectorKind::TrueKernel => Selector::TrueKernel(
            model
                .ok_or_else(|| Error::Config("selector true-kernel needs a model".into()))?
                .kernel
                .clone(),
        ),
    };
    let epsilon = model.map_or(crate::model::DEFAULT_EPSILON, |m| m.kernel.epsilon());
    Ok(CrawlConfig {
        n0: cfg.n0,
        fanout: cfg.fanout,
        selector,
        epsilon,
    })
}

fn estimator_config(cfg: &ExperimentConfig, model: Option<&Model>) -> EstimatorConfig {
    EstimatorConfig {
        beta: cfg.beta,
        pairs: PairEstimator {
            epsilon: model.map_or(crate::model::DEFAULT_EPSILON, |m| m.kernel.epsilon()),
            literal_denominator: cfg.literal_step3,
        },
        fill_rule: cfg.fill_rule,
    }
}

fn error_table(est: &KernelEstimate, truth: &ClassKernel) -> String {
    let mut out = String::from("a,b,true,estimate,abs_error,status\n");
    for a in 0..est.k() {
        for b in a..est.k() {
            writeln!(
                out,
                "{a},{b},{},{},{},{}",
                truth.get(a, b),
                est.get(a, b),
                (est.get(a, b) - truth.get(a, b)).abs(),
                est.status(a, b).code()
            )
            .unwrap();
        }
    }
    out
}

/// `sample-estimate`: crawl, estimate the kernel, and score it against the truth when known.
pub fn cmd_sample_estimate(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let model = load_model(&cfg.model, "model")?;
    let loaded = load_graph(cfg)?;
    let crawl_cfg = crawl_config(cfg, model.as_ref())?;
    let est_cfg = estimator_config(cfg, model.as_ref());
    let truth = model.as_ref().map(|m| &m.kernel);
    let runs = replicate(cfg.reps, cfg.seed, |r, seed| {
        let g = replicate_graph(&loaded, model.as_ref(), cfg.n, seed)?;
        if let Some(t) = truth {
            if t.k() != g.k() {
                return Err(Error::InvalidArgument("graph and model class counts differ".into()));
            }
        }
        let crawl = crawl_two_layers(&g, &crawl_cfg, stage_seed(seed, "crawl"))?;
        let est = estimate_from_crawl(&crawl, &est_cfg, stage_seed(seed, "fill"))?;
        let mae = truth.and_then(|t| est.observed_mae(t));
        let keep = (r == 0).then(|| (crawl.to_text(), est.clone()));
        Ok((crawl.core_len(), mae, keep))
    })?;
    let mut w = Writer::new(cfg, "sample-estimate")?;
    let (crawl_text, est0) = runs[0].2.clone().expect("replication 0 is kept");
    w.write("crawl.txt", &crawl_text)?;
    w.write("estimate.txt", &est0.to_text())?;
    if let Some(t) = truth {
        w.write("errors.csv", &error_table(&est0, t))?;
    }
    let mut table = String::from("rep,core,observed_mae\n");
    for (r, (core, mae, _)) in runs.iter().enumerate() {
        let mae = mae.map_or("NA".to_string(), |m| m.to_string());
        writeln!(table, "{r},{core},{mae}").unwrap();
    }
    w.write("replications.csv", &table)?;
    let maes: Vec<f64> = runs.iter().filter_map(|r| r.1).collect();
    let cores: Vec<f64> = runs.iter().map(|r| r.0 as f64).collect();
    let mut summary = String::new();
    writeln!(summary, "reps {}", cfg.reps).unwrap();
    writeln!(summary, "n0 {}", cfg.n0).unwrap();
    writeln!(summary, "beta {}", cfg.beta).unwrap();
    writeln!(summary, "mean_core {}", mean(&cores)).unwrap();
    if !maes.is_empty() {
        writeln!(summary, "mean_observed_mae {}", mean(&maes)).unwrap();
        let se = if maes.len() > 1 { standard_error(&maes) } else { f64::NAN };
        writeln!(summary, "observed_mae_se {se}").unwrap();
    }
    w.write("estimate_summary.txt", &summary)?;
    Ok(CommandOutput {
        files: w.written,
        summary,
    })
}

struct TestRep {
    reject: bool,
    gof_distance: f64,
    spectrum: SpectralSummary,
    detail: Option<(String, String, String)>,
}

/// `test`: degree CLT test, semicircle fit, planarity bound, centrality and walk reports.
pub fn cmd_test(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let model = load_model(&cfg.model, "model")?;
    let h0_model = load_model(&cfg.h0, "h0")?;
    let loaded = load_graph(cfg)?;
    let h0 = h0_model
        .as_ref()
        .or(model.as_ref())
        .ok_or_else(|| Error::Config("need a model or h0 file for the hypothesized kernel".into()))?;
    let reps = if loaded.is_some() { 1 } else { cfg.reps };
    let runs = replicate(reps, cfg.seed, |r, seed| {
        let g = replicate_graph(&loaded, model.as_ref(), cfg.n, seed)?;
        if g.k() != h0.kernel.k() {
            return Err(Error::InvalidArgument(format!(
                "graph has {} classes but the hypothesized kernel has {}",
                g.k(),
                h0.kernel.k()
            )));
        }
        let report = degree_clt_test(&g, &h0.kernel, cfg.level)?;
        let spectrum = SpectralSummary::from_matrix(&centered_scaled(&g, &h0.kernel)?)?;
        let gof = semicircle_gof(&spectrum, cfg.gof_threshold);
        let detail = if r == 0 {
            let mut ci = String::from("vertex,lower,upper\n");
            for (v, (lo, hi)) in degree_ci(&g, &h0.kernel, cfg.coverage)?.into_iter().enumerate() {
                writeln!(ci, "{v},{lo},{hi}").unwrap();
            }
            Some((report.to_csv(), ci, spectrum.to_csv()))
        } else {
            None
        };
        Ok(TestRep {
            reject: report.reject,
            gof_distance: gof.distance,
            spectrum,
            detail,
        })
    })?;

    let n_graph = loaded.as_ref().map_or(cfg.n, GraphSample::n);
    let mut w = Writer::new(cfg, "test")?;
    let (degree_csv, ci_csv, spectrum_csv) = runs[0].detail.clone().expect("replication 0 is kept");
    w.write("degree_test.csv", &degree_csv)?;
    w.write("degree_ci.csv", &ci_csv)?;
    w.write("spectrum.csv", &spectrum_csv)?;

    let rejections = runs.iter().filter(|r| r.reject).count();
    let mut degree_summary = String::new();
    writeln!(degree_summary, "reps {reps}").unwrap();
    writeln!(degree_summary, "level {}", cfg.level).unwrap();
    writeln!(degree_summary, "rejections {rejections}").unwrap();
    writeln!(degree_summary, "rejection_rate {}", rejections as f64 / reps as f64).unwrap();
    writeln!(degree_summary, "small_sample {}", n_graph < crate::degree::SMALL_SAMPLE_N).unwrap();
    w.write("degree_summary.txt", &degree_summary)?;

    let distances: Vec<f64> = runs.iter().map(|r| r.gof_distance).collect();
    let s0 = &runs[0].spectrum;
    let mut semicircle = String::new();
    writeln!(semicircle, "threshold {}", cfg.gof_threshold).unwrap();
    writeln!(semicircle, "distance_rep0 {}", distances[0]).unwrap();
    writeln!(semicircle, "pass_rep0 {}", distances[0] < cfg.gof_threshold).unwrap();
    writeln!(semicircle, "mean_distance {}", mean(&distances)).unwrap();
    writeln!(
        semicircle,
        "pass_rate {}",
        distances.iter().filter(|&&d| d < cfg.gof_threshold).count() as f64 / reps as f64
    )
    .unwrap();
    writeln!(semicircle, "moment2_rep0 {}", s0.moment(2)).unwrap();
    writeln!(semicircle, "moment4_rep0 {}", s0.moment(4)).unwrap();
    w.write("semicircle.txt", &semicircle)?;

    let summaries: Vec<SpectralSummary> = runs.iter().map(|r| r.spectrum.clone()).collect();
    let mut planarity = planarity_confidence(&h0.kernel, &h0.dist, n_graph, cfg.alpha)?;
    planarity.screen = Some(spectral_screen(&summaries, cfg.screen));
    w.write("planarity.txt", &planarity.to_text())?;

    // class-level centrality under the hypothesized kernel, with expected class sizes
    let sizes: Vec<usize> = h0
        .dist
        .probs()
        .iter()
        .map(|p| ((p * n_graph as f64).round() as usize).max(1))
        .collect();
    let bwg = BlockWeightedGraph::new(sizes, h0.kernel.matrix().clone())?;
    let (lambda, per_class) = bwg.class_centrality()?;
    let expected = argmax_expected_degree(&h0.kernel, &h0.dist);
    let mut cent = String::from("class,expected_degree_score,eigen_quotient\n");
    for c in 0..h0.kernel.k() {
        writeln!(cent, "{c},{},{}", expected.scores[c], per_class[c]).unwrap();
    }
    w.write("centrality.csv", &cent)?;
    let limit = katz_limit_check(&bwg.quotient_matrix(), &KATZ_LADDER)?;
    let mut katz = String::new();
    writeln!(katz, "quotient_lambda {lambda}").unwrap();
    writeln!(katz, "argmax_expected_degree {}", expected.class).unwrap();
    writeln!(katz, "argmax_tie {}", expected.tie).unwrap();
    for (f, a, s) in &limit.rungs {
        writeln!(katz, "rung fraction={f} alpha={a} cosine={s}").unwrap();
    }
    writeln!(katz, "monotone {}", limit.monotone).unwrap();
    w.write("katz_limit.txt", &katz)?;

    let chain = transition_from_kernel(&h0.kernel, &h0.dist, cfg.survival, cfg.normalize)?;
    let fr = first_return_probs(&chain, 0, cfg.horizon)?;
    w.write("walk.csv", &fr.to_csv())?;
    let verdicts = classify_all(&chain, cfg.horizon, cfg.tail_tol)?;
    let mut walk = String::new();
    writeln!(walk, "irreducible {}", chain.is_irreducible()).unwrap();
    writeln!(walk, "conservation_error {:e}", fr.conservation_error()).unwrap();
    for v in &verdicts {
        writeln!(
            walk,
            "state {} verdict {} partial_sum {} remaining {}",
            v.state, v.verdict, v.partial_sum, v.remaining
        )
        .unwrap();
    }
    w.write("walk.txt", &walk)?;

    let summary = format!(
        "degree rejection rate {}/{reps}\nsemicircle distance (rep 0) {:.4}\nplanarity {}\nwalk state 0 {}\n",
        rejections, distances[0], planarity.verdict, verdicts[0].verdict
    );
    Ok(CommandOutput {
        files: w.written,
        summary,
    })
}

fn class_means(scores: &[f64], labels: &[usize], k: usize) -> Vec<f64> {
    let mut sum = vec![0.0; k];
    let mut count = vec![0usize; k];
    for (s, &c) in scores.iter().zip(labels) {
        sum[c] += s;
        count[c] += 1;
    }
    sum.iter().zip(&count).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect()
}

/// `compare`: class rankings by expected degree, quotient eigenvector and
/// Katz, plus crawl versus random-node estimation error at equal budget.
pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let model = require_model(cfg)?;
    let loaded = load_graph(cfg)?;
    let k = model.kernel.k();
    let g = replicate_graph(&loaded, Some(&model), cfg.n, replication_seed(cfg.seed, 0))?;
    if g.k() != k {
        return Err(Error::InvalidArgument("graph and model class counts differ".into()));
    }
    let counts = g.class_counts();
    if let Some(c) = counts.iter().position(|&m| m == 0) {
        return Err(Error::InvalidArgument(format!("class {c} has no vertices in the graph")));
    }

    let expected = argmax_expected_degree(&model.kernel, &model.dist);
    let bwg = BlockWeightedGraph::new(counts, model.kernel.matrix().clone())?;
    let (_, eigen_scores) = bwg.class_centrality()?;
    let adjacency = g.adjacency_matrix();
    let lambda = crate::centrality::eigen_centrality(&adjacency, DEFAULT_TOL, DEFAULT_MAX_ITER)?.value;
    let katz_alpha = if lambda > 0.0 { cfg.katz_fraction / lambda } else { 0.0 };
    let katz_scores = class_means(&katz_centrality(&adjacency, katz_alpha)?, g.labels(), k);

    let rank_of = |scores: &[f64]| {
        let order = ranking(scores);
        let mut rank = vec![0; scores.len()];
        for (pos, &c) in order.iter().enumerate() {
            rank[c] = pos + 1;
        }
        rank
    };
    let (ra, rb, rc) = (
        rank_of(&expected.scores),
        rank_of(&eigen_scores),
        rank_of(&katz_scores),
    );
    let mut table = String::from("class,expected_degree,eigen_quotient,katz,rank_expected,rank_eigen,rank_katz\n");
    for c in 0..k {
        writeln!(
            table,
            "{c},{},{},{},{},{},{}",
            expected.scores[c], eigen_scores[c], katz_scores[c], ra[c], rb[c], rc[c]
        )
        .unwrap();
    }

    let crawl_cfg = crawl_config(cfg, Some(&model))?;
    let est_cfg = estimator_config(cfg, Some(&model));
    let budget = replicate(cfg.reps, cfg.seed, |_, seed| {
        let g = replicate_graph(&loaded, Some(&model), cfg.n, seed)?;
        let crawl = crawl_two_layers(&g, &crawl_cfg, stage_seed(seed, "crawl"))?;
        let crawl_est = estimate_from_crawl(&crawl, &est_cfg, stage_seed(seed, "fill"))?;
        let rns = rns_baseline(&g, crawl.core_len(), stage_seed(seed, "rns"))?;
        let rns_est = estimate_from_crawl(&rns, &est_cfg, stage_seed(seed, "rns-fill"))?;
        Ok((
            crawl.core_len(),
            crawl_est.observed_mae(&model.kernel),
            rns_est.observed_mae(&model.kernel),
        ))
    })?;
    let mut budget_csv = String::from("rep,budget,crawl_mae,rns_mae\n");
    let fmt = |m: Option<f64>| m.map_or("NA".to_string(), |v| v.to_string());
    for (r, (b, c, n)) in budget.iter().enumerate() {
        writeln!(budget_csv, "{r},{b},{},{}", fmt(*c), fmt(*n)).unwrap();
    }
    let crawl_maes: Vec<f64> = budget.iter().filter_map(|b| b.1).collect();
    let rns_maes: Vec<f64> = budget.iter().filter_map(|b| b.2).collect();

    let mut w = Writer::new(cfg, "compare")?;
    w.write("compare.csv", &table)?;
    w.write("budget.csv", &budget_csv)?;
    let mut summary = String::new();
    writeln!(summary, "katz_alpha {katz_alpha}").unwrap();
    writeln!(summary, "top_expected {}", ranking(&expected.scores)[0]).unwrap();
    writeln!(summary, "top_eigen {}", ranking(&eigen_scores)[0]).unwrap();
    writeln!(summary, "top_katz {}", ranking(&katz_scores)[0]).unwrap();
    writeln!(summary, "kendall_expected_eigen {}", kendall_tau(&expected.scores, &eigen_scores)).unwrap();
    writeln!(summary, "kendall_expected_katz {}", kendall_tau(&expected.scores, &katz_scores)).unwrap();
    writeln!(summary, "kendall_eigen_katz {}", kendall_tau(&eigen_scores, &katz_scores)).unwrap();
    writeln!(summary, "reps {}", cfg.reps).unwrap();
    if !crawl_maes.is_empty() {
        writeln!(summary, "crawl_mean_mae {}", mean(&crawl_maes)).unwrap();
    }
    if !rns_maes.is_empty() {
        writeln!(summary, "rns_mean_mae {}", mean(&rns_maes)).unwrap();
    }
    w.write("compare_summary.txt", &summary)?;
    Ok(CommandOutput {
        files: w.written,
        summary,
    })
}

/// Exit status for an error: 2 config, 3 data, 4 numerical convergence.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        Error::NoConvergence { .. } | Error::Singular | Error::KatzDivergence { .. } => 4,
        _ => 3,
    }
}

/// Dense kernel listing for reports.
pub fn kernel_text(kernel: &ClassKernel, dist: &ClassDistribution) -> String {
    let mut out = String::new();
    fmt_matrix(&mut out, "kernel", kernel.matrix());
    let pi: Vec<String> = dist.probs().iter().map(|p| p.to_string()).collect();
    writeln!(out, "pi {}", pi.join(" ")).unwrap();
    out
}
