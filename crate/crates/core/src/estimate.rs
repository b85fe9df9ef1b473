//! Class-kernel estimation from crawl data.
//!
//! The estimator combines two measures of each class-pair probability: one
//! from the uniformly chosen seed vertices (layer 0) and one from the
//! neighbors picked in the second crawl layer (layer 1). The two are mixed
//! with weight `beta`; pairs seen by neither layer are imputed from a lower
//! bound assembled out of observed entries, or uniformly when no bound is
//! available.

use std::fmt::Write as _;

use crate::crawl::{CrawlSample, Layer};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{ClassKernel, DEFAULT_EPSILON};
use crate::rng::{rng_from_seed, unit_f64};

pub const DEFAULT_BETA: f64 = 0.5;

/// Proportion of each of `k` classes among `labels`.
pub fn class_proportions(labels: &[usize], k: usize) -> Result<Vec<f64>> {
    if labels.is_empty() {
        return Err(Error::Estimate("cannot take class proportions of an empty sample".into()));
    }
    let mut counts = vec![0usize; k];
    for &c in labels {
        if c >= k {
            return Err(Error::Estimate(format!("label {c} out of range for k = {k}")));
        }
        counts[c] += 1;
    }
    let total = labels.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

/// Symmetric `k x k` estimate where some entries may be unobserved.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEstimate {
    k: usize,
    values: Vec<Option<f64>>,
}

impl RawEstimate {
    pub fn missing(k: usize) -> Self {
        RawEstimate {
            k,
            values: vec![None; k * k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        self.values[a * self.k + b]
    }

    pub fn set(&mut self, a: usize, b: usize, v: Option<f64>) {
        self.values[a * self.k + b] = v;
        self.values[b * self.k + a] = v;
    }

    pub fn observed_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Raw estimate seeded from a known kernel (every entry observed).
    pub fn from_kernel(kernel: &ClassKernel) -> Self {
        let k = kernel.k();
        RawEstimate {
            k,
            values: (0..k * k).map(|i| Some(kernel.get(i / k, i % k))).collect(),
        }
    }
}

/// Options for the layer-0 / layer-1 pair estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEstimator {
    pub epsilon: f64,
    /// Use `s_i s_j n^2` as the denominator for every entry, diagonal included.
    pub literal_denominator: bool,
}

impl Default for PairEstimator {
    fn default() -> Self {
        PairEstimator {
            epsilon: DEFAULT_EPSILON,
            literal_denominator: false,
        }
    }
}

impl PairEstimator {
    /// Edge frequency per class pair among a set of fully observed vertices.
    ///
    /// `labels[v]` is the class of local vertex `v`; `edges` are local pairs.
    /// Off-diagonal entries divide the cross-edge count by `c_i c_j`; diagonal
    /// entries divide by `c_i (c_i - 1) / 2` (or `c_i^2` with the literal
    /// denominator). Zero denominators leave the entry missing. Values are
    /// clamped to `[epsilon, 1 - epsilon]`.
    pub fn estimate(&self, k: usize, labels: &[usize], edges: &[(usize, usize)]) -> RawEstimate {
        let mut counts = vec![0usize; k];
        for &c in labels {
            counts[c] += 1;
        }
        let mut hits = vec![0usize; k * k];
        for &(u, v) in edges {
            let (a, b) = (labels[u].min(labels[v]), labels[u].max(labels[v]));
            hits[a * k + b] += 1;
        }
        let mut out = RawEstimate::missing(k);
        for a in 0..k {
            for b in a..k {
                let (ca, cb) = (counts[a] as f64, counts[b] as f64);
                let pairs = if a != b || self.literal_denominator {
                    ca * cb
                } else {
                    ca * (ca - 1.0) / 2.0
                };
                if pairs > 0.0 {
                    let p = hits[a * k + b] as f64 / pairs;
                    out.set(a, b, Some(p.clamp(self.epsilon, 1.0 - self.epsilon)));
                }
            }
        }
        out
    }
}

/// Layer-0 measure with default options.
pub fn estimate_p0(k: usize, labels: &[usize], edges: &[(usize, usize)], epsilon: f64) -> RawEstimate {
    PairEstimator {
        epsilon,
        literal_denominator: false,
    }
    .estimate(k, labels, edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryStatus {
    Observed,
    Missing,
    ImputedBounded,
    ImputedDefault,
}

impl EntryStatus {
    pub fn code(self) -> char {
        match self {
            EntryStatus::Observed => 'O',
            EntryStatus::Missing => '?',
            EntryStatus::ImputedBounded => 'B',
            EntryStatus::ImputedDefault => 'D',
        }
    }
}

/// How the lower bound for an unobserved pair is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillRule {
    /// `sup_r (q_mr + q_nr)`, clamped to `[epsilon, 1 - epsilon]`.
    #[default]
    SumBound,
    /// `max_r max(q_mr + q_nr - 1, epsilon)`.
    MinCap,
}

/// Estimated kernel with per-entry provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelEstimate {
    k: usize,
    q: Matrix,
    status: Vec<EntryStatus>,
    lower: Matrix,
    beta: f64,
    epsilon: f64,
    s0: Vec<f64>,
    s1: Option<Vec<f64>>,
}

/// Mixes two raw measures entrywise: `beta * p0 + (1 - beta) * p1` where both
/// exist, the available one where only one does, missing otherwise.
pub fn blend(p0: &RawEstimate, p1: &RawEstimate, beta: f64, epsilon: f64) -> Result<KernelEstimate> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!("beta = {beta} is outside (0, 1)")));
    }
    if p0.k() != p1.k() {
        return Err(Error::InvalidArgument("estimates have different class counts".into()));
    }
    let k = p0.k();
    let mut q = Matrix::from_fn(k, k, |_, _| f64::NAN);
    let mut status = vec![EntryStatus::Missing; k * k];
    for a in 0..k {
        for b in 0..k {
            let v = match (p0.get(a, b), p1.get(a, b)) {
                (Some(x), Some(y)) => Some(beta * x + (1.0 - beta) * y),
                (Some(x), None) | (None, Some(x)) => Some(x),
                (None, None) => None,
            };
            if let Some(v) = v {
                q[(a, b)] = v;
                status[a * k + b] = EntryStatus::Observed;
            }
        }
    }
    Ok(KernelEstimate {
        k,
        q,
        status,
        lower: Matrix::from_fn(k, k, |_, _| epsilon),
        beta,
        epsilon,
        s0: Vec::new(),
        s1: None,
    })
}

impl KernelEstimate {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.q[(a, b)]
    }

    pub fn status(&self, a: usize, b: usize) -> EntryStatus {
        self.status[a * self.k + b]
    }

    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn s0(&self) -> &[f64] {
        &self.s0
    }

    pub fn s1(&self) -> Option<&[f64]> {
        self.s1.as_deref()
    }

    pub fn is_finalized(&self) -> bool {
        !self.status.contains(&EntryStatus::Missing)
    }

    /// Entries that carry a real observation, as a raw estimate.
    pub fn observed(&self) -> RawEstimate {
        let mut raw = RawEstimate::missing(self.k);
        for a in 0..self.k {
            for b in a..self.k {
                if self.status(a, b) == EntryStatus::Observed {
                    raw.set(a, b, Some(self.q[(a, b)]));
                }
            }
        }
        raw
    }

    /// Converts a finalized estimate into a kernel usable for generation.
    pub fn to_kernel(&self) -> Result<ClassKernel> {
        if !self.is_finalized() {
            return Err(Error::Estimate("estimate still has missing entries".into()));
        }
        ClassKernel::new(self.q.clone(), self.epsilon)
    }

    /// Lower bound for the unobserved pair `(m, n)` from observed companions,
    /// or `None` when no class `r` has both `q_mr` and `q_nr` observed.
    fn pair_bound(&self, m: usize, n: usize, rule: FillRule) -> Option<f64> {
        let eps = self.epsilon;
        let mut best: Option<f64> = None;
        for r in 0..self.k {
            if self.status(m, r) != EntryStatus::Observed || self.status(n, r) != EntryStatus::Observed {
                continue;
            }
            let sum = self.q[(m, r)] + self.q[(n, r)];
            let bound = match rule {
                FillRule::SumBound => sum,
                FillRule::MinCap => (sum - 1.0).max(eps),
            };
            best = Some(best.map_or(bound, |b: f64| b.max(bound)));
        }
        best.map(|b| b.clamp(eps, 1.0 - eps))
    }

    /// Imputes every missing entry in row-major order over the upper triangle.
    ///
    /// Bounds only use entries that were observed before imputation started.
    /// One uniform draw is consumed per imputed pair.
    pub fn fill_missing(&self, rule: FillRule, seed: u64) -> KernelEstimate {
        let mut out = self.clone();
        let mut rng = rng_from_seed(seed);
        let (eps, k) = (self.epsilon, self.k);
        for m in 0..k {
            for n in m..k {
                if self.status(m, n) != EntryStatus::Missing {
                    continue;
                }
                let (lo, status) = match self.pair_bound(m, n, rule) {
                    Some(b) => (b, EntryStatus::ImputedBounded),
                    None => (eps, EntryStatus::ImputedDefault),
                };
                let u = unit_f64(&mut rng);
                let v = lo + (1.0 - eps - lo) * u;
                for (a, b) in [(m, n), (n, m)] {
                    out.q[(a, b)] = v;
                    out.lower[(a, b)] = lo;
                    out.status[a * k + b] = status;
                }
            }
        }
        out
    }

    /// Mean absolute error of observed entries (upper triangle) against a known kernel.
    pub fn observed_mae(&self, truth: &ClassKernel) -> Option<f64> {
        let mut total = 0.0;
        let mut count = 0usize;
        for a in 0..self.k {
            for b in a..self.k {
                if self.status(a, b) == EntryStatus::Observed {
                    total += (self.q[(a, b)] - truth.get(a, b)).abs();
                    count += 1;
                }
            }
        }
        (count > 0).then(|| total / count as f64)
    }

    /// Structured text: scalars, then the `q`, `status` and `lower` matrices.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "beta {}", self.beta).unwrap();
        writeln!(out, "epsilon {}", self.epsilon).unwrap();
        write_vec(&mut out, "s0", &self.s0);
        match &self.s1 {
            Some(s1) => write_vec(&mut out, "s1", s1),
            None => out.push_str("s1 none\n"),
        }
        out.push_str("q\n");
        write_matrix(&mut out, &self.q);
        out.push_str("status\n");
        for a in 0..self.k {
            let row: String = (0..self.k).map(|b| self.status(a, b).code()).collect();
            writeln!(out, "{row}").unwrap();
        }
        out.push_str("lower\n");
        write_matrix(&mut out, &self.lower);
        out
    }
}

fn write_vec(out: &mut String, name: &str, v: &[f64]) {
    out.push_str(name);
    for x in v {
        write!(out, " {x}").unwrap();
    }
    out.push('\n');
}

fn write_matrix(out: &mut String, m: &Matrix) {
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| x.to_string()).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
}

/// Estimator options for [`estimate_from_crawl`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub beta: f64,
    pub pairs: PairEstimator,
    pub fill_rule: FillRule,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            beta: DEFAULT_BETA,
            pairs: PairEstimator::default(),
            fill_rule: FillRule::default(),
        }
    }
}

/// Core vertices of one layer with their mutual edges, relabeled locally.
fn layer_view(crawl: &CrawlSample, layer: Layer) -> (Vec<usize>, Vec<(usize, usize)>) {
    let members: Vec<_> = crawl.core().iter().filter(|c| c.layer == layer).collect();
    let mut local = std::collections::HashMap::with_capacity(members.len());
    for (i, c) in members.iter().enumerate() {
        local.insert(c.vertex, i);
    }
    let labels = members.iter().map(|c| c.class).collect();
    let mut edges = Vec::new();
    for (i, c) in members.iter().enumerate() {
        for u in &c.neighbors {
            if let Some(&j) = local.get(u) {
                if i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    (labels, edges)
}

/// Full pipeline on a crawl: layer measures, blend, then imputation.
pub fn estimate_from_crawl(crawl: &CrawlSample, config: &EstimatorConfig, seed: u64) -> Result<KernelEstimate> {
    if crawl.core().is_empty() {
        return Err(Error::Estimate("crawl has no core vertices".into()));
    }
    let k = crawl.k();
    let (labels0, edges0) = layer_view(crawl, Layer::Seed);
    let (labels1, edges1) = layer_view(crawl, Layer::Neighbor);
    let p0 = if labels0.is_empty() {
        RawEstimate::missing(k)
    } else {
        config.pairs.estimate(k, &labels0, &edges0)
    };
    let p1 = if labels1.is_empty() {
        RawEstimate::missing(k)
    } else {
        config.pairs.estimate(k, &labels1, &edges1)
    };
    let mut est = blend(&p0, &p1, config.beta, config.pairs.epsilon)?;
    est.s0 = if labels0.is_empty() {
        vec![0.0; k]
    } else {
        class_proportions(&labels0, k)?
    };
    est.s1 = if labels1.is_empty() {
        None
    } else {
        Some(class_proportions(&labels1, k)?)
    };
    Ok(est.fill_missing(config.fill_rule, seed))
}
