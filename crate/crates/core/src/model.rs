//! Attribute-class random graph model.
//!
//! Vertices carry one of `k` attribute classes. Each unordered vertex pair
//! `{i, j}` is joined independently with probability `p[c_i][c_j]`, where
//! `p` is a symmetric class kernel bounded away from 0 and 1 by a margin
//! `epsilon`. Kernels are either given literally or built from a metric on
//! the attribute values through a decreasing shape function.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{rng_from_seed, unit_f64};

pub const DEFAULT_EPSILON: f64 = 0.05;
const METRIC_TOL: f64 = 1e-12;
const PI_SUM_TOL: f64 = 1e-12;

/// Finite attribute set with a metric between its values.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSpace {
    labels: Vec<String>,
    metric: Matrix,
}

impl AttributeSpace {
    /// Validates the metric axioms exhaustively (all pairs and triples).
    pub fn new(labels: Vec<String>, metric: Matrix) -> Result<Self> {
        let k = labels.len();
        if k == 0 {
            return Err(Error::Model("attribute space needs at least one value".into()));
        }
        if metric.rows() != k || metric.cols() != k {
            return Err(Error::Model(format!(
                "metric is {}x{} but there are {k} attribute values",
                metric.rows(),
                metric.cols()
            )));
        }
        for a in 0..k {
            if metric[(a, a)].abs() > METRIC_TOL {
                return Err(Error::Model(format!("d({0},{0}) must be 0", labels[a])));
            }
            for b in 0..k {
                let d = metric[(a, b)];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::Model(format!(
                        "d({},{}) = {d} is not a nonnegative real",
                        labels[a], labels[b]
                    )));
                }
                if (d - metric[(b, a)]).abs() > METRIC_TOL {
                    return Err(Error::Model(format!(
                        "metric is not symmetric at ({}, {})",
                        labels[a], labels[b]
                    )));
                }
            }
        }
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    if metric[(a, c)] > metric[(a, b)] + metric[(b, c)] + METRIC_TOL {
                        return Err(Error::Model(format!(
                            "triangle inequality fails: d({a},{c}) > d({a},{b}) + d({b},{c})",
                            a = labels[a],
                            b = labels[b],
                            c = labels[c]
                        )));
                    }
                }
            }
        }
        Ok(AttributeSpace { labels, metric })
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.metric[(a, b)]
    }

    pub fn metric(&self) -> &Matrix {
        &self.metric
    }
}

/// Decreasing map from attribute distance to connection probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelShape {
    /// `f(d) = 1 - min(1, d)`.
    OneMinusMin,
    /// `f(d) = scale * exp(-rate * d)`.
    Exponential { scale: f64, rate: f64 },
}

impl KernelShape {
    pub fn eval(&self, d: f64) -> f64 {
        match *self {
            KernelShape::OneMinusMin => 1.0 - d.min(1.0),
            KernelShape::Exponential { scale, rate } => scale * (-rate * d).exp(),
        }
    }

    fn check(&self) -> Result<()> {
        if let KernelShape::Exponential { scale, rate } = *self {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(Error::Model(format!("exponential scale must be positive, got {scale}")));
            }
            if !(rate.is_finite() && rate >= 0.0) {
                return Err(Error::Model(format!("exponential rate must be nonnegative, got {rate}")));
            }
        }
        Ok(())
    }
}

/// Probabilities of the `k` attribute classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistribution {
    pi: Vec<f64>,
}

impl ClassDistribution {
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if pi.is_empty() {
            return Err(Error::Model("class distribution is empty".into()));
        }
        if let Some(bad) = pi.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::Model(format!("class probability {bad} is negative")));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > PI_SUM_TOL {
            return Err(Error::Model(format!("class probabilities sum to {total}, not 1")));
        }
        Ok(ClassDistribution { pi })
    }

    pub fn uniform(k: usize) -> Self {
        ClassDistribution {
            pi: vec![1.0 / k as f64; k],
        }
    }

    pub fn k(&self) -> usize {
        self.pi.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.pi
    }

    /// Maps a uniform draw to a class by inverse CDF.
    fn class_for(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (c, p) in self.pi.iter().enumerate() {
            acc += p;
            if u < acc {
                return c;
            }
        }
        self.pi.iter().rposition(|&p| p > 0.0).unwrap_or(self.pi.len() - 1)
    }
}

/// A problem found by [`validate_kernel`].
#[derive(Debug, Clone, PartialEq)]
pub enum KernelViolation {
    NotSquare { rows: usize, cols: usize },
    Empty,
    BadEpsilon(f64),
    Asymmetric { row: usize, col: usize, diff: f64 },
    OutOfBounds { row: usize, col: usize, value: f64 },
}

impl std::fmt::Display for KernelViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelViolation::NotSquare { rows, cols } => write!(f, "kernel is {rows}x{cols}, not square"),
            KernelViolation::Empty => write!(f, "kernel is empty"),
            KernelViolation::BadEpsilon(e) => write!(f, "epsilon {e} is outside (0, 0.5)"),
            KernelViolation::Asymmetric { row, col, diff } => {
                write!(f, "p[{row}][{col}] differs from p[{col}][{row}] by {diff:e}")
            }
            KernelViolation::OutOfBounds { row, col, value } => {
                write!(f, "p[{row}][{col}] = {value} is outside [epsilon, 1 - epsilon]")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KernelReport {
    pub violations: Vec<KernelViolation>,
}

impl KernelReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_symmetry_violation(&self) -> bool {
        self.violations.iter().any(|v| matches!(v, KernelViolation::Asymmetric { .. }))
    }

    pub fn has_bound_violation(&self) -> bool {
        self.violations.iter().any(|v| matches!(v, KernelViolation::OutOfBounds { .. }))
    }
}

/// Checks a candidate kernel matrix against the model assumptions.
pub fn validate_kernel(p: &Matrix, epsilon: f64) -> KernelReport {
    let mut violations = Vec::new();
    if !(epsilon > 0.0 && epsilon < 0.5) {
        violations.push(KernelViolation::BadEpsilon(epsilon));
    }
    if !p.is_square() {
        violations.push(KernelViolation::NotSquare {
            rows: p.rows(),
            cols: p.cols(),
        });
        return KernelReport { violations };
    }
    if p.rows() == 0 {
        violations.push(KernelViolation::Empty);
    }
    let k = p.rows();
    for i in 0..k {
        for j in 0..k {
            let v = p[(i, j)];
            if j > i {
                let diff = (v - p[(j, i)]).abs();
                if diff > 0.0 || diff.is_nan() {
                    violations.push(KernelViolation::Asymmetric { row: i, col: j, diff });
                }
            }
            if !(v >= epsilon && v <= 1.0 - epsilon) {
                violations.push(KernelViolation::OutOfBounds { row: i, col: j, value: v });
            }
        }
    }
    KernelReport { violations }
}

/// Symmetric class-pair connection probabilities in `[epsilon, 1 - epsilon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassKernel {
    p: Matrix,
    epsilon: f64,
}

impl ClassKernel {
    pub fn new(p: Matrix, epsilon: f64) -> Result<Self> {
        let report = validate_kernel(&p, epsilon);
        if let Some(v) = report.violations.first() {
            return Err(Error::Model(v.to_string()));
        }
        Ok(ClassKernel { p, epsilon })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], epsilon: f64) -> Result<Self> {
        ClassKernel::new(Matrix::from_rows(rows)?, epsilon)
    }

    /// Every class pair connects with the same probability.
    pub fn constant(k: usize, p: f64, epsilon: f64) -> Result<Self> {
        ClassKernel::new(Matrix::from_fn(k, k, |_, _| p), epsilon)
    }

    pub fn k(&self) -> usize {
        self.p.rows()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.p[(a, b)]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.p
    }
}

/// Builds a kernel by applying `shape` to the metric and clamping to `[epsilon, 1 - epsilon]`.
pub fn kernel_from_metric(space: &AttributeSpace, shape: KernelShape, epsilon: f64) -> Result<ClassKernel> {
    shape.check()?;
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Model(format!("epsilon {epsilon} is outside (0, 0.5)")));
    }
    let k = space.k();
    let raw = Matrix::from_fn(k, k, |a, b| shape.eval(space.distance(a, b)));
    let first = raw[(0, 0)];
    let constant = (0..k).all(|a| (0..k).all(|b| raw[(a, b)] == first));
    if constant && !(first > 0.0 && first < 1.0) {
        return Err(Error::Model(format!(
            "shape maps every class pair to {first}, a constant outside (0, 1)"
        )));
    }
    let clamped = Matrix::from_fn(k, k, |a, b| raw[(a, b)].clamp(epsilon, 1.0 - epsilon));
    ClassKernel::new(clamped, epsilon)
}

/// Probability that a uniformly chosen vertex pair is joined: `Σ p_kr π_k π_r`.
pub fn edge_marginal(kernel: &ClassKernel, dist: &ClassDistribution) -> f64 {
    let pi = dist.probs();
    let mut total = 0.0;
    for (a, pa) in pi.iter().enumerate() {
        for (b, pb) in pi.iter().enumerate() {
            total += kernel.get(a, b) * pa * pb;
        }
    }
    total
}

/// A realized graph: class labels plus a simple undirected edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSample {
    k: usize,
    labels: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
    seed: u64,
}

impl GraphSample {
    /// Builds a graph from 0-based labels and an edge list.
    ///
    /// Rejects self-loops, duplicate edges, out-of-range vertices and labels.
    pub fn from_edges(k: usize, labels: Vec<usize>, edges: &[(usize, usize)], seed: u64) -> Result<Self> {
        let n = labels.len();
        if let Some(&bad) = labels.iter().find(|&&c| c >= k) {
            return Err(Error::Model(format!("label {bad} out of range for k = {k}")));
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Model(format!("edge ({i}, {j}) references a vertex >= {n}")));
            }
            if i == j {
                return Err(Error::Model(format!("self-loop at vertex {i}")));
            }
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for (v, list) in neighbors.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Model(format!("duplicate edge at vertex {v}")));
            }
        }
        Ok(GraphSample {
            k,
            labels,
            neighbors,
            seed,
        })
    }

    /// Builds a graph from a 0/1 adjacency matrix (must be symmetric with zero diagonal).
    pub fn from_adjacency(k: usize, labels: Vec<usize>, adjacency: &Matrix, seed: u64) -> Result<Self> {
        let n = labels.len();
        if adjacency.rows() != n || adjacency.cols() != n {
            return Err(Error::Model("adjacency size does not match labels".into()));
        }
        let mut edges = Vec::new();
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::Model(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let a = adjacency[(i, j)];
                if a != adjacency[(j, i)] {
                    return Err(Error::Model(format!("adjacency not symmetric at ({i}, {j})")));
                }
                match a {
                    x if x == 1.0 => edges.push((i, j)),
                    x if x == 0.0 => {}
                    x => return Err(Error::Model(format!("adjacency entry {x} is not 0/1"))),
                }
            }
        }
        GraphSample::from_edges(k, labels, &edges, seed)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn density(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        self.edge_count() as f64 / (n * (n - 1) / 2) as f64
    }

    /// Number of vertices in each class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &c in &self.labels {
            counts[c] += 1;
        }
        counts
    }

    pub fn adjacency_matrix(&self) -> Matrix {
        let n = self.n();
        let mut a = Matrix::zeros(n, n);
        for (i, j) in self.edges() {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    /// Induced subgraph on `vertices` (in the given order), relabeled `0..len`.
    pub fn induced(&self, vertices: &[usize]) -> GraphSample {
        let mut position = vec![usize::MAX; self.n()];
        for (new, &old) in vertices.iter().enumerate() {
            position[old] = new;
        }
        let neighbors = vertices
            .iter()
            .map(|&old| {
                let mut list: Vec<usize> = self.neighbors[old]
                    .iter()
                    .filter_map(|&u| (position[u] != usize::MAX).then_some(position[u]))
                    .collect();
                list.sort_unstable();
                list
            })
            .collect();
        GraphSample {
            k: self.k,
            labels: vertices.iter().map(|&v| self.labels[v]).collect(),
            neighbors,
            seed: self.seed,
        }
    }

    /// Serializes to the edge-list text format.
    ///
    /// ```text
    /// n k seed
    /// labels c_0 c_1 ... c_{n-1}
    /// i j
    /// ...
    /// ```
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {} {}", self.n(), self.k, self.seed).unwrap();
        out.push_str("labels");
        for c in &self.labels {
            write!(out, " {c}").unwrap();
        }
        out.push('\n');
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}").unwrap();
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("bad header line '{header}' (expected 'n k seed')")));
        }
        let n: usize = parse_field(fields[0], "n")?;
        let k: usize = parse_field(fields[1], "k")?;
        let seed: u64 = parse_field(fields[2], "seed")?;
        let label_line = lines.next().ok_or_else(|| Error::Parse("missing labels line".into()))?;
        let mut parts = label_line.split_whitespace();
        if parts.next() != Some("labels") {
            return Err(Error::Parse("second line must start with 'labels'".into()));
        }
        let labels = parts.map(|s| parse_field(s, "label")).collect::<Result<Vec<usize>>>()?;
        if labels.len() != n {
            return Err(Error::Parse(format!("expected {n} labels, found {}", labels.len())));
        }
        let mut edges = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::Parse(format!("bad edge line '{line}'")));
            };
            let (i, j): (usize, usize) = (parse_field(a, "vertex")?, parse_field(b, "vertex")?);
            edges.push((i.min(j), i.max(j)));
        }
        GraphSample::from_edges(k, labels, &edges, seed)
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("invalid {what} '{s}'")))
}

/// Draws a graph: labels i.i.d. from `dist`, then one Bernoulli draw per
/// unordered pair `i < j` in row-major order.
pub fn generate_graph(kernel: &ClassKernel, dist: &ClassDistribution, n: usize, seed: u64) -> Result<GraphSample> {
    if n == 0 {
        return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
    }
    if kernel.k() != dist.k() {
        return Err(Error::Model(format!(
            "kernel has {} classes but distribution has {}",
            kernel.k(),
            dist.k()
        )));
    }
    let mut rng = rng_from_seed(seed);
    let labels: Vec<usize> = (0..n).map(|_| dist.class_for(unit_f64(&mut rng))).collect();
    let mut neighbors = vec![Vec::new(); n];
    for i in 0..n {
        let row = labels[i];
        for j in (i + 1)..n {
            if unit_f64(&mut rng) < kernel.get(row, labels[j]) {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    // pushes happen in increasing j for row i and increasing i for column j,
    // so every list is already sorted
    Ok(GraphSample {
        k: kernel.k(),
        labels,
        neighbors,
        seed,
    })
}

/// Parsed model file.
#[derive(Debug, Clone)]
pub struct Model {
    pub space: Option<AttributeSpace>,
    pub shape: Option<KernelShape>,
    pub kernel: ClassKernel,
    pub dist: ClassDistribution,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    classes: Vec<String>,
    metric: Option<Vec<Vec<f64>>>,
    shape: Option<String>,
    scale: Option<f64>,
    rate: Option<f64>,
    epsilon: Option<f64>,
    pi: Vec<f64>,
    kernel: Option<Vec<Vec<f64>>>,
}

impl Model {
    /// Parses a TOML model description.
    ///
    /// Keys: `classes`, `metric`, `shape` (`one-minus-min` or `exponential`
    /// with `scale` and `rate`), `epsilon`, `pi`, and an optional literal
    /// `kernel` that takes precedence over the metric route.
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ModelFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let k = file.classes.len();
        let epsilon = file.epsilon.unwrap_or(DEFAULT_EPSILON);
        let dist = ClassDistribution::new(file.pi)?;
        if dist.k() != k {
            return Err(Error::Model(format!("pi has {} entries for {k} classes", dist.k())));
        }
        let shape = match file.shape.as_deref() {
            None => None,
            Some("one-minus-min") => Some(KernelShape::OneMinusMin),
            Some("exponential") => Some(KernelShape::Exponential {
                scale: file.scale.unwrap_or(1.0),
                rate: file.rate.unwrap_or(1.0),
            }),
            Some(other) => return Err(Error::Model(format!("unknown shape '{other}'"))),
        };
        let space = match file.metric {
            Some(rows) => Some(AttributeSpace::new(file.classes, Matrix::from_rows(&rows)?)?),
            None => None,
        };
        let kernel = match (&file.kernel, &space) {
            (Some(rows), _) => ClassKernel::from_rows(rows, epsilon)?,
            (None, Some(space)) => {
                let shape = shape.ok_or_else(|| Error::Model("metric given without a shape".into()))?;
                kernel_from_metric(space, shape, epsilon)?
            }
            (None, None) => return Err(Error::Model("model needs either `kernel` or `metric`".into())),
        };
        if kernel.k() != k {
            return Err(Error::Model(format!("kernel is {0}x{0} for {k} classes", kernel.k())));
        }
        Ok(Model {
            space,
            shape,
            kernel,
            dist,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Model::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_space(points: &[f64]) -> AttributeSpace {
        let k = points.len();
        let labels = (0..k).map(|i| format!("s{i}")).collect();
        AttributeSpace::new(labels, Matrix::from_fn(k, k, |a, b| (points[a] - points[b]).abs())).unwrap()
    }

    #[test]
    fn one_minus_min_examples() {
        let space = line_space(&[0.0, 0.3, 1.0]);
        let kern = kernel_from_metric(&space, KernelShape::OneMinusMin, 0.05).unwrap();
        assert_eq!(kern.get(0, 0), 0.95);
        assert!((kern.get(0, 1) - 0.7).abs() < 1e-15);
        assert_eq!(kern.get(0, 2), 0.05);
    }

    #[test]
    fn triangle_violation_rejected() {
        let m = Matrix::from_rows(&[[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]]).unwrap();
        let err = AttributeSpace::new(vec!["a".into(), "b".into(), "c".into()], m).unwrap_err();
        assert!(err.to_string().contains("triangle"));
    }

    #[test]
    fn constant_kernel_outside_unit_interval_rejected() {
        let space = line_space(&[0.0]);
        assert!(kernel_from_metric(&space, KernelShape::OneMinusMin, 0.05).is_err());
        let space = line_space(&[0.0, 0.0]);
        let shape = KernelShape::Exponential { scale: 2.0, rate: 1.0 };
        assert!(kernel_from_metric(&space, shape, 0.05).is_err());
        let shape = KernelShape::Exponential { scale: 0.4, rate: 1.0 };
        assert_eq!(kernel_from_metric(&space, shape, 0.05).unwrap().get(0, 1), 0.4);
    }

    #[test]
    fn validate_kernel_cases() {
        let ok = Matrix::from_rows(&[[0.5]]).unwrap();
        assert!(validate_kernel(&ok, 0.05).passed());
        let asym = Matrix::from_rows(&[[0.5, 0.2], [0.3, 0.5]]).unwrap();
        let r = validate_kernel(&asym, 0.05);
        assert!(r.has_symmetry_violation() && !r.has_bound_violation());
        let hot = Matrix::from_rows(&[[1.0, 0.2], [0.2, 0.5]]).unwrap();
        let r = validate_kernel(&hot, 0.05);
        assert!(r.has_bound_violation() && !r.has_symmetry_violation());
    }

    #[test]
    fn edge_marginal_examples() {
        let k1 = ClassKernel::from_rows(&[[0.3]], 0.05).unwrap();
        assert!((edge_marginal(&k1, &ClassDistribution::new(vec![1.0]).unwrap()) - 0.3).abs() < 1e-15);
        let k2 = ClassKernel::from_rows(&[[0.2, 0.4], [0.4, 0.6]], 0.05).unwrap();
        let m = edge_marginal(&k2, &ClassDistribution::uniform(2));
        assert!((m - 0.4).abs() < 1e-15);
    }

    #[test]
    fn single_vertex_graph() {
        let k = ClassKernel::constant(1, 0.5, 0.05).unwrap();
        let g = generate_graph(&k, &ClassDistribution::uniform(1), 1, 3).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn generation_is_deterministic_and_simple() {
        let k = ClassKernel::from_rows(&[[0.3, 0.1], [0.1, 0.4]], 0.05).unwrap();
        let d = ClassDistribution::new(vec![0.4, 0.6]).unwrap();
        let a = generate_graph(&k, &d, 60, 99).unwrap();
        let b = generate_graph(&k, &d, 60, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_edge_list(), b.to_edge_list());
        let adj = a.adjacency_matrix();
        for i in 0..60 {
            assert_eq!(adj[(i, i)], 0.0);
            for j in 0..60 {
                assert_eq!(adj[(i, j)], adj[(j, i)]);
            }
        }
        assert_ne!(a, generate_graph(&k, &d, 60, 100).unwrap());
    }

    #[test]
    fn edge_list_round_trip() {
        let k = ClassKernel::constant(2, 0.3, 0.05).unwrap();
        let g = generate_graph(&k, &ClassDistribution::uniform(2), 25, 5).unwrap();
        let back = GraphSample::from_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn edge_list_rejects_garbage() {
        assert!(GraphSample::from_edge_list("").is_err());
        assert!(GraphSample::from_edge_list("2 1 0\nlabels 0 0\n0 0\n").is_err());
        assert!(GraphSample::from_edge_list("2 1 0\nlabels 0\n").is_err());
        assert!(GraphSample::from_edge_list("2 1 0\nlabels 0 0\n0 1\n1 0\n").is_err());
    }

    #[test]
    fn model_file_metric_route() {
        let text = r#"
            classes = ["low", "mid", "high"]
            metric = [[0.0, 0.3, 1.0], [0.3, 0.0, 0.7], [1.0, 0.7, 0.0]]
            shape = "one-minus-min"
            epsilon = 0.05
            pi = [0.2, 0.3, 0.5]
        "#;
        let m = Model::from_toml(text).unwrap();
        assert_eq!(m.kernel.k(), 3);
        assert!((m.kernel.get(1, 2) - 0.3).abs() < 1e-12);
        assert!(m.space.is_some());
    }

    #[test]
    fn model_file_kernel_overrides_metric() {
        let text = r#"
            classes = ["a", "b"]
            metric = [[0.0, 1.0], [1.0, 0.0]]
            shape = "one-minus-min"
            pi = [0.5, 0.5]
            kernel = [[0.3, 0.05], [0.05, 0.3]]
        "#;
        let m = Model::from_toml(text).unwrap();
        assert_eq!(m.kernel.get(0, 1), 0.05);
        assert_eq!(m.kernel.get(0, 0), 0.3);
    }

    #[test]
    fn model_file_errors() {
        assert!(Model::from_toml("classes = [\"a\"]\npi = [1.0]\n").is_err());
        assert!(Model::from_toml("classes = [\"a\"]\npi = [0.5]\nkernel = [[0.5]]\n").is_err());
        assert!(Model::from_toml("classes = [\"a\", \"b\"]\npi = [1.0]\nkernel = [[0.5]]\n").is_err());
    }
}
