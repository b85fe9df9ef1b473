//! Spectra, the semicircle law, and the Kuratowski-based planarity bound.
//!
//! For a graph drawn from the class model, the matrix with entries
//! `(δ_ij − p_ij) / √(p_ij (1 − p_ij))` is a Wigner matrix (zero-mean,
//! unit-variance, independent entries above the diagonal), so after scaling
//! by `n^{-1/2}` its empirical spectral distribution approaches the
//! semicircle law on `[-2, 2]`.
//!
//! Planarity is handled through the one-sided bound
//! `1 − P(planar) ≤ P(K5 ⊆ G) + P(K3,3 ⊆ G)`, with each probability bounded
//! by the expected number of copies (Markov's inequality).

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_symmetric, Matrix};
use crate::model::{ClassDistribution, ClassKernel, GraphSample};
use crate::stats::ks_distance;

pub const DEFAULT_GOF_THRESHOLD: f64 = 0.05;
/// Largest class count accepted by [`kuratowski_expected_counts`].
pub const MAX_KURATOWSKI_CLASSES: usize = 12;
/// Largest graph accepted by the brute-force subgraph oracles.
pub const MAX_ORACLE_VERTICES: usize = 20;

/// Sorted spectrum of a symmetric matrix and its empirical distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    eigenvalues: Vec<f64>,
}

impl SpectralSummary {
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        Ok(SpectralSummary {
            eigenvalues: eigenvalues_symmetric(m)?,
        })
    }

    /// Wraps a spectrum; values are re-sorted descending.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        SpectralSummary { eigenvalues }
    }

    /// Eigenvalues, largest first.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    /// `F(x) = #{λ_i ≤ x} / n`.
    pub fn esd(&self, x: f64) -> f64 {
        if self.eigenvalues.is_empty() {
            return 0.0;
        }
        let count = self.eigenvalues.iter().filter(|&&l| l <= x).count();
        count as f64 / self.eigenvalues.len() as f64
    }

    /// `(1/n) Σ λ_i^p`.
    pub fn moment(&self, p: i32) -> f64 {
        self.eigenvalues.iter().map(|l| l.powi(p)).sum::<f64>() / self.eigenvalues.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (i, l) in self.eigenvalues.iter().enumerate() {
            writeln!(out, "{i},{l}").unwrap();
        }
        out
    }
}

/// `n^{-1/2} W` where `W_ij = (δ_ij − p_ij) / √(p_ij (1 − p_ij))` off the diagonal.
pub fn centered_scaled(graph: &GraphSample, kernel: &ClassKernel) -> Result<Matrix> {
    if graph.k() != kernel.k() {
        return Err(Error::InvalidArgument("graph and kernel class counts differ".into()));
    }
    let n = graph.n();
    let scale = 1.0 / (n as f64).sqrt();
    let k = kernel.k();
    // the two possible entry values per class pair
    let mut absent = vec![0.0; k * k];
    let mut present = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            let p = kernel.get(a, b);
            let sd = (p * (1.0 - p)).sqrt();
            absent[a * k + b] = -p / sd * scale;
            present[a * k + b] = (1.0 - p) / sd * scale;
        }
    }
    let labels = graph.labels();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let idx = labels[i] * k + labels[j];
            let v = if graph.has_edge(i, j) { present[idx] } else { absent[idx] };
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Semicircle density `√(4 − s²) / 2π` on `[-2, 2]`.
pub fn semicircle_density(s: f64) -> f64 {
    if s.abs() > 2.0 {
        0.0
    } else {
        (4.0 - s * s).sqrt() / (2.0 * std::f64::consts::PI)
    }
}

/// Semicircle CDF `1/2 + s√(4 − s²)/4π + arcsin(s/2)/π`.
pub fn semicircle_cdf(x: f64) -> f64 {
    use std::f64::consts::PI;
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// Moment of order `order`: zero when odd, the Catalan number
/// `(2k)! / (k! (k + 1)!)` when `order = 2k`.
pub fn semicircle_moment(order: u32) -> u128 {
    if order % 2 == 1 {
        return 0;
    }
    let k = (order / 2) as u128;
    // C_{j+1} = C_j · 2(2j + 1) / (j + 2)
    (0..k).fold(1u128, |c, j| c * 2 * (2 * j + 1) / (j + 2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofResult {
    pub distance: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Sup distance between the ESD and the semicircle CDF.
pub fn semicircle_gof(summary: &SpectralSummary, threshold: f64) -> GofResult {
    let distance = ks_distance(summary.eigenvalues(), semicircle_cdf);
    GofResult {
        distance,
        threshold,
        pass: distance < threshold,
    }
}

/// Expected numbers of K5 and K3,3 subgraphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KuratowskiCounts {
    pub e5: f64,
    pub e33: f64,
}

pub fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Sums `Π π_{c_v} · Π_{(a,b) ∈ pairs} q_{c_a c_b}` over every class
/// assignment of `vertices` vertices. `pairs` must be sorted by their larger
/// endpoint so each factor is applied as soon as both ends are assigned.
fn assignment_sum(kernel: &ClassKernel, pi: &[f64], vertices: usize, pairs: &[(usize, usize)]) -> f64 {
    fn go(
        kernel: &ClassKernel,
        pi: &[f64],
        vertices: usize,
        pairs: &[(usize, usize)],
        classes: &mut Vec<usize>,
        weight: f64,
    ) -> f64 {
        let v = classes.len();
        if v == vertices {
            return weight;
        }
        let mut total = 0.0;
        for c in 0..pi.len() {
            if pi[c] == 0.0 {
                continue;
            }
            let mut w = weight * pi[c];
            for &(a, _) in pairs.iter().filter(|p| p.1 == v) {
                w *= kernel.get(classes[a], c);
            }
            classes.push(c);
            total += go(kernel, pi, vertices, pairs, classes, w);
            classes.pop();
        }
        total
    }
    go(kernel, pi, vertices, pairs, &mut Vec::with_capacity(vertices), 1.0)
}

/// Exact expected subgraph counts for `n` vertices with i.i.d. classes.
///
/// `e5 = C(n,5) E[Π_{10 pairs} q]`; `e33 = 10 C(n,6) E[Π_{9 cross pairs} q]`
/// (a 6-set splits into two triples in 10 ways).
pub fn kuratowski_expected_counts(kernel: &ClassKernel, dist: &ClassDistribution, n: usize) -> Result<KuratowskiCounts> {
    let k = kernel.k();
    if k != dist.k() {
        return Err(Error::InvalidArgument("kernel and distribution class counts differ".into()));
    }
    if k > MAX_KURATOWSKI_CLASSES {
        return Err(Error::TooLarge(format!(
            "{k} classes; enumeration is limited to {MAX_KURATOWSKI_CLASSES}"
        )));
    }
    let pi = dist.probs();
    let k5_pairs: Vec<(usize, usize)> = (1..5).flat_map(|b| (0..b).map(move |a| (a, b))).collect();
    let k33_pairs: Vec<(usize, usize)> = (3..6).flat_map(|b| (0..3).map(move |a| (a, b))).collect();
    let e5 = if n >= 5 {
        binomial(n, 5) * assignment_sum(kernel, pi, 5, &k5_pairs)
    } else {
        0.0
    };
    let e33 = if n >= 6 {
        10.0 * binomial(n, 6) * assignment_sum(kernel, pi, 6, &k33_pairs)
    } else {
        0.0
    };
    Ok(KuratowskiCounts { e5, e33 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanarityVerdict {
    PlanarWithConfidence,
    Inconclusive,
}

impl std::fmt::Display for PlanarityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PlanarityVerdict::PlanarWithConfidence => "planar-with-confidence",
            PlanarityVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarityReport {
    pub n: usize,
    pub alpha: f64,
    pub e5: f64,
    pub e33: f64,
    /// `min(1, e5)`.
    pub alpha5: f64,
    /// `min(1, e33)`.
    pub alpha33: f64,
    pub verdict: PlanarityVerdict,
    /// Advisory spectral screen, when one was run.
    pub screen: Option<ScreenFlags>,
}

impl PlanarityReport {
    /// Upper bound on `1 − P(planar)`.
    pub fn non_planarity_bound(&self) -> f64 {
        (self.alpha5 + self.alpha33).min(1.0)
    }

    pub fn confidence(&self) -> f64 {
        1.0 - self.alpha
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "n {}", self.n).unwrap();
        writeln!(out, "alpha {}", self.alpha).unwrap();
        writeln!(out, "e5 {:e}", self.e5).unwrap();
        writeln!(out, "e33 {:e}", self.e33).unwrap();
        writeln!(out, "alpha5 {:e}", self.alpha5).unwrap();
        writeln!(out, "alpha33 {:e}", self.alpha33).unwrap();
        writeln!(out, "bound {:e}", self.non_planarity_bound()).unwrap();
        writeln!(out, "verdict {}", self.verdict).unwrap();
        match &self.screen {
            Some(s) => {
                writeln!(out, "screen_replications {}", s.replications).unwrap();
                writeln!(out, "screen_max_eigenvalue {}", s.max_eigenvalue).unwrap();
                writeln!(out, "screen_min_eigenvalue {}", s.min_eigenvalue).unwrap();
                writeln!(out, "screen_k5_ruled_out {}", s.k5_ruled_out).unwrap();
                writeln!(out, "screen_k33_ruled_out {}", s.k33_ruled_out).unwrap();
            }
            None => out.push_str("screen none\n"),
        }
        out
    }
}

/// Planar with confidence `1 − alpha` when the Markov bounds sum to at most `alpha`.
///
/// The bound is one-sided, so the only other verdict is inconclusive.
pub fn planarity_confidence(kernel: &ClassKernel, dist: &ClassDistribution, n: usize, alpha: f64) -> Result<PlanarityReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} is outside (0, 1]")));
    }
    let KuratowskiCounts { e5, e33 } = kuratowski_expected_counts(kernel, dist, n)?;
    let (alpha5, alpha33) = (e5.min(1.0), e33.min(1.0));
    let verdict = if (alpha5 + alpha33).min(1.0) <= alpha {
        PlanarityVerdict::PlanarWithConfidence
    } else {
        PlanarityVerdict::Inconclusive
    };
    Ok(PlanarityReport {
        n,
        alpha,
        e5,
        e33,
        alpha5,
        alpha33,
        verdict,
        screen: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenThresholds {
    /// Largest eigenvalue of K5.
    pub upper: f64,
    /// Smallest eigenvalue of K3,3.
    pub lower: f64,
}

impl Default for ScreenThresholds {
    fn default() -> Self {
        ScreenThresholds { upper: 4.0, lower: -3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenFlags {
    pub k5_ruled_out: bool,
    pub k33_ruled_out: bool,
    pub max_eigenvalue: f64,
    pub min_eigenvalue: f64,
    pub replications: usize,
}

/// Heuristic screen over replicated spectra: K5 is ruled out when every
/// spectrum stays below `upper`, K3,3 when every spectrum stays above `lower`.
pub fn spectral_screen(summaries: &[SpectralSummary], thresholds: ScreenThresholds) -> ScreenFlags {
    let max = summaries.iter().map(SpectralSummary::max).fold(f64::NEG_INFINITY, f64::max);
    let min = summaries.iter().map(SpectralSummary::min).fold(f64::INFINITY, f64::min);
    let any = !summaries.is_empty();
    ScreenFlags {
        k5_ruled_out: any && max < thresholds.upper,
        k33_ruled_out: any && min > thresholds.lower,
        max_eigenvalue: max,
        min_eigenvalue: min,
        replications: summaries.len(),
    }
}

fn adjacency_masks(graph: &GraphSample) -> Result<Vec<u32>> {
    let n = graph.n();
    if n > MAX_ORACLE_VERTICES {
        return Err(Error::TooLarge(format!(
            "subgraph search is limited to {MAX_ORACLE_VERTICES} vertices, got {n}"
        )));
    }
    Ok((0..n)
        .map(|v| graph.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect())
}

fn for_each_subset(n: usize, size: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..size).collect();
    if size > n {
        return;
    }
    loop {
        f(&idx);
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - size {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Number of 5-vertex sets that span a complete graph.
pub fn count_k5(graph: &GraphSample) -> Result<usize> {
    let adj = adjacency_masks(graph)?;
    let mut count = 0;
    for_each_subset(graph.n(), 5, |s| {
        let clique = s.iter().all(|&v| {
            let others = s.iter().filter(|&&u| u != v).fold(0u32, |m, &u| m | (1 << u));
            adj[v] & others == others
        });
        if clique {
            count += 1;
        }
    });
    Ok(count)
}

/// Number of K3,3 subgraphs (unordered bipartitions of 6-sets with all 9 cross edges).
pub fn count_k33(graph: &GraphSample) -> Result<usize> {
    let adj = adjacency_masks(graph)?;
    let mut count = 0;
    for_each_subset(graph.n(), 6, |s| {
        // bipartitions with s[0] on the left: choose 2 more of the remaining 5
        for a in 1..6 {
            for b in (a + 1)..6 {
                let left = [s[0], s[a], s[b]];
                let right: Vec<usize> = (1..6).filter(|&i| i != a && i != b).map(|i| s[i]).collect();
                if left.iter().all(|&l| right.iter().all(|&r| adj[l] >> r & 1 == 1)) {
                    count += 1;
                }
            }
        }
    });
    Ok(count)
}

pub fn contains_k5(graph: &GraphSample) -> Result<bool> {
    count_k5(graph).map(|c| c > 0)
}

pub fn contains_k33(graph: &GraphSample) -> Result<bool> {
    count_k33(graph).map(|c| c > 0)
}
