//! Degree statistics under a hypothesized class kernel.
//!
//! With independent edges, `d_i` is a sum of Bernoulli variables with mean
//! `μ_i = Σ_{j≠i} p_ij` and variance `v_i = Σ_{j≠i} p_ij (1 - p_ij)`; two
//! degrees share exactly one edge, so `Cov(d_i, d_k) = p_ik (1 - p_ik)`. As
//! long as the kernel stays away from 0 and 1, `(d_i - μ_i) / √v_i` is
//! asymptotically standard normal, which gives per-vertex z-tests and normal
//! confidence intervals.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{ClassDistribution, ClassKernel, GraphSample};
use crate::stats::{normal_quantile, two_sided_p};

/// Below this vertex count the normal approximation is flagged.
pub const SMALL_SAMPLE_N: usize = 30;

pub fn degree_vector(graph: &GraphSample) -> Vec<usize> {
    (0..graph.n()).map(|v| graph.degree(v)).collect()
}

/// Expected degree and degree variance of every vertex given the labels.
pub fn degree_moments(kernel: &ClassKernel, labels: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let k = kernel.k();
    let mut counts = vec![0usize; k];
    for &c in labels {
        counts[c] += 1;
    }
    // per class: Σ over all vertices (including self), then remove the self term
    let mut mu_class = vec![0.0; k];
    let mut var_class = vec![0.0; k];
    for a in 0..k {
        for b in 0..k {
            let p = kernel.get(a, b);
            mu_class[a] += counts[b] as f64 * p;
            var_class[a] += counts[b] as f64 * p * (1.0 - p);
        }
    }
    labels
        .iter()
        .map(|&c| {
            let p = kernel.get(c, c);
            (mu_class[c] - p, var_class[c] - p * (1.0 - p))
        })
        .unzip()
}

/// Covariance of the degrees of two distinct vertices.
pub fn degree_covariance(kernel: &ClassKernel, labels: &[usize], i: usize, other: usize) -> Result<f64> {
    if i == other {
        return Err(Error::InvalidArgument(
            "covariance of a vertex with itself is its variance".into(),
        ));
    }
    let p = kernel.get(labels[i], labels[other]);
    Ok(p * (1.0 - p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexDegree {
    pub vertex: usize,
    pub class: usize,
    pub degree: usize,
    pub mu: f64,
    pub var: f64,
    pub z: f64,
    pub p_value: f64,
    /// `d_i / √n`.
    pub scaled_density: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeReport {
    pub vertices: Vec<VertexDegree>,
    pub level: f64,
    /// Smallest per-vertex p-value times the number of vertices, capped at 1.
    pub bonferroni_p: f64,
    pub reject: bool,
    pub small_sample: bool,
}

impl DegreeReport {
    pub fn z_scores(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v.z).collect()
    }

    /// Comma-separated table with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex,class,d,mu,var,z,pvalue\n");
        for v in &self.vertices {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                v.vertex, v.class, v.degree, v.mu, v.var, v.z, v.p_value
            )
            .unwrap();
        }
        out
    }
}

/// Per-vertex two-sided z-tests with a Bonferroni global decision.
pub fn degree_clt_test(graph: &GraphSample, kernel: &ClassKernel, level: f64) -> Result<DegreeReport> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("test level {level} is outside (0, 1)")));
    }
    check_dims(graph, kernel)?;
    let n = graph.n();
    let (mu, var) = degree_moments(kernel, graph.labels());
    let sqrt_n = (n as f64).sqrt();
    let vertices: Vec<VertexDegree> = (0..n)
        .map(|v| {
            let d = graph.degree(v);
            let z = if var[v] > 0.0 {
                (d as f64 - mu[v]) / var[v].sqrt()
            } else {
                0.0
            };
            VertexDegree {
                vertex: v,
                class: graph.label(v),
                degree: d,
                mu: mu[v],
                var: var[v],
                z,
                p_value: two_sided_p(z),
                scaled_density: d as f64 / sqrt_n,
            }
        })
        .collect();
    let min_p = vertices.iter().map(|v| v.p_value).fold(1.0_f64, f64::min);
    let bonferroni_p = (min_p * n as f64).min(1.0);
    Ok(DegreeReport {
        vertices,
        level,
        bonferroni_p,
        reject: bonferroni_p < level,
        small_sample: n < SMALL_SAMPLE_N,
    })
}

/// Normal intervals `d_i ± z · √v_i` for each expected degree.
pub fn degree_ci(graph: &GraphSample, kernel: &ClassKernel, coverage: f64) -> Result<Vec<(f64, f64)>> {
    if !(0.0..1.0).contains(&coverage) {
        return Err(Error::InvalidArgument(format!("coverage {coverage} is outside [0, 1)")));
    }
    check_dims(graph, kernel)?;
    let z = if coverage == 0.0 {
        0.0
    } else {
        normal_quantile(0.5 + coverage / 2.0)
    };
    let (_, var) = degree_moments(kernel, graph.labels());
    Ok((0..graph.n())
        .map(|v| {
            let d = graph.degree(v) as f64;
            let half = z * var[v].sqrt();
            (d - half, d + half)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedDegreeArgmax {
    pub class: usize,
    pub tie: bool,
    /// `Σ_l p_cl π_l` for each class.
    pub scores: Vec<f64>,
}

/// Class with the largest expected degree; the lowest index wins ties.
pub fn argmax_expected_degree(kernel: &ClassKernel, dist: &ClassDistribution) -> ExpectedDegreeArgmax {
    let pi = dist.probs();
    let scores: Vec<f64> = (0..kernel.k())
        .map(|c| pi.iter().enumerate().map(|(l, w)| kernel.get(c, l) * w).sum())
        .collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * best.abs().max(1.0);
    let winners: Vec<usize> = (0..scores.len()).filter(|&c| best - scores[c] <= tol).collect();
    ExpectedDegreeArgmax {
        class: winners[0],
        tie: winners.len() > 1,
        scores,
    }
}

fn check_dims(graph: &GraphSample, kernel: &ClassKernel) -> Result<()> {
    if graph.k() != kernel.k() {
        return Err(Error::InvalidArgument(format!(
            "graph has {} classes but kernel has {}",
            graph.k(),
            kernel.k()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> GraphSample {
        let edges: Vec<_> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        GraphSample::from_edges(1, vec![0; n], &edges, 0).unwrap()
    }

    #[test]
    fn degree_vector_examples() {
        assert_eq!(degree_vector(&complete(3)), vec![2, 2, 2]);
        let empty = GraphSample::from_edges(1, vec![0; 4], &[], 0).unwrap();
        assert_eq!(degree_vector(&empty), vec![0; 4]);
    }

    #[test]
    fn moments_examples() {
        let k = ClassKernel::constant(1, 0.5, 0.05).unwrap();
        let (mu, var) = degree_moments(&k, &[0; 11]);
        assert!(mu.iter().all(|&m| (m - 5.0).abs() < 1e-12));
        assert!(var.iter().all(|&v| (v - 2.5).abs() < 1e-12));
        let k = ClassKernel::from_rows(&[[0.5, 0.3], [0.3, 0.5]], 0.05).unwrap();
        let (mu, var) = degree_moments(&k, &[0, 1]);
        assert!((mu[0] - 0.3).abs() < 1e-15 && (var[1] - 0.21).abs() < 1e-15);
    }

    #[test]
    fn moments_match_brute_force() {
        let k = ClassKernel::from_rows(&[[0.2, 0.6, 0.1], [0.6, 0.3, 0.4], [0.1, 0.4, 0.9]], 0.05).unwrap();
        let labels = [0, 2, 1, 1, 0, 2, 2];
        let (mu, var) = degree_moments(&k, &labels);
        for i in 0..labels.len() {
            let ps: Vec<f64> = (0..labels.len())
                .filter(|&j| j != i)
                .map(|j| k.get(labels[i], labels[j]))
                .collect();
            assert!((mu[i] - ps.iter().sum::<f64>()).abs() < 1e-12);
            assert!((var[i] - ps.iter().map(|p| p * (1.0 - p)).sum::<f64>()).abs() < 1e-12);
        }
    }

    #[test]
    fn covariance_examples() {
        let k = ClassKernel::from_rows(&[[0.5, 0.9], [0.9, 0.5]], 0.05).unwrap();
        assert!((degree_covariance(&k, &[0, 0], 0, 1).unwrap() - 0.25).abs() < 1e-15);
        assert!((degree_covariance(&k, &[0, 1], 0, 1).unwrap() - 0.09).abs() < 1e-15);
        assert!(degree_covariance(&k, &[0, 1], 1, 1).is_err());
    }

    #[test]
    fn exact_expectation_gives_zero_z() {
        // 5-cycle at p = 0.5: d_i = μ_i = 2
        let k = ClassKernel::constant(1, 0.5, 0.05).unwrap();
        let g = GraphSample::from_edges(1, vec![0; 5], &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)], 0).unwrap();
        let r = degree_clt_test(&g, &k, 0.05).unwrap();
        for v in &r.vertices {
            assert_eq!(v.z, 0.0);
            assert_eq!(v.p_value, 1.0);
        }
        assert!(!r.reject);
        assert!(r.small_sample);
        assert!(r.to_csv().starts_with("vertex,class,d,mu,var,z,pvalue\n0,0,2,2,1,0,1\n"));
    }

    #[test]
    fn ci_widths() {
        let g = complete(4);
        let tight = ClassKernel::constant(1, 0.9, 0.05).unwrap();
        let loose = ClassKernel::constant(1, 0.5, 0.05).unwrap();
        let zero = degree_ci(&g, &loose, 0.0).unwrap();
        assert!(zero.iter().all(|&(a, b)| a == 3.0 && b == 3.0));
        let w_tight = degree_ci(&g, &tight, 0.95).unwrap()[0];
        let w_loose = degree_ci(&g, &loose, 0.95).unwrap()[0];
        assert!(w_tight.1 - w_tight.0 < w_loose.1 - w_loose.0);
        let expect = 2.0 * 1.959_963_984_540_054 * 0.75f64.sqrt();
        assert!((w_loose.1 - w_loose.0 - expect).abs() < 1e-9);
        assert!(degree_ci(&g, &loose, 1.0).is_err());
    }

    #[test]
    fn argmax_examples() {
        let k1 = ClassKernel::constant(1, 0.4, 0.05).unwrap();
        let r = argmax_expected_degree(&k1, &ClassDistribution::uniform(1));
        assert_eq!((r.class, r.tie), (0, false));
        let k2 = ClassKernel::from_rows(&[[0.3, 0.1], [0.1, 0.2]], 0.05).unwrap();
        let r = argmax_expected_degree(&k2, &ClassDistribution::uniform(2));
        assert_eq!((r.class, r.tie), (0, false));
        assert!((r.scores[0] - 0.2).abs() < 1e-15 && (r.scores[1] - 0.15).abs() < 1e-15);
        let k3 = ClassKernel::from_rows(&[[0.3, 0.3], [0.3, 0.3]], 0.05).unwrap();
        let r = argmax_expected_degree(&k3, &ClassDistribution::uniform(2));
        assert_eq!((r.class, r.tie), (0, true));
    }
}
