//! Eigenvector and Katz centrality, plus the class-level quotient reduction.
//!
//! When every vertex of class `I` has the same connection weight `a_IJ` to
//! every vertex of class `J`, the `n x n` weight matrix is block-constant and
//! has rank at most `k`. Its nonzero spectrum coincides with that of the
//! `k x k` quotient `Q_IJ = √(m_I m_J) a_IJ`, and a Perron vector `u` of `Q`
//! lifts to the vertex-level vector with entry `u_I / √m_I` on class `I`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{solve, Matrix};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Default Katz attenuation as a fraction of `1 / λ_max`.
pub const DEFAULT_KATZ_FRACTION: f64 = 0.85;
pub const KATZ_LADDER: [f64; 3] = [0.5, 0.9, 0.99];

/// Classes with sizes `m_I` and symmetric block weights `a_IJ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockWeightedGraph {
    sizes: Vec<usize>,
    weights: Matrix,
}

impl BlockWeightedGraph {
    pub fn new(sizes: Vec<usize>, weights: Matrix) -> Result<Self> {
        let k = sizes.len();
        if k == 0 || sizes.contains(&0) {
            return Err(Error::InvalidArgument("every class needs at least one vertex".into()));
        }
        if weights.rows() != k || weights.cols() != k {
            return Err(Error::InvalidArgument(format!("weights must be {k}x{k}")));
        }
        weights.check_symmetric()?;
        Ok(BlockWeightedGraph { sizes, weights })
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Class of every vertex in the expanded ordering (classes contiguous).
    pub fn vertex_classes(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &m)| std::iter::repeat_n(c, m))
            .collect()
    }

    /// The `n x n` block-constant matrix, diagonal blocks included.
    pub fn expand(&self) -> Matrix {
        let classes = self.vertex_classes();
        let n = classes.len();
        Matrix::from_fn(n, n, |i, j| self.weights[(classes[i], classes[j])])
    }

    /// `Q_IJ = √(m_I m_J) a_IJ`.
    pub fn quotient_matrix(&self) -> Matrix {
        let k = self.k();
        Matrix::from_fn(k, k, |a, b| {
            ((self.sizes[a] * self.sizes[b]) as f64).sqrt() * self.weights[(a, b)]
        })
    }

    /// Principal eigenvalue and per-vertex eigenvector centrality of each class.
    pub fn class_centrality(&self) -> Result<(f64, Vec<f64>)> {
        let ec = eigen_centrality(&self.quotient_matrix(), DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        let per_vertex = ec
            .vector
            .iter()
            .zip(&self.sizes)
            .map(|(u, &m)| u / (m as f64).sqrt())
            .collect();
        Ok((ec.value, per_vertex))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenCentrality {
    /// Principal eigenvalue (largest over components when reducible).
    pub value: f64,
    /// Unit-norm, entrywise nonnegative.
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// Set when the matrix splits into several components; each component
    /// then gets its own Perron vector before the whole is normalized.
    pub reducible: bool,
    pub component_values: Vec<f64>,
}

fn components(a: &Matrix) -> Vec<Vec<usize>> {
    let n = a.rows();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for u in 0..n {
                if !seen[u] && u != v && a[(v, u)] != 0.0 {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Power iteration on `A + sI` (with `s` half the largest row sum, so that a
/// `-λ` eigenvalue of a bipartite component cannot tie with `λ`).
fn perron(a: &Matrix, tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>, usize)> {
    let n = a.rows();
    let shift = (0..n).map(|i| a.row(i).iter().sum::<f64>()).fold(0.0, f64::max) / 2.0;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    if shift == 0.0 {
        return Ok((0.0, x, 0));
    }
    for it in 1..=max_iter {
        let ax = a.mul_vec(&x);
        let mut y: Vec<f64> = ax.iter().zip(&x).map(|(v, xi)| v + shift * xi).collect();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= norm);
        let delta = y.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        x = y;
        if delta < tol {
            let ax = a.mul_vec(&x);
            let value = ax.iter().zip(&x).map(|(p, q)| p * q).sum();
            return Ok((value, x, it));
        }
    }
    Err(Error::NoConvergence {
        method: "power iteration",
        iterations: max_iter,
    })
}

/// Principal eigenpair of a symmetric nonnegative matrix by power iteration
/// from the uniform vector.
pub fn eigen_centrality(a: &Matrix, tol: f64, max_iter: usize) -> Result<EigenCentrality> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::InvalidArgument("matrix must be square and nonempty".into()));
    }
    a.check_symmetric()?;
    let n = a.rows();
    for i in 0..n {
        for j in 0..n {
            if a[(i, j)] < 0.0 {
                return Err(Error::NegativeEntry(i, j));
            }
        }
    }
    let comps = components(a);
    if comps.len() == 1 {
        let (value, vector, iterations) = perron(a, tol, max_iter)?;
        return Ok(EigenCentrality {
            value,
            vector,
            iterations,
            reducible: false,
            component_values: vec![value],
        });
    }
    let mut vector = vec![0.0; n];
    let mut component_values = Vec::with_capacity(comps.len());
    let mut iterations = 0;
    for comp in &comps {
        let sub = Matrix::from_fn(comp.len(), comp.len(), |i, j| a[(comp[i], comp[j])]);
        let (value, x, it) = perron(&sub, tol, max_iter)?;
        for (&v, xi) in comp.iter().zip(&x) {
            vector[v] = *xi;
        }
        component_values.push(value);
        iterations = iterations.max(it);
    }
    let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
    vector.iter_mut().for_each(|v| *v /= norm);
    Ok(EigenCentrality {
        value: component_values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        vector,
        iterations,
        reducible: true,
        component_values,
    })
}

/// Katz scores solving `x = αA(x + 1)`, i.e. `(I − αA) x = αA·1`.
pub fn katz_centrality(a: &Matrix, alpha: f64) -> Result<Vec<f64>> {
    let lambda = eigen_centrality(a, DEFAULT_TOL, DEFAULT_MAX_ITER)?.value;
    katz_with_lambda(a, alpha, lambda)
}

fn katz_with_lambda(a: &Matrix, alpha: f64, lambda: f64) -> Result<Vec<f64>> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("attenuation {alpha} must be nonnegative")));
    }
    if lambda > 0.0 && alpha * lambda >= 1.0 {
        return Err(Error::KatzDivergence {
            alpha,
            limit: 1.0 / lambda,
        });
    }
    let n = a.rows();
    let system = Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - alpha * a[(i, j)]);
    let rhs: Vec<f64> = a.mul_vec(&vec![1.0; n]).into_iter().map(|v| alpha * v).collect();
    let x = solve(&system, &rhs)?;
    let residual = system
        .mul_vec(&x)
        .iter()
        .zip(&rhs)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    let scale = x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    debug_assert!(residual < 1e-10 * scale, "katz residual {residual}");
    Ok(x)
}

/// Katz with the default attenuation `0.85 / λ_max`.
pub fn katz_default(a: &Matrix) -> Result<(f64, Vec<f64>)> {
    let lambda = eigen_centrality(a, DEFAULT_TOL, DEFAULT_MAX_ITER)?.value;
    let alpha = if lambda > 0.0 {
        DEFAULT_KATZ_FRACTION / lambda
    } else {
        0.0
    };
    Ok((alpha, katz_with_lambda(a, alpha, lambda)?))
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KatzLimitReport {
    pub lambda: f64,
    /// `(fraction of 1/λ, α, cosine similarity to the Perron vector)`.
    pub rungs: Vec<(f64, f64, f64)>,
    pub monotone: bool,
}

impl KatzLimitReport {
    pub fn final_similarity(&self) -> f64 {
        self.rungs.last().map_or(f64::NAN, |r| r.2)
    }
}

/// Katz direction versus the principal eigenvector as `α → 1/λ`.
///
/// `fractions` are multiples of `1/λ_max` and must lie in `(0, 1)`.
pub fn katz_limit_check(a: &Matrix, fractions: &[f64]) -> Result<KatzLimitReport> {
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
        return Err(Error::InvalidArgument(format!("ladder rung {f} is not strictly inside (0, 1)")));
    }
    let ec = eigen_centrality(a, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let mut rungs = Vec::with_capacity(fractions.len());
    for &f in fractions {
        let alpha = f / ec.value;
        let x = katz_with_lambda(a, alpha, ec.value)?;
        rungs.push((f, alpha, cosine_similarity(&x, &ec.vector)));
    }
    let monotone = rungs.windows(2).all(|w| w[1].2 >= w[0].2 - 1e-12);
    Ok(KatzLimitReport {
        lambda: ec.value,
        rungs,
        monotone,
    })
}

/// Comma-separated `(id, score)` table.
pub fn scores_csv(id_header: &str, scores: &[f64]) -> String {
    let mut out = format!("{id_header},score\n");
    for (i, s) in scores.iter().enumerate() {
        writeln!(out, "{i},{s}").unwrap();
    }
    out
}
