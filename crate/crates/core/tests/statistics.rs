//! Monte Carlo checks for the degree tests and the spectral/planarity tools.

use attrnet::degree::{degree_ci, degree_clt_test, degree_moments};
use attrnet::linalg::{eigenvalues_symmetric, Matrix};
use attrnet::model::{generate_graph, ClassDistribution, ClassKernel, GraphSample};
use attrnet::rng::{replication_seed, rng_from_seed, unit_f64};
use attrnet::spectral::{
    centered_scaled, contains_k33, contains_k5, count_k5, kuratowski_expected_counts, planarity_confidence,
    semicircle_gof, spectral_screen, PlanarityVerdict, ScreenThresholds, SpectralSummary,
};

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Draws a graph with the given labels fixed, one uniform per pair.
fn graph_with_labels(kernel: &ClassKernel, labels: &[usize], seed: u64) -> GraphSample {
    let mut rng = rng_from_seed(seed);
    let n = labels.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if unit_f64(&mut rng) < kernel.get(labels[i], labels[j]) {
                edges.push((i, j));
            }
        }
    }
    GraphSample::from_edges(kernel.k(), labels.to_vec(), &edges, seed).unwrap()
}

#[test]
fn degree_moments_match_simulation() {
    let kernel = ClassKernel::from_rows(&[[0.4, 0.1], [0.1, 0.2]], 0.05).unwrap();
    let labels: Vec<usize> = (0..100).map(|i| (i % 3 == 0) as usize).collect();
    let (mu, v) = degree_moments(&kernel, &labels);
    let reps = 20_000;
    let watch = [0usize, 1, 50];
    let mut sums = [0.0; 3];
    let mut sq = [0.0; 3];
    for r in 0..reps {
        let g = graph_with_labels(&kernel, &labels, replication_seed(31, r));
        for (w, &i) in watch.iter().enumerate() {
            let d = g.degree(i) as f64;
            sums[w] += d;
            sq[w] += d * d;
        }
    }
    for (w, &i) in watch.iter().enumerate() {
        let m = sums[w] / reps as f64;
        let var = (sq[w] - reps as f64 * m * m) / (reps as f64 - 1.0);
        assert!((m / mu[i] - 1.0).abs() < 0.05, "mean {m} vs {}", mu[i]);
        assert!((var / v[i] - 1.0).abs() < 0.05, "var {var} vs {}", v[i]);
    }
}

#[test]
fn degree_covariance_matches_shared_edge() {
    let kernel = ClassKernel::from_rows(&[[0.9, 0.3], [0.3, 0.5]], 0.05).unwrap();
    let labels = vec![0, 1, 0, 1, 1, 0];
    let (mu, _) = degree_moments(&kernel, &labels);
    let reps = 50_000;
    let products: Vec<f64> = (0..reps)
        .map(|r| {
            let g = graph_with_labels(&kernel, &labels, replication_seed(32, r));
            (g.degree(0) as f64 - mu[0]) * (g.degree(1) as f64 - mu[1])
        })
        .collect();
    let (m, se) = mean_se(&products);
    let target = 0.3 * 0.7;
    assert!((m - target).abs() <= 3.0 * se, "{m} vs {target} (se {se})");
}

#[test]
fn null_rejection_rate_is_at_most_level() {
    let kernel = ClassKernel::from_rows(&[[0.3, 0.1], [0.1, 0.2]], 0.05).unwrap();
    let dist = ClassDistribution::uniform(2);
    let reps = 200;
    let rejections = (0..reps)
        .filter(|&r| {
            let g = generate_graph(&kernel, &dist, 300, replication_seed(33, r)).unwrap();
            degree_clt_test(&g, &kernel, 0.05).unwrap().reject
        })
        .count();
    let rate = rejections as f64 / reps as f64;
    assert!(rate <= 0.05 + 3.0 * (0.05 * 0.95 / reps as f64).sqrt(), "{rate}");
}

#[test]
fn misspecified_null_is_rejected() {
    let truth = ClassKernel::constant(1, 0.3, 0.05).unwrap();
    let h0 = ClassKernel::constant(1, 0.1, 0.05).unwrap();
    let dist = ClassDistribution::uniform(1);
    let reps = 200;
    let rejections = (0..reps)
        .filter(|&r| {
            let g = generate_graph(&truth, &dist, 500, replication_seed(34, r)).unwrap();
            degree_clt_test(&g, &h0, 0.05).unwrap().reject
        })
        .count();
    assert!(rejections as f64 / reps as f64 > 0.99, "{rejections}/{reps}");
}

#[test]
fn confidence_interval_coverage() {
    let kernel = ClassKernel::from_rows(&[[0.3, 0.1], [0.1, 0.2]], 0.05).unwrap();
    let dist = ClassDistribution::new(vec![0.4, 0.6]).unwrap();
    let (mut covered, mut total) = (0usize, 0usize);
    for r in 0..500 {
        let g = generate_graph(&kernel, &dist, 1000, replication_seed(35, r)).unwrap();
        let (mu, _) = degree_moments(&kernel, g.labels());
        for (i, (lo, hi)) in degree_ci(&g, &kernel, 0.95).unwrap().into_iter().enumerate() {
            total += 1;
            covered += (lo <= mu[i] && mu[i] <= hi) as usize;
        }
    }
    let cov = covered as f64 / total as f64;
    assert!((0.93..=0.97).contains(&cov), "{cov}");
}

#[test]
fn centered_entries_are_standardized() {
    let kernel = ClassKernel::from_rows(&[[0.3, 0.1], [0.1, 0.6]], 0.05).unwrap();
    let dist = ClassDistribution::uniform(2);
    let n = 40;
    let mut entries = Vec::new();
    for r in 0..300 {
        let g = generate_graph(&kernel, &dist, n, replication_seed(36, r)).unwrap();
        let m = centered_scaled(&g, &kernel).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                entries.push(m[(i, j)] * (n as f64).sqrt());
            }
        }
    }
    let (m, se) = mean_se(&entries);
    assert!(m.abs() <= 3.0 * se, "mean {m} (se {se})");
    let sq: Vec<f64> = entries.iter().map(|x| x * x).collect();
    let (v, se) = mean_se(&sq);
    assert!((v - 1.0).abs() <= 3.0 * se, "variance {v} (se {se})");
}

#[test]
fn wigner_sign_matrix_fits_semicircle() {
    let n = 1000;
    let mut rng = rng_from_seed(37);
    let scale = 1.0 / (n as f64).sqrt();
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = if unit_f64(&mut rng) < 0.5 { scale } else { -scale };
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    let summary = SpectralSummary::from_eigenvalues(eigenvalues_symmetric(&w).unwrap());
    let gof = semicircle_gof(&summary, 0.05);
    assert!(gof.pass, "{}", gof.distance);
    let flags = spectral_screen(&[summary], ScreenThresholds::default());
    assert!(flags.k5_ruled_out && flags.k33_ruled_out);
}

#[test]
fn expected_k5_count_matches_enumeration() {
    let kernel = ClassKernel::constant(1, 0.5, 0.05).unwrap();
    let dist = ClassDistribution::uniform(1);
    let counts: Vec<f64> = (0..2000)
        .map(|r| count_k5(&generate_graph(&kernel, &dist, 9, replication_seed(38, r)).unwrap()).unwrap() as f64)
        .collect();
    let (m, se) = mean_se(&counts);
    let e5 = kuratowski_expected_counts(&kernel, &dist, 9).unwrap().e5;
    assert!((m - e5).abs() <= 3.0 * se, "{m} vs {e5} (se {se})");
}

#[test]
fn dense_kernels_never_get_planar_verdict() {
    let dist = ClassDistribution::uniform(1);
    for p in [0.6, 0.8, 0.95] {
        let kernel = ClassKernel::constant(1, p, 0.05).unwrap();
        let hits = (0..300)
            .filter(|&r| {
                let g = generate_graph(&kernel, &dist, 10, replication_seed(39, r)).unwrap();
                contains_k5(&g).unwrap() || contains_k33(&g).unwrap()
            })
            .count();
        let report = planarity_confidence(&kernel, &dist, 10, 0.05).unwrap();
        if hits as f64 / 300.0 > 0.05 {
            assert_eq!(report.verdict, PlanarityVerdict::Inconclusive, "p = {p}");
        }
    }
    let dense = ClassKernel::constant(1, 0.9, 0.05).unwrap();
    let report = planarity_confidence(&dense, &dist, 50, 0.05).unwrap();
    assert!(report.e5 > 1e3);
    assert_eq!(report.verdict, PlanarityVerdict::Inconclusive);
}
