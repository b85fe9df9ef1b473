//! Two-layer neighborhood crawl and the random-node baseline.
//!
//! Layer 0 is a uniform sample of seed vertices without replacement; every
//! seed is expanded (its full neighbor list is read). For each seed one
//! neighbor (or `fanout` neighbors) is then picked with probability
//! proportional to the current class-pair estimate and expanded as well.
//! Expanded vertices form the core; every other vertex seen in a core
//! neighbor list joins the frontier with only its class recorded.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::estimate::{estimate_p0, RawEstimate};
use crate::model::{ClassKernel, GraphSample, DEFAULT_EPSILON};
use crate::rng::{rng_from_seed, sample_without_replacement, weighted_index};

/// Read access to a graph that is being sampled.
pub trait GraphOracle {
    /// Total vertex count, if the provider discloses it.
    fn vertex_count(&self) -> Option<usize>;
    fn class_count(&self) -> usize;
    fn attribute(&self, v: usize) -> usize;
    fn neighbors(&self, v: usize) -> Vec<usize>;
}

impl GraphOracle for GraphSample {
    fn vertex_count(&self) -> Option<usize> {
        Some(self.n())
    }

    fn class_count(&self) -> usize {
        self.k()
    }

    fn attribute(&self, v: usize) -> usize {
        self.label(v)
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        GraphSample::neighbors(self, v).to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    Seed,
    Neighbor,
}

impl Layer {
    fn index(self) -> u8 {
        match self {
            Layer::Seed => 0,
            Layer::Neighbor => 1,
        }
    }
}

/// An expanded vertex: class and complete neighbor list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreVertex {
    pub vertex: usize,
    pub class: usize,
    pub layer: Layer,
    pub neighbors: Vec<usize>,
}

impl CoreVertex {
    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }
}

/// Partially observed graph produced by a crawl.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrawlSample {
    k: usize,
    core: Vec<CoreVertex>,
    frontier: Vec<(usize, usize)>,
    edges: Vec<(usize, usize)>,
    seeds: Vec<usize>,
    isolated_seeds: Vec<usize>,
    censored: bool,
}

impl CrawlSample {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Expanded vertices: layer-0 seeds in draw order, then layer-1 picks.
    pub fn core(&self) -> &[CoreVertex] {
        &self.core
    }

    /// `(vertex, class)` of discovered but unexpanded vertices, ascending by vertex.
    pub fn frontier(&self) -> &[(usize, usize)] {
        &self.frontier
    }

    /// Observed edges `(i, j)`, `i < j`, ascending.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn seeds(&self) -> &[usize] {
        &self.seeds
    }

    /// Seeds with no neighbors, which contributed no layer-1 pick.
    pub fn isolated_seeds(&self) -> &[usize] {
        &self.isolated_seeds
    }

    /// True when core neighbor lists only cover the induced subgraph (random-node baseline).
    pub fn censored(&self) -> bool {
        self.censored
    }

    pub fn core_len(&self) -> usize {
        self.core.len()
    }

    /// Structured text with `[core]`, `[frontier]` and `[edges]` sections.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "k {}", self.k).unwrap();
        writeln!(out, "censored {}", self.censored).unwrap();
        out.push_str("seeds");
        for s in &self.seeds {
            write!(out, " {s}").unwrap();
        }
        out.push_str("\n[core]\nvertex,class,layer,degree,neighbors\n");
        for c in &self.core {
            let nb: Vec<String> = c.neighbors.iter().map(|u| u.to_string()).collect();
            writeln!(
                out,
                "{},{},{},{},{}",
                c.vertex,
                c.class,
                c.layer.index(),
                c.degree(),
                nb.join(" ")
            )
            .unwrap();
        }
        out.push_str("[frontier]\nvertex,class\n");
        for (v, c) in &self.frontier {
            writeln!(out, "{v},{c}").unwrap();
        }
        out.push_str("[edges]\ni,j\n");
        for (i, j) in &self.edges {
            writeln!(out, "{i},{j}").unwrap();
        }
        out
    }

    fn assemble<O: GraphOracle + ?Sized>(
        oracle: &O,
        core: Vec<CoreVertex>,
        seeds: Vec<usize>,
        isolated_seeds: Vec<usize>,
        censored: bool,
    ) -> Self {
        let in_core: BTreeSet<usize> = core.iter().map(|c| c.vertex).collect();
        let mut frontier = BTreeMap::new();
        let mut edges = BTreeSet::new();
        for c in &core {
            for &u in &c.neighbors {
                edges.insert((c.vertex.min(u), c.vertex.max(u)));
                if !in_core.contains(&u) {
                    frontier.entry(u).or_insert_with(|| oracle.attribute(u));
                }
            }
        }
        CrawlSample {
            k: oracle.class_count(),
            core,
            frontier: frontier.into_iter().collect(),
            edges: edges.into_iter().collect(),
            seeds,
            isolated_seeds,
            censored,
        }
    }
}

/// Which weights drive the layer-1 neighbor choice.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Selector {
    /// Layer-0 estimate of the class-pair probabilities.
    #[default]
    Estimate,
    /// A known kernel (for sensitivity experiments).
    TrueKernel(ClassKernel),
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrawlConfig {
    pub n0: usize,
    pub fanout: usize,
    pub selector: Selector,
    /// Clamp margin for the layer-0 estimate used by [`Selector::Estimate`].
    pub epsilon: f64,
}

impl CrawlConfig {
    pub fn new(n0: usize) -> Self {
        CrawlConfig {
            n0,
            fanout: 1,
            selector: Selector::Estimate,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// Picks one entry of `neighbor_classes` for a vertex of class `from_class`.
///
/// Weights are `estimate[from_class][class]`, normalized over the list.
/// Neighbors whose class pair is unestimated get the mean of the available
/// weights; with no estimate at all the choice is uniform.
pub fn select_neighbor<R: RngCore + ?Sized>(
    from_class: usize,
    neighbor_classes: &[usize],
    estimate: &RawEstimate,
    rng: &mut R,
) -> usize {
    assert!(!neighbor_classes.is_empty(), "neighbor list must be nonempty");
    let raw: Vec<Option<f64>> = neighbor_classes.iter().map(|&c| estimate.get(from_class, c)).collect();
    let known: Vec<f64> = raw.iter().flatten().copied().collect();
    let weights: Vec<f64> = if known.is_empty() {
        vec![1.0; raw.len()]
    } else {
        let fill = known.iter().sum::<f64>() / known.len() as f64;
        raw.iter().map(|w| w.unwrap_or(fill)).collect()
    };
    weighted_index(rng, &weights)
}

fn expand<O: GraphOracle + ?Sized>(oracle: &O, v: usize, layer: Layer) -> CoreVertex {
    let mut neighbors = oracle.neighbors(v);
    neighbors.sort_unstable();
    CoreVertex {
        vertex: v,
        class: oracle.attribute(v),
        layer,
        neighbors,
    }
}

fn population<O: GraphOracle + ?Sized>(oracle: &O, wanted: usize) -> Result<usize> {
    let n = oracle
        .vertex_count()
        .ok_or_else(|| Error::Sampling("oracle does not disclose its vertex count".into()))?;
    if n == 0 {
        return Err(Error::Sampling("graph is empty".into()));
    }
    if wanted == 0 {
        return Err(Error::Sampling("need at least one seed vertex".into()));
    }
    if wanted > n {
        return Err(Error::Sampling(format!("requested {wanted} vertices from a population of {n}")));
    }
    Ok(n)
}

/// Two-layer crawl: `n0` uniform seeds, then `fanout` selected neighbors per seed.
pub fn crawl_two_layers<O: GraphOracle + ?Sized>(oracle: &O, config: &CrawlConfig, seed: u64) -> Result<CrawlSample> {
    let n = population(oracle, config.n0)?;
    if config.fanout == 0 {
        return Err(Error::InvalidArgument("fanout must be at least 1".into()));
    }
    let k = oracle.class_count();
    let mut rng = rng_from_seed(seed);
    let seeds = sample_without_replacement(&mut rng, n, config.n0);
    let layer0: Vec<CoreVertex> = seeds.iter().map(|&v| expand(oracle, v, Layer::Seed)).collect();

    let weights = match &config.selector {
        Selector::Estimate => {
            let position: BTreeMap<usize, usize> = seeds.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let labels: Vec<usize> = layer0.iter().map(|c| c.class).collect();
            let mut edges = Vec::new();
            for (i, c) in layer0.iter().enumerate() {
                for u in &c.neighbors {
                    if let Some(&j) = position.get(u) {
                        if i < j {
                            edges.push((i, j));
                        }
                    }
                }
            }
            estimate_p0(k, &labels, &edges, config.epsilon)
        }
        Selector::TrueKernel(kernel) => RawEstimate::from_kernel(kernel),
        Selector::Uniform => RawEstimate::missing(k),
    };

    let mut expanded: BTreeSet<usize> = seeds.iter().copied().collect();
    let mut layer1 = Vec::new();
    let mut isolated = Vec::new();
    for c in &layer0 {
        if c.neighbors.is_empty() {
            isolated.push(c.vertex);
            continue;
        }
        let mut candidates = c.neighbors.clone();
        for _ in 0..config.fanout.min(c.neighbors.len()) {
            let classes: Vec<usize> = candidates.iter().map(|&u| oracle.attribute(u)).collect();
            let pick = candidates.swap_remove(select_neighbor(c.class, &classes, &weights, &mut rng));
            if expanded.insert(pick) {
                layer1.push(expand(oracle, pick, Layer::Neighbor));
            }
        }
    }

    let mut core = layer0;
    core.extend(layer1);
    Ok(CrawlSample::assemble(oracle, core, seeds, isolated, false))
}

/// Random-node baseline: `count` uniform vertices and the edges among them.
///
/// Degrees of the returned core vertices are induced-subgraph degrees, so the
/// sample is flagged as censored.
pub fn rns_baseline<O: GraphOracle + ?Sized>(oracle: &O, count: usize, seed: u64) -> Result<CrawlSample> {
    let n = population(oracle, count)?;
    let mut rng = rng_from_seed(seed);
    let seeds = sample_without_replacement(&mut rng, n, count);
    let chosen: BTreeSet<usize> = seeds.iter().copied().collect();
    let core = seeds
        .iter()
        .map(|&v| {
            let mut c = expand(oracle, v, Layer::Seed);
            c.neighbors.retain(|u| chosen.contains(u));
            c
        })
        .collect();
    Ok(CrawlSample::assemble(oracle, core, seeds, Vec::new(), true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_graph, ClassDistribution};
    use crate::rng::rng_from_seed;

    fn complete(n: usize) -> GraphSample {
        let edges: Vec<_> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        GraphSample::from_edges(1, vec![0; n], &edges, 0).unwrap()
    }

    #[test]
    fn complete_graph_crawl() {
        let g = complete(4);
        let s = crawl_two_layers(&g, &CrawlConfig::new(1), 5).unwrap();
        assert_eq!(s.core_len(), 2);
        assert_eq!(s.core()[0].degree(), 3);
        assert_eq!(s.frontier().len(), 2);
        // the two core vertices see 3 + 3 - 1 distinct edges
        assert_eq!(s.edges().len(), 5);
        assert!(s.isolated_seeds().is_empty());
    }

    #[test]
    fn edgeless_graph_crawl() {
        let g = GraphSample::from_edges(1, vec![0; 6], &[], 0).unwrap();
        let s = crawl_two_layers(&g, &CrawlConfig::new(2), 1).unwrap();
        assert_eq!(s.core_len(), 2);
        assert!(s.core().iter().all(|c| c.degree() == 0));
        assert!(s.frontier().is_empty());
        assert_eq!(s.isolated_seeds().len(), 2);
    }

    #[test]
    fn too_many_seeds() {
        let g = complete(3);
        assert!(matches!(
            crawl_two_layers(&g, &CrawlConfig::new(4), 0),
            Err(Error::Sampling(_))
        ));
        assert!(rns_baseline(&g, 4, 0).is_err());
        assert!(rns_baseline(&g, 0, 0).is_err());
    }

    #[test]
    fn rns_examples() {
        let g = complete(4);
        let s = rns_baseline(&g, 2, 3).unwrap();
        assert_eq!(s.edges().len(), 1);
        assert!(s.censored());
        let full = rns_baseline(&g, 4, 3).unwrap();
        assert_eq!(full.edges().len(), 6);
        assert!(full.frontier().is_empty());
    }

    #[test]
    fn select_same_class_is_uniform() {
        let est = RawEstimate::from_kernel(&ClassKernel::constant(2, 0.3, 0.05).unwrap());
        let mut rng = rng_from_seed(4);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[select_neighbor(0, &[1, 1, 1], &est, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 4.0 * (30_000.0f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt());
        }
    }

    #[test]
    fn select_partial_estimate_uses_mean() {
        let mut est = RawEstimate::missing(3);
        est.set(0, 1, Some(0.2));
        est.set(0, 2, Some(0.6));
        // class 0 entry missing -> weight (0.2 + 0.6) / 2
        let mut rng = rng_from_seed(12);
        let mut hits = 0;
        let reps = 20_000;
        for _ in 0..reps {
            if select_neighbor(0, &[0, 1, 2], &est, &mut rng) == 0 {
                hits += 1;
            }
        }
        let p = 0.4 / 1.2;
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((hits as f64 / reps as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn crawl_sees_true_degrees() {
        let k = ClassKernel::from_rows(&[[0.3, 0.05], [0.05, 0.3]], 0.05).unwrap();
        let g = generate_graph(&k, &ClassDistribution::uniform(2), 150, 8).unwrap();
        let s = crawl_two_layers(&g, &CrawlConfig::new(15), 21).unwrap();
        assert!(s.core_len() <= 30);
        for c in s.core() {
            assert_eq!(c.degree(), g.degree(c.vertex));
            assert_eq!(c.class, g.label(c.vertex));
        }
        for &(i, j) in s.edges() {
            assert!(g.has_edge(i, j));
        }
        let core: BTreeSet<usize> = s.core().iter().map(|c| c.vertex).collect();
        assert!(s.frontier().iter().all(|(v, _)| !core.contains(v)));
        assert_eq!(s, crawl_two_layers(&g, &CrawlConfig::new(15), 21).unwrap());
    }

    #[test]
    fn fanout_expands_more() {
        let k = ClassKernel::constant(1, 0.5, 0.05).unwrap();
        let g = generate_graph(&k, &ClassDistribution::uniform(1), 80, 2).unwrap();
        let mut cfg = CrawlConfig::new(5);
        cfg.fanout = 3;
        let s = crawl_two_layers(&g, &cfg, 1).unwrap();
        assert!(s.core_len() > 10 && s.core_len() <= 20);
    }

    #[test]
    fn text_sections() {
        let s = crawl_two_layers(&complete(4), &CrawlConfig::new(1), 5).unwrap();
        let t = s.to_text();
        assert!(t.contains("[core]\nvertex,class,layer,degree,neighbors\n"));
        assert!(t.contains("[frontier]\nvertex,class\n"));
        assert!(t.contains("[edges]\ni,j\n"));
    }
}
