//! Class-level random walks and first-return probabilities.
//!
//! A walker moves between attribute classes; from class `i` it survives a
//! step with probability `survival_i` and otherwise is killed. With
//! `f^(n)` the probability of the first return to the start at step `n`,
//! the start is transient when `Σ_n f^(n) < 1` and recurrent otherwise.
//! Only a finite horizon can be computed, so the classifier carries the
//! probability mass that is still wandering at the horizon as an explicit
//! uncertainty band and answers "undetermined" when the band straddles the
//! threshold.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{ClassDistribution, ClassKernel};
use crate::rng::{rng_from_seed, unit_f64};

pub const DEFAULT_HORIZON: usize = 1000;
pub const DEFAULT_TAIL_TOL: f64 = 1e-6;
const ROW_TOL: f64 = 1e-12;

/// How kernel rows become transition rows.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Normalization {
    /// `T_ij = s · p_ij π_j / Σ_l p_il π_l`.
    #[default]
    Abundance,
    /// `T_ij = s · p_ij π_j`, leaving the row deficit as killing.
    None,
}

/// Substochastic transition matrix over classes.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkChain {
    transition: Matrix,
}

impl WalkChain {
    pub fn new(transition: Matrix) -> Result<Self> {
        if !transition.is_square() || transition.rows() == 0 {
            return Err(Error::InvalidArgument("transition matrix must be square and nonempty".into()));
        }
        for i in 0..transition.rows() {
            let row = transition.row(i);
            if let Some(j) = row.iter().position(|&t| !(t >= 0.0)) {
                return Err(Error::NegativeEntry(i, j));
            }
            let sum: f64 = row.iter().sum();
            if !(sum > 0.0 && sum <= 1.0 + ROW_TOL) {
                return Err(Error::InvalidArgument(format!("row {i} sums to {sum}, outside (0, 1]")));
            }
        }
        Ok(WalkChain { transition })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        WalkChain::new(Matrix::from_rows(rows)?)
    }

    pub fn states(&self) -> usize {
        self.transition.rows()
    }

    pub fn transition(&self) -> &Matrix {
        &self.transition
    }

    /// Per-row probability of surviving a step.
    pub fn survival(&self) -> Vec<f64> {
        (0..self.states()).map(|i| self.transition.row(i).iter().sum()).collect()
    }

    /// Whether every state reaches every other along positive transitions.
    pub fn is_irreducible(&self) -> bool {
        let n = self.states();
        (0..n).all(|start| {
            let mut seen = vec![false; n];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for u in 0..n {
                    if !seen[u] && self.transition[(v, u)] > 0.0 {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        })
    }
}

/// Class-level chain from a kernel, weighting moves by class abundance.
pub fn transition_from_kernel(
    kernel: &ClassKernel,
    dist: &ClassDistribution,
    survival: f64,
    normalization: Normalization,
) -> Result<WalkChain> {
    if !(survival > 0.0 && survival <= 1.0) {
        return Err(Error::InvalidArgument(format!("survival {survival} is outside (0, 1]")));
    }
    let k = kernel.k();
    if dist.k() != k {
        return Err(Error::InvalidArgument("kernel and distribution class counts differ".into()));
    }
    let pi = dist.probs();
    let mut t = Matrix::from_fn(k, k, |i, j| kernel.get(i, j) * pi[j]);
    if normalization == Normalization::Abundance {
        for i in 0..k {
            let total: f64 = t.row(i).iter().sum();
            if total <= 0.0 {
                return Err(Error::InvalidArgument(format!("class {i} has no outgoing weight")));
            }
            for j in 0..k {
                t[(i, j)] /= total;
            }
        }
    }
    for i in 0..k {
        for j in 0..k {
            t[(i, j)] *= survival;
        }
    }
    WalkChain::new(t)
}

/// First-return probabilities `f^(1..=horizon)` with the leftover mass.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstReturn {
    pub state: usize,
    /// `f[n - 1] = P(first return at step n)`.
    pub f: Vec<f64>,
    /// Probability of being alive and not yet returned after `horizon` steps.
    pub alive: f64,
    /// Probability of having been killed before returning.
    pub killed: f64,
}

impl FirstReturn {
    pub fn horizon(&self) -> usize {
        self.f.len()
    }

    pub fn total(&self) -> f64 {
        self.f.iter().sum()
    }

    /// `Σf + alive + killed − 1`; zero up to rounding.
    pub fn conservation_error(&self) -> f64 {
        self.total() + self.alive + self.killed - 1.0
    }

    /// `n,f,cumulative` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,f,cumulative\n");
        let mut cum = 0.0;
        for (i, f) in self.f.iter().enumerate() {
            cum += f;
            writeln!(out, "{},{},{}", i + 1, f, cum).unwrap();
        }
        out
    }
}

/// Taboo recursion: the walker's mass on states other than `state` is pushed
/// forward one step at a time; whatever lands on `state` is first-return
/// probability, whatever a row fails to carry forward is killed.
pub fn first_return_probs(chain: &WalkChain, state: usize, horizon: usize) -> Result<FirstReturn> {
    let k = chain.states();
    if state >= k {
        return Err(Error::InvalidArgument(format!("state {state} out of range for {k} states")));
    }
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let t = chain.transition();
    let survival = chain.survival();
    let mut f = Vec::with_capacity(horizon);
    // mass away from `state` that has not returned yet
    let mut away: Vec<f64> = (0..k).map(|j| if j == state { 0.0 } else { t[(state, j)] }).collect();
    f.push(t[(state, state)]);
    let mut killed = 1.0 - survival[state];
    for _ in 1..horizon {
        let mut next = vec![0.0; k];
        let mut hit = 0.0;
        for (j, &m) in away.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            killed += m * (1.0 - survival[j]);
            hit += m * t[(j, state)];
            for l in 0..k {
                if l != state {
                    next[l] += m * t[(j, l)];
                }
            }
        }
        f.push(hit);
        away = next;
    }
    Ok(FirstReturn {
        state,
        f,
        alive: away.iter().sum(),
        killed: killed.max(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recurrence {
    Recurrent,
    Transient,
    Undetermined,
}

impl std::fmt::Display for Recurrence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Recurrence::Recurrent => "recurrent",
            Recurrence::Transient => "transient",
            Recurrence::Undetermined => "undetermined",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceReport {
    pub state: usize,
    pub verdict: Recurrence,
    /// `S_N = Σ_{n ≤ N} f^(n)`, a lower bound on the return probability.
    pub partial_sum: f64,
    /// Mass still in play at `N`; `S_N + R_N` bounds the return probability from above.
    pub remaining: f64,
    pub horizon: usize,
}

impl RecurrenceReport {
    pub fn to_text(&self) -> String {
        format!(
            "state {}\nverdict {}\npartial_sum {}\nremaining {}\nhorizon {}\n",
            self.state, self.verdict, self.partial_sum, self.remaining, self.horizon
        )
    }
}

/// Recurrent when `S_N ≥ 1 − tol`, transient when `S_N + R_N < 1 − tol`,
/// undetermined otherwise.
pub fn classify_recurrence(chain: &WalkChain, state: usize, horizon: usize, tail_tol: f64) -> Result<RecurrenceReport> {
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidArgument("tail tolerance must be positive".into()));
    }
    let fr = first_return_probs(chain, state, horizon)?;
    let partial_sum = fr.total();
    let remaining = fr.alive;
    let verdict = if partial_sum >= 1.0 - tail_tol {
        Recurrence::Recurrent
    } else if partial_sum + remaining < 1.0 - tail_tol {
        Recurrence::Transient
    } else {
        Recurrence::Undetermined
    };
    Ok(RecurrenceReport {
        state,
        verdict,
        partial_sum,
        remaining,
        horizon,
    })
}

/// Classifies every state; for an irreducible chain all verdicts agree.
pub fn classify_all(chain: &WalkChain, horizon: usize, tail_tol: f64) -> Result<Vec<RecurrenceReport>> {
    (0..chain.states())
        .map(|s| classify_recurrence(chain, s, horizon, tail_tol))
        .collect()
}

/// Simulates `walks` walkers from `state` and histograms first-return times.
///
/// `counts[n - 1]` is the number of walkers first returning at step `n`
/// (`n ≤ horizon`); walkers killed or still away at the horizon are not counted.
pub fn simulate_first_returns(chain: &WalkChain, state: usize, horizon: usize, walks: usize, seed: u64) -> Vec<u64> {
    let k = chain.states();
    let t = chain.transition();
    let mut rng = rng_from_seed(seed);
    let mut counts = vec![0u64; horizon];
    for _ in 0..walks {
        let mut at = state;
        for step in 1..=horizon {
            let u = unit_f64(&mut rng);
            let mut acc = 0.0;
            let mut next = None;
            for j in 0..k {
                acc += t[(at, j)];
                if u < acc {
                    next = Some(j);
                    break;
                }
            }
            match next {
                None => break,
                Some(j) if j == state => {
                    counts[step - 1] += 1;
                    break;
                }
                Some(j) => at = j,
            }
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_kernel_transitions() {
        let k = ClassKernel::constant(2, 0.5, 0.05).unwrap();
        let c = transition_from_kernel(&k, &ClassDistribution::uniform(2), 1.0, Normalization::Abundance).unwrap();
        assert_eq!(c.transition().to_rows(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let c = transition_from_kernel(&k, &ClassDistribution::uniform(2), 0.8, Normalization::Abundance).unwrap();
        assert_eq!(c.transition().to_rows(), vec![vec![0.4, 0.4], vec![0.4, 0.4]]);
        assert!(transition_from_kernel(&k, &ClassDistribution::uniform(2), 0.0, Normalization::Abundance).is_err());
    }

    #[test]
    fn unnormalized_rows_leak() {
        let k = ClassKernel::from_rows(&[[0.4, 0.2], [0.2, 0.6]], 0.05).unwrap();
        let c = transition_from_kernel(&k, &ClassDistribution::uniform(2), 1.0, Normalization::None).unwrap();
        let s = c.survival();
        assert!((s[0] - 0.3).abs() < 1e-15 && (s[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn swap_chain() {
        let c = WalkChain::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let fr = first_return_probs(&c, 0, 6).unwrap();
        assert_eq!(fr.f, vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(fr.alive, 0.0);
        assert!(c.is_irreducible());
    }

    #[test]
    fn single_state() {
        let c = WalkChain::from_rows(&[[1.0]]).unwrap();
        let fr = first_return_probs(&c, 0, 3).unwrap();
        assert_eq!(fr.f[0], 1.0);
        assert_eq!(fr.total(), 1.0);
    }

    #[test]
    fn two_state_geometric() {
        let c = WalkChain::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let fr = first_return_probs(&c, 0, 40).unwrap();
        assert_eq!(fr.f[0], 0.5);
        for n in 2..=40 {
            assert!((fr.f[n - 1] - 0.5f64.powi(n as i32)).abs() < 1e-15);
        }
        assert!(fr.conservation_error().abs() < 1e-12);
    }

    #[test]
    fn verdicts() {
        let c = WalkChain::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let r = classify_recurrence(&c, 0, DEFAULT_HORIZON, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(r.verdict, Recurrence::Recurrent);
        let killed = WalkChain::from_rows(&[[0.4, 0.4], [0.4, 0.4]]).unwrap();
        let r = classify_recurrence(&killed, 0, 200, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(r.verdict, Recurrence::Transient);
        assert!(r.partial_sum <= 0.8);
        // slow mixing: the walker rarely leaves state 1, horizon too short
        let slow = WalkChain::from_rows(&[[0.0, 1.0], [1e-4, 1.0 - 1e-4]]).unwrap();
        let r = classify_recurrence(&slow, 0, 50, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(r.verdict, Recurrence::Undetermined);
        assert!(r.partial_sum + r.remaining > 1.0 - 1e-9);
    }

    #[test]
    fn csv_cumulative() {
        let c = WalkChain::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let csv = first_return_probs(&c, 0, 2).unwrap().to_csv();
        assert_eq!(csv, "n,f,cumulative\n1,0.5,0.5\n2,0.25,0.75\n");
    }

    #[test]
    fn invalid_chains() {
        assert!(WalkChain::from_rows(&[[0.6, 0.6], [0.5, 0.5]]).is_err());
        assert!(WalkChain::from_rows(&[[0.0, 0.0], [0.5, 0.5]]).is_err());
        assert!(WalkChain::from_rows(&[[-0.1, 0.5], [0.5, 0.5]]).is_err());
        let c = WalkChain::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        assert!(first_return_probs(&c, 2, 5).is_err());
        assert!(classify_recurrence(&c, 0, 5, 0.0).is_err());
    }
}
