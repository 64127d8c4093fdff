//! Permutation-symmetric Bell inequalities with `m` two-outcome settings per
//! party and at most two-body correlators:
//!
//! ```text
//! I_{N,m} = Σ_k α_k S_k + ½ Σ_{k,l} S_kl ≥ −β_c,   α_k = m − 2k − 1,   β_c = ⌊m²N/2⌋
//! ```
//!
//! Local bounds are checked by exhaustive enumeration over multisets of
//! deterministic strategies. Everything deterministic is evaluated in exact
//! integer arithmetic.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BellError, Result};

/// Default cap on the number of strategy multisets visited by
/// [`brute_force_minimum`].
pub const DEFAULT_ENUMERATION_CAP: u128 = 100_000_000;

/// Largest setting count representable by the bitmask strategy encoding.
pub const MAX_SETTINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellScenario {
    n_parties: u64,
    n_settings: usize,
}

impl BellScenario {
    pub fn new(n_parties: u64, n_settings: usize) -> Result<Self> {
        if n_parties < 1 {
            return Err(BellError::InvalidScenario(format!(
                "need at least one party, got N={n_parties}"
            )));
        }
        if !(2..=MAX_SETTINGS).contains(&n_settings) {
            return Err(BellError::InvalidScenario(format!(
                "setting count must lie in 2..={MAX_SETTINGS}, got m={n_settings}"
            )));
        }
        Ok(Self {
            n_parties,
            n_settings,
        })
    }

    pub fn n_parties(&self) -> u64 {
        self.n_parties
    }

    pub fn n_settings(&self) -> usize {
        self.n_settings
    }

    /// One-body coefficients `α_k = m − 2k − 1`.
    pub fn alphas(&self) -> Vec<i64> {
        let m = self.n_settings as i64;
        (0..m).map(|k| m - 2 * k - 1).collect()
    }

    /// Number of deterministic strategies of a single party, `2^m`.
    pub fn strategy_classes(&self) -> u64 {
        1u64 << self.n_settings
    }
}

/// A deterministic local strategy: the ±1 outcome assigned to each setting.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    outcomes: Vec<i8>,
}

impl DeterministicStrategy {
    pub fn new(outcomes: Vec<i8>) -> Result<Self> {
        if outcomes.len() < 2 || outcomes.len() > MAX_SETTINGS {
            return Err(BellError::InvalidScenario(format!(
                "strategy length {} outside 2..={MAX_SETTINGS}",
                outcomes.len()
            )));
        }
        if let Some(bad) = outcomes.iter().find(|&&x| x != 1 && x != -1) {
            return Err(BellError::InvalidScenario(format!(
                "strategy outcome {bad} is not ±1"
            )));
        }
        Ok(Self { outcomes })
    }

    /// Strategy whose bit `k` of `index` set means outcome `x_k = −1`.
    pub fn from_index(n_settings: usize, index: u64) -> Self {
        let outcomes = (0..n_settings)
            .map(|k| if index >> k & 1 == 1 { -1 } else { 1 })
            .collect();
        Self { outcomes }
    }

    pub fn index(&self) -> u64 {
        self.outcomes
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == -1)
            .fold(0, |acc, (k, _)| acc | 1 << k)
    }

    pub fn outcomes(&self) -> &[i8] {
        &self.outcomes
    }

    pub fn n_settings(&self) -> usize {
        self.outcomes.len()
    }

    /// Sum of the party's outcomes over all settings.
    pub fn outcome_sum(&self) -> i64 {
        self.outcomes.iter().map(|&x| x as i64).sum()
    }

    /// Number of outcomes that differ from the majority sign.
    pub fn minority_count(&self) -> usize {
        let minus = self.outcomes.iter().filter(|&&x| x == -1).count();
        minus.min(self.outcomes.len() - minus)
    }

    /// Indices `k < ⌊m/2⌋` with `x_k ≠ x_{m−k−1}`.
    pub fn mirror_mismatches(&self) -> Vec<usize> {
        let m = self.outcomes.len();
        (0..m / 2)
            .filter(|&k| self.outcomes[k] != self.outcomes[m - k - 1])
            .collect()
    }

    /// The strategy variable (`a` or `ā`) that counts this strategy.
    ///
    /// Strategies are labelled by their minority outcomes; for even `m` with an
    /// even split the `ā` variable is suppressed and the `a` label is used.
    pub fn label(&self) -> StrategyLabel {
        let m = self.outcomes.len();
        let minus: Vec<usize> = (0..m).filter(|&k| self.outcomes[k] == -1).collect();
        if 2 * minus.len() <= m {
            StrategyLabel {
                conjugate: false,
                indices: minus,
            }
        } else {
            StrategyLabel {
                conjugate: true,
                indices: (0..m).filter(|&k| self.outcomes[k] == 1).collect(),
            }
        }
    }
}

/// Name of a strategy variable, `a_{j1…jn}` or `ā_{j1…jn}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StrategyLabel {
    pub conjugate: bool,
    pub indices: Vec<usize>,
}

impl fmt::Display for StrategyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = if self.conjugate { "ā" } else { "a" };
        let idx: Vec<String> = self.indices.iter().map(|j| j.to_string()).collect();
        write!(f, "{name}_{{{}}}", idx.join(","))
    }
}

/// Multiplicities of deterministic strategies across the `N` parties.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StrategyCounts {
    counts: BTreeMap<DeterministicStrategy, u64>,
}

impl StrategyCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// All `n` parties follow the same strategy.
    pub fn uniform(strategy: DeterministicStrategy, n: u64) -> Self {
        let mut c = Self::new();
        c.add(strategy, n);
        c
    }

    pub fn add(&mut self, strategy: DeterministicStrategy, multiplicity: u64) {
        if multiplicity > 0 {
            *self.counts.entry(strategy).or_insert(0) += multiplicity;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DeterministicStrategy, u64)> {
        self.counts.iter().map(|(s, &c)| (s, c))
    }

    /// Multiplicities keyed by strategy-variable label.
    pub fn by_label(&self) -> BTreeMap<StrategyLabel, u64> {
        self.iter().map(|(s, c)| (s.label(), c)).collect()
    }

    fn validate(&self, scenario: &BellScenario) -> Result<()> {
        for (s, _) in self.iter() {
            if s.n_settings() != scenario.n_settings() {
                return Err(BellError::DimensionMismatch {
                    expected: scenario.n_settings(),
                    got: s.n_settings(),
                });
            }
        }
        let sum = self.total();
        if sum != scenario.n_parties() {
            return Err(BellError::InvalidCounts {
                sum,
                expected: scenario.n_parties(),
            });
        }
        Ok(())
    }
}

/// Symmetrised one- and two-body correlators `S_k`, `S_kl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSet {
    pub one_body: Vec<f64>,
    /// Row-major `m×m`, diagonal included (`S_kk = S_k² − N` for deterministic strategies).
    pub two_body: Vec<Vec<f64>>,
}

impl CorrelatorSet {
    pub fn zeros(n_settings: usize) -> Self {
        Self {
            one_body: vec![0.0; n_settings],
            two_body: vec![vec![0.0; n_settings]; n_settings],
        }
    }
}

/// Terms of `I = A + B²/2 − C/2` for a deterministic assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Decomposition {
    /// `A + B²/2 − C/2`. `B² − C` is always even so this is an integer.
    pub fn inequality_value(&self) -> i64 {
        self.a + (self.b * self.b - self.c) / 2
    }
}

/// `β_c = ⌊m²N/2⌋`.
pub fn classical_bound(scenario: &BellScenario) -> u64 {
    let m = scenario.n_settings() as u64;
    m * m * scenario.n_parties() / 2
}

/// Exact one-body sums `S_k` for a deterministic assignment.
fn one_body_sums(scenario: &BellScenario, counts: &StrategyCounts) -> Vec<i64> {
    let mut s = vec![0i64; scenario.n_settings()];
    for (strat, mult) in counts.iter() {
        for (sk, &x) in s.iter_mut().zip(strat.outcomes()) {
            *sk += mult as i64 * x as i64;
        }
    }
    s
}

pub fn correlators_of_strategy(
    scenario: &BellScenario,
    counts: &StrategyCounts,
) -> Result<CorrelatorSet> {
    counts.validate(scenario)?;
    let m = scenario.n_settings();
    let s = one_body_sums(scenario, counts);
    let mut two = vec![vec![0i64; m]; m];
    for (k, row) in two.iter_mut().enumerate() {
        for (l, v) in row.iter_mut().enumerate() {
            let same_party: i64 = counts
                .iter()
                .map(|(st, mult)| {
                    mult as i64 * st.outcomes()[k] as i64 * st.outcomes()[l] as i64
                })
                .sum();
            *v = s[k] * s[l] - same_party;
        }
    }
    Ok(CorrelatorSet {
        one_body: s.iter().map(|&v| v as f64).collect(),
        two_body: two
            .into_iter()
            .map(|r| r.into_iter().map(|v| v as f64).collect())
            .collect(),
    })
}

pub fn inequality_value(scenario: &BellScenario, corr: &CorrelatorSet) -> Result<f64> {
    let m = scenario.n_settings();
    if corr.one_body.len() != m {
        return Err(BellError::DimensionMismatch {
            expected: m,
            got: corr.one_body.len(),
        });
    }
    if corr.two_body.len() != m {
        return Err(BellError::DimensionMismatch {
            expected: m,
            got: corr.two_body.len(),
        });
    }
    if let Some(row) = corr.two_body.iter().find(|r| r.len() != m) {
        return Err(BellError::DimensionMismatch {
            expected: m,
            got: row.len(),
        });
    }
    let linear: f64 = scenario
        .alphas()
        .iter()
        .zip(&corr.one_body)
        .map(|(&a, &s)| a as f64 * s)
        .sum();
    let pairs: f64 = corr.two_body.iter().flatten().sum();
    Ok(linear + 0.5 * pairs)
}

pub fn decomposition_terms(
    scenario: &BellScenario,
    counts: &StrategyCounts,
) -> Result<Decomposition> {
    counts.validate(scenario)?;
    let m = scenario.n_settings();
    let s = one_body_sums(scenario, counts);
    let alphas = scenario.alphas();
    let a = (0..m / 2).map(|k| alphas[k] * (s[k] - s[m - k - 1])).sum();
    let b = s.iter().sum();
    let c = counts
        .iter()
        .map(|(st, mult)| {
            let r = st.outcome_sum();
            mult as i64 * r * r
        })
        .sum();
    Ok(Decomposition { a, b, c })
}

/// Exact `I_{N,m}` of a deterministic assignment, in integer arithmetic.
pub fn deterministic_value(scenario: &BellScenario, counts: &StrategyCounts) -> Result<i64> {
    decomposition_terms(scenario, counts).map(|d| d.inequality_value())
}

/// Number of multisets of `N` strategies drawn from `2^m` classes,
/// `C(N + 2^m − 1, 2^m − 1)`, saturating at `u128::MAX`.
pub fn multiset_count(scenario: &BellScenario) -> u128 {
    let k = scenario.strategy_classes() as u128;
    let n = scenario.n_parties() as u128;
    // C(n + k - 1, n) built incrementally; each partial product is itself a binomial.
    let mut acc: u128 = 1;
    for i in 1..=n {
        match acc.checked_mul(k - 1 + i) {
            Some(v) => acc = v / i,
            None => return u128::MAX,
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub min_value: i64,
    pub minimizers: Vec<StrategyCounts>,
    pub visited: u128,
}

/// Per-class data needed to evaluate `I` incrementally: the linear term
/// `Σ α_k x_k` and the outcome sum `Σ x_k`.
#[derive(Clone, Copy)]
struct ClassTerms {
    linear: i64,
    sum: i64,
}

struct Search<'a> {
    classes: &'a [ClassTerms],
    best: i64,
    minimizers: Vec<Vec<u64>>,
    visited: u128,
    counts: Vec<u64>,
}

impl Search<'_> {
    fn descend(&mut self, class: usize, remaining: u64, lin: i64, b: i64, c: i64) {
        let last = class + 1 == self.classes.len();
        let t = self.classes[class];
        let range: Box<dyn Iterator<Item = u64>> = if last {
            Box::new(std::iter::once(remaining))
        } else {
            Box::new(0..=remaining)
        };
        for take in range {
            let n = take as i64;
            let (lin2, b2, c2) = (lin + n * t.linear, b + n * t.sum, c + n * t.sum * t.sum);
            self.counts[class] = take;
            if last {
                self.visited += 1;
                let value = lin2 + (b2 * b2 - c2) / 2;
                if value < self.best {
                    self.best = value;
                    self.minimizers.clear();
                }
                if value == self.best {
                    self.minimizers.push(self.counts.clone());
                }
            } else {
                self.descend(class + 1, remaining - take, lin2, b2, c2);
            }
        }
        self.counts[class] = 0;
    }
}

/// Exact minimum of `I_{N,m}` over all deterministic local strategies.
///
/// Parties are exchangeable, so only multisets of strategies are visited.
/// The search is split over the multiplicity of the first strategy class and
/// merged in that order, so the minimiser list does not depend on the thread
/// count.
pub fn brute_force_minimum(scenario: &BellScenario, cap: Option<u128>) -> Result<BruteForceResult> {
    let cap = cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
    let count = multiset_count(scenario);
    if count > cap {
        return Err(BellError::EnumerationTooLarge { count, cap });
    }
    let m = scenario.n_settings();
    let alphas = scenario.alphas();
    let classes: Vec<ClassTerms> = (0..scenario.strategy_classes())
        .map(|idx| {
            let s = DeterministicStrategy::from_index(m, idx);
            ClassTerms {
                linear: s
                    .outcomes()
                    .iter()
                    .zip(&alphas)
                    .map(|(&x, &a)| x as i64 * a)
                    .sum(),
                sum: s.outcome_sum(),
            }
        })
        .collect();
    let n = scenario.n_parties();

    let partials: Vec<(i64, Vec<Vec<u64>>, u128)> = (0..=n)
        .into_par_iter()
        .map(|first| {
            let t = classes[0];
            let k = first as i64;
            let mut search = Search {
                classes: &classes,
                best: i64::MAX,
                minimizers: Vec::new(),
                visited: 0,
                counts: vec![0; classes.len()],
            };
            search.counts[0] = first;
            search.descend(1, n - first, k * t.linear, k * t.sum, k * t.sum * t.sum);
            (search.best, search.minimizers, search.visited)
        })
        .collect();

    let best = partials.iter().map(|p| p.0).min().unwrap_or(i64::MAX);
    let visited = partials.iter().map(|p| p.2).sum();
    let minimizers = partials
        .into_iter()
        .filter(|p| p.0 == best)
        .flat_map(|p| p.1)
        .map(|raw| {
            let mut sc = StrategyCounts::new();
            for (idx, &mult) in raw.iter().enumerate() {
                sc.add(DeterministicStrategy::from_index(m, idx as u64), mult);
            }
            sc
        })
        .collect();
    Ok(BruteForceResult {
        min_value: best,
        minimizers,
        visited,
    })
}
