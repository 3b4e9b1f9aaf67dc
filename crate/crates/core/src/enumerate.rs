//! Counting urn histories.
//!
//! Two independent routes: the operator action `H^n x^l = Σ_k G_{l→k} x^k`,
//! and an explicit search over labelled balls. A third route reads the
//! counts off `B_n(x, y) e^{xy}`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::algebra::{Generator, Process};
use crate::poly::BiPoly;
use crate::Rational;

/// Default node ceiling for [`count_by_search`].
pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("weight {weight} of term {word} is not an integer after scaling by {scale}")]
    NonIntegerWeight {
        word: String,
        weight: String,
        scale: u64,
    },
    #[error("weight_scale must be positive")]
    ZeroScale,
    #[error("search budget of {budget} nodes exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("row l = {l} has no histories after {n} step(s); probabilities are undefined")]
    UndefinedRow { n: u32, l: u32 },
}

/// `G^(n)_{l→k}` over a window of `(l, k)`; zero entries are not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryTable {
    pub n: u32,
    counts: BTreeMap<(u32, u32), Rational>,
}

impl HistoryTable {
    pub fn new(n: u32) -> Self {
        HistoryTable {
            n,
            counts: BTreeMap::new(),
        }
    }

    /// Table from the operator action for every `l` in `ls`.
    pub fn from_operator(h: &Process, n: u32, ls: impl IntoIterator<Item = u32>) -> Self {
        let mut t = HistoryTable::new(n);
        for l in ls {
            for (k, c) in count_by_operator(h, n, l) {
                t.insert(l, k, c);
            }
        }
        t
    }

    pub fn insert(&mut self, l: u32, k: u32, count: Rational) {
        if count.is_zero() {
            self.counts.remove(&(l, k));
        } else {
            self.counts.insert((l, k), count);
        }
    }

    pub fn get(&self, l: u32, k: u32) -> Rational {
        self.counts
            .get(&(l, k))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Entries ordered by `(l, k)`.
    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> + '_ {
        self.counts.iter()
    }

    /// Nonzero counts for a fixed starting size `l`, keyed by `k`.
    pub fn row(&self, l: u32) -> BTreeMap<u32, Rational> {
        self.counts
            .range((l, 0)..=(l, u32::MAX))
            .map(|(&(_, k), c)| (k, c.clone()))
            .collect()
    }

    pub fn rows(&self) -> Vec<u32> {
        let mut ls: Vec<u32> = self.counts.keys().map(|&(l, _)| l).collect();
        ls.dedup();
        ls
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// `P^(n)_{l→k}` for one starting size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbabilityRow {
    pub n: u32,
    pub l: u32,
    pub probs: BTreeMap<u32, Rational>,
}

/// Applies `h` to `x^l` `n` times with `D x^m = m x^(m-1)`, `X x^m = x^(m+1)`
/// and returns the coefficient of each `x^k`.
pub fn count_by_operator(h: &Process, n: u32, l: u32) -> BTreeMap<u32, Rational> {
    let mut state: BTreeMap<u32, Rational> = BTreeMap::from([(l, Rational::one())]);
    for _ in 0..n {
        let mut next: BTreeMap<u32, Rational> = BTreeMap::new();
        for (&m, c) in &state {
            for (word, weight) in h.terms() {
                if let Some((factor, e)) = word.act_on_monomial(m) {
                    let add = c * weight * Rational::from_integer(BigInt::from(factor));
                    *next.entry(e).or_insert_with(Rational::zero) += add;
                }
            }
        }
        next.retain(|_, v| !v.is_zero());
        state = next;
    }
    state
}

struct Search<'a> {
    // each word reversed so that iteration follows the order of action
    words: Vec<(Vec<Generator>, u64)>,
    urn: Vec<u64>,
    next_label: u64,
    nodes: u64,
    budget: u64,
    leaves: &'a mut BTreeMap<u32, BigUint>,
}

impl Search<'_> {
    fn tick(&mut self) -> Result<(), EnumerateError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(EnumerateError::BudgetExceeded {
                budget: self.budget,
            });
        }
        Ok(())
    }

    fn step(&mut self, remaining: u32) -> Result<(), EnumerateError> {
        self.tick()?;
        if remaining == 0 {
            *self.leaves.entry(self.urn.len() as u32).or_default() += 1u32;
            return Ok(());
        }
        for t in 0..self.words.len() {
            for _copy in 0..self.words[t].1 {
                self.elementary(t, 0, remaining)?;
            }
        }
        Ok(())
    }

    fn elementary(&mut self, t: usize, pos: usize, remaining: u32) -> Result<(), EnumerateError> {
        let Some(&g) = self.words[t].0.get(pos) else {
            return self.step(remaining - 1);
        };
        self.tick()?;
        match g {
            Generator::X => {
                let label = self.next_label;
                self.next_label += 1;
                self.urn.push(label);
                self.elementary(t, pos + 1, remaining)?;
                self.urn.pop();
                self.next_label -= 1;
            }
            Generator::D => {
                // withdraw each ball present in turn; its label is not reused
                for i in 0..self.urn.len() {
                    let ball = self.urn.remove(i);
                    self.elementary(t, pos + 1, remaining)?;
                    self.urn.insert(i, ball);
                }
            }
        }
        Ok(())
    }
}

/// Enumerates labelled-ball histories explicitly. Each of the `n` iterations
/// branches over the terms of `h` with multiplicity `weight · weight_scale`;
/// `D` branches over every ball in the urn and `X` adds a freshly labelled
/// ball. Returns the number of histories ending with `k` balls, which equals
/// `count_by_operator` times `weight_scale^n`.
pub fn count_by_search(
    h: &Process,
    n: u32,
    l: u32,
    weight_scale: u64,
    budget: u64,
) -> Result<BTreeMap<u32, BigUint>, EnumerateError> {
    if weight_scale == 0 {
        return Err(EnumerateError::ZeroScale);
    }
    let scale = Rational::from_integer(BigInt::from(weight_scale));
    let mut words = Vec::new();
    for (word, weight) in h.terms() {
        let scaled = weight * &scale;
        let copies = scaled
            .is_integer()
            .then(|| scaled.to_integer().to_u64())
            .flatten()
            .ok_or_else(|| EnumerateError::NonIntegerWeight {
                word: word.to_string(),
                weight: crate::fraction_string(weight),
                scale: weight_scale,
            })?;
        let mut factors = word.factors().to_vec();
        factors.reverse();
        words.push((factors, copies));
    }

    let mut leaves = BTreeMap::new();
    let mut search = Search {
        words,
        urn: (0..l as u64).collect(),
        next_label: l as u64,
        nodes: 0,
        budget,
        leaves: &mut leaves,
    };
    search.step(n)?;
    Ok(leaves)
}

/// Reads `G^(n)_{l→k} = l! Σ_j h_{k-j, l-j} / j!` off `B_n(x, y) e^{xy}` for
/// `l <= l_max`, `k <= k_max`.
pub fn history_counts_from_normal_form(b: &BiPoly, n: u32, l_max: u32, k_max: u32) -> HistoryTable {
    let mut inv_fact = vec![Rational::one()];
    for j in 1..=l_max.max(k_max) as i64 {
        let prev = inv_fact.last().unwrap().clone();
        inv_fact.push(prev / Rational::from_integer(j.into()));
    }
    let mut t = HistoryTable::new(n);
    let mut l_fact = Rational::one();
    for l in 0..=l_max {
        if l > 0 {
            l_fact *= Rational::from_integer(l.into());
        }
        for k in 0..=k_max {
            let mut sum = Rational::zero();
            for j in 0..=l.min(k) {
                if let Some(c) = b.get(k - j, l - j) {
                    sum += c * &inv_fact[j as usize];
                }
            }
            t.insert(l, k, sum * &l_fact);
        }
    }
    t
}

/// `P^(n)_{l→k} = G^(n)_{l→k} / Σ_k G^(n)_{l→k}`.
pub fn probabilities(t: &HistoryTable, l: u32) -> Result<ProbabilityRow, EnumerateError> {
    let row = t.row(l);
    let total: Rational = row.values().sum();
    if total.is_zero() {
        return Err(EnumerateError::UndefinedRow { n: t.n, l });
    }
    Ok(ProbabilityRow {
        n: t.n,
        l,
        probs: row.into_iter().map(|(k, c)| (k, c / &total)).collect(),
    })
}
