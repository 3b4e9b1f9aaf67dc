//! Words over `{X, D}`, weighted processes, and normal ordering by the
//! rewrite `DX -> XD + 1`.
//!
//! A word is an operator product written left to right; the rightmost
//! generator acts first. `X²D³X⁴D` therefore takes a ball out, puts four in,
//! takes three out and finally puts two in.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::poly::BiPoly;
use crate::Rational;

/// A normal-ordered operator `Σ h_kl X^k D^l`, keyed by `(k, l)`.
///
/// Shares its representation with `B_n(x, y)`: the coefficient of `X^k D^l`
/// is the coefficient of `x^k y^l`.
pub type NormalForm = BiPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("negative weight {0} for a process term")]
    NegativeWeight(String),
    #[error("invalid generator {0:?}, expected 'X' or 'D'")]
    InvalidGenerator(char),
}

/// `X` inserts a ball, `D` withdraws one. `X < D` in the derived order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    X,
    D,
}

impl Generator {
    pub fn symbol(self) -> char {
        match self {
            Generator::X => 'X',
            Generator::D => 'D',
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Generator>);

impl Word {
    pub fn new(factors: Vec<Generator>) -> Self {
        Word(factors)
    }

    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// `X^k`.
    pub fn x_pow(k: usize) -> Self {
        Word(vec![Generator::X; k])
    }

    /// `D^l`.
    pub fn d_pow(l: usize) -> Self {
        Word(vec![Generator::D; l])
    }

    pub fn factors(&self) -> &[Generator] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_x(&self) -> usize {
        self.0.iter().filter(|&&g| g == Generator::X).count()
    }

    pub fn count_d(&self) -> usize {
        self.0.len() - self.count_x()
    }

    /// Net change in the number of balls, `#X - #D`.
    pub fn excess(&self) -> i64 {
        self.count_x() as i64 - self.count_d() as i64
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Number of pairs `D ... X` with the `D` to the left. Zero iff normal.
    pub fn inversions(&self) -> usize {
        let mut ds = 0;
        let mut inv = 0;
        for g in &self.0 {
            match g {
                Generator::D => ds += 1,
                Generator::X => inv += ds,
            }
        }
        inv
    }

    pub fn is_normal(&self) -> bool {
        self.0
            .windows(2)
            .all(|w| !(w[0] == Generator::D && w[1] == Generator::X))
    }

    /// Action on `x^m` via `D x^m = m x^(m-1)` and `X x^m = x^(m+1)`.
    /// Returns `(coefficient, exponent)`, or `None` when the word annihilates
    /// `x^m`.
    pub fn act_on_monomial(&self, m: u32) -> Option<(BigUint, u32)> {
        let mut coeff = BigUint::one();
        let mut e = m;
        for g in self.0.iter().rev() {
            match g {
                Generator::X => e += 1,
                Generator::D => {
                    if e == 0 {
                        return None;
                    }
                    coeff *= e;
                    e -= 1;
                }
            }
        }
        Some((coeff, e))
    }
}

impl FromIterator<Generator> for Word {
    fn from_iter<I: IntoIterator<Item = Generator>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl FromStr for Word {
    type Err = AlgebraError;

    /// Compact form such as `"DDXX"`; whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                'X' => Ok(Generator::X),
                'D' => Ok(Generator::D),
                other => Err(AlgebraError::InvalidGenerator(other)),
            })
            .collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for g in &self.0 {
            write!(f, "{}", g.symbol())?;
        }
        Ok(())
    }
}

/// A formal sum `Σ h_k H_k` of words with positive rational weights.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Process {
    terms: BTreeMap<Word, Rational>,
}

impl Process {
    /// The empty sum, i.e. the zero operator.
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_word(word: Word) -> Self {
        let mut p = Self::zero();
        p.terms.insert(word, Rational::one());
        p
    }

    pub fn from_terms<I>(terms: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (Word, Rational)>,
    {
        let mut p = Self::zero();
        for (w, c) in terms {
            p.add_term(w, c)?;
        }
        Ok(p)
    }

    /// Adds `weight · word`. Zero weights are dropped; negative ones rejected.
    pub fn add_term(&mut self, word: Word, weight: Rational) -> Result<(), AlgebraError> {
        if weight.is_negative() {
            return Err(AlgebraError::NegativeWeight(crate::fraction_string(
                &weight,
            )));
        }
        if weight.is_zero() {
            return Ok(());
        }
        *self.terms.entry(word).or_insert_with(Rational::zero) += weight;
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn weight(&self, word: &Word) -> Option<&Rational> {
        self.terms.get(word)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Process) -> Process {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            *out.terms.entry(w.clone()).or_insert_with(Rational::zero) += c;
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Result<Process, AlgebraError> {
        if c.is_negative() {
            return Err(AlgebraError::NegativeWeight(crate::fraction_string(c)));
        }
        if c.is_zero() {
            return Ok(Process::zero());
        }
        Ok(Process {
            terms: self.terms.iter().map(|(w, v)| (w.clone(), v * c)).collect(),
        })
    }

    /// Operator product: words concatenate, weights multiply.
    pub fn product(&self, other: &Process) -> Process {
        let mut out = Process::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                *out.terms
                    .entry(w1.concat(w2))
                    .or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        out
    }

    /// `self^n` expanded as a sum of words; `self^0` is the identity word.
    pub fn pow(&self, n: u32) -> Process {
        let mut out = Process::from_word(Word::identity());
        for _ in 0..n {
            out = out.product(self);
        }
        out
    }

    pub fn max_word_len(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    /// Least common multiple of the weight denominators. Multiplying every
    /// weight by it gives integers.
    pub fn denominator_lcm(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }
}

/// Rewrites `w` into `Σ h_kl X^k D^l` by replacing the leftmost `DX` with
/// `XD + 1` until no `DX` remains.
///
/// Pending words are processed in order of decreasing inversion count. Every
/// rewrite strictly lowers that count, so each word is expanded once with
/// its final accumulated coefficient.
pub fn normal_order_word(w: &Word) -> NormalForm {
    let mut pending: BTreeMap<(usize, Word), BigUint> = BTreeMap::new();
    pending.insert((w.inversions(), w.clone()), BigUint::one());
    let mut out = NormalForm::zero();

    while let Some(((inv, word), coeff)) = pending.pop_last() {
        let f = word.factors();
        let pos = f
            .windows(2)
            .position(|p| p[0] == Generator::D && p[1] == Generator::X);
        let Some(i) = pos else {
            debug_assert_eq!(inv, 0);
            out.add_term(
                word.count_x() as u32,
                word.count_d() as u32,
                Rational::from_integer(BigInt::from(coeff)),
            );
            continue;
        };

        let mut swapped = f.to_vec();
        swapped.swap(i, i + 1);
        let swapped = Word(swapped);
        let mut dropped = f.to_vec();
        dropped.drain(i..i + 2);
        let dropped = Word(dropped);

        // swapping the adjacent pair removes exactly one inversion; deleting
        // it removes at least one
        *pending.entry((inv - 1, swapped)).or_default() += &coeff;
        *pending.entry((dropped.inversions(), dropped)).or_default() += coeff;
    }
    out
}

/// Linear extension of [`normal_order_word`].
pub fn normal_order(p: &Process) -> NormalForm {
    let mut out = NormalForm::zero();
    for (w, c) in p.terms() {
        out = out + normal_order_word(w).scale(c);
    }
    out
}

/// Reorders every word as if `X` and `D` commuted: weight at `(#X, #D)`.
pub fn double_dot(p: &Process) -> NormalForm {
    let mut out = NormalForm::zero();
    for (w, c) in p.terms() {
        out.add_term(w.count_x() as u32, w.count_d() as u32, c.clone());
    }
    out
}

fn binomial(n: u32, k: u32) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// `D^l X^k = Σ_j C(l, j) C(k, j) j! X^(k-j) D^(l-j)`.
pub fn weyl_closed_form(l: u32, k: u32) -> NormalForm {
    let mut out = NormalForm::zero();
    let mut fact = BigUint::one();
    for j in 0..=l.min(k) {
        if j > 0 {
            fact *= j;
        }
        let c = binomial(l, j) * binomial(k, j) * &fact;
        out.add_term(k - j, l - j, Rational::from_integer(BigInt::from(c)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::int;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    /// Applies a word to `x^m` one generator at a time on a dense coefficient
    /// vector; independent of [`Word::act_on_monomial`].
    fn act_dense(word: &Word, m: usize) -> Vec<i64> {
        let size = m + word.len() + 1;
        let mut v = vec![0i64; size];
        v[m] = 1;
        for g in word.factors().iter().rev() {
            let mut next = vec![0i64; size];
            for (e, &c) in v.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                match g {
                    Generator::X => next[e + 1] += c,
                    Generator::D => {
                        if e > 0 {
                            next[e - 1] += c * e as i64
                        }
                    }
                }
            }
            v = next;
        }
        v
    }

    fn nf_dense(nf: &NormalForm, m: usize, size: usize) -> Vec<i64> {
        let mut v = vec![0i64; size];
        for (e, c) in nf.act_on_monomial(m as u32) {
            v[e as usize] = c.to_integer().try_into().unwrap();
        }
        v
    }

    #[test]
    fn commutator() {
        assert_eq!(
            normal_order_word(&w("DX")),
            NormalForm::from_int_terms(&[((1, 1), 1), ((0, 0), 1)])
        );
        assert_eq!(normal_order_word(&Word::identity()), NormalForm::one());
    }

    #[test]
    fn d2x2_matches_action_oracle() {
        // oracle: D²X² on x^m is (m+2)(m+1) x^m; X²D² + 4XD + 2 gives
        // m(m-1) + 4m + 2, the same for all m
        let expected = NormalForm::from_int_terms(&[((2, 2), 1), ((1, 1), 4), ((0, 0), 2)]);
        for m in 0..=6 {
            let lhs = act_dense(&w("DDXX"), m);
            assert_eq!(lhs, nf_dense(&expected, m, lhs.len()));
            assert_eq!(lhs[m], ((m + 2) * (m + 1)) as i64);
        }
        assert_eq!(normal_order_word(&w("DDXX")), expected);
    }

    #[test]
    fn process_examples() {
        let p = Process::from_terms([(w("XXXD"), int(2)), (w("XDDX"), int(5))]).unwrap();
        let nf = normal_order(&p);
        assert_eq!(
            nf,
            NormalForm::from_int_terms(&[((3, 1), 2), ((2, 2), 5), ((1, 1), 10)])
        );
        // H x^m = 2m x^(m+2) + 5(m+1)m x^m
        for m in 0..8u32 {
            let mut want = BTreeMap::new();
            if m > 0 {
                want.insert(m + 2, int(2 * m as i64));
                want.insert(m, int(5 * (m as i64 + 1) * m as i64));
            }
            assert_eq!(nf.act_on_monomial(m), want);
        }
        assert!(normal_order(&Process::zero()).is_zero());
        assert_eq!(
            normal_order(&Process::from_word(w("XD"))),
            NormalForm::from_int_terms(&[((1, 1), 1)])
        );
    }

    #[test]
    fn double_dot_examples() {
        let dx = Process::from_word(w("DX"));
        assert_eq!(double_dot(&dx), NormalForm::from_int_terms(&[((1, 1), 1)]));
        assert_eq!(
            double_dot(&Process::from_word(w("XD"))),
            NormalForm::from_int_terms(&[((1, 1), 1)])
        );
        assert_eq!(
            double_dot(&Process::from_word(w("DDXX"))),
            NormalForm::from_int_terms(&[((2, 2), 1)])
        );
        let diff = &normal_order(&dx) - &double_dot(&dx);
        assert_eq!(diff, NormalForm::one());
    }

    #[test]
    fn weyl_examples() {
        assert_eq!(
            weyl_closed_form(1, 1),
            NormalForm::from_int_terms(&[((1, 1), 1), ((0, 0), 1)])
        );
        assert_eq!(
            weyl_closed_form(0, 3),
            NormalForm::from_int_terms(&[((3, 0), 1)])
        );
        assert_eq!(
            weyl_closed_form(2, 2),
            NormalForm::from_int_terms(&[((2, 2), 1), ((1, 1), 4), ((0, 0), 2)])
        );
    }

    #[test]
    fn rewriting_agrees_with_closed_form() {
        for l in 0..=8 {
            for k in 0..=8 {
                let word = Word::d_pow(l).concat(&Word::x_pow(k));
                assert_eq!(
                    normal_order_word(&word),
                    weyl_closed_form(l as u32, k as u32),
                    "D^{l} X^{k}"
                );
            }
        }
    }

    #[test]
    fn negative_weights_rejected() {
        let mut p = Process::zero();
        assert!(matches!(
            p.add_term(w("X"), int(-1)),
            Err(AlgebraError::NegativeWeight(_))
        ));
        p.add_term(w("X"), int(0)).unwrap();
        assert!(p.is_empty());
        assert!("XQ".parse::<Word>().is_err());
    }

    #[test]
    fn inversions_and_excess() {
        assert_eq!(w("DDXX").inversions(), 4);
        assert_eq!(w("XXDD").inversions(), 0);
        assert!(w("XXDD").is_normal());
        assert_eq!(w("XXDDDXXXXD").excess(), 2);
    }

    fn word_strategy(max_len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(
            prop_oneof![Just(Generator::X), Just(Generator::D)],
            0..=max_len,
        )
        .prop_map(Word::new)
    }

    fn process_strategy() -> impl Strategy<Value = Process> {
        prop::collection::vec((word_strategy(5), 0i64..4, 1i64..4), 0..4).prop_map(|ts| {
            Process::from_terms(
                ts.into_iter()
                    .map(|(w, n, d)| (w, Rational::new(n.into(), d.into()))),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn operator_equivalence(word in word_strategy(9)) {
            let nf = normal_order_word(&word);
            for m in 0..=6usize {
                let lhs = act_dense(&word, m);
                prop_assert_eq!(&lhs, &nf_dense(&nf, m, lhs.len()));
            }
        }

        #[test]
        fn excess_and_integrality(word in word_strategy(10)) {
            let nf = normal_order_word(&word);
            for (&(k, l), c) in nf.terms() {
                prop_assert_eq!(k as i64 - l as i64, word.excess());
                prop_assert!(l as usize <= word.count_d());
                prop_assert!(c.is_integer() && c.is_positive());
            }
        }

        #[test]
        fn linearity(
            p in process_strategy(),
            q in process_strategy(),
            a in 0i64..5,
            b in 1i64..5,
        ) {
            let (a, b) = (int(a), Rational::new(1.into(), b.into()));
            let lhs = normal_order(&p.scale(&a).unwrap().add(&q.scale(&b).unwrap()));
            let rhs = &normal_order(&p).scale(&a) + &normal_order(&q).scale(&b);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn double_dot_differs_when_dx_present(
            left in word_strategy(3),
            right in word_strategy(3),
        ) {
            let word = left.concat(&"DX".parse().unwrap()).concat(&right);
            let p = Process::from_word(word);
            prop_assert_ne!(normal_order(&p), double_dot(&p));
        }
    }
}
