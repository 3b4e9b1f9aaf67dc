//! Sparse bivariate polynomials over the rationals and the shifted action
//! `H(X, D + y)` that generates the sequence `B_n(x, y)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{Generator, Process, Word};
use crate::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error(
        "degree bound {bound} leaves no exact region after {steps} step(s) \
         losing up to {drop} degree(s) each"
    )]
    InsufficientTruncation { bound: u32, steps: u32, drop: u32 },
}

/// A polynomial `Σ c_ij x^i y^j` stored as a sparse map `(i, j) -> c_ij`.
///
/// Zero coefficients are never stored, so structural equality is equality of
/// polynomials. Read as an operator, the key `(k, l)` stands for `X^k D^l`;
/// this is how the type doubles as a normal form.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BiPoly {
    coeffs: BTreeMap<(u32, u32), Rational>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 0, Rational::one())
    }

    pub fn monomial(i: u32, j: u32, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), Rational)>,
    {
        let mut p = Self::zero();
        for ((i, j), c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    /// Convenience constructor for integer coefficients.
    pub fn from_int_terms(terms: &[((u32, u32), i64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(k, c)| (k, int(c))))
    }

    /// Adds `c x^i y^j`, dropping the entry if it cancels.
    pub fn add_term(&mut self, i: u32, j: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry((i, j)) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rational {
        self.coeffs
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn get(&self, i: u32, j: u32) -> Option<&Rational> {
        self.coeffs.get(&(i, j))
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&(u32, u32), &Rational)> + '_ {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|&(i, j)| i + j).max()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(&k, v)| (k, v * c)).collect(),
        }
    }

    pub fn mul_x(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(i, j), v)| ((i + 1, j), v.clone()))
                .collect(),
        }
    }

    pub fn mul_y(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(i, j), v)| ((i, j + 1), v.clone()))
                .collect(),
        }
    }

    /// `∂/∂x`, term by term.
    pub fn d_dx(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.coeffs {
            if i > 0 {
                out.add_term(i - 1, j, c * int(i as i64));
            }
        }
        out
    }

    /// Keeps only monomials of total degree `<= max`.
    pub fn restrict_total_degree(&self, max: u32) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&(i, j), _)| i + j <= max)
                .map(|(&k, v)| (k, v.clone()))
                .collect(),
        }
    }

    /// Product with every term of total degree above `max` discarded.
    pub fn mul_truncated(&self, other: &Self, max: u32) -> Self {
        let mut out = Self::zero();
        for (&(i1, j1), c1) in &self.coeffs {
            if i1 + j1 > max {
                continue;
            }
            for (&(i2, j2), c2) in &other.coeffs {
                if i1 + j1 + i2 + j2 <= max {
                    out.add_term(i1 + i2, j1 + j2, c1 * c2);
                }
            }
        }
        out
    }

    pub fn into_map(self) -> BTreeMap<(u32, u32), Rational> {
        self.coeffs
    }

    /// Action of `Σ c_kl X^k D^l` on the monomial `x^m`:
    /// `X^k D^l x^m = (m)_l x^(m - l + k)`, zero when `l > m`.
    pub fn act_on_monomial(&self, m: u32) -> BTreeMap<u32, Rational> {
        let mut out: BTreeMap<u32, Rational> = BTreeMap::new();
        for (&(k, l), c) in &self.coeffs {
            if l > m {
                continue;
            }
            let falling: i64 = (0..l).map(|t| (m - t) as i64).product();
            *out.entry(m - l + k).or_insert_with(Rational::zero) += c * int(falling);
        }
        out.retain(|_, v| !v.is_zero());
        out
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.coeffs {
            out.add_term(i, j, c.clone());
        }
        out
    }
}

impl Add for BiPoly {
    type Output = BiPoly;
    fn add(mut self, rhs: BiPoly) -> BiPoly {
        for ((i, j), c) in rhs.coeffs {
            self.add_term(i, j, c);
        }
        self
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        BiPoly {
            coeffs: self.coeffs.iter().map(|(&k, v)| (k, -v)).collect(),
        }
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        self + &(-rhs)
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i1, j1), c1) in &self.coeffs {
            for (&(i2, j2), c2) in &rhs.coeffs {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for BiPoly {
    /// Renders e.g. `x^2 y^2 + x y`, highest `x` power first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), c) in self.coeffs.iter().rev() {
            let mut abs = c.clone();
            if first {
                if c < &Rational::zero() {
                    write!(f, "-")?;
                    abs = -abs;
                }
            } else if c < &Rational::zero() {
                write!(f, " - ")?;
                abs = -abs;
            } else {
                write!(f, " + ")?;
            }
            first = false;

            let mut parts = Vec::new();
            if !abs.is_one() || (i == 0 && j == 0) {
                parts.push(crate::fraction_string(&abs));
            }
            for (var, e) in [("x", i), ("y", j)] {
                match e {
                    0 => {}
                    1 => parts.push(var.to_string()),
                    _ => parts.push(format!("{var}^{e}")),
                }
            }
            write!(f, "{}", parts.join(" "))?;
        }
        Ok(())
    }
}

fn apply_word_shifted(word: &Word, p: &BiPoly) -> BiPoly {
    let mut acc = p.clone();
    for g in word.factors().iter().rev() {
        if acc.is_zero() {
            break;
        }
        acc = match g {
            Generator::X => acc.mul_x(),
            Generator::D => &acc.d_dx() + &acc.mul_y(),
        };
    }
    acc
}

/// `H(X, D + y) p`: `X` multiplies by `x`, `D + y` acts as `∂/∂x + y`, and
/// within each word the rightmost generator acts first.
pub fn apply_shifted(h: &Process, p: &BiPoly) -> BiPoly {
    let mut out = BiPoly::zero();
    for (word, weight) in h.terms() {
        out = out + apply_word_shifted(word, p).scale(weight);
    }
    out
}

/// `[B_0, ..., B_n_max]` with `B_0 = 1` and `B_{n+1} = H(X, D + y) B_n`.
pub fn bn_sequence(h: &Process, n_max: u32) -> Vec<BiPoly> {
    let mut seq = Vec::with_capacity(n_max as usize + 1);
    seq.push(BiPoly::one());
    for n in 0..n_max as usize {
        let next = apply_shifted(h, &seq[n]);
        seq.push(next);
    }
    seq
}

/// Truncated `e^(s·xy) = Σ_m s^m (xy)^m / m!` up to total degree `max`.
fn exp_xy_truncated(sign: i64, max: u32) -> BiPoly {
    let mut p = BiPoly::zero();
    let mut term = Rational::one();
    for m in 0..=max / 2 {
        if m > 0 {
            term = term * int(sign) / int(m as i64);
        }
        p.add_term(m, m, term.clone());
    }
    p
}

fn apply_word_plain(word: &Word, p: &BiPoly) -> BiPoly {
    let mut acc = p.clone();
    for g in word.factors().iter().rev() {
        acc = match g {
            Generator::X => acc.mul_x(),
            Generator::D => acc.d_dx(),
        };
    }
    acc
}

/// Largest number of total degrees a single application of `h` can remove
/// from a monomial: each word changes the degree of any monomial it does not
/// annihilate by exactly its excess.
pub fn degree_drop_per_step(h: &Process) -> u32 {
    h.terms()
        .map(|(w, _)| (-w.excess()).max(0) as u32)
        .max()
        .unwrap_or(0)
}

/// Computes `e^{-xy} H^n e^{xy}` with both exponentials truncated at total
/// degree `degree_bound`, then keeps the monomials of total degree at most
/// `degree_bound - n·drop`, where `drop` is [`degree_drop_per_step`]. On that
/// region the result is exactly `B_n`.
pub fn conjugate_check(h: &Process, n: u32, degree_bound: u32) -> Result<BiPoly, PolyError> {
    let drop = degree_drop_per_step(h);
    let lost = n * drop;
    if lost > degree_bound {
        return Err(PolyError::InsufficientTruncation {
            bound: degree_bound,
            steps: n,
            drop,
        });
    }
    let exact_to = degree_bound - lost;

    let mut acc = exp_xy_truncated(1, degree_bound);
    for _ in 0..n {
        let mut next = BiPoly::zero();
        for (word, weight) in h.terms() {
            next = next + apply_word_plain(word, &acc).scale(weight);
        }
        acc = next;
    }
    let inverse = exp_xy_truncated(-1, degree_bound);
    Ok(acc.mul_truncated(&inverse, exact_to))
}
