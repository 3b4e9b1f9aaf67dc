//! Truncated generating functions in `x`, `y` and `λ`.
//!
//! `B(x, y, λ) = Σ B_n λ^n / n!` is kept as its list of polynomials. The
//! history generating function `G(x, y, λ) = B(x, y, λ) e^{xy}` is a
//! [`TriSeries`], a box-truncated power series whose coefficients are exact
//! for every index inside its bounds. Products of box-truncated series are
//! exact on the intersection of the boxes, so bounds only ever shrink.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{AlgebraError, Process, Word};
use crate::poly::{apply_shifted, bn_sequence, BiPoly};
use crate::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("a series needs at least the λ^0 term")]
    Empty,
    #[error("series of order {0} is too short for a λ-derivative")]
    OrderTooLow(u32),
}

/// Exponential series in `λ` with polynomial coefficients, truncated after
/// `λ^order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaSeries {
    terms: Vec<BiPoly>,
}

impl LambdaSeries {
    /// `terms[n]` is `B_n`; the order is `terms.len() - 1`.
    pub fn new(terms: Vec<BiPoly>) -> Result<Self, SeriesError> {
        if terms.is_empty() {
            return Err(SeriesError::Empty);
        }
        Ok(LambdaSeries { terms })
    }

    pub fn order(&self) -> u32 {
        self.terms.len() as u32 - 1
    }

    pub fn terms(&self) -> &[BiPoly] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(BiPoly::is_zero)
    }

    /// Coefficients `B_n[i, j] / n!` as a box-truncated series.
    pub fn to_tri(&self, dx: u32, dy: u32) -> TriSeries {
        let bounds = Bounds::new(self.order(), dx, dy);
        let mut out = TriSeries::zero(bounds);
        let mut fact = Rational::one();
        for (n, b) in self.terms.iter().enumerate() {
            if n > 0 {
                fact *= int(n as i64);
            }
            for (&(i, j), c) in b.terms() {
                out.add_term(i, j, n as u32, c / &fact);
            }
        }
        out
    }
}

/// Inclusive truncation bounds: `λ^n` with `n <= lambda`, `x^i` with
/// `i <= x`, `y^j` with `j <= y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bounds {
    pub lambda: u32,
    pub x: u32,
    pub y: u32,
}

impl Bounds {
    pub fn new(lambda: u32, x: u32, y: u32) -> Self {
        Bounds { lambda, x, y }
    }

    pub fn contains(&self, i: u32, j: u32, n: u32) -> bool {
        i <= self.x && j <= self.y && n <= self.lambda
    }

    pub fn meet(&self, other: &Bounds) -> Bounds {
        Bounds {
            lambda: self.lambda.min(other.lambda),
            x: self.x.min(other.x),
            y: self.y.min(other.y),
        }
    }
}

/// Sparse series `Σ c_ijn x^i y^j λ^n`, keyed `(i, j, n)`, exact on `bounds`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriSeries {
    bounds: Bounds,
    coeffs: BTreeMap<(u32, u32, u32), Rational>,
}

impl TriSeries {
    pub fn zero(bounds: Bounds) -> Self {
        TriSeries {
            bounds,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(bounds: Bounds) -> Self {
        let mut s = Self::zero(bounds);
        s.add_term(0, 0, 0, Rational::one());
        s
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Adds `c x^i y^j λ^n`; indices outside the bounds are dropped.
    pub fn add_term(&mut self, i: u32, j: u32, n: u32, c: Rational) {
        if c.is_zero() || !self.bounds.contains(i, j, n) {
            return;
        }
        let slot = self.coeffs.entry((i, j, n)).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&(i, j, n));
        }
    }

    pub fn coeff(&self, i: u32, j: u32, n: u32) -> Rational {
        self.coeffs
            .get(&(i, j, n))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32, u32), &Rational)> + '_ {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn restrict(&self, bounds: Bounds) -> TriSeries {
        let bounds = self.bounds.meet(&bounds);
        TriSeries {
            bounds,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&(i, j, n), _)| bounds.contains(i, j, n))
                .map(|(&k, v)| (k, v.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &TriSeries) -> TriSeries {
        let mut out = self.restrict(other.bounds);
        for (&(i, j, n), c) in &other.coeffs {
            out.add_term(i, j, n, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> TriSeries {
        let mut out = TriSeries::zero(self.bounds);
        for (&(i, j, n), v) in &self.coeffs {
            out.add_term(i, j, n, v * c);
        }
        out
    }

    /// Truncated product, exact on the meet of both bounds.
    pub fn mul(&self, other: &TriSeries) -> TriSeries {
        let bounds = self.bounds.meet(&other.bounds);
        let mut out = TriSeries::zero(bounds);
        for (&(i1, j1, n1), c1) in &self.coeffs {
            if !bounds.contains(i1, j1, n1) {
                continue;
            }
            for (&(i2, j2, n2), c2) in &other.coeffs {
                out.add_term(i1 + i2, j1 + j2, n1 + n2, c1 * c2);
            }
        }
        out
    }

    /// `exp(self)` for a series with zero constant term. Every monomial of
    /// `self^m` then has total degree at least `m`, so the sum terminates
    /// inside the box.
    pub fn exp_nilpotent(&self) -> TriSeries {
        assert!(
            self.coeff(0, 0, 0).is_zero(),
            "exp_nilpotent needs a zero constant term"
        );
        let mut out = TriSeries::one(self.bounds);
        let mut power = TriSeries::one(self.bounds);
        let mut m = 0i64;
        loop {
            m += 1;
            power = power.mul(self).scale(&Rational::new(1.into(), m.into()));
            if power.is_zero() {
                return out;
            }
            out = out.add(&power);
        }
    }

    /// Indices in `window` where the two series differ, as
    /// `((i, j, n), self, other)`.
    pub fn differences(
        &self,
        other: &TriSeries,
        window: Bounds,
    ) -> Vec<((u32, u32, u32), Rational, Rational)> {
        let a = self.restrict(window);
        let b = other.restrict(window);
        let mut keys: Vec<_> = a.coeffs.keys().chain(b.coeffs.keys()).copied().collect();
        keys.sort_unstable_by_key(|&(i, j, n)| (n, i, j));
        keys.dedup();
        keys.into_iter()
            .filter_map(|(i, j, n)| {
                let (x, y) = (a.coeff(i, j, n), b.coeff(i, j, n));
                (x != y).then_some(((i, j, n), x, y))
            })
            .collect()
    }
}

/// `e^{xy}` truncated to `(xy)^m` with `m <= min(x, y)`, as a `λ^0` series.
pub fn exp_xy(bounds: Bounds) -> TriSeries {
    let mut out = TriSeries::zero(bounds);
    let mut c = Rational::one();
    for m in 0..=bounds.x.min(bounds.y) {
        if m > 0 {
            c /= int(m as i64);
        }
        out.add_term(m, m, 0, c.clone());
    }
    out
}

/// `B(x, y, λ)` to order `n_max`: the terms are `bn_sequence(h, n_max)`.
pub fn b_series(h: &Process, n_max: u32) -> LambdaSeries {
    LambdaSeries {
        terms: bn_sequence(h, n_max),
    }
}

/// `G(x, y, λ) = B(x, y, λ) e^{xy}`. The coefficient of `x^k y^l λ^n` is
/// `G^(n)_{l→k} / (l! n!)`.
pub fn g_series(h: &Process, n_max: u32, dx: u32, dy: u32) -> TriSeries {
    let b = b_series(h, n_max).to_tri(dx, dy);
    b.mul(&exp_xy(b.bounds()))
}

/// `∂_λ s - H(x, ∂_x + y) s` up to order `N - 1`; term `n` is
/// `B_{n+1} - H(X, D + y) B_n`.
pub fn pde_residual(h: &Process, s: &LambdaSeries) -> Result<LambdaSeries, SeriesError> {
    if s.order() == 0 {
        return Err(SeriesError::OrderTooLow(0));
    }
    let terms = s
        .terms
        .windows(2)
        .map(|w| &w[1] - &apply_shifted(h, &w[0]))
        .collect();
    Ok(LambdaSeries { terms })
}

/// The driven oscillator `XD + g X + g D`.
pub fn oscillator_process(g: &Rational) -> Result<Process, AlgebraError> {
    Process::from_terms([
        ("XD".parse::<Word>().expect("word"), Rational::one()),
        (Word::x_pow(1), g.clone()),
        (Word::d_pow(1), g.clone()),
    ])
}

/// Expands `e^{(x+g)(y+g)(e^λ - 1)} e^{-g²λ} e^{xy}` inside the box
/// `λ^n, n <= n_max; x^i, i <= dx; y^j, j <= dy`.
pub fn driven_oscillator_closed_form(g: &Rational, n_max: u32, dx: u32, dy: u32) -> TriSeries {
    let bounds = Bounds::new(n_max, dx, dy);

    let mut shifted = TriSeries::zero(bounds);
    shifted.add_term(1, 1, 0, Rational::one());
    shifted.add_term(1, 0, 0, g.clone());
    shifted.add_term(0, 1, 0, g.clone());
    shifted.add_term(0, 0, 0, g * g);

    let mut exp_minus_one = TriSeries::zero(bounds);
    let mut c = Rational::one();
    for m in 1..=n_max {
        c /= int(m as i64);
        exp_minus_one.add_term(0, 0, m, c.clone());
    }

    let damping = {
        let mut s = TriSeries::zero(bounds);
        s.add_term(0, 0, 1, -(g * g));
        s.exp_nilpotent()
    };

    shifted
        .mul(&exp_minus_one)
        .exp_nilpotent()
        .mul(&damping)
        .mul(&exp_xy(bounds))
}
