//! Exact arithmetic for the Heisenberg-Weyl algebra realized as urn processes.
//!
//! Operators are words in `X` (put a ball in) and `D` (take a ball out) with
//! `DX = XD + 1`. The crate normal-orders such expressions, builds the
//! polynomials `B_n(x, y)` encoding the normal forms of powers, expands the
//! exponential generating functions `B(x, y, λ)` and `G(x, y, λ)`, and counts
//! urn histories both through the operator action and by brute-force search
//! over labelled balls.
//!
//! All coefficients are arbitrary-precision rationals.

pub mod algebra;
pub mod cli;
pub mod enumerate;
pub mod parser;
pub mod poly;
pub mod series;

pub use algebra::{Generator, NormalForm, Process, Word};
pub use enumerate::{HistoryTable, ProbabilityRow};
pub use poly::BiPoly;
pub use series::{LambdaSeries, TriSeries};

/// Exact rational coefficient used throughout the crate.
pub type Rational = num_rational::BigRational;

/// Formats a rational as `p` or `p/q` with `q > 0` and `gcd(p, q) = 1`.
pub fn fraction_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p` or `p/q` into a reduced rational. Leading `-` is allowed.
pub fn parse_fraction(s: &str) -> Option<Rational> {
    use num_bigint::BigInt;
    use num_traits::Zero;

    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let valid = |t: &str| {
        let digits = t.strip_prefix('-').unwrap_or(t);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num) || !valid(den) || den.starts_with('-') {
        return None;
    }
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = den.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

pub(crate) fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}
