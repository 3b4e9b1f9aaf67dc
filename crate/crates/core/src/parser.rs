//! Surface syntax for processes.
//!
//! ```text
//! expression  := term ( '+' term )*
//! term        := coefficient '*'? factor* | factor+
//! factor      := ( 'X' | 'D' ) ( '^' posint )?
//! coefficient := integer | integer '/' posint
//! ```
//!
//! Whitespace is insignificant. Factors multiply in written order, so the
//! rightmost one acts first. A coefficient with no factors is a multiple of
//! the identity, which makes `0` the zero process and `""` parse to it too.

use std::iter::Peekable;
use std::str::CharIndices;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{Generator, Process, Word};
use crate::{fraction_string, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    /// `position` is a 1-based character index; one past the end for EOF.
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("negative coefficient at position {position}")]
    NegativeCoefficient { position: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. } | ParseError::NegativeCoefficient { position } => {
                *position
            }
        }
    }
}

struct Parser<'a> {
    chars: Peekable<CharIndices<'a>>,
    // 1-based position of the next character
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            chars: src.char_indices().peekable(),
            pos: 1,
        }
    }

    fn skip_ws(&mut self) {
        while let Some(&(_, c)) = self.chars.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.bump();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.peek().map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next().map(|(_, c)| c);
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn syntax<T>(&self, position: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            position,
            message: message.into(),
        })
    }

    fn digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(&(_, c)) = self.chars.peek() {
            if !c.is_ascii_digit() {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn expression(&mut self) -> Result<Process, ParseError> {
        let mut process = Process::zero();
        if self.peek().is_none() {
            return Ok(process);
        }
        loop {
            let (word, weight) = self.term()?;
            process
                .add_term(word, weight)
                .expect("parser only produces nonnegative weights");
            match self.peek() {
                None => return Ok(process),
                Some('+') => {
                    self.bump();
                }
                Some('-') => return Err(ParseError::NegativeCoefficient { position: self.pos }),
                Some(c) => return self.syntax(self.pos, format!("expected '+', found {c:?}")),
            }
        }
    }

    fn term(&mut self) -> Result<(Word, Rational), ParseError> {
        let start = self.pos;
        let coefficient = match self.peek() {
            Some('-') => return Err(ParseError::NegativeCoefficient { position: self.pos }),
            Some(c) if c.is_ascii_digit() => Some(self.coefficient()?),
            Some('X' | 'D') => None,
            Some(c) => return self.syntax(self.pos, format!("expected a term, found {c:?}")),
            None => return self.syntax(self.pos, "expected a term, found end of input"),
        };
        let star = if coefficient.is_some() && self.peek() == Some('*') {
            let at = self.pos;
            self.bump();
            Some(at)
        } else {
            None
        };

        let mut factors = Vec::new();
        while let Some(c @ ('X' | 'D')) = self.peek() {
            self.bump();
            let g = if c == 'X' { Generator::X } else { Generator::D };
            let count = if self.peek() == Some('^') {
                let caret = self.pos;
                self.bump();
                self.skip_ws();
                let digits = self.digits();
                match digits.parse::<usize>() {
                    Ok(n) if n > 0 => n,
                    _ => return self.syntax(caret, "expected a positive exponent after '^'"),
                }
            } else {
                1
            };
            factors.extend(std::iter::repeat_n(g, count));
        }

        if let Some(at) = star {
            if factors.is_empty() {
                return self.syntax(at, "expected 'X' or 'D' after '*'");
            }
        }
        match (coefficient, factors.is_empty()) {
            (None, true) => self.syntax(start, "expected a term"),
            (c, _) => Ok((Word::new(factors), c.unwrap_or_else(Rational::one))),
        }
    }

    fn coefficient(&mut self) -> Result<Rational, ParseError> {
        let numer = self.digits();
        let numer: BigInt = numer.parse().expect("digits");
        if self.peek() != Some('/') {
            return Ok(Rational::from_integer(numer));
        }
        let slash = self.pos;
        self.bump();
        self.skip_ws();
        if self.chars.peek().map(|&(_, c)| c) == Some('-') {
            return Err(ParseError::NegativeCoefficient { position: self.pos });
        }
        let denom = self.digits();
        match denom.parse::<BigInt>() {
            Ok(d) if !d.is_zero() => Ok(Rational::new(numer, d)),
            _ => self.syntax(slash, "expected a positive denominator after '/'"),
        }
    }
}

/// Parses an expression such as `"2 X^3 D + 5 X D^2 X"` into a canonical
/// process with like terms merged.
pub fn parse(src: &str) -> Result<Process, ParseError> {
    Parser::new(src).expression()
}

fn render_word(word: &Word) -> String {
    let mut parts: Vec<String> = Vec::new();
    let f = word.factors();
    let mut i = 0;
    while i < f.len() {
        let run = f[i..].iter().take_while(|&&g| g == f[i]).count();
        if run == 1 {
            parts.push(f[i].symbol().to_string());
        } else {
            parts.push(format!("{}^{}", f[i].symbol(), run));
        }
        i += run;
    }
    parts.join(" ")
}

/// Canonical rendering: terms by descending word length, then
/// lexicographically with `X < D`; weight 1 is omitted except on the
/// identity word. The zero process renders as `0`.
pub fn pretty(p: &Process) -> String {
    if p.is_empty() {
        return "0".to_string();
    }
    let mut terms: Vec<_> = p.terms().collect();
    terms.sort_by(|(a, _), (b, _)| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    terms
        .into_iter()
        .map(|(w, c)| match (w.is_empty(), c.is_one()) {
            (true, _) => fraction_string(c),
            (false, true) => render_word(w),
            (false, false) => format!("{} {}", fraction_string(c), render_word(w)),
        })
        .collect::<Vec<_>>()
        .join(" + ")
}
