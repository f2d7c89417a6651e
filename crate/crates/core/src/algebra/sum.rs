//! Rational linear combinations of tensor monomials.
//!
//! Text grammar (used by the CLI):
//!
//! ```text
//! sum    := ['+'|'-'] term (('+'|'-') term)*
//! term   := coef ['*'] tensor | coef | tensor
//! coef   := integer ['/' integer]
//! tensor := word (('⊗' | '(x)') word)*
//! word   := '1' | factor+
//! factor := 'u(' i ',' j ')' | 'u' digit digit | 'P'
//! ```
//!
//! e.g. `u(1,1)u(1,1)P - P` or `2 * u11 ⊗ P - 1/2 * 1 ⊗ u(2,1)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use super::word::{format_tensor, Generator, TensorWord, Word};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

/// Canonical formal sum: no zero coefficients, monomials kept in a
/// `BTreeMap` so iteration follows the monomial order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormalSum {
    degree: usize,
    terms: BTreeMap<TensorWord, Rational>,
}

impl FormalSum {
    pub fn zero(degree: usize) -> Self {
        assert!(degree >= 1, "tensor degree is at least 1");
        FormalSum { degree, terms: BTreeMap::new() }
    }

    /// `1 ⊗ ⋯ ⊗ 1`.
    pub fn one(degree: usize) -> Self {
        Self::monomial(vec![Word::unit(); degree], Rational::one())
    }

    pub fn monomial(tw: TensorWord, coef: Rational) -> Self {
        let mut s = Self::zero(tw.len());
        s.add_term(tw, coef);
        s
    }

    pub fn word(w: Word) -> Self {
        Self::monomial(vec![w], Rational::one())
    }

    pub fn generator(g: Generator) -> Self {
        Self::word(Word::single(g))
    }

    /// Accumulates arbitrary terms (repeats, zeros) into canonical form.
    pub fn from_terms(degree: usize, terms: impl IntoIterator<Item = (TensorWord, Rational)>) -> Self {
        let mut s = Self::zero(degree);
        for (tw, c) in terms {
            s.add_term(tw, c);
        }
        s
    }

    pub fn tensor_degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TensorWord, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, tw: &TensorWord) -> Rational {
        self.terms.get(tw).cloned().unwrap_or_else(Rational::zero)
    }

    /// Longest word over all terms and tensor components.
    pub fn max_word_len(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|tw| tw.iter().map(Word::len))
            .max()
            .unwrap_or(0)
    }

    pub fn generators(&self) -> impl Iterator<Item = Generator> + '_ {
        self.terms.keys().flatten().flat_map(|w| w.0.iter().copied())
    }

    pub fn add_term(&mut self, tw: TensorWord, coef: Rational) {
        assert_eq!(tw.len(), self.degree, "tensor degree mismatch");
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(tw) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coef;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &FormalSum, c: &Rational) {
        assert_eq!(self.degree, other.degree, "tensor degree mismatch");
        if c.is_zero() {
            return;
        }
        for (tw, v) in &other.terms {
            self.add_term(tw.clone(), v * c);
        }
    }

    pub fn scale(&self, c: &Rational) -> FormalSum {
        let mut out = FormalSum::zero(self.degree);
        out.add_scaled(self, c);
        out
    }

    /// Product in the tensor power of the free algebra: componentwise
    /// concatenation.
    pub fn mul(&self, rhs: &FormalSum) -> FormalSum {
        assert_eq!(self.degree, rhs.degree, "tensor degree mismatch");
        let mut out = FormalSum::zero(self.degree);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let tw = a.iter().zip(b).map(|(x, y)| x.concat(y)).collect();
                out.add_term(tw, ca * cb);
            }
        }
        out
    }

    /// `self ⊗ rhs`.
    pub fn tensor(&self, rhs: &FormalSum) -> FormalSum {
        let mut out = FormalSum::zero(self.degree + rhs.degree);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let mut tw = a.clone();
                tw.extend(b.iter().cloned());
                out.add_term(tw, ca * cb);
            }
        }
        out
    }

    /// Left and right multiplication by monomials.
    pub fn sandwich(&self, left: &TensorWord, right: &TensorWord) -> FormalSum {
        assert!(left.len() == self.degree && right.len() == self.degree);
        let mut out = FormalSum::zero(self.degree);
        for (tw, c) in &self.terms {
            let w = tw
                .iter()
                .enumerate()
                .map(|(p, x)| left[p].concat(x).concat(&right[p]))
                .collect();
            out.add_term(w, c.clone());
        }
        out
    }

    /// Canonical form. Sums are kept canonical on every update, so this is
    /// a copy; kept as the explicit normalization entry point.
    pub fn normalize(&self) -> FormalSum {
        FormalSum::from_terms(self.degree, self.terms.iter().map(|(k, v)| (k.clone(), v.clone())))
    }

    /// Involution for self-adjoint generators: reverses every word and
    /// fixes the (rational) coefficients.
    pub fn star(&self) -> Result<FormalSum> {
        if self.degree != 1 {
            return Err(Error::TensorDegree { expected: 1, found: self.degree });
        }
        Ok(FormalSum::from_terms(
            1,
            self.terms.iter().map(|(tw, c)| (vec![tw[0].reversed()], c.clone())),
        ))
    }

    /// Places a degree-1 sum at `position` of a degree-`degree` tensor, with
    /// units elsewhere.
    pub fn embed(&self, position: usize, degree: usize) -> Result<FormalSum> {
        if self.degree != 1 {
            return Err(Error::TensorDegree { expected: 1, found: self.degree });
        }
        assert!(position < degree);
        Ok(FormalSum::from_terms(
            degree,
            self.terms.iter().map(|(tw, c)| {
                let mut w = vec![Word::unit(); degree];
                w[position] = tw[0].clone();
                (w, c.clone())
            }),
        ))
    }

    /// Applies an algebra homomorphism defined on generators; the images
    /// must all have tensor degree `target_degree`.
    pub fn substitute(&self, target_degree: usize, image: impl Fn(Generator) -> FormalSum) -> Result<FormalSum> {
        if self.degree != 1 {
            return Err(Error::TensorDegree { expected: 1, found: self.degree });
        }
        let mut out = FormalSum::zero(target_degree);
        for (tw, c) in &self.terms {
            let mut acc = FormalSum::one(target_degree);
            for &g in tw[0].generators() {
                let img = image(g);
                if img.degree != target_degree {
                    return Err(Error::TensorDegree { expected: target_degree, found: img.degree });
                }
                acc = acc.mul(&img);
            }
            out.add_scaled(&acc, c);
        }
        Ok(out)
    }
}

impl std::ops::Add for &FormalSum {
    type Output = FormalSum;
    fn add(self, rhs: &FormalSum) -> FormalSum {
        let mut out = self.clone();
        out.add_scaled(rhs, &Rational::one());
        out
    }
}

impl std::ops::Sub for &FormalSum {
    type Output = FormalSum;
    fn sub(self, rhs: &FormalSum) -> FormalSum {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Rational::one());
        out
    }
}

impl std::ops::Neg for &FormalSum {
    type Output = FormalSum;
    fn neg(self) -> FormalSum {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (tw, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            match (i, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if !mag.is_one() {
                write!(f, "{} * ", format_rational(&mag))?;
            }
            f.write_str(&format_tensor(tw))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at offset {} in {:?}", self.pos, self.src))
    }

    fn integer(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let len = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if len == 0 {
            return None;
        }
        let s = &self.rest()[..len];
        self.pos += len;
        Some(s)
    }

    fn coefficient(&mut self) -> Result<Option<Rational>> {
        let save = self.pos;
        let Some(num) = self.integer() else { return Ok(None) };
        // a lone "1" followed by a tensor sign or the end is the unit word
        let mut text = num.to_string();
        if self.eat("/") {
            let den = self.integer().ok_or_else(|| self.err("expected denominator"))?;
            text = format!("{num}/{den}");
        }
        let after = self.pos;
        self.skip_ws();
        let next = self.rest();
        if text == "1" && (next.starts_with('⊗') || next.starts_with("(x)")) {
            self.pos = save;
            return Ok(None);
        }
        self.pos = after;
        Ok(Some(parse_rational(&text)?))
    }

    fn factor(&mut self) -> Result<Option<Generator>> {
        self.skip_ws();
        if self.eat("P") {
            return Ok(Some(Generator::P));
        }
        if !self.rest().starts_with('u') {
            return Ok(None);
        }
        self.pos += 1;
        if self.eat("(") {
            let i = self.integer().ok_or_else(|| self.err("expected row index"))?;
            if !self.eat(",") {
                return Err(self.err("expected ','"));
            }
            let j = self.integer().ok_or_else(|| self.err("expected column index"))?;
            if !self.eat(")") {
                return Err(self.err("expected ')'"));
            }
            let (i, j): (usize, usize) = (i.parse().unwrap(), j.parse().unwrap());
            if i == 0 || j == 0 {
                return Err(self.err("indices are 1-based"));
            }
            return Ok(Some(Generator::u(i, j)));
        }
        let digits: Vec<u8> = self.rest().bytes().take(2).collect();
        if digits.len() == 2 && digits.iter().all(|d| (b'1'..=b'9').contains(d)) {
            self.pos += 2;
            return Ok(Some(Generator::u((digits[0] - b'0') as usize, (digits[1] - b'0') as usize)));
        }
        Err(self.err("expected u(i,j) or uIJ"))
    }

    fn word(&mut self) -> Result<Word> {
        self.skip_ws();
        if self.rest().starts_with('1') {
            self.pos += 1;
            return Ok(Word::unit());
        }
        let mut gens = Vec::new();
        while let Some(g) = self.factor()? {
            gens.push(g);
        }
        if gens.is_empty() {
            return Err(self.err("expected a word"));
        }
        Ok(Word::new(gens))
    }

    fn tensor(&mut self) -> Result<TensorWord> {
        let mut tw = vec![self.word()?];
        while self.eat("⊗") || self.eat("(x)") {
            tw.push(self.word()?);
        }
        Ok(tw)
    }

    fn at_term_end(&mut self) -> bool {
        self.skip_ws();
        self.rest().is_empty() || self.rest().starts_with('+') || self.rest().starts_with('-')
    }
}

impl FromStr for FormalSum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s, pos: 0 };
        // (sign·coef, optional tensor monomial)
        let mut raw: Vec<(Rational, Option<TensorWord>)> = Vec::new();
        let mut first = true;
        loop {
            p.skip_ws();
            if p.rest().is_empty() {
                if first {
                    return Err(p.err("empty expression"));
                }
                break;
            }
            let sign = if p.eat("-") {
                -Rational::one()
            } else {
                if !p.eat("+") && !first {
                    return Err(p.err("expected '+' or '-'"));
                }
                Rational::one()
            };
            first = false;
            let coef = p.coefficient()?;
            if let Some(c) = &coef {
                if p.at_term_end() {
                    raw.push((sign * c, None));
                    continue;
                }
                p.eat("*");
            }
            let tw = p.tensor()?;
            raw.push((sign * coef.unwrap_or_else(Rational::one), Some(tw)));
            if !p.at_term_end() {
                return Err(p.err("unexpected input"));
            }
        }
        let degree = raw.iter().filter_map(|(_, t)| t.as_ref().map(Vec::len)).max().unwrap_or(1);
        if raw.iter().any(|(_, t)| t.as_ref().is_some_and(|t| t.len() != degree)) {
            return Err(Error::Parse(format!("mixed tensor degrees in {s:?}")));
        }
        Ok(FormalSum::from_terms(
            degree,
            raw.into_iter().map(|(c, t)| (t.unwrap_or_else(|| vec![Word::unit(); degree]), c)),
        ))
    }
}
