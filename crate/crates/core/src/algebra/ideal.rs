//! Bounded-degree ideal membership in the free algebra.
//!
//! The truncated ideal `I_D = span{a·r·c : |a| + deg r + |c| ≤ D}` is put in
//! echelon form over the word basis, pivoting on leading (largest) words.
//! Every echelon row remembers how it was produced, so a normal-form
//! computation that reduces a target to zero can be unwound into an explicit
//! combination of generator products.
//!
//! For tensor targets the ideal is `I_D ⊗ W + W ⊗ I_D` (and its analogue in
//! higher tensor powers). Since the normal form is a projection with kernel
//! `I_D`, a tensor lies in that ideal iff reducing every tensor factor in
//! turn leaves nothing.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::sum::FormalSum;
use super::word::{format_tensor, Generator, TensorWord, Word};
use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

/// Upper limit on the number of words of length `≤ D`.
pub const MAX_BASIS_WORDS: u64 = 2_000_000;

/// Sparse vector over word ids, sorted by decreasing id.
type Sparse = Vec<(u64, Rational)>;

/// Length-lexicographic numbering of words over a fixed alphabet.
#[derive(Clone, Debug)]
struct WordCoder {
    n: usize,
    with_p: bool,
    base: u64,
    /// `offsets[l]` = number of words shorter than `l`
    offsets: Vec<u64>,
}

impl WordCoder {
    const MAX_LEN: usize = 48;

    fn new(n: usize, with_p: bool) -> Self {
        let base = (n * n + usize::from(with_p)) as u64;
        let mut offsets = vec![0u64];
        let mut power = 1u64;
        for _ in 0..Self::MAX_LEN {
            let last = *offsets.last().unwrap();
            offsets.push(last.saturating_add(power));
            power = power.saturating_mul(base);
        }
        WordCoder { n, with_p, base, offsets }
    }

    fn letter(&self, g: Generator) -> Result<u64> {
        match g {
            Generator::P if self.with_p => Ok((self.n * self.n) as u64),
            Generator::U(i, j) if (i as usize) <= self.n && (j as usize) <= self.n => {
                Ok(((i as usize - 1) * self.n + (j as usize - 1)) as u64)
            }
            _ => Err(Error::InvalidWord(format!("generator {g} outside the alphabet"))),
        }
    }

    fn generator(&self, letter: u64) -> Generator {
        let l = letter as usize;
        if l == self.n * self.n {
            Generator::P
        } else {
            Generator::u(l / self.n + 1, l % self.n + 1)
        }
    }

    /// Base-`g` value of the word (most significant letter first).
    fn value(&self, w: &[Generator]) -> Result<u64> {
        let mut v = 0u64;
        for &g in w {
            let l = self.letter(g)?;
            v = v
                .checked_mul(self.base)
                .and_then(|v| v.checked_add(l))
                .ok_or_else(|| Error::TooLarge(format!("word of length {} cannot be numbered", w.len())))?;
        }
        Ok(v)
    }

    fn offset(&self, len: usize) -> Result<u64> {
        match self.offsets.get(len) {
            Some(&o) if o != u64::MAX => Ok(o),
            _ => Err(Error::TooLarge(format!("words of length {len} cannot be numbered"))),
        }
    }

    fn id(&self, w: &Word) -> Result<u64> {
        Ok(self.offset(w.len())? + self.value(w.generators())?)
    }

    fn word(&self, id: u64) -> Word {
        let len = self.offsets.partition_point(|&o| o <= id) - 1;
        let mut v = id - self.offsets[len];
        let mut letters = vec![Generator::P; len];
        for slot in letters.iter_mut().rev() {
            *slot = self.generator(v % self.base);
            v /= self.base;
        }
        Word::new(letters)
    }

    fn pow(&self, e: usize) -> u64 {
        self.base.pow(e as u32)
    }
}

/// A relation term pre-encoded for fast products.
struct EncodedTerm {
    value: u64,
    len: usize,
    coef: Rational,
}

struct Row {
    /// Monic: the leading coefficient is 1.
    terms: Sparse,
    /// `terms = scale · (a·r·c − Σ f·row)`
    scale: Rational,
    left: u64,
    relation: usize,
    right: u64,
    history: Vec<(usize, Rational)>,
}

fn axpy(v: &[(u64, Rational)], c: &Rational, row: &[(u64, Rational)]) -> Sparse {
    // v − c·row, both sorted by decreasing id
    let mut out = Vec::with_capacity(v.len() + row.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < row.len() {
        let take_v = j == row.len() || (i < v.len() && v[i].0 > row[j].0);
        let take_r = i == v.len() || (j < row.len() && row[j].0 > v[i].0);
        if take_v {
            out.push(v[i].clone());
            i += 1;
        } else if take_r {
            out.push((row[j].0, -(c * &row[j].1)));
            j += 1;
        } else {
            let x = &v[i].1 - c * &row[j].1;
            if !x.is_zero() {
                out.push((v[i].0, x));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Echelon basis of the degree-`D` truncation of a two-sided ideal.
pub struct TruncatedIdeal {
    coder: WordCoder,
    degree: usize,
    generators: Vec<FormalSum>,
    rows: Vec<Row>,
    pivots: HashMap<u64, usize>,
}

impl TruncatedIdeal {
    /// Builds `I_D` for the ideal generated by `relations` and their adjoints
    /// over the generators `u_{ij}` (`i, j ≤ n`) and, if `with_p`, `P`.
    pub fn new(relations: &[FormalSum], n: usize, with_p: bool, degree: usize) -> Result<Self> {
        let coder = WordCoder::new(n, with_p);
        let words = coder.offset(degree + 1).unwrap_or(u64::MAX);
        if words > MAX_BASIS_WORDS {
            return Err(Error::TooLarge(format!(
                "{words} words of length ≤ {degree} over {} generators (cap {MAX_BASIS_WORDS})",
                coder.base
            )));
        }
        let generators = star_closure(relations)?;
        let mut encoded = Vec::with_capacity(generators.len());
        for r in &generators {
            let mut terms = Vec::new();
            for (tw, c) in r.terms() {
                let w = &tw[0];
                terms.push(EncodedTerm { value: coder.value(w.generators())?, len: w.len(), coef: c.clone() });
            }
            encoded.push(terms);
        }

        // every (left length, relation, right length) block, then all words
        let mut blocks = Vec::new();
        for (rel, r) in generators.iter().enumerate() {
            let d = r.max_word_len();
            if d > degree {
                continue;
            }
            for la in 0..=degree - d {
                for lc in 0..=degree - d - la {
                    blocks.push((la, rel, lc));
                }
            }
        }
        let mut products: Vec<(Sparse, u64, usize, u64)> = blocks
            .par_iter()
            .flat_map_iter(|&(la, rel, lc)| {
                let coder = &coder;
                let terms = &encoded[rel];
                (0..coder.pow(la)).flat_map(move |a| {
                    (0..coder.pow(lc)).map(move |c| {
                        let mut v: Sparse = terms
                            .iter()
                            .map(|t| {
                                let len = la + t.len + lc;
                                let value = (a * coder.pow(t.len) + t.value) * coder.pow(lc) + c;
                                (coder.offsets[len] + value, t.coef.clone())
                            })
                            .collect();
                        v.sort_unstable_by_key(|x| std::cmp::Reverse(x.0));
                        (v, coder.offsets[la] + a, rel, coder.offsets[lc] + c)
                    })
                })
            })
            .collect();
        products.sort_by(|x, y| (x.0[0].0, x.1, x.2, x.3).cmp(&(y.0[0].0, y.1, y.2, y.3)));

        let mut ideal = TruncatedIdeal { coder, degree, generators, rows: Vec::new(), pivots: HashMap::new() };
        for (v, left, relation, right) in products {
            ideal.insert(v, left, relation, right);
        }
        Ok(ideal)
    }

    fn insert(&mut self, mut v: Sparse, left: u64, relation: usize, right: u64) {
        let mut history = Vec::new();
        while let Some((lead, c)) = v.first().cloned() {
            match self.pivots.get(&lead) {
                Some(&k) => {
                    v = axpy(&v, &c, &self.rows[k].terms);
                    history.push((k, c));
                }
                None => {
                    let scale = c.recip();
                    for t in &mut v {
                        t.1 *= &scale;
                    }
                    self.pivots.insert(lead, self.rows.len());
                    self.rows.push(Row { terms: v, scale, left, relation, right, history });
                    return;
                }
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Star-closed generating list; certificate relation indices refer to it.
    pub fn generators(&self) -> &[FormalSum] {
        &self.generators
    }

    /// Dimension of `I_D`.
    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    /// Fully reduces `v`, returning the remainder and the rows subtracted.
    fn reduce(&self, v: &BTreeMap<u64, Rational>) -> (BTreeMap<u64, Rational>, BTreeMap<usize, Rational>) {
        let mut v = v.clone();
        let mut used: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut cursor = u64::MAX;
        loop {
            let next = v.range(..=cursor).rev().find(|(id, _)| self.pivots.contains_key(id)).map(|(id, c)| (*id, c.clone()));
            let Some((id, c)) = next else { break };
            let k = self.pivots[&id];
            for (w, x) in &self.rows[k].terms {
                let e = v.entry(*w).or_insert_with(Rational::zero);
                *e -= &c * x;
                if e.is_zero() {
                    v.remove(w);
                }
            }
            *used.entry(k).or_insert_with(Rational::zero) += c;
            if id == 0 {
                break;
            }
            cursor = id - 1;
        }
        (v, used)
    }

    /// Unwinds `Σ coef·row_k` into generator products `(a, relation, c) ↦ coef`.
    fn expand(&self, mut combo: BTreeMap<usize, Rational>) -> BTreeMap<(u64, usize, u64), Rational> {
        let mut out: BTreeMap<(u64, usize, u64), Rational> = BTreeMap::new();
        while let Some((k, a)) = combo.pop_last() {
            if a.is_zero() {
                continue;
            }
            let row = &self.rows[k];
            let a = a * &row.scale;
            *out.entry((row.left, row.relation, row.right)).or_insert_with(Rational::zero) += &a;
            for (k2, f) in &row.history {
                *combo.entry(*k2).or_insert_with(Rational::zero) -= &a * f;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    fn encode(&self, w: &Word) -> Result<u64> {
        self.coder.id(w)
    }

    /// Canonical representative of `s` modulo `I_D` (tensor degree 1).
    pub fn normal_form(&self, s: &FormalSum) -> Result<FormalSum> {
        if s.tensor_degree() != 1 {
            return Err(Error::TensorDegree { expected: 1, found: s.tensor_degree() });
        }
        let mut v = BTreeMap::new();
        for (tw, c) in s.terms() {
            v.insert(self.encode(&tw[0])?, c.clone());
        }
        let (rest, _) = self.reduce(&v);
        Ok(FormalSum::from_terms(1, rest.into_iter().map(|(id, c)| (vec![self.coder.word(id)], c))))
    }

    /// Decides `target ∈ I_D` (tensor degree 1) or `target ∈ Σ_p W^{⊗p} ⊗ I_D ⊗ W^{⊗(t−p−1)}`
    /// (tensor degree `t`), returning an explicit certificate when it is.
    pub fn membership(&self, target: &FormalSum) -> Result<Membership> {
        let t = target.tensor_degree();
        let m = self.generators.len();
        let mut current: BTreeMap<TensorWord, Rational> = target.terms().map(|(k, v)| (k.clone(), v.clone())).collect();
        let mut terms: BTreeMap<(TensorWord, usize, TensorWord), Rational> = BTreeMap::new();

        for pos in 0..t {
            // group by the other tensor factors
            let mut groups: BTreeMap<TensorWord, BTreeMap<u64, Rational>> = BTreeMap::new();
            for (tw, c) in &current {
                let mut rest = tw.clone();
                let w = rest.remove(pos);
                groups.entry(rest).or_default().insert(self.encode(&w)?, c.clone());
            }
            let mut next = BTreeMap::new();
            for (rest, v) in groups {
                let (rem, used) = self.reduce(&v);
                for (id, c) in rem {
                    let mut tw = rest.clone();
                    tw.insert(pos, self.coder.word(id));
                    next.insert(tw, c);
                }
                for ((a, rel, c), coef) in self.expand(used) {
                    let mut left = rest.clone();
                    left.insert(pos, self.coder.word(a));
                    let mut right = vec![Word::unit(); t];
                    right[pos] = self.coder.word(c);
                    *terms.entry((left, pos * m + rel, right)).or_insert_with(Rational::zero) += coef;
                }
            }
            current = next;
        }
        if !current.is_empty() {
            return Ok(Membership::NotFound);
        }
        let relations = if t == 1 {
            self.generators.clone()
        } else {
            (0..t)
                .flat_map(|p| self.generators.iter().map(move |r| r.embed(p, t)))
                .collect::<Result<Vec<_>>>()?
        };
        let cert = MembershipCertificate {
            target: target.clone(),
            relations,
            terms: terms
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|((left, relation, right), coefficient)| CertificateTerm { left, relation, right, coefficient })
                .collect(),
            degree: self.degree,
        };
        debug_assert!(cert.verify());
        Ok(Membership::Found(cert))
    }
}

/// Appends the adjoint of every relation not already listed.
fn star_closure(relations: &[FormalSum]) -> Result<Vec<FormalSum>> {
    let mut out: Vec<FormalSum> = Vec::with_capacity(relations.len());
    let mut seen = std::collections::HashSet::new();
    for r in relations {
        if r.tensor_degree() != 1 {
            return Err(Error::TensorDegree { expected: 1, found: r.tensor_degree() });
        }
        if !r.is_zero() && seen.insert(r.clone()) {
            out.push(r.clone());
        }
    }
    for r in relations {
        let s = r.star()?;
        if !s.is_zero() && seen.insert(s.clone()) {
            out.push(s);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateTerm {
    pub left: TensorWord,
    pub relation: usize,
    pub right: TensorWord,
    pub coefficient: Rational,
}

/// `target = Σ coefficient · left · relations[relation] · right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipCertificate {
    pub target: FormalSum,
    pub relations: Vec<FormalSum>,
    pub terms: Vec<CertificateTerm>,
    pub degree: usize,
}

impl MembershipCertificate {
    /// Re-expands the combination exactly.
    pub fn verify(&self) -> bool {
        let t = self.target.tensor_degree();
        let mut sum = FormalSum::zero(t);
        for term in &self.terms {
            let Some(r) = self.relations.get(term.relation) else { return false };
            if r.tensor_degree() != t || term.left.len() != t || term.right.len() != t {
                return false;
            }
            sum.add_scaled(&r.sandwich(&term.left, &term.right), &term.coefficient);
        }
        sum == self.target
    }

    /// Longest word appearing in any product `left · relation · right`.
    pub fn max_product_degree(&self) -> usize {
        self.terms
            .iter()
            .map(|term| {
                let r = &self.relations[term.relation];
                r.sandwich(&term.left, &term.right).max_word_len()
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Serialize)]
struct TermJson {
    left: String,
    relation: usize,
    right: String,
    coefficient: String,
}

#[derive(Serialize)]
struct CertificateJson {
    target: String,
    degree: usize,
    relations: Vec<String>,
    terms: Vec<TermJson>,
}

impl Serialize for MembershipCertificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CertificateJson {
            target: self.target.to_string(),
            degree: self.degree,
            relations: self.relations.iter().map(ToString::to_string).collect(),
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    left: format_tensor(&t.left),
                    relation: t.relation,
                    right: format_tensor(&t.right),
                    coefficient: format_rational(&t.coefficient),
                })
                .collect(),
        }
        .serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Membership {
    Found(MembershipCertificate),
    /// Not in `I_D`; says nothing about larger `D`.
    NotFound,
}

impl Membership {
    pub fn certificate(&self) -> Option<&MembershipCertificate> {
        match self {
            Membership::Found(c) => Some(c),
            Membership::NotFound => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, Membership::Found(_))
    }
}

/// Alphabet size and whether `P` occurs, read off the inputs.
pub(crate) fn infer_alphabet<'a>(sums: impl IntoIterator<Item = &'a FormalSum>) -> (usize, bool) {
    let mut n = 1;
    let mut with_p = false;
    for s in sums {
        for g in s.generators() {
            match g {
                Generator::P => with_p = true,
                Generator::U(i, j) => n = n.max(i as usize).max(j as usize),
            }
        }
    }
    (n, with_p)
}

/// One-shot membership test against the ideal generated by `relations` (and
/// their adjoints), truncated at degree `degree`.
pub fn ideal_membership(target: &FormalSum, relations: &[FormalSum], degree: usize) -> Result<Membership> {
    let (n, with_p) = infer_alphabet(relations.iter().chain(std::iter::once(target)));
    TruncatedIdeal::new(relations, n, with_p, degree)?.membership(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::schema::{RelationSchema, SchemaName};
    use crate::rational::int;

    fn fs(s: &str) -> FormalSum {
        s.parse().unwrap()
    }

    #[test]
    fn coder_round_trip() {
        let c = WordCoder::new(2, true);
        let mut last = None;
        for id in 0..200 {
            let w = c.word(id);
            assert_eq!(c.id(&w).unwrap(), id);
            if let Some(prev) = last {
                assert!(prev < w, "length-lex order");
            }
            last = Some(w);
        }
        assert!(c.id(&Word::single(Generator::u(3, 1))).is_err());
        assert!(WordCoder::new(2, false).id(&Word::single(Generator::P)).is_err());
    }

    #[test]
    fn magic_n1_unit_certificate() {
        let rels = RelationSchema::new(SchemaName::Magic, 1).instantiate();
        let m = ideal_membership(&fs("u11 - 1"), &rels, 2).unwrap();
        let cert = m.certificate().expect("u11 = 1 follows from the relations");
        assert!(cert.verify());
        assert!(cert.max_product_degree() <= 2);
        // the combination is ±1 times each relation with units on both sides
        assert_eq!(cert.terms.len(), 2);
        assert!(cert.terms.iter().all(|t| t.left[0].is_unit() && t.right[0].is_unit()));
        assert!(cert.terms.iter().all(|t| t.coefficient == int(1) || t.coefficient == int(-1)));
    }

    #[test]
    fn idempotent_alone_does_not_give_unit() {
        for d in 1..=5 {
            let m = ideal_membership(&fs("u11 - 1"), &[fs("u11u11 - u11")], d).unwrap();
            assert_eq!(m, Membership::NotFound);
        }
    }

    #[test]
    fn relation_is_its_own_certificate() {
        for r in RelationSchema::new(SchemaName::PCubic, 2).instantiate() {
            let d = r.max_word_len();
            let rels = RelationSchema::new(SchemaName::PCubic, 2).instantiate();
            let m = ideal_membership(&r, &rels, d).unwrap();
            assert!(m.certificate().unwrap().verify());
        }
    }

    #[test]
    fn normal_form_is_projection() {
        let rels = RelationSchema::new(SchemaName::Magic, 2).instantiate();
        let ideal = TruncatedIdeal::new(&rels, 2, false, 3).unwrap();
        let s = fs("u11u12u21 + 3 * u22 - u11");
        let nf = ideal.normal_form(&s).unwrap();
        assert_eq!(ideal.normal_form(&nf).unwrap(), nf);
        assert!(ideal.membership(&(&s - &nf)).unwrap().is_found());
    }

    #[test]
    fn tensor_membership() {
        let rels = vec![fs("PP - P")];
        let ideal = TruncatedIdeal::new(&rels, 1, true, 2).unwrap();
        let target = fs("PP ⊗ u11 - P ⊗ u11 + u11 ⊗ PP - u11 ⊗ P");
        let cert = ideal.membership(&target).unwrap();
        let cert = cert.certificate().unwrap();
        assert!(cert.verify());
        assert_eq!(cert.relations.len(), 2);
        assert_eq!(ideal.membership(&fs("P ⊗ u11")).unwrap(), Membership::NotFound);
    }

    #[test]
    fn too_large_is_reported() {
        let rels = RelationSchema::new(SchemaName::Orthogonal, 4).instantiate();
        assert!(matches!(TruncatedIdeal::new(&rels, 4, false, 8), Err(Error::TooLarge(_))));
    }
}
