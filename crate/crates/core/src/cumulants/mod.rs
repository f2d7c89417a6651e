//! Moment functionals, cumulant tables and the three moment-cumulant
//! transforms (classical over all partitions, free over noncrossing ones,
//! boolean over interval ones).
//!
//! Words are position based: `X_i^2` is the word `(i, i)`. All arithmetic is
//! exact.

mod operator;

pub use operator::{
    eval_pi_block, eval_pi_nested, eval_pi_nested_with, operator_moment, BArg, BFunctional,
    BlockChoice, MatrixFunctionalSeq,
};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{
    enumerate_partitions, words_of_length, BlockConstraint, FamilyTag, IndexWord, Lattice,
    SetPartition,
};
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CumulantKind {
    Classical,
    Free,
    Boolean,
}

impl CumulantKind {
    pub const ALL: [CumulantKind; 3] =
        [CumulantKind::Classical, CumulantKind::Free, CumulantKind::Boolean];

    pub fn lattice(self) -> Lattice {
        match self {
            CumulantKind::Classical => Lattice::All,
            CumulantKind::Free => Lattice::Noncrossing,
            CumulantKind::Boolean => Lattice::Interval,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CumulantKind::Classical => "classical",
            CumulantKind::Free => "free",
            CumulantKind::Boolean => "boolean",
        }
    }
}

impl fmt::Display for CumulantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CumulantKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "classical" | "c" => Ok(CumulantKind::Classical),
            "free" | "f" => Ok(CumulantKind::Free),
            "boolean" | "b" => Ok(CumulantKind::Boolean),
            _ => Err(Error::Parse(format!("unknown cumulant kind {s:?}"))),
        }
    }
}

/// Sparse table over words of length `1..=max_order` with letters `1..=n`.
/// Absent entries are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
struct WordTable {
    n: usize,
    max_order: usize,
    entries: BTreeMap<IndexWord, Rational>,
}

impl WordTable {
    fn new(n: usize, max_order: usize) -> Self {
        WordTable { n, max_order, entries: BTreeMap::new() }
    }

    fn check(&self, w: &IndexWord) -> Result<()> {
        if w.is_empty() {
            return Err(Error::InvalidWord("the empty word is fixed".into()));
        }
        if w.len() > self.max_order || !w.within(self.n) {
            return Err(Error::InvalidWord(format!(
                "{w} outside alphabet {} / order {}",
                self.n, self.max_order
            )));
        }
        Ok(())
    }

    fn set(&mut self, w: IndexWord, v: Rational) -> Result<()> {
        self.check(&w)?;
        if v.is_zero() {
            self.entries.remove(&w);
        } else {
            self.entries.insert(w, v);
        }
        Ok(())
    }

    fn get(&self, w: &IndexWord) -> Rational {
        assert!(
            w.len() <= self.max_order && w.within(self.n),
            "word {w} outside table range (n = {}, K = {})",
            self.n,
            self.max_order
        );
        self.entries.get(w).cloned().unwrap_or_else(Rational::zero)
    }
}

/// Truncated joint distribution: values on all words up to `max_order`, with
/// the empty word fixed to 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentFunctional {
    table: WordTable,
}

impl MomentFunctional {
    /// All moments zero (apart from the unit).
    pub fn new(n: usize, max_order: usize) -> Self {
        MomentFunctional { table: WordTable::new(n, max_order) }
    }

    pub fn from_fn(n: usize, max_order: usize, f: impl Fn(&IndexWord) -> Rational) -> Self {
        let mut m = Self::new(n, max_order);
        for len in 1..=max_order {
            for w in words_of_length(n, len) {
                let v = f(&w);
                m.table.set(w, v).expect("word in range");
            }
        }
        m
    }

    pub fn alphabet_size(&self) -> usize {
        self.table.n
    }

    pub fn max_order(&self) -> usize {
        self.table.max_order
    }

    pub fn set(&mut self, w: IndexWord, v: Rational) -> Result<()> {
        self.table.set(w, v)
    }

    /// Value on `w`; the empty word gives 1. Panics when `w` is outside the
    /// table's alphabet or order.
    pub fn get(&self, w: &IndexWord) -> Rational {
        if w.is_empty() {
            return Rational::one();
        }
        self.table.get(w)
    }

    /// Nonzero entries, excluding the empty word.
    pub fn entries(&self) -> impl Iterator<Item = (&IndexWord, &Rational)> {
        self.table.entries.iter()
    }

    /// The same functional viewed on letters `1..=n'` only (`n' ≤ n`) and
    /// orders up to `K' ≤ K`.
    pub fn restrict(&self, n: usize, max_order: usize) -> MomentFunctional {
        assert!(n <= self.table.n && max_order <= self.table.max_order);
        let mut out = MomentFunctional::new(n, max_order);
        for (w, v) in self.entries() {
            if w.len() <= max_order && w.within(n) {
                out.table.entries.insert(w.clone(), v.clone());
            }
        }
        out
    }
}

/// Cumulants of one kind on all words up to `max_order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CumulantTable {
    kind: CumulantKind,
    table: WordTable,
}

impl CumulantTable {
    pub fn new(kind: CumulantKind, n: usize, max_order: usize) -> Self {
        CumulantTable { kind, table: WordTable::new(n, max_order) }
    }

    pub fn from_fn(
        kind: CumulantKind,
        n: usize,
        max_order: usize,
        f: impl Fn(&IndexWord) -> Rational,
    ) -> Self {
        let mut c = Self::new(kind, n, max_order);
        for len in 1..=max_order {
            for w in words_of_length(n, len) {
                let v = f(&w);
                c.table.set(w, v).expect("word in range");
            }
        }
        c
    }

    /// Single-variable table from its cumulant sequence `values[k-1] = c^(k)`.
    pub fn single_variable(kind: CumulantKind, values: &[Rational]) -> Self {
        Self::from_fn(kind, 1, values.len(), |w| values[w.len() - 1].clone())
    }

    pub fn kind(&self) -> CumulantKind {
        self.kind
    }

    pub fn alphabet_size(&self) -> usize {
        self.table.n
    }

    pub fn max_order(&self) -> usize {
        self.table.max_order
    }

    pub fn set(&mut self, w: IndexWord, v: Rational) -> Result<()> {
        self.table.set(w, v)
    }

    /// Panics when `w` is empty or outside the table's range.
    pub fn get(&self, w: &IndexWord) -> Rational {
        assert!(!w.is_empty(), "cumulants are not defined on the empty word");
        self.table.get(w)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&IndexWord, &Rational)> {
        self.table.entries.iter()
    }

    /// Value of the order-`k` cumulant of letter `letter` (the constant word).
    pub fn diagonal(&self, letter: usize, k: usize) -> Rational {
        self.get(&IndexWord::from(vec![letter; k]))
    }
}

/// Partitions of each order `0..=max_order` in one lattice, computed once.
pub(crate) struct LatticeCache {
    by_order: Vec<Vec<SetPartition>>,
}

impl LatticeCache {
    pub(crate) fn new(lattice: Lattice, max_order: usize) -> Self {
        let fam = FamilyTag::new(lattice, BlockConstraint::Any);
        LatticeCache {
            by_order: (0..=max_order).map(|k| enumerate_partitions(k, fam)).collect(),
        }
    }

    pub(crate) fn of_order(&self, k: usize) -> &[SetPartition] {
        &self.by_order[k]
    }
}

fn product_over_blocks(table: &CumulantTable, pi: &SetPartition, w: &IndexWord) -> Rational {
    let mut acc = Rational::one();
    for block in pi.blocks() {
        let v = table.get(&w.restrict(block));
        if v.is_zero() {
            return v;
        }
        acc *= v;
    }
    acc
}

/// `ρ^(π)(w)`: the product over blocks `V` of `table[w|V]`.
pub fn eval_pi_scalar(table: &CumulantTable, pi: &SetPartition, w: &IndexWord) -> Result<Rational> {
    if pi.ground_size() != w.len() {
        return Err(Error::GroundSizeMismatch(pi.ground_size(), w.len()));
    }
    let lattice = table.kind.lattice();
    if !pi.is_in_lattice(lattice) {
        return Err(Error::LatticeMismatch {
            partition: pi.to_string(),
            lattice: lattice.to_string(),
        });
    }
    if w.len() > table.max_order() || !w.within(table.alphabet_size()) {
        return Err(Error::InvalidWord(format!("{w} outside table range")));
    }
    Ok(product_over_blocks(table, pi, w))
}

/// Moments from cumulants: `μ(w) = Σ_{π ∈ L(|w|)} ρ^(π)(w)` with `L` the
/// table kind's lattice.
pub fn moments_from_cumulants(cum: &CumulantTable) -> MomentFunctional {
    let (n, k_max) = (cum.alphabet_size(), cum.max_order());
    let cache = LatticeCache::new(cum.kind.lattice(), k_max);
    let mut mom = MomentFunctional::new(n, k_max);
    for len in 1..=k_max {
        let words: Vec<IndexWord> = words_of_length(n, len).collect();
        let values: Vec<Rational> = words
            .par_iter()
            .map(|w| cache.of_order(len).iter().map(|pi| product_over_blocks(cum, pi, w)).sum())
            .collect();
        for (w, v) in words.into_iter().zip(values) {
            mom.set(w, v).expect("word in range");
        }
    }
    mom
}

/// Inverse transform, resolved by increasing order:
/// `c(w) = μ(w) − Σ_{π ≠ 1_k} ρ^(π)(w)`.
pub fn cumulants_from_moments(mom: &MomentFunctional, kind: CumulantKind) -> CumulantTable {
    let (n, k_max) = (mom.alphabet_size(), mom.max_order());
    let cache = LatticeCache::new(kind.lattice(), k_max);
    let mut cum = CumulantTable::new(kind, n, k_max);
    // words of one length only read cumulants of shorter words
    for len in 1..=k_max {
        let words: Vec<IndexWord> = words_of_length(n, len).collect();
        let values: Vec<Rational> = words
            .par_iter()
            .map(|w| {
                let mut v = mom.get(w);
                for pi in cache.of_order(len) {
                    if pi.num_blocks() > 1 {
                        v -= product_over_blocks(&cum, pi, w);
                    }
                }
                v
            })
            .collect();
        for (w, v) in words.into_iter().zip(values) {
            cum.set(w, v).expect("word in range");
        }
    }
    cum
}

/// One `{word, num, den}` record of the table file format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub word: Vec<usize>,
    pub num: i64,
    pub den: i64,
}

/// On-disk form shared by moment and cumulant tables. Moment files carry
/// `"kind": "moments"`; cumulant files name their kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableFile {
    pub kind: String,
    pub n: usize,
    #[serde(rename = "K")]
    pub max_order: usize,
    pub entries: Vec<TableEntry>,
}

pub const MOMENTS_KIND: &str = "moments";

fn entries_to_file(
    kind: &str,
    n: usize,
    max_order: usize,
    entries: &BTreeMap<IndexWord, Rational>,
) -> Result<TableFile> {
    let entries = entries
        .iter()
        .map(|(w, v)| {
            let (num, den) = rational::to_i64_pair(v).ok_or_else(|| {
                Error::Parse(format!("value of {w} does not fit 64-bit integers"))
            })?;
            Ok(TableEntry { word: w.letters().to_vec(), num, den })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TableFile { kind: kind.to_string(), n, max_order, entries })
}

fn file_to_entries(file: &TableFile, table: &mut WordTable) -> Result<()> {
    for e in &file.entries {
        if e.word.is_empty() {
            return Err(Error::InvalidWord("the empty word must not appear".into()));
        }
        if e.den == 0 {
            return Err(Error::Parse(format!("zero denominator at {:?}", e.word)));
        }
        let w = IndexWord::new(e.word.clone())?;
        if table.entries.contains_key(&w) {
            return Err(Error::Parse(format!("duplicate entry for {w}")));
        }
        table.set(w, rational::ratio(e.num, e.den))?;
    }
    Ok(())
}

impl MomentFunctional {
    pub fn to_file(&self) -> Result<TableFile> {
        entries_to_file(MOMENTS_KIND, self.table.n, self.table.max_order, &self.table.entries)
    }

    pub fn from_file(file: &TableFile) -> Result<Self> {
        if file.kind != MOMENTS_KIND {
            return Err(Error::Parse(format!(
                "expected a moment table, found kind {:?}",
                file.kind
            )));
        }
        let mut m = MomentFunctional::new(file.n, file.max_order);
        file_to_entries(file, &mut m.table)?;
        Ok(m)
    }
}

impl CumulantTable {
    pub fn to_file(&self) -> Result<TableFile> {
        entries_to_file(self.kind.as_str(), self.table.n, self.table.max_order, &self.table.entries)
    }

    pub fn from_file(file: &TableFile) -> Result<Self> {
        let kind: CumulantKind = file.kind.parse()?;
        let mut c = CumulantTable::new(kind, file.n, file.max_order);
        file_to_entries(file, &mut c.table)?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn w(v: &[usize]) -> IndexWord {
        IndexWord::from(v.to_vec())
    }

    fn p(s: &str) -> SetPartition {
        s.parse().unwrap()
    }

    #[test]
    fn eval_pi_scalar_examples() {
        let c = CumulantTable::single_variable(CumulantKind::Classical, &[int(1), int(2), int(0)]);
        assert_eq!(eval_pi_scalar(&c, &p("1 2|3"), &w(&[1, 1, 1])).unwrap(), int(2));
        assert_eq!(eval_pi_scalar(&c, &p("1|2|3"), &w(&[1, 1, 1])).unwrap(), int(1));
        let b = CumulantTable::single_variable(
            CumulantKind::Boolean,
            &[int(0), int(1), int(0), int(0)],
        );
        assert_eq!(eval_pi_scalar(&b, &p("1 2|3 4"), &w(&[1, 1, 1, 1])).unwrap(), int(1));
    }

    #[test]
    fn eval_pi_scalar_rejects_lattice_mismatch() {
        let b = CumulantTable::single_variable(CumulantKind::Boolean, &[int(1), int(1), int(1)]);
        assert!(matches!(
            eval_pi_scalar(&b, &p("1 3|2"), &w(&[1, 1, 1])),
            Err(Error::LatticeMismatch { .. })
        ));
        let f = CumulantTable::single_variable(CumulantKind::Free, &vec![int(1); 4]);
        assert!(eval_pi_scalar(&f, &p("1 3|2 4"), &w(&[1, 1, 1, 1])).is_err());
        let c = CumulantTable::single_variable(CumulantKind::Classical, &vec![int(1); 4]);
        assert_eq!(eval_pi_scalar(&c, &p("1 3|2 4"), &w(&[1, 1, 1, 1])).unwrap(), int(1));
        assert!(eval_pi_scalar(&c, &p("1 2"), &w(&[1])).is_err());
    }

    fn central_moments(kind: CumulantKind, k_max: usize) -> Vec<Rational> {
        let mut vals = vec![int(0); k_max];
        vals[1] = int(1);
        let m = moments_from_cumulants(&CumulantTable::single_variable(kind, &vals));
        (1..=k_max).map(|k| m.get(&w(&vec![1; k]))).collect()
    }

    #[test]
    fn central_laws() {
        let free = central_moments(CumulantKind::Free, 6);
        assert_eq!([&free[1], &free[3], &free[5]], [&int(1), &int(2), &int(5)]);
        let classical = central_moments(CumulantKind::Classical, 6);
        assert_eq!([&classical[3], &classical[5]], [&int(3), &int(15)]);
        let boolean = central_moments(CumulantKind::Boolean, 6);
        assert_eq!([&boolean[3], &boolean[5]], [&int(1), &int(1)]);
        assert!(free[0].is_zero() && free[2].is_zero() && free[4].is_zero());
    }

    #[test]
    fn boolean_third_moment() {
        // I(3) = {123}, {12|3}, {1|23}, {1|2|3}
        let (b1, b2, b3) = (ratio(2, 3), int(5), ratio(-1, 7));
        let c = CumulantTable::single_variable(
            CumulantKind::Boolean,
            &[b1.clone(), b2.clone(), b3.clone()],
        );
        let m = moments_from_cumulants(&c);
        let expected = &b3 + &(int(2) * &b2 * &b1) + &(&b1 * &b1 * &b1);
        assert_eq!(m.get(&w(&[1, 1, 1])), expected);
    }

    #[test]
    fn point_mass_has_only_first_cumulant() {
        let a = ratio(3, 2);
        let m = MomentFunctional::from_fn(1, 4, |word| {
            let mut v = int(1);
            for _ in 0..word.len() {
                v *= &a;
            }
            v
        });
        let c = cumulants_from_moments(&m, CumulantKind::Classical);
        assert_eq!(c.diagonal(1, 1), a);
        for k in 2..=4 {
            assert!(c.diagonal(1, k).is_zero());
        }
    }

    #[test]
    fn bernoulli_moments_give_one_boolean_cumulant() {
        let m = MomentFunctional::from_fn(1, 2, |word| if word.len() == 2 { int(1) } else { int(0) });
        let b = cumulants_from_moments(&m, CumulantKind::Boolean);
        assert_eq!(b.diagonal(1, 2), int(1));
        assert!(b.diagonal(1, 1).is_zero());
    }

    #[test]
    fn first_order_agreement() {
        let m = MomentFunctional::from_fn(2, 3, |word| int(word.letters().iter().sum::<usize>() as i64));
        for kind in CumulantKind::ALL {
            let c = cumulants_from_moments(&m, kind);
            assert_eq!(c.get(&w(&[1])), m.get(&w(&[1])));
            assert_eq!(c.get(&w(&[2])), m.get(&w(&[2])));
        }
    }

    #[test]
    fn file_round_trip_and_validation() {
        let c = CumulantTable::single_variable(CumulantKind::Free, &[int(0), ratio(1, 2)]);
        let file = c.to_file().unwrap();
        assert_eq!(file.kind, "free");
        assert_eq!(CumulantTable::from_file(&file).unwrap(), c);
        let json = serde_json::to_string(&file).unwrap();
        assert!(json.contains("\"K\":2"));

        let mut bad = file.clone();
        bad.entries.push(TableEntry { word: vec![], num: 1, den: 1 });
        assert!(CumulantTable::from_file(&bad).is_err());
        let mut bad = file.clone();
        bad.entries[0].word = vec![2, 2];
        assert!(CumulantTable::from_file(&bad).is_err());
        assert!(MomentFunctional::from_file(&file).is_err());
    }
}
