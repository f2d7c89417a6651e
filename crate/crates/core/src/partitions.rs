//! Set partitions of `{1..k}`, the twelve partition families and index words.
//!
//! A [`SetPartition`] is always held in canonical form: blocks ordered by
//! their minimum, elements ascending inside each block. Equality, hashing and
//! ordering all go through that form, so partitions can key tables directly.
//!
//! Enumeration walks restricted-growth strings in lexicographic order and
//! filters by family; the order is stable and part of the crate's contract.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Practical cap on `k` for enumerating the full lattice (Bell(14) ≈ 1.9e8).
pub const MAX_ENUMERATION_SIZE: usize = 14;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    size: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Builds a partition from arbitrary blocks over `{1..size}`; the blocks are
    /// brought into canonical order.
    pub fn from_blocks(size: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; size + 1];
        let mut blocks = blocks;
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            block.sort_unstable();
            for &x in block.iter() {
                if x == 0 || x > size {
                    return Err(Error::InvalidPartition(format!(
                        "element {x} outside 1..={size}"
                    )));
                }
                if seen[x] {
                    return Err(Error::InvalidPartition(format!("element {x} repeated")));
                }
                seen[x] = true;
            }
        }
        if let Some(missing) = (1..=size).find(|&x| !seen[x]) {
            return Err(Error::InvalidPartition(format!("element {missing} not covered")));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(SetPartition { size, blocks })
    }

    /// Partition whose blocks are the level sets of `labels` (positions 1-based
    /// in the result). Any labelling works, not only restricted-growth strings.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut reps: Vec<&T> = Vec::new();
        for (pos, label) in labels.iter().enumerate() {
            match reps.iter().position(|r| *r == label) {
                Some(b) => blocks[b].push(pos + 1),
                None => {
                    reps.push(label);
                    blocks.push(vec![pos + 1]);
                }
            }
        }
        // first-occurrence order is already ordered by minimum
        SetPartition { size: labels.len(), blocks }
    }

    pub fn empty() -> Self {
        SetPartition { size: 0, blocks: Vec::new() }
    }

    /// The finest partition `{{1},…,{k}}`.
    pub fn discrete(k: usize) -> Self {
        SetPartition { size: k, blocks: (1..=k).map(|x| vec![x]).collect() }
    }

    /// The one-block partition `1_k`.
    pub fn single_block(k: usize) -> Self {
        if k == 0 {
            return Self::empty();
        }
        SetPartition { size: k, blocks: vec![(1..=k).collect()] }
    }

    pub fn ground_size(&self) -> usize {
        self.size
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block index (0-based, canonical order) of every position.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.size];
        for (b, block) in self.blocks.iter().enumerate() {
            for &x in block {
                labels[x - 1] = b;
            }
        }
        labels
    }

    pub fn is_noncrossing(&self) -> bool {
        // For consecutive elements a < b of one block, every element strictly
        // between them must belong to a block lying entirely inside (a, b).
        let labels = self.labels();
        for block in &self.blocks {
            for pair in block.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                for x in a + 1..b {
                    let inner = &self.blocks[labels[x - 1]];
                    if inner[0] < a || *inner.last().unwrap() > b {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn is_interval(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.last().unwrap() - b[0] + 1 == b.len())
    }

    pub fn is_in_lattice(&self, lattice: Lattice) -> bool {
        match lattice {
            Lattice::All => true,
            Lattice::Noncrossing => self.is_noncrossing(),
            Lattice::Interval => self.is_interval(),
        }
    }

    pub fn in_family(&self, family: FamilyTag) -> bool {
        self.is_in_lattice(family.lattice)
            && self.blocks.iter().all(|b| family.blocks.admits(b.len()))
    }

    /// `self ≤ other` in the refinement order.
    pub fn refines(&self, other: &SetPartition) -> Result<bool> {
        if self.size != other.size {
            return Err(Error::GroundSizeMismatch(self.size, other.size));
        }
        let coarse = other.labels();
        Ok(self
            .blocks
            .iter()
            .all(|b| b.iter().all(|&x| coarse[x - 1] == coarse[b[0] - 1])))
    }

    /// `self` on the first points followed by `other` shifted past them.
    pub fn concatenate(&self, other: &SetPartition) -> SetPartition {
        let shift = self.size;
        let mut blocks = self.blocks.clone();
        blocks.extend(
            other
                .blocks
                .iter()
                .map(|b| b.iter().map(|x| x + shift).collect::<Vec<_>>()),
        );
        SetPartition { size: self.size + other.size, blocks }
    }

    /// Blocks that are contiguous runs `l+1..=l+s`.
    pub fn interval_blocks(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.blocks
            .iter()
            .filter(|b| b.last().unwrap() - b[0] + 1 == b.len())
    }

    /// Removes one block and renumbers the remaining points to `1..k-|block|`.
    pub fn remove_block(&self, index: usize) -> SetPartition {
        let removed = &self.blocks[index];
        let mut keep = vec![true; self.size + 1];
        for &x in removed {
            keep[x] = false;
        }
        let mut new_pos = vec![0; self.size + 1];
        let mut next = 0;
        for x in 1..=self.size {
            if keep[x] {
                next += 1;
                new_pos[x] = next;
            }
        }
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .filter(|&(b, _)| b != index)
            .map(|(_, blk)| blk.iter().map(|&x| new_pos[x]).collect())
            .collect();
        SetPartition { size: next, blocks }
    }
}

impl fmt::Display for SetPartition {
    /// Text form: blocks as space-separated integers joined by `|`, e.g. `1 3|2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for (j, x) in block.iter().enumerate() {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for SetPartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::empty());
        }
        let mut blocks = Vec::new();
        for part in s.split('|') {
            let block = part
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad partition element {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push(block);
        }
        let size = blocks.iter().map(Vec::len).sum();
        SetPartition::from_blocks(size, blocks)
    }
}

impl Serialize for SetPartition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SetPartition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lattice {
    All,
    Noncrossing,
    Interval,
}

impl Lattice {
    fn prefix(self) -> &'static str {
        match self {
            Lattice::All => "p",
            Lattice::Noncrossing => "nc",
            Lattice::Interval => "i",
        }
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lattice::All => "all",
            Lattice::Noncrossing => "noncrossing",
            Lattice::Interval => "interval",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockConstraint {
    Any,
    Even,
    AtMostTwo,
    ExactlyTwo,
}

impl BlockConstraint {
    pub fn admits(self, block_size: usize) -> bool {
        match self {
            BlockConstraint::Any => true,
            BlockConstraint::Even => block_size.is_multiple_of(2),
            BlockConstraint::AtMostTwo => block_size <= 2,
            BlockConstraint::ExactlyTwo => block_size == 2,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            BlockConstraint::Any => "",
            BlockConstraint::Even => "_h",
            BlockConstraint::AtMostTwo => "_b",
            BlockConstraint::ExactlyTwo => "_2",
        }
    }
}

/// One of the twelve families `P, P_h, P_b, P_2, NC, …, I_2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FamilyTag {
    pub lattice: Lattice,
    pub blocks: BlockConstraint,
}

impl FamilyTag {
    pub const fn new(lattice: Lattice, blocks: BlockConstraint) -> Self {
        FamilyTag { lattice, blocks }
    }

    pub fn all_families() -> impl Iterator<Item = FamilyTag> {
        [Lattice::All, Lattice::Noncrossing, Lattice::Interval]
            .into_iter()
            .flat_map(|l| {
                [
                    BlockConstraint::Any,
                    BlockConstraint::Even,
                    BlockConstraint::AtMostTwo,
                    BlockConstraint::ExactlyTwo,
                ]
                .into_iter()
                .map(move |b| FamilyTag::new(l, b))
            })
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.lattice.prefix(), self.blocks.suffix())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    /// Accepts `p`/`all`, `nc`, `i`/`interval`, optionally followed by
    /// `_h`, `_b` or `_2` (the separator may be omitted or written as `-`).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase().replace('-', "_");
        let (head, tail) = match lower.split_once('_') {
            Some((h, t)) => (h.to_string(), t.to_string()),
            None => {
                let split = lower
                    .find(|c: char| c.is_ascii_digit() || c == 'h' || c == 'b')
                    .filter(|&i| i > 0);
                match split {
                    Some(i) if !matches!(&lower[..], "all") => {
                        (lower[..i].to_string(), lower[i..].to_string())
                    }
                    _ => (lower.clone(), String::new()),
                }
            }
        };
        let lattice = match head.as_str() {
            "p" | "all" => Lattice::All,
            "nc" | "noncrossing" => Lattice::Noncrossing,
            "i" | "interval" => Lattice::Interval,
            _ => return Err(Error::Parse(format!("unknown partition family {s:?}"))),
        };
        let blocks = match tail.as_str() {
            "" | "any" => BlockConstraint::Any,
            "h" | "even" => BlockConstraint::Even,
            "b" | "at_most_two" => BlockConstraint::AtMostTwo,
            "2" | "pair" | "exactly_two" => BlockConstraint::ExactlyTwo,
            _ => return Err(Error::Parse(format!("unknown block constraint in {s:?}"))),
        };
        Ok(FamilyTag { lattice, blocks })
    }
}

impl Serialize for FamilyTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FamilyTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Visits every restricted-growth string of length `k` in lexicographic order.
fn for_each_rgs(k: usize, mut visit: impl FnMut(&[usize])) {
    if k == 0 {
        visit(&[]);
        return;
    }
    let mut rgs = vec![0usize; k];
    // max_prefix[i] = max(rgs[0..i])
    let mut max_prefix = vec![0usize; k];
    loop {
        visit(&rgs);
        // find the rightmost position that can be incremented
        let mut i = k - 1;
        loop {
            if i == 0 {
                return;
            }
            if rgs[i] <= max_prefix[i] {
                break;
            }
            i -= 1;
        }
        rgs[i] += 1;
        let m = max_prefix[i].max(rgs[i]);
        for j in i + 1..k {
            rgs[j] = 0;
            max_prefix[j] = m;
        }
    }
}

/// The members of `D(k)` for the given family, in restricted-growth-string
/// lexicographic order.
pub fn enumerate_partitions(k: usize, family: FamilyTag) -> Vec<SetPartition> {
    let mut out = Vec::new();
    match family.lattice {
        // Interval partitions are compositions of k; enumerating them through
        // the full lattice would be needlessly exponential in Bell(k).
        Lattice::Interval if k > 0 => {
            for mask in 0..(1u64 << (k - 1)) {
                let mut labels = Vec::with_capacity(k);
                let mut label = 0;
                labels.push(0);
                for pos in 1..k {
                    if mask >> (k - 1 - pos) & 1 == 1 {
                        label += 1;
                    }
                    labels.push(label);
                }
                let p = SetPartition::from_labels(&labels);
                if p.in_family(family) {
                    out.push(p);
                }
            }
            out.sort_by_key(SetPartition::labels);
        }
        _ => for_each_rgs(k, |rgs| {
            let p = SetPartition::from_labels(rgs);
            if p.in_family(family) {
                out.push(p);
            }
        }),
    }
    out
}

/// Multi-index `(i_1,…,i_k)` with letters in `1..=n`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexWord(Vec<usize>);

impl IndexWord {
    pub fn new(letters: Vec<usize>) -> Result<Self> {
        if letters.contains(&0) {
            return Err(Error::InvalidWord("letters are 1-based".into()));
        }
        Ok(IndexWord(letters))
    }

    pub fn empty() -> Self {
        IndexWord(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_letter(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn within(&self, n: usize) -> bool {
        self.max_letter() <= n
    }

    /// Positions `s`, `t` share a block iff `i_s = i_t`.
    pub fn kernel(&self) -> SetPartition {
        SetPartition::from_labels(&self.0)
    }

    pub fn concat(&self, other: &IndexWord) -> IndexWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        IndexWord(v)
    }

    /// Letters at the given 1-based positions.
    pub fn restrict(&self, positions: &[usize]) -> IndexWord {
        IndexWord(positions.iter().map(|&p| self.0[p - 1]).collect())
    }

    /// True when the word uses at least two distinct letters.
    pub fn is_mixed(&self) -> bool {
        self.0.windows(2).any(|w| w[0] != w[1])
    }

    pub fn map_letters(&self, f: impl Fn(usize) -> usize) -> IndexWord {
        IndexWord(self.0.iter().map(|&x| f(x)).collect())
    }
}

impl From<Vec<usize>> for IndexWord {
    /// Panics on a zero letter; use [`IndexWord::new`] for untrusted input.
    fn from(v: Vec<usize>) -> Self {
        IndexWord::new(v).expect("index words use 1-based letters")
    }
}

impl fmt::Display for IndexWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// All words of exactly `len` letters over `1..=n`, lexicographic.
pub fn words_of_length(n: usize, len: usize) -> impl Iterator<Item = IndexWord> {
    let total = if n == 0 && len > 0 { 0 } else { n.pow(len as u32) };
    (0..total).map(move |mut code| {
        let mut v = vec![0; len];
        for slot in v.iter_mut().rev() {
            *slot = code % n + 1;
            code /= n;
        }
        IndexWord(v)
    })
}

/// All nonempty words of length `1..=max_len` over `1..=n`.
pub fn words_up_to(n: usize, max_len: usize) -> impl Iterator<Item = IndexWord> {
    (1..=max_len).flat_map(move |len| words_of_length(n, len))
}
