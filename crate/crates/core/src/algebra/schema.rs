//! Named relation schemas on the entries of an `n × n` matrix `u` and,
//! for the boolean variants, a projection `P`.

use std::fmt;
use std::str::FromStr;

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::sum::FormalSum;
use super::word::{Generator, Word};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemaName {
    Orthogonal,
    Magic,
    Cubic,
    Bistochastic,
    MagicPrime,
    BistochasticPrime,
    POrthogonal,
    PMagic,
    PCubic,
    PBistochastic,
    PPrime,
    PMagicPrime,
    PBistochasticPrime,
}

impl SchemaName {
    pub const ALL: [SchemaName; 13] = [
        SchemaName::Orthogonal,
        SchemaName::Magic,
        SchemaName::Cubic,
        SchemaName::Bistochastic,
        SchemaName::MagicPrime,
        SchemaName::BistochasticPrime,
        SchemaName::POrthogonal,
        SchemaName::PMagic,
        SchemaName::PCubic,
        SchemaName::PBistochastic,
        SchemaName::PPrime,
        SchemaName::PMagicPrime,
        SchemaName::PBistochasticPrime,
    ];

    /// Whether the schema uses the projection generator `P`.
    pub fn is_boolean(self) -> bool {
        use SchemaName::*;
        matches!(self, POrthogonal | PMagic | PCubic | PBistochastic | PPrime | PMagicPrime | PBistochasticPrime)
    }

    pub fn as_str(self) -> &'static str {
        use SchemaName::*;
        match self {
            Orthogonal => "orthogonal",
            Magic => "magic",
            Cubic => "cubic",
            Bistochastic => "bistochastic",
            MagicPrime => "magic-prime",
            BistochasticPrime => "bistochastic-prime",
            POrthogonal => "p-orthogonal",
            PMagic => "p-magic",
            PCubic => "p-cubic",
            PBistochastic => "p-bistochastic",
            PPrime => "p-prime",
            PMagicPrime => "p-magic-prime",
            PBistochasticPrime => "p-bistochastic-prime",
        }
    }
}

impl fmt::Display for SchemaName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemaName {
    type Err = Error;

    /// Accepts the kebab-case names, case-insensitively, with `_` for `-`
    /// and a trailing `'` for `-prime`.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-").replace('\'', "-prime");
        SchemaName::ALL
            .into_iter()
            .find(|n| n.as_str() == norm)
            .ok_or_else(|| Error::Parse(format!("unknown schema {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RelationSchema {
    pub name: SchemaName,
    pub n: usize,
}

impl RelationSchema {
    pub fn new(name: SchemaName, n: usize) -> Self {
        assert!(n >= 1, "matrix size must be positive");
        RelationSchema { name, n }
    }

    pub fn uses_projection(&self) -> bool {
        self.name.is_boolean()
    }

    /// Defining relations, each written as `lhs − rhs`, in a fixed order with
    /// zero and repeated entries removed.
    pub fn instantiate(&self) -> Vec<FormalSum> {
        let n = self.n;
        let b = Builder { n };
        let mut out = Vec::new();
        use SchemaName::*;
        match self.name {
            Orthogonal => b.orthogonal(&mut out, false),
            Magic => {
                b.orthogonal(&mut out, false);
                b.idempotent(&mut out);
            }
            Cubic => {
                b.orthogonal(&mut out, false);
                b.cubic(&mut out, false);
            }
            Bistochastic => {
                b.orthogonal(&mut out, false);
                b.stochastic(&mut out, false);
            }
            MagicPrime => {
                b.orthogonal(&mut out, false);
                b.cubic(&mut out, false);
                b.equal_sums(&mut out, false);
            }
            BistochasticPrime => {
                b.orthogonal(&mut out, false);
                b.equal_sums(&mut out, false);
            }
            POrthogonal => b.orthogonal(&mut out, true),
            PMagic => {
                b.orthogonal(&mut out, true);
                b.idempotent(&mut out);
            }
            PCubic => {
                b.orthogonal(&mut out, true);
                b.cubic(&mut out, true);
            }
            PBistochastic => {
                b.orthogonal(&mut out, true);
                b.stochastic(&mut out, true);
            }
            PPrime => b.equal_sums(&mut out, true),
            PMagicPrime => {
                b.orthogonal(&mut out, true);
                b.cubic(&mut out, true);
                b.equal_sums(&mut out, true);
            }
            PBistochasticPrime => {
                b.orthogonal(&mut out, true);
                b.equal_sums(&mut out, true);
            }
        }
        if self.uses_projection() {
            let p = FormalSum::generator(Generator::P);
            out.push(&p.mul(&p) - &p);
        }
        dedup(out)
    }
}

fn dedup(list: Vec<FormalSum>) -> Vec<FormalSum> {
    let mut seen = std::collections::HashSet::new();
    list.into_iter().filter(|r| !r.is_zero() && seen.insert(r.clone())).collect()
}

struct Builder {
    n: usize,
}

impl Builder {
    fn u(&self, i: usize, j: usize) -> Word {
        Word::single(Generator::u(i, j))
    }

    /// Word followed by `P` when `with_p`.
    fn tail(&self, w: Word, with_p: bool) -> Word {
        if with_p {
            w.concat(&Word::single(Generator::P))
        } else {
            w
        }
    }

    /// `1`, or `P` for the P-suffixed identities.
    fn one(&self, with_p: bool) -> FormalSum {
        FormalSum::word(self.tail(Word::unit(), with_p))
    }

    fn orthogonal(&self, out: &mut Vec<FormalSum>, with_p: bool) {
        let n = self.n;
        for transpose in [false, true] {
            for i in 1..=n {
                for j in 1..=n {
                    let mut r = FormalSum::zero(1);
                    for k in 1..=n {
                        let w = if transpose {
                            self.u(k, i).concat(&self.u(k, j))
                        } else {
                            self.u(i, k).concat(&self.u(j, k))
                        };
                        r.add_term(vec![self.tail(w, with_p)], Rational::one());
                    }
                    if i == j {
                        r = &r - &self.one(with_p);
                    }
                    out.push(r);
                }
            }
        }
    }

    fn idempotent(&self, out: &mut Vec<FormalSum>) {
        for i in 1..=self.n {
            for j in 1..=self.n {
                let e = FormalSum::word(self.u(i, j));
                out.push(&e.mul(&e) - &e);
            }
        }
    }

    /// Products of distinct entries in one row, then in one column.
    fn cubic(&self, out: &mut Vec<FormalSum>, with_p: bool) {
        let n = self.n;
        for column in [false, true] {
            for i in 1..=n {
                for j in 1..=n {
                    for k in (1..=n).filter(|&k| k != j) {
                        let w = if column {
                            self.u(j, i).concat(&self.u(k, i))
                        } else {
                            self.u(i, j).concat(&self.u(i, k))
                        };
                        out.push(FormalSum::word(self.tail(w, with_p)));
                    }
                }
            }
        }
    }

    fn row_sum(&self, i: usize, with_p: bool) -> FormalSum {
        FormalSum::from_terms(1, (1..=self.n).map(|j| (vec![self.tail(self.u(i, j), with_p)], Rational::one())))
    }

    fn column_sum(&self, j: usize, with_p: bool) -> FormalSum {
        FormalSum::from_terms(1, (1..=self.n).map(|i| (vec![self.tail(self.u(i, j), with_p)], Rational::one())))
    }

    fn stochastic(&self, out: &mut Vec<FormalSum>, with_p: bool) {
        for i in 1..=self.n {
            out.push(&self.row_sum(i, with_p) - &self.one(with_p));
        }
        for j in 1..=self.n {
            out.push(&self.column_sum(j, with_p) - &self.one(with_p));
        }
    }

    /// Every row sum equals every column sum.
    fn equal_sums(&self, out: &mut Vec<FormalSum>, with_p: bool) {
        for i in 1..=self.n {
            for i2 in 1..=self.n {
                out.push(&self.row_sum(i, with_p) - &self.column_sum(i2, with_p));
            }
        }
    }
}

/// Which tensor factor a degree-1 relation is placed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `r ⊗ 1` or `1 ⊗ r` for every relation.
pub fn tensor_embed(relations: &[FormalSum], side: Side) -> Result<Vec<FormalSum>> {
    let pos = match side {
        Side::Left => 0,
        Side::Right => 1,
    };
    relations.iter().map(|r| r.embed(pos, 2)).collect()
}

/// Image of a generator under the comultiplication
/// `u_{ij} ↦ Σ_k u_{ik} ⊗ u_{kj}`, `P ↦ P ⊗ P`.
pub fn delta_image(g: Generator, n: usize) -> FormalSum {
    match g {
        Generator::P => FormalSum::monomial(vec![Word::single(Generator::P); 2], Rational::one()),
        Generator::U(i, j) => FormalSum::from_terms(
            2,
            (1..=n as u16).map(|k| {
                (vec![Word::single(Generator::U(i, k)), Word::single(Generator::U(k, j))], Rational::one())
            }),
        ),
    }
}

/// Image of a degree-1 sum under the comultiplication (a homomorphism).
pub fn delta(s: &FormalSum, n: usize) -> Result<FormalSum> {
    s.substitute(2, |g| delta_image(g, n))
}
