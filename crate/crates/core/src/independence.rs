//! Joint distributions of independent families, the mixed-cumulant test and
//! classification of single-variable laws by which cumulant orders vanish.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cumulants::{cumulants_from_moments, moments_from_cumulants, CumulantKind, CumulantTable, MomentFunctional};
use crate::error::{Error, Result};
use crate::partitions::{BlockConstraint, FamilyTag, IndexWord};
use crate::rational::{format_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawClass {
    IidGeneral,
    Symmetric,
    ShiftedCentral,
    CenteredCentral,
}

impl LawClass {
    /// Block constraint of the partition family that characterizes the class.
    pub fn block_constraint(self) -> BlockConstraint {
        match self {
            LawClass::IidGeneral => BlockConstraint::Any,
            LawClass::Symmetric => BlockConstraint::Even,
            LawClass::ShiftedCentral => BlockConstraint::AtMostTwo,
            LawClass::CenteredCentral => BlockConstraint::ExactlyTwo,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DistributionClass {
    pub kind: CumulantKind,
    pub class: LawClass,
}

impl DistributionClass {
    pub fn family(&self) -> FamilyTag {
        FamilyTag::new(self.kind.lattice(), self.class.block_constraint())
    }

    /// Conventional name of the law, e.g. "centered semicircular".
    pub fn describe(&self) -> &'static str {
        use CumulantKind::*;
        use LawClass::*;
        match (self.kind, self.class) {
            (_, IidGeneral) => "identically distributed",
            (_, Symmetric) => "symmetric",
            (Classical, ShiftedCentral) => "Gaussian",
            (Free, ShiftedCentral) => "semicircular",
            (Boolean, ShiftedCentral) => "Bernoulli",
            (Classical, CenteredCentral) => "centered Gaussian",
            (Free, CenteredCentral) => "centered semicircular",
            (Boolean, CenteredCentral) => "centered Bernoulli",
        }
    }
}

impl fmt::Display for DistributionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ({})", self.kind, self.describe(), self.family())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Offender {
    pub word: IndexWord,
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceReport {
    pub kind: CumulantKind,
    pub max_order: usize,
    pub offenders: Vec<Offender>,
}

impl IndependenceReport {
    pub fn passed(&self) -> bool {
        self.offenders.is_empty()
    }
}

#[derive(Serialize)]
struct OffenderJson {
    word: Vec<usize>,
    value: String,
}

#[derive(Serialize)]
struct ReportJson {
    passed: bool,
    kind: CumulantKind,
    max_order: usize,
    offenders: Vec<OffenderJson>,
}

impl Serialize for IndependenceReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ReportJson {
            passed: self.passed(),
            kind: self.kind,
            max_order: self.max_order,
            offenders: self
                .offenders
                .iter()
                .map(|o| OffenderJson { word: o.word.letters().to_vec(), value: format_rational(&o.value) })
                .collect(),
        }
        .serialize(s)
    }
}

/// Joint moments of independent variables with the given marginals: the
/// joint cumulant of a constant word `(i,…,i)` is marginal `i`'s cumulant of
/// that order, every mixed cumulant is zero.
pub fn build_independent_moments(marginals: &[CumulantTable], kind: CumulantKind) -> Result<MomentFunctional> {
    let Some(first) = marginals.first() else {
        return Err(Error::IncompatibleTables("no marginals".into()));
    };
    let k_max = first.max_order();
    for m in marginals {
        if m.kind() != kind {
            return Err(Error::IncompatibleTables(format!("marginal of kind {} in a {kind} build", m.kind())));
        }
        if m.max_order() != k_max {
            return Err(Error::IncompatibleTables("marginals disagree on max order".into()));
        }
        if m.alphabet_size() != 1 {
            return Err(Error::IncompatibleTables("marginals must be single-variable tables".into()));
        }
    }
    let joint = CumulantTable::from_fn(kind, marginals.len(), k_max, |w| {
        if w.is_mixed() {
            Rational::zero()
        } else {
            marginals[w.letters()[0] - 1].diagonal(1, w.len())
        }
    });
    Ok(moments_from_cumulants(&joint))
}

/// Flags every word with at least two distinct letters whose cumulant
/// exceeds `tol` in absolute value.
pub fn test_mixed_vanishing(mom: &MomentFunctional, kind: CumulantKind, tol: &Rational) -> IndependenceReport {
    let cum = cumulants_from_moments(mom, kind);
    let offenders = cum
        .entries()
        .filter(|(w, v)| w.is_mixed() && v.abs() > *tol)
        .map(|(w, v)| Offender { word: w.clone(), value: v.clone() })
        .collect();
    IndependenceReport { kind, max_order: mom.max_order(), offenders }
}

/// Most specific class whose vanishing pattern the single-variable table
/// satisfies (up to `tol`): centered (only order 2), shifted (nothing above
/// order 2), symmetric (odd orders vanish), otherwise general.
pub fn classify_distribution(cum: &CumulantTable, tol: &Rational) -> Result<DistributionClass> {
    if cum.alphabet_size() != 1 {
        return Err(Error::IncompatibleTables("classification needs a single-variable table".into()));
    }
    let small = |k: usize| cum.diagonal(1, k).abs() <= *tol;
    let orders = 1..=cum.max_order();
    let class = if orders.clone().all(|k| k == 2 || small(k)) {
        LawClass::CenteredCentral
    } else if orders.clone().all(|k| k <= 2 || small(k)) {
        LawClass::ShiftedCentral
    } else if orders.clone().all(|k| k % 2 == 0 || small(k)) {
        LawClass::Symmetric
    } else {
        LawClass::IidGeneral
    };
    Ok(DistributionClass { kind: cum.kind(), class })
}

/// Classification of each letter's marginal taken from a joint cumulant table.
pub fn classify_marginals(cum: &CumulantTable, tol: &Rational) -> Vec<DistributionClass> {
    (1..=cum.alphabet_size())
        .map(|letter| {
            let values: Vec<Rational> = (1..=cum.max_order()).map(|k| cum.diagonal(letter, k)).collect();
            classify_distribution(&CumulantTable::single_variable(cum.kind(), &values), tol)
                .expect("single-variable table")
        })
        .collect()
}
