//! Batch verifications built on bounded ideal membership: closure of the
//! relations under the comultiplication, the vanishing identities for the
//! boolean families and containments between presentations.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use serde::Serialize;

use super::ideal::{Membership, MembershipCertificate, TruncatedIdeal};
use super::repr::{find_refutation, standard_representations, Assignment};
use super::schema::{delta, RelationSchema, SchemaName};
use super::sum::FormalSum;
use super::word::{u_product, Generator, Word};
use crate::error::{Error, Result};
use crate::partitions::{BlockConstraint, FamilyTag, IndexWord, Lattice, SetPartition};
use crate::rational::{format_rational, Rational};

/// Truncated ideals shared across many targets, keyed by schema and degree.
#[derive(Default)]
pub struct IdealCache {
    ideals: Mutex<HashMap<(RelationSchema, usize), Arc<TruncatedIdeal>>>,
}

impl IdealCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, schema: RelationSchema, degree: usize) -> Result<Arc<TruncatedIdeal>> {
        if let Some(i) = self.ideals.lock().unwrap().get(&(schema, degree)) {
            return Ok(Arc::clone(i));
        }
        let ideal = Arc::new(TruncatedIdeal::new(
            &schema.instantiate(),
            schema.n,
            schema.uses_projection(),
            degree,
        )?);
        self.ideals.lock().unwrap().insert((schema, degree), Arc::clone(&ideal));
        Ok(ideal)
    }
}

/// Result of deciding one target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Certified(MembershipCertificate),
    /// Nonzero under a representation satisfying the relations: definitely
    /// not in the ideal.
    Refuted { representation: String, value: Rational },
    /// No certificate up to `max_degree`, and no refutation found.
    NotFound { max_degree: usize },
}

impl Outcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, Outcome::Certified(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Outcome::Refuted { .. })
    }
}

/// Three-valued summary of a batch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    /// `pass` if every outcome is certified, `fail` if any is refuted.
    pub fn of<'a>(outcomes: impl IntoIterator<Item = &'a Outcome>) -> Status {
        let mut status = Status::Pass;
        for o in outcomes {
            match o {
                Outcome::Refuted { .. } => return Status::Fail,
                Outcome::NotFound { .. } => status = Status::Inconclusive,
                Outcome::Certified(_) => {}
            }
        }
        status
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }
}

/// Searches `D = deg(target) ..= max_degree` for a certificate, then tries
/// the schema's standard representations for a refutation.
pub fn decide(target: &FormalSum, schema: RelationSchema, max_degree: usize, cache: &IdealCache) -> Result<Outcome> {
    if target.is_zero() {
        return Ok(Outcome::Certified(MembershipCertificate {
            target: target.clone(),
            relations: Vec::new(),
            terms: Vec::new(),
            degree: 0,
        }));
    }
    for d in target.max_word_len().max(1)..=max_degree {
        if let Membership::Found(cert) = cache.get(schema, d)?.membership(target)? {
            return Ok(Outcome::Certified(cert));
        }
    }
    Ok(refute(target, &standard_representations(&schema)).unwrap_or(Outcome::NotFound { max_degree }))
}

fn refute(target: &FormalSum, reps: &[Assignment]) -> Option<Outcome> {
    let (a, value) = find_refutation(target, reps)?;
    let entry = (0..value.rows())
        .flat_map(|i| (0..value.cols()).map(move |j| (i, j)))
        .map(|(i, j)| value[(i, j)].clone())
        .find(|x| !x.is_zero())
        .expect("nonzero matrix");
    Some(Outcome::Refuted { representation: a.label.clone(), value: entry })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetOutcome {
    pub label: String,
    pub target: FormalSum,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub lemma: String,
    pub schema: SchemaName,
    pub n: usize,
    pub max_degree: usize,
    pub outcomes: Vec<TargetOutcome>,
}

impl VerificationReport {
    pub fn status(&self) -> Status {
        Status::of(self.outcomes.iter().map(|o| &o.outcome))
    }

    pub fn certified(&self) -> usize {
        self.outcomes.iter().filter(|o| o.outcome.is_certified()).count()
    }

    /// Every certificate re-expands to its target.
    pub fn all_certificates_valid(&self) -> bool {
        self.outcomes.iter().all(|o| match &o.outcome {
            Outcome::Certified(c) => c.verify() && c.target == o.target,
            _ => true,
        })
    }
}

#[derive(Serialize)]
struct OutcomeJson<'a> {
    label: &'a str,
    target: String,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<&'a MembershipCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    representation: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_degree: Option<usize>,
}

impl Serialize for TargetOutcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut j = OutcomeJson {
            label: &self.label,
            target: self.target.to_string(),
            status: "",
            certificate: None,
            representation: None,
            value: None,
            max_degree: None,
        };
        match &self.outcome {
            Outcome::Certified(c) => {
                j.status = "certified";
                j.certificate = Some(c);
            }
            Outcome::Refuted { representation, value } => {
                j.status = "refuted";
                j.representation = Some(representation);
                j.value = Some(format_rational(value));
            }
            Outcome::NotFound { max_degree } => {
                j.status = "not_found";
                j.max_degree = Some(*max_degree);
            }
        }
        j.serialize(s)
    }
}

#[derive(Serialize)]
struct ReportJson<'a> {
    lemma: &'a str,
    schema: SchemaName,
    n: usize,
    max_degree: usize,
    status: Status,
    certified: usize,
    total: usize,
    outcomes: &'a [TargetOutcome],
}

impl Serialize for VerificationReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ReportJson {
            lemma: &self.lemma,
            schema: self.schema,
            n: self.n,
            max_degree: self.max_degree,
            status: self.status(),
            certified: self.certified(),
            total: self.outcomes.len(),
            outcomes: &self.outcomes,
        }
        .serialize(s)
    }
}

fn report(lemma: &str, schema: RelationSchema, max_degree: usize, outcomes: Vec<TargetOutcome>) -> VerificationReport {
    VerificationReport { lemma: lemma.into(), schema: schema.name, n: schema.n, max_degree, outcomes }
}

/// Certifies `Δ(r)` in the tensor-square ideal for every defining relation `r`.
pub fn verify_coproduct(schema: RelationSchema, max_degree: usize, cache: &IdealCache) -> Result<VerificationReport> {
    let mut outcomes = Vec::new();
    for r in schema.instantiate() {
        let target = delta(&r, schema.n)?;
        let outcome = decide(&target, schema, max_degree, cache)?;
        outcomes.push(TargetOutcome { label: r.to_string(), target, outcome });
    }
    Ok(report("coproduct", schema, max_degree, outcomes))
}

/// The schema whose vanishing identities correspond to an interval family.
pub fn schema_for_family(family: FamilyTag) -> Option<SchemaName> {
    if family.lattice != Lattice::Interval {
        return None;
    }
    Some(match family.blocks {
        BlockConstraint::ExactlyTwo => SchemaName::POrthogonal,
        BlockConstraint::Any => SchemaName::PMagic,
        BlockConstraint::Even => SchemaName::PCubic,
        BlockConstraint::AtMostTwo => SchemaName::PBistochastic,
    })
}

/// `Σ_{i : π ≤ ker i} u_{i1,j1} ⋯ u_{ik,jk} P − [π ≤ ker j] P`.
pub fn vanishing_target(n: usize, pi: &SetPartition, j: &IndexWord) -> Result<FormalSum> {
    let k = pi.ground_size();
    if j.len() != k {
        return Err(Error::GroundSizeMismatch(k, j.len()));
    }
    if !j.within(n) {
        return Err(Error::InvalidWord(format!("{j} has letters above {n}")));
    }
    let p = Word::single(Generator::P);
    let mut target = FormalSum::zero(1);
    let labels = pi.labels();
    let blocks = pi.num_blocks();
    // letters constant on blocks: one letter per block
    let mut choice = vec![1usize; blocks];
    loop {
        let rows: Vec<usize> = labels.iter().map(|&b| choice[b]).collect();
        target.add_term(vec![u_product(&rows, j.letters()).concat(&p)], Rational::one());
        let Some(t) = choice.iter().rposition(|&c| c < n) else { break };
        choice[t] += 1;
        for c in &mut choice[t + 1..] {
            *c = 1;
        }
    }
    if pi.refines(&j.kernel())? {
        target.add_term(vec![p], -Rational::one());
    }
    Ok(target)
}

/// Certifies one vanishing identity for `π` in `family`.
pub fn verify_vanishing_one(
    schema: RelationSchema,
    family: FamilyTag,
    pi: &SetPartition,
    j: &IndexWord,
    max_degree: usize,
    cache: &IdealCache,
) -> Result<TargetOutcome> {
    if !pi.in_family(family) {
        return Err(Error::LatticeMismatch { partition: pi.to_string(), lattice: family.to_string() });
    }
    if !schema.uses_projection() {
        return Err(Error::Parse(format!("vanishing identities need a P-schema, got {}", schema.name)));
    }
    let target = vanishing_target(schema.n, pi, j)?;
    let outcome = decide(&target, schema, max_degree, cache)?;
    Ok(TargetOutcome { label: format!("pi={pi} j={j}"), target, outcome })
}

/// Vanishing identities for the given `(π, j)` pairs.
pub fn verify_vanishing(
    schema: RelationSchema,
    family: FamilyTag,
    instances: &[(SetPartition, IndexWord)],
    max_degree: usize,
    cache: &IdealCache,
) -> Result<VerificationReport> {
    let outcomes = instances
        .iter()
        .map(|(pi, j)| verify_vanishing_one(schema, family, pi, j, max_degree, cache))
        .collect::<Result<Vec<_>>>()?;
    Ok(report(&format!("vanishing {family}"), schema, max_degree, outcomes))
}

/// Certifies that every relation of `cover` holds in the algebra presented by
/// `quotient`, i.e. the latter is a quotient of the former.
pub fn verify_quotient(
    quotient: SchemaName,
    cover: SchemaName,
    n: usize,
    max_degree: usize,
    cache: &IdealCache,
) -> Result<VerificationReport> {
    if cover.is_boolean() && !quotient.is_boolean() {
        return Err(Error::Parse(format!("{cover} uses P but {quotient} does not")));
    }
    let schema = RelationSchema::new(quotient, n);
    let outcomes = RelationSchema::new(cover, n)
        .instantiate()
        .into_iter()
        .map(|r| {
            let outcome = decide(&r, schema, max_degree, cache)?;
            Ok(TargetOutcome { label: format!("{cover}: {r}"), target: r, outcome })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(report(&format!("quotient of {cover}"), schema, max_degree, outcomes))
}

/// A single target checked against a schema.
pub fn verify_membership(
    schema: RelationSchema,
    target: &FormalSum,
    max_degree: usize,
    cache: &IdealCache,
) -> Result<VerificationReport> {
    let outcome = decide(target, schema, max_degree, cache)?;
    Ok(report(
        "membership",
        schema,
        max_degree,
        vec![TargetOutcome { label: "target".into(), target: target.clone(), outcome }],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fs(s: &str) -> FormalSum {
        s.parse().unwrap()
    }

    fn part(s: &str) -> SetPartition {
        s.parse().unwrap()
    }

    fn w(v: &[usize]) -> IndexWord {
        IndexWord::from(v.to_vec())
    }

    #[test]
    fn vanishing_targets() {
        let t = vanishing_target(2, &part("1 2"), &w(&[1, 1])).unwrap();
        assert_eq!(t, fs("u11u11P + u21u21P - P"));
        let t = vanishing_target(2, &part("1 2"), &w(&[1, 2])).unwrap();
        assert_eq!(t, fs("u11u12P + u21u22P"));
        let t = vanishing_target(2, &part("1|2"), &w(&[1, 2])).unwrap();
        assert_eq!(t.len(), 5);
    }

    #[test]
    fn p_magic_vanishing_examples() {
        let cache = IdealCache::new();
        let schema = RelationSchema::new(SchemaName::PMagic, 2);
        let fam: FamilyTag = "i".parse().unwrap();
        for j in [w(&[1, 1]), w(&[1, 2])] {
            let o = verify_vanishing_one(schema, fam, &part("1 2"), &j, 4, &cache).unwrap();
            assert!(o.outcome.is_certified(), "{}", o.label);
        }
    }

    #[test]
    fn p_orthogonal_pair_concatenation() {
        let cache = IdealCache::new();
        let schema = RelationSchema::new(SchemaName::POrthogonal, 2);
        let fam: FamilyTag = "i_2".parse().unwrap();
        let o = verify_vanishing_one(schema, fam, &part("1 2|3 4"), &w(&[1, 1, 2, 2]), 5, &cache).unwrap();
        match &o.outcome {
            Outcome::Certified(c) => assert!(c.verify()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn p_cubic_fourth_power_is_refuted() {
        let cache = IdealCache::new();
        let schema = RelationSchema::new(SchemaName::PCubic, 2);
        let fam: FamilyTag = "i_h".parse().unwrap();
        let o = verify_vanishing_one(schema, fam, &part("1 2 3 4"), &w(&[1, 1, 1, 1]), 5, &cache).unwrap();
        assert!(o.outcome.is_refuted());
    }

    #[test]
    fn coproduct_p_bistochastic() {
        let cache = IdealCache::new();
        let r = verify_coproduct(RelationSchema::new(SchemaName::PBistochastic, 2), 3, &cache).unwrap();
        assert_eq!(r.status(), Status::Pass);
        assert!(r.all_certificates_valid());
    }

    #[test]
    fn vanishing_rejects_foreign_partition() {
        let cache = IdealCache::new();
        let schema = RelationSchema::new(SchemaName::PMagic, 2);
        let fam: FamilyTag = "i".parse().unwrap();
        assert!(verify_vanishing_one(schema, fam, &part("1 3|2"), &w(&[1, 2, 1]), 4, &cache).is_err());
        let plain = RelationSchema::new(SchemaName::Magic, 2);
        assert!(verify_vanishing_one(plain, fam, &part("1 2"), &w(&[1, 1]), 4, &cache).is_err());
    }

    #[test]
    fn magic_is_quotient_of_bistochastic() {
        let cache = IdealCache::new();
        let r = verify_quotient(SchemaName::Magic, SchemaName::Bistochastic, 2, 3, &cache).unwrap();
        assert_eq!(r.status(), Status::Pass);
        let r = verify_quotient(SchemaName::MagicPrime, SchemaName::Bistochastic, 2, 3, &cache).unwrap();
        assert_eq!(r.status(), Status::Fail);
    }

    #[test]
    fn membership_reports_inconclusive() {
        let cache = IdealCache::new();
        let schema = RelationSchema::new(SchemaName::Orthogonal, 1);
        // u11 = ±1 is consistent with u11² = 1, so u11 − 1 is refuted by −1
        let r = verify_membership(schema, &fs("u11 - 1"), 3, &cache).unwrap();
        assert_eq!(r.status(), Status::Fail);
        let r = verify_membership(schema, &fs("u11u11u11 - u11"), 3, &cache).unwrap();
        assert_eq!(r.status(), Status::Pass);
    }
}
