//! Invariance of a truncated joint distribution under the coaction
//! `X_i ↦ Σ_k X_k ⊗ u_{k,i}`: exactly for permutation and hyperoctahedral
//! groups, by seeded Monte Carlo for the orthogonal group and its
//! bistochastic subgroup, and by ideal-membership certificates for the
//! quantum versions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::repr::{permutations, sign_vectors};
use crate::algebra::verify::{decide, IdealCache, TargetOutcome, VerificationReport};
use crate::algebra::{u_product, FormalSum, Generator, RelationSchema, Word};
use crate::cumulants::MomentFunctional;
use crate::error::{Error, Result};
use crate::partitions::{words_up_to, IndexWord};
use crate::rational::{format_rational, to_f64, Rational};

/// Enumeration caps for the exact groups.
pub const MAX_SYM_N: usize = 6;
pub const MAX_HYPEROCT_N: usize = 4;

/// Samples drawn from one RNG stream.
const CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupFamily {
    Sym,
    Hyperoct,
    Bistoch,
    Orth,
}

impl GroupFamily {
    pub fn is_exact(self) -> bool {
        matches!(self, GroupFamily::Sym | GroupFamily::Hyperoct)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GroupFamily::Sym => "sym",
            GroupFamily::Hyperoct => "hyperoct",
            GroupFamily::Bistoch => "bistoch",
            GroupFamily::Orth => "orth",
        }
    }
}

impl fmt::Display for GroupFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GroupFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sym" | "s" | "permutation" => Ok(GroupFamily::Sym),
            "hyperoct" | "h" | "hyperoctahedral" => Ok(GroupFamily::Hyperoct),
            "bistoch" | "b" | "bistochastic" => Ok(GroupFamily::Bistoch),
            "orth" | "o" | "orthogonal" => Ok(GroupFamily::Orth),
            _ => Err(Error::Parse(format!("unknown group {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupTag {
    pub family: GroupFamily,
    pub n: usize,
}

impl GroupTag {
    pub fn new(family: GroupFamily, n: usize) -> Self {
        GroupTag { family, n }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Residual {
    /// Residual of largest magnitude over the group.
    Exact(Rational),
    MonteCarlo { mean: f64, stderr: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub group: GroupTag,
    /// Untouched trailing letters (the extension size).
    pub extension: usize,
    pub max_order: usize,
    pub mode: Mode,
    pub residuals: BTreeMap<IndexWord, Residual>,
    pub passed: bool,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

impl InvarianceReport {
    /// Words whose residual breaks the pass rule.
    pub fn failing_words(&self) -> Vec<&IndexWord> {
        let tol = self.tol.unwrap_or(0.0);
        self.residuals
            .iter()
            .filter(|(_, r)| match r {
                Residual::Exact(v) => !v.is_zero(),
                Residual::MonteCarlo { mean, stderr } => !mc_pass(*mean, *stderr, tol),
            })
            .map(|(w, _)| w)
            .collect()
    }
}

fn mc_pass(mean: f64, stderr: f64, tol: f64) -> bool {
    mean.abs() <= tol.max(3.0 * stderr)
}

#[derive(Serialize)]
struct ResidualJson {
    word: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stderr: Option<f64>,
}

#[derive(Serialize)]
struct ReportJson {
    group: GroupFamily,
    n: usize,
    extension: usize,
    #[serde(rename = "K")]
    max_order: usize,
    mode: Mode,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    residuals: Vec<ResidualJson>,
}

impl Serialize for InvarianceReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ReportJson {
            group: self.group.family,
            n: self.group.n,
            extension: self.extension,
            max_order: self.max_order,
            mode: self.mode,
            passed: self.passed,
            samples: self.samples,
            seed: self.seed,
            tol: self.tol,
            residuals: self
                .residuals
                .iter()
                .map(|(w, r)| match r {
                    Residual::Exact(v) => ResidualJson {
                        word: w.letters().to_vec(),
                        value: Some(format_rational(v)),
                        mean: None,
                        stderr: None,
                    },
                    Residual::MonteCarlo { mean, stderr } => ResidualJson {
                        word: w.letters().to_vec(),
                        value: None,
                        mean: Some(*mean),
                        stderr: Some(*stderr),
                    },
                })
                .collect(),
        }
        .serialize(s)
    }
}

/// `α_n(X_{i1} ⋯ X_{ik}) = Σ_j X_{j1} ⋯ X_{jk} ⊗ u_{j1,i1} ⋯ u_{jk,ik}`, each
/// term as `(j, [(j1,i1), …, (jk,ik)])`.
pub fn coaction_expand(w: &IndexWord, n: usize) -> Vec<(IndexWord, Vec<(usize, usize)>)> {
    let k = w.len();
    let total = n.pow(k as u32);
    (0..total)
        .map(|mut code| {
            let mut j = vec![0; k];
            for slot in j.iter_mut().rev() {
                *slot = code % n + 1;
                code /= n;
            }
            let pairs = j.iter().copied().zip(w.letters().iter().copied()).collect();
            (IndexWord::from(j), pairs)
        })
        .collect()
}

fn check_domain(mom: &MomentFunctional, alphabet: usize, max_order: usize) -> Result<()> {
    if alphabet == 0 {
        return Err(Error::Dimension("group size must be positive".into()));
    }
    if mom.alphabet_size() < alphabet {
        return Err(Error::IncompatibleTables(format!(
            "moments over {} letters, group acts on {alphabet}",
            mom.alphabet_size()
        )));
    }
    if max_order > mom.max_order() {
        return Err(Error::IncompatibleTables(format!(
            "order {max_order} requested, moments known to order {}",
            mom.max_order()
        )));
    }
    Ok(())
}

/// Signed permutations on `base` letters, fixing the next `extension`.
fn exact_elements(group: GroupTag, extension: usize) -> Result<Vec<(Vec<usize>, Vec<i64>)>> {
    let n = group.n;
    let signs = match group.family {
        GroupFamily::Sym if n <= MAX_SYM_N => vec![vec![1; n]],
        GroupFamily::Hyperoct if n <= MAX_HYPEROCT_N => sign_vectors(n),
        GroupFamily::Sym | GroupFamily::Hyperoct => {
            return Err(Error::TooLarge(format!("{} at n = {n}", group.family)));
        }
        _ => return Err(Error::InvalidSampling(format!("{} is not enumerable", group.family))),
    };
    let mut out = Vec::new();
    for perm in permutations(n) {
        for s in &signs {
            let mut p = perm.clone();
            p.extend(n..n + extension);
            let mut sg = s.clone();
            sg.extend(std::iter::repeat_n(1, extension));
            out.push((p, sg));
        }
    }
    Ok(out)
}

/// Exact check for `SYM`/`HYPEROCT` on words of length `≤ max_order` over
/// the first `n + extension` letters; the group moves only the first `n`.
pub fn check_invariance_exact_extended(
    mom: &MomentFunctional,
    group: GroupTag,
    extension: usize,
    max_order: usize,
) -> Result<InvarianceReport> {
    let m = group.n + extension;
    check_domain(mom, m, max_order)?;
    let elements = exact_elements(group, extension)?;
    let words: Vec<IndexWord> = words_up_to(m, max_order).collect();
    let residuals: Vec<(IndexWord, Rational)> = words
        .par_iter()
        .map(|w| {
            let base = mom.get(w);
            let mut worst = Rational::zero();
            for (perm, signs) in &elements {
                // g_{j,i} ≠ 0 iff perm[j] = i, so only j = perm⁻¹(i) contributes
                let mut inv = vec![0; m];
                for (j, &i) in perm.iter().enumerate() {
                    inv[i] = j;
                }
                let js: Vec<usize> = w.letters().iter().map(|&i| inv[i - 1]).collect();
                let sign: i64 = js.iter().map(|&j| signs[j]).product();
                let moved = mom.get(&IndexWord::from(js.iter().map(|j| j + 1).collect::<Vec<_>>()));
                let r = if sign < 0 { -moved } else { moved } - &base;
                if r.abs() > worst.abs() {
                    worst = r;
                }
            }
            (w.clone(), worst)
        })
        .collect();
    let passed = residuals.iter().all(|(_, r)| r.is_zero());
    Ok(InvarianceReport {
        group,
        extension,
        max_order,
        mode: Mode::Exact,
        residuals: residuals.into_iter().map(|(w, r)| (w, Residual::Exact(r))).collect(),
        passed,
        samples: None,
        seed: None,
        tol: None,
    })
}

pub fn check_invariance_exact(mom: &MomentFunctional, group: GroupTag, max_order: usize) -> Result<InvarianceReport> {
    check_invariance_exact_extended(mom, group, 0, max_order)
}

/// Monte Carlo configuration; the seed is mandatory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidSampling("at least one sample is required".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::InvalidSampling(format!("tolerance {} must be finite and non-negative", self.tol)));
        }
        Ok(())
    }
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal moved into `Q`.
pub fn haar_orthogonal(n: usize, rng: &mut impl rand::Rng) -> DMatrix<f64> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..n {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    q
}

/// Orthonormal basis of the complement of the all-ones vector, as columns.
fn ones_complement_basis(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n.saturating_sub(1), |row, col| {
        let k = (col + 1) as f64;
        let norm = (k * (k + 1.0)).sqrt();
        match row.cmp(&(col + 1)) {
            std::cmp::Ordering::Less => 1.0 / norm,
            std::cmp::Ordering::Equal => -k / norm,
            std::cmp::Ordering::Greater => 0.0,
        }
    })
}

/// Haar-distributed orthogonal matrix fixing `(1, …, 1)`:
/// `J/n + V Q Vᵀ` with `Q` Haar on `O(n−1)`.
pub fn haar_bistochastic(n: usize, rng: &mut impl rand::Rng) -> DMatrix<f64> {
    let v = ones_complement_basis(n);
    let q = haar_orthogonal(n.saturating_sub(1), rng);
    DMatrix::from_element(n, n, 1.0 / n as f64) + &v * q * v.transpose()
}

/// Dense moment arrays by length, index `Σ (j_t − 1) m^{k−1−t}`.
fn dense_moments(mom: &MomentFunctional, m: usize, max_order: usize) -> Vec<Vec<f64>> {
    (0..=max_order)
        .map(|k| {
            let mut arr = vec![0.0; m.pow(k as u32)];
            if k == 0 {
                arr[0] = 1.0;
            }
            for w in crate::partitions::words_of_length(m, k).filter(|_| k > 0) {
                let idx = w.letters().iter().fold(0, |acc, &l| acc * m + (l - 1));
                arr[idx] = to_f64(&mom.get(&w));
            }
            arr
        })
        .collect()
}

/// `Σ_j μ(j) Π_t g_{j_t, i_t}`, contracting the last position first.
fn transformed(g: &DMatrix<f64>, dense: &[Vec<f64>], w: &[usize]) -> f64 {
    let m = g.nrows();
    let mut t = dense[w.len()].clone();
    for &i in w.iter().rev() {
        t = t.chunks(m).map(|c| c.iter().enumerate().map(|(j, x)| x * g[(j, i - 1)]).sum()).collect();
    }
    t[0]
}

/// Monte Carlo check for `ORTH`/`BISTOCH` with the first `n` letters moved
/// and the next `extension` fixed.
pub fn check_invariance_mc_extended(
    mom: &MomentFunctional,
    group: GroupTag,
    extension: usize,
    max_order: usize,
    config: &McConfig,
) -> Result<InvarianceReport> {
    config.validate()?;
    if group.family.is_exact() {
        return Err(Error::InvalidSampling(format!("{} is checked exactly", group.family)));
    }
    let n = group.n;
    let m = n + extension;
    check_domain(mom, m, max_order)?;
    let dense = dense_moments(mom, m, max_order);
    let words: Vec<IndexWord> = words_up_to(m, max_order).collect();
    let targets: Vec<f64> = words.iter().map(|w| to_f64(&mom.get(w))).collect();

    let chunks = config.samples.div_ceil(CHUNK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(config.samples - c * CHUNK);
            let mut sum = vec![0.0; words.len()];
            let mut sq = vec![0.0; words.len()];
            for _ in 0..count {
                let core = match group.family {
                    GroupFamily::Orth => haar_orthogonal(n, &mut rng),
                    _ => haar_bistochastic(n, &mut rng),
                };
                let mut g = DMatrix::identity(m, m);
                g.view_mut((0, 0), (n, n)).copy_from(&core);
                for (idx, w) in words.iter().enumerate() {
                    let x = transformed(&g, &dense, w.letters()) - targets[idx];
                    sum[idx] += x;
                    sq[idx] += x * x;
                }
            }
            (sum, sq)
        })
        .collect();

    let s = config.samples as f64;
    let mut residuals = BTreeMap::new();
    let mut passed = true;
    for (idx, w) in words.iter().enumerate() {
        let total: f64 = partial.iter().map(|p| p.0[idx]).sum();
        let total_sq: f64 = partial.iter().map(|p| p.1[idx]).sum();
        let mean = total / s;
        let var = if config.samples > 1 { ((total_sq - s * mean * mean) / (s - 1.0)).max(0.0) } else { 0.0 };
        let stderr = (var / s).sqrt();
        passed &= mc_pass(mean, stderr, config.tol);
        residuals.insert(w.clone(), Residual::MonteCarlo { mean, stderr });
    }
    Ok(InvarianceReport {
        group,
        extension,
        max_order,
        mode: Mode::MonteCarlo,
        residuals,
        passed,
        samples: Some(config.samples),
        seed: Some(config.seed),
        tol: Some(config.tol),
    })
}

pub fn check_invariance_mc(
    mom: &MomentFunctional,
    group: GroupTag,
    max_order: usize,
    config: &McConfig,
) -> Result<InvarianceReport> {
    check_invariance_mc_extended(mom, group, 0, max_order, config)
}

/// Exact or sampled check, as the group requires; `mc` is needed for the
/// sampled groups.
pub fn extend_and_check(
    mom: &MomentFunctional,
    family: GroupFamily,
    base: usize,
    extension: usize,
    max_order: usize,
    mc: Option<&McConfig>,
) -> Result<InvarianceReport> {
    let group = GroupTag::new(family, base);
    if family.is_exact() {
        check_invariance_exact_extended(mom, group, extension, max_order)
    } else {
        let config = mc.ok_or_else(|| Error::InvalidSampling(format!("{family} needs samples and a seed")))?;
        check_invariance_mc_extended(mom, group, extension, max_order, config)
    }
}

/// Runs [`extend_and_check`] for every extension the table supports,
/// `k = 0 ..= alphabet − base`. Only finitely many extensions are covered;
/// the reports record which.
pub fn check_stationary(
    mom: &MomentFunctional,
    family: GroupFamily,
    base: usize,
    max_order: usize,
    mc: Option<&McConfig>,
) -> Result<Vec<InvarianceReport>> {
    if mom.alphabet_size() < base {
        return Err(Error::IncompatibleTables(format!("fewer than {base} letters")));
    }
    (0..=mom.alphabet_size() - base)
        .map(|k| extend_and_check(mom, family, base, k, max_order, mc))
        .collect()
}

/// `Σ_j μ(j) u_{j1,i1} ⋯ u_{jk,ik} − μ(i)·1`, with a trailing `P` (and `P`
/// for `1`) when `with_p`.
pub fn invariance_target(mom: &MomentFunctional, n: usize, w: &IndexWord, with_p: bool) -> FormalSum {
    let tail = if with_p { Word::single(Generator::P) } else { Word::unit() };
    let mut target = FormalSum::zero(1);
    for (j, _) in coaction_expand(w, n) {
        let c = mom.get(&j);
        target.add_term(vec![u_product(j.letters(), w.letters()).concat(&tail)], c);
    }
    target.add_term(vec![tail], -mom.get(w));
    target
}

/// Delegates each word of length `≤ max_order` to bounded ideal membership.
pub fn quantum_invariance_certificate(
    mom: &MomentFunctional,
    schema: RelationSchema,
    max_order: usize,
    degree_bound: usize,
    cache: &IdealCache,
) -> Result<VerificationReport> {
    let n = schema.n;
    check_domain(mom, n, max_order)?;
    let words: Vec<IndexWord> = words_up_to(n, max_order).collect();
    let outcomes = words
        .iter()
        .map(|w| {
            let target = invariance_target(mom, n, w, schema.uses_projection());
            let outcome = decide(&target, schema, degree_bound, cache)?;
            Ok(TargetOutcome { label: w.to_string(), target, outcome })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport {
        lemma: "invariance".into(),
        schema: schema.name,
        n,
        max_degree: degree_bound,
        outcomes,
    })
}

/// Exact residual of one word under one rational matrix, by full expansion.
/// Slow; used as an independent cross-check.
pub fn residual_by_expansion(mom: &MomentFunctional, g: &crate::matrix::QMatrix, w: &IndexWord) -> Rational {
    let mut total = -mom.get(w);
    for (j, pairs) in coaction_expand(w, g.rows()) {
        let mut coef = Rational::one();
        for (a, b) in pairs {
            coef *= &g[(a - 1, b - 1)];
            if coef.is_zero() {
                break;
            }
        }
        if !coef.is_zero() {
            total += coef * mom.get(&j);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::repr::signed_permutation;
    use crate::algebra::SchemaName;
    use crate::cumulants::{moments_from_cumulants, CumulantKind, CumulantTable};
    use crate::independence::build_independent_moments;
    use crate::rational::{int, ratio};

    fn w(v: &[usize]) -> IndexWord {
        IndexWord::from(v.to_vec())
    }

    fn exchangeable(n: usize, k: usize) -> MomentFunctional {
        // μ depends on the kernel only
        MomentFunctional::from_fn(n, k, |x| {
            let ker = x.kernel();
            int((ker.num_blocks() * 3 + ker.blocks()[0].len()) as i64)
        })
    }

    fn iid(kind: CumulantKind, values: &[Rational], n: usize) -> MomentFunctional {
        let marg = CumulantTable::single_variable(kind, values);
        build_independent_moments(&vec![marg; n], kind).unwrap()
    }

    #[test]
    fn coaction_examples() {
        let e = coaction_expand(&w(&[1]), 2);
        assert_eq!(e, vec![(w(&[1]), vec![(1, 1)]), (w(&[2]), vec![(2, 1)])]);
        assert_eq!(coaction_expand(&w(&[1, 2]), 2).len(), 4);
        assert_eq!(coaction_expand(&w(&[1, 2, 1]), 3).len(), 27);
    }

    #[test]
    fn sym_examples() {
        let mom = exchangeable(3, 3);
        assert!(check_invariance_exact(&mom, GroupTag::new(GroupFamily::Sym, 3), 3).unwrap().passed);

        let mut bad = MomentFunctional::new(2, 2);
        bad.set(w(&[1, 1]), int(1)).unwrap();
        bad.set(w(&[2, 2]), int(2)).unwrap();
        let r = check_invariance_exact(&bad, GroupTag::new(GroupFamily::Sym, 2), 2).unwrap();
        assert!(!r.passed);
        assert_eq!(r.residuals[&w(&[1, 1])], Residual::Exact(int(1)));
    }

    #[test]
    fn hyperoct_sign_flip() {
        let mom = MomentFunctional::from_fn(1, 2, |_| int(1));
        let r = check_invariance_exact(&mom, GroupTag::new(GroupFamily::Hyperoct, 1), 2).unwrap();
        assert!(!r.passed);
        assert_eq!(r.failing_words(), vec![&w(&[1])]);
    }

    #[test]
    fn exact_agrees_with_full_expansion() {
        let mom = MomentFunctional::from_fn(3, 3, |x| {
            int(x.letters().iter().enumerate().map(|(t, &l)| (t as i64 + 2) * l as i64).sum::<i64>() % 5 - 2)
        });
        for fam in [GroupFamily::Sym, GroupFamily::Hyperoct] {
            let report = check_invariance_exact(&mom, GroupTag::new(fam, 3), 3).unwrap();
            for (word, res) in &report.residuals {
                let mut worst = Rational::zero();
                for (perm, signs) in exact_elements(GroupTag::new(fam, 3), 0).unwrap() {
                    let r = residual_by_expansion(&mom, &signed_permutation(&perm, &signs), word);
                    if r.abs() > worst.abs() {
                        worst = r;
                    }
                }
                assert_eq!(res, &Residual::Exact(worst.clone()), "{fam} {word}");
            }
        }
    }

    #[test]
    fn caps_are_enforced() {
        let mom = MomentFunctional::new(7, 1);
        assert!(matches!(
            check_invariance_exact(&mom, GroupTag::new(GroupFamily::Sym, 7), 1),
            Err(Error::TooLarge(_))
        ));
        assert!(check_invariance_exact(&mom, GroupTag::new(GroupFamily::Hyperoct, 5), 1).is_err());
        assert!(check_invariance_exact(&mom, GroupTag::new(GroupFamily::Orth, 2), 1).is_err());
    }

    #[test]
    fn haar_samples_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=4 {
            let q = haar_orthogonal(n, &mut rng);
            assert!((q.transpose() * &q - DMatrix::identity(n, n)).norm() < 1e-12);
            let b = haar_bistochastic(n, &mut rng);
            assert!((b.transpose() * &b - DMatrix::identity(n, n)).norm() < 1e-12);
            for i in 0..n {
                assert!((b.row(i).sum() - 1.0).abs() < 1e-12);
                assert!((b.column(i).sum() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mc_bistoch_preserves_mean() {
        let mom = iid(CumulantKind::Classical, &[int(2), int(1)], 2);
        let cfg = McConfig { samples: 500, seed: 1, tol: 1e-9 };
        let r = check_invariance_mc(&mom, GroupTag::new(GroupFamily::Bistoch, 2), 1, &cfg).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn mc_orth_gaussian_and_skewed() {
        let gauss = iid(CumulantKind::Classical, &[int(0), int(1), int(0), int(0)], 3);
        let cfg = McConfig { samples: 2000, seed: 42, tol: 1e-9 };
        let r = check_invariance_mc(&gauss, GroupTag::new(GroupFamily::Orth, 3), 4, &cfg).unwrap();
        assert!(r.passed, "{:?}", r.failing_words());

        let skew = iid(CumulantKind::Classical, &[int(0), int(1), int(1)], 2);
        let r = check_invariance_mc(&skew, GroupTag::new(GroupFamily::Orth, 2), 3, &cfg).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn mc_is_reproducible_across_thread_counts() {
        let mom = iid(CumulantKind::Free, &[int(0), int(1), ratio(1, 2)], 2);
        let cfg = McConfig { samples: 700, seed: 9, tol: 0.0 };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| check_invariance_mc(&mom, GroupTag::new(GroupFamily::Orth, 2), 3, &cfg).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn mc_rejects_bad_config() {
        let mom = MomentFunctional::new(2, 2);
        let cfg = McConfig { samples: 0, seed: 1, tol: 0.0 };
        assert!(matches!(
            check_invariance_mc(&mom, GroupTag::new(GroupFamily::Orth, 2), 2, &cfg),
            Err(Error::InvalidSampling(_))
        ));
    }

    #[test]
    fn extension_examples() {
        let mom = exchangeable(3, 3);
        assert!(extend_and_check(&mom, GroupFamily::Sym, 2, 1, 3, None).unwrap().passed);

        // letter 3 has a different law
        let odd = MomentFunctional::from_fn(3, 2, |x| {
            if x.letters().contains(&3) {
                int(5)
            } else {
                exchangeable(3, 2).get(x)
            }
        });
        assert!(extend_and_check(&odd, GroupFamily::Sym, 2, 1, 2, None).unwrap().passed);
        assert!(!extend_and_check(&odd, GroupFamily::Sym, 3, 0, 2, None).unwrap().passed);

        let reports = check_stationary(&mom, GroupFamily::Sym, 1, 2, None).unwrap();
        assert_eq!(reports.iter().map(|r| r.extension).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn quantum_magic_exchangeable() {
        let cache = IdealCache::new();
        let mom = exchangeable(2, 2);
        let r = quantum_invariance_certificate(&mom, RelationSchema::new(SchemaName::Magic, 2), 2, 3, &cache).unwrap();
        assert!(r.all_certificates_valid());
        assert_eq!(r.certified(), r.outcomes.len());
    }

    #[test]
    fn quantum_magic_refutes_non_exchangeable() {
        let cache = IdealCache::new();
        let mut mom = MomentFunctional::new(2, 2);
        mom.set(w(&[1]), int(1)).unwrap();
        let r = quantum_invariance_certificate(&mom, RelationSchema::new(SchemaName::Magic, 2), 2, 3, &cache).unwrap();
        assert!(r.outcomes.iter().any(|o| o.outcome.is_refuted()));
    }

    #[test]
    fn invariance_target_shape() {
        let mom = moments_from_cumulants(&CumulantTable::single_variable(CumulantKind::Boolean, &[int(1), int(1)]));
        let t = invariance_target(&mom, 1, &w(&[1]), true);
        assert_eq!(t, "u11P - P".parse().unwrap());
    }
}
