//! Evaluation of formal sums in concrete matrix representations, used as a
//! soundness oracle and to refute ideal membership.

use std::fmt;

use num_traits::{One, Zero};

use super::schema::{RelationSchema, SchemaName};
use super::sum::FormalSum;
use super::word::{Generator, Word};
use crate::error::{Error, Result};
use crate::matrix::QMatrix;
use crate::rational::{int, ratio, Rational};

/// Square matrices of a common size for every `u_{ij}` and optionally `P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub label: String,
    n: usize,
    dim: usize,
    entries: Vec<QMatrix>,
    projection: Option<QMatrix>,
}

impl Assignment {
    /// `entries` is row-major: `entries[(i-1)*n + (j-1)]` represents `u_{ij}`.
    pub fn new(label: impl Into<String>, n: usize, entries: Vec<QMatrix>, projection: Option<QMatrix>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Dimension(format!("expected {} entry matrices, got {}", n * n, entries.len())));
        }
        let dim = entries
            .first()
            .map(QMatrix::rows)
            .or_else(|| projection.as_ref().map(QMatrix::rows))
            .unwrap_or(1);
        for m in entries.iter().chain(projection.iter()) {
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::Dimension(format!("all matrices must be {dim}×{dim}")));
            }
        }
        Ok(Assignment { label: label.into(), n, dim, entries, projection })
    }

    /// One-dimensional assignment `u_{ij} ↦ g_{ij}`, `P ↦ p`.
    pub fn scalar(label: impl Into<String>, g: &QMatrix, p: Option<Rational>) -> Self {
        let n = g.rows();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(QMatrix::scalar(1, g[(i, j)].clone()));
            }
        }
        Assignment { label: label.into(), n, dim: 1, entries, projection: p.map(|p| QMatrix::scalar(1, p)) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generator(&self, g: Generator) -> Result<&QMatrix> {
        match g {
            Generator::P => self
                .projection
                .as_ref()
                .ok_or_else(|| Error::Dimension("assignment has no projection".into())),
            Generator::U(i, j) => {
                let (i, j) = (i as usize, j as usize);
                if i > self.n || j > self.n {
                    return Err(Error::Dimension(format!("u({i},{j}) outside a {0}×{0} assignment", self.n)));
                }
                Ok(&self.entries[(i - 1) * self.n + (j - 1)])
            }
        }
    }

    fn word(&self, w: &Word) -> Result<QMatrix> {
        let mut acc = QMatrix::identity(self.dim);
        for &g in w.generators() {
            acc = &acc * self.generator(g)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Homomorphic image of `s`; a tensor monomial maps to the Kronecker product
/// of its component images.
pub fn eval_representation(s: &FormalSum, assignment: &Assignment) -> Result<QMatrix> {
    let size = assignment.dim.pow(s.tensor_degree() as u32);
    let mut out = QMatrix::zeros(size, size);
    for (tw, c) in s.terms() {
        let mut m = QMatrix::identity(1);
        for w in tw {
            m = m.kronecker(&assignment.word(w)?);
        }
        out = &out + &m.scale(c);
    }
    Ok(out)
}

/// Signed permutation matrix `g` with `g[i][perm[i]] = signs[i]`.
pub fn signed_permutation(perm: &[usize], signs: &[i64]) -> QMatrix {
    let n = perm.len();
    let mut g = QMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, perm[i])] = int(signs[i]);
    }
    g
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                go(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub(crate) fn sign_vectors(n: usize) -> Vec<Vec<i64>> {
    (0..1u32 << n).map(|mask| (0..n).map(|t| if mask >> t & 1 == 1 { -1 } else { 1 }).collect()).collect()
}

/// Largest `n` for which the full permutation families are enumerated.
const ENUMERATION_CAP: usize = 4;

fn perms_capped(n: usize) -> Vec<Vec<usize>> {
    if n <= ENUMERATION_CAP {
        permutations(n)
    } else {
        // identity and the two cyclic shifts
        vec![(0..n).collect(), (0..n).map(|i| (i + 1) % n).collect(), (0..n).map(|i| (i + n - 1) % n).collect()]
    }
}

fn name(perm: &[usize], signs: &[i64]) -> String {
    let body: Vec<String> = perm
        .iter()
        .zip(signs)
        .map(|(p, s)| format!("{}{}", if *s < 0 { "-" } else { "" }, p + 1))
        .collect();
    format!("[{}]", body.join(" "))
}

/// The `(1 + n²)`-dimensional assignment `u_x = E_{x,0} + (1/n)·E_{0,x}`,
/// `P = E_{0,0}`. It satisfies the P-orthogonal and P-cubic relations (and
/// their adjoints) but `Σ_i u_{i1}⁴ P = P/n`.
pub fn p_cubic_witness(n: usize) -> Assignment {
    let dim = 1 + n * n;
    let mut entries = Vec::with_capacity(n * n);
    for x in 1..=n * n {
        let mut m = QMatrix::zeros(dim, dim);
        m[(x, 0)] = Rational::one();
        m[(0, x)] = ratio(1, n as i64);
        entries.push(m);
    }
    let mut p = QMatrix::zeros(dim, dim);
    p[(0, 0)] = Rational::one();
    Assignment::new("rank-one P-cubic witness", n, entries, Some(p)).expect("consistent sizes")
}

/// Concrete representations known to satisfy the schema at its size.
///
/// Scalar characters come from the commutative case: permutation matrices
/// are magic and bistochastic, signed permutations orthogonal and cubic, and
/// `±` permutations have equal row and column sums. Boolean schemas use
/// `P = 1` for these, plus the rank-one witness where it applies.
pub fn standard_representations(schema: &RelationSchema) -> Vec<Assignment> {
    use SchemaName::*;
    let n = schema.n;
    let p = schema.uses_projection().then(Rational::one);
    let plain = |s| match s {
        POrthogonal => Orthogonal,
        PMagic => Magic,
        PCubic => Cubic,
        PBistochastic => Bistochastic,
        PPrime | PBistochasticPrime => BistochasticPrime,
        PMagicPrime => MagicPrime,
        other => other,
    };
    let signs: Vec<Vec<i64>> = match plain(schema.name) {
        Magic | Bistochastic => vec![vec![1; n]],
        MagicPrime | BistochasticPrime => vec![vec![1; n], vec![-1; n]],
        Orthogonal | Cubic => {
            if n <= ENUMERATION_CAP {
                sign_vectors(n)
            } else {
                vec![vec![1; n], vec![-1; n], (0..n).map(|i| if i == 0 { -1 } else { 1 }).collect()]
            }
        }
        _ => unreachable!("plain schema"),
    };
    let mut out = Vec::new();
    for perm in perms_capped(n) {
        for s in &signs {
            let g = signed_permutation(&perm, s);
            out.push(Assignment::scalar(name(&perm, s), &g, p.clone()));
        }
    }
    // 2J/n − I is orthogonal with unit row sums but not a signed permutation
    if n >= 3 && matches!(plain(schema.name), Orthogonal | Bistochastic | BistochasticPrime) {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| ratio(2, n as i64) - int((i == j) as i64)).collect())
            .collect();
        let reflection = QMatrix::from_rows(rows).expect("square");
        out.push(Assignment::scalar("2J/n - I", &reflection, p.clone()));
        if plain(schema.name) != Bistochastic {
            out.push(Assignment::scalar("I - 2J/n", &-&reflection, p.clone()));
        }
    }
    if matches!(schema.name, POrthogonal | PCubic) {
        out.push(p_cubic_witness(n));
    }
    out
}

/// First representation under which `s` evaluates to a nonzero matrix.
pub fn find_refutation<'a>(s: &FormalSum, reps: &'a [Assignment]) -> Option<(&'a Assignment, QMatrix)> {
    reps.iter().find_map(|a| {
        let v = eval_representation(s, a).ok()?;
        (!v.is_zero()).then_some((a, v))
    })
}

/// Scalar value of `s` under a one-dimensional assignment.
pub fn eval_scalar(s: &FormalSum, assignment: &Assignment) -> Result<Rational> {
    if assignment.dim != 1 {
        return Err(Error::Dimension("scalar evaluation needs a one-dimensional assignment".into()));
    }
    let mut total = Rational::zero();
    for (tw, c) in s.terms() {
        let mut v = c.clone();
        for w in tw {
            for &g in w.generators() {
                v *= &assignment.generator(g)?[(0, 0)];
            }
        }
        total += v;
    }
    Ok(total)
}
