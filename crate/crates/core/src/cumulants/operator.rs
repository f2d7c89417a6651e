//! B-valued multilinear functionals with B a concrete `d×d` matrix algebra.
//!
//! An argument `b·x_i·b'` is an [`BArg`]. Before evaluation the arguments are
//! normalized to right-absorbed form: each left coefficient except the first
//! is multiplied into the previous right coefficient, so
//! `ρ(b0 x1 b1, x2 b2, …, xn bn) = b0 · core(x1, b1 x2, …, b(n-1) xn) · bn`.
//! This makes the bimodule property hold for every implementation of
//! [`BFunctional::eval_core`].

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::QMatrix;
use crate::partitions::{IndexWord, SetPartition};

use super::{CumulantKind, LatticeCache};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BArg {
    pub left: QMatrix,
    pub letter: usize,
    pub right: QMatrix,
}

impl BArg {
    /// `x_letter` with unit coefficients.
    pub fn plain(d: usize, letter: usize) -> Self {
        BArg { left: QMatrix::identity(d), letter, right: QMatrix::identity(d) }
    }

    pub fn new(left: QMatrix, letter: usize, right: QMatrix) -> Self {
        BArg { left, letter, right }
    }
}

pub trait BFunctional {
    /// Size `d` of the base algebra `M_d`.
    fn dim(&self) -> usize;

    fn max_order(&self) -> usize;

    /// Caller's declaration that the base is commutative.
    fn commutative_base(&self) -> bool;

    /// Matrices the functional is built from, used for the sampled
    /// commutator check.
    fn coefficient_samples(&self) -> Vec<QMatrix>;

    /// `ρ^(k)(x_{l1} c1, x_{l2} c2, …, x_{lk})` for right-absorbed arguments:
    /// `interior[t]` sits between letters `t` and `t+1`.
    fn eval_core(&self, letters: &[usize], interior: &[QMatrix]) -> Result<QMatrix>;

    /// `ρ^(k)(args)` through the right-absorbed normal form.
    fn eval(&self, args: &[BArg]) -> Result<QMatrix> {
        let d = self.dim();
        if args.is_empty() {
            return Ok(QMatrix::identity(d));
        }
        if args.len() > self.max_order() {
            return Err(Error::InvalidWord(format!(
                "order {} above functional order {}",
                args.len(),
                self.max_order()
            )));
        }
        for a in args {
            if a.left.rows() != d || a.left.cols() != d || a.right.rows() != d || a.right.cols() != d {
                return Err(Error::Dimension(format!("coefficients must be {d}x{d}")));
            }
        }
        let letters: Vec<usize> = args.iter().map(|a| a.letter).collect();
        let interior: Vec<QMatrix> = args
            .windows(2)
            .map(|pair| pair[0].right.try_mul(&pair[1].left))
            .collect::<Result<_>>()?;
        let core = self.eval_core(&letters, &interior)?;
        args[0].left.try_mul(&core)?.try_mul(&args[args.len() - 1].right)
    }
}

/// A functional given word by word as a chain of matrices: for the word
/// `(l1,…,lk)` with chain `M_0,…,M_{k-1}`,
/// `ρ(x_{l1} c1, …, x_{lk}) = M_0 c1 M_1 c2 ⋯ c_{k-1} M_{k-1}`.
/// Words without a chain evaluate to zero.
#[derive(Clone, Debug)]
pub struct MatrixFunctionalSeq {
    dim: usize,
    max_order: usize,
    commutative: bool,
    chains: BTreeMap<IndexWord, Vec<QMatrix>>,
}

impl MatrixFunctionalSeq {
    pub fn new(dim: usize, max_order: usize, commutative_base: bool) -> Self {
        MatrixFunctionalSeq { dim, max_order, commutative: commutative_base, chains: BTreeMap::new() }
    }

    pub fn set_chain(&mut self, word: IndexWord, chain: Vec<QMatrix>) -> Result<()> {
        if word.is_empty() || word.len() > self.max_order {
            return Err(Error::InvalidWord(format!("{word} outside orders 1..={}", self.max_order)));
        }
        if chain.len() != word.len() {
            return Err(Error::Dimension(format!(
                "chain of {} matrices for a word of length {}",
                chain.len(),
                word.len()
            )));
        }
        if chain.iter().any(|m| m.rows() != self.dim || m.cols() != self.dim) {
            return Err(Error::Dimension(format!("chain matrices must be {0}x{0}", self.dim)));
        }
        self.chains.insert(word, chain);
        Ok(())
    }

    /// Single-variable scalar-valued sequence `ρ^(k) = values[k-1]·I_d`.
    pub fn from_scalar_sequence(dim: usize, values: &[crate::rational::Rational]) -> Self {
        let mut f = MatrixFunctionalSeq::new(dim, values.len(), true);
        for (k, v) in values.iter().enumerate() {
            let mut chain = vec![QMatrix::identity(dim); k + 1];
            chain[0] = QMatrix::scalar(dim, v.clone());
            f.set_chain(IndexWord::from(vec![1; k + 1]), chain).expect("valid chain");
        }
        f
    }
}

impl BFunctional for MatrixFunctionalSeq {
    fn dim(&self) -> usize {
        self.dim
    }

    fn max_order(&self) -> usize {
        self.max_order
    }

    fn commutative_base(&self) -> bool {
        self.commutative
    }

    fn coefficient_samples(&self) -> Vec<QMatrix> {
        self.chains.values().flatten().cloned().collect()
    }

    fn eval_core(&self, letters: &[usize], interior: &[QMatrix]) -> Result<QMatrix> {
        let word = IndexWord::new(letters.to_vec())?;
        let Some(chain) = self.chains.get(&word) else {
            return Ok(QMatrix::zeros(self.dim, self.dim));
        };
        let mut acc = chain[0].clone();
        for (c, m) in interior.iter().zip(&chain[1..]) {
            acc = acc.try_mul(c)?.try_mul(m)?;
        }
        Ok(acc)
    }
}

/// Which interval block the nested recursion extracts first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockChoice {
    Leftmost,
    Rightmost,
}

/// Rejects evaluation over non-noncrossing partitions unless the base is
/// declared commutative and the sampled commutator check passes.
fn check_commutative(rho: &dyn BFunctional, args: &[BArg]) -> Result<()> {
    if !rho.commutative_base() {
        return Err(Error::NoncommutativeBase(
            "block-product evaluation needs commutative_base = true".into(),
        ));
    }
    let mut samples = rho.coefficient_samples();
    for a in args {
        samples.push(a.left.clone());
        samples.push(a.right.clone());
    }
    // diagonal matrices commute with each other, so only pairs involving a
    // non-diagonal sample need checking
    let (general, _): (Vec<&QMatrix>, Vec<&QMatrix>) = samples.iter().partition(|m| !m.is_diagonal());
    for (i, a) in general.iter().enumerate() {
        for b in general[i + 1..].iter().copied().chain(samples.iter().filter(|m| m.is_diagonal())) {
            if !a.commutes_with(b) {
                return Err(Error::NoncommutativeBase(format!(
                    "sampled coefficients {a:?} and {b:?} do not commute"
                )));
            }
        }
    }
    Ok(())
}

/// `ρ^(π)` as the product over blocks; only meaningful for a commutative base.
pub fn eval_pi_block(rho: &dyn BFunctional, pi: &SetPartition, args: &[BArg]) -> Result<QMatrix> {
    if pi.ground_size() != args.len() {
        return Err(Error::GroundSizeMismatch(pi.ground_size(), args.len()));
    }
    check_commutative(rho, args)?;
    let mut acc = QMatrix::identity(rho.dim());
    for block in pi.blocks() {
        let sub: Vec<BArg> = block.iter().map(|&x| args[x - 1].clone()).collect();
        acc = acc.try_mul(&rho.eval(&sub)?)?;
    }
    Ok(acc)
}

/// `ρ^(π)` for noncrossing `π` by repeatedly evaluating an interval block
/// `V = (l+1,…,l+s)` and multiplying the result onto the argument at `l`
/// (or onto the left of the argument after `V` when `l = 0`).
pub fn eval_pi_nested(rho: &dyn BFunctional, pi: &SetPartition, args: &[BArg]) -> Result<QMatrix> {
    eval_pi_nested_with(rho, pi, args, BlockChoice::Leftmost)
}

pub fn eval_pi_nested_with(
    rho: &dyn BFunctional,
    pi: &SetPartition,
    args: &[BArg],
    choice: BlockChoice,
) -> Result<QMatrix> {
    if pi.ground_size() != args.len() {
        return Err(Error::GroundSizeMismatch(pi.ground_size(), args.len()));
    }
    if !pi.is_noncrossing() {
        return Err(Error::LatticeMismatch {
            partition: pi.to_string(),
            lattice: "noncrossing".into(),
        });
    }
    nested(rho, pi.clone(), args.to_vec(), choice)
}

fn nested(
    rho: &dyn BFunctional,
    pi: SetPartition,
    mut args: Vec<BArg>,
    choice: BlockChoice,
) -> Result<QMatrix> {
    match pi.num_blocks() {
        0 => return Ok(QMatrix::identity(rho.dim())),
        1 => return rho.eval(&args),
        _ => {}
    }
    let candidates: Vec<usize> = pi
        .blocks()
        .iter()
        .enumerate()
        .filter(|(_, b)| b.last().unwrap() - b[0] + 1 == b.len())
        .map(|(i, _)| i)
        .collect();
    // every nonempty noncrossing partition has an interval block
    let index = match choice {
        BlockChoice::Leftmost => candidates[0],
        BlockChoice::Rightmost => *candidates.last().unwrap(),
    };
    let block = &pi.blocks()[index];
    let (start, len) = (block[0] - 1, block.len());
    let inner: Vec<BArg> = args.drain(start..start + len).collect();
    let value = rho.eval(&inner)?;
    if start > 0 {
        let a = &mut args[start - 1];
        a.right = a.right.try_mul(&value)?;
    } else {
        let a = &mut args[0];
        a.left = value.try_mul(&a.left)?;
    }
    nested(rho, pi.remove_block(index), args, choice)
}

/// Operator-valued moment `E[a_1 ⋯ a_n] = Σ_{π ∈ L(n)} ρ^(π)(a_1,…,a_n)` where
/// `ρ` holds the cumulants of the given kind. Classical sums need a
/// commutative base.
pub fn operator_moment(rho: &dyn BFunctional, kind: CumulantKind, args: &[BArg]) -> Result<QMatrix> {
    let cache = LatticeCache::new(kind.lattice(), args.len());
    let mut acc = QMatrix::zeros(rho.dim(), rho.dim());
    for pi in cache.of_order(args.len()) {
        let term = match kind {
            CumulantKind::Classical => eval_pi_block(rho, pi, args)?,
            _ => eval_pi_nested(rho, pi, args)?,
        };
        acc = acc.try_add(&term)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn m(rows: &[&[i64]]) -> QMatrix {
        QMatrix::from_i64(rows)
    }

    fn p(s: &str) -> SetPartition {
        s.parse().unwrap()
    }

    /// Noncommutative test functional over M_2 with distinct chains per word.
    fn sample_functional() -> MatrixFunctionalSeq {
        let mut f = MatrixFunctionalSeq::new(2, 3, false);
        f.set_chain(IndexWord::from(vec![1]), vec![m(&[&[1, 2], &[0, 1]])]).unwrap();
        f.set_chain(IndexWord::from(vec![2]), vec![m(&[&[0, 1], &[1, 3]])]).unwrap();
        f.set_chain(
            IndexWord::from(vec![1, 2]),
            vec![m(&[&[2, 0], &[1, 1]]), m(&[&[1, -1], &[0, 2]])],
        )
        .unwrap();
        f.set_chain(
            IndexWord::from(vec![1, 1, 1]),
            vec![m(&[&[1, 0], &[1, 1]]), m(&[&[0, 1], &[1, 0]]), m(&[&[2, 1], &[0, 1]])],
        )
        .unwrap();
        f
    }

    #[test]
    fn bimodule_property() {
        let f = sample_functional();
        let (b0, b1, b2) = (m(&[&[1, 1], &[0, 2]]), m(&[&[0, 1], &[3, 1]]), m(&[&[2, 0], &[1, 1]]));
        let lhs = f
            .eval(&[
                BArg::new(b0.clone(), 1, b1.clone()),
                BArg::new(QMatrix::identity(2), 2, b2.clone()),
            ])
            .unwrap();
        let rhs_core = f
            .eval(&[BArg::plain(2, 1), BArg::new(b1, 2, QMatrix::identity(2))])
            .unwrap();
        assert_eq!(lhs, &(&b0 * &rhs_core) * &b2);
    }

    #[test]
    fn nested_single_block_is_plain_evaluation() {
        let f = sample_functional();
        let args = vec![BArg::plain(2, 1), BArg::plain(2, 2)];
        assert_eq!(eval_pi_nested(&f, &p("1 2"), &args).unwrap(), f.eval(&args).unwrap());
    }

    #[test]
    fn nested_forced_recursion_step() {
        // π = {1,3},{2}: ρ^(π)(a1,a2,a3) = ρ^(2)(a1·ρ^(1)(a2), a3)
        let mut f = sample_functional();
        f.set_chain(
            IndexWord::from(vec![1, 1]),
            vec![m(&[&[1, 3], &[2, 1]]), m(&[&[0, 1], &[1, 1]])],
        )
        .unwrap();
        let args = vec![BArg::plain(2, 1), BArg::plain(2, 2), BArg::plain(2, 1)];
        let inner = f.eval(&[BArg::plain(2, 2)]).unwrap();
        let expected = f
            .eval(&[BArg::new(QMatrix::identity(2), 1, inner), BArg::plain(2, 1)])
            .unwrap();
        assert_eq!(eval_pi_nested(&f, &p("1 3|2"), &args).unwrap(), expected);
    }

    #[test]
    fn nested_rejects_crossing() {
        let f = sample_functional();
        let args = vec![BArg::plain(2, 1); 4];
        assert!(matches!(
            eval_pi_nested(&f, &p("1 3|2 4"), &args),
            Err(Error::LatticeMismatch { .. })
        ));
    }

    #[test]
    fn block_product_requires_commutative_base() {
        let f = sample_functional();
        let args = vec![BArg::plain(2, 1), BArg::plain(2, 2)];
        assert!(matches!(
            eval_pi_block(&f, &p("1|2"), &args),
            Err(Error::NoncommutativeBase(_))
        ));
        // declared commutative, but the chains do not commute
        let mut lying = MatrixFunctionalSeq::new(2, 1, true);
        lying.set_chain(IndexWord::from(vec![1]), vec![m(&[&[0, 1], &[0, 0]])]).unwrap();
        lying.set_chain(IndexWord::from(vec![2]), vec![m(&[&[1, 0], &[0, 2]])]).unwrap();
        assert!(matches!(
            eval_pi_block(&lying, &p("1|2"), &args),
            Err(Error::NoncommutativeBase(_))
        ));
        assert!(operator_moment(&f, CumulantKind::Classical, &args).is_err());
    }

    #[test]
    fn scalar_sequence_reproduces_free_moments() {
        // κ2 = 1 only: fourth moment of the semicircle is 2
        let f = MatrixFunctionalSeq::from_scalar_sequence(2, &[int(0), int(1), int(0), int(0)]);
        let args = vec![BArg::plain(2, 1); 4];
        assert_eq!(
            operator_moment(&f, CumulantKind::Free, &args).unwrap(),
            QMatrix::scalar(2, int(2))
        );
        assert_eq!(
            operator_moment(&f, CumulantKind::Classical, &args).unwrap(),
            QMatrix::scalar(2, int(3))
        );
    }

    #[test]
    fn chain_validation() {
        let mut f = MatrixFunctionalSeq::new(2, 2, false);
        assert!(f.set_chain(IndexWord::from(vec![1, 1]), vec![QMatrix::identity(2)]).is_err());
        assert!(f.set_chain(IndexWord::from(vec![1]), vec![QMatrix::identity(3)]).is_err());
        assert!(f.set_chain(IndexWord::from(vec![1, 1, 1]), vec![QMatrix::identity(2); 3]).is_err());
    }
}
