use std::cmp::Ordering;
use std::fmt;

/// A generator `u_{i,j}` (1-based) or the projection `P`. The derived order is
/// `u_{11} < u_{12} < … < u_{nn} < P`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    U(u16, u16),
    P,
}

impl Generator {
    pub fn u(i: usize, j: usize) -> Self {
        assert!(i >= 1 && j >= 1, "generator indices are 1-based");
        Generator::U(i as u16, j as u16)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::U(i, j) => write!(f, "u({i},{j})"),
            Generator::P => f.write_str("P"),
        }
    }
}

/// A monomial in the generators; the empty word is the unit.
/// Ordered length-lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Generator>);

impl Word {
    pub fn unit() -> Self {
        Word(Vec::new())
    }

    pub fn new(gens: Vec<Generator>) -> Self {
        Word(gens)
    }

    pub fn single(g: Generator) -> Self {
        Word(vec![g])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for g in &self.0 {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// `u_{i1,j1} ⋯ u_{ik,jk}` for index words `i`, `j` of equal length.
pub fn u_product(rows: &[usize], cols: &[usize]) -> Word {
    assert_eq!(rows.len(), cols.len());
    Word(rows.iter().zip(cols).map(|(&i, &j)| Generator::u(i, j)).collect())
}

/// Tensor monomial `w_1 ⊗ ⋯ ⊗ w_t`, compared component by component.
pub type TensorWord = Vec<Word>;

pub(crate) fn format_tensor(tw: &[Word]) -> String {
    tw.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ⊗ ")
}
