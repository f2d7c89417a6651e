//! Brute-force oracles, written independently of `finetti-core`, that the
//! acceptance suite compares the library against.

use std::collections::HashMap;

use finetti_core::cumulants::MomentFunctional;
use finetti_core::partitions::IndexWord;
use finetti_core::Rational;

/// Blocks of a set partition of `{1..k}`, each sorted, in no particular order.
pub type Blocks = Vec<Vec<usize>>;

/// All set partitions of `{1..k}` by inserting each point into an existing
/// block or a new one.
pub fn set_partitions(k: usize) -> Vec<Blocks> {
    let mut out = vec![Vec::new()];
    for x in 1..=k {
        let mut next = Vec::new();
        for p in &out {
            for b in 0..p.len() {
                let mut q: Blocks = p.clone();
                q[b].push(x);
                next.push(q);
            }
            let mut q = p.clone();
            q.push(vec![x]);
            next.push(q);
        }
        out = next;
    }
    out
}

/// Some `a < b < c < d` with `a, c` in one block and `b, d` in another.
pub fn has_crossing(p: &Blocks) -> bool {
    for (i, u) in p.iter().enumerate() {
        for (j, v) in p.iter().enumerate() {
            if i == j {
                continue;
            }
            for &a in u {
                for &c in u.iter().filter(|&&c| c > a) {
                    if v.iter().any(|&b| a < b && b < c) && v.iter().any(|&d| d > c) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

pub fn is_interval(p: &Blocks) -> bool {
    p.iter().all(|b| b.windows(2).all(|w| w[1] == w[0] + 1))
}

/// Block-size filter by name: `any`, `even`, `le2`, `eq2`.
pub fn block_sizes_ok(p: &Blocks, rule: &str) -> bool {
    p.iter().all(|b| match rule {
        "any" => true,
        "even" => b.len() % 2 == 0,
        "le2" => b.len() <= 2,
        "eq2" => b.len() == 2,
        _ => panic!("unknown rule {rule}"),
    })
}

/// Brute-force count of partitions of `{1..k}` in a lattice (`all`, `nc`,
/// `interval`) with a block-size rule.
pub fn count(k: usize, lattice: &str, rule: &str) -> usize {
    set_partitions(k)
        .iter()
        .filter(|p| match lattice {
            "all" => true,
            "nc" => !has_crossing(p),
            "interval" => is_interval(p),
            _ => panic!("unknown lattice {lattice}"),
        })
        .filter(|p| block_sizes_ok(p, rule))
        .count()
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn catalan(m: u64) -> u64 {
    binomial(2 * m, m) / (m + 1)
}

/// `(2m − 1)!!`
pub fn odd_double_factorial(m: u64) -> u64 {
    (1..=m).map(|i| 2 * i - 1).product()
}

/// Bell numbers from the Bell triangle.
pub fn bell(k: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 1..k {
        let mut next = vec![*row.last().unwrap()];
        for x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
    }
    *row.last().unwrap()
}

/// First-occurrence relabelling of a word, e.g. `(3,1,3) → (0,1,0)`.
pub fn pattern(w: &[usize]) -> Vec<usize> {
    let mut seen: Vec<usize> = Vec::new();
    w.iter()
        .map(|x| match seen.iter().position(|y| y == x) {
            Some(i) => i,
            None => {
                seen.push(*x);
                seen.len() - 1
            }
        })
        .collect()
}

/// All nonempty words of length `≤ k` over `{1..n}`.
pub fn words(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for w in &layer {
            for x in 1..=n {
                let mut v: Vec<usize> = w.clone();
                v.push(x);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// `μ(w)` depends only on the equality pattern of `w`.
pub fn kernel_dependent(mom: &MomentFunctional, n: usize, k: usize) -> bool {
    let mut by_pattern: HashMap<Vec<usize>, Rational> = HashMap::new();
    for w in words(n, k) {
        let v = mom.get(&IndexWord::from(w.clone()));
        match by_pattern.get(&pattern(&w)) {
            Some(prev) if *prev != v => return false,
            Some(_) => {}
            None => {
                by_pattern.insert(pattern(&w), v);
            }
        }
    }
    true
}

/// `μ(w) = 0` whenever some letter occurs an odd number of times in `w`.
pub fn odd_profile_vanishes(mom: &MomentFunctional, n: usize, k: usize) -> bool {
    words(n, k).into_iter().all(|w| {
        let odd = (1..=n).any(|x| w.iter().filter(|&&y| y == x).count() % 2 == 1);
        !odd || mom.get(&IndexWord::from(w)) == Rational::from_integer(0.into())
    })
}
