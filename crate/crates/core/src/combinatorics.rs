//! Lexicographic ranking of k-subsets and of multiset arrangements.

use crate::error::{BossError, Result};

/// Binomial coefficient `C(n, k)`, or `None` on `u128` overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn binom(n: usize, k: usize) -> u128 {
    binomial(n, k).expect("binomial overflow; sizes are validated by CodeConfig")
}

/// `⌊log2 v⌋` for `v >= 1`.
pub fn floor_log2(v: u128) -> u32 {
    debug_assert!(v > 0);
    127 - v.leading_zeros()
}

/// Returns the `rank`-th `k`-subset of `0..n` in lexicographic order.
pub fn unrank_combination(rank: u128, n: usize, k: usize) -> Result<Vec<usize>> {
    let total = binomial(n, k).ok_or_else(|| {
        BossError::ParameterOutOfRange(format!("C({n},{k}) overflows u128"))
    })?;
    if rank >= total {
        return Err(BossError::RankOutOfRange { rank, bound: total });
    }
    let mut out = Vec::with_capacity(k);
    let mut rank = rank;
    let mut v = 0usize;
    for i in 0..k {
        loop {
            let count = binom(n - 1 - v, k - 1 - i);
            if rank < count {
                out.push(v);
                v += 1;
                break;
            }
            rank -= count;
            v += 1;
        }
    }
    Ok(out)
}

/// Lexicographic rank of a strictly increasing subset of `0..n`.
pub fn rank_combination(subset: &[usize], n: usize) -> Result<u128> {
    let k = subset.len();
    for w in subset.windows(2) {
        if w[0] >= w[1] {
            return Err(BossError::InvalidMessage(format!(
                "subset {subset:?} is not strictly increasing"
            )));
        }
    }
    if let Some(&last) = subset.last() {
        if last >= n {
            return Err(BossError::IndexOutOfRange { index: last, bound: n });
        }
    }
    let total = binomial(n, k).ok_or_else(|| {
        BossError::ParameterOutOfRange(format!("C({n},{k}) overflows u128"))
    })?;
    // rank = C(n,k) - 1 - Σ_i C(n-1-c_i, k-i)
    let tail: u128 = subset
        .iter()
        .enumerate()
        .map(|(i, &c)| binom(n - 1 - c, k - i))
        .sum();
    Ok(total - 1 - tail)
}

/// Multiset description of an alphabet: distinct value classes in
/// first-occurrence order and how many times each class occurs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multiset {
    pub class_of: Vec<usize>,
    pub counts: Vec<usize>,
}

impl Multiset {
    /// Classes are assigned by exact equality of the keys.
    pub fn from_keys<K: PartialEq>(keys: &[K]) -> Self {
        let mut reps: Vec<&K> = Vec::new();
        let mut counts = Vec::new();
        let mut class_of = Vec::with_capacity(keys.len());
        for key in keys {
            match reps.iter().position(|r| *r == key) {
                Some(c) => {
                    counts[c] += 1;
                    class_of.push(c);
                }
                None => {
                    reps.push(key);
                    counts.push(1);
                    class_of.push(reps.len() - 1);
                }
            }
        }
        Multiset { class_of, counts }
    }

    pub fn len(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of distinct arrangements `n! / Π c_i!`.
    pub fn arrangement_count(&self) -> Option<u128> {
        multinomial(&self.counts)
    }
}

fn multinomial(counts: &[usize]) -> Option<u128> {
    let mut acc: u128 = 1;
    let mut placed = 0usize;
    for &c in counts {
        placed += c;
        acc = acc.checked_mul(binomial(placed, c)?)?;
    }
    Some(acc)
}

/// Returns the `rank`-th distinct arrangement (lexicographic in class index)
/// of the multiset, as a sequence of class indices.
pub fn unrank_multiset(rank: u128, set: &Multiset) -> Result<Vec<usize>> {
    let total = set
        .arrangement_count()
        .ok_or_else(|| BossError::ParameterOutOfRange("arrangement count overflows".into()))?;
    if rank >= total {
        return Err(BossError::RankOutOfRange { rank, bound: total });
    }
    let mut counts = set.counts.clone();
    let mut rank = rank;
    let n = set.len();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        for class in 0..counts.len() {
            if counts[class] == 0 {
                continue;
            }
            counts[class] -= 1;
            let below = multinomial(&counts).expect("bounded by total");
            if rank < below {
                out.push(class);
                break;
            }
            rank -= below;
            counts[class] += 1;
        }
    }
    Ok(out)
}

/// Inverse of [`unrank_multiset`].
pub fn rank_multiset(classes: &[usize], set: &Multiset) -> Result<u128> {
    let mut counts = set.counts.clone();
    if classes.len() != set.len() {
        return Err(BossError::WrongLength {
            expected: set.len(),
            got: classes.len(),
        });
    }
    let mut rank: u128 = 0;
    for &c in classes {
        if c >= counts.len() || counts[c] == 0 {
            return Err(BossError::InvalidMessage(format!(
                "arrangement {classes:?} is not a permutation of the alphabet"
            )));
        }
        for smaller in 0..c {
            if counts[smaller] > 0 {
                counts[smaller] -= 1;
                rank += multinomial(&counts).expect("bounded");
                counts[smaller] += 1;
            }
        }
        counts[c] -= 1;
    }
    Ok(rank)
}
