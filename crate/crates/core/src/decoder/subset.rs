//! Exact search for the best encoder-reachable `k`-subset.
//!
//! The objective over a subset `S` of `0..n` is
//! `f(S) = Σ_{i∈S} d_i + Σ_{i≠j∈S} P_ij` with `P` real symmetric (its
//! diagonal is ignored). Only subsets whose lexicographic rank is below
//! `limit` are admissible; ties go to the lowest rank. The search is a
//! depth-first branch and bound in lexicographic order, so the admissible
//! region is a prefix of the traversal.

use crate::combinatorics::{binomial, rank_combination};

/// Objective `f(S)` defined by its diagonal and optional pair terms.
#[derive(Debug, Clone, Copy)]
pub struct SubsetObjective<'a> {
    pub diag: &'a [f64],
    /// Row-major `n x n` symmetric matrix, or `None` for an additive objective.
    pub pair: Option<&'a [f64]>,
}

/// A chosen subset with its objective value and lexicographic rank.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetChoice {
    pub positions: Vec<usize>,
    pub value: f64,
    pub rank: u128,
}

impl<'a> SubsetObjective<'a> {
    pub fn additive(diag: &'a [f64]) -> Self {
        SubsetObjective { diag, pair: None }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    fn p(&self, i: usize, j: usize) -> f64 {
        match self.pair {
            Some(p) => p[i * self.n() + j],
            None => 0.0,
        }
    }

    /// `f(S)` evaluated directly.
    pub fn value(&self, s: &[usize]) -> f64 {
        let mut v: f64 = s.iter().map(|&i| self.diag[i]).sum();
        if self.pair.is_some() {
            for (a, &i) in s.iter().enumerate() {
                for &j in &s[a + 1..] {
                    v += 2.0 * self.p(i, j);
                }
            }
        }
        v
    }

    /// Best subset of size `k` with rank below `limit`, or `None` when no
    /// subset is admissible.
    pub fn best_reachable(&self, k: usize, limit: u128) -> Option<SubsetChoice> {
        let n = self.n();
        if k == 0 || k > n || limit == 0 {
            return None;
        }
        let mut search = Search::new(self, k, limit, None);
        search.seed();
        search.descend(0, 0, 0.0);
        search.best
    }

    /// Like [`best_reachable`](Self::best_reachable) for an objective defined
    /// on a sorted subset `embed` of `0..ambient`: position `p` stands for
    /// index `embed[p]`, and admissibility uses the rank of the mapped subset
    /// among `k`-subsets of `0..ambient`. The returned positions are mapped.
    pub fn best_reachable_embedded(&self, k: usize, limit: u128, embed: &[usize], ambient: usize) -> Option<SubsetChoice> {
        let n = self.n();
        if k == 0 || k > n || limit == 0 {
            return None;
        }
        debug_assert!(embed.len() == n && embed.windows(2).all(|w| w[0] < w[1]));
        let mut search = Search::new(self, k, limit, Some((embed, ambient)));
        search.seed();
        search.descend(0, 0, 0.0);
        search.best.map(|mut b| {
            b.positions = b.positions.iter().map(|&p| embed[p]).collect();
            b
        })
    }
}

struct Search<'o, 'a> {
    obj: &'o SubsetObjective<'a>,
    embed: Option<&'o [usize]>,
    n: usize,
    k: usize,
    limit: u128,
    /// Size of the index space ranks are taken in.
    ambient: usize,
    /// `C(x, j)` at `x * (k + 1) + j` for `x < ambient`, `j <= k`.
    binom: Vec<u128>,
    total: u128,
    /// `top[r * k + q]`: sum of the `q` largest off-diagonal entries of row `r`.
    top: Vec<f64>,
    /// `2 Σ_{p∈prefix} P_rp` for every `r`.
    link: Vec<f64>,
    /// Additive objectives only: `suffix[a * k + q]` is the sum of the `q`
    /// largest `d_r` with `r >= a`, for `a <= n`.
    suffix: Vec<f64>,
    prefix: Vec<usize>,
    best: Option<SubsetChoice>,
    scratch: Vec<f64>,
}

impl<'o, 'a> Search<'o, 'a> {
    fn new(obj: &'o SubsetObjective<'a>, k: usize, limit: u128, embed: Option<(&'o [usize], usize)>) -> Self {
        let n = obj.n();
        let ambient = embed.map_or(n, |e| e.1);
        let mut binom = vec![0u128; ambient * (k + 1)];
        for x in 0..ambient {
            for j in 0..=k {
                binom[x * (k + 1) + j] = binomial(x, j).expect("subset counts fit in u128");
            }
        }
        let total = binomial(ambient, k).expect("subset counts fit in u128");
        let mut top = vec![0.0; n * k];
        if obj.pair.is_some() && k > 1 {
            let mut row = Vec::with_capacity(n);
            for r in 0..n {
                row.clear();
                row.extend((0..n).filter(|&j| j != r).map(|j| obj.p(r, j)));
                let q = (k - 1).min(row.len());
                if q == 0 {
                    continue;
                }
                if q < row.len() {
                    row.select_nth_unstable_by(q - 1, |a, b| b.total_cmp(a));
                }
                row[..q].sort_unstable_by(|a, b| b.total_cmp(a));
                for i in 1..k {
                    let add = if i <= q { row[i - 1] } else { 0.0 };
                    top[r * k + i] = top[r * k + i - 1] + add;
                }
            }
        }
        let suffix = if obj.pair.is_none() { suffix_top_sums(obj.diag, k) } else { Vec::new() };
        Search {
            obj,
            embed: embed.map(|e| e.0),
            n,
            k,
            limit,
            ambient,
            binom,
            total,
            top,
            link: vec![0.0; n],
            suffix,
            prefix: Vec::with_capacity(k),
            best: None,
            scratch: Vec::with_capacity(n),
        }
    }

    fn index(&self, p: usize) -> usize {
        self.embed.map_or(p, |e| e[p])
    }

    /// Lexicographic rank among `k`-subsets of `0..ambient` of the mapped
    /// positions `pos(0) < ... < pos(k-1)`.
    fn rank_of(&self, pos: impl Fn(usize) -> usize) -> u128 {
        let k = self.k;
        let tail: u128 = (0..k)
            .map(|i| self.binom_at(self.ambient - 1 - self.index(pos(i)), k - i))
            .sum();
        self.total - 1 - tail
    }

    fn binom_at(&self, x: usize, j: usize) -> u128 {
        self.binom[x * (self.k + 1) + j]
    }

    fn offer(&mut self, positions: &[usize], value: f64, rank: u128) {
        if rank >= self.limit {
            return;
        }
        let better = match &self.best {
            None => true,
            Some(b) => value > b.value || (value == b.value && rank < b.rank),
        };
        if better {
            self.best = Some(SubsetChoice {
                positions: positions.to_vec(),
                value,
                rank,
            });
        }
    }

    /// Starts from the subset of the `k` largest single-index bounds.
    fn seed(&mut self) {
        let q = self.k - 1;
        let mut order: Vec<usize> = (0..self.n).collect();
        let key = |i: usize| self.obj.diag[i] + self.top[i * self.k + q];
        order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
        let mut s: Vec<usize> = order[..self.k].to_vec();
        s.sort_unstable();
        let v = self.obj.value(&s);
        let rank = self.rank_of(|i| s[i]);
        self.offer(&s, v, rank);
        if self.obj.pair.is_some() {
            self.seed_greedy();
        }
    }

    /// Grows a subset one index at a time by largest marginal gain.
    fn seed_greedy(&mut self) {
        let n = self.n;
        let mut gain: Vec<f64> = self.obj.diag.to_vec();
        let mut chosen = vec![false; n];
        let mut s = Vec::with_capacity(self.k);
        for _ in 0..self.k {
            let Some(c) = (0..n).filter(|&i| !chosen[i]).max_by(|&a, &b| gain[a].total_cmp(&gain[b]).then(b.cmp(&a))) else {
                return;
            };
            chosen[c] = true;
            s.push(c);
            for (r, g) in gain.iter_mut().enumerate() {
                *g += 2.0 * self.obj.p(r, c);
            }
        }
        s.sort_unstable();
        let v = self.obj.value(&s);
        let rank = self.rank_of(|i| s[i]);
        self.offer(&s, v, rank);
    }

    /// Rank of the smallest completion of `prefix + [c]`.
    fn first_completion_rank(&self, c: usize) -> u128 {
        let d = self.prefix.len();
        self.rank_of(|i| if i < d { self.prefix[i] } else { c + (i - d) })
    }

    fn slack(&self) -> f64 {
        match &self.best {
            Some(b) => b.value - 1e-12 * (1.0 + b.value.abs()),
            None => f64::NEG_INFINITY,
        }
    }

    /// Upper bound on the best completion picking `remaining` indices above `after`.
    fn bound(&mut self, after: usize, remaining: usize) -> f64 {
        if remaining == 0 {
            return 0.0;
        }
        if self.n - after - 1 < remaining {
            return f64::NEG_INFINITY;
        }
        if self.obj.pair.is_none() {
            return self.suffix[(after + 1) * self.k + remaining];
        }
        self.scratch.clear();
        for r in after + 1..self.n {
            self.scratch
                .push(self.obj.diag[r] + self.link[r] + self.top[r * self.k + remaining - 1]);
        }
        let len = self.scratch.len();
        self.scratch
            .select_nth_unstable_by(len - remaining, |a, b| a.total_cmp(b));
        self.scratch[len - remaining..].iter().sum()
    }

    fn descend(&mut self, depth: usize, start: usize, value: f64) {
        let remaining_after = self.k - depth - 1;
        let last = self.n - remaining_after;
        let check = self.limit < self.total;
        for c in start..last {
            let rank = if check || remaining_after == 0 { self.first_completion_rank(c) } else { 0 };
            if rank >= self.limit {
                break;
            }
            let v = value + self.obj.diag[c] + self.link[c];
            if remaining_after == 0 {
                let improves = match &self.best {
                    None => true,
                    Some(b) => v > b.value || (v == b.value && rank < b.rank),
                };
                if improves {
                    self.prefix.push(c);
                    let s = std::mem::take(&mut self.prefix);
                    self.offer(&s, v, rank);
                    self.prefix = s;
                    self.prefix.pop();
                }
                continue;
            }
            if let Some(p) = self.obj.pair {
                for r in c + 1..self.n {
                    self.link[r] += 2.0 * p[r * self.n + c];
                }
            }
            let b = v + self.bound(c, remaining_after);
            if b >= self.slack() {
                self.prefix.push(c);
                self.descend(depth + 1, c + 1, v);
                self.prefix.pop();
            }
            if let Some(p) = self.obj.pair {
                for r in c + 1..self.n {
                    self.link[r] -= 2.0 * p[r * self.n + c];
                }
            }
        }
    }
}

/// `out[a * k + q]` = sum of the `q` largest `d_r` with `r >= a`, for
/// `a <= n` and `q < k`. Linear in `n` for fixed `k`.
fn suffix_top_sums(d: &[f64], k: usize) -> Vec<f64> {
    let n = d.len();
    let mut out = vec![0.0; (n + 1) * k];
    // The k - 1 largest values seen so far, descending.
    let mut best: Vec<f64> = Vec::with_capacity(k);
    for a in (0..n).rev() {
        let v = d[a];
        let pos = best.partition_point(|&b| b >= v);
        if pos < k.saturating_sub(1) {
            best.insert(pos, v);
            best.truncate(k - 1);
        }
        let row = &mut out[a * k..(a + 1) * k];
        for q in 1..k {
            row[q] = row[q - 1] + best.get(q - 1).copied().unwrap_or(f64::NEG_INFINITY);
        }
    }
    out
}

/// Up to `s` best admissible `k`-subsets of an additive objective, best first.
///
/// Candidates are the `k`-subsets of the `k + s - 1` highest-scoring
/// positions (which contain the unconstrained top `s`), filtered by
/// `rank < limit`. The best admissible subset overall is always included.
pub fn top_additive_subsets(scores: &[f64], k: usize, s: usize, limit: u128) -> Vec<SubsetChoice> {
    let n = scores.len();
    if k == 0 || k > n || s == 0 {
        return Vec::new();
    }
    let obj = SubsetObjective::additive(scores);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let pool_len = (k + s - 1).min(n);
    let mut pool: Vec<usize> = order[..pool_len].to_vec();
    pool.sort_unstable();
    let mut out: Vec<SubsetChoice> = Vec::new();
    for_each_subset(pool_len, k, |idx| {
        let positions: Vec<usize> = idx.iter().map(|&i| pool[i]).collect();
        let rank = rank_combination(&positions, n).expect("valid subset");
        if rank < limit {
            out.push(SubsetChoice {
                value: obj.value(&positions),
                positions,
                rank,
            });
        }
    });
    if let Some(best) = obj.best_reachable(k, limit) {
        if !out.iter().any(|c| c.rank == best.rank) {
            out.push(best);
        }
    }
    out.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.rank.cmp(&b.rank)));
    out.truncate(s);
    out
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_subset<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
