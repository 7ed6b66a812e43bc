//! Exhaustive search for an "all-singular" partition of a cluster.
//!
//! A cluster passes at block budget `m` iff every partition of it into at
//! most `m` nonempty blocks has a block with a nonsingular Gram matrix. The
//! search plays the adversary: it builds restricted-growth strings one element
//! at a time and abandons a branch as soon as some block becomes nonsingular.

use crate::linalg::{gram_of_rows, is_nonsingular};
use crate::model::Dataset;

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    /// No all-singular partition exists.
    Pass,
    /// An all-singular partition (blocks of row indices).
    Fail(Vec<Vec<usize>>),
    /// Cluster larger than the enumeration guard.
    Undecided,
}

struct Search<'a> {
    data: &'a Dataset,
    rows: &'a [usize],
    budget: usize,
    rank_tol: f64,
    blocks: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn block_singular(&self, b: usize) -> bool {
        // fewer than n vectors can never span R^n
        if self.blocks[b].len() < self.data.dim() {
            return true;
        }
        let rows = self.blocks[b].iter().map(|&k| self.data.row(k));
        !is_nonsingular(&gram_of_rows(rows, self.data.dim()), self.rank_tol)
    }

    fn place(&mut self, pos: usize) -> bool {
        if pos == self.rows.len() {
            return true;
        }
        let row = self.rows[pos];
        let open = self.blocks.len();
        for b in 0..open {
            self.blocks[b].push(row);
            if self.block_singular(b) && self.place(pos + 1) {
                return true;
            }
            self.blocks[b].pop();
        }
        if open < self.budget {
            self.blocks.push(vec![row]);
            if self.block_singular(open) && self.place(pos + 1) {
                return true;
            }
            self.blocks.pop();
        }
        false
    }
}

/// Decide whether `rows` can be split into at most `budget` nonempty blocks
/// that all have singular Gram matrices.
pub fn find_singular_partition(
    data: &Dataset,
    rows: &[usize],
    budget: usize,
    rank_tol: f64,
    max_block_size: usize,
) -> SearchOutcome {
    if rows.is_empty() {
        // the empty partition: vacuously all-singular
        return SearchOutcome::Fail(Vec::new());
    }
    if budget == 0 {
        return SearchOutcome::Pass;
    }
    if budget == 1 {
        let g = gram_of_rows(rows.iter().map(|&k| data.row(k)), data.dim());
        return if is_nonsingular(&g, rank_tol) {
            SearchOutcome::Pass
        } else {
            SearchOutcome::Fail(vec![rows.to_vec()])
        };
    }
    if rows.len() > max_block_size {
        return SearchOutcome::Undecided;
    }
    let mut search = Search {
        data,
        rows,
        budget,
        rank_tol,
        blocks: Vec::new(),
    };
    if search.place(0) {
        SearchOutcome::Fail(search.blocks)
    } else {
        SearchOutcome::Pass
    }
}

/// True iff every block of the partition has a singular Gram matrix.
pub fn all_blocks_singular(data: &Dataset, blocks: &[Vec<usize>], rank_tol: f64) -> bool {
    blocks.iter().all(|b| {
        let g = gram_of_rows(b.iter().map(|&k| data.row(k)), data.dim());
        !is_nonsingular(&g, rank_tol)
    })
}

/// Restricted-growth strings of length `len` with at most `max_blocks` distinct values.
/// Used by tests as an unpruned reference enumeration.
pub fn restricted_growth_strings(len: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, len: usize, max_blocks: usize, used: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in 0..=used.min(max_blocks.saturating_sub(1)) {
            cur.push(v);
            rec(cur, len, max_blocks, used.max(v + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if len == 0 || max_blocks > 0 {
        rec(&mut Vec::with_capacity(len), len, max_blocks, 0, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::DEFAULT_RANK_TOL;

    #[test]
    fn rgs_counts_match_stirling_sums() {
        // sum_{j<=k} S(n, j): n=4 -> 1, 8, 14, 15
        assert_eq!(restricted_growth_strings(4, 1).len(), 1);
        assert_eq!(restricted_growth_strings(4, 2).len(), 8);
        assert_eq!(restricted_growth_strings(4, 3).len(), 14);
        assert_eq!(restricted_growth_strings(4, 4).len(), 15);
        assert_eq!(restricted_growth_strings(6, 6).len(), 203);
    }

    #[test]
    fn singleton_split_of_example_one() {
        let (_, d) = fixtures::example1();
        let out = find_singular_partition(&d, &[0, 1], 2, DEFAULT_RANK_TOL, 14);
        assert_eq!(out, SearchOutcome::Fail(vec![vec![0], vec![1]]));
        assert_eq!(
            find_singular_partition(&d, &[0, 1], 1, DEFAULT_RANK_TOL, 14),
            SearchOutcome::Pass
        );
    }

    #[test]
    fn augmented_cluster_passes() {
        let (_, d) = fixtures::example1_augmented();
        assert_eq!(
            find_singular_partition(&d, &[0, 1, 4], 2, DEFAULT_RANK_TOL, 14),
            SearchOutcome::Pass
        );
    }

    #[test]
    fn guard_returns_undecided() {
        let (_, d) = fixtures::example2();
        let rows: Vec<usize> = (0..8).collect();
        assert_eq!(
            find_singular_partition(&d, &rows, 2, DEFAULT_RANK_TOL, 5),
            SearchOutcome::Undecided
        );
    }
}
