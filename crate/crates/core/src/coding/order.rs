//! Output sequences in decreasing product likelihood.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug)]
struct Node {
    prob: f64,
    index: u64,
    ranks: Vec<usize>,
    pivot: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap: higher probability first, then smaller index
    fn cmp(&self, other: &Self) -> Ordering {
        self.prob.total_cmp(&other.prob).then_with(|| other.index.cmp(&self.index))
    }
}

/// Enumerates `z^n` with `prod_j rows[j][z_j] > 0` in non-increasing order of
/// that product. Each position's symbols are ranked by probability; a rank
/// vector is generated only from the parent obtained by decrementing its last
/// nonzero rank, so every sequence appears exactly once.
pub(crate) struct LikelihoodOrder<'a> {
    rows: Vec<&'a [f64]>,
    ranked: Vec<Vec<usize>>,
    q: u64,
    heap: BinaryHeap<Node>,
}

impl<'a> LikelihoodOrder<'a> {
    pub(crate) fn new(rows: Vec<&'a [f64]>) -> Self {
        let q = rows.first().map_or(1, |r| r.len()) as u64;
        let ranked: Vec<Vec<usize>> = rows
            .iter()
            .map(|row| {
                let mut syms: Vec<usize> = (0..row.len()).filter(|&z| row[z] > 0.0).collect();
                syms.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
                syms
            })
            .collect();
        let mut order = LikelihoodOrder { rows, ranked, q, heap: BinaryHeap::new() };
        if order.ranked.iter().all(|r| !r.is_empty()) {
            let root = order.node(vec![0; order.rows.len()], 0);
            order.heap.push(root);
        }
        order
    }

    fn node(&self, ranks: Vec<usize>, pivot: usize) -> Node {
        let mut prob = 1.0;
        let mut index = 0u64;
        for (j, &r) in ranks.iter().enumerate() {
            let z = self.ranked[j][r];
            prob *= self.rows[j][z];
            index = index * self.q + z as u64;
        }
        Node { prob, index, ranks, pivot }
    }

    fn symbols(&self, ranks: &[usize]) -> Vec<usize> {
        ranks.iter().enumerate().map(|(j, &r)| self.ranked[j][r]).collect()
    }
}

impl Iterator for LikelihoodOrder<'_> {
    /// `(index, sequence, probability)`
    type Item = (u64, Vec<usize>, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.heap.pop()?;
        for j in node.pivot..node.ranks.len() {
            if node.ranks[j] + 1 < self.ranked[j].len() {
                let mut ranks = node.ranks.clone();
                ranks[j] += 1;
                let child = self.node(ranks, j);
                self.heap.push(child);
            }
        }
        let seq = self.symbols(&node.ranks);
        Some((node.index, seq, node.prob))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::seq::{all_sequences, seq_to_index};

    #[test]
    fn visits_support_once_in_decreasing_order() {
        let a = [0.7, 0.2, 0.1];
        let b = [0.5, 0.0, 0.5];
        let c = [0.05, 0.9, 0.05];
        let items: Vec<_> = LikelihoodOrder::new(vec![&a, &b, &c, &a]).collect();
        let rows = [&a[..], &b[..], &c[..], &a[..]];
        let support: Vec<Vec<usize>> =
            all_sequences(3, 4).filter(|z| z.iter().enumerate().all(|(j, &s)| rows[j][s] > 0.0)).collect();
        assert_eq!(items.len(), support.len());
        let mut seen: Vec<u64> = items.iter().map(|t| t.0).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), support.len());
        for w in items.windows(2) {
            assert!(w[0].2 >= w[1].2);
        }
        for (index, seq, prob) in &items {
            assert_eq!(*index, seq_to_index(seq, 3));
            let expect: f64 = seq.iter().enumerate().map(|(j, &s)| rows[j][s]).product();
            assert!((prob - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_support_yields_nothing() {
        let a = [0.0, 0.0];
        assert_eq!(LikelihoodOrder::new(vec![&a]).count(), 0);
        assert_eq!(LikelihoodOrder::new(vec![]).count(), 1);
    }
}
