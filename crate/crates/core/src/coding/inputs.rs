//! Which input sequences of a class `A_i^n` have to be checked.
//!
//! Preimage symbols with the same channel row and the same conditional
//! probability are interchangeable: they have equal error against any region
//! and equal conditional-typicality statistics. Checking one representative
//! of each ordered sequence of such kinds is therefore exact.

use crate::error::{Error, Result};
use crate::model::seq::{ProductIter, ENUMERATION_GUARD};
use crate::model::{DMChannel, DetFunction, Pmf};
use crate::typicality::ConditionalModel;

#[derive(Debug, Clone)]
pub(crate) struct Kind {
    pub(crate) row: Vec<f64>,
    pub(crate) neg_log_cond: f64,
    /// Preimage symbols of this kind, ascending.
    pub(crate) members: Vec<usize>,
}

/// Kinds of every codomain symbol.
#[derive(Debug, Clone)]
pub(crate) struct KindTable {
    per_y: Vec<Vec<Kind>>,
    model: ConditionalModel,
}

impl KindTable {
    pub(crate) fn new(source: &Pmf, f: &DetFunction, channel: &DMChannel) -> Self {
        let model = ConditionalModel::new(source, f);
        let per_y = (0..f.codomain().len())
            .map(|y| {
                let mut kinds: Vec<Kind> = Vec::new();
                for &x in f.preimage(y) {
                    let row = channel.row(x);
                    let nl = model.neg_log_cond[x];
                    match kinds.iter_mut().find(|k| k.row == row && k.neg_log_cond.to_bits() == nl.to_bits()) {
                        Some(k) => k.members.push(x),
                        None => kinds.push(Kind { row: row.to_vec(), neg_log_cond: nl, members: vec![x] }),
                    }
                }
                kinds
            })
            .collect();
        KindTable { per_y, model }
    }

    /// Kind of preimage symbol `x` of `y`.
    pub(crate) fn kind_of(&self, y: usize, x: usize) -> Option<usize> {
        self.per_y[y].iter().position(|k| k.members.contains(&x))
    }

    /// Kind sequences of `A^n(yseq)` to check: every one when `delta` is
    /// `None`, else only those that are conditionally typical.
    pub(crate) fn checked(&self, yseq: &[usize], delta: Option<f64>) -> Result<Vec<Vec<usize>>> {
        let choices: Vec<Vec<usize>> = yseq
            .iter()
            .enumerate()
            .map(|(j, &y)| {
                let ks = &self.per_y[y];
                if ks.is_empty() {
                    return Err(Error::EmptyPreimage(j));
                }
                Ok((0..ks.len()).filter(|&k| delta.is_none() || ks[k].neg_log_cond.is_finite()).collect())
            })
            .collect::<Result<_>>()?;
        let size = choices.iter().try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128));
        match size {
            Some(s) if s <= ENUMERATION_GUARD => {}
            Some(s) => return Err(Error::TooLarge(s)),
            None => return Err(Error::TooLarge(u128::MAX)),
        }
        let refs: Vec<&[usize]> = choices.iter().map(Vec::as_slice).collect();
        let Some(delta) = delta else {
            return Ok(ProductIter::new(refs).collect());
        };
        let centre = self.model.centre(yseq);
        let n = yseq.len().max(1) as f64;
        Ok(ProductIter::new(refs)
            .filter(|ks| {
                let stat = ks.iter().zip(yseq).map(|(&k, &y)| self.per_y[y][k].neg_log_cond).sum::<f64>() / n;
                self.model.stat_matches(stat, centre, delta)
            })
            .collect())
    }

    /// Per-position channel rows of a kind sequence.
    pub(crate) fn rows<'a>(&'a self, yseq: &[usize], kinds: &[usize]) -> Vec<&'a [f64]> {
        yseq.iter().zip(kinds).map(|(&y, &k)| self.per_y[y][k].row.as_slice()).collect()
    }

    /// Number of input sequences a kind sequence stands for.
    pub(crate) fn multiplicity(&self, yseq: &[usize], kinds: &[usize]) -> u128 {
        yseq.iter().zip(kinds).map(|(&y, &k)| self.per_y[y][k].members.len() as u128).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Alphabet;
    use crate::typicality::{cond_typical_set, CondTypicalSpec};

    fn setup(source: &[f64]) -> (Pmf, DetFunction, DMChannel) {
        let a = Alphabet::new(["00", "01", "10", "11"]).unwrap();
        let f = DetFunction::new(a.clone(), Alphabet::binary(), vec![0, 0, 0, 1]).unwrap();
        let ch = DMChannel::new(
            a.clone(),
            Alphabet::binary(),
            vec![vec![0.9, 0.1], vec![0.9, 0.1], vec![0.8, 0.2], vec![0.1, 0.9]],
        )
        .unwrap();
        (Pmf::new(a, source.to_vec()).unwrap(), f, ch)
    }

    #[test]
    fn groups_by_row_and_probability() {
        let (src, f, ch) = setup(&[0.25; 4]);
        let t = KindTable::new(&src, &f, &ch);
        assert_eq!(t.per_y[0].len(), 2);
        assert_eq!(t.per_y[0][0].members, vec![0, 1]);
        assert_eq!(t.per_y[1].len(), 1);
        let (src, f, ch) = setup(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(KindTable::new(&src, &f, &ch).per_y[0].len(), 3);
    }

    #[test]
    fn multiplicities_count_typical_members() {
        for (source, delta) in [([0.25; 4], 0.0), ([0.1, 0.2, 0.3, 0.4], 0.2), ([0.1, 0.2, 0.3, 0.4], 0.05)] {
            let (src, f, ch) = setup(&source);
            let t = KindTable::new(&src, &f, &ch);
            for yseq in [vec![0, 0], vec![0, 1, 0], vec![1, 1]] {
                let total: u128 = t.checked(&yseq, Some(delta)).unwrap().iter().map(|k| t.multiplicity(&yseq, k)).sum();
                let spec = CondTypicalSpec::new(src.clone(), f.clone(), yseq.clone(), delta).unwrap();
                let n = yseq.len();
                assert_eq!(total, cond_typical_set(&spec, n).unwrap().len() as u128);
            }
        }
    }

    #[test]
    fn strict_mode_includes_null_symbols() {
        let (src, f, ch) = setup(&[0.0, 0.5, 0.0, 0.5]);
        let t = KindTable::new(&src, &f, &ch);
        let strict: u128 = t.checked(&[0], None).unwrap().iter().map(|k| t.multiplicity(&[0], k)).sum();
        let typical: u128 = t.checked(&[0], Some(0.1)).unwrap().iter().map(|k| t.multiplicity(&[0], k)).sum();
        assert_eq!((strict, typical), (3, 1));
    }
}
