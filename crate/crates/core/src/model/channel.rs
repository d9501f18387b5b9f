use rand::Rng;

use super::pmf::{sample_index, validate_probs};
use super::{Alphabet, DetFunction};
use crate::error::{Error, Result};
use crate::exec::stream_rng;

/// Discrete memoryless channel: a row-stochastic matrix with rows indexed
/// by input symbol. Blocks are transmitted through the product extension.
#[derive(Debug, Clone, PartialEq)]
pub struct DMChannel {
    input: Alphabet,
    output: Alphabet,
    rows: Vec<Vec<f64>>,
}

impl DMChannel {
    pub fn new(input: Alphabet, output: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != input.len() {
            return Err(Error::LengthMismatch { expected: input.len(), found: rows.len() });
        }
        for (r, row) in rows.iter().enumerate() {
            match validate_probs(row, output.len()) {
                Ok(_) => {}
                Err(Error::BadSum { sum }) => return Err(Error::BadRowSum { row: r, sum }),
                Err(e) => return Err(e),
            }
        }
        Ok(DMChannel { input, output, rows })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadP(p));
        }
        let b = Alphabet::binary();
        Self::new(b.clone(), b, vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    pub fn identity(alphabet: Alphabet) -> Self {
        Self::from_function(&DetFunction::identity(alphabet))
    }

    /// Every row uniform over `output`: the output carries no information.
    pub fn uniform_noise(input: Alphabet, output: Alphabet) -> Self {
        let p = 1.0 / output.len() as f64;
        let rows = vec![vec![p; output.len()]; input.len()];
        DMChannel { input, output, rows }
    }

    /// The deterministic channel of `f`: `rows[x][f(x)] = 1`.
    pub fn from_function(f: &DetFunction) -> Self {
        let rows = f
            .table()
            .iter()
            .map(|&y| {
                let mut row = vec![0.0; f.codomain().len()];
                row[y] = 1.0;
                row
            })
            .collect();
        DMChannel { input: f.domain().clone(), output: f.codomain().clone(), rows }
    }

    /// Cascade `self` followed by `next`.
    pub fn compose(&self, next: &DMChannel) -> Result<Self> {
        if self.output != next.input {
            return Err(Error::AlphabetMismatch("output of the first channel differs from input of the second".into()));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                (0..next.output.len())
                    .map(|z| row.iter().enumerate().map(|(y, &p)| p * next.rows[y][z]).sum())
                    .collect()
            })
            .collect();
        Ok(DMChannel { input: self.input.clone(), output: next.output.clone(), rows })
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    pub fn prob(&self, x: usize, z: usize) -> f64 {
        self.rows[x][z]
    }

    /// Product-extension probability `F^n(zseq | xseq)`.
    pub fn block_prob(&self, xseq: &[usize], zseq: &[usize]) -> f64 {
        xseq.iter().zip(zseq).map(|(&x, &z)| self.rows[x][z]).product()
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        sample_index(&self.rows[x], rng)
    }

    /// Transmits `xseq` through the memoryless extension. A pure function
    /// of `(self, xseq, seed)`.
    pub fn sample_block(&self, xseq: &[usize], seed: u64) -> Result<Vec<usize>> {
        self.input.check_seq(xseq)?;
        let mut rng = stream_rng(seed, 0);
        Ok(self.sample_block_with(xseq, &mut rng))
    }

    pub fn sample_block_with<R: Rng + ?Sized>(&self, xseq: &[usize], rng: &mut R) -> Vec<usize> {
        xseq.iter().map(|&x| self.sample(x, rng)).collect()
    }

    /// Relabels inputs by `in_perm` and outputs by `out_perm` (old index `i`
    /// moves to position `perm[i]`).
    pub fn permuted(&self, in_perm: &[usize], out_perm: &[usize]) -> Result<Self> {
        let relabel = |a: &Alphabet, perm: &[usize]| {
            let mut labels = vec![String::new(); a.len()];
            for (i, &j) in perm.iter().enumerate() {
                labels[j] = a.label(i).to_string();
            }
            Alphabet::new(labels)
        };
        let mut rows = vec![vec![0.0; self.output.len()]; self.input.len()];
        for (x, row) in self.rows.iter().enumerate() {
            for (z, &p) in row.iter().enumerate() {
                rows[in_perm[x]][out_perm[z]] = p;
            }
        }
        Self::new(relabel(&self.input, in_perm)?, relabel(&self.output, out_perm)?, rows)
    }
}
