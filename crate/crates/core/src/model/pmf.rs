use rand::Rng;

use super::Alphabet;
use crate::error::{Error, Result};

/// Tolerance on probability sums. Inputs outside it are rejected, never
/// renormalized.
pub const PROB_TOL: f64 = 1e-9;

/// Probability mass function over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

pub(crate) fn validate_probs(probs: &[f64], expected: usize) -> Result<f64> {
    if probs.len() != expected {
        return Err(Error::LengthMismatch { expected, found: probs.len() });
    }
    if let Some((index, &value)) = probs.iter().enumerate().find(|(_, p)| !(**p >= 0.0)) {
        return Err(Error::NegativeProb { index, value });
    }
    let sum: f64 = probs.iter().sum();
    if !((sum - 1.0).abs() <= PROB_TOL) {
        return Err(Error::BadSum { sum });
    }
    Ok(sum)
}

impl Pmf {
    pub fn new(alphabet: Alphabet, probs: Vec<f64>) -> Result<Self> {
        validate_probs(&probs, alphabet.len())?;
        Ok(Pmf { alphabet, probs })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let p = 1.0 / alphabet.len() as f64;
        let probs = vec![p; alphabet.len()];
        Pmf { alphabet, probs }
    }

    /// Point mass at symbol `at`.
    pub fn point(alphabet: Alphabet, at: usize) -> Result<Self> {
        alphabet.check(at)?;
        let mut probs = vec![0.0; alphabet.len()];
        probs[at] = 1.0;
        Ok(Pmf { alphabet, probs })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Same distribution with the alphabet relabeled by `perm` (new index
    /// `perm[i]` receives old symbol `i`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut labels = vec![String::new(); self.len()];
        let mut probs = vec![0.0; self.len()];
        for (i, &j) in perm.iter().enumerate() {
            labels[j] = self.alphabet.label(i).to_string();
            probs[j] = self.probs[i];
        }
        Pmf::new(Alphabet::new(labels)?, probs)
    }

    /// Probability of an i.i.d. sequence.
    pub fn seq_prob(&self, seq: &[usize]) -> f64 {
        seq.iter().map(|&s| self.probs[s]).product()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.probs, rng)
    }
}

/// Inverse-CDF draw from a probability vector.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructs_valid_pmfs() {
        let a = Alphabet::binary();
        assert!(Pmf::new(a.clone(), vec![0.5, 0.5]).is_ok());
        assert!(Pmf::new(a.clone(), vec![1.0, 0.0]).is_ok());
    }

    #[test]
    fn rejects_without_renormalizing() {
        let a = Alphabet::binary();
        assert!(matches!(Pmf::new(a.clone(), vec![0.7, 0.2]), Err(Error::BadSum { .. })));
        assert!(matches!(Pmf::new(a.clone(), vec![1.1, -0.1]), Err(Error::NegativeProb { index: 1, .. })));
        assert!(matches!(Pmf::new(a.clone(), vec![1.0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(Pmf::new(a, vec![f64::NAN, 1.0]), Err(Error::NegativeProb { .. })));
    }

    #[test]
    fn sampling_never_returns_zero_mass_symbols() {
        let pmf = Pmf::new(Alphabet::numeric(3).unwrap(), vec![0.0, 1.0, 0.0]).unwrap();
        let mut rng = crate::exec::stream_rng(1, 0);
        assert!((0..1000).all(|_| pmf.sample(&mut rng) == 1));
    }
}
