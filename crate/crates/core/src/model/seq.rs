//! Helpers for fixed-length sequences over an alphabet of size `q`,
//! identified with their base-`q` index (most significant symbol first, so
//! index order is lexicographic order).

use crate::error::{Error, Result};

/// Default cap on exhaustive enumerations.
pub const ENUMERATION_GUARD: u128 = 1 << 24;

/// `q^n`, or `None` on overflow of `u128`.
pub fn space_size(q: usize, n: usize) -> Option<u128> {
    (q as u128).checked_pow(u32::try_from(n).ok()?)
}

/// `q^n` if it does not exceed `guard`, else `TOO_LARGE`.
pub fn guarded_size(q: usize, n: usize, guard: u128) -> Result<usize> {
    match space_size(q, n) {
        Some(s) if s <= guard => Ok(s as usize),
        Some(s) => Err(Error::TooLarge(s)),
        None => Err(Error::TooLarge(u128::MAX)),
    }
}

pub fn seq_to_index(seq: &[usize], q: usize) -> u64 {
    seq.iter().fold(0u64, |acc, &s| acc * q as u64 + s as u64)
}

pub fn index_to_seq(mut index: u64, q: usize, n: usize) -> Vec<usize> {
    let mut seq = vec![0; n];
    for slot in seq.iter_mut().rev() {
        *slot = (index % q as u64) as usize;
        index /= q as u64;
    }
    seq
}

/// Lexicographic odometer over the product `choices[0] x choices[1] x ...`.
/// Each position iterates its own choice list in the order given.
pub struct ProductIter<'a> {
    choices: Vec<&'a [usize]>,
    cursor: Vec<usize>,
    done: bool,
}

impl<'a> ProductIter<'a> {
    pub fn new(choices: Vec<&'a [usize]>) -> Self {
        let done = choices.iter().any(|c| c.is_empty());
        let cursor = vec![0; choices.len()];
        ProductIter { choices, cursor, done }
    }
}

impl Iterator for ProductIter<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let item: Vec<usize> = self.cursor.iter().zip(&self.choices).map(|(&c, choice)| choice[c]).collect();
        let mut pos = self.cursor.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.cursor[pos] += 1;
            if self.cursor[pos] < self.choices[pos].len() {
                break;
            }
            self.cursor[pos] = 0;
        }
        Some(item)
    }
}

/// All sequences of length `n` over `0..q` in lexicographic order.
pub fn all_sequences(q: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    let symbols: Vec<usize> = (0..q).collect();
    let mut cursor = vec![0usize; n];
    let mut done = q == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let item = cursor.clone();
        let mut pos = n;
        loop {
            if pos == 0 {
                done = true;
                break;
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < symbols.len() {
                break;
            }
            cursor[pos] = 0;
        }
        Some(item)
    })
}
