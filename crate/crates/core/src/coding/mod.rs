//! Feinstein codes for a noisy computation.
//!
//! An `[M, n, eps]` code is a list of distinct codewords `y_i` in `B^n` with
//! pairwise disjoint decoding sets `Gamma_i` of output sequences such that
//! every (checked) input `x^n` in the class `f^{-1}(y_i)` lands in `Gamma_i`
//! with probability at least `1 - eps`.
//!
//! Codes are built greedily over the single-letter cascade channel, with
//! regions filled in decreasing cascade likelihood, and verified exactly.

mod format;
mod inputs;
mod order;

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::info::{cascade_channel, conditional_entropy_given_function, pushforward};
use crate::model::seq::{guarded_size, index_to_seq, space_size, ENUMERATION_GUARD};
use crate::model::{Alphabet, DMChannel, NoisyComputationInstance, Pmf};
use crate::typicality::{is_typical, TypicalSpec};

pub(crate) use inputs::KindTable;
use order::LikelihoodOrder;

/// Margin kept below `eps` so that re-summing a region in another order
/// cannot push the verified error above `eps`.
const ACCEPT_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodeEntry {
    pub codeword: Vec<usize>,
    /// Output sequence indices (base `|C|`, lexicographic), ascending.
    pub region: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeinsteinCode {
    n: usize,
    epsilon: f64,
    codeword_alphabet: Alphabet,
    region_alphabet: Alphabet,
    entries: Vec<CodeEntry>,
}

impl FeinsteinCode {
    /// Checks lengths, ranges, distinct codewords and disjoint regions.
    /// Regions are sorted.
    pub fn new(
        n: usize,
        epsilon: f64,
        codeword_alphabet: Alphabet,
        region_alphabet: Alphabet,
        mut entries: Vec<CodeEntry>,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        let space = space_size(region_alphabet.len(), n).unwrap_or(u128::MAX);
        let mut codewords = HashSet::new();
        let mut claimed = HashSet::new();
        for (i, e) in entries.iter_mut().enumerate() {
            if e.codeword.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: e.codeword.len() });
            }
            codeword_alphabet.check_seq(&e.codeword)?;
            if !codewords.insert(e.codeword.clone()) {
                return Err(Error::InvalidParameter(format!("entry {i} repeats a codeword")));
            }
            e.region.sort_unstable();
            for &z in &e.region {
                if z as u128 >= space {
                    return Err(Error::UnknownSymbol(format!("region index {z} in entry {i}")));
                }
                if !claimed.insert(z) {
                    return Err(Error::InvalidParameter(format!("entry {i} overlaps an earlier region")));
                }
            }
        }
        Ok(FeinsteinCode { n, epsilon, codeword_alphabet, region_alphabet, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[CodeEntry] {
        &self.entries
    }

    pub fn codeword_alphabet(&self) -> &Alphabet {
        &self.codeword_alphabet
    }

    pub fn region_alphabet(&self) -> &Alphabet {
        &self.region_alphabet
    }

    /// Pairwise disjointness of the regions, checked from scratch.
    pub fn regions_disjoint(&self) -> bool {
        let mut seen = HashSet::new();
        self.entries.iter().flat_map(|e| &e.region).all(|z| seen.insert(*z))
    }

    /// Output index to entry.
    pub fn decoder(&self) -> HashMap<u64, usize> {
        self.entries.iter().enumerate().flat_map(|(i, e)| e.region.iter().map(move |&z| (z, i))).collect()
    }

    /// `P(z^n not in Gamma_i | x^n)`.
    pub fn input_error(&self, entry: usize, channel: &DMChannel, xseq: &[usize]) -> f64 {
        let q = self.region_alphabet.len();
        let inside: f64 =
            self.entries[entry].region.iter().map(|&z| channel.block_prob(xseq, &index_to_seq(z, q, self.n))).sum();
        (1.0 - inside).max(0.0)
    }

    fn check_instance(&self, inst: &NoisyComputationInstance) -> Result<()> {
        if inst.f.codomain() != &self.codeword_alphabet {
            return Err(Error::AlphabetMismatch("codeword alphabet differs from the codomain of f".into()));
        }
        if inst.channel.output() != &self.region_alphabet {
            return Err(Error::AlphabetMismatch("region alphabet differs from the channel output".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeParams {
    pub n: usize,
    pub epsilon: f64,
    /// Restrict codewords to `delta`-typical `y^n`; `None` scans every
    /// `y^n` of positive probability.
    pub codeword_delta: Option<f64>,
    /// Check only conditionally `delta`-typical inputs of each class;
    /// `None` checks all of the class.
    pub input_delta: Option<f64>,
    /// The `j`-th accepted codeword must have at least `class_floor[j]`
    /// checked inputs in its class; candidates below the floor are skipped.
    pub class_floor: Vec<u128>,
}

impl CodeParams {
    pub fn new(n: usize, epsilon: f64) -> Self {
        CodeParams { n, epsilon, codeword_delta: None, input_delta: None, class_floor: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeBuild {
    pub code: FeinsteinCode,
    pub requested: u64,
    /// Candidates ran out before `requested` codewords were found.
    pub exhausted: bool,
}

impl CodeBuild {
    /// `EXHAUSTED` when the target was missed.
    pub fn status(&self) -> Result<()> {
        if self.exhausted {
            Err(Error::Exhausted { achieved: self.code.size(), requested: self.requested })
        } else {
            Ok(())
        }
    }
}

/// `floor(e^{n (rate - h)})`, 0 below one and saturating at `u64::MAX`.
pub fn lemma_code_size(rate: f64, n: usize, h_x_given_fx: f64) -> u64 {
    let m = (n as f64 * (rate - h_x_given_fx)).exp();
    // exact powers (e.g. e^0) must not floor to one less
    (m * (1.0 + 1e-12)).floor() as u64
}

/// Greedy code at the size the rate `rate` demands.
pub fn build_feinstein_code(inst: &NoisyComputationInstance, params: &CodeParams, rate: f64) -> Result<CodeBuild> {
    let h = conditional_entropy_given_function(&inst.source, &inst.f);
    let target = lemma_code_size(rate, params.n, h);
    if target == 0 {
        return Err(Error::RateTooHigh { rate, h_x_given_fx: h });
    }
    build_code(inst, params, target)
}

/// Greedy code with at most `target` codewords.
pub fn build_code(inst: &NoisyComputationInstance, params: &CodeParams, target: u64) -> Result<CodeBuild> {
    let CodeParams { n, epsilon, codeword_delta, input_delta, ref class_floor } = *params;
    if n == 0 {
        return Err(Error::InvalidParameter("block length must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let nb = inst.f.codomain().len();
    let candidates = guarded_size(nb, n, ENUMERATION_GUARD / n as u128)?;
    let outputs = guarded_size(inst.channel.output().len(), n, ENUMERATION_GUARD)?;

    let cascade = cascade_channel(&inst.source, &inst.f, &inst.channel)?;
    let y_spec = match codeword_delta {
        Some(d) => {
            let py = Pmf::new(inst.f.codomain().clone(), pushforward(&inst.source, &inst.f))?;
            Some(TypicalSpec::new(py, n, d)?)
        }
        None => None,
    };
    let kinds = KindTable::new(&inst.source, &inst.f, &inst.channel);
    let mut claimed = vec![false; outputs];
    let mut entries = Vec::new();

    for index in 0..candidates as u64 {
        if entries.len() as u64 >= target {
            break;
        }
        let yseq = index_to_seq(index, nb, n);
        let Some(rows) = yseq.iter().map(|&y| cascade.row(y)).collect::<Option<Vec<&[f64]>>>() else {
            continue;
        };
        if let Some(spec) = &y_spec {
            if !is_typical(&yseq, spec)? {
                continue;
            }
        }
        let checked = kinds.checked(&yseq, input_delta)?;
        if checked.is_empty() {
            continue;
        }
        let floor = class_floor.get(entries.len()).copied().unwrap_or(0);
        if floor > 0 && checked.iter().map(|k| kinds.multiplicity(&yseq, k)).sum::<u128>() < floor {
            continue;
        }
        let checked_rows: Vec<Vec<&[f64]>> = checked.iter().map(|k| kinds.rows(&yseq, k)).collect();
        if let Some(region) = grow_region(rows, &checked_rows, &claimed, epsilon) {
            for &z in &region {
                claimed[z as usize] = true;
            }
            entries.push(CodeEntry { codeword: yseq, region });
        }
    }
    let exhausted = (entries.len() as u64) < target;
    let code = FeinsteinCode::new(n, epsilon, inst.f.codomain().clone(), inst.channel.output().clone(), entries)?;
    Ok(CodeBuild { code, requested: target, exhausted })
}

/// Adds unclaimed outputs in decreasing cascade likelihood until every
/// checked input reaches mass `1 - eps`. Gives up once claimed outputs cost
/// some checked input more than `eps`, or the support runs out.
fn grow_region(cascade_rows: Vec<&[f64]>, checked: &[Vec<&[f64]>], claimed: &[bool], eps: f64) -> Option<Vec<u64>> {
    let need = 1.0 - eps + ACCEPT_MARGIN;
    let mut inside = vec![0.0; checked.len()];
    let mut lost = vec![0.0; checked.len()];
    let mut region = Vec::new();
    for (index, zseq, _) in LikelihoodOrder::new(cascade_rows) {
        let taken = claimed[index as usize];
        for (s, rows) in checked.iter().enumerate() {
            let p: f64 = rows.iter().zip(&zseq).map(|(row, &z)| row[z]).product();
            if taken {
                lost[s] += p;
            } else {
                inside[s] += p;
            }
        }
        if taken {
            if lost.iter().any(|&l| l > eps) {
                return None;
            }
        } else {
            region.push(index);
            if inside.iter().all(|&m| m >= need) {
                region.sort_unstable();
                return Some(region);
            }
        }
    }
    None
}

/// Largest `P(Gamma_i^c | x^n)` over entries and checked inputs
/// (conditionally `delta`-typical ones, or all with `None`).
pub fn exact_max_error(
    code: &FeinsteinCode,
    inst: &NoisyComputationInstance,
    input_delta: Option<f64>,
    exec: Execution,
) -> Result<f64> {
    Ok(entry_errors(code, inst, input_delta, exec)?.into_iter().fold(0.0, f64::max))
}

/// Worst checked-input error of each entry, in entry order.
pub fn entry_errors(
    code: &FeinsteinCode,
    inst: &NoisyComputationInstance,
    input_delta: Option<f64>,
    exec: Execution,
) -> Result<Vec<f64>> {
    code.check_instance(inst)?;
    let q = code.region_alphabet.len();
    guarded_size(q, code.n, ENUMERATION_GUARD)?;
    let kinds = KindTable::new(&inst.source, &inst.f, &inst.channel);
    let per_entry = map_indexed(exec, code.entries.len(), |i| -> Result<f64> {
        let entry = &code.entries[i];
        let zs: Vec<Vec<usize>> = entry.region.iter().map(|&z| index_to_seq(z, q, code.n)).collect();
        let worst = kinds
            .checked(&entry.codeword, input_delta)?
            .iter()
            .map(|k| {
                let rows = kinds.rows(&entry.codeword, k);
                let inside: f64 = zs.iter().map(|z| rows.iter().zip(z).map(|(row, &s)| row[s]).product::<f64>()).sum();
                (1.0 - inside).max(0.0)
            })
            .fold(0.0, f64::max);
        Ok(worst)
    });
    per_entry.into_iter().collect()
}
