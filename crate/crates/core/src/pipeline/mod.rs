//! Reliable computation of `g` on an outer source `X'` through a noisy
//! device `F` that computes `f` on its own inputs.
//!
//! A typical block `x'^k` is encoded injectively into a conditionally
//! typical `x^n` of the input class `f^{-1}(y_i)` reserved for the value
//! `g^k(x'^k)`; the device output is decoded to `y_i` through the regions of
//! a Feinstein code, and `y_i` is mapped back to the `g`-value.

mod converse;
mod simulate;
mod sweep;

use std::collections::HashMap;

use serde::Serialize;

pub use converse::converse_bound;
pub use simulate::{exact_message_errors, run_once, simulate, ErrorEstimate, RunOutcome, RunResult};
pub use sweep::{build_at, rate_error_sweep, schedule_for_rate, EpsilonPolicy, SweepConfig, SweepRow, SweepStatus};

use crate::coding::{FeinsteinCode, KindTable};
use crate::error::{Error, Result};
use crate::info::{conditional_entropy_given_function, entropy};
use crate::model::seq::{seq_to_index, ENUMERATION_GUARD};
use crate::model::{DetFunction, NoisyComputationInstance, Pmf};
use crate::typicality::{cond_typical_iter, typical_set_guarded, CondTypicalSpec, TypicalSpec};

/// Below this a conditional entropy counts as zero.
const ENTROPY_FLOOR: f64 = 1e-12;

/// Outer source `X'` and the function `g` to be computed on it.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterProblem {
    pub source: Pmf,
    pub g: DetFunction,
}

impl OuterProblem {
    pub fn new(source: Pmf, g: DetFunction) -> Result<Self> {
        if source.alphabet() != g.domain() {
            return Err(Error::AlphabetMismatch("outer source alphabet differs from the domain of g".into()));
        }
        Ok(OuterProblem { source, g })
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.source)
    }

    pub fn conditional_entropy(&self) -> f64 {
        conditional_entropy_given_function(&self.source, &self.g)
    }
}

/// `H(X'|g(X')) / H(X|f(X))`.
pub fn gamma(outer: &OuterProblem, inner: &NoisyComputationInstance) -> Result<f64> {
    let h_inner = conditional_entropy_given_function(&inner.source, &inner.f);
    if h_inner <= ENTROPY_FLOOR {
        return Err(Error::DegenerateGamma);
    }
    Ok(outer.conditional_entropy() / h_inner)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockLengths {
    pub k: usize,
    pub n: usize,
    pub gamma: f64,
    /// `g` is injective (`gamma = 0`); the pair is valid but the pipeline
    /// itself refuses this case.
    pub outer_injective: bool,
}

/// Smallest `k <= k_max` admitting an integer `n` with
/// `gamma < n/k < gamma + delta2 / H(X|f(X))`; `n` is the smallest such.
pub fn choose_block_lengths(
    outer: &OuterProblem,
    inner: &NoisyComputationInstance,
    delta2: f64,
    k_max: usize,
) -> Result<BlockLengths> {
    if !(delta2 > 0.0) {
        return Err(Error::InvalidParameter(format!("delta2 must be positive, got {delta2}")));
    }
    let h_inner = conditional_entropy_given_function(&inner.source, &inner.f);
    let gamma = gamma(outer, inner)?;
    let outer_injective = outer.conditional_entropy() <= ENTROPY_FLOOR;
    let gamma = if outer_injective { 0.0 } else { gamma };
    let upper = gamma + delta2 / h_inner;
    for k in 1..=k_max {
        let n = (k as f64 * gamma).floor() as usize + 1;
        if (n as f64) < k as f64 * upper {
            return Ok(BlockLengths { k, n, gamma, outer_injective });
        }
    }
    Err(Error::NoPair(k_max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineParams {
    pub k: usize,
    /// Typicality slack for outer blocks and for encoder targets.
    pub delta: f64,
    /// Encode what fits instead of failing: groups without a codeword and
    /// members beyond a class's typical count are left unencoded, and every
    /// draw of them counts as a decoding error.
    pub allow_overflow: bool,
}

impl PipelineParams {
    pub fn new(k: usize, delta: f64) -> Self {
        PipelineParams { k, delta, allow_overflow: false }
    }
}

/// A typical outer block.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub seq: Vec<usize>,
    pub prob: f64,
    pub group: usize,
    /// Encoder output `U(x')`, if encoded.
    pub encoding: Option<Vec<usize>>,
}

/// Typical outer blocks sharing one value of `g^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub value: Vec<usize>,
    pub prob: f64,
    /// Message ids, lexicographic.
    pub members: Vec<usize>,
    pub entry: Option<usize>,
    /// Conditionally typical inputs of the assigned class.
    pub class_size: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineDiagnostics {
    /// Largest group.
    pub nu1_max: usize,
    /// Smallest typical count among assigned classes.
    pub nu2_min: u128,
    /// Number of groups.
    pub nu3: usize,
    pub codewords: usize,
    pub rate: f64,
    pub encoder_limit: f64,
    pub messages: usize,
    pub unencoded: usize,
}

#[derive(Debug, Clone)]
pub struct ReliablePipeline {
    outer: OuterProblem,
    inst: NoisyComputationInstance,
    k: usize,
    n: usize,
    delta: f64,
    gamma: f64,
    code: FeinsteinCode,
    messages: Vec<Message>,
    groups: Vec<Group>,
    lookup: HashMap<u64, usize>,
    decoder_v: Vec<Option<usize>>,
    regions: HashMap<u64, usize>,
    diagnostics: PipelineDiagnostics,
}

/// Typical outer blocks grouped by `g^k`, groups in assignment order
/// (decreasing probability, ties by value).
fn partition_messages(outer: &OuterProblem, k: usize, delta: f64) -> Result<(Vec<Message>, Vec<Group>)> {
    let typical = typical_set_guarded(&TypicalSpec::new(outer.source.clone(), k, delta)?, ENUMERATION_GUARD)?;
    let mut by_value: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut groups: Vec<Group> = Vec::new();
    let mut messages = Vec::with_capacity(typical.len());
    for seq in typical {
        let value = outer.g.apply_block(&seq)?;
        let prob = outer.source.seq_prob(&seq);
        let gid = *by_value.entry(value.clone()).or_insert_with(|| {
            groups.push(Group { value, prob: 0.0, members: Vec::new(), entry: None, class_size: 0 });
            groups.len() - 1
        });
        groups[gid].prob += prob;
        groups[gid].members.push(messages.len());
        messages.push(Message { seq, prob, group: gid, encoding: None });
    }
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| {
        groups[b].prob.total_cmp(&groups[a].prob).then_with(|| groups[a].value.cmp(&groups[b].value))
    });
    let groups: Vec<Group> = order.iter().map(|&g| groups[g].clone()).collect();
    for (new_id, g) in groups.iter().enumerate() {
        for &m in &g.members {
            messages[m].group = new_id;
        }
    }
    Ok((messages, groups))
}

/// Group sizes `nu_1` in assignment order: entry `j` of the code receives
/// the `j`-th group, so these are the class floors a code needs.
pub fn group_sizes(outer: &OuterProblem, k: usize, delta: f64) -> Result<Vec<usize>> {
    Ok(partition_messages(outer, k, delta)?.1.iter().map(|g| g.members.len()).collect())
}

/// Builds encoder `U` and decoder `V` around a code built on `inst`.
pub fn build_pipeline(
    outer: &OuterProblem,
    inst: &NoisyComputationInstance,
    code: &FeinsteinCode,
    params: &PipelineParams,
) -> Result<ReliablePipeline> {
    let PipelineParams { k, delta, allow_overflow } = *params;
    let n = code.n();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if inst.f.codomain() != code.codeword_alphabet() || inst.channel.output() != code.region_alphabet() {
        return Err(Error::AlphabetMismatch("code was not built on this instance".into()));
    }
    let gamma = gamma(outer, inst)?;
    if outer.conditional_entropy() <= ENTROPY_FLOOR {
        return Err(Error::OuterInjective);
    }
    let h_outer = outer.entropy();
    let rate = k as f64 * h_outer / n as f64;
    let encoder_limit = h_outer / gamma;
    if rate > encoder_limit * (1.0 + 1e-12) {
        return Err(Error::RateAboveEncoderLimit { rate, limit: encoder_limit });
    }

    let q_outer = outer.source.len();
    let (mut messages, mut groups) = partition_messages(outer, k, delta)?;

    let nu3 = groups.len();
    let m = code.size();
    if nu3 > m && !allow_overflow {
        return Err(Error::TooFewCodewords { groups: nu3, codewords: m });
    }
    let kinds = KindTable::new(&inst.source, &inst.f, &inst.channel);
    let mut decoder_v = vec![None; m];
    let mut nu2_min = u128::MAX;
    for (gid, group) in groups.iter_mut().enumerate().take(m) {
        let codeword = &code.entries()[gid].codeword;
        let class_size: u128 =
            kinds.checked(codeword, Some(delta))?.iter().map(|ks| kinds.multiplicity(codeword, ks)).sum();
        if (group.members.len() as u128) > class_size && !allow_overflow {
            return Err(Error::GroupOverflow {
                group_size: group.members.len(),
                class_size: class_size.min(usize::MAX as u128) as usize,
            });
        }
        let spec = CondTypicalSpec::new(inst.source.clone(), inst.f.clone(), codeword.clone(), delta)?;
        for (&msg, target) in group.members.iter().zip(cond_typical_iter(&spec)?) {
            messages[msg].encoding = Some(target);
        }
        group.entry = Some(gid);
        group.class_size = class_size;
        decoder_v[gid] = Some(gid);
        nu2_min = nu2_min.min(class_size);
    }
    let lookup = messages.iter().enumerate().map(|(i, msg)| (seq_to_index(&msg.seq, q_outer), i)).collect();
    let unencoded = messages.iter().filter(|msg| msg.encoding.is_none()).count();
    let diagnostics = PipelineDiagnostics {
        nu1_max: groups.iter().map(|g| g.members.len()).max().unwrap_or(0),
        nu2_min: if nu2_min == u128::MAX { 0 } else { nu2_min },
        nu3,
        codewords: m,
        rate,
        encoder_limit,
        messages: messages.len(),
        unencoded,
    };
    Ok(ReliablePipeline {
        outer: outer.clone(),
        inst: inst.clone(),
        k,
        n,
        delta,
        gamma,
        code: code.clone(),
        messages,
        groups,
        lookup,
        decoder_v,
        regions: code.decoder(),
        diagnostics,
    })
}

impl ReliablePipeline {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn outer(&self) -> &OuterProblem {
        &self.outer
    }

    pub fn instance(&self) -> &NoisyComputationInstance {
        &self.inst
    }

    pub fn code(&self) -> &FeinsteinCode {
        &self.code
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn diagnostics(&self) -> &PipelineDiagnostics {
        &self.diagnostics
    }

    /// `k H(X') / n`.
    pub fn rate(&self) -> f64 {
        self.diagnostics.rate
    }

    /// Message id of a typical outer block.
    pub fn message_id(&self, xseq: &[usize]) -> Option<usize> {
        if xseq.len() != self.k || xseq.iter().any(|&s| s >= self.outer.source.len()) {
            return None;
        }
        self.lookup.get(&seq_to_index(xseq, self.outer.source.len())).copied()
    }

    /// `U(x')`.
    pub fn encode(&self, xseq: &[usize]) -> Option<&[usize]> {
        self.messages[self.message_id(xseq)?].encoding.as_deref()
    }

    /// Group decoded from an output index: region lookup, then `V`.
    pub fn decode_index(&self, z: u64) -> Option<usize> {
        self.regions.get(&z).and_then(|&entry| self.decoder_v[entry])
    }

    /// `g^k` value decoded from `z^n`.
    pub fn decode(&self, zseq: &[usize]) -> Option<&[usize]> {
        let gid = self.decode_index(seq_to_index(zseq, self.inst.channel.output().len()))?;
        Some(&self.groups[gid].value)
    }

    /// `V(y_i)` for entry `i`.
    pub fn decoder_v(&self, entry: usize) -> Option<&[usize]> {
        self.decoder_v.get(entry).copied().flatten().map(|g| self.groups[g].value.as_slice())
    }
}
