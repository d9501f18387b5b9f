//! Running the pipeline: single trials, Monte Carlo estimates and exact
//! per-message error.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::ReliablePipeline;
use crate::coding::KindTable;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, stream_rng, Execution};
use crate::model::seq::{index_to_seq, seq_to_index, space_size, ENUMERATION_GUARD};

const CHUNK: usize = 4096;
const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub truth_z: Vec<usize>,
    /// `None` when the output fell in no region or the block was not encoded.
    pub decoded_z: Option<Vec<usize>>,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RunOutcome {
    RejectedAtypical,
    Completed(RunResult),
}

/// One encode / compute / decode pass on `x'^k`, with channel noise drawn
/// from stream 0 of `seed`.
pub fn run_once(p: &ReliablePipeline, x_prime: &[usize], seed: u64) -> RunOutcome {
    let Some(msg) = p.message_id(x_prime) else {
        return RunOutcome::RejectedAtypical;
    };
    let mut rng = stream_rng(seed, 0);
    let (decoded, _) = transmit(p, msg, &mut rng);
    let truth = p.messages[msg].group;
    RunOutcome::Completed(RunResult {
        truth_z: p.groups[truth].value.clone(),
        decoded_z: decoded.map(|g| p.groups[g].value.clone()),
        correct: decoded == Some(truth),
    })
}

/// Decoded group and output index of one pass (both `None` if unencoded).
fn transmit<R: Rng + ?Sized>(p: &ReliablePipeline, msg: usize, rng: &mut R) -> (Option<usize>, Option<u64>) {
    let Some(x) = p.messages[msg].encoding.as_deref() else {
        return (None, None);
    };
    let z = p.inst.channel.sample_block_with(x, rng);
    let zi = seq_to_index(&z, p.inst.channel.output().len());
    (p.decode_index(zi), Some(zi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorEstimate {
    /// Exact average over typical messages when available, else Monte Carlo.
    pub avg_error: f64,
    /// Exact worst message when available, else worst per-group empirical rate.
    pub max_message_error: f64,
    pub exact: bool,
    pub mc_avg_error: f64,
    pub mc_max_group_error: f64,
    /// Wilson 95% half-width of `mc_avg_error`.
    pub ci_halfwidth: f64,
    pub trials: usize,
    pub accepted: usize,
    pub rejected_atypical: usize,
    pub seed: u64,
    /// Plug-in `I(g^k; decoded)` over encoded trials.
    pub mi_message_decoded: f64,
    /// Plug-in `I(f^n; F^n)` over encoded trials.
    pub mi_codeword_output: f64,
}

#[derive(Default)]
struct Tally {
    accepted: usize,
    rejected: usize,
    errors: usize,
    per_group: Vec<(usize, usize)>,
    message_decoded: BTreeMap<(usize, Option<usize>), u64>,
    codeword_output: BTreeMap<(usize, u64), u64>,
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.errors += other.errors;
        for (a, b) in self.per_group.iter_mut().zip(other.per_group) {
            a.0 += b.0;
            a.1 += b.1;
        }
        for (k, v) in other.message_decoded {
            *self.message_decoded.entry(k).or_default() += v;
        }
        for (k, v) in other.codeword_output {
            *self.codeword_output.entry(k).or_default() += v;
        }
    }
}

fn run_chunk(p: &ReliablePipeline, chunk: usize, trials: usize, seed: u64) -> Tally {
    let mut rng = stream_rng(seed, chunk as u64);
    let mut t = Tally { per_group: vec![(0, 0); p.groups.len()], ..Default::default() };
    let mut block = vec![0; p.k];
    for _ in 0..trials {
        for s in block.iter_mut() {
            *s = p.outer.source.sample(&mut rng);
        }
        let Some(msg) = p.message_id(&block) else {
            t.rejected += 1;
            continue;
        };
        t.accepted += 1;
        let truth = p.messages[msg].group;
        let (decoded, zi) = transmit(p, msg, &mut rng);
        let wrong = decoded != Some(truth);
        t.errors += wrong as usize;
        t.per_group[truth].0 += 1;
        t.per_group[truth].1 += wrong as usize;
        if let (Some(zi), Some(entry)) = (zi, p.groups[truth].entry) {
            *t.message_decoded.entry((truth, decoded)).or_default() += 1;
            *t.codeword_output.entry((entry, zi)).or_default() += 1;
        }
    }
    t
}

/// Plug-in mutual information of a joint count table.
fn plug_in_mi<A: Ord + Copy, B: Ord + Copy>(joint: &BTreeMap<(A, B), u64>) -> f64 {
    let total: u64 = joint.values().sum();
    if total == 0 {
        return 0.0;
    }
    let mut left: BTreeMap<A, u64> = BTreeMap::new();
    let mut right: BTreeMap<B, u64> = BTreeMap::new();
    for (&(a, b), &c) in joint {
        *left.entry(a).or_default() += c;
        *right.entry(b).or_default() += c;
    }
    let n = total as f64;
    joint
        .iter()
        .map(|(&(a, b), &c)| {
            let c = c as f64;
            c / n * (c * n / (left[&a] as f64 * right[&b] as f64)).ln()
        })
        .sum::<f64>()
        .max(0.0)
}

/// Wilson score 95% half-width for `errors` out of `n`.
pub(crate) fn wilson_halfwidth(errors: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.5;
    }
    let nf = n as f64;
    let p = errors as f64 / nf;
    let z2 = Z95 * Z95;
    Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / (1.0 + z2 / nf)
}

/// Exact error of every message, `1 - P(Gamma_i | U(x'))`, or `None` when
/// the output space is beyond the enumeration guard.
pub fn exact_message_errors(p: &ReliablePipeline, exec: Execution) -> Option<Vec<f64>> {
    let q = p.inst.channel.output().len();
    if space_size(q, p.n).is_none_or(|s| s > ENUMERATION_GUARD) {
        return None;
    }
    let kinds = KindTable::new(&p.inst.source, &p.inst.f, &p.inst.channel);
    // messages whose inputs share a kind sequence share their error
    let mut keys: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
    let mut slot = vec![None; p.messages.len()];
    for (m, msg) in p.messages.iter().enumerate() {
        let (Some(x), Some(entry)) = (msg.encoding.as_ref(), p.groups[msg.group].entry) else {
            continue;
        };
        let y = &p.code.entries()[entry].codeword;
        let ks: Vec<usize> =
            x.iter().zip(y).map(|(&xs, &ys)| kinds.kind_of(ys, xs).expect("encoding lies in its class")).collect();
        let next = keys.len();
        slot[m] = Some(*keys.entry((entry, ks)).or_insert(next));
    }
    let mut unique: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new()); keys.len()];
    for (key, id) in keys {
        unique[id] = key;
    }
    let errors = map_indexed(exec, unique.len(), |u| {
        let (entry, ks) = &unique[u];
        let y = &p.code.entries()[*entry].codeword;
        let rows = kinds.rows(y, ks);
        let inside: f64 = p.code.entries()[*entry]
            .region
            .iter()
            .map(|&z| {
                let zs = index_to_seq(z, q, p.n);
                rows.iter().zip(&zs).map(|(row, &s)| row[s]).product::<f64>()
            })
            .sum();
        (1.0 - inside).max(0.0)
    });
    Some(slot.into_iter().map(|s| s.map_or(1.0, |u| errors[u])).collect())
}

/// Monte Carlo over `trials` draws of `x'^k`, plus exact per-message error
/// when the output space is enumerable. Chunk `c` of trials uses random
/// stream `c`, so the estimate does not depend on thread count.
pub fn simulate(p: &ReliablePipeline, trials: usize, seed: u64, exec: Execution) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let chunks = trials.div_ceil(CHUNK);
    let parts = map_indexed(exec, chunks, |c| {
        let len = CHUNK.min(trials - c * CHUNK);
        run_chunk(p, c, len, seed)
    });
    let mut tally = Tally { per_group: vec![(0, 0); p.groups.len()], ..Default::default() };
    for part in parts {
        tally.merge(part);
    }
    if tally.accepted == 0 {
        return Err(Error::NoAcceptedTrials);
    }
    let mc_avg = tally.errors as f64 / tally.accepted as f64;
    let mc_max = tally.per_group.iter().filter(|g| g.0 > 0).map(|&(n, e)| e as f64 / n as f64).fold(0.0, f64::max);
    let (avg, max, exact) = match exact_message_errors(p, exec) {
        Some(errs) => {
            let mass: f64 = p.messages.iter().map(|m| m.prob).sum();
            let avg = p.messages.iter().zip(&errs).map(|(m, e)| m.prob * e).sum::<f64>() / mass;
            (avg.min(1.0), errs.iter().copied().fold(0.0, f64::max), true)
        }
        None => (mc_avg, mc_max, false),
    };
    Ok(ErrorEstimate {
        avg_error: avg,
        max_message_error: max.max(avg),
        exact,
        mc_avg_error: mc_avg,
        mc_max_group_error: mc_max,
        ci_halfwidth: wilson_halfwidth(tally.errors, tally.accepted),
        trials,
        accepted: tally.accepted,
        rejected_atypical: tally.rejected,
        seed,
        mi_message_decoded: plug_in_mi(&tally.message_decoded),
        mi_codeword_output: plug_in_mi(&tally.codeword_output),
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{and_instance, and_outer};
    use super::super::{build_pipeline, group_sizes, OuterProblem, PipelineParams};
    use super::*;
    use crate::coding::{build_code, CodeParams};
    use crate::model::{Alphabet, DetFunction, Pmf};

    fn xor_outer() -> OuterProblem {
        let a = Alphabet::new(["00", "01", "10", "11"]).unwrap();
        let g = DetFunction::new(a.clone(), Alphabet::binary(), vec![0, 1, 1, 0]).unwrap();
        OuterProblem::new(Pmf::uniform(a), g).unwrap()
    }

    fn pipeline(noise: Option<f64>, outer: &OuterProblem, k: usize, n: usize, eps: f64) -> ReliablePipeline {
        let inst = and_instance(noise);
        let delta = 0.15;
        let floor = group_sizes(outer, k, delta).unwrap().iter().map(|&s| s as u128).collect::<Vec<_>>();
        let groups = floor.len() as u64;
        let params = CodeParams { input_delta: Some(delta), class_floor: floor, ..CodeParams::new(n, eps) };
        let code = build_code(&inst, &params, groups).unwrap().code;
        build_pipeline(outer, &inst, &code, &PipelineParams::new(k, delta)).unwrap()
    }

    #[test]
    fn wilson_examples() {
        assert!((wilson_halfwidth(50, 100) - 0.0960).abs() < 1e-3);
        assert!(wilson_halfwidth(0, 1000) > 0.0);
    }

    #[test]
    fn noiseless_is_error_free() {
        let p = pipeline(None, &and_outer(), 1, 1, 0.1);
        let e = simulate(&p, 5000, 3, Execution::Parallel).unwrap();
        assert_eq!((e.avg_error, e.max_message_error, e.mc_avg_error), (0.0, 0.0, 0.0));
        assert!(e.exact);
        for m in p.messages() {
            match run_once(&p, &m.seq, 9) {
                RunOutcome::Completed(r) => assert!(r.correct),
                RunOutcome::RejectedAtypical => panic!("typical block rejected"),
            }
        }
    }

    #[test]
    fn reproducible_single_run() {
        let p = pipeline(Some(0.05), &xor_outer(), 2, 4, 0.3);
        let x = p.messages()[3].seq.clone();
        assert_eq!(run_once(&p, &x, 7), run_once(&p, &x, 7));
        assert_eq!(run_once(&p, &[0, 0, 0], 7), RunOutcome::RejectedAtypical);
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let p = pipeline(Some(0.05), &xor_outer(), 2, 4, 0.3);
        let a = simulate(&p, 100_000, 42, Execution::Parallel).unwrap();
        let b = simulate(&p, 100_000, 42, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert!(a.exact);
        assert!((a.mc_avg_error - a.avg_error).abs() <= a.ci_halfwidth, "{a:?}");
        assert!(a.avg_error <= a.max_message_error && a.max_message_error <= 0.3);
        assert!(a.mi_message_decoded <= a.mi_codeword_output + 1e-12);
    }

    #[test]
    fn useless_channel_confuses_uniformly() {
        let p = pipeline(Some(0.5), &xor_outer(), 2, 4, 0.9);
        let nu3 = p.diagnostics().nu3 as f64;
        let e = simulate(&p, 50_000, 1, Execution::Parallel).unwrap();
        // regions cover at most all of C^n, each with output mass |Gamma_i| / 2^n
        let covered: usize = p.code().entries().iter().map(|e| e.region.len()).sum();
        let exact = 1.0 - covered as f64 / 16.0 / nu3;
        assert!((e.avg_error - exact).abs() < 1e-12, "{} vs {exact}", e.avg_error);
        assert!(e.avg_error >= 1.0 - 1.0 / nu3 - 1e-12);
    }

    #[test]
    fn zero_trials_rejected() {
        let p = pipeline(None, &and_outer(), 1, 1, 0.1);
        assert!(simulate(&p, 0, 1, Execution::Parallel).is_err());
    }
}
