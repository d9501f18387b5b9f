//! Weakly typical and conditionally typical sequence sets.
//!
//! A sequence `x^n` is typical for `P` with slack `delta` when
//! `| -(1/n) ln P(x^n) - H(P) | <= delta`. Conditional typicality given
//! `y^n = f^n(x^n)` centres on `(1/n) sum_j H(X | Y = y_j)`, the conditional
//! entropy of the realized `y^n`; for a typical `y^n` that is within a
//! vanishing margin of `H(X | f(X))`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, stream_rng, Execution};
use crate::info::{class_entropies, entropy, pushforward};
use crate::model::seq::{guarded_size, ProductIter, ENUMERATION_GUARD};
use crate::model::{DetFunction, Pmf};

/// Absorbs floating-point rounding in the typicality comparison.
pub const TYPICALITY_SLACK: f64 = 1e-12;

/// Relative default slack: `delta = 0.1 H`.
pub const DEFAULT_RELATIVE_DELTA: f64 = 0.1;

const MIN_DEFAULT_DELTA: f64 = 1e-6;

pub fn default_delta(pmf: &Pmf) -> f64 {
    (DEFAULT_RELATIVE_DELTA * entropy(pmf)).max(MIN_DEFAULT_DELTA)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypicalSpec {
    pub pmf: Pmf,
    pub n: usize,
    pub delta: f64,
}

impl TypicalSpec {
    pub fn new(pmf: Pmf, n: usize, delta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("block length must be at least 1".into()));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        Ok(TypicalSpec { pmf, n, delta })
    }

    /// Slack `0.1 H(pmf)` (floored at 1e-6 for degenerate sources).
    pub fn with_default_delta(pmf: Pmf, n: usize) -> Result<Self> {
        let delta = default_delta(&pmf);
        Self::new(pmf, n, delta)
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.pmf)
    }

    fn neg_logs(&self) -> Vec<f64> {
        self.pmf.probs().iter().map(|&p| if p > 0.0 { -p.ln() } else { f64::INFINITY }).collect()
    }
}

fn within(stat: f64, centre: f64, delta: f64) -> bool {
    stat.is_finite() && (stat - centre).abs() <= delta + TYPICALITY_SLACK
}

/// Membership test. Sequences containing a zero-probability symbol are
/// never typical.
pub fn is_typical(xseq: &[usize], spec: &TypicalSpec) -> Result<bool> {
    spec.pmf.alphabet().check_seq(xseq)?;
    if xseq.len() != spec.n {
        return Err(Error::LengthMismatch { expected: spec.n, found: xseq.len() });
    }
    let logs = spec.neg_logs();
    let stat = xseq.iter().map(|&x| logs[x]).sum::<f64>() / spec.n as f64;
    Ok(within(stat, spec.entropy(), spec.delta))
}

/// All typical sequences, lexicographically ordered.
pub fn typical_set(spec: &TypicalSpec) -> Result<Vec<Vec<usize>>> {
    typical_set_guarded(spec, ENUMERATION_GUARD)
}

pub fn typical_set_guarded(spec: &TypicalSpec, guard: u128) -> Result<Vec<Vec<usize>>> {
    let q = spec.pmf.len();
    guarded_size(q, spec.n, guard)?;
    let logs = spec.neg_logs();
    let h = spec.entropy();
    let n = spec.n as f64;
    // only symbols of positive probability can appear
    let support: Vec<usize> = (0..q).filter(|&x| spec.pmf.prob(x) > 0.0).collect();
    let choices = vec![support.as_slice(); spec.n];
    Ok(ProductIter::new(choices)
        .filter(|x| within(x.iter().map(|&s| logs[s]).sum::<f64>() / n, h, spec.delta))
        .collect())
}

/// Exact count and probability of the typical set, summed over types
/// (symbol-count vectors) instead of sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypicalSummary {
    pub count: f64,
    pub probability: f64,
}

pub fn typical_summary(spec: &TypicalSpec) -> TypicalSummary {
    let probs = spec.pmf.probs();
    let logs = spec.neg_logs();
    let h = spec.entropy();
    let n = spec.n;
    let ln_fact: Vec<f64> = (0..=n)
        .scan(0.0, |acc, i| {
            if i > 0 {
                *acc += (i as f64).ln();
            }
            Some(*acc)
        })
        .collect();
    let support: Vec<usize> = (0..probs.len()).filter(|&x| probs[x] > 0.0).collect();
    let mut summary = TypicalSummary { count: 0.0, probability: 0.0 };
    let mut counts = vec![0usize; support.len()];
    compositions(&mut counts, 0, n, &mut |c| {
        let stat = c.iter().zip(&support).map(|(&k, &x)| k as f64 * logs[x]).sum::<f64>() / n as f64;
        if within(stat, h, spec.delta) {
            let ln_multi = ln_fact[n] - c.iter().map(|&k| ln_fact[k]).sum::<f64>();
            let count = ln_multi.exp();
            summary.count += count.round();
            summary.probability += (ln_multi - n as f64 * stat).exp();
        }
    });
    summary
}

fn compositions(counts: &mut [usize], pos: usize, remaining: usize, visit: &mut impl FnMut(&[usize])) {
    if counts.is_empty() {
        if remaining == 0 {
            visit(counts);
        }
        return;
    }
    if pos == counts.len() - 1 {
        counts[pos] = remaining;
        visit(counts);
        return;
    }
    for k in 0..=remaining {
        counts[pos] = k;
        compositions(counts, pos + 1, remaining - k, visit);
    }
}

/// Monte Carlo estimate of the probability of the typical set, with its
/// binomial standard error. Samples are drawn in fixed chunks, one random
/// stream per chunk, so the estimate does not depend on the thread count.
pub fn typical_mass_mc(spec: &TypicalSpec, samples: usize, seed: u64, exec: Execution) -> (f64, f64) {
    const CHUNK: usize = 4096;
    let logs = spec.neg_logs();
    let h = spec.entropy();
    let chunks = samples.div_ceil(CHUNK);
    let hits = map_indexed(exec, chunks, |c| {
        let mut rng = stream_rng(seed, c as u64);
        let len = CHUNK.min(samples - c * CHUNK);
        (0..len)
            .filter(|_| {
                let stat = (0..spec.n).map(|_| logs[spec.pmf.sample(&mut rng)]).sum::<f64>() / spec.n as f64;
                within(stat, h, spec.delta)
            })
            .count()
    });
    let p = hits.iter().sum::<usize>() as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

/// Cardinality bounds of the asymptotic equipartition property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AepBounds {
    /// `e^{n(H + delta)}`; holds for every `n`.
    pub card_upper: f64,
    /// `(1 - 2 eps) e^{n(H - delta)}`; only guaranteed once `n` is large
    /// enough that the typical set carries probability `1 - eps`.
    pub card_lower: f64,
    pub lower_valid_for_large_n_only: bool,
}

pub fn aep_bounds(spec: &TypicalSpec, eps: f64) -> AepBounds {
    let h = spec.entropy();
    let n = spec.n as f64;
    AepBounds {
        card_upper: (n * (h + spec.delta)).exp(),
        card_lower: (1.0 - 2.0 * eps) * (n * (h - spec.delta)).exp(),
        lower_valid_for_large_n_only: true,
    }
}

/// Sequences of one input class `(f^n)^{-1}(y^n)` that are typical given `y^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondTypicalSpec {
    pub source: Pmf,
    pub f: DetFunction,
    pub yseq: Vec<usize>,
    pub delta: f64,
}

impl CondTypicalSpec {
    /// `delta = 0` is accepted here: exact membership is meaningful when the
    /// conditional distribution is uniform on each preimage.
    pub fn new(source: Pmf, f: DetFunction, yseq: Vec<usize>, delta: f64) -> Result<Self> {
        if source.alphabet() != f.domain() {
            return Err(Error::AlphabetMismatch("source alphabet differs from the domain of f".into()));
        }
        f.codomain().check_seq(&yseq)?;
        if !(delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be non-negative, got {delta}")));
        }
        Ok(CondTypicalSpec { source, f, yseq, delta })
    }
}

/// Precomputed per-symbol conditional statistics of `X` given `f(X)`.
#[derive(Debug, Clone)]
pub struct ConditionalModel {
    /// `-ln P(x | f(x))`, infinite for null symbols.
    pub neg_log_cond: Vec<f64>,
    /// `H(X | Y = y)` per codomain symbol.
    pub class_entropy: Vec<f64>,
    /// `P(Y = y)`.
    pub py: Vec<f64>,
}

impl ConditionalModel {
    pub fn new(source: &Pmf, f: &DetFunction) -> Self {
        let py = pushforward(source, f);
        let neg_log_cond = (0..source.len())
            .map(|x| {
                let p = source.prob(x);
                let q = py[f.apply(x)];
                if p > 0.0 {
                    -(p / q).ln()
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        ConditionalModel { neg_log_cond, class_entropy: class_entropies(source, f), py }
    }

    /// `(1/n) sum_j H(X | Y = y_j)`.
    pub fn centre(&self, yseq: &[usize]) -> f64 {
        if yseq.is_empty() {
            return 0.0;
        }
        yseq.iter().map(|&y| self.class_entropy[y]).sum::<f64>() / yseq.len() as f64
    }

    /// Conditional typicality of `x^n` given `y^n`; `x^n` must lie in the class.
    pub fn is_cond_typical(&self, xseq: &[usize], centre: f64, delta: f64) -> bool {
        if xseq.is_empty() {
            return true;
        }
        let stat = xseq.iter().map(|&x| self.neg_log_cond[x]).sum::<f64>() / xseq.len() as f64;
        within(stat, centre, delta)
    }

    pub(crate) fn stat_matches(&self, stat: f64, centre: f64, delta: f64) -> bool {
        within(stat, centre, delta)
    }
}

fn class_choices(spec: &CondTypicalSpec) -> Result<Vec<&[usize]>> {
    spec.yseq
        .iter()
        .enumerate()
        .map(|(j, &y)| {
            let pre = spec.f.preimage(y);
            if pre.is_empty() {
                Err(Error::EmptyPreimage(j))
            } else {
                Ok(pre)
            }
        })
        .collect()
}

/// Lazy lexicographic stream of the conditionally typical members of the
/// class. Only `EMPTY_PREIMAGE` is checked up front; there is no size guard.
pub fn cond_typical_iter(spec: &CondTypicalSpec) -> Result<impl Iterator<Item = Vec<usize>> + '_> {
    let choices = class_choices(spec)?;
    let model = ConditionalModel::new(&spec.source, &spec.f);
    let centre = model.centre(&spec.yseq);
    let delta = spec.delta;
    Ok(ProductIter::new(choices).filter(move |x| model.is_cond_typical(x, centre, delta)))
}

/// All conditionally typical `x^n` with `f^n(x^n) = y^n`, lexicographically.
pub fn cond_typical_set(spec: &CondTypicalSpec, n: usize) -> Result<Vec<Vec<usize>>> {
    if spec.yseq.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: spec.yseq.len() });
    }
    let choices = class_choices(spec)?;
    let size = choices.iter().try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128));
    match size {
        Some(s) if s <= ENUMERATION_GUARD => {}
        Some(s) => return Err(Error::TooLarge(s)),
        None => return Err(Error::TooLarge(u128::MAX)),
    }
    Ok(cond_typical_iter(spec)?.collect())
}
