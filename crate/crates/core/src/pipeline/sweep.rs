//! Rate / error sweeps over a schedule of block lengths.

use serde::Serialize;

use super::{
    build_pipeline, converse_bound, group_sizes, simulate, OuterProblem, PipelineDiagnostics, PipelineParams,
    ReliablePipeline,
};
use crate::coding::{build_code, CodeParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::info::{joint_yz, mutual_information};
use crate::model::seq::{space_size, ENUMERATION_GUARD};
use crate::model::NoisyComputationInstance;
use crate::typicality::{typical_summary, TypicalSpec};

/// Largest epsilon tried when searching for a feasible code.
const EPS_CEILING: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonPolicy {
    Fixed(f64),
    /// Smallest epsilon (to within `tol`, by bisection) at which a code and
    /// an injective pipeline can be built.
    Minimal {
        tol: f64,
    },
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub inst: NoisyComputationInstance,
    pub outer: OuterProblem,
    /// `(k, n)` pairs in emission order.
    pub schedule: Vec<(usize, usize)>,
    pub delta: f64,
    pub epsilon: EpsilonPolicy,
    /// Epsilon used when no injective pipeline exists and the row is built
    /// in overflow mode.
    pub overflow_epsilon: f64,
    pub codeword_delta: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub capacity_estimate: f64,
    pub exec: Execution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStatus {
    /// Injective pipeline built and simulated.
    Ok,
    /// Some typical blocks could not be encoded; each counts as an error.
    Overflow,
    /// More typical blocks than inputs of length `n`: some block cannot be
    /// encoded, so the maximal error is 1 without simulation.
    CountingCertificate,
    Failed {
        code: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub n: usize,
    pub r_nats: f64,
    pub capacity_estimate: f64,
    pub avg_error: Option<f64>,
    pub max_error: Option<f64>,
    pub converse_lower_bound: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub status: SweepStatus,
    pub epsilon: Option<f64>,
    pub exact: bool,
    pub mc_avg_error: Option<f64>,
    pub ci_halfwidth: Option<f64>,
    pub accepted: usize,
    pub rejected_atypical: usize,
    pub mi_message_decoded: Option<f64>,
    pub mi_codeword_output: Option<f64>,
    pub diagnostics: Option<PipelineDiagnostics>,
}

/// `k = max(1, round(n * fraction * b_hat / H(X')))` for each `n`.
pub fn schedule_for_rate(fraction: f64, b_hat: f64, h_outer: f64, ns: &[usize]) -> Vec<(usize, usize)> {
    ns.iter().map(|&n| (((n as f64 * fraction * b_hat / h_outer).round() as usize).max(1), n)).collect()
}

/// Code for the typical groups of `outer` at block length `n`, with the
/// pipeline built on top of it. Each group's class must hold at least as
/// many conditionally typical inputs as the group has members.
pub fn build_at(
    inst: &NoisyComputationInstance,
    outer: &OuterProblem,
    params: &PipelineParams,
    n: usize,
    epsilon: f64,
    codeword_delta: Option<f64>,
) -> Result<ReliablePipeline> {
    let floor: Vec<u128> = group_sizes(outer, params.k, params.delta)?.iter().map(|&s| s as u128).collect();
    let target = floor.len() as u64;
    let code_params = CodeParams {
        codeword_delta,
        input_delta: Some(params.delta),
        class_floor: floor,
        ..CodeParams::new(n, epsilon)
    };
    let code = build_code(inst, &code_params, target)?.code;
    build_pipeline(outer, inst, &code, params)
}

fn attempt(cfg: &SweepConfig, k: usize, n: usize, eps: f64, overflow: bool) -> Result<ReliablePipeline> {
    let params = PipelineParams { allow_overflow: overflow, ..PipelineParams::new(k, cfg.delta) };
    build_at(&cfg.inst, &cfg.outer, &params, n, eps, cfg.codeword_delta)
}

fn infeasible(e: &Error) -> bool {
    matches!(e, Error::TooFewCodewords { .. } | Error::GroupOverflow { .. })
}

/// Strict pipeline at the policy's epsilon, or an overflow pipeline when
/// none exists. Returns the pipeline, its epsilon and whether it overflows.
fn build_row(cfg: &SweepConfig, k: usize, n: usize) -> Result<(ReliablePipeline, f64, bool)> {
    let overflow = |eps: f64| attempt(cfg, k, n, eps, true).map(|p| (p, eps, true));
    match cfg.epsilon {
        EpsilonPolicy::Fixed(eps) => match attempt(cfg, k, n, eps, false) {
            Ok(p) => Ok((p, eps, false)),
            Err(e) if infeasible(&e) => overflow(eps),
            Err(e) => Err(e),
        },
        EpsilonPolicy::Minimal { tol } => {
            let mut best = match attempt(cfg, k, n, EPS_CEILING, false) {
                Ok(p) => (p, EPS_CEILING),
                Err(e) if infeasible(&e) => return overflow(cfg.overflow_epsilon),
                Err(e) => return Err(e),
            };
            let (mut lo, mut hi) = (0.0, EPS_CEILING);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                match attempt(cfg, k, n, mid, false) {
                    Ok(p) => {
                        best = (p, mid);
                        hi = mid;
                    }
                    Err(e) if infeasible(&e) => lo = mid,
                    Err(e) => return Err(e),
                }
            }
            Ok((best.0, best.1, false))
        }
    }
}

/// One row per schedule entry; failures are recorded in the row.
pub fn rate_error_sweep(cfg: &SweepConfig) -> Vec<SweepRow> {
    let h_outer = cfg.outer.entropy();
    let h_outer_given_g = cfg.outer.conditional_entropy();
    let i_yz = joint_yz(&cfg.inst.source, &cfg.inst.f, &cfg.inst.channel).map(|j| mutual_information(&j)).ok();
    let b_prime = cfg.outer.g.codomain().len();
    cfg.schedule
        .iter()
        .map(|&(k, n)| {
            let mut row = SweepRow {
                k,
                n,
                r_nats: k as f64 * h_outer / n as f64,
                capacity_estimate: cfg.capacity_estimate,
                avg_error: None,
                max_error: None,
                converse_lower_bound: i_yz
                    .map(|i| converse_bound(h_outer, h_outer_given_g, n as f64 / k as f64, i, k, b_prime)),
                trials: cfg.trials,
                seed: cfg.seed,
                status: SweepStatus::Ok,
                epsilon: None,
                exact: false,
                mc_avg_error: None,
                ci_halfwidth: None,
                accepted: 0,
                rejected_atypical: 0,
                mi_message_decoded: None,
                mi_codeword_output: None,
                diagnostics: None,
            };
            if let Err(e) = fill_row(cfg, &mut row) {
                row.status = SweepStatus::Failed { code: e.code().to_string(), message: e.to_string() };
            }
            row
        })
        .collect()
}

fn fill_row(cfg: &SweepConfig, row: &mut SweepRow) -> Result<()> {
    let (k, n) = (row.k, row.n);
    if k == 0 || n == 0 {
        return Err(Error::InvalidParameter("block lengths must be positive".into()));
    }
    let messages = typical_summary(&TypicalSpec::new(cfg.outer.source.clone(), k, cfg.delta)?).count;
    if messages > ENUMERATION_GUARD as f64 {
        let inputs = space_size(cfg.inst.source.len(), n).map_or(f64::INFINITY, |s| s as f64);
        if messages > inputs {
            row.status = SweepStatus::CountingCertificate;
            row.max_error = Some(1.0);
            row.trials = 0;
            return Ok(());
        }
        return Err(Error::TooLarge(messages as u128));
    }
    let (pipeline, eps, overflow) = build_row(cfg, k, n)?;
    let est = simulate(&pipeline, cfg.trials, cfg.seed, cfg.exec)?;
    row.status = if overflow { SweepStatus::Overflow } else { SweepStatus::Ok };
    row.epsilon = Some(eps);
    row.avg_error = Some(est.avg_error);
    row.max_error = Some(est.max_message_error);
    row.exact = est.exact;
    row.mc_avg_error = Some(est.mc_avg_error);
    row.ci_halfwidth = Some(est.ci_halfwidth);
    row.accepted = est.accepted;
    row.rejected_atypical = est.rejected_atypical;
    row.mi_message_decoded = Some(est.mi_message_decoded);
    row.mi_codeword_output = Some(est.mi_codeword_output);
    row.diagnostics = Some(*pipeline.diagnostics());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::tests::{and_instance, and_outer};
    use super::*;

    fn config(noise: Option<f64>, schedule: Vec<(usize, usize)>) -> SweepConfig {
        SweepConfig {
            inst: and_instance(noise),
            outer: and_outer(),
            schedule,
            delta: 0.15,
            epsilon: EpsilonPolicy::Fixed(0.3),
            overflow_epsilon: 0.5,
            codeword_delta: None,
            trials: 2000,
            seed: 5,
            capacity_estimate: 1.0,
            exec: Execution::Parallel,
        }
    }

    #[test]
    fn schedule_rounding() {
        let b_hat = 1.2148;
        let h = 4f64.ln();
        let ks: Vec<usize> = schedule_for_rate(0.5, b_hat, h, &[4, 8, 12, 16]).iter().map(|p| p.0).collect();
        assert_eq!(ks, vec![2, 4, 5, 7]);
        assert_eq!(schedule_for_rate(0.01, b_hat, h, &[4]), vec![(1, 4)]);
    }

    #[test]
    fn noiseless_rows_have_zero_error() {
        let rows = rate_error_sweep(&config(None, vec![(1, 1), (1, 2), (2, 2)]));
        for r in &rows {
            assert_eq!(r.status, SweepStatus::Ok, "{r:?}");
            assert_eq!(r.avg_error, Some(0.0));
            assert_eq!(r.max_error, Some(0.0));
        }
        assert_eq!(rows.iter().map(|r| (r.k, r.n)).collect::<Vec<_>>(), vec![(1, 1), (1, 2), (2, 2)]);
    }

    #[test]
    fn failures_stay_in_their_row() {
        let rows = rate_error_sweep(&config(Some(0.05), vec![(3, 1), (1, 2)]));
        assert!(matches!(&rows[0].status, SweepStatus::Failed { code, .. } if code == "RATE_ABOVE_ENCODER_LIMIT"));
        assert_eq!(rows[1].status, SweepStatus::Ok);
    }

    #[test]
    fn minimal_epsilon_is_feasible_and_tight() {
        let mut cfg = config(Some(0.05), vec![(1, 2)]);
        cfg.epsilon = EpsilonPolicy::Minimal { tol: 1e-3 };
        let row = &rate_error_sweep(&cfg)[0];
        let eps = row.epsilon.unwrap();
        assert!(row.max_error.unwrap() <= eps);
        assert!(attempt(&cfg, 1, 2, eps - 2e-3, false).is_err());
    }
}
