use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ncl_core::capacity::{capacity_iid, CapacityOptions};
use ncl_core::coding::{build_code, build_feinstein_code, exact_max_error, lemma_code_size, CodeParams, FeinsteinCode};
use ncl_core::info::{conditional_entropy_given_function, joint_yz, mutual_information, typical_input_rate};
use ncl_core::pipeline::{
    build_at, choose_block_lengths, converse_bound, rate_error_sweep, schedule_for_rate, simulate, EpsilonPolicy,
    PipelineParams, SweepConfig,
};
use ncl_core::typicality::default_delta;
use ncl_core::Execution;
use serde_json::{json, Map, Value};

use crate::config::{parse_instance, InstanceConfig};
use crate::output::{emit, single_row_csv, sweep_csv, to_json, OutputFormat, Units};
use crate::{CliError, REQUIRE_SEED_VAR};

const DEFAULT_TRIALS: usize = 10_000;
const DEFAULT_DELTA2: f64 = 0.5;
const DEFAULT_NS: [usize; 4] = [4, 8, 12, 16];

/// Capacities, Feinstein codes and reliable-computation pipelines for
/// noisy computations over finite alphabets.
#[derive(Debug, Parser)]
#[command(name = "ncl", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Instance file (JSON).
    #[arg(long, value_name = "PATH")]
    instance: PathBuf,
    /// Units for the display block; the main figures are always in nats.
    #[arg(long, value_enum)]
    units: Option<Units>,
    #[arg(long, value_enum)]
    output: Option<OutputFormat>,
    /// Write the result here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Run data-parallel loops on one thread (results are identical).
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Typical input rate B(X, f, F) and its entropy terms.
    Rate(#[command(flatten)] Common),
    /// Maximum of B over i.i.d. sources (a lower bound on the capacity).
    Capacity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Build a Feinstein code, verify it exactly, and save it with --out.
    Code {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Target rate in nats; without it the greedy code is maximal.
        #[arg(long)]
        rate: Option<f64>,
        /// Only check conditionally delta-typical inputs of each class.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Re-check a saved code against an instance.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        code: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Build the encode / compute / decode pipeline and simulate it.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[arg(long, requires = "n")]
        k: Option<usize>,
        #[arg(long, requires = "k")]
        n: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Slack above gamma when choosing (k, n) automatically.
        #[arg(long)]
        delta2: Option<f64>,
        #[arg(long, default_value_t = 16)]
        k_max: usize,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Leave blocks that do not fit unencoded instead of failing.
        #[arg(long)]
        allow_overflow: bool,
    },
    /// Rate / error sweep over block lengths (CSV by default).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Rate as a fraction of B at the instance source.
        #[arg(long, conflicts_with_all = ["rate", "schedule"])]
        rate_fraction: Option<f64>,
        /// Rate in nats.
        #[arg(long, conflicts_with = "schedule")]
        rate: Option<f64>,
        /// Inner block lengths.
        #[arg(long, value_delimiter = ',', conflicts_with = "schedule")]
        ns: Option<Vec<usize>>,
        /// Explicit `k:n` pairs, comma separated.
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<String>>,
        /// Fixed epsilon; without it each row uses the smallest feasible one.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        epsilon_tol: f64,
        /// Epsilon for rows that can only be built with overflow.
        #[arg(long, default_value_t = 0.5)]
        overflow_epsilon: f64,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn seed(flag: Option<u64>, cfg: &InstanceConfig) -> Result<u64, CliError> {
    let required = std::env::var(REQUIRE_SEED_VAR).is_ok_and(|v| v == "1");
    match flag {
        Some(s) => Ok(s),
        None if required => Err(CliError::MissingSeed),
        None => Ok(cfg.params.seed.unwrap_or(0)),
    }
}

fn epsilon(flag: Option<f64>, cfg: &InstanceConfig) -> Result<f64, CliError> {
    let eps = flag
        .or(cfg.params.epsilon)
        .ok_or_else(|| CliError::Usage("--epsilon is required (or set params.epsilon)".into()))?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CliError::Usage(format!("--epsilon must lie in (0, 1), got {eps}")));
    }
    Ok(eps)
}

fn positive(name: &str, v: Option<f64>) -> Result<Option<f64>, CliError> {
    match v {
        Some(x) if !(x > 0.0) => Err(CliError::Usage(format!("--{name} must be positive, got {x}"))),
        _ => Ok(v),
    }
}

fn units(common: &Common, cfg: &InstanceConfig) -> Units {
    common.units.or(cfg.params.units).unwrap_or_default()
}

fn json_only(common: &Common, command: &str) -> Result<(), CliError> {
    match common.output {
        Some(OutputFormat::Csv) => Err(CliError::Usage(format!("`{command}` only writes JSON"))),
        _ => Ok(()),
    }
}

/// Adds `"units": "nats"` and, for bits, a display block with the listed
/// figures converted.
fn with_units(mut obj: Map<String, Value>, keys: &[&str], units: Units) -> Value {
    if units == Units::Bits {
        let mut display = Map::new();
        display.insert("units".into(), json!("bits"));
        for &k in keys {
            if let Some(v) = obj.get(k).and_then(Value::as_f64) {
                display.insert(k.into(), json!(units.convert(v)));
            }
        }
        obj.insert("display".into(), Value::Object(display));
    }
    obj.insert("units".into(), json!("nats"));
    Value::Object(obj)
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("results serialize to objects"),
    }
}

impl Cli {
    pub fn execute(&self) -> Result<(), CliError> {
        match &self.command {
            Command::Rate(common) => rate(common),
            Command::Capacity { common, seed: s, restarts, max_iters, tol } => {
                let cfg = parse_instance(&common.instance)?;
                let opts = CapacityOptions {
                    restarts: *restarts,
                    max_iters: *max_iters,
                    tol: *tol,
                    seed: seed(*s, &cfg)?,
                    exec: common.exec(),
                };
                capacity(common, &cfg, &opts)
            }
            Command::Code { common, n, epsilon: e, rate, delta } => {
                code(common, *n, *e, *rate, positive("delta", *delta)?)
            }
            Command::Verify { common, code, delta } => verify(common, code, positive("delta", *delta)?),
            Command::Pipeline { common, k, n, epsilon: e, delta, delta2, k_max, trials, seed: s, allow_overflow } => {
                let cfg = parse_instance(&common.instance)?;
                let run = PipelineRun {
                    kn: k.zip(*n),
                    epsilon: epsilon(*e, &cfg)?,
                    delta: positive("delta", *delta)?,
                    delta2: positive("delta2", *delta2)?,
                    k_max: *k_max,
                    trials: trials.or(cfg.params.trials).unwrap_or(DEFAULT_TRIALS),
                    seed: seed(*s, &cfg)?,
                    allow_overflow: *allow_overflow,
                };
                pipeline(common, &cfg, &run)
            }
            Command::Sweep {
                common,
                rate_fraction,
                rate,
                ns,
                schedule,
                epsilon: e,
                epsilon_tol,
                overflow_epsilon,
                delta,
                trials,
                seed: s,
            } => {
                let cfg = parse_instance(&common.instance)?;
                let b_hat = typical_input_rate(&cfg.instance)?.b;
                let outer = cfg.outer()?;
                let schedule = match schedule {
                    Some(pairs) => parse_schedule(pairs)?,
                    None => {
                        let fraction = match (rate_fraction, rate) {
                            (_, Some(r)) => r / b_hat,
                            (Some(f), None) => *f,
                            (None, None) => 0.5,
                        };
                        if !(fraction > 0.0) || !fraction.is_finite() {
                            return Err(CliError::Usage("the rate must be positive".into()));
                        }
                        let ns = ns.clone().unwrap_or_else(|| DEFAULT_NS.to_vec());
                        schedule_for_rate(fraction, b_hat, outer.entropy(), &ns)
                    }
                };
                let policy = match e {
                    Some(eps) => EpsilonPolicy::Fixed(epsilon(Some(*eps), &cfg)?),
                    None => {
                        EpsilonPolicy::Minimal { tol: positive("epsilon-tol", Some(*epsilon_tol))?.unwrap_or(1e-3) }
                    }
                };
                let seed = seed(*s, &cfg)?;
                let delta =
                    positive("delta", *delta)?.or(cfg.params.delta).unwrap_or_else(|| default_delta(&outer.source));
                let capacity = capacity_iid(
                    &cfg.instance.f,
                    &cfg.instance.channel,
                    &CapacityOptions { seed, exec: common.exec(), ..CapacityOptions::default() },
                )?;
                let sweep = SweepConfig {
                    inst: cfg.instance.clone(),
                    outer,
                    schedule,
                    delta,
                    epsilon: policy,
                    overflow_epsilon: epsilon(Some(*overflow_epsilon), &cfg)?,
                    codeword_delta: None,
                    trials: trials.or(cfg.params.trials).unwrap_or(DEFAULT_TRIALS),
                    seed,
                    capacity_estimate: capacity.value,
                    exec: common.exec(),
                };
                sweep_cmd(common, &cfg, &sweep, b_hat)
            }
        }
    }
}

fn parse_schedule(pairs: &[String]) -> Result<Vec<(usize, usize)>, CliError> {
    pairs
        .iter()
        .map(|p| {
            let bad = || CliError::Usage(format!("schedule entries look like k:n, got {p:?}"));
            let (k, n) = p.split_once(':').ok_or_else(bad)?;
            Ok((k.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn rate(common: &Common) -> Result<(), CliError> {
    let cfg = parse_instance(&common.instance)?;
    let report = typical_input_rate(&cfg.instance)?;
    let keys = ["h_x", "h_y", "h_x_given_y", "h_y_given_z", "i_yz", "b", "b_via_decomposition"];
    let mut obj = object(serde_json::to_value(report).expect("serializable"));
    obj.insert("b_via_decomposition".into(), json!(report.b_via_decomposition()));
    let text = match common.output.unwrap_or_default() {
        OutputFormat::Json => to_json(&with_units(obj, &keys, units(common, &cfg))),
        OutputFormat::Csv => single_row_csv(
            &keys.iter().map(|&k| (k, obj[k].as_f64().expect("numeric").to_string())).collect::<Vec<_>>(),
        ),
    };
    emit(&text, common.out.as_deref())
}

fn capacity(common: &Common, cfg: &InstanceConfig, opts: &CapacityOptions) -> Result<(), CliError> {
    let result = capacity_iid(&cfg.instance.f, &cfg.instance.channel, opts)?;
    if !result.converged {
        eprintln!("warning[NO_CONVERGENCE]: best restart hit --max-iters before --tol");
    }
    let mut obj = object(serde_json::to_value(&result).expect("serializable"));
    obj.insert("label".into(), json!("i.i.d. lower bound"));
    obj.insert("seed".into(), json!(opts.seed));
    let text = match common.output.unwrap_or_default() {
        OutputFormat::Json => to_json(&with_units(obj, &["value"], units(common, cfg))),
        OutputFormat::Csv => single_row_csv(&[
            ("label", "i.i.d. lower bound".into()),
            ("value_nats", result.value.to_string()),
            ("restarts_used", result.restarts_used.to_string()),
            ("converged", result.converged.to_string()),
            ("seed", opts.seed.to_string()),
        ]),
    };
    emit(&text, common.out.as_deref())
}

fn code(common: &Common, n: usize, eps: Option<f64>, rate: Option<f64>, delta: Option<f64>) -> Result<(), CliError> {
    json_only(common, "code")?;
    let cfg = parse_instance(&common.instance)?;
    let eps = epsilon(eps, &cfg)?;
    let inst = &cfg.instance;
    let params = CodeParams { input_delta: delta, ..CodeParams::new(n, eps) };
    let build = match rate {
        Some(r) => build_feinstein_code(inst, &params, r)?,
        None => build_code(inst, &params, u64::MAX)?,
    };
    let code = &build.code;
    let max_error = exact_max_error(code, inst, delta, common.exec())?;
    let h = conditional_entropy_given_function(&inst.source, &inst.f);
    let obj = object(json!({
        "n": n,
        "epsilon": eps,
        "input_delta": delta,
        "rate_target": rate,
        "requested": rate.map(|_| build.requested),
        "lemma_code_size": rate.map(|r| lemma_code_size(r, n, h)),
        "size": code.size(),
        "exhausted": rate.map(|_| build.exhausted),
        "rate_achieved": (code.size() as f64).ln() / n as f64 + h,
        "max_error": max_error,
        "regions_disjoint": code.regions_disjoint(),
    }));
    if let Some(path) = &common.out {
        emit(&code.to_string(), Some(path))?;
    }
    print!("{}", to_json(&with_units(obj, &["rate_target", "rate_achieved"], units(common, &cfg))));
    if max_error > eps + 1e-12 {
        return Err(CliError::VerifyFailed(format!("maximal error {max_error} exceeds epsilon {eps}")));
    }
    if rate.is_some() {
        build.status()?;
    }
    Ok(())
}

fn verify(common: &Common, path: &Path, delta: Option<f64>) -> Result<(), CliError> {
    json_only(common, "verify")?;
    let cfg = parse_instance(&common.instance)?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let code: FeinsteinCode = text.parse()?;
    let max_error = exact_max_error(&code, &cfg.instance, delta, common.exec())?;
    let disjoint = code.regions_disjoint();
    let valid = disjoint && max_error <= code.epsilon() + 1e-12;
    let obj = json!({
        "valid": valid,
        "n": code.n(),
        "epsilon": code.epsilon(),
        "size": code.size(),
        "input_delta": delta,
        "max_error": max_error,
        "regions_disjoint": disjoint,
    });
    emit(&to_json(&obj), common.out.as_deref())?;
    if !valid {
        return Err(CliError::VerifyFailed(format!(
            "maximal error {max_error} against epsilon {}, regions disjoint: {disjoint}",
            code.epsilon()
        )));
    }
    Ok(())
}

struct PipelineRun {
    kn: Option<(usize, usize)>,
    epsilon: f64,
    delta: Option<f64>,
    delta2: Option<f64>,
    k_max: usize,
    trials: usize,
    seed: u64,
    allow_overflow: bool,
}

fn pipeline(common: &Common, cfg: &InstanceConfig, run: &PipelineRun) -> Result<(), CliError> {
    json_only(common, "pipeline")?;
    let outer = cfg.outer()?;
    let inst = &cfg.instance;
    let delta = run.delta.or(cfg.params.delta).unwrap_or_else(|| default_delta(&outer.source));
    let (k, n) = match run.kn {
        Some(kn) => kn,
        None => {
            let delta2 = run.delta2.or(cfg.params.delta2).unwrap_or(DEFAULT_DELTA2);
            let bl = choose_block_lengths(&outer, inst, delta2, run.k_max)?;
            (bl.k, bl.n)
        }
    };
    let params = PipelineParams { allow_overflow: run.allow_overflow, ..PipelineParams::new(k, delta) };
    let p = build_at(inst, &outer, &params, n, run.epsilon, None)?;
    let estimate = simulate(&p, run.trials, run.seed, common.exec())?;
    let i_yz = mutual_information(&joint_yz(&inst.source, &inst.f, &inst.channel)?);
    let converse = converse_bound(
        outer.entropy(),
        outer.conditional_entropy(),
        n as f64 / k as f64,
        i_yz,
        k,
        outer.g.codomain().len(),
    );
    let obj = object(json!({
        "k": k,
        "n": n,
        "rate": p.rate(),
        "gamma": p.gamma(),
        "epsilon": run.epsilon,
        "delta": delta,
        "allow_overflow": run.allow_overflow,
        "converse_lower_bound": converse,
        "diagnostics": p.diagnostics(),
        "estimate": estimate,
    }));
    emit(&to_json(&with_units(obj, &["rate"], units(common, cfg))), common.out.as_deref())
}

fn sweep_cmd(common: &Common, cfg: &InstanceConfig, sweep: &SweepConfig, b_hat: f64) -> Result<(), CliError> {
    let rows = rate_error_sweep(sweep);
    let text = match common.output.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => sweep_csv(&rows)?,
        OutputFormat::Json => {
            let units = units(common, cfg);
            let mut obj = object(json!({
                "b_hat": b_hat,
                "capacity_estimate": sweep.capacity_estimate,
                "delta": sweep.delta,
                "epsilon_policy": sweep.epsilon,
                "rows": rows,
            }));
            if units == Units::Bits {
                let display: Vec<Value> = rows
                    .iter()
                    .map(|r| json!({"k": r.k, "n": r.n, "R": units.convert(r.r_nats), "capacity_estimate": units.convert(r.capacity_estimate)}))
                    .collect();
                obj.insert("display".into(), json!({"units": "bits", "b_hat": units.convert(b_hat), "rows": display}));
            }
            obj.insert("units".into(), json!("nats"));
            to_json(&Value::Object(obj))
        }
    };
    emit(&text, common.out.as_deref())
}
