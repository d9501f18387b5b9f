//! Typical input capacity `C_f(F) = sup_P B(P, f, F)`, maximized here over
//! i.i.d. sources only, so every value reported is a lower bound on the
//! supremum over all stationary ergodic sources.
//!
//! `B(P) = H(X) - H(f(X) | F(X))` is not concave in `P` in general (the
//! cascade channel moves with `P`), so the optimizer is a multistart
//! projected gradient ascent. Two independent checks back it: a lattice
//! search over the simplex and, for bijective `f`, Blahut-Arimoto.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, stream_rng, Execution};
use crate::info::entropy_of;
use crate::model::{DMChannel, DetFunction, Pmf};

/// Lower clip applied to probabilities while differentiating.
const CLIP: f64 = 1e-12;
/// Central finite-difference step.
const FD_STEP: f64 = 1e-6;
const MIN_STEP: f64 = 1e-18;
const MAX_STEP: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions { restarts: 32, max_iters: 10_000, tol: 1e-10, seed: 0, exec: Execution::Parallel }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    /// Nats per symbol; a lower bound on the capacity over all ergodic sources.
    pub value: f64,
    #[serde(serialize_with = "serialize_pmf")]
    pub argmax: Pmf,
    pub restarts_used: usize,
    /// Whether the winning restart met the tolerance before `max_iters`.
    pub converged: bool,
    /// `(iteration, value)` checkpoints of the winning restart.
    pub trace: Vec<(usize, f64)>,
}

fn serialize_pmf<S: serde::Serializer>(pmf: &Pmf, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(pmf.len()))?;
    for (label, p) in pmf.alphabet().symbols().iter().zip(pmf.probs()) {
        map.serialize_entry(label, p)?;
    }
    map.end()
}

/// `P_X -> B(P_X)` for a fixed `(f, F)`.
#[derive(Debug, Clone)]
pub struct RateObjective<'a> {
    f: &'a DetFunction,
    channel: &'a DMChannel,
}

impl<'a> RateObjective<'a> {
    pub fn new(f: &'a DetFunction, channel: &'a DMChannel) -> Result<Self> {
        if f.domain() != channel.input() {
            return Err(Error::AlphabetMismatch("channel input differs from the domain of f".into()));
        }
        Ok(RateObjective { f, channel })
    }

    pub fn dim(&self) -> usize {
        self.f.domain().len()
    }

    /// `H(X) - H(Y|Z)` at the probability vector `p` (not validated).
    pub fn value(&self, p: &[f64]) -> f64 {
        self.eval(p, false)
    }

    fn eval(&self, p: &[f64], clip: bool) -> f64 {
        let nz = self.channel.output().len();
        let mut joint = vec![0.0; self.f.codomain().len() * nz];
        let mut hx = 0.0;
        for (x, &raw) in p.iter().enumerate() {
            let px = if clip { raw.max(CLIP) } else { raw };
            if px > 0.0 {
                hx -= px * px.ln();
            }
            let y = self.f.apply(x);
            for (z, &q) in self.channel.row(x).iter().enumerate() {
                joint[y * nz + z] += px * q;
            }
        }
        let mut pz = vec![0.0; nz];
        for (i, &v) in joint.iter().enumerate() {
            pz[i % nz] += v;
        }
        hx - (entropy_of(&joint) - entropy_of(&pz))
    }

    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let mut probe = p.to_vec();
        (0..p.len())
            .map(|i| {
                probe[i] = p[i] + FD_STEP;
                let up = self.eval(&probe, true);
                // a central probe below zero would be clipped, halving the
                // slope on a face of the simplex; go one-sided there
                let d = if p[i] >= FD_STEP {
                    probe[i] = p[i] - FD_STEP;
                    (up - self.eval(&probe, true)) / (2.0 * FD_STEP)
                } else {
                    probe[i] = p[i];
                    (up - self.eval(&probe, true)) / FD_STEP
                };
                probe[i] = p[i];
                d
            })
            .collect()
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    let mut w: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

struct Ascent {
    point: Vec<f64>,
    value: f64,
    converged: bool,
    trace: Vec<(usize, f64)>,
}

fn ascend(obj: &RateObjective<'_>, start: Vec<f64>, opts: &CapacityOptions) -> Ascent {
    let mut p = project_simplex(&start);
    let mut value = obj.eval(&p, true);
    let mut step: f64 = 1.0;
    let mut trace = vec![(0, obj.value(&p))];
    let mut converged = false;
    let mut iters = 0;
    while iters < opts.max_iters {
        iters += 1;
        let g = obj.gradient(&p);
        let mut s = (step * 2.0).min(MAX_STEP);
        let mut accepted = None;
        while s >= MIN_STEP {
            let cand: Vec<f64> = p.iter().zip(&g).map(|(&a, &b)| a + s * b).collect();
            let cand = project_simplex(&cand);
            let v = obj.eval(&cand, true);
            if v > value {
                accepted = Some((cand, v));
                break;
            }
            s *= 0.5;
        }
        let Some((cand, v)) = accepted else {
            converged = true;
            break;
        };
        let gain = v - value;
        p = cand;
        value = v;
        step = s;
        if iters.is_power_of_two() {
            trace.push((iters, obj.value(&p)));
        }
        if gain < opts.tol {
            converged = true;
            break;
        }
    }
    let value = obj.value(&p);
    if trace.last().map(|t| t.0) != Some(iters) {
        trace.push((iters, value));
    }
    Ascent { point: p, value, converged, trace }
}

/// Starting points: uniform, one vertex-biased start per symbol, then
/// uniform draws from the simplex (restart `r` uses random stream `r`).
fn starting_point(dim: usize, r: usize, seed: u64) -> Vec<f64> {
    if r == 0 {
        return vec![1.0 / dim as f64; dim];
    }
    if r <= dim {
        let mut p = vec![0.1 / dim as f64; dim];
        p[r - 1] += 0.9;
        return p;
    }
    let mut rng = stream_rng(seed, r as u64);
    let e: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}

/// Multistart maximization of `B` over i.i.d. sources. The best restart
/// wins; ties go to the lowest restart index, so the result does not depend
/// on execution order.
pub fn capacity_iid(f: &DetFunction, channel: &DMChannel, opts: &CapacityOptions) -> Result<CapacityResult> {
    let obj = RateObjective::new(f, channel)?;
    if opts.restarts == 0 {
        return Err(Error::InvalidParameter("at least one restart is required".into()));
    }
    let dim = obj.dim();
    let runs = map_indexed(opts.exec, opts.restarts, |r| ascend(&obj, starting_point(dim, r, opts.seed), opts));
    let best = runs
        .into_iter()
        .reduce(|best, run| if run.value > best.value { run } else { best })
        .expect("at least one restart");
    Ok(CapacityResult {
        value: best.value,
        argmax: Pmf::new(f.domain().clone(), best.point)?,
        restarts_used: opts.restarts,
        converged: best.converged,
        trace: best.trace,
    })
}

const GRID_RESOLUTIONS: [f64; 3] = [0.01, 0.02, 0.05];

/// Brute-force maximum of `B` over the simplex lattice with the given step.
pub fn capacity_grid_oracle(f: &DetFunction, channel: &DMChannel, resolution: f64, exec: Execution) -> Result<f64> {
    let obj = RateObjective::new(f, channel)?;
    let dim = obj.dim();
    if dim > 5 {
        return Err(Error::AlphabetTooLarge(dim));
    }
    if !GRID_RESOLUTIONS.iter().any(|r| (r - resolution).abs() < 1e-12) {
        return Err(Error::BadResolution(resolution));
    }
    let m = (1.0 / resolution).round() as usize;
    if dim == 1 {
        return Ok(obj.value(&[1.0]));
    }
    let best = map_indexed(exec, m + 1, |first| {
        let mut counts = vec![0usize; dim];
        counts[0] = first;
        let mut best = f64::NEG_INFINITY;
        let mut p = vec![0.0; dim];
        lattice(&mut counts, 1, m - first, &mut |c| {
            for (pi, &ci) in p.iter_mut().zip(c) {
                *pi = ci as f64 / m as f64;
            }
            best = best.max(obj.value(&p));
        });
        best
    });
    Ok(best.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

fn lattice(counts: &mut [usize], pos: usize, remaining: usize, visit: &mut impl FnMut(&[usize])) {
    if pos == counts.len() - 1 {
        counts[pos] = remaining;
        visit(counts);
        return;
    }
    for k in 0..=remaining {
        counts[pos] = k;
        lattice(counts, pos + 1, remaining - k, visit);
    }
}

/// Shannon capacity of `F` by Blahut-Arimoto, stopped once the standard
/// upper and lower bounds are within `tol`.
pub fn blahut_arimoto(channel: &DMChannel, tol: f64, max_iters: usize) -> Result<f64> {
    let nx = channel.input().len();
    let mut p = vec![1.0 / nx as f64; nx];
    for _ in 0..max_iters {
        let q: Vec<f64> =
            (0..channel.output().len()).map(|z| (0..nx).map(|x| p[x] * channel.prob(x, z)).sum()).collect();
        let c: Vec<f64> = (0..nx)
            .map(|x| {
                let d: f64 =
                    channel.row(x).iter().zip(&q).filter(|(&w, _)| w > 0.0).map(|(&w, &qz)| w * (w / qz).ln()).sum();
                d.exp()
            })
            .collect();
        let total: f64 = p.iter().zip(&c).map(|(a, b)| a * b).sum();
        let lower = total.ln();
        let upper = c.iter().copied().fold(f64::NEG_INFINITY, f64::max).ln();
        if upper - lower < tol {
            return Ok(lower.max(0.0));
        }
        for (pi, ci) in p.iter_mut().zip(&c) {
            *pi *= ci / total;
        }
    }
    Err(Error::NoConvergence(max_iters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::binary_entropy;
    use crate::model::Alphabet;
    use approx::assert_abs_diff_eq;

    fn and() -> DetFunction {
        let a = Alphabet::new(["00", "01", "10", "11"]).unwrap();
        DetFunction::new(a, Alphabet::binary(), vec![0, 0, 0, 1]).unwrap()
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
        let p = project_simplex(&[-1.0, 0.3, 0.9]);
        assert_eq!(p[0], 0.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bsc_capacity_by_ascent() {
        let f = DetFunction::identity(Alphabet::binary());
        let r = capacity_iid(&f, &DMChannel::bsc(0.1).unwrap(), &CapacityOptions::default()).unwrap();
        let exact = 2f64.ln() - binary_entropy(0.1);
        assert_abs_diff_eq!(r.value, exact, epsilon = 1e-8);
        assert_abs_diff_eq!(r.argmax.prob(0), 0.5, epsilon = 1e-3);
        assert!(r.converged);
        assert_eq!(r.restarts_used, 32);
    }

    #[test]
    fn noiseless_and_reaches_ln4() {
        let f = and();
        let r = capacity_iid(&f, &DMChannel::identity(f.domain().clone()), &CapacityOptions::default()).unwrap();
        assert_abs_diff_eq!(r.value, 4f64.ln(), epsilon = 1e-8);
    }

    #[test]
    fn uniform_noise_and_puts_no_mass_on_singleton_class() {
        let f = and();
        let noise = DMChannel::uniform_noise(f.domain().clone(), Alphabet::binary());
        let r = capacity_iid(&f, &noise, &CapacityOptions::default()).unwrap();
        assert_abs_diff_eq!(r.value, 3f64.ln(), epsilon = 1e-6);
        assert!(r.argmax.prob(3) < 1e-6);
    }

    #[test]
    fn grid_oracle_examples() {
        let id = DetFunction::identity(Alphabet::binary());
        for res in GRID_RESOLUTIONS {
            let v = capacity_grid_oracle(&id, &DMChannel::bsc(0.5).unwrap(), res, Execution::Parallel).unwrap();
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        }
        let v = capacity_grid_oracle(&id, &DMChannel::bsc(0.1).unwrap(), 0.01, Execution::Parallel).unwrap();
        assert!((v - 0.368064).abs() < 5e-4);
        let a = Alphabet::numeric(4).unwrap();
        let k = DetFunction::constant(a.clone(), Alphabet::binary(), 0).unwrap();
        let v = capacity_grid_oracle(&k, &DMChannel::uniform_noise(a, Alphabet::binary()), 0.05, Execution::Sequential)
            .unwrap();
        assert_abs_diff_eq!(v, 4f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn grid_oracle_guards() {
        let big = DetFunction::identity(Alphabet::numeric(6).unwrap());
        let ch = DMChannel::identity(Alphabet::numeric(6).unwrap());
        assert_eq!(capacity_grid_oracle(&big, &ch, 0.05, Execution::Parallel), Err(Error::AlphabetTooLarge(6)));
        let id = DetFunction::identity(Alphabet::binary());
        assert_eq!(
            capacity_grid_oracle(&id, &DMChannel::bsc(0.1).unwrap(), 0.03, Execution::Parallel),
            Err(Error::BadResolution(0.03))
        );
    }

    #[test]
    fn blahut_arimoto_examples() {
        let v = blahut_arimoto(&DMChannel::bsc(0.1).unwrap(), 1e-12, 10_000).unwrap();
        assert_abs_diff_eq!(v, 2f64.ln() - binary_entropy(0.1), epsilon = 1e-10);
        assert_abs_diff_eq!(blahut_arimoto(&DMChannel::bsc(0.5).unwrap(), 1e-12, 100).unwrap(), 0.0, epsilon = 1e-15);
        let id3 = DMChannel::identity(Alphabet::numeric(3).unwrap());
        assert_abs_diff_eq!(blahut_arimoto(&id3, 1e-12, 100).unwrap(), 3f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn blahut_arimoto_reports_non_convergence() {
        let ch = DMChannel::new(
            Alphabet::numeric(3).unwrap(),
            Alphabet::binary(),
            vec![vec![0.9, 0.1], vec![0.5, 0.5], vec![0.2, 0.8]],
        )
        .unwrap();
        assert_eq!(blahut_arimoto(&ch, 1e-15, 2), Err(Error::NoConvergence(2)));
    }

    #[test]
    fn execution_modes_agree() {
        let f = and();
        let ch = DMChannel::from_function(&f).compose(&DMChannel::bsc(0.1).unwrap()).unwrap();
        let mut opts = CapacityOptions { restarts: 8, ..Default::default() };
        let a = capacity_iid(&f, &ch, &opts).unwrap();
        opts.exec = Execution::Sequential;
        let b = capacity_iid(&f, &ch, &opts).unwrap();
        assert_eq!(a, b);
    }
}
