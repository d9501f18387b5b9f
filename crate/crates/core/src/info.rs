//! Exact information measures for the memoryless instantiation, in nats.
//!
//! With an i.i.d. source, a memoryless device `F` and a per-symbol `f`, the
//! pairs `(X_j, Y_j, Z_j)` are independent across positions. Hence
//! `P(z^n | y^n) = prod_j P(z_j | y_j)`: the inputs are conditionally
//! independent given `y^n`, so the cascade from `f(X)` to `F(X)` is itself a
//! memoryless channel built from the single-letter joint `P(y, z)`, and all
//! entropy rates are single-letter entropies.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Alphabet, DMChannel, DetFunction, NoisyComputationInstance, Pmf, PROB_TOL};

/// `-sum p ln p` with `0 ln 0 = 0`.
pub fn entropy_of(probs: &[f64]) -> f64 {
    // subtracting from +0 keeps a point mass at +0 rather than -0
    0.0 - probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

pub fn entropy(p: &Pmf) -> f64 {
    entropy_of(p.probs())
}

/// Binary entropy `H_2(p)` in nats.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of(&[p, 1.0 - p])
}

/// Joint distribution on a product of two alphabets.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    rows: Alphabet,
    cols: Alphabet,
    probs: Vec<Vec<f64>>,
}

impl JointPmf {
    pub fn new(rows: Alphabet, cols: Alphabet, probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.len() != rows.len() {
            return Err(Error::LengthMismatch { expected: rows.len(), found: probs.len() });
        }
        for row in &probs {
            if row.len() != cols.len() {
                return Err(Error::LengthMismatch { expected: cols.len(), found: row.len() });
            }
            if let Some((index, &value)) = row.iter().enumerate().find(|(_, p)| !(**p >= 0.0)) {
                return Err(Error::NegativeProb { index, value });
            }
        }
        let sum: f64 = probs.iter().flatten().sum();
        if !((sum - 1.0).abs() <= PROB_TOL) {
            return Err(Error::BadSum { sum });
        }
        Ok(JointPmf { rows, cols, probs })
    }

    pub fn row_alphabet(&self) -> &Alphabet {
        &self.rows
    }

    pub fn col_alphabet(&self) -> &Alphabet {
        &self.cols
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.probs[r][c]
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.probs.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        (0..self.cols.len()).map(|c| self.probs.iter().map(|r| r[c]).sum()).collect()
    }

    pub fn entropy(&self) -> f64 {
        self.probs.iter().map(|r| entropy_of(r)).sum()
    }
}

/// `P(y, z) = sum_{x in f^{-1}(y)} P_X(x) F(z|x)`: the hookup of `f(X)` and `F(X)`.
pub fn joint_yz(source: &Pmf, f: &DetFunction, channel: &DMChannel) -> Result<JointPmf> {
    check_alphabets(source, f, channel)?;
    let mut probs = vec![vec![0.0; channel.output().len()]; f.codomain().len()];
    for (x, &px) in source.probs().iter().enumerate() {
        let y = f.apply(x);
        for (z, &pz) in channel.row(x).iter().enumerate() {
            probs[y][z] += px * pz;
        }
    }
    Ok(JointPmf { rows: f.codomain().clone(), cols: channel.output().clone(), probs })
}

/// `P(x, z) = P_X(x) F(z|x)`.
pub fn joint_xz(source: &Pmf, channel: &DMChannel) -> Result<JointPmf> {
    if source.alphabet() != channel.input() {
        return Err(Error::AlphabetMismatch("source alphabet differs from channel input".into()));
    }
    let probs =
        source.probs().iter().zip(channel.rows()).map(|(&px, row)| row.iter().map(|&p| px * p).collect()).collect();
    Ok(JointPmf { rows: source.alphabet().clone(), cols: channel.output().clone(), probs })
}

fn check_alphabets(source: &Pmf, f: &DetFunction, channel: &DMChannel) -> Result<()> {
    if source.alphabet() != f.domain() {
        return Err(Error::AlphabetMismatch("source alphabet differs from the domain of f".into()));
    }
    if channel.input() != f.domain() {
        return Err(Error::AlphabetMismatch("channel input differs from the domain of f".into()));
    }
    Ok(())
}

/// `H(row | col) = H(row, col) - H(col)`, clamped at 0.
pub fn conditional_entropy(joint: &JointPmf) -> f64 {
    (joint.entropy() - entropy_of(&joint.col_marginal())).max(0.0)
}

/// `I(row; col) = H(row) + H(col) - H(row, col)`, clamped at 0.
pub fn mutual_information(joint: &JointPmf) -> f64 {
    (entropy_of(&joint.row_marginal()) + entropy_of(&joint.col_marginal()) - joint.entropy()).max(0.0)
}

/// Pushforward `P_Y = P_X o f^{-1}`.
pub fn pushforward(source: &Pmf, f: &DetFunction) -> Vec<f64> {
    let mut py = vec![0.0; f.codomain().len()];
    for (x, &p) in source.probs().iter().enumerate() {
        py[f.apply(x)] += p;
    }
    py
}

/// `H(X | Y = y)` for each codomain symbol (0 off the image and on null classes).
pub fn class_entropies(source: &Pmf, f: &DetFunction) -> Vec<f64> {
    (0..f.codomain().len())
        .map(|y| {
            let class = f.preimage(y);
            let py: f64 = class.iter().map(|&x| source.prob(x)).sum();
            if py <= 0.0 {
                return 0.0;
            }
            let cond: Vec<f64> = class.iter().map(|&x| source.prob(x) / py).collect();
            entropy_of(&cond)
        })
        .collect()
}

/// `H(X | f(X)) = sum_y P(y) H(X | Y = y)`, computed class by class.
pub fn conditional_entropy_given_function(source: &Pmf, f: &DetFunction) -> f64 {
    pushforward(source, f).iter().zip(class_entropies(source, f)).map(|(&py, h)| py * h).sum()
}

/// Entropy terms of the typical input rate, all in nats per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    pub h_x: f64,
    pub h_y: f64,
    pub h_x_given_y: f64,
    pub h_y_given_z: f64,
    pub i_yz: f64,
    /// `H(X) - H(f(X) | F(X))`.
    pub b: f64,
}

impl RateReport {
    /// `H(X | f(X)) + I(f(X); F(X))`: the second route to `b`.
    pub fn b_via_decomposition(&self) -> f64 {
        self.h_x_given_y + self.i_yz
    }
}

/// Typical input rate `B(X, f, F)`.
///
/// `b` is `H(X) - H(Y|Z)`; the decomposition terms are computed separately
/// (`H(X|Y)` class by class, `I(Y;Z)` from the marginals) so the two routes
/// only agree through the chain rule.
pub fn typical_input_rate(inst: &NoisyComputationInstance) -> Result<RateReport> {
    rate_for(&inst.source, &inst.f, &inst.channel)
}

pub(crate) fn rate_for(source: &Pmf, f: &DetFunction, channel: &DMChannel) -> Result<RateReport> {
    let joint = joint_yz(source, f, channel)?;
    let h_x = entropy(source);
    let h_y = entropy_of(&joint.row_marginal());
    let h_y_given_z = conditional_entropy(&joint);
    Ok(RateReport {
        h_x,
        h_y,
        h_x_given_y: conditional_entropy_given_function(source, f),
        h_y_given_z,
        i_yz: mutual_information(&joint),
        b: h_x - h_y_given_z,
    })
}

/// Channel whose rows may be undefined (conditioning on a null event).
#[derive(Debug, Clone, PartialEq)]
pub struct PartialChannel {
    input: Alphabet,
    output: Alphabet,
    rows: Vec<Option<Vec<f64>>>,
}

impl PartialChannel {
    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn row(&self, i: usize) -> Option<&[f64]> {
        self.rows[i].as_deref()
    }

    pub fn rows(&self) -> &[Option<Vec<f64>>] {
        &self.rows
    }

    /// Inputs whose row is undefined.
    pub fn undefined(&self) -> Vec<usize> {
        (0..self.rows.len()).filter(|&i| self.rows[i].is_none()).collect()
    }

    /// Full channel, or `ZERO_MARGINAL` naming the first undefined row.
    pub fn into_channel(self) -> Result<DMChannel> {
        if let Some(&i) = self.undefined().first() {
            return Err(Error::ZeroMarginal(i));
        }
        let rows = self.rows.into_iter().map(|r| r.expect("checked")).collect();
        DMChannel::new(self.input, self.output, rows)
    }
}

fn conditional_rows(joint: &JointPmf, by_cols: bool) -> Vec<Option<Vec<f64>>> {
    let (outer, inner) =
        if by_cols { (joint.cols.len(), joint.rows.len()) } else { (joint.rows.len(), joint.cols.len()) };
    (0..outer)
        .map(|a| {
            let cell = |b: usize| if by_cols { joint.probs[b][a] } else { joint.probs[a][b] };
            let mass: f64 = (0..inner).map(cell).sum();
            (mass > 0.0).then(|| (0..inner).map(|b| cell(b) / mass).collect())
        })
        .collect()
}

/// Bayes posterior `P(x | z)`: the reverse channel from `C` to `A`. Rows of
/// zero-probability outputs are left undefined.
pub fn reverse_posterior(source: &Pmf, channel: &DMChannel) -> Result<PartialChannel> {
    let joint = joint_xz(source, channel)?;
    Ok(PartialChannel {
        input: channel.output().clone(),
        output: source.alphabet().clone(),
        rows: conditional_rows(&joint, true),
    })
}

/// Single-letter cascade `f^{-1}F`: `P(z | y)` for each `y` of positive
/// probability.
pub fn cascade_channel(source: &Pmf, f: &DetFunction, channel: &DMChannel) -> Result<PartialChannel> {
    let joint = joint_yz(source, f, channel)?;
    Ok(PartialChannel {
        input: f.codomain().clone(),
        output: channel.output().clone(),
        rows: conditional_rows(&joint, false),
    })
}
