//! Fano lower bound on the block error probability.

use crate::info::binary_entropy;

const BISECTION_TOL: f64 = 1e-9;

/// Smallest `Pe` in `[0, 1]` with
/// `H(X') - H(X'|g(X')) - gamma I(f(X); F(X)) <= H2(Pe)/k + Pe ln|B'|`,
/// found by bisection. Zero when the left side is not positive, one when no
/// `Pe` satisfies the inequality.
pub fn converse_bound(
    h_xprime: f64,
    h_xprime_given_g: f64,
    gamma: f64,
    i_f_big_f: f64,
    k: usize,
    out_alphabet_size: usize,
) -> f64 {
    let lhs = h_xprime - h_xprime_given_g - gamma * i_f_big_f;
    if lhs <= 0.0 {
        return 0.0;
    }
    let k = k.max(1) as f64;
    let ln_b = (out_alphabet_size.max(1) as f64).ln();
    let rhs = |pe: f64| binary_entropy(pe) / k + pe * ln_b;
    // rhs increases up to its maximizer 1 / (1 + |B'|^-k)
    let peak = 1.0 / (1.0 + (-k * ln_b).exp());
    if rhs(peak) < lhs {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, peak);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if rhs(mid) >= lhs {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inactive_below_capacity() {
        assert_eq!(converse_bound(1.0, 0.5, 1.0, 0.6, 3, 2), 0.0);
    }

    #[test]
    fn useless_device_on_bits() {
        let ln2 = 2f64.ln();
        let pe = converse_bound(ln2, 0.0, 1.0, 0.0, 1, 2);
        // ln 2 = H2(Pe) + Pe ln 2
        assert!((binary_entropy(pe) + pe * ln2 - ln2).abs() < 1e-8);
        assert!((pe - 0.2271).abs() < 1e-3);
    }

    #[test]
    fn monotone_in_information() {
        let mut last = 0.0;
        for i in (0..=20).rev() {
            let pe = converse_bound(2.0, 0.5, 1.2, i as f64 * 0.05, 4, 3);
            assert!(pe >= last);
            last = pe;
        }
        assert!(last > 0.0);
    }

    #[test]
    fn unsatisfiable_gives_one() {
        assert_eq!(converse_bound(10.0, 0.0, 1.0, 0.0, 1, 2), 1.0);
    }
}
