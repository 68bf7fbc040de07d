//! Log-gamma based helpers. Everything that could overflow a double is
//! returned as a logarithm.

use statrs::function::gamma::ln_gamma as statrs_ln_gamma;

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    statrs_ln_gamma(x)
}

/// `ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a + b)`, without the cancellation
/// of large log-gammas when one argument is big.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (small, large) = if a < b { (a, b) } else { (b, a) };
    ln_gamma(small) - ln_poch(large, small)
}

/// `B_{2k} / (2k(2k−1))` for the Stirling series.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

fn stirling_tail(x: f64) -> f64 {
    let x2 = x * x;
    let mut p = 1.0 / x;
    let mut s = 0.0;
    for c in STIRLING {
        s += c * p;
        p /= x2;
    }
    s
}

/// `ln (Γ(a+b)/Γ(a))` for `a > 0`, `a + b > 0`, accurate for large `a`.
pub fn ln_poch(a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && a + b > 0.0);
    if b == 0.0 {
        return 0.0;
    }
    let floor = 20.0;
    let lo = a.min(a + b);
    let mut shift = 0.0;
    let mut correction = 0.0;
    if lo < floor {
        let m = (floor - lo).ceil();
        for i in 0..m as usize {
            let i = i as f64;
            correction -= ((a + b + i) / (a + i)).ln();
        }
        shift = m;
    }
    let a = a + shift;
    (a - 0.5) * (b / a).ln_1p() + b * (a + b).ln() - b + stirling_tail(a + b) - stirling_tail(a) + correction
}

/// `ln k!` for integer `k`.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        0.0
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// Numerically stable `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if hi == f64::INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}`; `-∞` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_small_integers() {
        let mut fact = 1.0f64;
        for k in 1..20u64 {
            fact *= k as f64;
            let rel = (ln_gamma(k as f64 + 1.0) - fact.ln()).abs() / fact.ln().max(1.0);
            assert!(rel < 1e-14, "k={k}");
        }
    }

    #[test]
    fn ln_gamma_half_integers() {
        // Γ(1/2) = √π, Γ(5/2) = 3√π/4
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((ln_gamma(0.5) - sqrt_pi.ln()).abs() < 1e-14);
        assert!((ln_gamma(2.5) - (0.75 * sqrt_pi).ln()).abs() < 1e-14);
    }

    #[test]
    fn ln_beta_matches_integer_formula() {
        // B(3, 4) = 2!3!/6! = 1/60
        assert!((ln_beta(3.0, 4.0) - (1.0f64 / 60.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn ln_poch_large_arguments() {
        // Γ(k+2)/Γ(k+1) = k+1
        for k in [0.0, 5.0, 130_000.0, 1e9] {
            assert!((ln_poch(k + 1.0, 1.0) - (k + 1.0f64).ln()).abs() < 1e-14 * (k + 1.0f64).ln().max(1.0));
        }
        // Γ(a+3)/Γ(a) = a(a+1)(a+2)
        for a in [0.3f64, 7.5, 44.0, 1e6] {
            let exact = (a * (a + 1.0) * (a + 2.0)).ln();
            assert!((ln_poch(a, 3.0) - exact).abs() < 1e-13 * exact.abs().max(1.0), "a={a}");
        }
        assert!((ln_poch(2.5, -1.5) - (ln_gamma(1.0) - ln_gamma(2.5))).abs() < 1e-14);
        assert!((ln_beta(130_001.0, 1.0) + 130_001f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn log_add_exp_handles_extremes() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((log_add_exp(-1000.0, -1000.0) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!((log_sum_exp(&[1.0, 2.0, 3.0]) - (1f64.exp() + 2f64.exp() + 3f64.exp()).ln()).abs() < 1e-14);
    }
}
