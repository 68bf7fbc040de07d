//! The reproducing kernel of `A²_ω` through its homogeneous expansion
//! `B_z^ω(w) = Σ c_k ⟨w,z⟩^k`, `c_k = (n−1+k)! / (2·n!·k!·ω_{2n+2k−1})`.
//!
//! Moments are log-convex in the order, so `R_k = c_{k+1}/c_k` is non-increasing
//! and `c_{K+1+j} ≤ c_{K+1}·R_K^j`. That gives the geometric tail bounds used for
//! truncation and early exit.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::Fft;

use crate::ballgeom::{check_dim, BallPoint, RadialGrid};
use crate::error::{Error, Result};
use crate::special::{ln_gamma, ln_poch, log_add_exp};
use crate::weights::{Family, MomentRule, RadialWeight};

/// Construction parameters for [`KernelSeries::build`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOptions {
    pub rho_max: f64,
    pub tol: f64,
    /// Measure `tol` against `Σ c_k ρ_max^k` instead of absolutely.
    pub relative: bool,
    pub max_terms: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            rho_max: 0.99,
            tol: 1e-10,
            relative: false,
            max_terms: 20_000,
        }
    }
}

impl KernelOptions {
    pub fn new(rho_max: f64, tol: f64) -> Self {
        Self {
            rho_max,
            tol,
            ..Self::default()
        }
    }

    pub fn relative(mut self) -> Self {
        self.relative = true;
        self
    }

    pub fn with_max_terms(mut self, cap: usize) -> Self {
        self.max_terms = cap;
        self
    }
}

/// Truncated kernel series for one weight and dimension.
#[derive(Debug, Clone)]
pub struct KernelSeries {
    weight: RadialWeight,
    dim: usize,
    opts: KernelOptions,
    /// `ln c_k`, `k = 0..=K`.
    log_coeffs: Vec<f64>,
    /// `c_k` when none overflows.
    coeffs: Option<Vec<f64>>,
    /// `ln c_{K+1}`.
    log_next: f64,
    /// `R_K = c_{K+1}/c_K`.
    tail_ratio: f64,
    /// Achieved bound at `ρ_max` (relative if the options are).
    achieved: f64,
}

/// `ln c_k` given `ln ω_{2n+2k−1}`.
fn log_coeff(n: usize, k: usize, log_moment: f64) -> f64 {
    let nf = n as f64;
    ln_poch(k as f64 + 1.0, nf - 1.0) - std::f64::consts::LN_2 - ln_gamma(nf + 1.0) - log_moment
}

fn moment_order(n: usize, k: usize) -> f64 {
    (2 * n + 2 * k - 1) as f64
}

enum MomentSource<'a> {
    Closed(&'a RadialWeight),
    Rule(MomentRule),
}

impl MomentSource<'_> {
    fn log_moment(&self, s: f64) -> Result<f64> {
        match self {
            MomentSource::Closed(w) => w.log_moment(s),
            MomentSource::Rule(r) => r.log_moment(s),
        }
    }
}

/// `ln(2·c·ρ^{K+1}/(1 − R ρ))`, or `+∞` when the ratio test fails.
fn ln_geometric_tail(log_next: f64, k_next: f64, ratio: f64, ln_rho: f64) -> f64 {
    let q = ratio * ln_rho.exp();
    if q >= 1.0 {
        return f64::INFINITY;
    }
    std::f64::consts::LN_2 + log_next + k_next * ln_rho - (-q).ln_1p()
}

impl KernelSeries {
    pub fn build(weight: &RadialWeight, n: usize, opts: KernelOptions) -> Result<Self> {
        check_dim(n)?;
        if !(opts.rho_max > 0.0 && opts.rho_max < 1.0) {
            return Err(Error::Domain(format!("rho_max = {} must lie in (0, 1)", opts.rho_max)));
        }
        if !(opts.tol > 0.0) {
            return Err(Error::Domain("kernel tolerance must be positive".into()));
        }
        let source = match weight.family() {
            Family::Power { .. } => MomentSource::Closed(weight),
            _ => MomentSource::Rule(MomentRule::new(weight)?),
        };
        let ln_rho = opts.rho_max.ln();
        let ln_tol = opts.tol.ln();
        let mut lc: Vec<f64> = Vec::new();
        // Running ln Σ c_k ρ^k and ln Σ k c_k ρ^k over k ≤ K.
        let mut ln_sum = f64::NEG_INFINITY;
        let mut ln_dsum = f64::NEG_INFINITY;
        let mut best = f64::INFINITY;
        let mut chunk = 64usize;
        let mut k_check = 0usize;
        loop {
            let start = lc.len();
            let end = (start + chunk).min(opts.max_terms + 2);
            for k in start..end {
                let lm = source.log_moment(moment_order(n, k))?;
                lc.push(log_coeff(n, k, lm));
            }
            chunk = (chunk * 2).min(4096);
            while k_check + 1 < lc.len() {
                let k = k_check;
                let kf = k as f64;
                ln_sum = log_add_exp(ln_sum, lc[k] + kf * ln_rho);
                if k > 0 {
                    ln_dsum = log_add_exp(ln_dsum, kf.ln() + lc[k] + kf * ln_rho);
                }
                let ratio = (lc[k + 1] - lc[k]).exp();
                let tail = ln_geometric_tail(lc[k + 1], kf + 1.0, ratio, ln_rho);
                let dtail = ln_geometric_tail(
                    (kf + 1.0).ln() + lc[k + 1],
                    kf + 1.0,
                    ratio * (kf + 2.0) / (kf + 1.0),
                    ln_rho,
                );
                let (scale, dscale) = if opts.relative { (ln_sum, ln_dsum.max(ln_sum)) } else { (0.0, 0.0) };
                let worst = (tail - scale).max(dtail - dscale);
                best = best.min(worst);
                if k >= 1 && worst <= ln_tol {
                    lc.truncate(k + 2);
                    let log_next = lc.pop().unwrap_or(f64::NEG_INFINITY);
                    let max = lc.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let coeffs = (max < 700.0).then(|| lc.iter().map(|v| v.exp()).collect());
                    return Ok(Self {
                        weight: weight.clone(),
                        dim: n,
                        opts,
                        log_coeffs: lc,
                        coeffs,
                        log_next,
                        tail_ratio: ratio,
                        achieved: worst.exp(),
                    });
                }
                k_check += 1;
            }
            if lc.len() >= opts.max_terms + 2 {
                return Err(Error::Truncation {
                    cap: opts.max_terms,
                    achieved: best.exp(),
                });
            }
        }
    }

    pub fn weight(&self) -> &RadialWeight {
        &self.weight
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn options(&self) -> &KernelOptions {
        &self.opts
    }

    /// Truncation index `K`.
    pub fn truncation(&self) -> usize {
        self.log_coeffs.len() - 1
    }

    pub fn log_coeffs(&self) -> &[f64] {
        &self.log_coeffs
    }

    /// `c_k` (overflows to `inf` for extreme weights).
    pub fn coeff(&self, k: usize) -> f64 {
        self.log_coeffs[k].exp()
    }

    /// Tail bound reached at `ρ_max` during construction.
    pub fn achieved_bound(&self) -> f64 {
        self.achieved
    }

    /// Upper bound for `Σ_{k>K} c_k ρ^k`; infinite beyond the ratio-test radius.
    pub fn tail_bound(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        ln_geometric_tail(self.log_next, self.log_coeffs.len() as f64, self.tail_ratio, rho.ln()).exp()
    }

    fn check_modulus(&self, modulus: f64) -> Result<()> {
        if modulus > self.opts.rho_max * (1.0 + 1e-12) {
            return Err(Error::OutOfValidity {
                modulus,
                rho_max: self.opts.rho_max,
            });
        }
        Ok(())
    }

    /// `Σ_{k≤K} k^d c_k u^k` for `d ∈ {0, 1}`.
    fn sum(&self, u: Complex64, derivative: bool) -> Result<Complex64> {
        let modulus = u.norm();
        self.check_modulus(modulus)?;
        if modulus == 0.0 {
            return Ok(Complex64::new(if derivative { 0.0 } else { self.coeff(0) }, 0.0));
        }
        let ln_mod = modulus.ln();
        let kmax = self.truncation();
        let Some(c) = &self.coeffs else {
            return Ok(self.sum_scaled(u, derivative));
        };
        let mut acc = Complex64::new(0.0, 0.0);
        let mut abs_acc = 0.0;
        let mut p = Complex64::new(1.0, 0.0);
        let mut pm = 1.0;
        for k in 0..=kmax {
            let kf = if derivative { k as f64 } else { 1.0 };
            let t = c[k] * kf;
            acc += p * t;
            abs_acc += t * pm;
            p *= u;
            pm *= modulus;
            if k % 64 == 63 && k < kmax {
                let ratio = (self.log_coeffs[k + 1] - self.log_coeffs[k]).exp();
                let lead = if derivative { ((k + 1) as f64).ln() } else { 0.0 };
                let grow = if derivative { (k as f64 + 2.0) / (k as f64 + 1.0) } else { 1.0 };
                let tail = ln_geometric_tail(lead + self.log_coeffs[k + 1], k as f64 + 1.0, ratio * grow, ln_mod);
                let scale = if self.opts.relative { abs_acc } else { 1.0 };
                if tail.exp() <= 0.5 * self.opts.tol * scale {
                    break;
                }
            }
        }
        Ok(acc)
    }

    fn sum_scaled(&self, u: Complex64, derivative: bool) -> Complex64 {
        let ln_mod = u.norm().ln();
        let theta = u.arg();
        let lterm = |k: usize| {
            let lead = if derivative && k > 0 { (k as f64).ln() } else { 0.0 };
            self.log_coeffs[k] + lead + k as f64 * ln_mod
        };
        let start = usize::from(derivative);
        let shift = (start..self.log_coeffs.len()).map(lterm).fold(f64::NEG_INFINITY, f64::max);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in start..self.log_coeffs.len() {
            acc += Complex64::from_polar((lterm(k) - shift).exp(), k as f64 * theta);
        }
        acc * shift.exp()
    }

    /// `B_z^ω(w)` at `u = ⟨w, z⟩`.
    pub fn eval_u(&self, u: Complex64) -> Result<Complex64> {
        self.sum(u, false)
    }

    /// `ℜB_z^ω(w)` at `u = ⟨w, z⟩`.
    pub fn radial_derivative_u(&self, u: Complex64) -> Result<Complex64> {
        self.sum(u, true)
    }

    fn pair_inner(&self, z: &BallPoint, w: &BallPoint) -> Result<Complex64> {
        if z.dim() != self.dim || w.dim() != self.dim {
            return Err(Error::Domain(format!("points must lie in dimension {}", self.dim)));
        }
        Ok(w.inner(z))
    }

    /// `B_z^ω(w)`.
    pub fn eval(&self, z: &BallPoint, w: &BallPoint) -> Result<Complex64> {
        self.eval_u(self.pair_inner(z, w)?)
    }

    /// Radial derivative of `B_z^ω` in `w`: `Σ k c_k ⟨w,z⟩^k`.
    pub fn radial_derivative_eval(&self, z: &BallPoint, w: &BallPoint) -> Result<Complex64> {
        self.radial_derivative_u(self.pair_inner(z, w)?)
    }

    /// `‖B_z^ω‖_{H^∞} = Σ c_k |z|^k`: positive coefficients put the supremum at `w → z/|z|`.
    pub fn sup_norm(&self, z: &BallPoint) -> Result<f64> {
        self.sup_norm_at(z.norm())
    }

    /// [`Self::sup_norm`] by modulus.
    pub fn sup_norm_at(&self, modulus: f64) -> Result<f64> {
        Ok(self.sum(Complex64::new(modulus, 0.0), false)?.re)
    }

    /// `|B_z^ω(0)| + max_t (1−t²)·Σ k c_k (t|z|)^k` over the grid radii `t`.
    pub fn bloch_seminorm(&self, z: &BallPoint, grid: &RadialGrid) -> Result<f64> {
        self.bloch_seminorm_at(z.norm(), grid)
    }

    /// [`Self::bloch_seminorm`] by modulus.
    pub fn bloch_seminorm_at(&self, modulus: f64, grid: &RadialGrid) -> Result<f64> {
        self.check_modulus(modulus)?;
        let mut best: f64 = 0.0;
        for &x in grid.gaps() {
            let t = 1.0 - x;
            let d = self.sum(Complex64::new(t * modulus, 0.0), true)?.re;
            best = best.max(x * (2.0 - x) * d);
        }
        Ok(self.coeff(0) + best)
    }

    /// Values of `Σ k^d c_k (s e^{iθ})^k` at `θ_j = 2π(j+½)/m`, folded onto an FFT of length `m`.
    pub fn ring_values(&self, s: f64, fft: &Arc<dyn Fft<f64>>, derivative: bool) -> Result<Vec<Complex64>> {
        self.check_modulus(s)?;
        let m = fft.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        if s == 0.0 {
            let c0 = if derivative { 0.0 } else { self.coeff(0) };
            buf.iter_mut().for_each(|b| b.re = c0);
            return Ok(buf);
        }
        let ln_s = s.ln();
        let half_step = std::f64::consts::PI / m as f64;
        let lterm = |k: usize| {
            let lead = if derivative && k > 0 { (k as f64).ln() } else { 0.0 };
            self.log_coeffs[k] + lead + k as f64 * ln_s
        };
        let start = usize::from(derivative);
        let shift = (start..self.log_coeffs.len()).map(lterm).fold(f64::NEG_INFINITY, f64::max);
        for k in start..self.log_coeffs.len() {
            let l = lterm(k) - shift;
            if l < -40.0 {
                continue;
            }
            buf[k % m] += Complex64::from_polar(l.exp(), half_step * k as f64);
        }
        fft.process(&mut buf);
        let scale = shift.exp();
        buf.iter_mut().for_each(|b| *b *= scale);
        Ok(buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_gamma;
    use approx::assert_relative_eq;
    use num_complex::Complex64 as C;
    use rustfft::FftPlanner;

    fn closed(n: usize, alpha: f64, u: C) -> C {
        (C::new(1.0, 0.0) - u).powf(-(n as f64 + 1.0 + alpha))
    }

    #[test]
    fn normalized_power_coefficients() {
        for &(n, alpha) in &[(2usize, 0.0), (3, 1.0), (2, 2.5)] {
            let w = RadialWeight::power_normalized(alpha, n as u32).unwrap();
            let ks = KernelSeries::build(&w, n, KernelOptions::new(0.5, 1e-10)).unwrap();
            let nf = n as f64;
            for k in 0..=ks.truncation().min(50) {
                let kf = k as f64;
                let oracle = ln_gamma(nf + 1.0 + alpha + kf) - ln_gamma(kf + 1.0) - ln_gamma(nf + 1.0 + alpha);
                assert!((ks.log_coeffs()[k] - oracle).abs() < 1e-10, "k={k}");
            }
        }
    }

    #[test]
    fn first_coefficient_is_inverse_ball_mass() {
        for w in crate::weights::shipped_corpus(2) {
            let ks = KernelSeries::build(&w, 2, KernelOptions::new(0.5, 1e-10)).unwrap();
            let mass = 4.0 * w.moment(3.0).unwrap();
            assert_relative_eq!(ks.coeff(0), 1.0 / mass, max_relative = 1e-12);
            let z = BallPoint::origin(2).unwrap();
            assert_relative_eq!(ks.sup_norm(&z).unwrap(), 1.0 / mass, max_relative = 1e-12);
            assert_relative_eq!(ks.bloch_seminorm(&z, &RadialGrid::dyadic(8)).unwrap(), 1.0 / mass, max_relative = 1e-12);
        }
    }

    #[test]
    fn truncation_bound_holds_against_extended_sum() {
        let w = RadialWeight::power(0.0).unwrap();
        let ks = KernelSeries::build(&w, 2, KernelOptions::new(0.9, 1e-10)).unwrap();
        let k = ks.truncation();
        // Extended sum: coefficients of the unnormalised power weight in closed form.
        let mut tail = 0.0;
        for j in (k + 1)..=(2 * k) {
            let lm = crate::special::ln_beta(moment_order(2, j) + 1.0, 1.0);
            tail += (log_coeff(2, j, lm) + j as f64 * 0.9f64.ln()).exp();
        }
        assert!(tail <= 1e-10, "tail {tail}");
        assert!(tail <= ks.tail_bound(0.9));
    }

    #[test]
    fn matches_closed_form_kernel() {
        let w = RadialWeight::power_normalized(1.0, 2).unwrap();
        let ks = KernelSeries::build(&w, 2, KernelOptions::new(0.9, 1e-12)).unwrap();
        for &u in &[C::new(0.3, 0.4), C::new(-0.85, 0.1), C::new(0.0, 0.9)] {
            let v = ks.eval_u(u).unwrap();
            assert!((v - closed(2, 1.0, u)).norm() <= 1e-9 * v.norm());
            let d = ks.radial_derivative_u(u).unwrap();
            let oracle = u * 4.0 * (C::new(1.0, 0.0) - u).powf(-5.0);
            assert!((d - oracle).norm() <= 1e-9 * d.norm());
        }
    }

    #[test]
    fn out_of_validity() {
        let w = RadialWeight::power(0.0).unwrap();
        let ks = KernelSeries::build(&w, 2, KernelOptions::new(0.5, 1e-10)).unwrap();
        assert!(matches!(ks.eval_u(C::new(0.6, 0.0)), Err(Error::OutOfValidity { .. })));
    }

    #[test]
    fn cap_reports_truncation() {
        let w = RadialWeight::power(0.0).unwrap();
        let err = KernelSeries::build(&w, 2, KernelOptions::new(0.999, 1e-12).with_max_terms(100)).unwrap_err();
        assert!(matches!(err, Error::Truncation { cap: 100, .. }));
    }

    #[test]
    fn ring_values_match_pointwise() {
        let w = RadialWeight::log_power(0.0, 1.0).unwrap();
        let ks = KernelSeries::build(&w, 2, KernelOptions::new(0.8, 1e-10)).unwrap();
        let m = 32;
        let fft = FftPlanner::new().plan_fft_inverse(m);
        for derivative in [false, true] {
            let ring = ks.ring_values(0.7, &fft, derivative).unwrap();
            for (j, v) in ring.iter().enumerate() {
                let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                let u = C::from_polar(0.7, th);
                let direct = if derivative { ks.radial_derivative_u(u) } else { ks.eval_u(u) }.unwrap();
                assert!((v - direct).norm() <= 1e-11 * direct.norm().max(1.0), "{j}");
            }
        }
    }

    #[test]
    fn relative_mode_reaches_close_to_boundary() {
        let w = RadialWeight::power(0.0).unwrap();
        let rho = 1.0 - 2f64.powi(-8);
        let ks = KernelSeries::build(&w, 2, KernelOptions::new(rho, 1e-10).relative().with_max_terms(100_000)).unwrap();
        // c_k = (k+1)(k+2)/2 for the unnormalised Lebesgue weight in dimension 2.
        let exact = (1.0 - rho).powi(-3);
        assert_relative_eq!(ks.sup_norm_at(rho).unwrap(), exact, max_relative = 1e-9);
    }

    proptest::proptest! {
        #[test]
        fn hermitian_symmetry(a in -0.5f64..0.5, b in -0.5f64..0.5, c in -0.5f64..0.5, d in -0.5f64..0.5) {
            let w = RadialWeight::power(0.5).unwrap();
            let ks = KernelSeries::build(&w, 2, KernelOptions::new(0.5, 1e-10)).unwrap();
            let z = BallPoint::new(vec![C::new(a, b), C::new(c * 0.5, 0.1)]).unwrap();
            let x = BallPoint::new(vec![C::new(d, -0.2), C::new(0.1, a * 0.5)]).unwrap();
            let lhs = ks.eval(&z, &x).unwrap();
            let rhs = ks.eval(&x, &z).unwrap().conj();
            proptest::prop_assert!((lhs - rhs).norm() <= 1e-14 * lhs.norm());
        }

        #[test]
        fn sup_norm_monotone(r1 in 0.0f64..0.9, r2 in 0.0f64..0.9) {
            static KS: std::sync::OnceLock<KernelSeries> = std::sync::OnceLock::new();
            let ks = KS.get_or_init(|| {
                let w = RadialWeight::log_power(0.0, 1.0).unwrap();
                KernelSeries::build(&w, 2, KernelOptions::new(0.9, 1e-10)).unwrap()
            });
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            proptest::prop_assert!(ks.sup_norm_at(lo).unwrap() <= ks.sup_norm_at(hi).unwrap());
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn coefficients_positive_and_tail_bounded(alpha in -0.9f64..3.0, beta in -2.0f64..2.0, rho in 0.1f64..0.8) {
            let w = RadialWeight::log_power(alpha, beta).unwrap();
            let coarse = KernelSeries::build(&w, 2, KernelOptions::new(0.8, 1e-4)).unwrap();
            let fine = KernelSeries::build(&w, 2, KernelOptions::new(0.8, 1e-14)).unwrap();
            proptest::prop_assert!(fine.log_coeffs().iter().all(|l| l.is_finite()));
            let k0 = coarse.truncation();
            proptest::prop_assert!(fine.truncation() > k0);
            let tail: f64 = (k0 + 1..=fine.truncation()).map(|k| fine.coeff(k) * rho.powi(k as i32)).sum();
            proptest::prop_assert!(coarse.tail_bound(rho) >= tail);
        }
    }
}
