//! Integral means, the comparison integrals that control them, Carleson
//! ratios and the Littlewood–Paley identity.

use rustfft::FftPlanner;
use serde::Serialize;

use crate::asymptotics::TailForm;
use crate::ballgeom::{check_dim, log_block_weight_measure, BallPoint, CarlesonBlock, DiskQuadratureRule, RadialGrid};
use crate::error::{Error, Result};
use crate::fmt::ser_f64;
use crate::kernel::KernelSeries;
use crate::projection::{project_with_error, RadialTestFunction};
use crate::quad::{log_integrate_dyadic, log_integrate_from_zero_with_kinks, LogIntegral};
use crate::special::{ln_factorial, ln_gamma};
use crate::weights::RadialWeight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SliceQuadrature,
    RadialQuadrature,
    ClosedForm,
}

/// A non-negative value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    #[serde(serialize_with = "ser_f64")]
    pub abs_error: f64,
    pub method: Method,
}

impl NormEstimate {
    pub fn new(value: f64, abs_error: f64, method: Method) -> Self {
        Self {
            value,
            abs_error: abs_error.abs(),
            method,
        }
    }

    fn from_log(li: LogIntegral, method: Method) -> Self {
        let v = li.value();
        Self::new(v, v * li.rel_error, method)
    }
}

/// Relative accuracy asked of the slice quadrature in [`mp_mean`].
pub const MP_TOL: f64 = 1e-9;

/// `M_p(r, B_z^ω)` (or of `ℜB_z^ω` when `derivative`).
pub fn mp_mean(ks: &KernelSeries, r: f64, z: &BallPoint, p: f64, derivative: bool) -> Result<NormEstimate> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("radius {r} outside [0, 1)")));
    }
    mp_mean_at(ks, r * z.norm(), p, derivative)
}

/// `M_p` as a function of `ρ = r|z|` alone (unitary invariance).
pub fn mp_mean_at(ks: &KernelSeries, rho: f64, p: f64, derivative: bool) -> Result<NormEstimate> {
    let pth = slice_power_integral(ks, rho, p, derivative, MP_TOL)?;
    let value = pth.value.powf(1.0 / p);
    // d(I^{1/p}) = I^{1/p−1} dI / p
    let err = if pth.value > 0.0 { value * pth.abs_error / (p * pth.value) } else { 0.0 };
    Ok(NormEstimate::new(value, err, Method::SliceQuadrature))
}

/// `∫_𝕊 |F(ρ⟨η,e₁⟩)|^p dσ` with `F` the (differentiated) kernel series.
pub fn slice_power_integral(ks: &KernelSeries, rho: f64, p: f64, derivative: bool, tol: f64) -> Result<NormEstimate> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("exponent p = {p} must be positive")));
    }
    if rho == 0.0 {
        let v = if derivative { 0.0 } else { ks.coeff(0).powf(p) };
        return Ok(NormEstimate::new(v, 0.0, Method::ClosedForm));
    }
    let n = ks.dim();
    let mut planner = FftPlanner::new();
    let mut radial = 8usize;
    // Enough angular nodes to see the peak of width ~ 1 − ρ.
    let mut angular = (16.0 / (1.0 - rho)).max(32.0).log2().ceil().exp2() as usize;
    let mut prev: Option<f64> = None;
    loop {
        let rule = DiskQuadratureRule::new(n, radial, angular)?;
        let fft = planner.plan_fft_inverse(angular);
        let (us, ws) = rule.radial_nodes();
        let mut total = 0.0;
        for (u, wt) in us.iter().zip(ws) {
            let ring = ks.ring_values(rho * u.sqrt(), &fft, derivative)?;
            let mean = ring.iter().map(|v| v.norm().powf(p)).sum::<f64>() / angular as f64;
            total += wt * mean;
        }
        if let Some(old) = prev {
            let diff = (total - old).abs();
            if diff <= tol * total || diff == 0.0 {
                return Ok(NormEstimate::new(total, diff, Method::SliceQuadrature));
            }
            if radial >= 1024 {
                return Err(Error::Quadrature {
                    what: format!("M_p slice integral at rho = {rho}"),
                    estimate: total,
                    error: diff,
                });
            }
        }
        prev = Some(total);
        radial *= 2;
        angular *= 2;
    }
}

/// Exponent of `(1−t)` in the comparison integrals.
fn comparison_exponent(p: f64, n: usize, derivative: bool) -> f64 {
    let n = n as f64;
    if derivative {
        (n + 1.0) * p - n + 1.0
    } else {
        n * p - n + 1.0
    }
}

const COMPARISON_TOL: f64 = 1e-10;

/// `∫₀^ρ dt / (ω̂(t)^p (1−t)^{np−n+1})`, with `(n+1)p−n+1` for the radial derivative.
pub fn mp_comparison_integral(w: &RadialWeight, rho: f64, p: f64, n: usize, derivative: bool) -> Result<NormEstimate> {
    check_dim(n)?;
    if !(rho > 0.25 && rho < 1.0) {
        return Err(Error::Domain(format!("comparison integral needs 1/4 < rho < 1, got {rho}")));
    }
    let e = comparison_exponent(p, n, derivative);
    let lf = |x: f64| -p * w.log_tail_x(x).unwrap_or(f64::NAN) - e * x.ln();
    finite_estimate(log_integrate_dyadic(lf, 1.0 - rho, 1.0, COMPARISON_TOL)?, "comparison integral")
}

/// `∫₀^{|z|} υ̂(t) / (ω̂(t)^p (1−t)^{np−n+1}) dt` (derivative: `(n+1)p−n+1`).
pub fn apnorm_comparison(
    w: &RadialWeight,
    v: &RadialWeight,
    z_norm: f64,
    p: f64,
    n: usize,
    derivative: bool,
) -> Result<NormEstimate> {
    check_dim(n)?;
    if !(z_norm > 6.0 / 7.0 && z_norm < 1.0) {
        return Err(Error::Domain(format!("A^p comparison needs 6/7 < |z| < 1, got {z_norm}")));
    }
    let e = comparison_exponent(p, n, derivative);
    let lf = |x: f64| v.log_tail_x(x).unwrap_or(f64::NAN) - p * w.log_tail_x(x).unwrap_or(f64::NAN) - e * x.ln();
    finite_estimate(log_integrate_dyadic(lf, 1.0 - z_norm, 1.0, COMPARISON_TOL)?, "A^p comparison integral")
}

fn finite_estimate(li: LogIntegral, what: &str) -> Result<NormEstimate> {
    let est = NormEstimate::from_log(li, Method::RadialQuadrature);
    if !est.value.is_finite() || !est.abs_error.is_finite() {
        return Err(Error::Divergent(format!("{what} overflows")));
    }
    Ok(est)
}

/// Carleson-type ratio `μ(S_a)/ω(S_a)^{q/p}` along a radial apex sweep.
#[derive(Debug, Clone, Serialize)]
pub struct CarlesonReport {
    /// `(1 − |a|, ratio)`.
    pub curve: Vec<(f64, f64)>,
    /// Least-squares slope of `ln ratio` against `ln(1−|a|)` over the last five apexes.
    #[serde(serialize_with = "ser_f64")]
    pub tail_slope: f64,
    /// Largest ratio on the grid, or `+∞` when the tail slope shows blow-up.
    pub estimate: NormEstimate,
    pub bounded: bool,
}

/// Slopes below this are read as growth towards the boundary.
pub const SLOPE_TOL: f64 = 0.05;

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn carleson_ratio(
    mu: &RadialWeight,
    w: &RadialWeight,
    p: f64,
    q: f64,
    n: usize,
    grid: &RadialGrid,
) -> Result<CarlesonReport> {
    if !(p > 0.0 && q >= p) {
        return Err(Error::Domain(format!("Carleson ratio needs 0 < p <= q, got p = {p}, q = {q}")));
    }
    if grid.len() < 5 {
        return Err(Error::Domain("Carleson sweep needs at least five apexes".into()));
    }
    let mut curve = Vec::with_capacity(grid.len());
    let mut logs = Vec::with_capacity(grid.len());
    for &x in grid.gaps() {
        let block = CarlesonBlock::new(BallPoint::radial(n, 1.0 - x)?);
        let l = log_block_weight_measure(mu, &block, n)? - q / p * log_block_weight_measure(w, &block, n)?;
        logs.push(l);
        curve.push((x, l.exp()));
    }
    let tail = grid.len() - 5;
    let lx: Vec<f64> = grid.gaps()[tail..].iter().map(|x| x.ln()).collect();
    let tail_slope = ls_slope(&lx, &logs[tail..]);
    let bounded = tail_slope >= -SLOPE_TOL;
    let sup = curve.iter().map(|c| c.1).fold(0.0, f64::max);
    let value = if bounded { sup } else { f64::INFINITY };
    Ok(CarlesonReport {
        curve,
        tail_slope,
        estimate: NormEstimate::new(value, 0.0, Method::ClosedForm),
        bounded,
    })
}

/// Both sides of `‖f‖²_{A²_ω} = ω(𝔹)|f(0)|² + 4∫_𝔹 |ℜf|² |z|^{−2n} ω^{n*} dV` for `f = z^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LittlewoodPaley {
    #[serde(serialize_with = "ser_f64")]
    pub lhs: f64,
    #[serde(serialize_with = "ser_f64")]
    pub rhs: f64,
    /// Bound on the part of the right side cut out near the origin.
    #[serde(serialize_with = "ser_f64")]
    pub origin_remainder: f64,
}

/// Radius of the excluded ball around the origin.
pub const LP_ORIGIN_CUT: f64 = 1e-6;

/// `∫_𝕊 |η^m|² dσ = (n−1)! m! / (n−1+|m|)!`.
pub fn ln_sphere_monomial(m: &[u32]) -> f64 {
    let n = m.len() as f64;
    let total: u32 = m.iter().sum();
    ln_gamma(n) + m.iter().map(|&k| ln_factorial(k as u64)).sum::<f64>() - ln_gamma(n + total as f64)
}

pub fn littlewood_paley_check(w: &RadialWeight, m: &[u32], n: usize) -> Result<LittlewoodPaley> {
    check_dim(n)?;
    if m.len() != n {
        return Err(Error::Domain(format!("multi-index has {} entries for n = {n}", m.len())));
    }
    let total: u32 = m.iter().sum();
    let radial = if total == 0 { 0.0 } else { lp_radial_integral(w, n, total)? };
    lp_assemble(w, m, n, radial)
}

/// [`littlewood_paley_check`] for every multi-index with `|m| ≤ max_order`, sharing
/// the radial integrals (they depend on `|m|` only).
pub fn littlewood_paley_sweep(w: &RadialWeight, n: usize, max_order: u32) -> Result<Vec<(Vec<u32>, LittlewoodPaley)>> {
    check_dim(n)?;
    let mut out = Vec::new();
    for order in 0..=max_order {
        let radial = if order == 0 { 0.0 } else { lp_radial_integral(w, n, order)? };
        for m in multi_indices(n, order) {
            let lp = lp_assemble(w, &m, n, radial)?;
            out.push((m, lp));
        }
    }
    Ok(out)
}

/// All `m ∈ ℕⁿ` with `|m| = order`, in lexicographic order.
pub fn multi_indices(n: usize, order: u32) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![order]];
    }
    let mut out = Vec::new();
    for first in (0..=order).rev() {
        for mut rest in multi_indices(n - 1, order - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `∫_{ε}^1 r^{2|m|−1} ω^{n*}(r) dr`.
fn lp_radial_integral(w: &RadialWeight, n: usize, order: u32) -> Result<f64> {
    let ex = 2.0 * order as f64 - 1.0;
    let star_order = n as u32;
    let star = |x: f64| w.log_associated_star(1.0 - x, star_order).unwrap_or(f64::NAN);
    // Near r = 1: ω^{n*}(1−x) ≍ ∫₀ˣ ω̂, the form of the tail integrated once more.
    let form = w.tail_form().integral_from_zero().unwrap_or_else(|| TailForm::power_law(f64::NAN));
    let mut kinks = w.breakpoints();
    kinks.sort_by(|a, b| a.total_cmp(b));
    let outer = log_integrate_from_zero_with_kinks(|x| ex * (-x).ln_1p() + star(x), Some(&form), 0.5, 1e-10, &kinks)?;
    // Towards the origin in r, cut at LP_ORIGIN_CUT.
    let inner = log_integrate_dyadic(
        |r| ex * r.ln() + w.log_associated_star(r, star_order).unwrap_or(f64::NAN),
        LP_ORIGIN_CUT,
        0.5,
        1e-10,
    )?;
    Ok((outer + inner).value())
}

fn lp_assemble(w: &RadialWeight, m: &[u32], n: usize, radial: f64) -> Result<LittlewoodPaley> {
    let big_m: u32 = m.iter().sum();
    let nf = n as f64;
    let ln_s = ln_sphere_monomial(m);
    let s_ord = (2 * n - 1) as f64 + 2.0 * big_m as f64;
    // Polar coordinates: ∫_𝔹 |z^m|² ω dV = 2n · S_m · ω_{2n+2|m|−1}.
    let lhs = ((2.0 * nf).ln() + ln_s + w.log_moment(s_ord)?).exp();
    let mass = ((2.0 * nf).ln() + w.log_moment((2 * n - 1) as f64)?).exp();
    if big_m == 0 {
        return Ok(LittlewoodPaley {
            lhs,
            rhs: mass,
            origin_remainder: 0.0,
        });
    }
    // |ℜf|² = |m|²|z^m|², so the right integral is 8n|m|²S_m ∫₀¹ r^{2|m|−1} ω^{n*}(r) dr.
    let mf = big_m as f64;
    let pre = 8.0 * nf * mf * mf * ln_s.exp();
    // ω^{n*}(r) ≤ ln(1/r)·ω_{2n−1}: the cut piece is at most
    // ε^{2|m|}(ln(1/ε) + 1/(2|m|))/(2|m|)·ω_{2n−1}.
    let eps = LP_ORIGIN_CUT;
    let cut = eps.powf(2.0 * mf) * ((1.0 / eps).ln() + 1.0 / (2.0 * mf)) / (2.0 * mf) * (mass / (2.0 * nf));
    Ok(LittlewoodPaley {
        lhs,
        rhs: pre * radial,
        origin_remainder: pre * cut,
    })
}

/// `‖P_ω f‖_𝓑 = |P_ω f(0)| + sup (1−|z|²)|ℜP_ω f(z)|` over the grid radii, for a bounded radial `f`.
pub fn bloch_norm_of_projection(f: &RadialTestFunction, ks: &KernelSeries, grid: &RadialGrid) -> Result<NormEstimate> {
    if f.sup_norm() > 1.0 + 1e-12 {
        return Err(Error::Domain("test function must satisfy |f| <= 1".into()));
    }
    let n = ks.dim();
    let (g, err) = project_with_error(ks.weight(), &f.to_monomial_radial(n)?)?;
    let at_zero = g.eval(&BallPoint::origin(n)?).norm();
    let mut sup: f64 = 0.0;
    for &x in grid.gaps() {
        sup = sup.max(x * (2.0 - x) * g.radial_derivative_bound(1.0 - x)?);
    }
    Ok(NormEstimate::new(at_zero + sup, err, Method::RadialQuadrature))
}
