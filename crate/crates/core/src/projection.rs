//! `P_ω` on monomial-radial functions, `P_ω⁺` on radial functions, and the
//! adjoint test family `g_j = z₁^j`.
//!
//! `P_ω(φ(|·|)·z^m) = λ_m z^m` with `λ_m = ∫₀¹ φ(r) r^{2n+2|m|−1} ω(r) dr / ω_{2n+2|m|−1}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::ballgeom::{check_dim, BallPoint, RadialGrid};
use crate::error::{Error, Result};
use crate::fmt::{ser_f64, ser_f64_vec};
use crate::kernel::KernelSeries;
use crate::norms::{apnorm_comparison, slice_power_integral, Method, NormEstimate};
use crate::quad::{log_integrate_dyadic, log_integrate_from_zero};
use crate::weights::{RadialWeight, Verdict};

/// A bounded radial profile `φ(r)` on `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `r^s`, `s ≥ 0`.
    Power(f64),
    /// `values[i]` on `[breaks[i−1], breaks[i])`, with `breaks` strictly inside `(0, 1)`.
    Step { breaks: Vec<f64>, values: Vec<f64> },
    /// Linear interpolation through `(r, v)`, constant outside the knots.
    Tabulated { r: Vec<f64>, v: Vec<f64> },
}

impl Profile {
    pub fn constant(c: f64) -> Self {
        Profile::Step {
            breaks: Vec::new(),
            values: vec![c],
        }
    }

    /// `s1` on `[0, r0)`, `s2` on `[r0, 1)`.
    pub fn step(r0: f64, s1: f64, s2: f64) -> Result<Self> {
        Self::steps(vec![r0], vec![s1, s2])
    }

    pub fn steps(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::Domain("a step profile needs one more value than breaks".into()));
        }
        if breaks.iter().any(|b| !(*b > 0.0 && *b < 1.0)) || breaks.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Domain("step breaks must increase strictly inside (0, 1)".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("step values must be finite".into()));
        }
        Ok(Profile::Step { breaks, values })
    }

    pub fn tabulated(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if r.len() != v.len() || r.is_empty() {
            return Err(Error::Domain("tabulated profile needs matching non-empty knots".into()));
        }
        if r.iter().any(|x| !(0.0..1.0).contains(x)) || r.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Domain("profile knots must increase inside [0, 1)".into()));
        }
        Ok(Profile::Tabulated { r, v })
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Profile::Power(s) => r.powf(*s),
            Profile::Step { breaks, values } => values[breaks.partition_point(|b| *b <= r)],
            Profile::Tabulated { r: knots, v } => {
                let i = knots.partition_point(|k| *k <= r);
                if i == 0 {
                    v[0]
                } else if i == knots.len() {
                    v[i - 1]
                } else {
                    let t = (r - knots[i - 1]) / (knots[i] - knots[i - 1]);
                    v[i - 1] + t * (v[i] - v[i - 1])
                }
            }
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match self {
            Profile::Power(_) => 1.0,
            Profile::Step { values, .. } => values.iter().fold(0.0, |a, v| a.max(v.abs())),
            Profile::Tabulated { v, .. } => v.iter().fold(0.0, |a, x| a.max(x.abs())),
        }
    }

    /// Interval ends in `r`, including `0` and `1`.
    fn pieces(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        match self {
            Profile::Power(_) => {}
            Profile::Step { breaks, .. } => out.extend(breaks),
            Profile::Tabulated { r, .. } => out.extend(r.iter().filter(|x| **x > 0.0)),
        }
        out.push(1.0);
        out
    }

    /// `∫₀¹ φ(r) r^S ω(r) dr` with an absolute error estimate.
    pub fn weighted_moment(&self, w: &RadialWeight, s: f64) -> Result<(f64, f64)> {
        match self {
            Profile::Power(a) => {
                let v = w.moment(s + a)?;
                Ok((v, v * 1e-12))
            }
            Profile::Step { values, .. } => {
                // ∫_a^b r^S ω = U(1−a) − U(1−b), U(x) = ∫_{1−x}^1 r^S ω.
                let upper = |r: f64| -> Result<f64> {
                    if r >= 1.0 {
                        Ok(0.0)
                    } else if r <= 0.0 {
                        w.moment(s)
                    } else {
                        Ok(w.log_upper_moment(s, 1.0 - r)?.exp())
                    }
                };
                let ends = self.pieces();
                let mut total = 0.0;
                let mut err = 0.0;
                for (i, pair) in ends.windows(2).enumerate() {
                    let (ua, ub) = (upper(pair[0])?, upper(pair[1])?);
                    total += values[i] * (ua - ub);
                    err += values[i].abs() * (ua + ub) * 1e-12;
                }
                Ok((total, err))
            }
            Profile::Tabulated { r: knots, v } => {
                let mut total = 0.0;
                let mut err = 0.0;
                // Constant pieces below the first and above the last knot.
                let head = Profile::steps(vec![knots[0]].into_iter().filter(|k| *k > 0.0).collect(), {
                    let mut vals = vec![v[0]];
                    if knots[0] > 0.0 {
                        vals.push(0.0);
                    }
                    vals
                })?;
                let (h, he) = head.weighted_moment(w, s)?;
                let last = *knots.last().unwrap_or(&0.0);
                let tail_mass = if last > 0.0 { w.log_upper_moment(s, 1.0 - last)?.exp() } else { w.moment(s)? };
                total += h + v[v.len() - 1] * tail_mass;
                err += he + v[v.len() - 1].abs() * tail_mass * 1e-12;
                for i in 1..knots.len() {
                    let (a, b) = (knots[i - 1], knots[i]);
                    let f = |r: f64| self.eval(r) * r.powf(s) * w.density(r).unwrap_or(f64::NAN);
                    let res = crate::quad::integrate(f, a, b, crate::quad::Tolerance::relative(1e-12).with_abs(1e-300))?;
                    total += res.value;
                    err += res.abs_error;
                }
                Ok((total, err))
            }
        }
    }
}

/// One term `coef·φ(|z|)·z^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub m: Vec<u32>,
    pub coef: Complex64,
    pub profile: Profile,
}

/// `f(z) = Σ coef·φ_m(|z|)·z^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialRadialFunction {
    n: usize,
    terms: Vec<Term>,
}

/// `max_{|η|=1} |η^m| = Π (m_i/|m|)^{m_i/2}`.
fn sphere_monomial_max(m: &[u32]) -> f64 {
    let total: u32 = m.iter().sum();
    if total == 0 {
        return 1.0;
    }
    m.iter()
        .filter(|&&k| k > 0)
        .map(|&k| (k as f64 / total as f64).powf(k as f64 / 2.0))
        .product()
}

impl MonomialRadialFunction {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        check_dim(n)?;
        if terms.iter().any(|t| t.m.len() != n) {
            return Err(Error::Domain(format!("every multi-index needs {n} entries")));
        }
        if terms.iter().any(|t| matches!(t.profile, Profile::Power(s) if !(s >= 0.0))) {
            return Err(Error::Domain("power profiles need s >= 0 to stay bounded".into()));
        }
        Ok(Self { n, terms })
    }

    /// `z^m`.
    pub fn monomial(m: Vec<u32>) -> Result<Self> {
        let n = m.len();
        Self::new(
            n,
            vec![Term {
                m,
                coef: Complex64::new(1.0, 0.0),
                profile: Profile::Power(0.0),
            }],
        )
    }

    /// A radial function `φ(|z|)`.
    pub fn radial(n: usize, profile: Profile) -> Result<Self> {
        Self::new(
            n,
            vec![Term {
                m: vec![0; n],
                coef: Complex64::new(1.0, 0.0),
                profile,
            }],
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn eval(&self, z: &BallPoint) -> Complex64 {
        let r = z.norm();
        self.terms
            .iter()
            .map(|t| {
                let mono: Complex64 = z.coords().iter().zip(&t.m).map(|(c, &k)| c.powu(k)).product();
                t.coef * t.profile.eval(r) * mono
            })
            .sum()
    }

    /// Holomorphic when every profile is the constant `r⁰`.
    pub fn is_holomorphic(&self) -> bool {
        self.terms.iter().all(|t| t.profile == Profile::Power(0.0))
    }

    /// Upper bound for `sup_{|z|=t} |ℜf(z)|` of a holomorphic `f`.
    pub fn radial_derivative_bound(&self, t: f64) -> Result<f64> {
        if !self.is_holomorphic() {
            return Err(Error::Domain("radial derivative bound needs a holomorphic function".into()));
        }
        Ok(self
            .terms
            .iter()
            .map(|term| {
                let k: u32 = term.m.iter().sum();
                k as f64 * term.coef.norm() * t.powi(k as i32) * sphere_monomial_max(&term.m)
            })
            .sum())
    }
}

/// `λ_m` for one term.
fn multiplier(w: &RadialWeight, t: &Term, n: usize) -> Result<(f64, f64)> {
    let k: u32 = t.m.iter().sum();
    let s = (2 * n + 2 * k as usize - 1) as f64;
    if t.profile == Profile::Power(0.0) {
        return Ok((1.0, 0.0));
    }
    let ln_den = w.log_moment(s)?;
    let (num, err) = t.profile.weighted_moment(w, s)?;
    let den = ln_den.exp();
    Ok((num / den, err / den))
}

/// `P_ω f`, holomorphic with constant profiles.
pub fn project(w: &RadialWeight, f: &MonomialRadialFunction) -> Result<MonomialRadialFunction> {
    project_with_error(w, f).map(|(g, _)| g)
}

/// [`project`] with the summed absolute error of the multipliers.
pub fn project_with_error(w: &RadialWeight, f: &MonomialRadialFunction) -> Result<(MonomialRadialFunction, f64)> {
    let mut terms = Vec::with_capacity(f.terms.len());
    let mut err = 0.0;
    for t in &f.terms {
        let (lambda, e) = multiplier(w, t, f.n)?;
        err += e * t.coef.norm();
        terms.push(Term {
            m: t.m.clone(),
            coef: t.coef * lambda,
            profile: Profile::Power(0.0),
        });
    }
    Ok((MonomialRadialFunction { n: f.n, terms }, err))
}

/// A bounded radial test function `f(w) = s(|w|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialTestFunction {
    pub profile: Profile,
}

impl RadialTestFunction {
    pub fn new(profile: Profile) -> Self {
        Self { profile }
    }

    pub fn sup_norm(&self) -> f64 {
        self.profile.sup_abs()
    }

    pub fn to_monomial_radial(&self, n: usize) -> Result<MonomialRadialFunction> {
        MonomialRadialFunction::radial(n, self.profile.clone())
    }
}

/// Chebyshev interpolant of `ρ ↦ ∫_𝕊 |B(ρ⟨η,e₁⟩)| dσ` on `[0, ρ₁]`.
struct SliceInterpolant {
    hi: f64,
    coeffs: Vec<f64>,
}

impl SliceInterpolant {
    fn build(ks: &KernelSeries, hi: f64) -> Result<Self> {
        let mut n = 16usize;
        loop {
            let values: Vec<f64> = (0..n)
                .map(|j| {
                    let t = (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos();
                    slice_power_integral(ks, 0.5 * hi * (t + 1.0), 1.0, false, 1e-12).map(|e| e.value)
                })
                .collect::<Result<_>>()?;
            let coeffs: Vec<f64> = (0..n)
                .map(|k| {
                    let s: f64 = values
                        .iter()
                        .enumerate()
                        .map(|(j, v)| v * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / n as f64).cos())
                        .sum();
                    s * 2.0 / n as f64
                })
                .collect();
            let scale = coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
            let tail = coeffs[n - 4..].iter().fold(0.0f64, |a, c| a.max(c.abs()));
            if tail <= 1e-12 * scale || n >= 512 {
                if tail > 1e-8 * scale {
                    return Err(Error::Quadrature {
                        what: "Chebyshev interpolant of the slice integral".into(),
                        estimate: scale,
                        error: tail,
                    });
                }
                return Ok(Self { hi, coeffs });
            }
            n *= 2;
        }
    }

    fn eval(&self, rho: f64) -> f64 {
        let t = 2.0 * rho / self.hi - 1.0;
        // Clenshaw.
        let (mut b1, mut b2) = (0.0, 0.0);
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + 0.5 * self.coeffs[0]
    }
}

/// `P_ω⁺ f(z) = 2n ∫₀¹ f(r) r^{2n−1} ω(r) A(r|z|) dr` with `A` the slice integral of `|B|`.
pub fn maximal_project_radial(w: &RadialWeight, f: &RadialTestFunction, z: &BallPoint, ks: &KernelSeries) -> Result<f64> {
    let n = ks.dim();
    if z.dim() != n {
        return Err(Error::Domain(format!("point must lie in dimension {n}")));
    }
    if w != ks.weight() {
        return Err(Error::Domain("kernel series was built for a different weight".into()));
    }
    let zn = z.norm();
    if zn > ks.options().rho_max {
        return Err(Error::OutOfValidity {
            modulus: zn,
            rho_max: ks.options().rho_max,
        });
    }
    let interp = if zn > 0.0 { Some(SliceInterpolant::build(ks, zn)?) } else { None };
    let slice = |r: f64| match &interp {
        Some(i) => i.eval(r * zn),
        None => ks.coeff(0),
    };
    let k = (2 * n - 1) as f64;
    let ends = f.profile.pieces();
    let mut total = 0.0;
    for pair in ends.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let mid = f.profile.eval(0.5 * (a + b));
        if mid == 0.0 {
            continue;
        }
        if f.profile.eval(a) * mid < 0.0 || f.profile.eval(b.min(1.0 - 1e-15)) * mid < 0.0 {
            return Err(Error::Domain("profile must keep one sign per interval".into()));
        }
        let sign = mid.signum();
        let lf = |x: f64| {
            let r = 1.0 - x;
            (f.profile.eval(r).abs() * slice(r)).ln() + k * (-x).ln_1p() + w.log_density_x(x)
        };
        let li = if b >= 1.0 {
            log_integrate_from_zero(lf, Some(&w.density_form()), 1.0 - a, 1e-11)?
        } else {
            log_integrate_dyadic(lf, 1.0 - b, 1.0 - a, 1e-11)?
        };
        total += sign * li.value();
    }
    Ok(2.0 * n as f64 * total)
}

/// `P_ω^*(g_j) = κ_j ξ₁^j ω/υ` on `L^q_υ` and the norm ratio `‖P_ω^* g_j‖/‖g_j‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GjAdjoint {
    pub j: u32,
    #[serde(serialize_with = "ser_f64")]
    pub kappa: f64,
    /// `+∞` when `∫ r^{2n+qj−1} ω^q/υ^{q−1}` diverges.
    #[serde(serialize_with = "ser_f64")]
    pub ratio: f64,
}

/// The constant printed with the adjoint formula, `(n−1)!/(2n−1)!`; the
/// self-adjoint normalisation needs `1`.
pub fn verbatim_adjoint_factor(n: usize) -> f64 {
    let n = n as f64;
    (crate::special::ln_gamma(n) - crate::special::ln_gamma(2.0 * n)).exp()
}

pub fn adjoint_on_gj(w: &RadialWeight, v: &RadialWeight, j: u32, n: usize, p: f64, verbatim: bool) -> Result<GjAdjoint> {
    check_dim(n)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("adjoint ratio needs 1 < p < inf, got {p}")));
    }
    let q = p / (p - 1.0);
    let jf = j as f64;
    let nf = n as f64;
    let s_hol = 2.0 * nf + 2.0 * jf - 1.0;
    let mut ln_kappa = v.log_moment(s_hol)? - w.log_moment(s_hol)?;
    if verbatim {
        ln_kappa += verbatim_adjoint_factor(n).ln();
    }
    let kappa = ln_kappa.exp();
    let form = w.density_form().powf(q).mul(&v.density_form().powf(1.0 - q));
    if !form.integrable_at_zero() {
        return Ok(GjAdjoint {
            j,
            kappa,
            ratio: f64::INFINITY,
        });
    }
    // The spherical factor ∫|η₁|^{qj} dσ is common to both norms.
    let s = 2.0 * nf + q * jf - 1.0;
    let lf = |x: f64| s * (-x).ln_1p() + q * w.log_density_x(x) + (1.0 - q) * v.log_density_x(x);
    let num = log_integrate_from_zero(lf, Some(&form), 1.0, 1e-12)?.log_value;
    let ratio = (ln_kappa + (num - v.log_moment(s)?) / q).exp();
    Ok(GjAdjoint { j, kappa, ratio })
}

/// `sup_z (1−|z|)·‖ℜB_z^ω‖_{A¹_ω}` through the comparison integral, `|z| > 6/7` only.
#[derive(Debug, Clone, Serialize)]
pub struct LinftyBloch {
    pub estimate: NormEstimate,
    #[serde(serialize_with = "ser_f64_vec")]
    pub radii: Vec<f64>,
    #[serde(serialize_with = "ser_f64_vec")]
    pub values: Vec<f64>,
    /// Whether the weight was classified in `D̂`, the setting of the estimate.
    pub doubling: Verdict,
}

pub fn linfty_to_bloch_bound(w: &RadialWeight, n: usize, grid: &RadialGrid) -> Result<LinftyBloch> {
    let doubling = w.classify(&RadialGrid::dyadic(20))?.verdicts.d_hat;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    let mut err: f64 = 0.0;
    for &x in grid.gaps() {
        let r = 1.0 - x;
        if r <= 6.0 / 7.0 {
            continue;
        }
        let a = apnorm_comparison(w, w, r, 1.0, n, true)?;
        radii.push(r);
        values.push(x * a.value);
        err = err.max(x * a.abs_error);
    }
    if values.is_empty() {
        return Err(Error::Domain("grid has no radius above 6/7".into()));
    }
    let sup = values.iter().cloned().fold(0.0, f64::max);
    Ok(LinftyBloch {
        estimate: NormEstimate::new(sup, err, Method::RadialQuadrature),
        radii,
        values,
        doubling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelOptions;
    use approx::assert_relative_eq;

    #[test]
    fn holomorphic_polynomials_are_fixed() {
        let w = RadialWeight::log_power(0.0, 1.0).unwrap();
        let f = MonomialRadialFunction::monomial(vec![2, 1]).unwrap();
        let g = project(&w, &f).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn radial_power_factor() {
        // |z|²·z₁ against Lebesgue measure: λ = ω₇/ω₅ = (1/8)/(1/6).
        let w = RadialWeight::power(0.0).unwrap();
        let f = MonomialRadialFunction::new(
            2,
            vec![Term {
                m: vec![1, 0],
                coef: Complex64::new(1.0, 0.0),
                profile: Profile::Power(2.0),
            }],
        )
        .unwrap();
        let g = project(&w, &f).unwrap();
        assert_relative_eq!(g.terms()[0].coef.re, 0.75, max_relative = 1e-12);
        assert_eq!(project(&w, &g).unwrap(), g);
    }

    #[test]
    fn step_profile_uses_interval_moments() {
        let w = RadialWeight::power(1.0).unwrap();
        let prof = Profile::step(0.5, 0.0, 1.0).unwrap();
        let (v, _) = prof.weighted_moment(&w, 7.0).unwrap();
        // ∫_{1/2}^1 r⁷(1−r) dr
        let exact = (1.0 / 8.0 - 1.0 / 9.0) - (0.5f64.powi(8) / 8.0 - 0.5f64.powi(9) / 9.0);
        assert_relative_eq!(v, exact, max_relative = 1e-11);
    }

    #[test]
    fn tabulated_profile_matches_step() {
        let w = RadialWeight::power(0.5).unwrap();
        let tab = Profile::tabulated(vec![0.2, 0.6], vec![1.0, 1.0]).unwrap();
        let (v, _) = tab.weighted_moment(&w, 3.0).unwrap();
        assert_relative_eq!(v, w.moment(3.0).unwrap(), max_relative = 1e-11);
    }

    #[test]
    fn maximal_projection_of_one_at_origin() {
        let w = RadialWeight::log_power(0.0, 1.0).unwrap();
        let ks = KernelSeries::build(&w, 2, KernelOptions::new(0.9, 1e-12)).unwrap();
        let f = RadialTestFunction::new(Profile::constant(1.0));
        let v = maximal_project_radial(&w, &f, &BallPoint::origin(2).unwrap(), &ks).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn maximal_projection_dominates_projection() {
        let w = RadialWeight::power(0.0).unwrap();
        let ks = KernelSeries::build(&w, 2, KernelOptions::new(0.9, 1e-12)).unwrap();
        let f = RadialTestFunction::new(Profile::step(0.5, 0.3, 1.0).unwrap());
        let z = BallPoint::radial(2, 0.6).unwrap();
        let plus = maximal_project_radial(&w, &f, &z, &ks).unwrap();
        let g = project(&w, &f.to_monomial_radial(2).unwrap()).unwrap();
        assert!(g.eval(&z).norm() <= plus);
    }

    #[test]
    fn self_adjoint_anchor() {
        let w = RadialWeight::log_power(0.0, 1.0).unwrap();
        for j in [0, 3, 10] {
            let g = adjoint_on_gj(&w, &w, j, 2, 2.0, false).unwrap();
            assert_relative_eq!(g.ratio, 1.0, max_relative = 1e-10);
            let paper = adjoint_on_gj(&w, &w, j, 2, 2.0, true).unwrap();
            assert_relative_eq!(paper.ratio, 1.0 / 6.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn divergent_adjoint_ratio() {
        let w = RadialWeight::power(0.0).unwrap();
        let v = RadialWeight::power(2.0).unwrap();
        for j in [0, 5] {
            assert!(adjoint_on_gj(&w, &v, j, 2, 2.0, false).unwrap().ratio.is_infinite());
        }
    }

    #[test]
    fn linfty_bound_is_finite_for_lebesgue() {
        let w = RadialWeight::power(0.0).unwrap();
        let b = linfty_to_bloch_bound(&w, 2, &RadialGrid::dyadic(12)).unwrap();
        assert!(b.estimate.value.is_finite());
        assert_relative_eq!(b.estimate.value, 1.0 - 2f64.powi(-12), max_relative = 1e-8);
    }
}
