//! Radial weights on `[0, 1)`: densities, tails, moments, associated weights
//! and class membership.
//!
//! Everything near the boundary is computed in the gap variable `x = 1 − r`
//! and in log space, so tails of `exp(−c/(1−r))` at `r = 1 − 2⁻⁴⁰` are fine.

use std::fmt;

use serde::Serialize;

use crate::asymptotics::TailForm;
use crate::ballgeom::{GridScheme, RadialGrid};
use crate::error::{Error, Result};
use crate::fmt::{ser_f64, ser_f64_pair};
use crate::quad::{log_integrate_dyadic, log_integrate_from_zero, log_integrate_from_zero_with_kinks};
use crate::special::{ln_beta, ln_gamma};

/// Relative accuracy requested from weight quadratures.
pub const WEIGHT_TOL: f64 = 1e-12;

/// A piecewise-linear table in `r`, extended by `A·(1−r)^γ` past the last node.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    grid: Vec<f64>,
    values: Vec<f64>,
    tail_exponent: f64,
    tail_log_coef: f64,
    /// `∫_{grid[i]}^1 ω`.
    suffix: Vec<f64>,
    source: Option<(f64, u32)>,
}

impl Table {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::InvalidWeight(
                "tabulated weight needs at least two (r, value) pairs".into(),
            ));
        }
        if grid[0] < 0.0 || *grid.last().unwrap() >= 1.0 {
            return Err(Error::InvalidWeight("tabulated grid must lie in [0, 1)".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidWeight("tabulated grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidWeight("tabulated values must be positive and finite".into()));
        }
        let m = grid.len();
        let (x1, x2) = (1.0 - grid[m - 2], 1.0 - grid[m - 1]);
        let gamma = (values[m - 1] / values[m - 2]).ln() / (x2 / x1).ln();
        if gamma <= -1.0 {
            return Err(Error::InvalidWeight(format!(
                "power-law extension (1-r)^{gamma:.4} of the table is not integrable"
            )));
        }
        let tail_log_coef = values[m - 1].ln() - gamma * x2.ln();
        let mut suffix = vec![0.0; m];
        suffix[m - 1] = (tail_log_coef + (gamma + 1.0) * x2.ln()).exp() / (gamma + 1.0);
        for i in (0..m - 1).rev() {
            suffix[i] = suffix[i + 1] + 0.5 * (values[i] + values[i + 1]) * (grid[i + 1] - grid[i]);
        }
        Ok(Self {
            tail_log_coef,
            tail_exponent: gamma,
            grid,
            values,
            suffix,
            source: None,
        })
    }

    /// Samples of `(1−r)^α` at `r = 1 − 2^{−k/2}`, `k = 0..=2·kmax`.
    pub fn sampled_power(alpha: f64, kmax: u32) -> Result<Self> {
        let pts: Vec<f64> = (0..=2 * kmax).map(|k| 2f64.powf(-(k as f64) / 2.0)).collect();
        let grid = pts.iter().map(|x| 1.0 - x).collect();
        let values = pts.iter().map(|x| x.powf(alpha)).collect();
        let mut t = Self::new(grid, values)?;
        t.source = Some((alpha, kmax));
        Ok(t)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Exponent `γ` of the boundary extension.
    pub fn tail_exponent(&self) -> f64 {
        self.tail_exponent
    }

    fn last_gap(&self) -> f64 {
        1.0 - self.grid[self.grid.len() - 1]
    }

    /// `ln ∫_{1−x}^1 ω`, exact for the interpolant and its extension.
    fn log_tail_x(&self, x: f64) -> f64 {
        let m = self.grid.len();
        if x <= self.last_gap() {
            return self.tail_log_coef + (self.tail_exponent + 1.0) * x.ln() - (self.tail_exponent + 1.0).ln();
        }
        let r = 1.0 - x;
        if r <= self.grid[0] {
            return (self.suffix[0] + self.values[0] * (self.grid[0] - r)).ln();
        }
        let i = self.grid.partition_point(|&g| g <= r).clamp(1, m - 1);
        let v = self.log_density_x(x).exp();
        (self.suffix[i] + 0.5 * (v + self.values[i]) * (self.grid[i] - r)).ln()
    }

    fn log_density_x(&self, x: f64) -> f64 {
        if x <= self.last_gap() {
            return self.tail_log_coef + self.tail_exponent * x.ln();
        }
        let r = 1.0 - x;
        if r <= self.grid[0] {
            return self.values[0].ln();
        }
        let i = self.grid.partition_point(|&g| g <= r).clamp(1, self.grid.len() - 1);
        let (r0, r1) = (self.grid[i - 1], self.grid[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        (v0 + (v1 - v0) * (r - r0) / (r1 - r0)).ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `(1−r)^α`, or `c_α(1−r²)^α` normalised for the ball of dimension `n`.
    Power { alpha: f64, normalized: Option<u32> },
    /// `(1−r)^α · log(e/(1−r))^β`.
    LogPower { alpha: f64, beta: f64 },
    /// `exp(−c/(1−r)^β)`.
    ExpDecay { c: f64, beta: f64 },
    Tabulated(Table),
    /// `ω̂(r)/(1−r)` for an inner weight `ω`.
    TailQuotient(Box<RadialWeight>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialWeight {
    family: Family,
    ln_mass: f64,
}

/// `L = log(e/x) = 1 − ln x`.
fn big_l(x: f64) -> f64 {
    1.0 - x.ln()
}

fn check_r(r: f64) -> Result<()> {
    if (0.0..1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius {r} outside [0, 1)")))
    }
}

fn ln_c_alpha(alpha: f64, n: u32) -> f64 {
    let n = n as f64;
    ln_gamma(n + alpha + 1.0) - ln_gamma(n + 1.0) - ln_gamma(alpha + 1.0)
}

impl RadialWeight {
    fn build(family: Family) -> Result<Self> {
        let mut w = Self {
            family,
            ln_mass: f64::NAN,
        };
        if !w.density_form().integrable_at_zero() {
            return Err(Error::InvalidWeight(format!("{w} is not integrable on [0, 1)")));
        }
        let ln_mass = w.log_tail_x(1.0)?;
        if !ln_mass.is_finite() {
            return Err(Error::InvalidWeight(format!("{w} has no finite positive mass")));
        }
        w.ln_mass = ln_mass;
        Ok(w)
    }

    /// `(1−r)^α`, `α > −1`.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > -1.0 && alpha.is_finite()) {
            return Err(Error::InvalidWeight(format!("power exponent {alpha} must exceed -1")));
        }
        Self::build(Family::Power {
            alpha,
            normalized: None,
        })
    }

    /// `c_α(1−r²)^α` with `c_α = Γ(n+α+1)/(Γ(n+1)Γ(α+1))`.
    pub fn power_normalized(alpha: f64, n: u32) -> Result<Self> {
        if !(alpha > -1.0 && alpha.is_finite()) {
            return Err(Error::InvalidWeight(format!("power exponent {alpha} must exceed -1")));
        }
        if n == 0 {
            return Err(Error::InvalidWeight("normalisation dimension must be at least 1".into()));
        }
        Self::build(Family::Power {
            alpha,
            normalized: Some(n),
        })
    }

    /// `(1−r)^α log(e/(1−r))^β`; `α > −1`, or `α = −1` with `β < −1`.
    pub fn log_power(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() || alpha < -1.0 {
            return Err(Error::InvalidWeight(format!("logpower(alpha={alpha}, beta={beta}) is not integrable")));
        }
        Self::build(Family::LogPower { alpha, beta })
    }

    /// `exp(−c/(1−r)^β)`, `c, β > 0`.
    pub fn exp_decay(c: f64, beta: f64) -> Result<Self> {
        if !(c > 0.0 && beta > 0.0 && c.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidWeight("expdecay needs c > 0 and beta > 0".into()));
        }
        Self::build(Family::ExpDecay { c, beta })
    }

    pub fn tabulated(table: Table) -> Result<Self> {
        Self::build(Family::Tabulated(table))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// `W₁(t) = ω̂(t)/(1−t)`.
    pub fn w1_transform(&self) -> Result<Self> {
        Self::build(Family::TailQuotient(Box::new(self.clone())))
    }

    /// `ln ω(1 − x)` for `x ∈ (0, 1]`.
    pub fn log_density_x(&self, x: f64) -> f64 {
        match &self.family {
            Family::Power { alpha, normalized } => match normalized {
                None => alpha * x.ln(),
                Some(n) => ln_c_alpha(*alpha, *n) + alpha * (x.ln() + (2.0 - x).ln()),
            },
            Family::LogPower { alpha, beta } => alpha * x.ln() + beta * big_l(x).ln(),
            Family::ExpDecay { c, beta } => -c * x.powf(-beta),
            Family::Tabulated(t) => t.log_density_x(x),
            Family::TailQuotient(inner) => inner.log_tail_x(x).unwrap_or(f64::NAN) - x.ln(),
        }
    }

    /// `ω(r)`.
    pub fn density(&self, r: f64) -> Result<f64> {
        check_r(r)?;
        Ok(self.log_density_x(1.0 - r).exp())
    }

    /// Boundary behaviour of the density in `x = 1 − r`.
    pub fn density_form(&self) -> TailForm {
        match &self.family {
            Family::Power { alpha, .. } => TailForm::power_law(*alpha),
            Family::LogPower { alpha, beta } => TailForm::power_log(*alpha, *beta),
            Family::ExpDecay { c, beta } => TailForm::exp_decay(*c, *beta),
            Family::Tabulated(t) => TailForm::power_law(t.tail_exponent),
            Family::TailQuotient(inner) => inner.tail_form().shift_power(-1.0),
        }
    }

    /// Boundary behaviour of `ω̂` in `x = 1 − r`.
    pub fn tail_form(&self) -> TailForm {
        self.density_form()
            .integral_from_zero()
            .unwrap_or_else(|| TailForm::power_law(f64::NAN))
    }

    /// `ln ω̂(1 − x)` for `x ∈ (0, 1]`.
    pub fn log_tail_x(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::Domain(format!("gap {x} outside (0, 1]")));
        }
        match &self.family {
            Family::Power {
                alpha,
                normalized: None,
            } => Ok((alpha + 1.0) * x.ln() - (alpha + 1.0).ln()),
            Family::Power {
                alpha,
                normalized: Some(n),
            } => Ok(ln_c_alpha(*alpha, *n) + alpha * 2f64.ln() + (alpha + 1.0) * x.ln() + normalized_tail_series(*alpha, x).ln()),
            Family::LogPower { alpha, beta } if *alpha == -1.0 => {
                Ok((beta + 1.0) * big_l(x).ln() - (-beta - 1.0).ln())
            }
            Family::Tabulated(t) => Ok(t.log_tail_x(x)),
            Family::TailQuotient(inner) => {
                // ∫₀ˣ ω̂(y)/y dy = ∫₀ˣ ω(u) ln(x/u) du
                let form = inner.density_form().mul(&TailForm::power_log(0.0, 1.0));
                let lf = |u: f64| inner.log_density_x(u) + (x / u).ln().ln();
                Ok(log_integrate_from_zero(lf, Some(&form), x, WEIGHT_TOL)?.log_value)
            }
            _ => {
                let form = self.density_form();
                let lf = |y: f64| self.log_density_x(y);
                Ok(log_integrate_from_zero(lf, Some(&form), x, WEIGHT_TOL)?.log_value)
            }
        }
    }

    /// `ω̂(r) = ∫_r^1 ω`.
    pub fn tail(&self, r: f64) -> Result<f64> {
        check_r(r)?;
        if r == 0.0 {
            return Ok(self.ln_mass.exp());
        }
        Ok(self.log_tail_x(1.0 - r)?.exp())
    }

    /// `ln ∫₀¹ ω`.
    pub fn ln_mass(&self) -> f64 {
        self.ln_mass
    }

    /// `ln ω_s = ln ∫₀¹ r^s ω(r) dr`.
    pub fn log_moment(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::Domain(format!("moment order {s} must be finite and >= 0")));
        }
        if s == 0.0 {
            return Ok(self.ln_mass);
        }
        match &self.family {
            Family::Power {
                alpha,
                normalized: None,
            } => Ok(ln_beta(s + 1.0, alpha + 1.0)),
            Family::Power {
                alpha,
                normalized: Some(n),
            } => Ok(ln_c_alpha(*alpha, *n) - 2f64.ln() + ln_beta((s + 1.0) / 2.0, alpha + 1.0)),
            _ => self.log_upper_moment(s, 1.0),
        }
    }

    /// `ln ω_s` for many orders at once; closed forms where available,
    /// otherwise a cached composite rule (see [`MomentRule`]).
    pub fn log_moments(&self, orders: &[f64]) -> Result<Vec<f64>> {
        let closed = matches!(self.family, Family::Power { .. });
        if closed || orders.len() <= 8 {
            return orders.iter().map(|&s| self.log_moment(s)).collect();
        }
        let rule = MomentRule::new(self)?;
        orders.iter().map(|&s| rule.log_moment(s)).collect()
    }

    /// Gaps `1 − r` at which the density has kinks.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::Tabulated(t) => t.grid.iter().map(|r| 1.0 - r).collect(),
            Family::TailQuotient(inner) => inner.breakpoints(),
            _ => Vec::new(),
        }
    }

    /// `ω_s`.
    pub fn moment(&self, s: f64) -> Result<f64> {
        Ok(self.log_moment(s)?.exp())
    }

    /// `ln ∫_{1−x}^1 r^s ω(r) dr`.
    pub fn log_upper_moment(&self, s: f64, x: f64) -> Result<f64> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::Domain(format!("gap {x} outside (0, 1]")));
        }
        if s == 0.0 {
            return self.log_tail_x(x);
        }
        let form = self.density_form();
        let lf = |y: f64| s * (-y).ln_1p() + self.log_density_x(y);
        let mut kinks = self.breakpoints();
        kinks.sort_by(|a, b| a.total_cmp(b));
        Ok(log_integrate_from_zero_with_kinks(lf, Some(&form), x, WEIGHT_TOL, &kinks)?.log_value)
    }

    /// `ω^{n*}(r) = ∫_r^1 s^{2n−1} log(s/r) ω(s) ds`; order 1 is `ω*`.
    pub fn associated_star(&self, r: f64, order: u32) -> Result<f64> {
        Ok(self.log_associated_star(r, order)?.exp())
    }

    /// `ln ω^{n*}(r)`.
    pub fn log_associated_star(&self, r: f64, order: u32) -> Result<f64> {
        check_r(r)?;
        if r == 0.0 {
            return Err(Error::Domain("associated weight is undefined at r = 0".into()));
        }
        if order == 0 {
            return Err(Error::Domain("order must be at least 1".into()));
        }
        let x = 1.0 - r;
        let k = (2 * order - 1) as f64;
        let form = self.density_form();
        let lf = |y: f64| k * (-y).ln_1p() + ((x - y) / r).ln_1p().ln() + self.log_density_x(y);
        let mut kinks = self.breakpoints();
        kinks.sort_by(|a, b| a.total_cmp(b));
        Ok(log_integrate_from_zero_with_kinks(lf, Some(&form), x, 1e-11, &kinks)?.log_value)
    }

    /// `ln ∫_{1−x₁}^{1−x₀} exp(g(y)) dy` over dyadic panels, for `x₀ < x₁`.
    pub fn log_integral_between<F: Fn(f64) -> f64>(g: F, x0: f64, x1: f64) -> Result<f64> {
        Ok(log_integrate_dyadic(g, x0, x1, WEIGHT_TOL)?.log_value)
    }

    /// Membership estimates along a dyadic grid `r_k = 1 − 2^{−k}`.
    pub fn classify(&self, grid: &RadialGrid) -> Result<WeightClassReport> {
        classify(self, grid)
    }
}

/// Composite Gauss–Legendre rule in `x = 1 − r` for moments of one weight.
///
/// Octaves `[2^{−j−1}, 2^{−j}]` down to `2^{−100}` (plus the weight's kinks) are
/// split into four panels of 16 nodes; the sliver below is closed with the
/// density's boundary form. Each moment is then a log-sum-exp over cached nodes.
#[derive(Debug, Clone)]
pub struct MomentRule {
    /// Nodes in increasing `x`.
    xs: Vec<f64>,
    ln_r: Vec<f64>,
    ln_wd: Vec<f64>,
    /// `ln Σ_{i<k} w_i ω(x_i)` plus the sliver, for the `r^s ≈ 1` regime.
    prefix: Vec<f64>,
}

impl MomentRule {
    pub const X_MIN_EXPONENT: i32 = 100;

    pub fn new(w: &RadialWeight) -> Result<Self> {
        let x_min = 2f64.powi(-Self::X_MIN_EXPONENT);
        let mut breaks: Vec<f64> = (0..=Self::X_MIN_EXPONENT).map(|j| 2f64.powi(-j)).collect();
        breaks.extend(w.breakpoints().into_iter().filter(|&b| b > x_min && b < 1.0));
        breaks.sort_by(|a, b| a.total_cmp(b));
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs());
        let (gx, gw) = crate::quad::gauss_legendre(16);
        let mut xs = Vec::new();
        let mut ln_wd = Vec::new();
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let h = (b - a) / 4.0;
            for p in 0..4 {
                let lo = a + h * p as f64;
                for (t, wt) in gx.iter().zip(&gw) {
                    let x = lo + 0.5 * h * (t + 1.0);
                    xs.push(x);
                    ln_wd.push((0.5 * h * wt).ln() + w.log_density_x(x));
                }
            }
        }
        let form = w.density_form();
        let sliver = w.log_density_x(x_min)
            + x_min.ln()
            + form
                .ln_remainder_factor(x_min)
                .ok_or_else(|| Error::InvalidWeight(format!("{w} is not integrable")))?;
        let mut prefix = Vec::with_capacity(xs.len() + 1);
        let mut acc = sliver;
        prefix.push(acc);
        for v in &ln_wd {
            acc = crate::special::log_add_exp(acc, *v);
            prefix.push(acc);
        }
        let ln_r = xs.iter().map(|x: &f64| (-x).ln_1p()).collect();
        Ok(Self {
            xs,
            ln_r,
            ln_wd,
            prefix,
        })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// `ln ω_s`.
    pub fn log_moment(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::Domain(format!("moment order {s} must be finite and >= 0")));
        }
        // Below this node r^s = 1 to double precision.
        let flat = self.xs.partition_point(|&x| s * x < 1e-17);
        let mut max = self.prefix[flat];
        for i in flat..self.xs.len() {
            let v = s * self.ln_r[i] + self.ln_wd[i];
            if v > max {
                max = v;
            }
        }
        let cut = max - 45.0;
        let mut sum = (self.prefix[flat] - max).exp();
        for i in flat..self.xs.len() {
            let v = s * self.ln_r[i] + self.ln_wd[i];
            if v > cut {
                sum += (v - max).exp();
            }
        }
        Ok(max + sum.ln())
    }
}

/// `Σ_k binom(α,k)(−x/2)^k/(α+k+1)` so that the normalised tail is
/// `c_α 2^α x^{α+1}` times this sum.
fn normalized_tail_series(alpha: f64, x: f64) -> f64 {
    let mut binom = 1.0;
    let mut pow = 1.0;
    let mut sum = 0.0;
    for k in 0..400 {
        let kf = k as f64;
        let term = binom * pow / (alpha + kf + 1.0);
        sum += term;
        if k > 2 && term.abs() < 1e-17 * sum.abs() {
            break;
        }
        binom *= (alpha - kf) / (kf + 1.0);
        pow *= -x / 2.0;
    }
    sum
}

impl fmt::Display for RadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Power {
                alpha,
                normalized: None,
            } => write!(f, "power(alpha={alpha})"),
            Family::Power {
                alpha,
                normalized: Some(n),
            } => write!(f, "power(alpha={alpha},normalized={n})"),
            Family::LogPower { alpha, beta } => write!(f, "logpower(alpha={alpha},beta={beta})"),
            Family::ExpDecay { c, beta } => write!(f, "expdecay(c={c},beta={beta})"),
            Family::Tabulated(t) => match t.source {
                Some((alpha, kmax)) => write!(f, "tabulated(sample_alpha={alpha},kmax={kmax})"),
                None => {
                    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
                    write!(f, "tabulated(r={},w={})", join(&t.grid), join(&t.values))
                }
            },
            Family::TailQuotient(inner) => write!(f, "w1({inner})"),
        }
    }
}

/// Parse `family(key=value,...)`. `normalized=true` uses the dimension `n`.
pub fn parse_weight(spec: &str, n: u32) -> Result<RadialWeight> {
    let spec = spec.trim();
    let bad = |msg: &str| Error::Parse(format!("{msg} in weight spec `{spec}`"));
    let open = spec.find('(').ok_or_else(|| bad("missing `(`"))?;
    if !spec.ends_with(')') {
        return Err(bad("missing `)`"));
    }
    let name = spec[..open].trim().to_ascii_lowercase();
    let body = &spec[open + 1..spec.len() - 1];
    if name == "w1" {
        return parse_weight(body, n)?.w1_transform();
    }
    let mut params: Vec<(String, String)> = Vec::new();
    for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
        let (k, v) = (k.trim().to_ascii_lowercase(), v.trim().to_string());
        if v.is_empty() {
            return Err(bad(&format!("empty value for `{k}`")));
        }
        params.push((k, v));
    }
    let get = |key: &str| params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let real = |key: &str| -> Result<f64> {
        let v = get(key).ok_or_else(|| bad(&format!("missing `{key}`")))?;
        v.parse::<f64>().map_err(|_| bad(&format!("`{key}={v}` is not a number")))
    };
    let known = |keys: &[&str]| -> Result<()> {
        match params.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
            Some((k, _)) => Err(bad(&format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    };
    match name.as_str() {
        "power" => {
            known(&["alpha", "normalized"])?;
            let alpha = real("alpha")?;
            match get("normalized") {
                None | Some("false") => RadialWeight::power(alpha),
                Some("true") => RadialWeight::power_normalized(alpha, n),
                Some(v) => {
                    let dim = v.parse::<u32>().map_err(|_| bad("`normalized` must be true, false or a dimension"))?;
                    RadialWeight::power_normalized(alpha, dim)
                }
            }
        }
        "logpower" => {
            known(&["alpha", "beta"])?;
            RadialWeight::log_power(real("alpha")?, real("beta")?)
        }
        "expdecay" => {
            known(&["c", "beta"])?;
            RadialWeight::exp_decay(real("c")?, real("beta")?)
        }
        "tabulated" => {
            if get("sample_alpha").is_some() {
                known(&["sample_alpha", "kmax"])?;
                let kmax = real("kmax")?;
                if !((1.0..=500.0).contains(&kmax) && kmax.fract() == 0.0) {
                    return Err(bad("`kmax` must be an integer in 1..=500"));
                }
                RadialWeight::tabulated(Table::sampled_power(real("sample_alpha")?, kmax as u32)?)
            } else {
                known(&["r", "w"])?;
                let list = |key: &str| -> Result<Vec<f64>> {
                    get(key)
                        .ok_or_else(|| bad(&format!("missing `{key}`")))?
                        .split(';')
                        .map(|s| s.trim().parse::<f64>().map_err(|_| bad(&format!("bad number in `{key}`"))))
                        .collect()
                };
                RadialWeight::tabulated(Table::new(list("r")?, list("w")?)?)
            }
        }
        other => Err(bad(&format!("unknown family `{other}`"))),
    }
}

/// The weights exercised by the test suites and the default configuration.
pub fn shipped_corpus(n: u32) -> Vec<RadialWeight> {
    let specs = [
        "power(alpha=0)",
        "power(alpha=1)",
        "power(alpha=-0.5)",
        "power(alpha=2.5,normalized=true)",
        "logpower(alpha=0,beta=1)",
        "logpower(alpha=-1,beta=-2)",
        "expdecay(c=1,beta=1)",
        "tabulated(sample_alpha=0.5,kmax=24)",
    ];
    specs
        .iter()
        .map(|s| parse_weight(s, n).expect("shipped weight specs are valid"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Indeterminate,
}

impl Verdict {
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Yes, Verdict::Yes) => Verdict::Yes,
            (Verdict::No, _) | (_, Verdict::No) => Verdict::No,
            _ => Verdict::Indeterminate,
        }
    }

    pub fn is_yes(self) -> bool {
        self == Verdict::Yes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReverseDoubling {
    #[serde(serialize_with = "ser_f64")]
    pub c: f64,
    #[serde(serialize_with = "ser_f64")]
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassVerdicts {
    pub d_hat: Verdict,
    pub d_check: Verdict,
    pub d: Verdict,
    pub r: Verdict,
    pub i: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightClassReport {
    pub weight: String,
    #[serde(serialize_with = "ser_f64")]
    pub doubling_constant: f64,
    pub reverse_doubling: Option<ReverseDoubling>,
    #[serde(serialize_with = "ser_f64_pair")]
    pub regular_ratio_band: (f64, f64),
    pub rapid_increase: bool,
    #[serde(serialize_with = "ser_f64")]
    pub exponent_a: f64,
    #[serde(serialize_with = "ser_f64")]
    pub exponent_b: f64,
    #[serde(serialize_with = "ser_f64")]
    pub exponent_fit: f64,
    pub verdicts: ClassVerdicts,
    pub k_max: usize,
    pub notes: Vec<String>,
}

/// Slack for "essentially increasing/decreasing" envelope checks.
pub const ENVELOPE_SLACK: f64 = 4.0;
const STABLE: f64 = 0.1;

fn nondecreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0])
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn spread(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn classify(w: &RadialWeight, grid: &RadialGrid) -> Result<WeightClassReport> {
    if grid.scheme() != GridScheme::Dyadic || grid.len() < 21 {
        return Err(Error::Domain("classification needs a dyadic grid with K_max >= 20".into()));
    }
    let kmax = grid.len() - 1;
    let xs: Vec<f64> = (0..=kmax + 4).map(|k| 2f64.powi(-(k as i32))).collect();
    let lt: Vec<f64> = xs.iter().map(|&x| w.log_tail_x(x)).collect::<Result<_>>()?;
    let mut notes = Vec::new();

    // Doubling: d_k = ω̂(r_k)/ω̂(r_{k+1}).
    let ld: Vec<f64> = (0..kmax).map(|k| lt[k] - lt[k + 1]).collect();
    let last = &ld[kmax - 5..];
    let (lo, hi) = spread(last);
    let d_hat = if hi - lo < (1.0 + STABLE).ln() {
        Verdict::Yes
    } else if nondecreasing(last) && last[4] - last[0] >= 2f64.ln() {
        Verdict::No
    } else if nonincreasing(last) {
        Verdict::Yes
    } else {
        Verdict::Indeterminate
    };
    let doubling_constant = if d_hat == Verdict::No {
        f64::INFINITY
    } else {
        spread(&ld).1.exp()
    };

    // Reverse doubling for K = 2, 4, 8, 16.
    let mut reverse_doubling = None;
    let mut all_decay_to_one = true;
    for m in 1..=4usize {
        let le: Vec<f64> = (0..=kmax).map(|k| lt[k] - lt[k + m]).collect();
        let c = spread(&le).0.exp();
        let tail = &le[kmax - 4..];
        let (lo, hi) = spread(tail);
        let stable = hi > 0.0 && (hi - lo) / hi < STABLE;
        let decaying = nonincreasing(tail) && (tail[0] - tail[4]) / tail[0] >= STABLE;
        if !decaying {
            all_decay_to_one = false;
        }
        if reverse_doubling.is_none() && c > 1.0 && (stable || nondecreasing(tail)) {
            reverse_doubling = Some(ReverseDoubling {
                c,
                k: (1u32 << m) as f64,
            });
        }
    }
    let d_check = if reverse_doubling.is_some() {
        Verdict::Yes
    } else if all_decay_to_one {
        Verdict::No
    } else {
        Verdict::Indeterminate
    };

    // Local exponents of ω̂ against (1 − r) over the upper half of the grid.
    let k0 = kmax / 2;
    let local: Vec<f64> = (k0..kmax).map(|k| ld[k] / 2f64.ln()).collect();
    let (min_local, max_local) = spread(&local);
    let exponent_fit = {
        let pts: Vec<(f64, f64)> = (k0..=kmax).map(|k| (xs[k].ln(), lt[k])).collect();
        let nf = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    let slack = ENVELOPE_SLACK.ln();
    // ω̂/(1−r)^b essentially increasing in r, ω̂/(1−r)^a essentially decreasing.
    let envelope = |e: f64, increasing: bool| {
        let g: Vec<f64> = (k0..=kmax).map(|k| lt[k] - e * xs[k].ln()).collect();
        (0..g.len()).all(|i| {
            (i + 1..g.len()).all(|j| if increasing { g[i] <= g[j] + slack } else { g[j] <= g[i] + slack })
        })
    };
    let exponent_b = if envelope(exponent_fit, true) {
        exponent_fit
    } else {
        notes.push("least-squares exponent violates the D-hat envelope; using the maximal local exponent".into());
        max_local
    };
    let exponent_a = if envelope(exponent_fit, false) {
        exponent_fit
    } else {
        notes.push("least-squares exponent violates the reverse envelope; using the minimal local exponent".into());
        min_local
    };

    // Regularity ratio ω̂(t)/((1−t)ω(t)) on t ∈ [1/2, 1).
    let ratio: Vec<f64> = (1..=kmax)
        .map(|k| (lt[k] - xs[k].ln() - w.log_density_x(xs[k])).exp())
        .collect();
    let regular_ratio_band = spread(&ratio);
    let tail = &ratio[ratio.len() - 5..];
    let (lo, hi) = spread(tail);
    let stable = hi / lo < 1.0 + STABLE;
    let growing = nondecreasing(tail) && tail[4] / tail[0] >= 1.0 + STABLE;
    let shrinking = nonincreasing(tail) && tail[0] / tail[4] >= 1.0 + STABLE;
    let i = if growing {
        Verdict::Yes
    } else if stable || nonincreasing(tail) {
        Verdict::No
    } else {
        Verdict::Indeterminate
    };
    let d = d_hat.and(d_check);
    let r = if growing || shrinking || d == Verdict::No {
        Verdict::No
    } else if stable && d == Verdict::Yes {
        Verdict::Yes
    } else {
        Verdict::Indeterminate
    };
    let mut verdicts = ClassVerdicts {
        d_hat,
        d_check,
        d,
        r,
        i,
    };

    if let Family::Tabulated(t) = &w.family {
        if t.last_gap() > xs[kmax] {
            notes.push(format!(
                "table ends at r = {} before the grid end 1 - 2^-{kmax}",
                1.0 - t.last_gap()
            ));
            verdicts = ClassVerdicts {
                d_hat: Verdict::Indeterminate,
                d_check: Verdict::Indeterminate,
                d: Verdict::Indeterminate,
                r: Verdict::Indeterminate,
                i: Verdict::Indeterminate,
            };
        }
    }

    Ok(WeightClassReport {
        weight: w.to_string(),
        doubling_constant,
        reverse_doubling,
        regular_ratio_band,
        rapid_increase: verdicts.i.is_yes(),
        exponent_a,
        exponent_b,
        exponent_fit,
        verdicts,
        k_max: kmax,
        notes,
    })
}
