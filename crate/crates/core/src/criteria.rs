//! Boundedness of `P_ω` and `P_ω⁺` on `L^p_υ`: the `M`, `N`, `K*` and `H`
//! quantities, a Schur-test check and the g_j adjoint chain.

use serde::Serialize;

use crate::asymptotics::TailForm;
use crate::ballgeom::{check_dim, RadialGrid};
use crate::error::{Error, Result};
use crate::fmt::{ser_f64, ser_f64_vec};
use crate::projection::adjoint_on_gj;
use crate::quad::{fixed_gauss, gl32, log_integrate, log_integrate_dyadic, log_integrate_from_zero_with_kinks};
use crate::special::log_add_exp;
use crate::weights::{Family, RadialWeight, WeightClassReport};

/// Relative tolerance for the inner and outer radial integrals.
pub const CRITERIA_TOL: f64 = 1e-12;

/// Growth rate (in `d ln f / d ln(1/(1−r))`) above which a curve counts as growing.
pub const GROWTH_EPS: f64 = 0.01;

/// Largest `j` in the adjoint chain.
pub const GJ_MAX: u32 = 32;

/// Octaves at which the shell-ratio divergence test samples the boundary.
const SHELL_OCTAVES: std::ops::RangeInclusive<i32> = 60..=64;

#[derive(Debug, Clone)]
pub struct WeightPair {
    omega: RadialWeight,
    upsilon: RadialWeight,
    p: f64,
    q: f64,
    n: usize,
    omega_report: WeightClassReport,
    upsilon_report: WeightClassReport,
}

impl WeightPair {
    /// Classifies both weights on `dyadic(20)`.
    pub fn new(omega: RadialWeight, upsilon: RadialWeight, p: f64, n: usize) -> Result<Self> {
        let grid = RadialGrid::dyadic(20);
        let ro = omega.classify(&grid)?;
        let ru = upsilon.classify(&grid)?;
        Self::with_reports(omega, upsilon, p, n, ro, ru)
    }

    pub fn with_reports(
        omega: RadialWeight,
        upsilon: RadialWeight,
        p: f64,
        n: usize,
        omega_report: WeightClassReport,
        upsilon_report: WeightClassReport,
    ) -> Result<Self> {
        check_dim(n)?;
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Domain(format!("exponent p = {p} must satisfy 1 < p < inf")));
        }
        Ok(Self {
            omega,
            upsilon,
            p,
            q: p / (p - 1.0),
            n,
            omega_report,
            upsilon_report,
        })
    }

    pub fn omega(&self) -> &RadialWeight {
        &self.omega
    }

    pub fn upsilon(&self) -> &RadialWeight {
        &self.upsilon
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn reports(&self) -> (&WeightClassReport, &WeightClassReport) {
        (&self.omega_report, &self.upsilon_report)
    }

    /// Both weights were classified as D.
    pub fn in_class_d(&self) -> bool {
        self.omega_report.verdicts.d.is_yes() && self.upsilon_report.verdicts.d.is_yes()
    }

    fn has_table(&self) -> bool {
        let tab = |w: &RadialWeight| matches!(w.family(), Family::Tabulated(_));
        tab(&self.omega) || tab(&self.upsilon)
    }

    fn kinks(&self) -> Vec<f64> {
        let mut k = self.omega.breakpoints();
        k.extend(self.upsilon.breakpoints());
        k.sort_by(|a, b| a.total_cmp(b));
        k.dedup();
        k
    }

    /// Boundary form of `ω^q υ^{1−q}`.
    fn inner_form(&self) -> TailForm {
        self.omega
            .density_form()
            .powf(self.q)
            .mul(&self.upsilon.density_form().powf(1.0 - self.q))
    }

    /// `ln` of the inner integrand `ω^q υ^{1−q} s^{2n−1}` at `s = 1 − x`.
    fn ln_inner_integrand(&self, x: f64) -> f64 {
        let k = (2 * self.n - 1) as f64;
        self.q * self.omega.log_density_x(x) + (1.0 - self.q) * self.upsilon.log_density_x(x) + k * (-x).ln_1p()
    }

    /// Whether `∫^1 ω^q/υ^{q−1}` diverges at the boundary.
    ///
    /// Closed families go by exponent arithmetic; tables by the ratio of
    /// successive dyadic shells far past the last knot.
    pub fn inner_divergent(&self) -> Result<bool> {
        if !self.has_table() {
            return Ok(!self.inner_form().integrable_at_zero());
        }
        let mut prev: Option<f64> = None;
        let mut growing = true;
        for k in SHELL_OCTAVES {
            let hi = 2f64.powi(-k);
            let shell = log_integrate(|x| self.ln_inner_integrand(x), 0.5 * hi, hi, 1e-8)?.log_value;
            if let Some(p) = prev {
                growing &= shell - p >= -1e-9;
            }
            prev = Some(shell);
        }
        Ok(growing)
    }

    /// `ln ∫_r^1 ω^q υ^{1−q} s^{2n−1} ds`, `+∞` when divergent.
    pub fn ln_inner(&self, r: f64) -> Result<f64> {
        check_r(r)?;
        if self.inner_divergent()? {
            return Ok(f64::INFINITY);
        }
        self.ln_inner_converged(1.0 - r)
    }

    fn ln_inner_converged(&self, x: f64) -> Result<f64> {
        let form = self.inner_form();
        let kinks = self.kinks();
        match log_integrate_from_zero_with_kinks(|y| self.ln_inner_integrand(y), Some(&form), x, CRITERIA_TOL, &kinks) {
            Ok(li) => Ok(li.log_value),
            Err(Error::Divergent(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    }

    /// `ln ∫_{r0}^{r1} υ(s)/ω̂(s)^p s^{2n−1} ds` for `0 ≤ r0 ≤ r1 < 1`.
    fn ln_outer_between(&self, r0: f64, r1: f64) -> Result<f64> {
        if r1 <= r0 {
            return Ok(f64::NEG_INFINITY);
        }
        let k = (2 * self.n - 1) as f64;
        let lf = |x: f64| {
            let tail = self.omega.log_tail_x(x).unwrap_or(f64::NAN);
            self.upsilon.log_density_x(x) - self.p * tail + k * (-x).ln_1p()
        };
        Ok(log_integrate_dyadic(lf, 1.0 - r1, 1.0 - r0, CRITERIA_TOL)?.log_value)
    }

    /// `ln ∫_0^r υ/ω̂^p s^{2n−1} ds`.
    pub fn ln_outer(&self, r: f64) -> Result<f64> {
        check_r(r)?;
        self.ln_outer_between(0.0, r)
    }

    fn ln_tails(&self, r: f64) -> Result<(f64, f64)> {
        if r == 0.0 {
            return Ok((self.omega.ln_mass(), self.upsilon.ln_mass()));
        }
        Ok((self.omega.log_tail_x(1.0 - r)?, self.upsilon.log_tail_x(1.0 - r)?))
    }
}

fn check_r(r: f64) -> Result<()> {
    if (0.0..1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius {r} outside [0, 1)")))
    }
}

fn ln_m(pair: &WeightPair, ln_i: f64, ln_wt: f64, ln_vt: f64) -> f64 {
    ln_vt / pair.p - ln_wt + ln_i / pair.q
}

fn ln_h(pair: &WeightPair, ln_i: f64, ln_wt: f64, ln_vt: f64) -> f64 {
    (pair.q - 1.0) * ln_vt - pair.q * ln_wt + ln_i
}

/// `M(r) = υ̂(r)^{1/p}/ω̂(r) · (∫_r^1 ω^q/υ^{q−1} s^{2n−1})^{1/q}`.
pub fn m_value(pair: &WeightPair, r: f64) -> Result<f64> {
    let ln_i = pair.ln_inner(r)?;
    if ln_i == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let (wt, vt) = pair.ln_tails(r)?;
    Ok(ln_m(pair, ln_i, wt, vt).exp())
}

/// `N(r) = (∫_0^r υ/ω̂^p s^{2n−1} + 1)^{1/p} · (∫_r^1 ω^q/υ^{q−1} s^{2n−1})^{1/q}`.
pub fn n_value(pair: &WeightPair, r: f64) -> Result<f64> {
    let ln_i = pair.ln_inner(r)?;
    if ln_i == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let ln_j = pair.ln_outer(r)?;
    Ok((log_add_exp(ln_j, 0.0) / pair.p + ln_i / pair.q).exp())
}

/// `K*(r) = (∫_r^1 ω^q/υ^{q−1} t^{2n−1})^{1/q} · (∫_0^r υ/ω̂^p t^{2n−1})^{1/p}`.
pub fn kstar_value(pair: &WeightPair, r: f64) -> Result<f64> {
    let ln_i = pair.ln_inner(r)?;
    if ln_i == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let ln_j = pair.ln_outer(r)?;
    Ok((ln_j / pair.p + ln_i / pair.q).exp())
}

/// `H(t) = υ̂(t)^{q−1}/ω̂(t)^q · ∫_t^1 ω^q/υ^{q−1} r^{2n−1}`.
pub fn h_value(pair: &WeightPair, t: f64) -> Result<f64> {
    let ln_i = pair.ln_inner(t)?;
    if ln_i == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let (wt, vt) = pair.ln_tails(t)?;
    Ok(ln_h(pair, ln_i, wt, vt).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundedness {
    Bounded,
    Unbounded,
    Indeterminate,
}

/// How the growth of one curve was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    /// Exponent arithmetic on the boundary forms.
    Asymptotic,
    /// Slopes of the sampled curve.
    Numeric,
    /// The inner integral diverges.
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    #[serde(serialize_with = "ser_f64_vec")]
    pub values: Vec<f64>,
    /// `sup` over the grid, or `+∞` when the curve is unbounded.
    #[serde(serialize_with = "ser_f64")]
    pub sup: f64,
    /// Growth rate at the end of the grid, extrapolated from the last octaves.
    #[serde(serialize_with = "ser_f64")]
    pub tail_growth: f64,
    pub status: Boundedness,
    pub decided_by: Decision,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Consistency {
    /// `finite(M) = finite(N) = finite(K*)`.
    pub finite_agree: bool,
    /// `K*(r) ≤ N(r)` at every node.
    pub kstar_le_n: bool,
    /// `max |ln H − q ln M|` over the grid.
    #[serde(serialize_with = "ser_f64")]
    pub h_identity_error: f64,
    /// g_j ratios bounded (bounded pairs) or growing (unbounded pairs).
    pub gj_consistent: bool,
    /// Symbolic and sampled verdicts agree (pairs without tables).
    pub numeric_agrees: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GjPoint {
    pub j: u32,
    #[serde(serialize_with = "ser_f64")]
    pub r: f64,
    #[serde(serialize_with = "ser_f64")]
    pub ratio: f64,
    /// `H(r_j)^{1/q}`.
    #[serde(serialize_with = "ser_f64")]
    pub h_root: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub omega: String,
    pub upsilon: String,
    #[serde(serialize_with = "ser_f64")]
    pub p: f64,
    pub n: usize,
    #[serde(serialize_with = "ser_f64_vec")]
    pub radii: Vec<f64>,
    pub m_curve: Curve,
    pub n_curve: Curve,
    pub kstar_curve: Curve,
    #[serde(serialize_with = "ser_f64_vec")]
    pub h_curve: Vec<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub m: f64,
    #[serde(serialize_with = "ser_f64")]
    pub n_sup: f64,
    #[serde(serialize_with = "ser_f64")]
    pub kstar: f64,
    pub inner_divergent: bool,
    pub verdict: Boundedness,
    pub gj_ratios: Vec<GjPoint>,
    /// `min_j ratio_j / H(r_j)^{1/q}`.
    #[serde(serialize_with = "ser_f64")]
    pub gj_lower_constant: f64,
    pub consistency: Consistency,
    /// Set when ω or υ was not classified as D.
    pub caveat: Option<String>,
    pub notes: Vec<String>,
}

/// Per-octave growth rates `d ln f / d ln(1/x)` over the last `count` octaves.
fn octave_growth(gaps: &[f64], logs: &[f64], count: usize) -> Vec<f64> {
    let last = gaps.len() - 1;
    let mut out = Vec::new();
    let mut i = last;
    while out.len() < count {
        // j: first node at least one octave before i
        let Some(j) = (0..i).rev().find(|&j| gaps[j] >= 2.0 * gaps[i] * (1.0 - 1e-12)) else {
            break;
        };
        out.push((logs[i] - logs[j]) / (gaps[j] / gaps[i]).ln());
        i = j;
    }
    out.reverse();
    out
}

fn numeric_status(gaps: &[f64], logs: &[f64]) -> (Boundedness, f64) {
    if logs.iter().any(|v| v.is_infinite() && *v > 0.0) {
        return (Boundedness::Unbounded, f64::INFINITY);
    }
    let g = octave_growth(gaps, logs, 5);
    if g.len() < 2 {
        return (Boundedness::Indeterminate, f64::NAN);
    }
    let last = g[g.len() - 1];
    // Aitken's delta-squared on the last three rates; geometric decay extrapolates to 0.
    let extrapolated = if g.len() >= 3 {
        let (g1, g2, g3) = (g[g.len() - 3], g[g.len() - 2], last);
        let (d1, d2) = (g2 - g1, g3 - g2);
        let ratio = d2 / d1;
        if d1 != 0.0 && ratio > 0.0 && ratio < 1.0 {
            g3 - d2 * d2 / (d2 - d1)
        } else {
            last
        }
    } else {
        last
    };
    let status = if g.iter().all(|&s| s >= GROWTH_EPS) && extrapolated > GROWTH_EPS {
        Boundedness::Unbounded
    } else if extrapolated <= GROWTH_EPS {
        Boundedness::Bounded
    } else {
        Boundedness::Indeterminate
    };
    (status, extrapolated)
}

struct Forms {
    m: Option<TailForm>,
    n: Option<TailForm>,
    kstar: Option<TailForm>,
}

fn symbolic_forms(pair: &WeightPair) -> Forms {
    let none = Forms {
        m: None,
        n: None,
        kstar: None,
    };
    if pair.has_table() {
        return none;
    }
    let Some(i) = pair.inner_form().integral_from_zero() else {
        return none;
    };
    let i_root = i.powf(1.0 / pair.q);
    let wt = pair.omega.tail_form();
    let vt = pair.upsilon.tail_form();
    let m = vt.powf(1.0 / pair.p).mul(&wt.recip()).mul(&i_root);
    let j = pair
        .upsilon
        .density_form()
        .mul(&wt.powf(-pair.p))
        .integral_to_one();
    let n = j
        .as_ref()
        .map(|j| TailForm::dominant(j, &TailForm::constant()).powf(1.0 / pair.p).mul(&i_root));
    let kstar = j.map(|j| j.powf(1.0 / pair.p).mul(&i_root));
    Forms {
        m: Some(m),
        n,
        kstar,
    }
}

fn curve(values: Vec<f64>, gaps: &[f64], form: Option<&TailForm>) -> (Curve, Option<Boundedness>) {
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (numeric, growth) = numeric_status(gaps, &logs);
    let (status, decided_by) = match form {
        Some(f) if f.is_bounded() => (Boundedness::Bounded, Decision::Asymptotic),
        Some(_) => (Boundedness::Unbounded, Decision::Asymptotic),
        None => (numeric, Decision::Numeric),
    };
    let sup = match status {
        Boundedness::Unbounded => f64::INFINITY,
        _ => values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    };
    let numeric_opinion = form.map(|_| numeric);
    (
        Curve {
            values,
            sup,
            tail_growth: growth,
            status,
            decided_by,
        },
        numeric_opinion,
    )
}

fn divergent_curve(len: usize) -> Curve {
    Curve {
        values: vec![f64::INFINITY; len],
        sup: f64::INFINITY,
        tail_growth: f64::INFINITY,
        status: Boundedness::Unbounded,
        decided_by: Decision::Divergent,
    }
}

fn gj_chain(pair: &WeightPair, divergent: bool) -> Result<Vec<GjPoint>> {
    (0..=GJ_MAX)
        .map(|j| {
            let r = 1.0 - 1.0 / (2 * j + 1) as f64;
            let ratio = adjoint_on_gj(&pair.omega, &pair.upsilon, j, pair.n, pair.p, false)?.ratio;
            let h_root = if divergent {
                f64::INFINITY
            } else {
                let ln_i = pair.ln_inner_converged(1.0 - r)?;
                let (wt, vt) = pair.ln_tails(r)?;
                (ln_h(pair, ln_i, wt, vt) / pair.q).exp()
            };
            Ok(GjPoint { j, r, ratio, h_root })
        })
        .collect()
}

/// Evaluate every criterion along `grid` and decide boundedness.
pub fn decide(pair: &WeightPair, grid: &RadialGrid) -> Result<CriterionReport> {
    if grid.len() < 3 {
        return Err(Error::Domain("criteria need at least three radii".into()));
    }
    let gaps = grid.gaps().to_vec();
    let radii = grid.nodes();
    let mut notes = Vec::new();
    let caveat = (!pair.in_class_d()).then(|| {
        format!(
            "weights not both in D (omega: {:?}, upsilon: {:?}); the criteria are not known to be equivalent here",
            pair.omega_report.verdicts.d, pair.upsilon_report.verdicts.d
        )
    });
    let divergent = pair.inner_divergent()?;
    let len = radii.len();

    let (m_curve, n_curve, kstar_curve, h_curve, h_err, numeric_agrees) = if divergent {
        notes.push("inner integral diverges at the boundary".into());
        (
            divergent_curve(len),
            divergent_curve(len),
            divergent_curve(len),
            vec![f64::INFINITY; len],
            0.0,
            None,
        )
    } else {
        let mut ln_m_vals = Vec::with_capacity(len);
        let mut ln_n_vals = Vec::with_capacity(len);
        let mut ln_k_vals = Vec::with_capacity(len);
        let mut h_vals = Vec::with_capacity(len);
        let mut h_err: f64 = 0.0;
        let mut ln_j = f64::NEG_INFINITY;
        let mut prev_r = 0.0;
        for (&r, &x) in radii.iter().zip(&gaps) {
            let ln_i = pair.ln_inner_converged(x)?;
            ln_j = log_add_exp(ln_j, pair.ln_outer_between(prev_r, r)?);
            prev_r = r;
            let (wt, vt) = pair.ln_tails(r)?;
            let lm = ln_m(pair, ln_i, wt, vt);
            let lh = ln_h(pair, ln_i, wt, vt);
            h_err = h_err.max((lh - pair.q * lm).abs());
            ln_m_vals.push(lm);
            ln_n_vals.push(log_add_exp(ln_j, 0.0) / pair.p + ln_i / pair.q);
            ln_k_vals.push(ln_j / pair.p + ln_i / pair.q);
            h_vals.push(lh.exp());
        }
        let exp = |v: Vec<f64>| v.into_iter().map(f64::exp).collect::<Vec<_>>();
        let forms = symbolic_forms(pair);
        let (mc, m_num) = curve(exp(ln_m_vals), &gaps, forms.m.as_ref());
        let (nc, n_num) = curve(exp(ln_n_vals), &gaps, forms.n.as_ref());
        let (kc, k_num) = curve(exp(ln_k_vals), &gaps, forms.kstar.as_ref());
        let agree = |c: &Curve, num: Option<Boundedness>| {
            num.map(|b| b == c.status || b == Boundedness::Indeterminate)
        };
        let opinions = [agree(&mc, m_num), agree(&nc, n_num), agree(&kc, k_num)];
        let numeric_agrees = if opinions.iter().all(Option::is_some) {
            Some(opinions.iter().all(|o| *o == Some(true)))
        } else {
            None
        };
        (mc, nc, kc, h_vals, h_err, numeric_agrees)
    };

    let statuses = [m_curve.status, n_curve.status, kstar_curve.status];
    let verdict = if divergent {
        Boundedness::Unbounded
    } else if statuses.iter().all(|s| *s == Boundedness::Bounded) {
        Boundedness::Bounded
    } else if statuses.contains(&Boundedness::Unbounded) && !statuses.contains(&Boundedness::Bounded) {
        Boundedness::Unbounded
    } else {
        if statuses.contains(&Boundedness::Bounded) && statuses.contains(&Boundedness::Unbounded) {
            notes.push("M, N and K* disagree on finiteness".into());
        }
        Boundedness::Indeterminate
    };

    let finite = |c: &Curve| c.sup.is_finite();
    let finite_agree = finite(&m_curve) == finite(&n_curve) && finite(&n_curve) == finite(&kstar_curve);
    let kstar_le_n = kstar_curve
        .values
        .iter()
        .zip(&n_curve.values)
        .all(|(k, n)| !(k > n) || (k.is_infinite() && n.is_infinite()) || *k <= n * (1.0 + 1e-12));

    let gj = gj_chain(pair, divergent)?;
    let gj_lower_constant = gj
        .iter()
        .map(|g| g.ratio / g.h_root)
        .filter(|c| !c.is_nan())
        .fold(f64::INFINITY, f64::min);
    let gj_consistent = match verdict {
        Boundedness::Bounded => {
            gj.iter().all(|g| g.ratio.is_finite()) && gj_lower_constant > 0.0 && gj_lower_constant.is_finite()
        }
        Boundedness::Unbounded => {
            let tail = &gj[gj.len() - 8..];
            tail.iter().all(|g| g.ratio == f64::INFINITY) || tail.windows(2).all(|w| w[1].ratio > w[0].ratio)
        }
        Boundedness::Indeterminate => true,
    };
    if numeric_agrees == Some(false) {
        notes.push("sampled growth disagrees with the boundary asymptotics".into());
    }

    Ok(CriterionReport {
        omega: pair.omega.to_string(),
        upsilon: pair.upsilon.to_string(),
        p: pair.p,
        n: pair.n,
        radii,
        m: m_curve.sup,
        n_sup: n_curve.sup,
        kstar: kstar_curve.sup,
        m_curve,
        n_curve,
        kstar_curve,
        h_curve,
        inner_divergent: divergent,
        verdict,
        gj_ratios: gj,
        gj_lower_constant,
        consistency: Consistency {
            finite_agree,
            kstar_le_n,
            h_identity_error: h_err,
            gj_consistent,
            numeric_agrees,
        },
        caveat,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchurReport {
    /// Set when the check was skipped (`M = ∞`).
    pub skipped: Option<String>,
    #[serde(serialize_with = "ser_f64_vec")]
    pub radii: Vec<f64>,
    /// `∫_t^1 (ω/h)^q s^{2n−1} ds`.
    #[serde(serialize_with = "ser_f64_vec")]
    pub lhs: Vec<f64>,
    /// `q · (∫_t^1 ω^q/υ^{q−1} s^{2n−1})^{1/q}`.
    #[serde(serialize_with = "ser_f64_vec")]
    pub closed_form: Vec<f64>,
    /// `lhs / (M ω̂(t)/υ̂(t)^{1/p})`.
    #[serde(serialize_with = "ser_f64_vec")]
    pub ratio: Vec<f64>,
    /// `max` of `ratio`.
    #[serde(serialize_with = "ser_f64")]
    pub constant: f64,
    /// `max |lhs − closed_form| / closed_form`.
    #[serde(serialize_with = "ser_f64")]
    pub algebra_error: f64,
}

/// `ln I` at gap `y` without re-integrating from zero: cumulative values at
/// dyadic and knot boundaries plus one Gauss rule inside the panel.
struct InnerTable<'a> {
    pair: &'a WeightPair,
    bounds: Vec<f64>,
    ln_at: Vec<f64>,
}

impl<'a> InnerTable<'a> {
    fn new(pair: &'a WeightPair, x_max: f64) -> Result<Self> {
        let mut bounds: Vec<f64> = (0..=60).map(|k| 2f64.powi(-k)).filter(|&b| b < x_max).collect();
        bounds.push(x_max);
        let lo = bounds[0];
        bounds.extend(pair.kinks().into_iter().filter(|&k| k > lo && k < x_max));
        bounds.sort_by(|a, b| a.total_cmp(b));
        bounds.dedup();
        let mut ln_at = Vec::with_capacity(bounds.len());
        ln_at.push(pair.ln_inner_converged(bounds[0])?);
        for w in bounds.windows(2) {
            let piece = log_integrate(|y| pair.ln_inner_integrand(y), w[0], w[1], CRITERIA_TOL)?.log_value;
            ln_at.push(log_add_exp(*ln_at.last().unwrap(), piece));
        }
        Ok(Self { pair, bounds, ln_at })
    }

    fn ln_inner(&self, y: f64) -> f64 {
        if y <= self.bounds[0] {
            return self.pair.ln_inner_converged(y).unwrap_or(f64::NAN);
        }
        let k = self.bounds.partition_point(|&b| b < y) - 1;
        let a = self.bounds[k];
        let shift = self.pair.ln_inner_integrand(a);
        let piece = fixed_gauss(|t| (self.pair.ln_inner_integrand(t) - shift).exp(), a, y, gl32());
        log_add_exp(self.ln_at[k], piece.ln() + shift)
    }
}

/// Schur-test integral with the test function `h = υ^{1/p} I^{1/(pq)}`.
pub fn schur_test_check(pair: &WeightPair, grid: &RadialGrid) -> Result<SchurReport> {
    let radii = grid.nodes();
    let skipped = |why: &str| SchurReport {
        skipped: Some(why.to_string()),
        radii: radii.clone(),
        lhs: Vec::new(),
        closed_form: Vec::new(),
        ratio: Vec::new(),
        constant: f64::INFINITY,
        algebra_error: f64::NAN,
    };
    if pair.inner_divergent()? {
        return Ok(skipped("M is infinite: the inner integral diverges"));
    }
    let fine = RadialGrid::dyadic(grid.gaps().iter().map(|x| -x.log2()).fold(0.0, f64::max).ceil() as usize + 4);
    let report = decide(pair, &fine)?;
    if !report.m.is_finite() {
        return Ok(skipped("M is infinite"));
    }
    let m = report.m;
    let form = pair.inner_form();
    let i_form = form.integral_from_zero();
    let outer_form = i_form.as_ref().map(|i| form.mul(&i.powf(-1.0 / pair.p)));
    let kinks = pair.kinks();
    let inv_p = 1.0 / pair.p;
    let x_max = grid.gaps().iter().cloned().fold(0.0, f64::max);
    let table = InnerTable::new(pair, x_max)?;
    let lf = |y: f64| {
        let li = table.ln_inner(y);
        pair.ln_inner_integrand(y) - inv_p * li
    };
    let mut lhs = Vec::with_capacity(radii.len());
    let mut closed = Vec::with_capacity(radii.len());
    let mut ratio = Vec::with_capacity(radii.len());
    let mut algebra_error: f64 = 0.0;
    for (&r, &x) in radii.iter().zip(grid.gaps()) {
        let l = log_integrate_from_zero_with_kinks(lf, outer_form.as_ref(), x, 1e-11, &kinks)?.log_value;
        let ln_i = pair.ln_inner_converged(x)?;
        let c = pair.q.ln() + ln_i / pair.q;
        let (wt, vt) = pair.ln_tails(r)?;
        let bound = m.ln() + wt - vt / pair.p;
        algebra_error = algebra_error.max(((l - c).exp() - 1.0).abs());
        lhs.push(l.exp());
        closed.push(c.exp());
        ratio.push((l - bound).exp());
    }
    let constant = ratio.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(SchurReport {
        skipped: None,
        radii,
        lhs,
        closed_form: closed,
        ratio,
        constant,
        algebra_error,
    })
}

/// Classical answer for power weights: bounded iff `p(α+1) > β+1`.
pub fn power_pair_oracle(alpha: f64, beta: f64, p: f64) -> bool {
    p * (alpha + 1.0) > beta + 1.0
}

/// The 75 `(α, β, p)` combinations of the power oracle.
pub fn power_oracle_grid() -> Vec<(f64, f64, f64)> {
    let exps = [-0.5, 0.0, 1.0, 2.0, 3.5];
    let ps = [1.25, 2.0, 4.0];
    let mut out = Vec::with_capacity(75);
    for &a in &exps {
        for &b in &exps {
            for &p in &ps {
                out.push((a, b, p));
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CorpusPair {
    pub id: String,
    pub pair: WeightPair,
    /// Closed-form verdict where one is known.
    pub oracle: Option<bool>,
}

/// Build pairs from weight specs, classifying each distinct weight once.
pub fn build_pairs(specs: &[(String, RadialWeight, RadialWeight, f64, Option<bool>)], n: usize) -> Result<Vec<CorpusPair>> {
    let grid = RadialGrid::dyadic(20);
    let mut cache: Vec<(String, WeightClassReport)> = Vec::new();
    let mut report = |w: &RadialWeight| -> Result<WeightClassReport> {
        let key = w.to_string();
        if let Some((_, r)) = cache.iter().find(|(k, _)| *k == key) {
            return Ok(r.clone());
        }
        let r = w.classify(&grid)?;
        cache.push((key, r.clone()));
        Ok(r)
    };
    specs
        .iter()
        .map(|(id, w, v, p, oracle)| {
            let (rw, rv) = (report(w)?, report(v)?);
            Ok(CorpusPair {
                id: id.clone(),
                pair: WeightPair::with_reports(w.clone(), v.clone(), *p, n, rw, rv)?,
                oracle: *oracle,
            })
        })
        .collect()
}

/// The 75 unnormalised power pairs of [`power_oracle_grid`], oracle attached.
pub fn power_corpus(n: usize) -> Result<Vec<CorpusPair>> {
    let specs = power_oracle_grid()
        .into_iter()
        .map(|(a, b, p)| {
            Ok((
                format!("power-a{a}-b{b}-p{p}"),
                RadialWeight::power(a)?,
                RadialWeight::power(b)?,
                p,
                Some(power_pair_oracle(a, b, p)),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    build_pairs(&specs, n)
}

/// Forty pairs: 20 power × power, 10 power × logpower, 10 logpower × power.
pub fn mixed_corpus(n: usize) -> Result<Vec<CorpusPair>> {
    let mut specs = Vec::with_capacity(40);
    for &a in &[0.0, 1.0] {
        for &b in &[0.0, 1.0, 2.0, 3.0, 4.0] {
            for &p in &[1.5, 3.0] {
                specs.push((
                    format!("power-a{a}-b{b}-p{p}"),
                    RadialWeight::power(a)?,
                    RadialWeight::power(b)?,
                    p,
                    Some(power_pair_oracle(a, b, p)),
                ));
            }
        }
    }
    let logs = [(0.0, 1.0), (1.0, 2.0), (1.0, -1.0), (2.0, 1.0), (3.0, 0.5)];
    for &a in &[0.0, 1.0] {
        for &(b, g) in &logs {
            specs.push((
                format!("power-a{a}-logpower-b{b}-g{g}"),
                RadialWeight::power(a)?,
                RadialWeight::log_power(b, g)?,
                2.0,
                None,
            ));
        }
    }
    let logs = [(1.0, 0.0), (1.0, 1.0), (-1.0, 1.0), (2.0, 2.0), (0.5, 3.0)];
    for &a in &[0.0, 1.0] {
        for &(g, b) in &logs {
            specs.push((
                format!("logpower-a{a}-g{g}-power-b{b}"),
                RadialWeight::log_power(a, g)?,
                RadialWeight::power(b)?,
                2.0,
                None,
            ));
        }
    }
    build_pairs(&specs, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pair(a: f64, b: f64, p: f64) -> WeightPair {
        WeightPair::new(RadialWeight::power(a).unwrap(), RadialWeight::power(b).unwrap(), p, 2).unwrap()
    }

    #[test]
    fn lebesgue_pair_closed_forms() {
        // ω = υ = 1, p = q = 2, n = 2: I(r) = (1 − r⁴)/4, ω̂ = υ̂ = 1 − r.
        let pr = pair(0.0, 0.0, 2.0);
        for &r in &[0.0f64, 0.3, 0.9, 0.999] {
            let i: f64 = (1.0 - r.powi(4)) / 4.0;
            let m = (1.0 - r).powf(0.5) / (1.0 - r) * i.sqrt();
            assert_relative_eq!(m_value(&pr, r).unwrap(), m, max_relative = 1e-10);
            // ∫_0^r s³/(1−s)² ds
            let j_direct = {
                // s³ = (1 − u)³ with u = 1 − s: ∫ (1 − 3u + 3u² − u³)/u² du from 1 − r to 1
                let u0 = 1.0 - r;
                (1.0 / u0 - 1.0) + 3.0 * u0.ln() + 3.0 * (1.0 - u0) - (1.0 - u0 * u0) / 2.0
            };
            assert_relative_eq!(n_value(&pr, r).unwrap(), (j_direct + 1.0).sqrt() * i.sqrt(), max_relative = 1e-9);
            if r > 0.0 {
                assert_relative_eq!(kstar_value(&pr, r).unwrap(), j_direct.sqrt() * i.sqrt(), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn divergent_pair_is_infinite() {
        let pr = pair(0.0, 2.0, 2.0);
        assert!(pr.inner_divergent().unwrap());
        assert_eq!(m_value(&pr, 0.5).unwrap(), f64::INFINITY);
        assert_eq!(h_value(&pr, 0.5).unwrap(), f64::INFINITY);
        let rep = decide(&pr, &RadialGrid::dyadic(12)).unwrap();
        assert_eq!(rep.verdict, Boundedness::Unbounded);
        assert!(rep.consistency.finite_agree);
        let s = schur_test_check(&pr, &RadialGrid::dyadic(8)).unwrap();
        assert!(s.skipped.is_some());
    }

    #[test]
    fn n_at_origin_is_inner_root() {
        let pr = pair(1.0, 0.5, 3.0);
        let inner = pr.ln_inner(0.0).unwrap();
        assert_relative_eq!(n_value(&pr, 0.0).unwrap(), (inner / pr.q()).exp(), max_relative = 1e-14);
    }

    #[test]
    fn h_is_m_to_the_q() {
        let pr = pair(1.0, 2.0, 4.0);
        for &t in &[0.0, 0.5, 0.99] {
            let h = h_value(&pr, t).unwrap();
            let m = m_value(&pr, t).unwrap();
            assert_relative_eq!(h, m.powf(pr.q()), max_relative = 1e-10);
        }
    }

    #[test]
    fn lebesgue_pair_bounded() {
        let rep = decide(&pair(0.0, 0.0, 2.0), &RadialGrid::dyadic(20)).unwrap();
        assert_eq!(rep.verdict, Boundedness::Bounded);
        assert!(rep.m.is_finite() && rep.n_sup.is_finite() && rep.kstar.is_finite());
        assert!(rep.consistency.kstar_le_n && rep.consistency.gj_consistent);
        assert_eq!(rep.consistency.numeric_agrees, Some(true));
        assert!(rep.caveat.is_none());
    }

    #[test]
    fn schur_lebesgue_pair() {
        let s = schur_test_check(&pair(0.0, 0.0, 2.0), &RadialGrid::dyadic(12)).unwrap();
        assert!(s.skipped.is_none());
        assert!(s.algebra_error < 1e-10, "{}", s.algebra_error);
        assert!(s.constant.is_finite());
        let (lo, hi) = s.ratio.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi / lo < 2.0);
    }

    #[test]
    fn borderline_log_pair_unbounded_with_finite_inner() {
        // ω = 1, υ = (1−r) L², p = 2: ω²/υ ~ x^{-1} L^{-2} is integrable but M ~ L^{1/2}.
        let pr = WeightPair::new(RadialWeight::power(0.0).unwrap(), RadialWeight::log_power(1.0, 2.0).unwrap(), 2.0, 2).unwrap();
        assert!(!pr.inner_divergent().unwrap());
        let rep = decide(&pr, &RadialGrid::dyadic(20)).unwrap();
        assert_eq!(rep.verdict, Boundedness::Unbounded);
        assert!(rep.consistency.finite_agree);
        assert!(rep.consistency.gj_consistent);
        assert!(rep.gj_ratios.iter().all(|g| g.ratio.is_finite()));
    }

    #[test]
    fn growth_rates() {
        let gaps: Vec<f64> = (0..=10).map(|k| 2f64.powi(-k)).collect();
        let logs: Vec<f64> = gaps.iter().map(|x| -0.5 * x.ln()).collect();
        let g = octave_growth(&gaps, &logs, 5);
        assert_eq!(g.len(), 5);
        assert!(g.iter().all(|s| (s - 0.5).abs() < 1e-12));
        assert_eq!(numeric_status(&gaps, &logs).0, Boundedness::Unbounded);
        let flat = vec![1.0; gaps.len()];
        assert_eq!(numeric_status(&gaps, &flat).0, Boundedness::Bounded);
    }

    #[test]
    fn corpus_sizes() {
        assert_eq!(power_oracle_grid().len(), 75);
        assert_eq!(mixed_corpus(2).unwrap().len(), 40);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]

        #[test]
        fn conjugate_exponents_and_finiteness_agree(a in -0.9f64..3.0, b in -0.9f64..3.0, gamma in -2.0f64..2.0, p in 1.1f64..5.0) {
            let pair = WeightPair::new(RadialWeight::power(a).unwrap(), RadialWeight::log_power(b, gamma).unwrap(), p, 2).unwrap();
            proptest::prop_assert!((1.0 / pair.p() + 1.0 / pair.q() - 1.0).abs() < 1e-14);
            let rep = decide(&pair, &RadialGrid::dyadic(16)).unwrap();
            if rep.verdict != Boundedness::Indeterminate {
                proptest::prop_assert_eq!(rep.m.is_finite(), rep.n_sup.is_finite());
                proptest::prop_assert_eq!(rep.n_sup.is_finite(), rep.kstar.is_finite());
            }
        }
    }
}
