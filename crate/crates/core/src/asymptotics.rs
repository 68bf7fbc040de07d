//! Leading-order behaviour of radial functions at the boundary.
//!
//! A [`TailForm`] records `f(x) ≍ x^a · L^b · exp(−Σ cᵢ x^{−βᵢ})` as `x = 1 − r → 0⁺`,
//! with `L = 1 − ln x`. Constant factors are dropped. This is enough to decide
//! integrability and boundedness for every closed-form weight family.

use serde::Serialize;

/// Exponents closer than this are treated as equal.
pub const EXPONENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpTerm {
    /// Positive means decay `exp(−c x^{−β})`, negative means growth.
    pub coef: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailForm {
    pub power: f64,
    pub log_power: f64,
    pub exp_terms: Vec<ExpTerm>,
}

impl TailForm {
    pub fn constant() -> Self {
        Self::power_law(0.0)
    }

    pub fn power_law(power: f64) -> Self {
        Self {
            power,
            log_power: 0.0,
            exp_terms: Vec::new(),
        }
    }

    pub fn power_log(power: f64, log_power: f64) -> Self {
        Self {
            power,
            log_power,
            exp_terms: Vec::new(),
        }
    }

    pub fn exp_decay(coef: f64, rate: f64) -> Self {
        Self {
            power: 0.0,
            log_power: 0.0,
            exp_terms: vec![ExpTerm { coef, rate }],
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut exp_terms = self.exp_terms.clone();
        exp_terms.extend_from_slice(&other.exp_terms);
        Self {
            power: self.power + other.power,
            log_power: self.log_power + other.log_power,
            exp_terms,
        }
        .normalized()
    }

    pub fn powf(&self, q: f64) -> Self {
        Self {
            power: self.power * q,
            log_power: self.log_power * q,
            exp_terms: self
                .exp_terms
                .iter()
                .map(|t| ExpTerm {
                    coef: t.coef * q,
                    rate: t.rate,
                })
                .collect(),
        }
        .normalized()
    }

    pub fn recip(&self) -> Self {
        self.powf(-1.0)
    }

    /// Multiply by `x^k`.
    pub fn shift_power(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.power += k;
        out
    }

    fn normalized(mut self) -> Self {
        let mut merged: Vec<ExpTerm> = Vec::new();
        for t in self.exp_terms.drain(..) {
            if let Some(m) = merged
                .iter_mut()
                .find(|m| (m.rate - t.rate).abs() <= EXPONENT_EPS * m.rate.abs().max(1.0))
            {
                m.coef += t.coef;
            } else {
                merged.push(t);
            }
        }
        merged.retain(|t| t.coef.abs() > EXPONENT_EPS);
        merged.sort_by(|a, b| b.rate.total_cmp(&a.rate));
        self.exp_terms = merged;
        self
    }

    /// The exponential factor that dominates as `x → 0`, if any.
    pub fn leading_exp(&self) -> Option<ExpTerm> {
        self.exp_terms.first().copied()
    }

    /// Predicted `d ln f / d ln x` at `x`.
    pub fn log_slope(&self, x: f64) -> f64 {
        let l = 1.0 - x.ln();
        let mut slope = self.power - self.log_power / l;
        for t in &self.exp_terms {
            slope += t.coef * t.rate * x.powf(-t.rate);
        }
        slope
    }

    /// `ln f(x)` up to the dropped constant.
    pub fn ln_value(&self, x: f64) -> f64 {
        let l = 1.0 - x.ln();
        let mut v = self.power * x.ln() + self.log_power * l.ln();
        for t in &self.exp_terms {
            v -= t.coef * x.powf(-t.rate);
        }
        v
    }

    /// Whether `∫₀ f(x) dx` converges.
    pub fn integrable_at_zero(&self) -> bool {
        if let Some(t) = self.leading_exp() {
            return t.coef > 0.0;
        }
        let gap = self.power + 1.0;
        if gap > EXPONENT_EPS {
            true
        } else if gap < -EXPONENT_EPS {
            false
        } else {
            self.log_power < -1.0 - EXPONENT_EPS
        }
    }

    /// `ln R(x)` where `∫₀ˣ f ≈ x·f(x)·R(x)` for small `x`. `None` if not integrable.
    pub fn ln_remainder_factor(&self, x: f64) -> Option<f64> {
        if !self.integrable_at_zero() {
            return None;
        }
        if let Some(t) = self.leading_exp() {
            return Some(t.rate * x.ln() - (t.coef * t.rate).ln());
        }
        let l = 1.0 - x.ln();
        if self.power + 1.0 > EXPONENT_EPS {
            // First-order log correction 1/(P + 1 − B/L), while it is a small correction.
            let gap = self.power + 1.0;
            let corrected = gap - self.log_power / l;
            Some(-(if corrected > 0.5 * gap { corrected } else { gap }).ln())
        } else {
            Some(l.ln() - (-self.log_power - 1.0).ln())
        }
    }

    /// Relative size of the first neglected term in [`Self::ln_remainder_factor`].
    pub fn remainder_rel_error(&self, x: f64) -> f64 {
        if let Some(t) = self.leading_exp() {
            return (self.power.abs() + t.rate + 1.0) * x.powf(t.rate) / (t.coef * t.rate);
        }
        if self.power + 1.0 > EXPONENT_EPS {
            let l = 1.0 - x.ln();
            let first = self.log_power / ((self.power + 1.0) * l);
            if first.abs() < 0.5 {
                first * first
            } else {
                1.0
            }
        } else {
            0.0
        }
    }

    /// Leading form of `F(x) = ∫₀ˣ f`, or `None` when the integral diverges.
    pub fn integral_from_zero(&self) -> Option<Self> {
        if !self.integrable_at_zero() {
            return None;
        }
        if let Some(t) = self.leading_exp() {
            let mut out = self.clone();
            out.power += t.rate + 1.0;
            return Some(out);
        }
        if self.power + 1.0 > EXPONENT_EPS {
            Some(self.shift_power(1.0))
        } else {
            Some(Self::power_log(0.0, self.log_power + 1.0))
        }
    }

    /// Leading form of `G(x) = ∫ₓ¹ f` as `x → 0`; bounded integrals give the constant form.
    /// `None` for the borderline `x^{-1} L^{-1}` case (iterated-log growth).
    pub fn integral_to_one(&self) -> Option<Self> {
        if let Some(t) = self.leading_exp() {
            if t.coef > 0.0 {
                return Some(Self::constant());
            }
            let mut out = self.clone();
            out.power += t.rate + 1.0;
            return Some(out);
        }
        let gap = self.power + 1.0;
        if gap > EXPONENT_EPS {
            Some(Self::constant())
        } else if gap < -EXPONENT_EPS {
            Some(self.shift_power(1.0))
        } else if self.log_power > -1.0 + EXPONENT_EPS {
            Some(Self::power_log(0.0, self.log_power + 1.0))
        } else if self.log_power < -1.0 - EXPONENT_EPS {
            Some(Self::constant())
        } else {
            None
        }
    }

    /// Whether `f` stays bounded as `x → 0`.
    pub fn is_bounded(&self) -> bool {
        if let Some(t) = self.leading_exp() {
            return t.coef > 0.0;
        }
        if self.power > EXPONENT_EPS {
            true
        } else if self.power < -EXPONENT_EPS {
            false
        } else {
            self.log_power <= EXPONENT_EPS
        }
    }

    /// The faster-growing of two forms (used for `max(F, G)` and `F + G`).
    pub fn dominant(a: &Self, b: &Self) -> Self {
        use std::cmp::Ordering;
        let exp_key = |f: &Self| f.leading_exp().map(|t| (t.rate, -t.coef));
        let ord = match (exp_key(a), exp_key(b)) {
            (Some(x), Some(y)) => x
                .0
                .total_cmp(&y.0)
                .then_with(|| x.1.total_cmp(&y.1)),
            (Some(x), None) => {
                if x.1 > 0.0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (None, Some(y)) => {
                if y.1 > 0.0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (None, None) => {
                if (a.power - b.power).abs() > EXPONENT_EPS {
                    b.power.total_cmp(&a.power)
                } else {
                    a.log_power.total_cmp(&b.log_power)
                }
            }
        };
        if ord == Ordering::Less {
            b.clone()
        } else {
            a.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_integrability() {
        assert!(TailForm::power_law(-0.5).integrable_at_zero());
        assert!(!TailForm::power_law(-1.0).integrable_at_zero());
        assert!(!TailForm::power_law(-1.5).integrable_at_zero());
        assert!(TailForm::power_log(-1.0, -2.0).integrable_at_zero());
        assert!(!TailForm::power_log(-1.0, -1.0).integrable_at_zero());
        assert!(TailForm::exp_decay(1.0, 1.0).shift_power(-5.0).integrable_at_zero());
    }

    #[test]
    fn integral_from_zero_forms() {
        let f = TailForm::power_log(-1.0, -2.0).integral_from_zero().unwrap();
        assert_eq!(f, TailForm::power_log(0.0, -1.0));
        let g = TailForm::power_law(1.0).integral_from_zero().unwrap();
        assert_eq!(g.power, 2.0);
    }

    #[test]
    fn integral_to_one_growth() {
        assert!(TailForm::power_law(0.0).integral_to_one().unwrap().is_bounded());
        let g = TailForm::power_law(-2.0).integral_to_one().unwrap();
        assert_eq!(g.power, -1.0);
        assert!(!g.is_bounded());
        let l = TailForm::power_log(-1.0, 0.0).integral_to_one().unwrap();
        assert_eq!(l, TailForm::power_log(0.0, 1.0));
        assert!(TailForm::power_log(-1.0, -1.0).integral_to_one().is_none());
    }

    #[test]
    fn exp_terms_cancel() {
        let a = TailForm::exp_decay(2.0, 1.0);
        let b = TailForm::exp_decay(1.0, 1.0).powf(-2.0);
        let prod = a.mul(&b);
        assert!(prod.leading_exp().is_none());
    }

    #[test]
    fn dominant_prefers_growth() {
        let a = TailForm::power_law(-1.0);
        let b = TailForm::constant();
        assert_eq!(TailForm::dominant(&a, &b), a);
        assert_eq!(TailForm::dominant(&b, &a), a);
        let logs = TailForm::power_log(0.0, 1.0);
        assert_eq!(TailForm::dominant(&logs, &b), logs);
    }
}
