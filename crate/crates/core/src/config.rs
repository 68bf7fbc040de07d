//! Run configuration: flat `key = value` lines plus `[weights]` and `[pairs]` blocks.
//!
//! ```text
//! n = 2
//! series_tol = 1e-10
//!
//! [weights]
//! lebesgue = power(alpha=0) | expect=D,R,!I
//!
//! [pairs]
//! include = mixed
//! flat = lebesgue | power(alpha=1) | 2 | expect=bounded
//! ```
//!
//! Fields within a corpus line are separated by ` | `; pair weights may name
//! an entry of `[weights]` or be written inline.

use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::ballgeom::MAX_DIM;
use crate::criteria::{mixed_corpus, power_corpus, Boundedness, CorpusPair};
use crate::error::{Error, Result};
use crate::weights::{parse_weight, shipped_corpus, ClassVerdicts, RadialWeight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightClass {
    DHat,
    DCheck,
    D,
    R,
    I,
}

impl WeightClass {
    pub fn verdict(self, v: &ClassVerdicts) -> crate::weights::Verdict {
        match self {
            WeightClass::DHat => v.d_hat,
            WeightClass::DCheck => v.d_check,
            WeightClass::D => v.d,
            WeightClass::R => v.r,
            WeightClass::I => v.i,
        }
    }
}

impl FromStr for WeightClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dhat" | "d̂" => Ok(WeightClass::DHat),
            "dcheck" | "ď" => Ok(WeightClass::DCheck),
            "d" => Ok(WeightClass::D),
            "r" => Ok(WeightClass::R),
            "i" => Ok(WeightClass::I),
            other => Err(Error::Parse(format!("unknown weight class `{other}`"))),
        }
    }
}

/// `member = false` expects the weight outside the class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassExpectation {
    pub class: WeightClass,
    pub member: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightEntry {
    pub name: String,
    pub spec: String,
    pub expect: Vec<ClassExpectation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairEntry {
    pub id: String,
    pub omega: String,
    pub upsilon: String,
    pub p: f64,
    pub expect: Option<Boundedness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairCorpus {
    /// The 75 power pairs with the classical oracle.
    PowerOracle,
    /// Forty power and log-power crossings.
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub quadrature_tol: f64,
    pub series_tol: f64,
    /// Allowed `max/min` of the kernel-norm products.
    pub kernel_band: f64,
    /// Allowed `max/min` of the integral-mean ratios.
    pub mp_band: f64,
    /// Dyadic depth for classification and the criteria curves.
    pub k_max: usize,
    pub seed: u64,
    pub mc_samples: usize,
    /// Exponent used by the `mp` sweep.
    pub sweep_p: f64,
    pub out: PathBuf,
    pub weights: Vec<WeightEntry>,
    pub pairs: Vec<PairEntry>,
    pub includes: Vec<PairCorpus>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 2,
            quadrature_tol: 1e-10,
            series_tol: 1e-10,
            kernel_band: 20.0,
            mp_band: 10.0,
            k_max: 20,
            seed: 1,
            mc_samples: 10_000_000,
            sweep_p: 2.0,
            out: PathBuf::from("out"),
            weights: Vec::new(),
            pairs: Vec::new(),
            includes: Vec::new(),
        }
    }
}

#[derive(PartialEq)]
enum Section {
    Top,
    Weights,
    Pairs,
}

fn parse_num<T: FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse::<T>()
        .map_err(|_| Error::Parse(format!("line {line}: `{key} = {v}` is not a valid number")))
}

fn parse_expect_classes(v: &str, line: usize) -> Result<Vec<ClassExpectation>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|tok| {
            let (member, name) = match tok.strip_prefix('!') {
                Some(rest) => (false, rest),
                None => (true, tok),
            };
            let class = name
                .parse::<WeightClass>()
                .map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
            Ok(ClassExpectation { class, member })
        })
        .collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section = Section::Top;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if body.starts_with('[') {
                section = match body {
                    "[weights]" => Section::Weights,
                    "[pairs]" => Section::Pairs,
                    other => return Err(Error::Parse(format!("line {line}: unknown section {other}"))),
                };
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {line}: expected `key = value`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(Error::Parse(format!("line {line}: empty key or value")));
            }
            match section {
                Section::Top => cfg.set(key, value, line)?,
                Section::Weights => {
                    let mut fields = value.split(" | ").map(str::trim);
                    let spec = fields.next().unwrap_or_default().to_string();
                    let mut expect = Vec::new();
                    for f in fields {
                        match f.strip_prefix("expect=") {
                            Some(list) => expect = parse_expect_classes(list, line)?,
                            None => return Err(Error::Parse(format!("line {line}: unexpected field `{f}`"))),
                        }
                    }
                    if cfg.weights.iter().any(|w| w.name == key) {
                        return Err(Error::Parse(format!("line {line}: duplicate weight `{key}`")));
                    }
                    cfg.weights.push(WeightEntry {
                        name: key.to_string(),
                        spec,
                        expect,
                    });
                }
                Section::Pairs if key == "include" => cfg.includes.push(match value {
                    "power-oracle" => PairCorpus::PowerOracle,
                    "mixed" => PairCorpus::Mixed,
                    other => return Err(Error::Parse(format!("line {line}: unknown corpus `{other}`"))),
                }),
                Section::Pairs => {
                    let fields: Vec<&str> = value.split(" | ").map(str::trim).collect();
                    if fields.len() < 3 || fields.len() > 4 {
                        return Err(Error::Parse(format!(
                            "line {line}: pairs need `omega | upsilon | p [| expect=...]`"
                        )));
                    }
                    let p: f64 = parse_num("p", fields[2], line)?;
                    if !(p > 1.0 && p.is_finite()) {
                        return Err(Error::Parse(format!("line {line}: p = {p} must exceed 1")));
                    }
                    let expect = match fields.get(3) {
                        None => None,
                        Some(f) => Some(match f.strip_prefix("expect=") {
                            Some("bounded") => Boundedness::Bounded,
                            Some("unbounded") => Boundedness::Unbounded,
                            _ => return Err(Error::Parse(format!("line {line}: expected `expect=bounded|unbounded`"))),
                        }),
                    };
                    cfg.pairs.push(PairEntry {
                        id: key.to_string(),
                        omega: fields[0].to_string(),
                        upsilon: fields[1].to_string(),
                        p,
                        expect,
                    });
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, v: &str, line: usize) -> Result<()> {
        match key {
            "n" => self.n = parse_num(key, v, line)?,
            "quadrature_tol" => self.quadrature_tol = parse_num(key, v, line)?,
            "series_tol" => self.series_tol = parse_num(key, v, line)?,
            "kernel_band" => self.kernel_band = parse_num(key, v, line)?,
            "mp_band" => self.mp_band = parse_num(key, v, line)?,
            "k_max" => self.k_max = parse_num(key, v, line)?,
            "seed" => self.seed = parse_num(key, v, line)?,
            "mc_samples" => self.mc_samples = parse_num(key, v, line)?,
            "sweep_p" => self.sweep_p = parse_num(key, v, line)?,
            "out" => self.out = PathBuf::from(v),
            other => return Err(Error::Parse(format!("line {line}: unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_DIM).contains(&self.n) {
            return Err(Error::Parse(format!("n = {} must lie in 1..={MAX_DIM}", self.n)));
        }
        for (name, v) in [
            ("quadrature_tol", self.quadrature_tol),
            ("series_tol", self.series_tol),
            ("kernel_band", self.kernel_band),
            ("mp_band", self.mp_band),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parse(format!("{name} = {v} must be positive")));
            }
        }
        if self.k_max < 5 {
            return Err(Error::Parse("k_max must be at least 5".into()));
        }
        if !(self.sweep_p > 0.0) {
            return Err(Error::Parse("sweep_p must be positive".into()));
        }
        Ok(())
    }

    /// Weights of `[weights]`, or the shipped corpus when the block is empty.
    pub fn resolve_weights(&self) -> Result<Vec<(WeightEntry, RadialWeight)>> {
        if self.weights.is_empty() {
            return Ok(shipped_corpus(self.n as u32)
                .into_iter()
                .map(|w| {
                    (
                        WeightEntry {
                            name: w.to_string(),
                            spec: w.to_string(),
                            expect: Vec::new(),
                        },
                        w,
                    )
                })
                .collect());
        }
        self.weights
            .iter()
            .map(|e| Ok((e.clone(), parse_weight(&e.spec, self.n as u32)?)))
            .collect()
    }

    fn weight_ref(&self, s: &str) -> Result<RadialWeight> {
        match self.weights.iter().find(|w| w.name == s) {
            Some(e) => parse_weight(&e.spec, self.n as u32),
            None => parse_weight(s, self.n as u32),
        }
    }

    /// Pairs of the included corpora followed by the `[pairs]` lines.
    pub fn resolve_pairs(&self) -> Result<Vec<(CorpusPair, Option<Boundedness>)>> {
        let mut out = Vec::new();
        for inc in &self.includes {
            let corpus = match inc {
                PairCorpus::PowerOracle => power_corpus(self.n)?,
                PairCorpus::Mixed => mixed_corpus(self.n)?,
            };
            out.extend(corpus.into_iter().map(|c| (c, None)));
        }
        let specs = self
            .pairs
            .iter()
            .map(|e| Ok((e.id.clone(), self.weight_ref(&e.omega)?, self.weight_ref(&e.upsilon)?, e.p, None)))
            .collect::<Result<Vec<_>>>()?;
        let built = crate::criteria::build_pairs(&specs, self.n)?;
        out.extend(built.into_iter().zip(&self.pairs).map(|(c, e)| (c, e.expect)));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
# comment
n = 2
seed = 7
[weights]
flat = power(alpha=0) | expect=D,R,!I
tab = tabulated(r=0;0.5;0.9,w=1;0.5;0.1)
[pairs]
include = mixed
one = flat | power(alpha=1) | 2 | expect=bounded
";

    #[test]
    fn parses_sample() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.weights.len(), 2);
        assert_eq!(cfg.weights[0].expect.len(), 3);
        assert!(!cfg.weights[0].expect[2].member);
        assert_eq!(cfg.weights[1].spec, "tabulated(r=0;0.5;0.9,w=1;0.5;0.1)");
        assert_eq!(cfg.includes, vec![PairCorpus::Mixed]);
        assert_eq!(cfg.pairs[0].expect, Some(Boundedness::Bounded));
        assert_eq!(cfg.resolve_weights().unwrap().len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "n = 9",
            "series_tol = 0",
            "bogus = 1",
            "[nope]",
            "[pairs]\nx = power(alpha=0) | power(alpha=0)",
            "[pairs]\nx = power(alpha=0) | power(alpha=0) | 1",
            "[weights]\nw = power(alpha=0) | expect=Q",
        ] {
            assert!(RunConfig::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn malformed_weight_fails_on_resolve() {
        let cfg = RunConfig::parse("[weights]\nw = power(alpha=)").unwrap();
        assert!(cfg.resolve_weights().is_err());
    }

    #[test]
    fn empty_weights_fall_back_to_shipped() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg.resolve_weights().unwrap().len(), shipped_corpus(2).len());
    }

    proptest::proptest! {
        #[test]
        fn validation_bounds(n in 0usize..8, tol in -1e-3f64..1e-3) {
            let text = format!("n = {n}\nquadrature_tol = {tol:e}\n");
            let ok = RunConfig::parse(&text).and_then(|c| c.validate()).is_ok();
            proptest::prop_assert_eq!(ok, (1..=4).contains(&n) && tol > 0.0);
        }
    }
}
