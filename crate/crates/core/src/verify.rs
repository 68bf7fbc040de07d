//! Verification suites driven by `bergman verify`: one row per check with the
//! measured value, the band it must fall in and the outcome.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ballgeom::{block_weight_measure, BallPoint, CarlesonBlock, RadialGrid};
use crate::config::RunConfig;
use crate::criteria::{decide, mixed_corpus, power_corpus, Boundedness};
use crate::error::Result;
use crate::fmt::ser_f64;
use crate::kernel::{KernelOptions, KernelSeries};
use crate::montecarlo;
use crate::norms::{carleson_ratio, littlewood_paley_sweep, mp_comparison_integral, mp_mean_at, multi_indices};
use crate::projection::{
    adjoint_on_gj, maximal_project_radial, project_with_error, MonomialRadialFunction, Profile, RadialTestFunction, Term,
};
use crate::weights::{shipped_corpus, Family, RadialWeight, WeightClassReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Kernel,
    Norms,
    Projection,
    Criteria,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub property: &'static str,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    pub band: String,
    pub pass: bool,
}

fn row(check: String, property: &'static str, value: f64, band: String, pass: bool) -> CheckRow {
    CheckRow {
        check,
        property,
        value,
        band,
        pass,
    }
}

/// Upper limit: NaN never passes.
fn at_most(check: String, property: &'static str, value: f64, limit: f64) -> CheckRow {
    row(check, property, value, format!("<= {limit:e}"), value <= limit)
}

struct Classified {
    name: String,
    weight: RadialWeight,
    report: WeightClassReport,
}

fn classified(cfg: &RunConfig) -> Result<Vec<Classified>> {
    let grid = RadialGrid::dyadic(cfg.k_max);
    cfg.resolve_weights()?
        .into_iter()
        .map(|(e, w)| {
            let report = w.classify(&grid)?;
            Ok(Classified {
                name: e.name,
                weight: w,
                report,
            })
        })
        .collect()
}

pub fn run(cfg: &RunConfig, suite: Suite) -> Result<Vec<CheckRow>> {
    let weights = classified(cfg)?;
    let mut rows = Vec::new();
    if matches!(suite, Suite::Kernel | Suite::All) {
        rows.extend(kernel_suite(cfg, &weights)?);
    }
    if matches!(suite, Suite::Norms | Suite::All) {
        rows.extend(norms_suite(cfg, &weights)?);
    }
    if matches!(suite, Suite::Projection | Suite::All) {
        rows.extend(projection_suite(cfg, &weights)?);
    }
    if matches!(suite, Suite::Criteria | Suite::All) {
        rows.extend(criteria_suite(cfg, &weights)?);
    }
    Ok(rows)
}

/// A point with `|z| ≤ radius`, direction uniform on the sphere.
pub fn random_point<R: Rng>(rng: &mut R, n: usize, radius: f64) -> Result<BallPoint> {
    let mut c: Vec<Complex64> = (0..n)
        .map(|_| {
            // Box–Muller pairs give a rotation-invariant direction.
            let (u1, u2): (f64, f64) = (rng.random::<f64>().max(1e-300), rng.random());
            let rad = (-2.0 * u1.ln()).sqrt();
            Complex64::from_polar(rad, 2.0 * std::f64::consts::PI * u2)
        })
        .collect();
    let norm = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let r = radius * rng.random::<f64>();
    for x in &mut c {
        *x *= r / norm;
    }
    BallPoint::new(c)
}

/// Ratio `max/min` of a positive sequence.
pub fn band(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi / lo
}

/// Apex moduli `1 − 2^{−k}` for `k = 0..=10`.
pub fn kernel_band_radii() -> Vec<f64> {
    (0..=10).map(|k| 1.0 - 2f64.powi(-k)).collect()
}

/// `(sup_norm·ω(S_z), bloch·ω(S_z))` along [`kernel_band_radii`].
pub fn kernel_norm_products(w: &RadialWeight, n: usize, series_tol: f64) -> Result<Vec<(f64, f64, f64)>> {
    let opts = KernelOptions::new(1.0 - 2f64.powi(-10), series_tol)
        .relative()
        .with_max_terms(100_000);
    let ks = KernelSeries::build(w, n, opts)?;
    let grid = RadialGrid::geometric(16, 8);
    kernel_band_radii()
        .into_iter()
        .map(|r| {
            let block = block_weight_measure(w, &CarlesonBlock::new(BallPoint::radial(n, r)?), n)?;
            Ok((r, ks.sup_norm_at(r)? * block, ks.bloch_seminorm_at(r, &grid)? * block))
        })
        .collect()
}

fn kernel_suite(cfg: &RunConfig, weights: &[Classified]) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for n in [2usize, 3] {
        for alpha in [0.0, 1.0, 2.5] {
            let w = RadialWeight::power_normalized(alpha, n as u32)?;
            let ks = KernelSeries::build(&w, n, KernelOptions::new(0.9, cfg.series_tol).relative())?;
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let z = random_point(&mut rng, n, 0.9f64.sqrt())?;
                let v = random_point(&mut rng, n, 0.9f64.sqrt())?;
                let u = v.inner(&z);
                let exact = (Complex64::new(1.0, 0.0) - u).powf(-(n as f64 + 1.0 + alpha));
                let got = ks.eval(&z, &v)?;
                worst = worst.max((got - exact).norm() / exact.norm());
            }
            rows.push(at_most(format!("kernel-golden/n={n}/alpha={alpha}"), "kernel-closed-form", worst, 1e-8));
        }
    }
    for c in weights.iter().filter(|c| c.report.verdicts.d.is_yes()) {
        let prods = kernel_norm_products(&c.weight, 2, cfg.series_tol)?;
        let sup: Vec<f64> = prods.iter().map(|p| p.1).collect();
        let bloch: Vec<f64> = prods.iter().map(|p| p.2).collect();
        rows.push(at_most(format!("kernel-norm-band/sup/{}", c.name), "kernel-norm-band", band(&sup), cfg.kernel_band));
        rows.push(at_most(format!("kernel-norm-band/bloch/{}", c.name), "kernel-norm-band", band(&bloch), cfg.kernel_band));
    }
    Ok(rows)
}

/// `mp_mean^p / comparison` at ten radii in `[0.3, 0.95]`.
pub fn mp_band_ratios(w: &RadialWeight, p: f64, n: usize) -> Result<Vec<f64>> {
    let ks = KernelSeries::build(w, n, KernelOptions::default())?;
    RadialGrid::uniform(0.3, 0.95, 10)?
        .nodes()
        .into_iter()
        .map(|rho| {
            let mean = mp_mean_at(&ks, rho, p, false)?.value;
            let cmp = mp_comparison_integral(w, rho, p, n, false)?.value;
            Ok(mean.powf(p) / cmp)
        })
        .collect()
}

fn norms_suite(cfg: &RunConfig, weights: &[Classified]) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for c in weights.iter().filter(|c| c.report.verdicts.d_hat.is_yes()) {
        for p in [1.0, 2.0] {
            let b = band(&mp_band_ratios(&c.weight, p, 2)?);
            rows.push(at_most(format!("mp-band/p={p}/{}", c.name), "integral-mean-band", b, cfg.mp_band));
        }
    }
    for c in weights {
        let worst = littlewood_paley_sweep(&c.weight, 2, 4)?
            .iter()
            .map(|(_, lp)| (lp.lhs / lp.rhs - 1.0).abs())
            .fold(0.0, f64::max);
        rows.push(at_most(format!("littlewood-paley/{}", c.name), "littlewood-paley", worst, 1e-6));
    }
    let grid = RadialGrid::dyadic(cfg.k_max);
    for c in weights.iter().filter(|c| c.report.verdicts.d.is_yes()) {
        let rep = carleson_ratio(&c.weight, &c.weight, 2.0, 2.0, cfg.n, &grid)?;
        let worst = rep.curve.iter().map(|(_, r)| (r - 1.0).abs()).fold(0.0, f64::max);
        rows.push(at_most(format!("carleson-self/{}", c.name), "carleson-identity", worst, 1e-12));
    }
    for a in [0.0, 1.0, 2.0] {
        for b in [0.0, 1.0, 2.0] {
            let rep = carleson_ratio(&RadialWeight::power(b)?, &RadialWeight::power(a)?, 2.0, 2.0, cfg.n, &grid)?;
            let expected = b >= a;
            rows.push(row(
                format!("carleson-slope/alpha={a}/beta={b}"),
                "carleson-power-slope",
                rep.tail_slope,
                format!("bounded = {expected}"),
                rep.bounded == expected,
            ));
        }
    }
    Ok(rows)
}

/// Largest `|λ − 1|` over `z^m·1`, `|m| ≤ 5`, with the constant profile integrated numerically.
pub fn reproducing_error(w: &RadialWeight, n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for order in 0..=5 {
        for m in multi_indices(n, order) {
            let f = MonomialRadialFunction::new(
                n,
                vec![Term {
                    m,
                    coef: Complex64::new(1.0, 0.0),
                    profile: Profile::constant(1.0),
                }],
            )?;
            let (g, _) = project_with_error(w, &f)?;
            worst = worst.max((g.terms()[0].coef - 1.0).norm());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpotCheck {
    pub id: String,
    pub library: Complex64,
    pub oracle: Complex64,
}

impl SpotCheck {
    fn real(id: String, library: f64, oracle: f64) -> Self {
        Self {
            id,
            library: Complex64::new(library, 0.0),
            oracle: Complex64::new(oracle, 0.0),
        }
    }

    pub fn rel_error(&self) -> f64 {
        (self.oracle - self.library).norm() / self.library.norm()
    }
}

/// Library values against the stratified Monte-Carlo oracle (`n = 2`).
pub fn monte_carlo_spot_checks(samples: usize, seed: u64) -> Result<Vec<SpotCheck>> {
    let mut out = Vec::new();
    for spec in ["power(alpha=0)", "power(alpha=1)", "logpower(alpha=0,beta=1)"] {
        let w = crate::weights::parse_weight(spec, 2)?;
        for a in [0.5, 0.9] {
            let lib = block_weight_measure(&w, &CarlesonBlock::new(BallPoint::radial(2, a)?), 2)?;
            let mc = montecarlo::block_measure(&w, a, samples, seed)?;
            out.push(SpotCheck::real(format!("block/{spec}/a={a}"), lib, mc));
        }
    }
    let z = BallPoint::new(vec![Complex64::new(0.3, 0.2), Complex64::new(-0.4, 0.0)])?;
    let rad = |p: &[Complex64; 2]| (p[0].norm_sqr() + p[1].norm_sqr()).sqrt();
    for alpha in [0.0, 1.0] {
        let w = RadialWeight::power_normalized(alpha, 2)?;
        let kernel = montecarlo::normalized_power_kernel(alpha, 2);
        let f = MonomialRadialFunction::new(
            2,
            vec![Term {
                m: vec![1, 0],
                coef: Complex64::new(1.0, 0.0),
                profile: Profile::Power(2.0),
            }],
        )?;
        let lib = project_with_error(&w, &f)?.0.eval(&z);
        let mc = montecarlo::projection_at(&w, |p| p[0] * rad(p).powi(2), &kernel, &z, samples, seed)?;
        out.push(SpotCheck {
            id: format!("project/z1|z|^2/alpha={alpha}"),
            library: lib,
            oracle: mc,
        });
        let step = Profile::step(0.5, 1.0, 2.0)?;
        let g = MonomialRadialFunction::radial(2, step.clone())?;
        let lib = project_with_error(&w, &g)?.0.eval(&z);
        let mc = montecarlo::projection_at(&w, |p| Complex64::new(step.eval(rad(p)), 0.0), &kernel, &z, samples, seed)?;
        out.push(SpotCheck {
            id: format!("project/step/alpha={alpha}"),
            library: lib,
            oracle: mc,
        });
        let ks = KernelSeries::build(&w, 2, KernelOptions::default())?;
        let lib = maximal_project_radial(&w, &RadialTestFunction::new(step.clone()), &z, &ks)?;
        let mc = montecarlo::maximal_projection_at(&w, |p| step.eval(rad(p)), &kernel, &z, samples, seed)?;
        out.push(SpotCheck::real(format!("maximal/step/alpha={alpha}"), lib, mc));
    }
    Ok(out)
}

fn projection_suite(cfg: &RunConfig, weights: &[Classified]) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for c in weights {
        let e = reproducing_error(&c.weight, 2)?;
        rows.push(at_most(format!("reproducing/{}", c.name), "reproducing", e, 1e-10));
    }
    for c in weights.iter().filter(|c| c.report.verdicts.d.is_yes()) {
        let mut worst: f64 = 0.0;
        for j in 0..=10 {
            let g = adjoint_on_gj(&c.weight, &c.weight, j, cfg.n, 2.0, false)?;
            worst = worst.max((g.ratio - 1.0).abs());
        }
        rows.push(at_most(format!("self-adjoint/{}", c.name), "self-adjoint-anchor", worst, 1e-8));
    }
    let w = RadialWeight::power(0.0)?;
    let verbatim = adjoint_on_gj(&w, &w, 0, 2, 2.0, true)?.ratio;
    rows.push(row(
        "self-adjoint/verbatim-constant/n=2".into(),
        "self-adjoint-anchor",
        verbatim,
        "!= 1".into(),
        (verbatim - 1.0).abs() > 1e-3,
    ));
    for s in monte_carlo_spot_checks(cfg.mc_samples, cfg.seed)? {
        rows.push(at_most(format!("monte-carlo/{}", s.id), "monte-carlo", s.rel_error(), 1e-3));
    }
    Ok(rows)
}

fn criteria_suite(cfg: &RunConfig, weights: &[Classified]) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let grid = RadialGrid::dyadic(cfg.k_max);
    for c in power_corpus(cfg.n)? {
        let rep = decide(&c.pair, &grid)?;
        let expected = if c.oracle == Some(true) {
            Boundedness::Bounded
        } else {
            Boundedness::Unbounded
        };
        rows.push(row(
            format!("power-oracle/{}", c.id),
            "criteria-power-oracle",
            rep.m,
            format!("{expected:?}").to_lowercase(),
            rep.verdict == expected,
        ));
    }
    for c in mixed_corpus(cfg.n)? {
        let rep = decide(&c.pair, &grid)?;
        let determinate = rep.verdict != Boundedness::Indeterminate;
        rows.push(row(
            format!("equivalence/{}", c.id),
            "criteria-equivalence",
            rep.m,
            "finite(M) = finite(N) = finite(K*)".into(),
            determinate && rep.consistency.finite_agree && rep.consistency.kstar_le_n,
        ));
        rows.push(row(
            format!("gj-chain/{}", c.id),
            "criteria-gj-chain",
            rep.gj_lower_constant,
            "bounded: finite, c > 0; unbounded: growing".into(),
            determinate && rep.consistency.gj_consistent,
        ));
    }
    for (w, ok) in classifier_truth_table(cfg.n, &RadialGrid::dyadic(cfg.k_max))? {
        rows.push(row(format!("classifier/{w}"), "classifier-truth-table", ok as u8 as f64, "1".into(), ok));
    }
    for c in weights {
        if let Some(e) = cfg.weights.iter().find(|e| e.name == c.name) {
            for x in &e.expect {
                let got = x.class.verdict(&c.report.verdicts);
                let ok = got.is_yes() == x.member && got != crate::weights::Verdict::Indeterminate;
                rows.push(row(
                    format!("classify/{}/{:?}", c.name, x.class),
                    "classifier-expectation",
                    ok as u8 as f64,
                    format!("member = {}", x.member),
                    ok,
                ));
            }
        }
    }
    Ok(rows)
}

/// Expected classes of the shipped corpus: `(weight, all expectations hold)`.
pub fn classifier_truth_table(n: usize, grid: &RadialGrid) -> Result<Vec<(String, bool)>> {
    shipped_corpus(n as u32)
        .into_iter()
        .filter_map(|w| {
            let check: fn(&crate::weights::ClassVerdicts) -> bool = match w.family() {
                Family::Power { .. } => |v| v.d.is_yes() && v.r.is_yes(),
                Family::LogPower { alpha, beta } if *alpha == -1.0 && *beta == -2.0 => {
                    |v| v.d_hat.is_yes() && v.i.is_yes() && v.d_check == crate::weights::Verdict::No
                }
                Family::ExpDecay { c, beta } if *c == 1.0 && *beta == 1.0 => |v| v.d_hat == crate::weights::Verdict::No,
                _ => return None,
            };
            Some(w.classify(grid).map(|r| (w.to_string(), check(&r.verdicts))))
        })
        .collect()
}
