//! The `bergman` command line: argument types, the four commands and their
//! CSV/JSON writers. Exit codes: 0 pass, 1 check failure, 2 usage or config error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::ballgeom::{block_weight_measure, BallPoint, CarlesonBlock, RadialGrid};
use crate::config::{ClassExpectation, PairCorpus, RunConfig};
use crate::criteria::{decide, schur_test_check, Boundedness, CorpusPair, CriterionReport, SchurReport};
use crate::error::Error;
use crate::fmt::num;
use crate::kernel::{KernelOptions, KernelSeries};
use crate::norms::{carleson_ratio, ln_sphere_monomial, mp_comparison_integral, mp_mean_at};
use crate::verify::{self, kernel_band_radii, Suite};
use crate::weights::{RadialWeight, Verdict, WeightClassReport};

#[derive(Debug, Parser)]
#[command(name = "bergman", version, about = "Weighted Bergman kernels, projections and boundedness criteria on the unit ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (key = value with [weights] and [pairs] blocks).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Complex dimension; overrides the config.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify every configured weight.
    Classify(#[command(flatten)] Common),
    /// Run a verification suite.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
    /// Emit curve data for plotting.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        target: SweepTarget,
    },
    /// Decide boundedness for the configured weight pairs.
    Criteria(#[command(flatten)] Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepTarget {
    KernelNorm,
    Mp,
    Carleson,
    Gj,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot write JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Compute(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(m) | Error::InvalidWeight(m) => CliError::Config(m),
            other => CliError::Compute(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Run one command; `Ok(true)` when every check passed.
pub fn run(cli: &Cli) -> CliResult<bool> {
    match &cli.command {
        Command::Classify(c) => cmd_classify(&load(c)?, &c.out),
        Command::Verify { common, suite } => cmd_verify(&load(common)?, *suite, &common.out),
        Command::Sweep { common, target } => cmd_sweep(&load(common)?, *target, &common.out),
        Command::Criteria(c) => cmd_criteria(&load(c)?, &c.out),
    }
}

fn load(c: &Common) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::load(&c.config)?;
    if let Some(n) = c.n {
        cfg.n = n;
    }
    cfg.out = c.out.clone();
    cfg.validate()?;
    Ok(cfg)
}

/// File-name friendly form of an identifier.
pub fn slug(id: &str) -> String {
    let mut s: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    s.trim_matches('_').to_string()
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ClassifyOutput<'a> {
    name: &'a str,
    report: &'a WeightClassReport,
    expectations: Vec<ExpectationOutcome>,
}

#[derive(Serialize)]
struct ExpectationOutcome {
    #[serde(flatten)]
    expect: ClassExpectation,
    verdict: Verdict,
    pass: bool,
}

pub fn cmd_classify(cfg: &RunConfig, out: &Path) -> CliResult<bool> {
    let weights = cfg.resolve_weights()?;
    let grid = RadialGrid::dyadic(cfg.k_max);
    let reports: Vec<_> = weights
        .par_iter()
        .map(|(_, w)| w.classify(&grid))
        .collect::<Result<_, _>>()?;
    let mut all_pass = true;
    let mut rows = Vec::new();
    for ((entry, _), report) in weights.iter().zip(&reports) {
        let expectations: Vec<ExpectationOutcome> = entry
            .expect
            .iter()
            .map(|e| {
                let verdict = e.class.verdict(&report.verdicts);
                let pass = verdict != Verdict::Indeterminate && verdict.is_yes() == e.member;
                ExpectationOutcome {
                    expect: *e,
                    verdict,
                    pass,
                }
            })
            .collect();
        let pass = expectations.iter().all(|e| e.pass);
        all_pass &= pass;
        let v = &report.verdicts;
        let word = |x: Verdict| format!("{x:?}").to_lowercase();
        rows.push(vec![
            entry.name.clone(),
            report.weight.clone(),
            word(v.d_hat),
            word(v.d_check),
            word(v.d),
            word(v.r),
            word(v.i),
            num(report.doubling_constant),
            pass.to_string(),
        ]);
        write_json(
            &out.join("classify").join(format!("{}.json", slug(&entry.name))),
            &ClassifyOutput {
                name: &entry.name,
                report,
                expectations,
            },
        )?;
    }
    write_csv(
        &out.join("classify.csv"),
        &["name", "weight", "d_hat", "d_check", "d", "r", "i", "doubling_constant", "expectations_met"],
        &rows,
    )?;
    Ok(all_pass)
}

pub fn cmd_verify(cfg: &RunConfig, suite: Suite, out: &Path) -> CliResult<bool> {
    let rows = verify::run(cfg, suite)?;
    let name = value_name(suite);
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.check.clone(), r.property.to_string(), num(r.value), r.band.clone(), r.pass.to_string()])
        .collect();
    write_csv(&out.join(format!("verify_{name}.csv")), &["check", "property", "value", "band", "pass"], &table)?;
    let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
    for r in &failed {
        eprintln!("FAIL {} value {} band {}", r.check, num(r.value), r.band);
    }
    println!("{}: {} checks, {} failed", name, rows.len(), failed.len());
    Ok(failed.is_empty())
}

/// Configured pairs, defaulting to the mixed corpus.
fn pairs(cfg: &RunConfig) -> CliResult<Vec<(CorpusPair, Option<Boundedness>)>> {
    if cfg.pairs.is_empty() && cfg.includes.is_empty() {
        let mut c = cfg.clone();
        c.includes.push(PairCorpus::Mixed);
        return Ok(c.resolve_pairs()?);
    }
    Ok(cfg.resolve_pairs()?)
}

#[derive(Serialize)]
struct CriteriaOutput<'a> {
    id: &'a str,
    oracle: Option<Boundedness>,
    agree: bool,
    report: &'a CriterionReport,
    schur: Option<SchurReport>,
}

fn oracle_of(c: &CorpusPair, expect: Option<Boundedness>) -> Option<Boundedness> {
    expect.or(c.oracle.map(|b| if b { Boundedness::Bounded } else { Boundedness::Unbounded }))
}

pub fn cmd_criteria(cfg: &RunConfig, out: &Path) -> CliResult<bool> {
    let pairs = pairs(cfg)?;
    let grid = RadialGrid::dyadic(cfg.k_max);
    let schur_grid = RadialGrid::dyadic(cfg.k_max.min(12));
    let results: Vec<(CriterionReport, Option<SchurReport>)> = pairs
        .par_iter()
        .map(|(c, _)| {
            let rep = decide(&c.pair, &grid)?;
            let schur = if rep.m.is_finite() {
                Some(schur_test_check(&c.pair, &schur_grid)?)
            } else {
                None
            };
            Ok((rep, schur))
        })
        .collect::<Result<_, Error>>()?;
    let mut rows = Vec::new();
    let mut all = true;
    for ((c, expect), (rep, schur)) in pairs.iter().zip(results) {
        let oracle = oracle_of(c, *expect);
        let consistent = rep.verdict != Boundedness::Indeterminate
            && rep.consistency.finite_agree
            && rep.consistency.kstar_le_n
            && rep.consistency.gj_consistent;
        let agree = consistent && oracle.is_none_or(|o| o == rep.verdict);
        all &= agree;
        let word = |b: Boundedness| format!("{b:?}").to_lowercase();
        rows.push(vec![
            c.id.clone(),
            num(rep.m),
            num(rep.n_sup),
            num(rep.kstar),
            word(rep.verdict),
            oracle.map(word).unwrap_or_default(),
            agree.to_string(),
        ]);
        write_json(
            &out.join("criteria").join(format!("{}.json", slug(&c.id))),
            &CriteriaOutput {
                id: &c.id,
                oracle,
                agree,
                report: &rep,
                schur,
            },
        )?;
    }
    write_csv(
        &out.join("criteria.csv"),
        &["pair", "m", "n", "kstar", "verdict", "oracle", "agree"],
        &rows,
    )?;
    Ok(all)
}

pub fn cmd_sweep(cfg: &RunConfig, target: SweepTarget, out: &Path) -> CliResult<bool> {
    let (header, rows): (Vec<&str>, Vec<Vec<String>>) = match target {
        SweepTarget::KernelNorm => (
            vec!["weight", "k", "z_norm", "supnorm", "inv_block_measure", "product", "bloch", "bloch_product"],
            sweep_kernel_norm(cfg)?,
        ),
        SweepTarget::Mp => {
            let mut h = vec!["weight", "p", "rho", "mp_mean", "comparison", "ratio"];
            if cfg.sweep_p == 2.0 {
                h.push("parseval");
            }
            (h, sweep_mp(cfg)?)
        }
        SweepTarget::Carleson => (
            vec!["mu", "omega", "p", "gap", "ratio", "tail_slope", "bounded"],
            sweep_carleson(cfg)?,
        ),
        SweepTarget::Gj => (vec!["pair", "j", "r_j", "ratio", "h_root"], sweep_gj(cfg)?),
    };
    let name = value_name(target);
    write_csv(&out.join(format!("sweep_{name}.csv")), &header, &rows)?;
    Ok(true)
}

fn sweep_kernel_norm(cfg: &RunConfig) -> CliResult<Vec<Vec<String>>> {
    let weights = cfg.resolve_weights()?;
    let opts = KernelOptions::new(1.0 - 2f64.powi(-10), cfg.series_tol)
        .relative()
        .with_max_terms(100_000);
    let bloch_grid = RadialGrid::geometric(16, 8);
    let per: Vec<Option<Vec<Vec<String>>>> = weights
        .par_iter()
        .map(|(e, w)| {
            let ks = match KernelSeries::build(w, cfg.n, opts) {
                Ok(ks) => ks,
                Err(Error::Truncation { .. }) => return Ok(None),
                Err(err) => return Err(err),
            };
            let rows = kernel_band_radii()
                .into_iter()
                .enumerate()
                .map(|(k, r)| {
                    let block = block_weight_measure(w, &CarlesonBlock::new(BallPoint::radial(cfg.n, r)?), cfg.n)?;
                    let sup = ks.sup_norm_at(r)?;
                    let bloch = ks.bloch_seminorm_at(r, &bloch_grid)?;
                    Ok(vec![
                        e.name.clone(),
                        k.to_string(),
                        num(r),
                        num(sup),
                        num(1.0 / block),
                        num(sup * block),
                        num(bloch),
                        num(bloch * block),
                    ])
                })
                .collect::<Result<Vec<_>, Error>>()?;
            Ok(Some(rows))
        })
        .collect::<Result<_, Error>>()?;
    for ((e, _), r) in weights.iter().zip(&per) {
        if r.is_none() {
            eprintln!("skipping {}: kernel series does not converge near the boundary", e.name);
        }
    }
    Ok(per.into_iter().flatten().flatten().collect())
}

fn sweep_mp(cfg: &RunConfig) -> CliResult<Vec<Vec<String>>> {
    let weights = cfg.resolve_weights()?;
    let p = cfg.sweep_p;
    let radii = RadialGrid::uniform(0.3, 0.95, 10)?.nodes();
    let per: Vec<Option<Vec<Vec<String>>>> = weights
        .par_iter()
        .map(|(e, w)| {
            let ks = match KernelSeries::build(w, cfg.n, KernelOptions::default()) {
                Ok(ks) => ks,
                Err(Error::Truncation { .. }) => return Ok(None),
                Err(err) => return Err(err),
            };
            let rows = radii
                .iter()
                .map(|&rho| {
                    let mean = mp_mean_at(&ks, rho, p, false)?.value;
                    let cmp = mp_comparison_integral(w, rho, p, cfg.n, false)?.value;
                    let mut row = vec![e.name.clone(), num(p), num(rho), num(mean), num(cmp), num(mean.powf(p) / cmp)];
                    if p == 2.0 {
                        let parseval: f64 = (0..=ks.truncation())
                            .map(|k| {
                                let mut m = vec![0u32; cfg.n];
                                m[0] = k as u32;
                                let ln_sphere = ln_sphere_monomial(&m);
                                (2.0 * ks.log_coeffs()[k] + 2.0 * k as f64 * rho.ln() + ln_sphere).exp()
                            })
                            .sum();
                        row.push(num(parseval.sqrt()));
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>, Error>>()?;
            Ok(Some(rows))
        })
        .collect::<Result<_, Error>>()?;
    Ok(per.into_iter().flatten().flatten().collect())
}

fn sweep_carleson(cfg: &RunConfig) -> CliResult<Vec<Vec<String>>> {
    let grid = RadialGrid::dyadic(cfg.k_max);
    let mut jobs: Vec<(RadialWeight, RadialWeight, f64)> = Vec::new();
    for a in [0.0, 1.0, 2.0] {
        for b in [0.0, 1.0, 2.0] {
            jobs.push((RadialWeight::power(b)?, RadialWeight::power(a)?, 2.0));
        }
    }
    if !cfg.pairs.is_empty() {
        for (c, _) in cfg.resolve_pairs()? {
            jobs.push((c.pair.upsilon().clone(), c.pair.omega().clone(), c.pair.p()));
        }
    }
    let per: Vec<Vec<Vec<String>>> = jobs
        .par_iter()
        .map(|(mu, w, p)| {
            let rep = carleson_ratio(mu, w, *p, *p, cfg.n, &grid)?;
            Ok(rep
                .curve
                .iter()
                .map(|&(gap, ratio)| {
                    vec![
                        mu.to_string(),
                        w.to_string(),
                        num(*p),
                        num(gap),
                        num(ratio),
                        num(rep.tail_slope),
                        rep.bounded.to_string(),
                    ]
                })
                .collect())
        })
        .collect::<Result<_, Error>>()?;
    Ok(per.into_iter().flatten().collect())
}

fn sweep_gj(cfg: &RunConfig) -> CliResult<Vec<Vec<String>>> {
    let pairs = pairs(cfg)?;
    let grid = RadialGrid::dyadic(cfg.k_max);
    let per: Vec<Vec<Vec<String>>> = pairs
        .par_iter()
        .map(|(c, _)| {
            let rep = decide(&c.pair, &grid)?;
            Ok(rep
                .gj_ratios
                .iter()
                .map(|g| vec![c.id.clone(), g.j.to_string(), num(g.r), num(g.ratio), num(g.h_root)])
                .collect())
        })
        .collect::<Result<_, Error>>()?;
    Ok(per.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs_are_file_safe() {
        assert_eq!(slug("power(alpha=0)"), "power_alpha_0");
        assert_eq!(slug("power-a0-b1-p1.5"), "power-a0-b1-p1.5");
    }

    #[test]
    fn parse_errors_exit_two() {
        let e: CliError = Error::Parse("x".into()).into();
        assert_eq!(e.exit_code(), 2);
        let e: CliError = Error::Divergent("x".into()).into();
        assert_eq!(e.exit_code(), 1);
    }
}
