//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits non-zero on any FAIL only when `ACCEPTANCE_STRICT=1`; otherwise the
//! summary line reports the count and the run stays green so the rest of the
//! workspace tests still execute.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bergman::ballgeom::{block_weight_measure, BallPoint, CarlesonBlock, RadialGrid};
use bergman::criteria::{decide, mixed_corpus, Boundedness, WeightPair};
use bergman::kernel::{KernelOptions, KernelSeries};
use bergman::montecarlo;
use bergman::norms::{carleson_ratio, littlewood_paley_sweep, mp_comparison_integral, mp_mean_at, multi_indices};
use bergman::projection::{adjoint_on_gj, maximal_project_radial, project, MonomialRadialFunction, Profile, RadialTestFunction, Term};
use bergman::weights::{shipped_corpus, Family, RadialWeight, Verdict, WeightClassReport};

type Outcome = Result<(bool, String), String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn max_over_min(v: &[f64]) -> f64 {
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

fn classified() -> Result<Vec<(RadialWeight, WeightClassReport)>, String> {
    let grid = RadialGrid::dyadic(20);
    shipped_corpus(2)
        .into_iter()
        .map(|w| w.classify(&grid).map(|r| (w, r)).map_err(|e| e.to_string()))
        .collect()
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> BallPoint {
    loop {
        let c: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 && norm <= 1.0 {
            let scaled = c.into_iter().map(|x| x * radius).collect();
            return BallPoint::new(scaled).expect("inside the ball");
        }
    }
}

fn kernel_golden() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for n in [2usize, 3] {
        for alpha in [0.0, 1.0, 2.5] {
            let w = RadialWeight::power_normalized(alpha, n as u32).map_err(|e| e.to_string())?;
            let ks = KernelSeries::build(&w, n, KernelOptions::new(0.9, 1e-12).relative()).map_err(|e| e.to_string())?;
            for _ in 0..100 {
                let z = random_point(&mut rng, n, 0.9f64.sqrt());
                let v = random_point(&mut rng, n, 0.9f64.sqrt());
                // B_z(v) depends on ⟨v, z⟩ = Σ v_i conj(z_i)
                let u: Complex64 = v.coords().iter().zip(z.coords()).map(|(a, b)| a * b.conj()).sum();
                let exact = (1.0 - u).powf(-(n as f64 + 1.0 + alpha));
                let got = ks.eval(&z, &v).map_err(|e| e.to_string())?;
                worst = worst.max((got - exact).norm() / exact.norm());
            }
        }
    }
    Ok((worst <= 1e-8, format!("max relative error {worst:.2e} (tol 1e-8)")))
}

fn reproducing() -> Outcome {
    let mut worst: f64 = 0.0;
    for w in shipped_corpus(2) {
        for order in 0..=5 {
            for m in multi_indices(2, order) {
                // A constant step profile, so the projection integrates instead of short-circuiting.
                let f = MonomialRadialFunction::new(
                    2,
                    vec![Term { m: m.clone(), coef: Complex64::new(1.0, 0.0), profile: Profile::constant(1.0) }],
                )
                .map_err(|e| e.to_string())?;
                let g = project(&w, &f).map_err(|e| e.to_string())?;
                let z = BallPoint::new(vec![Complex64::new(0.31, -0.17), Complex64::new(0.22, 0.4)]).unwrap();
                let zm: Complex64 = z.coords().iter().zip(&m).map(|(c, &k)| c.powu(k)).product();
                worst = worst.max((g.eval(&z) - zm).norm() / zm.norm());
            }
        }
    }
    Ok((worst <= 1e-10, format!("max coefficient error {worst:.2e} (tol 1e-10)")))
}

fn self_adjoint() -> Outcome {
    let mut worst: f64 = 0.0;
    for (w, rep) in classified()? {
        if !rep.verdicts.d.is_yes() {
            continue;
        }
        for p in [2.0, 4.0] {
            for j in 0..=10 {
                let g = adjoint_on_gj(&w, &w, j, 2, p, false).map_err(|e| e.to_string())?;
                worst = worst.max((g.ratio - 1.0).abs());
            }
        }
    }
    // (n−1)!/(2n−1)!: 1/6 for n = 2, 1/60 for n = 3
    let lebesgue = RadialWeight::power(0.0).unwrap();
    let mut verbatim_ok = true;
    let mut shown = Vec::new();
    for (n, expected) in [(2usize, 1.0 / 6.0), (3, 1.0 / 60.0)] {
        let r = adjoint_on_gj(&lebesgue, &lebesgue, 3, n, 2.0, true).map_err(|e| e.to_string())?.ratio;
        verbatim_ok &= (r - expected).abs() <= 1e-8 && (r - 1.0).abs() > 1e-3;
        shown.push(format!("n={n}: {r:.6}"));
    }
    Ok((
        worst <= 1e-8 && verbatim_ok,
        format!("max |ratio - 1| {worst:.2e} (tol 1e-8); verbatim constant {}", shown.join(", ")),
    ))
}

fn kernel_band() -> Outcome {
    let grid = RadialGrid::geometric(16, 8);
    let mut ok = true;
    let mut parts = Vec::new();
    for (w, rep) in classified()? {
        if !rep.verdicts.d.is_yes() {
            continue;
        }
        let opts = KernelOptions::new(1.0 - 2f64.powi(-10), 1e-10).relative().with_max_terms(100_000);
        let ks = KernelSeries::build(&w, 2, opts).map_err(|e| e.to_string())?;
        let mut sup = Vec::new();
        let mut bloch = Vec::new();
        for k in 0..=10 {
            let r = 1.0 - 2f64.powi(-k);
            let block = block_weight_measure(&w, &CarlesonBlock::new(BallPoint::radial(2, r).unwrap()), 2).map_err(|e| e.to_string())?;
            sup.push(ks.sup_norm_at(r).map_err(|e| e.to_string())? * block);
            bloch.push(ks.bloch_seminorm_at(r, &grid).map_err(|e| e.to_string())? * block);
        }
        let (a, b) = (max_over_min(&sup), max_over_min(&bloch));
        if a > 20.0 || b > 20.0 {
            ok = false;
            parts.push(format!("{w}: sup {a:.2}, bloch {b:.2}"));
        }
    }
    let detail = if ok { "all bands <= 20".to_string() } else { format!("over 20: {}", parts.join("; ")) };
    Ok((ok, detail))
}

fn mp_band() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut widest: f64 = 0.0;
    for (w, rep) in classified()? {
        if !rep.verdicts.d_hat.is_yes() {
            continue;
        }
        let ks = KernelSeries::build(&w, 2, KernelOptions::default()).map_err(|e| e.to_string())?;
        for p in [1.0, 2.0] {
            let ratios: Vec<f64> = (0..10)
                .map(|i| {
                    let rho = 0.3 + 0.65 * i as f64 / 9.0;
                    let m = mp_mean_at(&ks, rho, p, false)?.value;
                    let c = mp_comparison_integral(&w, rho, p, 2, false)?.value;
                    Ok(m.powf(p) / c)
                })
                .collect::<Result<_, bergman::error::Error>>()
                .map_err(|e| e.to_string())?;
            let b = max_over_min(&ratios);
            widest = widest.max(b);
            if b > 10.0 {
                ok = false;
                parts.push(format!("{w} p={p}: {b:.2}"));
            }
        }
    }
    let detail = if ok { format!("widest band {widest:.2} (<= 10)") } else { format!("over 10: {}", parts.join("; ")) };
    Ok((ok, detail))
}

fn littlewood_paley() -> Outcome {
    let mut worst: f64 = 0.0;
    for w in shipped_corpus(2) {
        for (_, lp) in littlewood_paley_sweep(&w, 2, 4).map_err(|e| e.to_string())? {
            worst = worst.max((lp.lhs / lp.rhs - 1.0).abs());
        }
    }
    Ok((worst <= 1e-6, format!("max |lhs/rhs - 1| {worst:.2e} (tol 1e-6)")))
}

fn carleson() -> Outcome {
    let grid = RadialGrid::dyadic(20);
    let mut worst: f64 = 0.0;
    for (w, rep) in classified()? {
        if !rep.verdicts.d.is_yes() {
            continue;
        }
        for p in [2.0, 3.0] {
            let c = carleson_ratio(&w, &w, p, p, 2, &grid).map_err(|e| e.to_string())?;
            worst = c.curve.iter().fold(worst, |m, &(_, r)| m.max((r - 1.0).abs()));
        }
    }
    let mut mismatches = Vec::new();
    for a in [0.0, 1.0, 2.0] {
        for b in [0.0, 1.0, 2.0] {
            let c = carleson_ratio(&RadialWeight::power(b).unwrap(), &RadialWeight::power(a).unwrap(), 2.0, 2.0, 2, &grid)
                .map_err(|e| e.to_string())?;
            if c.bounded != (b >= a) {
                mismatches.push(format!("alpha={a} beta={b}"));
            }
        }
    }
    Ok((
        worst <= 1e-12 && mismatches.is_empty(),
        format!("self ratio error {worst:.2e} (tol 1e-12); slope mismatches {}/9", mismatches.len()),
    ))
}

fn power_oracle() -> Outcome {
    let exps = [-0.5, 0.0, 1.0, 2.0, 3.5];
    let grid = RadialGrid::dyadic(20);
    let mut agree = 0;
    let mut total = 0;
    let mut wrong = Vec::new();
    for &a in &exps {
        for &b in &exps {
            for p in [1.25, 2.0, 4.0] {
                let pair = WeightPair::new(RadialWeight::power(a).unwrap(), RadialWeight::power(b).unwrap(), p, 2)
                    .map_err(|e| e.to_string())?;
                let rep = decide(&pair, &grid).map_err(|e| e.to_string())?;
                let expected = if p * (a + 1.0) > b + 1.0 { Boundedness::Bounded } else { Boundedness::Unbounded };
                total += 1;
                if rep.verdict == expected {
                    agree += 1;
                } else {
                    wrong.push(format!("({a},{b},{p})"));
                }
            }
        }
    }
    Ok((agree == total, format!("{agree}/{total} agree {}", wrong.join(" "))))
}

fn equivalence() -> Outcome {
    let grid = RadialGrid::dyadic(20);
    let corpus = mixed_corpus(2).map_err(|e| e.to_string())?;
    let mut ok = 0;
    for c in &corpus {
        let rep = decide(&c.pair, &grid).map_err(|e| e.to_string())?;
        let f = [rep.m.is_finite(), rep.n_sup.is_finite(), rep.kstar.is_finite()];
        if f[0] == f[1] && f[1] == f[2] && rep.verdict != Boundedness::Indeterminate {
            ok += 1;
        }
    }
    Ok((ok == corpus.len() && corpus.len() == 40, format!("{ok}/{} pairs consistent", corpus.len())))
}

fn gj_chain() -> Outcome {
    let grid = RadialGrid::dyadic(20);
    let corpus = mixed_corpus(2).map_err(|e| e.to_string())?;
    let mut bad = Vec::new();
    let mut degenerate = 0;
    for c in &corpus {
        let rep = decide(&c.pair, &grid).map_err(|e| e.to_string())?;
        let g = &rep.gj_ratios;
        let good = match rep.verdict {
            Boundedness::Bounded => {
                let c0 = g.iter().map(|p| p.ratio / p.h_root).fold(f64::INFINITY, f64::min);
                g.len() == 33 && g.iter().all(|p| p.ratio.is_finite()) && c0 > 0.0 && c0.is_finite()
            }
            Boundedness::Unbounded => {
                if g.iter().all(|p| p.ratio == f64::INFINITY) {
                    degenerate += 1;
                    true
                } else {
                    g[g.len() - 8..].windows(2).all(|w| w[1].ratio > w[0].ratio)
                }
            }
            Boundedness::Indeterminate => false,
        };
        if !good {
            bad.push(c.id.clone());
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "{}/{} pairs hold ({degenerate} unbounded pairs have infinite ratios throughout) {}",
            corpus.len() - bad.len(),
            corpus.len(),
            bad.join(" ")
        ),
    ))
}

fn classifier() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (w, rep) in classified()? {
        let v = &rep.verdicts;
        let good = match w.family() {
            Family::Power { .. } => v.d.is_yes() && v.r.is_yes(),
            Family::LogPower { alpha, beta } if *alpha == -1.0 && *beta == -2.0 => {
                v.d_hat.is_yes() && v.i.is_yes() && v.d_check == Verdict::No
            }
            Family::ExpDecay { c, beta } if *c == 1.0 && *beta == 1.0 => v.d_hat == Verdict::No,
            _ => continue,
        };
        checked += 1;
        if !good {
            bad.push(w.to_string());
        }
    }
    Ok((bad.is_empty() && checked >= 6, format!("{checked} weights checked {}", bad.join(" "))))
}

fn monte_carlo() -> Outcome {
    const SAMPLES: usize = 10_000_000;
    const SEED: u64 = 1;
    let e = |e: bergman::error::Error| e.to_string();
    let mut worst: f64 = 0.0;
    let mut rel = |lib: Complex64, mc: Complex64| worst = worst.max((lib - mc).norm() / lib.norm());
    for spec in [RadialWeight::power(0.0), RadialWeight::power(1.0), RadialWeight::log_power(0.0, 1.0)] {
        let w = spec.map_err(e)?;
        for a in [0.5, 0.9] {
            let lib = block_weight_measure(&w, &CarlesonBlock::new(BallPoint::radial(2, a).unwrap()), 2).map_err(e)?;
            let mc = montecarlo::block_measure(&w, a, SAMPLES, SEED).map_err(e)?;
            rel(lib.into(), mc.into());
        }
    }
    let z = BallPoint::new(vec![Complex64::new(0.3, 0.2), Complex64::new(-0.4, 0.0)]).unwrap();
    let rad = |p: &[Complex64; 2]| (p[0].norm_sqr() + p[1].norm_sqr()).sqrt();
    for alpha in [0.0, 1.0] {
        let w = RadialWeight::power_normalized(alpha, 2).map_err(e)?;
        let kernel = montecarlo::normalized_power_kernel(alpha, 2);
        let f = MonomialRadialFunction::new(
            2,
            vec![Term { m: vec![1, 0], coef: Complex64::new(1.0, 0.0), profile: Profile::Power(2.0) }],
        )
        .map_err(e)?;
        let lib = project(&w, &f).map_err(e)?.eval(&z);
        let mc = montecarlo::projection_at(&w, |p| p[0] * rad(p).powi(2), &kernel, &z, SAMPLES, SEED).map_err(e)?;
        rel(lib, mc);
        let step = Profile::step(0.5, 1.0, 2.0).map_err(e)?;
        let lib = project(&w, &MonomialRadialFunction::radial(2, step.clone()).map_err(e)?).map_err(e)?.eval(&z);
        let mc = montecarlo::projection_at(&w, |p| Complex64::new(step.eval(rad(p)), 0.0), &kernel, &z, SAMPLES, SEED)
            .map_err(e)?;
        rel(lib, mc);
        let ks = KernelSeries::build(&w, 2, KernelOptions::default()).map_err(e)?;
        let lib = maximal_project_radial(&w, &RadialTestFunction::new(step.clone()), &z, &ks).map_err(e)?;
        let mc = montecarlo::maximal_projection_at(&w, |p| step.eval(rad(p)), &kernel, &z, SAMPLES, SEED).map_err(e)?;
        rel(lib.into(), mc.into());
    }
    Ok((worst <= 1e-3, format!("max relative deviation {worst:.2e} over 12 spot checks (tol 1e-3)")))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "kernel golden values", budget: Some(Duration::from_secs(5)), run: kernel_golden },
        Criterion { id: 2, name: "reproducing property", budget: Some(Duration::from_secs(1)), run: reproducing },
        Criterion { id: 3, name: "self-adjoint anchor", budget: None, run: self_adjoint },
        Criterion { id: 4, name: "kernel norm band", budget: Some(Duration::from_secs(30)), run: kernel_band },
        Criterion { id: 5, name: "integral mean band", budget: Some(Duration::from_secs(60)), run: mp_band },
        Criterion { id: 6, name: "Littlewood-Paley identity", budget: None, run: littlewood_paley },
        Criterion { id: 7, name: "Carleson sanity", budget: None, run: carleson },
        Criterion { id: 8, name: "power-weight oracle", budget: Some(Duration::from_secs(60)), run: power_oracle },
        Criterion { id: 9, name: "criteria equivalence", budget: None, run: equivalence },
        Criterion { id: 10, name: "g_j lower-bound chain", budget: None, run: gj_chain },
        Criterion { id: 11, name: "classifier truth table", budget: None, run: classifier },
        Criterion { id: 12, name: "Monte-Carlo cross-checks", budget: None, run: monte_carlo },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (mut pass, mut detail) = match outcome {
            Ok(x) => x,
            Err(msg) => (false, format!("error: {msg}")),
        };
        if let Some(b) = c.budget {
            if elapsed > b {
                pass = false;
                detail.push_str(&format!("; over the {}s budget", b.as_secs()));
            }
        }
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {}: {} [{:.2}s]",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
