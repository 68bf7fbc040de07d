//! Decide boundedness for a few weight pairs and show the supporting
//! quantities: M, N, K*, the g_j chain and the Schur test.

use bergman::ballgeom::RadialGrid;
use bergman::criteria::{decide, schur_test_check, WeightPair};
use bergman::weights::RadialWeight;

fn main() -> anyhow::Result<()> {
    let grid = RadialGrid::dyadic(20);
    let pairs = [
        (RadialWeight::power(1.0)?, RadialWeight::power(1.0)?, 2.0),
        (RadialWeight::power(0.0)?, RadialWeight::power(2.0)?, 2.0),
        (RadialWeight::power(0.0)?, RadialWeight::log_power(1.0, 2.0)?, 2.0),
        (RadialWeight::log_power(1.0, -1.0)?, RadialWeight::power(1.0)?, 2.0),
    ];
    for (omega, upsilon, p) in pairs {
        let pair = WeightPair::new(omega, upsilon, p, 2)?;
        let rep = decide(&pair, &grid)?;
        println!("{} vs {} (p = {p}): {:?}", rep.omega, rep.upsilon, rep.verdict);
        println!("  M {:.6}  N {:.6}  K* {:.6}  inner divergent {}", rep.m, rep.n_sup, rep.kstar, rep.inner_divergent);
        let tail: Vec<String> = rep.gj_ratios.iter().rev().take(4).rev().map(|g| format!("{:.4}", g.ratio)).collect();
        println!("  g_j ratios (last 4) {}  lower constant {:.4}", tail.join(" "), rep.gj_lower_constant);
        if rep.m.is_finite() {
            let s = schur_test_check(&pair, &RadialGrid::dyadic(10))?;
            println!("  Schur constant {:.6}  algebra error {:.2e}", s.constant, s.algebra_error);
        }
    }
    Ok(())
}
