//! Carleson ratio for power weights: bounded exactly when the measure
//! exponent is at least the weight exponent.

use bergman::ballgeom::RadialGrid;
use bergman::norms::carleson_ratio;
use bergman::weights::RadialWeight;

fn main() -> anyhow::Result<()> {
    let grid = RadialGrid::dyadic(20);
    for (alpha, beta) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (2.0, 1.0)] {
        let mu = RadialWeight::power(beta)?;
        let w = RadialWeight::power(alpha)?;
        let rep = carleson_ratio(&mu, &w, 2.0, 2.0, 2, &grid)?;
        let last = rep.curve.last().map(|c| c.1).unwrap_or(f64::NAN);
        println!("alpha {alpha}  beta {beta}  tail slope {:+.4}  last ratio {last:.4e}  bounded {}", rep.tail_slope, rep.bounded);
    }
    Ok(())
}
