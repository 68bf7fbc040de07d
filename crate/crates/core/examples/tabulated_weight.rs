//! A weight known only through samples: classify it and use it in a pair.

use bergman::ballgeom::RadialGrid;
use bergman::criteria::{decide, WeightPair};
use bergman::weights::{RadialWeight, Table};

fn main() -> anyhow::Result<()> {
    // Samples of (1-r)^{1/2}(2 + sin(8r)) on a grid refining toward the boundary.
    let gaps: Vec<f64> = (0..=48).map(|k| 2f64.powf(-(k as f64) / 2.0)).collect();
    let grid: Vec<f64> = gaps.iter().map(|x| 1.0 - x).collect();
    let values: Vec<f64> = grid.iter().zip(&gaps).map(|(r, x)| x.sqrt() * (2.0 + (8.0 * r).sin())).collect();
    let w = RadialWeight::tabulated(Table::new(grid, values)?)?;
    let rep = w.classify(&RadialGrid::dyadic(20))?;
    println!("tail exponent {:.4}  verdicts {:?}", rep.exponent_fit, rep.verdicts);

    let pair = WeightPair::new(w, RadialWeight::power(1.0)?, 2.0, 2)?;
    let c = decide(&pair, &RadialGrid::dyadic(16))?;
    println!("against power(1), p = 2: {:?}  M {:.6}  ({:?})", c.verdict, c.m, c.m_curve.decided_by);
    Ok(())
}
