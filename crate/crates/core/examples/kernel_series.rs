//! Build a kernel series, compare it with the closed form for a standard
//! weight and print how sup-norm and Bloch norm scale against block measures.

use bergman::ballgeom::{block_weight_measure, BallPoint, CarlesonBlock, RadialGrid};
use bergman::kernel::{KernelOptions, KernelSeries};
use bergman::weights::RadialWeight;
use num_complex::Complex64;

fn main() -> anyhow::Result<()> {
    let n = 2;
    let w = RadialWeight::power_normalized(1.0, n as u32)?;
    let ks = KernelSeries::build(&w, n, KernelOptions::new(0.9, 1e-12))?;
    let z = BallPoint::new(vec![Complex64::new(0.5, 0.1), Complex64::new(-0.2, 0.4)])?;
    let v = BallPoint::new(vec![Complex64::new(0.3, -0.6), Complex64::new(0.1, 0.2)])?;
    let exact = (1.0 - v.inner(&z)).powf(-(n as f64 + 2.0));
    println!("K = {} terms, B_z(v) = {:.12}, closed form {:.12}", ks.truncation() + 1, ks.eval(&z, &v)?, exact);

    let w = RadialWeight::log_power(0.0, 1.0)?;
    let opts = KernelOptions::new(1.0 - 2f64.powi(-10), 1e-10).relative().with_max_terms(100_000);
    let ks = KernelSeries::build(&w, n, opts)?;
    let grid = RadialGrid::geometric(16, 8);
    println!("\n{w}\n{:>10} {:>14} {:>14}", "|z|", "sup*w(S_z)", "bloch*w(S_z)");
    for k in 0..=10 {
        let r = 1.0 - 2f64.powi(-k);
        let block = block_weight_measure(&w, &CarlesonBlock::new(BallPoint::radial(n, r)?), n)?;
        println!("{r:>10.6} {:>14.6} {:>14.6}", ks.sup_norm_at(r)? * block, ks.bloch_seminorm_at(r, &grid)? * block);
    }
    Ok(())
}
