//! Cross-check block measures and a projection value against the
//! stratified Monte-Carlo oracle.

use bergman::ballgeom::{block_weight_measure, BallPoint, CarlesonBlock};
use bergman::montecarlo;
use bergman::projection::{project, MonomialRadialFunction, Profile};
use bergman::weights::RadialWeight;
use num_complex::Complex64;

fn main() -> anyhow::Result<()> {
    let samples = 1_000_000;
    let w = RadialWeight::log_power(0.0, 1.0)?;
    for a in [0.5, 0.9] {
        let lib = block_weight_measure(&w, &CarlesonBlock::new(BallPoint::radial(2, a)?), 2)?;
        let mc = montecarlo::block_measure(&w, a, samples, 1)?;
        println!("w(S_a), a = {a}: library {lib:.8}  monte-carlo {mc:.8}");
    }
    let w = RadialWeight::power_normalized(1.0, 2)?;
    let z = BallPoint::new(vec![Complex64::new(0.3, 0.2), Complex64::new(-0.4, 0.0)])?;
    let step = Profile::step(0.5, 1.0, 2.0)?;
    let lib = project(&w, &MonomialRadialFunction::radial(2, step.clone())?)?.eval(&z);
    let kernel = montecarlo::normalized_power_kernel(1.0, 2);
    let mc = montecarlo::projection_at(
        &w,
        |p| Complex64::new(step.eval((p[0].norm_sqr() + p[1].norm_sqr()).sqrt()), 0.0),
        &kernel,
        &z,
        samples,
        2,
    )?;
    println!("P(step)(z): library {lib:.8}  monte-carlo {mc:.8}");
    Ok(())
}
