//! Project monomial-radial functions, evaluate the maximal operator on a
//! radial step and check the adjoint ratio on the g_j test functions.

use bergman::ballgeom::BallPoint;
use bergman::kernel::{KernelOptions, KernelSeries};
use bergman::projection::{adjoint_on_gj, maximal_project_radial, project, MonomialRadialFunction, Profile, RadialTestFunction, Term};
use bergman::weights::RadialWeight;
use num_complex::Complex64;

fn main() -> anyhow::Result<()> {
    let w = RadialWeight::log_power(1.0, 1.0)?;
    let z = BallPoint::new(vec![Complex64::new(0.3, 0.2), Complex64::new(-0.4, 0.0)])?;
    let f = MonomialRadialFunction::new(
        2,
        vec![
            Term { m: vec![1, 0], coef: Complex64::new(1.0, 0.0), profile: Profile::Power(2.0) },
            Term { m: vec![0, 2], coef: Complex64::new(0.0, 1.0), profile: Profile::step(0.5, 1.0, -1.0)? },
        ],
    )?;
    let g = project(&w, &f)?;
    println!("P f(z) = {:.10}", g.eval(&z));

    let step = RadialTestFunction::new(Profile::step(0.5, 1.0, 2.0)?);
    let ks = KernelSeries::build(&w, 2, KernelOptions::default())?;
    println!("P+ step(z) = {:.10}", maximal_project_radial(&w, &step, &z, &ks)?);

    let v = RadialWeight::power(2.0)?;
    for j in [0, 4, 16, 32] {
        let a = adjoint_on_gj(&w, &v, j, 2, 2.0, false)?;
        println!("j {j:>2}  kappa {:.6e}  ratio {:.6}", a.kappa, a.ratio);
    }
    Ok(())
}
