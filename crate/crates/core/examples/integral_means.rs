//! Integral means of the kernel on spheres against the radial comparison
//! integral, and the Littlewood-Paley identity for low-order monomials.

use bergman::kernel::{KernelOptions, KernelSeries};
use bergman::norms::{littlewood_paley_sweep, mp_comparison_integral, mp_mean_at};
use bergman::weights::RadialWeight;

fn main() -> anyhow::Result<()> {
    let w = RadialWeight::power(1.0)?;
    let ks = KernelSeries::build(&w, 2, KernelOptions::default())?;
    for p in [1.0, 2.0, 3.0] {
        println!("p = {p}");
        for rho in [0.3, 0.6, 0.8, 0.95] {
            let m = mp_mean_at(&ks, rho, p, false)?;
            let c = mp_comparison_integral(&w, rho, p, 2, false)?;
            println!("  rho {rho:.2}  M_p^p {:>12.6}  comparison {:>12.6}  ratio {:.4}", m.value.powf(p), c.value, m.value.powf(p) / c.value);
        }
    }
    println!("\nLittlewood-Paley, |m| <= 3");
    for (m, lp) in littlewood_paley_sweep(&w, 2, 3)? {
        println!("  m = {m:?}  lhs {:.10}  rhs {:.10}", lp.lhs, lp.rhs);
    }
    Ok(())
}
