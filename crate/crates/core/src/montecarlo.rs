//! Brute-force ball integrals for `n = 2` by jittered stratified sampling.
//!
//! Points are drawn through the volume-preserving map
//! `(u, t, v₁, v₂) ↦ u^{1/4}(√t e^{2πiv₁}, √(1−t) e^{2πiv₂})` from the unit
//! 4-cube onto the ball with normalised volume. Each cube cell receives one
//! uniformly jittered point.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ballgeom::BallPoint;
use crate::error::{Error, Result};
use crate::weights::RadialWeight;

use std::f64::consts::PI;

/// Mean of `f` over a box in `[0,1]^D`, one jittered sample per cell of a
/// `side^D` grid.
fn stratified_mean<const D: usize, F: FnMut([f64; D]) -> Complex64>(
    lo: [f64; D],
    hi: [f64; D],
    side: usize,
    seed: u64,
    mut f: F,
) -> Complex64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = side.pow(D as u32);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut idx = [0usize; D];
    for _ in 0..total {
        let mut x = [0.0; D];
        for d in 0..D {
            let cell = (idx[d] as f64 + rng.random::<f64>()) / side as f64;
            x[d] = lo[d] + (hi[d] - lo[d]) * cell;
        }
        acc += f(x);
        for d in (0..D).rev() {
            idx[d] += 1;
            if idx[d] < side {
                break;
            }
            idx[d] = 0;
        }
    }
    acc / total as f64
}

fn side_for(samples: usize, dims: u32) -> usize {
    ((samples as f64).powf(1.0 / dims as f64).round() as usize).max(2)
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 16 {
        return Err(Error::Domain("Monte-Carlo oracle needs at least 16 samples".into()));
    }
    Ok(())
}

/// `ω(S_a)` for an apex on the positive `z₁`-axis with `|a| = a`.
pub fn block_measure(w: &RadialWeight, a: f64, samples: usize, seed: u64) -> Result<f64> {
    check_samples(samples)?;
    if !(0.0 < a && a < 1.0) {
        return Err(Error::Domain(format!("apex modulus {a} outside (0, 1)")));
    }
    let delta = 1.0 - a;
    // Bounding box of the block in (u, t, v₁); the second angle does not enter.
    let t_lo = (1.0 - delta).powi(2);
    let phi_max = (delta / (1.0 - delta)).min(1.0).asin();
    let lo = [a.powi(4), t_lo, -phi_max / (2.0 * PI)];
    let hi = [1.0, 1.0, phi_max / (2.0 * PI)];
    let volume: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
    let mean = stratified_mean(lo, hi, side_for(samples, 3), seed, |[u, t, v]| {
        let s = t.sqrt();
        let phi = 2.0 * PI * v;
        let xi = Complex64::new(1.0 - s * phi.cos(), -s * phi.sin());
        if xi.norm() > delta {
            return Complex64::new(0.0, 0.0);
        }
        let r = u.powf(0.25);
        Complex64::new(w.density(r).unwrap_or(0.0), 0.0)
    });
    Ok(volume * mean.re)
}

fn ball_point(x: [f64; 4]) -> [Complex64; 2] {
    let [u, t, v1, v2] = x;
    let r = u.powf(0.25);
    [
        Complex64::from_polar(r * t.sqrt(), 2.0 * PI * v1),
        Complex64::from_polar(r * (1.0 - t).sqrt(), 2.0 * PI * v2),
    ]
}

/// `∫_𝔹 g(w) ω(|w|) dV(w)` over the whole ball.
pub fn ball_integral<G: Fn(&[Complex64; 2]) -> Complex64>(
    w: &RadialWeight,
    g: G,
    samples: usize,
    seed: u64,
) -> Result<Complex64> {
    check_samples(samples)?;
    Ok(stratified_mean([0.0; 4], [1.0; 4], side_for(samples, 4), seed, |x| {
        let pt = ball_point(x);
        let r = (pt[0].norm_sqr() + pt[1].norm_sqr()).sqrt();
        g(&pt) * w.density(r.min(1.0 - 1e-16)).unwrap_or(0.0)
    }))
}

fn check_z(z: &BallPoint) -> Result<[Complex64; 2]> {
    match z.coords() {
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::Domain("Monte-Carlo oracles are implemented for n = 2".into())),
    }
}

/// `∫ f(w) K(⟨z, w⟩) ω dV(w)`, the projection of `f` at `z` for the kernel `K`.
pub fn projection_at<F, K>(w: &RadialWeight, f: F, kernel: K, z: &BallPoint, samples: usize, seed: u64) -> Result<Complex64>
where
    F: Fn(&[Complex64; 2]) -> Complex64,
    K: Fn(Complex64) -> Complex64,
{
    let z = check_z(z)?;
    ball_integral(
        w,
        |pt| {
            let zw = z[0] * pt[0].conj() + z[1] * pt[1].conj();
            f(pt) * kernel(zw)
        },
        samples,
        seed,
    )
}

/// `∫ f(w) |K(⟨z, w⟩)| ω dV(w)`.
pub fn maximal_projection_at<F, K>(w: &RadialWeight, f: F, kernel: K, z: &BallPoint, samples: usize, seed: u64) -> Result<f64>
where
    F: Fn(&[Complex64; 2]) -> f64,
    K: Fn(Complex64) -> Complex64,
{
    let z = check_z(z)?;
    let v = ball_integral(
        w,
        |pt| {
            let zw = z[0] * pt[0].conj() + z[1] * pt[1].conj();
            Complex64::new(f(pt) * kernel(zw).norm(), 0.0)
        },
        samples,
        seed,
    )?;
    Ok(v.re)
}

/// `(1 − u)^{−(n+1+α)}`, the kernel of the normalised power weight `c_α(1−|w|²)^α`.
pub fn normalized_power_kernel(alpha: f64, n: usize) -> impl Fn(Complex64) -> Complex64 {
    let e = -(n as f64 + 1.0 + alpha);
    move |u| (Complex64::new(1.0, 0.0) - u).powf(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volume_and_monomial() {
        let w = RadialWeight::power(0.0).unwrap();
        let one = ball_integral(&w, |_| Complex64::new(1.0, 0.0), 20_000, 1).unwrap();
        assert!((one.re - 1.0).abs() < 1e-12);
        // ∫|w₁|² dV = 1/(n(n+1)) · n = 1/3 for n = 2
        let m = ball_integral(&w, |p| Complex64::new(p[0].norm_sqr(), 0.0), 50_000, 2).unwrap();
        assert!((m.re - 1.0 / 3.0).abs() < 1e-3, "{m}");
    }

    #[test]
    fn whole_block_fraction() {
        // a → 0 is excluded; at |a| = 1/2 the closed form is 4σ(Q)·(1 − a⁴)/4 for ω = 1.
        let w = RadialWeight::power(0.0).unwrap();
        let v = block_measure(&w, 0.5, 200_000, 3).unwrap();
        let a: f64 = 0.5;
        let cap = crate::ballgeom::cap_measure(
            &crate::ballgeom::CarlesonBlock::new(BallPoint::radial(2, a).unwrap()),
            2,
        )
        .unwrap();
        assert!((v / (cap * (1.0 - a.powi(4))) - 1.0).abs() < 1e-2, "{v}");
    }

    #[test]
    fn seeded_runs_repeat() {
        let w = RadialWeight::power(1.0).unwrap();
        let a = block_measure(&w, 0.7, 4096, 9).unwrap();
        let b = block_measure(&w, 0.7, 4096, 9).unwrap();
        assert_eq!(a, b);
    }
}
