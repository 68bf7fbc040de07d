//! Points, Carleson blocks and sphere integrals on the unit ball of ℂⁿ.
//!
//! Sphere integrals of functions of `⟨η, ζ⟩` are reduced to the disk:
//! `∫_𝕊 g(⟨e₁,η⟩) dσ = (n−1)∫_𝔻 g(ξ)(1−|ξ|²)^{n−2} dA(ξ)` for `n ≥ 2`
//! and a circle average for `n = 1`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, integrate, Tolerance};
use crate::special::ln_gamma;
use crate::weights::RadialWeight;

pub const MAX_DIM: usize = 4;

pub fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::Domain(format!("dimension n = {n} outside 1..={MAX_DIM}")))
    }
}

/// `⟨a, b⟩ = Σ aᵢ conj(bᵢ)`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn norm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    coords: Vec<Complex64>,
    norm: f64,
}

impl BallPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        check_dim(coords.len())?;
        let norm = norm(&coords);
        if !(norm < 1.0) {
            return Err(Error::Domain(format!("|z| = {norm} is not inside the unit ball")));
        }
        Ok(Self { coords, norm })
    }

    /// `r·e₁` in ℂⁿ.
    pub fn radial(n: usize, r: f64) -> Result<Self> {
        let mut coords = vec![Complex64::new(0.0, 0.0); n];
        if n > 0 {
            coords[0] = Complex64::new(r, 0.0);
        }
        Self::new(coords)
    }

    pub fn origin(n: usize) -> Result<Self> {
        Self::radial(n, 0.0)
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `⟨self, other⟩`.
    pub fn inner(&self, other: &BallPoint) -> Complex64 {
        inner(&self.coords, &other.coords)
    }

    pub fn scaled(&self, t: f64) -> Result<BallPoint> {
        Self::new(self.coords.iter().map(|c| c * t).collect())
    }
}

/// `d(ξ, τ) = |1 − ⟨ξ, τ⟩|^{1/2}` on the closed ball.
pub fn nonisotropic_distance(xi: &[Complex64], tau: &[Complex64]) -> Result<f64> {
    if xi.len() != tau.len() {
        return Err(Error::Domain("points have different dimensions".into()));
    }
    for p in [xi, tau] {
        if norm(p) > 1.0 + 1e-12 {
            return Err(Error::Domain("point outside the closed unit ball".into()));
        }
    }
    Ok((Complex64::new(1.0, 0.0) - inner(xi, tau)).norm().sqrt())
}

/// The Carleson block `S_a`; the apex `a = 0` stands for the whole ball.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlesonBlock {
    apex: BallPoint,
}

impl CarlesonBlock {
    pub fn new(apex: BallPoint) -> Self {
        Self { apex }
    }

    pub fn apex(&self) -> &BallPoint {
        &self.apex
    }

    /// Radius `√(1−|a|)` of the cap `Q_a` in the metric `d`.
    pub fn cap_radius(&self) -> f64 {
        (1.0 - self.apex.norm).sqrt()
    }
}

/// Tensor rule on the weighted disk: Gauss–Legendre in `u = |ξ|²` times the
/// trapezoid rule in angle. Exact for `ξ^a ξ̄^b` whenever `a + b < angular` and
/// `a + n − 2 < 2·radial`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskQuadratureRule {
    dim: usize,
    u_nodes: Vec<f64>,
    u_weights: Vec<f64>,
    angular: usize,
}

impl DiskQuadratureRule {
    pub fn new(dim: usize, radial: usize, angular: usize) -> Result<Self> {
        check_dim(dim)?;
        if radial == 0 || angular == 0 {
            return Err(Error::Domain("node counts must be positive".into()));
        }
        if dim == 1 {
            return Ok(Self {
                dim,
                u_nodes: vec![1.0],
                u_weights: vec![1.0],
                angular,
            });
        }
        let (x, w) = gauss_legendre(radial);
        let k = (dim - 2) as i32;
        let nm1 = (dim - 1) as f64;
        let u_nodes: Vec<f64> = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
        let u_weights = u_nodes
            .iter()
            .zip(&w)
            .map(|(u, wi)| 0.5 * wi * nm1 * (1.0 - u).powi(k))
            .collect();
        Ok(Self {
            dim,
            u_nodes,
            u_weights,
            angular,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radial_nodes(&self) -> (&[f64], &[f64]) {
        (&self.u_nodes, &self.u_weights)
    }

    pub fn angular(&self) -> usize {
        self.angular
    }

    /// `(n−1)∫_𝔻 g(ρξ)(1−|ξ|²)^{n−2} dA(ξ)`, or the circle mean for `n = 1`.
    pub fn integrate<G: Fn(Complex64) -> Complex64>(&self, g: &G, rho: f64) -> Complex64 {
        self.integrate_with_scale(g, rho).0
    }

    /// The integral together with the same rule applied to `|g|`.
    pub fn integrate_with_scale<G: Fn(Complex64) -> Complex64>(&self, g: &G, rho: f64) -> (Complex64, f64) {
        let m = self.angular as f64;
        let mut total = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (u, w) in self.u_nodes.iter().zip(&self.u_weights) {
            let s = rho * u.sqrt();
            let mut ring = Complex64::new(0.0, 0.0);
            let mut ring_abs = 0.0;
            for j in 0..self.angular {
                let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m;
                let v = g(Complex64::from_polar(s, th));
                ring += v;
                ring_abs += v.norm();
            }
            total += ring / m * w;
            scale += ring_abs / m * w;
        }
        (total, scale)
    }
}

/// `∫_𝕊 g(ρ⟨e₁,η⟩) dσ(η)`, doubling node counts until two estimates agree to `tol`.
pub fn sphere_slice_integral<G: Fn(Complex64) -> Complex64>(g: G, rho: f64, n: usize, tol: f64) -> Result<Complex64> {
    check_dim(n)?;
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("slice radius {rho} outside [0, 1]")));
    }
    let (mut radial, mut angular) = (8usize, 16usize);
    let mut prev = DiskQuadratureRule::new(n, radial, angular)?.integrate(&g, rho);
    loop {
        radial *= 2;
        angular *= 2;
        let (next, scale) = DiskQuadratureRule::new(n, radial, angular)?.integrate_with_scale(&g, rho);
        let diff = (next - prev).norm();
        // Cancelling integrands are judged against the integral of |g|.
        if diff <= tol * next.norm().max(1e-3 * scale) || diff == 0.0 {
            return Ok(next);
        }
        if radial >= 1024 {
            return Err(Error::Quadrature {
                what: format!("slice integral at rho = {rho}"),
                estimate: next.norm(),
                error: diff,
            });
        }
        prev = next;
    }
}

/// `∫_𝕊 |η₁|^{2c} dσ = Γ(n)Γ(c+1)/Γ(n+c)`.
pub fn monomial_sphere_integral(c: f64, n: usize) -> Result<f64> {
    check_dim(n)?;
    if !(c > -1.0) {
        return Err(Error::Domain(format!("exponent c = {c} must exceed -1")));
    }
    let n = n as f64;
    Ok((ln_gamma(n) + ln_gamma(c + 1.0) - ln_gamma(n + c)).exp())
}

/// `σ(Q_a)` for the cap `{η : |1 − ⟨a/|a|, η⟩| ≤ 1 − |a|}`; `1` for `a = 0`.
///
/// Writing `ξ = 1 − t e^{iφ}` turns the indicator into the limits `t ≤ δ`,
/// `|φ| < arccos(t/2)`, so the integrand is smooth:
/// `σ = (n−1)/π ∫₀^δ t ∫ (2t cos φ − t²)^{n−2} dφ dt`.
pub fn cap_measure(block: &CarlesonBlock, n: usize) -> Result<f64> {
    check_dim(n)?;
    let a = block.apex().norm();
    if a == 0.0 {
        return Ok(1.0);
    }
    let delta = 1.0 - a;
    if n == 1 {
        return Ok(2.0 * (delta / 2.0).asin() / std::f64::consts::PI);
    }
    let k = (n - 2) as i32;
    let tol = Tolerance::relative(1e-13);
    let outer = integrate(
        |t| {
            let lim = (t / 2.0).acos();
            let inner = if k == 0 {
                2.0 * lim
            } else {
                integrate(|phi| (2.0 * t * phi.cos() - t * t).max(0.0).powi(k), -lim, lim, tol)
                    .map(|r| r.value)
                    .unwrap_or(f64::NAN)
            };
            t * inner
        },
        0.0,
        delta,
        tol,
    )?;
    Ok((n - 1) as f64 / std::f64::consts::PI * outer.value)
}

/// `ln ω(S_a)` with `ω(S_a) = 2n·σ(Q_a)·∫_{|a|}^1 r^{2n−1} ω(r) dr`.
pub fn log_block_weight_measure(w: &RadialWeight, block: &CarlesonBlock, n: usize) -> Result<f64> {
    let cap = cap_measure(block, n)?;
    let a = block.apex().norm();
    let radial = if a == 0.0 {
        w.log_moment((2 * n - 1) as f64)?
    } else {
        w.log_upper_moment((2 * n - 1) as f64, 1.0 - a)?
    };
    Ok((2.0 * n as f64).ln() + cap.ln() + radial)
}

/// `ω(S_a)`.
pub fn block_weight_measure(w: &RadialWeight, block: &CarlesonBlock, n: usize) -> Result<f64> {
    Ok(log_block_weight_measure(w, block, n)?.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScheme {
    /// `r_k = 1 − 2^{−k}`.
    Dyadic,
    /// `r_j = 1 − 1/(2j+1)`.
    Odd,
    Uniform,
    /// Arbitrary gaps supplied by the caller.
    Custom,
}

/// Increasing radii in `[0, 1)`, stored with their gaps `1 − r` for precision.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    scheme: GridScheme,
    gaps: Vec<f64>,
}

impl RadialGrid {
    /// `r_k = 1 − 2^{−k}`, `k = 0..=k_max`.
    pub fn dyadic(k_max: usize) -> Self {
        Self {
            scheme: GridScheme::Dyadic,
            gaps: (0..=k_max).map(|k| 2f64.powi(-(k as i32))).collect(),
        }
    }

    /// `r_j = 1 − 1/(2j+1)`, `j = 0..=j_max`.
    pub fn odd(j_max: usize) -> Self {
        Self {
            scheme: GridScheme::Odd,
            gaps: (0..=j_max).map(|j| 1.0 / (2 * j + 1) as f64).collect(),
        }
    }

    /// `count` equally spaced radii from `lo` to `hi` inclusive.
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi < 1.0 && count >= 2) {
            return Err(Error::Domain("uniform grid needs 0 <= lo < hi < 1 and two nodes".into()));
        }
        let step = (hi - lo) / (count - 1) as f64;
        Ok(Self {
            scheme: GridScheme::Uniform,
            gaps: (0..count).map(|i| 1.0 - (lo + step * i as f64)).collect(),
        })
    }

    /// Radii `1 − x` for the given gaps `x ∈ (0, 1]`, sorted so radii increase.
    pub fn from_gaps(mut gaps: Vec<f64>) -> Result<Self> {
        if gaps.is_empty() || gaps.iter().any(|x| !(*x > 0.0 && *x <= 1.0)) {
            return Err(Error::Domain("grid gaps must lie in (0, 1]".into()));
        }
        gaps.sort_by(|a, b| b.total_cmp(a));
        gaps.dedup();
        Ok(Self {
            scheme: GridScheme::Custom,
            gaps,
        })
    }

    /// Gaps `2^{−j/per_octave}` for `j = 0..=octaves·per_octave`.
    pub fn geometric(octaves: usize, per_octave: usize) -> Self {
        let per = per_octave.max(1);
        Self {
            scheme: GridScheme::Custom,
            gaps: (0..=octaves * per).map(|j| 2f64.powf(-(j as f64) / per as f64)).collect(),
        }
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.gaps.iter().map(|x| 1.0 - x).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn distance_examples() {
        let e1 = [c(1.0, 0.0), c(0.0, 0.0)];
        let e2 = [c(0.0, 0.0), c(1.0, 0.0)];
        let m1 = [c(-1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(nonisotropic_distance(&e1, &e1).unwrap(), 0.0);
        assert_relative_eq!(nonisotropic_distance(&e1, &m1).unwrap(), 2f64.sqrt());
        assert_eq!(nonisotropic_distance(&e1, &e2).unwrap(), 1.0);
        assert!(nonisotropic_distance(&[c(2.0, 0.0)], &[c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn ball_point_validation() {
        assert!(BallPoint::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).is_err());
        assert!(BallPoint::new(vec![c(0.1, 0.0); 5]).is_err());
        let p = BallPoint::new(vec![c(0.3, 0.4), c(0.0, 0.0)]).unwrap();
        assert_relative_eq!(p.norm(), 0.5);
    }

    #[test]
    fn slice_integral_examples() {
        for n in 1..=4 {
            let one = sphere_slice_integral(|_| c(1.0, 0.0), 0.7, n, 1e-12).unwrap();
            assert_relative_eq!(one.re, 1.0, max_relative = 1e-13);
            let lin = sphere_slice_integral(|u| u, 0.7, n, 1e-12).unwrap();
            assert!(lin.norm() < 1e-14);
        }
        let sq = sphere_slice_integral(|u| c(u.norm_sqr(), 0.0), 1.0, 2, 1e-12).unwrap();
        assert_relative_eq!(sq.re, 0.5, max_relative = 1e-13);
    }

    #[test]
    fn slice_integral_on_monomials() {
        for n in 1..=4 {
            for j in 0..=6i32 {
                for k in 0..=6i32 {
                    let v = sphere_slice_integral(|u| u.powi(j) * u.conj().powi(k), 1.0, n, 1e-13).unwrap();
                    if j == k {
                        let exact = monomial_sphere_integral(j as f64, n).unwrap();
                        assert_relative_eq!(v.re, exact, max_relative = 1e-12);
                    } else {
                        assert!(v.norm() < 1e-12, "n={n} j={j} k={k}: {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn monomial_examples() {
        assert_relative_eq!(monomial_sphere_integral(0.0, 3).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(monomial_sphere_integral(1.0, 2).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(monomial_sphere_integral(2.0, 3).unwrap(), 1.0 / 6.0, max_relative = 1e-14);
        // (n−1)! m!/(n−1+|m|)! with m = (2,0,0): 2!·2!/4! = 1/6
        assert_relative_eq!(2.0 * 2.0 / 24.0, 1.0 / 6.0);
    }

    /// `(n−1)/π ∫_{1−δ}^1 2s(1−s²)^{n−2} arccos((1+s²−δ²)/(2s)) ds`, a polar-form oracle.
    fn cap_oracle(delta: f64, n: usize) -> f64 {
        let k = (n - 2) as i32;
        let r = integrate(
            |s| {
                let arg = ((1.0 + s * s - delta * delta) / (2.0 * s)).clamp(-1.0, 1.0);
                2.0 * s * (1.0 - s * s).powi(k) * arg.acos()
            },
            1.0 - delta,
            1.0,
            Tolerance::relative(1e-13),
        )
        .unwrap();
        (n - 1) as f64 / std::f64::consts::PI * r.value
    }

    #[test]
    fn cap_measure_against_polar_oracle() {
        for n in 2..=4 {
            for a in [0.1, 0.5, 0.9, 0.999] {
                let block = CarlesonBlock::new(BallPoint::radial(n, a).unwrap());
                let v = cap_measure(&block, n).unwrap();
                assert_relative_eq!(v, cap_oracle(1.0 - a, n), max_relative = 1e-9);
            }
        }
        assert_eq!(cap_measure(&CarlesonBlock::new(BallPoint::origin(2).unwrap()), 2).unwrap(), 1.0);
    }

    #[test]
    fn cap_measure_comparable_to_power() {
        for n in 2..=4 {
            let ratios: Vec<f64> = (1..=20)
                .map(|k| {
                    let a = 1.0 - 2f64.powi(-k);
                    let v = cap_measure(&CarlesonBlock::new(BallPoint::radial(n, a).unwrap()), n).unwrap();
                    v / (1.0 - a).powi(n as i32)
                })
                .collect();
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().copied().fold(0.0, f64::max);
            assert!(hi / lo < 4.0, "n={n}: {lo}..{hi}");
        }
    }

    #[test]
    fn block_measure_of_whole_ball() {
        let w = RadialWeight::power(0.0).unwrap();
        let b = CarlesonBlock::new(BallPoint::origin(2).unwrap());
        assert_relative_eq!(block_weight_measure(&w, &b, 2).unwrap(), 1.0, max_relative = 1e-13);
        for w in crate::weights::shipped_corpus(3) {
            let b = CarlesonBlock::new(BallPoint::origin(3).unwrap());
            let expect = 6.0 * w.moment(5.0).unwrap();
            assert_relative_eq!(block_weight_measure(&w, &b, 3).unwrap(), expect, max_relative = 1e-10);
        }
    }

    #[test]
    fn grids() {
        let d = RadialGrid::dyadic(3);
        assert_eq!(d.nodes(), vec![0.0, 0.5, 0.75, 0.875]);
        let o = RadialGrid::odd(2);
        assert_relative_eq!(o.nodes()[2], 0.8);
        assert!(RadialGrid::uniform(0.5, 0.2, 3).is_err());
    }

    proptest! {
        #[test]
        fn distance_symmetric(a in proptest::collection::vec(-0.49f64..0.49, 4), b in proptest::collection::vec(-0.49f64..0.49, 4)) {
            let p = [c(a[0], a[1]), c(a[2], a[3])];
            let q = [c(b[0], b[1]), c(b[2], b[3])];
            let d1 = nonisotropic_distance(&p, &q).unwrap();
            let d2 = nonisotropic_distance(&q, &p).unwrap();
            prop_assert!((d1 - d2).abs() < 1e-15);
        }

        #[test]
        fn cap_measure_increases_with_radius(a in 0.01f64..0.99, b in 0.01f64..0.99) {
            prop_assume!((a - b).abs() > 1e-3);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let m = |t: f64| cap_measure(&CarlesonBlock::new(BallPoint::radial(2, t).unwrap()), 2).unwrap();
            prop_assert!(m(lo) > m(hi));
        }
    }

    proptest! {
        #[test]
        fn grids_increase_inside_unit_interval(lo in 0.0f64..0.5, width in 0.01f64..0.49, count in 2usize..40, k in 3usize..30) {
            for nodes in [RadialGrid::uniform(lo, lo + width, count).unwrap().nodes(), RadialGrid::dyadic(k).nodes()] {
                prop_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(nodes.iter().all(|&r| (0.0..1.0).contains(&r)));
            }
        }
    }
}
