//! Half-plane image Green's functions, reference fields and oracle fields.
//!
//! With `Φ(z) = (i/4)·H₀⁽¹⁾(z)` and `P* = (x_P, −y_P)`:
//!
//! * `G₁(M, P) = Φ(k|M − P|) − Φ(k|M − P*|)` vanishes on `y = 0` (Dirichlet);
//! * `G₂(M, P) = Φ(k|M − P|) + Φ(k|M − P*|)` has zero `y`-derivative there (Neumann).
//!
//! Time dependence is `e^{−iωt}`; plane waves travel downward.

use crate::geometry::{BoundaryProfile, Point};
use crate::special::{hankel_unchecked, HankelValue};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel evaluated at coincident points {0:?}")]
    CoincidentPoints(Point),
    #[error("wavenumber {0} must satisfy Re k > 0 and Im k >= 0")]
    InvalidWavenumber(C64),
    #[error("source {0:?} or its mirror image lies inside the domain")]
    SourceInsideDomain(Point),
}

/// Complex wavenumber with `Re k > 0`, `Im k ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumber(C64);

impl Wavenumber {
    pub fn new(k: C64) -> Result<Self, KernelError> {
        if k.re > 0.0 && k.im >= 0.0 && k.re.is_finite() && k.im.is_finite() {
            Ok(Self(k))
        } else {
            Err(KernelError::InvalidWavenumber(k))
        }
    }

    pub fn real(k: f64) -> Result<Self, KernelError> {
        Self::new(C64::new(k, 0.0))
    }

    pub fn value(self) -> C64 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0.im == 0.0
    }

    /// `λ = 2π / Re k`.
    pub fn wavelength(self) -> f64 {
        2.0 * std::f64::consts::PI / self.0.re
    }
}

impl TryFrom<C64> for Wavenumber {
    type Error = KernelError;
    fn try_from(k: C64) -> Result<Self, KernelError> {
        Self::new(k)
    }
}

impl From<Wavenumber> for C64 {
    fn from(k: Wavenumber) -> C64 {
        k.0
    }
}

impl fmt::Display for Wavenumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    /// `(−1)^m` for the kernel `G_m`: −1 for `G₁`, +1 for `G₂`.
    pub fn image_sign(self) -> f64 {
        match self {
            BoundaryCondition::Dirichlet => -1.0,
            BoundaryCondition::Neumann => 1.0,
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        })
    }
}

/// Point at which a normal derivative is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wrt {
    M,
    P,
}

/// Hankel values and geometry for one `(M, P)` pair and its image.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ImagePair {
    /// `M − P`
    pub d: Point,
    /// `M − P*`
    pub ds: Point,
    pub r: f64,
    pub rs: f64,
    pub direct: HankelValue,
    pub image: HankelValue,
}

impl ImagePair {
    pub fn new(k: C64, m: Point, p: Point) -> Self {
        let d = m - p;
        let ds = m - p.mirror();
        let r = d.norm();
        let rs = ds.norm();
        Self { d, ds, r, rs, direct: hankel_at(k, r), image: hankel_at(k, rs) }
    }

    /// Skips the Hankel evaluation of an unused part (left as zero).
    pub fn partial(k: C64, m: Point, p: Point, direct: bool, image: bool) -> Self {
        let d = m - p;
        let ds = m - p.mirror();
        let r = d.norm();
        let rs = ds.norm();
        let zero = HankelValue { h0: C64::new(0.0, 0.0), h1: C64::new(0.0, 0.0) };
        Self {
            d,
            ds,
            r,
            rs,
            direct: if direct { hankel_at(k, r) } else { zero },
            image: if image { hankel_at(k, rs) } else { zero },
        }
    }
}

pub(crate) fn hankel_at(k: C64, r: f64) -> HankelValue {
    if k.im == 0.0 {
        crate::special::hankel_real(k.re * r)
    } else {
        hankel_unchecked(k * r)
    }
}

/// `Φ(k r) = (i/4) H₀⁽¹⁾(k r)`.
pub fn fundamental(k: Wavenumber, r: f64) -> C64 {
    I * 0.25 * hankel_at(k.0, r).h0
}

/// `G_m` value from precomputed Hankel data.
pub(crate) fn g_value(sign: f64, pair: &ImagePair) -> C64 {
    I * 0.25 * (pair.direct.h0 + sign * pair.image.h0)
}

/// Direct and image parts of `∂_{ν(P)} G_m(M, P)`.
pub(crate) fn dg_dp_parts(k: C64, sign: f64, pair: &ImagePair, nu: Point) -> (C64, C64) {
    let c = I * k * 0.25;
    let nus = nu.mirror();
    let direct = c * pair.direct.h1 * (pair.d.dot(nu) / pair.r);
    let image = c * sign * pair.image.h1 * (pair.ds.dot(nus) / pair.rs);
    (direct, image)
}

/// Direct and image parts of `∇_M G_m(M, P)`.
pub(crate) fn grad_m_parts(k: C64, sign: f64, pair: &ImagePair) -> ([C64; 2], [C64; 2]) {
    let c = -I * k * 0.25;
    let a = c * pair.direct.h1 / pair.r;
    let b = c * sign * pair.image.h1 / pair.rs;
    ([a * pair.d.x, a * pair.d.y], [b * pair.ds.x, b * pair.ds.y])
}

/// `∇_M ∂_{ν(P)} G_m(M, P)`, used for gradients of double-layer potentials.
pub(crate) fn grad_m_dg_dp(k: C64, sign: f64, pair: &ImagePair, nu: Point) -> [C64; 2] {
    let c = I * k * 0.25;
    let term = |d: Point, r: f64, h: &HankelValue, n: Point| -> [C64; 2] {
        let dn = d.dot(n);
        let a = k * h.h0 * (dn / (r * r)) - h.h1 * (2.0 * dn / (r * r * r));
        let b = h.h1 / r;
        [a * d.x + b * n.x, a * d.y + b * n.y]
    };
    let t1 = term(pair.d, pair.r, &pair.direct, nu);
    let t2 = term(pair.ds, pair.rs, &pair.image, nu.mirror());
    [c * (t1[0] + sign * t2[0]), c * (t1[1] + sign * t2[1])]
}

fn check_distinct(m: Point, p: Point) -> Result<(), KernelError> {
    if m == p || m == p.mirror() {
        Err(KernelError::CoincidentPoints(m))
    } else {
        Ok(())
    }
}

/// `G₁` (Dirichlet) or `G₂` (Neumann) at `(M, P)`.
pub fn greens(bc: BoundaryCondition, k: Wavenumber, m: Point, p: Point) -> Result<C64, KernelError> {
    check_distinct(m, p)?;
    Ok(g_value(bc.image_sign(), &ImagePair::new(k.0, m, p)))
}

/// Directional derivative of `G_m` along `normal` at the point named by `wrt`.
pub fn dgreens(
    bc: BoundaryCondition,
    wrt: Wrt,
    k: Wavenumber,
    m: Point,
    p: Point,
    normal: Point,
) -> Result<C64, KernelError> {
    check_distinct(m, p)?;
    let sign = bc.image_sign();
    let pair = ImagePair::new(k.0, m, p);
    Ok(match wrt {
        Wrt::P => {
            let (a, b) = dg_dp_parts(k.0, sign, &pair, normal);
            a + b
        }
        Wrt::M => {
            let (a, b) = grad_m_parts(k.0, sign, &pair);
            (a[0] + b[0]) * normal.x + (a[1] + b[1]) * normal.y
        }
    })
}

/// A complex scalar field with an analytic gradient.
pub trait Field: Sync {
    fn value(&self, p: Point) -> C64;
    fn gradient(&self, p: Point) -> [C64; 2];
}

/// Incident plane wave plus its reflection from the line `y = 0`.
///
/// Incidence angle `θ` is measured from the downward vertical, so the
/// incident wave is `e^{ik(x sinθ − y cosθ)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub k: Wavenumber,
    pub incidence: f64,
    pub bc: BoundaryCondition,
}

impl PlaneWave {
    pub fn new(bc: BoundaryCondition, k: Wavenumber, incidence: f64) -> Self {
        Self { k, incidence, bc }
    }

    fn parts(&self, p: Point) -> (C64, C64, f64, f64) {
        let (s, c) = self.incidence.sin_cos();
        let k = self.k.0;
        let inc = (I * k * (p.x * s - p.y * c)).exp();
        let refl = (I * k * (p.x * s + p.y * c)).exp();
        (inc, refl, s, c)
    }
}

impl Field for PlaneWave {
    fn value(&self, p: Point) -> C64 {
        let (inc, refl, _, _) = self.parts(p);
        inc + self.bc.image_sign() * refl
    }

    fn gradient(&self, p: Point) -> [C64; 2] {
        let (inc, refl, s, c) = self.parts(p);
        let ik = I * self.k.0;
        let sg = self.bc.image_sign();
        [ik * s * (inc + sg * refl), ik * c * (sg * refl - inc)]
    }
}

/// Half-plane reference solution `ũ` (Dirichlet) or `ṽ` (Neumann) and its
/// `y`-derivative at `m`.
pub fn reference_halfplane(bc: BoundaryCondition, k: Wavenumber, incidence: f64, m: Point) -> (C64, C64) {
    let w = PlaneWave::new(bc, k, incidence);
    (w.value(m), w.gradient(m)[1])
}

/// Image point-source field for manufactured solutions:
/// `Φ(k|M − S|) ∓ Φ(k|M − S*|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSource {
    pub k: Wavenumber,
    pub source: Point,
    pub bc: BoundaryCondition,
}

impl PointSource {
    /// The source and its mirror must both lie strictly below the graph of `h`.
    pub fn new(bc: BoundaryCondition, k: Wavenumber, source: Point, profile: &BoundaryProfile) -> Result<Self, KernelError> {
        if source.y.abs() >= profile.height(source.x) {
            return Err(KernelError::SourceInsideDomain(source));
        }
        Ok(Self { k, source, bc })
    }
}

impl Field for PointSource {
    fn value(&self, p: Point) -> C64 {
        let pair = ImagePair::new(self.k.0, p, self.source);
        g_value(self.bc.image_sign(), &pair)
    }

    fn gradient(&self, p: Point) -> [C64; 2] {
        let pair = ImagePair::new(self.k.0, p, self.source);
        let (a, b) = grad_m_parts(self.k.0, self.bc.image_sign(), &pair);
        [a[0] + b[0], a[1] + b[1]]
    }
}

/// Convenience form of [`PointSource`]'s value.
pub fn point_source_oracle(
    bc: BoundaryCondition,
    k: Wavenumber,
    source: Point,
    profile: &BoundaryProfile,
    m: Point,
) -> Result<C64, KernelError> {
    Ok(PointSource::new(bc, k, source, profile)?.value(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{hankel1, Order};
    use proptest::prelude::*;

    const BCS: [BoundaryCondition; 2] = [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann];

    fn k(v: f64) -> Wavenumber {
        Wavenumber::real(v).unwrap()
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    /// Five-point Laplacian residual `|Δ_h u + k²u| / |u|`.
    fn helmholtz_residual(f: &dyn Field, k: C64, p: Point, h: f64) -> f64 {
        let u = f.value(p);
        let lap = (f.value(p + Point::new(h, 0.0))
            + f.value(p - Point::new(h, 0.0))
            + f.value(p + Point::new(0.0, h))
            + f.value(p - Point::new(0.0, h))
            - 4.0 * u)
            / (h * h);
        (lap + k * k * u).norm() / u.norm()
    }

    #[test]
    fn neumann_on_axis_is_twice_fundamental() {
        let g = greens(BoundaryCondition::Neumann, k(1.0), Point::new(0.2, 0.0), Point::new(1.2, 0.0)).unwrap();
        let h0 = C64::new(0.765_197_686_557_966_6, 0.088_256_964_215_676_96);
        assert!(rel(g, I * 0.5 * h0) < 1e-12);
    }

    #[test]
    fn coincident_points_rejected() {
        let p = Point::new(0.3, 0.0);
        assert!(greens(BoundaryCondition::Dirichlet, k(1.0), p, p).is_err());
        assert!(dgreens(BoundaryCondition::Neumann, Wrt::M, k(1.0), p, p, Point::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn neumann_normal_derivative_vanishes_on_axis() {
        for x in [-2.0, 0.1, 0.7, 3.0] {
            let v = dgreens(
                BoundaryCondition::Neumann,
                Wrt::M,
                k(2.5),
                Point::new(x, 0.0),
                Point::new(0.4, 0.25),
                Point::new(0.0, 1.0),
            )
            .unwrap();
            assert!(v.norm() < 1e-15);
        }
    }

    #[test]
    fn direct_term_vanishes_on_straight_panel() {
        // Points on one panel of slope 0.4; the direct term of ∂_ν(P) is (M−P)·ν = 0.
        let a = Point::new(0.1, 0.04);
        let dir = Point::new(1.0, 0.4).normalized();
        let nu = -dir.left_normal();
        let pair = ImagePair::new(C64::new(3.0, 0.0), a + dir * 0.2, a + dir * 0.05);
        let (direct, image) = dg_dp_parts(C64::new(3.0, 0.0), -1.0, &pair, nu);
        assert!(direct.norm() < 1e-14);
        assert!(image.norm() > 1e-3);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let kk = k(3.0);
        let h = 1e-6;
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..50 {
            let m = Point::new(2.0 * next() - 0.5, 0.05 + next());
            let p = Point::new(next(), 0.05 + 0.4 * next());
            let nu = Point::new(1.0, 0.0).rotated(2.0 * std::f64::consts::PI * next());
            for bc in BCS {
                let fd_p = (greens(bc, kk, m, p + nu * h).unwrap() - greens(bc, kk, m, p - nu * h).unwrap()) / (2.0 * h);
                let fd_m = (greens(bc, kk, m + nu * h, p).unwrap() - greens(bc, kk, m - nu * h, p).unwrap()) / (2.0 * h);
                let an_p = dgreens(bc, Wrt::P, kk, m, p, nu).unwrap();
                let an_m = dgreens(bc, Wrt::M, kk, m, p, nu).unwrap();
                assert!(rel(an_p, fd_p) < 1e-6, "{an_p} vs {fd_p}");
                assert!(rel(an_m, fd_m) < 1e-6, "{an_m} vs {fd_m}");
            }
        }
    }

    #[test]
    fn double_layer_gradient_matches_finite_differences() {
        let kk = C64::new(2.0, 0.3);
        let h = 1e-6;
        let p = Point::new(0.4, 0.2);
        let nu = Point::new(0.3, -1.0).normalized();
        for m in [Point::new(0.1, 0.9), Point::new(1.3, 0.4), Point::new(-0.5, 1.5)] {
            let f = |q: Point| {
                let pair = ImagePair::new(kk, q, p);
                let (a, b) = dg_dp_parts(kk, -1.0, &pair, nu);
                a + b
            };
            let g = grad_m_dg_dp(kk, -1.0, &ImagePair::new(kk, m, p), nu);
            let fx = (f(m + Point::new(h, 0.0)) - f(m - Point::new(h, 0.0))) / (2.0 * h);
            let fy = (f(m + Point::new(0.0, h)) - f(m - Point::new(0.0, h))) / (2.0 * h);
            assert!(rel(g[0], fx) < 1e-6 && rel(g[1], fy) < 1e-6);
        }
    }

    #[test]
    fn plane_wave_reference_values() {
        let kk = k(2.0);
        for x in [-1.0, 0.0, 0.37, 5.0] {
            let (u, _) = reference_halfplane(BoundaryCondition::Dirichlet, kk, 0.3, Point::new(x, 0.0));
            assert_eq!(u, C64::new(0.0, 0.0));
            let (_, dv) = reference_halfplane(BoundaryCondition::Neumann, kk, 0.3, Point::new(x, 0.0));
            assert!(dv.norm() < 1e-15);
        }
        let w = PlaneWave::new(BoundaryCondition::Dirichlet, kk, std::f64::consts::FRAC_PI_6);
        assert!(helmholtz_residual(&w, kk.value(), Point::new(0.3, 0.7), 1e-3) <= 1e-5);
        // Direct evaluation of the two exponentials.
        let m = Point::new(0.5, 0.2);
        let direct = (I * 2.0 * (-0.2)).exp() - (I * 2.0 * 0.2).exp();
        let (u, _) = reference_halfplane(BoundaryCondition::Dirichlet, kk, 0.0, m);
        assert!(rel(u, direct) < 1e-15);
    }

    #[test]
    fn plane_wave_gradient_matches_finite_differences() {
        let h = 1e-6;
        for bc in BCS {
            let w = PlaneWave::new(bc, Wavenumber::new(C64::new(3.0, 0.1)).unwrap(), 0.7);
            let p = Point::new(0.3, 0.8);
            let g = w.gradient(p);
            let fx = (w.value(p + Point::new(h, 0.0)) - w.value(p - Point::new(h, 0.0))) / (2.0 * h);
            let fy = (w.value(p + Point::new(0.0, h)) - w.value(p - Point::new(0.0, h))) / (2.0 * h);
            assert!(rel(g[0], fx) < 1e-7 && rel(g[1], fy) < 1e-7);
        }
    }

    #[test]
    fn point_source_oracle_properties() {
        let bump = BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]).unwrap();
        let kk = k(3.0);
        let s = Point::new(0.5, -0.1);
        for bc in BCS {
            let f = PointSource::new(bc, kk, s, &bump).unwrap();
            for i in 0..10 {
                let p = Point::new(-1.0 + 0.3 * i as f64, 0.6 + 0.1 * i as f64);
                assert!(helmholtz_residual(&f, kk.value(), p, 1e-3) <= 1e-5);
            }
        }
        let d = PointSource::new(BoundaryCondition::Dirichlet, kk, s, &bump).unwrap();
        assert_eq!(d.value(Point::new(2.0, 0.0)), C64::new(0.0, 0.0));
        let flat = BoundaryProfile::flat(1.0).unwrap();
        assert_eq!(
            PointSource::new(BoundaryCondition::Dirichlet, kk, s, &flat),
            Err(KernelError::SourceInsideDomain(s))
        );
    }

    #[test]
    fn point_source_uses_fundamental_solution() {
        let bump = BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]).unwrap();
        let f = PointSource::new(BoundaryCondition::Neumann, k(1.0), Point::new(0.5, 0.0), &bump).unwrap();
        // S = S*, so the field is 2Φ at distance 1.
        let v = f.value(Point::new(0.5, 1.0));
        let h0 = hankel1(Order::Zero, C64::new(1.0, 0.0)).unwrap();
        assert!(rel(v, I * 0.5 * h0) < 1e-14);
    }

    #[test]
    fn wavenumber_validation() {
        assert!(Wavenumber::new(C64::new(-1.0, 0.0)).is_err());
        assert!(Wavenumber::new(C64::new(1.0, -0.1)).is_err());
        assert!(Wavenumber::new(C64::new(1.0, 0.2)).is_ok());
        assert!((k(2.0).wavelength() - std::f64::consts::PI).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn dirichlet_kernel_vanishes_on_flat_part(
            x in prop_oneof![-50.0..0.0f64, 1.0..50.0f64],
            mx in -5.0..5.0f64, my in 0.01..5.0f64, kr in 0.5..20.0f64,
        ) {
            let g = greens(BoundaryCondition::Dirichlet, k(kr), Point::new(mx, my), Point::new(x, 0.0)).unwrap();
            prop_assert!(g.norm() <= 1e-15);
        }

        #[test]
        fn kernels_are_symmetric(
            mx in -2.0..2.0f64, my in 0.0..2.0f64, px in -2.0..2.0f64, py in 0.0..2.0f64,
            kr in 0.5..10.0f64, ki in 0.0..0.5f64,
        ) {
            let m = Point::new(mx, my);
            let p = Point::new(px, py);
            prop_assume!(m.distance(p) > 1e-3 && m.distance(p.mirror()) > 1e-3);
            let kk = Wavenumber::new(C64::new(kr, ki)).unwrap();
            for bc in BCS {
                let a = greens(bc, kk, m, p).unwrap();
                let b = greens(bc, kk, p, m).unwrap();
                prop_assert!((a - b).norm() <= 1e-14 * a.norm().max(1.0));
            }
        }
    }
}
