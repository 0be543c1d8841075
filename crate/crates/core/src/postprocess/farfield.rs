//! Far-field pattern, radiation-condition residual and energy-flux check.

use super::{LayerPotential, PostprocessError};
use crate::bie::{BieProblem, DensitySolution};
use crate::geometry::Point;
use crate::kernels::{BoundaryCondition, Field};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

/// Far-field pattern `F(θ)`: `u*(R, θ) ≈ F(θ) e^{ikR} / √R` for large `R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FarField {
    pub angles: Vec<f64>,
    #[serde(serialize_with = "ser_vec")]
    pub values: Vec<C64>,
}

fn ser_vec<S: serde::Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Far-field pattern of the layer potential, evaluated by quadrature against
/// the asymptotic kernel `C [e^{−ik x̂·P} ∓ e^{−ik x̂·P*}]` with
/// `C = e^{iπ/4}/√(8πk)`.
pub fn far_field(problem: &BieProblem, density: &DensitySolution, angles: &[f64]) -> Result<FarField, PostprocessError> {
    if !problem.k.is_real() {
        return Err(PostprocessError::ComplexWavenumber);
    }
    let k = problem.k.value().re;
    let c = C64::from_polar(1.0, PI / 4.0) / (8.0 * PI * k).sqrt();
    let values = angles
        .iter()
        .map(|&theta| {
            let (sn, cs) = theta.sin_cos();
            let mut acc = C64::new(0.0, 0.0);
            for (node, rho) in problem.mesh.nodes().iter().zip(&density.values) {
                let p = node.point;
                let direct = C64::from_polar(1.0, -k * (p.x * cs + p.y * sn));
                let image = C64::from_polar(1.0, -k * (p.x * cs - p.y * sn));
                let kernel = match problem.bc {
                    BoundaryCondition::Neumann => direct + image,
                    BoundaryCondition::Dirichlet => {
                        let nu = node.outward();
                        let a = cs * nu.x + sn * nu.y;
                        let b = cs * nu.x - sn * nu.y;
                        C64::new(0.0, -k) * (direct * a - image * b)
                    }
                };
                acc += kernel * rho * node.arc_weight();
            }
            c * acc
        })
        .collect();
    Ok(FarField { angles: angles.to_vec(), values })
}

/// Largest `|u*(R, θ)√R e^{−ikR} − F(θ)|` over the angles at radius `R`.
pub fn far_field_consistency(
    problem: &BieProblem,
    density: &DensitySolution,
    radius: f64,
    angles: &[f64],
) -> Result<f64, PostprocessError> {
    let ff = far_field(problem, density, angles)?;
    let k = problem.k.value().re;
    let potential = LayerPotential::new(problem, density);
    Ok(angles
        .iter()
        .zip(&ff.values)
        .map(|(&t, f)| {
            let p = Point::new(radius * t.cos(), radius * t.sin());
            let scaled = potential.value(p) * radius.sqrt() * C64::from_polar(1.0, -k * radius);
            (scaled - f).norm()
        })
        .fold(0.0, f64::max))
}

/// Largest `|∂_r u − ik u|` over the angles at radius `R` about the origin,
/// with the radial derivative taken by central differences of step `λ/100`.
pub fn radiation_residual(
    problem: &BieProblem,
    field: &dyn Field,
    radius: f64,
    angles: &[f64],
) -> Result<f64, PostprocessError> {
    if !problem.k.is_real() {
        return Err(PostprocessError::ComplexWavenumber);
    }
    let k = problem.k.value().re;
    let h = problem.k.wavelength() / 100.0;
    Ok(angles
        .iter()
        .map(|&t| {
            let dir = Point::new(t.cos(), t.sin());
            let at = |r: f64| field.value(dir * r);
            let dr = (at(radius + h) - at(radius - h)) / (2.0 * h);
            (dr - C64::new(0.0, k) * at(radius)).norm()
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxResult {
    /// `Im ∮ ū ∂_n u ds`.
    pub imag: f64,
    /// `∮ |u ∂_n u| ds`, the scale for `relative`.
    pub magnitude: f64,
    pub relative: f64,
}

/// Energy flux of `field` through a circle inside `D`, by the 512-point
/// trapezoid rule. For real `k` the imaginary part vanishes.
pub fn flux_check(problem: &BieProblem, field: &dyn Field, center: Point, radius: f64) -> Result<FluxResult, PostprocessError> {
    const POINTS: usize = 512;
    if !(radius > 0.0) || center.y < problem.profile.height(center.x)
        || problem.profile.distance_to_boundary(center) <= radius
    {
        return Err(PostprocessError::CircleOutsideDomain { center, radius });
    }
    let dt = 2.0 * PI / POINTS as f64;
    let mut total = C64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for i in 0..POINTS {
        let t = i as f64 * dt;
        let n = Point::new(t.cos(), t.sin());
        let p = center + n * radius;
        let u = field.value(p);
        let g = field.gradient(p);
        let dn = g[0] * n.x + g[1] * n.y;
        let integrand = u.conj() * dn * (radius * dt);
        total += integrand;
        magnitude += integrand.norm();
    }
    let relative = if magnitude > 0.0 { total.im.abs() / magnitude } else { 0.0 };
    Ok(FluxResult { imag: total.im, magnitude, relative })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bie::{solve, Excitation};
    use crate::geometry::{BoundaryProfile, MeshOptions};
    use crate::kernels::{PlaneWave, Wavenumber};
    use crate::postprocess::TotalField;

    fn problem(bc: BoundaryCondition, k: C64) -> BieProblem {
        BieProblem::new(
            BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]).unwrap(),
            &MeshOptions::with_panels(16),
            Wavenumber::new(k).unwrap(),
            bc,
            Excitation::PlaneWave { incidence: 0.2 },
        )
        .unwrap()
    }

    #[test]
    fn complex_wavenumber_is_rejected() {
        let p = problem(BoundaryCondition::Dirichlet, C64::new(2.0, 0.1));
        let d = solve(&p).unwrap();
        assert_eq!(far_field(&p, &d, &[0.5]), Err(PostprocessError::ComplexWavenumber));
    }

    #[test]
    fn dirichlet_pattern_vanishes_at_grazing() {
        let p = problem(BoundaryCondition::Dirichlet, C64::new(3.0, 0.0));
        let d = solve(&p).unwrap();
        let ff = far_field(&p, &d, &[0.0, PI, 1e-3, PI / 2.0]).unwrap();
        assert!(ff.values[0].norm() < 1e-14 && ff.values[1].norm() < 1e-14);
        assert!(ff.values[2].norm() < 1e-2 * ff.values[3].norm());
    }

    #[test]
    fn pattern_matches_potential_at_large_radius() {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let p = problem(bc, C64::new(3.0, 0.0));
            let d = solve(&p).unwrap();
            let angles: Vec<f64> = (1..8).map(|i| i as f64 * PI / 8.0).collect();
            let near = far_field_consistency(&p, &d, 100.0 / 3.0, &angles).unwrap();
            let far = far_field_consistency(&p, &d, 400.0 / 3.0, &angles).unwrap();
            assert!(far < 0.3 * near, "{bc}: {far} vs {near}");
        }
    }

    #[test]
    fn plane_wave_reference_has_zero_flux() {
        let p = problem(BoundaryCondition::Neumann, C64::new(2.0, 0.0));
        let w = PlaneWave::new(BoundaryCondition::Neumann, p.k, 0.4);
        let r = flux_check(&p, &w, Point::new(0.5, 1.5), 0.5).unwrap();
        assert!(r.relative < 1e-12, "{}", r.relative);
    }

    #[test]
    fn scattered_total_field_has_zero_flux() {
        let p = problem(BoundaryCondition::Dirichlet, C64::new(3.0, 0.0));
        let d = solve(&p).unwrap();
        let total = TotalField::new(&p, &d);
        let r = flux_check(&p, &total, Point::new(0.5, 1.5), 0.5).unwrap();
        assert!(r.relative < 1e-8, "{}", r.relative);
    }

    #[test]
    fn circle_must_be_inside() {
        let p = problem(BoundaryCondition::Dirichlet, C64::new(3.0, 0.0));
        let w = PlaneWave::new(BoundaryCondition::Dirichlet, p.k, 0.0);
        assert!(matches!(
            flux_check(&p, &w, Point::new(0.5, 0.5), 0.5),
            Err(PostprocessError::CircleOutsideDomain { .. })
        ));
    }
}
