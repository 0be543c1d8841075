//! Field reconstruction from densities and the numerical checks built on it.

mod farfield;
mod jump;
mod mollification;

pub use farfield::{far_field, far_field_consistency, flux_check, radiation_residual, FarField, FluxResult};
pub use jump::{jump_check, JumpOptions, JumpResult, LayerKind, Side};
pub use mollification::{l2_distance, l2_norm, mollification_experiment, MollificationReport};

use crate::bie::panel::{Kernel, PanelIntegrator, Target};
use crate::bie::{solve, BieError, BieProblem, DensitySolution, Excitation};
use crate::geometry::{segment_distance, MeshOptions, Point};
use crate::kernels::{BoundaryCondition, Field, PlaneWave};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PostprocessError {
    #[error(transparent)]
    Solver(#[from] BieError),
    #[error("point {0:?} is within one panel length of the perturbed boundary")]
    PointTooCloseToBoundary(Point),
    #[error("point {0:?} lies below the boundary graph")]
    PointOutsideDomain(Point),
    #[error("node {0} touches a corner; jump relations are checked at smooth nodes only")]
    CornerNode(usize),
    #[error("approach angle {angle} exceeds the cone half-angle {limit}")]
    ConeViolation { angle: f64, limit: f64 },
    #[error("far-field quantities need a real wavenumber")]
    ComplexWavenumber,
    #[error("circle of radius {radius} at {center:?} is not strictly inside the domain")]
    CircleOutsideDomain { center: Point, radius: f64 },
    #[error("the profile has no corner to mollify")]
    NoCorner,
    #[error("{0}")]
    InvalidArgument(String),
}

/// Field value at a point split into known and computed parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub point: Point,
    #[serde(serialize_with = "ser_c64")]
    pub reference: C64,
    #[serde(serialize_with = "ser_c64")]
    pub correction: C64,
    #[serde(serialize_with = "ser_c64")]
    pub total: C64,
}

fn ser_c64<S: serde::Serializer>(v: &C64, s: S) -> Result<S::Ok, S::Error> {
    [v.re, v.im].serialize(s)
}

/// The layer potential `𝒲ψ` (Dirichlet) or `𝒱φ` (Neumann) of a density.
pub struct LayerPotential<'a> {
    integ: PanelIntegrator<'a>,
    density: Vec<C64>,
    bc: BoundaryCondition,
}

impl<'a> LayerPotential<'a> {
    pub fn new(problem: &'a BieProblem, density: &DensitySolution) -> Self {
        Self::from_values(problem, density.values.clone())
    }

    pub fn from_values(problem: &'a BieProblem, density: Vec<C64>) -> Self {
        assert_eq!(density.len(), problem.mesh.len());
        Self { integ: PanelIntegrator::new(&problem.mesh, problem.k.value()), density, bc: problem.bc }
    }

    fn sum(&self, kernel: Kernel, point: Point) -> [C64; 2] {
        let nc = kernel.components();
        let g = self.integ.gauss_per_panel();
        let mut buf = vec![ZERO; g * nc];
        let mut acc = [ZERO; 2];
        for (p, panel) in self.integ.mesh.panels().iter().enumerate() {
            buf.iter_mut().for_each(|b| *b = ZERO);
            self.integ.panel_weights(kernel, Target { point, node: None }, p, &mut buf);
            for q in 0..g {
                let rho = self.density[panel.first_node + q];
                for c in 0..nc {
                    acc[c] += buf[q * nc + c] * rho;
                }
            }
        }
        acc
    }

    /// Normal derivative along `dir` at `point`.
    pub fn directional_derivative(&self, point: Point, dir: Point) -> C64 {
        let g = self.gradient(point);
        g[0] * dir.x + g[1] * dir.y
    }
}

impl Field for LayerPotential<'_> {
    fn value(&self, p: Point) -> C64 {
        let kernel = match self.bc {
            BoundaryCondition::Dirichlet => Kernel::Double,
            BoundaryCondition::Neumann => Kernel::Single,
        };
        self.sum(kernel, p)[0]
    }

    fn gradient(&self, p: Point) -> [C64; 2] {
        let kernel = match self.bc {
            BoundaryCondition::Dirichlet => Kernel::DoubleGrad,
            BoundaryCondition::Neumann => Kernel::SingleGrad,
        };
        self.sum(kernel, p)
    }
}

/// Total field `u = reference + correction`.
pub struct TotalField<'a> {
    pub reference: Option<PlaneWave>,
    pub potential: LayerPotential<'a>,
}

impl<'a> TotalField<'a> {
    pub fn new(problem: &'a BieProblem, density: &DensitySolution) -> Self {
        Self { reference: problem.reference(), potential: LayerPotential::new(problem, density) }
    }
}

impl Field for TotalField<'_> {
    fn value(&self, p: Point) -> C64 {
        self.reference.map_or(ZERO, |r| r.value(p)) + self.potential.value(p)
    }

    fn gradient(&self, p: Point) -> [C64; 2] {
        let a = self.reference.map_or([ZERO; 2], |r| r.gradient(p));
        let b = self.potential.gradient(p);
        [a[0] + b[0], a[1] + b[1]]
    }
}

/// Checks that `p` is in `D̄` and at least one panel length (of the nearest
/// panel) away from `Γ₂`. Points on the flat part `Γ₁` are allowed.
pub fn check_guard_band(problem: &BieProblem, p: Point) -> Result<(), PostprocessError> {
    if p.y < problem.profile.height(p.x) {
        return Err(PostprocessError::PointOutsideDomain(p));
    }
    for panel in problem.mesh.panels() {
        if segment_distance(p, panel.start, panel.end) < panel.length() {
            return Err(PostprocessError::PointTooCloseToBoundary(p));
        }
    }
    Ok(())
}

/// Evaluates reference, correction and total field at the points, in parallel
/// over points.
pub fn eval_field(
    problem: &BieProblem,
    density: &DensitySolution,
    points: &[Point],
) -> Result<Vec<FieldSample>, PostprocessError> {
    for &p in points {
        check_guard_band(problem, p)?;
    }
    let potential = LayerPotential::new(problem, density);
    let reference = problem.reference();
    Ok(points
        .par_iter()
        .map(|&p| {
            let r = reference.map_or(ZERO, |w| w.value(p));
            let c = potential.value(p);
            FieldSample { point: p, reference: r, correction: c, total: r + c }
        })
        .collect())
}

/// Relative `L∞` error of the computed field against the manufactured
/// solution: `max|u_h − u| / max|u|` over the points.
pub fn manufactured_error(
    problem: &BieProblem,
    density: &DensitySolution,
    points: &[Point],
) -> Result<f64, PostprocessError> {
    let oracle = problem
        .oracle()
        .ok_or_else(|| PostprocessError::InvalidArgument("manufactured error needs a point-source excitation".into()))?;
    let samples = eval_field(problem, density, points)?;
    let mut err = 0.0f64;
    let mut size = 0.0f64;
    for s in &samples {
        let exact = oracle.value(s.point);
        err = err.max((s.total - exact).norm());
        size = size.max(exact.norm());
    }
    Ok(err / size)
}

/// Solves the same problem at two resolutions and returns the largest field
/// disagreement at the probes, relative to the largest field magnitude.
pub fn uniqueness_probe(
    problem: &BieProblem,
    coarse: &MeshOptions,
    fine: &MeshOptions,
    probes: &[Point],
) -> Result<f64, PostprocessError> {
    if fine.n_panels < 2 * coarse.n_panels && coarse.n_panels < 2 * fine.n_panels {
        return Err(PostprocessError::InvalidArgument("resolutions must differ by at least a factor of two".into()));
    }
    if matches!(problem.excitation, Excitation::BoundaryData(_)) {
        return Err(PostprocessError::InvalidArgument("boundary data cannot be transferred between meshes".into()));
    }
    let fields = [coarse, fine]
        .iter()
        .map(|opts| {
            let p = BieProblem::new(problem.profile.clone(), opts, problem.k, problem.bc, problem.excitation.clone())?;
            let d = solve(&p)?;
            Ok(eval_field(&p, &d, probes)?.iter().map(|s| s.total).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, PostprocessError>>()?;
    let mut diff = 0.0f64;
    let mut size = 0.0f64;
    for (a, b) in fields[0].iter().zip(&fields[1]) {
        diff = diff.max((a - b).norm());
        size = size.max(b.norm());
    }
    Ok(if size == 0.0 { diff } else { diff / size })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryProfile;
    use crate::kernels::Wavenumber;

    fn bump_problem(bc: BoundaryCondition, n: usize) -> BieProblem {
        BieProblem::new(
            BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]).unwrap(),
            &MeshOptions::with_panels(n),
            Wavenumber::real(3.0).unwrap(),
            bc,
            Excitation::PointSource { source: Point::new(0.5, -0.1) },
        )
        .unwrap()
    }

    #[test]
    fn zero_density_gives_reference_field() {
        let p = BieProblem::new(
            BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]).unwrap(),
            &MeshOptions::with_panels(16),
            Wavenumber::real(2.0).unwrap(),
            BoundaryCondition::Dirichlet,
            Excitation::PlaneWave { incidence: 0.1 },
        )
        .unwrap();
        let d = DensitySolution {
            values: vec![ZERO; p.mesh.len()],
            bc: p.bc,
            residual_norm: 0.0,
            condition_estimate: None,
            iterations: None,
        };
        let s = eval_field(&p, &d, &[Point::new(0.2, 1.0), Point::new(-3.0, 0.0)]).unwrap();
        for x in s {
            assert_eq!(x.total, x.reference);
            assert_eq!(x.total - x.reference - x.correction, ZERO);
        }
    }

    #[test]
    fn dirichlet_correction_vanishes_on_flat_part() {
        let p = bump_problem(BoundaryCondition::Dirichlet, 32);
        let d = solve(&p).unwrap();
        let pts: Vec<Point> = [-2.0, -0.5, 1.5, 4.0].iter().map(|&x| Point::new(x, 0.0)).collect();
        for s in eval_field(&p, &d, &pts).unwrap() {
            assert!(s.correction.norm() <= 1e-14, "{}", s.correction);
        }
    }

    #[test]
    fn guard_band_rejects_close_points() {
        let p = bump_problem(BoundaryCondition::Neumann, 16);
        let d = solve(&p).unwrap();
        assert!(matches!(
            eval_field(&p, &d, &[Point::new(0.5, 0.3001)]),
            Err(PostprocessError::PointTooCloseToBoundary(_))
        ));
        assert!(matches!(
            eval_field(&p, &d, &[Point::new(0.5, 0.1)]),
            Err(PostprocessError::PointOutsideDomain(_))
        ));
    }

    #[test]
    fn potential_gradient_matches_finite_differences() {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let p = bump_problem(bc, 16);
            let d = solve(&p).unwrap();
            let f = LayerPotential::new(&p, &d);
            let h = 1e-5;
            for m in [Point::new(0.3, 0.5), Point::new(1.4, 0.05), Point::new(0.5, 0.42)] {
                let g = f.gradient(m);
                let fx = (f.value(m + Point::new(h, 0.0)) - f.value(m - Point::new(h, 0.0))) / (2.0 * h);
                let fy = (f.value(m + Point::new(0.0, h)) - f.value(m - Point::new(0.0, h))) / (2.0 * h);
                let scale = g[0].norm().max(g[1].norm());
                assert!((g[0] - fx).norm() < 1e-6 * scale && (g[1] - fy).norm() < 1e-6 * scale);
            }
        }
    }

    #[test]
    fn manufactured_solution_is_reproduced() {
        let probes: Vec<Point> = (0..6).map(|i| Point::new(-0.5 + 0.4 * i as f64, 1.5)).collect();
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let p = bump_problem(bc, 64);
            let d = solve(&p).unwrap();
            let err = manufactured_error(&p, &d, &probes).unwrap();
            assert!(err < 1e-3, "{bc}: {err}");
        }
    }
}
