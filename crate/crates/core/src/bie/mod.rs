//! Discrete layer operators on `Γ₂` and the second-kind integral equations.
//!
//! All operators use the normal `ν = −n` pointing out of `D`. With that
//! orientation the limits from inside `D` are
//! `(𝒲ψ)₊ = −½ψ + Wψ` and `(∂_ν 𝒱φ)₊ = ½φ + V′φ`, so
//!
//! * Dirichlet: `u = ũ + 𝒲ψ` with `(−½I + W)ψ = f − ũ`;
//! * Neumann: `u = ṽ + 𝒱φ` with `(½I + V′)φ = g − ∂_ν ṽ`.
//!
//! `W` uses the kernel `∂_{ν(P)}G₁`, `V` and `V′` use `G₂` and `∂_{ν(M)}G₂`.

mod assembly;
pub(crate) mod panel;
mod solver;

pub use assembly::{assemble_operator, operator_row, OperatorKind, OperatorMatrix};
pub use solver::{solve, solve_system, solve_with, DensitySolution, SolveMethod, SolverOptions};

use crate::geometry::{BoundaryMesh, BoundaryProfile, GeometryError, MeshOptions, Point};
use crate::kernels::{BoundaryCondition, Field, KernelError, PlaneWave, PointSource, Wavenumber};
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BieError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("profile dips below y = 0 (min height {0}); image sources would lie inside the domain")]
    NegativeHeight(f64),
    #[error("profile has a segment on y = 0 at x = {0}; only the flat profile may touch the axis along a segment")]
    GroundedSegment(f64),
    #[error("boundary data has {got} samples but the mesh has {expected} nodes")]
    ExcitationMismatch { expected: usize, got: usize },
    #[error("mesh has no nodes")]
    InvalidMesh,
    #[error("system matrix is singular or numerically singular (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },
    #[error("iterative solver stopped at relative residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },
}

/// Right-hand side source.
#[derive(Debug, Clone, PartialEq)]
pub enum Excitation {
    /// Plane wave incident at `incidence` radians from the downward vertical.
    /// The total field satisfies `u = 0` (Dirichlet) or `∂_ν u = 0` (Neumann).
    PlaneWave { incidence: f64 },
    /// Manufactured problem: boundary data are the traces of the image
    /// point-source field at `source`, which is then the exact solution.
    PointSource { source: Point },
    /// Explicit samples of `f` (Dirichlet) or `g = ∂_ν u` (Neumann) at the nodes.
    BoundaryData(Vec<C64>),
}

/// A fully specified scattering or boundary-value problem.
#[derive(Debug, Clone)]
pub struct BieProblem {
    pub profile: BoundaryProfile,
    pub mesh: BoundaryMesh,
    pub k: Wavenumber,
    pub bc: BoundaryCondition,
    pub excitation: Excitation,
}

impl BieProblem {
    pub fn new(
        profile: BoundaryProfile,
        mesh_options: &MeshOptions,
        k: Wavenumber,
        bc: BoundaryCondition,
        excitation: Excitation,
    ) -> Result<Self, BieError> {
        let min = profile.min_height();
        if min < 0.0 {
            return Err(BieError::NegativeHeight(min));
        }
        if !profile.is_flat() {
            if let Some(w) = profile.breakpoints().windows(2).find(|w| w[0].y == 0.0 && w[1].y == 0.0) {
                return Err(BieError::GroundedSegment(w[0].x));
            }
        }
        let mesh = BoundaryMesh::new(&profile, mesh_options)?;
        match &excitation {
            Excitation::PointSource { source } => {
                PointSource::new(bc, k, *source, &profile)?;
            }
            Excitation::BoundaryData(data) if data.len() != mesh.len() => {
                return Err(BieError::ExcitationMismatch { expected: mesh.len(), got: data.len() });
            }
            _ => {}
        }
        Ok(Self { profile, mesh, k, bc, excitation })
    }

    /// The known part of the total field: `ũ`/`ṽ` for plane waves, zero otherwise.
    pub fn reference(&self) -> Option<PlaneWave> {
        match self.excitation {
            Excitation::PlaneWave { incidence } => Some(PlaneWave::new(self.bc, self.k, incidence)),
            _ => None,
        }
    }

    /// The exact solution of a manufactured problem.
    pub fn oracle(&self) -> Option<PointSource> {
        match self.excitation {
            Excitation::PointSource { source } => Some(PointSource { k: self.k, source, bc: self.bc }),
            _ => None,
        }
    }

    /// Operator appearing in the integral equation.
    pub fn operator_kind(&self) -> OperatorKind {
        match self.bc {
            BoundaryCondition::Dirichlet => OperatorKind::W,
            BoundaryCondition::Neumann => OperatorKind::VPrime,
        }
    }

    /// Identity coefficient `σ` in `(σI + K)x = rhs`.
    pub fn sigma(&self) -> f64 {
        match self.bc {
            BoundaryCondition::Dirichlet => -0.5,
            BoundaryCondition::Neumann => 0.5,
        }
    }
}

/// Density at abscissa `x ∈ [0, d]` from the panel's interpolating polynomial.
pub fn density_at(mesh: &BoundaryMesh, values: &[C64], x: f64) -> Option<C64> {
    let (p, s) = mesh.locate(x)?;
    let g = mesh.gauss_per_panel();
    let mut basis = vec![0.0; g];
    crate::quadrature::lagrange_basis(&mesh.rule().nodes, s, &mut basis);
    let first = mesh.panels()[p].first_node;
    Some(basis.iter().zip(&values[first..first + g]).map(|(b, v)| v * *b).sum())
}

/// Right-hand side `f − ũ` (Dirichlet) or `g − ∂_ν ṽ` (Neumann) at the nodes.
pub fn build_rhs(problem: &BieProblem) -> Result<Vec<C64>, BieError> {
    let nodes = problem.mesh.nodes();
    let trace = |f: &dyn Field| -> Vec<C64> {
        nodes
            .iter()
            .map(|n| match problem.bc {
                BoundaryCondition::Dirichlet => f.value(n.point),
                BoundaryCondition::Neumann => {
                    let g = f.gradient(n.point);
                    let nu = n.outward();
                    g[0] * nu.x + g[1] * nu.y
                }
            })
            .collect()
    };
    Ok(match &problem.excitation {
        Excitation::PlaneWave { .. } => {
            let reference = problem.reference().expect("plane-wave excitation");
            trace(&reference).into_iter().map(|v| -v).collect()
        }
        Excitation::PointSource { .. } => {
            let oracle = problem.oracle().expect("point-source excitation");
            trace(&oracle)
        }
        Excitation::BoundaryData(data) => {
            if data.len() != nodes.len() {
                return Err(BieError::ExcitationMismatch { expected: nodes.len(), got: data.len() });
            }
            data.clone()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::reference_halfplane;

    fn bump() -> BoundaryProfile {
        BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]).unwrap()
    }

    #[test]
    fn flat_plane_wave_rhs_vanishes() {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let p = BieProblem::new(
                BoundaryProfile::flat(1.0).unwrap(),
                &MeshOptions::with_panels(8),
                Wavenumber::real(2.0).unwrap(),
                bc,
                Excitation::PlaneWave { incidence: 0.4 },
            )
            .unwrap();
            assert!(build_rhs(&p).unwrap().iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn dirichlet_rhs_is_minus_reference_trace() {
        let p = BieProblem::new(
            bump(),
            &MeshOptions::with_panels(16),
            Wavenumber::real(2.0).unwrap(),
            BoundaryCondition::Dirichlet,
            Excitation::PlaneWave { incidence: 0.0 },
        )
        .unwrap();
        let rhs = build_rhs(&p).unwrap();
        for (n, r) in p.mesh.nodes().iter().zip(&rhs) {
            let y = n.point.y;
            // θ = 0, k = 2: ũ = e^{−2iy} − e^{2iy}.
            let direct = -((C64::new(0.0, -2.0 * y)).exp() - (C64::new(0.0, 2.0 * y)).exp());
            assert!((r - direct).norm() < 1e-14);
            let (u, _) = reference_halfplane(BoundaryCondition::Dirichlet, p.k, 0.0, n.point);
            assert_eq!(*r, -u);
        }
    }

    #[test]
    fn rejects_invalid_problems() {
        let k = Wavenumber::real(1.0).unwrap();
        let opts = MeshOptions::with_panels(8);
        let below = BoundaryProfile::new(&[(0.0, 0.0), (0.5, -0.1), (1.0, 0.0)]).unwrap();
        assert!(matches!(
            BieProblem::new(below, &opts, k, BoundaryCondition::Dirichlet, Excitation::PlaneWave { incidence: 0.0 }),
            Err(BieError::NegativeHeight(_))
        ));
        let grounded = BoundaryProfile::new(&[(0.0, 0.0), (0.3, 0.2), (0.5, 0.0), (0.7, 0.0), (1.0, 0.0)]);
        assert!(matches!(
            BieProblem::new(grounded.unwrap(), &opts, k, BoundaryCondition::Dirichlet, Excitation::PlaneWave { incidence: 0.0 }),
            Err(BieError::GroundedSegment(_))
        ));
        assert!(matches!(
            BieProblem::new(bump(), &opts, k, BoundaryCondition::Neumann, Excitation::BoundaryData(vec![C64::new(0.0, 0.0); 3])),
            Err(BieError::ExcitationMismatch { .. })
        ));
        assert!(matches!(
            BieProblem::new(
                BoundaryProfile::flat(1.0).unwrap(),
                &opts,
                k,
                BoundaryCondition::Dirichlet,
                Excitation::PointSource { source: Point::new(0.5, -0.1) }
            ),
            Err(BieError::Kernel(KernelError::SourceInsideDomain(_)))
        ));
    }
}
