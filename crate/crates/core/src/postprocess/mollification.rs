//! Density convergence along a family of corner-rounded profiles.

use super::PostprocessError;
use crate::bie::{solve, BieProblem, Excitation};
use crate::geometry::{BoundaryMesh, BoundaryProfile, MeshOptions, MollifiedFamily};
use crate::kernels::{BoundaryCondition, Wavenumber};
use num_complex::Complex64 as C64;
use serde::Serialize;

/// Points of the uniform comparison grid on `[0, d]`.
const GRID_POINTS: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MollificationReport {
    pub bc: BoundaryCondition,
    pub radii: Vec<f64>,
    /// `‖φ_{j+1} − φ_j‖` for consecutive members.
    pub successive: Vec<f64>,
    /// `‖φ_J − φ‖` between the last member and the unrounded profile.
    pub final_distance: f64,
    /// `‖φ‖` on the unrounded profile.
    pub reference_norm: f64,
}

impl MollificationReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.successive.windows(2).all(|w| w[1] < w[0])
    }

    pub fn final_relative(&self) -> f64 {
        self.final_distance / self.reference_norm
    }
}

/// Density sampled on the uniform grid by piecewise-linear interpolation of
/// the node values in `x`, held constant beyond the outermost nodes.
fn resample(mesh: &BoundaryMesh, values: &[C64], d: f64) -> Vec<C64> {
    let xs: Vec<f64> = mesh.nodes().iter().map(|n| n.point.x).collect();
    (0..GRID_POINTS)
        .map(|i| {
            let x = d * i as f64 / (GRID_POINTS - 1) as f64;
            let j = xs.partition_point(|&v| v < x);
            if j == 0 {
                values[0]
            } else if j == xs.len() {
                values[xs.len() - 1]
            } else {
                let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
                values[j - 1] * (1.0 - t) + values[j] * t
            }
        })
        .collect()
}

/// Trapezoid `L²` norm of grid samples over `[0, d]`.
pub fn l2_norm(samples: &[C64], d: f64) -> f64 {
    let h = d / (samples.len() - 1) as f64;
    let n = samples.len();
    let sum: f64 = samples
        .iter()
        .enumerate()
        .map(|(i, v)| if i == 0 || i == n - 1 { 0.5 * v.norm_sqr() } else { v.norm_sqr() })
        .sum();
    (sum * h).sqrt()
}

pub fn l2_distance(a: &[C64], b: &[C64], d: f64) -> f64 {
    let diff: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    l2_norm(&diff, d)
}

/// Solves on every member of the rounded family (radii `ρ₀ 2^{−j}`,
/// `j = 0..=j_max`) and on the original profile, and reports the `L²`
/// distances between consecutive densities and from the last member to the
/// original density.
pub fn mollification_experiment(
    profile: &BoundaryProfile,
    k: Wavenumber,
    bc: BoundaryCondition,
    excitation: &Excitation,
    mesh_options: &MeshOptions,
    j_max: usize,
    rho0: f64,
) -> Result<MollificationReport, PostprocessError> {
    if !profile.has_corner() {
        return Err(PostprocessError::NoCorner);
    }
    if matches!(excitation, Excitation::BoundaryData(_)) {
        return Err(PostprocessError::InvalidArgument("boundary data cannot be transferred between profiles".into()));
    }
    if j_max < 2 {
        return Err(PostprocessError::InvalidArgument("need at least three family members".into()));
    }
    let family = MollifiedFamily::new(profile, j_max, rho0).map_err(crate::bie::BieError::from)?;
    let d = profile.support_length();
    let density_on = |p: &BoundaryProfile| -> Result<Vec<C64>, PostprocessError> {
        let problem = BieProblem::new(p.clone(), mesh_options, k, bc, excitation.clone())?;
        let sol = solve(&problem)?;
        Ok(resample(&problem.mesh, &sol.values, d))
    };
    let members = family.members.iter().map(density_on).collect::<Result<Vec<_>, _>>()?;
    let base = density_on(profile)?;
    let successive = members.windows(2).map(|w| l2_distance(&w[1], &w[0], d)).collect();
    let final_distance = l2_distance(members.last().expect("non-empty family"), &base, d);
    Ok(MollificationReport {
        bc,
        radii: family.radii.clone(),
        successive,
        final_distance,
        reference_norm: l2_norm(&base, d),
    })
}
