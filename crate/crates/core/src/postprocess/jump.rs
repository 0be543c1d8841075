//! Numerical check of the layer-potential jump relations at a mesh node.

use super::{LayerPotential, PostprocessError};
use crate::bie::{operator_row, BieProblem, OperatorKind};
use crate::geometry::Point;
use crate::kernels::{BoundaryCondition, Field};
use num_complex::Complex64 as C64;
use serde::Serialize;

/// Side from which the boundary is approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    /// From inside `D`, along `+n`.
    Inside,
    /// From below the graph, along `−n`.
    Outside,
}

/// Boundary quantity whose limit is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LayerKind {
    /// Value of the double layer `𝒲ψ`.
    DoubleLayer,
    /// Normal derivative `∂_ν 𝒱φ` of the single layer.
    SingleLayerNormal,
}

impl LayerKind {
    pub fn for_condition(bc: BoundaryCondition) -> Self {
        match bc {
            BoundaryCondition::Dirichlet => LayerKind::DoubleLayer,
            BoundaryCondition::Neumann => LayerKind::SingleLayerNormal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpOptions {
    /// Cone parameter: approach directions must satisfy `|β| ≤ arctan(1/(1+α))`
    /// measured from the normal.
    pub alpha: f64,
    /// Approach angle `β` from the normal, radians.
    pub angle: f64,
    /// Distances from the node in units of the local panel length, decreasing.
    pub eps: Vec<f64>,
}

impl Default for JumpOptions {
    fn default() -> Self {
        Self { alpha: 1.0, angle: 0.2, eps: vec![1e-2, 5e-3, 2.5e-3] }
    }
}

impl JumpOptions {
    pub fn cone_limit(&self) -> f64 {
        (1.0 / (1.0 + self.alpha)).atan()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpResult {
    pub node: usize,
    pub side: Side,
    #[serde(serialize_with = "super::ser_c64")]
    pub measured: C64,
    #[serde(serialize_with = "super::ser_c64")]
    pub predicted: C64,
    /// `|measured − predicted| / max|density|`.
    pub deviation: f64,
}

/// Polynomial extrapolation of `(x_i, y_i)` to `x = 0` (Neville).
fn extrapolate_to_zero(x: &[f64], y: &[C64]) -> C64 {
    let mut p = y.to_vec();
    let n = x.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xa, xb) = (x[i], x[i + level]);
            p[i] = (p[i + 1] * xa - p[i] * xb) / (xa - xb);
        }
    }
    p[0]
}

/// Approaches node `node` from `side` along a direction inside the
/// non-tangential cone, extrapolates the layer potential of `density` to the
/// boundary and compares with the discrete limit `∓½ψ + Wψ` (double layer)
/// or `±½φ + V′φ` (single-layer normal derivative).
pub fn jump_check(
    problem: &BieProblem,
    density: &[C64],
    kind: LayerKind,
    node: usize,
    side: Side,
    options: &JumpOptions,
) -> Result<JumpResult, PostprocessError> {
    let mesh = &problem.mesh;
    if density.len() != mesh.len() {
        return Err(PostprocessError::InvalidArgument(format!(
            "density has {} values, mesh has {} nodes",
            density.len(),
            mesh.len()
        )));
    }
    let nd = mesh
        .nodes()
        .get(node)
        .ok_or_else(|| PostprocessError::InvalidArgument(format!("node {node} out of range")))?;
    if nd.is_corner_adjacent {
        return Err(PostprocessError::CornerNode(node));
    }
    let limit = options.cone_limit();
    if options.angle.abs() > limit {
        return Err(PostprocessError::ConeViolation { angle: options.angle, limit });
    }
    if options.eps.len() < 2 || options.eps.iter().any(|&e| !(e > 0.0)) {
        return Err(PostprocessError::InvalidArgument("need at least two positive distances".into()));
    }

    let bc = match kind {
        LayerKind::DoubleLayer => BoundaryCondition::Dirichlet,
        LayerKind::SingleLayerNormal => BoundaryCondition::Neumann,
    };
    let mut layer_problem = problem.clone();
    layer_problem.bc = bc;
    let potential = LayerPotential::from_values(&layer_problem, density.to_vec());

    let (sn, cs) = options.angle.sin_cos();
    let n = nd.normal;
    let base = Point::new(n.x * cs - n.y * sn, n.x * sn + n.y * cs);
    let dir = match side {
        Side::Inside => base,
        Side::Outside => -base,
    };
    let len = mesh.panels()[nd.panel].length();
    let nu = nd.outward();
    let samples: Vec<C64> = options
        .eps
        .iter()
        .map(|&e| {
            let m = nd.point + dir * (e * len);
            match kind {
                LayerKind::DoubleLayer => potential.value(m),
                LayerKind::SingleLayerNormal => potential.directional_derivative(m, nu),
            }
        })
        .collect();
    let measured = extrapolate_to_zero(&options.eps, &samples);

    let op = match kind {
        LayerKind::DoubleLayer => OperatorKind::W,
        LayerKind::SingleLayerNormal => OperatorKind::VPrime,
    };
    let applied: C64 = operator_row(op, problem.k, mesh, node)
        .iter().zip(density).map(|(a, b)| a * b).sum();
    let half = match (kind, side) {
        (LayerKind::DoubleLayer, Side::Inside) | (LayerKind::SingleLayerNormal, Side::Outside) => -0.5,
        _ => 0.5,
    };
    let predicted = density[node] * half + applied;
    let scale = density.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let deviation = (measured - predicted).norm() / if scale > 0.0 { scale } else { 1.0 };
    Ok(JumpResult { node, side, measured, predicted, deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bie::{solve, Excitation};
    use crate::geometry::{BoundaryProfile, MeshOptions};
    use crate::kernels::Wavenumber;

    fn problem(bc: BoundaryCondition) -> BieProblem {
        BieProblem::new(
            BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]).unwrap(),
            &MeshOptions::with_panels(16),
            Wavenumber::real(3.0).unwrap(),
            bc,
            Excitation::PlaneWave { incidence: 0.3 },
        )
        .unwrap()
    }

    #[test]
    fn neville_is_exact_for_quadratics() {
        let x = [0.3, 0.2, 0.1];
        let y: Vec<C64> = x.iter().map(|&t| C64::new(1.0 + 2.0 * t - t * t, t)).collect();
        let v = extrapolate_to_zero(&x, &y);
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn both_jumps_match_discrete_operators() {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let p = problem(bc);
            let d = solve(&p).unwrap();
            let kind = LayerKind::for_condition(bc);
            let node = p.mesh.nodes().iter().position(|n| !n.is_corner_adjacent && n.point.x > 0.2).unwrap();
            for side in [Side::Inside, Side::Outside] {
                let r = jump_check(&p, &d.values, kind, node, side, &JumpOptions::default()).unwrap();
                assert!(r.deviation < 5e-3, "{bc} {side:?}: {}", r.deviation);
            }
        }
    }

    #[test]
    fn rejects_corner_nodes_and_wide_angles() {
        let p = problem(BoundaryCondition::Dirichlet);
        let d = vec![C64::new(1.0, 0.0); p.mesh.len()];
        let corner = p.mesh.nodes().iter().position(|n| n.is_corner_adjacent).unwrap();
        assert_eq!(
            jump_check(&p, &d, LayerKind::DoubleLayer, corner, Side::Inside, &JumpOptions::default()),
            Err(PostprocessError::CornerNode(corner))
        );
        let smooth = p.mesh.nodes().iter().position(|n| !n.is_corner_adjacent).unwrap();
        let wide = JumpOptions { angle: 0.5, ..JumpOptions::default() };
        assert!(matches!(
            jump_check(&p, &d, LayerKind::DoubleLayer, smooth, Side::Outside, &wide),
            Err(PostprocessError::ConeViolation { .. })
        ));
    }
}
