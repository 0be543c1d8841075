use super::panel::{Kernel, PanelIntegrator, Target};
use super::BieError;
use crate::geometry::BoundaryMesh;
use crate::kernels::Wavenumber;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Discrete layer operator on `Γ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    /// Single layer with kernel `G₂`.
    V,
    /// Double layer with kernel `∂_{ν(P)} G₁`.
    W,
    /// Normal derivative of the single layer, kernel `∂_{ν(M)} G₂`.
    VPrime,
}

/// Dense Nyström matrix, row-major: entry `(i, j)` maps the density at node
/// `j` to the operator value at node `i`.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub k: Wavenumber,
    n: usize,
    entries: Vec<C64>,
}

impl OperatorMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `K x`, summed in a fixed order.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        self.entries
            .chunks(self.n)
            .map(|row| row.iter().zip(x).fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a * b))
            .collect()
    }

    /// `(σI + K) x`.
    pub fn apply_shifted(&self, sigma: f64, x: &[C64]) -> Vec<C64> {
        let mut y = self.apply(x);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += sigma * xi;
        }
        y
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Assembles `V`, `W` or `V′` on the mesh. Rows are computed in parallel,
/// each with a fixed summation order, so the result does not depend on the
/// thread count.
pub fn assemble_operator(kind: OperatorKind, k: Wavenumber, mesh: &BoundaryMesh) -> Result<OperatorMatrix, BieError> {
    let n = mesh.len();
    if n == 0 {
        return Err(BieError::InvalidMesh);
    }
    let integ = PanelIntegrator::new(mesh, k.value());
    let mut entries = vec![C64::new(0.0, 0.0); n * n];
    entries.par_chunks_mut(n).enumerate().for_each(|(i, row)| fill_row(&integ, kind, i, row));
    let m = OperatorMatrix { kind, k, n, entries };
    if !m.is_finite() {
        return Err(BieError::InvalidMesh);
    }
    Ok(m)
}

fn fill_row(integ: &PanelIntegrator, kind: OperatorKind, i: usize, row: &mut [C64]) {
    let mesh = integ.mesh;
    let g = integ.gauss_per_panel();
    let node = &mesh.nodes()[i];
    let kernel = match kind {
        OperatorKind::V => Kernel::Single,
        OperatorKind::W => Kernel::Double,
        OperatorKind::VPrime => Kernel::SingleNormal(node.outward()),
    };
    let target = Target { point: node.point, node: Some(i) };
    for (p, panel) in mesh.panels().iter().enumerate() {
        let first = panel.first_node;
        integ.panel_weights(kernel, target, p, &mut row[first..first + g]);
    }
}

/// Row `i` of the operator, identical to `assemble_operator(..).row(i)`.
pub fn operator_row(kind: OperatorKind, k: Wavenumber, mesh: &BoundaryMesh, i: usize) -> Vec<C64> {
    let integ = PanelIntegrator::new(mesh, k.value());
    let mut row = vec![C64::new(0.0, 0.0); mesh.len()];
    fill_row(&integ, kind, i, &mut row);
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundaryProfile, MeshOptions, Point};
    use crate::kernels::{greens, BoundaryCondition};
    use crate::quadrature::GaussLegendre;

    fn k(v: f64) -> Wavenumber {
        Wavenumber::real(v).unwrap()
    }

    #[test]
    fn flat_double_layer_and_normal_derivative_vanish() {
        let mesh = BoundaryMesh::new(&BoundaryProfile::flat(1.0).unwrap(), &MeshOptions::with_panels(16)).unwrap();
        for kv in [0.5, 3.0, 9.0] {
            for kind in [OperatorKind::W, OperatorKind::VPrime] {
                let m = assemble_operator(kind, k(kv), &mesh).unwrap();
                assert!(m.max_abs() <= 1e-14, "{kind:?} {}", m.max_abs());
            }
        }
    }

    #[test]
    fn flat_single_layer_is_symmetric_in_kernel_values() {
        let mesh = BoundaryMesh::new(
            &BoundaryProfile::flat(1.0).unwrap(),
            &MeshOptions { n_panels: 8, grading: 1.0, gauss_per_panel: 4 },
        )
        .unwrap();
        assert_eq!(mesh.len(), 32);
        let m = assemble_operator(OperatorKind::V, k(1.0), &mesh).unwrap();
        let w: Vec<f64> = mesh.nodes().iter().map(|n| n.arc_weight()).collect();
        let mut far_asym = 0.0f64;
        let mut near_asym = 0.0f64;
        for i in 0..32 {
            for j in 0..32 {
                let a = m.get(i, j) / w[j];
                let b = m.get(j, i) / w[i];
                let d = (a - b).norm() / a.norm();
                let pi = mesh.nodes()[i].panel as i64;
                let pj = mesh.nodes()[j].panel as i64;
                if (pi - pj).abs() > 3 {
                    far_asym = far_asym.max(d);
                } else {
                    near_asym = near_asym.max(d);
                }
            }
        }
        assert!(far_asym <= 1e-12, "{far_asym}");
        // Product-integrated blocks are only symmetric to discretization accuracy.
        assert!(near_asym <= 5e-2, "{near_asym}");
    }

    #[test]
    fn single_layer_row_sum_matches_adaptive_integral() {
        let profile = BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]).unwrap();
        let mesh = BoundaryMesh::new(&profile, &MeshOptions::with_panels(32)).unwrap();
        let m = assemble_operator(OperatorKind::V, k(3.0), &mesh).unwrap();
        let ones = vec![C64::new(1.0, 0.0); mesh.len()];
        let i = 37;
        let row_sum = m.apply(&ones)[i];
        let target = mesh.nodes()[i].point;
        // Oracle: graded substitution on each side of the target, per segment.
        let rule = GaussLegendre::new(80);
        let mut oracle = C64::new(0.0, 0.0);
        let kk = k(3.0);
        let mut integrate = |a: Point, b: Point| {
            let len = a.distance(b);
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let u = 0.5 * (x + 1.0);
                let t = u.powi(4);
                let p = a + (b - a) * t;
                oracle += greens(BoundaryCondition::Neumann, kk, target, p).unwrap() * (len * 4.0 * u.powi(3) * 0.5 * w);
            }
        };
        let bp = profile.breakpoints();
        let seg = mesh.panels()[mesh.nodes()[i].panel].segment;
        for s in 0..2 {
            if s == seg {
                integrate(target, bp[s]);
                integrate(target, bp[s + 1]);
            } else {
                // Cluster toward the shared apex, the closest point to the target.
                let (a, b) = if s == 0 { (bp[1], bp[0]) } else { (bp[1], bp[2]) };
                integrate(a, b);
            }
        }
        assert!((row_sum - oracle).norm() < 1e-6 * oracle.norm(), "{row_sum} vs {oracle}");
    }

    #[test]
    fn entries_finite_and_second_kind_bounded() {
        let profile = BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]).unwrap();
        let mesh = BoundaryMesh::new(&profile, &MeshOptions::with_panels(24)).unwrap();
        for kind in [OperatorKind::V, OperatorKind::W, OperatorKind::VPrime] {
            let m = assemble_operator(kind, k(3.0), &mesh).unwrap();
            assert!(m.is_finite());
            assert_eq!(m.size(), 96);
        }
    }

    #[test]
    fn assembly_is_deterministic() {
        let profile = BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]).unwrap();
        let mesh = BoundaryMesh::new(&profile, &MeshOptions::with_panels(16)).unwrap();
        let a = assemble_operator(OperatorKind::W, k(2.0), &mesh).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| assemble_operator(OperatorKind::W, k(2.0), &mesh).unwrap());
        assert!(a.entries().iter().zip(b.entries()).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
    }

    #[test]
    fn single_row_matches_full_assembly() {
        let profile = BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]).unwrap();
        let mesh = BoundaryMesh::new(&profile, &MeshOptions::with_panels(8)).unwrap();
        let m = assemble_operator(OperatorKind::VPrime, k(2.0), &mesh).unwrap();
        assert_eq!(operator_row(OperatorKind::VPrime, k(2.0), &mesh, 13), m.row(13));
    }
}
