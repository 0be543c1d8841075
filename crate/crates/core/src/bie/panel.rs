//! Panel quadrature for layer kernels: plain Gauss for well-separated pairs,
//! adaptive Gauss for near pairs, product-log integration on the self panel.

use crate::geometry::{segment_distance, BoundaryMesh, Point};
use crate::kernels::{dg_dp_parts, grad_m_dg_dp, grad_m_parts, ImagePair};
use crate::quadrature::{lagrange_basis, log_product_weights, AdaptiveIntegrator, GaussLegendre};
use crate::special::log_split_h0;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// A pair is integrated adaptively when the target is closer than this many
/// panel lengths to the panel (or to its mirror image).
pub(crate) const NEAR_FACTOR: f64 = 3.0;

/// Points of the upsampled rule used for self-panel log integration.
const FINE_POINTS: usize = 16;

/// Layer kernels, all with the outward normal `ν_P = −n_P` at the source.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Kernel {
    /// `G₂(M, P)`
    Single,
    /// `∂_{ν(P)} G₁(M, P)`
    Double,
    /// `∂_{ν(M)} G₂(M, P)` for the given target direction.
    SingleNormal(Point),
    /// `∇_M G₂(M, P)`
    SingleGrad,
    /// `∇_M ∂_{ν(P)} G₁(M, P)`
    DoubleGrad,
}

impl Kernel {
    pub fn components(self) -> usize {
        match self {
            Kernel::SingleGrad | Kernel::DoubleGrad => 2,
            _ => 1,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Kernel::Double | Kernel::DoubleGrad => -1.0,
            _ => 1.0,
        }
    }

    /// Kernels whose direct term vanishes for collinear `M`, `P`.
    fn vanishes_collinear(self) -> bool {
        matches!(self, Kernel::Double | Kernel::SingleNormal(_))
    }

    /// Writes direct and image parts, `components()` values each.
    fn eval(self, k: C64, pair: &ImagePair, nu: Point, direct: &mut [C64; 2], image: &mut [C64; 2]) {
        let sign = self.sign();
        match self {
            Kernel::Single => {
                direct[0] = I * 0.25 * pair.direct.h0;
                image[0] = I * 0.25 * sign * pair.image.h0;
            }
            Kernel::Double => {
                let (a, b) = dg_dp_parts(k, sign, pair, nu);
                direct[0] = a;
                image[0] = b;
            }
            Kernel::SingleNormal(n) => {
                let (a, b) = grad_m_parts(k, sign, pair);
                direct[0] = a[0] * n.x + a[1] * n.y;
                image[0] = b[0] * n.x + b[1] * n.y;
            }
            Kernel::SingleGrad => {
                let (a, b) = grad_m_parts(k, sign, pair);
                *direct = a;
                *image = b;
            }
            Kernel::DoubleGrad => {
                // Direct and image parts only needed together here.
                *direct = grad_m_dg_dp(k, sign, pair, nu);
                *image = [ZERO, ZERO];
            }
        }
    }
}

/// Which parts of the kernel a quadrature call should include.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Direct,
    Image,
    Both,
}

impl Part {
    fn pair(self, k: C64, m: Point, p: Point) -> ImagePair {
        match self {
            Part::Direct => ImagePair::partial(k, m, p, true, false),
            Part::Image => ImagePair::partial(k, m, p, false, true),
            Part::Both => ImagePair::new(k, m, p),
        }
    }
}

/// Target of a panel integral.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Target {
    pub point: Point,
    /// Mesh node index when the target is a collocation node.
    pub node: Option<usize>,
}

/// Shared quadrature machinery for one mesh and wavenumber.
pub(crate) struct PanelIntegrator<'a> {
    pub mesh: &'a BoundaryMesh,
    pub k: C64,
    ref_nodes: Vec<f64>,
    fine: GaussLegendre,
    /// `fine_basis[m][q]`: Lagrange basis of the panel nodes at fine node `m`.
    fine_basis: Vec<Vec<f64>>,
    /// `log_weights[i][m]`: product weights for `ln|t − s_i|` at local node `i`.
    log_weights: Vec<Vec<f64>>,
    adaptive: AdaptiveIntegrator,
}

impl<'a> PanelIntegrator<'a> {
    pub fn new(mesh: &'a BoundaryMesh, k: C64) -> Self {
        let ref_nodes = mesh.rule().nodes.clone();
        let g = ref_nodes.len();
        let fine = GaussLegendre::new(FINE_POINTS);
        let fine_basis = fine
            .nodes
            .iter()
            .map(|&t| {
                let mut b = vec![0.0; g];
                lagrange_basis(&ref_nodes, t, &mut b);
                b
            })
            .collect();
        let log_weights = ref_nodes.iter().map(|&s| log_product_weights(&fine, s)).collect();
        let adaptive = AdaptiveIntegrator::with_tolerance(1e-12, 1e-15);
        Self { mesh, k, ref_nodes, fine, fine_basis, log_weights, adaptive }
    }

    pub fn gauss_per_panel(&self) -> usize {
        self.ref_nodes.len()
    }

    /// Adds `∫_panel K(M, P) L_q(P) dℓ_P` for every node `q` of panel `p` into
    /// `out[q * nc + c]`, with `nc = kernel.components()`.
    pub fn panel_weights(&self, kernel: Kernel, target: Target, p: usize, out: &mut [C64]) {
        let nc = kernel.components();
        let g = self.gauss_per_panel();
        debug_assert_eq!(out.len(), g * nc);
        let panel = &self.mesh.panels()[p];
        let len = panel.length();
        let m = target.point;
        let own_node = target.node.filter(|&i| self.mesh.nodes()[i].panel == p);
        let collinear = kernel.vanishes_collinear()
            && target.node.is_some_and(|i| self.mesh.panels()[self.mesh.nodes()[i].panel].segment == panel.segment);
        let direct_near = own_node.is_some() || segment_distance(m, panel.start, panel.end) < NEAR_FACTOR * len;
        let image_near = segment_distance(m, panel.start.mirror(), panel.end.mirror()) < NEAR_FACTOR * len;

        if !direct_near && !image_near {
            self.plain(kernel, m, p, Part::Both, out);
            return;
        }
        if matches!(kernel, Kernel::DoubleGrad) {
            // The gradient kernel is evaluated as one piece.
            self.adaptive(kernel, m, p, Part::Both, out);
            return;
        }
        if collinear {
            // Direct term is identically zero.
        } else if let Some(i) = own_node {
            match kernel {
                Kernel::Single => self.self_log(i, p, out),
                _ => unreachable!("only the single layer has a singular self term"),
            }
        } else if direct_near {
            self.adaptive(kernel, m, p, Part::Direct, out);
        } else {
            self.plain(kernel, m, p, Part::Direct, out);
        }
        if image_near {
            self.adaptive(kernel, m, p, Part::Image, out);
        } else {
            self.plain(kernel, m, p, Part::Image, out);
        }
    }

    fn plain(&self, kernel: Kernel, m: Point, p: usize, part: Part, out: &mut [C64]) {
        let nc = kernel.components();
        let mut d = [ZERO; 2];
        let mut im = [ZERO; 2];
        for (q, node) in self.mesh.panel_nodes(p).iter().enumerate() {
            let pair = part.pair(self.k, m, node.point);
            kernel.eval(self.k, &pair, node.outward(), &mut d, &mut im);
            let w = node.arc_weight();
            for c in 0..nc {
                let v = match part {
                    Part::Direct => d[c],
                    Part::Image => im[c],
                    Part::Both => d[c] + im[c],
                };
                out[q * nc + c] += v * w;
            }
        }
    }

    fn adaptive(&self, kernel: Kernel, m: Point, p: usize, part: Part, out: &mut [C64]) {
        let nc = kernel.components();
        let g = self.gauss_per_panel();
        let panel = &self.mesh.panels()[p];
        let half = 0.5 * panel.length();
        let nu = -panel.normal();
        let mut basis = vec![0.0; g];
        let mut result = vec![ZERO; g * nc];
        self.adaptive.integrate(
            g * nc,
            |s, vals| {
                let point = panel.at(s);
                let pair = part.pair(self.k, m, point);
                let mut d = [ZERO; 2];
                let mut im = [ZERO; 2];
                kernel.eval(self.k, &pair, nu, &mut d, &mut im);
                lagrange_basis(&self.ref_nodes, s, &mut basis);
                for q in 0..g {
                    for c in 0..nc {
                        let v = match part {
                            Part::Direct => d[c],
                            Part::Image => im[c],
                            Part::Both => d[c] + im[c],
                        };
                        vals[q * nc + c] = v * (basis[q] * half);
                    }
                }
            },
            &mut result,
        );
        for (o, r) in out.iter_mut().zip(&result) {
            *o += r;
        }
    }

    /// Direct part of the single layer on the target's own panel:
    /// `Φ(kr) = −J₀(kr)/(2π)·ln r + smooth`, with the log factor integrated
    /// by product weights on an upsampled rule.
    fn self_log(&self, node: usize, p: usize, out: &mut [C64]) {
        let g = self.gauss_per_panel();
        let local = node - self.mesh.panels()[p].first_node;
        let s_i = self.ref_nodes[local];
        let half = 0.5 * self.mesh.panels()[p].length();
        let ln_half = half.ln();
        let ln_k = self.k.ln();
        let to_j0 = 1.0 / (I * (2.0 / PI));
        for (m, (&t, &w)) in self.fine.nodes.iter().zip(&self.fine.weights).enumerate() {
            let r = half * (t - s_i).abs();
            let split = log_split_h0(self.k * r).expect("k r lies in the first quadrant");
            let j0 = split.log_coeff * to_j0;
            let a = -j0 / (2.0 * PI);
            let b = a * ln_half + I * 0.25 * (split.log_coeff * ln_k + split.regular);
            let f = (a * self.log_weights[local][m] + b * w) * half;
            for q in 0..g {
                out[q] += f * self.fine_basis[m][q];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundaryProfile, MeshOptions};
    use crate::kernels::{fundamental, Wavenumber};

    fn mesh(n: usize) -> BoundaryMesh {
        let p = BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]).unwrap();
        BoundaryMesh::new(&p, &MeshOptions::with_panels(n)).unwrap()
    }

    /// Reference `∫_panel G₂(M, P) L_q(P) dℓ` by brute-force substitution
    /// `s = s_i ± (1+s_i)u²`-type clustering on each side of the target.
    fn oracle_single(mesh: &BoundaryMesh, k: f64, node: usize) -> Vec<C64> {
        let p = mesh.nodes()[node].panel;
        let panel = mesh.panels()[p];
        let nodes = mesh.rule().nodes.clone();
        let s_i = nodes[node - panel.first_node];
        let rule = GaussLegendre::new(60);
        let half = 0.5 * panel.length();
        let kk = Wavenumber::real(k).unwrap();
        let mut out = vec![ZERO; nodes.len()];
        let mut basis = vec![0.0; nodes.len()];
        let target = mesh.nodes()[node].point;
        // s = s_i + (e − s_i)·u⁴ with u ∈ (0, 1], e = ±1 removes the log singularity.
        for e in [-1.0, 1.0] {
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let u = 0.5 * (x + 1.0);
                let s = s_i + (e - s_i) * u.powi(4);
                let ds = (e - s_i).abs() * 4.0 * u.powi(3) * 0.5 * w;
                let point = panel.at(s);
                let r = half * (e - s_i).abs() * u.powi(4);
                let g = fundamental(kk, r) + fundamental(kk, target.distance(point.mirror()));
                lagrange_basis(&nodes, s, &mut basis);
                for q in 0..nodes.len() {
                    out[q] += g * basis[q] * half * ds;
                }
            }
        }
        out
    }

    #[test]
    fn self_panel_single_layer_matches_oracle() {
        let mesh = mesh(16);
        for k in [1.0, 3.0, 7.0] {
            let integ = PanelIntegrator::new(&mesh, C64::new(k, 0.0));
            for node in [0, 5, 18, 33, 47, 62] {
                let p = mesh.nodes()[node].panel;
                let mut out = vec![ZERO; 4];
                integ.panel_weights(Kernel::Single, Target { point: mesh.nodes()[node].point, node: Some(node) }, p, &mut out);
                let oracle = oracle_single(&mesh, k, node);
                for (a, b) in out.iter().zip(&oracle) {
                    assert!((a - b).norm() < 1e-12 * b.norm().max(1e-3), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn plain_and_adaptive_agree_far_away() {
        let mesh = mesh(16);
        let integ = PanelIntegrator::new(&mesh, C64::new(2.0, 0.1));
        let m = Point::new(0.4, 2.0);
        for kernel in [Kernel::Single, Kernel::Double, Kernel::SingleNormal(Point::new(0.0, 1.0)), Kernel::SingleGrad] {
            let nc = kernel.components();
            let mut a = vec![ZERO; 4 * nc];
            let mut b = vec![ZERO; 4 * nc];
            integ.plain(kernel, m, 7, Part::Both, &mut a);
            integ.adaptive(kernel, m, 7, Part::Both, &mut b);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-10 * y.norm().max(1e-6));
            }
        }
    }
}
