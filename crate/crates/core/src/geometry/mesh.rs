use super::{BoundaryProfile, GeometryError, Point};
use crate::quadrature::GaussLegendre;
use serde::{Deserialize, Serialize};

/// Discretization parameters for `Γ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshOptions {
    pub n_panels: usize,
    /// Grading exponent `q ≥ 1`; panels shrink like `(i/m)^q` toward corners.
    pub grading: f64,
    pub gauss_per_panel: usize,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self { n_panels: 64, grading: 3.0, gauss_per_panel: 4 }
    }
}

impl MeshOptions {
    pub fn with_panels(n_panels: usize) -> Self {
        Self { n_panels, ..Self::default() }
    }
}

/// A quadrature node on the boundary graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshNode {
    /// Arc-length parameter measured from `(0, 0)`.
    pub t: f64,
    pub point: Point,
    /// Unit normal pointing into `D` (positive y-component).
    pub normal: Point,
    /// `√(1 + h'²)` on the node's segment.
    pub jacobian: f64,
    /// Quadrature weight with respect to `x`; `weight · jacobian` is the arc weight.
    pub weight: f64,
    pub panel: usize,
    pub is_corner_adjacent: bool,
}

impl MeshNode {
    /// Arc-length quadrature weight.
    pub fn arc_weight(&self) -> f64 {
        self.weight * self.jacobian
    }

    /// Unit normal pointing out of `D`, the orientation the layer operators use.
    pub fn outward(&self) -> Point {
        -self.normal
    }
}

/// A straight panel of the boundary polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub start: Point,
    pub end: Point,
    /// Unit tangent of the parent segment (exact, unlike `end − start` for tiny panels).
    pub direction: Point,
    pub segment: usize,
    pub first_node: usize,
    pub corner_adjacent: bool,
}

impl Panel {
    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }

    pub fn midpoint(&self) -> Point {
        (self.start + self.end) * 0.5
    }

    /// Point at reference parameter `s ∈ [-1, 1]`.
    pub fn at(&self, s: f64) -> Point {
        self.midpoint() + (self.end - self.start) * (0.5 * s)
    }

    pub fn normal(&self) -> Point {
        self.direction.left_normal()
    }
}

/// Panel-wise Gauss–Legendre discretization of `Γ₂`, graded toward corners.
#[derive(Debug, Clone)]
pub struct BoundaryMesh {
    nodes: Vec<MeshNode>,
    panels: Vec<Panel>,
    rule: GaussLegendre,
    options: MeshOptions,
    arc_length: f64,
}

/// Symmetric grading map on `[0, 1]` with `w(s) ≤ s^q` near both ends
/// (for `s ≤ 1/5`); the identity when `q = 1`.
fn grading_map(s: f64, q: f64) -> f64 {
    let u = |s: f64| s.powf(q) * (1.0 + s).powf(q - 1.0);
    let a = u(s);
    a / (a + u(1.0 - s))
}

/// Splits `total` panels across segments. Half the budget follows arc length,
/// half is shared equally so short segments still refine with `total`.
fn allocate_panels(lengths: &[f64], total: usize) -> Vec<usize> {
    let n = lengths.len();
    let sum: f64 = lengths.iter().sum();
    let shares: Vec<f64> = lengths
        .iter()
        .map(|&l| total as f64 * (0.5 * l / sum + 0.5 / n as f64))
        .collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| (s.floor() as usize).max(1)).collect();
    let mut assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ra = shares[a] - shares[a].floor();
        let rb = shares[b] - shares[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut k = 0;
    while assigned < total {
        counts[order[k % n]] += 1;
        assigned += 1;
        k += 1;
    }
    // Minimum-one bumps may overshoot; take back from the largest counts.
    while assigned > total {
        let (idx, _) = counts.iter().enumerate().max_by_key(|&(i, c)| (*c, std::cmp::Reverse(i))).unwrap();
        counts[idx] -= 1;
        assigned -= 1;
    }
    counts
}

impl BoundaryMesh {
    pub fn new(profile: &BoundaryProfile, options: &MeshOptions) -> Result<Self, GeometryError> {
        let nseg = profile.segment_count();
        if options.n_panels < 4 || options.n_panels < nseg {
            return Err(GeometryError::TooFewPanels(options.n_panels));
        }
        if !(options.grading >= 1.0) {
            return Err(GeometryError::InvalidGrading(options.grading));
        }
        if options.gauss_per_panel == 0 {
            return Err(GeometryError::InvalidGaussOrder);
        }
        let lengths: Vec<f64> = (0..nseg)
            .map(|s| {
                let (a, b) = profile.segment(s);
                a.distance(b)
            })
            .collect();
        let counts = allocate_panels(&lengths, options.n_panels);
        let rule = GaussLegendre::new(options.gauss_per_panel);
        let last = profile.breakpoints().len() - 1;

        let mut panels = Vec::with_capacity(options.n_panels);
        let mut nodes = Vec::with_capacity(options.n_panels * options.gauss_per_panel);
        let mut arc_offset = 0.0;
        for seg in 0..nseg {
            let (a, b) = profile.segment(seg);
            let m = counts[seg];
            let jac = (1.0 + profile.slope(seg).powi(2)).sqrt();
            let start_corner = profile.is_corner(seg) || seg == 0 && profile.is_corner(0);
            let end_corner = profile.is_corner(seg + 1) || seg + 1 == last && profile.is_corner(last);
            let direction = (b - a).normalized();
            let normal = direction.left_normal();
            // Measure each breakpoint from the nearer segment end to keep tiny panels accurate.
            let at = |i: usize| {
                if 2 * i <= m {
                    a + (b - a) * grading_map(i as f64 / m as f64, options.grading)
                } else {
                    b - (b - a) * grading_map((m - i) as f64 / m as f64, options.grading)
                }
            };
            for i in 0..m {
                let p0 = at(i);
                let p1 = at(i + 1);
                let corner_adjacent = (i == 0 && start_corner) || (i + 1 == m && end_corner);
                let panel = Panel {
                    start: p0,
                    end: p1,
                    direction,
                    segment: seg,
                    first_node: nodes.len(),
                    corner_adjacent,
                };
                let half_dx = 0.5 * (p1.x - p0.x);
                let panel_idx = panels.len();
                for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let point = panel.at(r);
                    nodes.push(MeshNode {
                        t: arc_offset + a.distance(point),
                        point,
                        normal,
                        jacobian: jac,
                        weight: w * half_dx,
                        panel: panel_idx,
                        is_corner_adjacent: corner_adjacent,
                    });
                }
                panels.push(panel);
            }
            arc_offset += lengths[seg];
        }
        Ok(Self { nodes, panels, rule, options: *options, arc_length: arc_offset })
    }

    pub fn nodes(&self) -> &[MeshNode] {
        &self.nodes
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Reference Gauss rule shared by every panel.
    pub fn rule(&self) -> &GaussLegendre {
        &self.rule
    }

    pub fn options(&self) -> &MeshOptions {
        &self.options
    }

    pub fn gauss_per_panel(&self) -> usize {
        self.rule.len()
    }

    /// Polyline arc length of the meshed profile.
    pub fn arc_length(&self) -> f64 {
        self.arc_length
    }

    /// Panel containing abscissa `x` and the reference coordinate `s ∈ [-1, 1]`
    /// of `x` on it; `None` outside `[0, d]`.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let first = self.panels.first()?;
        let last = self.panels.last()?;
        if x < first.start.x || x > last.end.x {
            return None;
        }
        let p = self.panels.partition_point(|pl| pl.end.x < x).min(self.panels.len() - 1);
        let pl = &self.panels[p];
        let s = (2.0 * (x - pl.start.x) / (pl.end.x - pl.start.x) - 1.0).clamp(-1.0, 1.0);
        Some((p, s))
    }

    /// Nodes of panel `p`.
    pub fn panel_nodes(&self, p: usize) -> &[MeshNode] {
        let first = self.panels[p].first_node;
        &self.nodes[first..first + self.rule.len()]
    }
}
