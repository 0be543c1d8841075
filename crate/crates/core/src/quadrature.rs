//! Quadrature rules on the reference interval `[-1, 1]`.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Gauss–Legendre rule with `n` points on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Legendre polynomials `P_0(x) .. P_{m}(x)`.
pub fn legendre_values(m: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(m + 1);
    out.push(1.0);
    if m >= 1 {
        out.push(x);
    }
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Gauss–Hermite nodes and weights for `∫ e^{-s²} f(s) ds` over the real line.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    let mut out = vec![(0.0, 0.0); n];
    let mut z = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * out[0].0,
            3 => 1.91 * z - 0.91 * out[1].0,
            _ => 2.0 * z - out[i - 2].0,
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            // Orthonormal recurrence keeps the values in range for large n.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let w = 2.0 / (pp * pp);
        out[i] = (z, w);
        out[n - 1 - i] = (-z, w);
    }
    out
}

/// Barycentric Lagrange basis values `L_l(t)` for the given interpolation nodes.
pub fn lagrange_basis(nodes: &[f64], t: f64, out: &mut [f64]) {
    debug_assert_eq!(nodes.len(), out.len());
    for (l, o) in out.iter_mut().enumerate() {
        let mut v = 1.0;
        for (m, &xm) in nodes.iter().enumerate() {
            if m != l {
                v *= (t - xm) / (nodes[l] - xm);
            }
        }
        *o = v;
    }
}

/// Moments `M_m(t0) = ∫_{-1}^{1} ln|t − t0| P_m(t) dt` for `m = 0..=m_max`,
/// valid for `|t0| < 1`.
///
/// Uses `P_m = (P'_{m+1} − P'_{m−1})/(2m+1)` and integration by parts, which
/// reduces the moments to the Cauchy principal values
/// `C_n = PV ∫ P_n(t)/(t − t0) dt`; those obey the Legendre recurrence with a
/// source term at `n = 0`.
pub fn legendre_log_moments(t0: f64, m_max: usize) -> Vec<f64> {
    debug_assert!(t0.abs() < 1.0);
    let mut c = Vec::with_capacity(m_max + 2);
    c.push(((1.0 - t0) / (1.0 + t0)).ln());
    c.push(2.0 + t0 * c[0]);
    for n in 1..=m_max {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * t0 * c[n] - nf * c[n - 1]) / (nf + 1.0);
        c.push(next);
    }
    let mut moments = Vec::with_capacity(m_max + 1);
    moments.push((1.0 - t0) * (1.0 - t0).ln() + (1.0 + t0) * (1.0 + t0).ln() - 2.0);
    for m in 1..=m_max {
        moments.push((c[m - 1] - c[m + 1]) / (2.0 * m as f64 + 1.0));
    }
    moments
}

/// Product-integration weights `v_q` with
/// `Σ_q v_q f(t_q) ≈ ∫_{-1}^{1} ln|t − t0| f(t) dt`, exact for polynomials of
/// degree below the rule size.
pub fn log_product_weights(rule: &GaussLegendre, t0: f64) -> Vec<f64> {
    let n = rule.len();
    let moments = legendre_log_moments(t0, n - 1);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| {
            let p = legendre_values(n - 1, t);
            let s: f64 = (0..n).map(|m| (2.0 * m as f64 + 1.0) * 0.5 * p[m] * moments[m]).sum();
            w * s
        })
        .collect()
}

/// Adaptive integration of a vector-valued integrand over `[-1, 1]`.
///
/// Each interval is accepted when a Gauss rule over it agrees with the same
/// rule applied to its two halves. `f(t, out)` writes the integrand values.
pub struct AdaptiveIntegrator {
    rule: GaussLegendre,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: usize,
}

impl Default for AdaptiveIntegrator {
    fn default() -> Self {
        Self { rule: GaussLegendre::new(10), rel_tol: 1e-13, abs_tol: 1e-15, max_depth: 48 }
    }
}

impl AdaptiveIntegrator {
    pub fn with_tolerance(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    pub fn integrate<F>(&self, dim: usize, mut f: F, result: &mut [C64])
    where
        F: FnMut(f64, &mut [C64]),
    {
        debug_assert_eq!(result.len(), dim);
        result.iter_mut().for_each(|r| *r = C64::new(0.0, 0.0));
        let mut buf = vec![C64::new(0.0, 0.0); dim];
        let mut whole = vec![C64::new(0.0, 0.0); dim];
        let mut left = vec![C64::new(0.0, 0.0); dim];
        let mut right = vec![C64::new(0.0, 0.0); dim];
        self.apply(-1.0, 1.0, &mut f, &mut buf, &mut whole);
        let scale = whole.iter().map(|v| v.norm()).fold(0.0, f64::max);
        // Depth-first stack of (a, b, depth, estimate on [a, b]).
        let mut stack = vec![(-1.0, 1.0, 0usize, whole.clone())];
        let mut global_scale = scale;
        while let Some((a, b, depth, est)) = stack.pop() {
            let mid = 0.5 * (a + b);
            self.apply(a, mid, &mut f, &mut buf, &mut left);
            self.apply(mid, b, &mut f, &mut buf, &mut right);
            let mut diff = 0.0f64;
            let mut size = 0.0f64;
            for d in 0..dim {
                let refined = left[d] + right[d];
                diff = diff.max((refined - est[d]).norm());
                size = size.max(refined.norm());
            }
            global_scale = global_scale.max(size);
            let tol = (self.rel_tol * global_scale).max(self.abs_tol * (b - a));
            if diff <= tol || depth >= self.max_depth {
                for d in 0..dim {
                    result[d] += left[d] + right[d];
                }
            } else {
                stack.push((a, mid, depth + 1, left.clone()));
                stack.push((mid, b, depth + 1, right.clone()));
            }
        }
    }

    fn apply<F>(&self, a: f64, b: f64, f: &mut F, buf: &mut [C64], out: &mut [C64])
    where
        F: FnMut(f64, &mut [C64]),
    {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (&x, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            f(mid + half * x, buf);
            for (o, v) in out.iter_mut().zip(buf.iter()) {
                *o += *v * (w * half);
            }
        }
    }
}
