use super::{assemble_operator, build_rhs, BieError, BieProblem, OperatorMatrix};
use crate::kernels::BoundaryCondition;
use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Residual bound every returned solution satisfies.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Linear solver for the dense second-kind system.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum SolveMethod {
    /// LU with partial pivoting.
    #[default]
    Dense,
    /// Restarted GMRES without preconditioning.
    Gmres {
        #[serde(default = "default_restart")]
        restart: usize,
        #[serde(default = "default_max_iterations")]
        max_iterations: usize,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
}

fn default_restart() -> usize {
    60
}

fn default_max_iterations() -> usize {
    2000
}

fn default_tolerance() -> f64 {
    RESIDUAL_TOLERANCE
}

/// Serialized as the bare method, e.g. `{"method": "gmres", "restart": 30}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SolverOptions {
    pub method: SolveMethod,
}

impl SolverOptions {
    pub fn gmres() -> Self {
        Self {
            method: SolveMethod::Gmres {
                restart: default_restart(),
                max_iterations: default_max_iterations(),
                tolerance: default_tolerance(),
            },
        }
    }
}

/// Density samples at the mesh nodes: `ψ` (Dirichlet) or `φ` (Neumann).
#[derive(Debug, Clone)]
pub struct DensitySolution {
    pub values: Vec<C64>,
    pub bc: BoundaryCondition,
    /// `‖(σI + K)x − rhs‖₂ / ‖rhs‖₂` (zero when `rhs ≡ 0`).
    pub residual_norm: f64,
    /// Estimate of the 1-norm condition number (dense solves only).
    pub condition_estimate: Option<f64>,
    pub iterations: Option<usize>,
}

impl DensitySolution {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Solves the problem's integral equation with the dense direct solver.
pub fn solve(problem: &BieProblem) -> Result<DensitySolution, BieError> {
    solve_with(problem, &SolverOptions::default())
}

pub fn solve_with(problem: &BieProblem, options: &SolverOptions) -> Result<DensitySolution, BieError> {
    let rhs = build_rhs(problem)?;
    let op = assemble_operator(problem.operator_kind(), problem.k, &problem.mesh)?;
    solve_system(&op, problem.sigma(), &rhs, problem.bc, options)
}

/// Solves `(σI + K)x = rhs` for an assembled operator.
pub fn solve_system(
    op: &OperatorMatrix,
    sigma: f64,
    rhs: &[C64],
    bc: BoundaryCondition,
    options: &SolverOptions,
) -> Result<DensitySolution, BieError> {
    let n = op.size();
    let rhs_norm = norm2(rhs);
    if rhs_norm == 0.0 {
        return Ok(DensitySolution {
            values: vec![ZERO; n],
            bc,
            residual_norm: 0.0,
            condition_estimate: None,
            iterations: Some(0),
        });
    }
    let (values, condition_estimate, iterations) = match options.method {
        SolveMethod::Dense => {
            let a = Mat::<C64>::from_fn(n, n, |i, j| op.get(i, j) + if i == j { C64::new(sigma, 0.0) } else { ZERO });
            let lu = a.partial_piv_lu();
            let cond = condition_estimate(&a, &lu);
            let b = Mat::<C64>::from_fn(n, 1, |i, _| rhs[i]);
            let x = lu.solve(&b);
            let values: Vec<C64> = (0..n).map(|i| x[(i, 0)]).collect();
            if !cond.is_finite() || cond > 1e15 || values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(BieError::SingularSystem { condition: cond });
            }
            (values, Some(cond), None)
        }
        SolveMethod::Gmres { restart, max_iterations, tolerance } => {
            let (x, it, res) = gmres(|v| op.apply_shifted(sigma, v), rhs, restart, max_iterations, tolerance);
            if res > tolerance {
                return Err(BieError::NotConverged { residual: res, iterations: it });
            }
            (x, None, Some(it))
        }
    };
    let residual = op.apply_shifted(sigma, &values);
    let diff: Vec<C64> = residual.iter().zip(rhs).map(|(a, b)| a - b).collect();
    let residual_norm = norm2(&diff) / rhs_norm;
    if residual_norm > RESIDUAL_TOLERANCE {
        return Err(BieError::SingularSystem { condition: condition_estimate.unwrap_or(f64::INFINITY) });
    }
    Ok(DensitySolution { values, bc, residual_norm, condition_estimate, iterations })
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn norm1(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).sum()
}

fn to_col(v: &[C64]) -> Mat<C64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn from_col(m: &Mat<C64>) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

/// Hager–Higham estimate of `‖A‖₁ ‖A⁻¹‖₁`.
fn condition_estimate(a: &Mat<C64>, lu: &PartialPivLu<C64>) -> f64 {
    let n = a.nrows();
    let a_norm = (0..n).map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
    let mut est = 0.0f64;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let y = from_col(&lu.solve(to_col(&x)));
        est = est.max(norm1(&y));
        let xi: Vec<C64> = y.iter().map(|v| if v.norm() > 0.0 { v / v.norm() } else { C64::new(1.0, 0.0) }).collect();
        let mut z = to_col(&xi);
        lu.solve_adjoint_in_place(z.as_mut());
        let z = from_col(&z);
        let (j, zmax) = z.iter().enumerate().map(|(i, v)| (i, v.norm())).fold((0, 0.0), |b, c| if c.1 > b.1 { c } else { b });
        let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
        if zmax <= ztx || j == last_j {
            break;
        }
        last_j = j;
        x = vec![ZERO; n];
        x[j] = C64::new(1.0, 0.0);
    }
    // Higham's alternating test vector guards against unlucky iterates.
    let b: Vec<C64> = (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
        })
        .collect();
    let y = from_col(&lu.solve(to_col(&b)));
    est = est.max(2.0 * norm1(&y) / (3.0 * n as f64));
    a_norm * est
}

/// Restarted GMRES with modified Gram–Schmidt and Givens rotations.
/// Returns the solution, total iterations and final relative residual.
fn gmres<F>(apply: F, b: &[C64], restart: usize, max_iterations: usize, tol: f64) -> (Vec<C64>, usize, f64)
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let n = b.len();
    let b_norm = norm2(b);
    let restart = restart.clamp(1, n.max(1));
    let mut x = vec![ZERO; n];
    let mut total = 0;
    loop {
        let ax = apply(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        let rel = beta / b_norm;
        if rel <= tol || total >= max_iterations {
            return (x, total, rel);
        }
        let mut basis: Vec<Vec<C64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![ZERO; restart]; restart + 1];
        let mut cs = vec![ZERO; restart];
        let mut sn = vec![ZERO; restart];
        let mut g = vec![ZERO; restart + 1];
        g[0] = C64::new(beta, 0.0);
        let mut steps = 0;
        for j in 0..restart {
            let mut w = apply(&basis[j]);
            for (i, v) in basis.iter().enumerate() {
                let hij: C64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let wn = norm2(&w);
            h[j + 1][j] = C64::new(wn, 0.0);
            for i in 0..j {
                let t = cs[i].conj() * h[i][j] + sn[i].conj() * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let (a, bb) = (h[j][j], h[j + 1][j]);
            let denom = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            cs[j] = a / denom;
            sn[j] = bb / denom;
            h[j][j] = C64::new(denom, 0.0);
            h[j + 1][j] = ZERO;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j].conj() * g[j];
            steps = j + 1;
            total += 1;
            if g[j + 1].norm() / b_norm <= 0.1 * tol || wn == 0.0 || total >= max_iterations {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // Back substitution for the least-squares coefficients.
        let mut y = vec![ZERO; steps];
        for i in (0..steps).rev() {
            let mut s = g[i];
            for k in i + 1..steps {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[k]) {
                *xi += yk * vi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::Excitation;
    use super::*;
    use crate::geometry::{BoundaryProfile, MeshOptions, Point};
    use crate::kernels::Wavenumber;

    fn bump() -> BoundaryProfile {
        BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]).unwrap()
    }

    fn problem(bc: BoundaryCondition, n: usize, exc: Excitation) -> BieProblem {
        BieProblem::new(bump(), &MeshOptions::with_panels(n), Wavenumber::real(3.0).unwrap(), bc, exc).unwrap()
    }

    #[test]
    fn flat_profile_density_vanishes() {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let p = BieProblem::new(
                BoundaryProfile::flat(1.0).unwrap(),
                &MeshOptions::with_panels(16),
                Wavenumber::real(2.0).unwrap(),
                bc,
                Excitation::PlaneWave { incidence: 0.3 },
            )
            .unwrap();
            let s = solve(&p).unwrap();
            assert_eq!(s.max_abs(), 0.0);
        }
    }

    #[test]
    fn residual_contract_and_discrete_jump_consistency() {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let p = problem(bc, 32, Excitation::PlaneWave { incidence: 0.5 });
            let s = solve(&p).unwrap();
            assert!(s.residual_norm <= RESIDUAL_TOLERANCE);
            let cond = s.condition_estimate.unwrap();
            assert!(cond.is_finite() && cond > 1.0);
            let op = assemble_operator(p.operator_kind(), p.k, &p.mesh).unwrap();
            let lhs = op.apply_shifted(p.sigma(), &s.values);
            let rhs = build_rhs(&p).unwrap();
            let err = norm2(&lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect::<Vec<_>>()) / norm2(&rhs);
            assert!(err <= RESIDUAL_TOLERANCE);
        }
    }

    #[test]
    fn gmres_matches_dense() {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let p = problem(bc, 24, Excitation::PointSource { source: Point::new(0.5, -0.1) });
            let a = solve(&p).unwrap();
            let b = solve_with(&p, &SolverOptions::gmres()).unwrap();
            assert!(b.iterations.unwrap() > 0);
            let diff = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(diff <= 1e-8 * a.max_abs(), "{diff}");
        }
    }

    #[test]
    fn condition_estimate_tracks_exact_norms() {
        // Diagonal system: cond₁ = max|d| / min|d|.
        let d = [2.0, 0.5, 4.0, 1.0];
        let a = Mat::<C64>::from_fn(4, 4, |i, j| if i == j { C64::new(d[i], 0.0) } else { ZERO });
        let lu = a.partial_piv_lu();
        assert!((condition_estimate(&a, &lu) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn self_convergence_under_refinement() {
        // Density at a fixed abscissa for three resolutions.
        let probe = |n: usize| {
            let p = problem(BoundaryCondition::Dirichlet, n, Excitation::PlaneWave { incidence: 0.2 });
            let s = solve(&p).unwrap();
            super::super::density_at(&p.mesh, &s.values, 0.3).unwrap()
        };
        let (a, b, c) = (probe(16), probe(32), probe(64));
        assert!((b - c).norm() < (a - b).norm(), "{a} {b} {c}");
    }
}
