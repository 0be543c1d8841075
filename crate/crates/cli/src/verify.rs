//! `verify` subcommand: numerical self-checks with pinned tolerances.

use crate::error::CliError;
use crate::run::to_json;
use helmbie::bie::{assemble_operator, solve_with, SolverOptions};
use helmbie::kernels::greens;
use helmbie::postprocess::{
    eval_field, far_field, far_field_consistency, flux_check, jump_check, manufactured_error, mollification_experiment,
    radiation_residual, uniqueness_probe, JumpOptions, LayerKind, LayerPotential, Side,
};
use helmbie::special::{bessel_real, hankel1, log_split_h0, Kind, Order};
use helmbie::{
    solve, BieProblem, BoundaryCondition, BoundaryProfile, Complex64 as C64, Excitation, MeshOptions, MollifiedFamily,
    OperatorKind, PlaneWave, Point, TotalField, Wavenumber,
};
use serde::Serialize;
use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fast,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Fast => "fast",
            Suite::All => "all",
        }
    }
}

/// One check: `measured` is compared against `tolerance` with `relation`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub relation: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: &'static str,
    pub passed: bool,
    pub failed: usize,
    pub wall_time_seconds: f64,
    pub checks: Vec<Check>,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn at_most(&mut self, name: &str, measured: f64, tolerance: f64) {
        self.push(name, measured, tolerance, "<=", measured <= tolerance, String::new());
    }

    fn at_least(&mut self, name: &str, measured: f64, tolerance: f64) {
        self.push(name, measured, tolerance, ">=", measured >= tolerance, String::new());
    }

    fn holds(&mut self, name: &str, ok: bool, detail: String) {
        self.push(name, if ok { 1.0 } else { 0.0 }, 1.0, "==", ok, detail);
    }

    fn failed(&mut self, name: &str, err: impl std::fmt::Display) {
        self.push(name, f64::NAN, f64::NAN, "error", false, err.to_string());
    }

    fn push(&mut self, name: &str, measured: f64, tolerance: f64, relation: &'static str, passed: bool, detail: String) {
        // A NaN measurement never passes.
        let passed = passed && !measured.is_nan();
        self.0.push(Check { name: name.to_string(), measured, tolerance, relation, passed, detail });
    }

    /// Runs `f`, recording an error check under `name` if it fails.
    fn guarded<E: std::fmt::Display>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<(), E>) {
        if let Err(e) = f(self) {
            self.failed(name, e);
        }
    }
}

pub fn bump() -> BoundaryProfile {
    BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]).expect("valid profile")
}

pub const SOURCE: Point = Point::new(0.5, -0.1);

/// 20 probes at least half a wavelength (k = 3) from the boundary.
pub fn far_probes() -> Vec<Point> {
    let mut p = Vec::with_capacity(20);
    for &y in &[1.3, 1.6, 1.9, 2.2] {
        for &x in &[-1.0, -0.25, 0.5, 1.25, 2.0] {
            p.push(Point::new(x, y));
        }
    }
    p
}

fn k(v: f64) -> Wavenumber {
    Wavenumber::real(v).expect("positive wavenumber")
}

fn problem(bc: BoundaryCondition, kv: f64, n: usize, excitation: Excitation) -> Result<BieProblem, helmbie::BieError> {
    BieProblem::new(bump(), &MeshOptions::with_panels(n), k(kv), bc, excitation)
}

fn manufactured(bc: BoundaryCondition, n: usize) -> Result<BieProblem, helmbie::BieError> {
    problem(bc, 3.0, n, Excitation::PointSource { source: SOURCE })
}

const BCS: [BoundaryCondition; 2] = [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann];

/// Ascending-series `J_n` and `Y_n`, `n ∈ {0, 1}`, as an independent oracle.
pub fn series_hankel(n: u32, z: C64) -> C64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let q = -(z * z) / 4.0;
    let half = z / 2.0;
    let half_n = if n == 0 { C64::new(1.0, 0.0) } else { half };
    let nf = n as usize;
    let mut j = C64::new(0.0, 0.0);
    let mut tail = C64::new(0.0, 0.0);
    // term_k = q^k / (k! (n+k)!), psi(m+1) = −γ + H_m.
    let mut term = C64::new(1.0, 0.0);
    let harmonic = |m: usize| (1..=m).map(|i| 1.0 / i as f64).sum::<f64>();
    for kk in 0..80 {
        if kk > 0 {
            term = term * q / (kk as f64 * (kk + nf) as f64);
        }
        j += term;
        let psi = -2.0 * EULER_GAMMA + harmonic(kk) + harmonic(kk + nf);
        tail += term * psi;
        if kk > 10 && term.norm() < 1e-20 {
            break;
        }
    }
    let j = j * half_n;
    let mut y = (2.0 / PI) * (half.ln()) * j - half_n * tail / PI;
    if n == 1 {
        y -= 1.0 / (PI * half);
    }
    j + C64::new(0.0, 1.0) * y
}

fn special_checks(c: &mut Checks) {
    c.guarded("special.wronskian", |c| -> Result<(), helmbie::SpecialError> {
        let mut worst = 0.0f64;
        for i in 0..50 {
            let x = 0.1 * 2000f64.powf(i as f64 / 49.0);
            let j0 = bessel_real(Order::Zero, Kind::J, x)?;
            let j1 = bessel_real(Order::One, Kind::J, x)?;
            let y0 = bessel_real(Order::Zero, Kind::Y, x)?;
            let y1 = bessel_real(Order::One, Kind::Y, x)?;
            worst = worst.max((j1 * y0 - j0 * y1 - 2.0 / (PI * x)).abs());
        }
        c.at_most("special.wronskian", worst, 1e-10);
        Ok(())
    });
    c.guarded("special.hankel_series", |c| -> Result<(), helmbie::SpecialError> {
        let mut worst = 0.0f64;
        for i in 0..20 {
            let r = 0.2 + 5.8 * i as f64 / 19.0;
            let arg = if i % 2 == 0 { 0.0 } else { 0.25 * (i % 5) as f64 * 0.3 };
            let z = C64::from_polar(r, arg);
            for (order, n) in [(Order::Zero, 0), (Order::One, 1)] {
                let got = hankel1(order, z)?;
                let want = series_hankel(n, z);
                worst = worst.max((got - want).norm() / want.norm());
            }
        }
        c.at_most("special.hankel_series", worst, 1e-10);
        Ok(())
    });
    c.guarded("special.log_split", |c| -> Result<(), helmbie::SpecialError> {
        let mut worst = 0.0f64;
        for i in 0..12 {
            let z = C64::from_polar(0.01 * 800f64.powf(i as f64 / 11.0), 0.1 * (i % 4) as f64);
            let ls = log_split_h0(z)?;
            let h0 = hankel1(Order::Zero, z)?;
            worst = worst.max((ls.log_coeff * z.ln() + ls.regular - h0).norm() / h0.norm());
        }
        c.at_most("special.log_split", worst, 1e-12);
        Ok(())
    });
}

fn kernel_checks(c: &mut Checks) {
    c.guarded("kernels.reciprocity", |c| -> Result<(), helmbie::KernelError> {
        let mut worst = 0.0f64;
        let mut axis = 0.0f64;
        let pts = [Point::new(0.1, 0.2), Point::new(-1.3, 0.7), Point::new(2.4, 0.05), Point::new(0.5, 3.0)];
        for bc in BCS {
            for (i, &m) in pts.iter().enumerate() {
                for &p in &pts[i + 1..] {
                    let a = greens(bc, k(3.0), m, p)?;
                    let b = greens(bc, k(3.0), p, m)?;
                    worst = worst.max((a - b).norm() / a.norm());
                }
                if bc == BoundaryCondition::Dirichlet {
                    axis = axis.max(greens(bc, k(3.0), Point::new(m.x, 0.0), pts[3])?.norm());
                }
            }
        }
        c.at_most("kernels.reciprocity", worst, 1e-14);
        c.at_most("kernels.dirichlet_vanishes_on_axis", axis, 1e-15);
        Ok(())
    });
}

fn flat_checks(c: &mut Checks) {
    c.guarded("flat.null", |c| -> Result<(), Box<dyn std::error::Error>> {
        let flat = BoundaryProfile::flat(1.0)?;
        let mesh_opts = MeshOptions::with_panels(16);
        let (mut dens, mut corr, mut ff, mut ops) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let probes: Vec<Point> = (0..50).map(|i| Point::new(-2.0 + 0.1 * i as f64, 0.5 + 0.03 * i as f64)).collect();
        let angles: Vec<f64> = (1..32).map(|i| i as f64 * PI / 32.0).collect();
        for bc in BCS {
            let p = BieProblem::new(flat.clone(), &mesh_opts, k(3.0), bc, Excitation::PlaneWave { incidence: 0.4 })?;
            let d = solve(&p)?;
            dens = dens.max(d.max_abs());
            for s in eval_field(&p, &d, &probes)? {
                corr = corr.max(s.correction.norm());
            }
            for v in far_field(&p, &d, &angles)?.values {
                ff = ff.max(v.norm());
            }
            let kind = if bc == BoundaryCondition::Dirichlet { OperatorKind::W } else { OperatorKind::VPrime };
            ops = ops.max(assemble_operator(kind, k(3.0), &p.mesh)?.max_abs());
        }
        c.at_most("flat.density", dens, 1e-12);
        c.at_most("flat.correction", corr, 1e-12);
        c.at_most("flat.farfield", ff, 1e-12);
        c.at_most("flat.operator_entries", ops, 1e-14);
        Ok(())
    });
}

/// Up to `count` smooth nodes spread evenly along the mesh.
pub fn spread_smooth_nodes(p: &BieProblem, count: usize) -> Vec<usize> {
    let smooth: Vec<usize> = (0..p.mesh.len()).filter(|&i| !p.mesh.nodes()[i].is_corner_adjacent).collect();
    let step = (smooth.len() / count).max(1);
    smooth.iter().skip(step / 2).step_by(step).take(count).copied().collect()
}

fn jump_checks(c: &mut Checks, n: usize) {
    c.guarded("jump", |c| -> Result<(), Box<dyn std::error::Error>> {
        for bc in BCS {
            let p = manufactured(bc, n)?;
            let d = solve(&p)?;
            let mut worst = 0.0f64;
            let nodes = spread_smooth_nodes(&p, 16);
            for &node in &nodes {
                for side in [Side::Inside, Side::Outside] {
                    let r = jump_check(&p, &d.values, LayerKind::for_condition(bc), node, side, &JumpOptions::default())?;
                    worst = worst.max(r.deviation);
                }
            }
            let name = match bc {
                BoundaryCondition::Dirichlet => "jump.double_layer",
                BoundaryCondition::Neumann => "jump.single_layer_normal",
            };
            c.at_most(name, worst, 5e-3);
            c.holds(&format!("{name}.node_count"), nodes.len() == 16, format!("{} nodes", nodes.len()));
        }
        Ok(())
    });
}

fn manufactured_checks(c: &mut Checks, n: usize) {
    c.guarded("manufactured", |c| -> Result<(), Box<dyn std::error::Error>> {
        for (bc, tol) in [(BoundaryCondition::Dirichlet, 1e-3), (BoundaryCondition::Neumann, 3e-3)] {
            let p = manufactured(bc, n)?;
            let d = solve(&p)?;
            c.at_most(&format!("manufactured.{bc}.error"), manufactured_error(&p, &d, &far_probes())?, tol);
            c.at_most(&format!("manufactured.{bc}.residual"), d.residual_norm, 1e-10);
            let errs = [8, 16, 32]
                .iter()
                .map(|&m| {
                    let p = manufactured(bc, m)?;
                    let d = solve(&p)?;
                    Ok(manufactured_error(&p, &d, &far_probes())?)
                })
                .collect::<Result<Vec<f64>, Box<dyn std::error::Error>>>()?;
            let order = errs.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min);
            c.at_least(&format!("manufactured.{bc}.order_cornered"), order, 1.0);
        }
        Ok(())
    });
}

fn radiation_flux_farfield_checks(c: &mut Checks) {
    c.guarded("radiation", |c| -> Result<(), Box<dyn std::error::Error>> {
        let p = manufactured(BoundaryCondition::Dirichlet, 64)?;
        let d = solve(&p)?;
        let field = LayerPotential::new(&p, &d);
        let angles: Vec<f64> = (0..32).map(|i| (i as f64 + 0.5) * PI / 32.0).collect();
        let radii = [50.0 / 3.0, 100.0 / 3.0, 200.0 / 3.0];
        let res = radii
            .iter()
            .map(|&r| radiation_residual(&p, &field, r, &angles))
            .collect::<Result<Vec<f64>, _>>()?;
        c.at_most("radiation.decay_ratio", res[2] / res[0], 0.35);
        let scaled: Vec<f64> = res.iter().zip(&radii).map(|(v, r)| v * r.powf(1.5)).collect();
        let band = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        c.at_most("radiation.scaled_band", band, 2.0);

        let near = far_field_consistency(&p, &d, 100.0 / 3.0, &angles)?;
        let far = far_field_consistency(&p, &d, 400.0 / 3.0, &angles)?;
        c.at_most("farfield.consistency_ratio", far / near, 0.25);
        let ff = far_field(&p, &d, &[0.01, PI / 2.0])?;
        c.at_most("farfield.grazing_ratio", ff.values[0].norm() / ff.values[1].norm(), 0.05);
        Ok(())
    });
    c.guarded("flux", |c| -> Result<(), Box<dyn std::error::Error>> {
        let center = Point::new(0.5, 1.5);
        let reference = problem(BoundaryCondition::Neumann, 2.0, 16, Excitation::PlaneWave { incidence: 0.3 })?;
        let w = PlaneWave::new(BoundaryCondition::Neumann, reference.k, 0.3);
        c.at_most("flux.reference", flux_check(&reference, &w, center, 0.5)?.relative, 1e-8);
        let mut worst = 0.0f64;
        for bc in BCS {
            for exc in [Excitation::PointSource { source: SOURCE }, Excitation::PlaneWave { incidence: 0.3 }] {
                for kv in [1.0, 3.0, 5.0] {
                    let p = problem(bc, kv, 32, exc.clone())?;
                    let d = solve(&p)?;
                    worst = worst.max(flux_check(&p, &TotalField::new(&p, &d), center, 0.5)?.relative);
                }
            }
        }
        c.at_most("flux.solved_fields", worst, 1e-5);
        Ok(())
    });
}

fn solver_checks(c: &mut Checks) {
    c.guarded("solver", |c| -> Result<(), Box<dyn std::error::Error>> {
        let p = problem(BoundaryCondition::Neumann, 3.0, 32, Excitation::PlaneWave { incidence: 0.2 })?;
        let a = solve(&p)?;
        let b = solve(&p)?;
        let same = a.values.iter().zip(&b.values).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits());
        c.holds("determinism.repeated_solve", same, String::new());
        let g = solve_with(&p, &SolverOptions::gmres())?;
        let diff = a.values.iter().zip(&g.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / a.max_abs();
        c.at_most("solver.gmres_matches_dense", diff, 1e-8);
        Ok(())
    });
}

fn uniqueness_checks(c: &mut Checks, ks: &[f64], levels: &[usize]) {
    c.guarded("uniqueness", |c| -> Result<(), Box<dyn std::error::Error>> {
        let probes: Vec<Point> = far_probes().into_iter().chain([Point::new(0.5, 0.6), Point::new(-0.3, 0.2)]).collect();
        for &kv in ks {
            for bc in BCS {
                let p = problem(bc, kv, levels[0], Excitation::PlaneWave { incidence: 0.3 })?;
                let diffs = levels
                    .windows(2)
                    .map(|w| uniqueness_probe(&p, &MeshOptions::with_panels(w[0]), &MeshOptions::with_panels(w[1]), &probes))
                    .collect::<Result<Vec<f64>, _>>()?;
                let name = format!("uniqueness.k{kv}.{bc}");
                c.at_most(&format!("{name}.{}_vs_{}", levels[0], levels[1]), diffs[0], 5e-3);
                if diffs.len() > 1 {
                    c.holds(&format!("{name}.decreasing"), diffs.windows(2).all(|w| w[1] < w[0]), format!("{diffs:?}"));
                }
            }
        }
        Ok(())
    });
}

fn full_manufactured_checks(c: &mut Checks) {
    c.guarded("manufactured_full", |c| -> Result<(), Box<dyn std::error::Error>> {
        for (bc, tol) in [(BoundaryCondition::Dirichlet, 1e-3), (BoundaryCondition::Neumann, 3e-3)] {
            let errs = [256, 512]
                .iter()
                .map(|&n| {
                    let p = manufactured(bc, n)?;
                    let d = solve(&p)?;
                    Ok(manufactured_error(&p, &d, &far_probes())?)
                })
                .collect::<Result<Vec<f64>, Box<dyn std::error::Error>>>()?;
            c.at_most(&format!("manufactured.{bc}.error_n256"), errs[0], tol);
            c.at_most(&format!("manufactured.{bc}.halving_n512"), errs[1] / errs[0], 0.5);
        }
        Ok(())
    });
}

fn mollified_order_checks(c: &mut Checks) {
    c.guarded("manufactured_mollified", |c| -> Result<(), Box<dyn std::error::Error>> {
        let member = MollifiedFamily::new(&bump(), 3, 0.05)?.members[3].clone();
        for (bc, pair) in [(BoundaryCondition::Dirichlet, [64, 128]), (BoundaryCondition::Neumann, [256, 512])] {
            let errs = pair
                .iter()
                .map(|&n| {
                    let p = BieProblem::new(member.clone(), &MeshOptions::with_panels(n), k(3.0), bc, Excitation::PointSource { source: SOURCE })?;
                    let d = solve(&p)?;
                    Ok(manufactured_error(&p, &d, &far_probes())?)
                })
                .collect::<Result<Vec<f64>, Box<dyn std::error::Error>>>()?;
            c.at_least(&format!("manufactured.{bc}.order_mollified_j3"), (errs[0] / errs[1]).log2(), 3.0);
        }
        Ok(())
    });
}

/// Number of rounded members beyond the first: radii run from `ρ₀` down to
/// `ρ₀ 2^{−9}`.
pub const MOLLIFICATION_LEVELS: usize = 9;
pub const MOLLIFICATION_RHO0: f64 = 0.05;
pub const MOLLIFICATION_PANELS: usize = 256;

fn mollification_checks(c: &mut Checks) {
    c.guarded("mollification", |c| -> Result<(), Box<dyn std::error::Error>> {
        for bc in BCS {
            let r = mollification_experiment(
                &bump(),
                k(3.0),
                bc,
                &Excitation::PlaneWave { incidence: 0.0 },
                &MeshOptions::with_panels(MOLLIFICATION_PANELS),
                MOLLIFICATION_LEVELS,
                MOLLIFICATION_RHO0,
            )?;
            let first_five = &r.successive[..5];
            c.holds(
                &format!("mollification.{bc}.strictly_decreasing"),
                first_five.windows(2).all(|w| w[1] < w[0]),
                format!("{:?}", r.successive),
            );
            c.at_most(&format!("mollification.{bc}.final_relative_l2"), r.final_relative(), 5e-3);
        }
        Ok(())
    });
}

/// Runs the suite and returns the report; checks never abort the run.
pub fn run_checks(suite: Suite) -> VerifyReport {
    let start = Instant::now();
    let mut c = Checks::default();
    special_checks(&mut c);
    kernel_checks(&mut c);
    flat_checks(&mut c);
    solver_checks(&mut c);
    jump_checks(&mut c, 32);
    manufactured_checks(&mut c, 64);
    radiation_flux_farfield_checks(&mut c);
    match suite {
        Suite::Fast => uniqueness_checks(&mut c, &[3.0], &[32, 64]),
        Suite::All => {
            uniqueness_checks(&mut c, &[1.0, 3.0, 5.0], &[128, 256, 512]);
            full_manufactured_checks(&mut c);
            mollified_order_checks(&mut c);
            mollification_checks(&mut c);
        }
    }
    let failed = c.0.iter().filter(|x| !x.passed).count();
    VerifyReport {
        suite: suite.name(),
        passed: failed == 0,
        failed,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        checks: c.0,
    }
}

/// Runs the suite, writes `verify_report.json` into `out` and fails with
/// `VerificationFailed` if any check did not pass.
pub fn run_verify(suite: Suite, out: &Path) -> Result<VerifyReport, CliError> {
    let report = run_checks(suite);
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let path = out.join("verify_report.json");
    std::fs::write(&path, to_json(&report)).map_err(|e| CliError::io(&path, e))?;
    if report.passed {
        Ok(report)
    } else {
        Err(CliError::VerificationFailed(report.failed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_oracle_known_values() {
        // H₀(1) = J₀(1) + iY₀(1), H₁(1) = J₁(1) + iY₁(1).
        let h0 = series_hankel(0, C64::new(1.0, 0.0));
        let h1 = series_hankel(1, C64::new(1.0, 0.0));
        assert!((h0 - C64::new(0.765_197_686_557_966_6, 0.088_256_964_215_676_96)).norm() < 1e-14);
        assert!((h1 - C64::new(0.440_050_585_744_933_5, -0.781_212_821_300_288_7)).norm() < 1e-14);
    }

    #[test]
    fn smooth_node_selection() {
        let p = manufactured(BoundaryCondition::Dirichlet, 32).unwrap();
        let nodes = spread_smooth_nodes(&p, 16);
        assert_eq!(nodes.len(), 16);
        assert!(nodes.iter().all(|&i| !p.mesh.nodes()[i].is_corner_adjacent));
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
    }
}
