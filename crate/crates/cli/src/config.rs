//! JSON run configuration.

use crate::error::CliError;
use helmbie::bie::{BieError, SolverOptions};
use helmbie::postprocess::{check_guard_band, PostprocessError};
use helmbie::{
    BieProblem, BoundaryCondition, BoundaryProfile, Complex64, Excitation, GeometryError, KernelError, MeshOptions,
    Point, Wavenumber,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Breakpoints `(x, h(x))` of the profile.
    pub profile: Vec<[f64; 2]>,
    pub wavenumber: WavenumberConfig,
    pub bc: BoundaryCondition,
    pub excitation: ExcitationConfig,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavenumberConfig {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ExcitationConfig {
    PlaneWave { incidence_deg: f64 },
    PointSource { x: f64, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default = "default_panels")]
    pub n_panels: usize,
    #[serde(default = "default_grading")]
    pub grading_q: f64,
    #[serde(default = "default_gauss")]
    pub gauss_per_panel: usize,
}

fn default_panels() -> usize {
    MeshOptions::default().n_panels
}

fn default_grading() -> f64 {
    MeshOptions::default().grading
}

fn default_gauss() -> usize {
    MeshOptions::default().gauss_per_panel
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { n_panels: default_panels(), grading_q: default_grading(), gauss_per_panel: default_gauss() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridConfig {
    /// Row-major points, `x` fastest.
    pub fn points(&self) -> Vec<Point> {
        let step = |a: f64, b: f64, n: usize, i: usize| if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 };
        (0..self.ny)
            .flat_map(|j| (0..self.nx).map(move |i| Point::new(step(self.x0, self.x1, self.nx, i), step(self.y0, self.y1, self.ny, j))))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default = "default_angles")]
    pub farfield_angles_deg: Vec<f64>,
    #[serde(default)]
    pub probes: Vec<[f64; 2]>,
}

fn default_angles() -> Vec<f64> {
    (0..90).map(|i| 1.0 + 2.0 * i as f64).collect()
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { grid: None, farfield_angles_deg: default_angles(), probes: Vec::new() }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::config("config", e.to_string()))
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, CliError> {
        serde_json::from_value(value).map_err(|e| CliError::config("config", e.to_string()))
    }

    pub fn wavenumber(&self) -> Result<Wavenumber, CliError> {
        let WavenumberConfig { re, im } = self.wavenumber;
        if !re.is_finite() || !im.is_finite() || re <= 0.0 || im < 0.0 {
            return Err(CliError::config("wavenumber", format!("need re > 0 and im >= 0, got {re} + {im}i")));
        }
        Wavenumber::new(Complex64::new(re, im)).map_err(|e| CliError::config("wavenumber", e.to_string()))
    }

    pub fn excitation(&self) -> Excitation {
        match self.excitation {
            ExcitationConfig::PlaneWave { incidence_deg } => Excitation::PlaneWave { incidence: incidence_deg.to_radians() },
            ExcitationConfig::PointSource { x, y } => Excitation::PointSource { source: Point::new(x, y) },
        }
    }

    pub fn mesh_options(&self) -> MeshOptions {
        MeshOptions {
            n_panels: self.mesh.n_panels,
            grading: self.mesh.grading_q,
            gauss_per_panel: self.mesh.gauss_per_panel,
        }
    }

    /// Evaluation points: grid first, then probes.
    pub fn eval_points(&self) -> Vec<Point> {
        let mut pts = self.eval.grid.map(|g| g.points()).unwrap_or_default();
        pts.extend(self.eval.probes.iter().map(|&[x, y]| Point::new(x, y)));
        pts
    }

    /// Validates every field and builds the problem.
    pub fn build(&self) -> Result<BieProblem, CliError> {
        let k = self.wavenumber()?;
        let points: Vec<(f64, f64)> = self.profile.iter().map(|&[x, y]| (x, y)).collect();
        let profile = BoundaryProfile::new(&points).map_err(|e| CliError::config("profile", e.to_string()))?;
        if let ExcitationConfig::PlaneWave { incidence_deg } = self.excitation {
            if !(incidence_deg.abs() < 90.0) {
                return Err(CliError::config(
                    "excitation.plane_wave.incidence_deg",
                    format!("must lie in (-90, 90), got {incidence_deg}"),
                ));
            }
        }
        let problem = BieProblem::new(profile, &self.mesh_options(), k, self.bc, self.excitation()).map_err(|e| match e {
            BieError::Geometry(
                g @ (GeometryError::TooFewPanels(_) | GeometryError::InvalidGrading(_) | GeometryError::InvalidGaussOrder),
            ) => CliError::config("mesh", g.to_string()),
            BieError::Kernel(k @ KernelError::SourceInsideDomain(_)) => CliError::config("excitation.point_source", k.to_string()),
            other => CliError::config("profile", other.to_string()),
        })?;
        self.validate_eval(&problem)?;
        Ok(problem)
    }

    fn validate_eval(&self, problem: &BieProblem) -> Result<(), CliError> {
        if let Some(g) = self.eval.grid {
            let finite = [g.x0, g.x1, g.y0, g.y1].iter().all(|v| v.is_finite());
            if !finite || g.x1 < g.x0 || g.y1 < g.y0 || g.nx == 0 || g.ny == 0 {
                return Err(CliError::config("eval.grid", "need finite bounds with x0 <= x1, y0 <= y1 and nx, ny >= 1"));
            }
            for p in g.points() {
                guard(problem, p).map_err(|m| CliError::config("eval.grid", m))?;
            }
        }
        for (i, &[x, y]) in self.eval.probes.iter().enumerate() {
            guard(problem, Point::new(x, y)).map_err(|m| CliError::config(format!("eval.probes[{i}]"), m))?;
        }
        for (i, &a) in self.eval.farfield_angles_deg.iter().enumerate() {
            if !(a > 0.0 && a < 180.0) {
                return Err(CliError::config(format!("eval.farfield_angles_deg[{i}]"), format!("must lie in (0, 180), got {a}")));
            }
        }
        Ok(())
    }
}

fn guard(problem: &BieProblem, p: Point) -> Result<(), String> {
    if !p.x.is_finite() || !p.y.is_finite() {
        return Err(format!("point {p:?} is not finite"));
    }
    check_guard_band(problem, p).map_err(|e: PostprocessError| e.to_string())
}
