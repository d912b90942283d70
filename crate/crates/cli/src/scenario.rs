//! Scenario files: one TOML document per run.

use std::fmt;
use std::path::{Path, PathBuf};

use ffscale_core::initial::InitialCondition;
use ffscale_core::{Boundary, SpeedProfile};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    SchrodingerReference,
    SchrodingerFfPotential,
    SchrodingerFfScaledmass,
    KgReference,
    KgFfMetric,
    KgSpatialScaling,
    KgObstruction,
    NewtonianCheck,
    ClassicalCheck,
}

impl RunKind {
    pub fn is_schrodinger(self) -> bool {
        matches!(
            self,
            RunKind::SchrodingerReference | RunKind::SchrodingerFfPotential | RunKind::SchrodingerFfScaledmass
        )
    }

    pub fn is_kg(self) -> bool {
        matches!(
            self,
            RunKind::KgReference | RunKind::KgFfMetric | RunKind::KgSpatialScaling | RunKind::KgObstruction
        )
    }

    pub fn needs_profile(self) -> bool {
        !matches!(self, RunKind::SchrodingerReference | RunKind::KgReference)
    }

    pub fn needs_grid(self) -> bool {
        self != RunKind::ClassicalCheck
    }

    pub fn needs_initial(self) -> bool {
        self.is_schrodinger() || self.is_kg()
    }
}

impl fmt::Display for RunKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    #[serde(default)]
    pub boundary: Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    #[serde(default = "unit")]
    pub hbar: f64,
    #[serde(default = "unit")]
    pub c: f64,
    #[serde(default = "unit")]
    pub mass: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for Units {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            c: 1.0,
            mass: 1.0,
        }
    }
}

/// Schrödinger potential V(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialBlock {
    Zero,
    /// ½·m·ω²·(x − center)² with m from the units block.
    Harmonic {
        omega: f64,
        #[serde(default)]
        center: f64,
    },
}

/// Static background metric diag[g00(x), gxx(x)].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricBlock {
    Minkowski,
    /// g00 = −1 − 2φ/c² for the Newton well φ = −depth·exp(−(x − center)²/(2 width²)); gxx = 1.
    GaussianWell { depth: f64, center: f64, width: f64 },
}

/// Numerically computed reference (Schrödinger, or Klein-Gordon on a
/// non-flat background). Defaults to the run's dt and stride 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "one")]
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ObstructionMetric {
    /// The unmodified background metric.
    #[default]
    Original,
    /// The background pulled back through the profile's time remap.
    Pullback,
}

/// Candidate phase f(t, x) = phase_t·t + phase_x·x substituted into the
/// Klein-Gordon operator together with φ(Λ(t), x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstructionBlock {
    #[serde(default)]
    pub metric: ObstructionMetric,
    #[serde(default)]
    pub phase_t: f64,
    #[serde(default)]
    pub phase_x: f64,
    #[serde(default = "eval_points")]
    pub eval_points: usize,
    /// Time step of the residual stencil; the run dt when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
}

fn eval_points() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalBlock {
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub v0: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: default_dir(),
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub run_kind: RunKind,
    /// Upper bound on the run's harness error; sets `within_tolerance`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridBlock>,
    pub time: TimeBlock,
    #[serde(default)]
    pub units: Units,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<SpeedProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialCondition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<ObstructionBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Malformed scenario text, with a 1-based position when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "parse error at line {l}, column {c}: {}", self.message),
            _ => write!(f, "parse error: {}", self.message),
        }
    }
}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ParseError> {
        toml::from_str(text).map_err(|e| {
            let pos = e.span().map(|s| position(text, s.start));
            ParseError {
                line: pos.map(|p| p.0),
                column: pos.map(|p| p.1),
                message: e.message().trim().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, crate::CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| crate::CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(crate::CliError::Parse)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes to TOML")
    }

    /// The scenario with every defaulted block spelled out.
    pub fn resolved(&self) -> Scenario {
        let mut s = self.clone();
        let kind = s.run_kind;
        if kind.is_schrodinger() && s.potential.is_none() {
            s.potential = Some(PotentialBlock::Zero);
        }
        if (kind.is_kg() || kind == RunKind::NewtonianCheck) && s.metric.is_none() {
            s.metric = Some(MetricBlock::Minkowski);
        }
        let needs_reference = matches!(
            kind,
            RunKind::SchrodingerFfPotential | RunKind::SchrodingerFfScaledmass | RunKind::KgFfMetric | RunKind::KgObstruction
        );
        if needs_reference {
            let r = s.reference.get_or_insert(ReferenceBlock { dt: None, stride: 1 });
            r.dt.get_or_insert(s.time.dt);
        }
        if kind == RunKind::KgObstruction {
            let o = s.obstruction.get_or_insert(ObstructionBlock {
                metric: ObstructionMetric::Original,
                phase_t: 0.0,
                phase_x: 0.0,
                eval_points: eval_points(),
                h: None,
            });
            o.h.get_or_insert(s.time.dt);
        }
        s
    }

    /// Level `level` of a refinement study: n_points, n_steps and stride
    /// multiplied by 2^level, dt (and the reference and residual steps) divided.
    pub fn refined(&self, level: u32) -> Scenario {
        let f = 1usize << level;
        let mut s = self.resolved();
        if let Some(g) = s.grid.as_mut() {
            g.n_points *= f;
        }
        s.time.dt /= f as f64;
        s.time.n_steps *= f;
        s.time.stride *= f;
        if let Some(r) = s.reference.as_mut() {
            r.dt = r.dt.map(|dt| dt / f as f64);
        }
        if let Some(o) = s.obstruction.as_mut() {
            o.h = o.h.map(|h| h / f as f64);
        }
        s
    }

    pub fn duration(&self) -> f64 {
        self.time.n_steps as f64 * self.time.dt
    }

    pub fn writes(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }
}
