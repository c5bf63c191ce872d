use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use relax2d::energy::{density_from_name, PenaltyConfig, SharedDensity};
use relax2d::fem::SolverOptions;
use relax2d::roc::{GridBounds, RocConfig, DEFAULT_MEMORY_BUDGET};
use relax2d::tolerances::EARLY_STOP;
use relax2d::Mat2;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Envelope,
    Roc,
    Fem,
    Compare,
    Plotdata,
}

/// Everything one invocation needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub energy: String,
    pub f0: Mat2,
    pub penalty: Option<PenaltyConfig>,
    pub roc: RocSection,
    pub fem: FemSection,
    pub compare: CompareSection,
    pub plot: PlotSection,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default = "default_energy")]
    energy: String,
    #[serde(default = "default_f0")]
    f0: Mat2,
    #[serde(default)]
    penalty: Option<PenaltyConfig>,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    roc: Option<serde_json::Value>,
    #[serde(default)]
    fem: Option<serde_json::Value>,
    #[serde(default)]
    compare: Option<serde_json::Value>,
    #[serde(default)]
    plot: Option<serde_json::Value>,
}

fn default_energy() -> String {
    "biot".into()
}

fn default_f0() -> Mat2 {
    Mat2::scaled_identity(0.4)
}

fn section<T: DeserializeOwned + Default>(v: Option<serde_json::Value>, name: &str) -> Result<T, CliError> {
    match v {
        None => Ok(T::default()),
        Some(v) => serde_json::from_value(v).map_err(|e| CliError::Config(format!("{name}: {e}"))),
    }
}

/// Lamination run settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RocSection {
    pub delta: f64,
    /// Half-width of the box `|A|_∞ ≤ radius`; ignored when constrained.
    pub radius: f64,
    pub constrained: bool,
    /// Explicit box, overriding `radius` and the compression box.
    pub bounds: Option<GridBounds>,
    pub order: u32,
    pub k_max: usize,
    pub early_stop: f64,
    pub memory_budget_bytes: usize,
    pub frequency: usize,
    pub resolution: usize,
}

impl Default for RocSection {
    fn default() -> Self {
        RocSection {
            delta: 0.1,
            radius: 2.0,
            constrained: false,
            bounds: None,
            order: 1,
            k_max: 10,
            early_stop: EARLY_STOP,
            memory_budget_bytes: DEFAULT_MEMORY_BUDGET,
            frequency: 8,
            resolution: 64,
        }
    }
}

impl RocSection {
    pub fn config(&self) -> RocConfig {
        let mut cfg = if self.constrained {
            RocConfig::constrained(self.delta)
        } else {
            RocConfig::unconstrained(self.delta, self.radius)
        };
        if let Some(b) = self.bounds {
            cfg.bounds = b;
        }
        cfg.order = self.order;
        cfg.k_max = self.k_max;
        cfg.early_stop = self.early_stop;
        cfg.memory_budget_bytes = self.memory_budget_bytes;
        cfg
    }

    fn validate(&self) -> Result<(), CliError> {
        self.config().validate()?;
        if self.frequency < 1 || self.resolution < 1 {
            return Err(CliError::Config("frequency and resolution must be at least 1".into()));
        }
        Ok(())
    }
}

/// Finite element run settings: `n_per_side` next to the solver options in
/// one flat object.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(try_from = "serde_json::Map<String, serde_json::Value>")]
pub struct FemSection {
    pub n_per_side: usize,
    pub solver: SolverOptions,
}

impl TryFrom<serde_json::Map<String, serde_json::Value>> for FemSection {
    type Error = String;

    fn try_from(mut m: serde_json::Map<String, serde_json::Value>) -> Result<Self, String> {
        let n_per_side = match m.remove("n_per_side") {
            None => FemSection::default().n_per_side,
            Some(v) => serde_json::from_value(v).map_err(|e| format!("n_per_side: {e}"))?,
        };
        let solver = serde_json::from_value(m.into()).map_err(|e| e.to_string())?;
        Ok(FemSection { n_per_side, solver })
    }
}

impl FemSection {
    fn validate(&self) -> Result<(), CliError> {
        if self.n_per_side < 2 {
            return Err(CliError::Config("n_per_side must be at least 2".into()));
        }
        Ok(self.solver.validate()?)
    }
}

impl Default for FemSection {
    fn default() -> Self {
        FemSection {
            n_per_side: 20,
            solver: SolverOptions::default(),
        }
    }
}

/// Overrides for the comparison table; both default to the full-size runs.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub roc: Option<RocSection>,
    pub fem: Option<FemSection>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    /// `F = α·id`.
    Volumetric,
    /// `F = id + γ e₁⊗e₂`.
    Shear,
    /// `F = diag(α, β)` at fixed `β`.
    Diag,
    /// `h(t) = (t − 1)²`, its even extension and the convex envelope of that.
    ValanisLandel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSweep {
    pub kind: SectionKind,
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    #[serde(default)]
    pub beta: f64,
}

impl PlotSweep {
    pub fn parameters(&self) -> Vec<f64> {
        if self.samples == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.samples - 1) as f64;
        (0..self.samples).map(|i| self.lo + i as f64 * step).collect()
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SectionKind::Volumetric => "volumetric",
            SectionKind::Shear => "shear",
            SectionKind::Diag => "diag",
            SectionKind::ValanisLandel => "valanis_landel",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotSection {
    pub sweeps: Vec<PlotSweep>,
}

impl Default for PlotSection {
    fn default() -> Self {
        let sweep = |kind, lo, hi| PlotSweep {
            kind,
            lo,
            hi,
            samples: 401,
            beta: 0.0,
        };
        PlotSection {
            sweeps: vec![
                sweep(SectionKind::Volumetric, -2.0, 2.0),
                sweep(SectionKind::Shear, -2.0, 2.0),
                sweep(SectionKind::Diag, -1.0, 1.0),
                sweep(SectionKind::ValanisLandel, -3.0, 3.0),
            ],
        }
    }
}

impl PlotSection {
    fn validate(&self) -> Result<(), CliError> {
        for s in &self.sweeps {
            if s.samples < 1 || !(s.lo.is_finite() && s.hi.is_finite() && s.beta.is_finite()) || s.hi < s.lo {
                return Err(CliError::Config(format!("invalid {} sweep", s.name())));
            }
        }
        Ok(())
    }
}

/// Reads `--config`: a path to a JSON file, or the JSON itself when it
/// starts with `{`.
pub fn load_config_text(arg: &str) -> Result<String, CliError> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| CliError::Config(format!("cannot read {arg}: {e}")))
}

impl RunSpec {
    /// Parses and validates a spec. `out` and `seed` from the command line
    /// take precedence over the JSON.
    pub fn parse(command: Command, json: &str, out: Option<PathBuf>, seed: Option<u64>) -> Result<Self, CliError> {
        let raw: RawSpec = serde_json::from_str(json).map_err(|e| CliError::Config(e.to_string()))?;
        let spec = RunSpec {
            command,
            energy: raw.energy,
            f0: raw.f0,
            penalty: raw.penalty,
            roc: section(raw.roc, "roc")?,
            fem: section(raw.fem, "fem")?,
            compare: section(raw.compare, "compare")?,
            plot: section(raw.plot, "plot")?,
            out: out.or(raw.out).unwrap_or_else(|| PathBuf::from("out")),
            seed: seed.or(raw.seed),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.density()?;
        if !self.f0.is_finite() {
            return Err(CliError::Config("f0 must be finite".into()));
        }
        self.roc.validate()?;
        self.fem.validate()?;
        if let Some(r) = &self.compare.roc {
            r.validate()?;
        }
        if let Some(f) = &self.compare.fem {
            f.validate()?;
        }
        self.plot.validate()?;
        ensure_writable(&self.out)
    }

    pub fn density(&self) -> Result<SharedDensity, CliError> {
        density_from_name(&self.energy, self.penalty).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn solver_options(&self, fem: &FemSection) -> SolverOptions {
        let mut opts = fem.solver.clone();
        if let Some(s) = self.seed {
            opts.seed = s;
        }
        opts
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn ensure_writable(dir: &Path) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Config(format!("output directory {} is not writable: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(fail)?;
    let probe = dir.join(".relax2d-write-probe");
    std::fs::write(&probe, b"").map_err(fail)?;
    std::fs::remove_file(&probe).map_err(fail)
}
