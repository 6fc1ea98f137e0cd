//! Run configuration: JSON-serializable, all sections defaulted, with
//! field-level validation messages.

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use pointerlab::gaussian::{self, AlphaParam};
use pointerlab::master::ModelParams;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub time: TimeSection,
    pub alpha_mode: AlphaMode,
    pub noise: NoiseSection,
    pub ensemble: EnsembleSection,
    pub initial: InitialState,
    pub units: UnitsSection,
    pub outputs: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelSection::default(),
            grid: GridSection::default(),
            time: TimeSection::default(),
            alpha_mode: AlphaMode::Fiducial,
            noise: NoiseSection::default(),
            ensemble: EnsembleSection::default(),
            initial: InitialState::default(),
            units: UnitsSection::default(),
            outputs: OutputSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub m: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { m: 1.0, d: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n_points: usize,
    /// Spatial extent; when omitted it is derived from the resolved
    /// pointer width (20 sigma plus room for displaced initial states).
    pub length: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            n_points: 256,
            length: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    /// Step size; when omitted, 90% of the stability bound of the
    /// experiment's stepper.
    pub dt: Option<f64>,
    pub t_final: f64,
    pub record_stride: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection {
            dt: None,
            t_final: 1.0,
            record_stride: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaMode {
    Fiducial,
    Sieve,
    Explicit { re: f64, im: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub mode: NoiseModeName,
    pub seed: u64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            mode: NoiseModeName::Standard,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModeName {
    Standard,
    AlphaGeneral,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub n_traj: usize,
    pub master_seed: u64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            n_traj: 16,
            master_seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Pointer state displaced to (x, p).
    Pointer { x: f64, p: f64 },
    /// Symmetric superposition of two pointer states separated by
    /// `separation_sigma` widths.
    Cat { separation_sigma: f64 },
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Pointer { x: 0.0, p: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct UnitsSection {
    /// Planck constant over 2 pi in erg s.
    pub hbar: f64,
    pub mass_cgs: f64,
    #[serde(rename = "D_cgs")]
    pub d_cgs: f64,
}

impl Default for UnitsSection {
    fn default() -> Self {
        UnitsSection {
            hbar: 1.0546e-27,
            mass_cgs: 1e-14,
            d_cgs: 1e32,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: "runs/out".into(),
            formats: vec!["csv".into(), "json".into()],
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Field-level validation beyond what the schema enforces.
    pub fn validate(&self) -> Result<(), CliError> {
        let err = |m: String| Err(CliError::Config(m));
        if !(self.model.m > 0.0) || !self.model.m.is_finite() {
            return err(format!("model.m must be > 0, got {}", self.model.m));
        }
        if !(self.model.d >= 0.0) || !self.model.d.is_finite() {
            return err(format!("model.D must be >= 0, got {}", self.model.d));
        }
        if self.grid.n_points < 16 || self.grid.n_points % 2 != 0 {
            return err(format!(
                "grid.n_points must be even and >= 16, got {}",
                self.grid.n_points
            ));
        }
        if let Some(l) = self.grid.length {
            if !(l > 0.0) || !l.is_finite() {
                return err(format!("grid.length must be > 0, got {l}"));
            }
        }
        if let Some(dt) = self.time.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return err(format!("time.dt must be > 0, got {dt}"));
            }
        }
        if !(self.time.t_final > 0.0) || !self.time.t_final.is_finite() {
            return err(format!(
                "time.t_final must be > 0, got {}",
                self.time.t_final
            ));
        }
        if self.time.record_stride == 0 {
            return err("time.record_stride must be >= 1".into());
        }
        if self.ensemble.n_traj == 0 {
            return err("ensemble.n_traj must be >= 1".into());
        }
        if let AlphaMode::Explicit { re, im } = self.alpha_mode {
            if !(re > 0.0) || !re.is_finite() || !im.is_finite() {
                return err(format!(
                    "alpha_mode.re must be > 0 and finite, got re = {re}, im = {im}"
                ));
            }
        }
        if let InitialState::Cat { separation_sigma } = self.initial {
            if !(separation_sigma > 0.0) || !separation_sigma.is_finite() {
                return err(format!(
                    "initial.separation_sigma must be > 0, got {separation_sigma}"
                ));
            }
        }
        if !(self.units.hbar > 0.0) || !(self.units.mass_cgs > 0.0) || !(self.units.d_cgs > 0.0) {
            return err("units entries must all be > 0".into());
        }
        for f in &self.outputs.formats {
            if f != "csv" && f != "json" {
                return err(format!("outputs.formats entries must be csv or json, got {f}"));
            }
        }
        if self.outputs.formats.is_empty() {
            return err("outputs.formats must not be empty".into());
        }
        Ok(())
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        ModelParams::new(self.model.m, self.model.d).map_err(CliError::from)
    }

    /// Resolve the width parameter selected by `alpha_mode`.
    pub fn resolve_alpha(&self) -> Result<AlphaParam, CliError> {
        match self.alpha_mode {
            AlphaMode::Fiducial => {
                gaussian::fiducial_alpha(self.model.d, self.model.m).map_err(CliError::from)
            }
            AlphaMode::Sieve => {
                gaussian::sieve_alpha(self.model.d, self.model.m).map_err(CliError::from)
            }
            AlphaMode::Explicit { re, im } => AlphaParam::new(re, im).map_err(CliError::from),
        }
    }
}
