//! Experiment trait and name registry. Each laboratory check is one
//! strategy behind the common trait, looked up by name at runtime from
//! the CLI argument.

use std::path::Path;

use ndarray::Array1;

use crate::config::{InitialState, RunConfig};
use crate::error::CliError;
use crate::output::OutputWriter;
use pointerlab::gaussian::{self, AlphaParam, PhasePoint};
use pointerlab::master::ModelParams;
use pointerlab::{Grid, WaveFunction};

pub trait Experiment: Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, ctx: &mut RunContext) -> Result<(), CliError>;
}

/// Everything an experiment needs: the validated config, resolved model
/// quantities and the artifact writer.
pub struct RunContext {
    pub config: RunConfig,
    pub out: OutputWriter,
}

impl RunContext {
    pub fn new(config: RunConfig, out_dir: &Path) -> Result<RunContext, CliError> {
        config.validate()?;
        let out = OutputWriter::new(out_dir, &config.outputs.formats)?;
        Ok(RunContext { config, out })
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        self.config.model_params()
    }

    pub fn alpha(&self) -> Result<AlphaParam, CliError> {
        self.config.resolve_alpha()
    }

    /// Grid from the config; auto length covers 20 widths plus the
    /// displacement of the initial state.
    pub fn grid(&self) -> Result<Grid, CliError> {
        let alpha = self.alpha()?;
        let sigma = gaussian::equilibrium_width(alpha);
        let length = self.config.grid.length.unwrap_or_else(|| {
            let reach = match self.config.initial {
                InitialState::Pointer { x, .. } => 2.0 * x.abs(),
                InitialState::Cat { separation_sigma } => separation_sigma * sigma,
            };
            20.0 * sigma + reach
        });
        Grid::new(self.config.grid.n_points, length).map_err(CliError::from)
    }

    /// Initial pure state from the `initial` section.
    pub fn initial_state(&self, grid: &Grid) -> Result<WaveFunction, CliError> {
        let alpha = self.alpha()?;
        match self.config.initial {
            InitialState::Pointer { x, p } => {
                gaussian::make_pointer_state(grid.clone(), alpha, PhasePoint::new(x, p))
                    .map_err(CliError::from)
            }
            InitialState::Cat { separation_sigma } => {
                let half = 0.5 * separation_sigma * gaussian::equilibrium_width(alpha);
                let a = gaussian::make_pointer_state(
                    grid.clone(),
                    alpha,
                    PhasePoint::new(half, 0.0),
                )?;
                let b = gaussian::make_pointer_state(
                    grid.clone(),
                    alpha,
                    PhasePoint::new(-half, 0.0),
                )?;
                let amps: Array1<_> = (a.amplitudes() + b.amplitudes()).to_owned();
                Ok(WaveFunction::new(grid.clone(), amps)?.normalized())
            }
        }
    }

    /// Step size for a stepper with stability bound `bound`: the config
    /// value when set (validated against the bound), otherwise 90% of it.
    pub fn resolve_dt(&self, bound: f64) -> Result<f64, CliError> {
        match self.config.time.dt {
            Some(dt) if dt > bound => Err(CliError::Config(format!(
                "time.dt = {dt} exceeds the stability bound {bound:.3e}"
            ))),
            Some(dt) => Ok(dt),
            None => Ok(0.9 * bound),
        }
    }

    pub fn finish(&mut self, experiment: &str, seed: u64) -> Result<(), CliError> {
        let config = self.config.clone();
        self.out.write_manifest(experiment, &config, seed)
    }
}

/// The registered experiments, in presentation order.
pub fn registry() -> &'static [&'static dyn Experiment] {
    use crate::experiments::*;
    static REGISTRY: &[&dyn Experiment] = &[
        &EvolveMaster,
        &EvolveDrift,
        &Qsd,
        &FokkerPlanck,
        &Reconstruct,
        &Sieve,
        &Robustness,
        &Units,
    ];
    REGISTRY
}

pub fn find_experiment(name: &str) -> Option<&'static dyn Experiment> {
    registry().iter().copied().find(|e| e.name() == name)
}
