use crate::error::CliError;
use crate::experiment::{Experiment, RunContext};
use crate::units::convert_units;

/// CGS estimates of the pointer width and decoherence time.
pub struct Units;

impl Experiment for Units {
    fn name(&self) -> &'static str {
        "units"
    }

    fn summary(&self) -> &'static str {
        "restore CGS units for the configured mass and coupling"
    }

    fn run(&self, ctx: &mut RunContext) -> Result<(), CliError> {
        let est = convert_units(&ctx.config.units);
        ctx.out.write_json("units_summary", &est)?;
        println!(
            "units: sigma0 = {:.3e} cm, t_D = {:.3e} s (m = {:.3e} g, D = {:.3e} cm^-2 s^-1)",
            est.sigma0_cm, est.t_d_s, ctx.config.units.mass_cgs, ctx.config.units.d_cgs
        );
        let seed = ctx.config.noise.seed;
        ctx.finish("units", seed)
    }
}
