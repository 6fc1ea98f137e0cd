use serde_json::json;

use crate::error::CliError;
use crate::experiment::{Experiment, RunContext};
use pointerlab::gaussian::sieve_alpha;
use pointerlab::phasespace::diffusion_matrix;
use pointerlab::robustness::{det_condition, sieve_optimize};

/// Constrained-scan optimum of the predictability sieve against the
/// closed-form value.
pub struct Sieve;

impl Experiment for Sieve {
    fn name(&self) -> &'static str {
        "sieve"
    }

    fn summary(&self) -> &'static str {
        "maximize the width parameter on the admissibility boundary"
    }

    fn run(&self, ctx: &mut RunContext) -> Result<(), CliError> {
        let params = ctx.params()?;
        let found = sieve_optimize(&params, 20_000)?;
        let formula = sieve_alpha(params.d.max(f64::MIN_POSITIVE), params.m)?;
        let rel = ((found.re - formula.re).powi(2) + (found.im - formula.im).powi(2)).sqrt()
            / (formula.re * formula.re + formula.im * formula.im).sqrt();
        let scale = (params.d * params.m).sqrt();
        let r2 = (found.re * found.re + found.im * found.im) / (scale * scale);
        let phi = found.im.atan2(found.re);
        let constraint_residual = r2 + 8.0 * (2.0 * phi).sin();
        let dmat = diffusion_matrix(found, &params);

        let summary = json!({
            "alpha_optimizer": { "re": found.re, "im": found.im },
            "alpha_formula": { "re": formula.re, "im": formula.im },
            "relative_deviation": rel,
            "constraint_residual": constraint_residual,
            "det_diffusion": dmat.det(),
            "quartic_form": det_condition(found, &params),
        });
        ctx.out.write_json("sieve_summary", &summary)?;
        println!(
            "sieve: alpha_s = {:.7} {:+.7}i (formula {:.7} {:+.7}i, rel dev {:.3e})",
            found.re, found.im, formula.re, formula.im, rel
        );
        println!(
            "sieve: constraint residual = {:.3e}, det D = {:.3e}",
            constraint_residual,
            dmat.det()
        );
        let seed = ctx.config.noise.seed;
        ctx.finish("sieve", seed)
    }
}
