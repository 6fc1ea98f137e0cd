use serde_json::json;

use crate::error::CliError;
use crate::experiment::{Experiment, RunContext};
use pointerlab::robustness::{det_condition, drift_rhs, hs_speed, proportionality_check};
use pointerlab::C64;

/// Robustness scorecard for the configured width parameter: the
/// Hilbert-Schmidt speed of the pointer state, admissibility of its
/// diffusion matrix and the uncertainty-proportionality ratios.
pub struct Robustness;

impl Experiment for Robustness {
    fn name(&self) -> &'static str {
        "robustness"
    }

    fn summary(&self) -> &'static str {
        "evaluate the three robustness diagnostics for the configured state"
    }

    fn run(&self, ctx: &mut RunContext) -> Result<(), CliError> {
        let params = ctx.params()?;
        let alpha = ctx.alpha()?;
        let grid = ctx.grid()?;
        let psi = ctx.initial_state(&grid)?;

        let frozen = psi.scaled(C64::new(0.0, 0.0));
        let v_frozen = hs_speed(&psi, &frozen, &params)?;
        let opt = drift_rhs(&psi, &params)?;
        let v_opt = hs_speed(&psi, &opt, &params)?;

        // projector-level derivative induced by the optimal drift
        let dp_norm = {
            let n = grid.n();
            let dx = grid.spacing();
            let a = psi.amplitudes();
            let d = opt.amplitudes();
            let mut s = 0.0f64;
            for j in 0..n {
                for k in 0..n {
                    let dp = d[j] * a[k].conj() + a[j] * d[k].conj();
                    s += dp.norm_sqr();
                }
            }
            (s * dx * dx).sqrt()
        };

        let q = det_condition(alpha, &params);
        let prop = proportionality_check(alpha, &params);
        let derived_constant = (params.m / (2.0 * params.d)).sqrt();
        let quoted_constant = params.m / (2.0 * params.d);

        let summary = json!({
            "alpha": { "re": alpha.re, "im": alpha.im },
            "hs_speed_frozen_state": v_frozen,
            "hs_speed_optimal_drift": v_opt,
            "projector_derivative_norm": dp_norm,
            "quartic_form": q,
            "proportionality": {
                "is_proportional": prop.is_proportional,
                "constant": prop.constant,
                "residual": prop.residual,
                "candidate_sqrt_m_over_2d": derived_constant,
                "candidate_m_over_2d": quoted_constant,
            },
        });
        ctx.out.write_json("robustness_summary", &summary)?;
        println!(
            "robustness: v(dpsi=0) = {v_frozen:.6}, v(optimal) = {v_opt:.6}, |dP/dt| = {dp_norm:.3e}"
        );
        println!(
            "robustness: q(alpha) = {q:.6e}, C = c D with c = {:.7} (residual {:.3e}, proportional: {})",
            prop.constant, prop.residual, prop.is_proportional
        );
        let seed = ctx.config.noise.seed;
        ctx.finish("robustness", seed)
    }
}
