use serde_json::json;

use crate::error::CliError;
use crate::experiment::{Experiment, RunContext};
use pointerlab::density::hs_distance;
use pointerlab::phasespace::{
    diffusion_matrix, evolve_weight, reconstruct_rho_with_nodes, GaussianWeight,
};
use pointerlab::PhasePoint;

/// Quadrature-convergence table for the density-matrix reconstruction
/// from the pointer weight.
pub struct Reconstruct;

impl Experiment for Reconstruct {
    fn name(&self) -> &'static str {
        "reconstruct"
    }

    fn summary(&self) -> &'static str {
        "reconstruct the density matrix from the weight at increasing quadrature resolution"
    }

    fn run(&self, ctx: &mut RunContext) -> Result<(), CliError> {
        let params = ctx.params()?;
        let alpha = ctx.alpha()?;
        let grid = ctx.grid()?;
        let dmat = diffusion_matrix(alpha, &params);
        let w0 = GaussianWeight::point_mass(PhasePoint::new(0.0, 0.0));
        let w = evolve_weight(&w0, &dmat, params.m, ctx.config.time.t_final);

        let reference = reconstruct_rho_with_nodes(&w, alpha, &grid, 128)?;
        let mut rows = Vec::new();
        for nodes in [8usize, 12, 16, 24, 32, 48, 64] {
            match reconstruct_rho_with_nodes(&w, alpha, &grid, nodes) {
                Ok(rho) => {
                    let d = hs_distance(&rho, &reference)?;
                    rows.push(vec![nodes as f64, d]);
                }
                Err(e) => {
                    // under-resolved quadrature is part of the table story
                    println!("reconstruct: {nodes} nodes rejected: {e}");
                    rows.push(vec![nodes as f64, f64::NAN]);
                }
            }
        }
        ctx.out.write_series(
            "reconstruct_convergence",
            &["nodes_per_axis (1)", "hs_distance_to_reference (1)"],
            &rows,
        )?;
        let summary = json!({
            "t": ctx.config.time.t_final,
            "weight_covariance": { "xx": w.cov.xx, "xp": w.cov.xp, "pp": w.cov.pp },
            "reference_nodes": 128,
        });
        ctx.out.write_json("reconstruct_summary", &summary)?;
        println!(
            "reconstruct: table written, finest deviation {:.3e}",
            rows.last().map(|r| r[1]).unwrap_or(f64::NAN)
        );
        let seed = ctx.config.noise.seed;
        ctx.finish("reconstruct", seed)
    }
}
