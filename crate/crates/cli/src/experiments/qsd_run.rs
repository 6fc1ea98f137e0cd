use rayon::prelude::*;
use serde_json::json;

use crate::config::NoiseModeName;
use crate::error::CliError;
use crate::experiment::{Experiment, RunContext};
use pointerlab::gaussian::equilibrium_width;
use pointerlab::phasespace::{diffusion_matrix, evolve_weight, GaussianWeight};
use pointerlab::qsd::{derive_seed, median, qsd_dt_max, run_trajectory, NoiseSpec};
use pointerlab::PhasePoint;

/// Stochastic trajectory ensemble: per-trajectory series plus an ensemble
/// summary with localization diagnostics.
pub struct Qsd;

impl Experiment for Qsd {
    fn name(&self) -> &'static str {
        "qsd"
    }

    fn summary(&self) -> &'static str {
        "run a seeded trajectory ensemble and report localization statistics"
    }

    fn run(&self, ctx: &mut RunContext) -> Result<(), CliError> {
        let params = ctx.params()?;
        let alpha = ctx.alpha()?;
        let grid = ctx.grid()?;
        let psi0 = ctx.initial_state(&grid)?;
        let dt = ctx.resolve_dt(qsd_dt_max(&grid, &params))?;
        let time = ctx.config.time.clone();
        let ens = ctx.config.ensemble.clone();
        let base = match ctx.config.noise.mode {
            NoiseModeName::Standard => NoiseSpec::standard(params.d, ens.master_seed)?,
            NoiseModeName::AlphaGeneral => {
                NoiseSpec::alpha_general(alpha, &params, ens.master_seed)?
            }
        };

        // trajectories are independent; one wandering off the grid aborts
        // that run only and is reported, not fatal
        let outcomes: Vec<_> = (0..ens.n_traj)
            .into_par_iter()
            .map(|i| {
                let spec = base.with_seed(derive_seed(base.seed, i as u64));
                (
                    i,
                    run_trajectory(
                        &psi0,
                        &params,
                        &spec,
                        time.t_final,
                        dt,
                        time.record_stride,
                        None,
                    ),
                )
            })
            .collect();
        let mut indexed = Vec::new();
        let mut aborted = Vec::new();
        for (i, outcome) in outcomes {
            match outcome {
                Ok(rec) => indexed.push((i, rec)),
                Err(e) => aborted.push(json!({ "index": i, "reason": e.to_string() })),
            }
        }
        if indexed.is_empty() {
            return Err(CliError::Numerical(format!(
                "all {} trajectories aborted; first: {}",
                ens.n_traj, aborted[0]["reason"]
            )));
        }

        for (i, rec) in &indexed {
            let rows: Vec<Vec<f64>> = (0..rec.times.len())
                .map(|k| {
                    vec![
                        rec.times[k],
                        rec.centers[k].x,
                        rec.centers[k].p,
                        rec.variances[k],
                        rec.gaussian_fidelity[k],
                    ]
                })
                .collect();
            ctx.out.write_series(
                &format!("qsd_traj_{i:04}"),
                &[
                    "t (1)",
                    "mean_x (length)",
                    "mean_p (1/length)",
                    "var_x (length^2)",
                    "fidelity (1)",
                ],
                &rows,
            )?;
        }
        let records: Vec<_> = indexed.into_iter().map(|(_, r)| r).collect();

        // ensemble medians over the common record times
        let n_rec = records[0].times.len();
        let mut median_fid = Vec::with_capacity(n_rec);
        let mut median_var = Vec::with_capacity(n_rec);
        for k in 0..n_rec {
            let f: Vec<f64> = records.iter().map(|r| r.gaussian_fidelity[k]).collect();
            let v: Vec<f64> = records.iter().map(|r| r.variances[k]).collect();
            median_fid.push(median(&f));
            median_var.push(median(&v));
        }
        let med_rows: Vec<Vec<f64>> = (0..n_rec)
            .map(|k| vec![records[0].times[k], median_fid[k], median_var[k]])
            .collect();
        ctx.out.write_series(
            "qsd_ensemble_medians",
            &["t (1)", "median_fidelity (1)", "median_var_x (length^2)"],
            &med_rows,
        )?;

        // empirical localization times: first crossing of 0.99 and the
        // half rise between the initial and asymptotic fidelity
        let f0 = median_fid[0];
        let t_loc = records[0]
            .times
            .iter()
            .zip(&median_fid)
            .find(|(_, f)| **f >= 0.99)
            .map(|(t, _)| *t);
        let half_level = 0.5 * (f0 + 1.0);
        let t_half = records[0]
            .times
            .iter()
            .zip(&median_fid)
            .find(|(_, f)| **f >= half_level)
            .map(|(t, _)| *t);

        // final-time center statistics against the weight evolution
        let final_centers: Vec<PhasePoint> =
            records.iter().map(|r| *r.centers.last().unwrap()).collect();
        let nf = final_centers.len() as f64;
        let mx = final_centers.iter().map(|c| c.x).sum::<f64>() / nf;
        let mp = final_centers.iter().map(|c| c.p).sum::<f64>() / nf;
        let mut cxx = 0.0;
        let mut cxp = 0.0;
        let mut cpp = 0.0;
        for c in &final_centers {
            cxx += (c.x - mx) * (c.x - mx);
            cxp += (c.x - mx) * (c.p - mp);
            cpp += (c.p - mp) * (c.p - mp);
        }
        let denom = (nf - 1.0).max(1.0);
        let dmat = diffusion_matrix(alpha, &params);
        let predicted = evolve_weight(
            &GaussianWeight::point_mass(PhasePoint::new(0.0, 0.0)),
            &dmat,
            params.m,
            time.t_final,
        )
        .cov;

        let sigma_sq = {
            let w = equilibrium_width(alpha);
            w * w
        };
        let summary = json!({
            "n_traj": ens.n_traj,
            "completed": records.len(),
            "aborted": aborted,
            "master_seed": ens.master_seed,
            "mode": match base.mode {
                pointerlab::NoiseMode::Standard => "standard",
                pointerlab::NoiseMode::AlphaGeneral => "alpha_general",
            },
            "dt": dt,
            "derived_seeds": records.iter().map(|r| r.seed).collect::<Vec<_>>(),
            "median_final_fidelity": median_fid.last(),
            "median_final_var_x": median_var.last(),
            "stationary_var_x": sigma_sq,
            "localization_time_fidelity_0p99": t_loc,
            "localization_half_time": t_half,
            "final_center_mean": { "x": mx, "p": mp },
            "final_center_covariance": {
                "xx": cxx / denom, "xp": cxp / denom, "pp": cpp / denom
            },
            "weight_covariance_prediction": {
                "xx": predicted.xx, "xp": predicted.xp, "pp": predicted.pp
            },
        });
        ctx.out.write_json("qsd_summary", &summary)?;
        println!(
            "qsd: {}/{} trajectories to t = {}, median fidelity {:.4}, median var_x {:.4} (stationary {:.4})",
            records.len(),
            ens.n_traj,
            time.t_final,
            median_fid.last().unwrap(),
            median_var.last().unwrap(),
            sigma_sq
        );
        ctx.finish("qsd", ens.master_seed)
    }
}
