//! CGS restoration of the dimensionless model: pointer width and
//! decoherence time for laboratory parameters.

use serde::Serialize;

use crate::config::UnitsSection;

/// Dimensional estimates with hbar restored: `sigma0 = (D m / hbar)^(-1/4)`
/// in cm and `t_D = sqrt(m / (hbar D))` in s. The hbar placement follows
/// from dimensional analysis of the master equation (D carries
/// 1/(cm^2 s)), and is validated at order-of-magnitude level only.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UnitEstimates {
    pub sigma0_cm: f64,
    pub t_d_s: f64,
}

pub fn convert_units(ctx: &UnitsSection) -> UnitEstimates {
    let sigma0_cm = (ctx.d_cgs * ctx.mass_cgs / ctx.hbar).powf(-0.25);
    let t_d_s = (ctx.mass_cgs / (ctx.hbar * ctx.d_cgs)).sqrt();
    UnitEstimates { sigma0_cm, t_d_s }
}
