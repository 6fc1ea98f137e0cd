mod evolve_drift;
mod evolve_master;
mod fokker_planck;
mod qsd_run;
mod reconstruct;
mod robustness_report;
mod sieve;
mod units;

pub use evolve_drift::EvolveDrift;
pub use evolve_master::EvolveMaster;
pub use fokker_planck::FokkerPlanck;
pub use qsd_run::Qsd;
pub use reconstruct::Reconstruct;
pub use robustness_report::Robustness;
pub use sieve::Sieve;
pub use units::Units;
