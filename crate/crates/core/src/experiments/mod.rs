//! Sweeps, indicator maps, thermal ensembles and the tickle experiment.

mod indicators;
mod sweep;
mod thermal;
mod tickle;

pub use indicators::{default_e_max, indicator_maps, IndicatorMaps, IndicatorSpec, ShellIndicators};
pub use sweep::{detect_jumps, sweep_1d_characterization, CharacterizationRow, Jump, SweepGrid};
pub use thermal::{member_rng, mode_energies, sample_thermal, thermal_member};
pub use tickle::{
    ensemble_escapes, find_threshold, rf_vs_pseudo_survival, tickle_curve, tickle_setup, tickle_survival, FieldModel,
    PairedSurvival, SurvivalCurve, Threshold, TickleSetup, TickleSpec,
};
