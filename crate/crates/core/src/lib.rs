//! System-level simulator of a 28 GHz small-cell downlink: hexagonal
//! tri-sector network, UMa propagation with Doppler fading, dual-polarized
//! BS ports against a linearly or cross-polarized UE antenna, closed-loop
//! spatial multiplexing, round robin and proportional fair scheduling, and
//! throughput, spectral efficiency and fairness KPIs.
//!
//! The numeric modules ([`antenna`], [`channel`], [`linalg`], [`link`],
//! [`scheduler`], [`kpi`]) are generic over [`num::Real`] (`f32` or `f64`);
//! deployment geometry and the engine in [`sim`] run in `f64`. The aliases
//! below fix the scalar for the common case.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` deliberately rejects NaN

pub mod antenna;
pub mod channel;
pub mod config;
pub mod deployment;
pub mod error;
pub mod kpi;
pub mod linalg;
pub mod link;
pub mod num;
pub mod scheduler;
pub mod sim;

pub use config::{
    expand_sweep, load_scenario, Polarization, Preset, ScenarioConfig, SchedulerKind,
};
pub use error::{Result, SimError};
pub use sim::{
    emit_csv, emit_metadata, run_simulation, run_sweep, ResultsTable, SimulationRun, SweepAxes,
};

/// Complex scalar.
pub type Cx = num_complex::Complex<f64>;
/// Complex matrix.
pub type Matrix = linalg::CMat<f64>;
pub type Codebook = link::Codebook<f64>;
pub type RateMapping = link::RateMapping<f64>;
pub type AntennaConfig = antenna::AntennaConfig<f64>;
pub type PolarizationSpec = antenna::PolarizationSpec<f64>;
pub type CouplingMatrix = antenna::CouplingMatrix<f64>;
pub type LargeScaleState = channel::LargeScaleState<f64>;
pub type FadingProcess = channel::FadingProcess<f64>;
pub type LinkChannel = channel::LinkChannel<f64>;
pub type RbGrid = scheduler::RbGrid<f64>;
pub type SchedulerState = scheduler::SchedulerState<f64>;
pub type Allocation = scheduler::Allocation<f64>;
pub type ThroughputLedger = kpi::ThroughputLedger<f64>;
pub type KpiRecord = kpi::KpiRecord<f64>;
