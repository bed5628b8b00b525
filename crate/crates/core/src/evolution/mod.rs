//! Time integration of `d_t f + L f = g`, energy logging, and the exact
//! operator recursion for `d_t^k f`.

mod ladder;
mod source;
mod stepper;

pub use ladder::{derivative_ladder, DerivativeLadder, LadderRow, MAX_LADDER_DEPTH};
pub use source::{SourceModel, TimeFactor};
pub use stepper::{
    evolve, stable_dt, step, EnergyRow, EvolutionState, RateRow, TimePolicy, Trajectory,
};
