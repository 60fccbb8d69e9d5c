//! Discrete-time, place-based agent simulation driven by a declarative
//! disease state machine.
//!
//! Each step has two phases. In the mixing phase every household, and on
//! weekdays every school and workplace, exposes each present susceptible
//! member with probability `1 - (1 - τ)^m`, where `m` is the number of
//! transmissible members present. In the progression phase agents whose
//! dwell time has run out draw a successor from their transition row.
//! Entering a logged state appends an incident at the agent's household.

mod io;
mod model;
mod sim;

pub use io::{incidents_csv, read_incidents_csv, tallies_csv};
pub use model::{Dwell, ModelConfig, StateId, StepUnit, TransitionModel, TransitionSpec};
pub use sim::{
    run, IncidentLog, IncidentRecord, RunOutput, Seeding, SimState, Simulation, Tallies,
};
