//! Learn project networks from event logs of recurring projects.
//!
//! The pipeline: parse an [`event_log::EventLog`], discover a [`tree::ProjectTree`] with the
//! inductive [`miner`], translate it to a timed workflow [`petri::PetriNet`], filter rare flows,
//! learn [`decision`] rules at exclusive choices, and decode one variant into a plan whose
//! critical path and slacks come from the [`planner`].

pub mod decision;
pub mod dfg;
pub mod dot;
pub mod event_log;
pub mod hours;
pub mod miner;
pub mod petri;
pub mod pipeline;
pub mod planner;
pub mod synthetic;
pub mod tree;

pub use hours::{Fraction, Hours};
