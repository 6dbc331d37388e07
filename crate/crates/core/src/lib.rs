//! Hetero-functional graph theory (HFGT) models of engineering systems.
//!
//! The pipeline is
//!
//! 1. [`ingest::parse_lfes`] / [`ingest::validate_raw`]: LFES XML into typed raw structures,
//! 2. [`metamodel::SystemModel::build`]: resource indexing and process sets,
//! 3. [`hfgt::HfgtBundle::compute`]: knowledge bases, concepts, incidence tensors,
//!    adjacency, controller and service matrices,
//! 4. [`export`]: Matrix Market / coordinate tensor files plus a JSON manifest,
//! 5. [`petrinet`]: replay of a scheduled event list over the induced Petri net.

pub mod export;
pub mod hfgt;
pub mod ingest;
pub mod metamodel;
pub mod petrinet;
pub mod sparse;

pub use hfgt::{HfgtBundle, HfgtOptions};
pub use metamodel::SystemModel;
