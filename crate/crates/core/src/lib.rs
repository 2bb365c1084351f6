//! Mining maximally specific probabilistic rules from object–attribute data,
//! building "natural" classes as fixed points of prediction, and
//! recognizing new objects by their pertinence to each class.
//!
//! The pipeline is [`miner::mine_all`] → [`fixpoint::enumerate_classes`] →
//! [`recognizer::regular_matrix`] → [`recognizer::classify`]. The
//! [`oracle`] module holds brute-force reference implementations used to
//! cross-check the miner and the fixpoint engine on small systems.

pub mod datasets;
pub mod fisher;
pub mod fixpoint;
pub mod format;
pub mod miner;
pub mod model;
pub mod oracle;
pub mod recognizer;

pub use fixpoint::{ClassModel, Classes, LiteralSet, RuleBase};
pub use miner::{mine_all, MinerConfig, RuleSet};
pub use model::{load_system, EmpiricalSystem, Literal, Rule};
