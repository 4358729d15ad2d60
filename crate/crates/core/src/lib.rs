//! Petri net synthesis from labelled transition systems, with label
//! splitting for LTSs that do not embed as they stand.

pub mod fixtures;
pub mod linalg;
pub mod lts;
pub mod petri;
pub mod reduction;
pub mod regions;
pub mod splitting;

pub use lts::{Edge, Lts, LtsBuilder, ParseError};
pub use petri::{synthesize, PetriNet};
pub use regions::{EmbeddabilityReport, Region, RegionSystem};
pub use splitting::{decide, optimize, LabelSplitting, SearchConfig, SplitOutcome};
