//! Small worked examples used by tests and the acceptance suite.

use crate::lts::Lts;
use crate::petri::PetriNet;

/// Two interleavings of `a` and `b`, never closing the diamond.
pub fn ab_interleavings() -> Lts {
    Lts::parse(include_str!("../fixtures/ab-interleavings.lts")).expect("fixture parses")
}

pub fn abc_embeddable() -> Lts {
    Lts::parse(include_str!("../fixtures/abc-embeddable.lts")).expect("fixture parses")
}

/// The reachability graph of [`abc_net`].
pub fn abc_reachability() -> Lts {
    Lts::parse(include_str!("../fixtures/abc-reachability.lts")).expect("fixture parses")
}

pub fn abc_net() -> PetriNet {
    PetriNet::parse(include_str!("../fixtures/abc.net")).expect("fixture parses")
}
