//! Information-overloading control: A/B schedules, input gating, the
//! B-phase reset design and its verification harness.

mod harness;
mod reset;
mod schedule;
mod simulate;

pub use harness::*;
pub use reset::*;
pub use schedule::*;
pub use simulate::*;
