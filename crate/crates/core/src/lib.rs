//! Mechanism-design laboratory for peer prediction over finite signal alphabets.
//!
//! The crate is organised bottom-up:
//!
//! * [`prob`] holds distributions, joints, channels and seeded sampling.
//! * [`measures`] implements f-divergences, proper scoring rules and the
//!   mutual-information measures built on them.
//! * [`agents`] models priors, report strategies, effort and scenarios.
//! * [`mechanisms`] computes payments, both exact and from sampled reports.
//! * [`lab`] runs the randomized verification suites and produces verdicts.
//! * [`schema`] defines the versioned on-disk formats.

pub mod agents;
pub mod error;
pub mod lab;
pub mod measures;
pub mod mechanisms;
pub mod prob;
pub mod random;
pub mod schema;

pub use agents::{EffortStrategy, PermutationList, Prior, ReportMatrix, Scenario, Strategy, StrategyRule};
pub use error::{Error, Result};
pub use measures::{ConvexGenerator, ExtendedReal, Measure, ScoringRule};
pub use mechanisms::{BtsReportProfile, Pairing, PaymentReport};
pub use prob::{Distribution, JointDistribution, RngSeed, TransitionMatrix};
pub use random::StrategyKind;
