//! Shared fixtures for the benchmarks.

use miplab::agents::{generate_reports, FullJoint};
use miplab::mechanisms::{BtsReport, BtsReportProfile};
use miplab::random::{random_distribution, random_joint, random_tensor, simplex_weights};
use miplab::{Distribution, JointDistribution, Prior, ReportMatrix, RngSeed, Scenario};

pub fn joint(m: usize) -> JointDistribution {
    random_joint(&mut RngSeed(1).rng(), m, m)
}

pub fn tensor(mz: usize, m: usize) -> JointDistribution {
    random_tensor(&mut RngSeed(2).rng(), mz, m, m)
}

/// Truthful agents under a random full joint over `n` agents and `m` signals.
pub fn full_joint_scenario(n: usize, m: usize) -> Scenario {
    let mut rng = RngSeed(3).rng();
    let prior = Prior::FullJoint(FullJoint::new(n, m, simplex_weights(&mut rng, m.pow(n as u32))).unwrap());
    Scenario::truthful(prior, n).unwrap()
}

pub fn binary_reports(n: usize, questions: usize) -> ReportMatrix {
    let q = JointDistribution::pairwise(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
    let scenario = Scenario::truthful(Prior::symmetric(q).unwrap(), 2).unwrap();
    let reports = generate_reports(&scenario, questions, RngSeed(4)).unwrap();
    if n == 2 {
        return reports;
    }
    let world = Prior::world(
        Distribution::new(vec![0.5, 0.5]).unwrap(),
        vec![Distribution::new(vec![0.8, 0.2]).unwrap(), Distribution::new(vec![0.2, 0.8]).unwrap()],
    )
    .unwrap();
    generate_reports(&Scenario::truthful(world, n).unwrap(), questions, RngSeed(4)).unwrap()
}

pub fn bts_profile(n: usize, m: usize) -> BtsReportProfile {
    let mut rng = RngSeed(5).rng();
    let reports = (0..n).map(|i| BtsReport { signal: i % m, prediction: random_distribution(&mut rng, m) }).collect();
    BtsReportProfile::new(m, reports).unwrap()
}
