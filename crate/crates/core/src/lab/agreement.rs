//! Agreement mechanisms against half the total-variation mutual information.

use statrs::distribution::{ContinuousCDF, Normal};

use super::{any_strategy, gap_bucket, Outcome, SuiteConfig};
use crate::agents::{generate_reports, Prior, ReportMatrix, Scenario};
use crate::error::Result;
use crate::measures::{f_mutual_information, ConvexGenerator};
use crate::mechanisms::{ca_rewards, md_expected_reward, md_rewards};
use crate::prob::{Distribution, JointDistribution, RngSeed};
use crate::random::{random_joint, random_positively_correlated_binary};

const MONTE_CARLO_INSTANCES: usize = 40;
const MONTE_CARLO_QUESTIONS: usize = 2_000;

fn half_tvd(joint: &JointDistribution) -> Result<f64> {
    Ok(0.5 * f_mutual_information(joint, ConvexGenerator::Tvd)?.value())
}

pub(super) fn md_instance(config: &SuiteConfig, seed: RngSeed) -> Result<Outcome> {
    let mut rng = seed.rng();
    let mut out = Outcome::default();
    let q = random_positively_correlated_binary(&mut rng);
    let reward = md_expected_reward(&q)?;
    let bound = half_tvd(&q)?;
    out.check((reward - bound).abs() <= 1e-12, "truthful-equality", || {
        format!("prior {:?}: reward {reward} vs half tvd {bound}", q.to_rows())
    });

    let si = any_strategy(&mut rng, 2);
    let sj = any_strategy(&mut rng, 2);
    let (ci, cj) = (si.channel().expect("channel"), sj.channel().expect("channel"));
    let reports = q.push_first(ci)?.push_second(cj)?;
    let reward = md_expected_reward(&reports)?;
    let bound = half_tvd(&reports)?;
    out.check(reward <= bound + 1e-12, "strategic-inequality", || {
        format!(
            "prior {:?}, strategies {:?} {:?}: reward {reward} > half tvd {bound}",
            q.to_rows(),
            ci.to_rows(),
            cj.to_rows()
        )
    });
    let slack = bound - reward;
    if slack > config.tolerances.strictness {
        out.tally(gap_bucket("strict", slack));
    } else {
        out.tally("equal");
    }
    Ok(out)
}

/// Sample mean and half-width of the normal confidence interval at level `level`.
fn mean_interval(values: &[f64], level: f64) -> (f64, f64) {
    let t = values.len() as f64;
    let mean = values.iter().sum::<f64>() / t;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0);
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    (mean, z * (var / t).sqrt())
}

/// Lowest acceptable number of covering intervals out of `k` at nominal level `level`.
pub fn coverage_floor(k: usize, level: f64) -> f64 {
    let k = k as f64;
    k * level - 3.29 * (k * level * (1.0 - level)).sqrt()
}

fn covered(rewards: &[f64], expected: f64, level: f64) -> bool {
    let (mean, half) = mean_interval(rewards, level);
    (mean - expected).abs() <= half
}

pub(super) fn md_fixed(config: &SuiteConfig) -> Result<(Outcome, Vec<String>)> {
    let mut out = Outcome::default();
    let canonical = JointDistribution::pairwise(vec![vec![0.4, 0.1], vec![0.1, 0.4]])?;
    let (r, b) = (md_expected_reward(&canonical)?, half_tvd(&canonical)?);
    out.check((r - 0.3).abs() <= 1e-12 && (b - 0.3).abs() <= 1e-12, "canonical", || format!("{r} vs {b}"));

    let uniform = Distribution::uniform(2)?;
    let independent = JointDistribution::outer(&uniform, &uniform);
    let (r, b) = (md_expected_reward(&independent)?, half_tvd(&independent)?);
    out.check(r.abs() <= 1e-15 && b.abs() <= 1e-15, "independent", || format!("{r} vs {b}"));

    let swap = crate::prob::TransitionMatrix::permutation(&[1, 0])?;
    let anti = canonical.push_second(&swap)?;
    let (r, b) = (md_expected_reward(&anti)?, half_tvd(&anti)?);
    out.check(b - r > config.tolerances.strictness, "anti-correlated-strict", || format!("{r} vs {b}"));

    // Monte Carlo: realized per-question rewards against their expectation
    let level = config.tolerances.monte_carlo_ci;
    let k = MONTE_CARLO_INSTANCES;
    let mut hits = [0usize; 2];
    for t in 0..k {
        let seed = RngSeed(config.seed).child(u64::MAX - t as u64);
        let mut rng = seed.rng();

        let binary = random_positively_correlated_binary(&mut rng);
        let reports = sample_pair_reports(&binary, seed.child(0))?;
        let rewards = md_rewards(&reports, 0, 1, 1, seed.child(1))?;
        hits[0] += usize::from(covered(&rewards, md_expected_reward(&binary)?, level));

        let ternary = random_joint(&mut rng, 3, 3);
        let reports = sample_pair_reports(&ternary, seed.child(2))?;
        let rewards = ca_rewards(&reports, 0, 1, 1, seed.child(3))?;
        hits[1] += usize::from(covered(&rewards, md_expected_reward(&ternary)?, level));
    }
    let floor = coverage_floor(k, level);
    for (name, h) in ["md", "ca"].iter().zip(hits) {
        out.check(h as f64 >= floor, "monte-carlo-coverage", || {
            format!("{name}: {h} of {k} intervals cover the expectation, floor {floor:.2}")
        });
        for _ in 0..h {
            out.tally(format!("{name}-ci:covered"));
        }
        for _ in h..k {
            out.tally(format!("{name}-ci:missed"));
        }
    }
    let notes = vec![format!(
        "monte carlo: {k} instances of {MONTE_CARLO_QUESTIONS} questions, d = 1, coverage floor {floor:.2} at level {level}"
    )];
    Ok((out, notes))
}

fn sample_pair_reports(joint: &JointDistribution, seed: RngSeed) -> Result<ReportMatrix> {
    let scenario = Scenario::truthful(Prior::pairwise(joint.clone())?, 2)?;
    generate_reports(&scenario, MONTE_CARLO_QUESTIONS, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_floor_is_below_nominal() {
        let f = coverage_floor(40, 0.95);
        assert!(f < 38.0 && f > 33.0);
        let (m, h) = mean_interval(&[1.0, 2.0, 3.0], 0.95);
        assert_eq!(m, 2.0);
        assert!((h - 1.959963984540054 / 3f64.sqrt()).abs() < 1e-12);
    }
}
