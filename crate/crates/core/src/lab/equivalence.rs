//! Indistinguishable scenarios: relabeling a prior and the strategies together
//! must leave every exact payment unchanged.

use rand::Rng;

use super::{any_strategy, close_f64, pick, Outcome, SuiteConfig, ALL_MEASURES};
use crate::agents::{
    permute_scenario, EffortStrategy, FullJoint, PermutationList, Prior, Scenario, Strategy, MAX_FULL_JOINT_AGENTS,
};
use crate::error::Result;
use crate::measures::{ConvexGenerator, Measure};
use crate::mechanisms::{
    bts_expected_payments, ca_expected_payments, md_expected_payments, mip_expected_payments, PaymentReport,
};
use crate::prob::{JointDistribution, RngSeed};
use crate::random::{random_distribution, random_joint, random_permutation, simplex_weights};

const LISTS_PER_SCENARIO: usize = 10;
const TOL: f64 = 1e-12;

fn random_prior<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Result<Prior> {
    let full_joint_allowed = n <= MAX_FULL_JOINT_AGENTS && m.pow(n as u32) <= 4_096;
    match rng.random_range(0..3) {
        0 => Prior::pairwise(random_joint(rng, m, m)),
        1 if full_joint_allowed => Ok(Prior::FullJoint(FullJoint::new(n, m, simplex_weights(rng, m.pow(n as u32)))?)),
        _ => {
            let k = rng.random_range(2..=3);
            let weights = random_distribution(rng, k);
            let states = (0..k).map(|_| random_distribution(rng, m)).collect();
            Prior::world(weights, states)
        }
    }
}

fn random_scenario<R: Rng + ?Sized>(rng: &mut R, config: &SuiteConfig) -> Result<Scenario> {
    let m = pick(rng, &config.alphabet_sizes);
    let n = pick(rng, &config.agent_counts);
    let prior = random_prior(rng, n, m)?;
    let strategies = (0..n)
        .map(|_| match rng.random_range(0..5) {
            0 => Strategy::truthful(m),
            1 => Strategy::peer_posterior(),
            _ => any_strategy(rng, m),
        })
        .collect();
    let efforts = if rng.random_bool(0.5) {
        Some(
            (0..n)
                .map(|_| EffortStrategy::new(rng.random::<f64>(), rng.random::<f64>(), random_distribution(rng, m)))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Scenario::new(prior, strategies, efforts)
}

fn random_list<R: Rng + ?Sized>(rng: &mut R, prior: &Prior, n: usize, m: usize) -> Result<PermutationList> {
    if matches!(prior, Prior::WorldModel(_)) || rng.random_bool(0.2) {
        PermutationList::symmetric(n, random_permutation(rng, m))
    } else {
        PermutationList::new((0..n).map(|_| random_permutation(rng, m)).collect())
    }
}

/// Every exact payment the library computes for a scenario, labelled.
pub fn exact_payments(scenario: &Scenario) -> Result<Vec<(String, PaymentReport)>> {
    let mut all = Vec::new();
    for measure in ALL_MEASURES {
        all.push((format!("mip/{}", measure.name()), mip_expected_payments(scenario, measure)?));
    }
    all.push(("ca".to_string(), ca_expected_payments(scenario)?));
    if scenario.alphabet_size() == 2 {
        all.push(("md".to_string(), md_expected_payments(scenario)?));
    }
    if matches!(scenario.prior, Prior::WorldModel(_)) {
        for f in [ConvexGenerator::Kl, ConvexGenerator::Tvd] {
            let measure = Measure::F(f);
            all.push((format!("bts/{}", measure.name()), bts_expected_payments(scenario, 2.0, measure)?));
        }
    }
    Ok(all)
}

fn compare_reports(out: &mut Outcome, context: &str, a: &[(String, PaymentReport)], b: &[(String, PaymentReport)]) {
    out.check(a.len() == b.len(), "mechanism-set", || format!("{context}: {} vs {} mechanisms", a.len(), b.len()));
    for ((name, ra), (_, rb)) in a.iter().zip(b) {
        for (x, y) in ra.agents.iter().zip(&rb.agents) {
            let fields = [
                ("payment", Some(x.payment), Some(y.payment)),
                ("information", x.information_score, y.information_score),
                ("prediction", x.prediction_score, y.prediction_score),
                ("utility", x.utility, y.utility),
            ];
            for (field, u, v) in fields {
                let same = match (u, v) {
                    (Some(u), Some(v)) => close_f64(u, v, TOL),
                    (None, None) => true,
                    _ => false,
                };
                out.check(same, "payment-equality", || {
                    format!("{context} {name} agent {} {field}: {u:?} vs {v:?}", x.agent)
                });
            }
        }
    }
}

fn joints_close(a: &JointDistribution, b: &JointDistribution) -> Result<bool> {
    Ok(a.max_abs_diff(b)? <= TOL)
}

pub(super) fn equivalence_instance(config: &SuiteConfig, seed: RngSeed) -> Result<Outcome> {
    let mut rng = seed.rng();
    let mut out = Outcome::default();
    let scenario = random_scenario(&mut rng, config)?;
    let (n, m) = (scenario.n_agents(), scenario.alphabet_size());
    let base = exact_payments(&scenario)?;
    let base_joints = scenario.report_joints()?;
    let base_channels = scenario.channels()?;
    for t in 0..LISTS_PER_SCENARIO {
        let list = random_list(&mut rng, &scenario.prior, n, m)?;
        let context = format!("{} n={n} m={m} list {t} {:?}", scenario.prior.mode_name(), list);
        let permuted = permute_scenario(&scenario, &list)?;
        compare_reports(&mut out, &context, &base, &exact_payments(&permuted)?);

        // the coupling: every pair of reports has the same joint law in both scenarios
        for (k, (a, b)) in base_joints.iter().zip(permuted.report_joints()?).enumerate() {
            if let (Some(a), Some(b)) = (a, b) {
                out.check(joints_close(a, &b)?, "coupling", || format!("{context}: pair {} {}", k / n, k % n));
            }
        }

        let back = permute_scenario(&permuted, &list.inverse())?;
        let restored = back.channels()?.iter().zip(&base_channels).all(|(a, b)| a.max_abs_diff(b) <= TOL);
        let prior_restored = (0..n).all(|i| {
            (i + 1..n).all(|j| match (back.prior.pair_joint(i, j), scenario.prior.pair_joint(i, j)) {
                (Ok(a), Ok(b)) => joints_close(&a, &b).unwrap_or(false),
                _ => false,
            })
        });
        out.check(restored && prior_restored, "involution", || format!("{context}: inverse list does not restore"));
        out.tally(if list.is_identity() {
            "list:identity"
        } else if list.is_symmetric() {
            "list:symmetric"
        } else {
            "list:asymmetric"
        });
    }
    out.tally(format!("prior:{}", scenario.prior.mode_name()));
    Ok(out)
}

pub(super) fn equivalence_fixed(_config: &SuiteConfig) -> Result<(Outcome, Vec<String>)> {
    let mut out = Outcome::default();
    // order-3 cyclic relabeling of a ternary symmetric prior with truthful agents
    let q = JointDistribution::pairwise(vec![vec![0.2, 0.05, 0.05], vec![0.05, 0.25, 0.05], vec![0.05, 0.05, 0.25]])?;
    let scenario = Scenario::truthful(Prior::symmetric(q)?, 3)?;
    let list = PermutationList::symmetric(3, vec![1, 2, 0])?;
    let permuted = permute_scenario(&scenario, &list)?;
    compare_reports(&mut out, "cyclic ternary", &exact_payments(&scenario)?, &exact_payments(&permuted)?);
    let identity = permute_scenario(&scenario, &PermutationList::identity(3, 3))?;
    compare_reports(&mut out, "identity list", &exact_payments(&scenario)?, &exact_payments(&identity)?);
    Ok((
        out,
        vec!["shifted peer prediction is excluded: it is told the prior, so relabeling the prior changes what it pays"
            .into()],
    ))
}
