//! Exact-payment suites for the mutual-information paradigm: dominant truthfulness,
//! truth-monotonicity and the zero-one effort model.

use rand::Rng;

use super::{any_strategy, close, gap_bucket, pick, Outcome, SuiteConfig, ALL_MEASURES};
use crate::agents::{random_strategy_with, EffortStrategy, Prior, Scenario, Strategy};
use crate::error::Result;
use crate::measures::{is_fine_grained, ConvexGenerator, DpiReport, ExtendedReal, Measure, DEFAULT_FINE_GRAINED_TOL};
use crate::mechanisms::mip_expected_payments;
use crate::prob::{Distribution, JointDistribution, RngSeed};
use crate::random::{random_distribution, random_joint, StrategyKind};

/// Expected payment of `agent` with infinite values kept exact.
pub(crate) fn mip_payment(scenario: &Scenario, agent: usize, measure: Measure) -> Result<ExtendedReal> {
    let n = scenario.n_agents();
    let mut total = ExtendedReal::ZERO;
    for j in (0..n).filter(|&j| j != agent) {
        total = total + measure.mutual_information(&scenario.report_joint(agent, j)?)?;
    }
    Ok(total.scale(1.0 / (n - 1) as f64))
}

/// A random opponent strategy; truthful a quarter of the time so strictness checks fire often.
fn opponent_strategy<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Strategy {
    match rng.random_range(0..8) {
        0 | 1 => Strategy::truthful(m),
        2 => Strategy::peer_posterior(),
        _ => any_strategy(rng, m),
    }
}

fn gap(before: ExtendedReal, after: ExtendedReal) -> f64 {
    match (before, after) {
        (ExtendedReal::Finite(b), ExtendedReal::Finite(a)) => b - a,
        (ExtendedReal::Infinite, ExtendedReal::Finite(_)) => f64::INFINITY,
        _ => 0.0,
    }
}

fn fine_grained(joint: &JointDistribution) -> Result<bool> {
    Ok(is_fine_grained(joint, DEFAULT_FINE_GRAINED_TOL)?.fine_grained)
}

pub(super) fn dominant_instance(config: &SuiteConfig, seed: RngSeed) -> Result<Outcome> {
    let mut rng = seed.rng();
    let mut out = Outcome::default();
    let m = pick(&mut rng, &config.alphabet_sizes);
    let n = pick(&mut rng, &config.agent_counts);
    let prior = Prior::pairwise(random_joint(&mut rng, m, m))?;
    let mut strategies = vec![Strategy::truthful(m)];
    strategies.extend((1..n).map(|_| opponent_strategy(&mut rng, m)));
    let truthful = Scenario::new(prior.clone(), strategies, None)?;
    let kind = StrategyKind::sample(&mut rng);
    let deviation = random_strategy_with(&mut rng, m, kind);
    let deviated = truthful.with_strategy(0, deviation.clone());
    let measure = pick(&mut rng, &ALL_MEASURES);

    let truth = mip_payment(&truthful, 0, measure)?;
    let dev = mip_payment(&deviated, 0, measure)?;
    let cmp = DpiReport::compare(truth, dev, config.tolerances.equality);
    out.check(cmp.holds, "dominant-truthfulness", || {
        format!("{} n={n} m={m} {kind:?}: truth {truth} deviation {dev}", measure.name())
    });

    let channel = deviation.channel().expect("random strategies are channels");
    if channel.is_permutation() {
        out.check(close(truth, dev, 1e-12), "permutation-equality", || format!("truth {truth} deviation {dev}"));
        out.tally("equality:permutation");
        return Ok(out);
    }
    if channel.is_constant() {
        out.check(close(dev, ExtendedReal::ZERO, 1e-12), "constant-zero", || format!("deviation {dev}"));
    }
    let truthful_peer = (1..n).find(|&j| truthful.strategies[j].is_truthful());
    if let (Some(j), true) = (truthful_peer, measure.is_strictly_monotone_candidate()) {
        if fine_grained(&prior.pair_joint(0, j)?)? {
            let g = gap(truth, dev);
            out.check(g > config.tolerances.strictness, "strictness", || {
                format!("{} n={n} m={m} {kind:?}: gap {g:e}", measure.name())
            });
            out.tally(gap_bucket("strict", g));
        }
    }
    Ok(out)
}

pub(super) fn dominant_fixed(_config: &SuiteConfig) -> Result<(Outcome, Vec<String>)> {
    Ok((
        Outcome::default(),
        vec!["strictness is asserted when a truthful peer exists, the pair prior is fine-grained, the deviation is not a permutation and the generator is strictly convex".into()],
    ))
}

pub(super) fn monotone_instance(config: &SuiteConfig, seed: RngSeed) -> Result<Outcome> {
    let mut rng = seed.rng();
    let mut out = Outcome::default();
    let m = pick(&mut rng, &config.alphabet_sizes);
    let n = pick(&mut rng, &config.agent_counts);
    let prior = Prior::pairwise(random_joint(&mut rng, m, m))?;
    let k = rng.random_range(0..n);
    let strategies: Vec<Strategy> =
        (0..n).map(|a| if a == k { Strategy::truthful(m) } else { opponent_strategy(&mut rng, m) }).collect();
    let before = Scenario::new(prior.clone(), strategies, None)?;
    let kind = StrategyKind::sample(&mut rng);
    let deviation = random_strategy_with(&mut rng, m, kind);
    let channel = deviation.channel().expect("random strategies are channels").clone();
    let after = before.with_strategy(k, deviation);
    let f = pick(&mut rng, &ConvexGenerator::ALL);
    let measure = Measure::F(f);

    for i in (0..n).filter(|&i| i != k) {
        let b = mip_payment(&before, i, measure)?;
        let a = mip_payment(&after, i, measure)?;
        out.check(DpiReport::compare(b, a, config.tolerances.equality).holds, "truth-monotone", || {
            format!("{f:?} n={n} m={m} k={k} i={i} {kind:?}: before {b} after {a}")
        });
        if channel.is_permutation() {
            out.check(close(a, b, 1e-12), "permutation-equality", || format!("agent {i}: before {b} after {a}"));
            continue;
        }
        if channel.is_constant() {
            let term = measure.mutual_information(&after.report_joint(i, k)?)?;
            out.check(close(term, ExtendedReal::ZERO, 1e-12), "constant-zero", || format!("agent {i}: term {term}"));
        }
        if f.is_strictly_convex() && before.strategies[i].is_truthful() && fine_grained(&prior.pair_joint(i, k)?)? {
            let g = gap(b, a);
            out.check(g > config.tolerances.strictness, "strictness", || {
                format!("{f:?} n={n} m={m} k={k} i={i} {kind:?}: gap {g:e}")
            });
            out.tally(gap_bucket("strict", g));
        }
    }
    if channel.is_permutation() {
        out.tally("equality:permutation");
    }
    Ok(out)
}

/// Effort grid `0, 0.05, …, 1`.
pub fn lambda_grid() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

/// Agent 0's expected utility at each grid point, other agents as in `base`.
fn utility_curve(base: &Scenario, measure: Measure, cost: f64, shirk: &Distribution) -> Result<Vec<(f64, f64)>> {
    lambda_grid()
        .into_iter()
        .map(|lambda| {
            let s = base.with_effort(0, EffortStrategy::new(lambda, cost, shirk.clone())?)?;
            let r = mip_expected_payments(&s, measure)?;
            Ok((lambda, r.agents[0].utility.expect("efforts are set")))
        })
        .collect()
}

/// First grid point of maximal utility.
fn argmax(curve: &[(f64, f64)]) -> (f64, f64) {
    curve.iter().copied().fold((f64::NAN, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best })
}

fn canonical_effort_scenario() -> Result<Scenario> {
    let q = JointDistribution::pairwise(vec![vec![0.4, 0.1], vec![0.1, 0.4]])?;
    Scenario::truthful(Prior::symmetric(q)?, 2)
}

/// Optimal effort level on the grid for the canonical example under TVD.
pub fn canonical_optimal_effort(cost: f64) -> Result<(f64, f64)> {
    let curve = utility_curve(
        &canonical_effort_scenario()?,
        Measure::F(ConvexGenerator::Tvd),
        cost,
        &Distribution::uniform(2)?,
    )?;
    Ok(argmax(&curve))
}

pub(super) fn effort_fixed(config: &SuiteConfig) -> Result<(Outcome, Vec<String>)> {
    let mut out = Outcome::default();
    let tol = config.tolerances.equality;
    for (cost, expected) in [(0.7, 0.0), (0.2, 1.0)] {
        let (lambda, utility) = canonical_optimal_effort(cost)?;
        out.check(lambda == expected, "canonical-optimum", || {
            format!("cost {cost}: lambda* {lambda}, utility {utility}")
        });
    }
    let curve = utility_curve(
        &canonical_effort_scenario()?,
        Measure::F(ConvexGenerator::Tvd),
        0.6,
        &Distribution::uniform(2)?,
    )?;
    let (u0, u1) = (curve[0].1, curve[curve.len() - 1].1);
    out.check((u0 - u1).abs() <= tol, "boundary-cost", || format!("utilities {u0} and {u1} at the endpoints"));
    Ok((out, Vec::new()))
}

pub(super) fn effort_instance(config: &SuiteConfig, seed: RngSeed) -> Result<Outcome> {
    let mut rng = seed.rng();
    let mut out = Outcome::default();
    let tol = config.tolerances.equality;
    let m = pick(&mut rng, &config.alphabet_sizes);
    let n = pick(&mut rng, &config.agent_counts);
    let f = pick(&mut rng, &ConvexGenerator::ALL);
    let measure = Measure::F(f);
    let mut base = Scenario::truthful(Prior::pairwise(random_joint(&mut rng, m, m))?, n)?;
    for j in 1..n {
        let lambda = rng.random::<f64>();
        let shirk = random_distribution(&mut rng, m);
        base = base.with_effort(j, EffortStrategy::new(lambda, rng.random::<f64>(), shirk)?)?;
    }
    let cost = rng.random::<f64>();
    let shirk = random_distribution(&mut rng, m);

    let curve = utility_curve(&base, measure, cost, &shirk)?;
    let (best_lambda, best) = argmax(&curve);
    let endpoints = curve[0].1.max(curve[curve.len() - 1].1);
    out.check(best <= endpoints + tol, "interior-optimum", || {
        format!("{f:?} n={n} m={m} cost {cost}: lambda {best_lambda} utility {best} > endpoints {endpoints}")
    });
    out.tally(if curve[curve.len() - 1].1 >= curve[0].1 { "lambda*=1" } else { "lambda*=0" });

    // payment is convex in the effort mixture: midpoint test on the grid
    let payments: Vec<f64> = curve.iter().map(|&(l, u)| u + l * cost).collect();
    for w in payments.windows(3) {
        let slack = 0.5 * (w[0] + w[2]) - w[1];
        out.check(slack >= -tol * w[1].abs().max(1.0), "convexity", || format!("{f:?} n={n} m={m}: payments {:?}", w));
    }

    // switching peers to full-effort truth-telling one by one never lowers the optimum
    let mut previous = endpoints;
    let mut current = base;
    for j in 1..n {
        let c = current.effort(j).expect("efforts are set").cost;
        current = current.with_effort(j, EffortStrategy::full(m, c)?)?;
        let u0 = utility_at(&current, measure, 0.0, cost, &shirk)?;
        let u1 = utility_at(&current, measure, 1.0, cost, &shirk)?;
        let optimum = u0.max(u1);
        out.check(optimum >= previous - tol, "effort-monotone", || {
            format!("{f:?} n={n} m={m}: optimum {previous} fell to {optimum} after peer {j} switched")
        });
        previous = optimum;
    }
    Ok(out)
}

fn utility_at(base: &Scenario, measure: Measure, lambda: f64, cost: f64, shirk: &Distribution) -> Result<f64> {
    let s = base.with_effort(0, EffortStrategy::new(lambda, cost, shirk.clone())?)?;
    Ok(mip_expected_payments(&s, measure)?.agents[0].utility.expect("efforts are set"))
}
