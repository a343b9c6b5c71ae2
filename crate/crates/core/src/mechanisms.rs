//! Payment engines for the mutual-information mechanisms and their relatives.
//!
//! Exact evaluators take a [`Scenario`] and return expected payments; empirical
//! evaluators take sampled reports and return realized payments.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{world_tensor, ReportMatrix, Scenario};
use crate::error::{Error, Result};
use crate::measures::{conditional_mi, ConvexGenerator, Measure, ScoringRule};
use crate::prob::{Distribution, JointDistribution, RngSeed, TransitionMatrix};

/// Whether payments are expectations or realized values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaymentMode {
    Exact,
    Empirical,
}

/// How each agent's reference peer is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// Average over every other agent: the expectation of a uniform choice.
    #[default]
    AllPairs,
    /// One uniformly random peer per agent, drawn from the run seed.
    RandomReference,
}

impl std::str::FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-pairs" | "all-pairs-average" => Ok(Pairing::AllPairs),
            "random" | "random-reference" | "seeded-random" => Ok(Pairing::RandomReference),
            other => Err(Error::InvalidArgument(format!("unknown pairing {other:?}"))),
        }
    }
}

/// One agent's line of a [`PaymentReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentPayment {
    pub agent: usize,
    #[serde(with = "crate::schema::float")]
    pub payment: f64,
    #[serde(default, with = "crate::schema::opt_float", skip_serializing_if = "Option::is_none")]
    pub information_score: Option<f64>,
    #[serde(default, with = "crate::schema::opt_float", skip_serializing_if = "Option::is_none")]
    pub prediction_score: Option<f64>,
    /// Expected effort cost `λ · cost`.
    #[serde(default, with = "crate::schema::opt_float", skip_serializing_if = "Option::is_none")]
    pub effort_cost: Option<f64>,
    #[serde(default, with = "crate::schema::opt_float", skip_serializing_if = "Option::is_none")]
    pub utility: Option<f64>,
}

impl AgentPayment {
    pub fn plain(agent: usize, payment: f64) -> Self {
        AgentPayment {
            agent,
            payment,
            information_score: None,
            prediction_score: None,
            effort_cost: None,
            utility: None,
        }
    }
}

/// Per-agent payments of one mechanism run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaymentReport {
    pub mechanism: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<String>,
    pub mode: PaymentMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub questions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub agents: Vec<AgentPayment>,
}

impl PaymentReport {
    fn new(mechanism: &str, mode: PaymentMode, agents: Vec<AgentPayment>) -> Self {
        PaymentReport {
            mechanism: mechanism.to_string(),
            measure: None,
            mode,
            questions: None,
            seed: None,
            alpha: None,
            warnings: Vec::new(),
            agents,
        }
    }

    pub fn payments(&self) -> Vec<f64> {
        self.agents.iter().map(|a| a.payment).collect()
    }

    /// Fills `effort_cost` and `utility` from the scenario's effort profile.
    fn with_efforts(mut self, scenario: &Scenario) -> Self {
        if let Some(efforts) = &scenario.efforts {
            for (a, e) in self.agents.iter_mut().zip(efforts) {
                let cost = e.expected_cost();
                a.effort_cost = Some(cost);
                a.utility = Some(a.payment - cost);
            }
        }
        self
    }

    /// One row per agent: agent, payment, information_score, prediction_score, effort_cost, utility.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv output failed: {e}"));
        w.write_record(["agent", "payment", "information_score", "prediction_score", "effort_cost", "utility"])
            .map_err(io)?;
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for a in &self.agents {
            w.write_record([
                a.agent.to_string(),
                a.payment.to_string(),
                cell(a.information_score),
                cell(a.prediction_score),
                cell(a.effort_cost),
                cell(a.utility),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

/// Sum of the agents' payments.
pub fn agent_welfare(report: &PaymentReport) -> f64 {
    report.agents.iter().map(|a| a.payment).sum()
}

fn average_over_peers(n: usize, mut value: impl FnMut(usize, usize) -> Result<f64>) -> Result<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut total = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                total += value(i, j)?;
            }
            Ok(total / (n - 1) as f64)
        })
        .collect()
}

fn pair_joint_at(joints: &[Option<JointDistribution>], n: usize, i: usize, j: usize) -> &JointDistribution {
    joints[i * n + j].as_ref().expect("off-diagonal report joints are present")
}

/// Expected payments of the mechanism paying `MI(Ψ̂_i; Ψ̂_j)` for a uniformly random peer `j`.
pub fn mip_expected_payments(scenario: &Scenario, measure: Measure) -> Result<PaymentReport> {
    let n = scenario.n_agents();
    let joints = scenario.report_joints()?;
    let payments =
        average_over_peers(n, |i, j| Ok(measure.mutual_information(pair_joint_at(&joints, n, i, j))?.value()))?;
    let mut report = PaymentReport::new(
        "mip",
        PaymentMode::Exact,
        payments.into_iter().enumerate().map(|(i, p)| AgentPayment::plain(i, p)).collect(),
    );
    report.measure = Some(measure.name());
    Ok(report.with_efforts(scenario))
}

fn reference_peers(n: usize, i: usize, pairing: Pairing, seed: RngSeed) -> Vec<usize> {
    match pairing {
        Pairing::AllPairs => (0..n).filter(|&j| j != i).collect(),
        Pairing::RandomReference => {
            let mut rng = seed.child((n * n + i) as u64).rng();
            let pick = rng.random_range(0..n - 1);
            vec![if pick >= i { pick + 1 } else { pick }]
        }
    }
}

fn check_agents(reports: &ReportMatrix) -> Result<usize> {
    let n = reports.n_agents();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("mechanisms need at least 2 agents, got {n}")));
    }
    Ok(n)
}

/// Empirical mechanism paying the measure of each agent's empirical joint with her peer.
pub fn empirical_mi_payments(
    reports: &ReportMatrix,
    measure: Measure,
    pairing: Pairing,
    seed: RngSeed,
) -> Result<PaymentReport> {
    let n = check_agents(reports)?;
    let mut agents = Vec::with_capacity(n);
    for i in 0..n {
        let peers = reference_peers(n, i, pairing, seed);
        let mut total = 0.0;
        for &j in &peers {
            let joint = crate::agents::empirical_pair_joint(reports, i, j)?;
            total += measure.mutual_information(&joint)?.value();
        }
        agents.push(AgentPayment::plain(i, total / peers.len() as f64));
    }
    let mut report = PaymentReport::new(
        match measure {
            Measure::F(_) => "fmi",
            Measure::Bregman(_) => "bmi",
        },
        PaymentMode::Empirical,
        agents,
    );
    report.measure = Some(measure.name());
    report.questions = Some(reports.n_questions());
    if pairing == Pairing::RandomReference {
        report.seed = Some(seed.0);
    }
    Ok(report)
}

/// The f-mutual-information mechanism on sampled reports.
pub fn fmi_mechanism_payments(
    reports: &ReportMatrix,
    f: ConvexGenerator,
    pairing: Pairing,
    seed: RngSeed,
) -> Result<PaymentReport> {
    empirical_mi_payments(reports, Measure::F(f), pairing, seed)
}

/// The Bregman-mutual-information mechanism on sampled reports.
pub fn bmi_mechanism_payments(
    reports: &ReportMatrix,
    rule: ScoringRule,
    pairing: Pairing,
    seed: RngSeed,
) -> Result<PaymentReport> {
    empirical_mi_payments(reports, Measure::Bregman(rule), pairing, seed)
}

/// Draws `d` distinct elements of `pool` avoiding `exclude`, given that enough exist.
fn draw_distinct<R: Rng + ?Sized>(
    rng: &mut R,
    pool: &[usize],
    d: usize,
    exclude: &dyn Fn(usize) -> bool,
) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::with_capacity(d);
    while chosen.len() < d {
        let q = pool[rng.random_range(0..pool.len())];
        if !exclude(q) && !chosen.contains(&q) {
            chosen.push(q);
        }
    }
    chosen
}

/// Disjoint `A ⊆ C_i∖{k}`, `B ⊆ C_j∖({k} ∪ A)` of size `d`, or `None` if none exist.
///
/// `A` is uniform among the choices that leave room for `B`, and `B` is uniform given `A`.
#[allow(clippy::too_many_arguments)]
fn sample_disjoint_subsets<R: Rng + ?Sized>(
    rng: &mut R,
    ci: &[usize],
    cj: &[usize],
    in_ci: &[bool],
    in_cj: &[bool],
    i_only: usize,
    k: usize,
    d: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let x = ci.len() - usize::from(in_ci[k]);
    let y = cj.len() - usize::from(in_cj[k]);
    let x_only = i_only - usize::from(in_ci[k] && !in_cj[k]);
    if d == 0 || x < d || y.saturating_sub(d.saturating_sub(x_only)) < d {
        return None;
    }
    let room_for_b = |a: &[usize]| y - a.iter().filter(|&&q| in_cj[q]).count() >= d;
    let mut a = None;
    for _ in 0..64 {
        let candidate = draw_distinct(rng, ci, d, &|q| q == k);
        if room_for_b(&candidate) {
            a = Some(candidate);
            break;
        }
    }
    let a = a.unwrap_or_else(|| {
        let mut only: Vec<usize> = ci.iter().copied().filter(|&q| q != k && !in_cj[q]).collect();
        let mut both: Vec<usize> = ci.iter().copied().filter(|&q| q != k && in_cj[q]).collect();
        only.shuffle(rng);
        both.shuffle(rng);
        let take = d.min(only.len());
        only.truncate(take);
        only.extend(both.into_iter().take(d - take));
        only
    });
    let b = draw_distinct(rng, cj, d, &|q| q == k || a.contains(&q));
    Some((a, b))
}

struct PairPools {
    ci: Vec<usize>,
    cj: Vec<usize>,
    in_ci: Vec<bool>,
    in_cj: Vec<bool>,
    i_only: usize,
    shared: Vec<usize>,
}

impl PairPools {
    fn new(reports: &ReportMatrix, i: usize, j: usize) -> Result<Self> {
        let t = reports.n_questions();
        let in_ci: Vec<bool> = (0..t).map(|k| reports.answered(i, k)).collect();
        let in_cj: Vec<bool> = (0..t).map(|k| reports.answered(j, k)).collect();
        let shared: Vec<usize> = (0..t).filter(|&k| in_ci[k] && in_cj[k]).collect();
        if shared.is_empty() {
            return Err(Error::NoOverlap { i, j });
        }
        Ok(PairPools {
            ci: (0..t).filter(|&k| in_ci[k]).collect(),
            cj: (0..t).filter(|&k| in_cj[k]).collect(),
            i_only: (0..t).filter(|&k| in_ci[k] && !in_cj[k]).count(),
            in_ci,
            in_cj,
            shared,
        })
    }
}

fn pair_seed(seed: RngSeed, n: usize, i: usize, j: usize) -> RngSeed {
    seed.child((i * n + j) as u64)
}

/// Per-question rewards of `M_d` for agent `i` against peer `j`, over their shared questions.
pub fn md_rewards(reports: &ReportMatrix, i: usize, j: usize, d: usize, seed: RngSeed) -> Result<Vec<f64>> {
    if reports.alphabet_size() != 2 {
        return Err(Error::NonBinaryAlphabet(reports.alphabet_size()));
    }
    let n = reports.n_agents();
    let pools = PairPools::new(reports, i, j)?;
    let mut rng = pair_seed(seed, n, i, j).rng();
    let value = |agent: usize, q: usize| reports.get(agent, q).expect("pool holds answered questions") as f64;
    let agree = |a: f64, b: f64| a * b + (1.0 - a) * (1.0 - b);
    Ok(pools
        .shared
        .iter()
        .map(|&k| {
            match sample_disjoint_subsets(
                &mut rng,
                &pools.ci,
                &pools.cj,
                &pools.in_ci,
                &pools.in_cj,
                pools.i_only,
                k,
                d,
            ) {
                None => 0.0,
                Some((a, b)) => {
                    let abar = a.iter().map(|&q| value(i, q)).sum::<f64>() / d as f64;
                    let bbar = b.iter().map(|&q| value(j, q)).sum::<f64>() / d as f64;
                    agree(value(i, k), value(j, k)) - agree(abar, bbar)
                }
            }
        })
        .collect())
}

/// Per-question rewards of the correlated-agreement mechanism for agent `i` against peer `j`.
pub fn ca_rewards(reports: &ReportMatrix, i: usize, j: usize, d: usize, seed: RngSeed) -> Result<Vec<f64>> {
    let n = reports.n_agents();
    let pools = PairPools::new(reports, i, j)?;
    let mut rng = pair_seed(seed, n, i, j).rng();
    Ok(pools
        .shared
        .iter()
        .map(|&k| {
            match sample_disjoint_subsets(
                &mut rng,
                &pools.ci,
                &pools.cj,
                &pools.in_ci,
                &pools.in_cj,
                pools.i_only,
                k,
                d,
            ) {
                None => 0.0,
                Some((a, b)) => {
                    let la = a[rng.random_range(0..a.len())];
                    let lb = b[rng.random_range(0..b.len())];
                    let hit = |x: Option<usize>, y: Option<usize>| f64::from(u8::from(x == y));
                    hit(reports.get(i, k), reports.get(j, k)) - hit(reports.get(i, la), reports.get(j, lb))
                }
            }
        })
        .collect())
}

fn subset_mechanism_payments(
    name: &str,
    reports: &ReportMatrix,
    d: usize,
    pairing: Pairing,
    seed: RngSeed,
    rewards: fn(&ReportMatrix, usize, usize, usize, RngSeed) -> Result<Vec<f64>>,
) -> Result<PaymentReport> {
    let n = check_agents(reports)?;
    let mut agents = Vec::with_capacity(n);
    for i in 0..n {
        let peers = reference_peers(n, i, pairing, seed);
        let mut total = 0.0;
        for &j in &peers {
            let r = rewards(reports, i, j, d, seed)?;
            total += r.iter().sum::<f64>() / r.len() as f64;
        }
        agents.push(AgentPayment::plain(i, total / peers.len() as f64));
    }
    let mut report = PaymentReport::new(name, PaymentMode::Empirical, agents);
    report.questions = Some(reports.n_questions());
    report.seed = Some(seed.0);
    Ok(report)
}

/// Dasgupta–Ghosh `M_d` on binary reports, averaging the per-question reward.
pub fn md_payments(reports: &ReportMatrix, d: usize, pairing: Pairing, seed: RngSeed) -> Result<PaymentReport> {
    if reports.alphabet_size() != 2 {
        return Err(Error::NonBinaryAlphabet(reports.alphabet_size()));
    }
    subset_mechanism_payments("md", reports, d, pairing, seed, md_rewards)
}

/// Correlated agreement on any alphabet.
pub fn ca_payments(reports: &ReportMatrix, d: usize, pairing: Pairing, seed: RngSeed) -> Result<PaymentReport> {
    subset_mechanism_payments("ca", reports, d, pairing, seed, ca_rewards)
}

/// `Σ_σ (Pr[σ,σ] - Pr[σ] Pr[σ])`, the expected `M_d` reward for any `d`.
pub fn md_expected_reward(joint: &JointDistribution) -> Result<f64> {
    let (rows, cols) = joint.dims()?;
    if rows != cols {
        return Err(Error::DimensionMismatch {
            context: "agreement reward needs a square joint",
            expected: rows,
            found: cols,
        });
    }
    let (p, q) = joint.marginals()?;
    Ok((0..rows).map(|s| joint.get(s, s) - p.get(s) * q.get(s)).sum())
}

/// Expected correlated-agreement reward: probability of agreeing on a shared
/// question minus probability of agreeing across independent questions.
pub fn ca_expected_reward(joint: &JointDistribution) -> Result<f64> {
    md_expected_reward(joint)
}

fn agreement_expected_payments(name: &str, scenario: &Scenario) -> Result<PaymentReport> {
    let n = scenario.n_agents();
    let joints = scenario.report_joints()?;
    let payments = average_over_peers(n, |i, j| md_expected_reward(pair_joint_at(&joints, n, i, j)))?;
    Ok(PaymentReport::new(
        name,
        PaymentMode::Exact,
        payments.into_iter().enumerate().map(|(i, p)| AgentPayment::plain(i, p)).collect(),
    )
    .with_efforts(scenario))
}

/// Exact expected `M_d` payments for a binary scenario.
pub fn md_expected_payments(scenario: &Scenario) -> Result<PaymentReport> {
    if scenario.alphabet_size() != 2 {
        return Err(Error::NonBinaryAlphabet(scenario.alphabet_size()));
    }
    agreement_expected_payments("md", scenario)
}

/// Exact expected correlated-agreement payments.
pub fn ca_expected_payments(scenario: &Scenario) -> Result<PaymentReport> {
    agreement_expected_payments("ca", scenario)
}

/// `q = Pr[Ψ_j]` and `q_σ = Pr[Ψ_j | Ψ_i = σ]` from the known prior; a
/// zero-probability `σ` gets the uninformative posterior `q`.
fn prior_posteriors(known_prior: &JointDistribution) -> Result<(Distribution, Vec<Vec<f64>>)> {
    let (rows, cols) = known_prior.dims()?;
    let (px, q) = known_prior.marginals()?;
    let posts = (0..rows)
        .map(|x| {
            if px.get(x) > 0.0 {
                (0..cols).map(|y| known_prior.get(x, y) / px.get(x)).collect()
            } else {
                q.weights().to_vec()
            }
        })
        .collect();
    Ok((q, posts))
}

/// Shifted peer prediction: `PS(σ̂_j, q_{σ̂_i}) - PS(σ̂_j, q)` averaged over peers.
pub fn sppm_payments(signals: &[usize], known_prior: &JointDistribution, rule: ScoringRule) -> Result<PaymentReport> {
    let n = signals.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("mechanisms need at least 2 agents, got {n}")));
    }
    let (q, posts) = prior_posteriors(known_prior)?;
    for &s in signals {
        if s >= posts.len() {
            return Err(Error::IndexOutOfRange { index: s, size: posts.len() });
        }
    }
    let payments = average_over_peers(n, |i, j| {
        Ok(rule.score(signals[j], &posts[signals[i]])? - rule.score(signals[j], q.weights())?)
    })?;
    let mut report = PaymentReport::new(
        "sppm",
        PaymentMode::Empirical,
        payments.into_iter().enumerate().map(|(i, p)| AgentPayment::plain(i, p)).collect(),
    );
    report.measure = Some(rule.name().to_string());
    Ok(report)
}

/// Expected shifted-peer-prediction payment when reports follow `report_joint`.
pub fn sppm_expected_payment(
    report_joint: &JointDistribution,
    known_prior: &JointDistribution,
    rule: ScoringRule,
) -> Result<f64> {
    let (q, posts) = prior_posteriors(known_prior)?;
    let (rows, cols) = report_joint.dims()?;
    let mut total = 0.0;
    for (a, post) in posts.iter().enumerate().take(rows) {
        for b in 0..cols {
            let w = report_joint.get(a, b);
            if w > 0.0 {
                total += w * (rule.score(b, post)? - rule.score(b, q.weights())?);
            }
        }
    }
    Ok(total)
}

/// Exact expected shifted-peer-prediction payments; the mechanism knows `known_prior`.
pub fn sppm_expected_payments(
    scenario: &Scenario,
    known_prior: &JointDistribution,
    rule: ScoringRule,
) -> Result<PaymentReport> {
    let n = scenario.n_agents();
    let joints = scenario.report_joints()?;
    let payments =
        average_over_peers(n, |i, j| sppm_expected_payment(pair_joint_at(&joints, n, i, j), known_prior, rule))?;
    let mut report = PaymentReport::new(
        "sppm",
        PaymentMode::Exact,
        payments.into_iter().enumerate().map(|(i, p)| AgentPayment::plain(i, p)).collect(),
    );
    report.measure = Some(rule.name().to_string());
    Ok(report.with_efforts(scenario))
}

/// One agent's BTS report: her signal and her forecast of a peer's signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtsReport {
    pub signal: usize,
    pub prediction: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtsReportProfile {
    pub alphabet_size: usize,
    pub reports: Vec<BtsReport>,
}

impl BtsReportProfile {
    pub fn new(alphabet_size: usize, reports: Vec<BtsReport>) -> Result<Self> {
        let p = BtsReportProfile { alphabet_size, reports };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.reports {
            if r.signal >= self.alphabet_size {
                return Err(Error::IndexOutOfRange { index: r.signal, size: self.alphabet_size });
            }
            if r.prediction.len() != self.alphabet_size {
                return Err(Error::DimensionMismatch {
                    context: "BTS prediction alphabet",
                    expected: self.alphabet_size,
                    found: r.prediction.len(),
                });
            }
        }
        Ok(())
    }
}

/// Parameters of a finite-population BTS run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtsOptions {
    pub alpha: f64,
    pub pairing: Pairing,
    pub seed: RngSeed,
    /// Additive smoothing of the realized frequencies; `None` surfaces zero frequencies as errors.
    pub smoothing: Option<f64>,
}

impl BtsOptions {
    pub fn new(alpha: f64) -> Self {
        BtsOptions { alpha, pairing: Pairing::AllPairs, seed: RngSeed(0), smoothing: None }
    }
}

/// Finite-population Bayesian Truth Serum.
///
/// Information score `ln fr(σ̂_i | σ̂_{-i}) - ln p̂_j(σ̂_i)`, prediction score
/// `ln p̂_i(σ̂_j) - ln fr(σ̂_j | σ̂_{-j})`, payment prediction + α · information.
pub fn bts_payments(profile: &BtsReportProfile, options: &BtsOptions) -> Result<PaymentReport> {
    profile.validate()?;
    let n = profile.reports.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("BTS needs at least 3 agents, got {n}")));
    }
    let m = profile.alphabet_size;
    if let Some(eps) = options.smoothing {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::InvalidArgument(format!("smoothing must be positive, got {eps}")));
        }
    }
    let mut counts = vec![0usize; m];
    for r in &profile.reports {
        counts[r.signal] += 1;
    }
    // ln fr(σ | reports of everyone except one agent who reported σ)
    let ln_fr_excluding_self: Vec<f64> = (0..m)
        .map(|s| {
            let c = counts[s].saturating_sub(1) as f64;
            match options.smoothing {
                None => (c / (n - 1) as f64).ln(),
                Some(eps) => ((c + eps) / ((n - 1) as f64 + m as f64 * eps)).ln(),
            }
        })
        .collect();
    for (agent, r) in profile.reports.iter().enumerate() {
        if ln_fr_excluding_self[r.signal] == f64::NEG_INFINITY {
            return Err(Error::ZeroFrequency { agent, signal: r.signal });
        }
    }
    let ln_pred: Vec<Vec<f64>> =
        profile.reports.iter().map(|r| r.prediction.weights().iter().map(|p| p.ln()).collect()).collect();
    let finite = |v: f64| if v == f64::NEG_INFINITY { Err(Error::LogOfZero) } else { Ok(v) };

    let mut agents = Vec::with_capacity(n);
    for i in 0..n {
        let si = profile.reports[i].signal;
        let peers = reference_peers(n, i, options.pairing, options.seed);
        let (mut info, mut pred) = (0.0, 0.0);
        for &j in &peers {
            let sj = profile.reports[j].signal;
            info += ln_fr_excluding_self[si] - finite(ln_pred[j][si])?;
            pred += finite(ln_pred[i][sj])? - ln_fr_excluding_self[sj];
        }
        let k = peers.len() as f64;
        let (info, pred) = (info / k, pred / k);
        agents.push(AgentPayment {
            agent: i,
            payment: pred + options.alpha * info,
            information_score: Some(info),
            prediction_score: Some(pred),
            effort_cost: None,
            utility: None,
        });
    }
    let mut report = PaymentReport::new("bts", PaymentMode::Empirical, agents);
    report.alpha = Some(options.alpha);
    if options.pairing == Pairing::RandomReference {
        report.seed = Some(options.seed.0);
    }
    if options.alpha <= 1.0 {
        report.warnings.push(format!("alpha = {} <= 1: truth-telling is not focal", options.alpha));
    }
    if let Some(eps) = options.smoothing {
        report.warnings.push(format!("frequencies smoothed with epsilon = {eps}"));
    }
    Ok(report)
}

/// Infinite-population BTS scores averaged over agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealizedScores {
    /// `MI(Ŵ; Ψ̂ | Ψ_j)` under the chosen measure.
    pub information: f64,
    /// Expected log-accuracy gain of an optimal prediction, computed directly.
    pub prediction: f64,
}

/// Idealized BTS scores for a world-model prior under the given report channels,
/// assuming every agent reports her Bayesian-optimal prediction.
pub fn bts_idealized_scores(
    prior: &crate::agents::Prior,
    channels: &[TransitionMatrix],
    measure: Measure,
) -> Result<IdealizedScores> {
    let wt = world_tensor(prior, channels)?;
    let information = conditional_mi(&wt.tensor, measure)?.value();

    // E[ln Pr[Ψ̂ = y | Ψ_j = z] - ln ω̂(y)] over the tensor's atoms
    let t = &wt.tensor;
    let (mz, k, my) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    let mut prediction = 0.0;
    for z in 0..mz {
        let mass_z: f64 = (0..k).flat_map(|x| (0..my).map(move |y| (x, y))).map(|(x, y)| t.get3(z, x, y)).sum();
        if mass_z <= 0.0 {
            continue;
        }
        for y in 0..my {
            let pyz = (0..k).map(|x| t.get3(z, x, y)).sum::<f64>() / mass_z;
            for x in 0..k {
                let w = t.get3(z, x, y);
                if w > 0.0 {
                    prediction += w * (pyz.ln() - wt.class_states[x].get(y).ln());
                }
            }
        }
    }
    Ok(IdealizedScores { information, prediction })
}

/// Idealized BTS payments `prediction + α · information` for every agent of a world-model scenario.
pub fn bts_expected_payments(scenario: &Scenario, alpha: f64, measure: Measure) -> Result<PaymentReport> {
    let scores = bts_idealized_scores(&scenario.prior, &scenario.channels()?, measure)?;
    let agents = (0..scenario.n_agents())
        .map(|i| AgentPayment {
            agent: i,
            payment: scores.prediction + alpha * scores.information,
            information_score: Some(scores.information),
            prediction_score: Some(scores.prediction),
            effort_cost: None,
            utility: None,
        })
        .collect();
    let mut report = PaymentReport::new("bts", PaymentMode::Exact, agents);
    report.measure = Some(measure.name());
    report.alpha = Some(alpha);
    if alpha <= 1.0 {
        report.warnings.push(format!("alpha = {alpha} <= 1: truth-telling is not focal"));
    }
    Ok(report.with_efforts(scenario))
}
