//! Agent models: priors, report strategies, effort, permutation lists and scenarios.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{draw, Distribution, JointDistribution, RngSeed, TransitionMatrix};
use crate::random::{random_channel, StrategyKind};

/// Largest agent count accepted for a full-joint prior.
pub const MAX_FULL_JOINT_AGENTS: usize = 6;

/// Joint distribution of all `n` agents' signals, one axis per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FullJointRepr", into = "FullJointRepr")]
pub struct FullJoint {
    agents: usize,
    alphabet: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FullJointRepr {
    agents: usize,
    alphabet_size: usize,
    data: Vec<f64>,
}

impl TryFrom<FullJointRepr> for FullJoint {
    type Error = Error;

    fn try_from(r: FullJointRepr) -> Result<Self> {
        FullJoint::new(r.agents, r.alphabet_size, r.data)
    }
}

impl From<FullJoint> for FullJointRepr {
    fn from(f: FullJoint) -> Self {
        FullJointRepr { agents: f.agents, alphabet_size: f.alphabet, data: f.data }
    }
}

impl FullJoint {
    /// `data` is indexed with agent 0 as the most significant digit.
    pub fn new(agents: usize, alphabet: usize, data: Vec<f64>) -> Result<Self> {
        if !(2..=MAX_FULL_JOINT_AGENTS).contains(&agents) {
            return Err(Error::InvalidArgument(format!(
                "full-joint priors support 2 to {MAX_FULL_JOINT_AGENTS} agents, got {agents}"
            )));
        }
        let expected = alphabet.pow(agents as u32);
        if data.len() != expected {
            return Err(Error::DimensionMismatch { context: "full joint data", expected, found: data.len() });
        }
        Distribution::from_probabilities(data.clone())?;
        Ok(Self { agents, alphabet, data })
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn digit(&self, index: usize, agent: usize) -> usize {
        (index / self.alphabet.pow((self.agents - 1 - agent) as u32)) % self.alphabet
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        (0..self.agents).map(|a| self.digit(index, a)).collect()
    }

    fn encode(&self, signals: &[usize]) -> usize {
        signals.iter().fold(0, |acc, &s| acc * self.alphabet + s)
    }

    pub fn pair_marginal(&self, i: usize, j: usize) -> JointDistribution {
        let m = self.alphabet;
        let mut out = vec![0.0; m * m];
        for (index, &p) in self.data.iter().enumerate() {
            if p != 0.0 {
                out[self.digit(index, i) * m + self.digit(index, j)] += p;
            }
        }
        JointDistribution::from_raw(vec![m, m], out)
    }

    /// Relabels axis `k` by `perms[k]`.
    fn relabel(&self, perms: &PermutationList) -> FullJoint {
        let mut out = vec![0.0; self.data.len()];
        for (index, &p) in self.data.iter().enumerate() {
            let moved: Vec<usize> = self.decode(index).into_iter().enumerate().map(|(k, s)| perms.get(k)[s]).collect();
            out[self.encode(&moved)] = p;
        }
        FullJoint { agents: self.agents, alphabet: self.alphabet, data: out }
    }
}

/// Conditionally iid signals: a world state is drawn, then each agent's signal
/// is drawn independently from that state's distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WorldModelRepr", into = "WorldModelRepr")]
pub struct WorldModel {
    weights: Distribution,
    states: Vec<Distribution>,
}

#[derive(Serialize, Deserialize)]
struct WorldModelRepr {
    weights: Distribution,
    states: Vec<Distribution>,
}

impl TryFrom<WorldModelRepr> for WorldModel {
    type Error = Error;

    fn try_from(r: WorldModelRepr) -> Result<Self> {
        WorldModel::new(r.weights, r.states)
    }
}

impl From<WorldModel> for WorldModelRepr {
    fn from(w: WorldModel) -> Self {
        WorldModelRepr { weights: w.weights, states: w.states }
    }
}

impl WorldModel {
    pub fn new(weights: Distribution, states: Vec<Distribution>) -> Result<Self> {
        if states.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                context: "world states",
                expected: weights.len(),
                found: states.len(),
            });
        }
        let m = states[0].len();
        if let Some(bad) = states.iter().find(|s| s.len() != m) {
            return Err(Error::DimensionMismatch { context: "world state alphabet", expected: m, found: bad.len() });
        }
        Ok(Self { weights, states })
    }

    pub fn weights(&self) -> &Distribution {
        &self.weights
    }

    pub fn states(&self) -> &[Distribution] {
        &self.states
    }

    pub fn alphabet_size(&self) -> usize {
        self.states[0].len()
    }

    /// Joint of two distinct agents' signals: `Σ_w P(w) ω_w ⊗ ω_w`.
    pub fn pair_joint(&self) -> JointDistribution {
        let m = self.alphabet_size();
        let mut out = vec![0.0; m * m];
        for (w, state) in self.weights.weights().iter().zip(&self.states) {
            for x in 0..m {
                for y in 0..m {
                    out[x * m + y] += w * state.get(x) * state.get(y);
                }
            }
        }
        JointDistribution::from_raw(vec![m, m], out)
    }
}

/// Pair joint `Q(Ψ_i, Ψ_j)` for one unordered pair `i < j` of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairJoint {
    pub i: usize,
    pub j: usize,
    pub joint: JointDistribution,
}

/// The agents' common belief about how signals are generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Prior {
    /// One joint `Q(Ψ_i, Ψ_j)` for every pair `i < j`; the pair `j > i` sees its transpose.
    Pairwise {
        joint: JointDistribution,
        #[serde(default)]
        symmetric: bool,
    },
    /// A separate joint for each pair `i < j` of a fixed agent set.
    PairwiseProfile {
        agents: usize,
        pairs: Vec<PairJoint>,
    },
    FullJoint(FullJoint),
    WorldModel(WorldModel),
}

impl Prior {
    pub fn pairwise(joint: JointDistribution) -> Result<Prior> {
        let (rows, cols) = joint.dims()?;
        if rows != cols {
            return Err(Error::DimensionMismatch {
                context: "pairwise prior must be square",
                expected: rows,
                found: cols,
            });
        }
        Ok(Prior::Pairwise { joint, symmetric: false })
    }

    /// A pairwise prior asserted symmetric under transpose.
    pub fn symmetric(joint: JointDistribution) -> Result<Prior> {
        let t = joint.transpose()?;
        if joint.max_abs_diff(&t)? > 1e-12 {
            return Err(Error::InvalidArgument("joint is not symmetric".into()));
        }
        match Prior::pairwise(joint)? {
            Prior::Pairwise { joint, .. } => Ok(Prior::Pairwise { joint, symmetric: true }),
            _ => unreachable!("pairwise constructor returns the pairwise mode"),
        }
    }

    pub fn world(weights: Distribution, states: Vec<Distribution>) -> Result<Prior> {
        Ok(Prior::WorldModel(WorldModel::new(weights, states)?))
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            Prior::Pairwise { joint, .. } => joint.shape()[0],
            Prior::PairwiseProfile { pairs, .. } => pairs[0].joint.shape()[0],
            Prior::FullJoint(f) => f.alphabet_size(),
            Prior::WorldModel(w) => w.alphabet_size(),
        }
    }

    /// The number of agents the prior is tied to, if any.
    pub fn fixed_agents(&self) -> Option<usize> {
        match self {
            Prior::PairwiseProfile { agents, .. } => Some(*agents),
            Prior::FullJoint(f) => Some(f.agents()),
            Prior::Pairwise { .. } | Prior::WorldModel(_) => None,
        }
    }

    pub fn mode_name(&self) -> &'static str {
        match self {
            Prior::Pairwise { .. } => "pairwise",
            Prior::PairwiseProfile { .. } => "pairwise_profile",
            Prior::FullJoint(_) => "full_joint",
            Prior::WorldModel(_) => "world_model",
        }
    }

    /// Checks internal consistency for a population of `n` agents.
    pub fn validate(&self, n: usize) -> Result<()> {
        if let Some(fixed) = self.fixed_agents() {
            if fixed != n {
                return Err(Error::DimensionMismatch { context: "prior agent count", expected: fixed, found: n });
            }
        }
        match self {
            Prior::Pairwise { joint, symmetric } => {
                let (rows, cols) = joint.dims()?;
                if rows != cols {
                    return Err(Error::DimensionMismatch {
                        context: "pairwise prior must be square",
                        expected: rows,
                        found: cols,
                    });
                }
                if *symmetric && joint.max_abs_diff(&joint.transpose()?)? > 1e-12 {
                    return Err(Error::InvalidArgument("prior flagged symmetric is not".into()));
                }
            }
            Prior::PairwiseProfile { agents, pairs } => {
                let m = self.alphabet_size();
                let mut seen = vec![false; agents * agents];
                for p in pairs {
                    if p.i >= p.j || p.j >= *agents {
                        return Err(Error::InvalidArgument(format!("bad pair ({}, {})", p.i, p.j)));
                    }
                    if p.joint.dims()? != (m, m) {
                        return Err(Error::DimensionMismatch {
                            context: "pair joint alphabet",
                            expected: m,
                            found: p.joint.shape()[0],
                        });
                    }
                    seen[p.i * agents + p.j] = true;
                }
                for i in 0..*agents {
                    for j in i + 1..*agents {
                        if !seen[i * agents + j] {
                            return Err(Error::InvalidArgument(format!("missing pair ({i}, {j})")));
                        }
                    }
                }
            }
            Prior::FullJoint(_) | Prior::WorldModel(_) => {}
        }
        Ok(())
    }

    /// Joint of the true signals `(Ψ_i, Ψ_j)` for distinct agents.
    pub fn pair_joint(&self, i: usize, j: usize) -> Result<JointDistribution> {
        if i == j {
            return Err(Error::InvalidArgument(format!("pair joint needs distinct agents, got {i} twice")));
        }
        match self {
            Prior::Pairwise { joint, .. } => {
                if i < j {
                    Ok(joint.clone())
                } else {
                    joint.transpose()
                }
            }
            Prior::PairwiseProfile { pairs, agents } => {
                let (a, b) = (i.min(j), i.max(j));
                let entry = pairs
                    .iter()
                    .find(|p| p.i == a && p.j == b)
                    .ok_or(Error::IndexOutOfRange { index: b, size: *agents })?;
                if i < j {
                    Ok(entry.joint.clone())
                } else {
                    entry.joint.transpose()
                }
            }
            Prior::FullJoint(f) => {
                if i.max(j) >= f.agents() {
                    return Err(Error::IndexOutOfRange { index: i.max(j), size: f.agents() });
                }
                Ok(f.pair_marginal(i, j))
            }
            Prior::WorldModel(w) => Ok(w.pair_joint()),
        }
    }

    pub fn world_model(&self) -> Result<&WorldModel> {
        match self {
            Prior::WorldModel(w) => Ok(w),
            other => {
                Err(Error::ModeMismatch(format!("operation needs a world-model prior, got {}", other.mode_name())))
            }
        }
    }
}

/// How an agent maps her private signal to a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyRule {
    /// A fixed channel `s[σ][σ̂]`, independent of the prior.
    Channel { matrix: TransitionMatrix },
    /// Reports a draw from the posterior over the next agent's signal.
    PeerPosterior,
    /// `π(s)(σ, Q) = s(π_i(σ), π(Q))` for the wrapped rule `s`.
    Permuted { perms: PermutationList, inner: Box<StrategyRule> },
}

impl StrategyRule {
    /// The channel this rule induces for `agent` of `n` under `prior`.
    pub fn resolve(&self, prior: &Prior, agent: usize, n: usize) -> Result<TransitionMatrix> {
        match self {
            StrategyRule::Channel { matrix } => Ok(matrix.clone()),
            StrategyRule::PeerPosterior => {
                let peer = (agent + 1) % n;
                let joint = prior.pair_joint(agent, peer)?;
                let (rows, cols) = joint.dims()?;
                let (_, peer_marginal) = joint.marginals()?;
                let mut data = Vec::with_capacity(rows * cols);
                for x in 0..rows {
                    let mass: f64 = (0..cols).map(|y| joint.get(x, y)).sum();
                    if mass > 0.0 {
                        data.extend((0..cols).map(|y| joint.get(x, y) / mass));
                    } else {
                        data.extend_from_slice(peer_marginal.weights());
                    }
                }
                Ok(TransitionMatrix::from_parts(rows, cols, data))
            }
            StrategyRule::Permuted { perms, inner } => {
                let relabeled = perms.apply_prior(prior)?;
                perms.matrix(agent)?.then(&inner.resolve(&relabeled, agent, n)?)
            }
        }
    }
}

/// A report strategy with a human-readable label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    #[serde(default)]
    pub label: String,
    #[serde(flatten)]
    pub rule: StrategyRule,
}

impl Strategy {
    pub fn from_channel(label: impl Into<String>, matrix: TransitionMatrix) -> Strategy {
        Strategy { label: label.into(), rule: StrategyRule::Channel { matrix } }
    }

    pub fn new(rows: Vec<Vec<f64>>) -> Result<Strategy> {
        let matrix = TransitionMatrix::new(rows)?;
        if matrix.rows() != matrix.cols() {
            return Err(Error::DimensionMismatch {
                context: "strategy must be square",
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        Ok(Strategy::from_channel("custom", matrix))
    }

    pub fn truthful(m: usize) -> Strategy {
        Strategy::from_channel("truthful", TransitionMatrix::identity(m))
    }

    pub fn permutation(perm: &[usize]) -> Result<Strategy> {
        Ok(Strategy::from_channel("permutation", TransitionMatrix::permutation(perm)?))
    }

    pub fn constant(m: usize, dist: &Distribution) -> Strategy {
        Strategy::from_channel("constant", TransitionMatrix::constant(m, dist))
    }

    pub fn peer_posterior() -> Strategy {
        Strategy { label: "peer_posterior".into(), rule: StrategyRule::PeerPosterior }
    }

    /// The fixed channel, when the strategy does not depend on the prior.
    pub fn channel(&self) -> Option<&TransitionMatrix> {
        match &self.rule {
            StrategyRule::Channel { matrix } => Some(matrix),
            _ => None,
        }
    }

    pub fn is_truthful(&self) -> bool {
        self.channel().is_some_and(TransitionMatrix::is_identity)
    }

    pub fn resolve(&self, prior: &Prior, agent: usize, n: usize) -> Result<TransitionMatrix> {
        self.rule.resolve(prior, agent, n)
    }
}

/// Draws a square strategy of the requested kind.
pub fn random_strategy(seed: RngSeed, m: usize, kind: StrategyKind) -> Strategy {
    let mut rng = seed.rng();
    random_strategy_with(&mut rng, m, kind)
}

pub fn random_strategy_with<R: Rng + ?Sized>(rng: &mut R, m: usize, kind: StrategyKind) -> Strategy {
    let label = match kind {
        StrategyKind::Dense => "dense",
        StrategyKind::Sparse => "sparse",
        StrategyKind::Permutation => "permutation",
        StrategyKind::Constant => "constant",
    };
    Strategy::from_channel(label, random_channel(rng, m, m, kind))
}

/// Zero-one effort: with probability `lambda` the agent pays `cost` and
/// observes her signal, otherwise she reports a draw from `no_effort_report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffortStrategy {
    pub lambda: f64,
    pub cost: f64,
    pub no_effort_report: Distribution,
}

impl EffortStrategy {
    pub fn new(lambda: f64, cost: f64, no_effort_report: Distribution) -> Result<Self> {
        let e = EffortStrategy { lambda, cost, no_effort_report };
        e.validate()?;
        Ok(e)
    }

    /// Full effort at the given cost with a uniform no-effort report.
    pub fn full(m: usize, cost: f64) -> Result<Self> {
        EffortStrategy::new(1.0, cost, Distribution::uniform(m)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidArgument(format!("effort lambda {} outside [0, 1]", self.lambda)));
        }
        if !self.cost.is_finite() || self.cost < 0.0 {
            return Err(Error::InvalidArgument(format!("effort cost {} must be finite and non-negative", self.cost)));
        }
        Ok(())
    }

    pub fn expected_cost(&self) -> f64 {
        self.lambda * self.cost
    }
}

/// One permutation of the alphabet per agent; `perms[i][σ] = π_i(σ)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct PermutationList {
    perms: Vec<Vec<usize>>,
}

impl TryFrom<Vec<Vec<usize>>> for PermutationList {
    type Error = Error;

    fn try_from(perms: Vec<Vec<usize>>) -> Result<Self> {
        PermutationList::new(perms)
    }
}

impl From<PermutationList> for Vec<Vec<usize>> {
    fn from(p: PermutationList) -> Self {
        p.perms
    }
}

impl PermutationList {
    pub fn new(perms: Vec<Vec<usize>>) -> Result<Self> {
        let m = perms.first().map(Vec::len).ok_or(Error::EmptyAlphabet)?;
        for p in &perms {
            if p.len() != m {
                return Err(Error::DimensionMismatch {
                    context: "permutation list alphabet",
                    expected: m,
                    found: p.len(),
                });
            }
            TransitionMatrix::permutation(p)?;
        }
        Ok(Self { perms })
    }

    pub fn identity(n: usize, m: usize) -> Self {
        Self { perms: vec![(0..m).collect(); n] }
    }

    /// The same permutation for all `n` agents.
    pub fn symmetric(n: usize, perm: Vec<usize>) -> Result<Self> {
        PermutationList::new(vec![perm; n])
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.perms[0].len()
    }

    pub fn get(&self, agent: usize) -> &[usize] {
        &self.perms[agent]
    }

    pub fn matrix(&self, agent: usize) -> Result<TransitionMatrix> {
        let p = self.perms.get(agent).ok_or(Error::IndexOutOfRange { index: agent, size: self.perms.len() })?;
        TransitionMatrix::permutation(p)
    }

    pub fn is_symmetric(&self) -> bool {
        self.perms.windows(2).all(|w| w[0] == w[1])
    }

    pub fn is_identity(&self) -> bool {
        self.perms.iter().all(|p| p.iter().enumerate().all(|(i, &v)| i == v))
    }

    pub fn inverse(&self) -> PermutationList {
        let perms = self
            .perms
            .iter()
            .map(|p| {
                let mut inv = vec![0; p.len()];
                for (i, &v) in p.iter().enumerate() {
                    inv[v] = i;
                }
                inv
            })
            .collect();
        PermutationList { perms }
    }

    /// `π(Q)(σ_1, …, σ_n) = Q(π_1⁻¹(σ_1), …, π_n⁻¹(σ_n))`.
    ///
    /// Relabeling a pairwise prior by distinct permutations yields a per-pair
    /// profile; a profile whose pairs all coincide collapses back to a pairwise prior.
    pub fn apply_prior(&self, prior: &Prior) -> Result<Prior> {
        let m = prior.alphabet_size();
        if self.alphabet_size() != m {
            return Err(Error::DimensionMismatch {
                context: "permutation alphabet",
                expected: m,
                found: self.alphabet_size(),
            });
        }
        if let Some(fixed) = prior.fixed_agents() {
            if fixed != self.len() {
                return Err(Error::DimensionMismatch {
                    context: "permutation list length",
                    expected: fixed,
                    found: self.len(),
                });
            }
        }
        let relabel_pair = |i: usize, j: usize, joint: &JointDistribution| -> Result<JointDistribution> {
            joint.push_first(&self.matrix(i)?)?.push_second(&self.matrix(j)?)
        };
        match prior {
            Prior::Pairwise { joint, symmetric } if self.is_symmetric() => {
                Ok(Prior::Pairwise { joint: relabel_pair(0, 0, joint)?, symmetric: *symmetric })
            }
            Prior::Pairwise { .. } | Prior::PairwiseProfile { .. } => {
                let n = self.len();
                let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
                for i in 0..n {
                    for j in i + 1..n {
                        pairs.push(PairJoint { i, j, joint: relabel_pair(i, j, &prior.pair_joint(i, j)?)? });
                    }
                }
                if pairs.windows(2).all(|w| w[0].joint == w[1].joint) {
                    let joint = pairs[0].joint.clone();
                    let symmetric = joint.max_abs_diff(&joint.transpose()?)? <= 1e-12;
                    return Ok(Prior::Pairwise { joint, symmetric });
                }
                Ok(Prior::PairwiseProfile { agents: n, pairs })
            }
            Prior::FullJoint(f) => Ok(Prior::FullJoint(f.relabel(self))),
            Prior::WorldModel(w) => {
                if !self.is_symmetric() {
                    return Err(Error::InvalidArgument(
                        "world-model priors can only be relabeled by a symmetric permutation list".into(),
                    ));
                }
                let p = self.matrix(0)?;
                let states = w.states().iter().map(|s| s.apply_channel(&p)).collect::<Result<_>>()?;
                Ok(Prior::WorldModel(WorldModel::new(w.weights().clone(), states)?))
            }
        }
    }
}

/// A population of agents: prior, strategies and optional effort choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub prior: Prior,
    pub strategies: Vec<Strategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub efforts: Option<Vec<EffortStrategy>>,
}

impl Scenario {
    pub fn new(prior: Prior, strategies: Vec<Strategy>, efforts: Option<Vec<EffortStrategy>>) -> Result<Self> {
        let s = Scenario { prior, strategies, efforts };
        s.validate()?;
        Ok(s)
    }

    /// Everyone truthful with full effort.
    pub fn truthful(prior: Prior, n: usize) -> Result<Self> {
        let m = prior.alphabet_size();
        Scenario::new(prior, vec![Strategy::truthful(m); n], None)
    }

    pub fn n_agents(&self) -> usize {
        self.strategies.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.prior.alphabet_size()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_agents();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("a scenario needs at least 2 agents, got {n}")));
        }
        self.prior.validate(n)?;
        let m = self.alphabet_size();
        for s in &self.strategies {
            check_rule_alphabet(&s.rule, m)?;
        }
        if let Some(efforts) = &self.efforts {
            if efforts.len() != n {
                return Err(Error::DimensionMismatch { context: "effort profile", expected: n, found: efforts.len() });
            }
            for e in efforts {
                e.validate()?;
                if e.no_effort_report.len() != m {
                    return Err(Error::DimensionMismatch {
                        context: "no-effort report alphabet",
                        expected: m,
                        found: e.no_effort_report.len(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn effort(&self, agent: usize) -> Option<&EffortStrategy> {
        self.efforts.as_ref().map(|e| &e[agent])
    }

    /// Resolved report channel of every agent.
    pub fn channels(&self) -> Result<Vec<TransitionMatrix>> {
        let n = self.n_agents();
        self.strategies.iter().enumerate().map(|(i, s)| s.resolve(&self.prior, i, n)).collect()
    }

    /// Exact joint of the reports `(Ψ̂_i, Ψ̂_j)`.
    pub fn report_joint(&self, i: usize, j: usize) -> Result<JointDistribution> {
        let n = self.n_agents();
        let si = self.strategies[i].resolve(&self.prior, i, n)?;
        let sj = self.strategies[j].resolve(&self.prior, j, n)?;
        report_joint(&self.prior, i, j, &si, &sj, self.effort(i), self.effort(j))
    }

    /// All ordered report joints, indexed `i * n + j` (`None` on the diagonal).
    pub fn report_joints(&self) -> Result<Vec<Option<JointDistribution>>> {
        let n = self.n_agents();
        let channels = self.channels()?;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(if i == j {
                    None
                } else {
                    Some(report_joint(&self.prior, i, j, &channels[i], &channels[j], self.effort(i), self.effort(j))?)
                });
            }
        }
        Ok(out)
    }

    /// Replaces agent `i`'s strategy.
    pub fn with_strategy(&self, agent: usize, strategy: Strategy) -> Scenario {
        let mut s = self.clone();
        s.strategies[agent] = strategy;
        s
    }

    pub fn with_effort(&self, agent: usize, effort: EffortStrategy) -> Result<Scenario> {
        let mut s = self.clone();
        let m = self.alphabet_size();
        let mut efforts = match s.efforts.take() {
            Some(e) => e,
            None => vec![EffortStrategy::full(m, 0.0)?; self.n_agents()],
        };
        efforts[agent] = effort;
        s.efforts = Some(efforts);
        Ok(s)
    }
}

fn check_rule_alphabet(rule: &StrategyRule, m: usize) -> Result<()> {
    match rule {
        StrategyRule::Channel { matrix } => {
            if matrix.rows() != m || matrix.cols() != m {
                return Err(Error::DimensionMismatch {
                    context: "strategy channel alphabet",
                    expected: m,
                    found: if matrix.rows() != m { matrix.rows() } else { matrix.cols() },
                });
            }
            Ok(())
        }
        StrategyRule::PeerPosterior => Ok(()),
        StrategyRule::Permuted { perms, inner } => {
            if perms.alphabet_size() != m {
                return Err(Error::DimensionMismatch {
                    context: "permuted strategy alphabet",
                    expected: m,
                    found: perms.alphabet_size(),
                });
            }
            check_rule_alphabet(inner, m)
        }
    }
}

/// Exact joint of `(Ψ̂_i, Ψ̂_j)` given resolved channels and effort choices.
///
/// With effort probabilities `λ_i, λ_j` the report joint is the mixture over
/// the two effort coins; a shirking agent's report is independent of everything.
pub fn report_joint(
    prior: &Prior,
    i: usize,
    j: usize,
    s_i: &TransitionMatrix,
    s_j: &TransitionMatrix,
    eff_i: Option<&EffortStrategy>,
    eff_j: Option<&EffortStrategy>,
) -> Result<JointDistribution> {
    let full = prior.pair_joint(i, j)?.push_first(s_i)?.push_second(s_j)?;
    if eff_i.is_none() && eff_j.is_none() {
        return Ok(full);
    }
    let (mi, mj) = full.marginals()?;
    let li = eff_i.map_or(1.0, |e| e.lambda);
    let lj = eff_j.map_or(1.0, |e| e.lambda);
    let xi = eff_i.map_or_else(|| mi.clone(), |e| e.no_effort_report.clone());
    let xj = eff_j.map_or_else(|| mj.clone(), |e| e.no_effort_report.clone());
    for (x, expected) in [(&xi, mi.len()), (&xj, mj.len())] {
        if x.len() != expected {
            return Err(Error::DimensionMismatch { context: "no-effort report alphabet", expected, found: x.len() });
        }
    }
    let terms = [
        (li * lj, full),
        (li * (1.0 - lj), JointDistribution::outer(&mi, &xj)),
        ((1.0 - li) * lj, JointDistribution::outer(&xi, &mj)),
        ((1.0 - li) * (1.0 - lj), JointDistribution::outer(&xi, &xj)),
    ];
    let shape = terms[0].1.shape().to_vec();
    let mut data = vec![0.0; terms[0].1.data().len()];
    for (w, t) in &terms {
        if *w == 0.0 {
            continue;
        }
        for (d, v) in data.iter_mut().zip(t.data()) {
            *d += w * v;
        }
    }
    Ok(JointDistribution::from_raw(shape, data))
}

/// The world-state tensor behind the idealized BTS scores.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldTensor {
    /// `t[z][x][y]`: `z` a peer's true signal, `x` the class of `Ŵ`, `y` a
    /// uniformly random agent's report.
    pub tensor: JointDistribution,
    /// `ω̂ = (1/n) Σ_i M_iᵀ ω` for every world state.
    pub hat_states: Vec<Distribution>,
    /// Class index of each world state; states with equal `ω̂` share a class.
    pub classes: Vec<usize>,
    /// `ω̂` of each class.
    pub class_states: Vec<Distribution>,
}

/// Builds the `(Ψ_j, Ŵ, Ψ̂)` tensor for a world-model prior and report channels.
pub fn world_tensor(prior: &Prior, channels: &[TransitionMatrix]) -> Result<WorldTensor> {
    let world = prior.world_model()?;
    let m = world.alphabet_size();
    if channels.is_empty() {
        return Err(Error::InvalidArgument("world tensor needs at least one agent".into()));
    }
    let n = channels.len() as f64;
    let mut hat_states = Vec::with_capacity(world.states().len());
    for state in world.states() {
        let mut hat = vec![0.0; m];
        for c in channels {
            let pushed = state.apply_channel(c)?;
            for (h, v) in hat.iter_mut().zip(pushed.weights()) {
                *h += v;
            }
        }
        hat.iter_mut().for_each(|h| *h /= n);
        hat_states.push(Distribution::from_raw(hat));
    }

    let mut class_states: Vec<Distribution> = Vec::new();
    let mut classes = Vec::with_capacity(hat_states.len());
    for hat in &hat_states {
        let found = class_states
            .iter()
            .position(|c| c.weights().iter().zip(hat.weights()).all(|(a, b)| (a - b).abs() <= 1e-12));
        classes.push(found.unwrap_or_else(|| {
            class_states.push(hat.clone());
            class_states.len() - 1
        }));
    }

    let k = class_states.len();
    let mut data = vec![0.0; m * k * m];
    for (w, (&pw, state)) in world.weights().weights().iter().zip(world.states()).enumerate() {
        let x = classes[w];
        let hat = &class_states[x];
        for z in 0..m {
            for y in 0..m {
                data[(z * k + x) * m + y] += pw * state.get(z) * hat.get(y);
            }
        }
    }
    Ok(WorldTensor { tensor: JointDistribution::from_raw(vec![m, k, m], data), hat_states, classes, class_states })
}

/// Reports of `n` agents on `T` questions; unanswered cells are masked out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportMatrix {
    alphabet: usize,
    agents: usize,
    questions: usize,
    entries: Vec<usize>,
    mask: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct ReportMatrixRepr {
    alphabet_size: usize,
    reports: Vec<Vec<Option<usize>>>,
}

impl Serialize for ReportMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ReportMatrixRepr {
            alphabet_size: self.alphabet,
            reports: (0..self.agents).map(|i| (0..self.questions).map(|k| self.get(i, k)).collect()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ReportMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let r = ReportMatrixRepr::deserialize(deserializer)?;
        ReportMatrix::with_mask(r.alphabet_size, r.reports).map_err(serde::de::Error::custom)
    }
}

impl ReportMatrix {
    /// Every agent answers every question.
    pub fn full(alphabet: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        ReportMatrix::with_mask(alphabet, rows.into_iter().map(|r| r.into_iter().map(Some).collect()).collect())
    }

    /// `None` marks an unanswered question.
    pub fn with_mask(alphabet: usize, rows: Vec<Vec<Option<usize>>>) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::EmptyAlphabet);
        }
        let agents = rows.len();
        let questions = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(agents * questions);
        let mut mask = Vec::with_capacity(agents * questions);
        for row in rows {
            if row.len() != questions {
                return Err(Error::DimensionMismatch {
                    context: "report row length",
                    expected: questions,
                    found: row.len(),
                });
            }
            for cell in row {
                match cell {
                    Some(s) if s >= alphabet => return Err(Error::IndexOutOfRange { index: s, size: alphabet }),
                    Some(s) => {
                        entries.push(s);
                        mask.push(true);
                    }
                    None => {
                        entries.push(0);
                        mask.push(false);
                    }
                }
            }
        }
        Ok(Self { alphabet, agents, questions, entries, mask })
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn n_agents(&self) -> usize {
        self.agents
    }

    pub fn n_questions(&self) -> usize {
        self.questions
    }

    pub fn answered(&self, agent: usize, question: usize) -> bool {
        self.mask[agent * self.questions + question]
    }

    pub fn get(&self, agent: usize, question: usize) -> Option<usize> {
        let idx = agent * self.questions + question;
        self.mask[idx].then(|| self.entries[idx])
    }

    /// Questions answered by `agent`, in order.
    pub fn answered_by(&self, agent: usize) -> Vec<usize> {
        (0..self.questions).filter(|&k| self.answered(agent, k)).collect()
    }

    /// Questions answered by both agents, in order.
    pub fn shared_questions(&self, i: usize, j: usize) -> Vec<usize> {
        (0..self.questions).filter(|&k| self.answered(i, k) && self.answered(j, k)).collect()
    }

    pub fn row(&self, agent: usize) -> Vec<Option<usize>> {
        (0..self.questions).map(|k| self.get(agent, k)).collect()
    }
}

/// Empirical joint of two agents' reports over their shared questions.
pub fn empirical_pair_joint(reports: &ReportMatrix, i: usize, j: usize) -> Result<JointDistribution> {
    let m = reports.alphabet_size();
    let mut counts = vec![0.0; m * m];
    let mut shared = 0usize;
    for k in 0..reports.n_questions() {
        if let (Some(a), Some(b)) = (reports.get(i, k), reports.get(j, k)) {
            counts[a * m + b] += 1.0;
            shared += 1;
        }
    }
    if shared == 0 {
        return Err(Error::NoOverlap { i, j });
    }
    JointDistribution::from_counts(m, m, &counts)
}

/// Samples `T` questions of reports, deterministic per seed.
///
/// Signals come from a full-joint or world-model prior; a pairwise prior is
/// generative only for two agents.
pub fn generate_reports(scenario: &Scenario, questions: usize, seed: RngSeed) -> Result<ReportMatrix> {
    let n = scenario.n_agents();
    let m = scenario.alphabet_size();
    let channels = scenario.channels()?;
    let mut rng = seed.rng();

    enum Source<'a> {
        Flat(Vec<f64>, Box<dyn Fn(usize) -> Vec<usize> + 'a>),
        World(&'a WorldModel),
    }
    let source = match &scenario.prior {
        Prior::FullJoint(f) => Source::Flat(f.data().to_vec(), Box::new(move |idx| f.decode(idx))),
        Prior::WorldModel(w) => Source::World(w),
        Prior::Pairwise { .. } | Prior::PairwiseProfile { .. } if n == 2 => {
            let joint = scenario.prior.pair_joint(0, 1)?;
            Source::Flat(joint.data().to_vec(), Box::new(move |idx| vec![idx / m, idx % m]))
        }
        other => {
            return Err(Error::UnsupportedPriorMode(format!(
                "{} prior cannot generate signals for {n} agents",
                other.mode_name()
            )))
        }
    };

    let mut rows = vec![Vec::with_capacity(questions); n];
    for _ in 0..questions {
        let signals = match &source {
            Source::Flat(weights, decode) => decode(draw(weights, &mut rng)),
            Source::World(w) => {
                let state = &w.states()[draw(w.weights().weights(), &mut rng)];
                (0..n).map(|_| draw(state.weights(), &mut rng)).collect()
            }
        };
        for (agent, &signal) in signals.iter().enumerate() {
            let report = match scenario.effort(agent) {
                Some(e) if rng.random::<f64>() >= e.lambda => draw(e.no_effort_report.weights(), &mut rng),
                _ => draw(channels[agent].row(signal), &mut rng),
            };
            rows[agent].push(report);
        }
    }
    ReportMatrix::full(m, rows)
}

/// `(π⁻¹(Q), π(s))`: the scenario in which every agent's report and belief
/// coincide with the original under the coupling `σ ↦ π_i⁻¹(σ)`.
///
/// Applying the inverse list to the result returns the original scenario.
pub fn permute_scenario(scenario: &Scenario, perms: &PermutationList) -> Result<Scenario> {
    let n = scenario.n_agents();
    if perms.len() != n {
        return Err(Error::DimensionMismatch { context: "permutation list length", expected: n, found: perms.len() });
    }
    if perms.alphabet_size() != scenario.alphabet_size() {
        return Err(Error::DimensionMismatch {
            context: "permutation alphabet",
            expected: scenario.alphabet_size(),
            found: perms.alphabet_size(),
        });
    }
    let inverse = perms.inverse();
    let prior = inverse.apply_prior(&scenario.prior)?;
    let strategies = scenario
        .strategies
        .iter()
        .enumerate()
        .map(|(i, s)| Ok(Strategy { label: s.label.clone(), rule: permute_rule(&s.rule, perms, &inverse, i)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Scenario { prior, strategies, efforts: scenario.efforts.clone() })
}

fn permute_rule(
    rule: &StrategyRule,
    perms: &PermutationList,
    inverse: &PermutationList,
    agent: usize,
) -> Result<StrategyRule> {
    Ok(match rule {
        StrategyRule::Channel { matrix } => StrategyRule::Channel { matrix: perms.matrix(agent)?.then(matrix)? },
        StrategyRule::Permuted { perms: inner_perms, inner } if inner_perms == inverse => (**inner).clone(),
        other => StrategyRule::Permuted { perms: perms.clone(), inner: Box::new(other.clone()) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical() -> JointDistribution {
        JointDistribution::pairwise(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap()
    }

    fn d(w: &[f64]) -> Distribution {
        Distribution::new(w.to_vec()).unwrap()
    }

    fn bts_world() -> Prior {
        Prior::world(d(&[0.5, 0.5]), vec![d(&[0.8, 0.2]), d(&[0.2, 0.8])]).unwrap()
    }

    fn swap() -> TransitionMatrix {
        TransitionMatrix::permutation(&[1, 0]).unwrap()
    }

    #[test]
    fn report_joint_examples() {
        let prior = Prior::symmetric(canonical()).unwrap();
        let id = TransitionMatrix::identity(2);
        assert_eq!(report_joint(&prior, 0, 1, &id, &id, None, None).unwrap(), canonical());

        let shirk = EffortStrategy::new(0.0, 0.1, d(&[0.3, 0.7])).unwrap();
        let full = EffortStrategy::full(2, 0.1).unwrap();
        let j = report_joint(&prior, 0, 1, &id, &id, Some(&shirk), Some(&full)).unwrap();
        let expected = JointDistribution::outer(&d(&[0.3, 0.7]), &d(&[0.5, 0.5]));
        assert!(j.max_abs_diff(&expected).unwrap() < 1e-15);

        let swapped = report_joint(&prior, 0, 1, &swap(), &id, None, None).unwrap();
        assert_eq!(swapped, canonical().push_first(&swap()).unwrap());
        assert_eq!(swapped.to_rows(), vec![vec![0.1, 0.4], vec![0.4, 0.1]]);
    }

    #[test]
    fn effort_mixture_law() {
        let prior =
            Prior::pairwise(JointDistribution::pairwise(vec![vec![0.3, 0.1], vec![0.2, 0.4]]).unwrap()).unwrap();
        let s = TransitionMatrix::new(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let x = d(&[0.6, 0.4]);
        let lambda = 0.35;
        let partial = EffortStrategy::new(lambda, 0.0, x.clone()).unwrap();
        let none = EffortStrategy::new(0.0, 0.0, x.clone()).unwrap();
        let full = EffortStrategy::new(1.0, 0.0, x).unwrap();
        let id = TransitionMatrix::identity(2);
        let mixed = report_joint(&prior, 0, 1, &s, &id, Some(&partial), None).unwrap();
        let a = report_joint(&prior, 0, 1, &s, &id, Some(&full), None).unwrap();
        let b = report_joint(&prior, 0, 1, &s, &id, Some(&none), None).unwrap();
        assert!(mixed.max_abs_diff(&a.mix(lambda, &b).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn world_tensor_examples() {
        let prior = bts_world();
        let truth = vec![TransitionMatrix::identity(2); 3];
        let wt = world_tensor(&prior, &truth).unwrap();
        for (hat, state) in wt.hat_states.iter().zip(prior.world_model().unwrap().states()) {
            assert!(hat.weights().iter().zip(state.weights()).all(|(a, b)| (a - b).abs() < 1e-15));
        }
        let swapped = world_tensor(&prior, &vec![swap(); 3]).unwrap();
        assert!((swapped.hat_states[0].get(0) - 0.2).abs() < 1e-15);
        assert!((swapped.hat_states[1].get(0) - 0.8).abs() < 1e-15);

        // t[z][w][y] = P(w) ω_w(z) ω_w(y); conditioned on world ω1 the (Z, Y) slice is (0.8,0.2)⊗(0.8,0.2)
        let t = &wt.tensor;
        let pw: f64 = (0..2).flat_map(|z| (0..2).map(move |y| (z, y))).map(|(z, y)| t.get3(z, 0, y)).sum();
        assert!((pw - 0.5).abs() < 1e-15);
        for z in 0..2 {
            for y in 0..2 {
                let omega = [0.8, 0.2];
                assert!((t.get3(z, 0, y) / pw - omega[z] * omega[y]).abs() < 1e-15);
            }
        }
        assert!(matches!(world_tensor(&Prior::symmetric(canonical()).unwrap(), &truth), Err(Error::ModeMismatch(_))));
    }

    #[test]
    fn constant_profile_collapses_worlds() {
        let prior = bts_world();
        let c = TransitionMatrix::constant(2, &d(&[0.5, 0.5]));
        let wt = world_tensor(&prior, &[c.clone(), c]).unwrap();
        assert_eq!(wt.class_states.len(), 1);
        assert_eq!(wt.classes, vec![0, 0]);
    }

    #[test]
    fn generate_reports_examples() {
        let point =
            Prior::pairwise(JointDistribution::pairwise(vec![vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap()).unwrap();
        let scenario = Scenario::truthful(point, 2).unwrap();
        let r = generate_reports(&scenario, 8, RngSeed(5)).unwrap();
        assert!((0..2).all(|i| (0..8).all(|k| r.get(i, k) == Some(1))));
        assert_eq!(generate_reports(&scenario, 0, RngSeed(5)).unwrap().n_questions(), 0);

        let sym = Scenario::truthful(Prior::symmetric(canonical()).unwrap(), 2).unwrap();
        let r = generate_reports(&sym, 100_000, RngSeed(11)).unwrap();
        let emp = empirical_pair_joint(&r, 0, 1).unwrap();
        assert!(emp.max_abs_diff(&canonical()).unwrap() < 0.01);

        let three = Scenario::truthful(Prior::symmetric(canonical()).unwrap(), 3).unwrap();
        assert!(matches!(generate_reports(&three, 10, RngSeed(1)), Err(Error::UnsupportedPriorMode(_))));
        assert_eq!(generate_reports(&sym, 50, RngSeed(2)).unwrap(), generate_reports(&sym, 50, RngSeed(2)).unwrap());
    }

    #[test]
    fn world_model_reports_match_pair_joint() {
        let scenario = Scenario::truthful(bts_world(), 4).unwrap();
        let r = generate_reports(&scenario, 100_000, RngSeed(3)).unwrap();
        let emp = empirical_pair_joint(&r, 1, 3).unwrap();
        let exact = scenario.report_joint(1, 3).unwrap();
        assert!(emp.max_abs_diff(&exact).unwrap() < 0.01);
    }

    #[test]
    fn empirical_pair_joint_examples() {
        let same = ReportMatrix::full(2, vec![vec![0, 0, 1, 1], vec![0, 0, 1, 1]]).unwrap();
        assert_eq!(empirical_pair_joint(&same, 0, 1).unwrap().to_rows(), vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
        let opposite = ReportMatrix::full(2, vec![vec![0, 0, 1, 1], vec![1, 1, 0, 0]]).unwrap();
        assert_eq!(empirical_pair_joint(&opposite, 0, 1).unwrap().to_rows(), vec![vec![0.0, 0.5], vec![0.5, 0.0]]);
        let disjoint = ReportMatrix::with_mask(2, vec![vec![Some(0), None], vec![None, Some(1)]]).unwrap();
        assert_eq!(empirical_pair_joint(&disjoint, 0, 1), Err(Error::NoOverlap { i: 0, j: 1 }));
    }

    #[test]
    fn empirical_pair_joint_matches_hand_count() {
        let mut rng = RngSeed(8).rng();
        let rows: Vec<Vec<usize>> = (0..2).map(|_| (0..200).map(|_| rng.random_range(0..3)).collect()).collect();
        let r = ReportMatrix::full(3, rows.clone()).unwrap();
        let emp = empirical_pair_joint(&r, 0, 1).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let count = rows[0].iter().zip(&rows[1]).filter(|&(&x, &y)| x == a && y == b).count();
                assert_eq!(emp.get(a, b), count as f64 / 200.0);
            }
        }
    }

    #[test]
    fn permute_scenario_examples() {
        let prior = Prior::symmetric(canonical()).unwrap();
        let s = TransitionMatrix::new(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let scenario =
            Scenario::new(prior.clone(), vec![Strategy::from_channel("s", s.clone()), Strategy::truthful(2)], None)
                .unwrap();

        assert_eq!(permute_scenario(&scenario, &PermutationList::identity(2, 2)).unwrap(), scenario);

        let list = PermutationList::symmetric(2, vec![1, 0]).unwrap();
        let permuted = permute_scenario(&scenario, &list).unwrap();
        assert_eq!(permuted.prior, prior);
        // row σ of the permuted strategy is row π(σ) of the original
        assert_eq!(permuted.strategies[0].channel().unwrap().to_rows(), vec![vec![0.3, 0.7], vec![0.9, 0.1]]);
        assert_eq!(permute_scenario(&permuted, &list).unwrap(), scenario);
    }

    #[test]
    fn permute_scenario_preserves_report_distributions() {
        let joint =
            JointDistribution::pairwise(vec![vec![0.2, 0.05, 0.05], vec![0.1, 0.25, 0.05], vec![0.0, 0.1, 0.2]])
                .unwrap();
        let scenario = Scenario::new(
            Prior::pairwise(joint).unwrap(),
            vec![
                Strategy::new(vec![vec![0.7, 0.2, 0.1], vec![0.0, 1.0, 0.0], vec![0.3, 0.3, 0.4]]).unwrap(),
                Strategy::peer_posterior(),
                Strategy::truthful(3),
            ],
            None,
        )
        .unwrap();
        let list = PermutationList::new(vec![vec![1, 2, 0], vec![2, 0, 1], vec![0, 2, 1]]).unwrap();
        let permuted = permute_scenario(&scenario, &list).unwrap();
        let before = scenario.channels().unwrap();
        let after = permuted.channels().unwrap();
        for i in 0..3 {
            let inv = list.inverse();
            for sigma in 0..3 {
                let coupled = inv.get(i)[sigma];
                for (a, b) in before[i].row(sigma).iter().zip(after[i].row(coupled)) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
            for j in 0..3 {
                if i != j {
                    let a = scenario.report_joint(i, j).unwrap();
                    let b = permuted.report_joint(i, j).unwrap();
                    assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
                }
            }
        }
        assert_eq!(permute_scenario(&permuted, &list.inverse()).unwrap(), scenario);
    }

    #[test]
    fn random_strategy_examples() {
        for seed in 0..10 {
            let s = random_strategy(RngSeed(seed), 2, StrategyKind::Permutation);
            let c = s.channel().unwrap();
            assert!(c.is_identity() || c.as_permutation() == Some(&[1, 0][..]));
        }
        assert!(random_strategy(RngSeed(1), 3, StrategyKind::Constant).channel().unwrap().is_constant());
        let dense = random_strategy(RngSeed(1), 4, StrategyKind::Dense);
        let c = dense.channel().unwrap();
        for r in 0..4 {
            assert!((c.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(
            random_strategy(RngSeed(9), 3, StrategyKind::Sparse),
            random_strategy(RngSeed(9), 3, StrategyKind::Sparse)
        );
    }

    #[test]
    fn full_joint_relabeling() {
        let mut rng = RngSeed(4).rng();
        let data = crate::random::simplex_weights(&mut rng, 27);
        let f = FullJoint::new(3, 3, data).unwrap();
        let list = PermutationList::new(vec![vec![1, 2, 0], vec![0, 1, 2], vec![2, 1, 0]]).unwrap();
        let moved = list.apply_prior(&Prior::FullJoint(f.clone())).unwrap();
        let pair = moved.pair_joint(0, 2).unwrap();
        let expected = f
            .pair_marginal(0, 2)
            .push_first(&list.matrix(0).unwrap())
            .unwrap()
            .push_second(&list.matrix(2).unwrap())
            .unwrap();
        assert!(pair.max_abs_diff(&expected).unwrap() < 1e-15);
        assert_eq!(list.inverse().apply_prior(&moved).unwrap(), Prior::FullJoint(f));
    }

    #[test]
    fn scenario_serde_round_trip() {
        let scenario = Scenario::new(
            bts_world(),
            vec![Strategy::truthful(2), Strategy::peer_posterior(), Strategy::permutation(&[1, 0]).unwrap()],
            Some(vec![EffortStrategy::full(2, 0.25).unwrap(); 3]),
        )
        .unwrap();
        let text = serde_json::to_string(&scenario).unwrap();
        assert_eq!(serde_json::from_str::<Scenario>(&text).unwrap(), scenario);
    }
}
