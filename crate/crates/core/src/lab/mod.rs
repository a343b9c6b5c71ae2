//! Randomized verification suites.
//!
//! Each suite draws independent instances from child seeds of the configured
//! seed, checks the corresponding property on every instance, and folds the
//! results into a [`SuiteVerdict`]. Instances run in parallel on the current
//! rayon pool; the verdict does not depend on the number of threads.

mod agreement;
mod bts;
mod convergence;
mod equivalence;
mod info;
mod truthful;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{ConvexGenerator, ExtendedReal, Measure, ScoringRule};
use crate::prob::RngSeed;

pub use agreement::coverage_floor;
pub use bts::{enumerated_world_information, sweep_bts_n};
pub use convergence::{sweep_fmi_t, FINAL_GAP, QUESTION_GRID};
pub use equivalence::exact_payments;
pub use truthful::{canonical_optimal_effort, lambda_grid};

/// The available suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteId {
    Dpi,
    DominantTruthfulness,
    TruthMonotone,
    Effort,
    BregmanQuasi,
    AccuracyGain,
    MdEquivalence,
    Bts,
    ScenarioEquivalence,
    FmiConvergence,
}

impl SuiteId {
    pub const ALL: [SuiteId; 10] = [
        SuiteId::Dpi,
        SuiteId::DominantTruthfulness,
        SuiteId::TruthMonotone,
        SuiteId::Effort,
        SuiteId::BregmanQuasi,
        SuiteId::AccuracyGain,
        SuiteId::MdEquivalence,
        SuiteId::Bts,
        SuiteId::ScenarioEquivalence,
        SuiteId::FmiConvergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteId::Dpi => "dpi",
            SuiteId::DominantTruthfulness => "dominant-truthfulness",
            SuiteId::TruthMonotone => "truth-monotone",
            SuiteId::Effort => "effort",
            SuiteId::BregmanQuasi => "bregman-quasi",
            SuiteId::AccuracyGain => "accuracy-gain",
            SuiteId::MdEquivalence => "md-equivalence",
            SuiteId::Bts => "bts",
            SuiteId::ScenarioEquivalence => "scenario-equivalence",
            SuiteId::FmiConvergence => "fmi-convergence",
        }
    }

    pub fn default_instances(self) -> usize {
        match self {
            SuiteId::Dpi | SuiteId::BregmanQuasi => 10_000,
            SuiteId::ScenarioEquivalence => 100,
            SuiteId::FmiConvergence => 20,
            _ => 1_000,
        }
    }

    /// Whether the suite asserts exact identities, limiting trends, or both.
    pub fn tags(self) -> Vec<String> {
        let tags: &[&str] = match self {
            SuiteId::FmiConvergence => &["convergence"],
            SuiteId::Bts => &["equality", "convergence"],
            _ => &["equality"],
        };
        tags.iter().map(|t| t.to_string()).collect()
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub equality: f64,
    pub strictness: f64,
    /// Nominal coverage of Monte Carlo confidence intervals.
    pub monte_carlo_ci: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { equality: 1e-10, strictness: 1e-10, monte_carlo_ci: 0.95 }
    }
}

/// Everything a suite run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: SuiteId,
    pub instances: usize,
    pub seed: u64,
    pub alphabet_sizes: Vec<usize>,
    pub agent_counts: Vec<usize>,
    pub tolerances: Tolerances,
}

impl SuiteConfig {
    pub fn new(suite: SuiteId) -> Self {
        SuiteConfig {
            suite,
            instances: suite.default_instances(),
            seed: 0,
            alphabet_sizes: vec![2, 3, 4],
            agent_counts: vec![2, 3, 6],
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_instances(mut self, instances: usize) -> Self {
        self.instances = instances;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.instances == 0 {
            return bad("instance count must be at least 1".into());
        }
        if self.alphabet_sizes.is_empty() || self.alphabet_sizes.iter().any(|&m| m < 2) {
            return bad(format!("alphabet sizes must be non-empty and >= 2, got {:?}", self.alphabet_sizes));
        }
        if self.agent_counts.is_empty() || self.agent_counts.iter().any(|&n| n < 2) {
            return bad(format!("agent counts must be non-empty and >= 2, got {:?}", self.agent_counts));
        }
        let t = &self.tolerances;
        if !(t.equality > 0.0 && t.strictness > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if !(t.monte_carlo_ci > 0.0 && t.monte_carlo_ci < 1.0) {
            return bad(format!("confidence level must lie in (0, 1), got {}", t.monte_carlo_ci));
        }
        Ok(())
    }

    /// Seed of instance `k`.
    pub fn instance_seed(&self, k: usize) -> RngSeed {
        RngSeed(self.seed).child(k as u64)
    }
}

/// A failed check, reproducible by replaying `seed` (absent for suite-level checks).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub kind: String,
    pub detail: String,
}

/// Machine-readable result of a suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteVerdict {
    pub suite: SuiteId,
    pub config: SuiteConfig,
    pub instances: usize,
    pub violation_count: usize,
    /// At most [`MAX_REPORTED_VIOLATIONS`], sorted by seed.
    pub violations: Vec<Violation>,
    pub strictness_histogram: BTreeMap<String, u64>,
    pub tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub findings: Vec<String>,
    pub pass: bool,
}

pub const MAX_REPORTED_VIOLATIONS: usize = 100;
const MAX_REPORTED_FINDINGS: usize = 20;

/// What one instance (or one suite-level block) observed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub violations: Vec<(String, String)>,
    pub tallies: Vec<String>,
    pub findings: Vec<String>,
}

impl Outcome {
    pub(crate) fn violate(&mut self, kind: &str, detail: String) {
        self.violations.push((kind.to_string(), detail));
    }

    pub(crate) fn tally(&mut self, key: impl Into<String>) {
        self.tallies.push(key.into());
    }

    pub(crate) fn check(&mut self, ok: bool, kind: &str, detail: impl FnOnce() -> String) {
        if !ok {
            self.violate(kind, detail());
        }
    }

    fn absorb_error(result: Result<Outcome>) -> Outcome {
        result.unwrap_or_else(|e| {
            let mut o = Outcome::default();
            o.violate("error", e.to_string());
            o
        })
    }
}

type InstanceFn = fn(&SuiteConfig, RngSeed) -> Result<Outcome>;
type BlockFn = fn(&SuiteConfig) -> Result<(Outcome, Vec<String>)>;

fn suite_parts(suite: SuiteId) -> (Option<InstanceFn>, Option<BlockFn>) {
    match suite {
        SuiteId::Dpi => (Some(info::dpi_instance), Some(info::dpi_fixed)),
        SuiteId::BregmanQuasi => (Some(info::bregman_instance), None),
        SuiteId::AccuracyGain => (Some(info::accuracy_gain_instance), None),
        SuiteId::DominantTruthfulness => (Some(truthful::dominant_instance), Some(truthful::dominant_fixed)),
        SuiteId::TruthMonotone => (Some(truthful::monotone_instance), None),
        SuiteId::Effort => (Some(truthful::effort_instance), Some(truthful::effort_fixed)),
        SuiteId::MdEquivalence => (Some(agreement::md_instance), Some(agreement::md_fixed)),
        SuiteId::Bts => (Some(bts::bts_instance), Some(bts::bts_fixed)),
        SuiteId::ScenarioEquivalence => (Some(equivalence::equivalence_instance), Some(equivalence::equivalence_fixed)),
        SuiteId::FmiConvergence => (None, Some(convergence::fmi_convergence_block)),
    }
}

/// Runs one instance of the configured suite from its seed, e.g. to replay a violation.
pub fn replay(config: &SuiteConfig, seed: u64) -> Result<Outcome> {
    config.validate()?;
    match suite_parts(config.suite).0 {
        Some(run) => Ok(Outcome::absorb_error(run(config, RngSeed(seed)))),
        None => Err(Error::InvalidArgument(format!("suite {} has no per-instance checks", config.suite))),
    }
}

/// Runs the configured suite.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteVerdict> {
    config.validate()?;
    let (instance, block) = suite_parts(config.suite);
    let mut seeded: Vec<(u64, Outcome)> = match instance {
        Some(run) => (0..config.instances)
            .into_par_iter()
            .map(|k| {
                let seed = config.instance_seed(k);
                (seed.0, Outcome::absorb_error(run(config, seed)))
            })
            .collect(),
        None => Vec::new(),
    };
    let (fixed, notes) = match block {
        Some(run) => match run(config) {
            Ok(r) => r,
            Err(e) => (Outcome::absorb_error(Err(e)), Vec::new()),
        },
        None => (Outcome::default(), Vec::new()),
    };

    let mut violations = Vec::new();
    let mut histogram = BTreeMap::new();
    let mut findings = Vec::new();
    let mut fold = |seed: Option<u64>, o: Outcome| {
        for (kind, detail) in o.violations {
            violations.push(Violation { seed, kind, detail });
        }
        for key in o.tallies {
            *histogram.entry(key).or_insert(0) += 1;
        }
        findings.extend(o.findings.into_iter().map(|f| match seed {
            Some(s) => format!("seed {s}: {f}"),
            None => f,
        }));
    };
    fold(None, fixed);
    seeded.sort_by_key(|(seed, _)| *seed);
    for (seed, o) in seeded {
        fold(Some(seed), o);
    }
    violations.sort();
    let violation_count = violations.len();
    violations.truncate(MAX_REPORTED_VIOLATIONS);
    findings.truncate(MAX_REPORTED_FINDINGS);
    Ok(SuiteVerdict {
        suite: config.suite,
        config: config.clone(),
        instances: config.instances,
        violation_count,
        violations,
        strictness_histogram: histogram,
        tags: config.suite.tags(),
        notes,
        findings,
        pass: violation_count == 0,
    })
}

pub(crate) fn pick<T: Copy, R: Rng + ?Sized>(rng: &mut R, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

/// A channel of a kind drawn with the standard mixing weights.
pub(crate) fn any_channel<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> crate::prob::TransitionMatrix {
    let kind = crate::random::StrategyKind::sample(rng);
    crate::random::random_channel(rng, rows, cols, kind)
}

pub(crate) fn any_strategy<R: Rng + ?Sized>(rng: &mut R, m: usize) -> crate::agents::Strategy {
    let kind = crate::random::StrategyKind::sample(rng);
    crate::agents::random_strategy_with(rng, m, kind)
}

pub(crate) const ALL_MEASURES: [Measure; 6] = [
    Measure::F(ConvexGenerator::Kl),
    Measure::F(ConvexGenerator::Tvd),
    Measure::F(ConvexGenerator::ChiSquared),
    Measure::F(ConvexGenerator::SquaredHellinger),
    Measure::Bregman(ScoringRule::Log),
    Measure::Bregman(ScoringRule::Quadratic),
];

/// Equal within `tol`, with infinity equal only to itself.
pub(crate) fn close(a: ExtendedReal, b: ExtendedReal, tol: f64) -> bool {
    match (a, b) {
        (ExtendedReal::Infinite, ExtendedReal::Infinite) => true,
        (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => (x - y).abs() <= tol,
        _ => false,
    }
}

pub(crate) fn close_f64(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol
}

/// Median of a non-empty sample.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// Histogram bucket of a strict gap.
pub(crate) fn gap_bucket(prefix: &str, gap: f64) -> String {
    let bucket = if gap.is_infinite() {
        "inf"
    } else if gap >= 1e-3 {
        ">=1e-3"
    } else if gap >= 1e-6 {
        "[1e-6,1e-3)"
    } else if gap >= 1e-10 {
        "[1e-10,1e-6)"
    } else {
        "<1e-10"
    };
    format!("{prefix}:{bucket}")
}

/// One row of a long-format sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub grid_point: usize,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

/// Median of `metric` at each grid point, in grid order.
pub fn sweep_medians(rows: &[SweepRow], metric: &str) -> Vec<(usize, f64)> {
    let mut points: Vec<usize> = Vec::new();
    for r in rows {
        if !points.contains(&r.grid_point) {
            points.push(r.grid_point);
        }
    }
    points
        .into_iter()
        .map(|p| {
            let values: Vec<f64> =
                rows.iter().filter(|r| r.grid_point == p && r.metric == metric).map(|r| r.value).collect();
            (p, if values.is_empty() { f64::NAN } else { median(&values) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for id in SuiteId::ALL {
            assert_eq!(id.name().parse::<SuiteId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{}\"", id.name()));
        }
        assert!("nosuch".parse::<SuiteId>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SuiteConfig::new(SuiteId::Dpi).validate().is_ok());
        assert!(SuiteConfig::new(SuiteId::Dpi).with_instances(0).validate().is_err());
        let mut c = SuiteConfig::new(SuiteId::Dpi);
        c.tolerances.equality = 0.0;
        assert!(c.validate().is_err());
        let mut c = SuiteConfig::new(SuiteId::Dpi);
        c.alphabet_sizes = vec![1];
        assert!(c.validate().is_err());
    }

    #[test]
    fn median_and_buckets() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(gap_bucket("s", 0.5), "s:>=1e-3");
        assert_eq!(gap_bucket("s", 1e-12), "s:<1e-10");
    }

    #[test]
    fn verdicts_are_deterministic_across_pools() {
        let config = SuiteConfig::new(SuiteId::Dpi).with_instances(200).with_seed(3);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_suite(&config)).unwrap();
        let b = four.install(|| run_suite(&config)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn every_suite_passes_a_small_run() {
        for id in SuiteId::ALL {
            let instances = match id {
                SuiteId::FmiConvergence => 5,
                _ => 30,
            };
            let config = SuiteConfig::new(id).with_instances(instances).with_seed(11);
            let v = run_suite(&config).unwrap();
            assert!(v.pass, "{id}: {:?}", v.violations);
            assert_eq!(v.pass, v.violation_count == 0);
        }
    }
}
