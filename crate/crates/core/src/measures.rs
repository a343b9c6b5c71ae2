//! Divergences, proper scoring rules and the mutual-information measures built on them.
//!
//! All logarithms are natural; information quantities are in nats.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{Distribution, JointDistribution, TransitionMatrix};

/// Tolerance separating "equal" from "strictly smaller" in DPI reports.
pub const DEFAULT_STRICTNESS_TOL: f64 = 1e-10;
/// Default ratio-difference threshold for [`is_fine_grained`].
pub const DEFAULT_FINE_GRAINED_TOL: f64 = 1e-9;

/// A non-negative real that may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal::Finite(0.0);

    pub fn value(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn as_finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    /// Multiplies by a non-negative weight; `0 · ∞ = 0`.
    pub fn scale(self, weight: f64) -> ExtendedReal {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(weight * v),
            ExtendedReal::Infinite if weight == 0.0 => ExtendedReal::ZERO,
            ExtendedReal::Infinite => ExtendedReal::Infinite,
        }
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::Infinite,
        }
    }
}

impl std::iter::Sum for ExtendedReal {
    fn sum<I: Iterator<Item = ExtendedReal>>(iter: I) -> ExtendedReal {
        iter.fold(ExtendedReal::ZERO, Add::add)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => serializer.serialize_f64(*v),
            ExtendedReal::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) => Ok(ExtendedReal::Finite(v)),
            Repr::Text(t) if t == "inf" => Ok(ExtendedReal::Infinite),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {t:?}"))),
        }
    }
}

/// Convex `f` with `f(1) = 0` defining an f-divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexGenerator {
    /// `f(x) = -ln x`
    Kl,
    /// `f(x) = |x - 1|`, convex but not strictly.
    Tvd,
    /// `f(x) = (x - 1)^2`
    ChiSquared,
    /// `f(x) = (√x - 1)^2`
    SquaredHellinger,
}

impl ConvexGenerator {
    pub const ALL: [ConvexGenerator; 4] =
        [ConvexGenerator::Kl, ConvexGenerator::Tvd, ConvexGenerator::ChiSquared, ConvexGenerator::SquaredHellinger];

    pub fn eval(self, x: f64) -> f64 {
        match self {
            ConvexGenerator::Kl => -x.ln(),
            ConvexGenerator::Tvd => (x - 1.0).abs(),
            ConvexGenerator::ChiSquared => (x - 1.0) * (x - 1.0),
            ConvexGenerator::SquaredHellinger => {
                let r = x.sqrt() - 1.0;
                r * r
            }
        }
    }

    /// `lim_{x→0+} f(x)`.
    pub fn limit_at_zero(self) -> ExtendedReal {
        match self {
            ConvexGenerator::Kl => ExtendedReal::Infinite,
            _ => ExtendedReal::Finite(1.0),
        }
    }

    /// `lim_{x→∞} f(x) / x`, the weight of mass that `p` misses entirely.
    pub fn slope_at_infinity(self) -> ExtendedReal {
        match self {
            ConvexGenerator::Kl => ExtendedReal::ZERO,
            ConvexGenerator::Tvd | ConvexGenerator::SquaredHellinger => ExtendedReal::Finite(1.0),
            ConvexGenerator::ChiSquared => ExtendedReal::Infinite,
        }
    }

    pub fn is_strictly_convex(self) -> bool {
        !matches!(self, ConvexGenerator::Tvd)
    }

    pub fn name(self) -> &'static str {
        match self {
            ConvexGenerator::Kl => "kl",
            ConvexGenerator::Tvd => "tvd",
            ConvexGenerator::ChiSquared => "chi2",
            ConvexGenerator::SquaredHellinger => "hellinger",
        }
    }
}

impl fmt::Display for ConvexGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConvexGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kl" | "shannon" => Ok(ConvexGenerator::Kl),
            "tvd" => Ok(ConvexGenerator::Tvd),
            "chi2" | "chi-squared" | "chi_squared" => Ok(ConvexGenerator::ChiSquared),
            "hellinger" | "squared-hellinger" | "squared_hellinger" => Ok(ConvexGenerator::SquaredHellinger),
            other => Err(Error::InvalidArgument(format!("unknown convex generator {other:?}"))),
        }
    }
}

/// Strictly proper scoring rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringRule {
    /// `ln q(σ)`
    Log,
    /// Brier-type: `2 q(σ) - Σ q²`
    Quadratic,
}

impl ScoringRule {
    pub const ALL: [ScoringRule; 2] = [ScoringRule::Log, ScoringRule::Quadratic];

    pub fn score(self, signal: usize, report: &[f64]) -> Result<f64> {
        let q = *report.get(signal).ok_or(Error::IndexOutOfRange { index: signal, size: report.len() })?;
        match self {
            ScoringRule::Log => {
                if q <= 0.0 {
                    Err(Error::LogOfZero)
                } else {
                    Ok(q.ln())
                }
            }
            ScoringRule::Quadratic => Ok(2.0 * q - report.iter().map(|r| r * r).sum::<f64>()),
        }
    }

    /// `PS(p, q) = E_{σ~p} PS(σ, q)`; zero-probability signals are skipped.
    pub fn expected(self, p: &[f64], q: &[f64]) -> Result<f64> {
        check_same_len(p.len(), q.len(), "extended score")?;
        let mut total = 0.0;
        for (sigma, &w) in p.iter().enumerate() {
            if w > 0.0 {
                total += w * self.score(sigma, q)?;
            }
        }
        Ok(total)
    }

    pub fn name(self) -> &'static str {
        match self {
            ScoringRule::Log => "log",
            ScoringRule::Quadratic => "quadratic",
        }
    }
}

impl fmt::Display for ScoringRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScoringRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "log" => Ok(ScoringRule::Log),
            "quadratic" | "brier" => Ok(ScoringRule::Quadratic),
            other => Err(Error::InvalidArgument(format!("unknown scoring rule {other:?}"))),
        }
    }
}

/// A mutual-information measure: f-mutual information or Bregman mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    F(ConvexGenerator),
    Bregman(ScoringRule),
}

impl Measure {
    pub fn mutual_information(self, joint: &JointDistribution) -> Result<ExtendedReal> {
        match self {
            Measure::F(f) => f_mutual_information(joint, f),
            Measure::Bregman(rule) => bregman_mi(joint, rule),
        }
    }

    pub fn conditional(self, tensor: &JointDistribution) -> Result<ExtendedReal> {
        conditional_mi(tensor, self)
    }

    pub fn is_strictly_monotone_candidate(self) -> bool {
        match self {
            Measure::F(f) => f.is_strictly_convex(),
            Measure::Bregman(_) => false,
        }
    }

    pub fn name(self) -> String {
        match self {
            Measure::F(f) => f.name().to_string(),
            Measure::Bregman(rule) => format!("bmi-{}", rule.name()),
        }
    }

    /// Units of the measure's value.
    pub fn units(self) -> &'static str {
        match self {
            Measure::F(ConvexGenerator::Kl) | Measure::Bregman(ScoringRule::Log) => "nats",
            _ => "dimensionless",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if let Some(rule) = lower.strip_prefix("bmi-").or_else(|| lower.strip_prefix("bmi_")) {
            return Ok(Measure::Bregman(rule.parse()?));
        }
        Ok(Measure::F(lower.parse()?))
    }
}

fn check_same_len(expected: usize, found: usize, context: &'static str) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { context, expected, found });
    }
    Ok(())
}

/// `Σ p(σ) f(q(σ)/p(σ))` over raw weight vectors with the usual limit conventions.
pub fn f_divergence_weights(p: &[f64], q: &[f64], f: ConvexGenerator) -> Result<ExtendedReal> {
    check_same_len(p.len(), q.len(), "f-divergence")?;
    Ok(p.iter()
        .zip(q)
        .map(|(&a, &b)| match (a > 0.0, b > 0.0) {
            (false, false) => ExtendedReal::ZERO,
            (false, true) => f.slope_at_infinity().scale(b),
            (true, false) => f.limit_at_zero().scale(a),
            (true, true) => ExtendedReal::Finite(match f {
                ConvexGenerator::Kl => a * (a / b).ln(),
                ConvexGenerator::Tvd => (a - b).abs(),
                _ => a * f.eval(b / a),
            }),
        })
        .sum())
}

pub fn f_divergence(p: &Distribution, q: &Distribution, f: ConvexGenerator) -> Result<ExtendedReal> {
    f_divergence_weights(p.weights(), q.weights(), f)
}

/// `PS(σ, report)`.
pub fn proper_score(signal: usize, report: &Distribution, rule: ScoringRule) -> Result<f64> {
    rule.score(signal, report.weights())
}

fn bregman_weights(p: &[f64], q: &[f64], rule: ScoringRule) -> Result<f64> {
    check_same_len(p.len(), q.len(), "Bregman divergence")?;
    match rule {
        // termwise form of PS(p,p) - PS(p,q) keeps precision near p = q
        ScoringRule::Log => {
            let mut total = 0.0;
            for (&a, &b) in p.iter().zip(q) {
                if a > 0.0 {
                    if b <= 0.0 {
                        return Err(Error::LogOfZero);
                    }
                    total += a * (a / b).ln();
                }
            }
            Ok(total)
        }
        ScoringRule::Quadratic => Ok(p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()),
    }
}

/// `D_PS(p, q) = PS(p, p) - PS(p, q)`.
pub fn bregman_divergence(p: &Distribution, q: &Distribution, rule: ScoringRule) -> Result<ExtendedReal> {
    bregman_weights(p.weights(), q.weights(), rule).map(ExtendedReal::Finite)
}

/// `MI^f(X;Y) = D_f(U_{X,Y}, V_{X,Y})`.
pub fn f_mutual_information(joint: &JointDistribution, f: ConvexGenerator) -> Result<ExtendedReal> {
    let v = joint.product_of_marginals()?;
    debug_assert!(joint.data().iter().zip(v.data()).all(|(u, v)| *v > 0.0 || *u == 0.0), "V = 0 must imply U = 0");
    f_divergence_weights(joint.data(), v.data(), f)
}

/// Shannon mutual information in nats.
pub fn shannon_mi(joint: &JointDistribution) -> Result<f64> {
    let mi = f_mutual_information(joint, ConvexGenerator::Kl)?;
    Ok(mi.as_finite().expect("Shannon MI of a finite joint is finite"))
}

/// `BMI^PS(X;Y) = E_X D_PS(Pr[Y|X], Pr[Y])`.
pub fn bregman_mi(joint: &JointDistribution, rule: ScoringRule) -> Result<ExtendedReal> {
    let (rows, cols) = joint.dims()?;
    let (px, py) = joint.marginals()?;
    let mut total = 0.0;
    let mut posterior = vec![0.0; cols];
    for x in 0..rows {
        let mass = px.get(x);
        if mass <= 0.0 {
            continue;
        }
        for (y, slot) in posterior.iter_mut().enumerate() {
            *slot = joint.get(x, y) / mass;
        }
        let d = bregman_weights(&posterior, py.weights(), rule).map_err(|e| match e {
            Error::LogOfZero => {
                Error::InadmissibleSupport(format!("posterior given x = {x} puts mass where the prior has none"))
            }
            other => other,
        })?;
        total += mass * d;
    }
    Ok(ExtendedReal::Finite(total))
}

/// `Σ_z Pr[Z=z] MI(X;Y | Z=z)`; slices with zero mass contribute nothing.
pub fn conditional_mi(tensor: &JointDistribution, measure: Measure) -> Result<ExtendedReal> {
    let pz = tensor.z_marginal()?;
    let mut total = ExtendedReal::ZERO;
    for (z, &w) in pz.weights().iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let slice = tensor.condition_on(z)?;
        total = total + measure.mutual_information(&slice)?.scale(w);
    }
    Ok(total)
}

/// `BMI^PS(X;Y|Z)`, the `Z`-weighted average of [`bregman_mi`] over slices.
pub fn conditional_bregman_mi(tensor: &JointDistribution, rule: ScoringRule) -> Result<ExtendedReal> {
    conditional_mi(tensor, Measure::Bregman(rule))
}

/// Outcome of [`is_fine_grained`]: `witness` is the first offending cell pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FineGrained {
    pub fine_grained: bool,
    pub witness: Option<((usize, usize), (usize, usize))>,
}

/// Whether `U` and `V` distinguish every pair of distinct cells of a pairwise joint.
pub fn is_fine_grained(joint: &JointDistribution, tol: f64) -> Result<FineGrained> {
    let (rows, cols) = joint.dims()?;
    let v = joint.product_of_marginals()?;
    let cells: Vec<(usize, usize)> = (0..rows).flat_map(|x| (0..cols).map(move |y| (x, y))).collect();
    let ratio = |(x, y): (usize, usize)| v.get(x, y) / joint.get(x, y);
    for (a, &first) in cells.iter().enumerate() {
        for &second in &cells[a + 1..] {
            let distinguished = joint.get(first.0, first.1) > tol
                && joint.get(second.0, second.1) > tol
                && (ratio(first) - ratio(second)).abs() > tol;
            if !distinguished {
                return Ok(FineGrained { fine_grained: false, witness: Some((first, second)) });
            }
        }
    }
    Ok(FineGrained { fine_grained: true, witness: None })
}

/// Whether `p`, `q` distinguish signals `a` and `b`.
pub fn distinguishes(p: &[f64], q: &[f64], a: usize, b: usize, tol: f64) -> bool {
    p[a] > 0.0 && p[b] > 0.0 && (q[a] / p[a] - q[b] / p[b]).abs() > tol
}

/// Strict-monotonicity witness `(σ, σ', σ'')` for `D_f(θᵀp, θᵀq) < D_f(p, q)`:
/// `p, q` distinguish `σ', σ''` and both feed output `σ` through `θ`.
pub fn strict_monotonicity_witness(
    p: &[f64],
    q: &[f64],
    theta: &TransitionMatrix,
    tol: f64,
) -> Option<(usize, usize, usize)> {
    for out in 0..theta.cols() {
        let feeders: Vec<usize> = (0..theta.rows()).filter(|&i| theta.get(i, out) > 0.0 && p[i] > 0.0).collect();
        for (k, &a) in feeders.iter().enumerate() {
            for &b in &feeders[k + 1..] {
                if distinguishes(p, q, a, b, tol) {
                    return Some((out, a, b));
                }
            }
        }
    }
    None
}

/// Witness that `MI^f(M(X);Y) < MI^f(X;Y)` must be strict for strictly convex `f`:
/// two cells `(x1,y)`, `(x2,y)` distinguished by `(U, V)` that `M` merges into `(x', y)`.
pub fn dpi_strictness_witness(
    joint: &JointDistribution,
    channel: &TransitionMatrix,
    tol: f64,
) -> Result<Option<(usize, usize, usize, usize)>> {
    let (rows, cols) = joint.dims()?;
    if channel.rows() != rows {
        return Err(Error::DimensionMismatch { context: "DPI channel rows", expected: rows, found: channel.rows() });
    }
    let v = joint.product_of_marginals()?;
    for out in 0..channel.cols() {
        let feeders: Vec<usize> = (0..rows).filter(|&x| channel.get(x, out) > 0.0).collect();
        for y in 0..cols {
            for (k, &x1) in feeders.iter().enumerate() {
                for &x2 in &feeders[k + 1..] {
                    let (u1, u2) = (joint.get(x1, y), joint.get(x2, y));
                    if u1 > 0.0 && u2 > 0.0 && (v.get(x1, y) / u1 - v.get(x2, y) / u2).abs() > tol {
                        return Ok(Some((out, y, x1, x2)));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Before/after values of a data-processing check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpiReport {
    pub before: ExtendedReal,
    pub after: ExtendedReal,
    pub holds: bool,
    pub strict: bool,
}

impl DpiReport {
    pub fn compare(before: ExtendedReal, after: ExtendedReal, tol: f64) -> DpiReport {
        let (holds, strict) = match (before, after) {
            (ExtendedReal::Infinite, ExtendedReal::Infinite) => (true, false),
            (ExtendedReal::Infinite, ExtendedReal::Finite(_)) => (true, true),
            (ExtendedReal::Finite(_), ExtendedReal::Infinite) => (false, false),
            (ExtendedReal::Finite(b), ExtendedReal::Finite(a)) => (a <= b + tol, b - a > tol),
        };
        DpiReport { before, after, holds, strict }
    }

    /// `before - after`, or `None` when either side is infinite.
    pub fn gap(&self) -> Option<f64> {
        Some(self.before.as_finite()? - self.after.as_finite()?)
    }
}

/// Applies `channel` to `X` and compares the measure before and after.
pub fn check_dpi(joint: &JointDistribution, channel: &TransitionMatrix, measure: Measure) -> Result<DpiReport> {
    check_dpi_with_tol(joint, channel, measure, DEFAULT_STRICTNESS_TOL)
}

pub fn check_dpi_with_tol(
    joint: &JointDistribution,
    channel: &TransitionMatrix,
    measure: Measure,
    tol: f64,
) -> Result<DpiReport> {
    let before = measure.mutual_information(joint)?;
    let after = measure.mutual_information(&joint.push_first(channel)?)?;
    Ok(DpiReport::compare(before, after, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(w: &[f64]) -> Distribution {
        Distribution::new(w.to_vec()).unwrap()
    }

    fn canonical() -> JointDistribution {
        JointDistribution::pairwise(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap()
    }

    fn finite(x: ExtendedReal) -> f64 {
        x.as_finite().unwrap()
    }

    #[test]
    fn generators_vanish_at_one() {
        for f in ConvexGenerator::ALL {
            assert_eq!(f.eval(1.0), 0.0, "{f}");
        }
    }

    #[test]
    fn f_divergence_examples() {
        let half = d(&[0.5, 0.5]);
        let skew = d(&[0.25, 0.75]);
        assert_eq!(finite(f_divergence(&half, &half, ConvexGenerator::Kl).unwrap()), 0.0);
        // 0.5 ln 2 + 0.5 ln(2/3)
        let expected = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
        let kl = finite(f_divergence(&half, &skew, ConvexGenerator::Kl).unwrap());
        assert!((kl - expected).abs() < 1e-15);
        assert!((kl - 0.1438410).abs() < 1e-6);
        let tvd = finite(f_divergence(&half, &skew, ConvexGenerator::Tvd).unwrap());
        assert!((tvd - 0.5).abs() < 1e-15);
        assert!(f_divergence(&half, &d(&[1.0, 0.0, 0.0]), ConvexGenerator::Kl).is_err());
    }

    #[test]
    fn f_divergence_zero_conventions() {
        let p = d(&[1.0, 0.0]);
        let q = d(&[0.0, 1.0]);
        assert_eq!(f_divergence(&p, &q, ConvexGenerator::Kl).unwrap(), ExtendedReal::Infinite);
        assert_eq!(finite(f_divergence(&p, &q, ConvexGenerator::Tvd).unwrap()), 2.0);
        assert_eq!(finite(f_divergence(&p, &q, ConvexGenerator::SquaredHellinger).unwrap()), 2.0);
        assert_eq!(f_divergence(&p, &q, ConvexGenerator::ChiSquared).unwrap(), ExtendedReal::Infinite);
        // p has mass only where q does: KL finite, the q-only cell costs nothing
        let r = d(&[0.5, 0.5]);
        assert!((finite(f_divergence(&p, &r, ConvexGenerator::Kl).unwrap()) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn proper_score_examples() {
        assert_eq!(proper_score(1, &Distribution::point_mass(3, 1).unwrap(), ScoringRule::Log).unwrap(), 0.0);
        let s = proper_score(0, &d(&[0.5, 0.5]), ScoringRule::Log).unwrap();
        assert!((s + std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(proper_score(0, &d(&[1.0, 0.0]), ScoringRule::Quadratic).unwrap(), 1.0);
        assert_eq!(proper_score(1, &d(&[1.0, 0.0]), ScoringRule::Log), Err(Error::LogOfZero));
        assert!(matches!(proper_score(4, &d(&[1.0, 0.0]), ScoringRule::Log), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn bregman_divergence_examples() {
        let p = d(&[0.3, 0.7]);
        for rule in ScoringRule::ALL {
            assert_eq!(finite(bregman_divergence(&p, &p, rule).unwrap()), 0.0);
        }
        let half = d(&[0.5, 0.5]);
        let skew = d(&[0.25, 0.75]);
        let log = finite(bregman_divergence(&half, &skew, ScoringRule::Log).unwrap());
        let kl = finite(f_divergence(&half, &skew, ConvexGenerator::Kl).unwrap());
        assert!((log - kl).abs() < 1e-15);
        assert!((log - 0.1438410).abs() < 1e-6);
        let brier = finite(bregman_divergence(&d(&[1.0, 0.0]), &d(&[0.0, 1.0]), ScoringRule::Quadratic).unwrap());
        assert_eq!(brier, 2.0);
        assert_eq!(bregman_divergence(&d(&[1.0, 0.0]), &d(&[0.0, 1.0]), ScoringRule::Log), Err(Error::LogOfZero));
    }

    #[test]
    fn bregman_matches_score_difference() {
        let p = d(&[0.2, 0.5, 0.3]);
        let q = d(&[0.4, 0.4, 0.2]);
        for rule in ScoringRule::ALL {
            let direct =
                rule.expected(p.weights(), p.weights()).unwrap() - rule.expected(p.weights(), q.weights()).unwrap();
            let termwise = finite(bregman_divergence(&p, &q, rule).unwrap());
            assert!((direct - termwise).abs() < 1e-14, "{rule}");
        }
    }

    #[test]
    fn f_mutual_information_examples() {
        let indep = JointDistribution::pairwise(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        for f in ConvexGenerator::ALL {
            assert_eq!(finite(f_mutual_information(&indep, f).unwrap()), 0.0);
        }
        let j = canonical();
        assert!((finite(f_mutual_information(&j, ConvexGenerator::Tvd).unwrap()) - 0.6).abs() < 1e-15);
        // 2·0.4 ln(0.4/0.25) + 2·0.1 ln(0.1/0.25)
        let oracle = 0.8 * (1.6f64).ln() + 0.2 * (0.4f64).ln();
        let kl = finite(f_mutual_information(&j, ConvexGenerator::Kl).unwrap());
        assert!((kl - oracle).abs() < 1e-15);
        assert!((kl - 0.1927448).abs() < 1e-6);
        assert_eq!(shannon_mi(&j).unwrap(), kl);
    }

    #[test]
    fn diagonal_joint_uses_missing_mass_convention() {
        let diag = JointDistribution::pairwise(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(finite(f_mutual_information(&diag, ConvexGenerator::Tvd).unwrap()), 1.0);
        assert!((shannon_mi(&diag).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(f_mutual_information(&diag, ConvexGenerator::ChiSquared).unwrap(), ExtendedReal::Infinite);
    }

    #[test]
    fn bregman_mi_examples() {
        let indep = JointDistribution::pairwise(vec![vec![0.1, 0.3], vec![0.15, 0.45]]).unwrap();
        for rule in ScoringRule::ALL {
            assert!(finite(bregman_mi(&indep, rule).unwrap()).abs() < 1e-15);
        }
        let j = canonical();
        let log = finite(bregman_mi(&j, ScoringRule::Log).unwrap());
        assert!((log - shannon_mi(&j).unwrap()).abs() < 1e-15);
        assert!((log - 0.1927448).abs() < 1e-6);
        // Σ_x 0.5 ((0.8-0.5)^2 + (0.2-0.5)^2)
        assert!((finite(bregman_mi(&j, ScoringRule::Quadratic).unwrap()) - 0.18).abs() < 1e-15);
    }

    #[test]
    fn conditional_mi_examples() {
        // X ⟂ Y given each z
        let a = JointDistribution::outer(&d(&[0.2, 0.8]), &d(&[0.6, 0.4]));
        let b = JointDistribution::outer(&d(&[0.7, 0.3]), &d(&[0.1, 0.9]));
        let mut data: Vec<f64> = a.data().iter().map(|v| 0.3 * v).collect();
        data.extend(b.data().iter().map(|v| 0.7 * v));
        let tensor = JointDistribution::from_flat(vec![2, 2, 2], data).unwrap();
        for m in [Measure::F(ConvexGenerator::Kl), Measure::Bregman(ScoringRule::Quadratic)] {
            assert!(finite(conditional_mi(&tensor, m).unwrap()).abs() < 1e-15);
        }
        let j = canonical();
        let trivial = j.as_trivially_conditioned().unwrap();
        for f in ConvexGenerator::ALL {
            assert_eq!(conditional_mi(&trivial, Measure::F(f)).unwrap(), f_mutual_information(&j, f).unwrap());
        }
        for rule in ScoringRule::ALL {
            assert_eq!(conditional_bregman_mi(&trivial, rule).unwrap(), bregman_mi(&j, rule).unwrap());
        }
    }

    #[test]
    fn conditional_bregman_log_equals_shannon() {
        let tensor = JointDistribution::from_flat(
            vec![2, 2, 3],
            vec![0.05, 0.1, 0.05, 0.1, 0.02, 0.08, 0.2, 0.05, 0.05, 0.1, 0.15, 0.05],
        )
        .unwrap();
        let log = finite(conditional_bregman_mi(&tensor, ScoringRule::Log).unwrap());
        let kl = finite(conditional_mi(&tensor, Measure::F(ConvexGenerator::Kl)).unwrap());
        assert!((log - kl).abs() < 1e-14);
    }

    fn fine_grained_oracle(table: &[[f64; 2]; 2]) -> bool {
        let px = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
        let py = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
        let mut ratios = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                if table[x][y] <= 0.0 {
                    return false;
                }
                ratios.push(px[x] * py[y] / table[x][y]);
            }
        }
        (0..4).all(|a| (a + 1..4).all(|b| ratios[a] != ratios[b]))
    }

    #[test]
    fn fine_grained_examples() {
        let sym = is_fine_grained(&canonical(), DEFAULT_FINE_GRAINED_TOL).unwrap();
        assert!(!sym.fine_grained);
        assert_eq!(sym.witness, Some(((0, 0), (1, 1))));

        let table = [[0.5, 0.2], [0.1, 0.2]];
        let j = JointDistribution::pairwise(table.iter().map(|r| r.to_vec()).collect()).unwrap();
        let got = is_fine_grained(&j, DEFAULT_FINE_GRAINED_TOL).unwrap();
        assert_eq!(got.fine_grained, fine_grained_oracle(&table));
        assert!(got.fine_grained);

        let zero = JointDistribution::pairwise(vec![vec![0.5, 0.0], vec![0.2, 0.3]]).unwrap();
        assert!(!is_fine_grained(&zero, DEFAULT_FINE_GRAINED_TOL).unwrap().fine_grained);
    }

    #[test]
    fn check_dpi_examples() {
        let j = canonical();
        let id = check_dpi(&j, &TransitionMatrix::identity(2), Measure::F(ConvexGenerator::Kl)).unwrap();
        assert_eq!(id.before, id.after);
        assert!(id.holds && !id.strict);

        let garble = TransitionMatrix::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let r = check_dpi(&j, &garble, Measure::F(ConvexGenerator::Tvd)).unwrap();
        assert!((finite(r.before) - 0.6).abs() < 1e-15);
        assert_eq!(finite(r.after), 0.0);
        assert!(r.holds && r.strict);

        let swap = TransitionMatrix::permutation(&[1, 0]).unwrap();
        for f in ConvexGenerator::ALL {
            let r = check_dpi(&j, &swap, Measure::F(f)).unwrap();
            assert!((finite(r.before) - finite(r.after)).abs() < 1e-12);
            assert!(r.holds && !r.strict);
        }
    }

    #[test]
    fn dpi_report_infinite_cases() {
        let inf = ExtendedReal::Infinite;
        let one = ExtendedReal::Finite(1.0);
        assert!(DpiReport::compare(inf, inf, 1e-10).holds);
        assert!(DpiReport::compare(inf, one, 1e-10).strict);
        assert!(!DpiReport::compare(one, inf, 1e-10).holds);
    }

    #[test]
    fn strictness_witnesses() {
        let p = [0.5, 0.3, 0.2];
        let q = [0.2, 0.3, 0.5];
        let merge = TransitionMatrix::new(vec![vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(strict_monotonicity_witness(&p, &q, &merge, 1e-9), Some((0, 0, 1)));
        assert_eq!(strict_monotonicity_witness(&p, &q, &TransitionMatrix::identity(3), 1e-9), None);
        // proportional p, q cannot be distinguished
        assert_eq!(strict_monotonicity_witness(&p, &p, &merge, 1e-9), None);

        let j = JointDistribution::pairwise(vec![vec![0.5, 0.2], vec![0.1, 0.2]]).unwrap();
        let garble = TransitionMatrix::new(vec![vec![0.7, 0.3], vec![0.2, 0.8]]).unwrap();
        assert!(dpi_strictness_witness(&j, &garble, 1e-9).unwrap().is_some());
        assert!(dpi_strictness_witness(&j, &TransitionMatrix::permutation(&[1, 0]).unwrap(), 1e-9).unwrap().is_none());
    }

    #[test]
    fn measure_parsing() {
        assert_eq!("kl".parse::<Measure>().unwrap(), Measure::F(ConvexGenerator::Kl));
        assert_eq!("bmi-log".parse::<Measure>().unwrap(), Measure::Bregman(ScoringRule::Log));
        assert_eq!("bmi-brier".parse::<Measure>().unwrap(), Measure::Bregman(ScoringRule::Quadratic));
        assert!("nope".parse::<Measure>().is_err());
        for m in [Measure::F(ConvexGenerator::ChiSquared), Measure::Bregman(ScoringRule::Quadratic)] {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
        }
    }

    #[test]
    fn extended_real_serde() {
        assert_eq!(serde_json::to_string(&ExtendedReal::Infinite).unwrap(), "\"inf\"");
        let back: ExtendedReal = serde_json::from_str("0.25").unwrap();
        assert_eq!(back, ExtendedReal::Finite(0.25));
        assert_eq!(serde_json::from_str::<ExtendedReal>("\"inf\"").unwrap(), ExtendedReal::Infinite);
    }
}
