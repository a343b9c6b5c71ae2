//! Suites over bare information measures: data processing, Bregman quasi-monotonicity, accuracy gain.

use super::{any_channel, close, gap_bucket, pick, Outcome, SuiteConfig};
use crate::error::Result;
use crate::measures::{
    bregman_mi, check_dpi_with_tol, conditional_bregman_mi, conditional_mi, dpi_strictness_witness, f_divergence,
    f_mutual_information, is_fine_grained, shannon_mi, strict_monotonicity_witness, ConvexGenerator, DpiReport,
    ExtendedReal, Measure, ScoringRule, DEFAULT_FINE_GRAINED_TOL,
};
use crate::prob::{JointDistribution, RngSeed, TransitionMatrix};
use crate::random::{random_channel, random_distribution, random_joint, random_tensor, StrategyKind};

pub(super) fn dpi_instance(config: &SuiteConfig, seed: RngSeed) -> Result<Outcome> {
    let mut rng = seed.rng();
    let mut out = Outcome::default();
    let tol = config.tolerances.strictness;
    let m = pick(&mut rng, &config.alphabet_sizes);
    let cols = pick(&mut rng, &config.alphabet_sizes);
    let joint = random_joint(&mut rng, m, cols);
    let kind = StrategyKind::sample(&mut rng);
    let channel = random_channel(&mut rng, m, m, kind);
    let f = pick(&mut rng, &ConvexGenerator::ALL);

    let report = check_dpi_with_tol(&joint, &channel, Measure::F(f), config.tolerances.equality)?;
    out.check(report.holds, "dpi", || format!("{f:?} {kind:?}: before {} after {}", report.before, report.after));

    if channel.is_permutation() {
        out.check(close(report.before, report.after, 1e-12), "permutation-equality", || {
            format!("{f:?}: before {} after {}", report.before, report.after)
        });
        out.tally("equality:permutation");
    } else if channel.is_constant() {
        out.check(close(report.after, ExtendedReal::ZERO, 1e-12), "constant-zero", || {
            format!("{f:?}: after {}", report.after)
        });
    }

    let fine = is_fine_grained(&joint, DEFAULT_FINE_GRAINED_TOL)?.fine_grained;
    let witness = dpi_strictness_witness(&joint, &channel, DEFAULT_FINE_GRAINED_TOL)?;
    let strict_gap = report.gap().unwrap_or(f64::INFINITY);
    if f.is_strictly_convex() && !channel.is_permutation() {
        if fine || witness.is_some() {
            out.check(strict_gap > tol && report.strict, "strictness", || {
                format!("{f:?} {kind:?}: gap {strict_gap:e}, fine-grained {fine}, witness {witness:?}")
            });
            out.tally(gap_bucket("strict", strict_gap));
        } else {
            out.tally("no-witness");
        }
    } else if !f.is_strictly_convex() {
        out.tally("not-strictly-convex");
    }

    // divergence-level monotonicity on an independent pair
    let p = random_distribution(&mut rng, m);
    let q = random_distribution(&mut rng, m);
    let theta_cols = pick(&mut rng, &config.alphabet_sizes);
    let theta = any_channel(&mut rng, m, theta_cols);
    let before = f_divergence(&p, &q, f)?;
    let after = f_divergence(&p.apply_channel(&theta)?, &q.apply_channel(&theta)?, f)?;
    let div = DpiReport::compare(before, after, config.tolerances.equality);
    out.check(div.holds, "divergence-monotone", || format!("{f:?}: before {before} after {after}"));
    if f.is_strictly_convex() {
        if let Some(w) = strict_monotonicity_witness(p.weights(), q.weights(), &theta, DEFAULT_FINE_GRAINED_TOL) {
            let gap = div.gap().unwrap_or(f64::INFINITY);
            out.check(gap > tol, "divergence-strictness", || format!("{f:?}: witness {w:?} gap {gap:e}"));
        }
    }
    Ok(out)
}

pub(super) fn dpi_fixed(_config: &SuiteConfig) -> Result<(Outcome, Vec<String>)> {
    let mut out = Outcome::default();
    let joint = JointDistribution::pairwise(vec![vec![0.4, 0.1], vec![0.1, 0.4]])?;
    let garble = TransitionMatrix::constant(2, &crate::prob::Distribution::uniform(2)?);
    for f in ConvexGenerator::ALL {
        let r = check_dpi_with_tol(&joint, &garble, Measure::F(f), 1e-12)?;
        out.check(close(r.after, ExtendedReal::ZERO, 1e-15), "full-garbling", || format!("{f:?}: {}", r.after));
    }
    Ok((out, vec!["strict decrease is asserted whenever a merged pair of cells is distinguished".into()]))
}

pub(super) fn bregman_instance(config: &SuiteConfig, seed: RngSeed) -> Result<Outcome> {
    let mut rng = seed.rng();
    let mut out = Outcome::default();
    let tol = config.tolerances.equality;
    let rows = pick(&mut rng, &config.alphabet_sizes);
    let cols = pick(&mut rng, &config.alphabet_sizes);
    let joint = random_joint(&mut rng, rows, cols);
    let rule = pick(&mut rng, &ScoringRule::ALL);
    let kind = StrategyKind::sample(&mut rng);
    let out_cols = pick(&mut rng, &config.alphabet_sizes);
    let channel = random_channel(&mut rng, rows, out_cols, kind);

    let before = bregman_mi(&joint, rule)?;
    let after = bregman_mi(&joint.push_first(&channel)?, rule)?;
    out.check(DpiReport::compare(before, after, tol).holds, "first-entry-dpi", || {
        format!("{rule:?} {kind:?}: before {before} after {after}")
    });

    let identity = bregman_mi(&joint.push_first(&TransitionMatrix::identity(rows))?, rule)?;
    out.check(close(identity, before, 1e-12), "identity-equality", || format!("{rule:?}: {identity} vs {before}"));

    let log = bregman_mi(&joint, ScoringRule::Log)?.value();
    let shannon = shannon_mi(&joint)?;
    let kl = f_mutual_information(&joint, ConvexGenerator::Kl)?.value();
    out.check((log - shannon).abs() <= tol && (log - kl).abs() <= tol, "log-bmi-bridge", || {
        format!("log bmi {log}, shannon {shannon}, kl {kl}")
    });

    // second-entry processing carries no guarantee; only record what happens
    let second_channel = any_channel(&mut rng, cols, cols);
    let second = bregman_mi(&joint.push_second(&second_channel)?, rule)?;
    if let (Some(b), Some(a)) = (before.as_finite(), second.as_finite()) {
        if a > b + tol {
            out.tally(format!("second-entry-increase:{}", rule.name()));
            out.findings.push(format!(
                "{} bmi rises from {b} to {a} under second-entry processing of {:?} by {:?}",
                rule.name(),
                joint.to_rows(),
                second_channel.to_rows()
            ));
        } else {
            out.tally(format!("second-entry-decrease:{}", rule.name()));
        }
    }
    Ok(out)
}

/// `E[L(Y, Pr[Y|Z,X]) - L(Y, Pr[Y|Z])]` computed cell by cell; `score(y, post)` is the reward `L`.
fn accuracy_gain(tensor: &JointDistribution, score: impl Fn(usize, &[f64]) -> Result<f64>) -> Result<f64> {
    let shape = tensor.shape();
    let (mz, mx, my) = (shape[0], shape[1], shape[2]);
    let mut total = 0.0;
    for z in 0..mz {
        let pzy: Vec<f64> = (0..my).map(|y| (0..mx).map(|x| tensor.get3(z, x, y)).sum()).collect();
        let pz: f64 = pzy.iter().sum();
        if pz <= 0.0 {
            continue;
        }
        let prior: Vec<f64> = pzy.iter().map(|v| v / pz).collect();
        for x in 0..mx {
            let pzx: f64 = (0..my).map(|y| tensor.get3(z, x, y)).sum();
            if pzx <= 0.0 {
                continue;
            }
            let post: Vec<f64> = (0..my).map(|y| tensor.get3(z, x, y) / pzx).collect();
            for y in 0..my {
                let w = tensor.get3(z, x, y);
                if w > 0.0 {
                    total += w * (score(y, &post)? - score(y, &prior)?);
                }
            }
        }
    }
    Ok(total)
}

fn ln_score(y: usize, p: &[f64]) -> Result<f64> {
    Ok(p[y].ln())
}

pub(super) fn accuracy_gain_instance(config: &SuiteConfig, seed: RngSeed) -> Result<Outcome> {
    let mut rng = seed.rng();
    let mut out = Outcome::default();
    let tol = config.tolerances.equality;
    let mz = pick(&mut rng, &config.alphabet_sizes);
    let mx = pick(&mut rng, &config.alphabet_sizes);
    let my = pick(&mut rng, &config.alphabet_sizes);
    let tensor = random_tensor(&mut rng, mz, mx, my);

    let gain = accuracy_gain(&tensor, ln_score)?;
    let info = conditional_mi(&tensor, Measure::F(ConvexGenerator::Kl))?.value();
    out.check((gain - info).abs() <= tol, "log-identity", || format!("gain {gain} vs I(X;Y|Z) {info}"));

    let quad = ScoringRule::Quadratic;
    let gain_q = accuracy_gain(&tensor, |y, p| quad.score(y, p))?;
    let info_q = conditional_bregman_mi(&tensor, quad)?.value();
    out.check((gain_q - info_q).abs() <= tol, "quadratic-identity", || format!("gain {gain_q} vs bmi {info_q}"));

    // X ⟂ Y | Z by construction
    let pz = random_distribution(&mut rng, mz);
    let px: Vec<_> = (0..mz).map(|_| random_distribution(&mut rng, mx)).collect();
    let py: Vec<_> = (0..mz).map(|_| random_distribution(&mut rng, my)).collect();
    let data: Vec<f64> = (0..mz)
        .flat_map(|z| {
            let (pz, px, py) = (&pz, &px, &py);
            (0..mx).flat_map(move |x| (0..my).map(move |y| pz.get(z) * px[z].get(x) * py[z].get(y)))
        })
        .collect();
    let ci = JointDistribution::from_flat(vec![mz, mx, my], data)?;
    let gain_ci = accuracy_gain(&ci, ln_score)?;
    let info_ci = conditional_mi(&ci, Measure::F(ConvexGenerator::Kl))?.value();
    out.check(gain_ci.abs() <= tol && info_ci.abs() <= tol, "conditional-independence", || {
        format!("gain {gain_ci}, info {info_ci}")
    });

    let pair = random_joint(&mut rng, mx, my);
    let trivial = pair.as_trivially_conditioned()?;
    let gain_t = accuracy_gain(&trivial, ln_score)?;
    let shannon = shannon_mi(&pair)?;
    out.check((gain_t - shannon).abs() <= tol, "trivial-z", || format!("gain {gain_t} vs I(X;Y) {shannon}"));
    Ok(out)
}
