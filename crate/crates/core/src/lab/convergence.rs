//! Convergence of the empirical f-mutual-information mechanism to its exact payment.

use rayon::prelude::*;

use super::{sweep_medians, Outcome, SuiteConfig, SweepRow};
use crate::agents::{generate_reports, Prior, Scenario};
use crate::error::Result;
use crate::measures::{f_mutual_information, ConvexGenerator};
use crate::mechanisms::{fmi_mechanism_payments, Pairing};
use crate::prob::{JointDistribution, RngSeed};

pub const QUESTION_GRID: [usize; 3] = [1_000, 10_000, 100_000];
/// Largest acceptable median gap at the end of the grid.
pub const FINAL_GAP: f64 = 0.02;

fn canonical() -> Result<JointDistribution> {
    JointDistribution::pairwise(vec![vec![0.4, 0.1], vec![0.1, 0.4]])
}

/// For each question count `T` and seed: `|empirical TVD payment - exact payment|` for
/// two truthful agents on the canonical binary prior.
pub fn sweep_fmi_t(grid: &[usize], seeds: usize, seed: RngSeed) -> Result<Vec<SweepRow>> {
    let q = canonical()?;
    let exact = f_mutual_information(&q, ConvexGenerator::Tvd)?.value();
    let scenario = Scenario::truthful(Prior::symmetric(q)?, 2)?;
    let cells: Vec<(usize, usize)> = grid.iter().flat_map(|&t| (0..seeds).map(move |s| (t, s))).collect();
    let results: Vec<Result<SweepRow>> = cells
        .par_iter()
        .map(|&(t, s)| {
            let trial = seed.child(t as u64).child(s as u64);
            let reports = generate_reports(&scenario, t, trial)?;
            let paid = fmi_mechanism_payments(&reports, ConvexGenerator::Tvd, Pairing::AllPairs, trial)?;
            Ok(SweepRow {
                grid_point: t,
                seed: trial.0,
                metric: "payment_gap".into(),
                value: (paid.agents[0].payment - exact).abs(),
            })
        })
        .collect();
    results.into_iter().collect()
}

pub(super) fn fmi_convergence_block(config: &SuiteConfig) -> Result<(Outcome, Vec<String>)> {
    let mut out = Outcome::default();
    let rows = sweep_fmi_t(&QUESTION_GRID, config.instances, RngSeed(config.seed))?;
    let medians = sweep_medians(&rows, "payment_gap");
    for w in medians.windows(2) {
        out.check(w[1].1 < w[0].1, "median-decrease", || {
            format!("median gap {} at T={} not below {} at T={}", w[1].1, w[1].0, w[0].1, w[0].0)
        });
    }
    if let Some(&(t, last)) = medians.last() {
        out.check(last < FINAL_GAP, "final-gap", || format!("median gap {last} at T={t}"));
    }
    for (t, m) in &medians {
        out.tally(format!("median-gap:T={t}:{}", super::gap_bucket("", *m).trim_start_matches(':')));
    }
    let notes = vec![format!(
        "median payment gap by T: {}",
        medians.iter().map(|(t, m)| format!("{t}: {m:.6}")).collect::<Vec<_>>().join(", ")
    )];
    Ok((out, notes))
}
