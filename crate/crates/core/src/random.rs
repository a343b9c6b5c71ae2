//! Seeded generators for random distributions, joints, channels and permutations.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::prob::{Distribution, JointDistribution, TransitionMatrix};

/// Shape of a randomly drawn channel or strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Every row drawn uniformly from the simplex.
    Dense,
    /// Every row supported on a random subset of about half the outputs.
    Sparse,
    Permutation,
    /// All rows equal: the output ignores the input.
    Constant,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] =
        [StrategyKind::Dense, StrategyKind::Sparse, StrategyKind::Permutation, StrategyKind::Constant];

    /// Draws a kind with weights 40/20/20/20.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> StrategyKind {
        match rng.random_range(0..10) {
            0..=3 => StrategyKind::Dense,
            4 | 5 => StrategyKind::Sparse,
            6 | 7 => StrategyKind::Permutation,
            _ => StrategyKind::Constant,
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "dense" => Ok(StrategyKind::Dense),
            "sparse" => Ok(StrategyKind::Sparse),
            "permutation" => Ok(StrategyKind::Permutation),
            "constant" => Ok(StrategyKind::Constant),
            other => Err(crate::Error::InvalidArgument(format!("unknown strategy kind {other:?}"))),
        }
    }
}

/// Unit exponential draws normalized: a uniform point of the simplex.
pub fn simplex_weights<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..m).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let sum: f64 = raw.iter().sum();
        if sum > 0.0 {
            return raw.into_iter().map(|w| w / sum).collect();
        }
    }
}

pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Distribution {
    Distribution::from_raw(simplex_weights(rng, m))
}

pub fn random_joint<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> JointDistribution {
    JointDistribution::from_raw(vec![rows, cols], simplex_weights(rng, rows * cols))
}

/// Random symmetric pairwise joint on an `m × m` alphabet.
pub fn random_symmetric_joint<R: Rng + ?Sized>(rng: &mut R, m: usize) -> JointDistribution {
    let upper = simplex_weights(rng, m * (m + 1) / 2);
    let mut data = vec![0.0; m * m];
    let mut k = 0;
    for x in 0..m {
        for y in x..m {
            if x == y {
                data[x * m + y] = upper[k];
            } else {
                data[x * m + y] = upper[k] / 2.0;
                data[y * m + x] = upper[k] / 2.0;
            }
            k += 1;
        }
    }
    JointDistribution::from_raw(vec![m, m], data)
}

/// Random `(Z, X, Y)` tensor.
pub fn random_tensor<R: Rng + ?Sized>(rng: &mut R, mz: usize, mx: usize, my: usize) -> JointDistribution {
    JointDistribution::from_raw(vec![mz, mx, my], simplex_weights(rng, mz * mx * my))
}

/// Random binary joint with `Q(0,0)Q(1,1) > Q(0,1)Q(1,0)`, i.e. agreement on
/// each signal strictly more likely than under independence.
pub fn random_positively_correlated_binary<R: Rng + ?Sized>(rng: &mut R) -> JointDistribution {
    loop {
        let w = simplex_weights(rng, 4);
        let det = w[0] * w[3] - w[1] * w[2];
        if det > 1e-9 {
            return JointDistribution::from_raw(vec![2, 2], w);
        }
        if det < -1e-9 {
            return JointDistribution::from_raw(vec![2, 2], vec![w[1], w[0], w[3], w[2]]);
        }
    }
}

pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(rng);
    perm
}

/// Random row-stochastic `rows × cols` channel of the given kind.
///
/// `Permutation` requires `rows == cols`; for rectangular shapes it falls back
/// to a deterministic-function channel mapping each row to one random column.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, kind: StrategyKind) -> TransitionMatrix {
    match kind {
        StrategyKind::Dense => {
            let data = (0..rows).flat_map(|_| simplex_weights(rng, cols)).collect();
            TransitionMatrix::from_parts(rows, cols, data)
        }
        StrategyKind::Sparse => {
            let support = cols.div_ceil(2);
            let mut data = vec![0.0; rows * cols];
            for r in 0..rows {
                let mut idx: Vec<usize> = (0..cols).collect();
                idx.shuffle(rng);
                let w = simplex_weights(rng, support);
                for (c, v) in idx.into_iter().take(support).zip(w) {
                    data[r * cols + c] = v;
                }
            }
            TransitionMatrix::from_parts(rows, cols, data)
        }
        StrategyKind::Permutation if rows == cols => {
            TransitionMatrix::permutation(&random_permutation(rng, rows)).expect("shuffled indices form a permutation")
        }
        StrategyKind::Permutation => {
            let mut data = vec![0.0; rows * cols];
            for r in 0..rows {
                data[r * cols + rng.random_range(0..cols)] = 1.0;
            }
            TransitionMatrix::from_parts(rows, cols, data)
        }
        StrategyKind::Constant => TransitionMatrix::constant(rows, &random_distribution(rng, cols)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::RngSeed;

    #[test]
    fn generated_objects_are_normalized() {
        let mut rng = RngSeed(1).rng();
        for m in 2..5 {
            let d = random_distribution(&mut rng, m);
            assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let j = random_symmetric_joint(&mut rng, m);
            assert_eq!(j, j.transpose().unwrap());
            assert!((j.total_mass() - 1.0).abs() < 1e-12);
            for kind in StrategyKind::ALL {
                let c = random_channel(&mut rng, m, m + 1, kind);
                for r in 0..c.rows() {
                    assert!((c.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn kinds_have_their_shape() {
        let mut rng = RngSeed(2).rng();
        assert!(random_channel(&mut rng, 3, 3, StrategyKind::Permutation).is_permutation());
        assert!(random_channel(&mut rng, 3, 3, StrategyKind::Constant).is_constant());
        let sparse = random_channel(&mut rng, 4, 4, StrategyKind::Sparse);
        for r in 0..4 {
            assert!(sparse.row(r).iter().filter(|&&v| v > 0.0).count() <= 2);
        }
    }

    #[test]
    fn positively_correlated_binary() {
        let mut rng = RngSeed(3).rng();
        for _ in 0..100 {
            let j = random_positively_correlated_binary(&mut rng);
            assert!(j.get(0, 0) * j.get(1, 1) > j.get(0, 1) * j.get(1, 0));
        }
    }
}
