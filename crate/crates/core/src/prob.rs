//! Finite-alphabet probability primitives.
//!
//! Signals are indices `0..m`. A [`Distribution`] is a probability vector, a
//! [`JointDistribution`] is either a pairwise table over `(X, Y)` or a rank-3
//! tensor over `(Z, X, Y)` used for conditional measures, and a
//! [`TransitionMatrix`] is a row-stochastic channel `M[x][x']`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance applied when validating that weights or rows sum to one.
pub const NORMALIZATION_TOL: f64 = 1e-9;

fn check_weights(weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let mut sum = 0.0;
    for (index, &w) in weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::NonFiniteWeight { index });
        }
        if w < 0.0 {
            return Err(Error::NegativeWeight { index, value: w });
        }
        sum += w;
    }
    Ok(sum)
}

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    /// Normalizes non-negative weights into a distribution.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let sum = check_weights(&weights)?;
        if sum <= 0.0 {
            return Err(Error::ZeroMass);
        }
        let weights = weights.into_iter().map(|w| w / sum).collect();
        Ok(Self { weights })
    }

    /// Accepts weights that already sum to one (within [`NORMALIZATION_TOL`]).
    pub fn from_probabilities(weights: Vec<f64>) -> Result<Self> {
        let sum = check_weights(&weights)?;
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { weights })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Self { weights: vec![1.0 / m as f64; m] })
    }

    pub fn point_mass(m: usize, index: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyAlphabet);
        }
        if index >= m {
            return Err(Error::IndexOutOfRange { index, size: m });
        }
        let mut weights = vec![0.0; m];
        weights[index] = 1.0;
        Ok(Self { weights })
    }

    pub(crate) fn from_raw(weights: Vec<f64>) -> Distribution {
        Distribution { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, index: usize) -> f64 {
        self.weights[index]
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, lambda: f64, other: &Distribution) -> Result<Distribution> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { context: "mixture", expected: self.len(), found: other.len() });
        }
        let weights = self.weights.iter().zip(&other.weights).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        Ok(Distribution { weights })
    }

    /// Distribution of `channel(X)` when `X ~ self`.
    pub fn apply_channel(&self, channel: &TransitionMatrix) -> Result<Distribution> {
        apply_channel(self, channel)
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Distribution::from_probabilities(value)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(value: Distribution) -> Self {
        value.weights
    }
}

/// `make_distribution`: normalize raw weights.
pub fn make_distribution(weights: &[f64]) -> Result<Distribution> {
    Distribution::new(weights.to_vec())
}

/// A joint distribution stored row-major.
///
/// Rank 2 is the pairwise mode over `(X, Y)`; rank 3 is the conditional mode
/// over `(Z, X, Y)` where `Z` is the conditioning variable.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl JointDistribution {
    fn validated(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::EmptyAlphabet);
        }
        let sum = check_weights(&data)?;
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { shape, data })
    }

    /// Pairwise joint from a table `table[x][y]`.
    pub fn pairwise(table: Vec<Vec<f64>>) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyAlphabet);
        }
        let mut data = Vec::with_capacity(rows * cols);
        for row in table {
            if row.len() != cols {
                return Err(Error::DimensionMismatch { context: "joint table row", expected: cols, found: row.len() });
            }
            data.extend(row);
        }
        Self::validated(vec![rows, cols], data)
    }

    /// Conditional-mode tensor from `tensor[z][x][y]`.
    pub fn conditional(tensor: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let mz = tensor.len();
        let mx = tensor.first().map_or(0, Vec::len);
        let my = tensor.first().and_then(|s| s.first()).map_or(0, Vec::len);
        if mz == 0 || mx == 0 || my == 0 {
            return Err(Error::EmptyAlphabet);
        }
        let mut data = Vec::with_capacity(mz * mx * my);
        for slice in tensor {
            if slice.len() != mx {
                return Err(Error::DimensionMismatch { context: "tensor slice", expected: mx, found: slice.len() });
            }
            for row in slice {
                if row.len() != my {
                    return Err(Error::DimensionMismatch { context: "tensor row", expected: my, found: row.len() });
                }
                data.extend(row);
            }
        }
        Self::validated(vec![mz, mx, my], data)
    }

    /// Builds a joint from flat row-major data with the given shape (rank 2 or 3).
    pub fn from_flat(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.len() != 2 && shape.len() != 3 {
            return Err(Error::WrongRank { expected: 2, found: shape.len() });
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::DimensionMismatch { context: "flat joint data", expected, found: data.len() });
        }
        Self::validated(shape, data)
    }

    /// Pairwise joint proportional to non-negative counts.
    pub fn from_counts(rows: usize, cols: usize, counts: &[f64]) -> Result<Self> {
        if counts.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "count table",
                expected: rows * cols,
                found: counts.len(),
            });
        }
        let sum = check_weights(counts)?;
        if sum <= 0.0 {
            return Err(Error::ZeroMass);
        }
        let data = counts.iter().map(|c| c / sum).collect();
        Self::validated(vec![rows, cols], data)
    }

    /// Product joint `p ⊗ q`.
    pub fn outer(p: &Distribution, q: &Distribution) -> JointDistribution {
        let data = p.weights().iter().flat_map(|a| q.weights().iter().map(move |b| a * b)).collect();
        JointDistribution { shape: vec![p.len(), q.len()], data }
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// `(rows, cols)` of a pairwise joint.
    pub fn dims(&self) -> Result<(usize, usize)> {
        self.require_rank(2)?;
        Ok((self.shape[0], self.shape[1]))
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn total_mass(&self) -> f64 {
        self.data.iter().sum()
    }

    pub(crate) fn require_rank(&self, rank: usize) -> Result<()> {
        if self.rank() != rank {
            return Err(Error::WrongRank { expected: rank, found: self.rank() });
        }
        Ok(())
    }

    /// Entry `(x, y)` of a pairwise joint.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert_eq!(self.rank(), 2);
        self.data[x * self.shape[1] + y]
    }

    /// Entry `(z, x, y)` of a conditional-mode tensor.
    pub fn get3(&self, z: usize, x: usize, y: usize) -> f64 {
        debug_assert_eq!(self.rank(), 3);
        self.data[(z * self.shape[1] + x) * self.shape[2] + y]
    }

    /// Rows of a pairwise joint as nested vectors.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let cols = *self.shape.last().unwrap();
        self.data.chunks(cols).map(<[f64]>::to_vec).collect()
    }

    pub fn to_tensor(&self) -> Vec<Vec<Vec<f64>>> {
        let (mx, my) = (self.shape[1], self.shape[2]);
        self.data.chunks(mx * my).map(|s| s.chunks(my).map(<[f64]>::to_vec).collect()).collect()
    }

    /// Row-sum and column-sum distributions of a pairwise joint.
    pub fn marginals(&self) -> Result<(Distribution, Distribution)> {
        let (rows, cols) = self.dims()?;
        let mut px = vec![0.0; rows];
        let mut py = vec![0.0; cols];
        for (x, px) in px.iter_mut().enumerate() {
            for (y, py) in py.iter_mut().enumerate() {
                let v = self.get(x, y);
                *px += v;
                *py += v;
            }
        }
        Ok((Distribution { weights: px }, Distribution { weights: py }))
    }

    /// `V[x][y] = P(x) P(y)`.
    pub fn product_of_marginals(&self) -> Result<JointDistribution> {
        let (px, py) = self.marginals()?;
        Ok(JointDistribution::outer(&px, &py))
    }

    pub fn transpose(&self) -> Result<JointDistribution> {
        let (rows, cols) = self.dims()?;
        let mut data = vec![0.0; rows * cols];
        for x in 0..rows {
            for y in 0..cols {
                data[y * rows + x] = self.get(x, y);
            }
        }
        Ok(JointDistribution { shape: vec![cols, rows], data })
    }

    /// Joint of `(M(X), Y)` where the channel acts on `X` only.
    pub fn push_first(&self, channel: &TransitionMatrix) -> Result<JointDistribution> {
        let (rows, cols) = self.dims()?;
        if channel.rows() != rows {
            return Err(Error::DimensionMismatch {
                context: "push_first channel rows",
                expected: rows,
                found: channel.rows(),
            });
        }
        let out_rows = channel.cols();
        let mut data = vec![0.0; out_rows * cols];
        for x in 0..rows {
            for xp in 0..out_rows {
                let w = channel.get(x, xp);
                if w == 0.0 {
                    continue;
                }
                for y in 0..cols {
                    data[xp * cols + y] += w * self.get(x, y);
                }
            }
        }
        Ok(JointDistribution { shape: vec![out_rows, cols], data })
    }

    /// Joint of `(X, M(Y))` where the channel acts on `Y` only.
    pub fn push_second(&self, channel: &TransitionMatrix) -> Result<JointDistribution> {
        self.transpose()?.push_first(channel)?.transpose()
    }

    /// Marginal of the conditioning variable `Z` of a conditional-mode tensor.
    pub fn z_marginal(&self) -> Result<Distribution> {
        self.require_rank(3)?;
        let slice = self.shape[1] * self.shape[2];
        let weights = self.data.chunks(slice).map(|s| s.iter().sum()).collect();
        Ok(Distribution { weights })
    }

    /// Pairwise joint of `(X, Y)` given `Z = z`.
    pub fn condition_on(&self, z: usize) -> Result<JointDistribution> {
        self.require_rank(3)?;
        if z >= self.shape[0] {
            return Err(Error::IndexOutOfRange { index: z, size: self.shape[0] });
        }
        let slice = self.shape[1] * self.shape[2];
        let values = &self.data[z * slice..(z + 1) * slice];
        let mass: f64 = values.iter().sum();
        if mass <= 0.0 {
            return Err(Error::ZeroConditioningEvent { index: z });
        }
        Ok(JointDistribution {
            shape: vec![self.shape[1], self.shape[2]],
            data: values.iter().map(|v| v / mass).collect(),
        })
    }

    /// Pairwise joint of `(X, Y)` with `Z` summed out.
    pub fn sum_out_z(&self) -> Result<JointDistribution> {
        self.require_rank(3)?;
        let slice = self.shape[1] * self.shape[2];
        let mut data = vec![0.0; slice];
        for chunk in self.data.chunks(slice) {
            for (d, v) in data.iter_mut().zip(chunk) {
                *d += v;
            }
        }
        Ok(JointDistribution { shape: vec![self.shape[1], self.shape[2]], data })
    }

    /// Wraps a pairwise joint as a tensor with a single-valued `Z`.
    pub fn as_trivially_conditioned(&self) -> Result<JointDistribution> {
        let (rows, cols) = self.dims()?;
        Ok(JointDistribution { shape: vec![1, rows, cols], data: self.data.clone() })
    }

    /// Entrywise `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, lambda: f64, other: &JointDistribution) -> Result<JointDistribution> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch {
                context: "joint mixture",
                expected: self.data.len(),
                found: other.data.len(),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        Ok(JointDistribution { shape: self.shape.clone(), data })
    }

    /// Largest absolute entrywise difference between two joints of equal shape.
    pub fn max_abs_diff(&self, other: &JointDistribution) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch {
                context: "joint comparison",
                expected: self.data.len(),
                found: other.data.len(),
            });
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    pub(crate) fn from_raw(shape: Vec<usize>, data: Vec<f64>) -> JointDistribution {
        JointDistribution { shape, data }
    }
}

pub fn marginals(joint: &JointDistribution) -> Result<(Distribution, Distribution)> {
    joint.marginals()
}

pub fn product_of_marginals(joint: &JointDistribution) -> Result<JointDistribution> {
    joint.product_of_marginals()
}

pub fn push_first(joint: &JointDistribution, channel: &TransitionMatrix) -> Result<JointDistribution> {
    joint.push_first(channel)
}

pub fn condition_on(joint: &JointDistribution, z: usize) -> Result<JointDistribution> {
    joint.condition_on(z)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JointRepr {
    Matrix(Vec<Vec<f64>>),
    Tensor(Vec<Vec<Vec<f64>>>),
}

impl Serialize for JointDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr =
            if self.rank() == 2 { JointRepr::Matrix(self.to_rows()) } else { JointRepr::Tensor(self.to_tensor()) };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for JointDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = JointRepr::deserialize(deserializer)?;
        match repr {
            JointRepr::Matrix(rows) => JointDistribution::pairwise(rows),
            JointRepr::Tensor(t) => JointDistribution::conditional(t),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// A row-stochastic matrix `M[x][x']` = Pr[output x' | input x].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct TransitionMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    /// `Some(perm)` iff the matrix is a permutation with row `i` mapped to `perm[i]`.
    permutation: Option<Vec<usize>>,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::EmptyAlphabet);
        }
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    context: "transition matrix row",
                    expected: n_cols,
                    found: row.len(),
                });
            }
            let sum = check_weights(&row)?;
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::NotRowStochastic { row: r, sum });
            }
            data.extend(row);
        }
        Ok(Self::from_parts(n_rows, n_cols, data))
    }

    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        let permutation = detect_permutation(rows, cols, &data);
        Self { rows, cols, data, permutation }
    }

    pub fn identity(m: usize) -> Self {
        let perm: Vec<usize> = (0..m).collect();
        Self::permutation(&perm).expect("identity is a permutation")
    }

    /// Permutation channel sending signal `i` to `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let m = perm.len();
        if m == 0 {
            return Err(Error::EmptyAlphabet);
        }
        let mut seen = vec![false; m];
        for &p in perm {
            if p >= m || seen[p] {
                return Err(Error::NotPermutation);
            }
            seen[p] = true;
        }
        let mut data = vec![0.0; m * m];
        for (i, &p) in perm.iter().enumerate() {
            data[i * m + p] = 1.0;
        }
        Ok(Self::from_parts(m, m, data))
    }

    /// Channel whose every row equals `dist` (signal-independent output).
    pub fn constant(rows: usize, dist: &Distribution) -> Self {
        let data = (0..rows).flat_map(|_| dist.weights().iter().copied()).collect();
        Self::from_parts(rows, dist.len(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn is_permutation(&self) -> bool {
        self.permutation.is_some()
    }

    pub fn is_identity(&self) -> bool {
        self.permutation.as_ref().is_some_and(|p| p.iter().enumerate().all(|(i, &j)| i == j))
    }

    /// The index map of a permutation channel.
    pub fn as_permutation(&self) -> Option<&[usize]> {
        self.permutation.as_deref()
    }

    /// Whether every row is identical (output independent of input).
    pub fn is_constant(&self) -> bool {
        let first = self.row(0);
        (1..self.rows).all(|r| self.row(r).iter().zip(first).all(|(a, b)| (a - b).abs() <= 1e-15))
    }

    /// The inverse of a permutation channel.
    pub fn inverse_permutation(&self) -> Result<Self> {
        let perm = self.as_permutation().ok_or(Error::NotPermutation)?;
        let mut inv = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        Self::permutation(&inv)
    }

    /// Channel of applying `self` first, then `next`.
    pub fn then(&self, next: &TransitionMatrix) -> Result<Self> {
        if self.cols != next.rows {
            return Err(Error::DimensionMismatch {
                context: "channel composition",
                expected: self.cols,
                found: next.rows,
            });
        }
        let mut data = vec![0.0; self.rows * next.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..next.cols {
                    data[i * next.cols + j] += a * next.get(k, j);
                }
            }
        }
        Ok(Self::from_parts(self.rows, next.cols, data))
    }

    /// `lambda * self + (1 - lambda) * other`, entrywise.
    pub fn mix(&self, lambda: f64, other: &TransitionMatrix) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "channel mixture",
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        Ok(Self::from_parts(self.rows, self.cols, data))
    }

    pub fn max_abs_diff(&self, other: &TransitionMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn detect_permutation(rows: usize, cols: usize, data: &[f64]) -> Option<Vec<usize>> {
    if rows != cols {
        return None;
    }
    let mut perm = Vec::with_capacity(rows);
    let mut used = vec![false; cols];
    for r in 0..rows {
        let row = &data[r * cols..(r + 1) * cols];
        let mut hit = None;
        for (c, &v) in row.iter().enumerate() {
            if v == 1.0 {
                if hit.is_some() {
                    return None;
                }
                hit = Some(c);
            } else if v != 0.0 {
                return None;
            }
        }
        let c = hit?;
        if used[c] {
            return None;
        }
        used[c] = true;
        perm.push(c);
    }
    Some(perm)
}

impl TryFrom<Vec<Vec<f64>>> for TransitionMatrix {
    type Error = Error;

    fn try_from(value: Vec<Vec<f64>>) -> Result<Self> {
        TransitionMatrix::new(value)
    }
}

impl From<TransitionMatrix> for Vec<Vec<f64>> {
    fn from(value: TransitionMatrix) -> Self {
        value.to_rows()
    }
}

/// `output[j] = Σ_i channel[i][j] · dist[i]`.
pub fn apply_channel(dist: &Distribution, channel: &TransitionMatrix) -> Result<Distribution> {
    if dist.len() != channel.rows() {
        return Err(Error::DimensionMismatch { context: "apply_channel", expected: channel.rows(), found: dist.len() });
    }
    let mut out = vec![0.0; channel.cols()];
    for (i, &p) in dist.weights().iter().enumerate() {
        for (o, &c) in out.iter_mut().zip(channel.row(i)) {
            *o += p * c;
        }
    }
    Ok(Distribution { weights: out })
}

/// Seed for the library's PRNG (ChaCha8). Equal seeds give equal streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent child seed for stream `index`, via SplitMix64 finalization.
    pub fn child(self, index: u64) -> RngSeed {
        let mut z = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

impl From<u64> for RngSeed {
    fn from(value: u64) -> Self {
        RngSeed(value)
    }
}

/// Draws one index from `dist` by inverse-CDF lookup.
pub fn draw<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in dist.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// `count` iid draws from `dist`, deterministic per seed.
pub fn sample(dist: &Distribution, seed: RngSeed, count: usize) -> Vec<usize> {
    let mut rng = seed.rng();
    (0..count).map(|_| draw(dist.weights(), &mut rng)).collect()
}
