//! Exact path probabilities and Monte Carlo checks of the probabilistic estimates.
//!
//! For a weight vector `q`, the measure `ν_q` charges the cone of a path `γ`
//! with probability `N(q)/N(B_γ q)`, where `N` is the product of coordinates.

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{cocycle_of, PathError, RauzyPath};
use crate::letter::Perm3;
use crate::matrix::{CocycleMatrix, Mat3};
use crate::rational::{self, Rational};
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeasureError {
    #[error("weights must be positive")]
    NonPositiveWeight,
    #[error(transparent)]
    Path(#[from] PathError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightVector(#[serde(with = "rational::triple")] [Rational; 3]);

impl WeightVector {
    pub fn new(q: [Rational; 3]) -> Result<Self, MeasureError> {
        if q.iter().all(|x| x.is_positive()) {
            Ok(WeightVector(q))
        } else {
            Err(MeasureError::NonPositiveWeight)
        }
    }

    pub fn ones() -> Self {
        WeightVector([rational::one(), rational::one(), rational::one()])
    }

    pub fn as_array(&self) -> &[Rational; 3] {
        &self.0
    }

    pub fn to_f64(&self) -> [f64; 3] {
        self.0.clone().map(|x| rational::to_f64(&x))
    }
}

fn apply(b: &CocycleMatrix, q: &[Rational; 3]) -> [Rational; 3] {
    std::array::from_fn(|i| {
        (0..3)
            .map(|j| Rational::from_integer(BigInt::from(b.0[i][j].clone())) * &q[j])
            .sum()
    })
}

/// `N(q)/N(B_γ q)`.
pub fn path_probability(q: &WeightVector, path: &RauzyPath) -> Result<Rational, MeasureError> {
    let b = cocycle_of(path)?;
    let bq = apply(&b, &q.0);
    let n = |v: &[Rational; 3]| v.iter().product::<Rational>();
    Ok(n(&q.0) / n(&bq))
}

/// Weight vector transported along a path, `B_γ q`.
pub fn transport(q: &WeightVector, path: &RauzyPath) -> Result<WeightVector, MeasureError> {
    let b = cocycle_of(path)?;
    WeightVector::new(apply(&b, &q.0))
}

/// Mass of the cone of `γ` relative to the whole simplex.
pub fn cylinder_measure(path: &RauzyPath) -> Result<Rational, MeasureError> {
    path_probability(&WeightVector::ones(), path)
}

/// Unimodular generators of the ordered chamber `a ≥ b ≥ c`, in rank coordinates.
pub fn chamber_generators() -> Mat3<u64> {
    Mat3([[1, 1, 1], [0, 1, 1], [0, 0, 1]])
}

/// Mass of a simplicial cone `G·R³₊` with `|det G| = 1`, normalized so that
/// the ordered chamber has mass one: `6 / ∏ column sums`.
pub fn cone_mass(g: &Mat3<BigInt>) -> Rational {
    let sums = g.col_sums();
    let prod: BigInt = sums.iter().product();
    Rational::new(BigInt::from(6), prod)
}

/// Mass of the set of points in the chamber of `path.start` whose induction
/// follows `path`, normalized so that a chamber has mass one.
pub fn chamber_cylinder_measure(path: &RauzyPath) -> Result<Rational, MeasureError> {
    let b_star = cocycle_of(path)?.transpose();
    let g = b_star.to_bigint().mul(&rank_to_letter(path.end())).mul(&chamber_generators().to_bigint());
    Ok(cone_mass(&g))
}

/// Permutation matrix sending rank coordinates of `state` to letter coordinates.
pub fn rank_to_letter(state: Perm3) -> Mat3<BigInt> {
    let mut p = Mat3::<BigInt>::zero();
    for rank in 0..3 {
        p.0[state.at(rank).index()][rank] = BigInt::one();
    }
    p
}

pub fn as_cocycle_matrix(m: &Mat3<u64>) -> CocycleMatrix {
    m.to_biguint()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KerckhoffEstimate {
    pub threshold: f64,
    pub q: [f64; 3],
    pub samples: u64,
    pub hits: u64,
    pub frequency: f64,
    /// Binomial standard error at the bound `1/T`.
    pub sigma: f64,
    pub bound: f64,
    pub passes: bool,
}

/// Point distributed as `ν_q` restricted to the unit level set: `u_i / q_i`
/// with `u` uniform on the simplex.
pub fn sample_nu<R: Rng>(rng: &mut R, q: [f64; 3]) -> [f64; 3] {
    let u = sampling::uniform_simplex(rng);
    [u[0] / q[0], u[1] / q[1], u[2] / q[2]]
}

/// Number of consecutive wins of the largest coordinate, or 0 if it starts in a hole.
pub fn run_length(lambda: [f64; 3]) -> (usize, u64) {
    let w = (0..3).max_by(|&i, &j| lambda[i].total_cmp(&lambda[j])).unwrap();
    let s: f64 = (0..3).filter(|&j| j != w).map(|j| lambda[j]).sum();
    if lambda[w] <= s {
        return (w, 0);
    }
    (w, (lambda[w] / s).floor() as u64)
}

/// Kerckhoff-type event: some coordinate of `B_γ q` grows by more than `T`
/// during the first run of wins of a single letter.
pub fn mc_kerckhoff(t: f64, q: [f64; 3], samples: u64, seed: u64, workers: usize) -> KerckhoffEstimate {
    let hits: u64 = sampling::sample_blocks(samples as usize, seed, workers, |rng, len| {
        let mut h = 0u64;
        for _ in 0..len {
            let (w, n) = run_length(sample_nu(rng, q));
            let grows = (0..3).filter(|&j| j != w).any(|j| q[j] + n as f64 * q[w] > t * q[j]);
            h += grows as u64;
        }
        vec![h]
    })
    .into_iter()
    .sum();
    let bound = 1.0 / t;
    let sigma = (bound * (1.0 - bound) / samples as f64).sqrt();
    let frequency = hits as f64 / samples as f64;
    KerckhoffEstimate {
        threshold: t,
        q,
        samples,
        hits,
        frequency,
        sigma,
        bound,
        passes: frequency <= bound + 3.0 * sigma,
    }
}

/// Probability of at least `m` consecutive wins under Lebesgue measure: `3/(m+1)²`.
pub fn run_length_tail(m: u64) -> f64 {
    3.0 / ((m + 1) as f64).powi(2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub c_grid: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub samples: u64,
    /// Samples that fell into a hole before the path became complete.
    pub holes: u64,
    /// Samples still incomplete after `max_steps` accelerated steps.
    pub unfinished: u64,
}

impl BalanceReport {
    /// The first `C` in the grid with `P > 1/C`, if any.
    pub fn witness(&self) -> Option<f64> {
        self.c_grid
            .iter()
            .zip(&self.probabilities)
            .find(|(c, p)| **p > 1.0 / **c)
            .map(|(c, _)| *c)
    }
}

enum BalanceOutcome {
    Complete([f64; 3]),
    Hole,
    Unfinished,
}

/// Runs the induction until all three letters have won; returns `B_γ q`.
fn balanced_weights(mut lambda: [f64; 3], q: [f64; 3], max_steps: usize) -> BalanceOutcome {
    let mut bq = q;
    let mut won = [false; 3];
    for _ in 0..max_steps {
        let (w, n) = run_length(lambda);
        if n == 0 {
            return BalanceOutcome::Hole;
        }
        won[w] = true;
        // The path ends at the first win of the last letter.
        let n = if won.iter().all(|&x| x) { 1 } else { n };
        let s: f64 = (0..3).filter(|&j| j != w).map(|j| lambda[j]).sum();
        for j in (0..3).filter(|&j| j != w) {
            bq[j] += n as f64 * bq[w];
        }
        if won.iter().all(|&x| x) {
            return BalanceOutcome::Complete(bq);
        }
        lambda[w] -= n as f64 * s;
        let total: f64 = lambda.iter().sum();
        lambda = lambda.map(|x| x / total);
    }
    BalanceOutcome::Unfinished
}

/// Empirical `P_q(M(B_γ q) < C·min{m(B_γ q), M(q)})` over complete paths.
pub fn mc_balance(c_grid: &[f64], q: [f64; 3], samples: u64, seed: u64, workers: usize, max_steps: usize) -> BalanceReport {
    let mq = q.iter().cloned().fold(f64::MIN, f64::max);
    let per_block = sampling::sample_blocks(samples as usize, seed, workers, |rng, len| {
        let mut counts = vec![0u64; c_grid.len() + 2];
        for _ in 0..len {
            match balanced_weights(sample_nu(rng, q), q, max_steps) {
                BalanceOutcome::Complete(bq) => {
                    let big = bq.iter().cloned().fold(f64::MIN, f64::max);
                    let small = bq.iter().cloned().fold(f64::MAX, f64::min);
                    for (k, c) in c_grid.iter().enumerate() {
                        if big < c * small.min(mq) {
                            counts[k] += 1;
                        }
                    }
                }
                BalanceOutcome::Hole => counts[c_grid.len()] += 1,
                BalanceOutcome::Unfinished => counts[c_grid.len() + 1] += 1,
            }
        }
        vec![counts]
    });
    let mut totals = vec![0u64; c_grid.len() + 2];
    for counts in per_block {
        for (t, c) in totals.iter_mut().zip(counts) {
            *t += c;
        }
    }
    BalanceReport {
        c_grid: c_grid.to_vec(),
        probabilities: totals[..c_grid.len()].iter().map(|&h| h as f64 / samples as f64).collect(),
        samples,
        holes: totals[c_grid.len()],
        unfinished: totals[c_grid.len() + 1],
    }
}
