//! Seeded block sampling shared by every Monte Carlo routine.
//!
//! Work is cut into fixed-size blocks; block `i` draws from its own ChaCha
//! stream, so output depends only on the seed and never on how many workers
//! ran the blocks.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::Rational;

pub const BLOCK: usize = 4096;

pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Splits `count` items into blocks of at most `BLOCK`: returns `(start, len)` pairs.
pub fn blocks(count: usize) -> Vec<(usize, usize)> {
    (0..count.div_ceil(BLOCK))
        .map(|i| (i * BLOCK, BLOCK.min(count - i * BLOCK)))
        .collect()
}

/// Evaluates `f` on `0..n` and returns results in index order.
/// `workers` ≤ 1 runs on the calling thread.
pub fn run_indexed<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers > 1 && n > 1 {
        use rayon::prelude::*;
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            return pool.install(|| (0..n).into_par_iter().map(&f).collect());
        }
    }
    let _ = workers;
    (0..n).map(f).collect()
}

/// Runs `f(rng, len)` on every block of `count` items and concatenates.
pub fn sample_blocks<T, F>(count: usize, seed: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> Vec<T> + Sync + Send,
{
    let bl = blocks(count);
    run_indexed(bl.len(), workers, |i| {
        let mut rng = block_rng(seed, i as u64);
        f(&mut rng, bl[i].1)
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Uniform point of the simplex `x + y + z = 1`, from two sorted uniforms.
pub fn uniform_simplex<R: Rng>(rng: &mut R) -> [f64; 3] {
    let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
    if u > v {
        std::mem::swap(&mut u, &mut v);
    }
    [u, v - u, 1.0 - v]
}

/// Uniform point of the ordered chamber `a ≥ b ≥ c`.
pub fn uniform_chamber<R: Rng>(rng: &mut R) -> [f64; 3] {
    let mut x = uniform_simplex(rng);
    x.sort_by(|p, q| q.total_cmp(p));
    x
}

/// Uniform lattice point of the open simplex with denominator `d`,
/// lengths `(x, y − x, d − y)/d` for distinct `0 < x < y < d`.
pub fn lattice_simplex<R: Rng>(rng: &mut R, d: i64) -> [Rational; 3] {
    loop {
        let (mut x, mut y) = (rng.gen_range(1..d), rng.gen_range(1..d));
        if x == y {
            continue;
        }
        if x > y {
            std::mem::swap(&mut x, &mut y);
        }
        let den = BigInt::from(d);
        return [x, y - x, d - y].map(|p| Rational::new(BigInt::from(p), den.clone()));
    }
}

/// Uniform point of the triangle with the given vertices.
pub fn uniform_triangle<R: Rng>(rng: &mut R, v: [[f64; 2]; 3]) -> [f64; 2] {
    let [w0, w1, w2] = uniform_simplex(rng);
    [
        w0 * v[0][0] + w1 * v[1][0] + w2 * v[2][0],
        w0 * v[0][1] + w1 * v[1][1] + w2 * v[2][1],
    ]
}
