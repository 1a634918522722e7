//! Invariant suites: each runs one family of checks and reports counts and
//! the worst margin seen, for the CLI `verify` command and the tests.

use num_bigint::BigInt;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dimension;
use crate::graph::{self, PathStep, RauzyPath};
use crate::markov::{self, Branch, ChartPoint, MarkovCell};
use crate::measure;
use crate::rational::{self, Rational};
use crate::sampling;
use crate::suspension;
use crate::system::{AcceleratedOutcome, SpecialSystem};

/// Distortion constant for same-cell pairs.
pub const DISTORTION_C: f64 = 36.0;
/// Relative tolerance for `e^{3r} = |DT|`.
pub const ROOF_JACOBIAN_TOL: f64 = 1e-9;
pub const KERCKHOFF_THRESHOLDS: [f64; 4] = [2.0, 5.0, 10.0, 100.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub checked: u64,
    pub violations: u64,
    /// Worst distance to the bound, positive when inside.
    pub worst_margin: f64,
    pub detail: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, seed: Option<u64>, samples: Option<u64>, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        SuiteReport { suite: suite.to_string(), passed, seed, samples, checks }
    }
}

pub fn lemma2(max_len: usize) -> SuiteReport {
    let g = graph::build_graph();
    let r = graph::check_complete_paths_positive(&g, max_len);
    let v = r.violations.len() as u64;
    let check = Check {
        name: format!("complete paths of length <= {max_len} are positive"),
        passed: v == 0 && r.complete_paths > 0,
        checked: r.complete_paths,
        violations: v,
        worst_margin: 0.0,
        detail: json!({ "paths_checked": r.paths_checked, "complete_paths": r.complete_paths }),
    };
    SuiteReport::new("lemma2", None, None, vec![check])
}

/// Uniform point of the cell triangle in the chart.
pub fn sample_in_cell<R: Rng>(rng: &mut R, cell: MarkovCell) -> ChartPoint {
    let v = cell.vertices().map(|p| p.map(|x| rational::to_f64(&x)));
    let [a, b] = sampling::uniform_triangle(rng, v);
    ChartPoint::new(a, b)
}

/// Random cell with `n ≤ nmax` (uniform counter, uniform branch) and a
/// point inside it that classifies to it in floating point.
fn cell_sample<R: Rng>(rng: &mut R, nmax: u64) -> (MarkovCell, ChartPoint, u32) {
    let mut rejected = 0;
    loop {
        let n = rng.gen_range(1..=nmax);
        let branch = if rng.gen::<bool>() { Branch::Swap } else { Branch::Cycle };
        let cell = MarkovCell::new(n, branch);
        let p = sample_in_cell(rng, cell);
        if markov::cell_of(&p) == Ok(cell) {
            return (cell, p, rejected);
        }
        rejected += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionStats {
    pub pairs: u64,
    /// Largest `|J₁/J₂ − 1| / dist(T p₁, T p₂)` seen.
    pub worst_constant: f64,
    pub worst_cell: Option<MarkovCell>,
    pub violations: u64,
    pub rejected: u64,
}

/// Same-cell pairs: `|J(p₁)/J(p₂) − 1| ≤ C · dist(T p₁, T p₂)`.
pub fn distortion(pairs: u64, nmax: u64, seed: u64, workers: usize) -> DistortionStats {
    let rows: Vec<(f64, MarkovCell, u32)> = sampling::sample_blocks(pairs as usize, seed, workers, |rng, len| {
        (0..len)
            .map(|_| loop {
                let (cell, p1, r) = cell_sample(rng, nmax);
                let p2 = sample_in_cell(rng, cell);
                if markov::cell_of(&p2) != Ok(cell) {
                    continue;
                }
                let (t1, _) = markov::apply_t(&p1).expect("classified point");
                let (t2, _) = markov::apply_t(&p2).expect("classified point");
                let j1 = markov::jacobian(&p1).unwrap();
                let j2 = markov::jacobian(&p2).unwrap();
                let d = t1.dist(&t2);
                if d == 0.0 {
                    continue;
                }
                break ((j1 / j2 - 1.0).abs() / d, cell, r);
            })
            .collect()
    });
    let mut worst = (0.0, None);
    for &(k, cell, _) in &rows {
        if k > worst.0 {
            worst = (k, Some(cell));
        }
    }
    DistortionStats {
        pairs,
        worst_constant: worst.0,
        worst_cell: worst.1,
        violations: rows.iter().filter(|r| r.0 > DISTORTION_C).count() as u64,
        rejected: rows.iter().map(|r| r.2 as u64).sum(),
    }
}

pub fn lemma3(samples: u64, nmax: u64, seed: u64, workers: usize) -> SuiteReport {
    let lower = (4.0f64 / 3.0).powi(3);
    // (lower margin, upper margin relative to (n+1)^3)
    let rows: Vec<(f64, f64)> = sampling::sample_blocks(samples as usize, seed, workers, |rng, len| {
        (0..len)
            .map(|_| {
                let (cell, p, _) = cell_sample(rng, nmax);
                let j = markov::jacobian(&p).unwrap();
                (j - lower, ((cell.n + 1) as f64).powi(3) - j)
            })
            .collect()
    });
    let bad = rows.iter().filter(|r| !(r.0 > 0.0 && r.1 > 0.0)).count() as u64;
    let worst = rows.iter().map(|r| r.0.min(r.1)).fold(f64::INFINITY, f64::min);
    let expansion = Check {
        name: format!("(4/3)^3 < |DT| < (n+1)^3, n <= {nmax}"),
        passed: bad == 0,
        checked: samples,
        violations: bad,
        worst_margin: worst,
        detail: json!({ "nmax": nmax }),
    };
    let d = distortion(samples, nmax, seed.wrapping_add(1), workers);
    let dist = Check {
        name: format!("same-cell distortion with C = {DISTORTION_C}"),
        passed: d.violations == 0,
        checked: d.pairs,
        violations: d.violations,
        worst_margin: DISTORTION_C - d.worst_constant,
        detail: serde_json::to_value(&d).unwrap(),
    };
    SuiteReport::new("lemma3", Some(seed), Some(samples), vec![expansion, dist])
}

pub fn kerckhoff(samples: u64, seed: u64, workers: usize) -> SuiteReport {
    let checks = KERCKHOFF_THRESHOLDS
        .iter()
        .map(|&t| {
            let e = measure::mc_kerckhoff(t, [1.0; 3], samples, seed, workers);
            Check {
                name: format!("frequency <= 1/T + 3 sigma at T = {t}"),
                passed: e.passes,
                checked: e.samples,
                violations: u64::from(!e.passes),
                worst_margin: e.bound - e.frequency,
                detail: serde_json::to_value(&e).unwrap(),
            }
        })
        .collect();
    SuiteReport::new("kerckhoff", Some(seed), Some(samples), checks)
}

/// Random exact system with a non-hole first accelerated step.
fn exact_step_sample<R: Rng>(rng: &mut R) -> (SpecialSystem, crate::system::AcceleratedStep) {
    loop {
        let l = sampling::lattice_simplex(rng, 1 << 40);
        let Ok(sys) = SpecialSystem::from_lengths(l) else { continue };
        if let AcceleratedOutcome::Continue(step) = sys.accelerated_step() {
            return (sys, step);
        }
    }
}

/// `e^{3 r} = |DT|` where `r` is the ℓ¹ roof of one accelerated step,
/// computed from the cocycle, and `|DT|` from the chart formula.
pub fn roof_jacobian(samples: u64, seed: u64, workers: usize) -> SuiteReport {
    let errs: Vec<f64> = sampling::sample_blocks(samples as usize, seed, workers, |rng, len| {
        (0..len)
            .map(|_| {
                let (sys, step) = exact_step_sample(rng);
                let path = RauzyPath {
                    start: sys.order(),
                    steps: vec![PathStep { winner: step.winner, n: step.n, from: sys.order(), to: step.system.order() }],
                };
                let r = suspension::roof(sys.lengths().as_array(), &path).expect("point lies in its own cylinder");
                let p = ChartPoint::from_exact_lengths(sys.lengths().as_array().clone());
                match markov::jacobian(&p) {
                    Ok(j) => ((3.0 * r).exp() - j).abs() / j,
                    Err(_) => f64::INFINITY,
                }
            })
            .collect()
    });
    let worst = errs.iter().copied().fold(0.0, f64::max);
    let bad = errs.iter().filter(|&&e| !(e < ROOF_JACOBIAN_TOL)).count() as u64;
    let check = Check {
        name: format!("|exp(3r) - |DT|| / |DT| < {ROOF_JACOBIAN_TOL:e}"),
        passed: bad == 0,
        checked: samples,
        violations: bad,
        worst_margin: ROOF_JACOBIAN_TOL - worst,
        detail: json!({ "worst_relative_error": worst }),
    };
    SuiteReport::new("roof-jacobian", Some(seed), Some(samples), vec![check])
}

pub fn partition(ncap: u64) -> SuiteReport {
    let mut checks = Vec::new();
    for depth in [1, 2] {
        let p = dimension::partition_check(depth, ncap);
        checks.push(Check {
            name: format!("exact partition of unity at depth {depth}"),
            passed: p.passes(),
            checked: p.parents_checked,
            violations: p.parents_checked - p.parents_conserved + u64::from(p.total != rational::one()),
            worst_margin: 0.0,
            detail: serde_json::to_value(&p).unwrap(),
        });
    }
    let (lo, hi) = dimension::survivor_mass_exact(1, ncap);
    let target = rational::ratio(3, 4);
    let inside = lo <= target && target <= hi;
    checks.push(Check {
        name: "depth-1 survivor bracket contains 3/4".into(),
        passed: inside,
        checked: 1,
        violations: u64::from(!inside),
        worst_margin: rational::to_f64(&(&target - &lo)).min(rational::to_f64(&(&hi - &target))),
        detail: json!({ "lower": rational::format_rational(&lo), "upper": rational::format_rational(&hi) }),
    });
    SuiteReport::new("partition", None, None, checks)
}

/// Chart point fixed by `T` inside `cell`: the Perron direction of the
/// cell matrix, by power iteration.
pub fn perron_point(cell: MarkovCell, iters: usize) -> ChartPoint {
    let m = cell.matrix().to_f64();
    let mut v = [1.0 / 3.0; 3];
    for _ in 0..iters {
        let w = m.mul_vec(&v);
        let s: f64 = w.iter().sum();
        v = w.map(|x| x / s);
    }
    ChartPoint::new(v[0], v[1])
}

/// Rational approximant of the Perron point: `M^k · (6,3,2)` normalized.
/// The seed is a point of the chart with no ties among its lengths.
pub fn perron_approximant(cell: MarkovCell, k: u64) -> [Rational; 3] {
    let m = cell.matrix().to_bigint().pow(k);
    let seed = [6, 3, 2].map(BigInt::from);
    let v: [Rational; 3] = std::array::from_fn(|i| Rational::from_integer((0..3).map(|j| &m.0[i][j] * &seed[j]).sum()));
    let total: Rational = v.iter().sum();
    v.map(|x| x / &total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        assert!(lemma2(6).passed);
        assert!(lemma3(2000, 100, 3, 1).passed);
        assert!(roof_jacobian(500, 3, 1).passed);
        assert!(partition(8).passed);
    }

    #[test]
    fn perron_point_is_fixed() {
        let cell = MarkovCell::new(1, Branch::Cycle);
        let p = perron_point(cell, 200);
        let (q, c) = markov::apply_t(&p).unwrap();
        assert_eq!(c, cell);
        assert!(q.dist(&p) < 1e-12, "{p:?} {q:?}");
    }
}
