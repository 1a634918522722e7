//! Roof function, first return to a loop cylinder, and the roof tail.
//!
//! The roof of a path `γ` at `λ` is `−ln ‖(B*_γ)⁻¹ λ‖₁`: the log of the
//! factor needed to bring the induced interval back to length one. Along a
//! run of accelerated steps it is the sum of `−ln(na − (n − 1))`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::fit;
use crate::graph::{cocycle_of, is_complete, PathError, PathStep, RauzyPath};
use crate::letter::Perm3;
use crate::markov::{apply_t, step_norm, Branch, ChartError, ChartPoint, MarkovCell};
use crate::matrix::{Mat3, StepMatrix};
use crate::measure::{chamber_generators, cone_mass};
use crate::rational::{self, Rational};
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RoofError {
    #[error("lengths lie outside the cylinder of the path")]
    OutsideCylinder,
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Roof of a graph path at exact letter-indexed lengths.
pub fn roof(lambda: &[Rational; 3], path: &RauzyPath) -> Result<f64, RoofError> {
    let b_star = cocycle_of(path)?.transpose().to_bigint();
    let inv = b_star.unimodular_inverse().expect("cocycles are unimodular");
    let v: Vec<Rational> = (0..3)
        .map(|i| (0..3).map(|j| Rational::from_integer(inv.0[i][j].clone()) * &lambda[j]).sum())
        .collect();
    if v.iter().any(|x| x.is_negative()) || v.iter().all(|x| x.is_zero()) {
        return Err(RoofError::OutsideCylinder);
    }
    let norm: Rational = v.iter().sum();
    Ok(-rational::ln(&norm))
}

/// Roof of the accelerated step taken at a chart point.
pub fn step_roof(p: &ChartPoint) -> Result<f64, ChartError> {
    let cell = crate::markov::cell_of(p)?;
    Ok(-step_norm(p.a, cell.n).ln())
}

/// Accelerated graph path realized by a sequence of cells from `start`.
pub fn cells_to_path(start: Perm3, cells: &[MarkovCell]) -> RauzyPath {
    let mut at = start;
    let mut steps = Vec::with_capacity(cells.len());
    for c in cells {
        let rel = match c.branch {
            Branch::Swap => Perm3::SWAP,
            Branch::Cycle => Perm3::CYCLE,
        };
        let to = at.then(rel);
        steps.push(PathStep { winner: at.first(), n: c.n, from: at, to });
        at = to;
    }
    RauzyPath { start, steps }
}

/// Relative ordering after a run of cells.
pub fn cells_relative_order(cells: &[MarkovCell]) -> Perm3 {
    cells_to_path(Perm3::IDENTITY, cells).end()
}

/// Product of the cells' length matrices: old sorted = M · new sorted.
pub fn cells_matrix(cells: &[MarkovCell]) -> Mat3<BigInt> {
    cells
        .iter()
        .fold(Mat3::<BigInt>::identity(), |acc, c| acc.mul(&c.matrix().to_bigint()))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoopError {
    #[error("loop is empty")]
    Empty,
    #[error("loop does not visit every letter as a winner")]
    Incomplete,
    #[error("loop cocycle is not strictly positive")]
    NotPositive,
    #[error("loop does not return to its starting ordering")]
    NotClosed,
}

/// A complete positive closed path, written as cells of the chart map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Loop {
    pub cells: Vec<MarkovCell>,
}

impl Loop {
    pub fn new(cells: Vec<MarkovCell>) -> Result<Self, LoopError> {
        if cells.is_empty() {
            return Err(LoopError::Empty);
        }
        let path = cells_to_path(Perm3::IDENTITY, &cells);
        if path.end() != Perm3::IDENTITY {
            return Err(LoopError::NotClosed);
        }
        if !is_complete(&path) {
            return Err(LoopError::Incomplete);
        }
        if !cocycle_of(&path).expect("cells give valid paths").all_positive() {
            return Err(LoopError::NotPositive);
        }
        Ok(Loop { cells })
    }

    /// Three cyclic single wins: every letter wins once and the ordering returns.
    pub fn default_loop() -> Self {
        Loop::new(vec![MarkovCell::new(1, Branch::Cycle); 3]).expect("default loop is valid")
    }

    pub fn path(&self) -> RauzyPath {
        cells_to_path(Perm3::IDENTITY, &self.cells)
    }

    /// Cone generators of the loop cylinder in sorted coordinates.
    pub fn cone(&self) -> Mat3<BigInt> {
        cells_matrix(&self.cells).mul(&chamber_generators().to_bigint())
    }

    /// Chart-normalized mass of the loop cylinder.
    pub fn mass(&self) -> Rational {
        cone_mass(&self.cone())
    }

    /// Chart vertices of the loop cylinder.
    pub fn vertices(&self) -> [[f64; 2]; 3] {
        let g = self.cone();
        std::array::from_fn(|j| {
            let col: [f64; 3] = std::array::from_fn(|i| rational::to_f64(&Rational::from_integer(g.0[i][j].clone())));
            let t: f64 = col.iter().sum();
            [col[0] / t, col[1] / t]
        })
    }

    pub fn exact_vertices(&self) -> [[Rational; 3]; 3] {
        let g = self.cone();
        std::array::from_fn(|j| {
            let t: BigInt = (0..3).map(|i| g.0[i][j].clone()).sum();
            std::array::from_fn(|i| Rational::new(g.0[i][j].clone(), t.clone()))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnRecord {
    pub start: [f64; 2],
    pub cells: Vec<MarkovCell>,
    pub return_point: [f64; 2],
    pub roof_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReturnOutcome {
    Returned(ReturnRecord, ChartPoint),
    /// The orbit fell into a hole after `depth` steps, having accumulated `roof`.
    Hole { depth: usize, roof: f64 },
    Tie { depth: usize, roof: f64 },
    NoReturn { depth: usize, roof: f64 },
}

impl ReturnOutcome {
    /// The accumulated roof, censored at holes, ties, and the depth cap.
    pub fn roof(&self) -> f64 {
        match self {
            ReturnOutcome::Returned(r, _) => r.roof_value,
            ReturnOutcome::Hole { roof, .. } | ReturnOutcome::Tie { roof, .. } | ReturnOutcome::NoReturn { roof, .. } => *roof,
        }
    }
}

/// Iterates `T` from `p` until the orbit re-enters the loop cylinder with the
/// loop's ordering, at least one full loop after the start.
pub fn first_return(p: &ChartPoint, lp: &Loop, cap: usize) -> ReturnOutcome {
    let l = lp.cells.len();
    let mut symbols: Vec<MarkovCell> = Vec::new();
    let mut states = vec![Perm3::IDENTITY];
    let mut points = vec![p.clone()];
    let mut roofs = vec![0.0];
    let mut t = 0usize;
    loop {
        // Symbols needed: positions 0..t+l.
        while symbols.len() < t + l {
            let depth = symbols.len();
            let here = points.last().unwrap();
            if depth >= cap {
                return ReturnOutcome::NoReturn { depth, roof: roofs[t] };
            }
            match apply_t(here) {
                Ok((next, cell)) => {
                    let r = -step_norm(here.a, cell.n).ln();
                    roofs.push(roofs.last().unwrap() + r);
                    let rel = cells_relative_order(&[cell]);
                    states.push(states.last().unwrap().then(rel));
                    symbols.push(cell);
                    points.push(next);
                }
                Err(e) if e.is_hole() => return ReturnOutcome::Hole { depth, roof: roofs[depth] },
                Err(_) => return ReturnOutcome::Tie { depth, roof: roofs[depth] },
            }
        }
        if t == 0 && symbols[..l] != lp.cells[..] {
            // Not in the section to begin with.
            return ReturnOutcome::NoReturn { depth: 0, roof: 0.0 };
        }
        if t >= l && states[t] == Perm3::IDENTITY && symbols[t..t + l] == lp.cells[..] {
            let q = points[t].clone();
            let rec = ReturnRecord {
                start: [p.a, p.b],
                cells: symbols[..t].to_vec(),
                return_point: [q.a, q.b],
                roof_value: roofs[t],
            };
            return ReturnOutcome::Returned(rec, q);
        }
        t += 1;
    }
}

/// Return point recomputed from the inverse of the return path's matrix.
pub fn return_point_by_inverse(start: &[Rational; 3], cells: &[MarkovCell]) -> [Rational; 3] {
    let inv = cells_matrix(cells).unimodular_inverse().expect("unimodular");
    let v: [Rational; 3] =
        std::array::from_fn(|i| (0..3).map(|j| Rational::from_integer(inv.0[i][j].clone()) * &start[j]).sum());
    let total: Rational = v.iter().sum();
    v.map(|x| x / &total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub thresholds: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub exceedances: Vec<u64>,
    pub fitted_exponent: f64,
    pub fit_residual: f64,
    /// Thresholds used in the fit: at least `MIN_EXCEEDANCES` samples above,
    /// and not every sample (below the smallest possible roof the curve is flat).
    pub fit_points: usize,
    pub samples: u64,
    pub returns: u64,
    pub holes: u64,
    pub ties: u64,
    pub no_returns: u64,
    /// Relative change of the running mean of `e^{σ r}`, `σ = δ̂/2`, over the last tenth of samples.
    pub moment_drift: f64,
    pub seed: u64,
}

pub const MIN_EXCEEDANCES: u64 = 100;

/// Default thresholds `T` for the roof tail.
pub fn default_tail_grid() -> Vec<f64> {
    log_grid(10.0, 1e5, 30)
}

impl TailCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,probability,exceedances\n");
        for ((t, p), e) in self.thresholds.iter().zip(&self.probabilities).zip(&self.exceedances) {
            out.push_str(&format!("{t:.17e},{p:.17e},{e}\n"));
        }
        out
    }
}

/// Geometric grid of `count` thresholds from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let step = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (step * i as f64).exp()).collect()
}

/// Samples the loop cylinder uniformly, runs first returns, and fits
/// `ln P(r ≥ ln T)` against `ln T`. Orbits that hit a hole or the cap
/// contribute the roof accumulated so far.
pub fn roof_tail(lp: &Loop, samples: u64, t_grid: &[f64], seed: u64, workers: usize, cap: usize) -> TailCurve {
    let v = lp.vertices();
    let outcomes: Vec<(f64, u8)> = sampling::sample_blocks(samples as usize, seed, workers, |rng, len| {
        (0..len)
            .map(|_| {
                let [a, b] = sampling::uniform_triangle(rng, v);
                let o = first_return(&ChartPoint::new(a, b), lp, cap);
                let kind = match o {
                    ReturnOutcome::Returned(..) => 0,
                    ReturnOutcome::Hole { .. } => 1,
                    ReturnOutcome::Tie { .. } => 2,
                    ReturnOutcome::NoReturn { .. } => 3,
                };
                (o.roof(), kind)
            })
            .collect()
    });
    let count = |k: u8| outcomes.iter().filter(|o| o.1 == k).count() as u64;
    let roofs: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let exceedances: Vec<u64> = t_grid
        .iter()
        .map(|t| roofs.iter().filter(|&&r| r >= t.ln()).count() as u64)
        .collect();
    let probabilities: Vec<f64> = exceedances.iter().map(|&e| e as f64 / samples as f64).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = t_grid
        .iter()
        .zip(&probabilities)
        .zip(&exceedances)
        .filter(|(_, &e)| e >= MIN_EXCEEDANCES && e < samples)
        .map(|((t, p), _)| (t.ln(), p.ln()))
        .unzip();
    let line = fit::least_squares(&xs, &ys);
    let delta = -line.slope;
    let sigma = delta / 2.0;
    let n = roofs.len();
    let cut = n - n / 10;
    let mean = |k: usize| roofs[..k].iter().map(|r| (sigma * r).exp()).sum::<f64>() / k as f64;
    let moment_drift = if n >= 10 && cut > 0 { (mean(n) / mean(cut) - 1.0).abs() } else { f64::NAN };
    TailCurve {
        thresholds: t_grid.to_vec(),
        probabilities,
        exceedances,
        fitted_exponent: delta,
        fit_residual: line.residual,
        fit_points: xs.len(),
        samples,
        returns: count(0),
        holes: count(1),
        ties: count(2),
        no_returns: count(3),
        moment_drift,
        seed,
    }
}

pub fn default_step_matrix(cell: MarkovCell) -> StepMatrix {
    cell.matrix()
}
