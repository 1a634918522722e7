//! Cylinder enumeration, survivor masses, decay exponents and box counting.
//!
//! Cylinders live in sorted coordinates. The cylinder of a cell word `P` is
//! the cone `M_P·K·R³₊` where `K` generates the ordered chamber, and its mass
//! is `6/∏ colsums`. Inside any cylinder the next accelerated step splits it
//! exactly into
//!
//! * the immediate hole `P·H₀`, `H₀ = cone{(1,1,1), (1,1,0), (2,1,1)}`,
//! * the cells `P·M_{n,β}·K` for `n ≤ N`,
//! * the holes after `k` wins `P·S^k·H₀` for `1 ≤ k < N`, `S` the staying step,
//! * the remainder `P·S^N·K` of longer runs.
//!
//! `X_d` is the set of points whose first `d − 1` accelerated steps are cells
//! and whose `d`-th step starts (the largest length exceeds one half).

use std::collections::HashSet;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::fit;
use crate::graph::{cocycle_of, RauzyPath};
use crate::letter::Perm3;
use crate::markov::{Branch, MarkovCell};
use crate::matrix::{CocycleMatrix, Mat3};
use crate::measure::{chamber_generators, cone_mass};
use crate::rational::{self, Rational};
use crate::sampling;
use crate::suspension::cells_to_path;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DimensionError {
    #[error("survivor bracket too wide at depth {depth}: width/midpoint = {ratio:.3}; raise the counter cap or lower the measure floor")]
    BracketTooWide { depth: usize, ratio: f64 },
    #[error("point cloud spans fewer than two boxes at the coarsest size")]
    DegenerateCloud,
    #[error("inputs must be positive")]
    NonPositiveInput,
    #[error("invalid budget: {0}")]
    Budget(&'static str),
}

pub fn stay_matrix() -> Mat3<u64> {
    Mat3([[1, 1, 1], [0, 1, 0], [0, 0, 1]])
}

pub fn hole_generators() -> Mat3<u64> {
    Mat3([[1, 1, 2], [1, 1, 1], [1, 0, 1]])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CylinderKind {
    /// A cell cylinder of full depth.
    Cell,
    /// Points of the parent that fall into a hole after `after` wins.
    Hole { after: u64 },
    /// Points of the parent with more than `cap` wins.
    Remainder { cap: u64 },
    /// A cell cylinder below the measure floor, not refined further.
    Pruned,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    /// Cells of the path; for hole and remainder records, those of the parent.
    pub cells: Vec<MarkovCell>,
    pub kind: CylinderKind,
    pub measure: Rational,
}

impl Cylinder {
    pub fn depth(&self) -> usize {
        self.cells.len()
    }

    pub fn survives(&self) -> bool {
        matches!(self.kind, CylinderKind::Cell)
    }

    pub fn path(&self) -> RauzyPath {
        cells_to_path(Perm3::IDENTITY, &self.cells)
    }

    pub fn cocycle(&self) -> CocycleMatrix {
        cocycle_of(&self.path()).expect("cell words are valid paths")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "path": self.path().steps,
            "kind": self.kind,
            "measure": rational::format_rational(&self.measure),
            "survives": self.survives(),
        })
    }
}

fn big(m: &Mat3<u64>) -> Mat3<BigInt> {
    m.to_bigint()
}

fn cells_up_to(ncap: u64) -> impl Iterator<Item = MarkovCell> {
    (1..=ncap).flat_map(|n| [MarkovCell::new(n, Branch::Swap), MarkovCell::new(n, Branch::Cycle)])
}

/// Exact depth-first enumeration. Every parent is split exactly; cells whose
/// mass is below `floor` are emitted as `Pruned` and not refined.
pub fn enumerate_cylinders(depth: usize, floor: &Rational, ncap: u64, mut emit: impl FnMut(Cylinder)) {
    fn go(
        cells: &mut Vec<MarkovCell>,
        m: &Mat3<BigInt>,
        depth: usize,
        floor: &Rational,
        ncap: u64,
        emit: &mut impl FnMut(Cylinder),
    ) {
        let k = big(&chamber_generators());
        let h = big(&hole_generators());
        let s = big(&stay_matrix());
        emit(Cylinder { cells: cells.clone(), kind: CylinderKind::Hole { after: 0 }, measure: cone_mass(&m.mul(&h)) });
        let mut stay = m.clone();
        for n in 1..=ncap {
            for branch in [Branch::Swap, Branch::Cycle] {
                let cell = MarkovCell::new(n, branch);
                let child = m.mul(&big(&cell.matrix()));
                let mass = cone_mass(&child.mul(&k));
                cells.push(cell);
                if cells.len() == depth {
                    emit(Cylinder { cells: cells.clone(), kind: CylinderKind::Cell, measure: mass });
                } else if &mass < floor {
                    emit(Cylinder { cells: cells.clone(), kind: CylinderKind::Pruned, measure: mass });
                } else {
                    go(cells, &child, depth, floor, ncap, emit);
                }
                cells.pop();
            }
            stay = stay.mul(&s);
            if n < ncap {
                emit(Cylinder { cells: cells.clone(), kind: CylinderKind::Hole { after: n }, measure: cone_mass(&stay.mul(&h)) });
            }
        }
        emit(Cylinder { cells: cells.clone(), kind: CylinderKind::Remainder { cap: ncap }, measure: cone_mass(&stay.mul(&k)) });
    }
    assert!(depth >= 1);
    go(&mut Vec::new(), &Mat3::identity(), depth, floor, ncap, &mut emit);
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionLevel {
    pub depth: usize,
    #[serde(with = "rational")]
    pub cells: Rational,
    #[serde(with = "rational")]
    pub holes: Rational,
    #[serde(with = "rational")]
    pub remainder: Rational,
    #[serde(with = "rational")]
    pub total: Rational,
    pub parents_checked: u64,
    pub parents_conserved: u64,
}

impl PartitionLevel {
    pub fn passes(&self) -> bool {
        self.total == rational::one() && self.parents_checked == self.parents_conserved
    }
}

/// Exact partition of unity at `depth`: full-depth cells, every hole record,
/// and every remainder record sum to one. Each parent is also checked
/// individually against its own mass.
pub fn partition_check(depth: usize, ncap: u64) -> PartitionLevel {
    let zero = || rational::int(0);
    let (mut cells, mut holes, mut remainder) = (zero(), zero(), zero());
    // Per-parent sums keyed by the parent word.
    let mut parent_sums: std::collections::BTreeMap<Vec<MarkovCell>, Rational> = Default::default();
    enumerate_cylinders(depth, &zero(), ncap, |c| {
        let parent = match c.kind {
            CylinderKind::Cell | CylinderKind::Pruned => c.cells[..c.cells.len() - 1].to_vec(),
            _ => c.cells.clone(),
        };
        *parent_sums.entry(parent).or_insert_with(zero) += &c.measure;
        match c.kind {
            CylinderKind::Cell | CylinderKind::Pruned => cells += &c.measure,
            CylinderKind::Hole { .. } => holes += &c.measure,
            CylinderKind::Remainder { .. } => remainder += &c.measure,
        }
    });
    let k = big(&chamber_generators());
    let mut conserved = 0;
    for (parent, sum) in &parent_sums {
        let m = parent.iter().fold(Mat3::<BigInt>::identity(), |acc, c| acc.mul(&big(&c.matrix())));
        // Children that were refined contribute their own children, so add their mass back.
        let refined: Rational = if parent.len() + 1 < depth {
            cells_up_to(ncap)
                .map(|c| cone_mass(&m.mul(&big(&c.matrix())).mul(&k)))
                .sum()
        } else {
            zero()
        };
        if sum + refined == cone_mass(&m.mul(&k)) {
            conserved += 1;
        }
    }
    let total = &cells + &holes + &remainder;
    PartitionLevel {
        depth,
        cells,
        holes,
        remainder,
        total,
        parents_checked: parent_sums.len() as u64,
        parents_conserved: conserved,
    }
}

/// Exact `μ(X_d)` over words with counters at most `ncap`, and the exact
/// discarded mass that bounds it from above.
pub fn survivor_mass_exact(depth: usize, ncap: u64) -> (Rational, Rational) {
    if depth == 0 {
        return (rational::one(), rational::one());
    }
    let k = big(&chamber_generators());
    let h = big(&hole_generators());
    let s = big(&stay_matrix());
    let mut words = vec![Mat3::<BigInt>::identity()];
    let mut discarded = rational::int(0);
    for _ in 1..depth {
        let mut next = Vec::new();
        for m in &words {
            for c in cells_up_to(ncap) {
                next.push(m.mul(&big(&c.matrix())));
            }
            discarded += cone_mass(&m.mul(&s.pow(ncap)).mul(&k));
        }
        words = next;
    }
    let lower: Rational = words
        .iter()
        .map(|m| cone_mass(&m.mul(&k)) - cone_mass(&m.mul(&h)))
        .sum();
    let upper = &lower + discarded;
    (lower, upper)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassBracket {
    pub depth: usize,
    pub lower: f64,
    pub upper: f64,
    /// Cell words enumerated at depth − 1.
    pub words: u64,
}

impl MassBracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn relative_width(&self) -> f64 {
        (self.upper - self.lower) / self.midpoint()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn exact_lower(&self) -> Rational {
        rational::from_f64(self.lower).expect("finite")
    }

    pub fn exact_upper(&self) -> Rational {
        rational::from_f64(self.upper).expect("finite")
    }
}

type M128 = [[u128; 3]; 3];

fn mul128(a: &M128, b: &Mat3<u64>) -> M128 {
    let mut out = [[0u128; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b.0[k][j] as u128).sum();
        }
    }
    out
}

/// `6/∏ colsums(a·G)` in floating point.
fn mass_f64(a: &M128, g: &Mat3<u64>) -> f64 {
    let mut prod = 1.0f64;
    for j in 0..3 {
        let col: u128 = (0..3).map(|i| (0..3).map(|k| a[i][k] * g.0[k][j] as u128).sum::<u128>()).sum();
        prod *= col as f64;
    }
    6.0 / prod
}

#[derive(Clone, Debug, Default)]
struct Sums {
    /// `lower[d]`: enumerated contribution to μ(X_d).
    lower: Vec<f64>,
    /// `discard[j]`: mass given up while refining words of length j.
    discard: Vec<f64>,
    words: Vec<u64>,
    terms: u64,
}

impl Sums {
    fn new(max_depth: usize) -> Self {
        Sums { lower: vec![0.0; max_depth + 1], discard: vec![0.0; max_depth + 1], words: vec![0; max_depth + 1], terms: 0 }
    }

    fn merge(&mut self, o: &Sums) {
        for (a, b) in self.lower.iter_mut().zip(&o.lower) {
            *a += b;
        }
        for (a, b) in self.discard.iter_mut().zip(&o.discard) {
            *a += b;
        }
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a += b;
        }
        self.terms += o.terms;
    }
}

struct Budget {
    max_depth: usize,
    ncap: u64,
    floor: f64,
    cells: Vec<(Mat3<u64>, MarkovCell)>,
}

fn refine(m: &M128, len: usize, b: &Budget, sums: &mut Sums) {
    let k = chamber_generators();
    let h = hole_generators();
    // Contribution of this word to X_{len+1}.
    sums.lower[len + 1] += mass_f64(m, &k) - mass_f64(m, &h);
    sums.words[len + 1] += 1;
    sums.terms += 1;
    if len + 1 >= b.max_depth {
        return;
    }
    let mut last_n = b.ncap;
    for (i, (cm, cell)) in b.cells.iter().enumerate() {
        let child = mul128(m, cm);
        let mass = mass_f64(&child, &k);
        if mass < b.floor {
            sums.discard[len] += mass;
            sums.terms += 1;
            // Masses decrease in n: once both branches of a counter are
            // below the floor, give up the rest of the run in one piece.
            if cell.branch == Branch::Cycle {
                let (swap_m, _) = &b.cells[i - 1];
                if mass_f64(&mul128(m, swap_m), &k) < b.floor {
                    last_n = cell.n;
                    break;
                }
            }
            continue;
        }
        refine(&child, len + 1, b, sums);
    }
    // Everything beyond counter `last_n` (cells and holes alike).
    let mut stay: M128 = *m;
    let s = stay_matrix();
    for _ in 0..last_n {
        stay = mul128(&stay, &s);
    }
    sums.discard[len] += mass_f64(&stay, &k);
    sums.terms += 1;
}

/// Brackets of `μ(X_d)` for `d = 0..=max_depth`. Work is split over the
/// first-level cells; results are summed in a fixed order.
pub fn survivor_masses(max_depth: usize, ncap: u64, floor: f64, workers: usize) -> Result<Vec<MassBracket>, DimensionError> {
    if ncap == 0 || floor < 0.0 {
        return Err(DimensionError::Budget("counter cap must be positive and floor non-negative"));
    }
    let budget = Budget {
        max_depth,
        ncap,
        floor,
        cells: cells_up_to(ncap).map(|c| (c.matrix(), c)).collect(),
    };
    let id: M128 = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    let mut sums = Sums::new(max_depth);
    if max_depth >= 1 {
        let k = chamber_generators();
        let h = hole_generators();
        sums.lower[1] += mass_f64(&id, &k) - mass_f64(&id, &h);
        sums.words[1] += 1;
    }
    if max_depth >= 2 {
        let parts = sampling::run_indexed(budget.cells.len(), workers, |i| {
            let mut part = Sums::new(max_depth);
            let child = mul128(&id, &budget.cells[i].0);
            let mass = mass_f64(&child, &chamber_generators());
            if mass < budget.floor {
                part.discard[0] += mass;
            } else {
                refine(&child, 1, &budget, &mut part);
            }
            part
        });
        for p in &parts {
            sums.merge(p);
        }
        let s = stay_matrix();
        let mut stay = id;
        for _ in 0..ncap {
            stay = mul128(&stay, &s);
        }
        sums.discard[0] += mass_f64(&stay, &chamber_generators());
    }
    // Rounding: each term carries a few ulps, naive summation adds at most
    // `terms` more; widen both ends by that much.
    let slack = (sums.terms as f64 + 8.0) * f64::EPSILON;
    let mut out = vec![MassBracket { depth: 0, lower: 1.0, upper: 1.0, words: 1 }];
    let mut discarded = 0.0;
    for d in 1..=max_depth {
        if d >= 2 {
            discarded += sums.discard[d - 2];
        }
        let lo = sums.lower[d];
        let up = lo + discarded;
        out.push(MassBracket {
            depth: d,
            lower: (lo * (1.0 - slack)).max(0.0),
            upper: (up * (1.0 + slack)).min(1.0),
            words: sums.words[d],
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta_hat: f64,
    pub residual: f64,
    /// Estimate with the deepest level left out.
    pub delta_prev: f64,
    pub max_relative_width: f64,
    pub brackets: Vec<MassBracket>,
}

/// Slope of `−ln μ(X_n)` against `n` for `n ≥ 2`, using bracket midpoints.
pub fn delta_from_brackets(brackets: &[MassBracket]) -> Result<DeltaEstimate, DimensionError> {
    let usable: Vec<&MassBracket> = brackets.iter().filter(|b| b.depth >= 2).collect();
    if usable.len() < 2 {
        return Err(DimensionError::Budget("need brackets at depths 2 and above"));
    }
    let last = usable.last().unwrap();
    if last.relative_width() > 0.2 {
        return Err(DimensionError::BracketTooWide { depth: last.depth, ratio: last.relative_width() });
    }
    let line_of = |bs: &[&MassBracket]| {
        let xs: Vec<f64> = bs.iter().map(|b| b.depth as f64).collect();
        let ys: Vec<f64> = bs.iter().map(|b| -b.midpoint().ln()).collect();
        fit::least_squares(&xs, &ys)
    };
    let line = line_of(&usable);
    let prev = if usable.len() >= 3 { line_of(&usable[..usable.len() - 1]).slope } else { f64::NAN };
    Ok(DeltaEstimate {
        delta_hat: line.slope,
        residual: line.residual,
        delta_prev: prev,
        max_relative_width: usable.iter().map(|b| b.relative_width()).fold(0.0, f64::max),
        brackets: brackets.to_vec(),
    })
}

pub fn delta_estimate(max_depth: usize, ncap: u64, floor: f64, workers: usize) -> Result<DeltaEstimate, DimensionError> {
    if max_depth < 3 {
        return Err(DimensionError::Budget("max depth must be at least 3"));
    }
    delta_from_brackets(&survivor_masses(max_depth, ncap, floor, workers)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FastDecay {
    pub alpha1_hat: f64,
    pub residual: f64,
    pub eps_grid: Vec<f64>,
    /// `S(ε)`: total mass of depth-`depth` cell cylinders of measure at most `ε`.
    pub small_mass: Vec<f64>,
    pub total_mass: f64,
    pub depth: usize,
    pub ncap: u64,
}

/// Masses of depth-`depth` cell cylinders with counters at most `ncap`;
/// words below `floor` are kept as single pieces.
pub fn cell_masses(depth: usize, ncap: u64, floor: f64) -> Vec<f64> {
    fn go(m: &M128, len: usize, depth: usize, ncap: u64, floor: f64, out: &mut Vec<f64>) {
        for c in cells_up_to(ncap) {
            let child = mul128(m, &c.matrix());
            let mass = mass_f64(&child, &chamber_generators());
            if len + 1 == depth || mass < floor {
                out.push(mass);
            } else {
                go(&child, len + 1, depth, ncap, floor, out);
            }
        }
    }
    let mut out = Vec::new();
    go(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]], 0, depth, ncap, floor, &mut out);
    out
}

/// Fits `ln S(ε)` against `ln ε`.
pub fn fast_decay_estimate(depth: usize, eps_grid: &[f64], ncap: u64) -> FastDecay {
    assert!(depth >= 1);
    let floor = eps_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut masses = cell_masses(depth, ncap, floor);
    masses.sort_by(f64::total_cmp);
    let mut prefix = Vec::with_capacity(masses.len() + 1);
    prefix.push(0.0);
    for m in &masses {
        prefix.push(prefix.last().unwrap() + m);
    }
    let small_mass: Vec<f64> = eps_grid
        .iter()
        .map(|&e| prefix[masses.partition_point(|&m| m <= e)])
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = eps_grid
        .iter()
        .zip(&small_mass)
        .filter(|(_, &s)| s > 0.0)
        .map(|(e, s)| (e.ln(), s.ln()))
        .unzip();
    let line = fit::least_squares(&xs, &ys);
    FastDecay {
        alpha1_hat: line.slope,
        residual: line.residual,
        eps_grid: eps_grid.to_vec(),
        small_mass,
        total_mass: *prefix.last().unwrap(),
        depth,
        ncap,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCount {
    pub dimension: f64,
    pub residual: f64,
    pub levels: Vec<u32>,
    pub occupied: Vec<u64>,
}

/// Square grid anchored at `origin` with side `side`, refined dyadically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: [f64; 2],
    pub side: f64,
}

impl Frame {
    /// Bounding square of the sorted chart `a ∈ [1/3, 1]`, `b ∈ [0, 1/2]`.
    pub const CHART: Frame = Frame { origin: [1.0 / 3.0, 0.0], side: 2.0 / 3.0 };
    pub const UNIT: Frame = Frame { origin: [0.0, 0.0], side: 1.0 };

    /// Box index along one axis; points on a box boundary go to the lower box.
    fn index(&self, x: f64, axis: usize, cells: u64) -> u64 {
        let t = (x - self.origin[axis]) / self.side * cells as f64;
        let i = t.ceil() as i64 - 1;
        i.clamp(0, cells as i64 - 1) as u64
    }
}

/// Number of occupied boxes of side `frame.side / 2^level`.
pub fn occupied_boxes(points: &[[f64; 2]], frame: Frame, level: u32) -> u64 {
    let cells = 1u64 << level;
    let mut keys: Vec<u64> = points
        .iter()
        .map(|p| frame.index(p[0], 0, cells) * cells + frame.index(p[1], 1, cells))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len() as u64
}

/// Slope of `ln N(level)` against `ln(2^level / side)`.
pub fn box_counting(points: &[[f64; 2]], frame: Frame, levels: &[u32]) -> Result<BoxCount, DimensionError> {
    let distinct: HashSet<(u64, u64)> = points.iter().take(2).map(|p| (p[0].to_bits(), p[1].to_bits())).collect();
    if points.is_empty() || (distinct.len() == 1 && points.iter().all(|p| *p == points[0])) {
        return Ok(BoxCount { dimension: 0.0, residual: 0.0, levels: levels.to_vec(), occupied: vec![1; levels.len()] });
    }
    let coarsest = *levels.iter().min().ok_or(DimensionError::Budget("no grid levels"))?;
    if occupied_boxes(points, frame, coarsest) < 2 {
        return Err(DimensionError::DegenerateCloud);
    }
    let occupied: Vec<u64> = levels.iter().map(|&l| occupied_boxes(points, frame, l)).collect();
    let xs: Vec<f64> = levels.iter().map(|&l| (2f64.powi(l as i32) / frame.side).ln()).collect();
    let ys: Vec<f64> = occupied.iter().map(|&n| (n as f64).ln()).collect();
    let line = fit::least_squares(&xs, &ys);
    Ok(BoxCount { dimension: line.slope, residual: line.residual, levels: levels.to_vec(), occupied })
}

pub fn ad_bound(delta_hat: f64, alpha1_hat: f64) -> Result<f64, DimensionError> {
    if !(delta_hat > 0.0 && alpha1_hat > 0.0) {
        return Err(DimensionError::NonPositiveInput);
    }
    Ok(2.0 - delta_hat.min(alpha1_hat))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub delta_hat: f64,
    pub delta_residual: f64,
    pub delta_prev: f64,
    pub alpha1_hat: f64,
    pub alpha1_residual: f64,
    pub ad_bound: f64,
    pub box_dim: f64,
    pub box_residual: f64,
    pub survivor_brackets: Vec<MassBracket>,
    pub fast_decay: FastDecay,
    pub box_count: BoxCount,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub depths_used: usize,
    pub ncap: u64,
    pub floor: f64,
    pub fast_decay_depth: usize,
    pub fast_decay_ncap: u64,
    pub samples_used: usize,
    pub burn_in: usize,
    pub seeds: Vec<u64>,
    pub grid_levels: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub depth: usize,
    pub ncap: u64,
    pub floor: f64,
    pub fast_decay_depth: usize,
    pub fast_decay_ncap: u64,
    pub eps_grid: Vec<f64>,
    pub points: usize,
    pub burn_in: usize,
    pub grid_levels: Vec<u32>,
    pub seed: u64,
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            depth: 8,
            ncap: 64,
            floor: 1e-12,
            fast_decay_depth: 1,
            fast_decay_ncap: 4096,
            eps_grid: crate::suspension::log_grid(1e-6, 1e-2, 9),
            points: 1_000_000,
            burn_in: 64,
            grid_levels: (4..=10).collect(),
            seed: 1,
            workers: 1,
        }
    }
}

/// Chaos-game cloud of `cfg.points` chart points.
pub fn gasket_cloud(cfg: &PipelineConfig) -> Vec<[f64; 2]> {
    crate::markov::chaos_game(cfg.points, cfg.burn_in, cfg.seed, None, cfg.workers)
        .into_iter()
        .map(|p| [p.a, p.b])
        .collect()
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<DimensionReport, DimensionError> {
    if cfg.points == 0 {
        return Err(DimensionError::Budget("point count must be positive"));
    }
    run_pipeline_on(cfg, &gasket_cloud(cfg))
}

/// The pipeline with box counting on a given chart cloud.
pub fn run_pipeline_on(cfg: &PipelineConfig, cloud: &[[f64; 2]]) -> Result<DimensionReport, DimensionError> {
    let brackets = survivor_masses(cfg.depth, cfg.ncap, cfg.floor, cfg.workers)?;
    let delta = delta_from_brackets(&brackets)?;
    let fd = fast_decay_estimate(cfg.fast_decay_depth, &cfg.eps_grid, cfg.fast_decay_ncap);
    let bc = box_counting(cloud, Frame::CHART, &cfg.grid_levels)?;
    Ok(DimensionReport {
        delta_hat: delta.delta_hat,
        delta_residual: delta.residual,
        delta_prev: delta.delta_prev,
        alpha1_hat: fd.alpha1_hat,
        alpha1_residual: fd.residual,
        ad_bound: ad_bound(delta.delta_hat, fd.alpha1_hat)?,
        box_dim: bc.dimension,
        box_residual: bc.residual,
        survivor_brackets: brackets,
        fast_decay: fd,
        box_count: bc,
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            depths_used: cfg.depth,
            ncap: cfg.ncap,
            floor: cfg.floor,
            fast_decay_depth: cfg.fast_decay_depth,
            fast_decay_ncap: cfg.fast_decay_ncap,
            samples_used: cloud.len(),
            burn_in: cfg.burn_in,
            seeds: vec![cfg.seed],
            grid_levels: cfg.grid_levels.clone(),
        },
    })
}
