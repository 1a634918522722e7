//! Special systems of isometries and the Rauzy induction acting on them.
//!
//! A special system is the triple of interval pairs `[0, ℓᵢ] ↔ [1 − ℓᵢ, 1]`
//! with `ℓ₁ + ℓ₂ + ℓ₃ = 1`. One induction step transmits the two shorter right
//! bases through the longest pair and then cuts the support at the rightmost
//! interior critical point. On special systems this reduces to subtracting
//! the two shorter lengths from the longest one and rescaling.
//!
//! Everything here is exact: a float would eventually misplace a hole.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::letter::{Letter, Perm3};
use crate::matrix::{Mat3, StepMatrix};
use crate::rational::{self, format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("lengths sum to {0}, expected 1/1")]
    NotNormalized(String),
    #[error("length of letter {0} is not positive")]
    NonPositive(Letter),
    #[error("exact tie between lengths")]
    TieEncountered,
    #[error("precondition violated: {0}")]
    PreconditionViolated(&'static str),
    #[error("point {0} lies outside the support")]
    PointOutsideSupport(String),
}

/// Positive exact lengths indexed by letter, summing to one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LengthVector([Rational; 3]);

impl LengthVector {
    pub fn new(lengths: [Rational; 3]) -> Result<Self, SystemError> {
        for (i, l) in lengths.iter().enumerate() {
            if !l.is_positive() {
                return Err(SystemError::NonPositive(Letter::from_index(i)));
            }
        }
        let sum: Rational = lengths.iter().sum();
        if sum != rational::one() {
            return Err(SystemError::NotNormalized(format_rational(&sum)));
        }
        Ok(LengthVector(lengths))
    }

    pub fn get(&self, letter: Letter) -> &Rational {
        &self.0[letter.index()]
    }

    pub fn as_array(&self) -> &[Rational; 3] {
        &self.0
    }

    pub fn to_f64(&self) -> [f64; 3] {
        std::array::from_fn(|i| rational::to_f64(&self.0[i]))
    }
}

/// Lengths together with the ordering of letters from longest to shortest.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpecialSystem {
    lengths: LengthVector,
    order: Perm3,
}

#[derive(Serialize, Deserialize)]
struct SpecialSystemRepr {
    #[serde(with = "rational::triple")]
    lengths: [Rational; 3],
    order: Perm3,
}

impl Serialize for SpecialSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SpecialSystemRepr { lengths: self.lengths.0.clone(), order: self.order }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpecialSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = SpecialSystemRepr::deserialize(d)?;
        let [a, b, c] = repr.lengths;
        let sys = SpecialSystem::new(a, b, c).map_err(serde::de::Error::custom)?;
        if sys.order != repr.order {
            return Err(serde::de::Error::custom("order does not match the lengths"));
        }
        Ok(sys)
    }
}

/// Result of one elementary step that did not stop the induction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub system: SpecialSystem,
    pub winner: Letter,
    /// Old rank-ordered lengths = `length_matrix` · new unnormalized rank-ordered lengths.
    pub length_matrix: StepMatrix,
    /// New ranks in terms of old ranks; one of STAY, SWAP, CYCLE.
    pub relative_order: Perm3,
    /// Total length before renormalization (the new support length).
    pub scale: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Continue(Step),
    Hole,
    TieEncountered,
}

/// A generalized iteration: `n` consecutive wins of the same letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcceleratedStep {
    pub n: u64,
    pub system: SpecialSystem,
    pub winner: Letter,
    pub matrix: StepMatrix,
    pub relative_order: Perm3,
    /// Product of the per-step scales.
    pub scale: Rational,
    /// Elementary matrices whose product is `matrix`.
    pub elementary: Vec<StepMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AcceleratedOutcome {
    Continue(AcceleratedStep),
    /// A hole appeared after `k` elementary wins of the current winner.
    HoleAfter { k: u64 },
    TieEncountered,
}

/// Depth-bounded thin-type classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ThinClass {
    /// No hole within `iters` generalized iterations.
    Survived { iters: u64 },
    /// Hole found during generalized iteration `k` (1-based).
    HoleAt { k: u64 },
    TieAt { k: u64 },
}

/// Length matrix for an elementary step with the given relative order:
/// the winner's old length is the sum of all new lengths and every other
/// letter keeps its length.
pub fn step_matrix(relative: Perm3) -> StepMatrix {
    let mut m = Mat3([[1, 1, 1], [0, 0, 0], [0, 0, 0]]);
    for j in 0..3 {
        let old_rank = relative.at(j).index();
        if old_rank != 0 {
            m.0[old_rank][j] = 1;
        }
    }
    m
}

impl SpecialSystem {
    /// Builds the system with lengths `a, b, c` for letters 1, 2, 3.
    pub fn new(a: Rational, b: Rational, c: Rational) -> Result<Self, SystemError> {
        let lengths = LengthVector::new([a, b, c])?;
        let mut letters = Letter::ALL;
        letters.sort_by(|x, y| lengths.get(*y).cmp(lengths.get(*x)));
        let l = |i: usize| lengths.get(letters[i]);
        if l(0) == l(1) || l(1) == l(2) {
            return Err(SystemError::TieEncountered);
        }
        let order = Perm3::new(letters.map(|x| x.label())).expect("sorted letters are distinct");
        Ok(SpecialSystem { lengths, order })
    }

    pub fn from_lengths(lengths: [Rational; 3]) -> Result<Self, SystemError> {
        let [a, b, c] = lengths;
        Self::new(a, b, c)
    }

    pub fn lengths(&self) -> &LengthVector {
        &self.lengths
    }

    pub fn order(&self) -> Perm3 {
        self.order
    }

    pub fn length(&self, letter: Letter) -> &Rational {
        self.lengths.get(letter)
    }

    /// Lengths listed from largest to smallest.
    pub fn ranked(&self) -> [Rational; 3] {
        self.order.letters().map(|l| self.lengths.get(l).clone())
    }

    /// True when the longest length is shorter than the other two together.
    pub fn has_hole(&self) -> bool {
        let [a, b, c] = self.ranked();
        a < b + c
    }

    pub fn rauzy_step(&self) -> StepOutcome {
        let [a, b, c] = self.ranked();
        let rest = &b + &c;
        if a < rest {
            return StepOutcome::Hole;
        }
        if a == rest {
            return StepOutcome::TieEncountered;
        }
        let shrunk = &a - &rest;
        if shrunk == b || shrunk == c {
            return StepOutcome::TieEncountered;
        }
        let relative = if shrunk > b {
            Perm3::STAY
        } else if shrunk > c {
            Perm3::SWAP
        } else {
            Perm3::CYCLE
        };
        let winner = self.order.first();
        let mut lengths = self.lengths.0.clone();
        lengths[winner.index()] = shrunk;
        for l in lengths.iter_mut() {
            *l = &*l / &a;
        }
        let order = self.order.then(relative);
        let system = SpecialSystem { lengths: LengthVector(lengths), order };
        debug_assert!(system.is_consistent());
        StepOutcome::Continue(Step {
            system,
            winner,
            length_matrix: step_matrix(relative),
            relative_order: relative,
            scale: a,
        })
    }

    pub fn accelerated_step(&self) -> AcceleratedOutcome {
        let first = match self.rauzy_step() {
            StepOutcome::Continue(step) => step,
            StepOutcome::Hole => return AcceleratedOutcome::HoleAfter { k: 0 },
            StepOutcome::TieEncountered => return AcceleratedOutcome::TieEncountered,
        };
        let winner = first.winner;
        let mut n = 1u64;
        let mut matrix = first.length_matrix.clone();
        let mut relative = first.relative_order;
        let mut scale = first.scale;
        let mut elementary = vec![first.length_matrix];
        let mut system = first.system;
        while system.order.first() == winner {
            match system.rauzy_step() {
                StepOutcome::Continue(step) => {
                    n += 1;
                    matrix = matrix.mul(&step.length_matrix);
                    relative = relative.then(step.relative_order);
                    scale *= step.scale;
                    elementary.push(step.length_matrix);
                    system = step.system;
                }
                StepOutcome::Hole => return AcceleratedOutcome::HoleAfter { k: n },
                StepOutcome::TieEncountered => return AcceleratedOutcome::TieEncountered,
            }
        }
        debug_assert_eq!(
            elementary.iter().fold(StepMatrix::identity(), |acc, m| acc.mul(m)),
            matrix
        );
        AcceleratedOutcome::Continue(AcceleratedStep {
            n,
            system,
            winner,
            matrix,
            relative_order: relative,
            scale,
            elementary,
        })
    }

    /// Runs up to `max_iters` generalized iterations looking for a hole.
    pub fn classify_thin(&self, max_iters: u64) -> ThinClass {
        let mut current = self.clone();
        for k in 1..=max_iters {
            match current.accelerated_step() {
                AcceleratedOutcome::Continue(step) => current = step.system,
                AcceleratedOutcome::HoleAfter { .. } => return ThinClass::HoleAt { k },
                AcceleratedOutcome::TieEncountered => return ThinClass::TieAt { k },
            }
        }
        ThinClass::Survived { iters: max_iters }
    }

    fn is_consistent(&self) -> bool {
        let [a, b, c] = self.ranked();
        a > b && b > c && c.is_positive() && a + b + c == rational::one()
    }

    pub fn to_interval_pairs(&self) -> IntervalPairSystem {
        IntervalPairSystem::from_special(self)
    }
}

impl fmt::Display for SpecialSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = &self.lengths.0;
        write!(
            f,
            "[{}, {}, {}] order {}",
            format_rational(a),
            format_rational(b),
            format_rational(c),
            self.order
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "rational")]
    pub lo: Rational,
    #[serde(with = "rational")]
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", format_rational(&self.lo), format_rational(&self.hi))
    }
}

/// A partial isometry `x ↦ x + (right.lo − left.lo)` from `left` onto `right`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntervalPair {
    pub left: Interval,
    pub right: Interval,
}

impl IntervalPair {
    pub fn shift(&self) -> Rational {
        &self.right.lo - &self.left.lo
    }
}

/// A system of three orientation-preserving partial isometries on one interval.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntervalPairSystem {
    pub support: Interval,
    /// Indexed by letter.
    pub pairs: [IntervalPair; 3],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReductionOutcome {
    Reduced(IntervalPairSystem),
    Hole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitEdge {
    pub from: usize,
    pub to: usize,
    pub letter: Letter,
    /// True when the edge applies the inverse isometry.
    pub inverse: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrbitGraph {
    pub vertices: Vec<Rational>,
    pub edges: Vec<OrbitEdge>,
    /// BFS depth of each vertex.
    pub depth: Vec<usize>,
}

impl OrbitGraph {
    pub fn out_degree(&self, vertex: usize) -> usize {
        self.edges.iter().filter(|e| e.from == vertex).count()
    }
}

impl IntervalPairSystem {
    pub fn from_special(sys: &SpecialSystem) -> Self {
        let one = rational::one();
        let pairs = Letter::ALL.map(|l| {
            let len = sys.length(l).clone();
            IntervalPair {
                left: Interval::new(Rational::zero(), len.clone()),
                right: Interval::new(&one - &len, one.clone()),
            }
        });
        IntervalPairSystem { support: Interval::new(Rational::zero(), one), pairs }
    }

    fn validate(&self) -> Result<(), SystemError> {
        for p in &self.pairs {
            if p.left.len() != p.right.len() {
                return Err(SystemError::PreconditionViolated("pair bases differ in length"));
            }
            if !p.left.len().is_positive() {
                return Err(SystemError::PreconditionViolated("degenerate base"));
            }
            if !self.support.contains_interval(&p.left) || !self.support.contains_interval(&p.right) {
                return Err(SystemError::PreconditionViolated("base outside support"));
            }
        }
        Ok(())
    }

    /// Every endpoint of every base.
    pub fn critical_points(&self) -> Vec<Rational> {
        let mut pts: Vec<Rational> = self
            .pairs
            .iter()
            .flat_map(|p| [p.left.lo.clone(), p.left.hi.clone(), p.right.lo.clone(), p.right.hi.clone()])
            .collect();
        pts.sort();
        pts.dedup();
        pts
    }

    /// Re-maps the two right bases contained in the covering right base
    /// (the one ending at the support's right end) through the covering isometry.
    pub fn transmission_right(&self) -> Result<IntervalPairSystem, SystemError> {
        self.validate()?;
        let end = &self.support.hi;
        let cover = (0..3)
            .find(|&k| {
                &self.pairs[k].right.hi == end
                    && (0..3).all(|j| j == k || self.pairs[k].right.contains_interval(&self.pairs[j].right))
            })
            .ok_or(SystemError::PreconditionViolated(
                "no right base ending at the support end contains the other two",
            ))?;
        let back = -self.pairs[cover].shift();
        let mut out = self.clone();
        for j in (0..3).filter(|&j| j != cover) {
            let r = &self.pairs[j].right;
            out.pairs[j].right = Interval::new(&r.lo + &back, &r.hi + &back);
        }
        Ok(out)
    }

    /// Cuts the support at the rightmost critical point interior to the
    /// only base covering the support's right end.
    pub fn reduction_right(&self) -> Result<ReductionOutcome, SystemError> {
        self.validate()?;
        let end = &self.support.hi;
        let mut covering = Vec::new();
        for (k, p) in self.pairs.iter().enumerate() {
            for (base, is_right) in [(&p.left, false), (&p.right, true)] {
                if base.contains(end) {
                    covering.push((k, is_right, base.hi == *end));
                }
            }
        }
        if covering.is_empty() {
            return Ok(ReductionOutcome::Hole);
        }
        let winner = match covering.as_slice() {
            [(k, true, true)] => *k,
            _ => {
                return Err(SystemError::PreconditionViolated(
                    "support end must be covered only by the end of one right base",
                ))
            }
        };
        let right = &self.pairs[winner].right;
        let cut = self
            .critical_points()
            .into_iter()
            .filter(|x| &right.lo < x && x < &right.hi)
            .max();
        let Some(u) = cut else {
            return Ok(ReductionOutcome::Hole);
        };
        let mut out = self.clone();
        let left = &self.pairs[winner].left;
        out.pairs[winner] = IntervalPair {
            left: Interval::new(left.lo.clone(), &left.hi - &right.hi + &u),
            right: Interval::new(right.lo.clone(), u.clone()),
        };
        out.support = Interval::new(self.support.lo.clone(), u);
        for (k, p) in out.pairs.iter().enumerate() {
            if k != winner && (p.left.hi > out.support.hi || p.right.hi > out.support.hi) {
                return Err(SystemError::PreconditionViolated("a base straddles the cut point"));
            }
        }
        Ok(ReductionOutcome::Reduced(out))
    }

    /// Reads off a special system, if all left bases start at the support's
    /// left end and all right bases end at its right end. Lengths are rescaled
    /// by the support length.
    pub fn to_special(&self) -> Result<SpecialSystem, SystemError> {
        self.validate()?;
        let total = self.support.len();
        for p in &self.pairs {
            if p.left.lo != self.support.lo || p.right.hi != self.support.hi {
                return Err(SystemError::PreconditionViolated("not in special position"));
            }
        }
        let lengths = self.pairs.clone().map(|p| p.left.len() / &total);
        SpecialSystem::from_lengths(lengths)
    }

    /// Maximal open sub-intervals of the support covered by no base.
    pub fn uncovered_gaps(&self) -> Vec<Interval> {
        let mut bases: Vec<&Interval> = self.pairs.iter().flat_map(|p| [&p.left, &p.right]).collect();
        bases.sort_by(|a, b| a.lo.cmp(&b.lo));
        let mut gaps = Vec::new();
        let mut reach = self.support.lo.clone();
        for b in bases {
            if b.lo > reach {
                gaps.push(Interval::new(reach.clone(), b.lo.clone()));
            }
            if b.hi > reach {
                reach = b.hi.clone();
            }
        }
        if reach < self.support.hi {
            gaps.push(Interval::new(reach, self.support.hi.clone()));
        }
        gaps
    }

    /// Breadth-first closure of `{x}` under the isometries and their inverses,
    /// up to words of length `max_word_len`.
    pub fn explore_orbit(&self, x: &Rational, max_word_len: usize) -> Result<OrbitGraph, SystemError> {
        if !self.support.contains(x) {
            return Err(SystemError::PointOutsideSupport(format_rational(x)));
        }
        let mut graph = OrbitGraph::default();
        let mut index: HashMap<Rational, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        index.insert(x.clone(), 0);
        graph.vertices.push(x.clone());
        graph.depth.push(0);
        queue.push_back(0usize);
        while let Some(v) = queue.pop_front() {
            let d = graph.depth[v];
            if d == max_word_len {
                continue;
            }
            let point = graph.vertices[v].clone();
            for (k, pair) in self.pairs.iter().enumerate() {
                let shift = pair.shift();
                let moves = [
                    (pair.left.contains(&point), &point + &shift, false),
                    (pair.right.contains(&point), &point - &shift, true),
                ];
                for (applies, image, inverse) in moves {
                    if !applies {
                        continue;
                    }
                    let to = *index.entry(image.clone()).or_insert_with(|| {
                        graph.vertices.push(image);
                        graph.depth.push(d + 1);
                        queue.push_back(graph.vertices.len() - 1);
                        graph.vertices.len() - 1
                    });
                    graph.edges.push(OrbitEdge { from: v, to, letter: Letter::from_index(k), inverse });
                }
            }
        }
        Ok(graph)
    }
}
