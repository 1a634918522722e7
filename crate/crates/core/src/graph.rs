//! The Rauzy graph on ordering states, paths through it, and the cocycle.
//!
//! Cocycle blocks are written in letter coordinates. A win of letter `w`
//! repeated `n` times has block `B = I + n·Σ_{j≠w} E_{j,w}`; lengths transform
//! by its transpose (old λ = Bᵀ · new λ). Along a path the blocks multiply on
//! the left, so `cocycle_of(p ++ q) = cocycle_of(q) · cocycle_of(p)`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::letter::{Letter, Perm3};
use crate::matrix::{CocycleMatrix, Mat3, StepMatrix};
use crate::rational::ratio;
use crate::system::{SpecialSystem, StepOutcome};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("step {index} does not continue from the previous state")]
    NonComposablePath { index: usize },
    #[error("step {index} is not an arrow of the Rauzy graph")]
    NotAnArrow { index: usize },
    #[error("step {index} has counter 0")]
    ZeroCounter { index: usize },
}

/// A vertex of the graph: an ordering state, or the sink reached on a hole.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Vertex {
    State(Perm3),
    #[serde(serialize_with = "hole_label", deserialize_with = "hole_from_label")]
    Hole,
}

fn hole_label<S: serde::Serializer>(s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str("hole")
}

fn hole_from_label<'de, D: serde::Deserializer<'de>>(d: D) -> Result<(), D::Error> {
    let s = String::deserialize(d)?;
    if s == "hole" {
        Ok(())
    } else {
        Err(serde::de::Error::custom("expected \"hole\""))
    }
}

impl std::fmt::Display for Vertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Vertex::State(p) => write!(f, "{p}"),
            Vertex::Hole => f.write_str("hole"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: Perm3,
    pub to: Vertex,
    /// Absent for hole edges, where nobody wins.
    pub winner: Option<Letter>,
    pub relative_order: Option<Perm3>,
    pub length_matrix: Option<StepMatrix>,
    pub cocycle: Option<StepMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RauzyGraph {
    pub states: Vec<Perm3>,
    pub edges: Vec<GraphEdge>,
}

/// One arrow, or `n` consecutive wins of the same letter collapsed into one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PathStep {
    pub winner: Letter,
    pub n: u64,
    pub from: Perm3,
    pub to: Perm3,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RauzyPath {
    pub start: Perm3,
    pub steps: Vec<PathStep>,
}

/// Ranked witness lengths that realize each kind of step, and a hole.
fn witnesses() -> [(Option<Perm3>, [(i64, i64); 3]); 4] {
    [
        (Some(Perm3::STAY), [(7, 10), (1, 5), (1, 10)]),
        (Some(Perm3::SWAP), [(3, 5), (1, 4), (3, 20)]),
        (Some(Perm3::CYCLE), [(11, 20), (1, 4), (1, 5)]),
        (None, [(2, 5), (7, 20), (1, 4)]),
    ]
}

/// Elementary cocycle block for `n` wins of `winner`.
pub fn cocycle_block(winner: Letter, n: u64) -> StepMatrix {
    let mut m = StepMatrix::identity();
    let w = winner.index();
    for j in (0..3).filter(|&j| j != w) {
        m.0[j][w] = n;
    }
    m
}

/// Builds the graph by running the induction on witness systems, starting
/// from the identity ordering and following every reachable state.
pub fn build_graph() -> RauzyGraph {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    let mut edges = Vec::new();
    seen.insert(Perm3::IDENTITY);
    queue.push_back(Perm3::IDENTITY);
    while let Some(state) = queue.pop_front() {
        for (_, ranked) in witnesses() {
            let mut lengths = [ratio(0, 1), ratio(0, 1), ratio(0, 1)];
            for (rank, (p, q)) in ranked.iter().enumerate() {
                lengths[state.at(rank).index()] = ratio(*p, *q);
            }
            let sys = SpecialSystem::from_lengths(lengths).expect("witness lengths are valid");
            debug_assert_eq!(sys.order(), state);
            match sys.rauzy_step() {
                StepOutcome::Continue(step) => {
                    let to = step.system.order();
                    if seen.insert(to) {
                        queue.push_back(to);
                    }
                    edges.push(GraphEdge {
                        from: state,
                        to: Vertex::State(to),
                        winner: Some(step.winner),
                        relative_order: Some(step.relative_order),
                        length_matrix: Some(step.length_matrix),
                        cocycle: Some(cocycle_block(step.winner, 1)),
                    });
                }
                StepOutcome::Hole => edges.push(GraphEdge {
                    from: state,
                    to: Vertex::Hole,
                    winner: None,
                    relative_order: None,
                    length_matrix: None,
                    cocycle: None,
                }),
                StepOutcome::TieEncountered => unreachable!("witnesses are generic"),
            }
        }
    }
    edges.sort_by(|x, y| (x.from, x.to).cmp(&(y.from, y.to)));
    RauzyGraph { states: seen.into_iter().collect(), edges }
}

impl RauzyGraph {
    /// Non-hole successors of a state, in lexicographic order.
    pub fn successors(&self, state: Perm3) -> Vec<Perm3> {
        self.edges
            .iter()
            .filter(|e| e.from == state)
            .filter_map(|e| match e.to {
                Vertex::State(p) => Some(p),
                Vertex::Hole => None,
            })
            .collect()
    }

    pub fn has_edge(&self, from: Perm3, to: Perm3) -> bool {
        self.edges.iter().any(|e| e.from == from && e.to == Vertex::State(to))
    }

    /// True when every state reaches every other one avoiding the hole.
    pub fn is_strongly_connected(&self) -> bool {
        let reach = |from: Perm3, forward: bool| {
            let mut seen = BTreeSet::from([from]);
            let mut stack = vec![from];
            while let Some(v) = stack.pop() {
                for e in &self.edges {
                    let (src, dst) = match (forward, e.to) {
                        (_, Vertex::Hole) => continue,
                        (true, Vertex::State(t)) => (e.from, t),
                        (false, Vertex::State(t)) => (t, e.from),
                    };
                    if src == v && seen.insert(dst) {
                        stack.push(dst);
                    }
                }
            }
            seen.len()
        };
        match self.states.first() {
            Some(&root) => reach(root, true) == self.states.len() && reach(root, false) == self.states.len(),
            None => true,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            match e.winner {
                Some(w) => writeln!(out, "{} -> {} winner {}", e.from, e.to, w).unwrap(),
                None => writeln!(out, "{} -> hole", e.from).unwrap(),
            }
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph rauzy {\n");
        for s in &self.states {
            writeln!(out, "  \"{s}\";").unwrap();
        }
        out.push_str("  \"hole\" [shape=box];\n");
        for e in &self.edges {
            let label = e.winner.map(|w| w.to_string()).unwrap_or_default();
            writeln!(out, "  \"{}\" -> \"{}\" [label=\"{}\"];", e.from, e.to, label).unwrap();
        }
        out.push_str("}\n");
        out
    }
}

impl RauzyPath {
    pub fn empty(start: Perm3) -> Self {
        RauzyPath { start, steps: Vec::new() }
    }

    /// Path of elementary arrows visiting the given states in order.
    pub fn from_states(states: &[Perm3]) -> Result<Self, PathError> {
        let start = *states.first().unwrap_or(&Perm3::IDENTITY);
        let steps = states
            .windows(2)
            .map(|w| PathStep { winner: w[0].first(), n: 1, from: w[0], to: w[1] })
            .collect();
        let path = RauzyPath { start, steps };
        path.validate()?;
        Ok(path)
    }

    pub fn end(&self) -> Perm3 {
        self.steps.last().map(|s| s.to).unwrap_or(self.start)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Number of elementary arrows once blocks are expanded.
    pub fn elementary_len(&self) -> u64 {
        self.steps.iter().map(|s| s.n).sum()
    }

    pub fn winners(&self) -> Vec<Letter> {
        self.steps.iter().map(|s| s.winner).collect()
    }

    /// Checks that each step is an arrow (or a block of arrows) and that
    /// consecutive steps compose.
    pub fn validate(&self) -> Result<(), PathError> {
        let mut at = self.start;
        for (index, s) in self.steps.iter().enumerate() {
            if s.from != at {
                return Err(PathError::NonComposablePath { index });
            }
            if s.n == 0 {
                return Err(PathError::ZeroCounter { index });
            }
            let legal = s.winner == s.from.first()
                && [Perm3::STAY, Perm3::SWAP, Perm3::CYCLE].iter().any(|&r| s.from.then(r) == s.to);
            if !legal {
                return Err(PathError::NotAnArrow { index });
            }
            at = s.to;
        }
        Ok(())
    }

    pub fn concat(&self, other: &RauzyPath) -> Result<RauzyPath, PathError> {
        if other.start != self.end() {
            return Err(PathError::NonComposablePath { index: self.steps.len() });
        }
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Ok(RauzyPath { start: self.start, steps })
    }
}

/// Ordered product of the blocks along the path.
pub fn cocycle_of(path: &RauzyPath) -> Result<CocycleMatrix, PathError> {
    path.validate()?;
    Ok(cocycle_unchecked(path.steps.iter().map(|s| (s.winner, s.n))))
}

/// Cocycle of a winner sequence with counters; no graph check.
pub fn cocycle_unchecked(blocks: impl IntoIterator<Item = (Letter, u64)>) -> CocycleMatrix {
    let mut acc = CocycleMatrix::identity();
    for (w, n) in blocks {
        let block = cocycle_block(w, n).map(|&x| BigUint::from(x));
        acc = block.mul(&acc);
    }
    acc
}

pub fn is_complete(path: &RauzyPath) -> bool {
    winners_complete(path.steps.iter().map(|s| s.winner))
}

pub fn winners_complete(winners: impl IntoIterator<Item = Letter>) -> bool {
    let mut seen = [false; 3];
    for w in winners {
        seen[w.index()] = true;
    }
    seen.iter().all(|&x| x)
}

pub fn is_positive(path: &RauzyPath) -> Result<bool, PathError> {
    Ok(cocycle_of(path)?.all_positive())
}

/// Lexicographic odometer over elementary paths of a fixed length.
pub struct PathIter {
    succ: BTreeMap<Perm3, Vec<Perm3>>,
    start: Perm3,
    length: usize,
    choice: Vec<usize>,
    done: bool,
}

impl Iterator for PathIter {
    type Item = RauzyPath;

    fn next(&mut self) -> Option<RauzyPath> {
        loop {
            if self.done {
                return None;
            }
            let mut states = vec![self.start];
            let mut dead_at = None;
            for (i, &c) in self.choice.iter().enumerate() {
                let options = &self.succ[states.last().unwrap()];
                match options.get(c) {
                    Some(&t) => states.push(t),
                    None => {
                        dead_at = Some(i);
                        break;
                    }
                }
            }
            match dead_at {
                None => {
                    let path = RauzyPath::from_states(&states).expect("graph arrows compose");
                    self.advance(self.length);
                    return Some(path);
                }
                Some(i) => self.advance(i + 1),
            }
        }
    }
}

impl PathIter {
    /// Increments the odometer at the last of the first `prefix` digits, zeroing the rest.
    fn advance(&mut self, prefix: usize) {
        for d in self.choice.iter_mut().skip(prefix) {
            *d = 0;
        }
        let mut pos = prefix;
        loop {
            if pos == 0 {
                self.done = true;
                return;
            }
            pos -= 1;
            self.choice[pos] += 1;
            if self.choice[pos] < 3 {
                return;
            }
            self.choice[pos] = 0;
        }
    }
}

/// All non-hole elementary paths of the given length from `start`,
/// lexicographic in the visited states.
pub fn enumerate_paths(graph: &RauzyGraph, start: Perm3, length: usize) -> PathIter {
    let succ = graph.states.iter().map(|&s| (s, graph.successors(s))).collect();
    PathIter { succ, start, length, choice: vec![0; length], done: false }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub max_len: usize,
    pub paths_checked: u64,
    pub complete_paths: u64,
    pub violations: Vec<RauzyPath>,
}

/// Checks that every complete elementary path of length at most `max_len`
/// has a strictly positive cocycle.
pub fn check_complete_paths_positive(graph: &RauzyGraph, max_len: usize) -> CompletenessReport {
    struct Walk<'a> {
        graph: &'a RauzyGraph,
        max_len: usize,
        report: CompletenessReport,
        states: Vec<Perm3>,
    }
    impl Walk<'_> {
        fn visit(&mut self, m: StepMatrix, seen: [bool; 3]) {
            let len = self.states.len() - 1;
            if len > 0 {
                self.report.paths_checked += 1;
                if seen.iter().all(|&x| x) {
                    self.report.complete_paths += 1;
                    if !m.all_positive() {
                        let path = RauzyPath::from_states(&self.states).expect("graph path");
                        self.report.violations.push(path);
                    }
                }
            }
            if len == self.max_len {
                return;
            }
            let here = *self.states.last().unwrap();
            let w = here.first();
            let next = cocycle_block(w, 1).mul(&m);
            let mut seen_next = seen;
            seen_next[w.index()] = true;
            for t in self.graph.successors(here) {
                self.states.push(t);
                self.visit(next.clone(), seen_next);
                self.states.pop();
            }
        }
    }
    let mut walk = Walk { graph, max_len, report: CompletenessReport { max_len, ..Default::default() }, states: vec![] };
    for &s in &graph.states {
        walk.states = vec![s];
        walk.visit(StepMatrix::identity(), [false; 3]);
    }
    walk.report
}

/// Cocycle of an arbitrary elementary winner word, as a plain matrix.
pub fn word_cocycle(word: &[Letter]) -> StepMatrix {
    word.iter().fold(Mat3::identity(), |acc, &w| cocycle_block(w, 1).mul(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Signed};
    use proptest::prelude::*;

    fn p(l: [u8; 3]) -> Perm3 {
        Perm3::new(l).unwrap()
    }

    #[test]
    fn graph_shape() {
        let g = build_graph();
        assert_eq!(g.states.len(), 6);
        for &s in &g.states {
            assert_eq!(g.successors(s).len(), 3);
            assert!(g.edges.iter().any(|e| e.from == s && e.to == Vertex::Hole));
        }
        assert!(g.has_edge(p([1, 2, 3]), p([2, 1, 3])));
        assert!(!g.has_edge(p([1, 2, 3]), p([3, 2, 1])));
        assert!(g.is_strongly_connected());
    }

    #[test]
    fn winner_is_leading_letter() {
        let g = build_graph();
        for e in g.edges.iter().filter(|e| e.winner.is_some()) {
            assert_eq!(e.winner, Some(e.from.first()));
        }
    }

    #[test]
    fn block_shape_for_letter_one() {
        let b = cocycle_block(Letter::from_index(0), 5);
        assert_eq!(b, Mat3([[1, 0, 0], [5, 1, 0], [5, 0, 1]]));
    }

    #[test]
    fn cocycle_examples() {
        assert_eq!(cocycle_of(&RauzyPath::empty(Perm3::IDENTITY)).unwrap(), CocycleMatrix::identity());
        let one = RauzyPath::from_states(&[p([1, 2, 3]), p([2, 1, 3])]).unwrap();
        let b = cocycle_of(&one).unwrap();
        assert_eq!(b, cocycle_block(Letter::from_index(0), 1).to_biguint());
        assert!(!is_positive(&one).unwrap());
        assert!(!is_positive(&RauzyPath::empty(Perm3::IDENTITY)).unwrap());
    }

    #[test]
    fn bad_paths_are_rejected() {
        let path = RauzyPath {
            start: p([1, 2, 3]),
            steps: vec![PathStep { winner: Letter::from_index(0), n: 1, from: p([2, 1, 3]), to: p([2, 1, 3]) }],
        };
        assert_eq!(cocycle_of(&path), Err(PathError::NonComposablePath { index: 0 }));
        let path = RauzyPath {
            start: p([1, 2, 3]),
            steps: vec![PathStep { winner: Letter::from_index(0), n: 1, from: p([1, 2, 3]), to: p([3, 2, 1]) }],
        };
        assert_eq!(cocycle_of(&path), Err(PathError::NotAnArrow { index: 0 }));
    }

    #[test]
    fn completeness_examples() {
        let l = |i: u8| Letter::new(i).unwrap();
        assert!(!winners_complete([l(1), l(1), l(1)]));
        assert!(winners_complete([l(1), l(2), l(3)]));
        assert!(!winners_complete([l(2), l(3)]));
    }

    #[test]
    fn enumeration_counts() {
        let g = build_graph();
        assert_eq!(enumerate_paths(&g, Perm3::IDENTITY, 0).count(), 1);
        assert_eq!(enumerate_paths(&g, Perm3::IDENTITY, 1).count(), g.successors(Perm3::IDENTITY).len());
        let paths: Vec<_> = enumerate_paths(&g, Perm3::IDENTITY, 5).collect();
        assert_eq!(paths.len(), 3usize.pow(5));
        assert!(paths.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn short_exhaustive_check() {
        let g = build_graph();
        let r = check_complete_paths_positive(&g, 7);
        assert!(r.violations.is_empty());
        assert!(r.complete_paths > 0);
    }

    #[test]
    fn length_matrices_are_transposed_cocycles() {
        let g = build_graph();
        for e in g.edges.iter().filter(|e| e.winner.is_some()) {
            // Length matrix in rank coordinates, cocycle in letter coordinates:
            // conjugating by the orderings must give the transpose.
            let from = e.from;
            let Vertex::State(to) = e.to else { unreachable!() };
            let lm = e.length_matrix.clone().unwrap();
            let mut letter = StepMatrix::zero();
            for i in 0..3 {
                for j in 0..3 {
                    letter.0[from.at(i).index()][to.at(j).index()] = lm.0[i][j];
                }
            }
            assert_eq!(letter, e.cocycle.clone().unwrap().transpose());
        }
    }

    #[test]
    fn dual_relation_on_single_steps() {
        // old λ = B*·new λ, so new λ = (B*)⁻¹·old λ.
        let sys = SpecialSystem::new(ratio(3, 5), ratio(1, 4), ratio(3, 20)).unwrap();
        let StepOutcome::Continue(step) = sys.rauzy_step() else { panic!() };
        let b_star = cocycle_block(step.winner, 1).transpose().to_bigint();
        let inv = b_star.unimodular_inverse().unwrap();
        let old = sys.lengths().as_array().clone();
        let new: Vec<_> = (0..3)
            .map(|i| (0..3).map(|j| crate::rational::Rational::from_integer(inv.0[i][j].clone()) * &old[j]).sum::<crate::rational::Rational>())
            .collect();
        let scaled: Vec<_> = step.system.lengths().as_array().iter().map(|x| x * &step.scale).collect();
        assert_eq!(new, scaled);
    }

    fn arb_path(max: usize) -> impl Strategy<Value = RauzyPath> {
        (0usize..6, proptest::collection::vec(0usize..3, 0..max)).prop_map(|(s, choices)| {
            let g = build_graph();
            let mut states = vec![Perm3::all()[s]];
            for c in choices {
                let next = g.successors(*states.last().unwrap())[c];
                states.push(next);
            }
            RauzyPath::from_states(&states).unwrap()
        })
    }

    proptest! {
        #[test]
        fn cocycle_is_unimodular(path in arb_path(20)) {
            let b = cocycle_of(&path).unwrap();
            prop_assert!(b.to_bigint().det().abs().is_one());
        }

        #[test]
        fn cocycle_concatenation(a in arb_path(10), tail in proptest::collection::vec(0usize..3, 0..10)) {
            let g = build_graph();
            let mut states = vec![a.end()];
            for c in tail {
                let next = g.successors(*states.last().unwrap())[c];
                states.push(next);
            }
            let b = RauzyPath::from_states(&states).unwrap();
            let ab = a.concat(&b).unwrap();
            prop_assert_eq!(cocycle_of(&ab).unwrap(), cocycle_of(&b).unwrap().mul(&cocycle_of(&a).unwrap()));
        }
    }
}
