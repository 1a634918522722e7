//! Letters of the three-symbol alphabet and orderings of them.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One of the three interval pairs, labelled 1, 2, 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u8);

impl Letter {
    pub const ALL: [Letter; 3] = [Letter(1), Letter(2), Letter(3)];

    pub fn new(label: u8) -> Option<Letter> {
        (1..=3).contains(&label).then_some(Letter(label))
    }

    pub fn from_index(index: usize) -> Letter {
        assert!(index < 3, "letter index out of range");
        Letter(index as u8 + 1)
    }

    pub fn index(self) -> usize {
        usize::from(self.0 - 1)
    }

    pub fn label(self) -> u8 {
        self.0
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.0)
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = u8::deserialize(d)?;
        Letter::new(v).ok_or_else(|| serde::de::Error::custom("letter must be 1, 2 or 3"))
    }
}

/// An arrangement of the three letters, listed from largest to smallest.
///
/// The same type doubles as a *relative* ordering of ranks: `(2,1,3)` read
/// relatively means "the new rank-1 entry is the old rank-2 entry", etc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perm3([Letter; 3]);

impl Perm3 {
    pub const IDENTITY: Perm3 = Perm3([Letter(1), Letter(2), Letter(3)]);
    /// Relative order after a step where the winner keeps the lead.
    pub const STAY: Perm3 = Perm3::IDENTITY;
    /// Relative order after a step where the winner drops to the middle.
    pub const SWAP: Perm3 = Perm3([Letter(2), Letter(1), Letter(3)]);
    /// Relative order after a step where the winner drops to the bottom.
    pub const CYCLE: Perm3 = Perm3([Letter(2), Letter(3), Letter(1)]);

    pub fn new(labels: [u8; 3]) -> Option<Perm3> {
        let letters = [
            Letter::new(labels[0])?,
            Letter::new(labels[1])?,
            Letter::new(labels[2])?,
        ];
        let distinct = letters[0] != letters[1] && letters[0] != letters[2] && letters[1] != letters[2];
        distinct.then_some(Perm3(letters))
    }

    /// All six arrangements in lexicographic order.
    pub fn all() -> [Perm3; 6] {
        [
            Perm3::new([1, 2, 3]).unwrap(),
            Perm3::new([1, 3, 2]).unwrap(),
            Perm3::new([2, 1, 3]).unwrap(),
            Perm3::new([2, 3, 1]).unwrap(),
            Perm3::new([3, 1, 2]).unwrap(),
            Perm3::new([3, 2, 1]).unwrap(),
        ]
    }

    pub fn letters(&self) -> [Letter; 3] {
        self.0
    }

    pub fn at(&self, rank: usize) -> Letter {
        self.0[rank]
    }

    /// The largest letter, i.e. the winner of the next step.
    pub fn first(&self) -> Letter {
        self.0[0]
    }

    pub fn rank_of(&self, letter: Letter) -> usize {
        self.0.iter().position(|&l| l == letter).expect("perm contains every letter")
    }

    /// Applies a relative rank ordering: `self.then(rel).at(j) == self.at(rel.at(j).index())`.
    pub fn then(&self, rel: Perm3) -> Perm3 {
        Perm3([
            self.0[rel.0[0].index()],
            self.0[rel.0[1].index()],
            self.0[rel.0[2].index()],
        ])
    }

    pub fn inverse(&self) -> Perm3 {
        let mut out = [Letter(1); 3];
        for (rank, letter) in self.0.iter().enumerate() {
            out[letter.index()] = Letter::from_index(rank);
        }
        Perm3(out)
    }

    pub fn labels(&self) -> [u8; 3] {
        [self.0[0].0, self.0[1].0, self.0[2].0]
    }
}

impl Default for Perm3 {
    fn default() -> Self {
        Perm3::IDENTITY
    }
}

impl fmt::Display for Perm3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

impl Serialize for Perm3 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.labels().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Perm3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = <[u8; 3]>::deserialize(d)?;
        Perm3::new(v).ok_or_else(|| serde::de::Error::custom("not a permutation of 1,2,3"))
    }
}
