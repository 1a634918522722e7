//! Rauzy induction on special systems of isometries, the Rauzy graph and its
//! cocycle, the projectivized Markov map on the Rauzy gasket, cylinder
//! measures, the roof function, and numerical dimension estimates.

pub mod letter;
pub mod markov;
pub mod matrix;
pub mod measure;
pub mod rational;
pub mod sampling;
pub mod dimension;
pub mod fit;
pub mod graph;
pub mod io;
pub mod suspension;
pub mod system;
pub mod verify;

pub use letter::{Letter, Perm3};
pub use matrix::{CocycleMatrix, Mat3, StepMatrix};
pub use rational::Rational;
pub use system::{
    AcceleratedOutcome, AcceleratedStep, IntervalPairSystem, SpecialSystem, Step, StepOutcome,
    SystemError, ThinClass,
};
