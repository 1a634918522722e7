//! Dense 3×3 matrices over nonnegative integers.

use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

/// Cocycle matrices: nonnegative, unimodular, arbitrary precision.
pub type CocycleMatrix = Mat3<BigUint>;

/// Length matrices of single or accelerated steps.
pub type StepMatrix = Mat3<u64>;

impl<T> Mat3<T>
where
    T: Clone + Zero + One,
{
    pub fn identity() -> Self {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { T::one() } else { T::zero() })
        }))
    }

    pub fn zero() -> Self {
        Mat3(std::array::from_fn(|_| std::array::from_fn(|_| T::zero())))
    }

    pub fn transpose(&self) -> Self {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| self.0[j][i].clone())))
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Mat3<U> {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| f(&self.0[i][j]))))
    }

    pub fn row(&self, i: usize) -> &[T; 3] {
        &self.0[i]
    }
}

impl<T> Mat3<T>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T>,
{
    pub fn mul(&self, rhs: &Self) -> Self {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..3).fold(T::zero(), |acc, k| acc + self.0[i][k].clone() * rhs.0[k][j].clone())
            })
        }))
    }

    pub fn mul_vec(&self, v: &[T; 3]) -> [T; 3] {
        std::array::from_fn(|i| {
            (0..3).fold(T::zero(), |acc, k| acc + self.0[i][k].clone() * v[k].clone())
        })
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn col_sums(&self) -> [T; 3] {
        std::array::from_fn(|j| {
            (0..3).fold(T::zero(), |acc, i| acc + self.0[i][j].clone())
        })
    }

    pub fn row_sums(&self) -> [T; 3] {
        std::array::from_fn(|i| {
            (0..3).fold(T::zero(), |acc, j| acc + self.0[i][j].clone())
        })
    }
}

impl<T: Zero> Mat3<T> {
    pub fn all_positive(&self) -> bool {
        self.0.iter().flatten().all(|x| !x.is_zero())
    }
}

impl<T: Clone + Into<BigInt>> Mat3<T> {
    pub fn to_bigint(&self) -> Mat3<BigInt> {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j].clone().into())))
    }

    pub fn det(&self) -> BigInt {
        let m = self.to_bigint().0;
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
            - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    }
}

impl Mat3<BigInt> {
    /// Inverse of a unimodular integer matrix via the adjugate.
    pub fn unimodular_inverse(&self) -> Option<Mat3<BigInt>> {
        let det = self.det();
        let sign = if det == BigInt::one() {
            BigInt::one()
        } else if det == -BigInt::one() {
            -BigInt::one()
        } else {
            return None;
        };
        let m = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            &m[r0][c0] * &m[r1][c1] - &m[r0][c1] * &m[r1][c0]
        };
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        Some(Mat3(adj.map(|row| row.map(|x| x * &sign))))
    }
}

impl StepMatrix {
    pub fn to_biguint(&self) -> CocycleMatrix {
        self.map(|&x| BigUint::from(x))
    }

    pub fn to_f64(&self) -> Mat3<f64> {
        self.map(|&x| x as f64)
    }
}

impl<T: fmt::Display> fmt::Display for Mat3<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .0
            .iter()
            .map(|r| format!("{} {} {}", r[0], r[1], r[2]))
            .collect();
        write!(f, "({})", rows.join("; "))
    }
}
