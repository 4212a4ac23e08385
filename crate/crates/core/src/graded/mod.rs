//! Z2-graded linear algebra: the exterior-algebra fibre, supermatrices and
//! super Lie algebras given by structure constants.

mod exterior;
mod lie;
mod supermatrix;

pub use exterior::{exterior_mul, interior_mul, theta_derivative, ExteriorElement, MAX_GENERATORS};
pub use lie::{check_super_jacobi, SuperLieAlgebraSpec};
pub use supermatrix::{exp_supermatrix, super_commutator, SuperMatrix};

use serde::{Deserialize, Serialize};
use std::ops::Add;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(bit: u32) -> Self {
        if bit % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    /// `(-1)^{self * other}`.
    pub fn koszul_sign(self, other: Parity) -> f64 {
        if self == Parity::Odd && other == Parity::Odd {
            -1.0
        } else {
            1.0
        }
    }
}

impl Add for Parity {
    type Output = Parity;

    fn add(self, rhs: Parity) -> Parity {
        Parity::from_bit(self.bit() + rhs.bit())
    }
}

/// Rank `m|n` of a graded vector space: `even` even and `odd` odd directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SuperDim {
    pub even: usize,
    pub odd: usize,
}

impl SuperDim {
    pub fn new(even: usize, odd: usize) -> Self {
        SuperDim { even, odd }
    }

    pub fn total(&self) -> usize {
        self.even + self.odd
    }

    pub fn parity_of(&self, index: usize) -> Parity {
        if index < self.even {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}
