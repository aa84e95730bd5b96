use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Field {
    R,
    C,
    H,
}

impl Field {
    /// Real dimension of the division algebra.
    pub fn dim(self) -> u32 {
        match self {
            Field::R => 1,
            Field::C => 2,
            Field::H => 4,
        }
    }
}

/// Target space of a homotopy class: a sphere `S^n` or a projective space `FP^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Space {
    Sphere(u32),
    Proj(Field, u32),
}

impl Space {
    pub fn sphere_dim(self) -> Option<u32> {
        match self {
            Space::Sphere(n) => Some(n),
            Space::Proj(..) => None,
        }
    }

    pub fn suspend(self, k: u32) -> Option<Space> {
        self.sphere_dim().map(|n| Space::Sphere(n + k))
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Sphere(n) => write!(f, "S{n}"),
            Space::Proj(field, n) => write!(f, "{field:?}P{n}"),
        }
    }
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Invalid(format!("bad space tag `{s}`"));
        let (field, rest) = if let Some(r) = s.strip_prefix("RP") {
            (Some(Field::R), r)
        } else if let Some(r) = s.strip_prefix("CP") {
            (Some(Field::C), r)
        } else if let Some(r) = s.strip_prefix("HP") {
            (Some(Field::H), r)
        } else if let Some(r) = s.strip_prefix('S') {
            (None, r)
        } else {
            return Err(bad());
        };
        let n: u32 = rest.parse().map_err(|_| bad())?;
        Ok(match field {
            Some(f) => Space::Proj(f, n),
            None => Space::Sphere(n),
        })
    }
}

/// Degree data of a class in `pi_k(X)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub source_dim: u32,
    pub target: Space,
}

impl Signature {
    pub fn new(source_dim: u32, target: Space) -> Self {
        Signature { source_dim, target }
    }

    pub fn key(self) -> TableKey {
        TableKey { target: self.target, k: self.source_dim }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pi_{}({})", self.source_dim, self.target)
    }
}

/// Identifies the group `pi_k(target)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TableKey {
    pub target: Space,
    pub k: u32,
}

impl TableKey {
    pub fn new(target: Space, k: u32) -> Self {
        TableKey { target, k }
    }

    pub fn signature(self) -> Signature {
        Signature::new(self.k, self.target)
    }
}

impl fmt::Display for TableKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pi_{}({})", self.k, self.target)
    }
}
