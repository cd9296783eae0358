//! Lattice vectors tagged with the lattice they live in.
//!
//! `N` is the lattice of one-parameter subgroups and `M = Hom(N, Z)` the
//! character lattice. The tag only prevents mixing the two up; pairing a
//! vector with one from the dual lattice is the only cross-lattice operation.

use std::fmt;
use std::hash::Hash;
use std::marker::PhantomData;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, Int};

pub trait Lattice: Copy + Eq + Ord + Hash + fmt::Debug + Send + Sync + 'static {
    type Dual: Lattice<Dual = Self>;
    const NAME: &'static str;
}

/// The lattice `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum N {}

/// The character lattice `M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum M {}

impl Lattice for N {
    type Dual = M;
    const NAME: &'static str = "N";
}

impl Lattice for M {
    type Dual = N;
    const NAME: &'static str = "M";
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vector<L> {
    coords: Vec<Int>,
    _lattice: PhantomData<L>,
}

pub type LatticeVector = Vector<N>;
pub type DualVector = Vector<M>;

impl<L: Lattice> Vector<L> {
    pub fn new(coords: Vec<Int>) -> Self {
        Vector {
            coords,
            _lattice: PhantomData,
        }
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        Self::new(coords.iter().map(|&x| Int::from(x)).collect())
    }

    pub fn zero(rank: usize) -> Self {
        Self::new(vec![Int::zero(); rank])
    }

    pub fn unit(rank: usize, i: usize) -> Self {
        let mut v = Self::zero(rank);
        v.coords[i] = Int::from(1);
        v
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Int] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Int> {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_primitive(&self) -> bool {
        linalg::content(&self.coords) == Int::from(1)
    }

    pub fn primitive(self) -> Self {
        Self::new(linalg::primitive(self.coords))
    }

    pub fn scale(&self, k: &Int) -> Self {
        Self::new(self.coords.iter().map(|x| x * k).collect())
    }

    /// The natural pairing `(u, v)` between a lattice and its dual.
    pub fn pair(&self, other: &Vector<L::Dual>) -> Int {
        linalg::dot(&self.coords, other.coords())
    }

    pub fn max_abs(&self) -> Int {
        self.coords
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Int::zero)
    }
}

impl<L: Lattice> fmt::Debug for Vector<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl<L: Lattice> fmt::Display for Vector<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl<L: Lattice> Add for &Vector<L> {
    type Output = Vector<L>;
    fn add(self, rhs: &Vector<L>) -> Vector<L> {
        assert_eq!(self.rank(), rhs.rank());
        Vector::new(self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect())
    }
}

impl<L: Lattice> Sub for &Vector<L> {
    type Output = Vector<L>;
    fn sub(self, rhs: &Vector<L>) -> Vector<L> {
        assert_eq!(self.rank(), rhs.rank());
        Vector::new(self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect())
    }
}

impl<L: Lattice> Neg for &Vector<L> {
    type Output = Vector<L>;
    fn neg(self) -> Vector<L> {
        Vector::new(self.coords.iter().map(|a| -a).collect())
    }
}

impl<L: Lattice> Neg for Vector<L> {
    type Output = Vector<L>;
    fn neg(self) -> Vector<L> {
        -&self
    }
}

/// Sum of a list of vectors of the given rank.
pub fn sum<'a, L: Lattice>(rank: usize, vs: impl IntoIterator<Item = &'a Vector<L>>) -> Vector<L> {
    vs.into_iter().fold(Vector::zero(rank), |acc, v| &acc + v)
}

pub(crate) fn to_rows<L: Lattice>(vs: &[Vector<L>]) -> Vec<Vec<Int>> {
    vs.iter().map(|v| v.coords.clone()).collect()
}

pub(crate) fn from_rows<L: Lattice>(rows: Vec<Vec<Int>>) -> Vec<Vector<L>> {
    rows.into_iter().map(Vector::new).collect()
}

// Files carry integers as decimal strings; plain JSON integers are accepted
// on input as well.

impl<L: Lattice> Serialize for Vector<L> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.coords.len()))?;
        for x in &self.coords {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }
}

/// A single exact integer read from a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileInt(pub Int);

impl<'de> Deserialize<'de> for FileInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct IntVisitor;
        impl Visitor<'_> for IntVisitor {
            type Value = FileInt;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer or a decimal integer string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<FileInt, E> {
                Ok(FileInt(Int::from(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<FileInt, E> {
                Ok(FileInt(Int::from(v)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<FileInt, E> {
                Int::from_str(v.trim())
                    .map(FileInt)
                    .map_err(|_| E::custom(format!("not an integer: {v:?}")))
            }
        }
        d.deserialize_any(IntVisitor)
    }
}

/// `#[serde(with = "int_string")]` for a single exact integer field.
pub mod int_string {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Int, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Int, D::Error> {
        FileInt::deserialize(d).map(|FileInt(x)| x)
    }
}

impl<'de, L: Lattice> Deserialize<'de> for Vector<L> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct VecVisitor<L>(PhantomData<L>);
        impl<'de, L: Lattice> Visitor<'de> for VecVisitor<L> {
            type Value = Vector<L>;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array of integers")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Vector<L>, A::Error> {
                let mut coords = Vec::new();
                while let Some(FileInt(x)) = seq.next_element()? {
                    coords.push(x);
                }
                Ok(Vector::new(coords))
            }
        }
        d.deserialize_seq(VecVisitor(PhantomData))
    }
}
