//! File formats shared by the command-line front end.
//!
//! Integers inside vectors are written as decimal strings; plain JSON
//! integers are accepted on input. Counts such as `rank` are JSON numbers.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::cone::Cone;
use crate::fan::{validate_fan, Fan, FanError};
use crate::lattice::{FileInt, Lattice, LatticeVector, Vector, N};
use crate::reconstruct::InputAtlas;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanFile {
    #[serde(deserialize_with = "count")]
    pub rank: usize,
    pub cones: Vec<Vec<LatticeVector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auto_close: Option<bool>,
}

// Counts may be given as numbers or decimal strings.
fn count<'de, D: serde::Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
    let FileInt(x) = FileInt::deserialize(d)?;
    usize::try_from(&x).map_err(|_| serde::de::Error::custom(format!("not a valid count: {x}")))
}

impl FanFile {
    /// All cones of the fan, each by its rays.
    pub fn from_fan(f: &Fan) -> Self {
        FanFile {
            rank: f.rank(),
            cones: f.cones().iter().map(|c| c.rays().to_vec()).collect(),
            auto_close: Some(true),
        }
    }

    pub fn cones(&self) -> Result<Vec<Cone<N>>, InputError> {
        self.cones
            .iter()
            .map(|gens| {
                check_vectors(self.rank, gens)?;
                Ok(Cone::from_generators(self.rank, gens))
            })
            .collect()
    }

    /// Validates, closing under faces unless the file or `no_auto_close`
    /// says otherwise.
    pub fn to_fan(&self, no_auto_close: bool) -> Result<Result<Fan, FanError>, InputError> {
        let auto_close = !no_auto_close && self.auto_close.unwrap_or(true);
        Ok(validate_fan(self.rank, &self.cones()?, auto_close))
    }
}

/// A single cone given by generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeFile {
    #[serde(deserialize_with = "count")]
    pub rank: usize,
    pub generators: Vec<LatticeVector>,
}

fn check_vectors<L: Lattice>(rank: usize, vs: &[Vector<L>]) -> Result<(), InputError> {
    match vs.iter().find(|v| v.rank() != rank) {
        Some(v) => Err(InputError::Invalid(format!("vector {v} does not have rank {rank}"))),
        None => Ok(()),
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|source| InputError::Json {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_fan_file(path: &Path) -> Result<FanFile, InputError> {
    parse(path, &read(path)?)
}

pub fn read_atlas_file(path: &Path) -> Result<InputAtlas, InputError> {
    let atlas: InputAtlas = parse(path, &read(path)?)?;
    for c in &atlas.charts {
        check_vectors(atlas.rank, &c.characters)?;
    }
    for x in &atlas.intersections {
        check_vectors(atlas.rank, &x.characters)?;
    }
    Ok(atlas)
}

/// Parses `"1,0;1,2"` into vectors. An empty string is the empty list.
pub fn parse_inline_vectors<L: Lattice>(text: &str) -> Result<Vec<Vector<L>>, InputError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse()
                        .map_err(|_| InputError::Invalid(format!("not an integer: {:?}", x.trim())))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Vector::new)
        })
        .collect()
}

/// A cone argument: a path to a cone file, or inline generators. `rank` is
/// required only for an inline empty list.
pub fn parse_cone_arg(arg: &str, rank: Option<usize>) -> Result<Cone<N>, InputError> {
    let path = Path::new(arg);
    let (r, gens) = if path.is_file() {
        let f: ConeFile = parse(path, &read(path)?)?;
        (f.rank, f.generators)
    } else {
        let gens: Vec<LatticeVector> = parse_inline_vectors(arg)?;
        let r = match (rank, gens.first()) {
            (Some(r), _) => r,
            (None, Some(g)) => g.rank(),
            (None, None) => {
                return Err(InputError::Invalid("an empty generator list needs --rank".into()));
            }
        };
        (r, gens)
    };
    if let Some(expected) = rank {
        if expected != r {
            return Err(InputError::Invalid(format!("cone has rank {r}, expected {expected}")));
        }
    }
    check_vectors(r, &gens)?;
    Ok(Cone::from_generators(r, &gens))
}

pub fn parse_vector_arg(arg: &str, rank: usize) -> Result<LatticeVector, InputError> {
    let mut vs: Vec<LatticeVector> = parse_inline_vectors(arg)?;
    if vs.len() != 1 {
        return Err(InputError::Invalid(format!("expected one vector, got {:?}", arg)));
    }
    let v = vs.remove(0);
    check_vectors(rank, std::slice::from_ref(&v))?;
    Ok(v)
}

/// The JSON report written by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub input: Value,
    pub verdict: String,
    pub affirmative: bool,
    pub certificates: Value,
    pub diagnostics: Value,
    pub seed: Option<i64>,
    pub timing_us: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::DualVector;

    #[test]
    fn inline_vectors() {
        let vs: Vec<DualVector> = parse_inline_vectors("1,0; -2 ,3").unwrap();
        assert_eq!(vs, vec![DualVector::from_i64(&[1, 0]), DualVector::from_i64(&[-2, 3])]);
        assert!(parse_inline_vectors::<N>("1,x").is_err());
        assert!(parse_inline_vectors::<N>("").unwrap().is_empty());
    }

    #[test]
    fn cone_arguments() {
        let c = parse_cone_arg("1,0;1,2", None).unwrap();
        assert_eq!(c.rays().len(), 2);
        assert_eq!(parse_cone_arg("", Some(3)).unwrap(), Cone::zero(3));
        assert!(parse_cone_arg("", None).is_err());
        assert!(parse_cone_arg("1,0;1", None).is_err());
        assert!(parse_cone_arg("1,0", Some(3)).is_err());
    }

    #[test]
    fn fan_file_round_trip() {
        let text = r#"{"rank": "2", "cones": [[["1","0"],["0","1"]]]}"#;
        let f: FanFile = serde_json::from_str(text).unwrap();
        let fan = f.to_fan(false).unwrap().unwrap();
        let again: FanFile = serde_json::from_str(&serde_json::to_string(&FanFile::from_fan(&fan)).unwrap()).unwrap();
        assert_eq!(again.to_fan(true).unwrap().unwrap(), fan);
        assert!(matches!(f.to_fan(true).unwrap(), Err(FanError::Condition1Violation { .. })));
        let bad: FanFile = serde_json::from_str(r#"{"rank": 2, "cones": [[[1,0,0]]]}"#).unwrap();
        assert!(bad.cones().is_err());
        assert!(serde_json::from_str::<FanFile>(r#"{"rank": 2, "cones": [[[1.0, 0]]]}"#).is_err());
    }
}
