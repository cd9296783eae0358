//! Recovering a fan from an affine atlas given by character data.
//!
//! Every chart `V_i` is described by a finite set `A_i ⊂ M` generating its
//! coordinate monoid, and every overlap `V_i ∩ V_j` by a set `A_ij`. All
//! charts share one torus, and `V_ij ⊆ V_i` comes from `A_i ⊆ ⟨A_ij⟩`.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone::Cone;
use crate::fan::{validate_fan, Fan, FanError};
use crate::lattice::{self, DualVector, LatticeVector, M, N};
use crate::linalg::{self, IntMatrix};
use crate::monoid::AffineMonoid;
use crate::variety::{build_atlas, face_localization_certificate, ChartAtlasFromFan, FaceLocalizationCertificate};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputChart {
    #[serde(deserialize_with = "chart_id")]
    pub id: String,
    pub characters: Vec<DualVector>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputIntersection {
    #[serde(deserialize_with = "chart_id_pair")]
    pub ids: [String; 2],
    pub characters: Vec<DualVector>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputAtlas {
    pub rank: usize,
    pub charts: Vec<InputChart>,
    #[serde(default)]
    pub intersections: Vec<InputIntersection>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawId {
    Text(String),
    Number(u64),
}

impl From<RawId> for String {
    fn from(r: RawId) -> String {
        match r {
            RawId::Text(s) => s,
            RawId::Number(n) => n.to_string(),
        }
    }
}

// Chart ids may be written as strings or as nonnegative integers.
fn chart_id<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    RawId::deserialize(d).map(String::from)
}

fn chart_id_pair<'de, D: Deserializer<'de>>(d: D) -> Result<[String; 2], D::Error> {
    struct PairVisitor;
    impl<'de> Visitor<'de> for PairVisitor {
        type Value = [String; 2];
        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a pair of chart ids")
        }
        fn visit_seq<A: de::SeqAccess<'de>>(self, mut seq: A) -> Result<[String; 2], A::Error> {
            let a: RawId = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
            let b: RawId = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
            if seq.next_element::<RawId>()?.is_some() {
                return Err(de::Error::invalid_length(3, &self));
            }
            Ok([a.into(), b.into()])
        }
    }
    d.deserialize_seq(PairVisitor)
}

/// Failure of a single character set to describe a normal affine toric
/// chart.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChartError {
    #[error("characters do not generate M as a group")]
    TorusNotDense,
    #[error("not normal: {witness} lies in the saturation but is not generated")]
    NotNormal { witness: DualVector },
    #[error("character {0} has the wrong rank")]
    RankMismatch(DualVector),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconstructError {
    #[error("chart {chart}: {source}")]
    Chart { chart: String, source: ChartError },
    #[error("chart id {0} is used twice")]
    DuplicateChart(String),
    #[error("intersection refers to unknown chart {0}")]
    UnknownChart(String),
    #[error("no intersection data for charts {0} and {1}")]
    MissingIntersection(String, String),
    #[error("characters of chart {chart} are not in the monoid of its intersection with {other}")]
    InclusionViolated { chart: String, other: String },
    #[error("charts {0} and {1} are not separated: the overlap cone {2} differs from the intersection {3}")]
    NonSeparated(String, String, Cone<N>, Cone<N>),
    #[error("the overlap cone of charts {0} and {1} is not a face of both chart cones")]
    FaceCertificateMissing(String, String),
    #[error("assembled cones do not form a fan: {0}")]
    InvalidFan(FanError),
    #[error("rebuilt chart {0} has a different monoid")]
    RoundTripMismatch(String),
}

impl ReconstructError {
    fn chart(id: &str, source: ChartError) -> Self {
        ReconstructError::Chart {
            chart: id.to_string(),
            source,
        }
    }
}

fn char_matrix(rank: usize, chars: &[DualVector]) -> IntMatrix {
    IntMatrix::from_rows(rank, lattice::to_rows(chars)).expect("ranks checked")
}

fn check_ranks(rank: usize, chars: &[DualVector]) -> Result<(), ChartError> {
    match chars.iter().find(|c| c.rank() != rank) {
        Some(c) => Err(ChartError::RankMismatch(c.clone())),
        None => Ok(()),
    }
}

/// `σ = cone(chars)^∨`: the vectors pairing nonnegatively with every
/// character.
pub fn cone_from_characters(rank: usize, chars: &[DualVector]) -> Result<Cone<N>, ChartError> {
    check_ranks(rank, chars)?;
    if linalg::lattice_basis(&char_matrix(rank, chars)) != IntMatrix::identity(rank) {
        return Err(ChartError::TorusNotDense);
    }
    Ok(Cone::<M>::from_generators(rank, chars).dual())
}

/// Exact membership of `h` in the monoid generated by `chars`, whose cone
/// has dual `sigma`.
///
/// Let `d` be an interior point of `sigma`. Characters with `(a, d) = 0`
/// span the lineality space of `cone(chars)` positively, so they generate a
/// group `G`. Every other character has positive degree, so `h` is
/// generated iff `h − s ∈ G` for one of the finitely many sums `s` of
/// positive-degree characters with degree `(h, d)`.
fn monoid_contains(rank: usize, chars: &[DualVector], sigma: &Cone<N>, h: &DualVector) -> bool {
    let d = sigma.relative_interior_point();
    let target = h.pair(&d);
    if target.is_negative() {
        return false;
    }
    let (flat, graded): (Vec<&DualVector>, Vec<&DualVector>) = chars.iter().partition(|a| a.pair(&d).is_zero());
    let group = linalg::lattice_basis(&char_matrix(rank, &flat.into_iter().cloned().collect::<Vec<_>>()));
    let in_group = |v: &DualVector| {
        if v.is_zero() {
            return true;
        }
        group.rows() > 0 && linalg::lattice_coords(&group, v.coords()).is_some()
    };
    let top = target.to_usize().expect("degree fits in memory");
    let degrees: Vec<usize> = graded
        .iter()
        .map(|a| a.pair(&d).to_usize().expect("degree fits in memory"))
        .collect();
    // sums[k] holds the distinct sums of degree k; only degrees up to `top`
    // are needed.
    let mut sums: Vec<BTreeSet<DualVector>> = vec![BTreeSet::new(); top + 1];
    sums[0].insert(DualVector::zero(rank));
    for k in 1..=top {
        let mut level = BTreeSet::new();
        for (a, &da) in graded.iter().zip(&degrees) {
            if da <= k {
                for s in &sums[k - da] {
                    level.insert(s + *a);
                }
            }
        }
        sums[k] = level;
    }
    sums[top].iter().any(|s| in_group(&(h - s)))
}

/// Whether `⟨chars⟩ = cone(chars) ∩ M`, tested on the generators of the
/// saturation.
pub fn normality_check(rank: usize, chars: &[DualVector]) -> Result<(), ChartError> {
    let sigma = cone_from_characters(rank, chars)?;
    let saturation = AffineMonoid::new(&sigma).expect("dense torus makes σ strongly convex");
    for h in saturation.generators() {
        if !monoid_contains(rank, chars, &sigma, &h) {
            return Err(ChartError::NotNormal { witness: h });
        }
    }
    Ok(())
}

/// The cone of a normal affine chart together with the fan it generates.
pub fn affine_case(rank: usize, chars: &[DualVector]) -> Result<(Cone<N>, Fan), ChartError> {
    normality_check(rank, chars)?;
    let sigma = cone_from_characters(rank, chars)?;
    let fan = Fan::generated_by(&sigma).expect("σ is strongly convex");
    Ok((sigma, fan))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapCertificates {
    pub charts: [String; 2],
    pub overlap: Cone<N>,
    pub in_first: FaceLocalizationCertificate,
    pub in_second: FaceLocalizationCertificate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconstructionReport {
    pub fan: Fan,
    pub cone_per_chart: Vec<(String, Cone<N>)>,
    pub certificates: Vec<OverlapCertificates>,
    pub separated: bool,
    pub normal: bool,
    pub round_trip_verified: bool,
}

fn find_overlap<'a>(a: &'a InputAtlas, i: &str, j: &str) -> Option<&'a InputIntersection> {
    a.intersections
        .iter()
        .find(|x| (x.ids[0] == i && x.ids[1] == j) || (x.ids[0] == j && x.ids[1] == i))
}

pub fn reconstruct_fan(a: &InputAtlas) -> Result<ReconstructionReport, ReconstructError> {
    let n = a.rank;
    let mut ids = BTreeSet::new();
    for c in &a.charts {
        if !ids.insert(c.id.as_str()) {
            return Err(ReconstructError::DuplicateChart(c.id.clone()));
        }
    }
    for x in &a.intersections {
        if let Some(id) = x.ids.iter().find(|id| !ids.contains(id.as_str())) {
            return Err(ReconstructError::UnknownChart(id.clone()));
        }
    }
    let mut cones = Vec::with_capacity(a.charts.len());
    for c in &a.charts {
        let sigma = cone_from_characters(n, &c.characters).map_err(|e| ReconstructError::chart(&c.id, e))?;
        normality_check(n, &c.characters).map_err(|e| ReconstructError::chart(&c.id, e))?;
        cones.push(sigma);
    }
    let mut certificates = Vec::new();
    for i in 0..a.charts.len() {
        for j in i + 1..a.charts.len() {
            let (ci, cj) = (&a.charts[i], &a.charts[j]);
            let x = find_overlap(a, &ci.id, &cj.id)
                .ok_or_else(|| ReconstructError::MissingIntersection(ci.id.clone(), cj.id.clone()))?;
            let label = format!("{}∩{}", ci.id, cj.id);
            let overlap = cone_from_characters(n, &x.characters).map_err(|e| ReconstructError::chart(&label, e))?;
            normality_check(n, &x.characters).map_err(|e| ReconstructError::chart(&label, e))?;
            for (c, other) in [(ci, cj), (cj, ci)] {
                if !c.characters.iter().all(|u| monoid_contains(n, &x.characters, &overlap, u)) {
                    return Err(ReconstructError::InclusionViolated {
                        chart: c.id.clone(),
                        other: other.id.clone(),
                    });
                }
            }
            let meet = cones[i].intersect(&cones[j]);
            if overlap != meet {
                return Err(ReconstructError::NonSeparated(ci.id.clone(), cj.id.clone(), overlap, meet));
            }
            let missing = || ReconstructError::FaceCertificateMissing(ci.id.clone(), cj.id.clone());
            let mi = AffineMonoid::new(&cones[i]).expect("chart cones are strongly convex");
            let mj = AffineMonoid::new(&cones[j]).expect("chart cones are strongly convex");
            let in_first = face_localization_certificate(&mi, &overlap).ok_or_else(missing)?;
            let in_second = face_localization_certificate(&mj, &overlap).ok_or_else(missing)?;
            certificates.push(OverlapCertificates {
                charts: [ci.id.clone(), cj.id.clone()],
                overlap,
                in_first,
                in_second,
            });
        }
    }
    if cones.is_empty() {
        return Err(ReconstructError::InvalidFan(FanError::Empty));
    }
    let fan = validate_fan(n, &cones, true).map_err(ReconstructError::InvalidFan)?;
    let atlas = build_atlas(&fan);
    for (c, sigma) in a.charts.iter().zip(&cones) {
        let rebuilt = atlas.chart(sigma).expect("chart cones belong to the fan");
        if rebuilt.sigma_dual() != &Cone::<M>::from_generators(n, &c.characters) {
            return Err(ReconstructError::RoundTripMismatch(c.id.clone()));
        }
    }
    Ok(ReconstructionReport {
        fan,
        cone_per_chart: a.charts.iter().map(|c| c.id.clone()).zip(cones).collect(),
        certificates,
        separated: true,
        normal: true,
        round_trip_verified: true,
    })
}

/// The atlas of the maximal cones of a fan, with Hilbert generators as
/// characters. Charts are numbered from 1.
pub fn export_atlas(a: &ChartAtlasFromFan) -> InputAtlas {
    let maximal = a.fan.maximal_cones();
    let chars = |c: &Cone<N>| a.chart(c).expect("fan cone").generators();
    let charts = maximal
        .iter()
        .enumerate()
        .map(|(i, c)| InputChart {
            id: (i + 1).to_string(),
            characters: chars(c),
        })
        .collect();
    let mut intersections = Vec::new();
    for i in 0..maximal.len() {
        for j in i + 1..maximal.len() {
            intersections.push(InputIntersection {
                ids: [(i + 1).to_string(), (j + 1).to_string()],
                characters: chars(&maximal[i].intersect(&maximal[j])),
            });
        }
    }
    InputAtlas {
        rank: a.fan.rank(),
        charts,
        intersections,
    }
}

/// Whether `v` gives a one-parameter subsemigroup extending to the chart
/// with characters `chars`.
pub fn extends_to_chart(chars: &[DualVector], v: &LatticeVector) -> bool {
    chars.iter().all(|u| !u.pair(v).is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::has_semigroup_structure;

    fn mv(c: &[i64]) -> DualVector {
        DualVector::from_i64(c)
    }

    fn chars(list: &[&[i64]]) -> Vec<DualVector> {
        list.iter().map(|c| mv(c)).collect()
    }

    fn ncone(rank: usize, gens: &[&[i64]]) -> Cone<N> {
        let g: Vec<_> = gens.iter().map(|c| LatticeVector::from_i64(c)).collect();
        Cone::from_generators(rank, &g)
    }

    fn chart(id: &str, c: &[&[i64]]) -> InputChart {
        InputChart {
            id: id.into(),
            characters: chars(c),
        }
    }

    fn overlap(i: &str, j: &str, c: &[&[i64]]) -> InputIntersection {
        InputIntersection {
            ids: [i.into(), j.into()],
            characters: chars(c),
        }
    }

    #[test]
    fn cones_from_characters() {
        assert_eq!(
            cone_from_characters(2, &chars(&[&[1, 0], &[0, 1]])).unwrap(),
            ncone(2, &[&[1, 0], &[0, 1]])
        );
        assert_eq!(
            cone_from_characters(2, &chars(&[&[1, 0], &[-1, 0], &[0, 1]])).unwrap(),
            ncone(2, &[&[0, 1]])
        );
        assert_eq!(
            cone_from_characters(3, &chars(&[&[1, 0, 0], &[-1, 0, 0], &[0, 1, 0], &[0, -1, 0], &[0, 0, 1], &[0, 0, -1]]))
                .unwrap(),
            Cone::zero(3)
        );
        assert_eq!(cone_from_characters(1, &chars(&[&[2]])), Err(ChartError::TorusNotDense));
        assert_eq!(cone_from_characters(2, &chars(&[&[1, 0]])), Err(ChartError::TorusNotDense));
        let redundant = chars(&[&[1, 0], &[0, 1], &[1, 1], &[3, 2]]);
        assert_eq!(
            cone_from_characters(2, &redundant).unwrap(),
            cone_from_characters(2, &chars(&[&[1, 0], &[0, 1]])).unwrap()
        );
    }

    #[test]
    fn normality() {
        assert_eq!(normality_check(2, &chars(&[&[1, 0], &[0, 1]])), Ok(()));
        assert_eq!(
            normality_check(1, &chars(&[&[2], &[3]])),
            Err(ChartError::NotNormal { witness: mv(&[1]) })
        );
        assert_eq!(normality_check(2, &chars(&[&[1, 0], &[1, 2], &[1, 1]])), Ok(()));
        assert!(matches!(
            normality_check(2, &chars(&[&[1, 0], &[1, 2]])),
            Err(ChartError::TorusNotDense)
        ));
        assert_eq!(
            normality_check(2, &chars(&[&[1, 0], &[0, 2], &[0, 3], &[1, 1]])),
            Err(ChartError::NotNormal { witness: mv(&[0, 1]) })
        );
        // the units ±2 and ±3 generate Z
        assert_eq!(normality_check(1, &chars(&[&[2], &[-3]])), Ok(()));
        assert_eq!(normality_check(2, &chars(&[&[2, 0], &[-3, 0], &[0, 1]])), Ok(()));
    }

    #[test]
    fn p1_reconstructs() {
        let atlas = InputAtlas {
            rank: 1,
            charts: vec![chart("1", &[&[1]]), chart("2", &[&[-1]])],
            intersections: vec![overlap("1", "2", &[&[1], &[-1]])],
        };
        let r = reconstruct_fan(&atlas).unwrap();
        assert_eq!(r.fan.cones(), &[Cone::zero(1), ncone(1, &[&[-1]]), ncone(1, &[&[1]])]);
        assert_eq!(r.certificates.len(), 1);
        assert!(r.certificates[0].in_first.verify() && r.certificates[0].in_second.verify());
        assert!(r.round_trip_verified);
        assert!(!has_semigroup_structure(&r.fan).verdict);
    }

    #[test]
    fn doubled_line_is_not_separated() {
        let atlas = InputAtlas {
            rank: 1,
            charts: vec![chart("1", &[&[1]]), chart("2", &[&[1]])],
            intersections: vec![overlap("1", "2", &[&[1], &[-1]])],
        };
        match reconstruct_fan(&atlas) {
            Err(ReconstructError::NonSeparated(i, j, overlap, meet)) => {
                assert_eq!((i.as_str(), j.as_str()), ("1", "2"));
                assert_eq!(overlap, Cone::zero(1));
                assert_eq!(meet, ncone(1, &[&[1]]));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_chart() {
        let atlas = InputAtlas {
            rank: 2,
            charts: vec![chart("a", &[&[1, 0], &[0, 1]])],
            intersections: vec![],
        };
        let r = reconstruct_fan(&atlas).unwrap();
        assert_eq!(r.fan, Fan::generated_by(&ncone(2, &[&[1, 0], &[0, 1]])).unwrap());
        assert!(has_semigroup_structure(&r.fan).verdict);
    }

    #[test]
    fn reconstruction_errors() {
        let not_normal = InputAtlas {
            rank: 1,
            charts: vec![chart("x", &[&[2], &[3]])],
            intersections: vec![],
        };
        assert_eq!(
            reconstruct_fan(&not_normal),
            Err(ReconstructError::chart("x", ChartError::NotNormal { witness: mv(&[1]) }))
        );
        let missing = InputAtlas {
            rank: 1,
            charts: vec![chart("1", &[&[1]]), chart("2", &[&[-1]])],
            intersections: vec![],
        };
        assert!(matches!(reconstruct_fan(&missing), Err(ReconstructError::MissingIntersection(_, _))));
        let overlapping = InputAtlas {
            rank: 2,
            charts: vec![chart("1", &[&[1, 0], &[0, 1]]), chart("2", &[&[1, 1], &[-1, 1]])],
            intersections: vec![overlap("1", "2", &[&[1, 0], &[0, 1], &[1, 1], &[-1, 1]])],
        };
        assert!(reconstruct_fan(&overlapping).is_err());
    }

    #[test]
    fn affine_examples() {
        let (sigma, fan) = affine_case(2, &chars(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(fan.cones().len(), 4);
        assert!(AffineMonoid::new(&sigma).unwrap().has_zero().is_some());
        let (sigma, fan) = affine_case(1, &chars(&[&[1], &[-1]])).unwrap();
        assert!(sigma.is_zero());
        assert_eq!(fan.cones().len(), 1);
        assert!(AffineMonoid::new(&sigma).unwrap().has_zero().is_none());
        let (sigma, _) = affine_case(2, &chars(&[&[0, 1], &[1, 0], &[2, -1]])).unwrap();
        assert_eq!(sigma, ncone(2, &[&[1, 0], &[1, 2]]));
    }

    #[test]
    fn export_round_trip() {
        let fan = validate_fan(
            2,
            &[ncone(2, &[&[1, 0], &[0, 1]]), ncone(2, &[&[0, 1], &[-1, -1]]), ncone(2, &[&[-1, -1], &[1, 0]])],
            true,
        )
        .unwrap();
        let exported = export_atlas(&build_atlas(&fan));
        assert_eq!(exported.charts.len(), 3);
        assert_eq!(exported.intersections.len(), 3);
        assert_eq!(reconstruct_fan(&exported).unwrap().fan, fan);
    }

    #[test]
    fn atlas_ids_accept_numbers() {
        let a: InputAtlas = serde_json::from_str(
            r#"{"rank":1,"charts":[{"id":1,"characters":[["1"]]},{"id":"2","characters":[[-1]]}],
                "intersections":[{"ids":[1,"2"],"characters":[[1],[-1]]}]}"#,
        )
        .unwrap();
        assert_eq!(a.intersections[0].ids, ["1".to_string(), "2".to_string()]);
        assert!(reconstruct_fan(&a).is_ok());
    }
}
