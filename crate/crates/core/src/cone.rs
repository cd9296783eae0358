//! Rational polyhedral cones with exact V/H conversion.
//!
//! A [`Cone`] always carries both descriptions in canonical form:
//!
//! * `lineality` is the Hermite basis of the saturated lattice of the largest
//!   linear subspace in the cone, and `rays` are the extreme rays of the
//!   pointed part, each reduced to a canonical representative modulo that
//!   subspace;
//! * `span_eqs` is the Hermite basis of the saturated lattice orthogonal to
//!   the linear span, and `ineqs` are the facet normals, reduced modulo
//!   `span_eqs` the same way.
//!
//! Both lists are sorted, so two cones are equal as sets iff they are equal
//! as values. Conversion between the two descriptions is done by the double
//! description method with primitive normalization after every step.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::lattice::{self, Lattice, Vector};
use crate::linalg::{self, Int, IntMatrix, QuotientLattice};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cone<L: Lattice> {
    rank: usize,
    rays: Vec<Vector<L>>,
    lineality: Vec<Vector<L>>,
    ineqs: Vec<Vector<L::Dual>>,
    span_eqs: Vec<Vector<L::Dual>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConeClass {
    pub strongly_convex: bool,
    pub nondegenerate: bool,
    pub dim: usize,
}

/// A face together with a dual vector `u` in the dual cone such that the
/// face is `cone ∩ u⊥`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face<L: Lattice> {
    pub cone: Cone<L>,
    pub witness: Vector<L::Dual>,
}

#[derive(Clone)]
struct ZeroSet(Vec<u64>);

impl ZeroSet {
    fn new(bits: usize) -> Self {
        ZeroSet(vec![0; bits.div_ceil(64).max(1)])
    }

    fn full(count: usize, bits: usize) -> Self {
        let mut s = Self::new(bits);
        for i in 0..count {
            s.insert(i);
        }
        s
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn intersect(&self, other: &ZeroSet) -> ZeroSet {
        ZeroSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn is_subset(&self, other: &ZeroSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

struct DdRay {
    v: Vec<Int>,
    zeros: ZeroSet,
}

fn scaled_combination(a: &Int, x: &[Int], b: &Int, y: &[Int]) -> Vec<Int> {
    linalg::primitive(x.iter().zip(y).map(|(p, q)| a * p - b * q).collect())
}

/// Generators `(rays, lineality)` of `{x : a·x ≥ 0 for a in ineqs, e·x = 0
/// for e in eqs}`.
///
/// Rays are the extreme rays of the cone modulo its lineality space. The
/// representatives are primitive but not yet canonical.
pub(crate) fn double_description(
    dim: usize,
    ineqs: &[Vec<Int>],
    eqs: &[Vec<Int>],
) -> (Vec<Vec<Int>>, Vec<Vec<Int>>) {
    let mut constraints: Vec<Vec<Int>> = Vec::new();
    for e in eqs {
        if e.iter().any(|x| !x.is_zero()) {
            constraints.push(e.clone());
            constraints.push(e.iter().map(|x| -x).collect());
        }
    }
    constraints.extend(ineqs.iter().filter(|a| a.iter().any(|x| !x.is_zero())).cloned());
    let total = constraints.len();

    let mut lin: Vec<Vec<Int>> = IntMatrix::identity(dim).into_rows();
    let mut rays: Vec<DdRay> = Vec::new();

    for (k, a) in constraints.iter().enumerate() {
        if let Some(p) = lin.iter().position(|l| !linalg::dot(a, l).is_zero()) {
            let mut l0 = lin.swap_remove(p);
            let mut s = linalg::dot(a, &l0);
            if s.is_negative() {
                l0 = l0.iter().map(|x| -x).collect();
                s = -s;
            }
            for l in lin.iter_mut() {
                let t = linalg::dot(a, l);
                if !t.is_zero() {
                    *l = scaled_combination(&s, l, &t, &l0);
                }
            }
            for r in rays.iter_mut() {
                let t = linalg::dot(a, &r.v);
                if !t.is_zero() {
                    r.v = scaled_combination(&s, &r.v, &t, &l0);
                }
                r.zeros.insert(k);
            }
            rays.push(DdRay {
                v: l0,
                zeros: ZeroSet::full(k, total),
            });
            continue;
        }

        let vals: Vec<Int> = rays.iter().map(|r| linalg::dot(a, &r.v)).collect();
        if vals.iter().all(|t| !t.is_negative()) {
            for (r, t) in rays.iter_mut().zip(&vals) {
                if t.is_zero() {
                    r.zeros.insert(k);
                }
            }
            continue;
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();

        let mut fresh = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].zeros.intersect(&rays[n].zeros);
                let adjacent = !(0..rays.len())
                    .any(|r| r != p && r != n && common.is_subset(&rays[r].zeros));
                if !adjacent {
                    continue;
                }
                let v = scaled_combination(&vals[p], &rays[n].v, &vals[n], &rays[p].v);
                let mut zeros = common;
                zeros.insert(k);
                fresh.push(DdRay { v, zeros });
            }
        }
        let mut kept: Vec<DdRay> = Vec::with_capacity(rays.len() + fresh.len());
        for (mut r, t) in rays.into_iter().zip(vals) {
            if t.is_negative() {
                continue;
            }
            if t.is_zero() {
                r.zeros.insert(k);
            }
            kept.push(r);
        }
        kept.extend(fresh);
        rays = kept;
    }
    (rays.into_iter().map(|r| r.v).collect(), lin)
}

fn canonical_rows(rank: usize, rows: Vec<Vec<Int>>, modulo: &[Vec<Int>]) -> Vec<Vec<Int>> {
    let mut out: Vec<Vec<Int>> = if modulo.is_empty() {
        rows.into_iter()
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .map(linalg::primitive)
            .collect()
    } else {
        let q = QuotientLattice::new(rank, modulo);
        rows.iter().filter_map(|r| q.canonical_ray(r)).collect()
    };
    out.sort();
    out.dedup();
    out
}

fn saturated_rows(rank: usize, rows: Vec<Vec<Int>>) -> Vec<Vec<Int>> {
    let m = IntMatrix::from_rows(rank, rows).expect("rank mismatch");
    linalg::saturate(&m).into_rows()
}

impl<L: Lattice> Cone<L> {
    fn canonical(
        rank: usize,
        rays: Vec<Vec<Int>>,
        lineality: Vec<Vec<Int>>,
        ineqs: Vec<Vec<Int>>,
        span_eqs: Vec<Vec<Int>>,
    ) -> Self {
        let lineality = saturated_rows(rank, lineality);
        let span_eqs = saturated_rows(rank, span_eqs);
        let rays = canonical_rows(rank, rays, &lineality);
        let ineqs = canonical_rows(rank, ineqs, &span_eqs);
        Cone {
            rank,
            rays: lattice::from_rows(rays),
            lineality: lattice::from_rows(lineality),
            ineqs: lattice::from_rows(ineqs),
            span_eqs: lattice::from_rows(span_eqs),
        }
    }

    /// The cone of all nonnegative combinations of `gens`.
    ///
    /// Panics if a generator has the wrong length.
    pub fn from_generators(rank: usize, gens: &[Vector<L>]) -> Self {
        for g in gens {
            assert_eq!(g.rank(), rank, "generator {g} has wrong length");
        }
        let rows = lattice::to_rows(gens);
        let (dual_rays, dual_lin) = double_description(rank, &rows, &[]);
        let (rays, lin) = double_description(rank, &dual_rays, &dual_lin);
        Self::canonical(rank, rays, lin, dual_rays, dual_lin)
    }

    /// The cone `{v : (u, v) ≥ 0 for u in ineqs, (e, v) = 0 for e in eqs}`.
    pub fn from_inequalities(rank: usize, ineqs: &[Vector<L::Dual>], eqs: &[Vector<L::Dual>]) -> Self {
        for u in ineqs.iter().chain(eqs) {
            assert_eq!(u.rank(), rank, "inequality {u} has wrong length");
        }
        let (rays, lin) = double_description(rank, &lattice::to_rows(ineqs), &lattice::to_rows(eqs));
        let (dual_rays, dual_lin) = double_description(rank, &rays, &lin);
        Self::canonical(rank, rays, lin, dual_rays, dual_lin)
    }

    pub fn zero(rank: usize) -> Self {
        Self::from_generators(rank, &[])
    }

    pub fn whole_space(rank: usize) -> Self {
        Self::from_inequalities(rank, &[], &[])
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[Vector<L>] {
        &self.rays
    }

    pub fn lineality(&self) -> &[Vector<L>] {
        &self.lineality
    }

    pub fn ineqs(&self) -> &[Vector<L::Dual>] {
        &self.ineqs
    }

    pub fn span_eqs(&self) -> &[Vector<L::Dual>] {
        &self.span_eqs
    }

    /// Rays, lineality basis and negated lineality basis.
    pub fn generators(&self) -> Vec<Vector<L>> {
        let mut g = self.rays.clone();
        for l in &self.lineality {
            g.push(l.clone());
            g.push(-l);
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.rank - self.span_eqs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.rays.is_empty() && self.lineality.is_empty()
    }

    pub fn is_strongly_convex(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.span_eqs.is_empty()
    }

    pub fn classify(&self) -> ConeClass {
        ConeClass {
            strongly_convex: self.is_strongly_convex(),
            nondegenerate: self.is_nondegenerate(),
            dim: self.dim(),
        }
    }

    /// `σ* = {u : (u, v) ≥ 0 for all v ∈ σ}`, recomputed from the
    /// inequality description.
    pub fn dual(&self) -> Cone<L::Dual> {
        let mut gens = self.ineqs.clone();
        for e in &self.span_eqs {
            gens.push(e.clone());
            gens.push(-e);
        }
        Cone::from_generators(self.rank, &gens)
    }

    pub fn contains(&self, v: &Vector<L>) -> bool {
        assert_eq!(v.rank(), self.rank);
        self.span_eqs.iter().all(|e| e.pair(v).is_zero())
            && self.ineqs.iter().all(|u| !u.pair(v).is_negative())
    }

    pub fn contains_cone(&self, other: &Cone<L>) -> bool {
        other.generators().iter().all(|g| self.contains(g))
    }

    pub fn intersect(&self, other: &Cone<L>) -> Cone<L> {
        assert_eq!(self.rank, other.rank);
        let ineqs: Vec<_> = self.ineqs.iter().chain(&other.ineqs).cloned().collect();
        let eqs: Vec<_> = self.span_eqs.iter().chain(&other.span_eqs).cloned().collect();
        Cone::from_inequalities(self.rank, &ineqs, &eqs)
    }

    /// Minkowski sum `σ + τ`.
    pub fn sum(&self, other: &Cone<L>) -> Cone<L> {
        assert_eq!(self.rank, other.rank);
        let mut gens = self.generators();
        gens.extend(other.generators());
        Cone::from_generators(self.rank, &gens)
    }

    /// `σ ∩ u⊥` for a dual vector `u`.
    pub fn meet_hyperplane(&self, u: &Vector<L::Dual>) -> Cone<L> {
        let mut eqs = self.span_eqs.clone();
        eqs.push(u.clone());
        Cone::from_inequalities(self.rank, &self.ineqs, &eqs)
    }

    /// `σ ∩ {v : (u, v) ≥ 0}`.
    pub fn meet_halfspace(&self, u: &Vector<L::Dual>) -> Cone<L> {
        let mut ineqs = self.ineqs.clone();
        ineqs.push(u.clone());
        Cone::from_inequalities(self.rank, &ineqs, &self.span_eqs)
    }

    /// Sum of rays and lineality basis: an integer point of the relative
    /// interior (the origin for the zero cone).
    pub fn relative_interior_point(&self) -> Vector<L> {
        lattice::sum(self.rank, self.rays.iter().chain(&self.lineality))
    }

    /// All faces, each with a witness. Faces are found as intersections of
    /// facet ray-sets, ordered by dimension and then canonically.
    #[allow(clippy::needless_range_loop)]
    pub fn faces(&self) -> Vec<Face<L>> {
        let nr = self.rays.len();
        let nf = self.ineqs.len();
        let tight: Vec<Vec<bool>> = self
            .rays
            .iter()
            .map(|r| self.ineqs.iter().map(|u| u.pair(r).is_zero()).collect())
            .collect();

        let all: Vec<bool> = vec![true; nr];
        let mut seen: Vec<Vec<bool>> = vec![all.clone()];
        let mut queue = vec![all];
        while let Some(set) = queue.pop() {
            for j in 0..nf {
                let next: Vec<bool> = (0..nr).map(|i| set[i] && tight[i][j]).collect();
                if !seen.contains(&next) {
                    seen.push(next.clone());
                    queue.push(next);
                }
            }
        }

        let mut faces: Vec<Face<L>> = seen
            .into_iter()
            .map(|set| {
                let active: Vec<usize> = (0..nf)
                    .filter(|&j| (0..nr).all(|i| !set[i] || tight[i][j]))
                    .collect();
                let witness = lattice::sum(self.rank, active.iter().map(|&j| &self.ineqs[j])).primitive();
                let mut gens: Vec<Vector<L>> =
                    (0..nr).filter(|&i| set[i]).map(|i| self.rays[i].clone()).collect();
                for l in &self.lineality {
                    gens.push(l.clone());
                    gens.push(-l);
                }
                Face {
                    cone: Cone::from_generators(self.rank, &gens),
                    witness,
                }
            })
            .collect();
        faces.sort_by(|a, b| a.cone.dim().cmp(&b.cone.dim()).then_with(|| a.cone.cmp(&b.cone)));
        faces
    }

    pub fn facets(&self) -> Vec<Face<L>> {
        let d = self.dim();
        self.faces().into_iter().filter(|f| f.cone.dim() + 1 == d).collect()
    }

    /// If `self` is a face of `other`, a witness `u` with `self = other ∩ u⊥`.
    pub fn face_witness_in(&self, other: &Cone<L>) -> Option<Vector<L::Dual>> {
        if self.rank != other.rank || !other.contains_cone(self) {
            return None;
        }
        other
            .faces()
            .into_iter()
            .find(|f| &f.cone == self)
            .map(|f| f.witness)
    }

    pub fn is_face_of(&self, other: &Cone<L>) -> bool {
        self.face_witness_in(other).is_some()
    }
}

impl<L: Lattice> fmt::Display for Cone<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cone{{")?;
        for (i, r) in self.rays.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        if !self.lineality.is_empty() {
            write!(f, " | lin")?;
            for l in &self.lineality {
                write!(f, " ±{l}")?;
            }
        }
        write!(f, "}}")?;
        if self.is_zero() {
            write!(f, "_{}", self.rank)?;
        }
        Ok(())
    }
}

impl<L: Lattice> fmt::Debug for Cone<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} [ineqs {:?} eqs {:?}]", self.ineqs, self.span_eqs)
    }
}

// On disk a cone is `{rank, rays, lineality}`; reading it back recomputes
// the canonical form, so hand-written files need not be canonical.

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct ConeRepr<L: Lattice> {
    rank: usize,
    rays: Vec<Vector<L>>,
    #[serde(default)]
    lineality: Vec<Vector<L>>,
}

impl<L: Lattice> Serialize for Cone<L> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ConeRepr {
            rank: self.rank,
            rays: self.rays.clone(),
            lineality: self.lineality.clone(),
        }
        .serialize(s)
    }
}

impl<'de, L: Lattice> Deserialize<'de> for Cone<L> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = ConeRepr::<L>::deserialize(d)?;
        if let Some(v) = r.rays.iter().chain(&r.lineality).find(|v| v.rank() != r.rank) {
            return Err(serde::de::Error::custom(format!("vector {v} does not have rank {}", r.rank)));
        }
        let mut gens = r.rays;
        for l in &r.lineality {
            gens.push(l.clone());
            gens.push(-l);
        }
        Ok(Cone::from_generators(r.rank, &gens))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{DualVector, LatticeVector, M, N};

    fn nv(c: &[i64]) -> LatticeVector {
        LatticeVector::from_i64(c)
    }

    fn mv(c: &[i64]) -> DualVector {
        DualVector::from_i64(c)
    }

    fn cone(rank: usize, gens: &[&[i64]]) -> Cone<N> {
        let g: Vec<_> = gens.iter().map(|c| nv(c)).collect();
        Cone::from_generators(rank, &g)
    }

    fn quadrant() -> Cone<N> {
        cone(2, &[&[1, 0], &[0, 1]])
    }

    #[test]
    fn generators_drop_redundant() {
        let c = cone(2, &[&[1, 0], &[0, 1], &[1, 1]]);
        assert_eq!(c.rays(), &[nv(&[0, 1]), nv(&[1, 0])]);
        assert_eq!(c, quadrant());
    }

    #[test]
    fn zero_and_line() {
        let z = Cone::<N>::zero(2);
        assert!(z.is_zero());
        assert_eq!(z.span_eqs().len(), 2);
        assert!(z.contains(&nv(&[0, 0])));
        assert!(!z.contains(&nv(&[1, 0])));

        let line = cone(2, &[&[1, 0], &[-1, 0]]);
        assert!(line.rays().is_empty());
        assert_eq!(line.lineality(), &[nv(&[1, 0])]);
        assert!(line.contains(&nv(&[-7, 0])));
        assert!(!line.contains(&nv(&[0, 1])));
    }

    #[test]
    fn dual_examples() {
        assert_eq!(quadrant().dual(), Cone::<M>::from_generators(2, &[mv(&[1, 0]), mv(&[0, 1])]));
        let d = Cone::<N>::zero(3).dual();
        assert_eq!(d.lineality().len(), 3);
        assert_eq!(d, Cone::<M>::whole_space(3));
    }

    #[test]
    fn dual_matches_brute_force() {
        let c = cone(2, &[&[1, 0], &[1, 2]]);
        let d = c.dual();
        assert_eq!(d.rays(), &[mv(&[0, 1]), mv(&[2, -1])]);
        // enumerate u with |coords| ≤ 3 pairing ≥ 0 with both generators
        for x in -3i64..=3 {
            for y in -3i64..=3 {
                let u = mv(&[x, y]);
                let brute = x >= 0 && x + 2 * y >= 0;
                assert_eq!(d.contains(&u), brute, "{u}");
            }
        }
    }

    #[test]
    fn intersection_examples() {
        assert_eq!(quadrant().intersect(&quadrant()), quadrant());
        let a = cone(2, &[&[1, 0], &[1, 2]]);
        let b = cone(2, &[&[1, 2], &[0, 1]]);
        let i = a.intersect(&b);
        assert_eq!(i, cone(2, &[&[1, 2]]));
        for x in -4i64..=4 {
            for y in -4i64..=4 {
                let v = nv(&[x, y]);
                assert_eq!(i.contains(&v), a.contains(&v) && b.contains(&v));
            }
        }
        let opp = cone(2, &[&[-1, 0], &[0, -1]]);
        assert!(quadrant().intersect(&opp).is_zero());
    }

    #[test]
    fn face_examples() {
        let f = quadrant().faces();
        assert_eq!(f.len(), 4);
        assert!(f[0].cone.is_zero());
        assert_eq!(f[3].cone, quadrant());
        assert!(f[3].witness.is_zero());
        for face in &f {
            assert_eq!(quadrant().meet_hyperplane(&face.witness), face.cone);
        }
        let ray = cone(2, &[&[1, 0]]);
        assert_eq!(ray.faces().len(), 2);
        assert_eq!(Cone::<N>::zero(2).faces().len(), 1);
        assert_eq!(Cone::<N>::whole_space(2).faces().len(), 1);
        let half = Cone::<N>::from_inequalities(2, &[mv(&[0, 1])], &[]);
        let hf = half.faces();
        assert_eq!(hf.len(), 2);
        assert_eq!(hf[0].cone, cone(2, &[&[1, 0], &[-1, 0]]));
    }

    #[test]
    fn contains_examples() {
        assert!(quadrant().contains(&nv(&[2, 3])));
        assert!(!quadrant().contains(&nv(&[-1, 0])));
        assert!(cone(2, &[&[1, 0], &[1, 2]]).contains(&nv(&[1, 1])));
    }

    #[test]
    fn classify_examples() {
        let q = quadrant().classify();
        assert_eq!(q, ConeClass { strongly_convex: true, nondegenerate: true, dim: 2 });
        let r = cone(2, &[&[1, 0]]).classify();
        assert_eq!(r, ConeClass { strongly_convex: true, nondegenerate: false, dim: 1 });
        let l = cone(2, &[&[1, 0], &[-1, 0]]).classify();
        assert_eq!(l, ConeClass { strongly_convex: false, nondegenerate: false, dim: 1 });
    }

    #[test]
    fn interior_points() {
        assert_eq!(quadrant().relative_interior_point(), nv(&[1, 1]));
        assert_eq!(cone(2, &[&[1, 2]]).relative_interior_point(), nv(&[1, 2]));
        assert_eq!(Cone::<N>::zero(2).relative_interior_point(), nv(&[0, 0]));
    }

    #[test]
    fn rays_modulo_lineality_are_canonical() {
        let a = cone(3, &[&[1, 0, 0], &[-1, 0, 0], &[5, 1, 0], &[0, 0, 1]]);
        let b = cone(3, &[&[1, 0, 0], &[-1, 0, 0], &[-2, 1, 0], &[3, 0, 1]]);
        assert_eq!(a, b);
        assert_eq!(a.dual().dual(), a);
    }

    #[test]
    fn rank_zero() {
        let z = Cone::<N>::zero(0);
        assert!(z.classify().nondegenerate);
        assert_eq!(z.dual().dual(), z);
        assert_eq!(z.faces().len(), 1);
    }

    #[test]
    fn three_dimensional_square_cone() {
        let c = cone(3, &[&[1, 0, 1], &[0, 1, 1], &[-1, 0, 1], &[0, -1, 1]]);
        assert_eq!(c.rays().len(), 4);
        assert_eq!(c.ineqs().len(), 4);
        // 1 + 4 + 4 + 1
        assert_eq!(c.faces().len(), 10);
        assert_eq!(c.dual().dual(), c);
    }

    #[test]
    fn serde_round_trip() {
        let c = Cone::<N>::from_generators(3, &[nv(&[1, 0, 0]), nv(&[0, 1, 0]), nv(&[0, -1, 0])]);
        let text = serde_json::to_string(&c).unwrap();
        let back: Cone<N> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let loose: Cone<N> = serde_json::from_str(r#"{"rank":2,"rays":[[2,0],["0","3"],[1,1]]}"#).unwrap();
        assert_eq!(loose, Cone::from_generators(2, &[nv(&[1, 0]), nv(&[0, 1])]));
        assert!(serde_json::from_str::<Cone<N>>(r#"{"rank":3,"rays":[[1,0]]}"#).is_err());
    }
}
