//! Fans, their validation, and the decision whether `X(Δ)` admits a toric
//! semigroup structure.

use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::cone::{Cone, Face};
use crate::lattice::{self, DualVector, LatticeVector, Vector, N};
use crate::linalg::{self, IntMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FanError {
    #[error("a fan needs at least one cone")]
    Empty,
    #[error("cone {cone} has rank {found}, expected {expected}")]
    RankMismatch {
        cone: Cone<N>,
        expected: usize,
        found: usize,
    },
    #[error("cone {0} is not strongly convex")]
    NotStronglyConvex(Cone<N>),
    #[error("face {missing_face} of {cone} is missing from the fan")]
    Condition1Violation { cone: Cone<N>, missing_face: Cone<N> },
    #[error("{first} ∩ {second} = {intersection} is not a face of both cones")]
    Condition2Violation {
        first: Cone<N>,
        second: Cone<N>,
        intersection: Cone<N>,
    },
}

/// A validated fan. Cones are sorted by dimension, then canonically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fan {
    rank: usize,
    cones: Vec<Cone<N>>,
}

fn sort_cones(cones: &mut Vec<Cone<N>>) {
    cones.sort_by(|a, b| a.dim().cmp(&b.dim()).then_with(|| a.cmp(b)));
    cones.dedup();
}

/// Checks both fan axioms. With `auto_close`, all faces of the input cones
/// (and the zero cone) are added first.
pub fn validate_fan(rank: usize, raw_cones: &[Cone<N>], auto_close: bool) -> Result<Fan, FanError> {
    if raw_cones.is_empty() {
        return Err(FanError::Empty);
    }
    for c in raw_cones {
        if c.rank() != rank {
            return Err(FanError::RankMismatch {
                cone: c.clone(),
                expected: rank,
                found: c.rank(),
            });
        }
        if !c.is_strongly_convex() {
            return Err(FanError::NotStronglyConvex(c.clone()));
        }
    }
    let mut cones = raw_cones.to_vec();
    sort_cones(&mut cones);
    let faces: Vec<Vec<Face<N>>> = cones.iter().map(Cone::faces).collect();
    if auto_close {
        cones.extend(faces.iter().flatten().map(|f| f.cone.clone()));
        cones.push(Cone::zero(rank));
        sort_cones(&mut cones);
        return check_intersections(rank, cones);
    }
    for (c, fs) in cones.iter().zip(&faces) {
        if let Some(f) = fs.iter().find(|f| !cones.contains(&f.cone)) {
            return Err(FanError::Condition1Violation {
                cone: c.clone(),
                missing_face: f.cone.clone(),
            });
        }
    }
    check_intersections(rank, cones)
}

fn check_intersections(rank: usize, cones: Vec<Cone<N>>) -> Result<Fan, FanError> {
    let faces: Vec<Vec<Cone<N>>> = cones
        .iter()
        .map(|c| c.faces().into_iter().map(|f| f.cone).collect())
        .collect();
    for i in 0..cones.len() {
        for j in i + 1..cones.len() {
            let meet = cones[i].intersect(&cones[j]);
            if !faces[i].contains(&meet) || !faces[j].contains(&meet) {
                return Err(FanError::Condition2Violation {
                    first: cones[i].clone(),
                    second: cones[j].clone(),
                    intersection: meet,
                });
            }
        }
    }
    Ok(Fan { rank, cones })
}

impl Fan {
    /// The fan consisting of `sigma` and all of its faces.
    pub fn generated_by(sigma: &Cone<N>) -> Result<Fan, FanError> {
        validate_fan(sigma.rank(), std::slice::from_ref(sigma), true)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cones(&self) -> &[Cone<N>] {
        &self.cones
    }

    pub fn index_of(&self, c: &Cone<N>) -> Option<usize> {
        self.cones.iter().position(|x| x == c)
    }

    /// Cones that are not a proper face of another cone.
    pub fn maximal_cones(&self) -> Vec<Cone<N>> {
        self.cones
            .iter()
            .filter(|c| !self.cones.iter().any(|d| d != *c && d.contains_cone(c)))
            .cloned()
            .collect()
    }

    /// Whether `v` lies in the support `∪Δ`.
    pub fn support_contains(&self, v: &LatticeVector) -> bool {
        self.cones.iter().any(|c| c.contains(v))
    }
}

impl fmt::Display for Fan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fan(rank {}) [", self.rank)?;
        for (i, c) in self.cones.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

pub fn is_generated_by_single_cone(f: &Fan) -> Option<Cone<N>> {
    let maximal = f.maximal_cones();
    match maximal.as_slice() {
        [sigma] => {
            let faces: Vec<Cone<N>> = sigma.faces().into_iter().map(|x| x.cone).collect();
            f.cones().iter().all(|c| faces.contains(c)).then(|| sigma.clone())
        }
        _ => None,
    }
}

pub fn nondegenerate_cones(f: &Fan) -> Vec<Cone<N>> {
    f.cones().iter().filter(|c| c.classify().nondegenerate).cloned().collect()
}

/// Integer vectors `v ∈ σ`, `w ∈ τ` whose sum leaves the support of the fan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditionWitness {
    pub v: LatticeVector,
    pub w: LatticeVector,
    pub sum: LatticeVector,
}

/// Sign-normalized hyperplanes of all facets and span equations in the fan.
fn arrangement(f: &Fan) -> Vec<DualVector> {
    let mut hs: Vec<DualVector> = Vec::new();
    for c in f.cones() {
        for h in c.ineqs().iter().chain(c.span_eqs()) {
            let first = h.coords().iter().find(|x| !x.is_zero());
            let h = match first {
                Some(x) if x.is_negative() => -h,
                Some(_) => h.clone(),
                None => continue,
            };
            hs.push(h);
        }
    }
    hs.sort();
    hs.dedup();
    hs
}

/// Splits `c` along every hyperplane that crosses it. All returned cells
/// have the dimension of `c`, and on the relative interior of each cell
/// every hyperplane has constant sign.
fn subdivide(c: &Cone<N>, hyperplanes: &[DualVector]) -> Vec<Cone<N>> {
    let mut cells = vec![c.clone()];
    for h in hyperplanes {
        let mut next = Vec::with_capacity(cells.len());
        for cell in cells {
            let gens = cell.generators();
            let pos = gens.iter().any(|g| h.pair(g).is_positive());
            let neg = gens.iter().any(|g| h.pair(g).is_negative());
            if pos && neg {
                next.push(cell.meet_halfspace(h));
                next.push(cell.meet_halfspace(&-h));
            } else {
                next.push(cell);
            }
        }
        cells = next;
    }
    cells
}

/// Writes `p ∈ σ + τ` as `(v + w) = t·p` with `v ∈ σ`, `w ∈ τ` integral
/// and `t > 0`, by finding a ray of the cone of nonnegative coefficient
/// vectors.
fn split_sum(p: &LatticeVector, sigma: &Cone<N>, tau: &Cone<N>) -> Option<AdditionWitness> {
    let n = p.rank();
    let gs = sigma.generators();
    let gt = tau.generators();
    let vars = gs.len() + gt.len() + 1;
    let ineqs: Vec<Vector<lattice::M>> = (0..vars).map(|i| Vector::unit(vars, i)).collect();
    let eqs: Vec<Vector<lattice::M>> = (0..n)
        .map(|c| {
            let mut row: Vec<linalg::Int> = gs.iter().chain(&gt).map(|g| g.coords()[c].clone()).collect();
            row.push(-&p.coords()[c]);
            Vector::new(row)
        })
        .collect();
    let k = Cone::<N>::from_inequalities(vars, &ineqs, &eqs);
    let ray = k.rays().iter().find(|r| r.coords()[vars - 1].is_positive())?;
    let c = ray.coords();
    let v = gs
        .iter()
        .zip(c)
        .fold(LatticeVector::zero(n), |acc, (g, a)| &acc + &g.scale(a));
    let w = gt
        .iter()
        .zip(&c[gs.len()..])
        .fold(LatticeVector::zero(n), |acc, (g, b)| &acc + &g.scale(b));
    let sum = &v + &w;
    Some(AdditionWitness { v, w, sum })
}

/// Exact test whether `∪Δ` is closed under addition. For each pair of
/// maximal cones the sum `σ + τ` is cut along the facet arrangement of the
/// fan, and one interior point per cell is tested.
pub fn union_addition_closed(f: &Fan) -> (bool, Option<AdditionWitness>) {
    let maximal = f.maximal_cones();
    let hyperplanes = arrangement(f);
    for i in 0..maximal.len() {
        for j in i + 1..maximal.len() {
            let (sigma, tau) = (&maximal[i], &maximal[j]);
            let s = sigma.sum(tau);
            for cell in subdivide(&s, &hyperplanes) {
                let p = cell.relative_interior_point();
                if !f.support_contains(&p) {
                    let witness = split_sum(&p, sigma, tau);
                    debug_assert!(witness.is_some(), "cell point lies in σ + τ");
                    return (false, witness);
                }
            }
        }
    }
    (true, None)
}

/// The fan rewritten in coordinates of `N_Δ = N ∩ span(∪Δ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanReduction {
    /// Rows form a basis of `N_Δ`.
    pub sub_lattice_basis: IntMatrix,
    pub reduced_fan: Fan,
}

impl SpanReduction {
    pub fn embed_vector(&self, v: &LatticeVector) -> LatticeVector {
        LatticeVector::new(self.sub_lattice_basis.left_apply(v.coords()))
    }

    pub fn embed_cone(&self, c: &Cone<N>) -> Cone<N> {
        let gens: Vec<LatticeVector> = c.generators().iter().map(|g| self.embed_vector(g)).collect();
        Cone::from_generators(self.sub_lattice_basis.cols(), &gens)
    }

    /// Coordinates in `N_Δ`, if `v` lies in it.
    pub fn reduce_vector(&self, v: &LatticeVector) -> Option<LatticeVector> {
        linalg::lattice_coords(&self.sub_lattice_basis, v.coords()).map(LatticeVector::new)
    }

    fn embed_witness(&self, w: &AdditionWitness) -> AdditionWitness {
        AdditionWitness {
            v: self.embed_vector(&w.v),
            w: self.embed_vector(&w.w),
            sum: self.embed_vector(&w.sum),
        }
    }
}

pub fn span_reduce(f: &Fan) -> SpanReduction {
    let n = f.rank();
    let rows: Vec<Vec<linalg::Int>> = f
        .cones()
        .iter()
        .flat_map(|c| lattice::to_rows(c.rays()))
        .collect();
    let basis = linalg::saturate(&IntMatrix::from_rows(n, rows).expect("rank"));
    let k = basis.rows();
    let reduced: Vec<Cone<N>> = f
        .cones()
        .iter()
        .map(|c| {
            let gens: Vec<LatticeVector> = c
                .rays()
                .iter()
                .map(|r| {
                    LatticeVector::new(linalg::lattice_coords(&basis, r.coords()).expect("ray lies in N_Δ"))
                })
                .collect();
            Cone::from_generators(k, &gens)
        })
        .collect();
    let reduced_fan = validate_fan(k, &reduced, false).expect("a linear isomorphism preserves fans");
    SpanReduction {
        sub_lattice_basis: basis,
        reduced_fan,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemigroupDiagnostics {
    /// Two cones that are full-dimensional in the span of the fan.
    TwoNondegenerateCones(Cone<N>, Cone<N>),
    /// The support of the fan is not closed under addition.
    AdditionNotClosed(AdditionWitness),
}

impl fmt::Display for SemigroupDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemigroupDiagnostics::TwoNondegenerateCones(a, b) => {
                write!(f, "two nondegenerate cones {a} and {b}")
            }
            SemigroupDiagnostics::AdditionNotClosed(w) => {
                write!(f, "support not closed under addition: {} + {} = {}", w.v, w.w, w.sum)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemigroupDecision {
    pub verdict: bool,
    pub generating_cone: Option<Cone<N>>,
    pub diagnostics: Option<SemigroupDiagnostics>,
}

/// `X(Δ)` carries a toric semigroup structure iff the fan is generated by
/// one cone. A negative verdict comes with the obstruction found in the
/// span-reduced fan: two nondegenerate cones, or a sum leaving the support.
pub fn has_semigroup_structure(f: &Fan) -> SemigroupDecision {
    let reduction = span_reduce(f);
    let reduced = &reduction.reduced_fan;
    if let Some(c) = is_generated_by_single_cone(reduced) {
        return SemigroupDecision {
            verdict: true,
            generating_cone: Some(reduction.embed_cone(&c)),
            diagnostics: None,
        };
    }
    let nondegenerate = nondegenerate_cones(reduced);
    let diagnostics = if nondegenerate.len() >= 2 {
        Some(SemigroupDiagnostics::TwoNondegenerateCones(
            reduction.embed_cone(&nondegenerate[0]),
            reduction.embed_cone(&nondegenerate[1]),
        ))
    } else {
        match union_addition_closed(reduced) {
            (false, Some(w)) => Some(SemigroupDiagnostics::AdditionNotClosed(reduction.embed_witness(&w))),
            _ => None,
        }
    };
    SemigroupDecision {
        verdict: false,
        generating_cone: None,
        diagnostics,
    }
}
