//! The affine monoid `S_σ = σ* ∩ M` and the points of its chart.
//!
//! A point of the chart `U_σ` is a semigroup homomorphism `S_σ → (Q, ·)`.
//! Its support is always a face `F` of `σ*`, and on `F` it is the
//! restriction of a character of the group `span(F) ∩ M`, so a point is
//! stored as a face plus nonzero rational values on a lattice basis of that
//! group.

use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::cone::Cone;
use crate::lattice::{self, DualVector, Lattice, LatticeVector, Vector, M, N};
use crate::linalg::{self, Int, IntMatrix, QuotientLattice, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonoidError {
    #[error("cone {0} is not strongly convex")]
    NotStronglyConvex(Cone<N>),
    #[error("{0} is not an element of the monoid")]
    NotInMonoid(DualVector),
    #[error("support {0} is not a face of the dual cone")]
    NotAFace(Cone<M>),
    #[error("expected {expected} unit values, got {found}")]
    ValueCount { expected: usize, found: usize },
    #[error("unit values must be nonzero")]
    ZeroValue,
    #[error("points belong to different charts")]
    DifferentCharts,
    #[error("one-parameter subgroup {0} does not extend to the chart")]
    NotExtendable(LatticeVector),
    #[error("target monoid is not contained in the source monoid")]
    NotASubmonoid,
}

/// Hilbert basis data of `C ∩ L` for a rational cone `C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertBasis<L: Lattice> {
    /// Minimal generators of the pointed part, lifted canonically.
    pub pointed: Vec<Vector<L>>,
    /// `±` a lattice basis of the lineality space.
    pub units: Vec<Vector<L>>,
}

/// Splits `C` into the simplicial cones of a pulling triangulation. `C`
/// must be pointed.
fn triangulate<L: Lattice>(c: &Cone<L>) -> Vec<Vec<Vector<L>>> {
    let d = c.dim();
    if c.rays().len() == d {
        return vec![c.rays().to_vec()];
    }
    let apex = &c.rays()[0];
    let mut out = Vec::new();
    for facet in c.facets() {
        if facet.cone.rays().contains(apex) {
            continue;
        }
        for mut simplex in triangulate(&facet.cone) {
            simplex.push(apex.clone());
            out.push(simplex);
        }
    }
    out
}

/// Nonzero lattice points of the half-open parallelepiped spanned by a
/// basis of `Qᵈ`, one per class of `Zᵈ / span(gens)`.
///
/// With `D = |det W|` and `A = D·W⁻¹`, the point of the class of `x` is
/// `Σ (xA)_j mod D · g_j / D`.
fn parallelepiped_points<L: Lattice>(gens: &[Vector<L>]) -> Vec<Vector<L>> {
    let d = gens.len();
    let w = IntMatrix::from_rows(d, lattice::to_rows(gens)).expect("square simplex");
    let det = w.determinant().abs();
    let adj: Vec<Vec<Int>> = (0..d)
        .map(|i| {
            let mut e = vec![Int::zero(); d];
            e[i] = Int::from(1);
            linalg::solve_rational(&w, &e)
                .expect("simplex spans")
                .into_iter()
                .map(|q| (q * Rat::from_integer(det.clone())).to_integer())
                .collect()
        })
        .collect();
    let snf = linalg::smith_normal_form(&w);
    let right_inv = linalg::unimodular_inverse(&snf.right).expect("unimodular transform");
    let factors = snf.invariant_factors();
    let mut out = Vec::new();
    let mut counter = vec![Int::zero(); d];
    loop {
        let x = right_inv.left_apply(&counter);
        let mut p = vec![Int::zero(); d];
        for (j, g) in gens.iter().enumerate() {
            let num: Int = x.iter().zip(&adj).map(|(xi, row)| xi * &row[j]).sum();
            let r = num.mod_floor(&det);
            if r.is_zero() {
                continue;
            }
            for (pi, gi) in p.iter_mut().zip(g.coords()) {
                *pi += &r * gi;
            }
        }
        if p.iter().any(|q| !q.is_zero()) {
            out.push(Vector::new(
                p.into_iter()
                    .map(|q| {
                        debug_assert!((&q % &det).is_zero());
                        q / &det
                    })
                    .collect(),
            ));
        }
        // odometer over ∏ [0, d_i)
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            counter[i] += 1;
            if counter[i] < factors[i] {
                break;
            }
            counter[i] = Int::zero();
            i += 1;
        }
    }
}

/// Keeps the elements of a generating set of `C ∩ L` that are not
/// `h + (nonzero element of C)` for another generator `h`. Candidates are
/// visited by increasing degree for a grading positive on `C \ 0`, so it is
/// enough to compare against elements already kept.
fn minimize<L: Lattice>(c: &Cone<L>, mut cands: Vec<Vector<L>>) -> Vec<Vector<L>> {
    cands.retain(|v| !v.is_zero());
    let grading = lattice::sum(c.rank(), c.ineqs());
    let mut graded: Vec<(Int, Vector<L>)> = cands.into_iter().map(|v| (v.pair(&grading), v)).collect();
    graded.sort();
    graded.dedup();
    let mut kept: Vec<Vector<L>> = Vec::new();
    for (_, x) in graded {
        if !kept.iter().any(|h| c.contains(&(&x - h))) {
            kept.push(x);
        }
    }
    kept.sort();
    kept
}

fn pointed_hilbert<L: Lattice>(c: &Cone<L>) -> Vec<Vector<L>> {
    if c.rays().is_empty() {
        return Vec::new();
    }
    if c.dim() < c.rank() {
        // work in N ∩ span(C), which is saturated, so nothing is lost
        let sub = linalg::saturate(&IntMatrix::from_rows(c.rank(), lattice::to_rows(c.rays())).expect("rays"));
        let coords: Vec<Vector<L>> = c
            .rays()
            .iter()
            .map(|r| Vector::new(linalg::lattice_coords(&sub, r.coords()).expect("ray in its span")))
            .collect();
        let full = Cone::from_generators(sub.rows(), &coords);
        let mut out: Vec<Vector<L>> = pointed_hilbert(&full)
            .into_iter()
            .map(|h| Vector::new(sub.left_apply(h.coords())))
            .collect();
        out.sort();
        return out;
    }
    let mut cands = c.rays().to_vec();
    for simplex in triangulate(c) {
        cands.extend(parallelepiped_points(&simplex));
    }
    minimize(c, cands)
}

/// Hilbert basis of `C ∩ L`. The pointed part is computed in the quotient
/// by the lineality space and lifted along the canonical section.
pub fn hilbert_basis<L: Lattice>(c: &Cone<L>) -> HilbertBasis<L> {
    let rank = c.rank();
    let mut units = Vec::new();
    for l in c.lineality() {
        units.push(l.clone());
        units.push(-l);
    }
    if c.lineality().is_empty() {
        return HilbertBasis {
            pointed: pointed_hilbert(c),
            units,
        };
    }
    let q = QuotientLattice::new(rank, &lattice::to_rows(c.lineality()));
    let projected: Vec<Vector<L>> = c.rays().iter().map(|r| Vector::new(q.project(r.coords()))).collect();
    let pc = Cone::from_generators(q.quotient_rank(), &projected);
    let mut pointed: Vec<Vector<L>> = pointed_hilbert(&pc)
        .into_iter()
        .map(|h| Vector::new(q.lift(h.coords())))
        .collect();
    pointed.sort();
    HilbertBasis { pointed, units }
}

/// `S_σ = σ* ∩ M` for a strongly convex cone `σ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMonoid {
    sigma: Cone<N>,
    sigma_dual: Cone<M>,
    hilbert: Vec<DualVector>,
    lineality_gens: Vec<DualVector>,
}

pub fn monoid_of(sigma: &Cone<N>) -> Result<AffineMonoid, MonoidError> {
    AffineMonoid::new(sigma)
}

impl AffineMonoid {
    pub fn new(sigma: &Cone<N>) -> Result<Self, MonoidError> {
        if !sigma.is_strongly_convex() {
            return Err(MonoidError::NotStronglyConvex(sigma.clone()));
        }
        let sigma_dual = sigma.dual();
        let HilbertBasis { pointed, units } = hilbert_basis(&sigma_dual);
        Ok(AffineMonoid {
            sigma: sigma.clone(),
            sigma_dual,
            hilbert: pointed,
            lineality_gens: units,
        })
    }

    pub fn rank(&self) -> usize {
        self.sigma.rank()
    }

    pub fn sigma(&self) -> &Cone<N> {
        &self.sigma
    }

    pub fn sigma_dual(&self) -> &Cone<M> {
        &self.sigma_dual
    }

    pub fn hilbert(&self) -> &[DualVector] {
        &self.hilbert
    }

    pub fn lineality_gens(&self) -> &[DualVector] {
        &self.lineality_gens
    }

    /// Hilbert basis followed by the unit generators.
    pub fn generators(&self) -> Vec<DualVector> {
        self.hilbert.iter().chain(&self.lineality_gens).cloned().collect()
    }

    /// Membership in `S_σ`, by pairing with the generators of `σ`.
    pub fn contains(&self, u: &DualVector) -> bool {
        u.rank() == self.rank() && self.sigma.rays().iter().all(|r| !u.pair(r).is_negative())
    }

    /// The absorbing point, which exists exactly when `S_σ` has no nonzero
    /// units. It sends `0 ↦ 1` and every other element to `0`.
    pub fn has_zero(&self) -> Option<ChartPoint<'_>> {
        if !self.lineality_gens.is_empty() {
            return None;
        }
        let support = Cone::zero(self.rank());
        Some(ChartPoint::new(self, support, Vec::new()).expect("zero cone is a face of a pointed cone"))
    }

    /// The unit point: every character takes the value 1.
    pub fn identity_point(&self) -> ChartPoint<'_> {
        ChartPoint::with_unit_values(self, self.sigma_dual.clone())
    }

    /// A point of the dense torus, given by its values on the standard basis
    /// of `M`.
    pub fn torus_point(&self, values: Vec<Rat>) -> Result<ChartPoint<'_>, MonoidError> {
        if values.len() != self.rank() {
            return Err(MonoidError::ValueCount {
                expected: self.rank(),
                found: values.len(),
            });
        }
        let p = ChartPoint::new(self, self.sigma_dual.clone(), values)?;
        debug_assert!(p.basis == IntMatrix::identity(self.rank()));
        Ok(p)
    }

    /// Whether the one-parameter subgroup `s_v` extends to `k → U_σ`: `v`
    /// must pair nonnegatively with every generator of `S_σ`.
    pub fn one_param_extends(&self, v: &LatticeVector) -> bool {
        v.rank() == self.rank()
            && self
                .hilbert
                .iter()
                .chain(&self.lineality_gens)
                .all(|u| !u.pair(v).is_negative())
    }

    /// The limit `s_v(0)`: supported on `σ* ∩ v⊥` with all values 1.
    pub fn one_param_limit(&self, v: &LatticeVector) -> Result<ChartPoint<'_>, MonoidError> {
        if !self.one_param_extends(v) {
            return Err(MonoidError::NotExtendable(v.clone()));
        }
        Ok(ChartPoint::with_unit_values(self, self.sigma_dual.meet_hyperplane(v)))
    }

    /// Identity, torus points with small prime values, and the limit point of
    /// a relative interior vector of every face of `σ`.
    pub fn sample_points(&self) -> Vec<ChartPoint<'_>> {
        let n = self.rank();
        let primes = [2i64, 3, 5, 7, 11, 13, 17, 19];
        let mut out = vec![self.identity_point()];
        for shift in 0..2 {
            let values: Vec<Rat> = (0..n)
                .map(|i| {
                    let p = Rat::from_integer(Int::from(primes[(i + shift * 3) % primes.len()]));
                    if (i + shift).is_odd() {
                        p.recip()
                    } else {
                        -p
                    }
                })
                .collect();
            out.push(self.torus_point(values).expect("valid torus values"));
        }
        for face in self.sigma.faces() {
            let v = face.cone.relative_interior_point();
            out.push(self.one_param_limit(&v).expect("face vectors lie in sigma"));
        }
        out
    }
}

fn rat_pow(base: &Rat, exp: &Int) -> Rat {
    let e = exp.to_i32().expect("exponent fits in i32");
    Pow::pow(base.clone(), e)
}

/// A point of `U_σ`, i.e. a semigroup homomorphism `S_σ → (Q, ·)`.
#[derive(Clone)]
pub struct ChartPoint<'m> {
    monoid: &'m AffineMonoid,
    support: Cone<M>,
    /// Hermite basis of `span(support) ∩ M`
    basis: IntMatrix,
    values: Vec<Rat>,
}

impl<'m> ChartPoint<'m> {
    /// `values` are taken on the Hermite basis of `span(support) ∩ M`
    /// (see [`ChartPoint::support_basis`]).
    pub fn new(monoid: &'m AffineMonoid, support: Cone<M>, values: Vec<Rat>) -> Result<Self, MonoidError> {
        if !support.is_face_of(monoid.sigma_dual()) {
            return Err(MonoidError::NotAFace(support));
        }
        let basis = span_basis(&support);
        if basis.rows() != values.len() {
            return Err(MonoidError::ValueCount {
                expected: basis.rows(),
                found: values.len(),
            });
        }
        if values.iter().any(Zero::is_zero) {
            return Err(MonoidError::ZeroValue);
        }
        Ok(ChartPoint {
            monoid,
            support,
            basis,
            values,
        })
    }

    fn with_unit_values(monoid: &'m AffineMonoid, support: Cone<M>) -> Self {
        let basis = span_basis(&support);
        let values = vec![Rat::one(); basis.rows()];
        ChartPoint {
            monoid,
            support,
            basis,
            values,
        }
    }

    pub fn monoid(&self) -> &'m AffineMonoid {
        self.monoid
    }

    pub fn support(&self) -> &Cone<M> {
        &self.support
    }

    pub fn support_basis(&self) -> Vec<DualVector> {
        lattice::from_rows(self.basis.clone().into_rows())
    }

    pub fn unit_values(&self) -> &[Rat] {
        &self.values
    }

    /// Value of the character `u` of `span(support) ∩ M`; `None` outside
    /// that group.
    pub fn character_value(&self, u: &DualVector) -> Option<Rat> {
        let c = linalg::lattice_coords(&self.basis, u.coords())?;
        Some(
            c.iter()
                .zip(&self.values)
                .fold(Rat::one(), |acc, (e, v)| acc * rat_pow(v, e)),
        )
    }

    pub fn eval(&self, u: &DualVector) -> Result<BigRational, MonoidError> {
        if !self.monoid.contains(u) {
            return Err(MonoidError::NotInMonoid(u.clone()));
        }
        if !self.support.contains(u) {
            return Ok(Rat::zero());
        }
        Ok(self.character_value(u).expect("support elements lie in the support lattice"))
    }

    /// Pointwise product of homomorphisms.
    pub fn multiply(&self, other: &ChartPoint<'m>) -> Result<ChartPoint<'m>, MonoidError> {
        if self.monoid.sigma() != other.monoid.sigma() {
            return Err(MonoidError::DifferentCharts);
        }
        let support = self.support.intersect(&other.support);
        let basis = span_basis(&support);
        let values = basis
            .row_iter()
            .map(|b| {
                let b = DualVector::new(b.to_vec());
                let x = self.character_value(&b).expect("face of both supports");
                let y = other.character_value(&b).expect("face of both supports");
                x * y
            })
            .collect();
        Ok(ChartPoint {
            monoid: self.monoid,
            support,
            basis,
            values,
        })
    }

    /// Precomposition with the inclusion `S_target ⊆ S_self`: the image of
    /// this point under `U_self → U_target`.
    pub fn restrict_to<'t>(&self, target: &'t AffineMonoid) -> Result<ChartPoint<'t>, MonoidError> {
        if target.rank() != self.monoid.rank() || !target.generators().iter().all(|g| self.monoid.contains(g)) {
            return Err(MonoidError::NotASubmonoid);
        }
        let mut eqs = target.sigma_dual().span_eqs().to_vec();
        eqs.extend(self.support.span_eqs().iter().cloned());
        let support = Cone::from_inequalities(target.rank(), target.sigma_dual().ineqs(), &eqs);
        let basis = span_basis(&support);
        let values = basis
            .row_iter()
            .map(|b| {
                self.character_value(&DualVector::new(b.to_vec()))
                    .expect("restricted support lies in the source support")
            })
            .collect();
        Ok(ChartPoint {
            monoid: target,
            support,
            basis,
            values,
        })
    }
}

fn span_basis(c: &Cone<M>) -> IntMatrix {
    let rows = lattice::to_rows(&c.generators());
    let m = IntMatrix::from_rows(c.rank(), rows).expect("rank");
    linalg::saturate(&m)
}

impl PartialEq for ChartPoint<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.monoid.sigma() == other.monoid.sigma()
            && self.support == other.support
            && self.basis == other.basis
            && self.values == other.values
    }
}

impl Eq for ChartPoint<'_> {}

impl fmt::Debug for ChartPoint<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vals: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        write!(f, "point[support {} values ({})]", self.support, vals.join(","))
    }
}
