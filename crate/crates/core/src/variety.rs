//! The toric variety `X(Δ)` as a family of affine charts glued along faces,
//! with certificates for separatedness and for the face/localization
//! correspondence.

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone::Cone;
use crate::fan::Fan;
use crate::lattice::{DualVector, LatticeVector, M, N};
use crate::linalg::Int;
use crate::monoid::{AffineMonoid, ChartPoint, MonoidError};

pub const DEFAULT_SEARCH_CEILING: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VarietyError {
    #[error("no decomposition of {target} for the pair {sigma}, {tau} within multiplier {ceiling}")]
    CertificateSearchExhausted {
        sigma: Cone<N>,
        tau: Cone<N>,
        target: DualVector,
        ceiling: u64,
    },
    #[error("{0} is not a cone of the fan")]
    UnknownCone(Cone<N>),
    #[error("{tau} is not a face of {sigma}")]
    NotAFace { tau: Cone<N>, sigma: Cone<N> },
    #[error(transparent)]
    Monoid(#[from] MonoidError),
}

/// `S_σ ↪ S_{σ∩τ}` for the chart of `source` glued to the chart of `partner`.
/// Indices refer to the cones of the fan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChartInclusion {
    pub source: usize,
    pub partner: usize,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartAtlasFromFan {
    pub fan: Fan,
    /// One chart per cone, in the order of `fan.cones()`.
    pub charts: Vec<AffineMonoid>,
    pub inclusions: Vec<ChartInclusion>,
}

pub fn build_atlas(f: &Fan) -> ChartAtlasFromFan {
    let charts: Vec<AffineMonoid> = f
        .cones()
        .iter()
        .map(|c| AffineMonoid::new(c).expect("fan cones are strongly convex"))
        .collect();
    let mut inclusions = Vec::new();
    for (i, sigma) in f.cones().iter().enumerate() {
        for (j, tau) in f.cones().iter().enumerate() {
            if i == j {
                continue;
            }
            let target = f.index_of(&sigma.intersect(tau)).expect("fans are closed under intersection");
            inclusions.push(ChartInclusion {
                source: i,
                partner: j,
                target,
            });
        }
    }
    ChartAtlasFromFan {
        fan: f.clone(),
        charts,
        inclusions,
    }
}

impl ChartAtlasFromFan {
    pub fn chart(&self, c: &Cone<N>) -> Option<&AffineMonoid> {
        self.fan.index_of(c).map(|i| &self.charts[i])
    }

    /// The chart of the zero cone, `U_{0} = T`.
    pub fn torus_chart(&self) -> &AffineMonoid {
        self.chart(&Cone::zero(self.fan.rank())).expect("every fan contains the zero cone")
    }

    /// Whether every inclusion sends the generators of its source into its
    /// target.
    pub fn verify_inclusions(&self) -> bool {
        self.inclusions.iter().all(|inc| {
            let target = &self.charts[inc.target];
            self.charts[inc.source].generators().iter().all(|g| target.contains(g))
        })
    }
}

/// `target = a + b` with `a ∈ S_σ`, `b ∈ S_τ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub target: DualVector,
    pub a: DualVector,
    pub b: DualVector,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCertificate {
    pub sigma: Cone<N>,
    pub tau: Cone<N>,
    pub decompositions: Vec<Decomposition>,
}

fn in_dual(c: &Cone<N>, u: &DualVector) -> bool {
    u.rank() == c.rank() && c.generators().iter().all(|g| !u.pair(g).is_negative())
}

impl PairCertificate {
    /// Checks every decomposition by addition and pairings, and that the
    /// targets are exactly the generators of `S_{σ∩τ}`.
    pub fn verify(&self) -> bool {
        let Ok(meet) = AffineMonoid::new(&self.sigma.intersect(&self.tau)) else {
            return false;
        };
        let mut targets: Vec<&DualVector> = self.decompositions.iter().map(|d| &d.target).collect();
        let gens = meet.generators();
        let mut expected: Vec<&DualVector> = gens.iter().collect();
        targets.sort();
        expected.sort();
        targets == expected
            && self.decompositions.iter().all(|d| {
                &d.a + &d.b == d.target && in_dual(&self.sigma, &d.a) && in_dual(&self.tau, &d.b)
            })
    }
}

/// One decomposition certificate per pair of distinct cones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatednessCertificate {
    pub pairs: Vec<PairCertificate>,
}

impl SeparatednessCertificate {
    pub fn verify(&self) -> bool {
        self.pairs.iter().all(PairCertificate::verify)
    }
}

/// Smallest `m ≥ 0` with `h + m·u ∈ σ*`, given that it exists.
fn lift_multiplier(sigma: &Cone<N>, h: &DualVector, u: &DualVector) -> Option<Int> {
    let mut m = Int::zero();
    for r in sigma.rays() {
        let hr = h.pair(r);
        if !hr.is_negative() {
            continue;
        }
        let ur = u.pair(r);
        if !ur.is_positive() {
            return None;
        }
        m = m.max((-hr).div_ceil(&ur));
    }
    Some(m)
}

/// Decomposes each generator of `S_{σ∩τ}` as `(h + m·u) + (−m·u)`, where
/// `u` is a separating vector: `u ∈ σ*`, `−u ∈ τ*` and
/// `σ ∩ u⊥ = σ ∩ τ = τ ∩ u⊥`. The multiplier bound starts at the size of
/// the data and doubles up to `ceiling`.
pub fn pair_certificate(
    sigma_chart: &AffineMonoid,
    tau_chart: &AffineMonoid,
    meet_chart: &AffineMonoid,
    ceiling: u64,
) -> Result<PairCertificate, VarietyError> {
    let (sigma, tau) = (sigma_chart.sigma(), tau_chart.sigma());
    let neg_tau_dual: Vec<DualVector> = tau_chart.sigma_dual().generators().iter().map(|g| -g).collect();
    let neg_tau_dual = Cone::<M>::from_generators(tau.rank(), &neg_tau_dual);
    let u = sigma_chart.sigma_dual().intersect(&neg_tau_dual).relative_interior_point();
    let meet = meet_chart.sigma();
    debug_assert!(&sigma.meet_hyperplane(&u) == meet && &tau.meet_hyperplane(&u) == meet);
    let size = |v: &DualVector| v.max_abs().to_u64().unwrap_or(u64::MAX);
    let mut decompositions = Vec::new();
    for h in meet_chart.generators() {
        let exhausted = || VarietyError::CertificateSearchExhausted {
            sigma: sigma.clone(),
            tau: tau.clone(),
            target: h.clone(),
            ceiling,
        };
        let m = lift_multiplier(sigma, &h, &u).ok_or_else(exhausted)?;
        let ray_size = sigma.rays().iter().map(|r| r.max_abs().to_u64().unwrap_or(u64::MAX)).max().unwrap_or(0);
        let mut bound = size(&h).saturating_add(size(&u)).saturating_add(ray_size).min(ceiling);
        while Int::from(bound) < m {
            if bound >= ceiling {
                return Err(exhausted());
            }
            bound = bound.saturating_mul(2).max(1).min(ceiling);
        }
        let mu = u.scale(&m);
        let a = &h + &mu;
        let b = -mu;
        debug_assert!(sigma_chart.contains(&a) && tau_chart.contains(&b));
        decompositions.push(Decomposition { target: h, a, b });
    }
    Ok(PairCertificate {
        sigma: sigma.clone(),
        tau: tau.clone(),
        decompositions,
    })
}

pub fn separatedness_certificate(
    a: &ChartAtlasFromFan,
    ceiling: u64,
) -> Result<SeparatednessCertificate, VarietyError> {
    let cones = a.fan.cones();
    let mut pairs = Vec::new();
    for i in 0..cones.len() {
        for j in i + 1..cones.len() {
            let meet = a.fan.index_of(&cones[i].intersect(&cones[j])).expect("closed under intersection");
            pairs.push(pair_certificate(&a.charts[i], &a.charts[j], &a.charts[meet], ceiling)?);
        }
    }
    Ok(SeparatednessCertificate { pairs })
}

/// For `τ` a face of `σ`: restricting points of `U_τ` to `U_σ` commutes
/// with multiplication on the given samples, and the identity restricts to
/// the identity.
pub fn chart_multiplication_compatible(
    a: &ChartAtlasFromFan,
    sigma: &Cone<N>,
    tau: &Cone<N>,
    samples: &[ChartPoint<'_>],
) -> Result<bool, VarietyError> {
    let sigma_chart = a.chart(sigma).ok_or_else(|| VarietyError::UnknownCone(sigma.clone()))?;
    let tau_chart = a.chart(tau).ok_or_else(|| VarietyError::UnknownCone(tau.clone()))?;
    if !tau.is_face_of(sigma) {
        return Err(VarietyError::NotAFace {
            tau: tau.clone(),
            sigma: sigma.clone(),
        });
    }
    if tau_chart.identity_point().restrict_to(sigma_chart)? != sigma_chart.identity_point() {
        return Ok(false);
    }
    for p in samples {
        if p.monoid() != tau_chart {
            return Err(MonoidError::DifferentCharts.into());
        }
        let rp = p.restrict_to(sigma_chart)?;
        for q in samples {
            let rq = q.restrict_to(sigma_chart)?;
            if p.multiply(q)?.restrict_to(sigma_chart)? != rp.multiply(&rq)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `h = s + m·(−f)` with `s ∈ S_σ` and `m ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    pub target: DualVector,
    pub s: DualVector,
    #[serde(with = "crate::lattice::int_string")]
    pub m: Int,
}

/// Shows `S_τ = S_σ + Z≥0·(−f)` for the face `τ = σ ∩ f⊥`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceLocalizationCertificate {
    pub sigma: Cone<N>,
    pub tau: Cone<N>,
    pub f: DualVector,
    pub covers: Vec<Cover>,
}

impl FaceLocalizationCertificate {
    /// Re-checks `f ∈ S_σ`, `τ = σ ∩ f⊥`, and every cover, and that the
    /// covered elements are the generators of `S_τ`.
    pub fn verify(&self) -> bool {
        if !in_dual(&self.sigma, &self.f) || self.sigma.meet_hyperplane(&self.f) != self.tau {
            return false;
        }
        let Ok(tau_chart) = AffineMonoid::new(&self.tau) else {
            return false;
        };
        let mut targets: Vec<&DualVector> = self.covers.iter().map(|c| &c.target).collect();
        let gens = tau_chart.generators();
        let mut expected: Vec<&DualVector> = gens.iter().collect();
        targets.sort();
        expected.sort();
        targets == expected
            && self.covers.iter().all(|c| {
                !c.m.is_negative() && in_dual(&self.sigma, &c.s) && &c.s - &self.f.scale(&c.m) == c.target
            })
    }
}

/// The certificate for `τ` inside `σ`, or `None` when `τ` is not a face.
pub fn face_localization_certificate(
    sigma_monoid: &AffineMonoid,
    tau: &Cone<N>,
) -> Option<FaceLocalizationCertificate> {
    let sigma = sigma_monoid.sigma();
    let f = tau.face_witness_in(sigma)?;
    let tau_chart = AffineMonoid::new(tau).ok()?;
    let covers = tau_chart
        .generators()
        .into_iter()
        .map(|h| {
            let m = lift_multiplier(sigma, &h, &f).expect("generators of S_τ lift along f");
            let s = &h + &f.scale(&m);
            Cover { target: h, s, m }
        })
        .collect();
    Some(FaceLocalizationCertificate {
        sigma: sigma.clone(),
        tau: tau.clone(),
        f,
        covers,
    })
}

/// True when no `f ∈ S_σ` with coordinates in `[−bound, bound]` gives
/// `S_σ + Z≥0·(−f) = S_τ`. Equality of monoids forces equality of cones,
/// and the cone of `S_σ + Z≥0·(−f)` is dual to `σ ∩ f⊥`, so it suffices to
/// compare `σ ∩ f⊥` with `τ` for each orthogonality pattern that occurs.
pub fn refute_localization(sigma_monoid: &AffineMonoid, tau: &Cone<N>, bound: u32) -> bool {
    let sigma = sigma_monoid.sigma();
    let n = sigma.rank();
    let b = i64::from(bound);
    let mut seen = std::collections::BTreeSet::new();
    let mut coords = vec![-b; n];
    loop {
        let f = DualVector::from_i64(&coords);
        if sigma_monoid.contains(&f) {
            let pattern: Vec<bool> = sigma.rays().iter().map(|r| f.pair(r).is_zero()).collect();
            if seen.insert(pattern) && &sigma.meet_hyperplane(&f) == tau {
                return false;
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return true;
            }
            if coords[i] < b {
                coords[i] += 1;
                break;
            }
            coords[i] = -b;
            i += 1;
        }
    }
}

/// One-parameter subsemigroup `v` restricted to the charts of `a`: the
/// cones whose chart it extends to.
pub fn extending_charts(a: &ChartAtlasFromFan, v: &LatticeVector) -> Vec<Cone<N>> {
    a.charts
        .iter()
        .filter(|c| c.one_param_extends(v))
        .map(|c| c.sigma().clone())
        .collect()
}
