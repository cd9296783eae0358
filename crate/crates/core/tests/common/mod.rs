#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torfan::cone::Cone;
use torfan::fan::{validate_fan, Fan};
use torfan::lattice::{DualVector, LatticeVector, N};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn nv(c: &[i64]) -> LatticeVector {
    LatticeVector::from_i64(c)
}

pub fn mv(c: &[i64]) -> DualVector {
    DualVector::from_i64(c)
}

pub fn cone(rank: usize, gens: &[&[i64]]) -> Cone<N> {
    let g: Vec<_> = gens.iter().map(|c| nv(c)).collect();
    Cone::from_generators(rank, &g)
}

pub fn fan(rank: usize, cones: &[Cone<N>]) -> Fan {
    validate_fan(rank, cones, true).expect("fixture is a fan")
}

pub fn random_coords(rng: &mut ChaCha8Rng, rank: usize, bound: i64) -> Vec<i64> {
    loop {
        let v: Vec<i64> = (0..rank).map(|_| rng.gen_range(-bound..=bound)).collect();
        if v.iter().any(|&x| x != 0) {
            return v;
        }
    }
}

/// A strongly convex cone with between one and `rank + 2` random
/// generators, so lower-dimensional cones occur too.
pub fn random_strongly_convex_cone(rng: &mut ChaCha8Rng, rank: usize, bound: i64) -> Cone<N> {
    loop {
        let k = rng.gen_range(1..=rank + 2);
        let gens: Vec<LatticeVector> = (0..k)
            .map(|_| LatticeVector::from_i64(&random_coords(rng, rank, bound)))
            .collect();
        let c = Cone::from_generators(rank, &gens);
        if c.is_strongly_convex() {
            return c;
        }
    }
}

pub fn quadrant() -> Fan {
    fan(2, &[cone(2, &[&[1, 0], &[0, 1]])])
}

pub fn p1() -> Fan {
    fan(1, &[cone(1, &[&[1]]), cone(1, &[&[-1]])])
}

pub fn p2() -> Fan {
    fan(
        2,
        &[
            cone(2, &[&[1, 0], &[0, 1]]),
            cone(2, &[&[0, 1], &[-1, -1]]),
            cone(2, &[&[-1, -1], &[1, 0]]),
        ],
    )
}

pub fn two_rays() -> Fan {
    fan(2, &[cone(2, &[&[1, 0]]), cone(2, &[&[0, 1]])])
}

/// Named fixture fans covering the interesting shapes.
pub fn fixture_fans() -> Vec<(&'static str, Fan)> {
    vec![
        ("quadrant", quadrant()),
        ("P1", p1()),
        ("P2", p2()),
        ("two rays", two_rays()),
        ("ray in rank 2", fan(2, &[cone(2, &[&[1, 0]])])),
        ("torus rank 2", fan(2, &[Cone::zero(2)])),
        (
            "F1",
            fan(
                2,
                &[
                    cone(2, &[&[1, 0], &[0, 1]]),
                    cone(2, &[&[0, 1], &[-1, 1]]),
                    cone(2, &[&[-1, 1], &[0, -1]]),
                    cone(2, &[&[0, -1], &[1, 0]]),
                ],
            ),
        ),
        ("A2 singularity", fan(2, &[cone(2, &[&[1, 0], &[1, 2]])])),
        ("octant", fan(3, &[cone(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])])),
        (
            "P3",
            fan(
                3,
                &[
                    cone(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]),
                    cone(3, &[&[1, 0, 0], &[0, 1, 0], &[-1, -1, -1]]),
                    cone(3, &[&[1, 0, 0], &[0, 0, 1], &[-1, -1, -1]]),
                    cone(3, &[&[0, 1, 0], &[0, 0, 1], &[-1, -1, -1]]),
                ],
            ),
        ),
        (
            "P2 in a plane of rank 3",
            fan(
                3,
                &[
                    cone(3, &[&[1, 0, 0], &[0, 1, 0]]),
                    cone(3, &[&[0, 1, 0], &[-1, -1, 0]]),
                    cone(3, &[&[-1, -1, 0], &[1, 0, 0]]),
                ],
            ),
        ),
        ("plane cone in rank 3", fan(3, &[cone(3, &[&[1, 0, 0], &[0, 1, 0]])])),
        (
            "two half planes meeting along a line",
            fan(2, &[cone(2, &[&[1, 0], &[1, 1]]), cone(2, &[&[1, 1], &[0, 1]])]),
        ),
        (
            "square pyramid",
            fan(3, &[cone(3, &[&[1, 0, 1], &[0, 1, 1], &[-1, 0, 1], &[0, -1, 1]])]),
        ),
    ]
}

/// A fan grown greedily: random simplicial cones are kept whenever the
/// result still satisfies the fan axioms.
pub fn random_fan(rng: &mut ChaCha8Rng, rank: usize) -> Fan {
    let target = rng.gen_range(1..=if rank >= 3 { 3 } else { 4 });
    let mut cones: Vec<Cone<N>> = Vec::new();
    for _ in 0..40 {
        if cones.len() >= target {
            break;
        }
        let k = rng.gen_range(1..=rank);
        let gens: Vec<LatticeVector> = (0..k)
            .map(|_| LatticeVector::from_i64(&random_coords(rng, rank, 3)))
            .collect();
        let c = Cone::from_generators(rank, &gens);
        if !c.is_strongly_convex() || c.rays().len() != k {
            continue;
        }
        let mut next = cones.clone();
        next.push(c);
        if validate_fan(rank, &next, true).is_ok() {
            cones = next;
        }
    }
    if cones.is_empty() {
        cones.push(Cone::zero(rank));
    }
    fan(rank, &cones)
}

/// Fixtures followed by `count` random fans of ranks 1 to 3.
pub fn fan_corpus(count: usize) -> Vec<(String, Fan)> {
    let mut out: Vec<(String, Fan)> = fixture_fans().into_iter().map(|(n, f)| (n.to_string(), f)).collect();
    let mut r = rng(0x05ee_dfa5);
    for i in 0..count {
        let rank = [1, 2, 2, 2, 3, 3][i % 6];
        out.push((format!("random fan {i} (rank {rank})"), random_fan(&mut r, rank)));
    }
    out
}

/// Every distinct cone of every corpus fan.
pub fn corpus_cones(fans: &[(String, Fan)]) -> Vec<Cone<N>> {
    let mut cones: Vec<Cone<N>> = fans.iter().flat_map(|(_, f)| f.cones().to_vec()).collect();
    cones.sort();
    cones.dedup();
    cones
}
