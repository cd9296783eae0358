//! Exact integer and rational linear algebra.
//!
//! Everything here works on arbitrary-precision integers. Matrices are
//! row-major and vectors are treated as row vectors, so a lattice spanned by
//! a matrix is always its integer *row* span.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Int = BigInt;
pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("row {row} has length {found}, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("rows are linearly dependent (rank {rank} < {rows})")]
    RankDeficient { rank: usize, rows: usize },
    #[error("sublattice is not saturated (invariant factor {factor})")]
    NotSaturated { factor: Int },
}

/// Dense integer matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<Int>>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.data.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let strs: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            write!(f, "{}", strs.join(" "))?;
        }
        write!(f, "] ({}x{})", self.rows, self.cols)
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![vec![Int::zero(); cols]; rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = Int::one();
        }
        m
    }

    pub fn from_rows(cols: usize, data: Vec<Vec<Int>>) -> Result<Self, LinalgError> {
        for (row, r) in data.iter().enumerate() {
            if r.len() != cols {
                return Err(LinalgError::Ragged {
                    row,
                    expected: cols,
                    found: r.len(),
                });
            }
        }
        Ok(IntMatrix {
            rows: data.len(),
            cols,
            data,
        })
    }

    /// Convenience constructor for small literal matrices.
    ///
    /// Panics on ragged input.
    pub fn from_i64(cols: usize, rows: &[&[i64]]) -> Self {
        let data = rows
            .iter()
            .map(|r| r.iter().map(|&x| Int::from(x)).collect())
            .collect();
        Self::from_rows(cols, data).expect("ragged literal matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Int] {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> &Int {
        &self.data[i][j]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Int]> {
        self.data.iter().map(|r| r.as_slice())
    }

    pub fn into_rows(self) -> Vec<Vec<Int>> {
        self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.iter().all(Zero::is_zero))
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j][i] = self.data[i][j].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i][j] += a * &other.data[k][j];
                }
            }
        }
        out
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        IntMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Keeps only the rows for which `keep` is true.
    pub fn select_rows(&self, keep: impl Fn(usize) -> bool) -> IntMatrix {
        let data: Vec<Vec<Int>> = (0..self.rows)
            .filter(|&i| keep(i))
            .map(|i| self.data[i].clone())
            .collect();
        IntMatrix {
            rows: data.len(),
            cols: self.cols,
            data,
        }
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![Int::zero(); self.cols];
        for (a, row) in v.iter().zip(&self.data) {
            if a.is_zero() {
                continue;
            }
            for (o, b) in out.iter_mut().zip(row) {
                *o += a * b;
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        hnf_rows(self.data.clone(), self.cols).len()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Int {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut a = self.data.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return Int::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.determinant().abs().is_one()
    }
}

pub fn dot(a: &[Int], b: &[Int]) -> Int {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn content(v: &[Int]) -> Int {
    v.iter().fold(Int::zero(), |g, x| g.gcd(x))
}

/// Divides out the content; the zero vector is returned unchanged.
pub fn primitive(mut v: Vec<Int>) -> Vec<Int> {
    let g = content(&v);
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x = &*x / &g;
        }
    }
    v
}

fn row_sub_scaled(target: &mut [Int], q: &Int, src: &[Int]) {
    if q.is_zero() {
        return;
    }
    for (t, s) in target.iter_mut().zip(src) {
        *t -= q * s;
    }
}

/// Row HNF without a transform: returns only the nonzero rows.
fn hnf_rows(mut h: Vec<Vec<Int>>, cols: usize) -> Vec<Vec<Int>> {
    let mut unused = Vec::new();
    hnf_in_place(&mut h, cols, &mut unused);
    h.retain(|r| r.iter().any(|x| !x.is_zero()));
    h
}

/// Row-style Hermite normal form. `u` is either empty or a square matrix
/// receiving the same row operations as `h`.
fn hnf_in_place(h: &mut [Vec<Int>], cols: usize, u: &mut [Vec<Int>]) {
    let rows = h.len();
    let track = !u.is_empty();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut found = false;
        loop {
            let pivot = (r..rows)
                .filter(|&i| !h[i][c].is_zero())
                .min_by(|&a, &b| h[a][c].abs().cmp(&h[b][c].abs()).then(a.cmp(&b)));
            let Some(p) = pivot else { break };
            found = true;
            h.swap(r, p);
            if track {
                u.swap(r, p);
            }
            let mut clean = true;
            for i in r + 1..rows {
                if h[i][c].is_zero() {
                    continue;
                }
                let q = h[i][c].div_floor(&h[r][c]);
                let (top, bottom) = h.split_at_mut(i);
                row_sub_scaled(&mut bottom[0], &q, &top[r]);
                if track {
                    let (ut, ub) = u.split_at_mut(i);
                    row_sub_scaled(&mut ub[0], &q, &ut[r]);
                }
                if !h[i][c].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if !found {
            continue;
        }
        if h[r][c].is_negative() {
            for x in h[r].iter_mut() {
                *x = -&*x;
            }
            if track {
                for x in u[r].iter_mut() {
                    *x = -&*x;
                }
            }
        }
        for i in 0..r {
            let q = h[i][c].div_floor(&h[r][c]);
            if q.is_zero() {
                continue;
            }
            let (top, bottom) = h.split_at_mut(r);
            row_sub_scaled(&mut top[i], &q, &bottom[0]);
            if track {
                let (ut, ub) = u.split_at_mut(r);
                row_sub_scaled(&mut ut[i], &q, &ub[0]);
            }
        }
        r += 1;
    }
}

/// Row-style Hermite normal form `(hnf, transform)` with `transform · m = hnf`.
///
/// Pivots are chosen column by column from the left, pivot entries are
/// positive and entries above a pivot lie in `[0, pivot)`. Zero rows end up
/// at the bottom, so `hnf` has the same shape as `m`.
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = m.data.clone();
    let mut u = IntMatrix::identity(m.rows).data;
    hnf_in_place(&mut h, m.cols, &mut u);
    (
        IntMatrix {
            rows: m.rows,
            cols: m.cols,
            data: h,
        },
        IntMatrix {
            rows: m.rows,
            cols: m.rows,
            data: u,
        },
    )
}

/// Canonical basis (nonzero HNF rows) of the lattice spanned by `m`.
pub fn lattice_basis(m: &IntMatrix) -> IntMatrix {
    let data = hnf_rows(m.data.clone(), m.cols);
    IntMatrix {
        rows: data.len(),
        cols: m.cols,
        data,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    /// Diagonal matrix with `d_i | d_{i+1}` and nonnegative entries.
    pub diagonal: IntMatrix,
    pub left: IntMatrix,
    pub right: IntMatrix,
}

impl SmithForm {
    pub fn invariant_factors(&self) -> Vec<Int> {
        let n = self.diagonal.rows.min(self.diagonal.cols);
        (0..n).map(|i| self.diagonal.data[i][i].clone()).collect()
    }
}

struct SmithWork {
    a: Vec<Vec<Int>>,
    left: Vec<Vec<Int>>,
    right: Vec<Vec<Int>>,
    right_inv: Vec<Vec<Int>>,
}

impl SmithWork {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        self.left.swap(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for r in self.a.iter_mut() {
            r.swap(i, j);
        }
        for r in self.right.iter_mut() {
            r.swap(i, j);
        }
        self.right_inv.swap(i, j);
    }

    /// row_i -= q·row_t
    fn sub_row(&mut self, i: usize, q: &Int, t: usize) {
        let src = self.a[t].clone();
        row_sub_scaled(&mut self.a[i], q, &src);
        let src = self.left[t].clone();
        row_sub_scaled(&mut self.left[i], q, &src);
    }

    /// col_j -= q·col_t
    fn sub_col(&mut self, j: usize, q: &Int, t: usize) {
        if q.is_zero() {
            return;
        }
        for r in self.a.iter_mut() {
            let v = q * &r[t];
            r[j] -= v;
        }
        for r in self.right.iter_mut() {
            let v = q * &r[t];
            r[j] -= v;
        }
        // inverse operation on the rows of right_inv: row_t += q·row_j
        let src = self.right_inv[j].clone();
        for (x, s) in self.right_inv[t].iter_mut().zip(&src) {
            *x += q * s;
        }
    }
}

fn smith_work(m: &IntMatrix) -> SmithWork {
    let (rows, cols) = (m.rows, m.cols);
    let mut w = SmithWork {
        a: m.data.clone(),
        left: IntMatrix::identity(rows).data,
        right: IntMatrix::identity(cols).data,
        right_inv: IntMatrix::identity(cols).data,
    };
    for t in 0..rows.min(cols) {
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !w.a[i][j].is_zero())
            .min_by(|&(a, b), &(c, d)| w.a[a][b].abs().cmp(&w.a[c][d].abs()));
        let Some((pi, pj)) = pivot else { break };
        w.swap_rows(t, pi);
        w.swap_cols(t, pj);
        loop {
            for i in t + 1..rows {
                if !w.a[i][t].is_zero() {
                    let q = w.a[i][t].div_floor(&w.a[t][t]);
                    w.sub_row(i, &q, t);
                }
            }
            for j in t + 1..cols {
                if !w.a[t][j].is_zero() {
                    let q = w.a[t][j].div_floor(&w.a[t][t]);
                    w.sub_col(j, &q, t);
                }
            }
            let leftover_col = (t + 1..rows)
                .filter(|&i| !w.a[i][t].is_zero())
                .min_by(|&a, &b| w.a[a][t].abs().cmp(&w.a[b][t].abs()));
            let leftover_row = (t + 1..cols)
                .filter(|&j| !w.a[t][j].is_zero())
                .min_by(|&a, &b| w.a[t][a].abs().cmp(&w.a[t][b].abs()));
            match (leftover_col, leftover_row) {
                (Some(i), Some(j)) => {
                    if w.a[i][t].abs() <= w.a[t][j].abs() {
                        w.swap_rows(t, i);
                    } else {
                        w.swap_cols(t, j);
                    }
                    continue;
                }
                (Some(i), None) => {
                    w.swap_rows(t, i);
                    continue;
                }
                (None, Some(j)) => {
                    w.swap_cols(t, j);
                    continue;
                }
                (None, None) => {}
            }
            // pivot must divide the rest of the block
            let bad = (t + 1..rows).find(|&i| {
                (t + 1..cols).any(|j| !w.a[i][j].is_multiple_of(&w.a[t][t]))
            });
            match bad {
                Some(i) => {
                    let minus_one = -Int::one();
                    w.sub_row(t, &minus_one, i);
                }
                None => break,
            }
        }
        if w.a[t][t].is_negative() {
            for x in w.a[t].iter_mut() {
                *x = -&*x;
            }
            for x in w.left[t].iter_mut() {
                *x = -&*x;
            }
        }
    }
    w
}

/// Smith normal form `left · m · right = diagonal`.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let w = smith_work(m);
    SmithForm {
        diagonal: IntMatrix {
            rows: m.rows,
            cols: m.cols,
            data: w.a,
        },
        left: IntMatrix {
            rows: m.rows,
            cols: m.rows,
            data: w.left,
        },
        right: IntMatrix {
            rows: m.cols,
            cols: m.cols,
            data: w.right,
        },
    }
}

/// Basis of `{x ∈ Zⁿ : m·xᵀ = 0}`, in Hermite normal form.
pub fn integer_kernel(m: &IntMatrix) -> IntMatrix {
    let t = m.transpose();
    let (h, u) = hermite_normal_form(&t);
    let rank = (0..h.rows).filter(|&i| h.row(i).iter().any(|x| !x.is_zero())).count();
    let kernel = u.select_rows(|i| i >= rank);
    lattice_basis(&kernel)
}

/// Basis of the saturation `{v ∈ Zⁿ : k·v ∈ span for some k ≠ 0}` of the
/// lattice spanned by the rows, in Hermite normal form.
pub fn saturate(span_basis: &IntMatrix) -> IntMatrix {
    let orth = integer_kernel(span_basis);
    integer_kernel(&orth)
}

pub fn is_saturated(basis: &IntMatrix) -> bool {
    lattice_basis(basis) == saturate(basis)
}

/// A basis of a complement `C` with `span(basis) ⊕ C = Zⁿ`.
pub fn complement(saturated_basis: &IntMatrix) -> Result<IntMatrix, LinalgError> {
    let k = saturated_basis.rows;
    let w = smith_work(saturated_basis);
    for i in 0..k {
        let d = &w.a[i][i];
        if d.is_zero() {
            return Err(LinalgError::RankDeficient {
                rank: i,
                rows: k,
            });
        }
        if !d.is_one() {
            return Err(LinalgError::NotSaturated { factor: d.clone() });
        }
    }
    let data: Vec<Vec<Int>> = w.right_inv.into_iter().skip(k).collect();
    Ok(IntMatrix {
        rows: data.len(),
        cols: saturated_basis.cols,
        data,
    })
}

/// Gauss–Jordan over the rationals; returns `x` with `x · basis = v`, or
/// `None` when `v` is outside the rational row span.
pub fn solve_rational(basis: &IntMatrix, v: &[Int]) -> Option<Vec<Rat>> {
    let k = basis.rows;
    let n = basis.cols;
    assert_eq!(v.len(), n);
    // augmented system basisᵀ · xᵀ = vᵀ, one equation per column
    let mut sys: Vec<Vec<Rat>> = (0..n)
        .map(|j| {
            let mut row: Vec<Rat> = (0..k)
                .map(|i| Rat::from_integer(basis.data[i][j].clone()))
                .collect();
            row.push(Rat::from_integer(v[j].clone()));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..n).find(|&i| !sys[i][c].is_zero()) else {
            continue;
        };
        sys.swap(r, p);
        let inv = sys[r][c].recip();
        for x in sys[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != r && !sys[i][c].is_zero() {
                let f = sys[i][c].clone();
                let (src, dst) = if i < r {
                    let (a, b) = sys.split_at_mut(r);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = sys.split_at_mut(i);
                    (&a[r], &mut b[0])
                };
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= &f * s;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == n {
            break;
        }
    }
    if sys[r..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    let mut x = vec![Rat::zero(); k];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = sys[i][k].clone();
    }
    Some(x)
}

/// Integer coordinates of `v` in a lattice basis, if `v` lies in the lattice.
pub fn lattice_coords(basis: &IntMatrix, v: &[Int]) -> Option<Vec<Int>> {
    let x = solve_rational(basis, v)?;
    if x.iter().all(|q| q.is_integer()) {
        Some(x.into_iter().map(|q| q.to_integer()).collect())
    } else {
        None
    }
}

/// Inverse of a unimodular matrix; `None` if `m` is not unimodular.
pub fn unimodular_inverse(m: &IntMatrix) -> Option<IntMatrix> {
    if !m.is_unimodular() {
        return None;
    }
    let n = m.rows;
    // row i of the inverse solves x · m = e_i
    let mut data = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![Int::zero(); n];
        e[i] = Int::one();
        data.push(lattice_coords(m, &e)?);
    }
    Some(IntMatrix { rows: n, cols: n, data })
}

/// Subtracts multiples of HNF rows so every pivot entry of `v` lands in
/// `[0, pivot)`. Two vectors in the same coset of the lattice reduce to the
/// same representative.
pub fn hermite_reduce(hnf: &IntMatrix, v: &mut [Int]) {
    for row in hnf.row_iter() {
        let Some(p) = row.iter().position(|x| !x.is_zero()) else {
            continue;
        };
        let q = v[p].div_floor(&row[p]);
        row_sub_scaled(v, &q, row);
    }
}

/// Splitting `Zⁿ = S ⊕ C` for a saturated sublattice `S`, used to pick
/// canonical representatives of rays modulo a linear subspace.
#[derive(Debug, Clone)]
pub struct QuotientLattice {
    sub: IntMatrix,
    comp: IntMatrix,
    /// inverse of `[sub; comp]`
    inv: IntMatrix,
}

impl QuotientLattice {
    /// `span` may be any spanning set; it is saturated first.
    pub fn new(cols: usize, span: &[Vec<Int>]) -> Self {
        let span = IntMatrix::from_rows(cols, span.to_vec()).expect("ragged span");
        let sub = saturate(&span);
        let comp = complement(&sub).expect("saturated basis has a complement");
        let inv = unimodular_inverse(&sub.vstack(&comp)).expect("basis is unimodular");
        QuotientLattice { sub, comp, inv }
    }

    pub fn sub_basis(&self) -> &IntMatrix {
        &self.sub
    }

    pub fn complement_basis(&self) -> &IntMatrix {
        &self.comp
    }

    pub fn quotient_rank(&self) -> usize {
        self.comp.rows
    }

    /// Coordinates of the image of `v` in `Zⁿ / S`, with respect to the
    /// complement basis.
    pub fn project(&self, v: &[Int]) -> Vec<Int> {
        let x = self.inv.left_apply(v);
        x[self.sub.rows..].to_vec()
    }

    /// Canonical representative of the coset `Σ cᵢ·compᵢ + S`.
    pub fn lift(&self, coords: &[Int]) -> Vec<Int> {
        let mut v = self.comp.left_apply(coords);
        hermite_reduce(&self.sub, &mut v);
        v
    }

    /// Canonical representative of the ray spanned by the image of `v`:
    /// the image is made primitive and then lifted. Returns `None` for
    /// vectors inside `S`.
    pub fn canonical_ray(&self, v: &[Int]) -> Option<Vec<Int>> {
        let b = primitive(self.project(v));
        if b.iter().all(Zero::is_zero) {
            return None;
        }
        Some(self.lift(&b))
    }
}
