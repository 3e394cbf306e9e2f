//! Dense exact linear algebra over a finite field: row reduction, rank,
//! null spaces, row-space membership, subspace intersection, and the
//! coordinate maps between GF(q)-vector spaces and extension fields GF(q^d).
//!
//! All computations are exact; there is no floating point anywhere in this
//! module. Matrices are immutable row-major grids of element indices tied to
//! one owning [`Field`].

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::field::{Field, FieldError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinAlgError {
    #[error("matrix dimensions do not match: {0}")]
    DimensionMismatch(String),
    #[error("matrices belong to different fields")]
    FieldMismatch,
    #[error("subspaces live in different ambient spaces")]
    AmbientMismatch,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A dense matrix over a finite field, entries stored as element indices.
#[derive(Clone)]
pub struct Matrix {
    field: Arc<Field>,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        *self.field == *other.field
            && self.rows == other.rows
            && self.cols == other.cols
            && self.data == other.data
    }
}

impl Eq for Matrix {}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Row reduction output: the reduced row echelon form, its rank and pivot
/// columns, and a basis of the right null space `{x : m x^T = 0}`.
pub struct Reduction {
    pub rref: Matrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
    pub nullspace: Matrix,
}

impl Matrix {
    pub fn zero(field: Arc<Field>, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: Arc<Field>, n: usize) -> Self {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: Arc<Field>, rows: &[Vec<u64>]) -> Result<Self, LinAlgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(LinAlgError::DimensionMismatch(format!(
                    "ragged rows: expected {} entries, got {}",
                    cols,
                    row.len()
                )));
            }
            for &v in row {
                if v >= field.q() {
                    return Err(LinAlgError::DimensionMismatch(format!(
                        "entry {} out of range for {}",
                        v, field
                    )));
                }
                data.push(v);
            }
        }
        Ok(Matrix {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        debug_assert!(v < self.field.q());
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zero(Arc::clone(&self.field), self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn hstack(&self, rhs: &Matrix) -> Result<Matrix, LinAlgError> {
        self.check_field(rhs)?;
        if self.rows != rhs.rows {
            return Err(LinAlgError::DimensionMismatch(format!(
                "hstack row counts {} vs {}",
                self.rows, rhs.rows
            )));
        }
        let mut out = Matrix::zero(Arc::clone(&self.field), self.rows, self.cols + rhs.cols);
        for r in 0..self.rows {
            out.data[r * out.cols..r * out.cols + self.cols].copy_from_slice(self.row(r));
            out.data[r * out.cols + self.cols..(r + 1) * out.cols].copy_from_slice(rhs.row(r));
        }
        Ok(out)
    }

    pub fn vstack(&self, rhs: &Matrix) -> Result<Matrix, LinAlgError> {
        self.check_field(rhs)?;
        if self.cols != rhs.cols && self.rows != 0 && rhs.rows != 0 {
            return Err(LinAlgError::DimensionMismatch(format!(
                "vstack column counts {} vs {}",
                self.cols, rhs.cols
            )));
        }
        let cols = if self.rows == 0 { rhs.cols } else { self.cols };
        let mut data = Vec::with_capacity((self.rows + rhs.rows) * cols);
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&rhs.data);
        Ok(Matrix {
            field: Arc::clone(&self.field),
            rows: self.rows + rhs.rows,
            cols,
            data,
        })
    }

    /// Columns `lo..hi` as a new matrix.
    pub fn column_block(&self, lo: usize, hi: usize) -> Matrix {
        assert!(lo <= hi && hi <= self.cols);
        let mut out = Matrix::zero(Arc::clone(&self.field), self.rows, hi - lo);
        for r in 0..self.rows {
            out.data[r * out.cols..(r + 1) * out.cols]
                .copy_from_slice(&self.data[r * self.cols + lo..r * self.cols + hi]);
        }
        out
    }

    pub fn mat_mul(&self, rhs: &Matrix) -> Result<Matrix, LinAlgError> {
        self.check_field(rhs)?;
        if self.cols != rhs.rows {
            return Err(LinAlgError::DimensionMismatch(format!(
                "mat_mul inner dimensions {} vs {}",
                self.cols, rhs.rows
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zero(Arc::clone(f), self.rows, rhs.cols);
        for r in 0..self.rows {
            for i in 0..self.cols {
                let a = self.get(r, i);
                if a == 0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    let add = f.mul(a, rhs.get(i, c));
                    let cur = out.get(r, c);
                    out.set(r, c, f.add(cur, add));
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: returns `x · self` (x has `rows` entries).
    pub fn left_mul(&self, x: &[u64]) -> Vec<u64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0u64; self.cols];
        self.left_mul_acc(x, &mut out);
        out
    }

    /// Accumulates `x · self` into `out` (out gains the product).
    pub fn left_mul_acc(&self, x: &[u64], out: &mut [u64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        let f = &self.field;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            let row = self.row(i);
            if xi == 1 {
                for (o, &r) in out.iter_mut().zip(row) {
                    *o = f.add(*o, r);
                }
            } else {
                for (o, &r) in out.iter_mut().zip(row) {
                    *o = f.add(*o, f.mul(xi, r));
                }
            }
        }
    }

    /// Gauss-Jordan elimination. Exact over the owning field.
    pub fn reduce(&self) -> Reduction {
        let f = &self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    let (a, b) = (m.get(r, j), m.get(pr, j));
                    m.set(r, j, b);
                    m.set(pr, j, a);
                }
            }
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            if inv != 1 {
                for j in 0..m.cols {
                    let v = m.get(r, j);
                    m.set(r, j, f.mul(v, inv));
                }
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor == 0 {
                    continue;
                }
                for j in 0..m.cols {
                    let v = m.get(i, j);
                    let sub = f.mul(factor, m.get(r, j));
                    m.set(i, j, f.sub(v, sub));
                }
            }
            pivots.push(c);
            r += 1;
        }
        let rank = pivots.len();
        // Null-space basis from the free columns.
        let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
        let mut null = Matrix::zero(Arc::clone(f), free.len(), m.cols);
        for (nr, &fc) in free.iter().enumerate() {
            null.set(nr, fc, 1);
            for (pr, &pc) in pivots.iter().enumerate() {
                null.set(nr, pc, f.neg(m.get(pr, fc)));
            }
        }
        Reduction {
            rref: m,
            rank,
            pivots,
            nullspace: null,
        }
    }

    pub fn rank(&self) -> usize {
        self.reduce().rank
    }

    /// Membership of `word` in the row space, by elimination against this
    /// matrix's reduced form. For repeated queries hold a [`Reduction`] and
    /// use [`Reduction::contains`].
    pub fn row_space_contains(&self, word: &[u64]) -> Result<bool, LinAlgError> {
        if word.len() != self.cols {
            return Err(LinAlgError::DimensionMismatch(format!(
                "word length {} vs {} columns",
                word.len(),
                self.cols
            )));
        }
        Ok(self.reduce().contains(word))
    }

    fn check_field(&self, rhs: &Matrix) -> Result<(), LinAlgError> {
        if *self.field != *rhs.field {
            return Err(LinAlgError::FieldMismatch);
        }
        Ok(())
    }
}

impl Reduction {
    /// True iff `word` lies in the row space of the reduced matrix.
    pub fn contains(&self, word: &[u64]) -> bool {
        let f = self.rref.field();
        let mut w = word.to_vec();
        for (r, &pc) in self.pivots.iter().enumerate() {
            let factor = w[pc];
            if factor == 0 {
                continue;
            }
            let row = self.rref.row(r);
            for (wi, &ri) in w.iter_mut().zip(row) {
                *wi = f.sub(*wi, f.mul(factor, ri));
            }
        }
        w.iter().all(|&v| v == 0)
    }

    /// Coordinates of `word` with respect to the rref basis rows; `None` if
    /// the word is not in the row space.
    pub fn coordinates(&self, word: &[u64]) -> Option<Vec<u64>> {
        let f = self.rref.field();
        let mut w = word.to_vec();
        let mut coords = Vec::with_capacity(self.rank);
        for (r, &pc) in self.pivots.iter().enumerate() {
            let factor = w[pc];
            coords.push(factor);
            if factor == 0 {
                continue;
            }
            let row = self.rref.row(r);
            for (wi, &ri) in w.iter_mut().zip(row) {
                *wi = f.sub(*wi, f.mul(factor, ri));
            }
        }
        if w.iter().all(|&v| v == 0) {
            Some(coords)
        } else {
            None
        }
    }
}

/// The nonzero rows of the reduced form: a canonical basis of the row space.
pub fn row_basis(m: &Matrix) -> Matrix {
    let red = m.reduce();
    red.rref.clone_top_rows(red.rank)
}

impl Matrix {
    fn clone_top_rows(&self, n: usize) -> Matrix {
        Matrix {
            field: Arc::clone(&self.field),
            rows: n,
            cols: self.cols,
            data: self.data[..n * self.cols].to_vec(),
        }
    }
}

/// Basis of the intersection of two row spaces, via annihilator duality:
/// `(A ∩ B)^⊥ = A^⊥ + B^⊥`. Returns the canonical rref basis.
pub fn subspace_intersect(a: &Matrix, b: &Matrix) -> Result<Matrix, LinAlgError> {
    if *a.field() != *b.field() {
        return Err(LinAlgError::FieldMismatch);
    }
    if a.cols() != b.cols() {
        return Err(LinAlgError::AmbientMismatch);
    }
    let na = a.reduce();
    let nb = b.reduce();
    let stacked = na.nullspace.vstack(&nb.nullspace)?;
    let inter = row_basis(&stacked.reduce().nullspace);
    // dim(A ∩ B) >= dim A + dim B - ambient
    let lower = (na.rank + nb.rank) as i64 - a.cols() as i64;
    assert!(
        inter.rows() as i64 >= lower,
        "intersection dimension {} below the guaranteed lower bound {}",
        inter.rows(),
        lower
    );
    Ok(inter)
}

/// A GF(q)-linear bijection between GF(q)^d and the extension field GF(q^d).
///
/// The extension is realized as the canonical GF(p^{e·d}); the base field
/// embeds through the first root of its field polynomial found in index
/// order, and the power basis 1, α, .., α^{d-1} of the canonical generator α
/// spans the extension over the embedded base.
pub struct FieldEmbedding {
    base: Arc<Field>,
    ext: Arc<Field>,
    d: usize,
    /// base index -> ext index, a field homomorphism.
    iota: Vec<u64>,
    /// Powers of the extension generator: basis over the embedded base.
    basis: Vec<u64>,
    /// Inverse of the GF(p)-linear forward map, as an (ed)x(ed) matrix.
    backward_matrix: Matrix,
    prime: Arc<Field>,
}

impl FieldEmbedding {
    pub fn new(base: &Arc<Field>, d: u32) -> Result<FieldEmbedding, LinAlgError> {
        if d == 0 {
            return Err(FieldError::ZeroDegree.into());
        }
        let p = base.p();
        let ext = Field::new(p, base.e() * d, None)?;
        let d = d as usize;

        let iota = if d == 1 && ext.modulus() == base.modulus() {
            (0..base.q()).collect()
        } else {
            // First root of the base field polynomial in the extension.
            let root = (0..ext.q())
                .find(|&beta| eval_scalar_poly(&ext, base.modulus(), beta) == 0)
                .expect("the base polynomial splits in the extension");
            let mut iota = vec![0u64; base.q() as usize];
            for (a, slot) in iota.iter_mut().enumerate() {
                *slot = eval_scalar_poly(&ext, &base.element_coeffs(a as u64), root);
            }
            iota
        };

        let alpha = if ext.e() == 1 { 1 } else { p }; // class of x, or 1 when d*e = 1
        let mut basis = Vec::with_capacity(d);
        let mut acc = 1u64;
        for _ in 0..d {
            basis.push(acc);
            acc = ext.mul(acc, alpha);
        }

        // Forward map as a GF(p)-matrix: column (i*e + j) is the coefficient
        // vector of iota(alpha_base^j) * alpha^i.
        let prime = Field::new(p, 1, None)?;
        let e = base.e() as usize;
        let ed = e * d;
        let mut fwd = Matrix::zero(Arc::clone(&prime), ed, ed);
        for (i, &basis_i) in basis.iter().enumerate() {
            for j in 0..e {
                let base_pow = base.element_from_coeffs(&unit_vec(e, j));
                let img = ext.mul(iota[base_pow as usize], basis_i);
                for (row, &digit) in ext.element_coeffs(img).iter().enumerate() {
                    fwd.set(row, i * e + j, digit);
                }
            }
        }
        let aug = fwd.hstack(&Matrix::identity(Arc::clone(&prime), ed))?;
        let red = aug.reduce();
        assert_eq!(red.rank, ed, "the forward coordinate map must be bijective");
        let backward_matrix = red.rref.column_block(ed, 2 * ed);

        Ok(FieldEmbedding {
            base: Arc::clone(base),
            ext,
            d,
            iota,
            basis,
            backward_matrix,
            prime,
        })
    }

    pub fn base(&self) -> &Arc<Field> {
        &self.base
    }

    pub fn ext(&self) -> &Arc<Field> {
        &self.ext
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    /// Image of a base element under the field embedding.
    pub fn embed_scalar(&self, a: u64) -> u64 {
        self.iota[a as usize]
    }

    /// Maps a length-d coordinate vector over the base field to an extension
    /// field element.
    pub fn forward(&self, v: &[u64]) -> u64 {
        assert_eq!(v.len(), self.d);
        let mut acc = 0u64;
        for (&vi, &bi) in v.iter().zip(&self.basis) {
            if vi != 0 {
                acc = self.ext.add(acc, self.ext.mul(self.iota[vi as usize], bi));
            }
        }
        acc
    }

    /// Inverse of [`FieldEmbedding::forward`].
    pub fn backward(&self, x: u64) -> Vec<u64> {
        let digits = self.ext.element_coeffs(x);
        let ed = digits.len();
        let mut w = vec![0u64; ed];
        for (i, wi) in w.iter_mut().enumerate() {
            let mut acc = 0u64;
            for (j, &dj) in digits.iter().enumerate() {
                acc = self
                    .prime
                    .add(acc, self.prime.mul(self.backward_matrix.get(i, j), dj));
            }
            *wi = acc;
        }
        let e = self.base.e() as usize;
        w.chunks(e)
            .map(|chunk| self.base.element_from_coeffs(chunk))
            .collect()
    }
}

fn unit_vec(len: usize, pos: usize) -> Vec<u64> {
    let mut v = vec![0u64; len];
    v[pos] = 1;
    v
}

/// Evaluates a polynomial with GF(p) scalar coefficients at an extension
/// field point. Scalars below p coincide with the prime subfield.
fn eval_scalar_poly(f: &Field, coeffs: &[u64], x: u64) -> u64 {
    let mut acc = 0u64;
    for &c in coeffs.iter().rev() {
        acc = f.add(f.mul(acc, x), c);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf2() -> Arc<Field> {
        Field::new(2, 1, None).unwrap()
    }

    #[test]
    fn identity_reduction() {
        let m = Matrix::identity(gf2(), 3);
        let red = m.reduce();
        assert_eq!(red.rank, 3);
        assert_eq!(red.nullspace.rows(), 0);
    }

    #[test]
    fn rank_one_nullspace() {
        let m = Matrix::from_rows(gf2(), &[vec![1, 1], vec![1, 1]]).unwrap();
        let red = m.reduce();
        assert_eq!(red.rank, 1);
        assert_eq!(red.nullspace.rows(), 1);
        assert_eq!(red.nullspace.row(0), &[1, 1]);
    }

    #[test]
    fn zero_matrix_full_nullspace() {
        let m = Matrix::zero(gf2(), 2, 3);
        let red = m.reduce();
        assert_eq!(red.rank, 0);
        assert_eq!(red.nullspace.rows(), 3);
    }

    #[test]
    fn nullspace_rows_annihilate() {
        let f = Field::new(2, 2, None).unwrap();
        let m = Matrix::from_rows(
            Arc::clone(&f),
            &[vec![1, 2, 3, 0], vec![0, 1, 1, 2], vec![1, 3, 2, 2]],
        )
        .unwrap();
        let red = m.reduce();
        for r in 0..red.nullspace.rows() {
            let x = red.nullspace.row(r);
            for i in 0..m.rows() {
                let mut acc = 0;
                for (j, &xj) in x.iter().enumerate() {
                    acc = f.add(acc, f.mul(m.get(i, j), xj));
                }
                assert_eq!(acc, 0);
            }
        }
        assert_eq!(red.rank + red.nullspace.rows(), m.cols());
        // rank equals the rank computed on the transpose
        assert_eq!(red.rank, m.transpose().rank());
    }

    #[test]
    fn intersect_idempotent() {
        let a = Matrix::from_rows(gf2(), &[vec![1, 0]]).unwrap();
        let i = subspace_intersect(&a, &a).unwrap();
        assert_eq!(i.rows(), 1);
        assert_eq!(i.row(0), &[1, 0]);
    }

    #[test]
    fn intersect_trivial() {
        let a = Matrix::from_rows(gf2(), &[vec![1, 0]]).unwrap();
        let b = Matrix::from_rows(gf2(), &[vec![0, 1]]).unwrap();
        let i = subspace_intersect(&a, &b).unwrap();
        assert_eq!(i.rows(), 0);
    }

    #[test]
    fn intersect_spans_common_vector() {
        let a = Matrix::from_rows(gf2(), &[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let b = Matrix::from_rows(gf2(), &[vec![1, 0, 1]]).unwrap();
        let i = subspace_intersect(&a, &b).unwrap();
        assert_eq!(i.rows(), 1);
        assert_eq!(i.row(0), &[1, 0, 1]);
    }

    #[test]
    fn intersection_contained_in_both() {
        let f = Field::new(3, 1, None).unwrap();
        let a = Matrix::from_rows(
            Arc::clone(&f),
            &[vec![1, 2, 0, 1], vec![0, 1, 1, 1], vec![1, 0, 1, 2]],
        )
        .unwrap();
        let b = Matrix::from_rows(Arc::clone(&f), &[vec![1, 1, 1, 0], vec![2, 0, 1, 1]]).unwrap();
        let i = subspace_intersect(&a, &b).unwrap();
        for r in 0..i.rows() {
            assert!(a.row_space_contains(i.row(r)).unwrap());
            assert!(b.row_space_contains(i.row(r)).unwrap());
        }
    }

    #[test]
    fn embedding_d1_identity() {
        let base = Field::new(2, 2, None).unwrap();
        let emb = FieldEmbedding::new(&base, 1).unwrap();
        for a in 0..base.q() {
            assert_eq!(emb.forward(&[a]), a);
            assert_eq!(emb.backward(a), vec![a]);
        }
    }

    #[test]
    fn embedding_gf2_to_gf4() {
        let base = Field::new(2, 1, None).unwrap();
        let emb = FieldEmbedding::new(&base, 2).unwrap();
        assert_eq!(emb.ext().q(), 4);
        let f10 = emb.forward(&[1, 0]);
        let f01 = emb.forward(&[0, 1]);
        let f11 = emb.forward(&[1, 1]);
        assert_eq!(emb.ext().add(f10, f01), f11);
        // exhaustive round trip over GF(2)^2
        for v0 in 0..2 {
            for v1 in 0..2 {
                let x = emb.forward(&[v0, v1]);
                assert_eq!(emb.backward(x), vec![v0, v1]);
            }
        }
    }

    #[test]
    fn embedding_linear_over_base_scalars() {
        // GF(4) into GF(16): forward must commute with base-scalar action.
        let base = Field::new(2, 2, None).unwrap();
        let emb = FieldEmbedding::new(&base, 2).unwrap();
        let ext = emb.ext();
        for lam in 0..base.q() {
            for v0 in 0..base.q() {
                for v1 in 0..base.q() {
                    let scaled = [base.mul(lam, v0), base.mul(lam, v1)];
                    let lhs = emb.forward(&scaled);
                    let rhs = ext.mul(emb.embed_scalar(lam), emb.forward(&[v0, v1]));
                    assert_eq!(lhs, rhs);
                    // additivity
                    for w0 in 0..base.q() {
                        for w1 in 0..base.q() {
                            let sum = [base.add(v0, w0), base.add(v1, w1)];
                            assert_eq!(
                                emb.forward(&sum),
                                ext.add(emb.forward(&[v0, v1]), emb.forward(&[w0, w1]))
                            );
                        }
                    }
                }
            }
        }
        // bijectivity over all 16 inputs
        let mut seen = std::collections::HashSet::new();
        for v0 in 0..base.q() {
            for v1 in 0..base.q() {
                let x = emb.forward(&[v0, v1]);
                assert!(seen.insert(x));
                assert_eq!(emb.backward(x), vec![v0, v1]);
            }
        }
    }
}
