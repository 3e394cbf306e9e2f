//! Linear block codes over GF(q): construction from a generator matrix,
//! membership via the parity check, exact minimum distance by message-space
//! enumeration, and the stock inner-code families (single-parity-check,
//! repetition, full space).

use std::sync::Arc;

use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::field::Field;
use crate::linalg::{row_basis, LinAlgError, Matrix, Reduction};

#[derive(Debug, Error)]
pub enum BlockCodeError {
    #[error("generator matrix is zero")]
    ZeroMatrix,
    #[error("word length {got} does not match code length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("message space of size {q}^{k} exceeds the enumeration guard {guard}")]
    TooLargeToEnumerate { q: u64, k: usize, guard: u64 },
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// An [n, k] linear code held as a full-rank generator in reduced form plus
/// its parity check matrix.
pub struct LinearBlockCode {
    field: Arc<Field>,
    n: usize,
    k: usize,
    gen: Matrix,
    gen_reduction: Reduction,
    parity: Matrix,
}

impl LinearBlockCode {
    /// Builds the code spanned by the rows of `g`. Dependent rows are
    /// dropped, so the dimension may be smaller than the row count.
    pub fn from_generator(g: &Matrix) -> Result<Self, BlockCodeError> {
        if g.is_zero() {
            return Err(BlockCodeError::ZeroMatrix);
        }
        let gen = row_basis(g);
        let gen_reduction = gen.reduce();
        let parity = row_basis(&gen_reduction.nullspace);
        Ok(LinearBlockCode {
            field: Arc::clone(g.field()),
            n: g.cols(),
            k: gen.rows(),
            gen,
            gen_reduction,
            parity,
        })
    }

    /// The [n, n-1] single-parity-check code: all words whose coordinates sum
    /// to zero.
    pub fn single_parity_check(field: Arc<Field>, n: usize) -> Self {
        assert!(n >= 2);
        let mut rows = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let mut row = vec![0u64; n];
            row[i] = 1;
            row[n - 1] = field.neg(1);
            rows.push(row);
        }
        let g = Matrix::from_rows(field, &rows).expect("well-formed rows");
        Self::from_generator(&g).expect("nonzero generator")
    }

    /// The [n, 1] repetition code.
    pub fn repetition(field: Arc<Field>, n: usize) -> Self {
        let g = Matrix::from_rows(field, &[vec![1; n]]).expect("well-formed row");
        Self::from_generator(&g).expect("nonzero generator")
    }

    /// The [n, n] code containing every word.
    pub fn full_space(field: Arc<Field>, n: usize) -> Self {
        let g = Matrix::identity(field, n);
        Self::from_generator(&g).expect("nonzero generator")
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.k as u64, self.n as u64)
    }

    /// Canonical (rref) generator matrix, k x n of full row rank.
    pub fn generator(&self) -> &Matrix {
        &self.gen
    }

    /// Parity check matrix, (n-k) x n, with gen · parity^T = 0.
    pub fn parity_check(&self) -> &Matrix {
        &self.parity
    }

    /// Pivot columns of the canonical generator. A codeword's coordinates
    /// with respect to the generator rows are its values at these columns.
    pub fn generator_pivots(&self) -> &[usize] {
        &self.gen_reduction.pivots
    }

    pub fn encode(&self, msg: &[u64]) -> Vec<u64> {
        self.gen.left_mul(msg)
    }

    /// True iff parity · word^T = 0.
    pub fn contains(&self, word: &[u64]) -> Result<bool, BlockCodeError> {
        if word.len() != self.n {
            return Err(BlockCodeError::LengthMismatch {
                expected: self.n,
                got: word.len(),
            });
        }
        let f = &self.field;
        for r in 0..self.parity.rows() {
            let mut acc = 0u64;
            for (j, &w) in word.iter().enumerate() {
                if w != 0 {
                    acc = f.add(acc, f.mul(self.parity.get(r, j), w));
                }
            }
            if acc != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Coordinates of a codeword with respect to the canonical generator.
    pub fn message_of(&self, word: &[u64]) -> Option<Vec<u64>> {
        self.gen_reduction.coordinates(word)
    }

    /// Exact minimum Hamming weight of the nonzero codewords, by enumerating
    /// the q^k message space. Errors when the space exceeds `guard`.
    pub fn min_distance(&self, guard: u64) -> Result<u64, BlockCodeError> {
        let q = self.field.q();
        let total = checked_pow(q, self.k as u32)
            .filter(|&t| t <= guard)
            .ok_or(BlockCodeError::TooLargeToEnumerate {
                q,
                k: self.k,
                guard,
            })?;
        let d = (1..total)
            .into_par_iter()
            .map(|idx| {
                let msg = digits(idx, q, self.k);
                self.encode(&msg).iter().filter(|&&v| v != 0).count() as u64
            })
            .min()
            .expect("k >= 1 so there is a nonzero codeword");
        assert!(
            d <= (self.n - self.k + 1) as u64,
            "Singleton bound violated: d={} n={} k={}",
            d,
            self.n,
            self.k
        );
        Ok(d)
    }

    /// d / n as an exact ratio.
    pub fn relative_min_distance(&self, guard: u64) -> Result<Ratio<u64>, BlockCodeError> {
        Ok(Ratio::new(self.min_distance(guard)?, self.n as u64))
    }

    /// For codes beyond the enumeration guard: checks a caller-supplied
    /// distance against a seeded sample of nonzero codewords. Returns false
    /// if any sampled codeword weighs less than the claim; true means the
    /// sample is consistent with the claim, not that the claim is proven.
    pub fn distance_claim_consistent(&self, claimed: u64, samples: usize, seed: u64) -> bool {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let q = self.field.q();
        for _ in 0..samples {
            let msg: Vec<u64> = loop {
                let m: Vec<u64> = (0..self.k).map(|_| rng.gen_range(0..q)).collect();
                if m.iter().any(|&v| v != 0) {
                    break m;
                }
            };
            if weight(&self.encode(&msg)) < claimed {
                return false;
            }
        }
        true
    }
}

pub fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut out: u64 = 1;
    for _ in 0..exp {
        out = out.checked_mul(base)?;
    }
    Some(out)
}

/// Little-endian base-q digits of `idx`, padded to `len`.
pub fn digits(mut idx: u64, q: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for slot in out.iter_mut() {
        *slot = idx % q;
        idx /= q;
        if idx == 0 {
            break;
        }
    }
    out
}

pub fn weight(word: &[u64]) -> u64 {
    word.iter().filter(|&&v| v != 0).count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf2() -> Arc<Field> {
        Field::new(2, 1, None).unwrap()
    }

    #[test]
    fn repetition_code() {
        let c = LinearBlockCode::from_generator(&Matrix::from_rows(gf2(), &[vec![1, 1]]).unwrap())
            .unwrap();
        assert_eq!((c.n(), c.k()), (2, 1));
        assert_eq!(c.min_distance(1 << 20).unwrap(), 2);
        assert!(c.contains(&[1, 1]).unwrap());
        assert!(!c.contains(&[1, 0]).unwrap());
    }

    #[test]
    fn parity_code_from_generator() {
        let g = Matrix::from_rows(gf2(), &[vec![1, 0, 1], vec![0, 1, 1]]).unwrap();
        let c = LinearBlockCode::from_generator(&g).unwrap();
        assert_eq!((c.n(), c.k()), (3, 2));
        // enumerate the 4 codewords: 000 101 011 110 -> d = 2
        assert_eq!(c.min_distance(1 << 20).unwrap(), 2);
        assert!(c.contains(&[1, 1, 0]).unwrap());
        assert!(!c.contains(&[1, 1, 1]).unwrap());
    }

    #[test]
    fn dependent_rows_collapse() {
        let g = Matrix::from_rows(gf2(), &[vec![1, 1], vec![1, 1]]).unwrap();
        let c = LinearBlockCode::from_generator(&g).unwrap();
        assert_eq!(c.k(), 1);
    }

    #[test]
    fn zero_generator_rejected() {
        let g = Matrix::zero(gf2(), 2, 3);
        assert!(matches!(
            LinearBlockCode::from_generator(&g),
            Err(BlockCodeError::ZeroMatrix)
        ));
    }

    #[test]
    fn full_space_distance_one() {
        let c = LinearBlockCode::full_space(gf2(), 4);
        assert_eq!(c.min_distance(1 << 20).unwrap(), 1);
        assert!(c.contains(&[1, 0, 1, 1]).unwrap());
    }

    #[test]
    fn single_parity_check_gf4() {
        let f = Field::new(2, 2, None).unwrap();
        let c = LinearBlockCode::single_parity_check(Arc::clone(&f), 5);
        assert_eq!((c.n(), c.k()), (5, 4));
        assert_eq!(c.min_distance(1 << 20).unwrap(), 2);
        // every codeword sums to zero
        let w = c.encode(&[1, 2, 3, 1]);
        let sum = w.iter().fold(0, |acc, &v| f.add(acc, v));
        assert_eq!(sum, 0);
    }

    #[test]
    fn guard_triggers() {
        let c = LinearBlockCode::full_space(gf2(), 30);
        assert!(matches!(
            c.min_distance(1 << 10),
            Err(BlockCodeError::TooLargeToEnumerate { .. })
        ));
    }

    #[test]
    fn membership_matches_rank_test() {
        let f = Field::new(2, 2, None).unwrap();
        let g = Matrix::from_rows(Arc::clone(&f), &[vec![1, 2, 0, 3], vec![0, 1, 1, 1]]).unwrap();
        let c = LinearBlockCode::from_generator(&g).unwrap();
        for idx in 0..(f.q().pow(4)) {
            let word = digits(idx, f.q(), 4);
            let by_parity = c.contains(&word).unwrap();
            let by_rank = g.row_space_contains(&word).unwrap();
            assert_eq!(by_parity, by_rank);
        }
    }

    #[test]
    fn distance_claim_sampling() {
        let c = LinearBlockCode::single_parity_check(gf2(), 4);
        assert!(c.distance_claim_consistent(2, 200, 1));
        // claiming 3 is refuted by any weight-2 codeword in the sample
        assert!(!c.distance_claim_consistent(3, 200, 1));
    }

    #[test]
    fn min_distance_matches_direct_enumeration() {
        // independent oracle: walk all codewords as raw vectors
        let f = Field::new(2, 2, None).unwrap();
        let g = Matrix::from_rows(Arc::clone(&f), &[vec![1, 0, 1, 2], vec![0, 1, 3, 1]]).unwrap();
        let c = LinearBlockCode::from_generator(&g).unwrap();
        let mut best = u64::MAX;
        for idx in 1..f.q().pow(2) {
            let msg = digits(idx, f.q(), 2);
            let mut word = vec![0u64; 4];
            for (i, &m) in msg.iter().enumerate() {
                for (j, w) in word.iter_mut().enumerate() {
                    *w = f.add(*w, f.mul(m, g.get(i, j)));
                }
            }
            best = best.min(weight(&word));
        }
        assert_eq!(c.min_distance(1 << 20).unwrap(), best);
    }
}
