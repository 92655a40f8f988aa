//! Dense linear algebra over prime fields GF(p).
//!
//! Entries are stored as residues in `[0, p)`. Everything here is exact; the
//! only fast path is a bit-packed row reducer for GF(2), which must agree with
//! the generic reducer on every input.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("modulus {0} is too large (must fit in 31 bits)")]
    ModulusTooLarge(u64),
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("field mismatch: GF({expected}) vs GF({got})")]
    FieldMismatch { expected: u32, got: u32 },
}

/// The prime field GF(p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeField {
    p: u32,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, LinalgError> {
        if p >= 1 << 31 {
            return Err(LinalgError::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(LinalgError::NotPrime(p));
        }
        Ok(Self { p: p as u32 })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.p as u64 - b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    ///
    /// Panics on zero.
    pub fn inv(&self, a: u32) -> u32 {
        assert!(
            !a.is_multiple_of(self.p),
            "zero has no inverse in GF({})",
            self.p
        );
        let (mut old_r, mut r) = (a as i64, self.p as i64);
        let (mut old_s, mut s) = (1i64, 0i64);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        debug_assert_eq!(old_r, 1);
        self.reduce(old_s)
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.p)
    }
}

/// A dense row-major matrix over a prime field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatrixGf {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Result of reducing a matrix to reduced row echelon form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    /// Same shape as the input; zero rows are kept at the bottom.
    pub reduced: MatrixGf,
    pub pivot_cols: Vec<usize>,
    pub rank: usize,
}

impl MatrixGf {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, k: usize) -> Self {
        let mut m = Self::zeros(field, k, k);
        for i in 0..k {
            m.data[i * k + i] = 1;
        }
        m
    }

    /// Builds a matrix from integer rows, reducing every entry mod p.
    pub fn from_rows<R: AsRef<[i64]>>(
        field: PrimeField,
        cols: usize,
        rows: &[R],
    ) -> Result<Self, LinalgError> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend(r.iter().map(|&x| field.reduce(x)));
        }
        Ok(Self {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix from residues that are already reduced.
    pub fn from_residues(
        field: PrimeField,
        rows: usize,
        cols: usize,
        data: Vec<u32>,
    ) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        let p = field.p();
        Ok(Self {
            field,
            rows,
            cols,
            data: data.into_iter().map(|x| x % p).collect(),
        })
    }

    /// `J_k - I_k`: zero diagonal, ones elsewhere.
    pub fn ones_minus_identity(field: PrimeField, k: usize) -> Self {
        let mut m = Self::zeros(field, k, k);
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    m.data[i * k + j] = 1 % field.p();
                }
            }
        }
        m
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.field.p();
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[u32]> + '_ {
        // chunks_exact panics on a zero chunk size
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    /// Keeps only the first `k` rows.
    pub fn truncate_rows(mut self, k: usize) -> Self {
        let k = k.min(self.rows);
        self.data.truncate(k * self.cols);
        self.rows = k;
        self
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let cols = self.cols;
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * cols);
        head[lo * cols..(lo + 1) * cols].swap_with_slice(&mut tail[..cols]);
    }

    fn scale_row(&mut self, r: usize, s: u32) {
        let f = self.field;
        for x in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *x = f.mul(*x, s);
        }
    }

    /// row[dst] -= s * row[src]
    fn sub_scaled_row(&mut self, dst: usize, src: usize, s: u32) {
        if s == 0 {
            return;
        }
        let f = self.field;
        let cols = self.cols;
        let ns = f.neg(s) as u64;
        let p = f.p() as u64;
        for c in 0..cols {
            let v = self.data[src * cols + c] as u64;
            if v != 0 {
                let d = &mut self.data[dst * cols + c];
                *d = ((*d as u64 + ns * v) % p) as u32;
            }
        }
    }

    /// Reduced row echelon form: leading entries are 1 and pivot columns are
    /// cleared above and below.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(piv) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            m.swap_rows(r, piv);
            let inv = m.field.inv(m.get(r, c));
            m.scale_row(r, inv);
            for i in 0..m.rows {
                if i != r {
                    let s = m.get(i, c);
                    m.sub_scaled_row(i, r, s);
                }
            }
            pivot_cols.push(c);
            r += 1;
        }
        Rref {
            rank: pivot_cols.len(),
            reduced: m,
            pivot_cols,
        }
    }

    /// Rank over the matrix's field. GF(2) goes through the bit-packed reducer.
    pub fn rank(&self) -> usize {
        if self.field.p() == 2 {
            let mut acc = RowReducer::new(self.field, self.cols);
            for row in self.row_iter() {
                if acc.is_full() {
                    break;
                }
                acc.insert(row);
            }
            acc.rank()
        } else {
            self.rref().rank
        }
    }

    /// Determinant mod p by elimination, tracking row-swap signs.
    pub fn det_mod(&self) -> Result<u32, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let f = self.field;
        let mut m = self.clone();
        let mut det = 1u32;
        for c in 0..m.cols {
            let Some(piv) = (c..m.rows).find(|&i| m.get(i, c) != 0) else {
                return Ok(0);
            };
            if piv != c {
                m.swap_rows(c, piv);
                det = f.neg(det);
            }
            let pv = m.get(c, c);
            det = f.mul(det, pv);
            let inv = f.inv(pv);
            for i in c + 1..m.rows {
                let s = f.mul(m.get(i, c), inv);
                m.sub_scaled_row(i, c, s);
            }
        }
        Ok(det)
    }
}

/// Vertical concatenation in input order. `cols` is the declared width, used
/// when `ms` is empty.
pub fn stack_rows(
    field: PrimeField,
    cols: usize,
    ms: &[&MatrixGf],
) -> Result<MatrixGf, LinalgError> {
    let mut data = Vec::new();
    let mut rows = 0;
    for m in ms {
        if m.field != field {
            return Err(LinalgError::FieldMismatch {
                expected: field.p(),
                got: m.field.p(),
            });
        }
        if m.cols != cols {
            return Err(LinalgError::DimensionMismatch {
                expected: cols,
                got: m.cols,
            });
        }
        data.extend_from_slice(&m.data);
        rows += m.rows;
    }
    Ok(MatrixGf {
        field,
        rows,
        cols,
        data,
    })
}

/// Incremental echelon basis: feed vectors one at a time, read off the rank.
///
/// Stored rows have a leading 1 at their pivot and zeros at the pivots of all
/// earlier rows, so reducing a new vector against them in insertion order is
/// enough. Over GF(2) rows are bit-packed into `u64` words.
#[derive(Debug, Clone)]
pub struct RowReducer {
    field: PrimeField,
    cols: usize,
    rank: usize,
    pivots: Vec<usize>,
    store: Store,
    scratch: Vec<u32>,
}

#[derive(Debug, Clone)]
enum Store {
    Generic(Vec<u32>),
    Binary {
        words: usize,
        rows: Vec<u64>,
        scratch: Vec<u64>,
    },
}

impl RowReducer {
    pub fn new(field: PrimeField, cols: usize) -> Self {
        let store = if field.p() == 2 {
            let words = cols.div_ceil(64);
            Store::Binary {
                words,
                rows: Vec::with_capacity(words * cols),
                scratch: vec![0; words],
            }
        } else {
            Store::Generic(Vec::with_capacity(cols * cols))
        };
        Self::with_store(field, cols, store)
    }

    /// Always uses the generic residue path, even over GF(2).
    pub fn new_generic(field: PrimeField, cols: usize) -> Self {
        Self::with_store(field, cols, Store::Generic(Vec::with_capacity(cols * cols)))
    }

    fn with_store(field: PrimeField, cols: usize, store: Store) -> Self {
        Self {
            field,
            cols,
            rank: 0,
            pivots: Vec::with_capacity(cols),
            store,
            scratch: vec![0; cols],
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full(&self) -> bool {
        self.rank == self.cols
    }

    pub fn clear(&mut self) {
        self.rank = 0;
        self.pivots.clear();
        match &mut self.store {
            Store::Generic(rows) => rows.clear(),
            Store::Binary { rows, .. } => rows.clear(),
        }
    }

    /// Adds `v` to the span. Returns true if the rank grew.
    pub fn insert(&mut self, v: &[u32]) -> bool {
        assert_eq!(v.len(), self.cols, "vector length must equal column count");
        if self.is_full() {
            return false;
        }
        match &mut self.store {
            Store::Binary {
                words,
                rows,
                scratch,
            } => {
                let words = *words;
                scratch.iter_mut().for_each(|w| *w = 0);
                for (c, &x) in v.iter().enumerate() {
                    if x & 1 == 1 {
                        scratch[c / 64] |= 1 << (c % 64);
                    }
                }
                for (k, &pc) in self.pivots.iter().enumerate() {
                    if scratch[pc / 64] >> (pc % 64) & 1 == 1 {
                        let row = &rows[k * words..(k + 1) * words];
                        for (s, r) in scratch.iter_mut().zip(row) {
                            *s ^= r;
                        }
                    }
                }
                let Some(pc) = first_set_bit(scratch) else {
                    return false;
                };
                rows.extend_from_slice(scratch);
                self.pivots.push(pc);
            }
            Store::Generic(rows) => {
                let f = self.field;
                let p = f.p() as u64;
                let cols = self.cols;
                let s = &mut self.scratch;
                s.copy_from_slice(v);
                for (k, &pc) in self.pivots.iter().enumerate() {
                    let x = s[pc];
                    if x != 0 {
                        let nx = f.neg(x) as u64;
                        let row = &rows[k * cols..(k + 1) * cols];
                        for c in pc..cols {
                            let r = row[c] as u64;
                            if r != 0 {
                                s[c] = ((s[c] as u64 + nx * r) % p) as u32;
                            }
                        }
                    }
                }
                let Some(pc) = s.iter().position(|&x| x != 0) else {
                    return false;
                };
                let inv = f.inv(s[pc]);
                for x in s.iter_mut() {
                    *x = f.mul(*x, inv);
                }
                rows.extend_from_slice(s);
                self.pivots.push(pc);
            }
        }
        self.rank += 1;
        true
    }
}

fn first_set_bit(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}
