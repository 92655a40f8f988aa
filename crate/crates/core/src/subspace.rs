//! Subspaces of GF(p)^d and their entropies.
//!
//! The entropy of a family of subspaces is the dimension of their sum. Mutual
//! information and conditional quantities are always derived from joint
//! entropies; intersections are only materialized by [`Subspace::intersection`],
//! which exists as an independent cross-check.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::gf::{LinalgError, MatrixGf, PrimeField, RowReducer};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntropyError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` assigned twice")]
    DuplicateVariable(String),
    #[error("subspace lives in {got_field}^{got_dim}, assignment is over {field}^{dim}")]
    AmbientMismatch {
        field: PrimeField,
        dim: usize,
        got_field: PrimeField,
        got_dim: usize,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A subspace of GF(p)^d, stored as the canonical RREF basis of its row space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    basis: MatrixGf,
}

impl Subspace {
    /// The zero space `O`.
    pub fn zero(field: PrimeField, ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: MatrixGf::zeros(field, 0, ambient_dim),
        }
    }

    pub fn span<V: AsRef<[i64]>>(
        field: PrimeField,
        ambient_dim: usize,
        vectors: &[V],
    ) -> Result<Self, LinalgError> {
        let m = MatrixGf::from_rows(field, ambient_dim, vectors)?;
        Ok(Self::row_space(&m))
    }

    pub fn row_space(m: &MatrixGf) -> Self {
        let r = m.rref();
        Self {
            ambient_dim: m.cols(),
            basis: r.reduced.truncate_rows(r.rank),
        }
    }

    /// `<e_i>` for a 0-based coordinate `i`.
    pub fn coordinate_line(field: PrimeField, ambient_dim: usize, i: usize) -> Self {
        let mut m = MatrixGf::zeros(field, 1, ambient_dim);
        m.set(0, i, 1);
        Self {
            ambient_dim,
            basis: m,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.basis.field()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &MatrixGf {
        &self.basis
    }

    pub fn basis_rows(&self) -> Vec<Vec<u32>> {
        self.basis.row_iter().map(<[u32]>::to_vec).collect()
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        let mut acc = RowReducer::new(self.field(), self.ambient_dim);
        for row in self.basis.row_iter() {
            acc.insert(row);
        }
        !acc.insert(v)
    }

    /// Intersection by the Zassenhaus algorithm: reduce `[[A, A], [B, 0]]`;
    /// rows whose left half vanishes span `A ∩ B` in their right half.
    pub fn intersection(&self, other: &Subspace) -> Result<Subspace, EntropyError> {
        self.check_same_space(other)?;
        let d = self.ambient_dim;
        let f = self.field();
        let mut z = MatrixGf::zeros(f, self.dim() + other.dim(), 2 * d);
        for (i, row) in self.basis.row_iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                z.set(i, c, x);
                z.set(i, d + c, x);
            }
        }
        for (i, row) in other.basis.row_iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                z.set(self.dim() + i, c, x);
            }
        }
        let r = z.rref().reduced;
        let rows: Vec<Vec<i64>> = (0..r.rows())
            .map(|i| r.row(i))
            .filter(|row| row[..d].iter().all(|&x| x == 0) && row[d..].iter().any(|&x| x != 0))
            .map(|row| row[d..].iter().map(|&x| x as i64).collect())
            .collect();
        Ok(Subspace::span(f, d, &rows)?)
    }

    fn check_same_space(&self, other: &Subspace) -> Result<(), EntropyError> {
        if self.field() != other.field() || self.ambient_dim != other.ambient_dim {
            return Err(EntropyError::AmbientMismatch {
                field: self.field(),
                dim: self.ambient_dim,
                got_field: other.field(),
                got_dim: other.ambient_dim,
            });
        }
        Ok(())
    }
}

/// Joint dimension of a family of subspaces, with early exit once the span
/// fills the ambient space.
pub fn span_dim<'a>(
    spaces: impl IntoIterator<Item = &'a Subspace>,
    reducer: &mut RowReducer,
) -> usize {
    debug_assert!(reducer.rank() == 0);
    'outer: for s in spaces {
        for row in s.basis.row_iter() {
            if reducer.is_full() {
                break 'outer;
            }
            reducer.insert(row);
        }
    }
    reducer.rank()
}

/// A tuple of named subspaces sharing one ambient space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    field: PrimeField,
    ambient_dim: usize,
    vars: BTreeMap<String, Subspace>,
}

impl Assignment {
    pub fn new(field: PrimeField, ambient_dim: usize) -> Self {
        Self {
            field,
            ambient_dim,
            vars: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, space: Subspace) -> Result<(), EntropyError> {
        let name = name.into();
        if space.field() != self.field || space.ambient_dim != self.ambient_dim {
            return Err(EntropyError::AmbientMismatch {
                field: self.field,
                dim: self.ambient_dim,
                got_field: space.field(),
                got_dim: space.ambient_dim,
            });
        }
        if self.vars.contains_key(&name) {
            return Err(EntropyError::DuplicateVariable(name));
        }
        self.vars.insert(name, space);
        Ok(())
    }

    /// Replaces (or adds) a variable.
    pub fn set(&mut self, name: impl Into<String>, space: Subspace) -> Result<(), EntropyError> {
        let name = name.into();
        self.vars.remove(&name);
        self.insert(name, space)
    }

    pub fn with(mut self, name: impl Into<String>, space: Subspace) -> Result<Self, EntropyError> {
        self.insert(name, space)?;
        Ok(self)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn get(&self, name: &str) -> Result<&Subspace, EntropyError> {
        self.vars
            .get(name)
            .ok_or_else(|| EntropyError::UnknownVariable(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Subspace)> {
        self.vars.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// `H(vars) = dim(sum of the named subspaces)`; the empty set has entropy 0.
    pub fn joint_entropy<S: AsRef<str>>(&self, vars: &[S]) -> Result<usize, EntropyError> {
        let spaces = vars
            .iter()
            .map(|v| self.get(v.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        let mut reducer = RowReducer::new(self.field, self.ambient_dim);
        Ok(span_dim(spaces, &mut reducer))
    }
}

fn union<'a, S: AsRef<str>>(parts: &[&'a [S]]) -> Vec<&'a str> {
    let mut out: Vec<&str> = parts
        .iter()
        .flat_map(|p| p.iter().map(AsRef::as_ref))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Entropy queries against one assignment, memoized by variable set.
pub struct EntropyCache<'a> {
    assignment: &'a Assignment,
    cache: HashMap<Vec<String>, usize>,
    reducer: RowReducer,
}

impl<'a> EntropyCache<'a> {
    pub fn new(assignment: &'a Assignment) -> Self {
        Self {
            assignment,
            cache: HashMap::new(),
            reducer: RowReducer::new(assignment.field, assignment.ambient_dim),
        }
    }

    pub fn h<S: AsRef<str>>(&mut self, vars: &[S]) -> Result<usize, EntropyError> {
        let mut key: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        key.sort_unstable();
        key.dedup();
        if let Some(&v) = self.cache.get(&key) {
            return Ok(v);
        }
        let spaces = key
            .iter()
            .map(|v| self.assignment.get(v))
            .collect::<Result<Vec<_>, _>>()?;
        self.reducer.clear();
        let v = span_dim(spaces, &mut self.reducer);
        self.cache.insert(key, v);
        Ok(v)
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    /// `I(S;T) = H(S) + H(T) - H(S ∪ T)`
    pub fn mutual_info<S: AsRef<str>>(&mut self, s: &[S], t: &[S]) -> Result<i64, EntropyError> {
        let st = union(&[s, t]);
        Ok(self.h(s)? as i64 + self.h(t)? as i64 - self.h(&st)? as i64)
    }

    /// `H(S|T) = H(S ∪ T) - H(T)`
    pub fn cond_entropy<S: AsRef<str>>(&mut self, s: &[S], t: &[S]) -> Result<i64, EntropyError> {
        let st = union(&[s, t]);
        Ok(self.h(&st)? as i64 - self.h(t)? as i64)
    }

    /// `I(S;T|U) = H(S ∪ U) + H(T ∪ U) - H(S ∪ T ∪ U) - H(U)`
    pub fn cond_mutual_info<S: AsRef<str>>(
        &mut self,
        s: &[S],
        t: &[S],
        u: &[S],
    ) -> Result<i64, EntropyError> {
        let su = union(&[s, u]);
        let tu = union(&[t, u]);
        let stu = union(&[s, t, u]);
        Ok(self.h(&su)? as i64 + self.h(&tu)? as i64 - self.h(&stu)? as i64 - self.h(u)? as i64)
    }
}

pub fn joint_entropy<S: AsRef<str>>(a: &Assignment, vars: &[S]) -> Result<usize, EntropyError> {
    a.joint_entropy(vars)
}

pub fn mutual_info<S: AsRef<str>>(a: &Assignment, s: &[S], t: &[S]) -> Result<i64, EntropyError> {
    EntropyCache::new(a).mutual_info(s, t)
}

pub fn cond_entropy<S: AsRef<str>>(a: &Assignment, s: &[S], t: &[S]) -> Result<i64, EntropyError> {
    EntropyCache::new(a).cond_entropy(s, t)
}

pub fn cond_mutual_info<S: AsRef<str>>(
    a: &Assignment,
    s: &[S],
    t: &[S],
    u: &[S],
) -> Result<i64, EntropyError> {
    EntropyCache::new(a).cond_mutual_info(s, t, u)
}

/// Number of subspaces of GF(p)^d (sum of Gaussian binomials), saturating.
pub fn subspace_count(p: u32, d: usize) -> u128 {
    // [d choose k]_p via the recurrence [d,k] = [d-1,k-1] + p^k [d-1,k]
    let mut row = vec![1u128];
    for n in 1..=d {
        let mut next = vec![1u128; n + 1];
        for k in 1..n {
            let pk = (p as u128).saturating_pow(k as u32);
            next[k] = row[k - 1].saturating_add(pk.saturating_mul(row[k]));
        }
        row = next;
    }
    row.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

/// Every subspace of GF(p)^d, enumerated through its RREF basis: choose a pivot
/// set, then fill each free position (right of the row's pivot, off the other
/// pivot columns) with every residue.
pub fn all_subspaces(field: PrimeField, d: usize) -> Vec<Subspace> {
    let p = field.p();
    let mut out = Vec::new();
    for k in 0..=d {
        for pivots in combinations(d, k) {
            let free: Vec<(usize, usize)> = pivots
                .iter()
                .enumerate()
                .flat_map(|(r, &pc)| {
                    let pivots = &pivots;
                    (pc + 1..d)
                        .filter(move |c| !pivots.contains(c))
                        .map(move |c| (r, c))
                })
                .collect();
            let mut digits = vec![0u32; free.len()];
            loop {
                let mut m = MatrixGf::zeros(field, k, d);
                for (r, &pc) in pivots.iter().enumerate() {
                    m.set(r, pc, 1);
                }
                for (&(r, c), &x) in free.iter().zip(&digits) {
                    m.set(r, c, x);
                }
                out.push(Subspace {
                    ambient_dim: d,
                    basis: m,
                });
                // odometer
                let mut i = 0;
                while i < digits.len() {
                    digits[i] += 1;
                    if digits[i] < p {
                        break;
                    }
                    digits[i] = 0;
                    i += 1;
                }
                if i == digits.len() {
                    break;
                }
            }
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}
