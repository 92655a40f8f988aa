//! Binary guide matrices.
//!
//! A guide is an `n x m` 0/1 matrix stored column-wise as supports
//! `S_i ⊆ {1..n}` together with the divisor parameter `t`. Its rank must be
//! `m` over characteristics not dividing `t` and `m - 1` otherwise; that rank
//! profile is what the generated inequalities encode.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::gf::{LinalgError, MatrixGf, PrimeField};
use crate::subspace::Subspace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GuideError {
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("invalid guide: {0}")]
    Invalid(String),
    #[error("guide file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Admissible `t` for the example family in `n` variables:
/// `2 <= t <= floor((n-1)/2) - 1`. Empty for `n < 7`.
pub fn admissible_t(n: usize) -> std::ops::RangeInclusive<u64> {
    let hi = ((n.saturating_sub(1)) / 2) as u64;
    2..=hi.saturating_sub(1)
}

/// `M(n,t) = n - t - 2` after checking the parameter window.
pub fn family_size(n: usize, t: u64) -> Result<usize, GuideError> {
    if n < 7 {
        return Err(GuideError::ParamOutOfRange(format!(
            "n = {n}, but the family needs n >= 7"
        )));
    }
    let window = admissible_t(n);
    if !window.contains(&t) {
        return Err(GuideError::ParamOutOfRange(format!(
            "t = {t}, but n = {n} requires 2 <= t <= floor((n-1)/2) - 1 = {}",
            window.end()
        )));
    }
    Ok(n - t as usize - 2)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GuideMatrix {
    n_rows: usize,
    columns: Vec<BTreeSet<usize>>,
    t: u64,
}

/// Column numbers (1-based) grouped by support size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnClasses {
    /// `1 < |S| < n`
    pub b_prime: Vec<usize>,
    /// `|S| = 1`
    pub b_dprime: Vec<usize>,
    /// Some column has `|S| = n`.
    pub b_tprime: bool,
    /// The columns with `|S| = n` (they carry no variable of their own).
    pub full: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankProfileRow {
    pub p: u32,
    pub expected: usize,
    pub actual: usize,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankProfileReport {
    pub rows: Vec<RankProfileRow>,
}

impl RankProfileReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.matches)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectionRank {
    pub lhs: usize,
    pub rhs: usize,
    pub matches: bool,
}

impl GuideMatrix {
    /// `columns[i]` is the 1-based support of column `i+1`.
    pub fn new(n_rows: usize, columns: Vec<BTreeSet<usize>>, t: u64) -> Result<Self, GuideError> {
        if t < 2 {
            return Err(GuideError::ParamOutOfRange(format!(
                "t = {t}, must be >= 2"
            )));
        }
        if columns.len() > n_rows {
            return Err(GuideError::Invalid(format!(
                "{} columns but only {n_rows} rows (need m <= n)",
                columns.len()
            )));
        }
        for (i, s) in columns.iter().enumerate() {
            if s.is_empty() {
                return Err(GuideError::Invalid(format!(
                    "column {} has empty support",
                    i + 1
                )));
            }
            if let Some(&bad) = s.iter().find(|&&r| r == 0 || r > n_rows) {
                return Err(GuideError::Invalid(format!(
                    "column {} uses row {bad}, outside 1..={n_rows}",
                    i + 1
                )));
            }
        }
        Ok(Self { n_rows, columns, t })
    }

    /// The square `M x M` guide of the `(n, t)` example family, `M = n - t - 2`:
    /// columns `1..=t+1` have support `[M] - {i}`, the rest are `{i}`.
    pub fn example(n: usize, t: u64) -> Result<Self, GuideError> {
        let m = family_size(n, t)?;
        let t1 = t as usize + 1;
        let columns = (1..=m)
            .map(|i| {
                if i <= t1 {
                    (1..=m).filter(|&r| r != i).collect()
                } else {
                    BTreeSet::from([i])
                }
            })
            .collect();
        Self::new(m, columns, t)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn with_t(&self, t: u64) -> Result<Self, GuideError> {
        Self::new(self.n_rows, self.columns.clone(), t)
    }

    /// Support of 1-based column `col`.
    pub fn support(&self, col: usize) -> &BTreeSet<usize> {
        &self.columns[col - 1]
    }

    pub fn supports(&self) -> &[BTreeSet<usize>] {
        &self.columns
    }

    pub fn classify_columns(&self) -> ColumnClasses {
        let mut c = ColumnClasses {
            b_prime: Vec::new(),
            b_dprime: Vec::new(),
            b_tprime: false,
            full: Vec::new(),
        };
        for (i, s) in self.columns.iter().enumerate() {
            match s.len() {
                1 => c.b_dprime.push(i + 1),
                k if k == self.n_rows => c.full.push(i + 1),
                _ => c.b_prime.push(i + 1),
            }
        }
        c.b_tprime = !c.full.is_empty();
        c
    }

    /// The `n x m` 0/1 matrix over GF(p), columns `e_{S_i}`.
    pub fn to_matrix(&self, field: PrimeField) -> MatrixGf {
        let mut m = MatrixGf::zeros(field, self.n_rows, self.columns.len());
        for (c, s) in self.columns.iter().enumerate() {
            for &r in s {
                m.set(r - 1, c, 1);
            }
        }
        m
    }

    pub fn rank_over(&self, field: PrimeField) -> usize {
        self.to_matrix(field).rank()
    }

    /// `m - 1` when `p | t`, else `m`.
    pub fn expected_rank(&self, p: u32) -> usize {
        let m = self.columns.len();
        if self.t.is_multiple_of(p as u64) {
            m.saturating_sub(1)
        } else {
            m
        }
    }

    pub fn check_rank_profile(&self, primes: &[PrimeField]) -> RankProfileReport {
        RankProfileReport {
            rows: primes
                .iter()
                .map(|&f| {
                    let expected = self.expected_rank(f.p());
                    let actual = self.rank_over(f);
                    RankProfileRow {
                        p: f.p(),
                        expected,
                        actual,
                        matches: expected == actual,
                    }
                })
                .collect(),
        }
    }

    /// Rank through the projection picture: materialize `π_{S_j}(c)` for the
    /// all-ones vector `c` in GF(p)^n as row vectors and take the dimension of
    /// their span, then compare against the value the rank hypothesis predicts.
    pub fn projection_rank_identity(&self, field: PrimeField) -> ProjectionRank {
        let c = vec![1i64; self.n_rows];
        let projections: Vec<Vec<i64>> = self
            .columns
            .iter()
            .map(|s| {
                c.iter()
                    .enumerate()
                    .map(|(i, &x)| if s.contains(&(i + 1)) { x } else { 0 })
                    .collect()
            })
            .collect();
        let lhs = Subspace::span(field, self.n_rows, &projections)
            .expect("projection vectors have length n")
            .dim();
        let rhs = self.expected_rank(field.p());
        ProjectionRank {
            lhs,
            rhs,
            matches: lhs == rhs,
        }
    }

    /// Text form: `n m t`, then one line of `n` binary digits per column.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n_rows, self.columns.len(), self.t);
        for s in &self.columns {
            for r in 1..=self.n_rows {
                out.push(if s.contains(&r) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text form. Digits on a column line may be separated by
    /// whitespace; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, GuideError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(GuideError::Parse {
            line: 1,
            message: "empty guide file".into(),
        })?;
        let nums: Vec<&str> = header.split_whitespace().collect();
        let parse_num = |s: &str| {
            s.parse::<u64>().map_err(|_| GuideError::Parse {
                line: hline,
                message: format!("`{s}` is not a non-negative integer"),
            })
        };
        if nums.len() != 3 {
            return Err(GuideError::Parse {
                line: hline,
                message: format!("header must be `n m t`, got `{header}`"),
            });
        }
        let (n, m, t) = (
            parse_num(nums[0])? as usize,
            parse_num(nums[1])? as usize,
            parse_num(nums[2])?,
        );
        let mut columns = Vec::with_capacity(m);
        for (line, body) in lines.by_ref() {
            let digits: String = body.chars().filter(|c| !c.is_whitespace()).collect();
            if digits.len() != n {
                return Err(GuideError::Parse {
                    line,
                    message: format!("expected {n} entries, found {}", digits.len()),
                });
            }
            let mut support = BTreeSet::new();
            for (i, ch) in digits.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => {
                        support.insert(i + 1);
                    }
                    other => {
                        return Err(GuideError::Parse {
                            line,
                            message: format!("non-binary entry `{other}`"),
                        })
                    }
                }
            }
            columns.push(support);
            if columns.len() == m {
                break;
            }
        }
        if let Some((line, _)) = lines.next() {
            return Err(GuideError::Parse {
                line,
                message: format!("more than the declared {m} column lines"),
            });
        }
        if columns.len() != m {
            return Err(GuideError::Parse {
                line: hline,
                message: format!("header declares {m} columns, found {}", columns.len()),
            });
        }
        Self::new(n, columns, t)
    }

    /// Renders the guide row by row, one column per character.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        for r in 1..=self.n_rows {
            for s in &self.columns {
                out.push(if s.contains(&r) { '1' } else { '0' });
                out.push(' ');
            }
            out.pop();
            let _ = writeln!(out);
        }
        out
    }
}
