//! Empirical verification and refutation of rank inequalities.
//!
//! Every trial draws its subspaces from a ChaCha stream keyed by the policy
//! seed with the trial index as stream id, so a report depends only on
//! (inequality, field, policy) and never on how trials were scheduled.

use std::collections::BTreeMap;
use std::time::Instant;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{Execution, Merge};
use crate::expr::{rational_json, CompiledExpr, Rational, TaggedInequality};
use crate::generator::{a_var, b_var, C_VAR};
use crate::gf::{LinalgError, MatrixGf, PrimeField, RowReducer};
use crate::guide::GuideMatrix;
use crate::subspace::{all_subspaces, subspace_count, Assignment, EntropyError, Subspace};

/// Largest number of assignments [`exhaustive_verify`] enumerates by default.
pub const DEFAULT_EXHAUSTIVE_CAP: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid sampling policy: {0}")]
    InvalidPolicy(String),
    #[error("exhaustive check needs {cardinality} assignments, cap is {cap}")]
    CapExceeded { cardinality: u128, cap: u128 },
    #[error("malformed witness: {0}")]
    BadWitness(String),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

impl From<LinalgError> for VerifyError {
    fn from(e: LinalgError) -> Self {
        VerifyError::Entropy(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPolicy {
    pub ambient_dim: usize,
    pub max_subspace_dim: usize,
    pub trials: u64,
    pub seed: u64,
}

impl SamplingPolicy {
    pub fn new(
        ambient_dim: usize,
        max_subspace_dim: usize,
        trials: u64,
        seed: u64,
    ) -> Result<Self, VerifyError> {
        let p = Self {
            ambient_dim,
            max_subspace_dim,
            trials,
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        if self.ambient_dim == 0 {
            return Err(VerifyError::InvalidPolicy(
                "ambient dimension must be >= 1".into(),
            ));
        }
        if self.max_subspace_dim > self.ambient_dim {
            return Err(VerifyError::InvalidPolicy(format!(
                "max subspace dimension {} exceeds ambient dimension {}",
                self.max_subspace_dim, self.ambient_dim
            )));
        }
        if self.trials == 0 {
            return Err(VerifyError::InvalidPolicy(
                "trial count must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Draws a target dimension `k` uniformly from `0..=max_dim`, then spans `k`
/// uniformly random vectors (the span may come out smaller than `k`).
pub fn random_subspace<R: Rng + ?Sized>(
    field: PrimeField,
    d: usize,
    max_dim: usize,
    rng: &mut R,
) -> Subspace {
    assert!(
        max_dim <= d,
        "max_dim must not exceed the ambient dimension"
    );
    let k = rng.gen_range(0..=max_dim);
    let p = field.p();
    let data: Vec<u32> = (0..k * d).map(|_| rng.gen_range(0..p)).collect();
    let m = MatrixGf::from_residues(field, k, d, data).expect("shape matches");
    Subspace::row_space(&m)
}

/// The RNG used for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// A concrete assignment with its slack; reloadable from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub field: u32,
    pub ambient_dim: usize,
    /// Basis rows (RREF) of each variable's subspace.
    pub vars: BTreeMap<String, Vec<Vec<u32>>>,
    #[serde(with = "rational_json")]
    pub slack: Rational,
}

impl Witness {
    pub fn from_assignment(a: &Assignment, slack: Rational) -> Self {
        Self {
            field: a.field().p(),
            ambient_dim: a.ambient_dim(),
            vars: a
                .iter()
                .map(|(k, s)| (k.to_string(), s.basis_rows()))
                .collect(),
            slack,
        }
    }

    fn from_spaces(
        field: PrimeField,
        d: usize,
        names: &[String],
        spaces: &[Subspace],
        slack: Rational,
    ) -> Self {
        Self {
            field: field.p(),
            ambient_dim: d,
            vars: names
                .iter()
                .zip(spaces)
                .map(|(n, s)| (n.clone(), s.basis_rows()))
                .collect(),
            slack,
        }
    }

    pub fn assignment(&self) -> Result<Assignment, VerifyError> {
        let field = PrimeField::new(self.field as u64)?;
        let mut a = Assignment::new(field, self.ambient_dim);
        for (name, rows) in &self.vars {
            let rows: Vec<Vec<i64>> = rows
                .iter()
                .map(|r| r.iter().map(|&x| x as i64).collect())
                .collect();
            let s = Subspace::span(field, self.ambient_dim, &rows)
                .map_err(|e| VerifyError::BadWitness(format!("variable `{name}`: {e}")))?;
            a.insert(name.clone(), s)?;
        }
        Ok(a)
    }

    /// Slack of `ineq` on the stored assignment.
    pub fn reevaluate(&self, ineq: &TaggedInequality) -> Result<Rational, VerifyError> {
        Ok(ineq.expr.evaluate(&self.assignment()?)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, VerifyError> {
        serde_json::from_str(text).map_err(|e| VerifyError::BadWitness(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub trial: u64,
    pub witness: Witness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    Sampled,
    Exhaustive,
}

/// Echo of what was run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub inequality: String,
    pub mode: CheckMode,
    pub primes: Vec<u32>,
    pub ambient_dim: usize,
    pub max_subspace_dim: usize,
    pub pinned_zero: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub config: ReportConfig,
    pub seed: Option<u64>,
    pub trials: u64,
    #[serde(with = "rational_json")]
    pub min_slack: Rational,
    /// Sorted by trial index; every slack is negative.
    pub violations: Vec<Violation>,
    pub elapsed_ms: f64,
}

impl TrialReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// JSON without timing fields; identical across runs with equal inputs.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("serializable");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("elapsed_ms");
        }
        serde_json::to_string_pretty(&v).expect("serializable")
    }

    pub fn summary(&self) -> String {
        format!(
            "{} over GF({}) d={} max_dim={}: {} trials, {} violations, min slack {} (seed {}, {:.1} ms)",
            self.config.inequality,
            self.config
                .primes
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(","),
            self.config.ambient_dim,
            self.config.max_subspace_dim,
            self.trials,
            self.violations.len(),
            self.min_slack,
            self.seed.map_or_else(|| "n/a".to_string(), |s| s.to_string()),
            self.elapsed_ms
        )
    }
}

#[derive(Debug, Default)]
struct Tally {
    min_slack: Option<Rational>,
    violations: Vec<Violation>,
}

impl Tally {
    fn record(&mut self, trial: u64, slack: Rational, witness: impl FnOnce(Rational) -> Witness) {
        if self.min_slack.as_ref().is_none_or(|m| &slack < m) {
            self.min_slack = Some(slack.clone());
        }
        if slack.is_negative() {
            self.violations.push(Violation {
                trial,
                witness: witness(slack),
            });
        }
    }
}

impl Merge for Tally {
    fn merge(mut self, other: Self) -> Self {
        self.min_slack = match (self.min_slack, other.min_slack) {
            (Some(a), Some(b)) => Some(if b < a { b } else { a }),
            (a, b) => a.or(b),
        };
        self.violations.extend(other.violations);
        self.violations.sort_by_key(|v| v.trial);
        self
    }
}

struct Scratch {
    reducer: RowReducer,
    spaces: Vec<Subspace>,
}

fn compile(ineq: &TaggedInequality) -> Result<CompiledExpr, VerifyError> {
    ineq.expr.compile(&ineq.variables).map_err(|e| match e {
        EntropyError::UnknownVariable(v) => VerifyError::UnknownVariable(v),
        other => other.into(),
    })
}

/// Random trials over one or more fields, with some variables pinned to `O`.
/// Trial `g` uses field `g / policy.trials` and stream `g % policy.trials`.
fn sample_trials(
    ineq: &TaggedInequality,
    fields: &[PrimeField],
    policy: &SamplingPolicy,
    pinned: &[String],
    exec: Execution,
) -> Result<TrialReport, VerifyError> {
    policy.validate()?;
    for v in pinned {
        if !ineq.variables.contains(v) {
            return Err(VerifyError::UnknownVariable(v.clone()));
        }
    }
    let compiled = compile(ineq)?;
    let names = &ineq.variables;
    let is_pinned: Vec<bool> = names.iter().map(|n| pinned.contains(n)).collect();
    let d = policy.ambient_dim;
    let start = Instant::now();
    let total = policy.trials * fields.len() as u64;

    let tally: Tally = exec.fold(
        total,
        || Scratch {
            reducer: RowReducer::new(fields[0], d),
            spaces: Vec::with_capacity(names.len()),
        },
        |scratch: &mut Scratch, tally: &mut Tally, g| {
            let field = fields[(g / policy.trials) as usize];
            let mut rng = trial_rng(policy.seed, g % policy.trials);
            scratch.spaces.clear();
            for &pin in &is_pinned {
                scratch.spaces.push(if pin {
                    Subspace::zero(field, d)
                } else {
                    random_subspace(field, d, policy.max_subspace_dim, &mut rng)
                });
            }
            if scratch.reducer_field() != field {
                scratch.reducer = RowReducer::new(field, d);
            }
            let slack = compiled.evaluate(&scratch.spaces, &mut scratch.reducer);
            tally.record(g, slack, |s| {
                Witness::from_spaces(field, d, names, &scratch.spaces, s)
            });
        },
    );

    Ok(TrialReport {
        config: ReportConfig {
            inequality: ineq.label(),
            mode: CheckMode::Sampled,
            primes: fields.iter().map(|f| f.p()).collect(),
            ambient_dim: d,
            max_subspace_dim: policy.max_subspace_dim,
            pinned_zero: pinned.to_vec(),
        },
        seed: Some(policy.seed),
        trials: total,
        min_slack: tally.min_slack.unwrap_or_else(Rational::zero),
        violations: tally.violations,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

impl Scratch {
    fn reducer_field(&self) -> PrimeField {
        self.reducer.field()
    }
}

/// Evaluates the slack on `policy.trials` independent random assignments.
pub fn sample_verify(
    ineq: &TaggedInequality,
    field: PrimeField,
    policy: &SamplingPolicy,
    exec: Execution,
) -> Result<TrialReport, VerifyError> {
    sample_trials(ineq, &[field], policy, &[], exec)
}

/// Pins `var` to the zero space and samples the rest over every listed field.
pub fn zeroed_variable_check(
    ineq: &TaggedInequality,
    var: &str,
    fields: &[PrimeField],
    policy: &SamplingPolicy,
    exec: Execution,
) -> Result<TrialReport, VerifyError> {
    if fields.is_empty() {
        return Err(VerifyError::InvalidPolicy("no fields given".into()));
    }
    sample_trials(ineq, fields, policy, &[var.to_string()], exec)
}

/// Checks every assignment of subspaces of GF(p)^d to the variables.
pub fn exhaustive_verify(
    ineq: &TaggedInequality,
    field: PrimeField,
    d: usize,
    cap: u128,
    exec: Execution,
) -> Result<TrialReport, VerifyError> {
    let compiled = compile(ineq)?;
    let names = &ineq.variables;
    let per_var = subspace_count(field.p(), d);
    let cardinality = (0..names.len()).try_fold(1u128, |acc, _| acc.checked_mul(per_var));
    let total = match cardinality {
        Some(c) if c <= cap => c as u64,
        other => {
            return Err(VerifyError::CapExceeded {
                cardinality: other.unwrap_or(u128::MAX),
                cap,
            })
        }
    };
    let all = all_subspaces(field, d);
    let base = all.len() as u64;
    let start = Instant::now();

    let tally: Tally = exec.fold(
        total,
        || Scratch {
            reducer: RowReducer::new(field, d),
            spaces: Vec::with_capacity(names.len()),
        },
        |scratch: &mut Scratch, tally: &mut Tally, idx| {
            scratch.spaces.clear();
            let mut rest = idx;
            for _ in 0..names.len() {
                scratch.spaces.push(all[(rest % base) as usize].clone());
                rest /= base;
            }
            let slack = compiled.evaluate(&scratch.spaces, &mut scratch.reducer);
            tally.record(idx, slack, |s| {
                Witness::from_spaces(field, d, names, &scratch.spaces, s)
            });
        },
    );

    Ok(TrialReport {
        config: ReportConfig {
            inequality: ineq.label(),
            mode: CheckMode::Exhaustive,
            primes: vec![field.p()],
            ambient_dim: d,
            max_subspace_dim: d,
            pinned_zero: Vec::new(),
        },
        seed: None,
        trials: total,
        min_slack: tally.min_slack.unwrap_or_else(Rational::zero),
        violations: tally.violations,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// The standard configuration in GF(p)^n for a guide with `n` rows:
/// `A_i = <e_i>`, `B_k = <e_{S_k}>` for each proper column, `C = <1,...,1>`.
pub fn canonical_assignment(g: &GuideMatrix, field: PrimeField) -> Assignment {
    let n = g.n_rows();
    let mut a = Assignment::new(field, n);
    for i in 1..=n {
        a.insert(a_var(i), Subspace::coordinate_line(field, n, i - 1))
            .expect("fresh name");
    }
    for k in g.classify_columns().b_prime {
        let v: Vec<i64> = (1..=n).map(|r| g.support(k).contains(&r) as i64).collect();
        a.insert(b_var(k), Subspace::span(field, n, &[v]).expect("length n"))
            .expect("fresh name");
    }
    a.insert(
        C_VAR,
        Subspace::span(field, n, &[vec![1i64; n]]).expect("length n"),
    )
    .expect("fresh name");
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefuteBudget {
    /// Random assignments tried after the canonical one.
    pub trials: u64,
    pub ambient_dim: usize,
    pub max_subspace_dim: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WitnessSource {
    Canonical,
    Random { trial: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refutation {
    pub source: WitnessSource,
    pub witness: Witness,
}

#[derive(Debug, Default)]
struct FirstViolation(Option<(u64, Witness)>);

impl Merge for FirstViolation {
    fn merge(self, other: Self) -> Self {
        match (self.0, other.0) {
            (Some(a), Some(b)) => FirstViolation(Some(if b.0 < a.0 { b } else { a })),
            (a, b) => FirstViolation(a.or(b)),
        }
    }
}

/// Looks for an assignment with negative slack: the canonical configuration
/// of `guide` first (when it covers the inequality's variables), then random
/// search. Returns the first witness found, or `None`.
pub fn refute(
    ineq: &TaggedInequality,
    guide: Option<&GuideMatrix>,
    field: PrimeField,
    budget: &RefuteBudget,
    exec: Execution,
) -> Result<Option<Refutation>, VerifyError> {
    if let Some(g) = guide {
        let canon = canonical_assignment(g, field);
        if ineq.variables.iter().all(|v| canon.get(v).is_ok()) {
            let slack = ineq.expr.evaluate(&canon)?;
            if slack.is_negative() {
                return Ok(Some(Refutation {
                    source: WitnessSource::Canonical,
                    witness: Witness::from_assignment(&canon, slack),
                }));
            }
        }
    }
    if budget.trials == 0 {
        return Ok(None);
    }
    let policy = SamplingPolicy::new(
        budget.ambient_dim,
        budget.max_subspace_dim,
        budget.trials,
        budget.seed,
    )?;
    let compiled = compile(ineq)?;
    let names = &ineq.variables;
    let d = policy.ambient_dim;
    let found: FirstViolation = exec.fold(
        policy.trials,
        || Scratch {
            reducer: RowReducer::new(field, d),
            spaces: Vec::with_capacity(names.len()),
        },
        |scratch: &mut Scratch, best: &mut FirstViolation, trial| {
            if best.0.as_ref().is_some_and(|(t, _)| *t < trial) {
                return;
            }
            let mut rng = trial_rng(policy.seed, trial);
            scratch.spaces.clear();
            for _ in names {
                scratch
                    .spaces
                    .push(random_subspace(field, d, policy.max_subspace_dim, &mut rng));
            }
            let slack = compiled.evaluate(&scratch.spaces, &mut scratch.reducer);
            if slack.is_negative() {
                best.0 = Some((
                    trial,
                    Witness::from_spaces(field, d, names, &scratch.spaces, slack),
                ));
            }
        },
    );
    Ok(found.0.map(|(trial, witness)| Refutation {
        source: WitnessSource::Random { trial },
        witness,
    }))
}
