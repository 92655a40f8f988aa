//! Bundled self-checks used by `rankineq selftest`.

use std::fmt;

use num_traits::Signed;

use crate::exec::Execution;
use crate::expr::{rat, NablaMode, Rational, TaggedInequality};
use crate::generator::{
    count_independent, gen_example_a, gen_example_b, gen_family, gen_theorem_i, gen_theorem_ii,
    ingleton, Admissibility,
};
use crate::gf::PrimeField;
use crate::guide::{admissible_t, GuideMatrix};
use crate::verifier::{
    canonical_assignment, exhaustive_verify, sample_verify, SamplingPolicy, DEFAULT_EXHAUSTIVE_CAP,
};

pub const PRIMES: [u32; 6] = [2, 3, 5, 7, 11, 13];

/// Expected rank of the `(n, t)` guide over GF(p), given `(n, t, p)`.
pub type ExpectedRank = fn(usize, u64, u32) -> usize;

/// `M - 1` when `p | t`, else `M`, with `M = n - t - 2`.
pub fn profile_expected_rank(n: usize, t: u64, p: u32) -> usize {
    let m = n - t as usize - 2;
    if t.is_multiple_of(p as u64) {
        m - 1
    } else {
        m
    }
}

#[derive(Debug, Clone)]
pub struct SelftestConfig {
    /// Skip the sampling and exhaustive checks.
    pub quick: bool,
    pub expected_rank: ExpectedRank,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            quick: false,
            expected_rank: profile_expected_rank,
            seed: 0x5eed,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

fn outcome(name: &str, failures: Vec<String>, ok: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            ok
        } else {
            failures.join("; ")
        },
    }
}

fn field(p: u32) -> PrimeField {
    PrimeField::new(p as u64).expect("listed primes are prime")
}

fn rank_profiles(cfg: &SelftestConfig, max_n: usize) -> CheckOutcome {
    let mut failures = Vec::new();
    let mut cells = 0;
    for n in 7..=max_n {
        for t in admissible_t(n) {
            let g = GuideMatrix::example(n, t).expect("admissible");
            for p in PRIMES {
                cells += 1;
                let actual = g.rank_over(field(p));
                let expected = (cfg.expected_rank)(n, t, p);
                if actual != expected {
                    failures.push(format!(
                        "(n={n}, t={t}, p={p}): expected {expected}, actual {actual}"
                    ));
                }
            }
        }
    }
    outcome(
        "rank profiles",
        failures,
        format!("{cells} (n,t,p) cells match"),
    )
}

fn canonical_slacks() -> CheckOutcome {
    let mut failures = Vec::new();
    let g = GuideMatrix::example(7, 2).expect("admissible");
    let a = gen_example_a(7, 2).expect("admissible");
    let b = gen_example_b(7, 2).expect("admissible");
    let cases: [(&str, &TaggedInequality, u32, Rational); 4] = [
        ("a", &a, 3, rat(-1, 1)),
        ("a", &a, 2, rat(0, 1)),
        ("b", &b, 2, rat(-1, 3)),
        ("b", &b, 3, rat(0, 1)),
    ];
    for (class, ineq, p, want) in cases {
        let got = ineq.expr.evaluate(&canonical_assignment(&g, field(p)));
        match got {
            Ok(s) if s == want => {}
            Ok(s) => failures.push(format!(
                "class {class} over GF({p}): slack {s}, expected {want}"
            )),
            Err(e) => failures.push(format!("class {class} over GF({p}): {e}")),
        }
    }
    // Refutation side for the rest of the small families.
    for n in 7..=11 {
        for t in admissible_t(n) {
            let g = GuideMatrix::example(n, t).expect("admissible");
            let a = gen_example_a(n, t).expect("admissible");
            let b = gen_example_b(n, t).expect("admissible");
            for p in PRIMES {
                let canon = canonical_assignment(&g, field(p));
                let (ineq, class) = if t % p as u64 == 0 {
                    (&b, "b")
                } else {
                    (&a, "a")
                };
                match ineq.expr.evaluate(&canon) {
                    Ok(s) if s.is_negative() => {}
                    Ok(s) => failures.push(format!(
                        "class {class} (n={n}, t={t}) not refuted over GF({p}): slack {s}"
                    )),
                    Err(e) => failures.push(e.to_string()),
                }
            }
        }
    }
    outcome(
        "canonical slacks",
        failures,
        "(7,2) slacks exact; refutations for n <= 11".into(),
    )
}

fn ingleton_baseline(cfg: &SelftestConfig, trials: u64) -> CheckOutcome {
    let ineq = ingleton();
    let mut failures = Vec::new();
    for p in [2, 3, 5] {
        let policy = SamplingPolicy::new(6, 6, trials, cfg.seed).expect("valid policy");
        match sample_verify(&ineq, field(p), &policy, cfg.exec) {
            Ok(r) if r.passed() => {}
            Ok(r) => failures.push(format!("GF({p}): {} violations", r.violations.len())),
            Err(e) => failures.push(e.to_string()),
        }
    }
    outcome(
        "ingleton baseline",
        failures,
        format!("{trials} trials per field, no violations"),
    )
}

fn counts() -> CheckOutcome {
    let mut failures = Vec::new();
    for n in 7..=25 {
        let want = 2 * ((n - 1) / 2) - 4;
        match gen_family(n) {
            Ok(f) if f.len() == want => {}
            Ok(f) => failures.push(format!(
                "n={n}: family has {} members, expected {want}",
                f.len()
            )),
            Err(e) => failures.push(e.to_string()),
        }
    }
    // n = 21: m = 8, powers of 2 up to 8 are 2, 4, 8.
    let spot = [(21, 2, 3), (21, 3, 1), (21, 5, 1), (21, 11, 0), (7, 2, 0)];
    for (n, p, want) in spot {
        let got = count_independent(n, field(p)).expect("n >= 7");
        if got != want {
            failures.push(format!(
                "independent count n={n}, p={p}: {got}, expected {want}"
            ));
        }
    }
    outcome(
        "family counts",
        failures,
        "family sizes for n in 7..=25 and independence counts".into(),
    )
}

fn theorem_matches_examples(max_n: usize) -> CheckOutcome {
    let mut failures = Vec::new();
    for n in 7..=max_n {
        for t in admissible_t(n) {
            let g = GuideMatrix::example(n, t).expect("admissible");
            let i =
                gen_theorem_i(&g, NablaMode::Interval, &Admissibility::Override).map(|x| x.expr);
            let ii =
                gen_theorem_ii(&g, NablaMode::Interval, &Admissibility::Override).map(|x| x.expr);
            let a = gen_example_a(n, t).map(|x| x.expr);
            let b = gen_example_b(n, t).map(|x| x.expr);
            if i != a {
                failures.push(format!("(i) differs from (a) at (n={n}, t={t})"));
            }
            if ii != b {
                failures.push(format!("(ii) differs from (b) at (n={n}, t={t})"));
            }
        }
    }
    outcome(
        "theorem instantiation",
        failures,
        format!("interval-mode theorem equals examples for n <= {max_n}"),
    )
}

fn validity_sampling(cfg: &SelftestConfig, trials: u64) -> CheckOutcome {
    let mut failures = Vec::new();
    for (n, t) in [(7usize, 2u64), (9, 3)] {
        let a = gen_example_a(n, t).expect("admissible");
        let b = gen_example_b(n, t).expect("admissible");
        for p in PRIMES {
            let ineq = if t % p as u64 == 0 { &a } else { &b };
            let policy = SamplingPolicy::new(n, n, trials, cfg.seed).expect("valid policy");
            match sample_verify(ineq, field(p), &policy, cfg.exec) {
                Ok(r) if r.passed() => {}
                Ok(r) => failures.push(format!(
                    "{} over GF({p}): {} violations",
                    ineq.label(),
                    r.violations.len()
                )),
                Err(e) => failures.push(e.to_string()),
            }
        }
    }
    outcome(
        "validity sampling",
        failures,
        format!("{trials} trials per cell, no violations"),
    )
}

fn exhaustive_low_dim(cfg: &SelftestConfig) -> CheckOutcome {
    let mut failures = Vec::new();
    for ineq in [gen_example_a(7, 2), gen_example_b(7, 2)] {
        let ineq = ineq.expect("admissible");
        for p in [2, 3] {
            match exhaustive_verify(&ineq, field(p), 1, DEFAULT_EXHAUSTIVE_CAP, cfg.exec) {
                Ok(r) if r.passed() && !r.min_slack.is_negative() => {}
                Ok(r) => failures.push(format!(
                    "{} over GF({p}) d=1: {} violations",
                    ineq.label(),
                    r.violations.len()
                )),
                Err(e) => failures.push(e.to_string()),
            }
        }
    }
    outcome(
        "exhaustive d=1",
        failures,
        "(7,2) classes valid at d=1 over GF(2), GF(3)".into(),
    )
}

/// Runs every check and returns one outcome per check.
pub fn run(cfg: &SelftestConfig) -> Vec<CheckOutcome> {
    let mut out = vec![
        rank_profiles(cfg, if cfg.quick { 11 } else { 15 }),
        canonical_slacks(),
        ingleton_baseline(cfg, if cfg.quick { 500 } else { 10_000 }),
        counts(),
        theorem_matches_examples(if cfg.quick { 9 } else { 13 }),
    ];
    if !cfg.quick {
        out.push(validity_sampling(cfg, 2_000));
        out.push(exhaustive_low_dim(cfg));
    }
    out
}

pub fn all_passed(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(|o| o.passed)
}
