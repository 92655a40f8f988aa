//! Independent oracles: dimensions by brute-force span enumeration and
//! determinants by the Leibniz formula, checked against the library.

use std::collections::{BTreeMap, HashSet};

use num_rational::Ratio;
use proptest::prelude::*;
use rankineq::generator::{gen_example_a, gen_example_b};
use rankineq::gf::{MatrixGf, PrimeField};
use rankineq::subspace::{Assignment, Subspace};
use rankineq::verifier::canonical_assignment;
use rankineq::GuideMatrix;

/// Dimension of the span of `gens` in GF(p)^d, found by closing the set of
/// reachable vectors under adding multiples of each generator.
fn brute_dim(gens: &[Vec<u64>], p: u64, d: usize) -> u32 {
    let mut seen: HashSet<Vec<u64>> = HashSet::from([vec![0; d]]);
    for g in gens {
        let current: Vec<Vec<u64>> = seen.iter().cloned().collect();
        for v in current {
            for c in 1..p {
                let w: Vec<u64> = v.iter().zip(g).map(|(a, b)| (a + c * b) % p).collect();
                seen.insert(w);
            }
        }
    }
    let mut size = seen.len() as u64;
    let mut k = 0;
    while size > 1 {
        assert_eq!(size % p, 0);
        size /= p;
        k += 1;
    }
    k
}

type Gens = BTreeMap<&'static str, Vec<Vec<u64>>>;

fn h(gens: &Gens, vars: &[&str], p: u64, d: usize) -> i64 {
    let all: Vec<Vec<u64>> = vars.iter().flat_map(|v| gens[v].clone()).collect();
    brute_dim(&all, p, d) as i64
}

/// The canonical (7,2) configuration in GF(p)^3, written out by hand.
fn canonical_7_2() -> Gens {
    BTreeMap::from([
        ("A1", vec![vec![1, 0, 0]]),
        ("A2", vec![vec![0, 1, 0]]),
        ("A3", vec![vec![0, 0, 1]]),
        ("B1", vec![vec![0, 1, 1]]),
        ("B2", vec![vec![1, 0, 1]]),
        ("B3", vec![vec![1, 1, 0]]),
        ("C", vec![vec![1, 1, 1]]),
    ])
}

/// Class (a) at (n,t) = (7,2), M = 3, typed in directly from the printed
/// formula with every empty range dropped.
fn slack_a_7_2(g: &Gens, p: u64) -> Ratio<i64> {
    let h = |v: &[&str]| h(g, v, p, 3);
    let mi = |s: &[&str], t: &[&str]| {
        let u: Vec<&str> = s.iter().chain(t).copied().collect();
        h(s) + h(t) - h(&u)
    };
    let cond = |s: &[&str], t: &[&str]| {
        let u: Vec<&str> = s.iter().chain(t).copied().collect();
        h(&u) - h(t)
    };
    let lhs = h(&["B1", "B2", "B3"]);
    let bracket = cond(&["C"], &["A1", "A2", "A3"])
        + mi(&["A2", "A3"], &["C"])
        + mi(&["A1", "A3"], &["C"])
        + mi(&["A1", "A2"], &["C"]);
    let rhs = 2 * mi(&["A1", "A2", "A3"], &["C"])
        + 3 * bracket
        + cond(&["B1"], &["A2", "A3"])
        + cond(&["B2"], &["A1", "A3"])
        + cond(&["B3"], &["A1", "A2"])
        + cond(&["B1"], &["A1", "C"])
        + cond(&["B2"], &["A2", "C"])
        + cond(&["B3"], &["A3", "C"])
        + mi(&["A1"], &["A2", "A3"])
        + mi(&["A1", "A2"], &["A3"])
        + mi(&["A1"], &["A2"])
        + mi(&["A1", "A2"], &["A3"]);
    Ratio::from_integer(rhs - lhs)
}

/// Class (b) at (7,2).
fn slack_b_7_2(g: &Gens, p: u64) -> Ratio<i64> {
    let h = |v: &[&str]| h(g, v, p, 3);
    let mi = |s: &[&str], t: &[&str]| {
        let u: Vec<&str> = s.iter().chain(t).copied().collect();
        h(s) + h(t) - h(&u)
    };
    let cond = |s: &[&str], t: &[&str]| {
        let u: Vec<&str> = s.iter().chain(t).copied().collect();
        h(&u) - h(t)
    };
    let lhs = h(&["C"]);
    let whole = cond(&["C"], &["A1", "A2", "A3"])
        + mi(&["A2", "A3"], &["C"])
        + mi(&["A1", "A3"], &["C"])
        + mi(&["A1", "A2"], &["C"])
        + mi(&["A1"], &["A2"])
        + mi(&["A1", "A2"], &["A3"])
        + cond(&["C"], &["A1", "B1"])
        + cond(&["C"], &["A2", "B2"])
        + cond(&["C"], &["A3", "B3"])
        + cond(&["B1"], &["A2", "A3"])
        + cond(&["B2"], &["A1", "A3"])
        + cond(&["B3"], &["A1", "A2"])
        + mi(&["A1"], &["A2", "A3"])
        + mi(&["A1", "A2"], &["A3"]);
    Ratio::new(h(&["B1", "B2", "B3"]), 3) + Ratio::from_integer(whole - lhs)
}

fn to_big(r: Ratio<i64>) -> rankineq::Rational {
    rankineq::expr::rat(*r.numer(), *r.denom())
}

#[test]
fn oracle_slacks_for_7_2() {
    let g = canonical_7_2();
    assert_eq!(slack_a_7_2(&g, 3), Ratio::from_integer(-1));
    assert_eq!(slack_a_7_2(&g, 2), Ratio::from_integer(0));
    assert_eq!(slack_b_7_2(&g, 2), Ratio::new(-1, 3));
    assert_eq!(slack_b_7_2(&g, 3), Ratio::from_integer(0));
}

#[test]
fn library_matches_oracle_slacks() {
    let g = canonical_7_2();
    let guide = GuideMatrix::example(7, 2).unwrap();
    let a = gen_example_a(7, 2).unwrap();
    let b = gen_example_b(7, 2).unwrap();
    for p in [2u64, 3, 5, 7] {
        let field = PrimeField::new(p).unwrap();
        let canon = canonical_assignment(&guide, field);
        for (name, rows) in &g {
            let mine: Vec<Vec<i64>> = rows
                .iter()
                .map(|r| r.iter().map(|&x| x as i64).collect())
                .collect();
            assert_eq!(
                canon.get(name).unwrap(),
                &Subspace::span(field, 3, &mine).unwrap()
            );
        }
        assert_eq!(
            a.expr.evaluate(&canon).unwrap(),
            to_big(slack_a_7_2(&g, p)),
            "a over GF({p})"
        );
        assert_eq!(
            b.expr.evaluate(&canon).unwrap(),
            to_big(slack_b_7_2(&g, p)),
            "b over GF({p})"
        );
    }
}

fn leibniz_det(m: &[Vec<i64>], p: i64) -> i64 {
    fn perms(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(k - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }
    let n = m.len();
    let mut total = 0i64;
    for sigma in perms(n) {
        let inversions = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| sigma[i] > sigma[j])
            .count();
        let mut prod = 1i64;
        for (i, &j) in sigma.iter().enumerate() {
            prod = prod * m[i][j].rem_euclid(p) % p;
        }
        total += if inversions % 2 == 0 { prod } else { p - prod };
    }
    total % p
}

fn small_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7])
}

proptest! {
    #[test]
    fn det_matches_leibniz(p in small_prime(), k in 1usize..=5, seed in prop::collection::vec(-20i64..20, 25)) {
        let rows: Vec<Vec<i64>> = (0..k).map(|i| seed[i * k..(i + 1) * k].to_vec()).collect();
        let field = PrimeField::new(p).unwrap();
        let m = MatrixGf::from_rows(field, k, &rows).unwrap();
        prop_assert_eq!(m.det_mod().unwrap() as i64, leibniz_det(&rows, p as i64));
    }

    #[test]
    fn dimension_matches_span_enumeration(
        p in small_prime(),
        d in 1usize..=4,
        raw in prop::collection::vec(prop::collection::vec(0u64..7, 4), 0..5),
    ) {
        let gens: Vec<Vec<u64>> = raw.iter().map(|v| v[..d].iter().map(|x| x % p).collect()).collect();
        let as_i64: Vec<Vec<i64>> = gens.iter().map(|v| v.iter().map(|&x| x as i64).collect()).collect();
        let field = PrimeField::new(p).unwrap();
        let s = Subspace::span(field, d, &as_i64).unwrap();
        prop_assert_eq!(s.dim() as u32, brute_dim(&gens, p, d));
        let rows = if as_i64.is_empty() { MatrixGf::zeros(field, 0, d) } else { MatrixGf::from_rows(field, d, &as_i64).unwrap() };
        prop_assert_eq!(rows.rank() as u32, brute_dim(&gens, p, d));
    }

    #[test]
    fn joint_entropy_matches_span_enumeration(
        p in small_prime(),
        raw in prop::collection::vec(prop::collection::vec(prop::collection::vec(0u64..5, 3), 0..3), 3),
    ) {
        let d = 3;
        let field = PrimeField::new(p).unwrap();
        let mut a = Assignment::new(field, d);
        let mut all = Vec::new();
        for (i, gens) in raw.iter().enumerate() {
            let gens: Vec<Vec<u64>> = gens.iter().map(|v| v.iter().map(|x| x % p).collect()).collect();
            let as_i64: Vec<Vec<i64>> = gens.iter().map(|v| v.iter().map(|&x| x as i64).collect()).collect();
            a.insert(format!("X{i}"), Subspace::span(field, d, &as_i64).unwrap()).unwrap();
            all.extend(gens);
        }
        prop_assert_eq!(a.joint_entropy(&["X0", "X1", "X2"]).unwrap() as u32, brute_dim(&all, p, d));
    }
}
