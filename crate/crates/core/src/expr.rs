//! Linear rank expressions `Σ c_S · H(S)` with exact rational coefficients.
//!
//! An expression stands for the inequality `expr >= 0`. Terms are kept in a
//! canonical map from sorted variable sets to non-zero coefficients, so two
//! expressions are equal exactly when their term maps are.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::RowReducer;
use crate::subspace::{span_dim, Assignment, EntropyCache, EntropyError, Subspace};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid expression at {location}: {message}")]
    Invalid { location: String, message: String },
}

/// Orders names like `A2 < A10 < B1 < C`: alphabetic prefix first, then the
/// numeric suffix as a number.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn split(s: &str) -> (&str, Option<u64>, &str) {
        let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, digits) = s.split_at(cut);
        (head, digits.parse().ok(), digits)
    }
    let (ha, na, da) = split(a);
    let (hb, nb, db) = split(b);
    ha.cmp(hb)
        .then(na.cmp(&nb))
        .then_with(|| da.cmp(db))
        .then_with(|| a.cmp(b))
}

/// A sorted, duplicate-free set of variable names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarSet(Vec<String>);

impl VarSet {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v: Vec<String> = names.into_iter().map(Into::into).collect();
        v.sort_by(|a, b| natural_cmp(a, b));
        v.dedup();
        Self(v)
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        VarSet::new(self.0.iter().chain(&other.0).cloned())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|n| n == name)
    }
}

impl Ord for VarSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| {
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| natural_cmp(a, b))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

impl PartialOrd for VarSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.join(","))
    }
}

/// `Σ coeff · H(varset)`, read as the inequality `Σ ... >= 0`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct RankExpr {
    terms: BTreeMap<VarSet, Rational>,
}

impl RankExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `H(S)`. The empty set contributes nothing.
    pub fn h<I, S>(vars: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut e = Self::zero();
        e.add_term(VarSet::new(vars), Rational::one());
        e
    }

    /// `H(S|T) = H(S ∪ T) - H(T)`
    pub fn cond_h(s: &VarSet, t: &VarSet) -> Self {
        Self::h(s.union(t).0) - Self::h(t.0.clone())
    }

    /// `I(S;T) = H(S) + H(T) - H(S ∪ T)`
    pub fn mi(s: &VarSet, t: &VarSet) -> Self {
        Self::h(s.0.clone()) + Self::h(t.0.clone()) - Self::h(s.union(t).0)
    }

    /// `I(S;T|U) = H(S ∪ U) + H(T ∪ U) - H(S ∪ T ∪ U) - H(U)`
    pub fn cmi(s: &VarSet, t: &VarSet, u: &VarSet) -> Self {
        Self::h(s.union(u).0) + Self::h(t.union(u).0)
            - Self::h(s.union(t).union(u).0)
            - Self::h(u.0.clone())
    }

    /// Adds `coeff · H(vars)`, dropping the term if it cancels.
    pub fn add_term(&mut self, vars: VarSet, coeff: Rational) {
        if vars.is_empty() || coeff.is_zero() {
            return;
        }
        let slot = self
            .terms
            .entry(vars.clone())
            .or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&vars);
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * r)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&VarSet, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, vars: &VarSet) -> Rational {
        self.terms.get(vars).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every variable mentioned, in natural order.
    pub fn variables(&self) -> Vec<String> {
        let all: BTreeSet<&String> = self.terms.keys().flat_map(|k| k.0.iter()).collect();
        let mut v: Vec<String> = all.into_iter().cloned().collect();
        v.sort_by(|a, b| natural_cmp(a, b));
        v
    }

    /// Exact value of the expression on `a`.
    pub fn evaluate(&self, a: &Assignment) -> Result<Rational, EntropyError> {
        let mut cache = EntropyCache::new(a);
        let mut total = Rational::zero();
        for (vars, c) in &self.terms {
            total += c * BigInt::from(cache.h(vars.names())?);
        }
        Ok(total)
    }

    /// Human-readable form with terms in canonical order, e.g.
    /// `+ H(A) + H(B) - H(A,B)`.
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(vars, c)| {
                let sign = if c.is_negative() { '-' } else { '+' };
                let mag = c.abs();
                if mag.is_one() {
                    format!("{sign} H({vars})")
                } else {
                    format!("{sign} {mag} H({vars})")
                }
            })
            .collect();
        parts.join(" ")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(WireExpr::from_expr(self, self.variables())).expect("serializable")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable")
    }

    /// Parses the `terms` array of the JSON schema. Duplicate variable sets are
    /// summed; zero terms are dropped.
    pub fn from_json(text: &str) -> Result<Self, ExprError> {
        let wire: WireExpr = serde_json::from_str(text).map_err(parse_error)?;
        wire.to_expr()
    }

    pub fn compile(&self, variables: &[String]) -> Result<CompiledExpr, EntropyError> {
        CompiledExpr::new(self, variables)
    }
}

impl Add for RankExpr {
    type Output = RankExpr;
    fn add(mut self, rhs: RankExpr) -> RankExpr {
        for (k, v) in rhs.terms {
            self.add_term(k, v);
        }
        self
    }
}

impl Sub for RankExpr {
    type Output = RankExpr;
    fn sub(self, rhs: RankExpr) -> RankExpr {
        self + (-rhs)
    }
}

impl Neg for RankExpr {
    type Output = RankExpr;
    fn neg(self) -> RankExpr {
        RankExpr {
            terms: self.terms.into_iter().map(|(k, v)| (k, -v)).collect(),
        }
    }
}

impl Mul<&Rational> for RankExpr {
    type Output = RankExpr;
    fn mul(self, rhs: &Rational) -> RankExpr {
        self.scale(rhs)
    }
}

impl Mul<i64> for RankExpr {
    type Output = RankExpr;
    fn mul(self, rhs: i64) -> RankExpr {
        self.scale(&int(rhs))
    }
}

impl std::iter::Sum for RankExpr {
    fn sum<I: Iterator<Item = RankExpr>>(iter: I) -> RankExpr {
        iter.fold(RankExpr::zero(), Add::add)
    }
}

impl fmt::Display for RankExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// An expression lowered to variable indices for repeated evaluation.
///
/// Coefficients are brought to a common denominator; when the scaled
/// numerators fit in `i64` the sum is accumulated in `i128`.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    variables: Vec<String>,
    terms: Vec<Vec<usize>>,
    scaled: Option<Vec<i64>>,
    exact: Vec<Rational>,
    denom: BigInt,
}

impl CompiledExpr {
    pub fn new(e: &RankExpr, variables: &[String]) -> Result<Self, EntropyError> {
        let index = |name: &str| {
            variables
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| EntropyError::UnknownVariable(name.to_string()))
        };
        let mut terms = Vec::with_capacity(e.len());
        let mut exact = Vec::with_capacity(e.len());
        let mut denom = BigInt::one();
        for (vars, c) in e.terms() {
            terms.push(
                vars.names()
                    .iter()
                    .map(|n| index(n))
                    .collect::<Result<_, _>>()?,
            );
            exact.push(c.clone());
            denom = lcm(&denom, c.denom());
        }
        let scaled = exact
            .iter()
            .map(|c| (c * &denom).to_integer().to_i64())
            .collect::<Option<Vec<_>>>();
        Ok(Self {
            variables: variables.to_vec(),
            terms,
            scaled,
            exact,
            denom,
        })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    /// `spaces[i]` is the value of `variables()[i]`.
    pub fn evaluate(&self, spaces: &[Subspace], reducer: &mut RowReducer) -> Rational {
        assert_eq!(spaces.len(), self.variables.len());
        let mut dims = self.terms.iter().map(|idx| {
            reducer.clear();
            span_dim(idx.iter().map(|&i| &spaces[i]), reducer)
        });
        match &self.scaled {
            Some(scaled) => {
                let num: i128 = scaled
                    .iter()
                    .map(|&c| c as i128 * dims.next().unwrap() as i128)
                    .sum();
                Rational::new(BigInt::from(num), self.denom.clone())
            }
            None => self
                .exact
                .iter()
                .map(|c| c * BigInt::from(dims.next().unwrap()))
                .fold(Rational::zero(), |a, b| a + b),
        }
    }
}

fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.lcm(b)
}

/// Which characteristics an inequality is claimed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Validity {
    Divides { t: u64 },
    NotDivides { t: u64 },
    AllFields,
}

impl Validity {
    pub fn holds_over(&self, p: u32) -> bool {
        match *self {
            Validity::Divides { t } => t % p as u64 == 0,
            Validity::NotDivides { t } => t % p as u64 != 0,
            Validity::AllFields => true,
        }
    }
}

impl fmt::Display for Validity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Validity::Divides { t } => write!(f, "char | {t}"),
            Validity::NotDivides { t } => write!(f, "char ∤ {t}"),
            Validity::AllFields => write!(f, "all fields"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyClass {
    A,
    B,
    TheoremI,
    TheoremIi,
    Ingleton,
}

impl fmt::Display for FamilyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyClass::A => "a",
            FamilyClass::B => "b",
            FamilyClass::TheoremI => "theorem_i",
            FamilyClass::TheoremIi => "theorem_ii",
            FamilyClass::Ingleton => "ingleton",
        })
    }
}

/// How the codimension terms `∇(A_i : i ∈ T)` are expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NablaMode {
    /// One `I(A_{[k-1]}; A_k)` per element `k` of `T`.
    #[default]
    Chain,
    /// One `I(A_{[a-1]}; A_{[a..b]})` per maximal run `[a..b]` of `T`.
    Interval,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    /// Number of variables.
    pub n: usize,
    pub t: Option<u64>,
    /// `M(n,t)` for the example families, the column count for a guide.
    pub m: Option<usize>,
    pub class: FamilyClass,
    pub nabla: Option<NablaMode>,
}

/// A generated inequality with its claimed validity class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedInequality {
    pub expr: RankExpr,
    pub validity: Validity,
    pub family: FamilyDescriptor,
    pub variables: Vec<String>,
}

impl TaggedInequality {
    pub fn label(&self) -> String {
        let f = &self.family;
        match (f.class, f.t) {
            (FamilyClass::Ingleton, _) => "ingleton".to_string(),
            (c, Some(t)) => format!("{c}(n={},t={t})", f.n),
            (c, None) => format!("{c}(n={})", f.n),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let mut wire = WireExpr::from_expr(&self.expr, self.variables.clone());
        wire.validity = Some(self.validity);
        wire.family = Some(self.family.clone());
        serde_json::to_value(wire).expect("serializable")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, ExprError> {
        let wire: WireExpr = serde_json::from_str(text).map_err(parse_error)?;
        Self::from_wire(wire)
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Self, ExprError> {
        let wire: WireExpr = serde_json::from_value(v).map_err(parse_error)?;
        Self::from_wire(wire)
    }

    /// Accepts a single inequality or an array of them.
    pub fn many_from_json(text: &str) -> Result<Vec<Self>, ExprError> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(parse_error)?;
        match v {
            serde_json::Value::Array(items) => items
                .into_iter()
                .enumerate()
                .map(|(i, item)| {
                    Self::from_json_value(item).map_err(|e| match e {
                        ExprError::Invalid { location, message } => ExprError::Invalid {
                            location: format!("[{i}].{location}"),
                            message,
                        },
                        ExprError::Parse { message, .. } => ExprError::Invalid {
                            location: format!("[{i}]"),
                            message,
                        },
                    })
                })
                .collect(),
            other => Ok(vec![Self::from_json_value(other)?]),
        }
    }

    fn from_wire(wire: WireExpr) -> Result<Self, ExprError> {
        let missing = |field: &str| ExprError::Invalid {
            location: field.to_string(),
            message: "missing field".into(),
        };
        let validity = wire.validity.ok_or_else(|| missing("validity"))?;
        let family = wire.family.clone().ok_or_else(|| missing("family"))?;
        let expr = wire.to_expr()?;
        let variables = match &wire.variables {
            Some(v) => v.clone(),
            None => expr.variables(),
        };
        Ok(Self {
            expr,
            validity,
            family,
            variables,
        })
    }
}

impl fmt::Display for TaggedInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] valid over {}\n  0 <= {}",
            self.label(),
            self.validity,
            self.expr
        )
    }
}

fn parse_error(e: serde_json::Error) -> ExprError {
    ExprError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum WireInt {
    Int(i64),
    Big(String),
}

impl WireInt {
    fn from_big(b: &BigInt) -> Self {
        b.to_i64()
            .map_or_else(|| WireInt::Big(b.to_string()), WireInt::Int)
    }

    fn to_big(&self) -> Result<BigInt, String> {
        match self {
            WireInt::Int(i) => Ok(BigInt::from(*i)),
            WireInt::Big(s) => s.parse().map_err(|_| format!("`{s}` is not an integer")),
        }
    }
}

/// JSON form of an exact rational: `{"num": int, "den": int}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireRational {
    num: WireInt,
    den: WireInt,
}

impl WireRational {
    pub fn from_rational(r: &Rational) -> Self {
        Self {
            num: WireInt::from_big(r.numer()),
            den: WireInt::from_big(r.denom()),
        }
    }

    pub fn to_rational(&self) -> Result<Rational, String> {
        let den = self.den.to_big()?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(Rational::new(self.num.to_big()?, den))
    }
}

/// `#[serde(with = "rational_json")]` for fields of type [`Rational`].
pub mod rational_json {
    use super::{Rational, WireRational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        WireRational::from_rational(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        WireRational::deserialize(d)?
            .to_rational()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WireTerm {
    coeff: WireRational,
    vars: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WireExpr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variables: Option<Vec<String>>,
    terms: Vec<WireTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    validity: Option<Validity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<FamilyDescriptor>,
}

impl WireExpr {
    fn from_expr(e: &RankExpr, variables: Vec<String>) -> Self {
        Self {
            variables: Some(variables),
            terms: e
                .terms()
                .map(|(vars, c)| WireTerm {
                    coeff: WireRational::from_rational(c),
                    vars: vars.names().to_vec(),
                })
                .collect(),
            validity: None,
            family: None,
        }
    }

    fn to_expr(&self) -> Result<RankExpr, ExprError> {
        let mut e = RankExpr::zero();
        for (i, t) in self.terms.iter().enumerate() {
            let coeff = t
                .coeff
                .to_rational()
                .map_err(|message| ExprError::Invalid {
                    location: format!("terms[{i}].coeff"),
                    message,
                })?;
            if let Some(decl) = &self.variables {
                if let Some(v) = t.vars.iter().find(|v| !decl.contains(v)) {
                    return Err(ExprError::Invalid {
                        location: format!("terms[{i}].vars"),
                        message: format!("variable `{v}` is not declared in `variables`"),
                    });
                }
            }
            e.add_term(VarSet::new(t.vars.iter().cloned()), coeff);
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::PrimeField;
    use proptest::prelude::*;

    fn vs(names: &[&str]) -> VarSet {
        VarSet::new(names.iter().copied())
    }

    #[test]
    fn natural_order() {
        let mut names = vec!["C", "A10", "B1", "A2", "A1"];
        names.sort_by(|a, b| natural_cmp(a, b));
        assert_eq!(names, ["A1", "A2", "A10", "B1", "C"]);
    }

    #[test]
    fn information_expansions() {
        let (a, b, c) = (vs(&["A"]), vs(&["B"]), vs(&["C"]));
        let mi = RankExpr::mi(&a, &b);
        assert_eq!(mi.to_text(), "+ H(A) + H(B) - H(A,B)");
        assert!(RankExpr::cond_h(&a, &a).is_zero());
        let cmi = RankExpr::cmi(&a, &b, &c);
        assert_eq!(cmi.to_text(), "- H(C) + H(A,C) + H(B,C) - H(A,B,C)");
        assert_eq!(cmi.coefficient(&vs(&["A", "B", "C"])), int(-1));
    }

    #[test]
    fn arithmetic_cancels() {
        let a = RankExpr::h(["A"]);
        assert!((a.clone() + -a).is_zero());
        let third = RankExpr::h(["A", "B"]).scale(&rat(1, 3));
        assert_eq!(third.coefficient(&vs(&["B", "A"])), rat(1, 3));
        let e = RankExpr::mi(&vs(&["A"]), &vs(&["B"])) + RankExpr::h(["A", "B"]);
        assert_eq!(e, RankExpr::h(["A"]) + RankExpr::h(["B"]));
        assert!(RankExpr::h(Vec::<String>::new()).is_zero());
        assert!(RankExpr::h(["A"]).scale(&int(0)).is_zero());
    }

    #[test]
    fn evaluation() {
        let f = PrimeField::new(2).unwrap();
        let a = Assignment::new(f, 2)
            .with("A", Subspace::coordinate_line(f, 2, 0))
            .unwrap();
        assert_eq!(RankExpr::zero().evaluate(&a).unwrap(), int(0));
        assert_eq!(RankExpr::h(["A"]).evaluate(&a).unwrap(), int(1));
        assert!(matches!(
            RankExpr::h(["Z"]).evaluate(&a),
            Err(EntropyError::UnknownVariable(_))
        ));
    }

    #[test]
    fn json_duplicates_are_summed() {
        let text = r#"{"terms": [
            {"coeff": {"num": 1, "den": 2}, "vars": ["B", "A"]},
            {"coeff": {"num": 1, "den": 2}, "vars": ["A", "B"]},
            {"coeff": {"num": 1, "den": 1}, "vars": ["C"]},
            {"coeff": {"num": -1, "den": 1}, "vars": ["C"]}
        ]}"#;
        let e = RankExpr::from_json(text).unwrap();
        assert_eq!(e, RankExpr::h(["A", "B"]));
    }

    #[test]
    fn json_errors_carry_location() {
        match RankExpr::from_json("{\"terms\": [\n  {\"coeff\": 3}]}") {
            Err(ExprError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let zero_den = r#"{"terms": [{"coeff": {"num": 1, "den": 0}, "vars": ["A"]}]}"#;
        assert!(matches!(
            RankExpr::from_json(zero_den),
            Err(ExprError::Invalid { location, .. }) if location == "terms[0].coeff"
        ));
        let undeclared =
            r#"{"variables": ["A"], "terms": [{"coeff": {"num": 1, "den": 1}, "vars": ["B"]}]}"#;
        assert!(RankExpr::from_json(undeclared).is_err());
    }

    #[test]
    fn big_coefficients_survive_json() {
        let huge = Rational::new(BigInt::from(10).pow(30), BigInt::from(7));
        let e = RankExpr::h(["A"]).scale(&huge);
        let back = RankExpr::from_json(&e.to_json()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn validity_classes() {
        assert!(Validity::Divides { t: 6 }.holds_over(3));
        assert!(!Validity::Divides { t: 6 }.holds_over(5));
        assert!(Validity::NotDivides { t: 6 }.holds_over(5));
        assert!(Validity::AllFields.holds_over(7));
    }

    #[test]
    fn tagged_json_roundtrip() {
        let ineq = TaggedInequality {
            expr: RankExpr::mi(&vs(&["A1"]), &vs(&["A2"])).scale(&rat(-2, 3)),
            validity: Validity::NotDivides { t: 4 },
            family: FamilyDescriptor {
                n: 2,
                t: Some(4),
                m: Some(2),
                class: FamilyClass::TheoremIi,
                nabla: Some(NablaMode::Interval),
            },
            variables: vec!["A1".into(), "A2".into()],
        };
        let back = TaggedInequality::from_json(&ineq.to_json()).unwrap();
        assert_eq!(back, ineq);
        let arr = format!("[{}, {}]", ineq.to_json(), ineq.to_json());
        assert_eq!(TaggedInequality::many_from_json(&arr).unwrap().len(), 2);
    }

    fn arb_expr() -> impl Strategy<Value = RankExpr> {
        let names = ["A", "B", "C"];
        prop::collection::vec((1u8..8, -5i64..6, 1i64..4), 0..10).prop_map(move |ts| {
            let mut e = RankExpr::zero();
            for (mask, n, d) in ts {
                let vars: Vec<&str> = (0..3)
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| names[b])
                    .collect();
                e.add_term(VarSet::new(vars), rat(n, d));
            }
            e
        })
    }

    fn arb_assignment() -> impl Strategy<Value = Assignment> {
        (prop::sample::select(vec![2u64, 3, 5]), 1usize..4).prop_flat_map(|(p, d)| {
            let space = prop::collection::vec(prop::collection::vec(0i64..p as i64, d), 0..=d);
            prop::collection::vec(space, 3).prop_map(move |gens| {
                let f = PrimeField::new(p).unwrap();
                let mut a = Assignment::new(f, d);
                for (name, g) in ["A", "B", "C"].iter().zip(gens) {
                    a.insert(*name, Subspace::span(f, d, &g).unwrap()).unwrap();
                }
                a
            })
        })
    }

    proptest! {
        #[test]
        fn evaluate_is_linear(e1 in arb_expr(), e2 in arb_expr(), n in -4i64..5, d in 1i64..4, a in arb_assignment()) {
            let r = rat(n, d);
            let sum = e1.clone() + e2.clone();
            prop_assert_eq!(sum.evaluate(&a).unwrap(), e1.evaluate(&a).unwrap() + e2.evaluate(&a).unwrap());
            prop_assert_eq!(e1.scale(&r).evaluate(&a).unwrap(), &r * e1.evaluate(&a).unwrap());
        }

        #[test]
        fn compiled_matches_direct(e in arb_expr(), a in arb_assignment()) {
            let vars: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
            let spaces: Vec<Subspace> = vars.iter().map(|v| a.get(v).unwrap().clone()).collect();
            let compiled = e.compile(&vars).unwrap();
            let mut reducer = RowReducer::new(a.field(), a.ambient_dim());
            prop_assert_eq!(compiled.evaluate(&spaces, &mut reducer), e.evaluate(&a).unwrap());
        }

        #[test]
        fn canonicalization_preserves_value(
            raw in prop::collection::vec((prop::collection::vec(0usize..3, 0..5), -3i64..4), 0..12),
            a in arb_assignment(),
        ) {
            // naive: sum coeff * H(names as given, with repeats and any order)
            let names = ["A", "B", "C"];
            let mut naive = Rational::zero();
            let mut e = RankExpr::zero();
            for (idx, c) in &raw {
                let vars: Vec<&str> = idx.iter().map(|&i| names[i]).collect();
                naive += int(*c) * BigInt::from(a.joint_entropy(&vars).unwrap());
                e.add_term(VarSet::new(vars), int(*c));
            }
            prop_assert_eq!(e.evaluate(&a).unwrap(), naive);
        }

        #[test]
        fn json_roundtrip(e in arb_expr()) {
            prop_assert_eq!(RankExpr::from_json(&e.to_json()).unwrap(), e);
        }
    }
}
