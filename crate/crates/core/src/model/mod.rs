//! Interpretations of the language: the rational plane with its usual
//! betweenness and congruence, the degenerate plane `M` in which `D a b c d`
//! holds exactly when `a = b`, and explicit finite structures.

mod finite;
mod sampled;
mod search;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::formula::{parse_term, rational, render_rational, Atom, Formula, Rational, Term};

pub use finite::{eval_formula_exhaustive, Evaluation, FiniteModel, ModelParseError};
pub use sampled::{
    check_members, eval_axiom_sampled, refute_with_instance, skipped_schema, skolem_witness,
    SampleConfig,
};
pub use search::{search_finite_models, SearchBudget, SearchMode, SearchOutcome, SearchStats, SizeStats};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("variable `{0}` is not assigned")]
    Unassigned(String),
    #[error("no witness provider for `{0}`")]
    NoProvider(String),
    #[error("no built-in counterexample for {axiom} in model {model}")]
    UnknownPair { model: String, axiom: String },
    #[error("point constants cannot be evaluated in a finite model")]
    PointInFiniteModel,
    #[error("`{0}` is a schema, not a first-order sentence")]
    Schema(String),
    #[error("unknown model `{0}`; expected `standard` or `M`")]
    UnknownModel(String),
    #[error("exhaustive search is limited to domains of size 2, got {0}")]
    TooLarge(usize),
    #[error("invalid number `{0}`")]
    BadNumber(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point2 {
    pub x: Rational,
    pub y: Rational,
}

impl Point2 {
    pub fn new(x: Rational, y: Rational) -> Self {
        Self { x, y }
    }

    pub fn int(x: i64, y: i64) -> Self {
        Self::new(rational(x, 1), rational(y, 1))
    }

    pub fn sub(&self, o: &Point2) -> Point2 {
        Point2::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn add(&self, o: &Point2) -> Point2 {
        Point2::new(&self.x + &o.x, &self.y + &o.y)
    }

    pub fn scale(&self, k: &Rational) -> Point2 {
        Point2::new(&self.x * k, &self.y * k)
    }

    pub fn dot(&self, o: &Point2) -> Rational {
        &self.x * &o.x + &self.y * &o.y
    }

    pub fn cross(&self, o: &Point2) -> Rational {
        &self.x * &o.y - &self.y * &o.x
    }

    pub fn norm2(&self) -> Rational {
        self.dot(self)
    }

    /// `self + t (other - self)`.
    pub fn lerp(&self, other: &Point2, t: &Rational) -> Point2 {
        self.add(&other.sub(self).scale(t))
    }

    pub fn as_term(&self) -> Term {
        Term::Point(self.x.clone(), self.y.clone())
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", render_rational(&self.x), render_rational(&self.y))
    }
}

impl FromStr for Point2 {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_term(s) {
            Ok(Term::Point(x, y)) => Ok(Point2::new(x, y)),
            _ => Err(ModelError::BadNumber(s.to_string())),
        }
    }
}

/// `b` is on the closed segment `ac`. Exact.
pub fn between(a: &Point2, b: &Point2, c: &Point2) -> bool {
    let ab = b.sub(a);
    let bc = c.sub(b);
    ab.cross(&c.sub(a)).is_zero() && !ab.dot(&bc).is_negative()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    #[serde(rename = "standard")]
    StandardPlane,
    #[serde(rename = "M")]
    DegenerateM,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuiltinModel {
    pub kind: ModelKind,
    /// Tolerance for congruences involving approximate witnesses; only the
    /// standard plane uses it.
    pub epsilon: Rational,
}

impl BuiltinModel {
    pub fn standard() -> Self {
        Self {
            kind: ModelKind::StandardPlane,
            epsilon: default_epsilon(),
        }
    }

    pub fn degenerate() -> Self {
        Self {
            kind: ModelKind::DegenerateM,
            epsilon: Rational::zero(),
        }
    }

    pub fn by_name(name: &str) -> Result<Self, ModelError> {
        match name {
            "M" | "m" | "degenerate" => Ok(Self::degenerate()),
            "standard" | "plane" => Ok(Self::standard()),
            other => Err(ModelError::UnknownModel(other.to_string())),
        }
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            ModelKind::StandardPlane => "standard",
            ModelKind::DegenerateM => "M",
        }
    }

    pub fn is_approximate(&self) -> bool {
        self.kind == ModelKind::StandardPlane
    }

    pub fn congruent(&self, a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> bool {
        match self.kind {
            ModelKind::DegenerateM => a == b,
            ModelKind::StandardPlane => a.sub(b).norm2() == c.sub(d).norm2(),
        }
    }

    /// Congruence up to `epsilon` on squared lengths.
    pub(crate) fn congruent_approx(&self, a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> bool {
        match self.kind {
            ModelKind::DegenerateM => a == b,
            ModelKind::StandardPlane => {
                (a.sub(b).norm2() - c.sub(d).norm2()).abs() <= self.epsilon
            }
        }
    }
}

pub fn default_epsilon() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(10u64.pow(9)))
}

/// Parses `p/q`, an integer, or a decimal such as `0.001` or `1e-9`.
pub fn parse_rational(text: &str) -> Result<Rational, ModelError> {
    let bad = || ModelError::BadNumber(text.to_string());
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match t.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    if exp.abs() > 1000 {
        return Err(bad());
    }
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

pub type PointAssignment = BTreeMap<String, Point2>;

fn resolve(t: &Term, s: &PointAssignment) -> Result<Point2, ModelError> {
    match t {
        Term::Var(v) => s.get(v).cloned().ok_or_else(|| ModelError::Unassigned(v.clone())),
        Term::Point(x, y) => Ok(Point2::new(x.clone(), y.clone())),
    }
}

pub fn eval_atom(m: &BuiltinModel, a: &Atom, s: &PointAssignment) -> Result<bool, ModelError> {
    Ok(match a {
        Atom::Between(x, y, z) => between(&resolve(x, s)?, &resolve(y, s)?, &resolve(z, s)?),
        Atom::Congruent(w, x, y, z) => m.congruent(
            &resolve(w, s)?,
            &resolve(x, s)?,
            &resolve(y, s)?,
            &resolve(z, s)?,
        ),
        Atom::Equal(x, y) => resolve(x, s)? == resolve(y, s)?,
    })
}

/// Exact truth of a quantifier-free formula under `s`.
pub fn eval_quantifier_free(m: &BuiltinModel, f: &Formula, s: &PointAssignment) -> Result<bool, ModelError> {
    Ok(match f {
        Formula::Atom(a) => eval_atom(m, a, s)?,
        Formula::Not(g) => !eval_quantifier_free(m, g, s)?,
        Formula::And(l, r) => eval_quantifier_free(m, l, s)? && eval_quantifier_free(m, r, s)?,
        Formula::Or(l, r) => eval_quantifier_free(m, l, s)? || eval_quantifier_free(m, r, s)?,
        Formula::Implies(l, r) => !eval_quantifier_free(m, l, s)? || eval_quantifier_free(m, r, s)?,
        Formula::Forall(v, _) | Formula::Exists(v, _) => {
            return Err(ModelError::Unassigned(format!("{v} (quantified)")))
        }
    })
}

/// A value in a counterexample: a plane point or a finite-domain element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Point(Point2),
    Index(usize),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Point(p) => p.fmt(f),
            Value::Index(i) => i.fmt(f),
        }
    }
}

/// Variable bindings in quantifier order. Serialises as an ordered map.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Counterexample(pub Vec<(String, Value)>);

impl Counterexample {
    pub fn points(&self) -> PointAssignment {
        self.0
            .iter()
            .filter_map(|(k, v)| match v {
                Value::Point(p) => Some((k.clone(), p.clone())),
                Value::Index(_) => None,
            })
            .collect()
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

impl Serialize for Counterexample {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut map = ser.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            match v {
                Value::Point(p) => map.serialize_entry(k, &p.to_string())?,
                Value::Index(i) => map.serialize_entry(k, i)?,
            }
        }
        map.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    VerifiedExhaustive,
    VerifiedOnSamples { count: u64, seed: u64 },
    Refuted { counterexample: Counterexample },
    Skipped { reason: String },
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::VerifiedExhaustive => "verified_exhaustive",
            Status::VerifiedOnSamples { .. } => "verified_on_samples",
            Status::Refuted { .. } => "refuted",
            Status::Skipped { .. } => "skipped",
        }
    }

    pub fn is_verified(&self) -> bool {
        matches!(self, Status::VerifiedExhaustive | Status::VerifiedOnSamples { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModelCheckReport {
    pub axiom: String,
    pub model: String,
    #[serde(flatten)]
    pub status: Status,
    pub samples: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Samples on which no decision could be reached.
    pub undecided: u64,
    pub approximate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl fmt::Display for ModelCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}: ", self.axiom, self.model)?;
        match &self.status {
            Status::VerifiedExhaustive => f.write_str("verified_exhaustive")?,
            Status::VerifiedOnSamples { count, seed } => {
                write!(f, "verified_on_samples ({count} samples, seed {seed})")?
            }
            Status::Refuted { counterexample } => write!(f, "refuted by {counterexample}")?,
            Status::Skipped { reason } => write!(f, "skipped ({reason})")?,
        }
        if self.approximate {
            f.write_str(" [approximate]")?;
        }
        if let Some(ms) = self.elapsed_ms {
            write!(f, " {ms}ms")?;
        }
        Ok(())
    }
}
