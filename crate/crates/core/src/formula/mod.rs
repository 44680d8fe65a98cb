//! First-order language of points with betweenness, congruence and equality.
//!
//! Formulas are plain immutable trees. Binders carry their variable name;
//! bound-variable identity is recovered structurally by [`alpha_equal`].

mod parse;
mod render;
mod subst;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

pub use parse::{parse_formula, parse_term, ParseError};
pub use render::{render_formula, render_rational, render_term};
pub use subst::{alpha_equal, fresh_name, rewrite_occurrences, substitute, Occurrences};

/// Exact rational coordinate.
pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// A point of the rational plane. Only used when writing down
    /// counterexamples; library axioms never contain one.
    Point(Rational, Rational),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn point(x: Rational, y: Rational) -> Self {
        Term::Point(x, y)
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Point(..) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_term(self))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    /// `B a b c`: `b` lies on the segment from `a` to `c`.
    Between(Term, Term, Term),
    /// `D a b c d`: segment `ab` is congruent to segment `cd`.
    Congruent(Term, Term, Term, Term),
    Equal(Term, Term),
}

impl Atom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Between(a, b, c) => vec![a, b, c],
            Atom::Congruent(a, b, c, d) => vec![a, b, c, d],
            Atom::Equal(a, b) => vec![a, b],
        }
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Atom {
        match self {
            Atom::Between(a, b, c) => Atom::Between(f(a), f(b), f(c)),
            Atom::Congruent(a, b, c, d) => Atom::Congruent(f(a), f(b), f(c), f(d)),
            Atom::Equal(a, b) => Atom::Equal(f(a), f(b)),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Atom::Between(..) => "B",
            Atom::Congruent(..) => "D",
            Atom::Equal(..) => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn between(a: Term, b: Term, c: Term) -> Self {
        Formula::Atom(Atom::Between(a, b, c))
    }

    pub fn congruent(a: Term, b: Term, c: Term, d: Term) -> Self {
        Formula::Atom(Atom::Congruent(a, b, c, d))
    }

    pub fn equal(a: Term, b: Term) -> Self {
        Formula::Atom(Atom::Equal(a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn forall(v: impl Into<String>, body: Formula) -> Self {
        Formula::Forall(v.into(), Box::new(body))
    }

    pub fn exists(v: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(v.into(), Box::new(body))
    }

    /// Nests `forall` binders, outermost first.
    pub fn forall_all<S: AsRef<str>>(vars: &[S], body: Formula) -> Self {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::forall(v.as_ref(), acc))
    }

    /// Right-nested conjunction of a non-empty list.
    pub fn conjunction(mut parts: Vec<Formula>) -> Self {
        let last = parts.pop().expect("empty conjunction");
        parts
            .into_iter()
            .rev()
            .fold(last, |acc, f| Formula::and(f, acc))
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(atom) => {
                for t in atom.terms() {
                    if let Term::Var(v) = t {
                        if !bound.iter().any(|b| b == v) {
                            out.insert(v.clone());
                        }
                    }
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn has_free(&self, var: &str) -> bool {
        self.free_variables().contains(var)
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom(atom) => {
                for t in atom.terms() {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Forall(v, _) | Formula::Exists(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    pub fn contains_point_constant(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            if let Formula::Atom(atom) = f {
                found |= atom.terms().iter().any(|t| matches!(t, Term::Point(..)));
            }
        });
        found
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Atom(_) => {}
            Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => g.visit(f),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.visit(f);
                r.visit(f);
            }
        }
    }

    /// Atoms in left-to-right order.
    pub fn atoms(&self) -> Vec<&Atom> {
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Atom>) {
            match f {
                Formula::Atom(a) => out.push(a),
                Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => go(g, out),
                Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                    go(l, out);
                    go(r, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn mentions_betweenness(&self) -> bool {
        self.atoms().iter().any(|a| matches!(a, Atom::Between(..)))
    }

    pub fn mentions_congruence(&self) -> bool {
        self.atoms().iter().any(|a| matches!(a, Atom::Congruent(..)))
    }

    /// Splits off the leading block of universal binders.
    pub fn universal_prefix(&self) -> (Vec<&str>, &Formula) {
        let mut vars = Vec::new();
        let mut f = self;
        while let Formula::Forall(v, body) = f {
            vars.push(v.as_str());
            f = body;
        }
        (vars, f)
    }

    /// Number of quantifiers in the formula.
    pub fn quantifier_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |f| {
            if matches!(f, Formula::Forall(..) | Formula::Exists(..)) {
                n += 1;
            }
        });
        n
    }
}

/// Atom pairs at matching positions that differ between `f` and `g`, or
/// `None` when the trees differ in connectives or binders.
pub fn atom_differences<'a>(f: &'a Formula, g: &'a Formula) -> Option<Vec<(&'a Atom, &'a Atom)>> {
    fn walk<'a>(f: &'a Formula, g: &'a Formula, out: &mut Vec<(&'a Atom, &'a Atom)>) -> bool {
        match (f, g) {
            (Formula::Atom(a), Formula::Atom(b)) => {
                if a != b {
                    out.push((a, b));
                }
                true
            }
            (Formula::Not(a), Formula::Not(b)) => walk(a, b, out),
            (Formula::And(a, b), Formula::And(c, d))
            | (Formula::Or(a, b), Formula::Or(c, d))
            | (Formula::Implies(a, b), Formula::Implies(c, d)) => walk(a, c, out) && walk(b, d, out),
            (Formula::Forall(v, a), Formula::Forall(w, b)) | (Formula::Exists(v, a), Formula::Exists(w, b)) => {
                v == w && walk(a, b, out)
            }
            _ => false,
        }
    }
    let mut out = Vec::new();
    walk(f, g, &mut out).then_some(out)
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_formula(self))
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

/// Checks the variable-name lexical rule `[a-z][a-zA-Z0-9_']*`, excluding
/// the two quantifier keywords.
pub fn is_valid_var_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && name != "forall"
        && name != "exists"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_differences_by_position() {
        let f = parse_formula("forall a. (B a b c -> D a b c d)").unwrap();
        let g = parse_formula("forall a. (B a b c -> D b a c d)").unwrap();
        let diff = atom_differences(&f, &g).unwrap();
        assert_eq!(diff.len(), 1);
        assert_eq!(diff[0].0.symbol(), "D");
        assert_eq!(atom_differences(&f, &f).unwrap().len(), 0);
        let h = parse_formula("forall x. (B a b c -> D a b c d)").unwrap();
        assert!(atom_differences(&f, &h).is_none());
        let k = parse_formula("forall a. (B a b c & D a b c d)").unwrap();
        assert!(atom_differences(&f, &k).is_none());
    }

    #[test]
    fn free_variables_examples() {
        let re = parse_formula("forall a b. D a b b a").unwrap();
        assert!(re.free_variables().is_empty());
        let abc = parse_formula("B a b c").unwrap();
        let expected: BTreeSet<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(abc.free_variables(), expected);
        let bound = parse_formula("forall a. B a b a").unwrap();
        assert_eq!(bound.free_variables(), BTreeSet::from(["b".to_string()]));
    }

    #[test]
    fn var_names() {
        assert!(is_valid_var_name("a'"));
        assert!(is_valid_var_name("x_1"));
        assert!(!is_valid_var_name("B"));
        assert!(!is_valid_var_name("1a"));
        assert!(!is_valid_var_name("forall"));
        assert!(!is_valid_var_name(""));
    }

    #[test]
    fn conjunction_nests_right() {
        let f = Formula::conjunction(vec![
            parse_formula("B a b c").unwrap(),
            parse_formula("= a b").unwrap(),
            parse_formula("D a b c d").unwrap(),
        ]);
        assert_eq!(render_formula(&f), "B a b c & = a b & D a b c d");
        assert!(matches!(f, Formula::And(_, ref r) if matches!(**r, Formula::And(..))));
    }
}
