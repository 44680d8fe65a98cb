#![allow(dead_code)]

use proptest::prelude::*;
use tarski_core::formula::{rational, Atom, Formula, Term};
use tarski_core::model::FiniteModel;

pub const VARS: [&str; 6] = ["a", "b", "c", "x", "y", "x1"];

pub fn var() -> impl Strategy<Value = String> {
    proptest::sample::select(VARS.to_vec()).prop_map(str::to_string)
}

fn point() -> impl Strategy<Value = Term> {
    (-20i64..20, 1i64..6, -20i64..20, 1i64..6)
        .prop_map(|(p, q, r, s)| Term::point(rational(p, q), rational(r, s)))
}

fn term(with_points: bool) -> BoxedStrategy<Term> {
    if with_points {
        prop_oneof![4 => var().prop_map(Term::Var), 1 => point()].boxed()
    } else {
        var().prop_map(Term::Var).boxed()
    }
}

fn atom(with_points: bool) -> impl Strategy<Value = Formula> {
    let t = move || term(with_points);
    prop_oneof![
        (t(), t(), t()).prop_map(|(a, b, c)| Formula::Atom(Atom::Between(a, b, c))),
        (t(), t(), t(), t()).prop_map(|(a, b, c, d)| Formula::Atom(Atom::Congruent(a, b, c, d))),
        (t(), t()).prop_map(|(a, b)| Formula::Atom(Atom::Equal(a, b))),
    ]
}

/// Random formulas over a small variable pool, so that shadowing and
/// capture situations come up often.
pub fn formula(with_points: bool) -> impl Strategy<Value = Formula> {
    atom(with_points).prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::implies(l, r)),
            (var(), inner.clone()).prop_map(|(v, b)| Formula::forall(v, b)),
            (var(), inner).prop_map(|(v, b)| Formula::exists(v, b)),
        ]
    })
}

/// A two-element structure with arbitrary tables.
pub fn small_model() -> impl Strategy<Value = FiniteModel> {
    (any::<u8>(), any::<u16>()).prop_map(|(b, d)| {
        let mut m = FiniteModel::empty(2);
        for i in 0..8usize {
            if b >> i & 1 == 1 {
                m.between.insert([i >> 2 & 1, i >> 1 & 1, i & 1]);
            }
        }
        for i in 0..16usize {
            if d >> i & 1 == 1 {
                m.congruent.insert([i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1]);
            }
        }
        m
    })
}

/// `(p -> q) & (q -> p)`.
pub fn iff(p: Formula, q: Formula) -> Formula {
    Formula::and(Formula::implies(p.clone(), q.clone()), Formula::implies(q, p))
}
