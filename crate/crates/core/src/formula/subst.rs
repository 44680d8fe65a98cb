use std::collections::BTreeSet;

use super::{Formula, Term};

/// Least-suffix fresh variant of `base` not in `avoid`: `x` becomes `x1`,
/// then `x2`, and so on. Trailing digits of `base` are replaced, not extended.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    (1u64..)
        .map(|i| format!("{stem}{i}"))
        .find(|cand| !avoid.contains(cand))
        .expect("unbounded suffix search")
}

fn term_vars(t: &Term) -> BTreeSet<String> {
    match t {
        Term::Var(v) => BTreeSet::from([v.clone()]),
        Term::Point(..) => BTreeSet::new(),
    }
}

/// Capture-avoiding substitution of `t` for the free occurrences of `v`.
pub fn substitute(f: &Formula, v: &str, t: &Term) -> Formula {
    match f {
        Formula::Atom(a) => Formula::Atom(a.map_terms(|x| match x {
            Term::Var(name) if name == v => t.clone(),
            other => other.clone(),
        })),
        Formula::Not(g) => Formula::not(substitute(g, v, t)),
        Formula::And(l, r) => Formula::and(substitute(l, v, t), substitute(r, v, t)),
        Formula::Or(l, r) => Formula::or(substitute(l, v, t), substitute(r, v, t)),
        Formula::Implies(l, r) => Formula::implies(substitute(l, v, t), substitute(r, v, t)),
        Formula::Forall(x, body) | Formula::Exists(x, body) => {
            let universal = matches!(f, Formula::Forall(..));
            let rebuild = |x: String, b: Formula| {
                if universal {
                    Formula::forall(x, b)
                } else {
                    Formula::exists(x, b)
                }
            };
            if x == v || !body.has_free(v) {
                return f.clone();
            }
            let tvars = term_vars(t);
            if tvars.contains(x) {
                let mut avoid = body.free_variables();
                avoid.extend(tvars);
                avoid.insert(v.to_string());
                let renamed = fresh_name(x, &avoid);
                let body = substitute(body, x, &Term::Var(renamed.clone()));
                rebuild(renamed, substitute(&body, v, t))
            } else {
                rebuild(x.clone(), substitute(body, v, t))
            }
        }
    }
}

/// Equality up to consistent renaming of bound variables.
pub fn alpha_equal(f: &Formula, g: &Formula) -> bool {
    alpha(f, g, &mut Vec::new(), &mut Vec::new())
}

fn term_alpha(s: &Term, t: &Term, fb: &[&str], gb: &[&str]) -> bool {
    match (s, t) {
        (Term::Var(x), Term::Var(y)) => {
            let xi = fb.iter().rposition(|b| b == x);
            let yi = gb.iter().rposition(|b| b == y);
            match (xi, yi) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (Term::Point(a, b), Term::Point(c, d)) => a == c && b == d,
        _ => false,
    }
}

fn alpha<'a>(f: &'a Formula, g: &'a Formula, fb: &mut Vec<&'a str>, gb: &mut Vec<&'a str>) -> bool {
    match (f, g) {
        (Formula::Atom(a), Formula::Atom(b)) => {
            a.symbol() == b.symbol()
                && a.terms()
                    .iter()
                    .zip(b.terms())
                    .all(|(s, t)| term_alpha(s, t, fb, gb))
        }
        (Formula::Not(x), Formula::Not(y)) => alpha(x, y, fb, gb),
        (Formula::And(l1, r1), Formula::And(l2, r2))
        | (Formula::Or(l1, r1), Formula::Or(l2, r2))
        | (Formula::Implies(l1, r1), Formula::Implies(l2, r2)) => {
            alpha(l1, l2, fb, gb) && alpha(r1, r2, fb, gb)
        }
        (Formula::Forall(x, b1), Formula::Forall(y, b2))
        | (Formula::Exists(x, b1), Formula::Exists(y, b2)) => {
            fb.push(x);
            gb.push(y);
            let eq = alpha(b1, b2, fb, gb);
            fb.pop();
            gb.pop();
            eq
        }
        _ => false,
    }
}

/// Which free occurrences of a term a rewrite touches (1-based, counted
/// left to right).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Occurrences {
    All,
    Positions(Vec<usize>),
}

/// Replaces selected free occurrences of `from` by `to`. Fails if a position
/// does not exist, is repeated, or if `to` would be captured by a binder.
pub fn rewrite_occurrences(
    f: &Formula,
    from: &Term,
    to: &Term,
    which: &Occurrences,
) -> Result<Formula, String> {
    if let Occurrences::Positions(ps) = which {
        let distinct: BTreeSet<_> = ps.iter().collect();
        if distinct.len() != ps.len() {
            return Err("repeated occurrence position".into());
        }
        if ps.contains(&0) {
            return Err("occurrence positions start at 1".into());
        }
    }
    let mut counter = 0usize;
    let mut bound = Vec::new();
    let out = rewrite(f, from, to, which, &mut counter, &mut bound)?;
    if let Occurrences::Positions(ps) = which {
        if let Some(p) = ps.iter().find(|p| **p > counter) {
            return Err(format!(
                "occurrence {p} requested but `{from}` occurs free only {counter} time(s)"
            ));
        }
    }
    Ok(out)
}

fn rewrite(
    f: &Formula,
    from: &Term,
    to: &Term,
    which: &Occurrences,
    counter: &mut usize,
    bound: &mut Vec<String>,
) -> Result<Formula, String> {
    Ok(match f {
        Formula::Atom(a) => {
            let mut err = None;
            let atom = a.map_terms(|t| {
                let free = match t {
                    Term::Var(v) => !bound.contains(v),
                    Term::Point(..) => true,
                };
                if t != from || !free {
                    return t.clone();
                }
                *counter += 1;
                let selected = match which {
                    Occurrences::All => true,
                    Occurrences::Positions(ps) => ps.contains(counter),
                };
                if !selected {
                    return t.clone();
                }
                if let Term::Var(v) = to {
                    if bound.contains(v) {
                        err = Some(format!("rewriting to `{v}` would be captured by a binder"));
                    }
                }
                to.clone()
            });
            if let Some(e) = err {
                return Err(e);
            }
            Formula::Atom(atom)
        }
        Formula::Not(g) => Formula::not(rewrite(g, from, to, which, counter, bound)?),
        Formula::And(l, r) => Formula::and(
            rewrite(l, from, to, which, counter, bound)?,
            rewrite(r, from, to, which, counter, bound)?,
        ),
        Formula::Or(l, r) => Formula::or(
            rewrite(l, from, to, which, counter, bound)?,
            rewrite(r, from, to, which, counter, bound)?,
        ),
        Formula::Implies(l, r) => Formula::implies(
            rewrite(l, from, to, which, counter, bound)?,
            rewrite(r, from, to, which, counter, bound)?,
        ),
        Formula::Forall(x, body) | Formula::Exists(x, body) => {
            bound.push(x.clone());
            let b = rewrite(body, from, to, which, counter, bound);
            bound.pop();
            if matches!(f, Formula::Forall(..)) {
                Formula::forall(x.clone(), b?)
            } else {
                Formula::exists(x.clone(), b?)
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, render_formula};

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn plain_substitution() {
        let f = substitute(&p("B x b c"), "x", &Term::var("a"));
        assert_eq!(f, p("B a b c"));
    }

    #[test]
    fn capture_forces_renaming() {
        let f = substitute(&p("exists x. = x y"), "y", &Term::var("x"));
        assert_eq!(render_formula(&f), "exists x1. = x1 x");
    }

    #[test]
    fn fresh_names_take_least_unused_suffix() {
        let avoid: BTreeSet<String> = ["x1", "x3"].iter().map(|s| s.to_string()).collect();
        assert_eq!(fresh_name("x", &avoid), "x2");
        assert_eq!(fresh_name("x1", &avoid), "x2");
        assert_eq!(fresh_name("a'", &BTreeSet::new()), "a'1");
    }

    #[test]
    fn bound_occurrences_untouched() {
        let f = p("forall x. B x y x");
        assert_eq!(substitute(&f, "x", &Term::var("z")), f);
    }

    #[test]
    fn alpha_examples() {
        assert!(alpha_equal(&p("forall a. B a a a"), &p("forall z. B z z z")));
        assert!(!alpha_equal(&p("forall a. B a b a"), &p("forall a. B a c a")));
        assert!(!alpha_equal(&p("forall a b. B a b a"), &p("forall a b. B b a b")));
        // shadowing
        assert!(alpha_equal(&p("forall a a. B a a a"), &p("forall b c. B c c c")));
        assert!(!alpha_equal(&p("forall a a. B a a a"), &p("forall b c. B b b b")));
        // a bound variable never matches a free one of the same name
        assert!(!alpha_equal(&p("forall b. B a b b"), &p("forall c. B a b c")));
    }

    #[test]
    fn rewrite_selected_positions() {
        let f = p("D a a b a");
        let to = Term::var("b");
        let g = rewrite_occurrences(&f, &Term::var("a"), &to, &Occurrences::Positions(vec![2]))
            .unwrap();
        assert_eq!(g, p("D a b b a"));
        let all = rewrite_occurrences(&f, &Term::var("a"), &to, &Occurrences::All).unwrap();
        assert_eq!(all, p("D b b b b"));
        assert!(
            rewrite_occurrences(&f, &Term::var("a"), &to, &Occurrences::Positions(vec![4])).is_err()
        );
        assert!(rewrite_occurrences(
            &f,
            &Term::var("a"),
            &to,
            &Occurrences::Positions(vec![1, 1])
        )
        .is_err());
    }

    #[test]
    fn rewrite_respects_binders() {
        let f = p("B x a a & (forall a. = a x)");
        let g = rewrite_occurrences(&f, &Term::var("a"), &Term::var("c"), &Occurrences::All)
            .unwrap();
        assert_eq!(g, p("B x c c & (forall a. = a x)"));
        let capture = p("forall y. B x y y");
        assert!(
            rewrite_occurrences(&capture, &Term::var("x"), &Term::var("y"), &Occurrences::All)
                .is_err()
        );
    }
}
