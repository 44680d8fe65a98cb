use num_traits::One;

use super::{Atom, Formula, Rational, Term};

pub fn render_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn render_term(t: &Term) -> String {
    match t {
        Term::Var(v) => v.clone(),
        Term::Point(x, y) => format!("({},{})", render_rational(x), render_rational(y)),
    }
}

fn render_atom(a: &Atom, out: &mut String) {
    out.push_str(a.symbol());
    for t in a.terms() {
        out.push(' ');
        out.push_str(&render_term(t));
    }
}

/// Binding strength; higher binds tighter.
fn level(f: &Formula) -> u8 {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => 0,
        Formula::Implies(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Not(..) | Formula::Atom(..) => 4,
    }
}

/// Renders in the textual grammar. Binary connectives associate to the
/// right; quantifier bodies other than atoms, negations and further
/// quantifiers are parenthesised.
pub fn render_formula(f: &Formula) -> String {
    let mut out = String::new();
    write(f, &mut out);
    out
}

fn write_min(f: &Formula, min: u8, out: &mut String) {
    if level(f) < min {
        out.push('(');
        write(f, out);
        out.push(')');
    } else {
        write(f, out);
    }
}

fn write(f: &Formula, out: &mut String) {
    match f {
        Formula::Atom(a) => render_atom(a, out),
        Formula::Not(g) => {
            out.push_str("~ ");
            write_min(g, 4, out);
        }
        Formula::And(l, r) => {
            write_min(l, 4, out);
            out.push_str(" & ");
            write_min(r, 3, out);
        }
        Formula::Or(l, r) => {
            write_min(l, 3, out);
            out.push_str(" | ");
            write_min(r, 2, out);
        }
        Formula::Implies(l, r) => {
            write_min(l, 2, out);
            out.push_str(" -> ");
            write_min(r, 1, out);
        }
        Formula::Forall(..) | Formula::Exists(..) => {
            let universal = matches!(f, Formula::Forall(..));
            out.push_str(if universal { "forall" } else { "exists" });
            let mut body = f;
            loop {
                match body {
                    Formula::Forall(v, b) if universal => {
                        out.push(' ');
                        out.push_str(v);
                        body = b;
                    }
                    Formula::Exists(v, b) if !universal => {
                        out.push(' ');
                        out.push_str(v);
                        body = b;
                    }
                    _ => break,
                }
            }
            out.push_str(". ");
            match body {
                Formula::Atom(_) | Formula::Not(_) | Formula::Forall(..) | Formula::Exists(..) => {
                    write(body, out)
                }
                _ => {
                    out.push('(');
                    write(body, out);
                    out.push(')');
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    #[test]
    fn equality_atom() {
        let f = Formula::equal(Term::var("a"), Term::var("b"));
        assert_eq!(render_formula(&f), "= a b");
    }

    #[test]
    fn identity_of_equidistance() {
        let ie = Formula::forall_all(
            &["a", "b", "c"],
            Formula::implies(
                Formula::congruent(Term::var("a"), Term::var("b"), Term::var("c"), Term::var("c")),
                Formula::equal(Term::var("a"), Term::var("b")),
            ),
        );
        assert_eq!(render_formula(&ie), "forall a b c. (D a b c c -> = a b)");
    }

    #[test]
    fn existential_atom_body() {
        let f = Formula::exists(
            "x",
            Formula::between(Term::var("q"), Term::var("a"), Term::var("x")),
        );
        assert_eq!(render_formula(&f), "exists x. B q a x");
    }

    #[test]
    fn parenthesises_where_needed() {
        for src in [
            "(B a b c -> B a b c) -> B a b c",
            "(B a b c & B a b c) & B a b c",
            "(B a b c | = a b) & ~ (D a b c d & = a a)",
            "B a b c -> (forall x. B x x x)",
            "~ (exists x. = x a)",
            "forall x. exists y. (= x y | ~ = x y)",
            "D (1/2,-3) a (0,0) b",
        ] {
            let f = parse_formula(src).unwrap();
            assert_eq!(render_formula(&f), src);
            assert_eq!(parse_formula(&render_formula(&f)).unwrap(), f);
        }
    }
}
