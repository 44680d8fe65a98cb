mod common;

use common::{formula, iff, small_model, var};
use proptest::prelude::*;
use tarski_core::formula::{alpha_equal, parse_formula, render_formula, substitute, Formula, Term};
use tarski_core::model::eval_formula_exhaustive;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn render_then_parse_is_identity(f in formula(true)) {
        let text = render_formula(&f);
        let back = parse_formula(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert!(alpha_equal(&back, &f), "{}", text);
        prop_assert_eq!(back, f);
    }

    #[test]
    fn substitution_free_variables(f in formula(false), v in var(), t in var()) {
        let g = substitute(&f, &v, &Term::var(t.clone()));
        let mut expected = f.free_variables();
        if expected.remove(&v) {
            expected.insert(t);
        }
        prop_assert_eq!(g.free_variables(), expected);
    }

    /// `f[t/v]` must mean `forall v. (v = t -> f)` in every structure; a
    /// captured `t` would break this.
    #[test]
    fn substitution_respects_meaning(f in formula(false), v in var(), t in var(), m in small_model()) {
        prop_assume!(v != t);
        let g = substitute(&f, &v, &Term::var(t.clone()));
        let defining = Formula::forall(
            v.clone(),
            Formula::implies(Formula::equal(Term::var(v.clone()), Term::var(t)), f),
        );
        let e = eval_formula_exhaustive(&m, &iff(g, defining)).unwrap();
        prop_assert!(e.holds);
    }

    #[test]
    fn substituting_a_variable_for_itself(f in formula(true), v in var()) {
        let g = substitute(&f, &v, &Term::var(v.clone()));
        prop_assert!(alpha_equal(&g, &f));
    }

    #[test]
    fn alpha_equality_is_reflexive_and_survives_renaming(f in formula(false), v in var()) {
        prop_assert!(alpha_equal(&f, &f));
        // Binding the same variable under two names yields alpha-equal sentences.
        let a = Formula::forall(v.clone(), f.clone());
        let w = "zz";
        let b = Formula::forall(w, substitute(&f, &v, &Term::var(w)));
        prop_assert!(alpha_equal(&a, &b));
    }
}
