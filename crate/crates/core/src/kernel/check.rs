use std::collections::{BTreeSet, HashMap};

use super::{CheckResult, Derivation, ProofLine, Rule};
use crate::formula::{
    alpha_equal, is_valid_var_name, render_formula, rewrite_occurrences, substitute, Atom,
    Formula, Term,
};

enum FrameKind {
    Assume,
    Obtain { var: String },
}

struct Frame {
    kind: FrameKind,
    parent: Vec<usize>,
    opener: usize,
    last: usize,
    closed: bool,
}

struct Checker<'d> {
    d: &'d Derivation,
    seen: HashMap<usize, &'d ProofLine>,
    order: Vec<&'d ProofLine>,
    frames: HashMap<usize, Frame>,
    witnesses: BTreeSet<String>,
}

type Step = Result<(), String>;

fn is_prefix(prefix: &[usize], of: &[usize]) -> bool {
    prefix.len() <= of.len() && of[..prefix.len()] == *prefix
}

fn same(stated: &Formula, expected: &Formula, what: &str) -> Step {
    if alpha_equal(stated, expected) {
        Ok(())
    } else {
        Err(format!(
            "{what}: expected `{}`, line states `{}`",
            render_formula(expected),
            render_formula(stated)
        ))
    }
}

impl<'d> Checker<'d> {
    fn visible(&self, index: usize, scope: &[usize]) -> Result<&'d Formula, String> {
        let line = self
            .seen
            .get(&index)
            .ok_or_else(|| format!("line {index} does not exist before this line"))?;
        if !is_prefix(&line.scope, scope) {
            return Err(format!("line {index} is inside a closed frame"));
        }
        Ok(&line.formula)
    }

    /// A closed frame whose parent scope encloses `scope`; returns the
    /// opener formula and the frame's result formula.
    fn frame(&self, index: usize, scope: &[usize]) -> Result<(&Frame, &'d Formula, &'d Formula), String> {
        let frame = self
            .frames
            .get(&index)
            .ok_or_else(|| format!("no frame opened at line {index}"))?;
        if !frame.closed {
            return Err(format!("frame {index} is still open"));
        }
        if !is_prefix(&frame.parent, scope) {
            return Err(format!("frame {index} is not reachable from this scope"));
        }
        let last = self.seen[&frame.last];
        if last.scope.last() != Some(&index) {
            return Err(format!(
                "frame {index} ends inside a nested frame (line {})",
                frame.last
            ));
        }
        Ok((frame, &self.seen[&frame.opener].formula, &last.formula))
    }

    fn check_scope(&mut self, line: &ProofLine, prev_scope: &[usize]) -> Step {
        let (parent, own) = if line.rule.opens_frame() {
            match line.scope.split_last() {
                Some((last, parent)) if *last == line.index => (parent, true),
                _ => return Err("a frame-opening line must list itself as innermost scope".into()),
            }
        } else {
            (&line.scope[..], false)
        };
        if !is_prefix(parent, prev_scope) {
            return Err("scope does not continue the enclosing frames".into());
        }
        for closed in &prev_scope[parent.len()..] {
            if let Some(f) = self.frames.get_mut(closed) {
                f.closed = true;
            }
        }
        if own {
            let kind = match &line.rule {
                Rule::Obtain { var, .. } => FrameKind::Obtain { var: var.clone() },
                _ => FrameKind::Assume,
            };
            self.frames.insert(
                line.index,
                Frame {
                    kind,
                    parent: parent.to_vec(),
                    opener: line.index,
                    last: line.index,
                    closed: false,
                },
            );
        }
        Ok(())
    }

    fn check_rule(&self, line: &ProofLine) -> Step {
        let scope = &line.scope[..];
        let stated = &line.formula;
        match &line.rule {
            Rule::Premise(name) => {
                let premise = self.d.premises.get(name).ok_or_else(|| {
                    format!("`{name}` is not a premise of this derivation")
                })?;
                same(stated, &premise.sentence, &format!("premise {name}"))
            }
            Rule::ForallElim { line: src, terms } => {
                if terms.is_empty() {
                    return Err("forall-elim needs at least one term".into());
                }
                let mut f = self.visible(*src, scope)?.clone();
                for t in terms {
                    f = match f {
                        Formula::Forall(v, body) => substitute(&body, &v, t),
                        other => {
                            return Err(format!(
                                "cannot instantiate non-universal `{}`",
                                render_formula(&other)
                            ))
                        }
                    };
                }
                same(stated, &f, "instantiation")
            }
            Rule::ForallIntro { line: src, var } => {
                if !is_valid_var_name(var) {
                    return Err(format!("`{var}` is not a variable name"));
                }
                let body = self.visible(*src, scope)?;
                for open in scope {
                    let frame = &self.frames[open];
                    if let FrameKind::Obtain { var: w } = &frame.kind {
                        if w == var {
                            return Err(format!("`{var}` is the witness of open frame {open}"));
                        }
                    }
                    if self.seen[&frame.opener].formula.has_free(var) {
                        return Err(format!(
                            "`{var}` occurs free in the open assumption at line {}",
                            frame.opener
                        ));
                    }
                }
                same(stated, &Formula::forall(var.clone(), body.clone()), "generalisation")
            }
            Rule::ImpliesElim {
                implication,
                antecedent,
            } => match self.visible(*implication, scope)? {
                Formula::Implies(a, c) => {
                    same(self.visible(*antecedent, scope)?, a, "antecedent")?;
                    same(stated, c, "consequent")
                }
                other => Err(format!("line {implication} is not an implication: `{other}`")),
            },
            Rule::ImpliesIntro { frame } => {
                let (f, opener, result) = self.frame(*frame, scope)?;
                if !matches!(f.kind, FrameKind::Assume) {
                    return Err(format!("frame {frame} is not an assumption"));
                }
                same(
                    stated,
                    &Formula::implies(opener.clone(), result.clone()),
                    "implication introduction",
                )
            }
            Rule::AndIntro { left, right } => {
                let l = self.visible(*left, scope)?;
                let r = self.visible(*right, scope)?;
                same(stated, &Formula::and(l.clone(), r.clone()), "conjunction")
            }
            Rule::AndElimLeft(src) | Rule::AndElimRight(src) => match self.visible(*src, scope)? {
                Formula::And(l, r) => {
                    let part = if matches!(line.rule, Rule::AndElimLeft(_)) { l } else { r };
                    same(stated, part, "conjunct")
                }
                other => Err(format!("line {src} is not a conjunction: `{other}`")),
            },
            Rule::OrIntroLeft(src) | Rule::OrIntroRight(src) => {
                let given = self.visible(*src, scope)?;
                match stated {
                    Formula::Or(l, r) => {
                        let part = if matches!(line.rule, Rule::OrIntroLeft(_)) { l } else { r };
                        same(part, given, "disjunct")
                    }
                    _ => Err("stated formula is not a disjunction".into()),
                }
            }
            Rule::Cases {
                disjunction,
                left,
                right,
            } => match self.visible(*disjunction, scope)? {
                Formula::Or(a, b) => {
                    for (frame, case) in [(left, a), (right, b)] {
                        let (f, opener, result) = self.frame(*frame, scope)?;
                        if !matches!(f.kind, FrameKind::Assume) {
                            return Err(format!("frame {frame} is not an assumption"));
                        }
                        same(opener, case, &format!("case assumption of frame {frame}"))?;
                        same(stated, result, &format!("result of frame {frame}"))?;
                    }
                    Ok(())
                }
                other => Err(format!("line {disjunction} is not a disjunction: `{other}`")),
            },
            Rule::ExcludedMiddle => match stated {
                Formula::Or(a, b) if matches!(&**b, Formula::Not(na) if alpha_equal(a, na)) => {
                    Ok(())
                }
                _ => Err("excluded middle must have the form `A | ~ A`".into()),
            },
            Rule::ExistsIntro { line: src, term } => {
                let given = self.visible(*src, scope)?;
                match stated {
                    Formula::Exists(v, body) => {
                        same(given, &substitute(body, v, term), "existential instance")
                    }
                    _ => Err("stated formula is not existential".into()),
                }
            }
            Rule::Assume => Ok(()),
            Rule::Obtain { var, from } => {
                if !is_valid_var_name(var) {
                    return Err(format!("`{var}` is not a variable name"));
                }
                if self.witnesses.contains(var) {
                    return Err(format!("`{var}` is already a witness elsewhere"));
                }
                if self.d.goal.has_free(var) {
                    return Err(format!("witness `{var}` occurs free in the goal"));
                }
                if let Some(l) = self.order.iter().find(|l| l.formula.has_free(var)) {
                    return Err(format!("witness `{var}` already occurs free at line {}", l.index));
                }
                match self.visible(*from, scope)? {
                    Formula::Exists(v, body) => {
                        same(stated, &substitute(body, v, &Term::var(var)), "witness instance")
                    }
                    other => Err(format!("line {from} is not existential: `{other}`")),
                }
            }
            Rule::ExistsElim { frame } => {
                let (f, _, result) = self.frame(*frame, scope)?;
                let FrameKind::Obtain { var } = &f.kind else {
                    return Err(format!("frame {frame} does not obtain a witness"));
                };
                if result.has_free(var) {
                    return Err(format!("witness `{var}` escapes its frame"));
                }
                same(stated, result, "existential elimination")
            }
            Rule::EqRefl(t) => same(stated, &Formula::equal(t.clone(), t.clone()), "reflexivity"),
            Rule::EqSym(src) => match self.visible(*src, scope)? {
                Formula::Atom(Atom::Equal(s, t)) => {
                    same(stated, &Formula::equal(t.clone(), s.clone()), "symmetry")
                }
                other => Err(format!("line {src} is not an equation: `{other}`")),
            },
            Rule::EqRewrite {
                target,
                equality,
                occurrences,
            } => {
                let (s, t) = match self.visible(*equality, scope)? {
                    Formula::Atom(Atom::Equal(s, t)) => (s, t),
                    other => return Err(format!("line {equality} is not an equation: `{other}`")),
                };
                let rewritten =
                    rewrite_occurrences(self.visible(*target, scope)?, s, t, occurrences)?;
                same(stated, &rewritten, "rewrite")
            }
            Rule::NotIntro { frame } => {
                let (f, opener, result) = self.frame(*frame, scope)?;
                if !matches!(f.kind, FrameKind::Assume) {
                    return Err(format!("frame {frame} is not an assumption"));
                }
                let negated = Formula::not(opener.clone());
                same(result, &negated, &format!("result of frame {frame}"))?;
                same(stated, &negated, "negation introduction")
            }
            Rule::Contradiction { positive, negative } => {
                let p = self.visible(*positive, scope)?;
                match self.visible(*negative, scope)? {
                    Formula::Not(n) if alpha_equal(n, p) => Ok(()),
                    other => Err(format!(
                        "line {negative} (`{other}`) is not the negation of line {positive}"
                    )),
                }
            }
            Rule::Reiterate(src) => same(stated, self.visible(*src, scope)?, "reiteration"),
        }
    }

    /// Witness variables never appear free outside their own frame.
    fn check_witness_confinement(&self, line: &ProofLine) -> Step {
        for (idx, frame) in &self.frames {
            if let FrameKind::Obtain { var } = &frame.kind {
                if !line.scope.contains(idx) && line.formula.has_free(var) {
                    return Err(format!("witness `{var}` of frame {idx} occurs outside it"));
                }
            }
        }
        Ok(())
    }
}

pub fn check_derivation(d: &Derivation) -> CheckResult {
    let mut ck = Checker {
        d,
        seen: HashMap::new(),
        order: Vec::new(),
        frames: HashMap::new(),
        witnesses: BTreeSet::new(),
    };
    let mut prev_index = 0;
    let mut prev_scope: Vec<usize> = Vec::new();
    for line in &d.lines {
        let fail = |reason: String| CheckResult::rejected(Some(line.index), reason);
        if line.index <= prev_index {
            return fail(format!("line numbers must increase (after {prev_index})"));
        }
        if let Err(e) = ck.check_scope(line, &prev_scope) {
            return fail(e);
        }
        if let Err(e) = ck.check_rule(line) {
            return fail(e);
        }
        if let Err(e) = ck.check_witness_confinement(line) {
            return fail(e);
        }
        if let Rule::Obtain { var, .. } = &line.rule {
            ck.witnesses.insert(var.clone());
        }
        for open in &line.scope {
            if let Some(f) = ck.frames.get_mut(open) {
                f.last = line.index;
            }
        }
        ck.seen.insert(line.index, line);
        ck.order.push(line);
        prev_index = line.index;
        prev_scope = line.scope.clone();
    }
    let Some(last) = d.lines.last() else {
        return CheckResult::rejected(None, "derivation has no lines");
    };
    if !last.scope.is_empty() {
        return CheckResult::rejected(Some(last.index), "derivation ends inside an open frame");
    }
    if !alpha_equal(&last.formula, &d.goal) {
        return CheckResult::rejected(
            Some(last.index),
            format!(
                "final formula `{}` does not match goal `{}`",
                render_formula(&last.formula),
                render_formula(&d.goal)
            ),
        );
    }
    CheckResult::accepted()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{get_axiom, AxiomSystem};
    use crate::formula::parse_formula;
    use crate::kernel::Verdict;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn line(index: usize, f: &str, rule: Rule, scope: &[usize]) -> ProofLine {
        ProofLine {
            index,
            formula: p(f),
            rule,
            scope: scope.to_vec(),
        }
    }

    fn deriv(premises: &[&str], goal: &str, lines: Vec<ProofLine>) -> Derivation {
        Derivation {
            name: "t".into(),
            premises: AxiomSystem::from_names("t", premises).unwrap(),
            goal: p(goal),
            lines,
        }
    }

    #[test]
    fn goal_mismatch_one_liner() {
        let re = get_axiom("RE").unwrap();
        let d = deriv(
            &["RE"],
            "B a a a",
            vec![ProofLine {
                index: 1,
                formula: re.sentence,
                rule: Rule::Premise("RE".into()),
                scope: vec![],
            }],
        );
        let r = check_derivation(&d);
        assert_eq!(r.verdict, Verdict::Rejected);
        assert_eq!(r.failing_line, Some(1));
        assert!(r.reason.contains("does not match goal"));
    }

    #[test]
    fn instantiation_and_generalisation() {
        let d = deriv(
            &["RE"],
            "forall u. D u u u u",
            vec![
                line(1, "forall a b. D a b b a", Rule::Premise("RE".into()), &[]),
                line(
                    2,
                    "D u u u u",
                    Rule::ForallElim {
                        line: 1,
                        terms: vec![Term::var("u"), Term::var("u")],
                    },
                    &[],
                ),
                line(3, "forall v. D v v v v", Rule::ForallIntro { line: 2, var: "u".into() }, &[]),
            ],
        );
        assert!(check_derivation(&d).is_accepted(), "{}", check_derivation(&d));
    }

    #[test]
    fn generalising_over_an_assumed_variable_fails() {
        let d = deriv(
            &[],
            "B a a a -> (forall a. B a a a)",
            vec![
                line(1, "B a a a", Rule::Assume, &[1]),
                line(2, "forall a. B a a a", Rule::ForallIntro { line: 1, var: "a".into() }, &[1]),
                line(3, "B a a a -> (forall a. B a a a)", Rule::ImpliesIntro { frame: 1 }, &[]),
            ],
        );
        let r = check_derivation(&d);
        assert_eq!(r.failing_line, Some(2), "{r}");
    }

    #[test]
    fn closed_frame_lines_are_invisible() {
        let d = deriv(
            &[],
            "B a b c",
            vec![
                line(1, "B a b c", Rule::Assume, &[1]),
                line(2, "B a b c -> B a b c", Rule::ImpliesIntro { frame: 1 }, &[]),
                line(3, "B a b c", Rule::Reiterate(1), &[]),
            ],
        );
        let r = check_derivation(&d);
        assert_eq!(r.failing_line, Some(3));
    }

    #[test]
    fn unclosed_frame_rejected() {
        let d = deriv(&[], "B a b c", vec![line(1, "B a b c", Rule::Assume, &[1])]);
        let r = check_derivation(&d);
        assert_eq!(r.failing_line, Some(1));
        assert!(r.reason.contains("open frame"));
    }

    #[test]
    fn witness_must_not_escape() {
        let d = deriv(
            &["SC"],
            "B a a w",
            vec![
                line(1, "forall a b c q. exists x. (B q a x & D a x b c)", Rule::Premise("SC".into()), &[]),
                line(
                    2,
                    "exists x. (B a a x & D a x a a)",
                    Rule::ForallElim {
                        line: 1,
                        terms: vec![Term::var("a"); 4],
                    },
                    &[],
                ),
                line(3, "B a a w & D a w a a", Rule::Obtain { var: "w".into(), from: 2 }, &[3]),
                line(4, "B a a w", Rule::AndElimLeft(3), &[3]),
                line(5, "B a a w", Rule::ExistsElim { frame: 3 }, &[]),
            ],
        );
        let r = check_derivation(&d);
        assert_eq!(r.verdict, Verdict::Rejected);
        assert_eq!(r.failing_line, Some(3), "{r}");
    }

    #[test]
    fn witness_must_be_fresh() {
        let d = deriv(
            &["SC"],
            "B a a a",
            vec![
                line(1, "B a a a", Rule::Assume, &[1]),
                line(2, "forall a b c q. exists x. (B q a x & D a x b c)", Rule::Premise("SC".into()), &[1]),
                line(
                    3,
                    "exists x. (B a a x & D a x a a)",
                    Rule::ForallElim {
                        line: 2,
                        terms: vec![Term::var("a"); 4],
                    },
                    &[1],
                ),
                line(4, "B a a a & D a a a a", Rule::Obtain { var: "a".into(), from: 3 }, &[1, 4]),
            ],
        );
        let r = check_derivation(&d);
        assert_eq!(r.failing_line, Some(4));
    }

    #[test]
    fn excluded_middle_and_cases() {
        let d = deriv(
            &[],
            "= a b | ~ = a b",
            vec![
                line(1, "= a b | ~ = a b", Rule::ExcludedMiddle, &[]),
                line(2, "= a b", Rule::Assume, &[2]),
                line(3, "= a b | ~ = a b", Rule::OrIntroLeft(2), &[2]),
                line(4, "~ = a b", Rule::Assume, &[4]),
                line(5, "= a b | ~ = a b", Rule::OrIntroRight(4), &[4]),
                line(6, "= a b | ~ = a b", Rule::Cases { disjunction: 1, left: 2, right: 4 }, &[]),
            ],
        );
        assert!(check_derivation(&d).is_accepted(), "{}", check_derivation(&d));
        let bad = {
            let mut d = d.clone();
            d.lines[0].formula = p("= a b | ~ = b a");
            d
        };
        assert_eq!(check_derivation(&bad).failing_line, Some(1));
    }

    #[test]
    fn negation_introduction_and_contradiction() {
        // From ~A derive A -> ~A's consequence via NotIntro.
        let d = deriv(
            &[],
            "~ = a b -> ~ = a b",
            vec![
                line(1, "~ = a b", Rule::Assume, &[1]),
                line(2, "= a b", Rule::Assume, &[1, 2]),
                line(3, "~ = a b", Rule::Contradiction { positive: 2, negative: 1 }, &[1, 2]),
                line(4, "~ = a b", Rule::NotIntro { frame: 2 }, &[1]),
                line(5, "~ = a b -> ~ = a b", Rule::ImpliesIntro { frame: 1 }, &[]),
            ],
        );
        assert!(check_derivation(&d).is_accepted(), "{}", check_derivation(&d));
    }

    #[test]
    fn equality_rules() {
        let d = deriv(
            &[],
            "= a b -> B b b b",
            vec![
                line(1, "= a b", Rule::Assume, &[1]),
                line(2, "= a a", Rule::EqRefl(Term::var("a")), &[1]),
                line(3, "= b a", Rule::EqSym(1), &[1]),
                line(
                    4,
                    "B b b b",
                    Rule::EqRewrite {
                        target: 2,
                        equality: 1,
                        occurrences: crate::formula::Occurrences::All,
                    },
                    &[1],
                ),
                line(5, "= a b -> B b b b", Rule::ImpliesIntro { frame: 1 }, &[]),
            ],
        );
        let r = check_derivation(&d);
        // `= a a` rewritten with a -> b is `= b b`, not `B b b b`.
        assert_eq!(r.failing_line, Some(4));
    }

    #[test]
    fn frame_cannot_end_in_nested_frame() {
        let d = deriv(
            &[],
            "B a a a -> B a a a",
            vec![
                line(1, "B a a a", Rule::Assume, &[1]),
                line(2, "= a a", Rule::Assume, &[1, 2]),
                line(3, "B a a a", Rule::Reiterate(1), &[1, 2]),
                line(4, "B a a a -> B a a a", Rule::ImpliesIntro { frame: 1 }, &[]),
            ],
        );
        let r = check_derivation(&d);
        assert_eq!(r.failing_line, Some(4));
        assert!(r.reason.contains("nested"), "{r}");
    }

    #[test]
    fn indices_must_increase() {
        let d = deriv(
            &[],
            "= a a",
            vec![
                line(2, "= a a", Rule::EqRefl(Term::var("a")), &[]),
                line(2, "= a a", Rule::EqRefl(Term::var("a")), &[]),
            ],
        );
        assert_eq!(check_derivation(&d).failing_line, Some(2));
    }
}
