//! Text format for derivations.
//!
//! ```text
//! name: lemma_abb
//! premises: IE, SC
//! goal: forall a b. B a b b
//! 1. forall a b c q. exists x. (B q a x & D a x b c) ; premise SC
//! 2. exists x. (B a b x & D b x b b) ; forall-elim 1 b b b a
//! 3. B a b w1 & D b w1 b b ; obtain w1 from 2
//!   ...
//! qed-frame
//! ```
//!
//! `assume` and `obtain` lines open a frame, `qed-frame` closes the innermost
//! one. Indentation is cosmetic; `#` starts a comment line.

use super::{Derivation, ProofLine, Rule};
use crate::axioms::{get_system, AxiomSystem};
use crate::formula::{parse_formula, parse_term, render_formula, render_term, Occurrences, Term};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

fn rule_text(rule: &Rule) -> String {
    let terms = |ts: &[Term]| ts.iter().map(render_term).collect::<Vec<_>>().join(" ");
    match rule {
        Rule::Premise(n) => format!("premise {n}"),
        Rule::ForallElim { line, terms: ts } => format!("forall-elim {line} {}", terms(ts)),
        Rule::ForallIntro { line, var } => format!("forall-intro {line} {var}"),
        Rule::ImpliesElim {
            implication,
            antecedent,
        } => format!("implies-elim {implication} {antecedent}"),
        Rule::ImpliesIntro { frame } => format!("implies-intro {frame}"),
        Rule::AndIntro { left, right } => format!("and-intro {left} {right}"),
        Rule::AndElimLeft(l) => format!("and-elim-left {l}"),
        Rule::AndElimRight(l) => format!("and-elim-right {l}"),
        Rule::OrIntroLeft(l) => format!("or-intro-left {l}"),
        Rule::OrIntroRight(l) => format!("or-intro-right {l}"),
        Rule::Cases {
            disjunction,
            left,
            right,
        } => format!("cases {disjunction} {left} {right}"),
        Rule::ExcludedMiddle => "excluded-middle".into(),
        Rule::ExistsIntro { line, term } => format!("exists-intro {line} {}", render_term(term)),
        Rule::Assume => "assume".into(),
        Rule::Obtain { var, from } => format!("obtain {var} from {from}"),
        Rule::ExistsElim { frame } => format!("exists-elim {frame}"),
        Rule::EqRefl(t) => format!("eq-refl {}", render_term(t)),
        Rule::EqSym(l) => format!("eq-sym {l}"),
        Rule::EqRewrite {
            target,
            equality,
            occurrences,
        } => {
            let occ = match occurrences {
                Occurrences::All => "all".to_string(),
                Occurrences::Positions(ps) => ps
                    .iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            };
            format!("eq-rewrite {target} {equality} {occ}")
        }
        Rule::NotIntro { frame } => format!("not-intro {frame}"),
        Rule::Contradiction { positive, negative } => {
            format!("contradiction {positive} {negative}")
        }
        Rule::Reiterate(l) => format!("reit {l}"),
    }
}

pub fn render_derivation(d: &Derivation) -> String {
    let mut out = format!("name: {}\n", d.name);
    let premises = if d.premises.is_builtin() {
        d.premises.name.clone()
    } else {
        d.premises.names().join(", ")
    };
    out.push_str(&format!("premises: {premises}\n"));
    out.push_str(&format!("goal: {}\n", render_formula(&d.goal)));
    let mut depth = 0usize;
    for line in &d.lines {
        let parent_depth = if line.rule.opens_frame() {
            line.scope.len().saturating_sub(1)
        } else {
            line.scope.len()
        };
        while depth > parent_depth {
            depth -= 1;
            out.push_str(&"  ".repeat(depth));
            out.push_str("qed-frame\n");
        }
        depth = line.scope.len();
        out.push_str(&"  ".repeat(parent_depth));
        out.push_str(&format!(
            "{}. {} ; {}\n",
            line.index,
            render_formula(&line.formula),
            rule_text(&line.rule)
        ));
    }
    while depth > 0 {
        depth -= 1;
        out.push_str(&"  ".repeat(depth));
        out.push_str("qed-frame\n");
    }
    out
}

struct Args<'a> {
    words: Vec<&'a str>,
    pos: usize,
    line: usize,
}

impl<'a> Args<'a> {
    fn err(&self, message: impl Into<String>) -> ScriptError {
        ScriptError {
            line: self.line,
            message: message.into(),
        }
    }

    fn word(&mut self, what: &str) -> Result<&'a str, ScriptError> {
        let w = self
            .words
            .get(self.pos)
            .copied()
            .ok_or_else(|| self.err(format!("missing {what}")))?;
        self.pos += 1;
        Ok(w)
    }

    fn index(&mut self) -> Result<usize, ScriptError> {
        let w = self.word("line number")?;
        w.parse()
            .map_err(|_| self.err(format!("`{w}` is not a line number")))
    }

    fn term(&mut self) -> Result<Term, ScriptError> {
        let w = self.word("term")?;
        parse_term(w).map_err(|e| self.err(format!("bad term `{w}`: {e}")))
    }

    fn rest(&mut self) -> Vec<&'a str> {
        let r = self.words[self.pos..].to_vec();
        self.pos = self.words.len();
        r
    }

    fn done(&self) -> Result<(), ScriptError> {
        match self.words.get(self.pos) {
            None => Ok(()),
            Some(w) => Err(self.err(format!("unexpected argument `{w}`"))),
        }
    }
}

fn parse_rule(text: &str, line: usize) -> Result<Rule, ScriptError> {
    let mut words = text.split_whitespace();
    let head = words.next().ok_or(ScriptError {
        line,
        message: "missing rule".into(),
    })?;
    let mut a = Args {
        words: words.collect(),
        pos: 0,
        line,
    };
    let rule = match head {
        "premise" => Rule::Premise(a.word("premise name")?.to_string()),
        "forall-elim" => {
            let src = a.index()?;
            let mut terms = Vec::new();
            for w in a.rest() {
                terms.push(parse_term(w).map_err(|e| a.err(format!("bad term `{w}`: {e}")))?);
            }
            if terms.is_empty() {
                return Err(a.err("forall-elim needs at least one term"));
            }
            Rule::ForallElim { line: src, terms }
        }
        "forall-intro" => Rule::ForallIntro {
            line: a.index()?,
            var: a.word("variable")?.to_string(),
        },
        "implies-elim" => Rule::ImpliesElim {
            implication: a.index()?,
            antecedent: a.index()?,
        },
        "implies-intro" => Rule::ImpliesIntro { frame: a.index()? },
        "and-intro" => Rule::AndIntro {
            left: a.index()?,
            right: a.index()?,
        },
        "and-elim-left" => Rule::AndElimLeft(a.index()?),
        "and-elim-right" => Rule::AndElimRight(a.index()?),
        "or-intro-left" => Rule::OrIntroLeft(a.index()?),
        "or-intro-right" => Rule::OrIntroRight(a.index()?),
        "cases" => Rule::Cases {
            disjunction: a.index()?,
            left: a.index()?,
            right: a.index()?,
        },
        "excluded-middle" => Rule::ExcludedMiddle,
        "exists-intro" => Rule::ExistsIntro {
            line: a.index()?,
            term: a.term()?,
        },
        "assume" => Rule::Assume,
        "obtain" => {
            let var = a.word("witness variable")?.to_string();
            if a.word("`from`")? != "from" {
                return Err(a.err("expected `obtain <var> from <line>`"));
            }
            Rule::Obtain {
                var,
                from: a.index()?,
            }
        }
        "exists-elim" => Rule::ExistsElim { frame: a.index()? },
        "eq-refl" => Rule::EqRefl(a.term()?),
        "eq-sym" => Rule::EqSym(a.index()?),
        "eq-rewrite" => {
            let target = a.index()?;
            let equality = a.index()?;
            let rest = a.rest();
            let occurrences = match rest.as_slice() {
                ["all"] => Occurrences::All,
                [] => return Err(a.err("eq-rewrite needs `all` or occurrence positions")),
                ps => Occurrences::Positions(
                    ps.iter()
                        .map(|p| {
                            p.parse()
                                .map_err(|_| a.err(format!("`{p}` is not an occurrence position")))
                        })
                        .collect::<Result<_, _>>()?,
                ),
            };
            Rule::EqRewrite {
                target,
                equality,
                occurrences,
            }
        }
        "not-intro" => Rule::NotIntro { frame: a.index()? },
        "contradiction" => Rule::Contradiction {
            positive: a.index()?,
            negative: a.index()?,
        },
        "reit" => Rule::Reiterate(a.index()?),
        other => return Err(a.err(format!("unknown rule `{other}`"))),
    };
    a.done()?;
    Ok(rule)
}

fn parse_premises(text: &str, name: &str, line: usize) -> Result<AxiomSystem, ScriptError> {
    let names: Vec<&str> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    let err = |message: String| ScriptError { line, message };
    if let [single] = names.as_slice() {
        if let Ok(sys) = get_system(single) {
            return Ok(sys);
        }
    }
    AxiomSystem::from_names(format!("premises of {name}"), &names).map_err(|e| err(e.to_string()))
}

pub fn parse_derivation(text: &str) -> Result<Derivation, ScriptError> {
    let mut name = None;
    let mut premises_text = None;
    let mut goal = None;
    let mut lines = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let err = |message: String| ScriptError { line: ln, message };
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        if s == "qed-frame" {
            if stack.pop().is_none() {
                return Err(err("qed-frame without an open frame".into()));
            }
            continue;
        }
        let header = |key: &str| {
            s.strip_prefix(key)
                .and_then(|r| r.strip_prefix(':'))
                .map(str::trim)
        };
        if let Some(v) = header("name") {
            if name.replace(v.to_string()).is_some() {
                return Err(err("duplicate `name:` header".into()));
            }
            continue;
        }
        if let Some(v) = header("premises") {
            if premises_text.replace((v.to_string(), ln)).is_some() {
                return Err(err("duplicate `premises:` header".into()));
            }
            continue;
        }
        if let Some(v) = header("goal") {
            let f = parse_formula(v).map_err(|e| err(format!("goal: {e}")))?;
            if goal.replace(f).is_some() {
                return Err(err("duplicate `goal:` header".into()));
            }
            continue;
        }
        let digits = s.bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 || s.as_bytes().get(digits) != Some(&b'.') {
            return Err(err(format!("expected `<n>. <formula> ; <rule>`, found `{s}`")));
        }
        let index: usize = s[..digits]
            .parse()
            .map_err(|_| err("line number out of range".into()))?;
        let body = &s[digits + 1..];
        let (formula_text, rule_text) = body
            .rsplit_once(';')
            .ok_or_else(|| err("missing `; <rule>`".into()))?;
        let formula = parse_formula(formula_text.trim()).map_err(|e| err(e.to_string()))?;
        let rule = parse_rule(rule_text, ln)?;
        let mut scope = stack.clone();
        if rule.opens_frame() {
            scope.push(index);
            stack.push(index);
        }
        lines.push(ProofLine {
            index,
            formula,
            rule,
            scope,
        });
    }
    let missing = |h: &str| ScriptError {
        line: 0,
        message: format!("missing `{h}:` header"),
    };
    let name = name.ok_or_else(|| missing("name"))?;
    let (premises_text, premises_line) = premises_text.ok_or_else(|| missing("premises"))?;
    let premises = parse_premises(&premises_text, &name, premises_line)?;
    Ok(Derivation {
        name,
        premises,
        goal: goal.ok_or_else(|| missing("goal"))?,
        lines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::check_derivation;

    const ABB: &str = "\
name: abb_by_hand
premises: IE, SC
goal: forall a b. B a b b
# segment construction from b towards the far side of a
1. forall a b c q. exists x. (B q a x & D a x b c) ; premise SC
2. exists x. (B a b x & D b x b b) ; forall-elim 1 b b b a
3. B a b w & D b w b b ; obtain w from 2
  4. D b w b b ; and-elim-right 3
  5. forall a b c. (D a b c c -> = a b) ; premise IE
  6. D b w b b -> = b w ; forall-elim 5 b w b
  7. = b w ; implies-elim 6 4
  8. = w b ; eq-sym 7
  9. B a b w ; and-elim-left 3
  10. B a b b ; eq-rewrite 9 8 1
qed-frame
11. B a b b ; exists-elim 3
12. forall b. B a b b ; forall-intro 11 b
13. forall a b. B a b b ; forall-intro 12 a
";

    #[test]
    fn hand_written_script_checks() {
        let d = parse_derivation(ABB).unwrap();
        assert_eq!(d.lines.len(), 13);
        assert_eq!(d.lines[3].scope, vec![3]);
        let r = check_derivation(&d);
        assert!(r.is_accepted(), "{r}");
    }

    #[test]
    fn render_parse_round_trip() {
        let d = parse_derivation(ABB).unwrap();
        let text = render_derivation(&d);
        assert_eq!(parse_derivation(&text).unwrap(), d);
    }

    #[test]
    fn system_premises_header() {
        let text = "name: x\npremises: A'\ngoal: forall a b. D a b b a\n";
        let d = parse_derivation(text).unwrap();
        assert_eq!(d.premises.name, "A'");
        assert!(d.lines.is_empty());
        assert!(!check_derivation(&d).is_accepted());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("name: x\npremises: RE\ngoal: B a a a\n1. B a a a ; frobnicate 1\n", 4),
            ("name: x\npremises: RE\ngoal: B a a a\nqed-frame\n", 4),
            ("name: x\npremises: NOPE\ngoal: B a a a\n", 2),
            ("name: x\npremises: RE\ngoal: B a a\n", 3),
            ("name: x\npremises: RE\ngoal: B a a a\n1. B a a a\n", 4),
            ("name: x\npremises: RE\ngoal: B a a a\n1. B a a a ; forall-elim 1\n", 4),
            ("name: x\npremises: RE\ngoal: B a a a\n1. B a a a ; reit 1 2\n", 4),
            ("name: x\nname: y\n", 2),
        ];
        for (text, line) in cases {
            let e = parse_derivation(text).unwrap_err();
            assert_eq!(e.line, line, "{text}: {e}");
        }
        assert_eq!(parse_derivation("premises: RE\ngoal: B a a a\n").unwrap_err().line, 0);
    }
}
