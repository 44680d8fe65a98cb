//! Derivation scripts for the equivalence proofs between the two axiom
//! systems, and the supporting lemmas.
//!
//! Scripts are written against [`Script`], which only numbers lines and
//! tracks frames. Every formula is stated explicitly and re-checked by the
//! kernel; sub-proofs shared between scripts (`abab`, `abb`, ...) are
//! expanded inline with fresh witness names.

use std::collections::HashMap;

use super::{check_derivation, CheckResult, Derivation, ProofLine, Rule};
use crate::axioms::{get_axiom, get_system, AxiomSystem};
use crate::formula::{parse_formula, parse_term, Formula, Occurrences, Term};

pub const BUILTIN_NAMES: [&str; 11] = [
    "lemma_abab",
    "lemma_cdab",
    "lemma_abb",
    "lemma_sb",
    "lemma_re",
    "lemma_fs_implies_fsp",
    "lemma_fsp_implies_fs",
    "theorem_a_from_aprime",
    "theorem_aprime_from_a",
    "op_from_opp_given_sb",
    "opp_from_op_given_sb",
];

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown builtin derivation `{name}`; available: {}", BUILTIN_NAMES.join(", "))]
pub struct UnknownBuiltin {
    pub name: String,
}

pub fn builtin_names() -> &'static [&'static str] {
    &BUILTIN_NAMES
}

struct Script {
    name: String,
    premises: AxiomSystem,
    goal: Formula,
    lines: Vec<ProofLine>,
    stack: Vec<usize>,
    premise_lines: HashMap<String, usize>,
    witnesses: usize,
}

fn f(text: &str) -> Formula {
    parse_formula(text).unwrap_or_else(|e| panic!("script formula `{text}`: {e}"))
}

fn terms(names: &[&str]) -> Vec<Term> {
    names
        .iter()
        .map(|n| parse_term(n).expect("script term"))
        .collect()
}

fn first(occ: usize) -> Occurrences {
    Occurrences::Positions(vec![occ])
}

impl Script {
    fn new(name: &str, premises: AxiomSystem, goal: Formula) -> Self {
        Self {
            name: name.to_string(),
            premises,
            goal,
            lines: Vec::new(),
            stack: Vec::new(),
            premise_lines: HashMap::new(),
            witnesses: 0,
        }
    }

    fn with_premises(name: &str, premises: &[&str], goal: Formula) -> Self {
        let sys = AxiomSystem::from_names(premises.join(", "), premises).expect("known premises");
        Self::new(name, sys, goal)
    }

    fn push(&mut self, text: &str, rule: Rule) -> usize {
        self.push_formula(f(text), rule)
    }

    fn push_formula(&mut self, formula: Formula, rule: Rule) -> usize {
        let index = self.lines.len() + 1;
        let mut scope = self.stack.clone();
        if rule.opens_frame() {
            scope.push(index);
            self.stack.push(index);
        }
        self.lines.push(ProofLine {
            index,
            formula,
            rule,
            scope,
        });
        index
    }

    fn assume(&mut self, text: &str) -> usize {
        self.push(text, Rule::Assume)
    }

    fn obtain(&mut self, text: &str, var: &str, from: usize) -> usize {
        self.push(
            text,
            Rule::Obtain {
                var: var.to_string(),
                from,
            },
        )
    }

    fn close(&mut self) {
        self.stack.pop().expect("close without open frame");
    }

    fn fresh_witness(&mut self) -> String {
        self.witnesses += 1;
        format!("w{}", self.witnesses)
    }

    /// Cites a premise, reusing an earlier citation when it is still in scope.
    fn premise(&mut self, name: &str) -> usize {
        if let Some(&idx) = self.premise_lines.get(name) {
            let scope = &self.lines[idx - 1].scope;
            if scope.len() <= self.stack.len() && self.stack[..scope.len()] == scope[..] {
                return idx;
            }
        }
        let sentence = get_axiom(name).expect("premise in catalogue").sentence;
        let idx = self.push_formula(sentence, Rule::Premise(name.to_string()));
        self.premise_lines.insert(name.to_string(), idx);
        idx
    }

    fn forall_elim(&mut self, text: &str, line: usize, ts: &[&str]) -> usize {
        self.push(
            text,
            Rule::ForallElim {
                line,
                terms: terms(ts),
            },
        )
    }

    /// Generalises `line` (stating `body`) over `vars`, innermost binder first.
    fn generalise(&mut self, mut line: usize, body: &str, vars: &[&str]) -> usize {
        for k in (0..vars.len()).rev() {
            let text = format!("forall {}. ({body})", vars[k..].join(" "));
            line = self.push(
                &text,
                Rule::ForallIntro {
                    line,
                    var: vars[k].to_string(),
                },
            );
        }
        line
    }

    fn finish(self) -> Derivation {
        assert!(self.stack.is_empty(), "{}: unclosed frame", self.name);
        Derivation {
            name: self.name,
            premises: self.premises,
            goal: self.goal,
            lines: self.lines,
        }
    }
}

/// `D a b a b`, from TE and SC.
fn abab(s: &mut Script, a: &str, b: &str) -> usize {
    let sc = s.premise("SC");
    let ex = s.forall_elim(
        &format!("exists v. (B {a} {a} v & D {a} v {a} {b})"),
        sc,
        &[a, a, b, a],
    );
    let w = s.fresh_witness();
    let o = s.obtain(&format!("B {a} {a} {w} & D {a} {w} {a} {b}"), &w, ex);
    let cong = s.push(&format!("D {a} {w} {a} {b}"), Rule::AndElimRight(o));
    let te = s.premise("TE");
    let inst = s.forall_elim(
        &format!("D {a} {w} {a} {b} & D {a} {w} {a} {b} -> D {a} {b} {a} {b}"),
        te,
        &[a, &w, a, b, a, b],
    );
    let both = s.push(
        &format!("D {a} {w} {a} {b} & D {a} {w} {a} {b}"),
        Rule::AndIntro {
            left: cong,
            right: cong,
        },
    );
    s.push(
        &format!("D {a} {b} {a} {b}"),
        Rule::ImpliesElim {
            implication: inst,
            antecedent: both,
        },
    );
    s.close();
    s.push(&format!("D {a} {b} {a} {b}"), Rule::ExistsElim { frame: o })
}

/// `D c d a b` from the line `hyp` stating `D a b c d`, using TE and SC.
fn cdab(s: &mut Script, a: &str, b: &str, c: &str, d: &str, hyp: usize) -> usize {
    let refl = abab(s, a, b);
    let te = s.premise("TE");
    let inst = s.forall_elim(
        &format!("D {a} {b} {c} {d} & D {a} {b} {a} {b} -> D {c} {d} {a} {b}"),
        te,
        &[a, b, c, d, a, b],
    );
    let both = s.push(
        &format!("D {a} {b} {c} {d} & D {a} {b} {a} {b}"),
        Rule::AndIntro {
            left: hyp,
            right: refl,
        },
    );
    s.push(
        &format!("D {c} {d} {a} {b}"),
        Rule::ImpliesElim {
            implication: inst,
            antecedent: both,
        },
    )
}

/// `B a b b`, from IE and SC.
fn abb(s: &mut Script, a: &str, b: &str) -> usize {
    let sc = s.premise("SC");
    let ex = s.forall_elim(
        &format!("exists v. (B {a} {b} v & D {b} v {b} {b})"),
        sc,
        &[b, b, b, a],
    );
    let w = s.fresh_witness();
    let o = s.obtain(&format!("B {a} {b} {w} & D {b} {w} {b} {b}"), &w, ex);
    let cong = s.push(&format!("D {b} {w} {b} {b}"), Rule::AndElimRight(o));
    let ie = s.premise("IE");
    let inst = s.forall_elim(&format!("D {b} {w} {b} {b} -> = {b} {w}"), ie, &[b, &w, b]);
    let eq = s.push(
        &format!("= {b} {w}"),
        Rule::ImpliesElim {
            implication: inst,
            antecedent: cong,
        },
    );
    let sym = s.push(&format!("= {w} {b}"), Rule::EqSym(eq));
    let bet = s.push(&format!("B {a} {b} {w}"), Rule::AndElimLeft(o));
    s.push(
        &format!("B {a} {b} {b}"),
        Rule::EqRewrite {
            target: bet,
            equality: sym,
            occurrences: first(1),
        },
    );
    s.close();
    s.push(&format!("B {a} {b} {b}"), Rule::ExistsElim { frame: o })
}

/// `B c b a` from the line `hyp` stating `B a b c`, using IE, SC, IB and Pa.
fn sb(s: &mut Script, a: &str, b: &str, c: &str, hyp: usize) -> usize {
    let bcc = abb(s, b, c);
    let pa = s.premise("Pa");
    let inst = s.forall_elim(
        &format!("B {a} {b} {c} & B {b} {c} {c} -> (exists v. (B {b} v {b} & B {c} v {a}))"),
        pa,
        &[a, b, c, b, c],
    );
    let both = s.push(
        &format!("B {a} {b} {c} & B {b} {c} {c}"),
        Rule::AndIntro {
            left: hyp,
            right: bcc,
        },
    );
    let ex = s.push(
        &format!("exists v. (B {b} v {b} & B {c} v {a})"),
        Rule::ImpliesElim {
            implication: inst,
            antecedent: both,
        },
    );
    let w = s.fresh_witness();
    let o = s.obtain(&format!("B {b} {w} {b} & B {c} {w} {a}"), &w, ex);
    let bwb = s.push(&format!("B {b} {w} {b}"), Rule::AndElimLeft(o));
    let ib = s.premise("IB");
    let ib_inst = s.forall_elim(&format!("B {b} {w} {b} -> = {b} {w}"), ib, &[b, &w]);
    let eq = s.push(
        &format!("= {b} {w}"),
        Rule::ImpliesElim {
            implication: ib_inst,
            antecedent: bwb,
        },
    );
    let sym = s.push(&format!("= {w} {b}"), Rule::EqSym(eq));
    let cwa = s.push(&format!("B {c} {w} {a}"), Rule::AndElimRight(o));
    s.push(
        &format!("B {c} {b} {a}"),
        Rule::EqRewrite {
            target: cwa,
            equality: sym,
            occurrences: first(1),
        },
    );
    s.close();
    s.push(&format!("B {c} {b} {a}"), Rule::ExistsElim { frame: o })
}

/// `forall a b. D a b b a` from the premises of A'. The witness of segment
/// construction is called `x` and the proof splits on `x = a`.
fn reflexivity(s: &mut Script) -> usize {
    let sc = s.premise("SC");
    let ex = s.forall_elim("exists v. (B b a v & D a v b a)", sc, &["a", "b", "a", "b"]);
    let o = s.obtain("B b a x & D a x b a", "x", ex);
    let em = s.push("= x a | ~ = x a", Rule::ExcludedMiddle);

    let same = s.assume("= x a");
    let axba = s.push("D a x b a", Rule::AndElimRight(o));
    let aaba = s.push(
        "D a a b a",
        Rule::EqRewrite {
            target: axba,
            equality: same,
            occurrences: first(1),
        },
    );
    let baaa = cdab(s, "a", "a", "b", "a", aaba);
    let ie = s.premise("IE");
    let ie_inst = s.forall_elim("D b a a a -> = b a", ie, &["b", "a", "a"]);
    let ba = s.push(
        "= b a",
        Rule::ImpliesElim {
            implication: ie_inst,
            antecedent: baaa,
        },
    );
    let ab = s.push("= a b", Rule::EqSym(ba));
    s.push(
        "D a b b a",
        Rule::EqRewrite {
            target: aaba,
            equality: ab,
            occurrences: first(2),
        },
    );
    s.close();

    let differ = s.assume("~ = x a");
    let bax = s.push("B b a x", Rule::AndElimLeft(o));
    let xab = sb(s, "b", "a", "x", bax);
    let xaxa = abab(s, "x", "a");
    let abab_line = abab(s, "a", "b");
    let aaaa = abab(s, "a", "a");
    let fsp = s.premise("FS'");
    let inst = s.forall_elim(
        "~ = x a & B x a b & B x a b & D x a x a & D a b a b & D x a x a & D a a a a -> D a b b a",
        fsp,
        &["x", "a", "b", "a", "x", "a", "b", "a"],
    );
    let mut conj = s.push(
        "D x a x a & D a a a a",
        Rule::AndIntro {
            left: xaxa,
            right: aaaa,
        },
    );
    let mut text = "D x a x a & D a a a a".to_string();
    for (part, line) in [
        ("D a b a b", abab_line),
        ("D x a x a", xaxa),
        ("B x a b", xab),
        ("B x a b", xab),
        ("~ = x a", differ),
    ] {
        text = format!("{part} & {text}");
        conj = s.push(&text, Rule::AndIntro { left: line, right: conj });
    }
    s.push(
        "D a b b a",
        Rule::ImpliesElim {
            implication: inst,
            antecedent: conj,
        },
    );
    s.close();

    s.push(
        "D a b b a",
        Rule::Cases {
            disjunction: em,
            left: same,
            right: differ,
        },
    );
    s.close();
    let done = s.push("D a b b a", Rule::ExistsElim { frame: o });
    s.generalise(done, "D a b b a", &["a", "b"])
}

const FIVE_SEGMENT_HYPOTHESES: &str =
    "~ = a b & B a b c & B a' b' c' & D a b a' b' & D b c b' c' & D a d a' d' & D b d b' d'";
const FIVE_SEGMENT_VARS: [&str; 8] = ["a", "b", "c", "d", "a'", "b'", "c'", "d'"];

/// Turns one five-segment form into the other given a reflexivity line.
/// `from` is the premise being used, `to_primed` selects the direction.
fn five_segment_swap(s: &mut Script, re: usize, to_primed: bool) -> usize {
    let h = FIVE_SEGMENT_HYPOTHESES;
    let (premise, have, want, refl_terms, refl, te_terms) = if to_primed {
        (
            "FS",
            "D c d c' d'",
            "D d c c' d'",
            ["c", "d"],
            "D c d d c",
            ["c", "d", "d", "c", "c'", "d'"],
        )
    } else {
        (
            "FS'",
            "D d c c' d'",
            "D c d c' d'",
            ["d", "c"],
            "D d c c d",
            ["d", "c", "c", "d", "c'", "d'"],
        )
    };
    let hyp = s.assume(h);
    let ax = s.premise(premise);
    let inst = s.forall_elim(&format!("{h} -> {have}"), ax, &FIVE_SEGMENT_VARS);
    let got = s.push(
        have,
        Rule::ImpliesElim {
            implication: inst,
            antecedent: hyp,
        },
    );
    let refl_line = s.forall_elim(refl, re, &refl_terms);
    let te = s.premise("TE");
    let te_inst = s.forall_elim(&format!("{refl} & {have} -> {want}"), te, &te_terms);
    let both = s.push(
        &format!("{refl} & {have}"),
        Rule::AndIntro {
            left: refl_line,
            right: got,
        },
    );
    s.push(
        want,
        Rule::ImpliesElim {
            implication: te_inst,
            antecedent: both,
        },
    );
    s.close();
    let imp = s.push(&format!("{h} -> {want}"), Rule::ImpliesIntro { frame: hyp });
    s.generalise(imp, &format!("{h} -> {want}"), &FIVE_SEGMENT_VARS)
}

fn sentence(name: &str) -> Formula {
    get_axiom(name).expect("catalogue axiom").sentence
}

fn build(name: &str) -> Option<Derivation> {
    let d = match name {
        "lemma_abab" => {
            let mut s = Script::with_premises(name, &["TE", "SC"], f("forall a b. D a b a b"));
            let l = abab(&mut s, "a", "b");
            s.generalise(l, "D a b a b", &["a", "b"]);
            s.finish()
        }
        "lemma_cdab" => {
            let mut s = Script::with_premises(
                name,
                &["TE", "SC"],
                f("forall a b c d. (D a b c d -> D c d a b)"),
            );
            let hyp = s.assume("D a b c d");
            cdab(&mut s, "a", "b", "c", "d", hyp);
            s.close();
            let imp = s.push("D a b c d -> D c d a b", Rule::ImpliesIntro { frame: hyp });
            s.generalise(imp, "D a b c d -> D c d a b", &["a", "b", "c", "d"]);
            s.finish()
        }
        "lemma_abb" => {
            let mut s = Script::with_premises(name, &["IE", "SC"], f("forall a b. B a b b"));
            let l = abb(&mut s, "a", "b");
            s.generalise(l, "B a b b", &["a", "b"]);
            s.finish()
        }
        "lemma_sb" => {
            let mut s = Script::with_premises(name, &["IE", "SC", "IB", "Pa"], sentence("SB"));
            let hyp = s.assume("B a b c");
            sb(&mut s, "a", "b", "c", hyp);
            s.close();
            let imp = s.push("B a b c -> B c b a", Rule::ImpliesIntro { frame: hyp });
            s.generalise(imp, "B a b c -> B c b a", &["a", "b", "c"]);
            s.finish()
        }
        "lemma_re" => {
            let mut s = Script::new(name, get_system("A'").unwrap(), sentence("RE"));
            reflexivity(&mut s);
            s.finish()
        }
        "lemma_fs_implies_fsp" => {
            let mut s = Script::with_premises(name, &["RE", "TE", "FS"], sentence("FS'"));
            let re = s.premise("RE");
            five_segment_swap(&mut s, re, true);
            s.finish()
        }
        "lemma_fsp_implies_fs" => {
            let mut s = Script::with_premises(name, &["RE", "TE", "FS'"], sentence("FS"));
            let re = s.premise("RE");
            five_segment_swap(&mut s, re, false);
            s.finish()
        }
        "theorem_a_from_aprime" => {
            let goal = Formula::and(sentence("RE"), sentence("FS"));
            let mut s = Script::new(name, get_system("A'").unwrap(), goal.clone());
            let re = reflexivity(&mut s);
            let fs = five_segment_swap(&mut s, re, false);
            s.push_formula(goal, Rule::AndIntro { left: re, right: fs });
            s.finish()
        }
        "theorem_aprime_from_a" => {
            let mut s = Script::new(name, get_system("A").unwrap(), sentence("FS'"));
            let re = s.premise("RE");
            five_segment_swap(&mut s, re, true);
            s.finish()
        }
        "op_from_opp_given_sb" => {
            let mut s = Script::with_premises(name, &["SB", "OP'"], sentence("OP"));
            let hyp = s.assume("B a p c & B q c b");
            let opp = s.premise("OP'");
            let ex = s.forall_elim(
                "exists v. (B a p c & B q c b -> B a v q & B b p v)",
                opp,
                &["a", "b", "c", "p", "q"],
            );
            let o = s.obtain("B a p c & B q c b -> B a x q & B b p x", "x", ex);
            let both = s.push(
                "B a x q & B b p x",
                Rule::ImpliesElim {
                    implication: o,
                    antecedent: hyp,
                },
            );
            let bpx = s.push("B b p x", Rule::AndElimRight(both));
            let sbl = s.premise("SB");
            let sb_inst = s.forall_elim("B b p x -> B x p b", sbl, &["b", "p", "x"]);
            let xpb = s.push(
                "B x p b",
                Rule::ImpliesElim {
                    implication: sb_inst,
                    antecedent: bpx,
                },
            );
            let axq = s.push("B a x q", Rule::AndElimLeft(both));
            let conj = s.push(
                "B a x q & B x p b",
                Rule::AndIntro {
                    left: axq,
                    right: xpb,
                },
            );
            s.push(
                "exists v. (B a v q & B v p b)",
                Rule::ExistsIntro {
                    line: conj,
                    term: Term::var("x"),
                },
            );
            s.close();
            s.push("exists v. (B a v q & B v p b)", Rule::ExistsElim { frame: o });
            s.close();
            let body = "B a p c & B q c b -> (exists v. (B a v q & B v p b))";
            let imp = s.push(body, Rule::ImpliesIntro { frame: hyp });
            s.generalise(imp, body, &["a", "b", "c", "p", "q"]);
            s.finish()
        }
        "opp_from_op_given_sb" => {
            let mut s = Script::with_premises(name, &["SB", "OP"], sentence("OP'"));
            let h = "B a p c & B q c b";
            let target = format!("exists v. ({h} -> B a v q & B b p v)");
            let em = s.push(&format!("{h} | ~ ({h})"), Rule::ExcludedMiddle);

            let yes = s.assume(h);
            let op = s.premise("OP");
            let op_inst = s.forall_elim(
                &format!("{h} -> (exists v. (B a v q & B v p b))"),
                op,
                &["a", "b", "c", "p", "q"],
            );
            let ex = s.push(
                "exists v. (B a v q & B v p b)",
                Rule::ImpliesElim {
                    implication: op_inst,
                    antecedent: yes,
                },
            );
            let o = s.obtain("B a x q & B x p b", "x", ex);
            let xpb = s.push("B x p b", Rule::AndElimRight(o));
            let sbl = s.premise("SB");
            let sb_inst = s.forall_elim("B x p b -> B b p x", sbl, &["x", "p", "b"]);
            let bpx = s.push(
                "B b p x",
                Rule::ImpliesElim {
                    implication: sb_inst,
                    antecedent: xpb,
                },
            );
            let axq = s.push("B a x q", Rule::AndElimLeft(o));
            let conj = s.push(
                "B a x q & B b p x",
                Rule::AndIntro {
                    left: axq,
                    right: bpx,
                },
            );
            let again = s.assume(h);
            s.push("B a x q & B b p x", Rule::Reiterate(conj));
            s.close();
            let imp = s.push(
                &format!("{h} -> B a x q & B b p x"),
                Rule::ImpliesIntro { frame: again },
            );
            s.push(
                &target,
                Rule::ExistsIntro {
                    line: imp,
                    term: Term::var("x"),
                },
            );
            s.close();
            s.push(&target, Rule::ExistsElim { frame: o });
            s.close();

            let no = s.assume(&format!("~ ({h})"));
            let suppose = s.assume(h);
            s.push(
                "B a a q & B b p a",
                Rule::Contradiction {
                    positive: suppose,
                    negative: no,
                },
            );
            s.close();
            let vacuous = s.push(
                &format!("{h} -> B a a q & B b p a"),
                Rule::ImpliesIntro { frame: suppose },
            );
            s.push(
                &target,
                Rule::ExistsIntro {
                    line: vacuous,
                    term: Term::var("a"),
                },
            );
            s.close();

            let cases = s.push(
                &target,
                Rule::Cases {
                    disjunction: em,
                    left: yes,
                    right: no,
                },
            );
            s.generalise(cases, &target, &["a", "b", "c", "p", "q"]);
            s.finish()
        }
        _ => return None,
    };
    Some(d)
}

pub fn builtin_derivation(name: &str) -> Result<Derivation, UnknownBuiltin> {
    build(name).ok_or_else(|| UnknownBuiltin {
        name: name.to_string(),
    })
}

/// Checks the named builtins in the order given.
pub fn check_catalog(names: &[&str]) -> Result<Vec<(String, CheckResult)>, UnknownBuiltin> {
    names
        .iter()
        .map(|n| builtin_derivation(n).map(|d| (n.to_string(), check_derivation(&d))))
        .collect()
}

pub fn check_all_builtins() -> Vec<(String, CheckResult)> {
    check_catalog(&BUILTIN_NAMES).expect("catalogue names are builtins")
}
