//! Natural-deduction proof kernel.
//!
//! A [`Derivation`] is a flat list of numbered lines. Subproofs ("frames")
//! are opened by `assume` and `obtain` lines and recorded on each line as
//! its scope: the stack of frame-opening line indices it lives under.
//! [`check_derivation`] re-validates every rule application from scratch;
//! nothing stated in a derivation is trusted.

mod builtins;
mod check;
mod script;

use std::fmt;

use crate::axioms::AxiomSystem;
use crate::formula::{Formula, Occurrences, Term};

pub use builtins::{builtin_derivation, builtin_names, check_all_builtins, check_catalog, BUILTIN_NAMES};
pub use check::check_derivation;
pub use script::{parse_derivation, render_derivation, ScriptError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// Cites a premise sentence by name.
    Premise(String),
    /// Instantiates leading universals, one term per binder.
    ForallElim { line: usize, terms: Vec<Term> },
    ForallIntro { line: usize, var: String },
    ImpliesElim { implication: usize, antecedent: usize },
    ImpliesIntro { frame: usize },
    AndIntro { left: usize, right: usize },
    AndElimLeft(usize),
    AndElimRight(usize),
    OrIntroLeft(usize),
    OrIntroRight(usize),
    /// From `A | B` and frames assuming `A` and `B` with equal results.
    Cases { disjunction: usize, left: usize, right: usize },
    /// `A | ~ A`.
    ExcludedMiddle,
    ExistsIntro { line: usize, term: Term },
    /// Opens a frame with an arbitrary hypothesis.
    Assume,
    /// Opens a frame that names a witness for an existential line.
    Obtain { var: String, from: usize },
    ExistsElim { frame: usize },
    EqRefl(Term),
    EqSym(usize),
    /// Rewrites occurrences of `s` by `t` in `target`, given `= s t`.
    EqRewrite { target: usize, equality: usize, occurrences: Occurrences },
    /// From a frame assuming `A` whose last line is `~ A`.
    NotIntro { frame: usize },
    /// From `A` and `~ A`, anything.
    Contradiction { positive: usize, negative: usize },
    /// Repeats a visible line.
    Reiterate(usize),
}

impl Rule {
    pub fn opens_frame(&self) -> bool {
        matches!(self, Rule::Assume | Rule::Obtain { .. })
    }

    /// Lines (not frames) this rule cites.
    pub fn line_refs(&self) -> Vec<usize> {
        match self {
            Rule::ForallElim { line, .. }
            | Rule::ForallIntro { line, .. }
            | Rule::ExistsIntro { line, .. }
            | Rule::AndElimLeft(line)
            | Rule::AndElimRight(line)
            | Rule::OrIntroLeft(line)
            | Rule::OrIntroRight(line)
            | Rule::EqSym(line)
            | Rule::Reiterate(line)
            | Rule::Obtain { from: line, .. } => vec![*line],
            Rule::ImpliesElim {
                implication,
                antecedent,
            } => vec![*implication, *antecedent],
            Rule::AndIntro { left, right } => vec![*left, *right],
            Rule::Cases { disjunction, .. } => vec![*disjunction],
            Rule::EqRewrite {
                target, equality, ..
            } => vec![*target, *equality],
            Rule::Contradiction { positive, negative } => vec![*positive, *negative],
            Rule::Premise(_)
            | Rule::ExcludedMiddle
            | Rule::Assume
            | Rule::EqRefl(_)
            | Rule::ImpliesIntro { .. }
            | Rule::ExistsElim { .. }
            | Rule::NotIntro { .. } => vec![],
        }
    }

    /// Closed frames this rule discharges.
    pub fn frame_refs(&self) -> Vec<usize> {
        match self {
            Rule::ImpliesIntro { frame } | Rule::ExistsElim { frame } | Rule::NotIntro { frame } => {
                vec![*frame]
            }
            Rule::Cases { left, right, .. } => vec![*left, *right],
            _ => vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofLine {
    pub index: usize,
    pub formula: Formula,
    pub rule: Rule,
    /// Open frames, outermost first; a frame-opening line lists itself last.
    pub scope: Vec<usize>,
}

impl ProofLine {
    pub fn depends(&self) -> Vec<usize> {
        let mut d = self.rule.line_refs();
        d.extend(self.rule.frame_refs());
        d
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub name: String,
    pub premises: AxiomSystem,
    pub goal: Formula,
    pub lines: Vec<ProofLine>,
}

impl Derivation {
    pub fn line(&self, index: usize) -> Option<&ProofLine> {
        self.lines.iter().find(|l| l.index == index)
    }

    /// Copy without the line at `position`, indices left as they were.
    pub fn without_line(&self, position: usize) -> Derivation {
        let mut d = self.clone();
        d.lines.remove(position);
        d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accepted,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct CheckResult {
    pub verdict: Verdict,
    pub failing_line: Option<usize>,
    pub reason: String,
}

impl CheckResult {
    pub fn accepted() -> Self {
        Self {
            verdict: Verdict::Accepted,
            failing_line: None,
            reason: String::new(),
        }
    }

    pub fn rejected(line: Option<usize>, reason: impl Into<String>) -> Self {
        Self {
            verdict: Verdict::Rejected,
            failing_line: line,
            reason: reason.into(),
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.verdict == Verdict::Accepted
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.verdict, self.failing_line) {
            (Verdict::Accepted, _) => f.write_str("accepted"),
            (Verdict::Rejected, Some(l)) => write!(f, "rejected at line {l}: {}", self.reason),
            (Verdict::Rejected, None) => write!(f, "rejected: {}", self.reason),
        }
    }
}
