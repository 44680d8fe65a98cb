//! Finite structures and exhaustive evaluation over them.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{Counterexample, ModelError, Value};
use crate::formula::{Atom, Formula, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FiniteModel {
    pub size: usize,
    pub between: BTreeSet<[usize; 3]>,
    pub congruent: BTreeSet<[usize; 4]>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ModelParseError {
    pub line: usize,
    pub message: String,
}

impl FiniteModel {
    pub fn empty(size: usize) -> Self {
        Self {
            size,
            between: BTreeSet::new(),
            congruent: BTreeSet::new(),
        }
    }

    /// Reads the `size n` / `B: a b c` / `D: a b c d` format.
    pub fn parse(text: &str) -> Result<Self, ModelParseError> {
        let mut model: Option<FiniteModel> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| ModelParseError {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("size") {
                if model.is_some() {
                    return Err(err("size given twice".into()));
                }
                let n: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("expected a domain size, found `{}`", rest.trim())))?;
                if n == 0 {
                    return Err(err("domain size must be at least 1".into()));
                }
                model = Some(FiniteModel::empty(n));
                continue;
            }
            let Some(m) = model.as_mut() else {
                return Err(err("expected `size n` before any table entry".into()));
            };
            let (tag, rest) = line
                .split_once(':')
                .ok_or_else(|| err(format!("expected `B:` or `D:`, found `{line}`")))?;
            let nums = rest
                .split_whitespace()
                .map(|t| {
                    let v: usize = t.parse().map_err(|_| err(format!("`{t}` is not an element")))?;
                    if v >= m.size {
                        return Err(err(format!("element {v} is outside a domain of size {}", m.size)));
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<_>, _>>()?;
            match (tag.trim(), nums.as_slice()) {
                ("B", &[a, b, c]) => {
                    m.between.insert([a, b, c]);
                }
                ("D", &[a, b, c, d]) => {
                    m.congruent.insert([a, b, c, d]);
                }
                ("B", _) => return Err(err(format!("B takes 3 elements, found {}", nums.len()))),
                ("D", _) => return Err(err(format!("D takes 4 elements, found {}", nums.len()))),
                (other, _) => return Err(err(format!("unknown relation `{other}`"))),
            }
        }
        model.ok_or(ModelParseError {
            line: 0,
            message: "missing `size n` line".into(),
        })
    }

    pub(crate) fn dense(&self) -> Dense {
        let n = self.size;
        let mut b = vec![false; n * n * n];
        let mut d = vec![false; n * n * n * n];
        for &[x, y, z] in &self.between {
            b[(x * n + y) * n + z] = true;
        }
        for &[w, x, y, z] in &self.congruent {
            d[((w * n + x) * n + y) * n + z] = true;
        }
        Dense { n, b, d }
    }
}

impl fmt::Display for FiniteModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "size {}", self.size)?;
        for [a, b, c] in &self.between {
            writeln!(f, "B: {a} {b} {c}")?;
        }
        for [a, b, c, d] in &self.congruent {
            writeln!(f, "D: {a} {b} {c} {d}")?;
        }
        Ok(())
    }
}

impl FromStr for FiniteModel {
    type Err = ModelParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FiniteModel::parse(s)
    }
}

/// Read access to the relations of a finite structure.
pub(crate) trait Structure {
    fn size(&self) -> usize;
    fn b(&self, x: usize, y: usize, z: usize) -> bool;
    fn d(&self, w: usize, x: usize, y: usize, z: usize) -> bool;
}

pub(crate) struct Dense {
    n: usize,
    b: Vec<bool>,
    d: Vec<bool>,
}

impl Structure for Dense {
    fn size(&self) -> usize {
        self.n
    }

    fn b(&self, x: usize, y: usize, z: usize) -> bool {
        self.b[(x * self.n + y) * self.n + z]
    }

    fn d(&self, w: usize, x: usize, y: usize, z: usize) -> bool {
        self.d[((w * self.n + x) * self.n + y) * self.n + z]
    }
}

/// A formula with variables resolved to environment slots.
#[derive(Clone, Debug)]
pub(crate) enum Node {
    B([usize; 3]),
    D([usize; 4]),
    Eq(usize, usize),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Imp(Box<Node>, Box<Node>),
    All(usize, Box<Node>),
    Ex(usize, Box<Node>),
}

#[derive(Clone, Debug)]
pub(crate) struct Compiled {
    pub slots: usize,
    /// Leading universal binders (name, slot), outermost first.
    pub prefix: Vec<(String, usize)>,
    /// Hypotheses of the matrix that mention no prefix variable.
    closed_guards: Vec<Node>,
    /// `guards[i]` holds the hypotheses whose last prefix variable is `prefix[i]`.
    guards: Vec<Vec<Node>>,
    /// What is left of the matrix once the hypotheses are taken out.
    residual: Node,
    pub uses_b: bool,
    pub uses_d: bool,
    pub binders: usize,
}

/// Compiles `f`, closing its free variables universally in name order.
///
/// A matrix of the form `H1 & ... & Hk -> C` is split so that each `Hi` is
/// tested as soon as its variables are bound; a false hypothesis prunes every
/// extension of the current partial assignment.
pub(crate) fn compile(f: &Formula) -> Result<Compiled, ModelError> {
    if f.contains_point_constant() {
        return Err(ModelError::PointInFiniteModel);
    }
    let free: Vec<String> = f.free_variables().into_iter().collect();
    let closed = Formula::forall_all(&free, f.clone());
    let mut slots = 0;
    let mut scope: Vec<(String, usize)> = Vec::new();
    let root = lower(&closed, &mut scope, &mut slots);
    let mut prefix = Vec::new();
    let mut cur = root;
    let mut names = closed.universal_prefix().0.into_iter();
    while let Node::All(slot, body) = cur {
        prefix.push((names.next().unwrap_or_default().to_string(), slot));
        cur = *body;
    }
    let mut closed_guards = Vec::new();
    let mut guards = vec![Vec::new(); prefix.len()];
    let residual = match cur {
        Node::Imp(hyp, concl) if !prefix.is_empty() => {
            let mut conjuncts = Vec::new();
            flatten_and(*hyp, &mut conjuncts);
            for h in conjuncts {
                let mut used = Vec::new();
                free_slots(&h, &mut Vec::new(), &mut used);
                match prefix.iter().rposition(|(_, s)| used.contains(s)) {
                    Some(i) => guards[i].push(h),
                    None => closed_guards.push(h),
                }
            }
            *concl
        }
        other => other,
    };
    Ok(Compiled {
        slots,
        prefix,
        closed_guards,
        guards,
        residual,
        uses_b: closed.mentions_betweenness(),
        uses_d: closed.mentions_congruence(),
        binders: closed.quantifier_count(),
    })
}

fn flatten_and(node: Node, out: &mut Vec<Node>) {
    match node {
        Node::And(l, r) => {
            flatten_and(*l, out);
            flatten_and(*r, out);
        }
        other => out.push(other),
    }
}

fn free_slots(node: &Node, bound: &mut Vec<usize>, out: &mut Vec<usize>) {
    let mut note = |s: &usize, bound: &Vec<usize>| {
        if !bound.contains(s) {
            out.push(*s);
        }
    };
    match node {
        Node::B(xs) => xs.iter().for_each(|s| note(s, bound)),
        Node::D(xs) => xs.iter().for_each(|s| note(s, bound)),
        Node::Eq(a, b) => {
            note(a, bound);
            note(b, bound);
        }
        Node::Not(g) => free_slots(g, bound, out),
        Node::And(l, r) | Node::Or(l, r) | Node::Imp(l, r) => {
            free_slots(l, bound, out);
            free_slots(r, bound, out);
        }
        Node::All(s, body) | Node::Ex(s, body) => {
            bound.push(*s);
            free_slots(body, bound, out);
            bound.pop();
        }
    }
}

fn slot_of(t: &Term, scope: &[(String, usize)]) -> usize {
    match t {
        Term::Var(v) => scope
            .iter()
            .rev()
            .find(|(k, _)| k == v)
            .map(|(_, s)| *s)
            .expect("closed formula"),
        Term::Point(..) => unreachable!("point constants rejected before lowering"),
    }
}

fn lower(f: &Formula, scope: &mut Vec<(String, usize)>, slots: &mut usize) -> Node {
    let bx = |n: Node| Box::new(n);
    match f {
        Formula::Atom(Atom::Between(a, b, c)) => {
            Node::B([slot_of(a, scope), slot_of(b, scope), slot_of(c, scope)])
        }
        Formula::Atom(Atom::Congruent(a, b, c, d)) => Node::D([
            slot_of(a, scope),
            slot_of(b, scope),
            slot_of(c, scope),
            slot_of(d, scope),
        ]),
        Formula::Atom(Atom::Equal(a, b)) => Node::Eq(slot_of(a, scope), slot_of(b, scope)),
        Formula::Not(g) => Node::Not(bx(lower(g, scope, slots))),
        Formula::And(l, r) => Node::And(bx(lower(l, scope, slots)), bx(lower(r, scope, slots))),
        Formula::Or(l, r) => Node::Or(bx(lower(l, scope, slots)), bx(lower(r, scope, slots))),
        Formula::Implies(l, r) => Node::Imp(bx(lower(l, scope, slots)), bx(lower(r, scope, slots))),
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            let slot = *slots;
            *slots += 1;
            scope.push((v.clone(), slot));
            let inner = lower(body, scope, slots);
            scope.pop();
            if matches!(f, Formula::Forall(..)) {
                Node::All(slot, bx(inner))
            } else {
                Node::Ex(slot, bx(inner))
            }
        }
    }
}

pub(crate) fn eval_node<S: Structure>(node: &Node, s: &S, env: &mut [usize]) -> bool {
    match node {
        Node::B([a, b, c]) => s.b(env[*a], env[*b], env[*c]),
        Node::D([a, b, c, d]) => s.d(env[*a], env[*b], env[*c], env[*d]),
        Node::Eq(a, b) => env[*a] == env[*b],
        Node::Not(g) => !eval_node(g, s, env),
        Node::And(l, r) => eval_node(l, s, env) && eval_node(r, s, env),
        Node::Or(l, r) => eval_node(l, s, env) || eval_node(r, s, env),
        Node::Imp(l, r) => !eval_node(l, s, env) || eval_node(r, s, env),
        Node::All(slot, body) => (0..s.size()).all(|v| {
            env[*slot] = v;
            eval_node(body, s, env)
        }),
        Node::Ex(slot, body) => (0..s.size()).any(|v| {
            env[*slot] = v;
            eval_node(body, s, env)
        }),
    }
}

impl Compiled {
    pub(crate) fn holds<S: Structure>(&self, s: &S) -> bool {
        self.falsifier(s).is_none()
    }

    /// The first assignment to the universal prefix (in lexicographic order,
    /// innermost binder fastest) under which the rest is false.
    pub(crate) fn falsifier<S: Structure>(&self, s: &S) -> Option<Vec<usize>> {
        let mut env = vec![0; self.slots];
        if !self.closed_guards.iter().all(|g| eval_node(g, s, &mut env)) {
            return None;
        }
        let mut tuple = vec![0; self.prefix.len()];
        self.descend(s, 0, &mut env, &mut tuple).then_some(tuple)
    }

    fn descend<S: Structure>(&self, s: &S, depth: usize, env: &mut [usize], tuple: &mut [usize]) -> bool {
        let Some((_, slot)) = self.prefix.get(depth) else {
            return !eval_node(&self.residual, s, env);
        };
        for v in 0..s.size() {
            env[*slot] = v;
            tuple[depth] = v;
            if self.guards[depth].iter().all(|g| eval_node(g, s, env))
                && self.descend(s, depth + 1, env, tuple)
            {
                return true;
            }
        }
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evaluation {
    pub holds: bool,
    /// Values of the outermost universals that make the formula false.
    pub counterexample: Option<Counterexample>,
}

/// Truth of `f` (universally closed) in `m` by full enumeration.
pub fn eval_formula_exhaustive(m: &FiniteModel, f: &Formula) -> Result<Evaluation, ModelError> {
    let c = compile(f)?;
    let dense = m.dense();
    Ok(match c.falsifier(&dense) {
        None => Evaluation {
            holds: true,
            counterexample: None,
        },
        Some(tuple) => Evaluation {
            holds: false,
            counterexample: Some(Counterexample(
                c.prefix
                    .iter()
                    .zip(tuple)
                    .map(|((name, _), v)| (name.clone(), Value::Index(v)))
                    .collect(),
            )),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{get_axiom, get_system, Member};
    use crate::formula::parse_formula;

    #[test]
    fn one_point_model_satisfies_aprime() {
        let m = FiniteModel::parse("size 1\nB: 0 0 0\nD: 0 0 0 0\n").unwrap();
        for member in get_system("A'").unwrap().members {
            let Member::Axiom(ax) = member else { continue };
            assert!(eval_formula_exhaustive(&m, &ax.sentence).unwrap().holds, "{}", ax.name);
        }
    }

    #[test]
    fn identity_of_betweenness_fails_with_assignment() {
        let m = FiniteModel::parse("size 2\nB: 0 1 0\n").unwrap();
        let e = eval_formula_exhaustive(&m, &get_axiom("IB").unwrap().sentence).unwrap();
        assert!(!e.holds);
        assert_eq!(e.counterexample.unwrap().to_string(), "a=0 b=1");
    }

    #[test]
    fn reflexivity_needs_a_congruence() {
        let m = FiniteModel::parse("size 1").unwrap();
        let e = eval_formula_exhaustive(&m, &get_axiom("RE").unwrap().sentence).unwrap();
        assert!(!e.holds);
        assert_eq!(e.counterexample.unwrap().to_string(), "a=0 b=0");
    }

    #[test]
    fn free_variables_are_closed_universally() {
        let m = FiniteModel::parse("size 2").unwrap();
        let e = eval_formula_exhaustive(&m, &parse_formula("= a b").unwrap()).unwrap();
        assert_eq!(e.counterexample.unwrap().to_string(), "a=0 b=1");
        let e = eval_formula_exhaustive(&m, &parse_formula("exists x. ~ = x a").unwrap()).unwrap();
        assert!(e.holds);
        assert!(matches!(
            eval_formula_exhaustive(&m, &parse_formula("= a (0,0)").unwrap()),
            Err(ModelError::PointInFiniteModel)
        ));
    }

    #[test]
    fn guarded_evaluation_matches_naive() {
        let text = "size 2\nB: 0 0 0\nB: 0 1 1\nD: 0 1 1 0\nD: 1 1 0 0\nD: 0 0 1 1\n";
        let m = FiniteModel::parse(text).unwrap().dense();
        for f in [
            "forall a b c. (D a b c c & B a b c -> = a b)",
            "forall a b. (= a a & D a b b a -> (forall c. B a c c))",
            "forall a b. (exists c. D a c c b) & B a a a -> D a b b a",
        ] {
            let f = parse_formula(f).unwrap();
            let c = compile(&f).unwrap();
            let mut slots = 0;
            let root = lower(&f, &mut Vec::new(), &mut slots);
            assert_eq!(c.holds(&m), eval_node(&root, &m, &mut vec![0; slots]), "{f}");
        }
        let fs = get_axiom("FS").unwrap().sentence;
        let c = compile(&fs).unwrap();
        assert!(c.guards.iter().map(Vec::len).sum::<usize>() > 0);
    }

    #[test]
    fn shadowed_binders() {
        let m = FiniteModel::parse("size 2").unwrap();
        let f = parse_formula("forall x. exists x. = x x").unwrap();
        assert!(eval_formula_exhaustive(&m, &f).unwrap().holds);
        let f = parse_formula("exists x. forall y. (exists x. = x y) & = x x").unwrap();
        assert!(eval_formula_exhaustive(&m, &f).unwrap().holds);
    }

    #[test]
    fn text_format_round_trip_and_errors() {
        let text = "# two points\nsize 2\nB: 0 0 1\nD: 0 1 1 0  # swapped\nD: 0 0 1 1\n";
        let m = FiniteModel::parse(text).unwrap();
        assert_eq!(m.between.len(), 1);
        assert_eq!(m.congruent.len(), 2);
        assert_eq!(FiniteModel::parse(&m.to_string()).unwrap(), m);

        let err = |t: &str| FiniteModel::parse(t).unwrap_err();
        assert_eq!(err("B: 0 0 0").line, 1);
        assert_eq!(err("size 2\nB: 0 0 2").line, 2);
        assert_eq!(err("size 2\n\nD: 0 0 1").line, 3);
        assert_eq!(err("size 2\nE: 0 0").line, 2);
        assert_eq!(err("size 0").line, 1);
        assert_eq!(err("size 1\nsize 1").line, 2);
        assert_eq!(err("size 1\nB 0 0 0").line, 2);
        assert_eq!(err("").line, 0);
    }
}
