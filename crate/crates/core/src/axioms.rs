//! The axiom catalogue: every named sentence, the four axiom systems built
//! from them, and the first-order reading of the continuity schema.
//!
//! Canonical names are ASCII (`FS'`, `Lo2`, `CE2'`). Lookups also accept the
//! typographic spellings with `′` and `₂`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use crate::formula::{fresh_name, parse_formula, render_formula, substitute, Formula, Term};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AxiomError {
    #[error("unknown axiom `{name}`; available: {}", available.join(", "))]
    UnknownAxiom { name: String, available: Vec<String> },
    #[error("unknown axiom system `{name}`; available: {}", available.join(", "))]
    UnknownSystem { name: String, available: Vec<String> },
    #[error("continuity parameter: {0}")]
    Continuity(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedFormula {
    pub name: String,
    pub sentence: Formula,
}

impl NamedFormula {
    pub fn new(name: impl Into<String>, sentence: Formula) -> Self {
        Self {
            name: name.into(),
            sentence,
        }
    }
}

impl fmt::Display for NamedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} := {}", self.name, render_formula(&self.sentence))
    }
}

/// A member of an axiom system: a first-order sentence, or the marker for
/// an axiom schema whose instances are produced on demand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Member {
    Axiom(NamedFormula),
    Schema(String),
}

impl Member {
    pub fn name(&self) -> &str {
        match self {
            Member::Axiom(nf) => &nf.name,
            Member::Schema(name) => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomSystem {
    pub name: String,
    pub members: Vec<Member>,
}

impl AxiomSystem {
    pub fn new(name: impl Into<String>, members: Vec<Member>) -> Self {
        Self {
            name: name.into(),
            members,
        }
    }

    /// A user-defined system from catalogue names. System names expand to
    /// their members; duplicates are dropped, first occurrence wins.
    pub fn from_names<S: AsRef<str>>(name: impl Into<String>, names: &[S]) -> Result<Self, AxiomError> {
        let mut members: Vec<Member> = Vec::new();
        for n in names {
            let expanded = match get_system(n.as_ref()) {
                Ok(sys) => sys.members,
                Err(_) => vec![lookup_member(n.as_ref())?],
            };
            for m in expanded {
                if !members.iter().any(|x| x.name() == m.name()) {
                    members.push(m);
                }
            }
        }
        Ok(Self::new(name, members))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.members.iter().map(Member::name).collect()
    }

    pub fn first_order_members(&self) -> Vec<&NamedFormula> {
        self.members
            .iter()
            .filter_map(|m| match m {
                Member::Axiom(nf) => Some(nf),
                Member::Schema(_) => None,
            })
            .collect()
    }

    pub fn schema_members(&self) -> Vec<&str> {
        self.members
            .iter()
            .filter_map(|m| match m {
                Member::Schema(s) => Some(s.as_str()),
                Member::Axiom(_) => None,
            })
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<&NamedFormula> {
        let name = canonical_name(name);
        self.first_order_members().into_iter().find(|nf| nf.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        let name = canonical_name(name);
        self.members.iter().any(|m| m.name() == name)
    }

    /// Members of `self` whose names are not in `other`.
    pub fn difference(&self, other: &AxiomSystem) -> BTreeSet<String> {
        self.names()
            .into_iter()
            .filter(|n| !other.contains(n))
            .map(str::to_string)
            .collect()
    }

    pub fn is_builtin(&self) -> bool {
        SYSTEM_NAMES.contains(&self.name.as_str())
    }
}

/// Maps typographic spellings onto the ASCII canonical form.
pub fn canonical_name(name: &str) -> String {
    name.trim()
        .chars()
        .map(|c| match c {
            '′' | '’' => '\'',
            '₂' => '2',
            c => c,
        })
        .collect()
}

pub const CONTINUITY: &str = "Co";

const SOURCES: &[(&str, &str)] = &[
    ("RE", "forall a b. D a b b a"),
    ("TE", "forall a b p q r s. (D a b p q & D a b r s -> D p q r s)"),
    ("IE", "forall a b c. (D a b c c -> = a b)"),
    ("SC", "forall a b c q. exists x. (B q a x & D a x b c)"),
    (
        "FS",
        "forall a b c d a' b' c' d'. (~ = a b & B a b c & B a' b' c' & D a b a' b' \
         & D b c b' c' & D a d a' d' & D b d b' d' -> D c d c' d')",
    ),
    (
        "FS'",
        "forall a b c d a' b' c' d'. (~ = a b & B a b c & B a' b' c' & D a b a' b' \
         & D b c b' c' & D a d a' d' & D b d b' d' -> D d c c' d')",
    ),
    ("IB", "forall a b. (B a b a -> = a b)"),
    (
        "Pa",
        "forall a b c p q. (B a p c & B b q c -> (exists x. (B p x b & B q x a)))",
    ),
    ("Lo2", "exists a b c. (~ B a b c & ~ B b c a & ~ B c a b)"),
    (
        "Up2",
        "forall a b c p q. (~ = p q & D a p a q & D b p b q & D c p c q \
         -> B a b c | B b c a | B c a b)",
    ),
    (
        "Eu",
        "forall a b c d t. (B a d t & B b d c & ~ = a d \
         -> (exists x y. (B a b x & B a c y & B x t y)))",
    ),
    ("SB", "forall a b c. (B a b c -> B c b a)"),
    (
        "OP",
        "forall a b c p q. (B a p c & B q c b -> (exists x. (B a x q & B x p b)))",
    ),
    (
        "OP'",
        "forall a b c p q. exists x. (B a p c & B q c b -> B a x q & B b p x)",
    ),
];

const SYSTEM_NAMES: &[&str] = &["CE2", "CE2'", "A", "A'"];

const SYSTEMS: &[(&str, &[&str])] = &[
    (
        "CE2",
        &["RE", "TE", "IE", "SC", "FS", "IB", "Pa", "Lo2", "Up2", "Eu", CONTINUITY],
    ),
    (
        "CE2'",
        &["TE", "IE", "SC", "FS'", "IB", "Pa", "Lo2", "Up2", "Eu", CONTINUITY],
    ),
    ("A", &["RE", "TE", "IE", "SC", "FS", "IB", "Pa"]),
    ("A'", &["TE", "IE", "SC", "FS'", "IB", "Pa"]),
];

fn library() -> &'static [NamedFormula] {
    static LIB: OnceLock<Vec<NamedFormula>> = OnceLock::new();
    LIB.get_or_init(|| {
        SOURCES
            .iter()
            .map(|(name, src)| {
                let sentence = parse_formula(src).expect("library axiom parses");
                debug_assert!(sentence.is_sentence(), "{name} is not a sentence");
                NamedFormula::new(*name, sentence)
            })
            .collect()
    })
}

/// Every first-order sentence in the catalogue, in catalogue order.
pub fn all_axioms() -> &'static [NamedFormula] {
    library()
}

pub fn axiom_names() -> Vec<String> {
    library().iter().map(|nf| nf.name.clone()).collect()
}

pub fn system_names() -> Vec<String> {
    SYSTEM_NAMES.iter().map(|s| s.to_string()).collect()
}

pub fn get_axiom(name: &str) -> Result<NamedFormula, AxiomError> {
    let canon = canonical_name(name);
    library()
        .iter()
        .find(|nf| nf.name == canon)
        .cloned()
        .ok_or_else(|| AxiomError::UnknownAxiom {
            name: name.to_string(),
            available: axiom_names(),
        })
}

fn lookup_member(name: &str) -> Result<Member, AxiomError> {
    if canonical_name(name) == CONTINUITY {
        return Ok(Member::Schema(CONTINUITY.to_string()));
    }
    get_axiom(name).map(Member::Axiom)
}

pub fn get_system(name: &str) -> Result<AxiomSystem, AxiomError> {
    let canon = canonical_name(name);
    let (sys_name, members) = SYSTEMS
        .iter()
        .find(|(n, _)| *n == canon)
        .ok_or_else(|| AxiomError::UnknownSystem {
            name: name.to_string(),
            available: system_names(),
        })?;
    let members = members
        .iter()
        .map(|m| lookup_member(m).expect("system members are in the catalogue"))
        .collect();
    Ok(AxiomSystem::new(*sys_name, members))
}

/// The catalogue as text, one `name := formula` line per sentence.
pub fn export_catalog() -> String {
    let mut out = String::new();
    for nf in library() {
        out.push_str(&nf.to_string());
        out.push('\n');
    }
    out
}

/// Parses `name := formula` lines (blank lines and `#` comments skipped).
pub fn parse_catalog(text: &str) -> Result<Vec<NamedFormula>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, src) = line
            .split_once(":=")
            .ok_or_else(|| format!("line {}: missing `:=`", i + 1))?;
        let sentence = parse_formula(src.trim()).map_err(|e| format!("line {}: {e}", i + 1))?;
        out.push(NamedFormula::new(name.trim(), sentence));
    }
    Ok(out)
}

/// A first-order instance of the continuity schema.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuityInstance {
    pub phi: Formula,
    pub phi_var: String,
    pub psi: Formula,
    pub psi_var: String,
    pub sentence: Formula,
}

impl ContinuityInstance {
    pub fn name(&self) -> String {
        format!(
            "Co[{}: {} ; {}: {}]",
            self.phi_var,
            render_formula(&self.phi),
            self.psi_var,
            render_formula(&self.psi)
        )
    }

    pub fn as_named(&self) -> NamedFormula {
        NamedFormula::new(self.name(), self.sentence.clone())
    }
}

/// Builds
/// `forall params. (exists a. forall x y. (phi(x) & psi(y) -> B a x y))
///   -> (exists b. forall x y. (phi(x) & psi(y) -> B x b y))`,
/// where `params` are the remaining free variables of `phi` and `psi`.
pub fn instantiate_continuity(
    phi: &Formula,
    phi_var: &str,
    psi: &Formula,
    psi_var: &str,
) -> Result<ContinuityInstance, AxiomError> {
    if phi.contains_point_constant() || psi.contains_point_constant() {
        return Err(AxiomError::Continuity("point constants are not allowed".into()));
    }
    let phi_free = phi.free_variables();
    let psi_free = psi.free_variables();
    if !phi_free.contains(phi_var) {
        return Err(AxiomError::Continuity(format!(
            "`{phi_var}` does not occur free in phi"
        )));
    }
    if !psi_free.contains(psi_var) {
        return Err(AxiomError::Continuity(format!(
            "`{psi_var}` does not occur free in psi"
        )));
    }
    if phi_var != psi_var && (psi_free.contains(phi_var) || phi_free.contains(psi_var)) {
        return Err(AxiomError::Continuity(format!(
            "stray free variable: `{phi_var}`/`{psi_var}` is designated in one formula \
             and a parameter of the other"
        )));
    }
    let mut params: BTreeSet<String> = phi_free.union(&psi_free).cloned().collect();
    params.remove(phi_var);
    params.remove(psi_var);

    let mut avoid = params.clone();
    avoid.extend(phi.all_variables());
    avoid.extend(psi.all_variables());
    let mut pick = |base: &str| {
        let name = if avoid.contains(base) {
            fresh_name(base, &avoid)
        } else {
            base.to_string()
        };
        avoid.insert(name.clone());
        name
    };
    let (a, b, x, y) = (pick("a"), pick("b"), pick("x"), pick("y"));

    let phi_x = substitute(phi, phi_var, &Term::var(&x));
    let psi_y = substitute(psi, psi_var, &Term::var(&y));
    let guard = Formula::and(phi_x, psi_y);
    let side = |pivot: &str, outer: bool| {
        let atom = if outer {
            Formula::between(Term::var(pivot), Term::var(&x), Term::var(&y))
        } else {
            Formula::between(Term::var(&x), Term::var(pivot), Term::var(&y))
        };
        Formula::exists(
            pivot,
            Formula::forall_all(&[&x, &y], Formula::implies(guard.clone(), atom)),
        )
    };
    let body = Formula::implies(side(&a, true), side(&b, false));
    let params: Vec<String> = params.into_iter().collect();
    let sentence = Formula::forall_all(&params, body);
    debug_assert!(sentence.is_sentence());
    Ok(ContinuityInstance {
        phi: phi.clone(),
        phi_var: phi_var.to_string(),
        psi: psi.clone(),
        psi_var: psi_var.to_string(),
        sentence,
    })
}

/// The designated continuity instances that the model lab checks.
pub fn continuity_suite() -> Vec<ContinuityInstance> {
    let p = |s: &str| parse_formula(s).expect("suite formula parses");
    vec![
        instantiate_continuity(&p("B p x q"), "x", &p("B q y r"), "y"),
        instantiate_continuity(&p("= x x"), "x", &p("~ = y y"), "y"),
        instantiate_continuity(&p("= x c"), "x", &p("= x c"), "x"),
    ]
    .into_iter()
    .map(|r| r.expect("suite instance is well formed"))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{alpha_equal, Atom};

    fn conclusion(f: &Formula) -> &Atom {
        let (_, body) = f.universal_prefix();
        match body {
            Formula::Implies(_, c) => match &**c {
                Formula::Atom(a) => a,
                other => panic!("unexpected conclusion {other:?}"),
            },
            other => panic!("not an implication: {other:?}"),
        }
    }

    #[test]
    fn five_segment_conclusions() {
        let fsp = get_axiom("FS′").unwrap();
        assert_eq!(fsp.name, "FS'");
        assert_eq!(
            *conclusion(&fsp.sentence),
            Atom::Congruent(Term::var("d"), Term::var("c"), Term::var("c'"), Term::var("d'"))
        );
        let fs = get_axiom("FS").unwrap();
        assert_eq!(
            *conclusion(&fs.sentence),
            Atom::Congruent(Term::var("c"), Term::var("d"), Term::var("c'"), Term::var("d'"))
        );
    }

    #[test]
    fn pasch_variant_final_atom() {
        let opp = get_axiom("OP'").unwrap();
        let expected = parse_formula(
            "forall a b c p q. exists x. (B a p c & B q c b -> B a x q & B b p x)",
        )
        .unwrap();
        assert!(alpha_equal(&opp.sentence, &expected));
        let last = *opp.sentence.atoms().last().unwrap();
        assert_eq!(
            *last,
            Atom::Between(Term::var("b"), Term::var("p"), Term::var("x"))
        );
    }

    #[test]
    fn system_membership() {
        assert_eq!(
            get_system("A′").unwrap().names(),
            ["TE", "IE", "SC", "FS'", "IB", "Pa"]
        );
        assert_eq!(
            get_system("A").unwrap().names(),
            ["RE", "TE", "IE", "SC", "FS", "IB", "Pa"]
        );
        let ce2 = get_system("CE₂").unwrap();
        assert_eq!(ce2.len(), 11);
        assert_eq!(ce2.members.last(), Some(&Member::Schema("Co".into())));
        assert_eq!(ce2.first_order_members().len(), 10);
        assert_eq!(get_system("CE2'").unwrap().len(), 10);
        assert_eq!(get_system("CE2'").unwrap().first_order_members().len(), 9);
    }

    #[test]
    fn unknown_names_list_alternatives() {
        match get_axiom("XX") {
            Err(AxiomError::UnknownAxiom { available, .. }) => {
                assert!(available.contains(&"FS'".to_string()))
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(get_system("B"), Err(AxiomError::UnknownSystem { .. })));
    }

    #[test]
    fn library_is_closed_and_unique() {
        let names = axiom_names();
        let unique: BTreeSet<_> = names.iter().collect();
        assert_eq!(unique.len(), names.len());
        for nf in all_axioms() {
            assert!(nf.sentence.is_sentence(), "{}", nf.name);
            assert!(!nf.sentence.contains_point_constant());
        }
    }

    #[test]
    fn catalog_export_parses_back() {
        let parsed = parse_catalog(&export_catalog()).unwrap();
        assert_eq!(parsed.len(), all_axioms().len());
        for (a, b) in parsed.iter().zip(all_axioms()) {
            assert_eq!(a.name, b.name);
            assert!(alpha_equal(&a.sentence, &b.sentence));
        }
    }

    #[test]
    fn continuity_segment_cut() {
        let phi = parse_formula("B p x q").unwrap();
        let psi = parse_formula("B q y r").unwrap();
        let inst = instantiate_continuity(&phi, "x", &psi, "y").unwrap();
        let expected = parse_formula(
            "forall p q r. ((exists a. forall x y. (B p x q & B q y r -> B a x y)) \
             -> (exists b. forall x y. (B p x q & B q y r -> B x b y)))",
        )
        .unwrap();
        assert!(alpha_equal(&inst.sentence, &expected), "{}", inst.sentence);
    }

    #[test]
    fn continuity_renames_around_parameters() {
        // The parameter `a` forces the outer witness to a fresh name.
        let phi = parse_formula("B a x a").unwrap();
        let psi = parse_formula("= y a").unwrap();
        let inst = instantiate_continuity(&phi, "x", &psi, "y").unwrap();
        assert!(inst.sentence.is_sentence());
        let expected = parse_formula(
            "forall a. ((exists a1. forall x y. (B a x a & = y a -> B a1 x y)) \
             -> (exists b. forall x y. (B a x a & = y a -> B x b y)))",
        )
        .unwrap();
        assert!(alpha_equal(&inst.sentence, &expected), "{}", inst.sentence);
    }

    #[test]
    fn continuity_errors() {
        let phi = parse_formula("B p x q").unwrap();
        let psi = parse_formula("B q y x").unwrap();
        assert!(instantiate_continuity(&phi, "x", &psi, "y").is_err());
        assert!(instantiate_continuity(&phi, "z", &psi, "y").is_err());
        let pt = parse_formula("B (0,0) x x").unwrap();
        assert!(instantiate_continuity(&pt, "x", &pt, "x").is_err());
    }

    #[test]
    fn vacuous_continuity_instance() {
        let inst = continuity_suite().remove(1);
        let expected = parse_formula(
            "(exists a. forall x y. (= x x & ~ = y y -> B a x y)) \
             -> (exists b. forall x y. (= x x & ~ = y y -> B x b y))",
        )
        .unwrap();
        assert!(alpha_equal(&inst.sentence, &expected));
    }
}
