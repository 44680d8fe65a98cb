//! Randomised checking of axioms in the two built-in planes.
//!
//! Universal prefixes are sampled. Everything under the prefix is evaluated
//! in three-valued logic: an existential is true only when a witness is
//! found and otherwise unknown, while a nested universal is false only on an
//! explicit counterexample. Nested universals count as true (on their
//! candidate points) only where that cannot turn into a false verdict, so a
//! `refuted` status is always backed by an exact falsifying assignment.

use std::time::Instant;

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    between, BuiltinModel, Counterexample, ModelCheckReport, ModelError, ModelKind, Point2,
    PointAssignment, Status, Value,
};
use crate::axioms::{canonical_name, get_axiom, Member, NamedFormula};
use crate::formula::{rational, Atom, Formula, Rational, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleConfig {
    pub seed: u64,
    pub count: u64,
    /// Coordinates are `p/q` with `|p| <= coord_bound * q`.
    pub coord_bound: i64,
    pub denominator_bound: i64,
}

impl SampleConfig {
    pub fn new(seed: u64, count: u64) -> Self {
        Self {
            seed,
            count,
            coord_bound: 10,
            denominator_bound: 8,
        }
    }
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self::new(7, 1000)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Truth {
    True,
    False,
    Unknown,
}

/// Candidate points tried for a nested quantifier.
const NESTED_CANDIDATES: usize = 16;
/// Atom evaluations allowed per sample before giving up as unknown.
const ATOM_BUDGET: u32 = 200_000;

type Env = Vec<(String, Point2)>;

struct Evaluator<'a> {
    model: &'a BuiltinModel,
    cfg: &'a SampleConfig,
    hints: Vec<Vec<Point2>>,
    rng: ChaCha8Rng,
    budget: u32,
}

fn lookup(env: &Env, t: &Term) -> Option<Point2> {
    match t {
        Term::Var(v) => env.iter().rev().find(|(k, _)| k == v).map(|(_, p)| p.clone()),
        Term::Point(x, y) => Some(Point2::new(x.clone(), y.clone())),
    }
}

fn random_rational(rng: &mut ChaCha8Rng, cfg: &SampleConfig) -> Rational {
    let q = rng.gen_range(1..=cfg.denominator_bound.max(1));
    let bound = cfg.coord_bound.max(0) * q;
    rational(rng.gen_range(-bound..=bound), q)
}

fn random_point(rng: &mut ChaCha8Rng, cfg: &SampleConfig) -> Point2 {
    Point2::new(random_rational(rng, cfg), random_rational(rng, cfg))
}

impl Evaluator<'_> {
    fn atom(&mut self, a: &Atom, env: &Env) -> Truth {
        if self.budget == 0 {
            return Truth::Unknown;
        }
        self.budget -= 1;
        let get = |t: &Term| lookup(env, t);
        let value = match a {
            Atom::Between(x, y, z) => match (get(x), get(y), get(z)) {
                (Some(x), Some(y), Some(z)) => between(&x, &y, &z),
                _ => return Truth::Unknown,
            },
            Atom::Congruent(w, x, y, z) => match (get(w), get(x), get(y), get(z)) {
                (Some(w), Some(x), Some(y), Some(z)) => self.model.congruent_approx(&w, &x, &y, &z),
                _ => return Truth::Unknown,
            },
            Atom::Equal(x, y) => match (get(x), get(y)) {
                (Some(x), Some(y)) => x == y,
                _ => return Truth::Unknown,
            },
        };
        if value {
            Truth::True
        } else {
            Truth::False
        }
    }

    fn eval(&mut self, f: &Formula, env: &mut Env, positive: bool) -> Truth {
        match f {
            Formula::Atom(a) => self.atom(a, env),
            Formula::Not(g) => match self.eval(g, env, !positive) {
                Truth::True => Truth::False,
                Truth::False => Truth::True,
                Truth::Unknown => Truth::Unknown,
            },
            Formula::And(l, r) => {
                let a = self.eval(l, env, positive);
                if a == Truth::False {
                    return Truth::False;
                }
                match (a, self.eval(r, env, positive)) {
                    (_, Truth::False) => Truth::False,
                    (Truth::True, Truth::True) => Truth::True,
                    _ => Truth::Unknown,
                }
            }
            Formula::Or(l, r) => {
                let a = self.eval(l, env, positive);
                if a == Truth::True {
                    return Truth::True;
                }
                match (a, self.eval(r, env, positive)) {
                    (_, Truth::True) => Truth::True,
                    (Truth::False, Truth::False) => Truth::False,
                    _ => Truth::Unknown,
                }
            }
            Formula::Implies(l, r) => {
                let a = self.eval(l, env, !positive);
                if a == Truth::False {
                    return Truth::True;
                }
                match (a, self.eval(r, env, positive)) {
                    (_, Truth::True) => Truth::True,
                    (Truth::True, Truth::False) => Truth::False,
                    _ => Truth::Unknown,
                }
            }
            Formula::Exists(..) => {
                let (vars, body) = block(f, true);
                let hints: Vec<Vec<Point2>> = self
                    .hints
                    .iter()
                    .filter(|h| h.len() == vars.len())
                    .cloned()
                    .collect();
                for tuple in hints {
                    let depth = env.len();
                    env.extend(vars.iter().map(|v| v.to_string()).zip(tuple));
                    let t = self.eval(body, env, positive);
                    env.truncate(depth);
                    if t == Truth::True {
                        return Truth::True;
                    }
                }
                self.search(&vars, body, env, positive, true)
            }
            Formula::Forall(..) => {
                let (vars, body) = block(f, false);
                self.search(&vars, body, env, positive, false)
            }
        }
    }

    fn search(&mut self, vars: &[&str], body: &Formula, env: &mut Env, positive: bool, exists: bool) -> Truth {
        let Some((v, rest)) = vars.split_first() else {
            return self.eval(body, env, positive);
        };
        let mut all_true = true;
        for c in self.candidates(env) {
            env.push((v.to_string(), c));
            let t = self.search(rest, body, env, positive, exists);
            env.pop();
            match (exists, t) {
                (true, Truth::True) => return Truth::True,
                (false, Truth::False) => return Truth::False,
                (_, Truth::True) => {}
                _ => all_true = false,
            }
            if self.budget == 0 {
                return Truth::Unknown;
            }
        }
        if !exists && positive && all_true {
            Truth::True
        } else {
            Truth::Unknown
        }
    }

    /// Points already in play, a few fresh ones, midpoints and extensions.
    fn candidates(&mut self, env: &Env) -> Vec<Point2> {
        let mut base: Vec<Point2> = Vec::new();
        for (_, p) in env {
            if !base.contains(p) {
                base.push(p.clone());
            }
        }
        if base.is_empty() {
            base.extend([Point2::int(0, 0), Point2::int(1, 0), Point2::int(0, 1)]);
        }
        let mut out = base.clone();
        for _ in 0..2 {
            out.push(random_point(&mut self.rng, self.cfg));
        }
        let half = rational(1, 2);
        let two = rational(2, 1);
        for t in [&half, &two] {
            for i in 0..base.len() {
                for j in 0..base.len() {
                    if i != j && (t != &half || i < j) {
                        out.push(base[i].lerp(&base[j], t));
                    }
                }
            }
        }
        let mut seen = Vec::new();
        out.retain(|p| {
            if seen.contains(p) {
                false
            } else {
                seen.push(p.clone());
                true
            }
        });
        out.truncate(NESTED_CANDIDATES.max(base.len()));
        out
    }
}

/// Consecutive binders of one kind and the body under them.
fn block(f: &Formula, exists: bool) -> (Vec<&str>, &Formula) {
    let mut vars = Vec::new();
    let mut cur = f;
    loop {
        match (cur, exists) {
            (Formula::Exists(v, b), true) | (Formula::Forall(v, b), false) => {
                vars.push(v.as_str());
                cur = b;
            }
            _ => return (vars, cur),
        }
    }
}

/// Draws values for a universal prefix: fresh points, repeats of earlier
/// values, and affine combinations of earlier values, so that hypotheses
/// such as `a = b` or collinearity are hit often.
fn sample_prefix(vars: &[&str], rng: &mut ChaCha8Rng, cfg: &SampleConfig) -> Env {
    let mut env: Env = Vec::with_capacity(vars.len());
    for v in vars {
        let p = if env.is_empty() {
            random_point(rng, cfg)
        } else {
            match rng.gen_range(0..10) {
                0..=3 => random_point(rng, cfg),
                4..=6 => env[rng.gen_range(0..env.len())].1.clone(),
                _ => {
                    let a = &env[rng.gen_range(0..env.len())].1;
                    let b = &env[rng.gen_range(0..env.len())].1;
                    let d = rng.gen_range(1..=4);
                    let t = rational(rng.gen_range(-d..=2 * d), d);
                    a.lerp(b, &t)
                }
            }
        };
        env.push((v.to_string(), p));
    }
    env
}

fn known_instance(m: &BuiltinModel, name: &str) -> Option<Vec<(&'static str, Point2)>> {
    if m.kind != ModelKind::DegenerateM {
        return None;
    }
    let o = Point2::int(0, 0);
    let e = Point2::int(0, 1);
    match name {
        "TE" => Some(vec![
            ("a", o.clone()),
            ("b", o.clone()),
            ("p", o.clone()),
            ("q", e.clone()),
            ("r", o),
            ("s", e),
        ]),
        "RE" => Some(vec![("a", o), ("b", e)]),
        _ => None,
    }
}

fn to_map(env: &Env) -> PointAssignment {
    env.iter().cloned().collect()
}

fn counterexample(env: &Env) -> Counterexample {
    Counterexample(
        env.iter()
            .map(|(k, p)| (k.clone(), Value::Point(p.clone())))
            .collect(),
    )
}

fn elapsed_ms(start: Instant) -> Option<u64> {
    Some(start.elapsed().as_millis() as u64)
}

pub fn eval_axiom_sampled(m: &BuiltinModel, ax: &NamedFormula, cfg: &SampleConfig) -> ModelCheckReport {
    let start = Instant::now();
    let (prefix, matrix) = ax.sentence.universal_prefix();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ev = Evaluator {
        model: m,
        cfg,
        hints: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_cafe),
        budget: ATOM_BUDGET,
    };
    let forced: Vec<Env> = known_instance(m, &ax.name)
        .map(|inst| {
            vec![inst
                .into_iter()
                .map(|(k, p)| (k.to_string(), p))
                .collect()]
        })
        .unwrap_or_default();

    let count = if prefix.is_empty() { 1 } else { cfg.count };
    let mut undecided = 0;
    let mut status = None;
    for i in 0..count {
        let mut env = match forced.get(i as usize) {
            Some(e) if e.len() == prefix.len() => e.clone(),
            _ => sample_prefix(&prefix, &mut rng, cfg),
        };
        ev.hints = skolem_witness(m, &ax.name, &to_map(&env)).unwrap_or_default();
        ev.budget = ATOM_BUDGET;
        match ev.eval(matrix, &mut env, true) {
            Truth::True => {}
            Truth::Unknown => undecided += 1,
            Truth::False => {
                status = Some(Status::Refuted {
                    counterexample: counterexample(&env),
                });
                break;
            }
        }
    }
    let status = status.unwrap_or(if undecided == 0 {
        Status::VerifiedOnSamples {
            count,
            seed: cfg.seed,
        }
    } else {
        Status::Skipped {
            reason: format!("no witness found on {undecided} of {count} samples"),
        }
    });
    ModelCheckReport {
        axiom: ax.name.clone(),
        model: m.id().to_string(),
        status,
        samples: count,
        seed: Some(cfg.seed),
        undecided,
        approximate: m.is_approximate(),
        elapsed_ms: elapsed_ms(start),
    }
}

pub fn skipped_schema(m: &BuiltinModel, name: &str) -> ModelCheckReport {
    ModelCheckReport {
        axiom: name.to_string(),
        model: m.id().to_string(),
        status: Status::Skipped {
            reason: "schema".into(),
        },
        samples: 0,
        seed: None,
        undecided: 0,
        approximate: false,
        elapsed_ms: Some(0),
    }
}

/// Checks each member independently, in parallel, keeping member order.
pub fn check_members(m: &BuiltinModel, members: &[Member], cfg: &SampleConfig) -> Vec<ModelCheckReport> {
    members
        .par_iter()
        .map(|member| match member {
            Member::Axiom(ax) => eval_axiom_sampled(m, ax, cfg),
            Member::Schema(name) => skipped_schema(m, name),
        })
        .collect()
}

/// Intersection of the lines `p + s u` and `q + t v`, if they cross once.
fn intersect(p: &Point2, u: &Point2, q: &Point2, v: &Point2) -> Option<Point2> {
    let det = u.cross(v);
    if det.is_zero() {
        return None;
    }
    let s = q.sub(p).cross(v) / det;
    Some(p.add(&u.scale(&s)))
}

/// Rational approximation of a square root, to about 14 decimal places.
fn approx_sqrt(r: &Rational) -> Rational {
    let f = r.to_f64().unwrap_or(0.0).max(0.0).sqrt();
    let scale = 1e14;
    rational((f * scale).round() as i64, scale as i64)
}

/// Candidate values for the existential block of a catalogue axiom, given
/// its universal variables. The caller must verify every candidate.
pub fn skolem_witness(m: &BuiltinModel, axiom: &str, s: &PointAssignment) -> Result<Vec<Vec<Point2>>, ModelError> {
    let name = canonical_name(axiom);
    let g = |v: &str| s.get(v).cloned().ok_or_else(|| ModelError::Unassigned(v.to_string()));
    let singles = |pts: Vec<Point2>| pts.into_iter().map(|p| vec![p]).collect::<Vec<_>>();
    match name.as_str() {
        "SC" => {
            let (a, b, c, q) = (g("a")?, g("b")?, g("c")?, g("q")?);
            match m.kind {
                ModelKind::DegenerateM => Ok(vec![vec![a]]),
                ModelKind::StandardPlane => {
                    let len = approx_sqrt(&b.sub(&c).norm2());
                    let x = if q == a {
                        a.add(&Point2::new(len, Rational::zero()))
                    } else {
                        let dir = a.sub(&q);
                        let k = len / approx_sqrt(&dir.norm2());
                        a.add(&dir.scale(&k))
                    };
                    Ok(vec![vec![x]])
                }
            }
        }
        "Pa" => {
            let (a, b, c, p, q) = (g("a")?, g("b")?, g("c")?, g("p")?, g("q")?);
            let mut out = Vec::new();
            out.extend(intersect(&p, &b.sub(&p), &q, &a.sub(&q)));
            out.extend([p, q, a, b, c]);
            Ok(singles(out))
        }
        "OP" | "OP'" => {
            let (a, b, c, p, q) = (g("a")?, g("b")?, g("c")?, g("p")?, g("q")?);
            let mut out = Vec::new();
            out.extend(intersect(&b, &p.sub(&b), &a, &q.sub(&a)));
            out.extend([a, q, p, b, c]);
            Ok(singles(out))
        }
        "Eu" => {
            let (a, b, c, d, t) = (g("a")?, g("b")?, g("c")?, g("d")?, g("t")?);
            let ad = d.sub(&a);
            let at = t.sub(&a);
            let lambda = if !ad.x.is_zero() {
                &at.x / &ad.x
            } else if !ad.y.is_zero() {
                &at.y / &ad.y
            } else {
                return Ok(Vec::new());
            };
            Ok(vec![vec![a.lerp(&b, &lambda), a.lerp(&c, &lambda)]])
        }
        "Lo2" => Ok(vec![vec![Point2::int(0, 0), Point2::int(1, 0), Point2::int(0, 1)]]),
        _ => Err(ModelError::NoProvider(axiom.to_string())),
    }
}

/// The fixed counterexamples showing that `M` violates TE and RE.
pub fn refute_with_instance(m: &BuiltinModel, axiom: &str) -> Result<ModelCheckReport, ModelError> {
    let start = Instant::now();
    let name = canonical_name(axiom);
    let unknown = || ModelError::UnknownPair {
        model: m.id().to_string(),
        axiom: axiom.to_string(),
    };
    let inst = known_instance(m, &name).ok_or_else(unknown)?;
    let ax = get_axiom(&name).map_err(|_| unknown())?;
    let (_, matrix) = ax.sentence.universal_prefix();
    let s: PointAssignment = inst.iter().map(|(k, p)| (k.to_string(), p.clone())).collect();
    let holds = super::eval_quantifier_free(m, matrix, &s)?;
    assert!(!holds, "stored counterexample for {name} does not refute it");
    Ok(ModelCheckReport {
        axiom: name,
        model: m.id().to_string(),
        status: Status::Refuted {
            counterexample: Counterexample(
                inst.into_iter()
                    .map(|(k, p)| (k.to_string(), Value::Point(p)))
                    .collect(),
            ),
        },
        samples: 1,
        seed: None,
        undecided: 0,
        approximate: false,
        elapsed_ms: elapsed_ms(start),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{get_system, ContinuityInstance};
    use crate::model::eval_quantifier_free;

    fn m() -> BuiltinModel {
        BuiltinModel::degenerate()
    }

    fn ax(name: &str) -> NamedFormula {
        get_axiom(name).unwrap()
    }

    #[test]
    fn te_is_refuted_by_the_fixed_tuple_first() {
        let r = eval_axiom_sampled(&m(), &ax("TE"), &SampleConfig::new(7, 100));
        let Status::Refuted { counterexample } = &r.status else {
            panic!("{r}")
        };
        assert_eq!(
            counterexample.to_string(),
            "a=(0,0) b=(0,0) p=(0,0) q=(0,1) r=(0,0) s=(0,1)"
        );
    }

    #[test]
    fn refutations_reverify() {
        for name in ["TE", "RE"] {
            let r = refute_with_instance(&m(), name).unwrap();
            let Status::Refuted { counterexample } = &r.status else {
                panic!()
            };
            let sentence = ax(name).sentence;
            let (_, matrix) = sentence.universal_prefix();
            assert!(!eval_quantifier_free(&m(), matrix, &counterexample.points()).unwrap());
        }
        assert!(matches!(
            refute_with_instance(&m(), "IE"),
            Err(ModelError::UnknownPair { .. })
        ));
        assert!(refute_with_instance(&BuiltinModel::standard(), "TE").is_err());
    }

    #[test]
    fn degenerate_model_satisfies_the_rest() {
        let cfg = SampleConfig::new(7, 500);
        for name in ["IE", "SC", "FS'", "IB", "Pa", "Lo2", "Up2", "Eu"] {
            let r = eval_axiom_sampled(&m(), &ax(name), &cfg);
            assert!(r.status.is_verified(), "{r}");
        }
        assert!(!eval_axiom_sampled(&m(), &ax("RE"), &cfg).status.is_verified());
    }

    #[test]
    fn standard_plane_satisfies_catalogue() {
        let cfg = SampleConfig::new(3, 300);
        let std = BuiltinModel::standard();
        for a in crate::axioms::all_axioms() {
            let r = eval_axiom_sampled(&std, a, &cfg);
            assert!(r.status.is_verified(), "{r}");
            assert!(r.approximate);
        }
    }

    #[test]
    fn sampled_runs_are_repeatable() {
        let cfg = SampleConfig::new(11, 200);
        let mut a = eval_axiom_sampled(&m(), &ax("Pa"), &cfg);
        let mut b = eval_axiom_sampled(&m(), &ax("Pa"), &cfg);
        a.elapsed_ms = None;
        b.elapsed_ms = None;
        assert_eq!(a, b);
    }

    #[test]
    fn witness_hints() {
        let s: PointAssignment = [("a", (1, 1)), ("b", (0, 0)), ("c", (3, 0)), ("q", (5, 5))]
            .into_iter()
            .map(|(k, (x, y))| (k.to_string(), Point2::int(x, y)))
            .collect();
        assert_eq!(skolem_witness(&m(), "SC", &s).unwrap(), vec![vec![Point2::int(1, 1)]]);
        assert_eq!(
            skolem_witness(&m(), "Lo₂", &PointAssignment::new()).unwrap()[0],
            vec![Point2::int(0, 0), Point2::int(1, 0), Point2::int(0, 1)]
        );
        assert!(matches!(
            skolem_witness(&m(), "TE", &s),
            Err(ModelError::NoProvider(_))
        ));

        // Pasch: segments a-p-c and b-q-c; the hint is the crossing of pb and qa.
        let s: PointAssignment = [("a", (0, 0)), ("c", (4, 0)), ("p", (2, 0)), ("b", (4, 4)), ("q", (4, 2))]
            .into_iter()
            .map(|(k, (x, y))| (k.to_string(), Point2::int(x, y)))
            .collect();
        let x = &skolem_witness(&m(), "Pa", &s).unwrap()[0][0];
        assert!(between(&s["p"], x, &s["b"]) && between(&s["q"], x, &s["a"]));
    }

    #[test]
    fn schema_members_are_skipped() {
        let sys = get_system("CE2'").unwrap();
        let reports = check_members(&m(), &sys.members, &SampleConfig::new(7, 20));
        let co = reports.iter().find(|r| r.axiom == "Co").unwrap();
        assert_eq!(co.status, Status::Skipped { reason: "schema".into() });
        assert_eq!(reports.len(), sys.len());
    }

    #[test]
    fn continuity_instances_do_not_refute_spuriously() {
        for inst in crate::axioms::continuity_suite() {
            let inst: ContinuityInstance = inst;
            let r = eval_axiom_sampled(&m(), &inst.as_named(), &SampleConfig::new(7, 30));
            assert!(!matches!(r.status, Status::Refuted { .. }), "{r}");
        }
    }
}
