//! Command-line front end. [`run`] does all the work and returns the text to
//! print together with the exit code, so it can be driven from tests.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::axioms::{
    canonical_name, continuity_suite, get_axiom, get_system, system_names, all_axioms, AxiomSystem,
    Member, NamedFormula,
};
use crate::formula::{parse_formula, render_formula, Formula};
use crate::kernel::{
    builtin_derivation, check_catalog, check_derivation, parse_derivation, render_derivation,
    CheckResult, BUILTIN_NAMES,
};
use crate::model::{
    eval_axiom_sampled, eval_formula_exhaustive, eval_quantifier_free, parse_rational,
    refute_with_instance, search_finite_models, BuiltinModel, FiniteModel, ModelCheckReport,
    PointAssignment, SampleConfig, SearchBudget, SearchMode, Status,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub report: String,
}

impl CommandOutcome {
    fn new(exit_code: i32, report: String) -> Self {
        Self { exit_code, report }
    }

    fn usage(message: impl std::fmt::Display) -> Self {
        Self::new(EXIT_USAGE, format!("error: {message}\n"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    /// One JSON object per line.
    Records,
}

#[derive(Debug, Parser)]
#[command(name = "tarski", version, about = "Check derivations and models for Tarski's plane axioms")]
struct Cli {
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    /// Include elapsed times (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect the axiom catalogue.
    #[command(subcommand)]
    Axioms(AxiomsCmd),
    /// Check derivations.
    #[command(subcommand)]
    Prove(ProveCmd),
    /// Evaluate axioms in the built-in planes or in a finite model.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Look for finite models.
    #[command(subcommand)]
    Search(SearchCmd),
}

#[derive(Debug, Subcommand)]
enum AxiomsCmd {
    /// List axioms, or the members of one system.
    List {
        #[arg(long)]
        system: Option<String>,
    },
    /// Print an axiom or a system.
    Show { name: String },
    /// Print the whole catalogue as `name := formula` lines.
    Export,
}

#[derive(Debug, Subcommand)]
enum ProveCmd {
    /// Check a derivation script.
    Check {
        file: PathBuf,
    },
    /// Check built-in derivations.
    Builtin {
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        all: bool,
        /// Print the script instead of checking it.
        #[arg(long)]
        print: bool,
    },
}

#[derive(Debug, Args)]
struct Selection {
    #[arg(long)]
    system: Option<String>,
    /// Axiom names; repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    axiom: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    except: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum ModelCmd {
    /// Sample axioms in a built-in plane.
    Check {
        #[arg(long, default_value = "M")]
        model: String,
        #[command(flatten)]
        select: Selection,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        epsilon: Option<String>,
        /// Also sample the designated continuity instances.
        #[arg(long)]
        continuity: bool,
    },
    /// Print the stored counterexample for an axiom.
    Refute {
        #[arg(long, default_value = "M")]
        model: String,
        #[arg(long)]
        axiom: String,
    },
    /// Evaluate formulas in a finite model file, or a formula in a built-in plane.
    Eval {
        #[arg(long, conflicts_with = "model")]
        file: Option<PathBuf>,
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        select: Selection,
        #[arg(long)]
        formula: Option<String>,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
enum SearchCmd {
    /// Enumerate finite models satisfying some axioms and violating another.
    Finite {
        #[arg(long)]
        system: Option<String>,
        #[arg(long, value_delimiter = ',')]
        require: Vec<String>,
        #[arg(long)]
        forbid: Option<String>,
        #[arg(long, default_value_t = 2)]
        max_size: usize,
        /// Maximum table pairs per domain size.
        #[arg(long)]
        budget: Option<u64>,
        /// Random table pairs at size 3 (requires --max-size 3).
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Fail if any model is found.
        #[arg(long)]
        expect_none: bool,
        #[arg(long, default_value_t = 1000)]
        max_models: usize,
    },
}

struct Out {
    format: Format,
    timing: bool,
    text: String,
}

impl Out {
    fn line(&mut self, text: impl AsRef<str>) {
        self.text.push_str(text.as_ref());
        self.text.push('\n');
    }

    fn record<T: Serialize>(&mut self, value: &T) {
        let line = serde_json::to_string(value).expect("records serialise");
        self.line(line);
    }

    fn emit<T: Serialize>(&mut self, text: impl AsRef<str>, value: &T) {
        match self.format {
            Format::Text => self.line(text),
            Format::Records => self.record(value),
        }
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, S>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return CommandOutcome::new(code, e.render().to_string());
        }
    };
    let mut out = Out {
        format: cli.format,
        timing: cli.timing,
        text: String::new(),
    };
    let result = match cli.command {
        Command::Axioms(c) => axioms(c, &mut out),
        Command::Prove(c) => prove(c, &mut out),
        Command::Model(c) => model(c, &mut out),
        Command::Search(c) => search(c, &mut out),
    };
    match result {
        Ok(code) => CommandOutcome::new(code, out.text),
        Err(message) => CommandOutcome::usage(message),
    }
}

type CmdResult = Result<i32, String>;

fn axioms(cmd: AxiomsCmd, out: &mut Out) -> CmdResult {
    let member_record = |m: &Member| match m {
        Member::Axiom(a) => json!({"name": a.name, "formula": render_formula(&a.sentence)}),
        Member::Schema(n) => json!({"name": n, "schema": true}),
    };
    let member_text = |m: &Member| match m {
        Member::Axiom(a) => a.to_string(),
        Member::Schema(n) => format!("{n} := (first-order continuity schema)"),
    };
    match cmd {
        AxiomsCmd::List { system: None } => {
            for a in all_axioms() {
                out.emit(a.to_string(), &member_record(&Member::Axiom(a.clone())));
            }
            if out.format == Format::Text {
                out.line(format!("systems: {}", system_names().join(", ")));
            }
        }
        AxiomsCmd::List { system: Some(s) } => {
            let sys = get_system(&s).map_err(|e| e.to_string())?;
            for m in &sys.members {
                out.emit(member_text(m), &member_record(m));
            }
        }
        AxiomsCmd::Show { name } => {
            if let Ok(a) = get_axiom(&name) {
                let text = render_formula(&a.sentence);
                out.emit(&text, &json!({"name": a.name, "formula": text}));
            } else if let Ok(sys) = get_system(&name) {
                out.emit(
                    format!("{} = {{{}}}", sys.name, sys.names().join(", ")),
                    &json!({"system": sys.name, "members": sys.names()}),
                );
            } else if canonical_name(&name) == "Co" {
                out.emit(
                    "Co: first-order continuity schema; instantiate with formulas phi(x), psi(y)",
                    &json!({"name": "Co", "schema": true}),
                );
            } else {
                return Err(get_axiom(&name).unwrap_err().to_string());
            }
        }
        AxiomsCmd::Export => {
            for a in all_axioms() {
                out.emit(a.to_string(), &member_record(&Member::Axiom(a.clone())));
            }
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ProofRecord<'a> {
    name: &'a str,
    #[serde(flatten)]
    result: &'a CheckResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u64>,
}

fn proof_line(out: &mut Out, name: &str, result: &CheckResult, elapsed: Option<u64>) {
    let elapsed = elapsed.filter(|_| out.timing);
    let mut text = format!("{name}: {result}");
    if let Some(ms) = elapsed {
        let _ = write!(text, " ({ms}ms)");
    }
    out.emit(
        text,
        &ProofRecord {
            name,
            result,
            elapsed_ms: elapsed,
        },
    );
}

fn prove(cmd: ProveCmd, out: &mut Out) -> CmdResult {
    match cmd {
        ProveCmd::Check { file } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| format!("cannot read {}: {e}", file.display()))?;
            let start = Instant::now();
            let (name, result) = match parse_derivation(&text) {
                Ok(d) => (d.name.clone(), check_derivation(&d)),
                Err(e) => (
                    file.display().to_string(),
                    CheckResult::rejected(Some(e.line), format!("script error: {}", e.message)),
                ),
            };
            let ms = start.elapsed().as_millis() as u64;
            proof_line(out, &name, &result, Some(ms));
            Ok(if result.is_accepted() { EXIT_OK } else { EXIT_FAILED })
        }
        ProveCmd::Builtin { name, all, print } => {
            let names: Vec<&str> = match (&name, all) {
                (Some(n), false) => vec![n.as_str()],
                (None, true) => BUILTIN_NAMES.to_vec(),
                _ => return Err("give a builtin name or --all".into()),
            };
            if print {
                for n in &names {
                    let d = builtin_derivation(n).map_err(|e| e.to_string())?;
                    let script = render_derivation(&d);
                    out.emit(script.trim_end(), &json!({"name": n, "script": script}));
                }
                return Ok(EXIT_OK);
            }
            let mut ok = true;
            for n in names {
                let start = Instant::now();
                let results = check_catalog(&[n]).map_err(|e| e.to_string())?;
                let ms = start.elapsed().as_millis() as u64;
                for (name, result) in results {
                    ok &= result.is_accepted();
                    proof_line(out, &name, &result, Some(ms));
                }
            }
            Ok(if ok { EXIT_OK } else { EXIT_FAILED })
        }
    }
}

fn split_names(list: &[String]) -> Vec<String> {
    list.iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(canonical_name)
        .collect()
}

/// Members named by `--system`/`--axiom`, minus `--except`.
fn select(sel: &Selection) -> Result<Vec<Member>, String> {
    let mut members: Vec<Member> = Vec::new();
    if let Some(s) = &sel.system {
        members.extend(get_system(s).map_err(|e| e.to_string())?.members);
    }
    let names = split_names(&sel.axiom);
    if !names.is_empty() {
        let extra = AxiomSystem::from_names("selection", &names).map_err(|e| e.to_string())?;
        for m in extra.members {
            if !members.iter().any(|x| x.name() == m.name()) {
                members.push(m);
            }
        }
    }
    let except: BTreeSet<String> = split_names(&sel.except).into_iter().collect();
    for e in &except {
        if e != "Co" {
            get_axiom(e).map_err(|err| err.to_string())?;
        }
    }
    members.retain(|m| !except.contains(m.name()));
    Ok(members)
}

fn report(out: &mut Out, mut r: ModelCheckReport) {
    if !out.timing {
        r.elapsed_ms = None;
    }
    out.emit(r.to_string(), &r);
}

fn failed(r: &ModelCheckReport) -> bool {
    match &r.status {
        Status::Refuted { .. } => true,
        Status::Skipped { reason } => reason != "schema",
        _ => false,
    }
}

fn builtin_model(name: &str, epsilon: Option<&str>) -> Result<BuiltinModel, String> {
    let mut m = BuiltinModel::by_name(name).map_err(|e| e.to_string())?;
    if let Some(eps) = epsilon {
        m.epsilon = parse_rational(eps).map_err(|e| e.to_string())?;
    }
    Ok(m)
}

fn model(cmd: ModelCmd, out: &mut Out) -> CmdResult {
    match cmd {
        ModelCmd::Check {
            model,
            select: sel,
            samples,
            seed,
            epsilon,
            continuity,
        } => {
            let m = builtin_model(&model, epsilon.as_deref())?;
            let mut members = select(&sel)?;
            if members.is_empty() && !continuity {
                return Err("nothing to check: give --system or --axiom".into());
            }
            if continuity {
                members.extend(continuity_suite().into_iter().map(|c| Member::Axiom(c.as_named())));
            }
            let cfg = SampleConfig::new(seed, samples);
            let reports = crate::model::check_members(&m, &members, &cfg);
            let mut code = EXIT_OK;
            for r in reports {
                if failed(&r) {
                    code = EXIT_FAILED;
                }
                report(out, r);
            }
            Ok(code)
        }
        ModelCmd::Refute { model, axiom } => {
            let m = builtin_model(&model, None)?;
            let r = refute_with_instance(&m, &axiom).map_err(|e| e.to_string())?;
            report(out, r);
            Ok(EXIT_OK)
        }
        ModelCmd::Eval {
            file,
            model,
            select: sel,
            formula,
            samples,
            seed,
        } => {
            let mut targets: Vec<NamedFormula> = Vec::new();
            let mut members = select(&sel)?;
            members.retain(|m| matches!(m, Member::Axiom(_)));
            for m in members {
                if let Member::Axiom(a) = m {
                    targets.push(a);
                }
            }
            if let Some(src) = &formula {
                let f = parse_formula(src).map_err(|e| format!("--formula: {e}"))?;
                targets.push(NamedFormula::new(render_formula(&f), f));
            }
            if targets.is_empty() {
                return Err("nothing to evaluate: give --formula, --axiom or --system".into());
            }
            match (file, model) {
                (Some(path), _) => eval_finite(out, &path, &targets),
                (None, Some(name)) => eval_builtin(out, &name, &targets, samples, seed),
                (None, None) => Err("give --file or --model".into()),
            }
        }
    }
}

fn eval_finite(out: &mut Out, path: &PathBuf, targets: &[NamedFormula]) -> CmdResult {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let fm = FiniteModel::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut code = EXIT_OK;
    for t in targets {
        let e = eval_formula_exhaustive(&fm, &t.sentence).map_err(|e| e.to_string())?;
        if !e.holds {
            code = EXIT_FAILED;
        }
        let text = match &e.counterexample {
            None => format!("{}: holds", t.name),
            Some(c) if c.0.is_empty() => format!("{}: fails", t.name),
            Some(c) => format!("{}: fails at {c}", t.name),
        };
        out.emit(
            text,
            &json!({"formula": t.name, "size": fm.size, "holds": e.holds, "counterexample": e.counterexample}),
        );
    }
    Ok(code)
}

fn eval_builtin(out: &mut Out, model: &str, targets: &[NamedFormula], samples: u64, seed: u64) -> CmdResult {
    let m = builtin_model(model, None)?;
    let mut code = EXIT_OK;
    for t in targets {
        let closed = Formula::forall_all(&t.sentence.free_variables().into_iter().collect::<Vec<_>>(), t.sentence.clone());
        if closed.quantifier_count() == 0 {
            let holds = eval_quantifier_free(&m, &closed, &PointAssignment::new()).map_err(|e| e.to_string())?;
            if !holds {
                code = EXIT_FAILED;
            }
            let verdict = if holds { "holds" } else { "fails" };
            out.emit(
                format!("{} in {}: {verdict}", t.name, m.id()),
                &json!({"formula": t.name, "model": m.id(), "holds": holds}),
            );
        } else {
            let r = eval_axiom_sampled(&m, &NamedFormula::new(t.name.clone(), closed), &SampleConfig::new(seed, samples));
            if failed(&r) {
                code = EXIT_FAILED;
            }
            report(out, r);
        }
    }
    Ok(code)
}

fn formulas(names: &[String]) -> Result<Vec<NamedFormula>, String> {
    names
        .iter()
        .map(|n| get_axiom(n).map_err(|e| e.to_string()))
        .collect()
}

fn search(cmd: SearchCmd, out: &mut Out) -> CmdResult {
    let SearchCmd::Finite {
        system,
        require,
        forbid,
        max_size,
        budget,
        samples,
        seed,
        expect_none,
        max_models,
    } = cmd;
    let mut required: Vec<NamedFormula> = Vec::new();
    if let Some(s) = &system {
        let sys = get_system(s).map_err(|e| e.to_string())?;
        required.extend(sys.first_order_members().into_iter().cloned());
    }
    for f in formulas(&split_names(&require))? {
        if !required.iter().any(|r| r.name == f.name) {
            required.push(f);
        }
    }
    let forbidden = forbid.as_deref().map(get_axiom).transpose().map_err(|e| e.to_string())?;
    let mut b = SearchBudget {
        max_models,
        ..SearchBudget::default()
    };
    if let Some(p) = budget {
        b.max_pairs = p;
    }
    if let Some(samples) = samples {
        b.mode = SearchMode::Sampled { samples, seed };
    }
    let start = Instant::now();
    let outcome = search_finite_models(&required, forbidden.as_ref(), max_size, &b).map_err(|e| e.to_string())?;
    let ms = start.elapsed().as_millis() as u64;

    for m in &outcome.models {
        match out.format {
            Format::Text => {
                out.line("---");
                out.text.push_str(&m.to_string());
            }
            Format::Records => out.record(&json!({"kind": "model", "model": m})),
        }
    }
    let stats = &outcome.stats;
    let elapsed = out.timing.then_some(ms);
    match out.format {
        Format::Text => {
            let names: Vec<&str> = required.iter().map(|r| r.name.as_str()).collect();
            let mut s = format!(
                "found {} model(s) of {{{}}}{} up to size {max_size}",
                stats.total_models(),
                names.join(", "),
                forbidden.as_ref().map(|f| format!(" violating {}", f.name)).unwrap_or_default(),
            );
            for z in &stats.sizes {
                let how = if z.sampled { "sampled" } else { "exhaustive" };
                let _ = write!(
                    s,
                    "\n  size {} ({how}): {} pairs checked, {} models",
                    z.size, z.pairs_checked, z.models
                );
                if z.sampled {
                    let _ = write!(s, ", {} satisfied the required axioms", z.pairs_satisfying_required);
                } else {
                    let _ = write!(
                        s,
                        ", B tables kept {}/{}, D tables kept {}/{}",
                        z.b_kept, z.b_tables, z.d_kept, z.d_tables
                    );
                }
            }
            if stats.budget_exceeded {
                s.push_str("\n  budget exceeded: the search is incomplete");
            }
            if stats.models_truncated {
                s.push_str("\n  model list truncated; counts are complete");
            }
            if let Some(ms) = elapsed {
                let _ = write!(s, "\n  {ms}ms");
            }
            out.line(s);
        }
        Format::Records => {
            let mut v = json!({"kind": "stats", "stats": stats});
            if let Some(ms) = elapsed {
                v["elapsed_ms"] = json!(ms);
            }
            out.record(&v);
        }
    }
    let complete = !stats.budget_exceeded;
    Ok(if expect_none && (stats.total_models() > 0 || !complete) {
        EXIT_FAILED
    } else {
        EXIT_OK
    })
}
