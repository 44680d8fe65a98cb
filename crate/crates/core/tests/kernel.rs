use tarski_core::axioms::{all_axioms, get_axiom, AxiomSystem};
use tarski_core::kernel::{
    builtin_derivation, check_derivation, parse_derivation, render_derivation, Rule, BUILTIN_NAMES,
};

#[test]
fn deleting_any_line_breaks_every_builtin() {
    for name in BUILTIN_NAMES {
        let d = builtin_derivation(name).unwrap();
        for pos in 0..d.lines.len() {
            let r = check_derivation(&d.without_line(pos));
            assert!(
                !r.is_accepted(),
                "{name}: still accepted without line {}",
                d.lines[pos].index
            );
        }
    }
}

#[test]
fn reflexivity_from_unswapped_five_segment_fails_at_instantiation() {
    let mut d = builtin_derivation("lemma_re").unwrap();
    let names: Vec<String> = d
        .premises
        .names()
        .into_iter()
        .map(|n| if n == "FS'" { "FS".to_string() } else { n.to_string() })
        .collect();
    d.premises = AxiomSystem::from_names("mutated", &names).unwrap();
    let premise_pos = d
        .lines
        .iter()
        .position(|l| l.rule == Rule::Premise("FS'".into()))
        .unwrap();
    d.lines[premise_pos].rule = Rule::Premise("FS".into());
    d.lines[premise_pos].formula = get_axiom("FS").unwrap().sentence;
    let inst = d.lines[premise_pos + 1].index;
    assert!(matches!(d.lines[premise_pos + 1].rule, Rule::ForallElim { .. }));

    let r = check_derivation(&d);
    assert!(!r.is_accepted());
    assert_eq!(r.failing_line, Some(inst), "{r}");
}

#[test]
fn extra_premises_do_not_break_acceptance() {
    let every: Vec<String> = all_axioms().iter().map(|a| a.name.clone()).collect();
    for name in BUILTIN_NAMES {
        let mut d = builtin_derivation(name).unwrap();
        let mut names: Vec<String> = d.premises.names().iter().map(|n| n.to_string()).collect();
        names.extend(every.iter().cloned());
        d.premises = AxiomSystem::from_names("superset", &names).unwrap();
        assert!(check_derivation(&d).is_accepted(), "{name}");
    }
}

#[test]
fn missing_premise_is_rejected() {
    let mut d = builtin_derivation("lemma_abab").unwrap();
    d.premises = AxiomSystem::from_names("only TE", &["TE"]).unwrap();
    let r = check_derivation(&d);
    assert!(!r.is_accepted());
    assert_eq!(r.failing_line, Some(1));
}

#[test]
fn rendered_script_parses_and_checks() {
    let d = builtin_derivation("opp_from_op_given_sb").unwrap();
    let text = render_derivation(&d);
    assert!(text.contains("excluded-middle"));
    let back = parse_derivation(&text).unwrap();
    assert!(check_derivation(&back).is_accepted());
}
