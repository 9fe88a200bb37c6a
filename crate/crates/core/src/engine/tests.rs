use super::*;
use crate::frontend::{parse_verilog, parse_vlng, print_vlng};
use crate::ir::equivalent_bounded;

fn add(eg: &mut EGraph, s: &str) -> Id {
    eg.add_term(&parse_vlng(s).unwrap()).unwrap()
}

fn rule_just(name: &str) -> Justification {
    Justification::Rule {
        name: name.into(),
        variant: 0,
        binding: MapBinding::new(),
    }
}

#[test]
fn hash_consing_shares_subterms() {
    let mut eg = EGraph::new();
    // (a+b) * (a+b): classes for a, b, a+b, product.
    add(
        &mut eg,
        "(* 8 4 unsign (+ 4 4 unsign a 4 unsign b) 4 unsign (+ 4 4 unsign a 4 unsign b))",
    );
    assert_eq!(eg.num_classes(), 4);
}

#[test]
fn consecutive_additions_make_five_classes() {
    let mut eg = EGraph::new();
    add(
        &mut eg,
        "(+ 10 9 unsign (+ 9 8 unsign A 8 unsign B) 8 unsign C)",
    );
    assert_eq!(eg.num_classes(), 5);
}

#[test]
fn readding_returns_same_id() {
    let mut eg = EGraph::new();
    let t = parse_vlng("(+ 9 8 unsign x 8 unsign y)").unwrap();
    let a = eg.add_term(&t).unwrap();
    let b = eg.add_term(&t).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ematch_commutativity_map() {
    let mut eg = EGraph::new();
    add(&mut eg, "(+ 9 8 unsign x 8 unsign y)");
    let pat = parse_vlng("(+ w wa sa a wb sb b)").unwrap();
    let ms = ematch_pattern(&eg, &pat);
    assert_eq!(ms.len(), 1);
    let b = &ms[0].binding;
    assert_eq!(b["w"], Bound::Width(9));
    assert_eq!(b["wa"], Bound::Width(8));
    assert_eq!(b["sa"], Bound::Sig(crate::ir::Signage::Unsign));
    assert_eq!(b["wb"], Bound::Width(8));
    assert_eq!(b["sb"], Bound::Sig(crate::ir::Signage::Unsign));
}

#[test]
fn ematch_restricted_assoc_on_fig4() {
    let src = "
module fig4(input [7:0] A, input [7:0] B, input [7:0] C,
            output [9:0] left1, output [9:0] left2, output [9:0] right);
  wire [7:0] add_8bit;
  wire [8:0] add_9bit;
  wire [8:0] add_right;
  assign add_8bit = A + B;
  assign left1 = add_8bit + C;
  assign add_9bit = A + B;
  assign left2 = add_9bit + C;
  assign add_right = B + C;
  assign right = A + add_right;
endmodule";
    let m = parse_verilog(src).unwrap();
    let mut eg = EGraph::new();
    for b in &m.bindings {
        let id = eg.add_term(&b.term).unwrap();
        eg.retain_name(id, &b.name);
    }
    // Restricted associativity: a, b, c share one width and signage.
    let pat = parse_vlng("(+ w3 w2 s2 (+ w2 w1 s1 a w1 s1 b) w1 s1 c)").unwrap();
    let ms = ematch_pattern(&eg, &pat);
    assert_eq!(ms.len(), 2, "exactly the two maps m1 and m2");
    let w2s: Vec<u32> = ms
        .iter()
        .map(|m| match m.binding["w2"] {
            Bound::Width(w) => w,
            _ => panic!(),
        })
        .collect();
    assert!(w2s.contains(&8) && w2s.contains(&9));
}

#[test]
fn ematch_absent_operator_empty() {
    let mut eg = EGraph::new();
    add(&mut eg, "(+ 9 8 unsign x 8 unsign y)");
    let pat = parse_vlng("(* w wa sa a wb sb b)").unwrap();
    assert!(ematch_pattern(&eg, &pat).is_empty());
}

#[test]
fn const_fold_injects_leaf() {
    let mut eg = EGraph::new();
    let id = add(&mut eg, "(+ 4 2 unsign 1 2 unsign 2)");
    eg.rebuild().unwrap();
    let c = eg.class(id);
    assert_eq!(c.const_val, Some(3u32.into()));
    assert!(c
        .nodes
        .iter()
        .any(|n| matches!(n, ENode::Const(v) if *v == 3u32.into())));
}

#[test]
fn free_variable_blocks_fold() {
    // 9'd256 - {1'b0, b}: b free, no fold.
    let m = parse_verilog(
        "module m(input [7:0] b, output [8:0] a);\n assign a = 9'd256 - {1'b0, b};\nendmodule",
    )
    .unwrap();
    let mut eg = EGraph::new();
    let id = eg.add_term(&m.binding("a").unwrap().term).unwrap();
    eg.rebuild().unwrap();
    assert_eq!(eg.class(id).const_val, None);
}

#[test]
fn analysis_conflict_detected() {
    let mut eg = EGraph::new();
    let a = add(&mut eg, "3");
    let b = add(&mut eg, "5");
    let r = eg.union_instances(a, b, rule_just("bogus"));
    assert!(matches!(r, Err(EngineError::AnalysisConflict { .. })));
}

#[test]
fn union_monotonic_and_congruence() {
    let mut eg = EGraph::new();
    let fa = add(&mut eg, "(~ 4 4 unsign a)");
    let fb = add(&mut eg, "(~ 4 4 unsign b)");
    let a = add(&mut eg, "a");
    let b = add(&mut eg, "b");
    let n0 = eg.num_nodes();
    eg.union_instances(a, b, rule_just("ab")).unwrap();
    eg.rebuild().unwrap();
    // Congruence merged ~a with ~b; dedup may drop identical members but
    // the partition only coarsens.
    assert_eq!(eg.find(fa), eg.find(fb));
    assert!(eg.num_nodes() <= n0);
    assert!(eg.provenance_replay_matches());
    assert!(eg.provenance.iter().any(|p| p.rule == "congruence"));
}

#[test]
fn explain_trivial_and_single_step() {
    let mut eg = EGraph::new();
    let t = parse_vlng("(+ 9 8 unsign x 8 unsign y)").unwrap();
    eg.add_term(&t).unwrap();
    let ex = eg.explain(&t, &t).unwrap();
    assert_eq!(ex.terms.len(), 1);
    assert!(ex.steps.is_empty());

    let u = parse_vlng("(+ 9 8 unsign y 8 unsign x)").unwrap();
    let ia = eg.add_term(&t).unwrap();
    let ib = eg.add_term(&u).unwrap();
    eg.union_instances(ia, ib, rule_just("commutativity")).unwrap();
    eg.rebuild().unwrap();
    let ex = eg.explain(&t, &u).unwrap();
    assert_eq!(ex.terms.len(), 2);
    assert_eq!(ex.steps[0].rule, "commutativity");
    assert_eq!(print_vlng(&ex.terms[1]), print_vlng(&u));
}

#[test]
fn explain_through_congruence_is_single_position() {
    let mut eg = EGraph::new();
    let t1 = parse_vlng("(~ 4 4 unsign (+ 4 4 unsign x 4 unsign x))").unwrap();
    let t2 = parse_vlng("(~ 4 4 unsign (<< 4 4 unsign x 2 unsign 1))").unwrap();
    eg.add_term(&t1).unwrap();
    eg.add_term(&t2).unwrap();
    let g = add(&mut eg, "(+ 4 4 unsign x 4 unsign x)");
    let h = add(&mut eg, "(<< 4 4 unsign x 2 unsign 1)");
    eg.union_instances(g, h, rule_just("sum-to-shift")).unwrap();
    eg.rebuild().unwrap();
    let ex = eg.explain(&t1, &t2).unwrap();
    assert_eq!(ex.terms.len(), 2);
    assert_eq!(ex.steps[0].rule, "sum-to-shift");
    assert_eq!(print_vlng(&ex.terms[0]), print_vlng(&t1));
    assert_eq!(print_vlng(&ex.terms[1]), print_vlng(&t2));
    assert_eq!(equivalent_bounded(&ex.terms[0], &ex.terms[1]).unwrap(), None);
}

#[test]
fn explain_not_equivalent_errors() {
    let mut eg = EGraph::new();
    let t = parse_vlng("(+ 4 4 unsign x 4 unsign y)").unwrap();
    let u = parse_vlng("(* 4 4 unsign x 4 unsign y)").unwrap();
    eg.add_term(&t).unwrap();
    eg.add_term(&u).unwrap();
    assert!(matches!(
        eg.explain(&t, &u),
        Err(EngineError::NotEquivalentInEGraph)
    ));
}

#[test]
fn name_retention_prefers_first_binding() {
    let mut eg = EGraph::new();
    let a = add(&mut eg, "(+ 4 4 unsign x 4 unsign y)");
    eg.retain_name(a, "first");
    let b = add(&mut eg, "(+ 4 4 unsign y 4 unsign x)");
    eg.retain_name(b, "second");
    eg.union_instances(a, b, rule_just("comm")).unwrap();
    eg.rebuild().unwrap();
    assert_eq!(eg.class(a).name.as_ref().unwrap().0, "first");
}

#[test]
fn instantiate_unions_with_pattern_substitution() {
    let mut eg = EGraph::new();
    let root = add(&mut eg, "(+ 9 8 unsign x 8 unsign y)");
    let lhs = parse_vlng("(+ w wa sa a wb sb b)").unwrap();
    let rhs = parse_vlng("(+ w wb sb b wa sa a)").unwrap();
    let m = ematch_pattern(&eg, &lhs).remove(0);
    // Partial evaluation keeps term variables.
    let inst = instantiate_term(&rhs, &m.binding).unwrap();
    assert_eq!(print_vlng(&inst), "(+ 9 8 unsign b 8 unsign a)");
    let l = eg.instantiate(&lhs, &m.binding).unwrap();
    let r = eg.instantiate(&rhs, &m.binding).unwrap();
    eg.union_instances(l, r, rule_just("commutativity")).unwrap();
    eg.rebuild().unwrap();
    let want = add(&mut eg, "(+ 9 8 unsign y 8 unsign x)");
    assert_eq!(eg.find(root), eg.find(want));
}
