use dpopt::engine::*;
use dpopt::frontend::parse_verilog;
use dpopt::rules::*;
fn main() {
    let src = dpopt::cli::corpus::fir3_source(8);
    let m = parse_verilog(&src).unwrap();
    let mut eg = EGraph::new();
    for b in &m.bindings {
        let id = eg.add_term(&b.term).unwrap();
        eg.retain_name(id, &b.name);
    }
    eg.rebuild().unwrap();
    // Evaluate the add-shr condition on the y-cone map.
    let rules = builtin_ruleset(&RuleOptions::default());
    let addshr = rules.iter().find(|r| r.name == "add-shr").unwrap();
    let ms = crate_search(addshr, &eg);
    println!("add-shr matches: {}", ms.len());
    for mm in &ms {
        println!("  {} cond={:?}", render_binding(&mm.binding), addshr.condition(mm.variant).eval(&mm.binding));
    }
    let set = RuleSet::new(&RuleOptions::default());
    let limits = Limits { max_iters: 10, max_nodes: 20000, wallclock: std::time::Duration::from_secs(60) };
    let rep = run_saturation(&mut eg, &set.refs(), &limits).unwrap();
    println!("stop={:?} nodes={} classes={}", rep.stop_reason, eg.num_nodes(), eg.num_classes());
    let mut sums = 0;
    for id in eg.class_ids() {
        for n in &eg.class(id).nodes {
            if matches!(n, ENode::Op { op: dpopt::ir::Op::Sum, .. }) { sums += 1; }
        }
    }
    println!("SUM nodes: {sums}");
    // Show the stored add-shr condition.
    let store = ConditionStore::embedded();
    println!("add-shr cond: {}", store.get("add-shr#0").unwrap().cond);
}
fn crate_search(r: &Rewrite, eg: &EGraph) -> Vec<Match> {
    RewriteRule::search(r, eg)
}
