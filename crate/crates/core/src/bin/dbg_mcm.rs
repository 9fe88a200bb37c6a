// Diagnostic: find the union that merges two different constants.
use dpopt::engine::*;
use dpopt::frontend::parse_verilog;
use dpopt::rules::*;
fn main() {
    let m = parse_verilog(dpopt::cli::corpus::MCM_3_7_21).unwrap();
    let mut eg = EGraph::new();
    for b in &m.bindings {
        let id = eg.add_term(&b.term).unwrap();
        eg.retain_name(id, &b.name);
    }
    eg.rebuild().unwrap();
    let set = RuleSet::new(&RuleOptions::all()).with_mcm_extensions();
    let limits = Limits { max_iters: 16, max_nodes: 20000, wallclock: std::time::Duration::from_secs(120) };
    match run_saturation(&mut eg, &set.refs(), &limits) {
        Ok(r) => println!("ok: {:?}", r.stop_reason),
        Err(e) => {
            println!("ERROR: {e}");
            for p in eg.provenance.iter().rev().take(8) {
                println!("  {} {} <- {} [{}]", p.rule, p.merged_into, p.merged_from, render_binding(&p.binding));
            }
        }
    }
}
