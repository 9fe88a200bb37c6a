//! Acceptance suite: one test per criterion, each printing a pass line.
//! Run with `cargo test --test acceptance -- --test-threads=1 --nocapture`.

mod support;

use dpopt::cli::{self, corpus, optimize_design, RunConfig};
use dpopt::condsynth::{
    enumerate_maps_vars, soundness_sweep, synthesize_mode, LabelMode, DEFAULT_MAP_CAP,
};
use dpopt::engine::{Bound, EGraph, Id, Limits, MapBinding, StopReason};
use dpopt::extraction::{greedy_extract, ilp_extract, CostModel};
use dpopt::frontend::{parse_verilog, parse_vlng};
use dpopt::ir::{Signage, Term};
use dpopt::rules::{builtin_ruleset, Condition, Rhs, RuleOptions, RuleSet};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

fn pass(n: u32, what: &str) {
    println!("ACCEPTANCE {n:02}: PASS - {what}");
}

fn restricted_assoc_pair() -> (Term, Term) {
    (
        parse_vlng("(+ w3 w2 s2 (+ w2 w1 s1 a w1 s1 b) w1 s1 c)").unwrap(),
        parse_vlng("(+ w3 w1 s1 a w2 s2 (+ w2 w1 s1 b w1 s1 c))").unwrap(),
    )
}

/// Fig. 6's five-product expression, verbatim.
fn fig6_condition() -> Condition {
    Condition::parse(
        "(w2<w3 & w1<w2 & s1=u) | (w2<w3 & w1<w2 & !(s1=u) & !(s2=u)) | \
         (!(w2<w3) & w1<w3 & s1=u) | (!(w2<w3) & w1<w3 & !(s1=u) & !(s2=u)) | \
         (!(w2<w3) & !(w1<w3))",
    )
    .unwrap()
}

/// The synthesized restricted-associativity condition, shared by criteria
/// 1 and 2 (synthesis runs once).
fn synthesized_restricted_assoc() -> &'static (Condition, u64, usize, u128) {
    static CELL: OnceLock<(Condition, u64, usize, u128)> = OnceLock::new();
    CELL.get_or_init(|| {
        let (l, r) = restricted_assoc_pair();
        let t0 = Instant::now();
        let rep = synthesize_mode(
            &l,
            &Rhs::Pattern(r),
            8,
            DEFAULT_MAP_CAP,
            &|_| None,
            LabelMode::VerilogContext,
        )
        .expect("synthesis succeeds");
        (rep.cond, rep.maps, rep.depth, t0.elapsed().as_millis())
    })
}

#[test]
fn criterion_01_condition_synthesis_reproduces_fig6() {
    let (cond, maps, depth, ms) = synthesized_restricted_assoc();
    assert_eq!(*maps, 2048, "|M| = 8^3 x 2^2");
    assert_eq!(*depth, 4, "zero-error tree at depth four");
    let fig6 = fig6_condition();
    let all = enumerate_maps_vars(
        &["w1".into(), "w2".into(), "w3".into()],
        &["s1".into(), "s2".into()],
        8,
        DEFAULT_MAP_CAP,
    )
    .unwrap();
    for m in &all {
        assert_eq!(
            cond.eval(m),
            fig6.eval(m),
            "SOP differs from the figure at {m:?}"
        );
    }
    assert!(*ms < 120_000, "must finish in under 120 s, took {ms} ms");
    pass(1, &format!("2048 maps, depth-4 tree, SOP == figure ({ms} ms)"));
}

#[test]
fn criterion_02_fig4_validity_maps() {
    let (cond, ..) = synthesized_restricted_assoc();
    let mk = |w2: u32| -> MapBinding {
        [
            ("w3".to_string(), Bound::Width(9)),
            ("w2".to_string(), Bound::Width(w2)),
            ("w1".to_string(), Bound::Width(8)),
            ("s1".to_string(), Bound::Sig(Signage::Unsign)),
            ("s2".to_string(), Bound::Sig(Signage::Unsign)),
        ]
        .into_iter()
        .collect()
    };
    assert_eq!(cond.eval(&mk(8)), Some(false), "phi(m1) = false");
    assert_eq!(cond.eval(&mk(9)), Some(true), "phi(m2) = true");
    pass(2, "phi(m1)=false, phi(m2)=true");
}

#[test]
fn criterion_03_rule_soundness_sweep() {
    let t0 = Instant::now();
    let mut rules = builtin_ruleset(&RuleOptions::all());
    rules.extend(dpopt::rules::mcm_extension_rules());
    rules.extend(dpopt::rules::fig_example_rules());
    let samples = [2u64, 3, 5, 7, 12, 21];
    let mut conditional = 0;
    let mut seen = std::collections::HashSet::new();
    for r in &rules {
        if !seen.insert(r.name.clone()) {
            continue;
        }
        let out = soundness_sweep(r, 4, &samples)
            .unwrap_or_else(|e| panic!("sweep of {} failed: {e}", r.name));
        assert!(
            out.violations.is_empty(),
            "UNSOUND {}: {:?}",
            r.name,
            out.violations
        );
        let has_condition = r.variants.iter().any(|v| v.cond != Condition::True);
        if has_condition {
            conditional += 1;
            assert!(
                out.nonequiv_false_map.is_some(),
                "{} rejects no genuinely non-equivalent map (vacuous condition)",
                r.name
            );
        }
        println!(
            "  swept {:<24} cond_true={} cond_false={} necessity={}",
            r.name,
            out.cond_true_checked,
            out.cond_false_maps,
            out.nonequiv_false_map.is_some()
        );
    }
    assert!(conditional >= 20, "most of the catalog is conditional");
    let secs = t0.elapsed().as_secs();
    assert!(secs < 1800, "sweep must stay under 30 min, took {secs}s");
    pass(3, &format!("zero violations across the catalog ({secs}s)"));
}

fn bench_cfg(name: &str) -> RunConfig {
    cli::bench_config(name)
}

#[test]
fn criterion_04_corpus_certificates_verify() {
    let t0 = Instant::now();
    for (name, src) in corpus::corpus() {
        let cfg = bench_cfg(name);
        let res = optimize_design(&src, &cfg).unwrap_or_else(|e| panic!("{name} failed: {e}"));
        let vr = res.verify.expect("verification enabled");
        assert!(vr.pass, "{name} certificate failed: {vr:?}");
        assert!(vr.endpoints_pass, "{name} endpoints not equivalent");
        println!(
            "  {name}: {} proof steps verified, cost {} -> {}",
            res.summary.proof_steps, res.summary.cost_before, res.summary.cost_after
        );
    }
    let secs = t0.elapsed().as_secs();
    assert!(secs < 600, "corpus verification must stay under 10 min, took {secs}s");
    pass(4, &format!("all corpus certificates verified ({secs}s)"));
}

fn addsub_count(counts: &std::collections::BTreeMap<String, usize>) -> usize {
    counts.get("+").copied().unwrap_or(0) + counts.get("-").copied().unwrap_or(0)
}

#[test]
fn criterion_05_mcm_operator_counts() {
    let cfg = bench_cfg("mcm_3_7_21");
    let res = optimize_design(corpus::MCM_3_7_21, &cfg).unwrap();
    let ops = res.summary.op_counts.clone();
    let n321 = addsub_count(&ops);
    println!("  mcm_3_7_21 ops: {ops:?}");
    assert!(n321 <= 3, "MCM(3,7,21) needs <= 3 add/sub, got {n321}: {ops:?}");

    let cfg = bench_cfg("mcm_7_19_31");
    let res = optimize_design(corpus::MCM_7_19_31, &cfg).unwrap();
    let ops = res.summary.op_counts.clone();
    let n71931 = addsub_count(&ops);
    println!("  mcm_7_19_31 ops: {ops:?}");
    assert_eq!(n71931, 4, "MCM(7,19,31) is the 4-adder CSD solution: {ops:?}");
    pass(5, &format!("MCM(3,7,21)={n321} add/sub, MCM(7,19,31)={n71931}"));
}

#[test]
fn criterion_06_sharing_aware_extraction() {
    // (a+b)*(a+b): the ILP counts the shared add once; greedy twice.
    let mut eg = EGraph::new();
    let t = parse_vlng(
        "(* 10 5 unsign (+ 5 4 unsign a 4 unsign b) 5 unsign (+ 5 4 unsign a 4 unsign b))",
    )
    .unwrap();
    let root = eg.add_term(&t).unwrap();
    eg.rebuild().unwrap();
    let model = CostModel::default();
    let g = greedy_extract(&eg, &[root], &model).unwrap();
    let i = ilp_extract(&eg, &[root], &model, Duration::from_secs(30)).unwrap();
    let add = 12 * 5;
    let mul = 6 * 5 * 5 + 12 * 10;
    assert_eq!(i.dag_cost, add + mul, "add counted once");
    assert_eq!(g.reported_cost, 2 * add + mul, "greedy counts it twice");

    // On every corpus instance the ILP cost never exceeds greedy's.
    for (name, src) in corpus::corpus() {
        let cfg = bench_cfg(name);
        let m = parse_verilog(&src).unwrap();
        let mut eg = EGraph::new();
        let mut roots: Vec<Id> = Vec::new();
        for b in &m.bindings {
            let id = eg.add_term(&b.term).unwrap();
            eg.retain_name(id, &b.name);
        }
        for o in &m.outputs {
            let b = m.binding(&m.output_map[&o.name]).unwrap();
            roots.push(eg.add_term(&b.term).unwrap());
        }
        eg.rebuild().unwrap();
        let rules = match cfg.rules.as_str() {
            "mcm" => RuleSet::new(&RuleOptions::all()).with_mcm_extensions(),
            _ => RuleSet::new(&RuleOptions::default()),
        };
        dpopt::engine::run_saturation(
            &mut eg,
            &rules.refs(),
            &Limits {
                max_iters: cfg.max_iters,
                max_nodes: cfg.max_nodes,
                wallclock: Duration::from_secs(cfg.wallclock_s),
            },
        )
        .unwrap();
        let g = greedy_extract(&eg, &roots, &model).unwrap();
        let i = ilp_extract(&eg, &roots, &model, Duration::from_secs(120)).unwrap();
        println!(
            "  {name}: ilp={} greedy_dag={} greedy_reported={}",
            i.dag_cost, g.dag_cost, g.reported_cost
        );
        assert!(i.dag_cost <= g.reported_cost, "{name}");
        assert!(i.dag_cost <= g.dag_cost, "{name}");
    }
    pass(6, "ILP cost <= greedy cost everywhere; shared add counted once");
}

/// Carry-propagate operator count: the architecture indicator the FIR
/// crossover is measured by (each SUM or FMA ends in one final adder).
fn cpa_count(counts: &std::collections::BTreeMap<String, usize>) -> usize {
    addsub_count(counts)
        + counts.get("SUM").copied().unwrap_or(0)
        + counts.get("FMA").copied().unwrap_or(0)
}

#[test]
fn criterion_07_fir_architecture_crossover() {
    let mut seq = Vec::new();
    for p in (4..=64).step_by(4) {
        let src = corpus::fir3_source(p);
        let cfg = RunConfig {
            max_iters: 10,
            max_nodes: 20_000,
            verify: false,
            ..RunConfig::default()
        };
        let res = optimize_design(&src, &cfg).unwrap();
        let ops = res.summary.op_counts.clone();
        let sums = ops.get("SUM").copied().unwrap_or(0);
        seq.push((p, cpa_count(&ops), sums));
    }
    println!("  width -> (CPAs, SUMs): {seq:?}");
    let cpas: Vec<usize> = seq.iter().map(|(_, c, _)| *c).collect();
    // Monotone toward the merged form: CPA count never increases.
    for w in cpas.windows(2) {
        assert!(w[1] <= w[0], "oscillation in {cpas:?}");
    }
    let transitions = cpas.windows(2).filter(|w| w[0] != w[1]).count();
    assert!(transitions <= 2, "at most two transition points: {cpas:?}");
    assert!(transitions >= 1, "a crossover threshold exists: {cpas:?}");
    // Baseline tree at the narrowest width, merged architecture at the widest.
    assert_eq!(seq.first().unwrap().2, 0, "narrow widths keep the adder tree");
    assert!(seq.last().unwrap().2 > 0, "wide widths select the SUM form");
    pass(7, &format!("monotone crossover, {transitions} transition(s)"));
}

/// Partition refinement fingerprints; equal multisets across two saturated
/// graphs witness identical partitions.
fn partition_fingerprint(eg: &EGraph) -> Vec<u64> {
    use std::collections::hash_map::DefaultHasher;
    use std::collections::HashMap;
    use std::hash::{Hash, Hasher};
    let ids = eg.class_ids();
    let mut hashes: HashMap<Id, u64> = ids.iter().map(|i| (*i, 1u64)).collect();
    for _ in 0..ids.len().min(24) {
        let mut next = HashMap::new();
        for id in &ids {
            let mut node_hashes: Vec<u64> = eg
                .class(*id)
                .nodes
                .iter()
                .map(|n| {
                    let mut h = DefaultHasher::new();
                    match n {
                        dpopt::engine::ENode::Var(v) => ("var", v).hash(&mut h),
                        dpopt::engine::ENode::Const(c) => ("const", c.to_string()).hash(&mut h),
                        dpopt::engine::ENode::Op { op, width, args } => {
                            ("op", op.token(), width).hash(&mut h);
                            for a in args {
                                (a.width, a.signage == Signage::Sign, hashes[&eg.find(a.class)])
                                    .hash(&mut h);
                            }
                        }
                    }
                    h.finish()
                })
                .collect();
            node_hashes.sort_unstable();
            let mut h = DefaultHasher::new();
            node_hashes.hash(&mut h);
            next.insert(*id, h.finish());
        }
        if next == hashes {
            break;
        }
        hashes = next;
    }
    let mut v: Vec<u64> = ids.iter().map(|i| hashes[i]).collect();
    v.sort_unstable();
    v
}

fn random_small_design(rng: &mut impl rand::RngCore) -> Term {
    use dpopt::ir::{Arg, Op};
    let leaves = ["a", "b", "c"];
    fn leaf(rng: &mut dyn rand::RngCore, leaves: &[&str]) -> Term {
        Term::var(leaves[(rng.next_u32() % 3) as usize])
    }
    fn node(rng: &mut dyn rand::RngCore, l: Term, r: Term) -> Term {
        let binop = [Op::Add, Op::Sub, Op::Mul, Op::And, Op::Or];
        let op = binop[(rng.next_u32() % 5) as usize];
        let w = 2 + rng.next_u32() % 3;
        let s = if rng.next_u32() % 2 == 0 {
            Signage::Unsign
        } else {
            Signage::Sign
        };
        Term::node(
            op,
            w,
            vec![Arg::new(3u32, s, l), Arg::new(3u32, Signage::Unsign, r)],
        )
    }
    let a1 = leaf(rng, &leaves);
    let a2 = leaf(rng, &leaves);
    let l1 = node(rng, a1, a2);
    let b1 = leaf(rng, &leaves);
    let b2 = leaf(rng, &leaves);
    let l2 = node(rng, b1, b2);
    node(rng, l1, l2)
}

#[test]
fn criterion_08_phase_ordering_robustness() {
    use rand::SeedableRng;
    let mut designs: Vec<Term> = vec![parse_vlng(
        "(>> 5 5 unsign (* 5 2 unsign 2 4 unsign x) 1 unsign 1)",
    )
    .unwrap()];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        designs.push(random_small_design(&mut rng));
    }
    let model = CostModel::default();
    for (di, t) in designs.iter().enumerate() {
        let run = |reversed: bool| {
            let mut eg = EGraph::new();
            let root = eg.add_term(t).unwrap();
            eg.rebuild().unwrap();
            let set = if di == 0 {
                RuleSet::from_rewrites(dpopt::rules::fig_example_rules())
            } else {
                RuleSet::new(&RuleOptions {
                    constexp: false,
                    merge: false,
                    ..RuleOptions::default()
                })
            };
            let refs = if reversed { set.refs_reversed() } else { set.refs() };
            let report = dpopt::engine::run_saturation(
                &mut eg,
                &refs,
                &Limits {
                    max_iters: 60,
                    max_nodes: 100_000,
                    wallclock: Duration::from_secs(180),
                },
            )
            .unwrap();
            assert_eq!(
                report.stop_reason,
                StopReason::Saturated,
                "design {di} must saturate"
            );
            let cost = ilp_extract(&eg, &[root], &model, Duration::from_secs(30))
                .unwrap()
                .dag_cost;
            (
                partition_fingerprint(&eg),
                eg.num_classes(),
                eg.num_nodes(),
                cost,
            )
        };
        let (fa, ca, na, costa) = run(false);
        let (fb, cb, nb, costb) = run(true);
        assert_eq!(ca, cb, "class counts differ on design {di}");
        assert_eq!(na, nb, "node counts differ on design {di}");
        assert_eq!(fa, fb, "partition fingerprints differ on design {di}");
        assert_eq!(costa, costb, "extracted cost differs on design {di}");
    }
    pass(8, "identical partitions and costs under reversed rule order");
}

#[test]
fn criterion_09_ilp_timeout_returns_incumbent() {
    // A large saturated e-graph; a forced 1 ms timeout must return the
    // greedy incumbent and the pipeline must still verify.
    let src = corpus::MCM_3_7_21;
    let m = parse_verilog(src).unwrap();
    let mut eg = EGraph::new();
    let mut roots = Vec::new();
    for b in &m.bindings {
        let id = eg.add_term(&b.term).unwrap();
        eg.retain_name(id, &b.name);
    }
    for o in &m.outputs {
        roots.push(
            eg.add_term(&m.binding(&m.output_map[&o.name]).unwrap().term)
                .unwrap(),
        );
    }
    eg.rebuild().unwrap();
    let set = RuleSet::new(&RuleOptions::all()).with_mcm_extensions();
    dpopt::engine::run_saturation(
        &mut eg,
        &set.refs(),
        &Limits {
            max_iters: 12,
            max_nodes: 15_000,
            wallclock: Duration::from_secs(120),
        },
    )
    .unwrap();
    let model = CostModel::default();
    let g = greedy_extract(&eg, &roots, &model).unwrap();
    let i = ilp_extract(&eg, &roots, &model, Duration::from_millis(1)).unwrap();
    assert_eq!(i.status, dpopt::extraction::Status::Incumbent);
    assert_eq!(i.dag_cost, g.dag_cost, "incumbent is the greedy solution");
    let extracted: Vec<(String, u32, Term)> = m
        .outputs
        .iter()
        .zip(&roots)
        .map(|(o, id)| (o.name.clone(), o.width, i.term_of(&eg, *id).unwrap()))
        .collect();
    let cert = dpopt::backend::produce_proof(&mut eg, &m, &extracted).unwrap();
    let report =
        dpopt::backend::verify_chain(&cert, 5, &cli::all_rules_for_verification()).unwrap();
    assert!(report.pass);
    pass(9, "1 ms timeout returns the greedy incumbent; chain verifies");
}

#[test]
fn criterion_10_nonmonotone_cost_trajectory() {
    let model = CostModel::default();
    let mut witnessed = None;
    for (name, src) in corpus::corpus() {
        if corpus::is_mcm(name) {
            continue; // constant chains are long; the logic kernels suffice
        }
        let cfg = RunConfig {
            verify: false,
            ..bench_cfg(name)
        };
        let res = optimize_design(&src, &cfg).unwrap();
        let costs = cli::chain_costs(res.cert.as_ref().unwrap(), &model).unwrap();
        let first = *costs.first().unwrap();
        let last = *costs.last().unwrap();
        let peak = *costs.iter().max().unwrap();
        println!("  {name}: chain costs {costs:?}");
        if peak > first && last < first {
            witnessed = Some((name.to_string(), first, peak, last));
        }
    }
    let (name, first, peak, last) = witnessed
        .expect("at least one corpus design rises above its initial cost before improving");
    pass(
        10,
        &format!("{name} trajectory {first} -> peak {peak} -> {last} (non-monotone)"),
    );
}
