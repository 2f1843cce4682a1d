use exroute::core::expander::{desk_profile, gen_random_regular_digraph, gen_random_regular_graph};
use exroute::core::{RoutingEngine, VertexId};
use exroute::format::{parse_graph, parse_profile, write_digraph, write_profile, write_undirected, GraphFile};
use exroute::trace::{number, parse_trace, run_trace, FailureClass, RunOptions, TraceCommand};
use exroute::workload::{gen_workload, validate_trace, WorkloadKind, WorkloadParams};
use proptest::prelude::*;

fn engine(seed: u64) -> RoutingEngine {
    let g = gen_random_regular_graph(600, 30, seed).unwrap();
    RoutingEngine::new(&g, desk_profile(600, 30)).unwrap()
}

fn quiet() -> RunOptions {
    RunOptions { verify_every: None, stop_on_failure: false, timing: false }
}

fn state(e: &RoutingEngine) -> String {
    let paths: Vec<_> = e.live_paths().map(|p| p.to_string()).collect();
    let h3: Vec<_> = e.connector_edges().iter().collect();
    format!("{}{}{h3:?}{paths:?}", e.out_oracle(), e.in_oracle())
}

#[test]
fn empty_trace_gives_clean_report() {
    let mut e = engine(1);
    let mut out = Vec::new();
    let r = run_trace(&mut e, &[], &quiet(), &mut out).unwrap();
    assert!(r.is_clean());
    assert_eq!((r.commands, r.requests_served), (0, 0));
    assert!(out.is_empty());
    assert!(r.wall_clock_per_request.is_none());
}

#[test]
fn two_hundred_requests_run_clean() {
    let p = WorkloadParams { ops: 200, target: 60, endpoint_cap: 1, r: 150 };
    let mut cmds = gen_workload(WorkloadKind::Churn, 600, &p, 5).unwrap();
    for i in (0..cmds.len()).step_by(20).rev() {
        cmds.insert(i, TraceCommand::Verify);
    }
    let mut e = engine(5);
    let mut out = Vec::new();
    let r = run_trace(&mut e, &number(&cmds), &quiet(), &mut out).unwrap();
    assert!(r.failures.is_empty(), "{:?}", r.failures);
    assert_eq!(r.verify_runs, 10);
    assert!(r.verify_findings.is_empty());
    assert_eq!(r.requests_served, 200);
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("VERIFY") && l.ends_with(" ok")).count(), 10);
    assert_eq!(text.lines().filter(|l| l.starts_with("PATH")).count() as u64, r.router.found);
}

#[test]
fn endpoint_cap_breach_is_a_caller_error() {
    let trace = parse_trace("find 0 1\nfind 0 2\nfind 3 4\nstats").unwrap();
    let mut e = engine(2);
    let mut out = Vec::new();
    let r = run_trace(&mut e, &trace, &quiet(), &mut out).unwrap();
    assert_eq!(r.failures.len(), 1);
    assert_eq!(r.failures[0].line, 2);
    assert_eq!(r.failures[0].class, FailureClass::CallerError);
    assert_eq!(r.requests_served, 2);

    // Same state as if the offending line had never been there.
    let mut reference = engine(2);
    let honest = parse_trace("find 0 1\nfind 3 4").unwrap();
    run_trace(&mut reference, &honest, &quiet(), &mut Vec::new()).unwrap();
    assert_eq!(state(&e), state(&reference));
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("FAIL 2 caller-error"));
    assert!(text.lines().last().unwrap().starts_with("STATS 4 live=2"));
}

#[test]
fn stop_on_failure_halts() {
    let trace = parse_trace("find 0 1\nremove 7\nfind 3 4").unwrap();
    let mut e = engine(3);
    let opts = RunOptions { stop_on_failure: true, ..quiet() };
    let r = run_trace(&mut e, &trace, &opts, &mut Vec::new()).unwrap();
    assert_eq!(r.commands, 2);
    assert_eq!(r.live_paths, 1);
}

#[test]
fn recent_references_resolve_against_live_paths() {
    let trace = parse_trace("find 0 1\nfind 2 3\nfind 4 5\nremove -2\nremove -1\nremove -5").unwrap();
    let mut e = engine(4);
    let r = run_trace(&mut e, &trace, &quiet(), &mut Vec::new()).unwrap();
    let live: Vec<_> = e.live_paths().map(|p| (p.a, p.b)).collect();
    assert_eq!(live, vec![(VertexId(0), VertexId(1))]);
    assert_eq!(r.failures.len(), 1);
    assert_eq!(r.failures[0].line, 6);
}

#[test]
fn replay_is_byte_identical() {
    let p = WorkloadParams { ops: 300, target: 80, endpoint_cap: 1, r: 150 };
    let cmds = number(&gen_workload(WorkloadKind::Churn, 600, &p, 9).unwrap());
    let opts = RunOptions { verify_every: Some(10), ..quiet() };
    let run = || {
        let mut out = Vec::new();
        let r = run_trace(&mut engine(9), &cmds, &opts, &mut out).unwrap();
        (out, serde_json::to_string(&r).unwrap())
    };
    assert_eq!(run(), run());
}

#[test]
fn churn_prefixes_respect_the_rules() {
    let p = WorkloadParams { ops: 1000, target: 100, endpoint_cap: 1, r: 150 };
    let cmds = gen_workload(WorkloadKind::Churn, 600, &p, 1).unwrap();
    assert_eq!(cmds.len(), 1000);
    validate_trace(&cmds, 600, 1, 150).unwrap();
}

#[test]
fn generators_are_deterministic() {
    let p = WorkloadParams { ops: 500, target: 50, endpoint_cap: 2, r: 150 };
    for kind in [WorkloadKind::Churn, WorkloadKind::Fill, WorkloadKind::Hotspot] {
        assert_eq!(gen_workload(kind, 300, &p, 3).unwrap(), gen_workload(kind, 300, &p, 3).unwrap());
    }
}

#[test]
fn hotspot_runs_are_capped() {
    for cap in 1..4 {
        let p = WorkloadParams { ops: 600, target: 40, endpoint_cap: cap, r: 150 };
        let cmds = gen_workload(WorkloadKind::Hotspot, 200, &p, 2).unwrap();
        validate_trace(&cmds, 200, cap, 150).unwrap();
        let finds: Vec<_> = cmds
            .iter()
            .filter_map(|c| match c {
                TraceCommand::Find(a, _) => Some(*a),
                _ => None,
            })
            .collect();
        let mut run = 1;
        for w in finds.windows(2) {
            run = if w[0] == w[1] { run + 1 } else { 1 };
            assert!(run <= cap, "hot vertex {} took {run} consecutive finds", w[1]);
        }
        assert!(finds.windows(2).any(|w| w[0] == w[1]) || cap == 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn graph_text_round_trips(n in 5usize..40, d in 1usize..5, seed in 0u64..1000) {
        prop_assume!(d < n);
        let dg = gen_random_regular_digraph(n, d, seed).unwrap();
        let text = write_digraph(&dg);
        match parse_graph(&text).unwrap() {
            GraphFile::Directed(back) => {
                prop_assert_eq!(&back, &dg);
                prop_assert_eq!(write_digraph(&back), text);
            }
            GraphFile::Undirected(_) => prop_assert!(false, "kind lost"),
        }
        prop_assume!(n * d % 2 == 0);
        let g = gen_random_regular_graph(n, d, seed).unwrap();
        let text = write_undirected(&g);
        prop_assert_eq!(write_undirected(&parse_graph(&text).unwrap().into_undirected().unwrap()), text);
    }

    #[test]
    fn profile_text_round_trips(n in 100usize..5000, half in 5usize..40) {
        let p = desk_profile(n, 2 * half);
        let text = write_profile(&p);
        let back = parse_profile(&text).unwrap();
        prop_assert_eq!(back, p);
        prop_assert_eq!(write_profile(&back), text);
    }

    #[test]
    fn generated_workloads_respect_the_rules(
        kind in prop_oneof![Just(WorkloadKind::Churn), Just(WorkloadKind::Fill), Just(WorkloadKind::Hotspot)],
        n in 2usize..300,
        cap in 1usize..4,
        target in 0usize..60,
        seed in 0u64..1000,
    ) {
        let p = WorkloadParams { ops: 300, target, endpoint_cap: cap, r: 60 };
        if let Ok(cmds) = gen_workload(kind, n, &p, seed) {
            prop_assert!(validate_trace(&cmds, n, cap, 60).is_ok());
        }
    }
}
