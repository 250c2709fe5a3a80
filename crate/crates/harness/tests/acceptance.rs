//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Runs as a plain binary so the lines are
//! always shown.

use std::process::ExitCode;
use std::thread;
use std::time::Instant;

use dynspan::oracle;
use dynspan::{MetricSpace, Mode, PointId};
use dynspan_harness::{
    generate, lightness_sweep, run_stream, Check, Ops, RunOptions, RunOutcome, Scenario,
    ScenarioConfig, SweepRow,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPSILONS: [f64; 3] = [0.25, 0.5, 1.0];
const STRETCH_SLACK: f64 = 1e-9;

// Lightness sweep, pinned from a pre-release run of the path sweep at
// eps = 0.5. Observed net-tree lightness 176, 485.8, 886.5, 1332.9, 1802.8,
// 2284.8 (smallest increment 309.8); light-spanner lightness 1.0 throughout.
const SWEEP_NS: [usize; 6] = [32, 64, 128, 256, 512, 1024];
const MIN_NET_TREE_INCREMENT: f64 = 250.0;
const MAX_LIGHT_RATIO: f64 = 3.0;

// Recourse scaling, centred by a pre-release run with seed 1: max recourse
// 51, 56, 56 at log2(phi) = 8, 12, 16. Ratios 6.375, 4.667, 3.5 have
// geometric mean 4.70.
const RECOURSE_LOG_PHIS: [i32; 3] = [8, 12, 16];
const RECOURSE_CENTRE: f64 = 4.70;
const RECOURSE_BAND: f64 = 2.0;

const FW_GRAPHS: usize = 200;
const FW_MAX_VERTICES: usize = 50;
const MST_INSTANCES: usize = 100;
const MST_MAX_POINTS: usize = 100;
const MST_REL_TOL: f64 = 1e-9;

struct Verdict {
    id: u32,
    pass: bool,
    detail: String,
}

fn invariant_config(eps: f64, mode: Mode) -> ScenarioConfig {
    ScenarioConfig {
        scenario: Scenario::UniformCube,
        n: 128,
        dim: 2,
        eps,
        phi: Some(1024.0),
        seed: 1,
        ops: Ops::Mixed(0.4),
        updates: Some(256),
        mode,
        check: Check::EveryUpdate,
        points: None,
    }
}

struct Replay {
    eps: f64,
    mode: Mode,
    stream: dynspan_harness::Stream,
    outcome: RunOutcome,
    secs: f64,
}

fn replay(eps: f64, mode: Mode) -> Replay {
    let start = Instant::now();
    let cfg = invariant_config(eps, mode);
    let stream = generate(&cfg).expect("stream");
    let outcome = run_stream(&cfg, &stream, RunOptions::default(), |_| Ok(())).expect("replay");
    Replay {
        eps,
        mode,
        stream,
        outcome,
        secs: start.elapsed().as_secs_f64(),
    }
}

fn count(r: &Replay, kinds: &[&str]) -> usize {
    r.outcome
        .violations
        .iter()
        .filter(|v| kinds.contains(&v.kind))
        .count()
}

fn label(r: &Replay) -> String {
    format!("eps={} {}", r.eps, r.mode.name())
}

fn invariants(replays: &[Replay], mode: Mode, id: u32, kinds: &[&str]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in replays.iter().filter(|r| r.mode == mode) {
        let bad = count(r, kinds);
        pass &= bad == 0 && r.outcome.summary.checks == r.stream.len();
        parts.push(format!(
            "{}: {} violations over {} checked updates ({:.1}s)",
            label(r),
            bad,
            r.outcome.summary.checks,
            r.secs
        ));
    }
    Verdict { id, pass, detail: parts.join("; ") }
}

fn stretch(replays: &[Replay]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in replays {
        let bound = 1.0 + 3.0 * r.eps + STRETCH_SLACK;
        let s = r.outcome.summary.max_stretch;
        pass &= s <= bound;
        parts.push(format!("{}: {:.4} <= {:.4}", label(r), s, bound));
    }
    Verdict { id: 3, pass, detail: parts.join("; ") }
}

fn sweep() -> Verdict {
    let base = ScenarioConfig {
        scenario: Scenario::Path,
        eps: 0.5,
        ..ScenarioConfig::default()
    };
    let rows: Vec<SweepRow> = match lightness_sweep(&base, &SWEEP_NS) {
        Ok(rows) => rows,
        Err(e) => {
            return Verdict { id: 4, pass: false, detail: format!("sweep failed: {e:#}") };
        }
    };
    let increments: Vec<f64> = rows
        .windows(2)
        .map(|w| w[1].net_tree_lightness - w[0].net_tree_lightness)
        .collect();
    let light: Vec<f64> = rows.iter().map(|r| r.light_lightness).collect();
    let lmax = light.iter().cloned().fold(f64::MIN, f64::max);
    let lmin = light.iter().cloned().fold(f64::MAX, f64::min);
    let ratio = lmax / lmin;
    let pass = increments.iter().all(|&d| d >= MIN_NET_TREE_INCREMENT) && ratio <= MAX_LIGHT_RATIO;
    let net: Vec<String> = rows.iter().map(|r| format!("{:.1}", r.net_tree_lightness)).collect();
    Verdict {
        id: 4,
        pass,
        detail: format!(
            "net-tree lightness [{}], min increment {:.1} >= {}; light lightness max/min {:.3} <= {}",
            net.join(", "),
            increments.iter().cloned().fold(f64::INFINITY, f64::min),
            MIN_NET_TREE_INCREMENT,
            ratio,
            MAX_LIGHT_RATIO
        ),
    }
}

fn recourse() -> Verdict {
    let lo = RECOURSE_CENTRE / RECOURSE_BAND.sqrt();
    let hi = RECOURSE_CENTRE * RECOURSE_BAND.sqrt();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut ratios = Vec::new();
    for lp in RECOURSE_LOG_PHIS {
        let cfg = ScenarioConfig {
            phi: Some(2f64.powi(lp)),
            check: Check::None,
            ..invariant_config(0.5, Mode::Exact)
        };
        let out = match generate(&cfg).and_then(|s| run_stream(&cfg, &s, RunOptions::default(), |_| Ok(()))) {
            Ok(out) => out,
            Err(e) => return Verdict { id: 5, pass: false, detail: format!("run failed: {e:#}") },
        };
        let q = out.summary.max_recourse as f64 / f64::from(lp);
        ratios.push(q);
        pass &= (lo..=hi).contains(&q);
        parts.push(format!("log2 phi {lp}: max recourse {} ratio {q:.3}", out.summary.max_recourse));
    }
    let spread = ratios.iter().cloned().fold(f64::MIN, f64::max)
        / ratios.iter().cloned().fold(f64::MAX, f64::min);
    Verdict {
        id: 5,
        pass,
        detail: format!(
            "{}; band [{lo:.3}, {hi:.3}]; max/min {spread:.3}",
            parts.join("; ")
        ),
    }
}

fn oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0usize;
    let mut pairs = 0usize;
    for _ in 0..FW_GRAPHS {
        let n = rng.random_range(1..=FW_MAX_VERTICES);
        let m = rng.random_range(0..=2 * n);
        // Integer weights keep every path sum exact in both algorithms.
        let edges: Vec<(usize, usize, f64)> = (0..m)
            .map(|_| {
                let u = rng.random_range(0..n);
                let v = rng.random_range(0..n);
                (u, v, f64::from(rng.random_range(1..=100u32)))
            })
            .filter(|(u, v, _)| u != v)
            .collect();
        let fw = oracle::floyd_warshall(n, &edges);
        let weighted: Vec<oracle::WeightedEdge> = edges
            .iter()
            .map(|&(u, v, w)| (PointId(u as u32), PointId(v as u32), w))
            .collect();
        for (u, row) in fw.iter().enumerate() {
            for (v, &expected) in row.iter().enumerate() {
                pairs += 1;
                let d = oracle::graph_distance(&weighted, PointId(u as u32), PointId(v as u32));
                if d != expected {
                    mismatches += 1;
                }
            }
        }
    }

    let mut worst = 0.0f64;
    for _ in 0..MST_INSTANCES {
        let n = rng.random_range(1..=MST_MAX_POINTS);
        let dim = rng.random_range(1..=3);
        let mut space = MetricSpace::euclidean(dim, 4096.0).expect("space");
        for _ in 0..n {
            let c: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 1000.0).collect();
            let p = space.add_point(&c).expect("point");
            space.activate(p).expect("activate");
        }
        let prim = oracle::mst_weight(&space);
        let kruskal = oracle::mst_weight_kruskal(&space);
        worst = worst.max((prim - kruskal).abs() / prim.max(1.0));
    }
    Verdict {
        id: 6,
        pass: mismatches == 0 && worst <= MST_REL_TOL,
        detail: format!(
            "Dijkstra vs Floyd-Warshall: {mismatches} mismatches in {pairs} pairs over {FW_GRAPHS} graphs; \
             Prim vs Kruskal: worst relative gap {worst:.2e} over {MST_INSTANCES} instances (tol {MST_REL_TOL:e})"
        ),
    }
}

fn agreement(replays: &[Replay]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for &eps in &EPSILONS {
        let exact = replays.iter().find(|r| r.eps == eps && r.mode == Mode::Exact).unwrap();
        let fast = replays.iter().find(|r| r.eps == eps && r.mode == Mode::Fast).unwrap();
        let same_stream = exact.stream == fast.stream;
        let bound = 1.0 + 3.0 * eps + STRETCH_SLACK;
        let clean = |r: &Replay| r.outcome.violations.is_empty() && r.outcome.summary.max_stretch <= bound;
        pass &= same_stream && clean(exact) && clean(fast);
        let e_edges = exact.outcome.spanner.edges();
        let f_edges = fast.outcome.spanner.edges();
        let shared = e_edges.iter().filter(|e| f_edges.binary_search(e).is_ok()).count();
        parts.push(format!(
            "eps={eps}: same stream {same_stream}, violations {}/{}, |L| {}/{} ({} shared)",
            exact.outcome.violations.len(),
            fast.outcome.violations.len(),
            e_edges.len(),
            f_edges.len(),
            shared
        ));
    }
    Verdict { id: 8, pass, detail: parts.join("; ") }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let (replays, sweep_v, recourse_v, oracle_v) = thread::scope(|s| {
        let runs: Vec<_> = EPSILONS
            .iter()
            .flat_map(|&eps| [Mode::Exact, Mode::Fast].map(move |m| (eps, m)))
            .map(|(eps, m)| s.spawn(move || replay(eps, m)))
            .collect();
        let sw = s.spawn(sweep);
        let rc = s.spawn(recourse);
        let or = s.spawn(oracles);
        let replays: Vec<Replay> = runs.into_iter().map(|h| h.join().unwrap()).collect();
        (replays, sw.join().unwrap(), rc.join().unwrap(), or.join().unwrap())
    });

    let nets = {
        let mut v = invariants(&replays, Mode::Exact, 7, &["net", "locality"]);
        let fast = invariants(&replays, Mode::Fast, 7, &["net", "locality"]);
        v.pass &= fast.pass;
        v.detail = format!("{}; {}", v.detail, fast.detail);
        v
    };
    let verdicts = [
        invariants(&replays, Mode::Exact, 1, &["invariant"]),
        invariants(&replays, Mode::Fast, 2, &["invariant", "estimate"]),
        stretch(&replays),
        sweep_v,
        recourse_v,
        oracle_v,
        nets,
        agreement(&replays),
    ];

    let mut all = true;
    for v in &verdicts {
        all &= v.pass;
        println!(
            "criterion {} {}: {}",
            v.id,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
