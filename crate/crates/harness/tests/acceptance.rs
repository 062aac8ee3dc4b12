//! Acceptance suite. Every run is replayed with validation on each step and
//! oracle checkpoints every 100 steps; each criterion prints one line and
//! the process fails if any criterion does.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use dynmatch_core::oracle::{self, BRUTE_FORCE_MAX_EDGES};
use dynmatch_core::Edge;
use dynmatch_harness::{
    generate_stream, metrics_csv, run_pipeline, write_run, ExecPolicy, Mode, PipelineConfig, RunOutput, StreamKind,
    StreamSpec,
};

struct Run {
    label: String,
    cfg: PipelineConfig,
    out: RunOutput,
    elapsed: Duration,
}

impl Run {
    fn count(&self, category: &str) -> usize {
        self.out.summary.violations[category]
    }
}

fn base(mode: Mode, eps: f64, seed: u64, stream: StreamSpec) -> PipelineConfig {
    PipelineConfig {
        mode,
        eps,
        seed,
        checkpoint_every: 100,
        validate_every: 1,
        timing: false,
        audit: true,
        stream,
        ..Default::default()
    }
}

fn general_configs() -> Vec<(String, PipelineConfig)> {
    let mut out = Vec::new();
    let mut seed = 100;
    for eps in [0.25, 0.5] {
        for density in [0.1, 0.5, 0.9] {
            seed += 1;
            let stream = StreamSpec { kind: StreamKind::Random, n_left: 60, n_right: 60, steps: 10_000, density, ..Default::default() };
            out.push((format!("general eps={eps} random d={density}"), base(Mode::General, eps, seed, stream)));
        }
        seed += 1;
        let stream = StreamSpec { kind: StreamKind::FourBlock, n_left: 60, n_right: 60, steps: 10_000, block_size: 30, ..Default::default() };
        out.push((format!("general eps={eps} four_block"), base(Mode::General, eps, seed, stream)));
    }
    // desk-scale override: beta small enough that H is a proper, actively
    // repaired subgraph
    for (kind, density) in [(StreamKind::Random, 0.5), (StreamKind::FourBlock, 0.0)] {
        seed += 1;
        let stream = StreamSpec { kind, n_left: 60, n_right: 60, steps: 10_000, density, block_size: 30, ..Default::default() };
        let cfg = PipelineConfig { beta: Some(24), lambda: Some(0.5), ..base(Mode::General, 0.5, seed, stream) };
        out.push((format!("general beta=24 lambda=0.5 {kind:?}"), cfg));
    }
    out
}

fn arboricity_configs() -> Vec<(String, PipelineConfig)> {
    [1usize, 3]
        .into_iter()
        .map(|alpha| {
            let stream = StreamSpec {
                kind: StreamKind::ForestUnion,
                n_left: 200,
                n_right: 200,
                steps: 5_000,
                density: 0.8,
                forests: alpha,
                ..Default::default()
            };
            let cfg = PipelineConfig { alpha_cap: alpha, ..base(Mode::SmallArboricity, 0.5, 300 + alpha as u64, stream) };
            (format!("small_arboricity alpha={alpha}"), cfg)
        })
        .collect()
}

fn execute(configs: Vec<(String, PipelineConfig)>) -> Result<Vec<Run>, String> {
    ExecPolicy::Parallel
        .map(&configs, |(label, cfg)| {
            let started = Instant::now();
            let stream = generate_stream(&cfg.stream, cfg.seed).map_err(|e| format!("{label}: {e}"))?;
            let out = run_pipeline(cfg, &stream).map_err(|e| format!("{label}: {e}"))?;
            Ok(Run { label: label.clone(), cfg: cfg.clone(), out, elapsed: started.elapsed() })
        })
        .into_iter()
        .collect()
}

struct Verdict {
    id: u8,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn tally<'a>(runs: impl IntoIterator<Item = &'a Run>, categories: &[&str]) -> (usize, Vec<String>) {
    let mut total = 0;
    let mut bad = Vec::new();
    for r in runs {
        let n: usize = categories.iter().map(|c| r.count(c)).sum();
        if n > 0 {
            bad.push(format!("{}: {n} ({})", r.label, r.out.summary.messages.first().cloned().unwrap_or_default()));
        }
        total += n;
    }
    (total, bad)
}

fn zero_violations(id: u8, title: &'static str, runs: &[&Run], categories: &[&str], extra: String) -> Verdict {
    let (total, bad) = tally(runs.iter().copied(), categories);
    let mut detail = format!("{} runs, {total} violations{extra}", runs.len());
    if !bad.is_empty() {
        detail.push_str(&format!("; {}", bad.join("; ")));
    }
    Verdict { id, title, pass: total == 0, detail }
}

fn oracle_self_check() -> Verdict {
    let started = Instant::now();
    let mut graphs = 0u64;
    let mut mismatches = Vec::new();
    for a in 1..=4 {
        for b in 1..=4 {
            match oracle::cross_check_exhaustive(a, b, ExecPolicy::Parallel) {
                Ok(n) => graphs += n,
                Err((mask, hk, bf)) => mismatches.push(format!("{a}+{b} mask {mask}: {hk} vs {bf}")),
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let instances: Vec<Vec<Edge>> = (0..1000)
        .map(|_| {
            let mut all: Vec<Edge> = (0..6).flat_map(|l| (0..6).map(move |r| Edge::new(l, r))).collect();
            all.shuffle(&mut rng);
            let m = rng.gen_range(0..=BRUTE_FORCE_MAX_EDGES);
            all.truncate(m);
            all
        })
        .collect();
    let random_bad = ExecPolicy::Parallel
        .map(&instances, |edges| oracle::hopcroft_karp(6, 6, edges).0 != oracle::brute_force_mu(edges).expect("small"))
        .into_iter()
        .filter(|&b| b)
        .count();
    if random_bad > 0 {
        mismatches.push(format!("{random_bad} random 6+6 mismatches"));
    }
    let elapsed = started.elapsed();
    Verdict {
        id: 7,
        title: "oracle self-check",
        pass: mismatches.is_empty() && elapsed < Duration::from_secs(30),
        detail: format!(
            "{graphs} exhaustive graphs + 1000 random 6+6, {} mismatches, {:.1}s{}",
            mismatches.len(),
            elapsed.as_secs_f64(),
            if mismatches.is_empty() { String::new() } else { format!("; {}", mismatches.join("; ")) }
        ),
    }
}

fn determinism(runs: &[&Run]) -> Verdict {
    let mut differing = Vec::new();
    let dir = tempfile::tempdir().expect("temp dir");
    for (i, r) in runs.iter().enumerate() {
        let stream = generate_stream(&r.cfg.stream, r.cfg.seed).expect("stream");
        let again = run_pipeline(&r.cfg, &stream).expect("rerun");
        let (a, b) = (dir.path().join(format!("a{i}")), dir.path().join(format!("b{i}")));
        write_run(&a, &r.out.rows, &r.out.summary).expect("write");
        write_run(&b, &again.rows, &again.summary).expect("write");
        let same = std::fs::read(a.join("metrics.csv")).ok() == std::fs::read(b.join("metrics.csv")).ok()
            && metrics_csv(&r.out.rows) == metrics_csv(&again.rows);
        if !same {
            differing.push(r.label.clone());
        }
    }
    Verdict {
        id: 9,
        title: "determinism",
        pass: differing.is_empty(),
        detail: format!("{} runs replayed, {} differ{}", runs.len(), differing.len(), if differing.is_empty() { String::new() } else { format!(": {}", differing.join(", ")) }),
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let general = match execute(general_configs()) {
        Ok(r) => r,
        Err(e) => {
            println!("acceptance: run failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    let arboricity = match execute(arboricity_configs()) {
        Ok(r) => r,
        Err(e) => {
            println!("acceptance: run failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    let g: Vec<&Run> = general.iter().collect();
    let a: Vec<&Run> = arboricity.iter().collect();
    let all: Vec<&Run> = general.iter().chain(&arboricity).collect();

    let slowest = general.iter().map(|r| r.elapsed).max().unwrap_or_default();
    let mut v1 = zero_violations(1, "EDCS validity (general)", &g, &["edcs_validator"], format!(", slowest run {:.1}s", slowest.as_secs_f64()));
    v1.pass &= slowest < Duration::from_secs(120);

    let min_fraction = g.iter().filter_map(|r| r.out.summary.min_mu_h_fraction).fold(f64::INFINITY, f64::min);
    let max_ratio = g.iter().filter_map(|r| r.out.summary.max_ratio).fold(0.0, f64::max);
    let v2 = zero_violations(
        2,
        "approximation (general)",
        &g,
        &["mu_h_bound", "ratio_bound", "sanity", "matching_audit"],
        format!(", min mu_H/mu_G {min_fraction:.4}, max mu_G/|M| {max_ratio:.4}"),
    );

    let betas: Vec<u32> = a.iter().map(|r| r.out.summary.params.as_ref().expect("params").beta).collect();
    let min_fraction_a = a.iter().filter_map(|r| r.out.summary.min_mu_h_fraction).fold(f64::INFINITY, f64::min);
    let mut v3 = zero_violations(
        3,
        "approximation (small arboricity)",
        &a,
        &["edcs_validator", "mu_h_bound", "sanity", "matching_audit"],
        format!(", beta {betas:?}, min mu_H/mu_G {min_fraction_a:.4}"),
    );
    v3.pass &= betas.iter().all(|&b| b == 33);

    let longest = all.iter().map(|r| r.out.summary.max_path_len).max().unwrap_or(0);
    let v4 = zero_violations(4, "path-length bounds", &all, &["path_length", "path_structure"], format!(", longest path {longest}"));

    let h_max = g.iter().map(|r| r.out.summary.max_h_changes).max().unwrap_or(0);
    let unit_max = a.iter().map(|r| r.out.summary.max_unit_changes).max().unwrap_or(0);
    let update_max = a.iter().map(|r| r.out.summary.max_update_changes).max().unwrap_or(0);
    let v5 = zero_violations(
        5,
        "update-ratio counters",
        &all,
        &["h_change_bound", "unit_change_bound", "update_change_bound"],
        format!(", max H changes/update {h_max} (general), max unit changes {unit_max}/unit and {update_max}/update (weighted)"),
    );

    let flips = g.iter().map(|r| r.out.summary.max_flips).max().unwrap_or(0);
    let load_g = g.iter().map(|r| r.out.summary.max_load).max().unwrap_or(0);
    let load_a: Vec<String> = a
        .iter()
        .map(|r| format!("{}/{}", r.out.summary.max_load, r.out.summary.params.as_ref().and_then(|p| p.load_cap).unwrap_or(0)))
        .collect();
    let v6 = zero_violations(
        6,
        "orientation",
        &all,
        &["load_bound", "flip_bound"],
        format!(", max flips {flips}, max load {load_g} (general), load/cap {load_a:?} (forests)"),
    );

    let v7 = oracle_self_check();

    let v8 = zero_violations(8, "estimate-accuracy audit", &g, &["estimate_accuracy", "structure_audit", "invariant_audit"], String::new());

    let replay: Vec<&Run> = vec![g[1], g[3], g[g.len() - 2], a[1]];
    let v9 = determinism(&replay);

    let verdicts = [v1, v2, v3, v4, v5, v6, v7, v8, v9];
    for v in &verdicts {
        println!("criterion {} [{}] {}: {}", v.id, if v.pass { "PASS" } else { "FAIL" }, v.title, v.detail);
    }
    let passed = verdicts.iter().filter(|v| v.pass).count();
    println!("acceptance: {passed}/{} criteria passed in {:.1}s", verdicts.len(), started.elapsed().as_secs_f64());
    if passed == verdicts.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
