use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use dynmatch_harness::{
    generate_stream, run_pipeline, write_run, Mode, PipelineConfig, StreamKind, StreamSpec, UpdateStream,
};

/// Replay an edge-update stream through orientation, EDCS and matching,
/// checking every bound along the way.
#[derive(Parser, Debug)]
#[command(name = "dynmatch", version)]
struct Args {
    #[arg(long, value_enum, default_value = "general")]
    mode: Mode,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Override the preset beta (rounded up to a conforming value in general mode).
    #[arg(long)]
    beta: Option<u32>,
    /// Override lambda = eps/4 (general mode).
    #[arg(long)]
    lambda: Option<f64>,
    /// Arboricity bound alpha used for the load cap (small-arboricity mode).
    #[arg(long, default_value_t = 1)]
    alpha_cap: usize,
    #[arg(long, value_enum, default_value = "random")]
    stream_kind: StreamKind,
    /// Replay this file (`+ L<i> R<j>` / `- L<i> R<j>` lines) instead of generating.
    #[arg(long)]
    stream_file: Option<PathBuf>,
    #[arg(long, default_value_t = 60)]
    n_left: u32,
    #[arg(long, default_value_t = 60)]
    n_right: u32,
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    checkpoint_every: usize,
    /// Run the EDCS validators every this many steps; 0 disables them.
    #[arg(long, default_value_t = 1)]
    validate_every: usize,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Target edge density for random and forest_union streams.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Live-edge window for sliding_window streams.
    #[arg(long, default_value_t = 200)]
    window: usize,
    /// Piece size for four_block and three_block streams.
    #[arg(long, default_value_t = 10)]
    block_size: u32,
    /// Number of forests for forest_union streams (defaults to --alpha-cap).
    #[arg(long)]
    forests: Option<usize>,
    /// Even beta the three_block instance is built for.
    #[arg(long, default_value_t = 12)]
    block_beta: u32,
    /// Write 0 instead of wall time, making metrics.csv reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Also run the structural EDCS audits.
    #[arg(long)]
    audit: bool,
    /// Save the replayed stream to this file.
    #[arg(long)]
    emit_stream: Option<PathBuf>,
}

fn run(args: Args) -> anyhow::Result<bool> {
    let cfg = PipelineConfig {
        mode: args.mode,
        eps: args.eps,
        beta: args.beta,
        lambda: args.lambda,
        alpha_cap: args.alpha_cap,
        seed: args.seed,
        checkpoint_every: args.checkpoint_every,
        validate_every: args.validate_every,
        timing: !args.no_timing,
        audit: args.audit,
        stream: StreamSpec {
            kind: args.stream_kind,
            n_left: args.n_left,
            n_right: args.n_right,
            steps: args.steps,
            density: args.density,
            window: args.window,
            block_size: args.block_size,
            forests: args.forests.unwrap_or(args.alpha_cap),
            beta: args.block_beta,
        },
    };
    let stream = match &args.stream_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            UpdateStream::parse(&text)?
        }
        None => generate_stream(&cfg.stream, cfg.seed)?,
    };
    if let Some(path) = &args.emit_stream {
        std::fs::write(path, stream.to_text()).with_context(|| format!("writing {}", path.display()))?;
    }
    let out = run_pipeline(&cfg, &stream)?;
    write_run(&args.out_dir, &out.rows, &out.summary).with_context(|| format!("writing {}", args.out_dir.display()))?;
    let params = out.summary.params.as_ref().expect("resolved parameters");
    println!(
        "mode={:?} eps={} beta={} lambda={} steps={} checkpoints={} max_ratio={} ok={}",
        params.mode,
        params.eps,
        params.beta,
        params.lambda.map_or("-".to_string(), |l| l.to_string()),
        out.summary.steps,
        out.summary.checkpoints,
        out.summary.max_ratio.map_or("-".to_string(), |r| format!("{r:.4}")),
        out.summary.ok
    );
    for m in &out.summary.messages {
        eprintln!("{m}");
    }
    Ok(out.summary.ok)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
