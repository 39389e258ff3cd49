use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use synthseries::io::dataset::{generate_dataset, DatasetFormat, GenerateOptions};
use synthseries::io::ingest::{ingest_real, read_windows, write_windows_csv};
use synthseries::io::stream::{serve_tcp, stream_unlimited, StreamConfig};
use synthseries::metrics::{bin_frequency, dft_magnitude, evaluate_batch, Metric, MetricConfig, DEFAULT_BINS, DEFAULT_WINDOW};
use synthseries::{EngineConfig, Error, Result, SineCountRange};

#[derive(Parser)]
#[command(name = "synthseries", version, about = "Deterministic synthetic time-series generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a dataset of `count` samples plus a manifest.
    Generate(GenerateArgs),
    /// Stream fresh epochs of samples to stdout or a TCP client.
    Stream(StreamArgs),
    /// Slice a real series into standardized windows.
    Ingest(IngestArgs),
    /// Compare predicted and true windows.
    Eval(EvalArgs),
    /// One-sided DFT magnitudes of each window, as CSV.
    Spectrum(SpectrumArgs),
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    max_noise_kernel_frac: Option<f64>,
    #[arg(long)]
    trend_kernel_min: Option<f64>,
    #[arg(long)]
    trend_kernel_max: Option<f64>,
}

impl EngineArgs {
    fn config(&self) -> Result<EngineConfig> {
        let mut config = EngineConfig::default();
        config.k_range = SineCountRange {
            min: self.k_min.unwrap_or(config.k_range.min),
            max: self.k_max.unwrap_or(config.k_range.max),
        };
        if let Some(f) = self.max_noise_kernel_frac {
            config.max_noise_kernel_frac = f;
        }
        config.trend_kernel_frac = (
            self.trend_kernel_min.unwrap_or(config.trend_kernel_frac.0),
            self.trend_kernel_max.unwrap_or(config.trend_kernel_frac.1),
        );
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    count: u64,
    #[arg(long)]
    window_len: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "bin")]
    format: String,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct StreamArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    epoch_size: u64,
    #[arg(long, default_value_t = 256)]
    window_len: usize,
    /// Serve on 127.0.0.1:PORT; 0 picks a free port.
    #[arg(long, conflicts_with = "pipe", required_unless_present = "pipe")]
    port: Option<u16>,
    /// Write frames to stdout.
    #[arg(long)]
    pipe: bool,
    #[arg(long, default_value_t = 0)]
    start_epoch: u64,
    /// Number of epochs to emit in pipe mode; unlimited when omitted.
    #[arg(long)]
    epochs: Option<u64>,
    /// Exit after serving this many TCP connections.
    #[arg(long)]
    max_connections: Option<usize>,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    window_len: usize,
    #[arg(long)]
    stride: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Comma-separated subset of sdl, dtw, dh, mse.
    #[arg(long, default_value = "sdl,dtw,dh,mse")]
    metrics: String,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    win: usize,
    /// Sakoe-Chiba half-width; unconstrained when omitted.
    #[arg(long)]
    band: Option<usize>,
    /// Omit per-pair values from the report.
    #[arg(long)]
    summary: bool,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn write_error(path: &Path) -> impl Fn(io::Error) -> Error + '_ {
    move |source| Error::Write {
        path: path.to_path_buf(),
        source,
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    let format: DatasetFormat = args.format.parse()?;
    let mut opts = GenerateOptions::new(args.seed, args.count, args.window_len, format);
    opts.config = args.engine.config()?;
    opts.workers = args.workers;
    let manifest = generate_dataset(&opts, &args.out)?;
    eprintln!(
        "wrote {} samples to {} ({} files)",
        manifest.count,
        args.out.display(),
        manifest.files.len()
    );
    Ok(())
}

fn stream(args: StreamArgs) -> Result<()> {
    let mut config = StreamConfig::new(args.seed, args.epoch_size, args.window_len);
    config.engine = args.engine.config()?;
    if let Some(port) = args.port {
        let listener = TcpListener::bind(("127.0.0.1", port))?;
        eprintln!("listening on {}", listener.local_addr()?);
        return serve_tcp(&config, listener, args.max_connections);
    }
    let stdout = io::stdout();
    let mut sink = BufWriter::new(stdout.lock());
    match args.epochs {
        Some(n) => stream_unlimited(&config, args.start_epoch..args.start_epoch.saturating_add(n), &mut sink),
        None => stream_unlimited(&config, args.start_epoch.., &mut sink),
    }
}

fn ingest(args: IngestArgs) -> Result<()> {
    let windows = ingest_real(&args.input, args.window_len, args.stride)?;
    write_windows_csv(&args.out, &windows)?;
    eprintln!("wrote {} windows to {}", windows.len(), args.out.display());
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let metrics = args
        .metrics
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Metric>>>()?;
    if metrics.is_empty() {
        return Err(Error::Config("no metrics selected".into()));
    }
    let config = MetricConfig {
        bins: args.bins,
        win: args.win,
        band: args.band,
    };
    let pred = read_windows(&args.pred)?;
    let truth = read_windows(&args.truth)?;
    let mut report = evaluate_batch(&pred, &truth, &metrics, &config)?;
    if args.summary {
        report.pairs.clear();
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Error::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

fn spectrum(args: SpectrumArgs) -> Result<()> {
    let windows = read_windows(&args.input)?;
    let err = write_error(&args.out);
    let mut out = BufWriter::new(File::create(&args.out).map_err(&err)?);
    writeln!(out, "window,bin,frequency,magnitude").map_err(&err)?;
    for (w, window) in windows.iter().enumerate() {
        for (k, m) in dft_magnitude(window).iter().enumerate() {
            writeln!(out, "{w},{k},{},{m}", bin_frequency(k, window.len())).map_err(&err)?;
        }
    }
    out.flush().map_err(&err)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Stream(a) => stream(a),
        Command::Ingest(a) => ingest(a),
        Command::Eval(a) => eval(a),
        Command::Spectrum(a) => spectrum(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A consumer hanging up is reported by exit code only.
        Err(Error::StreamClosed) => ExitCode::from(Error::StreamClosed.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
