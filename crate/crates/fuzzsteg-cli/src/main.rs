//! `fuzzsteg`: measure perceptual pixel similarity with an interval type-2
//! fuzzy system and hide data in the pixels it rates as smooth.
//!
//! Subcommands: `simmap` (similarity map + heatmap), `embed` / `extract`
//! (k-bit LSB with a sidecar key), `metrics` (PSNR/SSIM/UQI row),
//! `report` (full method x k x threshold sweep with CSV/JSON output),
//! `bench` (timings) and `gencover` (synthetic covers).

mod error;
mod imgio;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use error::{io_err, CliError, Result};
use fuzzsteg::config::ToolkitConfig;
use fuzzsteg::metrics::{self, MetricsReport};
use fuzzsteg::similarity::{CacheMode, SimilarityEvaluator, SimilarityMethod};
use fuzzsteg::stego::{self, EmbedConfig, IndicatorMatrix, StegoKey};
use fuzzsteg::synth;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "fuzzsteg", version, about, max_term_width = 100)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Config file (TOML); falls back to $FUZZSTEG_CONFIG, then
    /// ./fuzzsteg.toml, then built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for map computation; 0 picks the core count.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Pair-similarity cache mode.
    #[arg(long, global = true, value_enum)]
    cache: Option<CacheArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CacheArg {
    Lazy,
    Dense,
    Off,
}

impl From<CacheArg> for CacheMode {
    fn from(c: CacheArg) -> Self {
        match c {
            CacheArg::Lazy => CacheMode::Lazy,
            CacheArg::Dense => CacheMode::Dense,
            CacheArg::Off => CacheMode::Off,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    It2fls,
    T1fls,
    Sm,
}

impl From<MethodArg> for SimilarityMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::It2fls => SimilarityMethod::It2Fls,
            MethodArg::T1fls => SimilarityMethod::T1Fls,
            MethodArg::Sm => SimilarityMethod::EuclideanSm,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute a similarity map; write it as raw f64 plus a PNG heatmap.
    Simmap {
        /// Cover image (PNG/BMP/JPEG).
        cover: PathBuf,
        #[arg(long, value_enum, default_value = "it2fls")]
        method: MethodArg,
        /// Output path for the binary map (row-major little-endian f64).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output path for the grayscale heatmap PNG.
        #[arg(long)]
        heatmap: Option<PathBuf>,
    },
    /// Embed a message file into a cover image.
    Embed {
        cover: PathBuf,
        /// File whose bytes become the payload.
        message: PathBuf,
        /// Bits replaced per channel value (1..=8; above 4 distortion is
        /// likely visible).
        #[arg(long, short)]
        k: u8,
        /// Similarity threshold gating pixel selection.
        #[arg(long)]
        th: f64,
        #[arg(long, value_enum, default_value = "it2fls")]
        method: MethodArg,
        /// Stego image output (lossless format required).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sidecar key output.
        #[arg(long)]
        key: Option<PathBuf>,
    },
    /// Recover the message from a stego image and its sidecar key.
    Extract {
        stego: PathBuf,
        key: PathBuf,
        /// Message output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quality metrics between a cover and a stego image (one CSV row).
    Metrics {
        cover: PathBuf,
        stego: PathBuf,
        /// Sidecar key; fills in method/k/Th provenance and capacity.
        #[arg(long)]
        key: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long, short)]
        k: Option<u8>,
        #[arg(long)]
        th: Option<f64>,
        /// Emit JSON instead of CSV.
        #[arg(long)]
        json: bool,
        /// Add the 8x8 block-windowed SSIM as an extra line.
        #[arg(long)]
        windowed_ssim: bool,
    },
    /// Sweep covers x methods x k x thresholds; write CSV tables and
    /// plot-ready series.
    Report(report::ReportArgs),
    /// Time the similarity map under each cache mode.
    Bench {
        cover: PathBuf,
        #[arg(long, value_enum, default_value = "it2fls")]
        method: MethodArg,
    },
    /// Generate a synthetic cover image.
    Gencover {
        #[arg(long, value_enum)]
        kind: CoverKind,
        #[arg(long, default_value_t = 512)]
        width: usize,
        #[arg(long, default_value_t = 512)]
        height: usize,
        /// Smooth-field contrast for the texture kind.
        #[arg(long, default_value_t = 60.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CoverKind {
    Gradient,
    Noise,
    Texture,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("fuzzsteg: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(&cli.global)?;
    if config.workers > 0 {
        // One global pool per process; a failure here means it was already
        // initialized, which only happens in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build_global();
    }
    match cli.command {
        Command::Simmap {
            cover,
            method,
            out,
            heatmap,
        } => cmd_simmap(&config, &cover, method.into(), out, heatmap),
        Command::Embed {
            cover,
            message,
            k,
            th,
            method,
            out,
            key,
        } => cmd_embed(&config, &cover, &message, k, th, method.into(), out, key),
        Command::Extract { stego, key, out } => cmd_extract(&stego, &key, out),
        Command::Metrics {
            cover,
            stego,
            key,
            method,
            k,
            th,
            json,
            windowed_ssim,
        } => cmd_metrics(
            &cover,
            &stego,
            key.as_deref(),
            method.map(Into::into),
            k,
            th,
            json,
            windowed_ssim,
        ),
        Command::Report(args) => report::run(&config, args),
        Command::Bench { cover, method } => cmd_bench(&config, &cover, method.into()),
        Command::Gencover {
            kind,
            width,
            height,
            amplitude,
            seed,
            out,
        } => cmd_gencover(kind, width, height, amplitude, seed, &out),
    }
}

/// Resolves the effective configuration: file by precedence, then CLI
/// overrides for workers and cache.
fn load_config(global: &GlobalOpts) -> Result<ToolkitConfig> {
    let path = global
        .config
        .clone()
        .or_else(|| std::env::var_os("FUZZSTEG_CONFIG").map(PathBuf::from))
        .or_else(|| {
            let default = PathBuf::from("fuzzsteg.toml");
            default.exists().then_some(default)
        });
    let mut config = match path {
        Some(p) => {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| io_err(&format!("reading config {}", p.display()), e))?;
            ToolkitConfig::from_toml_str(&text)?
        }
        None => ToolkitConfig::default(),
    };
    if let Some(workers) = global.workers {
        config.workers = workers;
    }
    if let Some(cache) = global.cache {
        config.cache = cache.into();
    }
    Ok(config)
}

fn evaluator(config: &ToolkitConfig, method: SimilarityMethod) -> Result<SimilarityEvaluator> {
    let engine = config.build_engine()?;
    Ok(SimilarityEvaluator::new(method, engine, config.cache)?)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}{suffix}"))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| io_err(&format!("writing {}", path.display()), e))
}

fn cmd_simmap(
    config: &ToolkitConfig,
    cover: &Path,
    method: SimilarityMethod,
    out: Option<PathBuf>,
    heatmap: Option<PathBuf>,
) -> Result<()> {
    let img = imgio::load_rgb(cover)?;
    let ev = evaluator(config, method)?;
    let map = ev.similarity_map(&img)?;
    let out = out.unwrap_or_else(|| with_suffix(cover, &format!(".{method}.simmap.bin")));
    let heatmap = heatmap.unwrap_or_else(|| with_suffix(cover, &format!(".{method}.simmap.png")));
    write_bytes(&out, &map.to_le_bytes())?;
    imgio::save_gray(&heatmap, map.width(), map.height(), &map.heatmap())?;
    println!(
        "similarity map {}x{} ({method}): min {:.6} max {:.6} mean {:.6}",
        map.width(),
        map.height(),
        map.min(),
        map.max(),
        map.mean()
    );
    println!("wrote {} and {}", out.display(), heatmap.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_embed(
    config: &ToolkitConfig,
    cover: &Path,
    message: &Path,
    k: u8,
    th: f64,
    method: SimilarityMethod,
    out: Option<PathBuf>,
    key_path: Option<PathBuf>,
) -> Result<()> {
    if k > 4 {
        eprintln!("note: k = {k} replaces more than half the low bits; distortion will be visible");
    }
    let img = imgio::load_rgb(cover)?;
    let payload =
        std::fs::read(message).map_err(|e| io_err(&format!("reading {}", message.display()), e))?;
    let embed_config = EmbedConfig::new(k, th, method)?;
    let ev = evaluator(config, method)?;
    let map = ev.similarity_map(&img)?;
    let indicator = IndicatorMatrix::from_map(&map, th);
    let bits = payload.len() * 8;
    let (stego, key) = stego::embed(&img, &indicator, &embed_config, &payload, bits)?;

    let out = out.unwrap_or_else(|| with_suffix(cover, ".stego.png"));
    let key_path = key_path.unwrap_or_else(|| with_suffix(&out, ".stgkey"));
    imgio::save_rgb(&out, &stego)?;
    write_bytes(&key_path, &key.serialize())?;
    println!(
        "embedded {bits} bits of {} capacity ({:.2}% of the image at k = {k}, Th = {th}, {method})",
        indicator.capacity_bits(k),
        indicator.capacity_percent(k)
    );
    println!("wrote {} and {}", out.display(), key_path.display());
    Ok(())
}

fn cmd_extract(stego: &Path, key_path: &Path, out: Option<PathBuf>) -> Result<()> {
    let img = imgio::load_rgb(stego)?;
    let key_bytes = std::fs::read(key_path)
        .map_err(|e| io_err(&format!("reading {}", key_path.display()), e))?;
    let key = StegoKey::deserialize(&key_bytes)?;
    let message = stego::extract(&img, &key)?;
    let out = out.unwrap_or_else(|| with_suffix(stego, ".extracted.bin"));
    write_bytes(&out, &message)?;
    println!(
        "extracted {} bits ({} bytes, zero-padded) to {}",
        key.message_bit_length,
        message.len(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_metrics(
    cover: &Path,
    stego: &Path,
    key_path: Option<&Path>,
    method: Option<SimilarityMethod>,
    k: Option<u8>,
    th: Option<f64>,
    json: bool,
    windowed_ssim: bool,
) -> Result<()> {
    let a = imgio::load_rgb(cover)?;
    let b = imgio::load_rgb(stego)?;
    let mut report = MetricsReport::compute(&a, &b)?;
    if let Some(path) = key_path {
        let bytes =
            std::fs::read(path).map_err(|e| io_err(&format!("reading {}", path.display()), e))?;
        let key = StegoKey::deserialize(&bytes)?;
        report = report.with_provenance(
            key.method,
            key.k,
            key.th,
            key.indicator.capacity_percent(key.k),
        );
    } else {
        report.method = method;
        report.k = k;
        report.th = th;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&report.to_json()).unwrap());
    } else {
        println!("{}", MetricsReport::CSV_HEADER);
        println!("{}", report.csv_row());
    }
    if windowed_ssim {
        println!("windowed_ssim_8x8,{}", metrics::ssim_windowed(&a, &b, 8)?);
    }
    Ok(())
}

fn cmd_bench(config: &ToolkitConfig, cover: &Path, method: SimilarityMethod) -> Result<()> {
    let img = imgio::load_rgb(cover)?;
    let engine = config.build_engine()?;

    let lazy = SimilarityEvaluator::new(method, engine.clone(), CacheMode::Lazy)?;
    let t = Instant::now();
    let map = lazy.similarity_map(&img)?;
    let cold = t.elapsed();
    let t = Instant::now();
    let _ = lazy.similarity_map(&img)?;
    let warm = t.elapsed();

    let t = Instant::now();
    let dense = SimilarityEvaluator::new(method, engine.clone(), CacheMode::Dense)?;
    let build = t.elapsed();
    let t = Instant::now();
    let dense_map = dense.similarity_map(&img)?;
    let dense_run = t.elapsed();

    let t = Instant::now();
    let off = SimilarityEvaluator::new(method, engine, CacheMode::Off)?;
    let uncached = off.similarity_map(&img)?;
    let no_cache = t.elapsed();

    println!(
        "bench {method} on {}x{} ({} unique difference triples)",
        img.width(),
        img.height(),
        lazy.cached_entries()
    );
    println!("  lazy cold   {:>9.3} s", cold.as_secs_f64());
    println!("  lazy warm   {:>9.3} s", warm.as_secs_f64());
    println!("  dense build {:>9.3} s", build.as_secs_f64());
    println!("  dense map   {:>9.3} s", dense_run.as_secs_f64());
    println!("  no cache    {:>9.3} s", no_cache.as_secs_f64());
    let identical = map.values() == dense_map.values() && map.values() == uncached.values();
    println!("  outputs identical across modes: {identical}");
    Ok(())
}

fn cmd_gencover(
    kind: CoverKind,
    width: usize,
    height: usize,
    amplitude: f64,
    seed: u64,
    out: &Path,
) -> Result<()> {
    if width == 0 || height == 0 || width > imgio::MAX_DIM || height > imgio::MAX_DIM {
        return Err(CliError::Usage(format!(
            "cover dimensions {width}x{height} outside 1..={}",
            imgio::MAX_DIM
        )));
    }
    let img = match kind {
        CoverKind::Gradient => synth::gradient_cover(width, height),
        CoverKind::Noise => synth::noise_cover(width, height, seed),
        CoverKind::Texture => synth::texture_cover(width, height, amplitude, seed),
    };
    imgio::save_rgb(out, &img)?;
    println!("wrote {width}x{height} {} cover to {}", kind_name(kind), out.display());
    Ok(())
}

fn kind_name(kind: CoverKind) -> &'static str {
    match kind {
        CoverKind::Gradient => "gradient",
        CoverKind::Noise => "noise",
        CoverKind::Texture => "texture",
    }
}
