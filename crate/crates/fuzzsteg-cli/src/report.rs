//! Full sweep: every (cover, method, k, threshold) cell embeds a payload,
//! extract-verifies it, and scores quality and capacity. Results land in
//! an out directory as a per-cell CSV, a capacity pivot averaged across
//! covers, and plot-ready JSON series. A failed cell is recorded and the
//! sweep continues; the command exits nonzero if any cell failed.

use crate::error::{io_err, CliError, Result};
use crate::imgio;
use clap::Args;
use fuzzsteg::config::ToolkitConfig;
use fuzzsteg::metrics::{psnr, ssim, uqi};
use fuzzsteg::similarity::{SimilarityEvaluator, SimilarityMethod};
use fuzzsteg::stego::{embed, extract, EmbedConfig, IndicatorMatrix};
use fuzzsteg::synth;
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct ReportArgs {
    /// Cover images; each contributes one row per (method, k, Th) cell.
    #[arg(required = true)]
    covers: Vec<PathBuf>,
    /// Methods to sweep (default: all three).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Bit depths to sweep (default: from config, 1,2,3,4).
    #[arg(long = "k-list", value_delimiter = ',')]
    k_list: Option<Vec<u8>>,
    /// Thresholds to sweep (default: from config, 0.75,0.77,0.80,0.81).
    #[arg(long = "th-list", value_delimiter = ',')]
    th_list: Option<Vec<f64>>,
    /// Output directory for report.csv, capacity.csv and figures.json.
    #[arg(long, default_value = "report")]
    out_dir: PathBuf,
    /// Seed for the deterministic payload generator.
    #[arg(long, default_value_t = 0x5eed_f02a)]
    seed: u64,
    /// Payload file; defaults to seeded random bytes filling capacity.
    /// Truncated per cell when larger than the cell's capacity.
    #[arg(long)]
    message: Option<PathBuf>,
    /// Cap on payload bits per cell (still bounded by capacity).
    #[arg(long)]
    payload_bits: Option<usize>,
}

struct Cell {
    cover: String,
    method: SimilarityMethod,
    k: u8,
    th: f64,
    psnr_db: f64,
    ssim: f64,
    uqi: f64,
    capacity_pct: f64,
    bits_embedded: usize,
    verified: bool,
    error: Option<String>,
}

pub fn run(config: &ToolkitConfig, args: ReportArgs) -> Result<()> {
    let methods = resolve_methods(&args)?;
    let k_list = args.k_list.clone().unwrap_or_else(|| config.k_values.clone());
    let th_list = args.th_list.clone().unwrap_or_else(|| config.thresholds.clone());
    if k_list.iter().any(|k| !(1..=8).contains(k)) {
        return Err(CliError::Usage(format!("k values must be in 1..=8: {k_list:?}")));
    }
    if th_list.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(CliError::Usage(format!(
            "thresholds must be in [0, 1]: {th_list:?}"
        )));
    }
    let message_bytes = match &args.message {
        Some(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| io_err(&format!("reading {}", path.display()), e))?;
            println!(
                "note: payload file supplies {} bits; cells with less capacity truncate it",
                bytes.len() * 8
            );
            Some(bytes)
        }
        None => None,
    };

    let covers: Vec<(String, fuzzsteg::RgbImage)> = args
        .covers
        .iter()
        .map(|path| {
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("cover")
                .to_string();
            imgio::load_rgb(path).map(|img| (name, img))
        })
        .collect::<Result<_>>()?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| io_err(&format!("creating {}", args.out_dir.display()), e))?;

    let mut cells = Vec::new();
    for method in &methods {
        // One evaluator per method: the difference cache carries across
        // covers and thresholds.
        let engine = config.build_engine()?;
        let ev = SimilarityEvaluator::new(*method, engine, config.cache)?;
        for (name, img) in &covers {
            match ev.similarity_map(img) {
                Ok(map) => {
                    for &th in &th_list {
                        let indicator = IndicatorMatrix::from_map(&map, th);
                        for &k in &k_list {
                            cells.push(run_cell(
                                name,
                                img,
                                &indicator,
                                *method,
                                k,
                                th,
                                args.seed,
                                message_bytes.as_deref(),
                                args.payload_bits,
                            ));
                        }
                    }
                }
                Err(e) => {
                    for &th in &th_list {
                        for &k in &k_list {
                            cells.push(Cell {
                                cover: name.clone(),
                                method: *method,
                                k,
                                th,
                                psnr_db: f64::NAN,
                                ssim: f64::NAN,
                                uqi: f64::NAN,
                                capacity_pct: f64::NAN,
                                bits_embedded: 0,
                                verified: false,
                                error: Some(format!("similarity map failed: {e}")),
                            });
                        }
                    }
                }
            }
        }
    }

    write_report_csv(&args.out_dir.join("report.csv"), &cells)?;
    write_capacity_csv(&args.out_dir.join("capacity.csv"), &cells, &covers)?;
    write_figures_json(&args.out_dir.join("figures.json"), &cells, &covers)?;

    let failed = cells.iter().filter(|c| c.error.is_some()).count();
    println!(
        "report: {} cells ({} covers x {} methods x {} k x {} Th), {} failed; wrote {}",
        cells.len(),
        covers.len(),
        methods.len(),
        k_list.len(),
        th_list.len(),
        failed,
        args.out_dir.display()
    );
    if failed > 0 {
        return Err(CliError::Other(format!("{failed} report cells failed")));
    }
    Ok(())
}

fn resolve_methods(args: &ReportArgs) -> Result<Vec<SimilarityMethod>> {
    match &args.methods {
        None => Ok(SimilarityMethod::ALL.to_vec()),
        Some(names) => names
            .iter()
            .map(|n| n.parse::<SimilarityMethod>().map_err(CliError::Usage))
            .collect(),
    }
}

/// Cheap stable string hash for per-cell seeds.
fn fnv1a(text: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in text.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    cover_name: &str,
    img: &fuzzsteg::RgbImage,
    indicator: &IndicatorMatrix,
    method: SimilarityMethod,
    k: u8,
    th: f64,
    seed: u64,
    message: Option<&[u8]>,
    payload_bits: Option<usize>,
) -> Cell {
    let capacity = indicator.capacity_bits(k);
    let capacity_pct = indicator.capacity_percent(k);
    let mut cell = Cell {
        cover: cover_name.to_string(),
        method,
        k,
        th,
        psnr_db: f64::NAN,
        ssim: f64::NAN,
        uqi: f64::NAN,
        capacity_pct,
        bits_embedded: 0,
        verified: false,
        error: None,
    };

    // Payload: supplied file truncated to capacity, or deterministic bytes
    // filling it; the per-cell seed keeps cells independent of sweep order.
    let mut bits = payload_bits.unwrap_or(usize::MAX).min(capacity);
    let owned;
    let payload: &[u8] = match message {
        Some(bytes) => {
            bits = bits.min(bytes.len() * 8);
            bytes
        }
        None => {
            let cell_seed = seed
                ^ fnv1a(cover_name)
                ^ ((method.id() as u64) << 56)
                ^ ((k as u64) << 48)
                ^ th.to_bits().rotate_left(17);
            owned = synth::message_bytes(cell_seed, bits.div_ceil(8).max(1));
            &owned
        }
    };

    let embed_config = match EmbedConfig::new(k, th, method) {
        Ok(c) => c,
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    };
    let (stego, key) = match embed(img, indicator, &embed_config, payload, bits) {
        Ok(pair) => pair,
        Err(e) => {
            cell.error = Some(format!("embed failed: {e}"));
            return cell;
        }
    };
    cell.bits_embedded = bits;

    match extract(&stego, &key) {
        Ok(back) => {
            let ok = (0..bits).all(|bit| {
                let want = payload[bit / 8] & (0x80 >> (bit % 8)) != 0;
                let got = back[bit / 8] & (0x80 >> (bit % 8)) != 0;
                want == got
            });
            cell.verified = ok;
            if !ok {
                cell.error = Some("extracted payload does not match".into());
                return cell;
            }
        }
        Err(e) => {
            cell.error = Some(format!("extract failed: {e}"));
            return cell;
        }
    }

    match (psnr(img, &stego), ssim(img, &stego), uqi(img, &stego)) {
        (Ok(p), Ok(s), Ok(u)) => {
            cell.psnr_db = p;
            cell.ssim = s;
            cell.uqi = u;
        }
        (p, s, u) => {
            let mut problems = Vec::new();
            if let Err(e) = p {
                problems.push(e.to_string());
            } else {
                cell.psnr_db = p.unwrap();
            }
            if let Err(e) = s {
                problems.push(e.to_string());
            } else {
                cell.ssim = s.unwrap();
            }
            if let Err(e) = u {
                problems.push(e.to_string());
            } else {
                cell.uqi = u.unwrap();
            }
            cell.error = Some(problems.join("; "));
        }
    }
    cell
}

pub const REPORT_CSV_HEADER: &str =
    "cover,method,k,Th,psnr_db,ssim,uqi,capacity_pct,bits_embedded,verified,error";

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else if v.is_nan() {
        "nan".into()
    } else {
        v.to_string()
    }
}

fn csv_quote(text: &str) -> String {
    format!("\"{}\"", text.replace('"', "\"\""))
}

fn write_report_csv(path: &Path, cells: &[Cell]) -> Result<()> {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            c.cover,
            c.method,
            c.k,
            c.th,
            fmt_f64(c.psnr_db),
            fmt_f64(c.ssim),
            fmt_f64(c.uqi),
            fmt_f64(c.capacity_pct),
            c.bits_embedded,
            c.verified,
            c.error.as_deref().map(csv_quote).unwrap_or_default()
        ));
    }
    std::fs::write(path, out).map_err(|e| io_err(&format!("writing {}", path.display()), e))
}

/// Capacity pivot averaged across covers: one row per (Th, method, k).
fn write_capacity_csv(
    path: &Path,
    cells: &[Cell],
    covers: &[(String, fuzzsteg::RgbImage)],
) -> Result<()> {
    let mut out = String::from("Th,method,k,capacity_pct_avg\n");
    let mut keys: Vec<(u64, SimilarityMethod, u8)> = cells
        .iter()
        .map(|c| (c.th.to_bits(), c.method, c.k))
        .collect();
    keys.sort_by(|a, b| {
        f64::from_bits(a.0)
            .partial_cmp(&f64::from_bits(b.0))
            .unwrap()
            .then(a.1.id().cmp(&b.1.id()))
            .then(a.2.cmp(&b.2))
    });
    keys.dedup();
    for (th_bits, method, k) in keys {
        let th = f64::from_bits(th_bits);
        let values: Vec<f64> = cells
            .iter()
            .filter(|c| c.th.to_bits() == th_bits && c.method == method && c.k == k)
            .map(|c| c.capacity_pct)
            .collect();
        let avg = values.iter().sum::<f64>() / covers.len().max(1) as f64;
        out.push_str(&format!("{th},{method},{k},{avg}\n"));
    }
    std::fs::write(path, out).map_err(|e| io_err(&format!("writing {}", path.display()), e))
}

/// Plot-ready series: for each metric, (th, k) panel and method, the values
/// across covers in cover order.
fn write_figures_json(
    path: &Path,
    cells: &[Cell],
    covers: &[(String, fuzzsteg::RgbImage)],
) -> Result<()> {
    let cover_names: Vec<&str> = covers.iter().map(|(n, _)| n.as_str()).collect();
    let mut series = Vec::new();
    let mut panels: Vec<(u64, u8, SimilarityMethod)> = cells
        .iter()
        .map(|c| (c.th.to_bits(), c.k, c.method))
        .collect();
    panels.sort_by(|a, b| {
        f64::from_bits(a.0)
            .partial_cmp(&f64::from_bits(b.0))
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.id().cmp(&b.2.id()))
    });
    panels.dedup();
    for metric in ["psnr_db", "ssim", "uqi", "capacity_pct"] {
        for &(th_bits, k, method) in &panels {
            let values: Vec<serde_json::Value> = cover_names
                .iter()
                .map(|name| {
                    let cell = cells.iter().find(|c| {
                        c.cover == *name
                            && c.th.to_bits() == th_bits
                            && c.k == k
                            && c.method == method
                    });
                    match cell {
                        Some(c) => {
                            let v = match metric {
                                "psnr_db" => c.psnr_db,
                                "ssim" => c.ssim,
                                "uqi" => c.uqi,
                                _ => c.capacity_pct,
                            };
                            if v.is_finite() {
                                serde_json::json!(v)
                            } else {
                                serde_json::json!(fmt_f64(v))
                            }
                        }
                        None => serde_json::Value::Null,
                    }
                })
                .collect();
            series.push(serde_json::json!({
                "metric": metric,
                "th": f64::from_bits(th_bits),
                "k": k,
                "method": method.name(),
                "covers": cover_names,
                "values": values,
            }));
        }
    }
    let doc = serde_json::json!({
        "covers": cover_names,
        "series": series,
    });
    std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap())
        .map_err(|e| io_err(&format!("writing {}", path.display()), e))
}
