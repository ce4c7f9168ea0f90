//! Cover/stego quality metrics: MSE, PSNR, SSIM and UQI.
//!
//! All four are global statistics computed per channel and averaged, which
//! matches reporting one number per image pair. An 8x8 non-overlapping
//! windowed SSIM is available behind an explicit function for comparison
//! with windowed implementations elsewhere.

use crate::img::RgbImage;
use crate::similarity::SimilarityMethod;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("UQI undefined: {0}")]
    UndefinedUqi(String),
}

fn check_shapes(a: &RgbImage, b: &RgbImage) -> Result<(), MetricsError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MetricsError::ShapeMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    Ok(())
}

/// Mean squared error over all `3 H W` channel samples.
pub fn mse(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricsError> {
    check_shapes(a, b)?;
    let sum: f64 = a
        .as_raw()
        .iter()
        .zip(b.as_raw())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.as_raw().len() as f64)
}

/// `10 log10(255^2 / MSE)` in dB; identical images give `f64::INFINITY`.
pub fn psnr(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricsError> {
    let e = mse(a, b)?;
    Ok(psnr_from_mse(e))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / mse).log10()
    }
}

/// Per-channel first and second moments, population convention.
struct ChannelStats {
    mean_x: f64,
    mean_y: f64,
    var_x: f64,
    var_y: f64,
    cov: f64,
}

fn channel_stats(a: &RgbImage, b: &RgbImage, channel: usize) -> ChannelStats {
    let n = (a.width() * a.height()) as f64;
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    let mut sum_xx = 0.0;
    let mut sum_yy = 0.0;
    let mut sum_xy = 0.0;
    let xs = a.as_raw()[channel..].iter().step_by(3);
    let ys = b.as_raw()[channel..].iter().step_by(3);
    for (&x, &y) in xs.zip(ys) {
        let (x, y) = (x as f64, y as f64);
        sum_x += x;
        sum_y += y;
        sum_xx += x * x;
        sum_yy += y * y;
        sum_xy += x * y;
    }
    let mean_x = sum_x / n;
    let mean_y = sum_y / n;
    ChannelStats {
        mean_x,
        mean_y,
        var_x: sum_xx / n - mean_x * mean_x,
        var_y: sum_yy / n - mean_y * mean_y,
        cov: sum_xy / n - mean_x * mean_y,
    }
}

const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

fn ssim_from_stats(s: &ChannelStats) -> f64 {
    ((2.0 * s.mean_x * s.mean_y + SSIM_C1) * (2.0 * s.cov + SSIM_C2))
        / ((s.mean_x * s.mean_x + s.mean_y * s.mean_y + SSIM_C1) * (s.var_x + s.var_y + SSIM_C2))
}

/// Global structural similarity, per channel then averaged. Stabilizing
/// constants are the usual `(0.01 L)^2` and `(0.03 L)^2` at `L = 255`.
pub fn ssim(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricsError> {
    check_shapes(a, b)?;
    let mut total = 0.0;
    for channel in 0..3 {
        total += ssim_from_stats(&channel_stats(a, b, channel));
    }
    Ok(total / 3.0)
}

/// Mean SSIM over non-overlapping `window x window` blocks (remainder rows
/// and columns are ignored), per channel then averaged.
pub fn ssim_windowed(a: &RgbImage, b: &RgbImage, window: usize) -> Result<f64, MetricsError> {
    check_shapes(a, b)?;
    assert!(window >= 2, "window must be at least 2 pixels");
    let bw = a.width() / window;
    let bh = a.height() / window;
    if bw == 0 || bh == 0 {
        // Smaller than one block: fall back to the global statistic.
        return ssim(a, b);
    }
    let n = (window * window) as f64;
    let mut total = 0.0;
    for channel in 0..3 {
        let mut acc = 0.0;
        for by in 0..bh {
            for bx in 0..bw {
                let mut sum_x = 0.0;
                let mut sum_y = 0.0;
                let mut sum_xx = 0.0;
                let mut sum_yy = 0.0;
                let mut sum_xy = 0.0;
                for dy in 0..window {
                    for dx in 0..window {
                        let (y, x) = (by * window + dy, bx * window + dx);
                        let xv = a.sample(channel, y, x) as f64;
                        let yv = b.sample(channel, y, x) as f64;
                        sum_x += xv;
                        sum_y += yv;
                        sum_xx += xv * xv;
                        sum_yy += yv * yv;
                        sum_xy += xv * yv;
                    }
                }
                let mean_x = sum_x / n;
                let mean_y = sum_y / n;
                acc += ssim_from_stats(&ChannelStats {
                    mean_x,
                    mean_y,
                    var_x: sum_xx / n - mean_x * mean_x,
                    var_y: sum_yy / n - mean_y * mean_y,
                    cov: sum_xy / n - mean_x * mean_y,
                });
            }
        }
        total += acc / (bw * bh) as f64;
    }
    Ok(total / 3.0)
}

/// Universal quality index: `4 cov mx my / ((vx + vy)(mx^2 + my^2))`,
/// per channel then averaged. Undefined when a channel has zero variance
/// in both images or zero means in both.
pub fn uqi(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricsError> {
    check_shapes(a, b)?;
    let mut total = 0.0;
    for channel in 0..3 {
        let s = channel_stats(a, b, channel);
        let var_term = s.var_x + s.var_y;
        let mean_term = s.mean_x * s.mean_x + s.mean_y * s.mean_y;
        if var_term == 0.0 {
            return Err(MetricsError::UndefinedUqi(format!(
                "channel {channel} is constant in both images (zero variance)"
            )));
        }
        if mean_term == 0.0 {
            return Err(MetricsError::UndefinedUqi(format!(
                "channel {channel} has zero mean in both images"
            )));
        }
        // (2 cov)(2 mx my) groups the factors so identical inputs give
        // exactly 1.
        total += (2.0 * s.cov) * (2.0 * s.mean_x * s.mean_y) / (var_term * mean_term);
    }
    Ok(total / 3.0)
}

/// One quality row for a (cover, stego) pair, with sweep provenance when
/// known. Serializes to the report CSV schema and to JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub method: Option<SimilarityMethod>,
    pub k: Option<u8>,
    pub th: Option<f64>,
    pub mse: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub uqi: f64,
    pub capacity_pct: Option<f64>,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "method,k,Th,psnr_db,ssim,uqi,capacity_pct";

    /// Computes all four metrics for a pair; provenance fields start empty.
    pub fn compute(cover: &RgbImage, stego: &RgbImage) -> Result<Self, MetricsError> {
        Ok(Self {
            method: None,
            k: None,
            th: None,
            mse: mse(cover, stego)?,
            psnr_db: psnr(cover, stego)?,
            ssim: ssim(cover, stego)?,
            uqi: uqi(cover, stego)?,
            capacity_pct: None,
        })
    }

    pub fn with_provenance(
        mut self,
        method: SimilarityMethod,
        k: u8,
        th: f64,
        capacity_pct: f64,
    ) -> Self {
        self.method = Some(method);
        self.k = Some(k);
        self.th = Some(th);
        self.capacity_pct = Some(capacity_pct);
        self
    }

    /// One CSV row matching [`Self::CSV_HEADER`]; unknown provenance fields
    /// are empty, infinite PSNR prints as `inf`.
    pub fn csv_row(&self) -> String {
        let method = self.method.map(|m| m.name().to_string()).unwrap_or_default();
        let k = self.k.map(|k| k.to_string()).unwrap_or_default();
        let th = self.th.map(|t| t.to_string()).unwrap_or_default();
        let psnr = if self.psnr_db.is_infinite() {
            "inf".to_string()
        } else {
            self.psnr_db.to_string()
        };
        let capacity = self
            .capacity_pct
            .map(|c| c.to_string())
            .unwrap_or_default();
        format!(
            "{method},{k},{th},{psnr},{},{},{capacity}",
            self.ssim, self.uqi
        )
    }

    /// Parses a row produced by [`Self::csv_row`]. `mse` is not part of the
    /// CSV schema and comes back as the value implied by the PSNR.
    pub fn from_csv_row(row: &str) -> Option<Self> {
        let fields: Vec<&str> = row.trim_end().split(',').collect();
        if fields.len() != 7 {
            return None;
        }
        let method = if fields[0].is_empty() {
            None
        } else {
            Some(fields[0].parse().ok()?)
        };
        let k = if fields[1].is_empty() {
            None
        } else {
            Some(fields[1].parse().ok()?)
        };
        let th = if fields[2].is_empty() {
            None
        } else {
            Some(fields[2].parse().ok()?)
        };
        let psnr_db = if fields[3] == "inf" {
            f64::INFINITY
        } else {
            fields[3].parse().ok()?
        };
        let mse = if psnr_db.is_infinite() {
            0.0
        } else {
            255.0 * 255.0 / 10f64.powf(psnr_db / 10.0)
        };
        let capacity_pct = if fields[6].is_empty() {
            None
        } else {
            Some(fields[6].parse().ok()?)
        };
        Some(Self {
            method,
            k,
            th,
            mse,
            psnr_db,
            ssim: fields[4].parse().ok()?,
            uqi: fields[5].parse().ok()?,
            capacity_pct,
        })
    }

    #[cfg(feature = "serde")]
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "method": self.method.map(|m| m.name()),
            "k": self.k,
            "th": self.th,
            "mse": self.mse,
            "psnr_db": if self.psnr_db.is_infinite() { serde_json::Value::from("inf") } else { self.psnr_db.into() },
            "ssim": self.ssim,
            "uqi": self.uqi,
            "capacity_pct": self.capacity_pct,
        })
    }
}
