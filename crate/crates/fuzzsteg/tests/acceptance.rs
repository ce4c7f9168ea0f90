//! Acceptance suite: one test per pipeline-level criterion, each printing a
//! PASS line with its runtime (visible with `--nocapture`). Criteria with
//! wall-clock budgets take a global lock so concurrent tests cannot skew
//! their timings.

use fuzzsteg::fuzzy::{ColorVocabulary, SimilarityVocabulary};
use fuzzsteg::inference::{
    ekm_left, ekm_right, DiscretizedIt2Set, InferenceEngine, RuleBase,
};
use fuzzsteg::metrics::{mse, psnr, psnr_from_mse, ssim, uqi};
use fuzzsteg::similarity::{channel_diff, CacheMode, SimilarityEvaluator, SimilarityMethod};
use fuzzsteg::stego::{embed, extract, EmbedConfig, IndicatorMatrix};
use fuzzsteg::{synth, RgbImage};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

/// Serializes the timed criteria; a poisoned lock (an earlier criterion
/// failed) must not mask later ones.
fn timing_lock() -> std::sync::MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn pass(name: &str, started: Instant) {
    println!(
        "ACCEPTANCE {name}: PASS ({:.2} s)",
        started.elapsed().as_secs_f64()
    );
}

const SWEEP_K: [u8; 4] = [1, 2, 3, 4];
const SWEEP_TH: [f64; 4] = [0.75, 0.77, 0.80, 0.81];

/// Exhaustive vertex enumeration of the weighted-average extrema; the
/// independent reference for the EKM endpoints.
fn enumerate_extrema(xs: &[f64], lo: &[f64], up: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        let mut a = 0.0;
        let mut b = 0.0;
        for i in 0..n {
            let w = if mask & (1 << i) != 0 { up[i] } else { lo[i] };
            a += xs[i] * w;
            b += w;
        }
        if b > 0.0 {
            let c = a / b;
            min = min.min(c);
            max = max.max(c);
        }
    }
    (min, max)
}

#[test]
fn criterion_01_ekm_matches_exhaustive_enumeration() {
    let _guard = timing_lock();
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xACCE_0001);
    for trial in 0..1000 {
        let n = rng.gen_range(2..=12usize);
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mut lo = Vec::with_capacity(n);
        let mut up = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.gen_range(0.0..1.0);
            // A third of the samples zero the lower bound, covering the
            // sparse firings that force the scan fallback.
            let l = if rng.gen_bool(0.33) {
                0.0
            } else {
                rng.gen_range(0.0..=u)
            };
            lo.push(l);
            up.push(u);
        }
        if up.iter().sum::<f64>() <= 0.0 {
            up[n - 1] = 0.25;
        }
        let set = DiscretizedIt2Set::new(xs.clone(), lo.clone(), up.clone()).unwrap();
        let (c_l, _) = ekm_left(&set).unwrap();
        let (c_r, _) = ekm_right(&set).unwrap();
        let (want_l, want_r) = enumerate_extrema(&xs, &lo, &up);
        assert!(
            (c_l - want_l).abs() < 1e-9,
            "trial {trial}: c_l {c_l} vs enumeration {want_l}"
        );
        assert!(
            (c_r - want_r).abs() < 1e-9,
            "trial {trial}: c_r {c_r} vs enumeration {want_r}"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "EKM oracle run took {elapsed:?}, budget 10 s"
    );
    pass("criterion 01 (EKM oracle equivalence)", start);
}

#[test]
fn criterion_02_zero_fou_collapse_on_dense_grid() {
    let _guard = timing_lock();
    let start = Instant::now();
    // Degenerate (zero-FOU) vocabularies: the FOU midlines of the defaults.
    let engine = InferenceEngine::new(
        RuleBase::standard(),
        ColorVocabulary::default().principal(),
        SimilarityVocabulary::default().principal(),
        InferenceEngine::DEFAULT_SAMPLES,
    )
    .unwrap();
    let mut scratch = engine.scratch();
    let mut worst = 0.0f64;
    for r in 0..64u32 {
        for g in 0..64u32 {
            for b in 0..64u32 {
                let d = [(r * 4) as u8, (g * 4) as u8, (b * 4) as u8];
                let it2 = engine.infer_it2_with(&mut scratch, d).unwrap();
                let t1 = engine.infer_t1_with(&mut scratch, d).unwrap();
                worst = worst.max((it2 - t1).abs());
            }
        }
    }
    assert!(worst < 1e-9, "max |IT2 - T1| = {worst:e} on the 64^3 grid");
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "zero-FOU grid took {elapsed:?}, budget 60 s"
    );
    pass("criterion 02 (zero-FOU collapse)", start);
}

#[test]
fn criterion_03_round_trip_embedding() {
    let _guard = timing_lock();
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xACCE_0003);
    for trial in 0..20u64 {
        let method = SimilarityMethod::ALL[trial as usize % 3];
        let k = SWEEP_K[trial as usize % 4];
        let th = SWEEP_TH[(trial / 4) as usize % 4];
        let cover = if trial % 2 == 0 {
            synth::texture_cover(128, 128, 60.0, 0xC0FE + trial)
        } else {
            synth::noise_cover(128, 128, 0xC0FE + trial)
        };
        let ev = SimilarityEvaluator::with_defaults(method);
        let map = ev.similarity_map(&cover).unwrap();
        let ind = IndicatorMatrix::from_map(&map, th);
        let capacity = ind.capacity_bits(k);
        let bits = if trial % 2 == 0 {
            capacity
        } else {
            rng.gen_range(0..=capacity)
        };
        let payload = synth::message_bytes(trial, bits.div_ceil(8).max(1));
        let cfg = EmbedConfig::new(k, th, method).unwrap();
        let (stego, key) = embed(&cover, &ind, &cfg, &payload, bits).unwrap();
        let back = extract(&stego, &key).unwrap();
        for bit in 0..bits {
            let want = payload[bit / 8] & (0x80 >> (bit % 8)) != 0;
            let got = back[bit / 8] & (0x80 >> (bit % 8)) != 0;
            assert_eq!(
                want, got,
                "trial {trial} ({method}, k={k}, Th={th}): bit {bit} flipped"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "round-trip suite took {elapsed:?}, budget 2 min"
    );
    pass("criterion 03 (round-trip embedding)", start);
}

#[test]
fn criterion_04_psnr_matches_the_bit_replacement_model() {
    let _guard = timing_lock();
    let start = Instant::now();
    let cover = synth::texture_cover(512, 512, 60.0, 0xACCE_0004);
    let ev = SimilarityEvaluator::with_defaults(SimilarityMethod::It2Fls);
    let map = ev.similarity_map(&cover).unwrap();
    let ind = IndicatorMatrix::from_map(&map, 0.80);
    let p = ind.ones() as f64 / (512.0 * 512.0);
    assert!(p > 0.05, "indicator nearly empty (p = {p})");
    for (i, k) in SWEEP_K.iter().enumerate() {
        let bits = ind.capacity_bits(*k);
        let payload = synth::message_bytes(0xACCE_0004 + i as u64, bits.div_ceil(8));
        let cfg = EmbedConfig::new(*k, 0.80, SimilarityMethod::It2Fls).unwrap();
        let (stego, _) = embed(&cover, &ind, &cfg, &payload, bits).unwrap();
        let measured = psnr(&cover, &stego).unwrap();
        let model_mse = p * (2f64.powi(2 * *k as i32) - 1.0) / 6.0;
        let model = 10.0 * (255.0 * 255.0 / model_mse).log10();
        assert!(
            (measured - model).abs() <= 1.0,
            "k = {k}: measured {measured:.3} dB vs model {model:.3} dB (p = {p:.4})"
        );
    }
    pass("criterion 04 (PSNR physics check)", start);
}

/// One full sweep on a 256x256 textured cover: per (method, Th), the PSNR
/// ladder over k with capacity-filling random payloads, plus capacities.
struct SweepCell {
    method: SimilarityMethod,
    th: f64,
    k: u8,
    psnr_db: f64,
    capacity_pct: f64,
}

fn sweep_cells() -> &'static Vec<SweepCell> {
    static CELLS: OnceLock<Vec<SweepCell>> = OnceLock::new();
    CELLS.get_or_init(|| {
        let cover = synth::texture_cover(256, 256, 60.0, 0xACCE_5EED);
        let mut cells = Vec::new();
        for method in SimilarityMethod::ALL {
            let ev = SimilarityEvaluator::with_defaults(method);
            let map = ev.similarity_map(&cover).unwrap();
            for th in SWEEP_TH {
                let ind = IndicatorMatrix::from_map(&map, th);
                for k in SWEEP_K {
                    let bits = ind.capacity_bits(k);
                    let payload =
                        synth::message_bytes(method.id() as u64 * 1000 + k as u64, bits.div_ceil(8).max(1));
                    let cfg = EmbedConfig::new(k, th, method).unwrap();
                    let (stego, key) = embed(&cover, &ind, &cfg, &payload, bits).unwrap();
                    // Every sweep cell extract-verifies before being scored.
                    let back = extract(&stego, &key).unwrap();
                    assert_eq!(back.len(), bits.div_ceil(8));
                    cells.push(SweepCell {
                        method,
                        th,
                        k,
                        psnr_db: psnr(&cover, &stego).unwrap(),
                        capacity_pct: ind.capacity_percent(k),
                    });
                }
            }
        }
        cells
    })
}

#[test]
fn criterion_05_successive_k_psnr_decrements() {
    let start = Instant::now();
    let mut observed = (f64::INFINITY, f64::NEG_INFINITY);
    for method in SimilarityMethod::ALL {
        for th in SWEEP_TH {
            let ladder: Vec<f64> = sweep_cells()
                .iter()
                .filter(|c| c.method == method && c.th == th)
                .map(|c| c.psnr_db)
                .collect();
            assert_eq!(ladder.len(), 4);
            for k in 0..3 {
                let drop = ladder[k] - ladder[k + 1];
                observed = (observed.0.min(drop), observed.1.max(drop));
                assert!(
                    (5.0..=7.0).contains(&drop),
                    "{method} Th={th}: PSNR drop k={}->{} is {drop:.3} dB, outside [5, 7]",
                    k + 1,
                    k + 2
                );
            }
        }
    }
    println!("  drops span [{:.3}, {:.3}] dB", observed.0, observed.1);
    pass("criterion 05 (successive-k PSNR decrements)", start);
}

#[test]
fn criterion_06_capacity_monotone_in_threshold() {
    let start = Instant::now();
    // The sweep cover plus two contrasting covers.
    let extra = [
        synth::noise_cover(96, 96, 0xACCE_0006),
        synth::gradient_cover(96, 96),
    ];
    for method in SimilarityMethod::ALL {
        for k in SWEEP_K {
            let caps: Vec<f64> = sweep_cells()
                .iter()
                .filter(|c| c.method == method && c.k == k)
                .map(|c| c.capacity_pct)
                .collect();
            assert_eq!(caps.len(), 4);
            for w in caps.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-12,
                    "{method} k={k}: capacity grew from {} to {}",
                    w[0],
                    w[1]
                );
            }
        }
        for img in &extra {
            let ev = SimilarityEvaluator::with_defaults(method);
            let map = ev.similarity_map(img).unwrap();
            let mut prev = usize::MAX;
            for th in SWEEP_TH {
                let ones = IndicatorMatrix::from_map(&map, th).ones();
                assert!(ones <= prev, "{method}: ones grew at Th = {th}");
                prev = ones;
            }
        }
    }
    pass("criterion 06 (threshold monotonicity)", start);
}

#[test]
fn criterion_07_psnr_stays_above_the_32_db_floor() {
    let start = Instant::now();
    for cell in sweep_cells() {
        assert!(
            cell.psnr_db > 32.0,
            "{} Th={} k={}: PSNR {:.3} dB at or below the 32 dB floor",
            cell.method,
            cell.th,
            cell.k,
            cell.psnr_db
        );
    }
    pass("criterion 07 (32 dB quality floor)", start);
}

#[test]
fn criterion_08_metric_identities() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xACCE_0008);
    for trial in 0..50u64 {
        let x = synth::texture_cover(32, 32, 60.0, trial);
        assert_eq!(psnr(&x, &x).unwrap(), f64::INFINITY, "trial {trial}");
        assert!((ssim(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((uqi(&x, &x).unwrap() - 1.0).abs() < 1e-12);

        let y = synth::noise_cover(32, 32, rng.gen());
        let e = mse(&x, &y).unwrap();
        assert!(e > 0.0);
        let direct = psnr(&x, &y).unwrap();
        let from_mse = 10.0 * (255.0 * 255.0 / e).log10();
        assert!((direct - from_mse).abs() < 1e-9);
        assert_eq!(psnr_from_mse(e), direct);
    }
    pass("criterion 08 (metric identities)", start);
}

#[test]
fn criterion_09_map_determinism_and_oracle() {
    let start = Instant::now();
    // Parallel row-partitioned map against a naive per-pixel double loop
    // built directly on pair similarities, bit for bit.
    for seed in 0..4u64 {
        let img = synth::noise_cover(8, 8, 0xACCE_0009 + seed);
        let engine = InferenceEngine::standard();
        let parallel =
            SimilarityEvaluator::new(SimilarityMethod::It2Fls, engine.clone(), CacheMode::Lazy)
                .unwrap();
        let reference =
            SimilarityEvaluator::new(SimilarityMethod::It2Fls, engine, CacheMode::Off).unwrap();
        let map = parallel.similarity_map(&img).unwrap();
        for y in 0..8isize {
            for x in 0..8isize {
                let mut window = [[0u8; 3]; 9];
                let mut i = 0;
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        window[i] = img.pixel_clamped(y + dy, x + dx);
                        i += 1;
                    }
                }
                let mut pair = [[0.0f64; 9]; 9];
                for (m, row) in pair.iter_mut().enumerate() {
                    for (n, slot) in row.iter_mut().enumerate() {
                        *slot = if m == n {
                            1.0
                        } else {
                            reference
                                .pair_similarity(channel_diff(window[m], window[n]))
                                .unwrap()
                        };
                    }
                }
                let mut total = 0.0;
                for (m, row) in pair.iter().enumerate() {
                    let mut row_sum = 0.0;
                    for (n, &v) in row.iter().enumerate() {
                        if n != m {
                            row_sum += v;
                        }
                    }
                    total += row_sum / 8.0;
                }
                let naive = total / 9.0;
                assert_eq!(
                    map.get(y as usize, x as usize),
                    naive,
                    "seed {seed}, pixel ({y}, {x})"
                );
            }
        }
    }

    // Constant image -> constant map.
    let flat = RgbImage::filled(8, 8, [77, 140, 10]).unwrap();
    let ev = SimilarityEvaluator::with_defaults(SimilarityMethod::It2Fls);
    let map = ev.similarity_map(&flat).unwrap();
    assert!(map.values().iter().all(|&v| v == map.values()[0]));

    // Permutation invariance of the window similarity.
    let mut rng = StdRng::seed_from_u64(0xACCE_0109);
    for _ in 0..100 {
        let mut window = [[0u8; 3]; 9];
        for p in window.iter_mut() {
            *p = rng.gen();
        }
        let (_, s_a) = ev.window_similarity(&window).unwrap();
        let mut shuffled = window;
        for i in (1..9).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        let (_, s_b) = ev.window_similarity(&shuffled).unwrap();
        assert!((s_a - s_b).abs() < 1e-12);
    }
    pass("criterion 09 (map determinism and oracle)", start);
}

#[test]
fn criterion_10_performance_budget() {
    let _guard = timing_lock();
    let start = Instant::now();
    let cover = synth::texture_cover(512, 512, 60.0, 0xACCE_0010);

    let lazy = SimilarityEvaluator::with_defaults(SimilarityMethod::It2Fls);
    let t = Instant::now();
    let cold = lazy.similarity_map(&cover).unwrap();
    let lazy_cold = t.elapsed().as_secs_f64();
    assert!(
        lazy_cold < 60.0,
        "512x512 lazy map took {lazy_cold:.1} s, budget 60 s"
    );

    let dense = SimilarityEvaluator::new(
        SimilarityMethod::It2Fls,
        InferenceEngine::standard(),
        CacheMode::Dense,
    )
    .unwrap();
    let t = Instant::now();
    let rerun = dense.similarity_map(&cover).unwrap();
    let dense_run = t.elapsed().as_secs_f64();
    assert!(
        dense_run < 5.0,
        "512x512 dense-cache map took {dense_run:.2} s, budget 5 s"
    );
    assert_eq!(cold.values(), rerun.values());
    println!("  lazy cold {lazy_cold:.2} s, dense rerun {dense_run:.2} s");
    pass("criterion 10 (performance budget)", start);
}
