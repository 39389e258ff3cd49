//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any failed.

use std::f64::consts::TAU;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use synthseries::io::dataset::{for_each_batch, generate_dataset, DatasetFormat, GenerateOptions};
use synthseries::io::shard::encode_record;
use synthseries::io::stream::{stream_unlimited, StreamConfig};
use synthseries::labels::{denormalize_params, normalize_params, LabelSchema};
use synthseries::metrics::{dft_magnitude, dtw, histogram_distance, mse, ssim, structural_dissimilarity};
use synthseries::noise::{sample_noise_spec, total_variation, trace_noise, NoiseDistribution};
use synthseries::rhythm::{frequency_bounds, sample_rhythm_params, SineCountRange};
use synthseries::rng::seeded_rng;
use synthseries::trend::TrendSpec;
use synthseries::{compose, synthesize, EngineConfig};

// Tolerances.
const RATIO_TOL: f64 = 1e-12;
const COMPOSE_TOL: f64 = 1e-12;
const LABEL_CONTINUOUS_TOL: f64 = 1e-9;
const SSIM_TOL: f64 = 1e-9;
const HISTOGRAM_TOL: f64 = 1e-12;
const DFT_TOL: f64 = 1e-9;
const PARSEVAL_REL_TOL: f64 = 1e-6;
const SDL_IDENTITY_TOL: f64 = 1e-12;
const KS_MAX: f64 = 0.02;
const TV_SLACK: f64 = 1e-12;
const BOUNDS_RUNTIME: Duration = Duration::from_secs(30);
const THROUGHPUT_LIMIT: Duration = Duration::from_secs(300);
const MIN_SPEEDUP: f64 = 3.0;

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- oracles

/// Minimum cost over every monotone warping path, by exhaustive enumeration.
fn dtw_oracle(a: &[f64], b: &[f64], band: Option<usize>) -> f64 {
    fn walk(a: &[f64], b: &[f64], band: usize, i: usize, j: usize, acc: f64, best: &mut f64) {
        if i.abs_diff(j) > band {
            return;
        }
        let acc = acc + (a[i] - b[j]).abs();
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, band, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, band, i, j + 1, acc, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, band, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, band.unwrap_or(usize::MAX), 0, 0, 0.0, &mut best);
    best
}

/// Mean over windows of SSIM written from raw moments.
fn ssim_oracle(a: &[f64], b: &[f64], win: usize) -> f64 {
    let c1 = (0.01f64 * 2.0).powi(2);
    let c2 = (0.03f64 * 2.0).powi(2);
    let mut total = 0.0;
    let positions = a.len() - win + 1;
    for p in 0..positions {
        let (x, y) = (&a[p..p + win], &b[p..p + win]);
        let w = win as f64;
        let ex = x.iter().sum::<f64>() / w;
        let ey = y.iter().sum::<f64>() / w;
        let exx = x.iter().map(|v| v * v).sum::<f64>() / w;
        let eyy = y.iter().map(|v| v * v).sum::<f64>() / w;
        let exy = x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>() / w;
        let (vx, vy, cxy) = (exx - ex * ex, eyy - ey * ey, exy - ex * ey);
        total += (2.0 * ex * ey + c1) * (2.0 * cxy + c2) / ((ex * ex + ey * ey + c1) * (vx + vy + c2));
    }
    total / positions as f64
}

/// Bins by scanning explicit edges.
fn histogram_oracle(a: &[f64], b: &[f64], bins: usize) -> f64 {
    let lo = a.iter().chain(b).cloned().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return 0.0;
    }
    let edges: Vec<f64> = (0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect();
    let hist = |xs: &[f64]| {
        let mut h = vec![0.0; bins];
        for &x in xs {
            let mut k = 0;
            while k + 1 < bins && x >= edges[k + 1] {
                k += 1;
            }
            h[k] += 1.0;
        }
        h.iter().map(|c| c / xs.len() as f64).collect::<Vec<f64>>()
    };
    hist(a).iter().zip(hist(b)).map(|(x, y)| (x - y).abs()).sum()
}

/// Naive one-sided DFT magnitude.
fn dft_oracle(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, x) in a.iter().enumerate() {
                let angle = TAU * ((k * t) % n) as f64 / n as f64;
                re += x * angle.cos();
                im -= x * angle.sin();
            }
            re.hypot(im)
        })
        .collect()
}

fn ks_uniform(samples: &mut [f64], lo: f64, hi: f64) -> f64 {
    samples.sort_unstable_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
            (cdf - i as f64 / n).max((i + 1) as f64 / n - cdf)
        })
        .fold(0.0, f64::max)
}

fn random_series(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

// ---------------------------------------------------------------- criteria

fn determinism() -> Check {
    let run = |dir: &Path| {
        let mut opts = GenerateOptions::new(7, 1000, 256, DatasetFormat::Bin);
        opts.workers = 1;
        generate_dataset(&opts, dir).map_err(|e| e.to_string())
    };
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let m1 = run(d1.path())?;
    let m2 = run(d2.path())?;
    ensure(m1.files == m2.files, || "manifests list different shard checksums".into())?;
    let mut bytes = 0;
    for f in &m1.files {
        let a = fs::read(d1.path().join(&f.file)).unwrap();
        let b = fs::read(d2.path().join(&f.file)).unwrap();
        ensure(a == b, || format!("{} differs between runs", f.file))?;
        bytes += a.len();
    }

    let cfg = StreamConfig::new(7, 200, 256);
    let epoch = |epochs: &[u64]| {
        let mut out = Vec::new();
        stream_unlimited(&cfg, epochs.to_vec(), &mut out).map(|_| out).map_err(|e| e.to_string())
    };
    let once = epoch(&[3])?;
    let again = epoch(&[3])?;
    let after_other = epoch(&[2, 3])?;
    ensure(once == again, || "epoch 3 replay differs".into())?;
    ensure(after_other.ends_with(&once), || "epoch 3 depends on the epochs streamed before it".into())?;
    Ok(format!(
        "{} shard file(s), {bytes} bytes identical; epoch replay {} bytes identical",
        m1.files.len(),
        once.len()
    ))
}

fn frequency_bounds_check() -> Check {
    let n = 256;
    let start = Instant::now();
    let (f_min, f_max) = frequency_bounds(n, 1.0).map_err(|e| e.to_string())?;
    ensure(f_min == 1.0 / 256.0 && f_max == 0.5, || format!("bounds ({f_min}, {f_max})"))?;
    let mut freqs = Vec::new();
    for i in 0..100_000u64 {
        let p = sample_rhythm_params(n, &mut seeded_rng(11, i), SineCountRange::default()).map_err(|e| e.to_string())?;
        for c in &p.components {
            ensure((f_min..=f_max).contains(&c.frequency), || {
                format!("sample {i}: frequency {} outside [{f_min}, {f_max}]", c.frequency)
            })?;
            freqs.push(c.frequency);
        }
    }
    let total = freqs.len();
    let ks = ks_uniform(&mut freqs, f_min, f_max);
    let elapsed = start.elapsed();
    ensure(ks < KS_MAX, || format!("KS {ks:.5} >= {KS_MAX}"))?;
    ensure(elapsed < BOUNDS_RUNTIME, || format!("took {elapsed:.1?}"))?;
    Ok(format!("{total} frequencies in bounds, KS {ks:.5}, {elapsed:.2?}"))
}

fn mixing_exactness() -> Check {
    let config = EngineConfig::default();
    let mut worst_sum: f64 = 0.0;
    let mut worst_mix: f64 = 0.0;
    for i in 0..10_000u64 {
        let s = synthesize(3, i, 128, &config).map_err(|e| e.to_string())?;
        let r = s.params.ratios;
        let sum_err = (r.rhythm + r.noise + r.trend - 1.0).abs();
        worst_sum = worst_sum.max(sum_err);
        ensure(sum_err <= RATIO_TOL, || format!("sample {i}: ratio sum off by {sum_err:e}"))?;
        let recomposed = compose(&s.rhythm, &s.noise, &s.trend, &r).map_err(|e| e.to_string())?;
        for t in 0..s.composite.len() {
            let direct = r.rhythm * s.rhythm[t] + r.noise * s.noise[t] + r.trend * s.trend[t];
            let err = (recomposed[t] - s.composite[t]).abs().max((direct - s.composite[t]).abs());
            worst_mix = worst_mix.max(err);
            ensure(err <= COMPOSE_TOL, || format!("sample {i}, t={t}: composite off by {err:e}"))?;
        }
    }
    Ok(format!("10000 samples; max |sum-1| {worst_sum:e}, max mix error {worst_mix:e}"))
}

fn label_round_trip() -> Check {
    let mut worst: f64 = 0.0;
    let mut smoothed = 0;
    for i in 0..10_000u64 {
        let n = [64, 256, 1000][(i % 3) as usize];
        let config = EngineConfig {
            k_range: SineCountRange { min: 1 + (i % 3) as usize, max: 10 },
            ..EngineConfig::default()
        };
        let schema = LabelSchema::from_config(&config);
        let p = synthesize(5, i, n, &config).map_err(|e| e.to_string())?.params;
        let m = normalize_params(&p, &schema).map_err(|e| e.to_string())?;
        let est = denormalize_params(&m, &schema).map_err(|e| e.to_string())?;
        let fail = |what: &str| format!("sample {i} (N={n}): {what}");

        ensure(est.sine_count == p.rhythm.sine_count(), || fail("sine count"))?;
        ensure(est.sines.len() == p.rhythm.components.len(), || fail("occupied slots"))?;
        let mut cont = vec![];
        for (e, t) in est.sines.iter().zip(&p.rhythm.components) {
            cont.extend([(e.frequency, t.frequency), (e.amplitude, t.amplitude), (e.phase, t.phase)]);
        }
        ensure(est.noise_distribution == p.noise.distribution, || fail("distribution"))?;
        ensure(est.noise_category == p.noise.category(), || fail("category"))?;
        ensure(est.invert == p.noise.invert, || fail("invert flag"))?;
        ensure(est.noise_kernel == p.noise.smooth_kernel, || fail("noise kernel"))?;
        ensure(est.trend_method == p.trend.method(), || fail("trend method"))?;
        ensure(est.noise_params.len() == p.noise.params.len(), || fail("parameter count"))?;
        cont.extend(est.noise_params.iter().copied().zip(p.noise.params.iter().copied()));
        match &p.trend {
            TrendSpec::MultiSine { period_multiplier, .. } => {
                let m = est.period_multiplier.ok_or_else(|| fail("missing period multiplier"))?;
                cont.push((m, *period_multiplier));
            }
            TrendSpec::SmoothedNoise { inner } => {
                smoothed += 1;
                ensure(est.trend_kernel == Some(inner.smooth_kernel), || fail("trend kernel"))?;
            }
        }
        let (er, tr) = (est.ratios.as_array(), p.ratios.as_array());
        cont.extend(er.into_iter().zip(tr));
        for (e, t) in cont {
            let err = (e - t).abs();
            worst = worst.max(err);
            ensure(err <= LABEL_CONTINUOUS_TOL, || fail(&format!("continuous field off by {err:e}")))?;
        }
    }
    Ok(format!("10000 param sets ({smoothed} smoothed-noise trends), max continuous error {worst:e}"))
}

fn metric_oracles() -> Check {
    let mut rng = seeded_rng(99, 0);
    let mut banded = 0;
    for pair in 0..500 {
        let (la, lb) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let (a, b) = (random_series(&mut rng, la), random_series(&mut rng, lb));
        let got = dtw(&a, &b, None).map_err(|e| e.to_string())?;
        let want = dtw_oracle(&a, &b, None);
        ensure(got == want, || format!("dtw pair {pair}: {got} != oracle {want}"))?;
        let band = rng.random_range(la.abs_diff(lb)..=8);
        let got = dtw(&a, &b, Some(band)).map_err(|e| e.to_string())?;
        let want = dtw_oracle(&a, &b, Some(band));
        ensure(got == want, || format!("banded dtw pair {pair}: {got} != oracle {want}"))?;
        banded += 1;
    }

    let mut ssim_worst: f64 = 0.0;
    for pair in 0..500 {
        let win = [3, 5, 7, 11, 11, 11][pair % 6];
        let len = rng.random_range(win..=96);
        let a = random_series(&mut rng, len);
        let b: Vec<f64> = if pair % 2 == 0 {
            a.iter().map(|v| (v + rng.random_range(-0.3..0.3f64)).clamp(-1.0, 1.0)).collect()
        } else {
            random_series(&mut rng, len)
        };
        let got = ssim(&a, &b, win).map_err(|e| e.to_string())?;
        let want = ssim_oracle(&a, &b, win);
        let sdl = structural_dissimilarity(&a, &b, win).map_err(|e| e.to_string())?;
        let err = (got - want).abs().max((sdl - (1.0 - want)).abs());
        ssim_worst = ssim_worst.max(err);
        ensure(err <= SSIM_TOL, || format!("ssim pair {pair}: off by {err:e}"))?;
    }

    let mut hist_worst: f64 = 0.0;
    for pair in 0..500 {
        let bins = [2, 8, 32, 32, 100][pair % 5];
        let (la, lb) = (rng.random_range(1..200), rng.random_range(1..200));
        let a = random_series(&mut rng, la);
        let b: Vec<f64> = random_series(&mut rng, lb).iter().map(|v| 0.5 * v + 0.3).collect();
        let got = histogram_distance(&a, &b, bins).map_err(|e| e.to_string())?;
        let want = histogram_oracle(&a, &b, bins);
        let err = (got - want).abs();
        hist_worst = hist_worst.max(err);
        ensure(err <= HISTOGRAM_TOL, || format!("histogram pair {pair}: {got} vs {want}"))?;
    }

    let (mut dft_worst, mut parseval_worst): (f64, f64) = (0.0, 0.0);
    for case in 0..200 {
        let len = rng.random_range(1..=300);
        let a = random_series(&mut rng, len);
        let got = dft_magnitude(&a);
        let want = dft_oracle(&a);
        ensure(got.len() == len / 2 + 1, || format!("dft case {case}: {} bins", got.len()))?;
        for (g, w) in got.iter().zip(&want) {
            let err = (g - w).abs();
            dft_worst = dft_worst.max(err);
            ensure(err <= DFT_TOL, || format!("dft case {case} (N={len}): off by {err:e}"))?;
        }
        // One-sided Parseval: interior bins stand for a conjugate pair.
        let energy: f64 = a.iter().map(|v| v * v).sum();
        let spectral: f64 = got
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let paired = k != 0 && !(len % 2 == 0 && k == len / 2);
                m * m * if paired { 2.0 } else { 1.0 }
            })
            .sum::<f64>()
            / len as f64;
        let rel = (spectral - energy).abs() / energy.max(f64::MIN_POSITIVE);
        parseval_worst = parseval_worst.max(rel);
        ensure(rel <= PARSEVAL_REL_TOL, || format!("parseval case {case}: relative error {rel:e}"))?;
    }
    Ok(format!(
        "dtw 500+{banded} exact; ssim max err {ssim_worst:e}; histogram max err {hist_worst:e}; dft max err {dft_worst:e}; parseval max rel {parseval_worst:e}"
    ))
}

fn identity_suite() -> Check {
    let mut rng = seeded_rng(123, 0);
    let config = EngineConfig::default();
    let mut worst_sdl: f64 = 0.0;
    for i in 0..1000u64 {
        let a: Vec<f64> = if i % 2 == 0 {
            synthesize(8, i, rng.random_range(11..=300), &config).map_err(|e| e.to_string())?.composite.into_values()
        } else {
            let len = rng.random_range(11..=300);
            random_series(&mut rng, len)
        };
        let m = mse(&a, &a).map_err(|e| e.to_string())?;
        let d = dtw(&a, &a, None).map_err(|e| e.to_string())?;
        let h = histogram_distance(&a, &a, 32).map_err(|e| e.to_string())?;
        let s = structural_dissimilarity(&a, &a, 11).map_err(|e| e.to_string())?;
        ensure(m == 0.0 && d == 0.0 && h == 0.0, || format!("window {i}: mse {m}, dtw {d}, dh {h}"))?;
        worst_sdl = worst_sdl.max(s.abs());
        ensure(s.abs() <= SDL_IDENTITY_TOL, || format!("window {i}: sdl {s:e}"))?;
    }
    Ok(format!("1000 windows; mse/dtw/dh exactly 0, max |sdl| {worst_sdl:e}"))
}

fn noise_pipeline() -> Check {
    let mut seen = [0usize; 15];
    let mut tv_checks = 0;
    for i in 0..15_000u64 {
        let n = [16, 64, 256][(i % 3) as usize];
        let spec = sample_noise_spec(n, &mut seeded_rng(21, i), 0.05).map_err(|e| e.to_string())?;
        seen[spec.distribution.index()] += 1;
        let trace = trace_noise(&spec, n, &mut seeded_rng(22, i)).map_err(|e| e.to_string())?;
        ensure(trace.output.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)), || {
            format!("draw {i} ({}): output leaves [0, 1] or is not finite", spec.distribution)
        })?;
        let (before, after) = (total_variation(&trace.oriented), total_variation(&trace.smoothed));
        ensure(after <= before + TV_SLACK, || {
            format!("draw {i} ({}): smoothing raised total variation {before} -> {after}", spec.distribution)
        })?;
        tv_checks += 1;
    }
    let missing: Vec<&str> = NoiseDistribution::ALL
        .iter()
        .filter(|d| seen[d.index()] == 0)
        .map(|d| d.name())
        .collect();
    ensure(missing.is_empty(), || format!("never drawn: {missing:?}"))?;
    let (lo, hi) = (seen.iter().min().unwrap(), seen.iter().max().unwrap());
    Ok(format!("15 of 15 distributions drawn (per-distribution {lo}..{hi}); {tv_checks} outputs in [0, 1], TV non-increasing"))
}

fn trend_separation() -> Check {
    let config = EngineConfig::default();
    let (mut multi, mut smooth) = (0, 0);
    for i in 0..10_000u64 {
        let n = [32, 100, 256, 1000][(i % 4) as usize];
        let p = synthesize(17, i, n, &config).map_err(|e| e.to_string())?.params;
        let nf = n as f64;
        ensure(p.noise.smooth_kernel as f64 <= 0.05 * nf, || {
            format!("sample {i} (N={n}): noise kernel {}", p.noise.smooth_kernel)
        })?;
        match &p.trend {
            TrendSpec::MultiSine { components, .. } => {
                multi += 1;
                for c in components {
                    ensure(c.frequency < 1.0 / nf, || format!("sample {i} (N={n}): trend frequency {}", c.frequency))?;
                }
            }
            TrendSpec::SmoothedNoise { inner } => {
                smooth += 1;
                ensure(inner.smooth_kernel as f64 >= 0.2 * nf, || {
                    format!("sample {i} (N={n}): trend kernel {}", inner.smooth_kernel)
                })?;
            }
        }
    }
    Ok(format!("10000 samples: {multi} multi-sine below 1/N, {smooth} smoothed-noise with kernel >= 0.2N, noise kernels <= 0.05N"))
}

fn time_generation(count: u64, workers: usize) -> std::result::Result<Duration, String> {
    let config = EngineConfig::default();
    let mut buf = Vec::new();
    let mut produced = 0u64;
    let start = Instant::now();
    for_each_batch(42, count, 256, &config, workers, |batch| {
        for s in batch {
            buf.clear();
            encode_record(s, &mut buf);
        }
        produced += batch.len() as u64;
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(produced == count, || format!("produced {produced} of {count}"))?;
    Ok(elapsed)
}

fn throughput_single() -> Check {
    let t1 = time_generation(200_000, 1)?;
    ensure(t1 < THROUGHPUT_LIMIT, || format!("200000 samples took {t1:.1?}"))?;
    Ok(format!("200000 samples with labels in {t1:.1?} on 1 worker"))
}

fn throughput_scaling() -> Check {
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let t1 = time_generation(200_000, 1)?;
    let t4 = time_generation(200_000, 4)?;
    let speedup = t1.as_secs_f64() / t4.as_secs_f64();
    let detail = format!("1 worker {t1:.1?}, 4 workers {t4:.1?}, speedup {speedup:.2}x, {cores} core(s) available");
    ensure(speedup >= MIN_SPEEDUP, || detail.clone())?;
    Ok(detail)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("determinism", determinism),
        ("frequency bounds", frequency_bounds_check),
        ("ratio and mixing exactness", mixing_exactness),
        ("label round trip", label_round_trip),
        ("metric oracles", metric_oracles),
        ("metric identity", identity_suite),
        ("noise pipeline", noise_pipeline),
        ("trend separation", trend_separation),
        ("throughput, single worker", throughput_single),
        ("throughput, 4-worker scaling", throughput_scaling),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
