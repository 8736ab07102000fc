//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use bandlab_cli::dist_file::load_distribution;
use bandlab_cli::report::build_case_study;
use bandlab_core::{
    apply_to_dist, entropy, run_comparison, sample, top_b_bandwidth, truncate_epsilon,
    truncate_eta, truncate_min_p, truncate_relative_band, truncate_top_b, truncate_top_k,
    truncate_top_p, EntropyReport, ProbDist, ProcessConfig, StrategyConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:.2?}, limit {limit:.0?}")
    })
}

fn case_study_percentages() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (file, base, printed) in [
        ("email.json", 0.35, &[52.9, 25.0, 22.1][..]),
        ("describe.json", 0.3, &[56.2, 43.8][..]),
    ] {
        let dist = load_distribution(&root().join("fixtures/golden").join(file))
            .map_err(|e| e.to_string())?;
        let study = build_case_study(&dist, &[StrategyConfig::top_b(base)], 3)
            .map_err(|e| e.to_string())?;
        let row = &study.rows[0];
        ensure(row.support_size == printed.len(), || {
            format!("{file}: support {} != {}", row.support_size, printed.len())
        })?;
        for (t, want) in row.tokens.iter().zip(printed) {
            let diff = (t.renormalized_pct - want).abs();
            worst = worst.max(diff);
            ensure(diff <= 0.2, || {
                format!("{file}: {:.3} vs {want}", t.renormalized_pct)
            })?;
        }
    }
    let elapsed = start.elapsed();
    within_time(elapsed, Duration::from_secs(1))?;
    Ok(format!("max deviation {worst:.3} pp, {elapsed:.2?}"))
}

fn bandwidth_asymptotes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let base: f64 = rng.random_range(1e-6..1.0);
        let n = rng.random_range(2..100_000);
        let at_zero = top_b_bandwidth(&EntropyReport::from_entropy(0.0, n), base)
            .map_err(|e| e.to_string())?;
        let h_max = entropy(&ProbDist::uniform(n).map_err(|e| e.to_string())?);
        let at_max = top_b_bandwidth(&h_max, base).map_err(|e| e.to_string())?;
        let d0 = (at_zero.raw_bandwidth - base).abs();
        let d1 = (at_max.raw_bandwidth - 2.0 * base).abs();
        worst = worst.max(d0).max(d1);
        ensure(d0 <= 1e-12 && d1 <= 1e-12, || {
            format!("base {base}, n {n}: {d0:e} / {d1:e}")
        })?;
    }
    Ok(format!("100 bases, max deviation {worst:e}"))
}

fn uniform_entropy_is_maximal() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst: f64 = 0.0;
    let mut buf = Vec::with_capacity(4096);
    for n in 2..=4096usize {
        let h_uniform = entropy(&ProbDist::uniform(n).map_err(|e| e.to_string())?).entropy;
        let dev = (h_uniform - (n as f64).ln()).abs();
        worst = worst.max(dev);
        ensure(dev <= 1e-12, || format!("n {n}: |H - ln n| = {dev:e}"))?;
        let u = 1.0 / n as f64;
        for trial in 0..1000 {
            buf.clear();
            buf.resize(n, u);
            if trial % 2 == 0 {
                // Move mass between two tokens.
                let i = rng.random_range(0..n);
                let j = (i + rng.random_range(1..n)) % n;
                let delta = u * rng.random_range(1e-3..1.0);
                buf[i] -= delta;
                buf[j] += delta;
            } else {
                // Multiplicative noise on every token.
                let eps: f64 = rng.random_range(0.01..1.0);
                for x in buf.iter_mut() {
                    *x *= 1.0 + eps * rng.random::<f64>();
                }
                let total: f64 = buf.iter().sum();
                buf.iter_mut().for_each(|x| *x /= total);
            }
            let h = entropy(&ProbDist::new(buf.clone()).map_err(|e| e.to_string())?).entropy;
            ensure(h < h_uniform, || {
                format!("n {n}, trial {trial}: {h} >= {h_uniform}")
            })?;
        }
    }
    Ok(format!(
        "n = 2..4096, max |H - ln n| {worst:e}, 4095000 perturbations below, {:.1?}",
        start.elapsed()
    ))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let names = [
        "top-b",
        "top-k",
        "top-p",
        "min-p",
        "epsilon",
        "eta",
        "temperature",
    ];
    for (s, name) in names.iter().enumerate() {
        for case in 0..1000 {
            let n = rng.random_range(1..=64);
            let p = oracle::random_dist(&mut rng, n);
            let dist = ProbDist::new(p.clone()).map_err(|e| e.to_string())?;
            let (got, want) = match s {
                0 => {
                    let b = rng.random_range(0.001..0.999);
                    (truncate_top_b(&dist, b, 1.0), oracle::top_b(&p, b))
                }
                1 => {
                    let k = rng.random_range(1..=70);
                    (truncate_top_k(&dist, k), oracle::top_k(&p, k))
                }
                2 => {
                    let top = rng.random_range(0.01..=1.0);
                    (truncate_top_p(&dist, top), oracle::top_p(&p, top))
                }
                3 => {
                    let a = rng.random_range(0.001..=1.0);
                    (truncate_min_p(&dist, a), oracle::min_p(&p, a))
                }
                4 => {
                    let e = rng.random_range(1e-4..0.5);
                    (truncate_epsilon(&dist, e), oracle::epsilon(&p, e))
                }
                5 => {
                    let e = rng.random_range(1e-4..0.999);
                    (truncate_eta(&dist, e), oracle::eta(&p, e))
                }
                _ => (
                    apply_to_dist(&StrategyConfig::temperature_only(1.0), &dist),
                    oracle::full(&p),
                ),
            };
            let got = got.map_err(|e| e.to_string())?.sorted_support();
            ensure(got == want, || {
                format!("{name} case {case}: {got:?} != {want:?} on {p:?}")
            })?;
        }
    }
    let elapsed = start.elapsed();
    within_time(elapsed, Duration::from_secs(10))?;
    Ok(format!("7 strategies x 1000 distributions, {elapsed:.2?}"))
}

fn top_b_matches_min_p() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for case in 0..1000 {
        let n = rng.random_range(1..=64);
        let dist = ProbDist::new(oracle::random_dist(&mut rng, n)).map_err(|e| e.to_string())?;
        let b: f64 = rng.random_range(0.001..1.0);
        let band = truncate_relative_band(&dist, b).map_err(|e| e.to_string())?;
        let min_p = truncate_min_p(&dist, 1.0 - b).map_err(|e| e.to_string())?;
        ensure(band.support == min_p.support, || {
            format!("case {case}, B {b}")
        })?;
    }
    Ok("1000 pairs identical".into())
}

fn monotone_in_bandwidth() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for case in 0..1000 {
        let n = rng.random_range(1..=64);
        let dist = ProbDist::new(oracle::random_dist(&mut rng, n)).map_err(|e| e.to_string())?;
        for ladder in 0..10 {
            let mut bws: Vec<f64> = (0..10).map(|_| rng.random_range(0.001..=1.0)).collect();
            bws.sort_by(f64::total_cmp);
            let mut prev: Vec<usize> = Vec::new();
            for b in bws {
                let s = truncate_relative_band(&dist, b)
                    .map_err(|e| e.to_string())?
                    .sorted_support();
                ensure(prev.iter().all(|i| s.contains(i)), || {
                    format!("case {case} ladder {ladder}: support shrank at {b}")
                })?;
                prev = s;
            }
        }
    }
    Ok("1000 distributions x 10 ladders".into())
}

fn peaked_reference() -> Result<ProcessConfig, String> {
    let text = std::fs::read_to_string(root().join("configs/peaked_reference.json"))
        .map_err(|e| e.to_string())?;
    let process: ProcessConfig = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    ensure(
        process.vocab_size == 32 && process.steps == 200 && process.sharpness == 3.0,
        || format!("unexpected reference config {process:?}"),
    )?;
    Ok(process)
}

fn top_b_vs_top_p() -> Result<(bandlab_core::RunSummary, bandlab_core::RunSummary), String> {
    let process = peaked_reference()?;
    let mut out = run_comparison(
        &process,
        &[StrategyConfig::top_b(0.3), StrategyConfig::top_p(0.9)],
        32,
    )
    .map_err(|e| e.to_string())?;
    let top_p = out.pop().unwrap();
    let top_b = out.pop().unwrap();
    Ok((top_b, top_p))
}

fn entropy_and_branching_ordering() -> Outcome {
    let (b, p) = top_b_vs_top_p()?;
    let (hb, hp) = (b.mean_entropy.mean, p.mean_entropy.mean);
    let (gb, gp) = (
        b.geometric_mean_branching.mean,
        p.geometric_mean_branching.mean,
    );
    ensure(hb < hp, || format!("entropy {hb} !< {hp}"))?;
    ensure(gb < gp, || format!("branching {gb} !< {gp}"))?;
    Ok(format!(
        "entropy {hb:.4} < {hp:.4}, branching {gb:.3} < {gp:.3}"
    ))
}

fn agreement_variance_ordering() -> Outcome {
    let (b, p) = top_b_vs_top_p()?;
    let (vb, vp) = (
        b.mode_agreement_rate.variance,
        p.mode_agreement_rate.variance,
    );
    ensure(vb <= vp, || format!("variance {vb:e} > {vp:e}"))?;
    Ok(format!("variance {vb:e} <= {vp:e}"))
}

fn binary_output(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_bandlab"))
        .args(args)
        .env_remove("BANDLAB_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        String::from_utf8_lossy(&out.stderr).into_owned()
    })?;
    Ok(out.stdout)
}

fn cli_determinism() -> Outcome {
    let peaked = root().join("configs/peaked_reference.json");
    let mixed = root().join("configs/mixed_reference.json");
    let (peaked, mixed) = (peaked.to_str().unwrap(), mixed.to_str().unwrap());
    let runs: [&[&str]; 4] = [
        &["trajectory", peaked, "--seed", "11"],
        &["trajectory", mixed, "--seed", "5", "--strategy", "eta"],
        &["compare", peaked],
        &[
            "compare",
            mixed,
            "--strategy",
            "top-b,top-p,min-p",
            "--seeds",
            "8",
        ],
    ];
    for args in runs {
        let a = binary_output(args)?;
        let b = binary_output(args)?;
        ensure(!a.is_empty() && a == b, || {
            format!("{args:?} differs between runs")
        })?;
    }
    Ok("trajectory and compare byte-identical".into())
}

fn sampling_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let dist = ProbDist::new(vec![0.35, 0.25, 0.15, 0.1, 0.08, 0.04, 0.02, 0.01])
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for config in [
        StrategyConfig::temperature_only(1.0),
        StrategyConfig::top_p(0.9),
        StrategyConfig::top_b(0.4),
    ] {
        let r = apply_to_dist(&config, &dist).map_err(|e| e.to_string())?;
        let draws = 1_000_000;
        let mut counts = vec![0usize; dist.len()];
        for _ in 0..draws {
            counts[sample(&r, &mut rng)] += 1;
        }
        for (pos, &token) in r.support.iter().enumerate() {
            let freq = counts[token] as f64 / draws as f64;
            let diff = (freq - r.renormalized[pos]).abs();
            worst = worst.max(diff);
            ensure(diff <= 0.002, || {
                format!(
                    "{}: token {token} {freq} vs {}",
                    config.name(),
                    r.renormalized[pos]
                )
            })?;
        }
        let outside: usize = (0..dist.len())
            .filter(|t| !r.contains(*t))
            .map(|t| counts[t])
            .sum();
        ensure(outside == 0, || {
            format!("{}: {outside} draws outside the support", config.name())
        })?;
    }
    Ok(format!(
        "3 strategies x 1e6 draws, max deviation {worst:.5}"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("case-study renormalization", case_study_percentages),
        ("bandwidth asymptotes", bandwidth_asymptotes),
        ("uniform entropy is maximal", uniform_entropy_is_maximal),
        ("oracle equivalence", oracle_equivalence),
        ("frozen top-b equals min-p", top_b_matches_min_p),
        ("bandwidth monotonicity", monotone_in_bandwidth),
        (
            "entropy and branching ordering",
            entropy_and_branching_ordering,
        ),
        (
            "mode-agreement variance ordering",
            agreement_variance_ordering,
        ),
        ("cli determinism", cli_determinism),
        ("sampling fidelity", sampling_fidelity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
