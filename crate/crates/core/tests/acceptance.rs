//! Acceptance checks. Runs without the libtest harness so that every
//! criterion prints its own PASS/FAIL line; exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jcid::channels::{
    average_params, induced_classical_channel, ChannelState, IdeParams, IdeTriple, TableMode,
};
use jcid::cli::example_curves;
use jcid::presets;
use jcid::qmath::{bell_state, boxplus, trace_norm, ComplexMatrix, ProbVec};
use jcid::regions::{
    closed_forms, detection_bound, discrimination_term, frontier_r1, frontier_r2_bruteforce, random_params,
    rate_bound, GridConfig,
};
use jcid::sim::{empirical_channel_estimate, empirical_mutual_information, quantum_measurement_sim, run_detection_trials, SimConfig};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:.2?}, limit {limit:?}"))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let p = presets::example1(0.05);
    let plain = closed_forms(16, &p).pe_min;
    let ent = closed_forms(256, &p).pe_min;
    ensure((plain - 1.0 / 32.0).abs() <= 1e-12, || format!("unentangled pe_min = {plain}"))?;
    ensure((ent - 1.0 / 512.0).abs() <= 1e-12, || format!("entangled pe_min = {ent}"))?;
    within_time(start, Duration::from_secs(1), "closed forms")?;
    Ok(format!("pe_min = {plain} (D=16), {ent} (D=256)"))
}

fn criterion_2() -> Outcome {
    let expected = [9.6, 7.5, 5.0];
    let mut parts = Vec::new();
    for (theta1, want) in presets::EXAMPLE1_THETAS.into_iter().zip(expected) {
        let start = Instant::now();
        let p = presets::example1(theta1);
        let ent = frontier_r1(256, &p, &GridConfig::default());
        let plain = closed_forms(16, &p).r_max;
        let ratio = ent.rate_at(0.0312).ok_or("entangled frontier undefined at 0.0312")? / plain;
        within_time(start, Duration::from_secs(10), "entangled frontier")?;
        ensure((ratio - want).abs() <= 0.05 * want, || format!("theta1 = {theta1}: ratio {ratio:.3}, expected {want}"))?;
        parts.push(format!("{ratio:.3}"));
    }
    Ok(format!("gain ratios {}", parts.join(", ")))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let p = presets::example1(1e-6);
    let ratio = closed_forms(256, &p).r_max / closed_forms(16, &p).r_max;
    within_time(start, Duration::from_secs(1), "closed forms")?;
    ensure((ratio - 17.0).abs() <= 0.17, || format!("ratio {ratio}"))?;
    Ok(format!("r_max ratio {ratio:.4}"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut worst: f64 = 0.0;
    for draw in 0..50 {
        let d = [2, 3, 4, 5][draw % 4];
        let p = random_params(&mut rng, d);
        let exact = frontier_r1(d, &p, &GridConfig::default());
        let brute = frontier_r2_bruteforce(d, &p, 100_000, draw as u64).map_err(|e| e.to_string())?;
        let lo = exact.pe_min().max(brute.pe_min());
        let hi = exact.pe_star().max(brute.pe_star());
        for k in 0..=400 {
            let pe = lo + (hi - lo) * k as f64 / 400.0;
            let (a, b) = (exact.rate_at(pe).unwrap_or(0.0), brute.rate_at(pe).unwrap_or(0.0));
            let gap = (a - b).abs();
            worst = worst.max(gap);
            ensure(gap <= 1e-3, || format!("draw {draw} (D={d}, {p}): gap {gap:.2e} at pe {pe}"))?;
        }
    }
    within_time(start, Duration::from_secs(120), "50 draws")?;
    Ok(format!("max rate gap {worst:.2e} over 50 draws"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let p = presets::example1(0.05);
    let mut notes = Vec::new();
    for (name, px) in [("e1", ProbVec::unit(16, 0)), ("uniform", ProbVec::uniform(16))] {
        let cfg = SimConfig::new(p.clone(), 16, px, 1_000_000, 2024).map_err(|e| e.to_string())?;
        let r = run_detection_trials(&cfg).map_err(|e| e.to_string())?;
        ensure(r.z_score() <= 4.0, || format!("{name}: empirical {} vs analytic {} (se {})", r.empirical_pd, r.analytic_pd, r.std_err))?;
        notes.push(format!("{name} z={:.2}", r.z_score()));
    }

    for dim in [16, 256] {
        let exact = induced_classical_channel(&p, dim, TableMode::PerState).map_err(|e| e.to_string())?;
        let trials = 4_000_000;
        let est = empirical_channel_estimate(&p, dim, trials, 77).map_err(|e| e.to_string())?;
        // rows are filled uniformly, so each holds about trials / (2 dim) samples
        let per_row = trials as f64 / (2 * dim) as f64;
        for s in ChannelState::BOTH {
            for x in 1..=dim {
                for y in 0..=dim {
                    let q = exact.get(y, x, s);
                    let dev = (est.get(y, x, s) - q).abs();
                    let sigma = (q * (1.0 - q) / (0.9 * per_row)).sqrt();
                    ensure(dev <= 5.0 * sigma, || format!("D={dim} cell (y={y}, x={x}, s={}) off by {dev:.2e}", s.label()))?;
                }
            }
        }
    }

    let avg = average_params(&p);
    let uniform = ProbVec::uniform(16);
    let mi = empirical_mutual_information(&p, 16, &uniform, 10_000_000, 99).map_err(|e| e.to_string())?;
    let bound = rate_bound(16, &avg, &uniform).map_err(|e| e.to_string())?;
    ensure((mi - bound).abs() <= 0.005, || format!("MI {mi} vs rate bound {bound}"))?;
    notes.push(format!("MI {mi:.5} vs {bound:.5}"));
    within_time(start, Duration::from_secs(60), "simulation")?;
    Ok(notes.join(", "))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for d in 2..=4 {
        let mut sets = vec![
            IdeParams::new(d, IdeTriple::new(0.8, 0.1, 0.1), IdeTriple::new(0.2, 0.7, 0.1), 0.5, 0.5).unwrap(),
            IdeParams::new(d, IdeTriple::IDENTITY, IdeTriple::DEPOLARIZE, 0.05, 0.5).unwrap(),
        ];
        sets.extend((0..3).map(|_| random_params(&mut rng, d)));
        for p in &sets {
            let table = induced_classical_channel(p, d * d, TableMode::PerState).map_err(|e| e.to_string())?;
            for s in ChannelState::BOTH {
                for x in 1..=d * d {
                    let born = quantum_measurement_sim(p, d, x, s).map_err(|e| e.to_string())?;
                    for (a, b) in born.values().iter().zip(table.row(x, s)) {
                        worst = worst.max((a - b).abs());
                    }
                }
            }
        }
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:.2e}"))?;
    within_time(start, Duration::from_secs(10), "Born probabilities")?;
    Ok(format!("max deviation {worst:.2e}"))
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let m = random_matrix(rng, n, n).into_inner();
    ComplexMatrix::from_inner(m.qr().q())
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    for _ in 0..50 {
        let [r1, c1, r2, c2, r3, c3]: [usize; 6] = std::array::from_fn(|_| rng.random_range(1..4));
        let a = random_matrix(&mut rng, r1, c1);
        let b = random_matrix(&mut rng, r2, c2);
        let c = random_matrix(&mut rng, r3, c3);
        ensure(boxplus(&a, &b).max_abs_diff(&boxplus(&b, &a)) == 0.0, || "boxplus not commutative".into())?;
        let left = boxplus(&boxplus(&a, &b), &c);
        let right = boxplus(&a, &boxplus(&b, &c));
        ensure(left.max_abs_diff(&right) <= 1e-15, || "boxplus not associative".into())?;
    }

    for d in 2..=5 {
        let states: Vec<_> = (0..d * d).map(|k| bell_state(d, k / d, k % d).unwrap()).collect();
        for (i, u) in states.iter().enumerate() {
            for (j, v) in states.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = u.inner_product(v);
                ensure((got - Complex64::new(want, 0.0)).norm() <= 1e-12, || format!("Bell overlap d={d} ({i},{j}) = {got}"))?;
            }
        }
    }

    for draw in 0..200 {
        let dim = rng.random_range(2..=8);
        let params = random_params(&mut rng, dim);
        let avg = average_params(&params);
        let p = random_simplex(&mut rng, dim);
        let q = random_simplex(&mut rng, dim);
        let lambda: f64 = rng.random();
        let mix: Vec<f64> = p.iter().zip(&q).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let (p, q, mix) = (
            ProbVec::with_tolerance(p, 1e-9).unwrap(),
            ProbVec::with_tolerance(q, 1e-9).unwrap(),
            ProbVec::with_tolerance(mix, 1e-9).unwrap(),
        );
        let r = |v: &ProbVec| rate_bound(dim, &avg, v).unwrap();
        let f = |v: &ProbVec| discrimination_term(dim, &params, v).unwrap();
        ensure(r(&mix) >= lambda * r(&p) + (1.0 - lambda) * r(&q) - 1e-12, || format!("draw {draw}: rate not concave"))?;
        ensure(f(&mix) <= lambda * f(&p) + (1.0 - lambda) * f(&q) + 1e-12, || format!("draw {draw}: F not convex"))?;

        let mut perm = p.values().to_vec();
        perm.rotate_left(rng.random_range(0..dim));
        perm.swap(0, dim - 1);
        let perm = ProbVec::with_tolerance(perm, 1e-9).unwrap();
        ensure((r(&perm) - r(&p)).abs() <= 1e-12, || format!("draw {draw}: rate not permutation invariant"))?;
        let pe = |v: &ProbVec| detection_bound(dim, &params, v).unwrap();
        ensure((pe(&perm) - pe(&p)).abs() <= 1e-12, || format!("draw {draw}: error not permutation invariant"))?;
    }

    for _ in 0..50 {
        let n = rng.random_range(1..=5);
        let m = random_matrix(&mut rng, n, n);
        let (u, v) = (random_unitary(&mut rng, n), random_unitary(&mut rng, n));
        let rotated = &(&u * &m) * &v;
        let (a, b) = (trace_norm(&m).unwrap(), trace_norm(&rotated).unwrap());
        ensure((a - b).abs() <= 1e-9 * a.max(1.0), || format!("trace norm not unitarily invariant: {a} vs {b}"))?;
        let side = rng.random_range(1..=3);
        let k = random_matrix(&mut rng, side, side);
        let prod = trace_norm(&m.kron(&k)).unwrap();
        let want = a * trace_norm(&k).unwrap();
        ensure((prod - want).abs() <= 1e-9 * want.max(1.0), || format!("trace norm not multiplicative: {prod} vs {want}"))?;
    }

    let grid = GridConfig::with_samples(128);
    for draw in 0..60 {
        let dim = rng.random_range(2..=6);
        let mut params = random_params(&mut rng, dim);
        if draw % 3 == 0 {
            // equal weighted slopes: the likelihood lines never cross
            let (w1, w2) = (params.pi(ChannelState::One), params.pi(ChannelState::Two));
            let a2 = rng.random::<f64>() * (w1 / w2).min(1.0);
            let a1 = w2 * a2 / w1;
            let b1 = rng.random::<f64>() * (1.0 - a1);
            let b2 = rng.random::<f64>() * (1.0 - a2);
            let (s1, s2) = (IdeTriple::new(a1, b1, 1.0 - a1 - b1), IdeTriple::new(a2, b2, 1.0 - a2 - b2));
            params = params.with_states(s1, s2).map_err(|e| e.to_string())?;
        }
        let cf = closed_forms(dim, &params);
        let f = frontier_r1(dim, &params, &grid);
        let flat = (f.pe_star() - f.pe_min()).abs() <= 1e-12;
        ensure(cf.no_tradeoff == flat, || format!("draw {draw} ({params}): no_tradeoff {} but frontier spans [{}, {}]", cf.no_tradeoff, f.pe_min(), f.pe_star()))?;
    }

    within_time(start, Duration::from_secs(60), "property suite")?;
    Ok("boxplus, Bell basis, concavity/convexity, permutation, trace norm, no-tradeoff".into())
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

fn criterion_8() -> Outcome {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for id in 1..=3u32 {
        let dir = out.path().join(format!("example{id}"));
        let status = Command::new(env!("CARGO_BIN_EXE_jcid"))
            .args(["example", &id.to_string(), "--out"])
            .arg(&dir)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || format!("example {id} exited with {}", status.status))?;
        let files = example_curves(id, &GridConfig::with_samples(2)).map_err(|e| e.to_string())?;
        for c in files {
            let golden = golden_dir().join(format!("example{id}")).join(&c.file);
            let want = std::fs::read(&golden).map_err(|e| format!("{}: {e}", golden.display()))?;
            let got = std::fs::read(dir.join(&c.file)).map_err(|e| e.to_string())?;
            ensure(want == got, || format!("{} differs from golden", c.file))?;
            compared += 1;
        }
        ensure(dir.join("manifest.json").is_file(), || format!("example {id} wrote no manifest"))?;
    }
    Ok(format!("{compared} curves byte-identical"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "example-1 detection thresholds", criterion_1),
        (2, "entanglement rate-gain factors", criterion_2),
        (3, "d+1 rate-gain limit", criterion_3),
        (4, "two-value vs brute-force regions", criterion_4),
        (5, "simulation agreement", criterion_5),
        (6, "quantum/classical consistency", criterion_6),
        (7, "property suites", criterion_7),
        (8, "golden curves", criterion_8),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {id} ({name}): PASS [{took:.2?}] {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL [{took:.2?}] {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
