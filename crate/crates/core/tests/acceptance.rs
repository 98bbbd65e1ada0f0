//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rhc::baseline::{float_curve, scatter_curve, thermometer_curve};
use rhc::experiment::{capacity_experiment, moduli_near, CapacitySweep, DecodeExperiment, SubIntegerExperiment};
use rhc::hex::{code_entropy, hex_state_count, hex_state_count_brute_force, square_state_count, HexSystem};
use rhc::kernel::{analytic_kernel, empirical_kernel, grid, sinc_comb};
use rhc::resonator::{sub_integer_decode, ResonatorConfig};
use rhc::scene::{scene_experiment, FactorMode, SceneExperiment};
use rhc::subset_sum::{brute_force, default_moduli, independent_restart_success, SubsetBenchmark};
use rhc::{Execution, ModulusBase, ResidueSystem, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn restarting() -> ResonatorConfig {
    ResonatorConfig { max_restarts: 10, ..Default::default() }
}

fn exact_algebra() -> Result<Outcome> {
    let sys = ResidueSystem::new(&[3, 5, 7], 256, 101, true)?;
    let codes: Vec<_> = (0..105).map(|x| sys.encode_exact(x)).collect();
    let factors: Vec<_> = (0..105).map(|x| sys.encode_factors(x)).collect();
    let mut bad = 0usize;
    for a in 0..105 {
        for b in 0..105 {
            bad += usize::from(codes[a].hadamard(&codes[b])? != codes[(a + b) % 105]);
            bad += usize::from(sys.multiply_factors(&factors[a], &factors[b])? != codes[(a * b) % 105]);
        }
    }
    let small = codes[2].hadamard(&codes[3])? == codes[5] && sys.multiply_factors(&factors[2], &factors[3])? == codes[6];
    outcome(
        bad == 0 && small,
        format!("{bad} mismatches over 2×105² add/multiply pairs; 2+3=5 and 2·3=6 {}", if small { "ok" } else { "wrong" }),
    )
}

fn kernel_match() -> Result<Outcome> {
    let xs = grid(-8.0, 8.0, 0.1)?;
    let (mut emp_err, mut comb_err) = (0.0f64, 0.0f64);
    for m in [5, 6] {
        let base = ModulusBase::sample(m, 50_000, 202 + m, false)?;
        for p in empirical_kernel(&base, &xs, Execution::Parallel) {
            emp_err = emp_err.max(p.abs_error);
        }
        for &x in &xs {
            comb_err = comb_err.max((analytic_kernel(m, x) - sinc_comb(m, x, 10_000)?).abs());
        }
    }
    outcome(
        emp_err <= 0.05 && comb_err <= 1e-3,
        format!("max |empirical − analytic| {emp_err:.4} (≤ 0.05), max |analytic − sinc comb| {comb_err:.2e} (≤ 1e-3)"),
    )
}

fn decode_round_trip() -> Result<(Outcome, Outcome)> {
    let exp = DecodeExperiment {
        dim: 1024,
        moduli: moduli_near(2, 10_000)?,
        kappa: None,
        trials: 500,
        seed: 303,
        resonator: restarting(),
        exec: Execution::Parallel,
    };
    let p = exp.run(0.95)?;
    let limit = p.range as f64 / 10.0;
    let norm = p.normalized_evaluations.unwrap_or(f64::INFINITY);
    Ok((
        Outcome {
            pass: p.accuracy >= 0.95,
            detail: format!("moduli {:?} (M={}), accuracy {:.3} over {} trials (≥ 0.95)", p.moduli, p.range, p.accuracy, p.trials),
        },
        Outcome { pass: norm <= limit, detail: format!("accuracy-normalized evaluations {norm:.1} vs M/10 = {limit:.1}") },
    ))
}

fn capacity_trends() -> Result<Outcome> {
    let capacity = |dim: usize, k: usize| -> Result<u64> {
        let mut sweep = CapacitySweep::new(dim, k, 100, 404);
        sweep.min_range = 100;
        sweep.resonator = restarting();
        Ok(capacity_experiment(&sweep)?.capacity.unwrap_or(0))
    };
    let by_dim = [capacity(256, 2)?, capacity(512, 2)?, capacity(1024, 2)?];
    let by_k = [by_dim[2], capacity(1024, 3)?, capacity(1024, 4)?];
    let up = by_dim.windows(2).all(|w| w[0] < w[1]);
    let down = by_k.windows(2).all(|w| w[0] > w[1]);
    outcome(up && down, format!("C(D=256,512,1024; K=2) = {by_dim:?}, C(K=2,3,4; D=1024) = {by_k:?}"))
}

fn noise_robustness() -> Result<Outcome> {
    let exp = DecodeExperiment {
        dim: 512,
        moduli: moduli_near(2, 1000)?,
        kappa: Some(1.0),
        trials: 200,
        seed: 505,
        resonator: ResonatorConfig::default(),
        exec: Execution::Parallel,
    };
    let p = exp.run(0.95)?;
    let chance = 1.0 / p.range as f64;
    outcome(
        p.accuracy >= 0.5 && p.accuracy >= 100.0 * chance,
        format!("κ=1, M={}: accuracy {:.3} (≥ 0.5; chance {chance:.2e})", p.range, p.accuracy),
    )
}

fn hexagonal() -> Result<Outcome> {
    let sys = HexSystem::new(&[3, 5, 7], 1024, 606)?;
    let shift = sys.encode([1, 1, 1]) == sys.encode([0, 0, 0]);
    let counts = (1..=12).all(|m| hex_state_count_brute_force(m) == hex_state_count(m));
    let entropy = (2..=12).all(|m| code_entropy(hex_state_count(m)) > code_entropy(square_state_count(m)));
    outcome(shift && counts && entropy, format!("z([1,1,1]) == z([0,0,0]): {shift}; brute-force counts match 3m²−3m+1 for m ≤ 12: {counts}; hex entropy > square for m ∈ [2,12]: {entropy}"))
}

fn sub_integer() -> Result<Outcome> {
    let run = |kappa: f64| {
        SubIntegerExperiment {
            dim: 512,
            moduli: moduli_near(2, 1000)?,
            kappa: Some(kappa),
            partitions: 4,
            trials: 200,
            seed: 707,
            resonator: ResonatorConfig::default(),
            exec: Execution::Parallel,
        }
        .run()
    };
    let (hi, lo) = (run(16.0)?, run(1.0)?);
    let sys = ResidueSystem::new(&[29, 31], 512, 708, false)?;
    let config = ResonatorConfig { max_restarts: 10, ..Default::default() };
    let x = sub_integer_decode(&sys, &sys.encode_rational(40.4), 5, &config)?;
    let example = (x - 40.4).abs() < 1e-9;
    outcome(
        hi.accuracy >= 0.9 && hi.bits_per_vector > lo.bits_per_vector && example,
        format!(
            "r=4, M={}: accuracy {:.3} at κ=16 (≥ 0.9); bits {:.2} at κ=16 vs {:.2} at κ=1; 40.4 with r=5 decodes to {x}",
            hi.range, hi.accuracy, hi.bits_per_vector, lo.bits_per_vector
        ),
    )
}

fn subset_sum() -> Result<Outcome> {
    let bench = SubsetBenchmark {
        items: 10,
        dim: 2048,
        moduli: default_moduli(200)?,
        trials: 200,
        seed: 909,
        resonator: ResonatorConfig { max_restarts: 19, ..Default::default() },
        exec: Execution::Parallel,
    };
    let trials = bench.run_trials()?;
    let rec = bench.record(&trials);
    let mut agree = true;
    for t in trials.iter().filter(|t| t.solution.subset.is_some()) {
        agree &= brute_force(&t.instance.items, t.instance.target)?.is_some();
    }
    let n = rec.trials as f64;
    let worst = rec
        .restart_curve
        .iter()
        .enumerate()
        .map(|(i, &obs)| {
            let exp = independent_restart_success(rec.first_attempt_accuracy, i + 1);
            let sigma = (exp * (1.0 - exp) / n).sqrt();
            ((obs - exp).abs() - 0.5 / n).max(0.0) / sigma.max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    outcome(
        rec.all_verified && agree && rec.accuracy >= 0.95 && worst <= 3.0,
        format!(
            "|S|=10, moduli {:?}: all verified {}, exhaustive search agrees {agree}; success within 20 attempts {:.3} (≥ 0.95); single attempt {:.3}; worst restart-curve deviation {worst:.2}σ (≤ 3)",
            rec.moduli, rec.all_verified, rec.accuracy, rec.first_attempt_accuracy
        ),
    )
}

fn scene() -> Result<Outcome> {
    let report = scene_experiment(&SceneExperiment::new(10_000, 50, 1010))?;
    let get = |mode| report.records.iter().find(|r| r.mode == mode).expect("both modes run");
    let (std, res) = (get(FactorMode::Standard), get(FactorMode::Residue));
    outcome(
        res.codebook_vectors == 40 && std.codebook_vectors == 220 && res.accuracy >= 0.9 && std.mean_evaluations >= 2.0 * res.mean_evaluations,
        format!(
            "codebook vectors {} vs {}; residue accuracy {:.2} (≥ 0.9); mean evaluations {:.1} residue vs {:.1} standard ({:.2}×, ≥ 2×); brute force {}",
            res.codebook_vectors, std.codebook_vectors, res.accuracy, res.mean_evaluations, std.mean_evaluations, std.mean_evaluations / res.mean_evaluations, res.brute_force_evaluations
        ),
    )
}

fn baselines() -> Result<Outcome> {
    let mut exact = true;
    for s in [0, 17, 64] {
        exact &= thermometer_curve(s, 64)?.iter().all(|p| p.empirical == p.analytic);
        exact &= float_curve(s, 128, 16)?.iter().all(|p| p.empirical == p.analytic);
    }
    let curve = scatter_curve(30, 1000, 0.05, 50, 1111, Execution::Parallel)?;
    let worst = curve
        .iter()
        .map(|p| {
            if p.std_error > 0.0 {
                (p.mean - p.expected).abs() / p.std_error
            } else if p.mean == p.expected {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max);
    outcome(exact && worst <= 3.0, format!("thermometer/float curves equal closed forms: {exact}; scatter decay worst deviation {worst:.2} standard errors over Δ ≤ 30 (≤ 3)"))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: &str, name: &str, budget: Duration, started: Instant, r: Result<Outcome>| {
        let elapsed = started.elapsed();
        let (pass, detail) = match r {
            Ok(o) => (o.pass && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} criterion {id:>2} {name}: {detail} [{:.1}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    };
    let min = |m: u64| Duration::from_secs(60 * m);

    let t = Instant::now();
    report("1", "exact algebra", min(1), t, exact_algebra());
    let t = Instant::now();
    report("2", "kernel match", min(1), t, kernel_match());
    let t = Instant::now();
    match decode_round_trip() {
        Ok((acc, cost)) => {
            report("3", "decode round trip", min(5), t, Ok(acc));
            report("4", "efficiency", min(5), t, Ok(cost));
        }
        Err(e) => {
            let msg = e.to_string();
            report("3", "decode round trip", min(5), t, Err(e));
            report("4", "efficiency", min(5), t, Ok(Outcome { pass: false, detail: format!("not measured: {msg}") }));
        }
    }
    let t = Instant::now();
    report("5", "capacity trends", min(30), t, capacity_trends());
    let t = Instant::now();
    report("6", "noise robustness", min(10), t, noise_robustness());
    let t = Instant::now();
    report("7", "hexagonal system", min(1), t, hexagonal());
    let t = Instant::now();
    report("8", "sub-integer decoding", min(10), t, sub_integer());
    let t = Instant::now();
    report("9", "subset sum", min(15), t, subset_sum());
    let t = Instant::now();
    report("10", "scene factorization", min(20), t, scene());
    let t = Instant::now();
    report("11", "baselines", min(1), t, baselines());

    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
