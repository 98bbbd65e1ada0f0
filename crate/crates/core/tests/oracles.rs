//! Independent oracles: exhaustive enumeration, Monte Carlo checks and worked examples.

use rhc::experiment::{moduli_near, DecodeExperiment};
use rhc::kernel::{analytic_kernel, sinc_comb};
use rhc::phasor::similarity;
use rhc::resonator::{decode_residue_number, sub_integer_decode, ResonatorConfig};
use rhc::scene::{build_object_codebook, factorize_scene, scene_codebooks, synthetic_objects, FactorMode, SceneEncoder};
use rhc::subset_sum::{brute_force, exact_baseline, generate_instance, solve, SubsetSumInstance};
use rhc::{Execution, ModulusBase, PhasorVector, ResidueSystem};

#[test]
fn every_pair_mod_105_adds_and_multiplies_exactly() {
    let sys = ResidueSystem::new(&[3, 5, 7], 256, 1, true).unwrap();
    let codes: Vec<_> = (0..105).map(|x| sys.encode_exact(x)).collect();
    let factors: Vec<_> = (0..105).map(|x| sys.encode_factors(x)).collect();
    for a in 0..105 {
        for b in 0..105 {
            assert_eq!(codes[a].hadamard(&codes[b]).unwrap(), codes[(a + b) % 105]);
            assert_eq!(sys.multiply_factors(&factors[a], &factors[b]).unwrap(), codes[(a * b) % 105]);
        }
    }
}

#[test]
fn closed_form_kernel_matches_truncated_sinc_comb() {
    for m in [2, 3, 5, 6, 7, 10] {
        for i in -80..=80 {
            let x = i as f64 * 0.1 + 0.013;
            assert!((analytic_kernel(m, x) - sinc_comb(m, x, 20_000).unwrap()).abs() < 1e-3, "m={m} x={x}");
        }
    }
}

#[test]
fn rational_similarity_follows_the_kernel() {
    let base = ModulusBase::sample(7, 20_000, 3, false).unwrap();
    let sim = similarity(&PhasorVector::Dense(base.encode_rational_dense(40.4)), &base.encode_integer(40)).unwrap();
    assert!((sim - analytic_kernel(7, 0.4)).abs() < 3.0 / (20_000f64).sqrt());
}

#[test]
fn fractional_example_decodes() {
    let sys = ResidueSystem::new(&[29, 31], 1024, 5, false).unwrap();
    let config = ResonatorConfig { max_restarts: 10, ..Default::default() };
    assert!((sub_integer_decode(&sys, &sys.encode_rational(40.4), 5, &config).unwrap() - 40.4).abs() < 1e-9);
    assert_eq!(decode_residue_number(&sys, &sys.encode_exact(40).to_dense(), &config).unwrap(), 40);
}

#[test]
fn decoding_is_reproducible_across_execution_modes() {
    let mut exp = DecodeExperiment {
        dim: 512,
        moduli: moduli_near(2, 1000).unwrap(),
        kappa: Some(4.0),
        trials: 40,
        seed: 8,
        resonator: ResonatorConfig::default(),
        exec: Execution::Parallel,
    };
    let par = exp.run(0.95).unwrap();
    exp.exec = Execution::Sequential;
    assert_eq!(par, exp.run(0.95).unwrap());
}

#[test]
fn dynamic_programming_agrees_with_enumeration() {
    for seed in 0..200 {
        let n = 1 + (seed as usize % 12);
        let inst = generate_instance(n, 2_000, seed).unwrap();
        for target in [inst.target, inst.target + 1, inst.total() / 3] {
            let dp = exact_baseline(&inst.items, target).unwrap();
            assert_eq!(dp.is_some(), brute_force(&inst.items, target).unwrap().is_some(), "seed {seed} target {target}");
        }
    }
}

#[test]
fn resonator_subsets_always_verify() {
    let sys = ResidueSystem::new(&[29, 30, 31], 1024, 9, false).unwrap();
    let config = ResonatorConfig { max_restarts: 10, ..Default::default() };
    let mut solved = 0;
    for seed in 0..30 {
        let inst = generate_instance(6, sys.range(), seed).unwrap();
        let sol = solve(&inst, &sys, &config.with_seed(seed)).unwrap();
        if let Some(s) = &sol.subset {
            solved += 1;
            assert_eq!(s.iter().map(|&i| inst.items[i]).sum::<u64>(), inst.target);
            assert!(exact_baseline(&inst.items, inst.target).unwrap().is_some());
        }
    }
    assert!(solved >= 27, "{solved}/30");
}

#[test]
fn six_item_example_has_one_answer() {
    let inst = SubsetSumInstance::new(vec![18, 4, 5, 10, 2, 23], 21).unwrap();
    let mut hits = Vec::new();
    for mask in 0u32..64 {
        let s: Vec<usize> = (0..6).filter(|&k| mask >> k & 1 == 1).collect();
        if s.iter().map(|&i| inst.items[i]).sum::<u64>() == 21 {
            hits.push(s);
        }
    }
    assert_eq!(hits, vec![vec![1, 2, 3, 4]]);
}

#[test]
fn synthetic_objects_are_decorrelated() {
    let enc = SceneEncoder::new(&[3, 5, 7], 10_000, 16, 4).unwrap();
    let objs = synthetic_objects(10, 16, 12, 12, 105, 4).unwrap();
    let cb = build_object_codebook(&objs, &enc, Execution::Parallel).unwrap();
    for i in 0..10 {
        for j in i + 1..10 {
            let sim = similarity(&PhasorVector::Dense(cb.entry(i)), &PhasorVector::Dense(cb.entry(j))).unwrap();
            assert!(sim.abs() <= 0.3, "objects {i},{j}: {sim}");
        }
    }
}

#[test]
fn reported_scene_factorizations_re_encode() {
    let enc = SceneEncoder::new(&[3, 5, 7], 10_000, 16, 12).unwrap();
    let objs = synthetic_objects(10, 16, 12, 12, 105, 12).unwrap();
    let cb = build_object_codebook(&objs, &enc, Execution::Parallel).unwrap();
    let config = ResonatorConfig { max_restarts: 10, ..Default::default() };
    let origin = enc.encode(&objs[3], Execution::Sequential).unwrap();
    let mut normalized = origin.clone();
    normalized.normalize_phase();
    assert_eq!(normalized, cb.entry(3));
    for (k, (x, y)) in [(17, 88), (104, 0), (52, 31)].into_iter().enumerate() {
        let s = enc.encode(&objs[k].translated(x, y), Execution::Sequential).unwrap();
        for mode in [FactorMode::Standard, FactorMode::Residue] {
            let r = factorize_scene(&s, &scene_codebooks(&cb, &enc, mode).unwrap(), &enc, mode, &config).unwrap();
            if r.success {
                let mut rebuilt = enc.encode(&objs[r.object as usize].translated(r.x as i64, r.y as i64), Execution::Sequential).unwrap();
                rebuilt.normalize_phase();
                let mut target = s.clone();
                target.normalize_phase();
                assert!(similarity(&PhasorVector::Dense(rebuilt), &PhasorVector::Dense(target)).unwrap() >= 0.5);
            }
        }
    }
}
