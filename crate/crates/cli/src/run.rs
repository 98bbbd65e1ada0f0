//! Command runners. Each writes its data files into the output directory and returns
//! the resolved configuration and the list of files for the manifest.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rhc::baseline::{fit_kernel, float_curve, scatter_curve, thermometer_curve, KernelFamily, KernelFit};
use rhc::experiment::{capacity_experiment, moduli_near, write_csv, write_jsonl, CapacitySweep, DecodeExperiment, SubIntegerExperiment};
use rhc::hex::{
    code_entropy, hex_codebook_size, hex_heatmap, hex_state_count, square_codebook_size, square_state_count, write_heatmap_csv, HexSystem,
};
use rhc::kernel::{empirical_kernel, grid, write_kernel_csv, KernelPoint};
use rhc::resonator::ResonatorConfig;
use rhc::scene::{parse_corpus, scene_experiment, SceneExperiment};
use rhc::seed::derive;
use rhc::subset_sum::{default_moduli, solve, SubsetBenchmark, SubsetSumInstance};
use rhc::{Execution, ModulusBase, ResidueSystem};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{Config, FORMAT_VERSION};

pub type Fallible<T> = Result<T, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Output directory plus the files written so far.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Fallible<Self> {
        fs::create_dir_all(dir).map_err(|e| format!("cannot create output directory {}: {e}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn create(&mut self, name: &str) -> Fallible<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    fn jsonl<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Fallible<()> {
        write_jsonl(self.create(name)?, rows).map_err(err)
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Fallible<()> {
        write_csv(self.create(name)?, rows).map_err(err)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Fallible<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(err)?;
        std::io::Write::write_all(&mut w, b"\n").map_err(err)
    }

    /// Write `manifest.json` with hashes of the resolved config, inputs and outputs.
    pub fn finish(mut self, command: &str, config: &Config, settings: Value, inputs: &[PathBuf]) -> Fallible<()> {
        let mut resolved = serde_json::Map::new();
        resolved.insert("version".into(), json!(config.version));
        resolved.insert("seed".into(), json!(config.seed));
        resolved.insert("resonator".into(), section(&config.resonator)?);
        resolved.insert(command.replace('-', "_"), settings);
        let resolved = Value::Object(resolved);
        let canonical = serde_json::to_vec(&resolved).map_err(err)?;
        let hash_file = |p: &Path| -> Fallible<String> {
            Ok(hex(&Sha256::digest(fs::read(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?)))
        };
        let outputs =
            self.files.iter().map(|f| Ok(json!({ "file": f, "sha256": hash_file(&self.dir.join(f))? }))).collect::<Fallible<Vec<_>>>()?;
        let inputs = inputs.iter().map(|p| Ok(json!({ "path": p, "sha256": hash_file(p)? }))).collect::<Fallible<Vec<_>>>()?;
        let manifest = json!({
            "command": command,
            "format_version": FORMAT_VERSION,
            "config": resolved,
            "config_sha256": hex(&Sha256::digest(&canonical)),
            "seeds": { "root": config.seed },
            "versions": { "rhc": rhc::VERSION, "rhc-cli": env!("CARGO_PKG_VERSION") },
            "inputs": inputs,
            "outputs": outputs,
        });
        self.json("manifest.json", &manifest)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn section<T: Serialize>(s: &T) -> Fallible<Value> {
    serde_json::to_value(s).map_err(err)
}

pub fn kernel(c: &Config, out: &mut Outputs, exec: Execution) -> Fallible<Value> {
    let s = &c.kernel;
    let xs = grid(s.start, s.stop, s.step).map_err(err)?;
    let seed = derive(c.seed, &[0]);
    let rows: Vec<KernelPoint> = match s.moduli.as_slice() {
        [] => return Err("kernel needs at least one modulus".into()),
        [m] => empirical_kernel(&ModulusBase::sample(*m, s.dim, seed, false).map_err(err)?, &xs, exec),
        ms => empirical_kernel(&ResidueSystem::new(ms, s.dim, seed, false).map_err(err)?, &xs, exec),
    };
    write_kernel_csv(out.create("kernel.csv")?, &rows).map_err(err)?;
    section(s)
}

pub fn capacity(c: &Config, out: &mut Outputs, exec: Execution) -> Fallible<Value> {
    let s = &c.capacity;
    let mut sweep = CapacitySweep::new(s.dim, s.k, s.trials, c.seed);
    sweep.threshold = s.threshold;
    sweep.stop_threshold = s.threshold;
    sweep.growth = s.growth;
    sweep.min_range = s.min_range;
    sweep.max_range = s.max_range;
    sweep.resonator = c.resonator.clone();
    sweep.exec = exec;
    let report = capacity_experiment(&sweep).map_err(err)?;
    out.jsonl("capacity.jsonl", &report.points)?;
    out.json("capacity.json", &json!({ "D": s.dim, "K": s.k, "capacity": report.capacity }))?;
    section(s)
}

pub fn noise(c: &Config, out: &mut Outputs, exec: Execution) -> Fallible<Value> {
    let s = &c.noise;
    let moduli = moduli_near(s.k, s.range).map_err(err)?;
    let mut rows = Vec::new();
    for &kappa in &s.kappas {
        let exp = DecodeExperiment {
            dim: s.dim,
            moduli: moduli.clone(),
            kappa: Some(kappa),
            trials: s.trials,
            seed: c.seed,
            resonator: c.resonator.clone(),
            exec,
        };
        rows.push(exp.run(0.95).map_err(err)?);
    }
    out.jsonl("noise.jsonl", &rows)?;
    section(s)
}

#[derive(Serialize)]
struct StateRow {
    m: u64,
    hex_states: u64,
    square_states: u64,
    hex_bits: f64,
    square_bits: f64,
    hex_codebook: u64,
    square_codebook: u64,
}

pub fn hex_cmd(c: &Config, out: &mut Outputs, exec: Execution) -> Fallible<Value> {
    let s = &c.hex;
    let sys = HexSystem::new(&s.moduli, s.dim, derive(c.seed, &[0])).map_err(err)?;
    let points = hex_heatmap(&sys, s.extent, s.steps, exec).map_err(err)?;
    write_heatmap_csv(out.create("hex_kernel.csv")?, &points).map_err(err)?;
    let rows: Vec<StateRow> = (1..=s.max_m)
        .map(|m| StateRow {
            m,
            hex_states: hex_state_count(m),
            square_states: square_state_count(m),
            hex_bits: code_entropy(hex_state_count(m)),
            square_bits: code_entropy(square_state_count(m)),
            hex_codebook: hex_codebook_size(m),
            square_codebook: square_codebook_size(m),
        })
        .collect();
    out.csv("hex_states.csv", &rows)?;
    section(s)
}

pub fn subint(c: &Config, out: &mut Outputs, exec: Execution) -> Fallible<Value> {
    let s = &c.subint;
    let moduli = moduli_near(s.k, s.range).map_err(err)?;
    let mut rows = Vec::new();
    for &partitions in &s.partitions {
        for &kappa in &s.kappas {
            let exp = SubIntegerExperiment {
                dim: s.dim,
                moduli: moduli.clone(),
                kappa: Some(kappa),
                partitions,
                trials: s.trials,
                seed: c.seed,
                resonator: c.resonator.clone(),
                exec,
            };
            rows.push(exp.run().map_err(err)?);
        }
    }
    out.jsonl("subint.jsonl", &rows)?;
    section(s)
}

pub fn subset_sum(c: &Config, out: &mut Outputs, exec: Execution) -> Fallible<(Value, Vec<PathBuf>)> {
    let s = &c.subset_sum;
    if s.attempts == 0 {
        return Err("attempts must be positive".into());
    }
    let moduli = default_moduli(s.m).map_err(err)?;
    let resonator = ResonatorConfig { max_restarts: s.attempts - 1, ..c.resonator.clone() };
    if let Some(path) = &s.instance {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read instance {}: {e}", path.display()))?;
        let inst = SubsetSumInstance::from_json(&text).map_err(|e| format!("instance {}: {e}", path.display()))?;
        let dim = *s.dims.last().ok_or("dims must not be empty")?;
        let sys = ResidueSystem::new(&moduli, dim, derive(c.seed, &[dim as u64]), false).map_err(err)?;
        let sol = solve(&inst, &sys, &resonator.with_seed(c.seed)).map_err(err)?;
        out.json("subset_solution.json", &json!({ "moduli": moduli, "D": dim, "instance": inst, "solution": sol }))?;
        return Ok((section(s)?, vec![path.clone()]));
    }
    let mut rows = Vec::new();
    for &items in &s.sizes {
        for &dim in &s.dims {
            let b =
                SubsetBenchmark { items, dim, moduli: moduli.clone(), trials: s.trials, seed: c.seed, resonator: resonator.clone(), exec };
            rows.push(b.run().map_err(err)?);
        }
    }
    out.jsonl("subset_sum.jsonl", &rows)?;
    Ok((section(s)?, Vec::new()))
}

pub fn scene(c: &Config, out: &mut Outputs, exec: Execution) -> Fallible<(Value, Vec<PathBuf>)> {
    let s = &c.scene;
    let corpus = match &s.corpus {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("cannot read corpus {}: {e}", path.display()))?;
            Some(parse_corpus(&text).map_err(|e| format!("corpus {}: {e}", path.display()))?)
        }
        None => None,
    };
    let e = SceneExperiment {
        dim: s.dim,
        moduli: s.moduli.clone(),
        objects: s.objects,
        features: s.features,
        coeffs_per_object: s.coeffs_per_object,
        patch: s.patch,
        scenes: s.scenes,
        seed: c.seed,
        resonator: c.resonator.clone(),
        exec,
        corpus,
    };
    let report = scene_experiment(&e).map_err(err)?;
    out.jsonl("scene.jsonl", &report.records)?;
    out.jsonl("scene_trials.jsonl", &report.trials)?;
    Ok((section(s)?, s.corpus.iter().cloned().collect()))
}

#[derive(Serialize)]
struct FitRow<'a> {
    curve: &'a str,
    #[serde(flatten)]
    fit: KernelFit,
}

pub fn baselines(c: &Config, out: &mut Outputs, exec: Execution) -> Fallible<Value> {
    let s = &c.baselines;
    let thermo = thermometer_curve(s.thermometer_dim / 2, s.thermometer_dim).map_err(err)?;
    let float = float_curve((s.float_dim - s.float_width.min(s.float_dim)) / 2, s.float_dim, s.float_width).map_err(err)?;
    let scatter = scatter_curve(s.max_delta, s.scatter_dim, s.scatter_p, s.seeds, derive(c.seed, &[0]), exec).map_err(err)?;
    write_kernel_csv(out.create("thermometer.csv")?, &thermo).map_err(err)?;
    write_kernel_csv(out.create("float.csv")?, &float).map_err(err)?;
    out.csv("scatter.csv", &scatter)?;
    let curves: [(&str, Vec<(f64, f64)>); 3] = [
        ("thermometer", thermo.iter().map(|p| (p.dx, p.empirical)).collect()),
        ("float", float.iter().map(|p| (p.dx, p.empirical)).collect()),
        ("scatter", scatter.iter().map(|p| (p.delta as f64, p.mean)).collect()),
    ];
    let mut fits = Vec::new();
    for (curve, data) in &curves {
        for family in KernelFamily::ALL {
            fits.push(FitRow { curve, fit: fit_kernel(family, data).map_err(err)? });
        }
    }
    out.jsonl("fits.jsonl", &fits)?;
    section(s)
}
