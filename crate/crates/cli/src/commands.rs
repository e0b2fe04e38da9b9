use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::Args;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use rcs_core::circuits::{apply_patch, deserialize, generate, CircuitDocument, GenerateOptions, DEFAULT_SEQUENCE};
use rcs_core::costest::{
    build_network, contract_counted, optimize_order, report_cost_with, BenchmarkManifest, Machine,
    NetworkOutput, OptimizeOptions,
};
use rcs_core::data::DataSource;
use rcs_core::device::{load_profile, zcz3_topology, SubsetDocument};
use rcs_core::errormodel::{estimate_quantum_runtime, patch_ratio, predict_fidelity_with};
use rcs_core::simulator::{
    read_samples, sample_with, simulate_patched_with, write_samples, IdealDistribution, Simulator,
    DEFAULT_MAX_QUBITS,
};
use rcs_core::xeb::{linear_xeb, parse_series, porter_thomas_test, speckle_purity, stability_check, DEFAULT_BAND};
use rcs_core::{Circuit, DeviceProfile, DeviceTopology, NoiseSpec, PatchSpec, QubitSubset, SCHEMA_VERSION};

use crate::run::{stamped_json, Run};
use crate::units::parse_bytes;

pub struct Context {
    data: DataSource,
    threads: Option<usize>,
}

impl Context {
    pub fn new(data_dir: Option<PathBuf>, threads: Option<usize>) -> Self {
        let data = match data_dir {
            Some(dir) => DataSource::new(Some(dir)),
            None => DataSource::from_env(),
        };
        Context { data, threads }
    }

    fn run(&self, command: &'static str, params: &impl Serialize) -> Run {
        Run::new(command, params, self.threads)
    }

    fn topology(&self, run: &mut Run) -> Result<DeviceTopology> {
        match self.data.topology_raw()? {
            Some((origin, text)) => {
                run.record_input(&origin, &text);
                DeviceTopology::from_json(&text).with_context(|| format!("in {origin}"))
            }
            None => Ok(zcz3_topology()),
        }
    }

    fn profile(&self, run: &mut Run, name: &str) -> Result<DeviceProfile> {
        let (origin, text) = self.data.raw("profiles", name)?;
        run.record_input(&origin, &text);
        load_profile(&text).with_context(|| format!("in profile {origin}"))
    }

    fn subset_document(&self, run: &mut Run, name: &str) -> Result<SubsetDocument> {
        let (origin, text) = self.data.raw("subsets", name)?;
        run.record_input(&origin, &text);
        SubsetDocument::from_json(&text).with_context(|| format!("in subset {origin}"))
    }

    fn subset(&self, run: &mut Run, topology: &DeviceTopology, name: &str) -> Result<QubitSubset> {
        if let Some(n) = name.strip_prefix("compact:") {
            let n: usize = n
                .parse()
                .with_context(|| format!("--qubits {name:?}: expected compact:<count>"))?;
            return Ok(QubitSubset::compact(topology, n)?);
        }
        Ok(self.subset_document(run, name)?.subset()?)
    }
}

fn load_circuit(run: &mut Run, path: &Path) -> Result<Circuit> {
    let text = run.read(path)?;
    deserialize(&text).with_context(|| format!("in circuit file {}", path.display()))
}

fn circuit_json(circuit: &Circuit, digest: &str) -> String {
    let mut doc = CircuitDocument::from_circuit(circuit);
    doc.run_digest = Some(digest.to_owned());
    serde_json::to_string_pretty(&doc).expect("circuit serializes") + "\n"
}

fn finish(run: Run) -> Result<()> {
    for path in run.finish()? {
        println!("manifest: {}", path.display());
    }
    Ok(())
}

#[derive(Args, Serialize)]
pub struct GenArgs {
    /// Subset name or file, or `compact:<n>` for the n most central qubits.
    #[arg(long)]
    qubits: String,
    #[arg(long)]
    cycles: usize,
    #[arg(long)]
    seed: u64,
    /// Two-qubit pattern sequence, repeated cyclically.
    #[arg(long, default_value = DEFAULT_SEQUENCE)]
    sequence: String,
    /// Allow a qubit to draw the same single-qubit gate twice in a row.
    #[arg(long)]
    allow_repeats: bool,
    /// Device profile supplying two-qubit gate parameters.
    #[arg(long, default_value = "zcz3-mean")]
    profile: String,
    #[arg(long, default_value = "circuit.json")]
    out: PathBuf,
}

pub fn gen(ctx: &Context, a: &GenArgs) -> Result<()> {
    let mut run = ctx.run("gen", a);
    run.seed(a.seed);
    let topology = ctx.topology(&mut run)?;
    let subset = ctx.subset(&mut run, &topology, &a.qubits)?;
    let profile = ctx.profile(&mut run, &a.profile)?;
    let options = GenerateOptions {
        cycles: a.cycles,
        seed: a.seed,
        sequence: a.sequence.clone(),
        no_repeat: !a.allow_repeats,
    };
    let circuit = generate(&topology, &subset, &options, &profile)?;
    run.write(&a.out, &circuit_json(&circuit, &run.digest()))?;
    let counts = rcs_core::circuits::gate_counts(&circuit);
    println!(
        "circuit: {} qubits, {} cycles, {} single-qubit, {} two-qubit, {} idle -> {}",
        circuit.num_qubits(),
        a.cycles,
        counts.n_1q,
        counts.n_2q,
        counts.n_idle,
        a.out.display()
    );
    finish(run)
}

#[derive(Args, Serialize)]
pub struct PatchArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Partition stored with the circuit's subset, by key (e.g. 2 or 4).
    #[arg(long, conflicts_with = "regions", required_unless_present = "regions")]
    patches: Option<String>,
    /// JSON file with a list of regions, each a list of qubit ids.
    #[arg(long)]
    regions: Option<PathBuf>,
    #[arg(long, default_value = "patched.json")]
    out: PathBuf,
}

pub fn patch(ctx: &Context, a: &PatchArgs) -> Result<()> {
    let mut run = ctx.run("patch", a);
    let circuit = load_circuit(&mut run, &a.circuit)?;
    let topology = ctx.topology(&mut run)?;
    let spec = match (&a.patches, &a.regions) {
        (Some(key), _) => {
            let doc = ctx.subset_document(&mut run, circuit.subset().name())?;
            let regions = doc.patches.get(key).with_context(|| {
                let known: Vec<_> = doc.patches.keys().cloned().collect();
                format!("--patches {key}: subset `{}` defines {:?}", doc.name, known)
            })?;
            PatchSpec::new(regions.clone())
        }
        (None, Some(path)) => {
            let text = run.read(path)?;
            let regions: Vec<Vec<u32>> =
                serde_json::from_str(&text).with_context(|| format!("in regions file {}", path.display()))?;
            PatchSpec::new(regions)
        }
        (None, None) => bail!("either --patches or --regions is required"),
    };
    spec.validate(&topology, circuit.subset())?;
    let patched = apply_patch(&circuit, &spec)?;
    let removed = circuit.two_qubit_gates().count() - patched.two_qubit_gates().count();
    run.write(&a.out, &circuit_json(&patched, &run.digest()))?;
    println!("patch: {} regions, {removed} crossing gates removed -> {}", spec.k(), a.out.display());
    finish(run)
}

#[derive(Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_QUBITS)]
    max_qubits: usize,
    /// Bitstrings (hex) whose amplitudes are printed.
    #[arg(long = "amplitude")]
    amplitudes: Vec<String>,
    #[arg(long, default_value = "state.json")]
    out: PathBuf,
}

fn parse_hex(text: &str) -> Result<u128> {
    let t = text.trim_start_matches("0x");
    u128::from_str_radix(t, 16).with_context(|| format!("invalid bitstring {text:?}: expected hex"))
}

pub fn simulate(ctx: &Context, a: &SimulateArgs) -> Result<()> {
    let mut run = ctx.run("simulate", a);
    let circuit = load_circuit(&mut run, &a.circuit)?;
    let sim = Simulator::new(a.max_qubits);
    let pieces = if circuit.patch().is_some() {
        simulate_patched_with(&sim, &circuit)?
            .patches
            .into_iter()
            .map(|p| (p.positions, p.state))
            .collect()
    } else {
        vec![((0..circuit.num_qubits()).collect::<Vec<_>>(), sim.run(&circuit)?)]
    };
    let patches: Vec<_> = pieces
        .iter()
        .map(|(positions, state)| {
            json!({
                "positions": positions,
                "amplitudes": state.amplitudes().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            })
        })
        .collect();
    for text in &a.amplitudes {
        let x = parse_hex(text)?;
        if circuit.num_qubits() < 128 && x >> circuit.num_qubits() != 0 {
            return Err(rcs_core::Error::Validation {
                field: "amplitude".into(),
                message: format!("{text} is out of range for {} qubits", circuit.num_qubits()),
            }
            .into());
        }
        let z = pieces
            .iter()
            .map(|(positions, state)| {
                let local = positions
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (i, &p)| acc | ((((x >> p) & 1) as usize) << i));
                state.amplitudes()[local]
            })
            .product::<Complex64>();
        println!("amplitude {text}: {:+.12e} {:+.12e}i", z.re, z.im);
    }
    let body = json!({
        "num_qubits": circuit.num_qubits(),
        "patched": circuit.patch().is_some(),
        "patches": patches,
    });
    run.write(&a.out, &stamped_json(&run.digest(), body))?;
    println!("state: {} qubits in {} piece(s) -> {}", circuit.num_qubits(), pieces.len(), a.out.display());
    finish(run)
}

#[derive(Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    shots: usize,
    #[arg(long)]
    seed: u64,
    /// `none`, `mixture:F` or `trajectory:E1,E2,EIDLE,ERO`.
    #[arg(long, default_value = "none")]
    noise: String,
    #[arg(long, default_value_t = DEFAULT_MAX_QUBITS)]
    max_qubits: usize,
    #[arg(long, default_value = "samples.txt")]
    out: PathBuf,
}

pub fn sample(ctx: &Context, a: &SampleArgs) -> Result<()> {
    let mut run = ctx.run("sample", a);
    run.seed(a.seed);
    let noise: NoiseSpec = a.noise.parse()?;
    let circuit = load_circuit(&mut run, &a.circuit)?;
    let set = sample_with(&Simulator::new(a.max_qubits), &circuit, a.shots, a.seed, &noise)?;
    run.write(&a.out, &write_samples(&set, Some(&run.digest())))?;
    println!("samples: {} shots, noise {noise} -> {}", set.len(), a.out.display());
    finish(run)
}

#[derive(Args, Serialize)]
pub struct XebArgs {
    #[arg(long)]
    samples: PathBuf,
    #[arg(long, default_value = "xeb.json")]
    out: PathBuf,
}

pub fn xeb(ctx: &Context, a: &XebArgs) -> Result<()> {
    let mut run = ctx.run("xeb", a);
    let text = run.read(&a.samples)?;
    let (_, set) = read_samples(&text).with_context(|| format!("in sample file {}", a.samples.display()))?;
    let est = linear_xeb(&set)?;
    run.write(&a.out, &stamped_json(&run.digest(), &est))?;
    println!(
        "linear XEB: {:.6} ± {:.6} over {} samples -> {}",
        est.value,
        est.stderr,
        est.n_samples,
        a.out.display()
    );
    finish(run)
}

#[derive(Args, Serialize)]
pub struct PurityArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Mix the ideal distribution with uniform noise: f·p + (1−f)/D.
    #[arg(long, default_value_t = 1.0)]
    fidelity: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_QUBITS)]
    max_qubits: usize,
    #[arg(long, default_value = "purity.json")]
    out: PathBuf,
}

pub fn purity(ctx: &Context, a: &PurityArgs) -> Result<()> {
    let mut run = ctx.run("purity", a);
    if !(0.0..=1.0).contains(&a.fidelity) {
        bail!(rcs_core::Error::Validation {
            field: "fidelity".into(),
            message: format!("{} is not in [0, 1]", a.fidelity),
        });
    }
    let circuit = load_circuit(&mut run, &a.circuit)?;
    let sim = Simulator::new(a.max_qubits);
    let dist = IdealDistribution::with_simulator(&sim, &circuit)?;
    let probs = dist.dense(a.max_qubits)?;
    let dim = probs.len() as f64;
    let noisy: Vec<f64> = probs.iter().map(|p| a.fidelity * p + (1.0 - a.fidelity) / dim).collect();
    let est = speckle_purity(&noisy)?;
    let ks = porter_thomas_test(&probs)?;
    let body = json!({
        "num_qubits": circuit.num_qubits(),
        "mixture_fidelity": a.fidelity,
        "speckle_purity": est,
        "porter_thomas_ks": ks,
    });
    run.write(&a.out, &stamped_json(&run.digest(), body))?;
    println!(
        "speckle purity: {:.6} ± {:.6}; Porter-Thomas KS distance of ideal distribution: {ks:.5} -> {}",
        est.value,
        est.stderr,
        a.out.display()
    );
    finish(run)
}

#[derive(Args, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long, default_value = "zcz3-mean")]
    profile: String,
    /// Multiplicative state-preparation correction factor.
    #[arg(long, default_value_t = 1.0)]
    state_prep: f64,
    /// Also report F(patched)/F(full) for this partition key of the subset.
    #[arg(long)]
    patch_ratio: Option<String>,
    #[arg(long, default_value = "prediction.json")]
    out: PathBuf,
}

pub fn predict(ctx: &Context, a: &PredictArgs) -> Result<()> {
    let mut run = ctx.run("predict", a);
    let circuit = load_circuit(&mut run, &a.circuit)?;
    let profile = ctx.profile(&mut run, &a.profile)?;
    let (est, budget) = predict_fidelity_with(&circuit, &profile, a.state_prep)?;
    let ratio = match &a.patch_ratio {
        Some(key) => {
            let doc = ctx.subset_document(&mut run, circuit.subset().name())?;
            let regions = doc
                .patches
                .get(key)
                .with_context(|| format!("--patch-ratio {key}: subset `{}` has no such partition", doc.name))?;
            Some(patch_ratio(&circuit, &PatchSpec::new(regions.clone()), &profile)?)
        }
        None => None,
    };
    let body = json!({ "estimate": est, "budget": budget, "patch_ratio": ratio });
    run.write(&a.out, &stamped_json(&run.digest(), body))?;
    println!("{budget}");
    println!("predicted fidelity: {:.6e}", est.value);
    if let Some(r) = ratio {
        println!("patch/full fidelity ratio: {r:.6}");
    }
    finish(run)
}

#[derive(Args, Serialize)]
pub struct CostArgs {
    /// Circuit to price. Without it, prints the bundled reference table.
    #[arg(long, requires = "seed")]
    circuit: Option<PathBuf>,
    /// Output bitstring (hex) of the priced amplitude.
    #[arg(long, default_value = "0")]
    bitstring: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    /// Memory limit such as 64MiB or 9.2PB.
    #[arg(long)]
    memory: Option<String>,
    #[arg(long, default_value_t = 1e6)]
    shots: f64,
    /// Target fidelity of the noisy samples.
    #[arg(long, default_value_t = 1.0)]
    fidelity: f64,
    #[arg(long, default_value_t = 1.0)]
    batch: f64,
    #[arg(long, default_value_t = 1.685e18)]
    peak_flops: f64,
    #[arg(long, default_value_t = 0.2)]
    efficiency: f64,
    /// Also contract the network and check the FLOP count by replay.
    #[arg(long)]
    contract: bool,
    #[arg(long, default_value = "cost.json")]
    out: PathBuf,
}

pub fn cost(ctx: &Context, a: &CostArgs) -> Result<()> {
    let mut run = ctx.run("cost", a);
    let Some(path) = &a.circuit else {
        return benchmarks(ctx, run, a);
    };
    let seed = a.seed.context("--seed is required with --circuit")?;
    run.seed(seed);
    let circuit = load_circuit(&mut run, path)?;
    let x = parse_hex(&a.bitstring)?;
    let network = build_network(&circuit, NetworkOutput::Bitstring(x))?;
    let memory = a.memory.as_deref().map(parse_bytes).transpose()?;
    let options = OptimizeOptions::new(seed, a.restarts).with_memory_limit(memory);
    let machine = Machine {
        peak_flops: a.peak_flops,
        efficiency: a.efficiency,
    };
    let plan = optimize_order(&network, &options)?;
    let report = report_cost_with(&plan, &machine, a.shots, a.fidelity, a.batch)?;
    let replay = if a.contract {
        let (t, count) = contract_counted(&network, &plan)?;
        Some(json!({
            "amplitude": [t.data[0].re, t.data[0].im],
            "replayed_complex_flops": count,
            "matches_report": Some(count) == plan.complex_flops_exact(),
        }))
    } else {
        None
    };
    let body = json!({ "report": report, "plan": plan, "contraction": replay });
    run.write(&a.out, &stamped_json(&run.digest(), body))?;
    println!(
        "cost: {:.4e} complex FLOPs per amplitude, {} slices, max intermediate {:.4e} bytes, {:.4e} s",
        report.complex_flops, report.num_slices, report.max_intermediate_bytes, report.runtime_seconds
    );
    println!(
        "noisy samples ({}): {:.4e} complex FLOPs, {:.4e} s",
        report.sampling.model, report.sampling.complex_flops, report.sampling.runtime_seconds
    );
    if let Some(r) = &replay {
        println!("contraction: amplitude {} replayed FLOPs {}", r["amplitude"], r["replayed_complex_flops"]);
    }
    finish(run)
}

fn benchmarks(ctx: &Context, mut run: Run, a: &CostArgs) -> Result<()> {
    let (origin, text) = ctx.data.raw("benchmarks", "benchmarks")?;
    run.record_input(&origin, &text);
    let manifest = BenchmarkManifest::from_json(&text).with_context(|| format!("in {origin}"))?;
    println!(
        "{:<18} {:>4} {:>4} {:>9} {:>10} {:>9} {:>11} {:>11} {:>12} {:>12}",
        "experiment", "n", "m", "fidelity", "memory", "source", "amplitude", "samples", "printed_s", "computed_s"
    );
    for row in &manifest.rows {
        for r in &row.reference {
            let computed = manifest.machine.runtime_seconds(r.samples_flops);
            let printed = r.runtime_s.map_or("-".to_string(), |s| format!("{s:.4e}"));
            println!(
                "{:<18} {:>4} {:>4} {:>9.2e} {:>10.3e} {:>9} {:>11.2e} {:>11.2e} {:>12} {:>12.4e}",
                row.experiment,
                row.qubits,
                row.cycles,
                row.fidelity,
                r.memory_bytes,
                r.source,
                r.amplitude_flops,
                r.samples_flops,
                printed,
                computed
            );
        }
    }
    let discrepancies = manifest.discrepancies();
    println!("discrepancies between sources: {}", discrepancies.len());
    for d in &discrepancies {
        println!("  {} at {:.3e} bytes, {}: {:?}", d.experiment, d.memory_bytes, d.field, d.values);
    }
    let body = json!({
        "manifest": manifest,
        "runtime_checks": manifest.runtime_checks(),
        "discrepancies": discrepancies,
    });
    run.write(&a.out, &stamped_json(&run.digest(), body))?;
    finish(run)
}

#[derive(Args, Serialize)]
pub struct MonitorArgs {
    /// CSV with `timestamp,value` rows.
    #[arg(long)]
    series: PathBuf,
    #[arg(long)]
    estimate: f64,
    #[arg(long, default_value_t = DEFAULT_BAND)]
    band: f64,
    #[arg(long, default_value = "monitor.csv")]
    out: PathBuf,
}

pub fn monitor(ctx: &Context, a: &MonitorArgs) -> Result<()> {
    let mut run = ctx.run("monitor", a);
    let text = run.read(&a.series)?;
    let series = parse_series(&text).with_context(|| format!("in series file {}", a.series.display()))?;
    let report = stability_check(&series, a.estimate, a.band)?;
    let csv = format!(
        "# schema_version={SCHEMA_VERSION} run_digest={}\n{}",
        run.digest(),
        report.to_csv()
    );
    run.write(&a.out, &csv)?;
    let failed = report.points.iter().filter(|p| !p.pass).count();
    println!(
        "stability: {} of {} points within ±{}% of {:.4e}: {} -> {}",
        report.points.len() - failed,
        report.points.len(),
        a.band * 100.0,
        a.estimate,
        if report.pass { "pass" } else { "fail" },
        a.out.display()
    );
    finish(run)
}

#[derive(Args, Serialize)]
pub struct RuntimeArgs {
    #[arg(long)]
    shots: u64,
    #[arg(long, default_value = "zcz3-mean")]
    profile: String,
    #[arg(long, default_value = "runtime.json")]
    out: PathBuf,
}

pub fn runtime(ctx: &Context, a: &RuntimeArgs) -> Result<()> {
    let mut run = ctx.run("runtime", a);
    let profile = ctx.profile(&mut run, &a.profile)?;
    let seconds = estimate_quantum_runtime(a.shots, &profile)?;
    let body = json!({
        "shots": a.shots,
        "sampling_interval_s": profile.sampling_interval_s(),
        "seconds": seconds,
        "hours": seconds / 3600.0,
        "note": "sampling time only; interleaved calibration and probe circuits are not included",
    });
    run.write(&a.out, &stamped_json(&run.digest(), body))?;
    println!("runtime: {} shots x {} s = {seconds:.3} s ({:.2} h)", a.shots, profile.sampling_interval_s(), seconds / 3600.0);
    finish(run)
}
