use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use specmar::eval::{
    benchmark, evaluate_dataset, load_dataset, nfft_csv, recording_paths, sweep_alpha, sweep_nfft, LabeledRecording,
};
use specmar::par::try_map_slice;
use specmar::signal_io::{write_ground_truth, write_recording};
use specmar::{estimate_recording, load_recording, Execution, RawRecording};

mod args;

use args::{parse_grid, Cli, Command, ConfigArgs};

/// Invalid parameters or arguments; exits with status 2.
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let config = err.chain().any(|e| {
                e.is::<ConfigError>() || matches!(e.downcast_ref::<specmar::Error>(), Some(specmar::Error::Config(_)))
            });
            ExitCode::from(if config { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { input, out, config } => {
            let cfg = config.resolve()?;
            let recs = load_inputs(&input, config.fs)?;
            let est = with_jobs(&config, |exec| try_map_slice(&recs, exec, |r| estimate_recording(r, &cfg)))?;
            create_dir(&out)?;
            for (rec, bpm) in recs.iter().zip(&est) {
                write_text(&out.join(format!("{}.est.csv", rec.id)), &estimates_csv(bpm))?;
            }
            write_text(&out.join("config.json"), &cfg.to_json())?;
            eprintln!("wrote {} estimate files to {}", recs.len(), out.display());
        }
        Command::Eval { data, out, config } => {
            let cfg = config.resolve()?;
            let data = dataset(&data, config.fs)?;
            let report = with_jobs(&config, |exec| evaluate_dataset(&data, &cfg, exec))?;
            create_dir(&out)?;
            for (d, bpm) in data.iter().zip(&report.estimates) {
                write_text(&out.join(format!("{}.est.csv", d.recording.id)), &estimates_csv(bpm))?;
            }
            write_text(&out.join("report.csv"), &report.to_csv())?;
            write_text(&out.join("report.json"), &report.to_json())?;
            write_text(&out.join("config.json"), &cfg.to_json())?;
            println!("mean AAE {:.4} BPM over {} recordings", report.mean_aae(), data.len());
        }
        Command::SweepAlpha { data, out, alpha1_values, alpha2_values, config } => {
            let cfg = config.resolve()?;
            let (a1, a2) = (parse_grid(&alpha1_values)?, parse_grid(&alpha2_values)?);
            let data = dataset(&data, config.fs)?;
            let sweep = with_jobs(&config, |exec| sweep_alpha(&data, &cfg, &a1, &a2, exec))?;
            create_dir(&out)?;
            write_text(&out.join("sweep_alpha.csv"), &sweep.to_csv())?;
            write_text(&out.join("config.json"), &cfg.to_json())?;
        }
        Command::SweepNfft { data, out, values, config } => {
            let cfg = config.resolve()?;
            let data = dataset(&data, config.fs)?;
            let points = with_jobs(&config, |exec| sweep_nfft(&data, &cfg, &values, exec))?;
            create_dir(&out)?;
            write_text(&out.join("sweep_nfft.csv"), &nfft_csv(&points))?;
            write_text(&out.join("config.json"), &cfg.to_json())?;
        }
        Command::Synth(args) => {
            let spec = args.to_spec()?;
            spec.validate().map_err(|e| ConfigError(e.to_string()))?;
            let (rec, truth) = specmar::generate(&spec)?;
            create_dir(&args.out)?;
            write_recording(&args.out.join(format!("{}.csv", spec.id)), &rec)?;
            write_ground_truth(&args.out.join(format!("{}.bpm.csv", spec.id)), &truth)?;
            eprintln!("wrote {} samples, {} windows to {}", rec.len(), truth.len(), args.out.display());
        }
        Command::Bench { input, out, runs, config } => {
            let cfg = config.resolve()?;
            let recs = load_inputs(&input, config.fs)?;
            // Timings are taken one recording at a time so they do not compete for cores.
            let results = recs.iter().map(|r| benchmark(r, &cfg, runs)).collect::<Result<Vec<_>, _>>()?;
            let mut csv = String::from("id,n_windows,median_s\n");
            for b in &results {
                let _ = writeln!(csv, "{},{},{:.4}", b.id, b.n_windows, b.median_s);
            }
            match out {
                Some(out) => {
                    create_dir(&out)?;
                    write_text(&out.join("bench.csv"), &csv)?;
                    write_text(&out.join("config.json"), &cfg.to_json())?;
                }
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}

/// Runs `f` with the execution mode implied by `--jobs`, inside a pool of
/// that size when parallelism is compiled in.
fn with_jobs<T>(config: &ConfigArgs, f: impl FnOnce(Execution) -> specmar::Result<T> + Send) -> anyhow::Result<T>
where
    T: Send,
{
    #[cfg(feature = "parallel")]
    {
        match config.jobs {
            Some(1) => Ok(f(Execution::Sequential)?),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
                Ok(pool.install(|| f(Execution::Parallel))?)
            }
            None => Ok(f(Execution::Parallel)?),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = config.jobs;
        Ok(f(Execution::Sequential)?)
    }
}

fn load_inputs(inputs: &[PathBuf], fs: Option<f64>) -> anyhow::Result<Vec<RawRecording>> {
    let mut paths = Vec::new();
    for p in inputs {
        if p.is_dir() {
            paths.extend(recording_paths(p)?);
        } else {
            paths.push(p.clone());
        }
    }
    if paths.is_empty() {
        anyhow::bail!("no recordings found in {inputs:?}");
    }
    Ok(paths.iter().map(|p| load_recording(p, fs)).collect::<Result<_, _>>()?)
}

fn dataset(dir: &Path, fs: Option<f64>) -> anyhow::Result<Vec<LabeledRecording>> {
    let data = load_dataset(dir, fs)?;
    if data.is_empty() {
        anyhow::bail!("no <id>.csv with matching <id>.bpm.csv in {}", dir.display());
    }
    Ok(data)
}

fn estimates_csv(bpm: &[f64]) -> String {
    let mut s = String::from("window,bpm\n");
    for (i, b) in bpm.iter().enumerate() {
        let _ = writeln!(s, "{i},{b:.4}");
    }
    s
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
