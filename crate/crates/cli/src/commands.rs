use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use framepick::eval::{match_peaks, EvalReport, Scores};
use framepick::io::{
    read_container, read_spectrum_csv, render_mz_image, write_container, write_image,
    write_spectrum_csv, Container, ImageFormat,
};
use framepick::pipeline::{run_pick, run_tune, SpotPeaks};
use framepick::synth::{synth_corpus, synth_phantom};
use framepick::{DatasetGrid, Error, Peak, PhantomSpec, Result, RunConfig, SynthSpec};
use serde_json::{json, Value};

use crate::cli::{DenoiseArgs, EvalArgs, PhantomArgs, PickArgs, RenderArgs, SpectraArgs, TuneArgs};

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Next to `path`, for outputs that cannot carry the config themselves.
fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".json");
    path.with_file_name(name)
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Writes to standard output; a closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(io_error(Path::new("<stdout>"), e))
        }
        _ => Ok(()),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn load_dataset(path: &Path) -> Result<Container> {
    if is_csv(path) {
        Ok(Container::new(DatasetGrid::single(read_spectrum_csv(
            path,
        )?)))
    } else {
        read_container(path)
    }
}

/// Writes a dataset as a container, or as CSV plus a JSON sidecar when the
/// path ends in `.csv` and the grid holds one spectrum.
fn save_dataset(path: &Path, grid: DatasetGrid, config: &RunConfig, meta: Value) -> Result<()> {
    if is_csv(path) {
        if grid.len() != 1 {
            return Err(Error::Parameter(format!(
                "{} spectra cannot be written to a CSV file; use a container path",
                grid.len()
            )));
        }
        write_spectrum_csv(path, &grid.spectrum(0))?;
        return write_json(
            &sidecar(path),
            &json!({ "config": config.to_json(), "meta": meta }),
        );
    }
    write_container(
        path,
        &Container {
            grid,
            config: Some(config.to_json()),
            meta: Some(meta),
        },
    )
}

fn warn_all(warnings: &[String], failures: &[Error]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
    for f in failures {
        eprintln!("warning: {f}");
    }
}

pub fn simulate_spectra(args: &SpectraArgs) -> Result<()> {
    if args.count == 0 {
        return Err(Error::Parameter("--count must be positive".into()));
    }
    let spec = SynthSpec {
        length: args.length,
        n_peaks: args.peaks,
        noise_sigma0: args.noise,
        baseline_amp: args.baseline_amp,
        baseline_scale: args.baseline_scale,
        seed: args.seed,
        ..SynthSpec::default()
    };
    let corpus = synth_corpus(&spec, args.count)?;
    let mz = corpus[0].0.mz().to_vec();
    let mut rows = Vec::with_capacity(corpus.len());
    let mut spots = Vec::with_capacity(corpus.len());
    for (col, (s, truth)) in corpus.into_iter().enumerate() {
        rows.push(s.into_parts().1);
        spots.push(SpotPeaks {
            row: 0,
            col,
            peaks: truth,
        });
    }
    let grid = DatasetGrid::from_rows((1, args.count), mz, rows)?;
    let config = RunConfig {
        seed: args.seed,
        ..RunConfig::default()
    };
    let meta = json!({ "synth": spec });
    save_dataset(&args.out, grid, &config, meta.clone())?;
    write_json(
        &args.truth,
        &json!({ "config": config.to_json(), "meta": meta, "spots": spots }),
    )
}

pub fn simulate_phantom(args: &PhantomArgs) -> Result<()> {
    let bins: [usize; 4] = args
        .bins
        .clone()
        .try_into()
        .map_err(|_| Error::Parameter("--bins takes four bin indices".into()))?;
    let spec = PhantomSpec {
        noise_sigma: args.noise,
        amplitude_jitter: args.jitter,
        seed: args.seed,
        ..PhantomSpec::quadrants((args.rows, args.cols), args.length, bins)
    };
    let (grid, maps) = synth_phantom(&spec)?;
    let cols = args.cols;
    let spots: Vec<SpotPeaks> = (0..args.rows * cols)
        .map(|i| SpotPeaks {
            row: i / cols,
            col: i % cols,
            peaks: maps
                .iter()
                .filter(|m| m.members[i])
                .map(|m| Peak {
                    bin: m.bin,
                    mz: m.mz,
                    score: spec.peak_amplitude,
                })
                .collect(),
        })
        .collect();
    let shapes: Vec<Value> = maps
        .iter()
        .map(|m| json!({ "kind": m.kind.name(), "bin": m.bin, "mz": m.mz, "spots": m.count() }))
        .collect();
    let config = RunConfig {
        seed: args.seed,
        ..RunConfig::default()
    };
    let meta = json!({ "phantom": spec, "shapes": shapes });
    save_dataset(&args.out, grid, &config, meta.clone())?;
    write_json(
        &args.truth,
        &json!({ "config": config.to_json(), "meta": meta, "spots": spots }),
    )
}

pub fn pick(args: &PickArgs) -> Result<()> {
    let cfg = args.pipeline.resolve()?;
    let input = load_dataset(&args.input)?;
    let run = run_pick(&input.grid, &cfg, args.pipeline.threads)?;
    warn_all(&run.warnings, &run.failures);
    let failures: Vec<String> = run.failures.iter().map(|e| e.to_string()).collect();
    if let Some(path) = &args.indicators {
        let meta = json!({ "input": args.input, "content": "indicator" });
        save_dataset(path, run.indicators, &cfg, meta)?;
    }
    write_json(
        &args.out,
        &json!({
            "config": cfg.to_json(),
            "input": args.input,
            "warnings": run.warnings,
            "failures": failures,
            "spots": run.peaks,
        }),
    )
}

pub fn denoise(args: &DenoiseArgs) -> Result<()> {
    let cfg = args.pipeline.resolve()?;
    let input = load_dataset(&args.input)?;
    let run = run_pick(&input.grid, &cfg, args.pipeline.threads)?;
    warn_all(&run.warnings, &run.failures);
    let failures: Vec<String> = run.failures.iter().map(|e| e.to_string()).collect();
    let meta = json!({
        "input": args.input,
        "content": "indicator",
        "warnings": run.warnings,
        "failures": failures,
    });
    save_dataset(&args.out, run.indicators, &cfg, meta)
}

type SpotMap = BTreeMap<(usize, usize), Vec<Peak>>;

fn read_spots(path: &Path) -> Result<(Value, SpotMap)> {
    let mut doc = read_json(path)?;
    let spots: Vec<SpotPeaks> = serde_json::from_value(
        doc.get_mut("spots").map(Value::take).unwrap_or_default(),
    )
    .map_err(|e| Error::Format(format!("{}: no usable `spots` list: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for s in spots {
        if out.insert((s.row, s.col), s.peaks).is_some() {
            return Err(Error::Format(format!(
                "{}: spot ({}, {}) listed twice",
                path.display(),
                s.row,
                s.col
            )));
        }
    }
    Ok((doc, out))
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let (detected_doc, mut detected) = read_spots(&args.detected)?;
    let (_, truth) = read_spots(&args.truth)?;
    let mut keys: Vec<(usize, usize)> = truth.keys().copied().collect();
    keys.extend(detected.keys().filter(|k| !truth.contains_key(k)).copied());
    keys.sort_unstable();
    let mut scores = Vec::with_capacity(keys.len());
    for key in &keys {
        let det = detected.remove(key).unwrap_or_default();
        let reference = truth.get(key).map(Vec::as_slice).unwrap_or_default();
        scores.push(Scores::from_matching(&match_peaks(
            &det, reference, args.tol,
        )?));
    }
    let report = EvalReport::from_scores(scores, args.tol);
    emit(&report.to_string())?;
    if let Some(path) = &args.json {
        let spots: Vec<Value> = keys.iter().map(|&(r, c)| json!([r, c])).collect();
        write_json(
            path,
            &json!({
                "config": detected_doc.get("config").cloned().unwrap_or(Value::Null),
                "detected": args.detected,
                "truth": args.truth,
                "spots": spots,
                "report": report,
            }),
        )?;
    }
    Ok(())
}

fn parse_bins(s: &str) -> Result<(usize, usize)> {
    let parsed = s
        .split_once(':')
        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
    parsed.ok_or_else(|| Error::Parameter(format!("--bins takes LO:HI, not {s:?}")))
}

fn nearest_bin(mz: &[f64], target: f64) -> usize {
    let i = mz.partition_point(|&m| m < target);
    match i {
        0 => 0,
        i if i == mz.len() => mz.len() - 1,
        i if target - mz[i - 1] <= mz[i] - target => i - 1,
        i => i,
    }
}

pub fn render(args: &RenderArgs) -> Result<()> {
    let input = load_dataset(&args.input)?;
    let grid = &input.grid;
    let (lo, hi) = match (args.bin, &args.bins, args.mz) {
        (Some(b), _, _) => (b, b),
        (_, Some(s), _) => parse_bins(s)?,
        (_, _, Some(m)) => {
            let b = nearest_bin(grid.mz(), m);
            (b, b)
        }
        _ => return Err(Error::Parameter("give one of --bin, --bins or --mz".into())),
    };
    let img = render_mz_image(grid, lo..=hi, args.hotspot)?;
    write_image(&args.out, &img, ImageFormat::from_path(&args.out))?;
    write_json(
        &sidecar(&args.out),
        &json!({
            "config": input.config.unwrap_or(Value::Null),
            "input": args.input,
            "bins": [lo, hi],
            "mz": [grid.mz()[lo], grid.mz()[hi]],
            "hotspot": args.hotspot,
        }),
    )
}

pub fn tune_lambda(args: &TuneArgs) -> Result<()> {
    let cfg = args.pipeline.resolve()?;
    let target = cfg.lambda.target.ok_or_else(|| {
        Error::Parameter("tune-lambda needs a target peak count (--target)".into())
    })?;
    let input = load_dataset(&args.input)?;
    let report = run_tune(&input.grid, &cfg, target, args.per_spot)?;
    if let Some(e) = &report.global_error {
        eprintln!("warning: {e}");
    }
    let doc = json!({
        "config": cfg.to_json(),
        "input": args.input,
        "report": report,
    });
    match &args.out {
        Some(path) => write_json(path, &doc),
        None => emit(&format!("{doc:#}\n")),
    }
}
