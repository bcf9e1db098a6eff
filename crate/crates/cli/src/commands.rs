use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use irstd::detectors::DetectorConfig;
use irstd::io::{fmt_float, load_ground_truth, save_ground_truth, save_gray, BitDepth, ImageFormat};
use irstd::metrics::post::{
    compare_curves, k_reference, pfa_k_curve, pfa_k_curve_target_free, pixel_confusion, roc_curve,
    target_pd, CurveOptions, KMaxRule, PdMode, PfaKCurve, DEFAULT_CURVE_SAMPLES, DEFAULT_DILATION,
};
use irstd::metrics::pre::{pre_metrics, DEFAULT_RING_WIDTH};
use irstd::synth::{render, standard_specs, tiny_target_spec, SceneSpec};
use irstd::threshold::{
    apply_strategy, iterative_mean_threshold, AppliedThreshold, Strategy, ThresholdParams,
};
use irstd::{BinaryImage, GrayImage};
use serde_json::json;

use crate::args::{
    required, Cli, Command, CompareArgs, CurveArgs, DetectArgs, EvalCommand, EvalPostArgs,
    EvalPreArgs, ReproduceArgs, SynthArgs, TheoryArgs, ThresholdArgs,
};
use crate::bundle::{reproduce, theory_csvs, DEFAULT_THEORY_KS, DEFAULT_THEORY_N};
use crate::{emit, load_map, save_map, with_suffix, write_file, CliError, CliResult};

/// Runs a parsed command line, writing data output to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let cli = cli.resolve()?;
    let seed = cli.seed;
    match cli.command {
        Command::Synth(a) => synth(a, seed, stdout),
        Command::Detect(a) => detect(a, stdout),
        Command::Threshold(a) => threshold(a, stdout),
        Command::Eval(EvalCommand::Pre(a)) => eval_pre(a, stdout),
        Command::Eval(EvalCommand::Post(a)) => eval_post(a, stdout),
        Command::Curve(a) => curve(a, stdout),
        Command::Theory(a) => theory(a, stdout),
        Command::Reproduce(a) => run_reproduce(a, stdout),
        Command::Compare(a) => compare(a, stdout),
    }
}

fn list_paths(paths: &[PathBuf], stdout: &mut dyn Write) -> CliResult<()> {
    let mut text = String::new();
    for p in paths {
        let _ = writeln!(text, "{}", p.display());
    }
    emit(None, &text, stdout)
}

fn synth(a: SynthArgs, seed: Option<u64>, stdout: &mut dyn Write) -> CliResult<()> {
    let out_dir = required(a.out_dir, "out-dir")?;
    let (mut spec, default_name): (SceneSpec, String) = match (a.spec, a.suite, a.tiny) {
        (Some(path), None, false) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
            let spec = serde_json::from_str(&text)
                .map_err(|e| CliError::Data(format!("bad spec {}: {e}", path.display())))?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scene".into());
            (spec, stem)
        }
        (None, Some(i), false) => {
            let specs = standard_specs();
            let spec = specs
                .get(i.wrapping_sub(1))
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("--suite must be 1 to {}", specs.len())))?;
            (spec, format!("scene{i}"))
        }
        (None, None, true) => (tiny_target_spec(), "tiny".into()),
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --spec, --suite or --tiny".into(),
            ))
        }
    };
    if let Some(s) = seed {
        spec.noise.seed = s;
    }
    let scene = render(&spec)?;
    let base = out_dir.join(a.name.unwrap_or(default_name));
    let mut written = save_map(&base, &scene.image)?;
    let gt_path = with_suffix(&base, ".gt.json");
    save_ground_truth(&gt_path, &scene.gt)?;
    written.push(gt_path);
    list_paths(&written, stdout)
}

fn detect(a: DetectArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let inputs = required(a.input, "input")?;
    let algo = required(a.algo, "algo")?;
    let out_dir = required(a.out_dir, "out-dir")?;
    let defaults = DetectorConfig::default();
    let config = DetectorConfig {
        tophat_se: a.se.unwrap_or(defaults.tophat_se),
        log_scales: a.scales.unwrap_or(defaults.log_scales),
        cell_sizes: a.cells.unwrap_or(defaults.cell_sizes),
    };
    config.validate()?;
    let mut written = Vec::new();
    for input in &inputs {
        let img = load_map(input)?;
        let map = algo.run(&img, &config)?;
        let stem = input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "input".into());
        let base = out_dir.join(format!("{stem}.{}", algo.name()));
        written.extend(save_map(&base, &map)?);
    }
    list_paths(&written, stdout)
}

fn threshold(a: ThresholdArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let input = required(a.input, "input")?;
    let strategy = required(a.strategy, "strategy")?;
    let defaults = ThresholdParams::default();
    let params = ThresholdParams {
        t: a.t.unwrap_or(defaults.t),
        k: a.k.unwrap_or(defaults.k),
        window: a.window.unwrap_or(defaults.window),
        bins: a.bins.unwrap_or(defaults.bins),
        eps: a.eps.unwrap_or(defaults.eps),
    };
    let map = load_map(&input)?;
    let outcome = apply_strategy(&map, strategy, &params)?;
    if let Some(out) = &a.out {
        let levels = GrayImage::from_fn(map.width(), map.height(), |x, y| {
            if outcome.binary.get(x, y) {
                255.0
            } else {
                0.0
            }
        });
        save_gray(out, &levels, ImageFormat::PgmP5, BitDepth::Eight)?;
    }
    let threshold = match &outcome.threshold {
        AppliedThreshold::Global(t) => json!(fmt_float(*t)),
        AppliedThreshold::Local(_) => json!("local"),
    };
    let mut summary = json!({
        "strategy": strategy.name(),
        "threshold": threshold,
        "detected": outcome.binary.count_ones(),
        "total": map.len(),
    });
    if strategy == Strategy::IterMean {
        let it = iterative_mean_threshold(&map, params.eps)?;
        summary["iterations"] = json!(it.iterations);
        summary["empty_class"] = json!(it.empty_class);
    }
    emit(None, &format!("{summary}\n"), stdout)
}

fn eval_pre(a: EvalPreArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let input = load_map(&required(a.input, "input")?)?;
    let saliency = load_map(&required(a.saliency, "saliency")?)?;
    let gt = load_ground_truth(required(a.gt, "gt")?)?;
    let ring = a.ring.unwrap_or(DEFAULT_RING_WIDTH);
    let label = a.label.unwrap_or_else(|| "map".into());
    let mut out = String::from("label,target,scr_in,scr_out,bsf,scrg,scr_global\n");
    if gt.targets().is_empty() {
        eprintln!("irstd: ground truth has no targets; target metrics skipped");
    }
    for i in 0..gt.targets().len() {
        let m = pre_metrics(&input, &saliency, &gt, i, ring)?;
        let _ = writeln!(
            out,
            "{label},{i},{},{},{},{},{}",
            fmt_float(m.scr_in),
            m.scr_out,
            m.bsf,
            m.scrg,
            fmt_float(m.scr_global)
        );
    }
    emit(a.out.as_deref(), &out, stdout)
}

fn curve_options(
    samples: Option<usize>,
    rule: Option<KMaxRule>,
    dilation: Option<usize>,
) -> CurveOptions {
    CurveOptions {
        n_samples: samples.unwrap_or(DEFAULT_CURVE_SAMPLES),
        rule: rule.unwrap_or_default(),
        dilation: dilation.unwrap_or(DEFAULT_DILATION),
    }
}

/// False-positive counts against absolute `k` over the reference sweep of a
/// target-free map.
fn false_positive_sweep(map: &GrayImage, n_samples: usize) -> CliResult<String> {
    let k_ref = k_reference(map)?;
    let curve = pfa_k_curve_target_free(map, k_ref, n_samples)?;
    let mut out = String::from("k,false_positives\n");
    for i in 0..curve.samples.len() {
        let count = (curve.samples[i].1 * map.len() as f64).round() as usize;
        let _ = writeln!(out, "{},{count}", fmt_float(curve.k_at(i)));
    }
    Ok(out)
}

fn load_binary(path: &Path) -> CliResult<BinaryImage> {
    let img = irstd::io::load_gray(path)?;
    let bits = img.samples().iter().map(|&v| v != 0.0).collect();
    Ok(BinaryImage::new(img.width(), img.height(), bits)?)
}

fn eval_post(a: EvalPostArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let gt = load_ground_truth(required(a.gt, "gt")?)?;
    let label = a.label.unwrap_or_else(|| "map".into());
    let opts = curve_options(a.samples, a.rule, a.dilation);
    if let Some(path) = &a.binary {
        let binary = load_binary(path)?;
        let c = pixel_confusion(&binary, &gt, opts.dilation)?;
        let (pd, tpd) = if gt.targets().is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (c.pd().unwrap_or(f64::NAN), target_pd(&binary, &gt)?)
        };
        let out = format!(
            "label,n_f,n_tot,n_d,n_r,pfa,pd,target_pd\n{label},{},{},{},{},{},{},{}\n",
            c.n_f,
            c.n_tot,
            c.n_d,
            c.n_r,
            fmt_float(c.pfa()),
            fmt_float(pd),
            fmt_float(tpd)
        );
        return emit(a.out.as_deref(), &out, stdout);
    }
    let map = load_map(&required(a.saliency, "saliency")?)?;
    let out = if gt.targets().is_empty() {
        eprintln!("irstd: ground truth has no targets; reporting false positives against k");
        false_positive_sweep(&map, opts.n_samples)?
    } else {
        let c = pfa_k_curve(&map, &gt, &opts)?;
        format!(
            "label,k_max,pfa_min\n{label},{},{}\n",
            fmt_float(c.k_max),
            fmt_float(c.pfa_min)
        )
    };
    emit(a.out.as_deref(), &out, stdout)
}

fn curve(a: CurveArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let map = load_map(&required(a.saliency, "saliency")?)?;
    let gt = load_ground_truth(required(a.gt, "gt")?)?;
    let opts = curve_options(a.samples, a.rule, a.dilation);
    if let Some(n) = a.roc {
        if n < 2 {
            return Err(CliError::Usage("--roc needs at least 2 thresholds".into()));
        }
        let (lo, hi) = (map.min(), map.max());
        if lo == hi {
            return Err(irstd::Error::ConstantMap.into());
        }
        let ts: Vec<f64> = (0..n)
            .map(|i| hi - (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        let roc = roc_curve(&map, &gt, &ts, a.pd_mode.unwrap_or(PdMode::Pixel), opts.dilation)?;
        return emit(a.out.as_deref(), &roc.to_csv(), stdout);
    }
    let c = if gt.targets().is_empty() {
        eprintln!("irstd: ground truth has no targets; sweeping [0, k_ref]");
        pfa_k_curve_target_free(&map, k_reference(&map)?, opts.n_samples)?
    } else {
        pfa_k_curve(&map, &gt, &opts)?
    };
    if let Some(path) = &a.json {
        let text = serde_json::to_string_pretty(&c).expect("curve serializes");
        write_file(path, text + "\n")?;
    }
    emit(a.out.as_deref(), &c.to_csv(), stdout)
}

fn theory(a: TheoryArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let out_dir = required(a.out_dir, "out-dir")?;
    let ns = a.n.unwrap_or_else(|| DEFAULT_THEORY_N.to_vec());
    let ks = a.ks.unwrap_or_else(|| DEFAULT_THEORY_KS.to_vec());
    if ks.iter().any(|&k| !(k >= 0.0)) {
        return Err(CliError::Usage("control parameters must be non-negative".into()));
    }
    let (klmax, ratio) = theory_csvs(&ns, &ks)?;
    let paths = [out_dir.join("klmax.csv"), out_dir.join("threshold_ratio.csv")];
    write_file(&paths[0], klmax)?;
    write_file(&paths[1], ratio)?;
    list_paths(&paths, stdout)
}

fn run_reproduce(a: ReproduceArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let out_dir = required(a.out_dir, "out-dir")?;
    let written = reproduce(&out_dir, a.threads)?;
    list_paths(&written, stdout)
}

fn compare(a: CompareArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let specs = required(a.curves, "curve")?;
    let out_dir = required(a.out_dir, "out-dir")?;
    let mut loaded: Vec<(String, PfaKCurve)> = Vec::new();
    for s in &specs {
        let (label, path) = s
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected label=path, got {s:?}")))?;
        if label.is_empty() || label.contains(',') {
            return Err(CliError::Usage(format!("bad label {label:?}")));
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read {path}: {e}")))?;
        let curve: PfaKCurve = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("bad curve {path}: {e}")))?;
        curve
            .check()
            .map_err(|e| CliError::Data(format!("bad curve {path}: {e}")))?;
        loaded.push((label.to_string(), curve));
    }
    if loaded.len() < 2 {
        return Err(CliError::Usage("compare needs at least 2 curves".into()));
    }
    let refs: Vec<(&str, &PfaKCurve)> = loaded.iter().map(|(l, c)| (l.as_str(), c)).collect();
    let cmp = compare_curves(&refs)?;
    write_file(&out_dir.join("comparison.csv"), cmp.table_csv())?;
    write_file(&out_dir.join("overlay.csv"), cmp.overlay_csv())?;
    write_file(&out_dir.join("pairs.csv"), cmp.pairs_csv())?;
    emit(None, &cmp.table_csv(), stdout)
}
