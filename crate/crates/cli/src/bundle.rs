//! The reproducible artifact bundle.
//!
//! ```text
//! curves/scene<i>_<algo>.csv   24 normalized Pfa-k curves (k,pfa)
//! tables/k_max.csv             algorithm,scene1..scene6
//! tables/pfa_min.csv           algorithm,scene1..scene6
//! theory/klmax.csv             n,W,klmax
//! theory/threshold_ratio.csv   n,W,k,T_over_A
//! ```
//!
//! The target-free scene has no `k_max`; its curve sweeps `[0, k_ref]`
//! with `k_ref = (max - mean) / std` of the map, and its table cells are
//! `nan`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use irstd::detectors::{Detector, DetectorConfig};
use irstd::io::fmt_float;
use irstd::metrics::post::{
    k_reference, pfa_k_curve, pfa_k_curve_target_free, CurveOptions, PfaKCurve,
};
use irstd::pulse::{sweep_klmax, sweep_threshold_ratio};
use irstd::synth::{standard_suite, Scene};
use rayon::prelude::*;

use crate::{write_file, CliError, CliResult};

pub const DEFAULT_THEORY_N: [usize; 2] = [33, 17];
pub const DEFAULT_THEORY_KS: [f64; 6] = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];

/// `(klmax.csv, threshold_ratio.csv)` for the given window sizes and
/// control parameters, every width `1..n` included.
pub fn theory_csvs(ns: &[usize], ks: &[f64]) -> CliResult<(String, String)> {
    let mut klmax = String::from("n,W,klmax\n");
    let mut ratio = String::from("n,W,k,T_over_A\n");
    for &n in ns {
        if n < 2 {
            return Err(CliError::Usage(format!("window size {n} leaves no pulse width")));
        }
        for (w, k) in sweep_klmax(n, 1..n)? {
            let _ = writeln!(klmax, "{n},{w},{}", fmt_float(k));
        }
        for r in sweep_threshold_ratio(n, ks, 1..n)? {
            let _ = writeln!(ratio, "{n},{},{},{}", r.w, fmt_float(r.k), fmt_float(r.t_over_a));
        }
    }
    Ok((klmax, ratio))
}

/// Pfa-k curve of a map; target-free scenes get the reference sweep.
pub fn scene_curve(map: &irstd::GrayImage, scene: &Scene, opts: &CurveOptions) -> irstd::Result<PfaKCurve> {
    if scene.gt.targets().is_empty() {
        let k_ref = k_reference(map)?;
        pfa_k_curve_target_free(map, k_ref, opts.n_samples)
    } else {
        pfa_k_curve(map, &scene.gt, opts)
    }
}

/// One evaluated `(scene, detector)` pair.
#[derive(Clone, Debug)]
pub struct SuiteRun {
    pub scene: usize,
    pub detector: Detector,
    pub target_free: bool,
    pub curve: PfaKCurve,
}

/// Runs the four baselines on every suite scene, in scene-major order.
pub fn evaluate_suite() -> CliResult<Vec<SuiteRun>> {
    let suite = standard_suite();
    let config = DetectorConfig::default();
    let opts = CurveOptions::default();
    let jobs: Vec<(usize, Detector)> = (0..suite.len())
        .flat_map(|s| Detector::BASELINES.into_iter().map(move |d| (s, d)))
        .collect();
    jobs.par_iter()
        .map(|&(s, d)| {
            let scene = &suite[s];
            let map = d.run(&scene.image, &config)?;
            Ok(SuiteRun {
                scene: s + 1,
                detector: d,
                target_free: scene.gt.targets().is_empty(),
                curve: scene_curve(&map, scene, &opts)?,
            })
        })
        .collect::<irstd::Result<Vec<_>>>()
        .map_err(CliError::from)
}

fn table(runs: &[SuiteRun], value: impl Fn(&SuiteRun) -> f64) -> String {
    let scenes = runs.iter().map(|r| r.scene).max().unwrap_or(0);
    let mut out = String::from("algorithm");
    for s in 1..=scenes {
        let _ = write!(out, ",scene{s}");
    }
    out.push('\n');
    for det in Detector::BASELINES {
        out.push_str(det.name());
        for s in 1..=scenes {
            let cell = runs
                .iter()
                .find(|r| r.scene == s && r.detector == det)
                .map(|r| if r.target_free { f64::NAN } else { value(r) })
                .unwrap_or(f64::NAN);
            let _ = write!(out, ",{}", fmt_float(cell));
        }
        out.push('\n');
    }
    out
}

/// Relative path and contents of every bundle file, sorted by path.
pub fn bundle_files() -> CliResult<Vec<(PathBuf, String)>> {
    let runs = evaluate_suite()?;
    let mut files = Vec::with_capacity(28);
    for r in &runs {
        files.push((
            PathBuf::from(format!("curves/scene{}_{}.csv", r.scene, r.detector.name())),
            r.curve.to_csv(),
        ));
    }
    files.push(("tables/k_max.csv".into(), table(&runs, |r| r.curve.k_max)));
    files.push(("tables/pfa_min.csv".into(), table(&runs, |r| r.curve.pfa_min)));
    let (klmax, ratio) = theory_csvs(&DEFAULT_THEORY_N, &DEFAULT_THEORY_KS)?;
    files.push(("theory/klmax.csv".into(), klmax));
    files.push(("theory/threshold_ratio.csv".into(), ratio));
    files.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(files)
}

/// Computes the bundle on `threads` workers (all cores when `None`) and
/// writes it under `out_dir`. Returns the written paths.
pub fn reproduce(out_dir: &Path, threads: Option<usize>) -> CliResult<Vec<PathBuf>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Data(format!("thread pool: {e}")))?;
    let files = pool.install(bundle_files)?;
    files
        .into_iter()
        .map(|(rel, text)| {
            let path = out_dir.join(rel);
            write_file(&path, text)?;
            Ok(path)
        })
        .collect()
}
