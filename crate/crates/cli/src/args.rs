//! Command-line flags and the matching JSON config file.
//!
//! Every flag may also be set in the config file under the subcommand's
//! section; a flag given on the command line wins.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "detect": { "algo": "aagd", "cells": [3, 5, 7, 9] },
//!   "eval_post": { "samples": 256, "dilation": 0 }
//! }
//! ```

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use irstd::detectors::Detector;
use irstd::metrics::post::{KMaxRule, PdMode};
use irstd::threshold::Strategy;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "irstd", version, about = "Infrared small target detection evaluation toolkit")]
pub struct Cli {
    /// JSON file with default values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for anything random; overrides the noise seed of synthesized
    /// scenes.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic scene with ground truth.
    Synth(SynthArgs),
    /// Run a detector and write its saliency map.
    Detect(DetectArgs),
    /// Binarize a saliency map.
    Threshold(ThresholdArgs),
    /// Evaluation metrics.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Pfa-k curve or ROC curve of a saliency map.
    Curve(CurveArgs),
    /// Pulse-model tables for the local threshold bound.
    Theory(TheoryArgs),
    /// Regenerate the full artifact bundle from the synthetic suite.
    Reproduce(ReproduceArgs),
    /// Compare several Pfa-k curves.
    Compare(CompareArgs),
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Pre-thresholding metrics per target.
    Pre(EvalPreArgs),
    /// k_max and Pfa,min, or pixel counts of a binary detection.
    Post(EvalPostArgs),
}

/// Fills every `None` field of `$a` from `$b`.
macro_rules! merge {
    ($a:ident, $b:ident; $($field:ident),* $(,)?) => {
        $( if $a.$field.is_none() { $a.$field = $b.$field; } )*
    };
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthArgs {
    /// Scene spec JSON.
    #[arg(long, conflicts_with_all = ["suite", "tiny"])]
    pub spec: Option<PathBuf>,
    /// Scene of the standard suite, 1 to 6.
    #[arg(long, conflicts_with = "tiny")]
    pub suite: Option<usize>,
    /// The 256x256 tiny-target scene.
    #[arg(long)]
    pub tiny: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Base name of the written files.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectArgs {
    /// Input images (PGM, PNG or grid CSV).
    #[arg(long, num_args = 1..)]
    pub input: Option<Vec<PathBuf>>,
    #[arg(long)]
    pub algo: Option<Detector>,
    /// Top-hat structuring element side.
    #[arg(long)]
    pub se: Option<usize>,
    /// LoG scales.
    #[arg(long, value_delimiter = ',')]
    pub scales: Option<Vec<f64>>,
    /// PCM/AAGD cell sizes.
    #[arg(long, value_delimiter = ',')]
    pub cells: Option<Vec<usize>>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdArgs {
    /// Saliency map.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub strategy: Option<Strategy>,
    /// Fixed threshold.
    #[arg(long)]
    pub t: Option<f64>,
    /// Control parameter of the statistics thresholds.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Local window side.
    #[arg(long)]
    pub window: Option<usize>,
    /// Otsu histogram bins.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Iterative-mean stopping tolerance.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Binary PGM to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalPreArgs {
    /// Detector input image.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub saliency: Option<PathBuf>,
    /// Ground-truth JSON.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Background ring width.
    #[arg(long)]
    pub ring: Option<usize>,
    #[arg(long)]
    pub label: Option<String>,
    /// CSV to write instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalPostArgs {
    #[arg(long)]
    pub saliency: Option<PathBuf>,
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Binary detection (PGM/PNG, nonzero = detected) to count instead.
    #[arg(long)]
    pub binary: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub rule: Option<KMaxRule>,
    #[arg(long)]
    pub dilation: Option<usize>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveArgs {
    #[arg(long)]
    pub saliency: Option<PathBuf>,
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub rule: Option<KMaxRule>,
    #[arg(long)]
    pub dilation: Option<usize>,
    /// Build an ROC curve over this many evenly spaced thresholds instead.
    #[arg(long)]
    pub roc: Option<usize>,
    #[arg(long)]
    pub pd_mode: Option<PdMode>,
    /// Curve CSV to write instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the Pfa-k curve as JSON, for `compare`.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryArgs {
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Window sizes.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Control parameters for the threshold-ratio table.
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<f64>>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReproduceArgs {
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareArgs {
    /// `label=path` of a curve JSON written by `curve --json`.
    #[arg(long = "curve", num_args = 1..)]
    pub curves: Option<Vec<String>>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub synth: SynthArgs,
    pub detect: DetectArgs,
    pub threshold: ThresholdArgs,
    pub eval_pre: EvalPreArgs,
    pub eval_post: EvalPostArgs,
    pub curve: CurveArgs,
    pub theory: TheoryArgs,
    pub reproduce: ReproduceArgs,
    pub compare: CompareArgs,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

impl Cli {
    /// Applies the config file, if any, under the command-line flags.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = ConfigFile::load(&path)?;
        if self.seed.is_none() {
            self.seed = file.seed;
        }
        match &mut self.command {
            Command::Synth(a) => {
                let b = file.synth;
                merge!(a, b; spec, suite, out_dir, name);
                a.tiny |= b.tiny;
            }
            Command::Detect(a) => {
                let b = file.detect;
                merge!(a, b; input, algo, se, scales, cells, out_dir);
            }
            Command::Threshold(a) => {
                let b = file.threshold;
                merge!(a, b; input, strategy, t, k, window, bins, eps, out);
            }
            Command::Eval(EvalCommand::Pre(a)) => {
                let b = file.eval_pre;
                merge!(a, b; input, saliency, gt, ring, label, out);
            }
            Command::Eval(EvalCommand::Post(a)) => {
                let b = file.eval_post;
                merge!(a, b; saliency, gt, binary, samples, rule, dilation, label, out);
            }
            Command::Curve(a) => {
                let b = file.curve;
                merge!(a, b; saliency, gt, samples, rule, dilation, roc, pd_mode, out, json);
            }
            Command::Theory(a) => {
                let b = file.theory;
                merge!(a, b; out_dir, n, ks);
            }
            Command::Reproduce(a) => {
                let b = file.reproduce;
                merge!(a, b; out_dir, threads);
            }
            Command::Compare(a) => {
                let b = file.compare;
                merge!(a, b; curves, out_dir);
            }
        }
        Ok(self)
    }
}

/// Unwraps a setting that must come from a flag or the config file.
pub fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}
