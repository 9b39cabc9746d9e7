//! Line-oriented `key = value` experiment configuration.
//!
//! Every key is validated individually so error messages name the
//! offending key; the assembled reconstruction parameters are then checked
//! once more against the pipeline's own invariants. Unknown and duplicate
//! keys are rejected. Blank lines and lines starting with `#` are ignored.

use crate::error::{CliError, Result};
use onair_core::{MaskPattern, OnairConfig, PatchConfig, SensingKind, Variant};
use std::collections::HashMap;
use std::path::{Path, PathBuf};

/// Every key the format accepts.
const KNOWN_KEYS: &[&str] = &[
    "variant",
    "lambda_s",
    "lambda_z",
    "rho",
    "rank",
    "L",
    "window_len",
    "window_stride",
    "patch_x",
    "patch_y",
    "patch_t",
    "stride_x",
    "stride_y",
    "K",
    "K_hat",
    "K_tilde",
    "K_first",
    "presolve",
    "passes",
    "sensing",
    "mask_pattern",
    "mask_keep",
    "mask_accel",
    "mask_per_frame",
    "mask_seed",
    "seed",
    "input",
    "reference",
    "output_dir",
];

/// A fully validated experiment: reconstruction parameters plus the
/// sampling model and file locations.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub onair: OnairConfig<f64>,
    pub sensing: SensingKind,
    pub mask_pattern: MaskPattern,
    pub mask_per_frame: bool,
    /// Explicit mask seed; defaults to the experiment seed when absent, so
    /// a seed override shifts both.
    pub mask_seed: Option<u64>,
    pub input: PathBuf,
    pub reference: Option<PathBuf>,
    pub output_dir: PathBuf,
}

struct Raw {
    values: HashMap<&'static str, String>,
}

impl Raw {
    fn parse(text: &str) -> Result<Raw> {
        let mut values = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let known = KNOWN_KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| CliError::Config(format!("line {}: unknown key `{key}`", lineno + 1)))?;
            if values.insert(*known, value.to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(Raw { values })
    }

    fn take(&mut self, key: &str) -> Result<String> {
        self.values
            .remove(key)
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    fn take_opt(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn f64(&mut self, key: &str) -> Result<f64> {
        let v = self.take(key)?;
        v.parse::<f64>()
            .map_err(|_| CliError::Config(format!("key `{key}` expects a number, got `{v}`")))
    }

    fn usize(&mut self, key: &str) -> Result<usize> {
        let v = self.take(key)?;
        v.parse::<usize>()
            .map_err(|_| CliError::Config(format!("key `{key}` expects a nonnegative integer, got `{v}`")))
    }

    fn u64(&mut self, key: &str) -> Result<u64> {
        let v = self.take(key)?;
        v.parse::<u64>()
            .map_err(|_| CliError::Config(format!("key `{key}` expects a nonnegative integer, got `{v}`")))
    }
}

fn positive(key: &str, v: usize) -> Result<usize> {
    if v == 0 {
        return Err(CliError::Config(format!("key `{key}` must be at least 1")));
    }
    Ok(v)
}

pub fn parse(text: &str) -> Result<Experiment> {
    let mut raw = Raw::parse(text)?;

    let lambda_s = raw.f64("lambda_s")?;
    if !(lambda_s >= 0.0) {
        return Err(CliError::Config(format!("key `lambda_s` must be nonnegative, got {lambda_s}")));
    }
    let lambda_z = raw.f64("lambda_z")?;
    if !(lambda_z >= 0.0) {
        return Err(CliError::Config(format!("key `lambda_z` must be nonnegative, got {lambda_z}")));
    }
    let rho = raw.f64("rho")?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(CliError::Config(format!("key `rho` must lie in (0, 1], got {rho}")));
    }
    let linf = raw.f64("L")?;
    if !(linf > lambda_z) {
        return Err(CliError::Config(format!(
            "key `L` must exceed lambda_z ({lambda_z}), got {linf}"
        )));
    }

    let window_len = positive("window_len", raw.usize("window_len")?)?;
    let window_stride = positive("window_stride", raw.usize("window_stride")?)?;
    if window_stride > window_len {
        return Err(CliError::Config(format!(
            "key `window_stride` ({window_stride}) may not exceed window_len ({window_len})"
        )));
    }

    let patch_x = positive("patch_x", raw.usize("patch_x")?)?;
    let patch_y = positive("patch_y", raw.usize("patch_y")?)?;
    let patch_t = positive("patch_t", raw.usize("patch_t")?)?;
    let stride_x = positive("stride_x", raw.usize("stride_x")?)?;
    let stride_y = positive("stride_y", raw.usize("stride_y")?)?;
    if stride_x != stride_y {
        return Err(CliError::Config(format!(
            "keys `stride_x` and `stride_y` must agree (one spatial stride), \
             got {stride_x} and {stride_y}"
        )));
    }
    if stride_x > patch_x.min(patch_y) {
        return Err(CliError::Config(format!(
            "key `stride_x` ({stride_x}) may not exceed the patch extents \
             {patch_x}×{patch_y}; voxels would go uncovered"
        )));
    }
    if patch_t > window_len {
        return Err(CliError::Config(format!(
            "key `patch_t` ({patch_t}) may not exceed window_len ({window_len})"
        )));
    }

    let variant_name = raw.take("variant")?;
    let rank = raw.take_opt("rank");
    let parse_rank = |rank: Option<String>| -> Result<usize> {
        let v = rank.ok_or_else(|| {
            CliError::Config(format!("variant `{variant_name}` requires the `rank` key"))
        })?;
        let r = v
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("key `rank` expects a positive integer, got `{v}`")))?;
        positive("rank", r)
    };
    let variant = match variant_name.as_str() {
        "fd" | "ud" | "online_dct" => {
            if rank.is_some() {
                return Err(CliError::Config(format!(
                    "key `rank` only applies to the ld and batch variants, not `{variant_name}`"
                )));
            }
            match variant_name.as_str() {
                "fd" => Variant::Fd,
                "ud" => Variant::Ud,
                _ => Variant::OnlineDct,
            }
        }
        "ld" => Variant::Ld(parse_rank(rank)?),
        "batch" => Variant::Batch(parse_rank(rank)?),
        other => {
            return Err(CliError::Config(format!(
                "key `variant` must be one of fd, ld, ud, online_dct, batch; got `{other}`"
            )))
        }
    };

    let outer_iters = positive("K", raw.usize("K")?)?;
    let dl_iters = positive("K_hat", raw.usize("K_hat")?)?;
    let image_iters = raw.usize("K_tilde")?;
    let first_window_iters = positive("K_first", raw.usize("K_first")?)?;
    let presolve_code_iters = raw.usize("presolve")?;
    let passes = positive("passes", raw.usize("passes")?)?;

    let sensing = match raw.take("sensing")?.as_str() {
        "pixel" => SensingKind::PixelMask,
        "fourier" => SensingKind::FourierMask,
        other => {
            return Err(CliError::Config(format!(
                "key `sensing` must be `pixel` or `fourier`, got `{other}`"
            )))
        }
    };

    let mask_pattern = match raw.take("mask_pattern")?.as_str() {
        "uniform" => {
            let keep = raw.f64("mask_keep")?;
            if !(keep > 0.0 && keep <= 1.0) {
                return Err(CliError::Config(format!(
                    "key `mask_keep` must lie in (0, 1], got {keep}"
                )));
            }
            MaskPattern::UniformRandom { keep_fraction: keep }
        }
        "cartesian" => {
            let accel = raw.f64("mask_accel")?;
            if !(accel >= 1.0) {
                return Err(CliError::Config(format!(
                    "key `mask_accel` must be at least 1, got {accel}"
                )));
            }
            MaskPattern::VariableDensityCartesian { acceleration: accel }
        }
        "radial" => {
            let accel = raw.f64("mask_accel")?;
            if !(accel >= 1.0) {
                return Err(CliError::Config(format!(
                    "key `mask_accel` must be at least 1, got {accel}"
                )));
            }
            MaskPattern::PseudoRadial { acceleration: accel }
        }
        other => {
            return Err(CliError::Config(format!(
                "key `mask_pattern` must be uniform, cartesian or radial; got `{other}`"
            )))
        }
    };
    for leftover in ["mask_keep", "mask_accel"] {
        if raw.values.contains_key(leftover) {
            return Err(CliError::Config(format!(
                "key `{leftover}` does not apply to this mask pattern"
            )));
        }
    }
    let mask_per_frame = match raw.take_opt("mask_per_frame").as_deref() {
        None | Some("true") => true,
        Some("false") => false,
        Some(other) => {
            return Err(CliError::Config(format!(
                "key `mask_per_frame` must be `true` or `false`, got `{other}`"
            )))
        }
    };

    let seed = raw.u64("seed")?;
    let mask_seed = match raw.take_opt("mask_seed") {
        Some(v) => Some(v.parse::<u64>().map_err(|_| {
            CliError::Config(format!("key `mask_seed` expects a nonnegative integer, got `{v}`"))
        })?),
        None => None,
    };

    let input = PathBuf::from(raw.take("input")?);
    let reference = raw.take_opt("reference").map(PathBuf::from);
    let output_dir = PathBuf::from(raw.take("output_dir")?);

    let onair = OnairConfig {
        variant,
        lambda_s,
        lambda_z,
        rho,
        linf_bound: linf,
        window_len,
        window_stride,
        patch: PatchConfig {
            patch: (patch_x, patch_y, patch_t),
            spatial_stride: stride_x,
            temporal_stride: 1,
        },
        outer_iters,
        dl_iters,
        image_iters,
        first_window_iters,
        presolve_code_iters,
        passes,
        seed,
    };
    // Backstop: the pipeline's own cross-field invariants.
    onair.validate().map_err(CliError::from)?;

    Ok(Experiment {
        onair,
        sensing,
        mask_pattern,
        mask_per_frame,
        mask_seed,
        input,
        reference,
        output_dir,
    })
}

pub fn from_file(path: &Path) -> Result<Experiment> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text)
}
