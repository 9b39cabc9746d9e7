//! Experiment runner: ties configuration, tensor files, mask generation,
//! the reconstruction pipeline and metric emission together.
//!
//! A run reads the input frames, synthesizes the measurement stream through
//! the configured mask, reconstructs, and writes three artifacts into the
//! output directory: `recon.oatf` (the frame estimates), `dictionary.oatf`
//! (the final atom matrix) and `metrics.csv` (per-window diagnostics plus a
//! quality summary when a reference is available). A failing run removes
//! whatever artifacts it had already written.

use crate::config::Experiment;
use crate::error::{CliError, Result};
use crate::tensor_file;
use onair_core::dict::build_dct_dictionary;
use onair_core::metrics::MetricReport;
use onair_core::pipeline::{process_minibatch, WindowDiagnostics};
use onair_core::sensing::gen_mask;
use onair_core::{
    reconstruct_stream, ComplexTensor, Cx, Dictionary, MaskSpec, ReconOptions, ReconState,
    SensingOperator, Variant,
};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Outputs of one finished experiment.
pub struct RunArtifacts {
    pub output_dir: PathBuf,
    pub diagnostics: Vec<WindowDiagnostics<f64>>,
    /// Quality metrics; present when the configuration names a reference.
    pub report: Option<MetricReport<f64>>,
}

/// Removes the files a failed run already wrote.
struct PartialOutputs {
    created: Vec<PathBuf>,
    keep: bool,
}

impl PartialOutputs {
    fn new() -> Self {
        PartialOutputs { created: Vec::new(), keep: false }
    }

    fn track(&mut self, path: &Path) {
        self.created.push(path.to_path_buf());
    }
}

impl Drop for PartialOutputs {
    fn drop(&mut self) {
        if !self.keep {
            for path in &self.created {
                let _ = fs::remove_file(path);
            }
        }
    }
}

/// Runs one experiment end to end. Deterministic given the configuration:
/// the mask is drawn from `mask_seed` and the reconstruction itself is
/// randomness-free.
pub fn run_experiment(exp: &Experiment, quiet: bool) -> Result<RunArtifacts> {
    let input = tensor_file::read_frames(&exp.input)?;
    let dims = input.dims().to_vec();
    let (num_frames, ny, nx) = (dims[0], dims[1], dims[2]);

    let reference = match &exp.reference {
        Some(path) => {
            let r = tensor_file::read_frames(path)?;
            if r.dims() != dims.as_slice() {
                return Err(CliError::Config(format!(
                    "reference dims {:?} do not match input dims {:?}",
                    r.dims(),
                    dims
                )));
            }
            Some(r)
        }
        None => None,
    };

    let spec = MaskSpec {
        pattern: exp.mask_pattern,
        seed: exp.mask_seed.unwrap_or(exp.onair.seed),
        per_frame: exp.mask_per_frame,
    };
    let masks = gen_mask(&spec, (nx, ny), num_frames)?;
    let op = SensingOperator::new(exp.sensing, (nx, ny), masks)?;
    let y = op.apply(&input)?;

    let (frames, dictionary, diagnostics) = reconstruct(&op, &y, exp)?;

    let report = match &reference {
        Some(r) => Some(MetricReport::compute(&frames, r)?),
        None => None,
    };

    fs::create_dir_all(&exp.output_dir).map_err(|e| CliError::io(&exp.output_dir, e))?;
    let mut partial = PartialOutputs::new();

    let recon_path = exp.output_dir.join("recon.oatf");
    partial.track(&recon_path);
    tensor_file::write_frames(&recon_path, &frames)?;

    let dict_path = exp.output_dir.join("dictionary.oatf");
    partial.track(&dict_path);
    tensor_file::write_matrix(&dict_path, dictionary.atoms())?;

    let metrics_path = exp.output_dir.join("metrics.csv");
    partial.track(&metrics_path);
    emit_metrics(report.as_ref(), &diagnostics, &metrics_path)?;

    partial.keep = true;

    if !quiet {
        for d in &diagnostics {
            println!(
                "window {:>3} frames [{}, {}): objective {:.6e} -> {:.6e}, sparsity {:.2}%, {:.1} ms",
                d.window_index,
                d.frames.0,
                d.frames.1,
                d.objective_pre,
                d.objective_post,
                d.code_sparsity * 100.0,
                d.wall_ms
            );
        }
        if let Some(r) = &report {
            println!("psnr_3d = {:.4} dB, nrmse = {:.4}%", r.psnr_3d, r.nrmse_percent);
        }
        println!("wrote {}", recon_path.display());
        println!("wrote {}", dict_path.display());
        println!("wrote {}", metrics_path.display());
    }

    Ok(RunArtifacts { output_dir: exp.output_dir.clone(), diagnostics, report })
}

/// Dispatches on the variant. The batch variant processes the whole stream
/// as one window with the first-window iteration budget; everything else
/// goes through the online sliding-window driver.
fn reconstruct(
    op: &SensingOperator<f64>,
    y: &[Cx<f64>],
    exp: &Experiment,
) -> Result<(ComplexTensor<f64>, Dictionary<f64>, Vec<WindowDiagnostics<f64>>)> {
    let cfg = &exp.onair;
    match cfg.variant {
        Variant::Batch(_) => {
            cfg.validate()?;
            let n = op.num_frames();
            let dict0 = build_dct_dictionary(cfg.patch.patch, cfg.variant.constraint())?;
            let mut state = ReconState::new(n, op.frame_dims(), dict0);
            let out = process_minibatch(&mut state, (0, n), y, op, cfg, false)?;
            Ok((out.frames, state.dictionary, vec![out.diagnostics]))
        }
        _ => {
            let out = reconstruct_stream(op, y, cfg, &ReconOptions::default())?;
            Ok((out.frames, out.dictionary, out.diagnostics))
        }
    }
}

/// Writes the per-window diagnostic table followed by a summary block.
///
/// The table has the fixed header
/// `window_index,objective_pre,objective_post,code_sparsity,wall_ms`; the
/// summary block is separated by one blank line and lists `psnr_3d` and
/// `nrmse_percent` (or `reference,none` when no reference was given).
/// Floats are printed with Rust's shortest round-trip formatting, so parsing
/// the file back recovers every value exactly.
pub fn emit_metrics(
    report: Option<&MetricReport<f64>>,
    diagnostics: &[WindowDiagnostics<f64>],
    path: &Path,
) -> Result<()> {
    let mut text = String::from("window_index,objective_pre,objective_post,code_sparsity,wall_ms\n");
    for d in diagnostics {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            d.window_index, d.objective_pre, d.objective_post, d.code_sparsity, d.wall_ms
        ));
    }
    text.push('\n');
    match report {
        Some(r) => {
            text.push_str(&format!("psnr_3d,{}\n", r.psnr_3d));
            text.push_str(&format!("nrmse_percent,{}\n", r.nrmse_percent));
        }
        None => text.push_str("reference,none\n"),
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}

/// One grid point of a parameter sweep.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub lambda_s: f64,
    pub lambda_z: f64,
    pub nrmse_percent: f64,
    pub psnr_3d: f64,
    pub output_dir: PathBuf,
}

/// Runs every `(λ_S, λ_Z)` combination of the grid in parallel worker
/// threads, each into its own subdirectory of the base output directory,
/// and returns the results ranked by NRMSE (best first). The base
/// configuration must name a reference tensor, otherwise there is nothing
/// to rank by.
pub fn run_sweep(
    base: &Experiment,
    lambda_s_grid: &[f64],
    lambda_z_grid: &[f64],
    quiet: bool,
) -> Result<Vec<SweepEntry>> {
    if base.reference.is_none() {
        return Err(CliError::Config(
            "sweep needs a `reference` tensor in the configuration to rank by".into(),
        ));
    }
    if lambda_s_grid.is_empty() || lambda_z_grid.is_empty() {
        return Err(CliError::Config("sweep grids must be non-empty".into()));
    }

    let mut combos = Vec::new();
    for &ls in lambda_s_grid {
        for &lz in lambda_z_grid {
            let mut exp = base.clone();
            exp.onair.lambda_s = ls;
            exp.onair.lambda_z = lz;
            exp.output_dir = base.output_dir.join(format!("ls{ls}_lz{lz}"));
            exp.onair.validate()?;
            combos.push(exp);
        }
    }

    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let workers = workers.min(combos.len());
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<std::sync::Mutex<Option<Result<SweepEntry>>>> =
        combos.iter().map(|_| std::sync::Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= combos.len() {
                    break;
                }
                let exp = &combos[i];
                let entry = run_experiment(exp, true).map(|art| {
                    let report = art.report.expect("sweep runs always carry a reference");
                    SweepEntry {
                        lambda_s: exp.onair.lambda_s,
                        lambda_z: exp.onair.lambda_z,
                        nrmse_percent: report.nrmse_percent,
                        psnr_3d: report.psnr_3d,
                        output_dir: art.output_dir,
                    }
                });
                *results[i].lock().expect("no panics hold this lock") = Some(entry);
            });
        }
    });

    let mut entries = Vec::with_capacity(combos.len());
    for slot in results {
        let entry = slot.into_inner().expect("no panics hold this lock");
        entries.push(entry.expect("every combo was attempted")?);
    }
    entries.sort_by(|a, b| {
        a.nrmse_percent.total_cmp(&b.nrmse_percent).then(
            a.lambda_s.total_cmp(&b.lambda_s).then(a.lambda_z.total_cmp(&b.lambda_z)),
        )
    });

    let ranking_path = base.output_dir.join("ranking.csv");
    let mut text = String::from("rank,lambda_s,lambda_z,nrmse_percent,psnr_3d,output_dir\n");
    for (rank, e) in entries.iter().enumerate() {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            rank + 1,
            e.lambda_s,
            e.lambda_z,
            e.nrmse_percent,
            e.psnr_3d,
            e.output_dir.display()
        ));
    }
    let mut f = fs::File::create(&ranking_path).map_err(|e| CliError::io(&ranking_path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(&ranking_path, e))?;

    if !quiet {
        println!("rank  lambda_s      lambda_z      nrmse%        psnr_3d");
        for (rank, e) in entries.iter().enumerate() {
            println!(
                "{:<5} {:<13} {:<13} {:<13.6} {:<13.6}",
                rank + 1,
                e.lambda_s,
                e.lambda_z,
                e.nrmse_percent,
                e.psnr_3d
            );
        }
        println!("wrote {}", ranking_path.display());
    }

    Ok(entries)
}
