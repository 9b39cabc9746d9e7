//! `onair`: synthetic data, sampling masks, reconstruction runs, metrics
//! and parameter sweeps from the command line.

use clap::{Args, Parser, Subcommand, ValueEnum};
use onair_cli::error::{CliError, Result};
use onair_cli::{config, runner, synth, tensor_file};
use onair_core::metrics::MetricReport;
use onair_core::sensing::gen_mask;
use onair_core::{MaskPattern, MaskSpec, PatchConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "onair",
    version,
    about = "Online adaptive dictionary-learning reconstruction of dynamic images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic test data (planted-dictionary stream or phantom).
    Synth(SynthArgs),
    /// Generate a sampling-mask tensor.
    Mask(MaskArgs),
    /// Run a reconstruction experiment from a configuration file.
    Reconstruct(ReconstructArgs),
    /// Compare a reconstruction against a reference tensor.
    Metrics(MetricsArgs),
    /// Grid-search the sparsity weights and rank the results.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SynthModel {
    Planted,
    Phantom,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MotionArg {
    None,
    Translate,
    Ramp,
}

#[derive(Args)]
struct SynthArgs {
    /// Data model to generate.
    #[arg(value_enum)]
    model: SynthModel,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    #[arg(long, default_value_t = 20)]
    frames: usize,
    /// Output path of the generated frame tensor.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,

    // Planted-model knobs.
    #[arg(long, default_value_t = 8)]
    patch_x: usize,
    #[arg(long, default_value_t = 8)]
    patch_y: usize,
    #[arg(long, default_value_t = 2)]
    patch_t: usize,
    /// Spatial stride of the planted patch grid; defaults to the smaller
    /// patch side (non-overlapping tiles).
    #[arg(long)]
    stride: Option<usize>,
    /// Temporal stride of the planted patch grid; defaults to the patch
    /// depth (non-overlapping tiles).
    #[arg(long)]
    stride_t: Option<usize>,
    /// Atoms in the planted dictionary.
    #[arg(long, default_value_t = 20)]
    atoms: usize,
    /// Nonzero codes per planted patch.
    #[arg(long, default_value_t = 3)]
    sparsity: usize,
    /// Measurement SNR in dB (`inf` leaves the data noiseless).
    #[arg(long, default_value_t = f64::INFINITY)]
    snr_db: f64,
    /// Plant atoms whose space-time reshape has exactly this rank.
    #[arg(long)]
    atom_rank: Option<usize>,
    /// Plant a dictionary with orthonormal columns.
    #[arg(long)]
    unitary: bool,
    /// Also write the noiseless frames here.
    #[arg(long)]
    clean_out: Option<PathBuf>,
    /// Also write the planted dictionary here.
    #[arg(long)]
    dict_out: Option<PathBuf>,

    // Phantom knobs.
    /// Phantom motion model.
    #[arg(long, value_enum, default_value_t = MotionArg::None)]
    motion: MotionArg,
    /// Pixels per frame for the translating phantom.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    motion_px: i64,
    /// Intensity gain of the ramp phantom.
    #[arg(long, default_value_t = 0.5)]
    motion_gain: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PatternArg {
    Uniform,
    Cartesian,
    Radial,
}

#[derive(Args)]
struct MaskArgs {
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    #[arg(long)]
    frames: usize,
    #[arg(long, value_enum)]
    pattern: PatternArg,
    /// Kept fraction in (0, 1] for the uniform pattern.
    #[arg(long)]
    keep: Option<f64>,
    /// Acceleration (undersampling factor ≥ 1) for cartesian and radial.
    #[arg(long)]
    accel: Option<f64>,
    /// Draw a fresh pattern for every frame.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    per_frame: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path of the 0/1 mask tensor.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configuration's seed (and the mask seed derived from
    /// it).
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configuration's output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Suppress per-window progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct MetricsArgs {
    /// Reconstruction tensor.
    #[arg(long)]
    recon: PathBuf,
    /// Reference tensor.
    #[arg(long)]
    reference: PathBuf,
    /// Optionally write the metrics table here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Base experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated λ_S grid.
    #[arg(long, value_delimiter = ',', required = true)]
    lambda_s: Vec<f64>,
    /// Comma-separated λ_Z grid.
    #[arg(long, value_delimiter = ',', required = true)]
    lambda_z: Vec<f64>,
    /// Suppress the ranking table on stdout.
    #[arg(long)]
    quiet: bool,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(args) => run_synth(args),
        Command::Mask(args) => run_mask(args),
        Command::Reconstruct(args) => run_reconstruct(args),
        Command::Metrics(args) => run_metrics(args),
        Command::Sweep(args) => run_sweep(args),
    }
}

fn check_dims(width: usize, height: usize, frames: usize) -> Result<()> {
    if width == 0 || height == 0 || frames == 0 {
        return Err(CliError::Config(format!(
            "frame dimensions must be positive, got {width}x{height}x{frames}"
        )));
    }
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<()> {
    check_dims(args.width, args.height, args.frames)?;
    match args.model {
        SynthModel::Planted => {
            let patch = PatchConfig {
                patch: (args.patch_x, args.patch_y, args.patch_t),
                spatial_stride: args.stride.unwrap_or(args.patch_x.min(args.patch_y)),
                temporal_stride: args.stride_t.unwrap_or(args.patch_t),
            };
            let params = synth::PlantedParams {
                frame_dims: (args.width, args.height),
                num_frames: args.frames,
                patch,
                num_atoms: args.atoms,
                sparsity: args.sparsity,
                snr_db: args.snr_db,
                atom_rank: args.atom_rank,
                unitary: args.unitary,
                seed: args.seed,
            };
            let scene = synth::synth_planted(&params)?;
            tensor_file::write_frames(&args.out, &scene.noisy)?;
            println!("wrote {}", args.out.display());
            if let Some(path) = &args.clean_out {
                tensor_file::write_frames(path, &scene.clean)?;
                println!("wrote {}", path.display());
            }
            if let Some(path) = &args.dict_out {
                tensor_file::write_matrix(path, scene.dictionary.atoms())?;
                println!("wrote {}", path.display());
            }
        }
        SynthModel::Phantom => {
            let motion = match args.motion {
                MotionArg::None => synth::Motion::None,
                MotionArg::Translate => synth::Motion::Translate { px_per_frame: args.motion_px },
                MotionArg::Ramp => synth::Motion::IntensityRamp { gain: args.motion_gain },
            };
            let frames = synth::synth_phantom((args.width, args.height), args.frames, motion);
            tensor_file::write_frames_real(&args.out, &frames)?;
            println!("wrote {}", args.out.display());
        }
    }
    Ok(())
}

fn run_mask(args: MaskArgs) -> Result<()> {
    check_dims(args.width, args.height, args.frames)?;
    let pattern = match args.pattern {
        PatternArg::Uniform => {
            let keep = args
                .keep
                .ok_or_else(|| CliError::Config("pattern `uniform` needs --keep".into()))?;
            if args.accel.is_some() {
                return Err(CliError::Config("--accel does not apply to the uniform pattern".into()));
            }
            if !(keep > 0.0 && keep <= 1.0) {
                return Err(CliError::Config(format!("--keep must lie in (0, 1], got {keep}")));
            }
            MaskPattern::UniformRandom { keep_fraction: keep }
        }
        PatternArg::Cartesian | PatternArg::Radial => {
            let accel = args
                .accel
                .ok_or_else(|| CliError::Config("this pattern needs --accel".into()))?;
            if args.keep.is_some() {
                return Err(CliError::Config("--keep only applies to the uniform pattern".into()));
            }
            if !(accel >= 1.0) {
                return Err(CliError::Config(format!("--accel must be at least 1, got {accel}")));
            }
            match args.pattern {
                PatternArg::Cartesian => MaskPattern::VariableDensityCartesian { acceleration: accel },
                _ => MaskPattern::PseudoRadial { acceleration: accel },
            }
        }
    };
    let spec = MaskSpec { pattern, seed: args.seed, per_frame: args.per_frame };
    let masks = gen_mask(&spec, (args.width, args.height), args.frames)?;
    let mut data = Vec::with_capacity(args.frames * args.height * args.width);
    for frame in &masks {
        data.extend(frame.iter().map(|&kept| if kept { 1.0 } else { 0.0 }));
    }
    tensor_file::write_real(&args.out, &[args.frames, args.height, args.width], &data)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn run_reconstruct(args: ReconstructArgs) -> Result<()> {
    let mut exp = config::from_file(&args.config)?;
    if let Some(seed) = args.seed {
        exp.onair.seed = seed;
    }
    if let Some(dir) = args.output_dir {
        exp.output_dir = dir;
    }
    runner::run_experiment(&exp, args.quiet)?;
    Ok(())
}

fn run_metrics(args: MetricsArgs) -> Result<()> {
    let recon = tensor_file::read_frames(&args.recon)?;
    let reference = tensor_file::read_frames(&args.reference)?;
    if recon.dims() != reference.dims() {
        return Err(CliError::Config(format!(
            "reconstruction dims {:?} do not match reference dims {:?}",
            recon.dims(),
            reference.dims()
        )));
    }
    let report = MetricReport::compute(&recon, &reference)?;
    println!("psnr_3d = {:.4} dB", report.psnr_3d);
    println!("nrmse = {:.4}%", report.nrmse_percent);
    for (t, p) in report.psnr_per_frame.iter().enumerate() {
        println!("frame {t:>3}: psnr = {p:.4} dB");
    }
    if let Some(path) = &args.out {
        runner::emit_metrics(Some(&report), &[], path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let exp = config::from_file(&args.config)?;
    runner::run_sweep(&exp, &args.lambda_s, &args.lambda_z, args.quiet)?;
    Ok(())
}
