use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use mrf_cli::bench::{load_instances, run_bench};
use mrf_cli::format::{parse_instance, parse_labeling, write_instance, write_labeling};
use mrf_cli::manifest::parse_manifest;
use mrf_cli::{ParseError, ValidationError};
use mrf_core::models::{
    gen_binary_characterization, gen_deconvolution, gen_synthetic, gen_texture, three_tone_scene,
    DeconvolutionParams, Structure, SyntheticSpec, TextureParams,
};
use mrf_core::solvers::InitialLabeling;
use mrf_core::{salt_pepper, solve, Algorithm, DiscreteEnergy, GrayImage, MrfError, SolverConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "mrf",
    version,
    about = "Generate, solve and benchmark pairwise MRF energies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Minimize an instance and print the final energy.
    Solve(SolveArgs),
    /// Run a manifest of instances x algorithms x seeds.
    Bench(BenchArgs),
    /// Print the energy of a labeling.
    Eval { instance: PathBuf, labels: PathBuf },
}

#[derive(Args)]
struct GenOut {
    /// Output file; defaults to a name derived from the parameters.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Multi-label test bed instance, named `lambda-rate-STRUCTURE`.
    Synthetic {
        #[arg(long, default_value = "GRID8")]
        structure: Structure,
        /// Grid side, or node count for FULL.
        #[arg(long, default_value_t = 30)]
        size: usize,
        #[arg(long, default_value_t = 5)]
        labels: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Fraction of non-metric edges in [0, 1].
        #[arg(long, default_value_t = 0.5)]
        rate: f64,
        /// Use exactly round(rate * edges) non-metric edges.
        #[arg(long)]
        exact_count: bool,
        #[command(flatten)]
        out: GenOut,
    },
    /// Binary 4-grid instance with a prescribed unary strength.
    Binary {
        #[arg(long, default_value_t = 30)]
        side: usize,
        #[arg(long, default_value_t = 0.4)]
        strength: f64,
        #[command(flatten)]
        out: GenOut,
    },
    /// Deconvolution of a three-tone image (a built-in scene unless --clean is given).
    Deconv {
        #[arg(long)]
        clean: Option<PathBuf>,
        /// Side of the built-in scene.
        #[arg(long, default_value_t = 64)]
        scene_size: usize,
        #[arg(long, default_value_t = 3.0)]
        kernel_sigma: f64,
        #[arg(long, default_value_t = 3)]
        kernel_size: usize,
        #[arg(long, default_value_t = 10.0)]
        noise_sigma: f64,
        #[arg(long, default_value_t = 50.0)]
        smoothness: f64,
        /// Where to write the blurred, noisy observation (PGM).
        #[arg(long)]
        noisy_out: Option<PathBuf>,
        #[command(flatten)]
        out: GenOut,
    },
    /// Binary texture restoration from a clean texture and a (noisy) observation.
    Texture {
        /// Clean training texture (PGM); gray images are thresholded at --threshold.
        #[arg(long)]
        clean: PathBuf,
        /// Observed image; by default the clean one with salt-and-pepper noise.
        #[arg(long)]
        noisy: Option<PathBuf>,
        #[arg(long, default_value_t = 0.7)]
        noise: f64,
        #[arg(long, default_value_t = 128)]
        threshold: u8,
        #[arg(long, default_value_t = 3)]
        submodular: usize,
        #[arg(long, default_value_t = 3)]
        non_submodular: usize,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 35)]
        window: usize,
        #[arg(long)]
        noisy_out: Option<PathBuf>,
        #[command(flatten)]
        out: GenOut,
    },
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "ga")]
    algo: Algorithm,
    #[arg(long)]
    budget_s: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Consecutive non-improving fusions before stopping.
    #[arg(long, default_value_t = 20)]
    window: usize,
    /// Inner expansion steps per GA proposal (default min(5, L)).
    #[arg(long)]
    k: Option<usize>,
    /// Starting labeling file (default all zeros).
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Leave the wall_ms column of the trace empty.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the manifest's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Leave the wall_ms column of runs.csv empty.
    #[arg(long)]
    no_timing: bool,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_image(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    GrayImage::read_pgm(bytes.as_slice()).with_context(|| format!("in {}", path.display()))
}

fn write_image(img: &GrayImage, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    img.write_pgm_binary(&mut w)?;
    w.flush()?;
    Ok(())
}

fn load_instance(path: &Path) -> Result<DiscreteEnergy> {
    parse_instance(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn save_instance(energy: &DiscreteEnergy, out: &Option<PathBuf>, default: String) -> Result<()> {
    let path = out.clone().unwrap_or_else(|| PathBuf::from(default));
    let mut w = create(&path)?;
    write_instance(energy, &mut w)?;
    w.flush()?;
    println!(
        "wrote {} ({} nodes, {} edges, {} labels)",
        path.display(),
        energy.node_count(),
        energy.edge_count(),
        energy.label_count()
    );
    Ok(())
}

fn cmd_gen(cmd: GenCommand) -> Result<()> {
    match cmd {
        GenCommand::Synthetic {
            structure,
            size,
            labels,
            lambda,
            rate,
            exact_count,
            out,
        } => {
            let spec = SyntheticSpec::new(structure, size, labels, lambda, rate)
                .with_seed(out.seed)
                .with_exact_count(exact_count);
            let energy = gen_synthetic(&spec)?;
            save_instance(
                &energy,
                &out.out,
                format!("{}-s{}.mrf", spec.name(), out.seed),
            )
        }
        GenCommand::Binary {
            side,
            strength,
            out,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(out.seed);
            let energy = gen_binary_characterization(side, strength, &mut rng)?;
            save_instance(
                &energy,
                &out.out,
                format!("binary-{strength}-s{}.mrf", out.seed),
            )
        }
        GenCommand::Deconv {
            clean,
            scene_size,
            kernel_sigma,
            kernel_size,
            noise_sigma,
            smoothness,
            noisy_out,
            out,
        } => {
            let image = match &clean {
                Some(p) => read_image(p)?,
                None => three_tone_scene(scene_size)?,
            };
            let params = DeconvolutionParams {
                kernel_sigma,
                kernel_size,
                noise_sigma,
                smoothness,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(out.seed);
            let problem = gen_deconvolution(&image, &params, &mut rng)?;
            if let Some(p) = &noisy_out {
                write_image(&problem.noisy, p)?;
            }
            save_instance(
                &problem.energy,
                &out.out,
                format!("deconv-s{}.mrf", out.seed),
            )
        }
        GenCommand::Texture {
            clean,
            noisy,
            noise,
            threshold,
            submodular,
            non_submodular,
            beta,
            window,
            noisy_out,
            out,
        } => {
            let as_binary = |img: GrayImage| {
                if img.is_binary() {
                    img
                } else {
                    img.binarize(threshold)
                }
            };
            let clean_img = as_binary(read_image(&clean)?);
            let observed = match &noisy {
                Some(p) => as_binary(read_image(p)?),
                None => {
                    if !(0.0..=1.0).contains(&noise) {
                        return Err(ValidationError(format!(
                            "noise fraction {noise} outside [0, 1]"
                        ))
                        .into());
                    }
                    salt_pepper(&clean_img, noise, &mut ChaCha8Rng::seed_from_u64(out.seed))
                }
            };
            if let Some(p) = &noisy_out {
                write_image(&observed, p)?;
            }
            let params = TextureParams {
                submodular,
                non_submodular,
                beta,
                window,
            };
            let energy = gen_texture(&clean_img, &observed, &params)?;
            save_instance(&energy, &out.out, format!("texture-s{}.mrf", out.seed))
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let energy = load_instance(&args.instance)?;
    let mut cfg = SolverConfig::new(args.algo)
        .with_seed(args.seed)
        .with_convergence_window(args.window);
    if let Some(s) = args.budget_s {
        if !(s > 0.0 && s.is_finite()) {
            return Err(ValidationError(format!("budget {s} must be positive")).into());
        }
        cfg = cfg.with_time_budget(Duration::from_secs_f64(s));
    }
    if let Some(n) = args.max_iters {
        cfg = cfg.with_max_iterations(n);
    }
    if cfg.time_budget.is_none() && cfg.max_iterations.is_none() {
        cfg = cfg.with_time_budget(Duration::from_secs(10));
    }
    if let Some(k) = args.k {
        if k == 0 {
            return Err(ValidationError("k must be at least 1".into()).into());
        }
        cfg = cfg.with_k(k);
    }
    if let Some(p) = &args.init {
        let x = parse_labeling(&read(p)?).with_context(|| format!("in {}", p.display()))?;
        cfg = cfg.with_initial(InitialLabeling::Given(x));
    }
    let (x, trace) = solve(&energy, &cfg)?;
    if let Some(p) = &args.trace {
        let mut w = create(p)?;
        trace.write_csv(&mut w, !args.no_timing)?;
        w.flush()?;
    }
    if let Some(p) = &args.labels_out {
        let mut w = create(p)?;
        write_labeling(&x, &mut w)?;
        w.flush()?;
    }
    println!("{:.16e}", trace.final_energy);
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let text = read(&args.manifest)?;
    let base = args.manifest.parent().unwrap_or(Path::new("."));
    let mut manifest =
        parse_manifest(&text, base).with_context(|| format!("in {}", args.manifest.display()))?;
    if let Some(s) = args.seed {
        manifest.master_seed = s;
    }
    let threads = match std::env::var("MRF_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                return Err(ValidationError(format!(
                    "MRF_THREADS must be a positive integer, got `{v}`"
                ))
                .into())
            }
        },
        Err(_) => None,
    };
    let energies = load_instances(&manifest.instances)?;
    let report = run_bench(&manifest, &energies, threads)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let mut runs = create(&args.out.join("runs.csv"))?;
    report.write_runs(&mut runs, !args.no_timing)?;
    runs.flush()?;
    let mut summary = create(&args.out.join("summary.csv"))?;
    report.write_summary(&mut summary)?;
    summary.flush()?;
    println!(
        "{} runs, {} summary rows written to {}",
        report.runs.len(),
        report.summary.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_eval(instance: &Path, labels: &Path) -> Result<()> {
    let energy = load_instance(instance)?;
    let x = parse_labeling(&read(labels)?).with_context(|| format!("in {}", labels.display()))?;
    let value = energy.evaluate(&x)?;
    println!("{value:.16e}");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(g) => cmd_gen(g),
        Command::Solve(s) => cmd_solve(s),
        Command::Bench(b) => cmd_bench(b),
        Command::Eval { instance, labels } => cmd_eval(&instance, &labels),
    }
}

/// 2 for invalid parameters or instances, 1 for I/O and parse failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ValidationError>() {
            return 2;
        }
        if cause.is::<ParseError>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<MrfError>() {
            return if matches!(e, MrfError::Image(_)) {
                1
            } else {
                2
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
