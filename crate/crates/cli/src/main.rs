//! `fibrejoint` command-line front-end.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fibrejoint::calibration::{self, fit_angle_model, predict_angle, usable_range};
use fibrejoint::design::{grid_sweep_with, refine_local, Objective, ScoredDesign};
use fibrejoint::geometry::export_outline;
use fibrejoint::io::{self, fmt_sig, RunConfig};
use fibrejoint::shape::reconstruct_shape;
use fibrejoint::sim::NoiseModel;
use fibrejoint::{Error, Execution, ReflectorProfile, Result};

#[derive(Parser)]
#[command(
    name = "fibrejoint",
    version,
    about = "Fibre-optic joint-angle sensor simulation, calibration and design"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate voltage-vs-angle curves for the configured profiles.
    Simulate(SimulateArgs),
    /// Fit an angle-from-voltage polynomial to a curve CSV.
    Calibrate(CalibrateArgs),
    /// Convert voltages to joint angles with a saved model.
    Estimate(EstimateArgs),
    /// Report the usable monotone range of a curve CSV.
    UsableRange(UsableRangeArgs),
    /// Sweep the configured design space and rank designs.
    Sweep(SweepArgs),
    /// Reconstruct a chain shape from one voltage frame.
    Reconstruct(ReconstructArgs),
    /// Export reflector outlines.
    ExportProfile(ExportProfileArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory; overrides the config's `output.dir`.
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    config: PathBuf,
    /// Only simulate these profiles (repeatable).
    #[arg(long = "profile", value_name = "NAME")]
    profiles: Vec<String>,
    /// Seed for the noise model; enables noise with config or default parameters.
    #[arg(long)]
    seed: Option<u64>,
    /// Noise standard deviation in volts; enables noise.
    #[arg(long, value_name = "SIGMA_V")]
    noise: Option<f64>,
    /// Disable noise even if the config declares it.
    #[arg(long, conflicts_with_all = ["seed", "noise"])]
    clean: bool,
    /// Also write response.svg.
    #[arg(long)]
    plot: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CalibrateArgs {
    curve: PathBuf,
    #[arg(long, default_value_t = calibration::DEFAULT_ORDER)]
    order: usize,
    /// Fit only the usable range of the curve.
    #[arg(long)]
    usable_only: bool,
    /// Slope threshold (V/deg) for --usable-only.
    #[arg(long, default_value_t = calibration::DEFAULT_MIN_SLOPE)]
    min_slope: f64,
    /// Model file name inside the output directory.
    #[arg(long, default_value = "model.toml")]
    name: String,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct EstimateArgs {
    model: PathBuf,
    /// Comma-separated voltages.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    voltages: Vec<f64>,
}

#[derive(Args)]
struct UsableRangeArgs {
    curve: PathBuf,
    #[arg(long, default_value_t = calibration::DEFAULT_MIN_SLOPE)]
    min_slope: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveKind {
    Span,
    Usable,
    Linearity,
}

#[derive(Args)]
struct SweepArgs {
    config: PathBuf,
    #[arg(long, value_enum, default_value_t = ObjectiveKind::Span)]
    objective: ObjectiveKind,
    /// Angle window `LO,HI` in degrees for span and linearity.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.0, 120.0])]
    window: Vec<f64>,
    #[arg(long, default_value_t = calibration::DEFAULT_MIN_SLOPE)]
    min_slope: f64,
    /// Number of ranked designs printed.
    #[arg(long, default_value_t = 5)]
    top: usize,
    /// Refine the best grid design with this many extra evaluations.
    #[arg(long, value_name = "BUDGET")]
    refine: Option<usize>,
    /// Evaluate on one thread.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ReconstructArgs {
    config: PathBuf,
    /// Comma-separated voltage frame, one per link.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    voltages: Vec<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ExportProfileArgs {
    config: PathBuf,
    #[arg(long = "profile", value_name = "NAME")]
    profiles: Vec<String>,
    /// Outline points per profile.
    #[arg(long, default_value_t = 181)]
    samples: usize,
    #[arg(long)]
    plot: bool,
    #[command(flatten)]
    out: OutputArgs,
}

/// Writes only plain file names into one directory.
struct OutputDir(PathBuf);

impl OutputDir {
    fn create(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        Ok(Self(dir))
    }

    fn write(&self, name: &str, text: &str) -> Result<PathBuf> {
        let ok = !name.is_empty()
            && name != "."
            && name != ".."
            && name.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c));
        if !ok {
            return Err(Error::Config(format!("output name `{name}` must be a plain file name")));
        }
        let path = self.0.join(name);
        io::write_text(&path, text)?;
        Ok(path)
    }
}

/// File-name-safe stem for a profile label.
fn stem(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "profile".into()
    } else {
        s
    }
}

fn output_dir(cfg: Option<&RunConfig>, flag: &OutputArgs) -> Result<OutputDir> {
    let dir = flag
        .output_dir
        .clone()
        .or_else(|| cfg.map(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(io::config::DEFAULT_OUTPUT_DIR));
    OutputDir::create(dir)
}

fn selected<'a>(cfg: &'a RunConfig, names: &[String]) -> Result<Vec<&'a ReflectorProfile>> {
    if names.is_empty() {
        return Ok(cfg.profiles.iter().collect());
    }
    names
        .iter()
        .map(|n| {
            cfg.profile(n)
                .ok_or_else(|| Error::Config(format!("undefined profile `{n}`")))
        })
        .collect()
}

fn simulate(args: &SimulateArgs) -> Result<String> {
    let cfg = RunConfig::load(&args.config)?;
    let noise = if args.clean {
        None
    } else if args.seed.is_some() || args.noise.is_some() {
        let base = cfg.noise.unwrap_or_default();
        Some(NoiseModel::new(
            args.noise.unwrap_or(base.sigma_v),
            base.adc_step,
            args.seed.unwrap_or(base.seed),
        )?)
    } else {
        cfg.noise
    };
    let out = output_dir(Some(&cfg), &args.out)?;
    let mut curves = Vec::new();
    let mut report = String::new();
    for profile in selected(&cfg, &args.profiles)? {
        let sensor = cfg.sensor(profile)?;
        let grid = cfg.angle_grid(profile, &sensor.mount)?;
        let curve = sensor.simulate(&grid.values(), noise.as_ref())?;
        let path = out.write(&format!("{}.csv", stem(profile.label())), &io::curve_csv(&curve))?;
        writeln!(report, "{}", path.display()).unwrap();
        curves.push(curve);
    }
    if args.plot || cfg.plot {
        let path = out.write("response.svg", &io::plot_curves(&curves)?)?;
        writeln!(report, "{}", path.display()).unwrap();
    }
    Ok(report)
}

fn calibrate(args: &CalibrateArgs) -> Result<String> {
    let mut curve = io::read_curve_csv(&args.curve)?;
    if args.usable_only {
        let r = usable_range(&curve, args.min_slope)?;
        curve = curve.window(r.q_lo, r.q_hi)?;
    }
    let model = fit_angle_model(&curve, args.order)?;
    let out = output_dir(None, &args.out)?;
    let path = out.write(&args.name, &model.to_toml_string())?;
    let (lo, hi) = curve.angle_span();
    let (v_lo, v_hi) = model.v_domain();
    Ok(format!(
        "model,order,samples,angle_lo_deg,angle_hi_deg,v_lo,v_hi,rmse_deg\n{},{},{},{},{},{},{},{}\n",
        path.display(),
        model.order(),
        curve.len(),
        fmt_sig(lo),
        fmt_sig(hi),
        fmt_sig(v_lo),
        fmt_sig(v_hi),
        fmt_sig(model.rmse_deg())
    ))
}

fn estimate(args: &EstimateArgs) -> Result<String> {
    let model = io::load_model(&args.model)?;
    let mut out = String::from("voltage_v,angle_deg\n");
    for &v in &args.voltages {
        writeln!(out, "{},{}", fmt_sig(v), fmt_sig(predict_angle(&model, v)?)).unwrap();
    }
    Ok(out)
}

fn usable(args: &UsableRangeArgs) -> Result<String> {
    let curve = io::read_curve_csv(&args.curve)?;
    let r = usable_range(&curve, args.min_slope)?;
    Ok(format!(
        "q_lo_deg,q_hi_deg,length_deg,delta_v\n{},{},{},{}\n",
        fmt_sig(r.q_lo),
        fmt_sig(r.q_hi),
        fmt_sig(r.q_hi - r.q_lo),
        fmt_sig(r.delta_v)
    ))
}

fn sweep(args: &SweepArgs) -> Result<String> {
    let cfg = RunConfig::load(&args.config)?;
    let window = (args.window[0], args.window[1]);
    let objective = match args.objective {
        ObjectiveKind::Span => Objective::VoltageSpan { window },
        ObjectiveKind::Usable => Objective::UsableRangeLength {
            min_slope: args.min_slope,
        },
        ObjectiveKind::Linearity => Objective::LinearityError { window },
    };
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let ranked = grid_sweep_with(&cfg.sweep, &objective, exec)?;
    let out = output_dir(Some(&cfg), &args.out)?;
    let path = out.write("sweep.csv", &io::sweep_csv(&ranked))?;

    let mut report = format!("# objective: {}\n# written: {}\n", objective.name(), path.display());
    let mut summary: Vec<ScoredDesign> = ranked.iter().take(args.top).copied().collect();
    if let (Some(budget), Some(best)) = (args.refine, ranked.first()) {
        let refined = refine_local(&best.design, &cfg.sweep, &objective, budget)?;
        writeln!(report, "# refined from rank 1").unwrap();
        summary.insert(0, refined);
    }
    report.push_str(&io::sweep_csv(&summary));
    Ok(report)
}

fn reconstruct(args: &ReconstructArgs) -> Result<String> {
    let cfg = RunConfig::load(&args.config)?;
    let base_dir = args.config.parent().unwrap_or(Path::new("."));
    let chain = cfg.build_chain(base_dir)?;
    let shape = reconstruct_shape(&chain, &args.voltages)?;
    let out = output_dir(Some(&cfg), &args.out)?;
    out.write("shape.csv", &io::shape_csv(&shape))?;
    out.write("shape.svg", &io::plot_shape(&shape)?)?;
    let tip = shape.tip_pose;
    let angles: Vec<String> = shape.angles.iter().map(|a| fmt_sig(*a)).collect();
    Ok(format!(
        "angles_deg,tip_x_mm,tip_y_mm,tip_heading_deg\n{},{},{},{}\n",
        angles.join(" "),
        fmt_sig(tip.x),
        fmt_sig(tip.y),
        fmt_sig(tip.heading_deg)
    ))
}

fn export_profile(args: &ExportProfileArgs) -> Result<String> {
    let cfg = RunConfig::load(&args.config)?;
    let out = output_dir(Some(&cfg), &args.out)?;
    let mut report = String::new();
    for profile in selected(&cfg, &args.profiles)? {
        let mount = cfg.mount.for_profile(profile)?;
        let points = export_outline(profile, &mount, args.samples)?;
        let name = stem(profile.label());
        let path = out.write(&format!("{name}_outline.csv"), &io::xy_csv(&points))?;
        writeln!(report, "{}", path.display()).unwrap();
        if args.plot || cfg.plot {
            let path = out.write(
                &format!("{name}_outline.svg"),
                &io::plot_outline(&points, profile.label())?,
            )?;
            writeln!(report, "{}", path.display()).unwrap();
        }
    }
    Ok(report)
}

fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Estimate(a) => estimate(a),
        Command::UsableRange(a) => usable(a),
        Command::Sweep(a) => sweep(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::ExportProfile(a) => export_profile(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = e.to_string().replace(['\n', '\r'], " ");
            eprintln!("error[{}]: {msg}", e.kind());
            ExitCode::FAILURE
        }
    }
}
