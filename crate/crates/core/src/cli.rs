//! Command-line front end. Every command produces one JSON document that embeds
//! the [`RunConfig`] it was run with.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::ball_eigen::{default_bracket, solve_default, solve_lambda1_on_grid, DEFAULT_GRID_SIZE};
use crate::constants::{compute_constants, corollary_check, ManifoldModel, NashConstants, Verdict};
use crate::error::{invalid, Result};
use crate::extremal_profile::{build_phi, unit_height_phi, RadialFunction};
use crate::nash_functional::{evaluate, property_suite, SuiteReport};
use crate::penalized_minimizer::{
    alpha_sweep, build_grid, initial_state, EpsSchedule, InitKind, SweepOptions, SweepPoint, DEFAULT_BUMP_WIDTH,
    DEFAULT_DELTAS, DEFAULT_MAX_ITER, DEFAULT_TOL,
};

pub const THREADS_ENV: &str = "NASH_SHARP_THREADS";
pub const DEFAULT_ALPHA0_MARGIN: f64 = 0.1;
pub const DEFAULT_RESOLUTION: usize = 512;
pub const DEFAULT_PROFILE_SAMPLES: usize = 65;
const ZONAL_CAVEAT: &str = "minimization restricted to zonal (rotationally symmetric) functions";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Constants,
    Eigen,
    Profile,
    Verify,
    Threshold,
    Minimize,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelArg {
    Circle,
    Sphere,
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum InitArg {
    Constant,
    Bump,
    Random,
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    pub dim: usize,
    pub model: Option<ModelArg>,
    pub radius: Option<f64>,
    pub length: Option<f64>,
    pub side: Option<f64>,
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub k: f64,
    pub samples: usize,
    pub csv: Option<PathBuf>,
    pub trials: usize,
    pub seed: u64,
    pub alpha: Option<f64>,
    pub alphas: Vec<f64>,
    pub alpha0: Option<f64>,
    pub alpha0_margin: f64,
    pub eps: Option<f64>,
    pub resolution: usize,
    pub init: InitArg,
    pub max_iter: usize,
    pub independent: bool,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: CommandKind::Constants,
            dim: 1,
            model: None,
            radius: None,
            length: None,
            side: None,
            tol: None,
            grid: None,
            k: 1.0,
            samples: DEFAULT_PROFILE_SAMPLES,
            csv: None,
            trials: 1000,
            seed: 0,
            alpha: None,
            alphas: Vec::new(),
            alpha0: None,
            alpha0_margin: DEFAULT_ALPHA0_MARGIN,
            eps: None,
            resolution: DEFAULT_RESOLUTION,
            init: InitArg::Bump,
            max_iter: DEFAULT_MAX_ITER,
            independent: false,
            output_path: None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nash-sharp",
    version,
    about = "Sharp L2 Nash constants, extremal profiles and penalized minimizers"
)]
pub struct Cli {
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Run a serialized RunConfig instead of a subcommand.
    #[arg(long)]
    pub json_config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Commands>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub dim: usize,
    /// Sphere radius.
    #[arg(long, conflicts_with_all = ["length", "side"])]
    pub radius: Option<f64>,
    /// Circle length.
    #[arg(long, conflicts_with = "side")]
    pub length: Option<f64>,
    /// Torus side.
    #[arg(long)]
    pub side: Option<f64>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct MinimizeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Penalty base; defaults to a value derived from the model (see README).
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Added to the sphere default of alpha0, in units of 1/A0.
    #[arg(long, default_value_t = DEFAULT_ALPHA0_MARGIN)]
    pub alpha0_margin: f64,
    /// Fixed eps_alpha; default is eps_alpha = alpha * A0.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: usize,
    #[arg(long, value_enum, default_value_t = InitArg::Bump)]
    pub init: InitArg,
    /// Seed for `--init random`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Commands {
    /// Closed-form constants for dimension N.
    Constants {
        #[arg(long)]
        dim: usize,
    },
    /// First radial Neumann eigenvalue of the unit ball.
    Eigen {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// The compactly supported extremal profile.
    Profile {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = DEFAULT_PROFILE_SAMPLES)]
        samples: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Randomized check of the sharp Euclidean lower bound.
    Verify {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Curvature threshold and volume criterion for a model manifold.
    Threshold(ModelArgs),
    /// One penalized minimization.
    Minimize {
        #[command(flatten)]
        args: MinimizeArgs,
        #[arg(long)]
        alpha: f64,
        /// CSV dump of the nodal values of the minimizer.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Penalized minimization along a decreasing list of alphas.
    Sweep {
        #[command(flatten)]
        args: MinimizeArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        /// Start every alpha from the initial state (in parallel) instead of warm-starting.
        #[arg(long)]
        independent: bool,
    },
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig> {
        let mut config = match (self.json_config, self.command) {
            (Some(path), None) => serde_json::from_reader(File::open(path)?)?,
            (None, Some(cmd)) => RunConfig::from_command(cmd),
            (Some(_), Some(_)) => return Err(invalid("--json-config cannot be combined with a subcommand")),
            (None, None) => return Err(invalid("a subcommand or --json-config is required")),
        };
        if self.output.is_some() {
            config.output_path = self.output;
        }
        Ok(config)
    }
}

impl RunConfig {
    fn from_command(cmd: Commands) -> Self {
        let base = RunConfig::default();
        let with_model = |m: ModelArgs, base: RunConfig| RunConfig {
            model: Some(m.model),
            dim: m.dim,
            radius: m.radius,
            length: m.length,
            side: m.side,
            ..base
        };
        let with_minimize = |a: MinimizeArgs, base: RunConfig| RunConfig {
            alpha0: a.alpha0,
            alpha0_margin: a.alpha0_margin,
            eps: a.eps,
            resolution: a.resolution,
            init: a.init,
            seed: a.seed,
            tol: Some(a.tol),
            max_iter: a.max_iter,
            ..with_model(a.model, base)
        };
        match cmd {
            Commands::Constants { dim } => RunConfig {
                command: CommandKind::Constants,
                dim,
                ..base
            },
            Commands::Eigen { dim, tol, grid } => RunConfig {
                command: CommandKind::Eigen,
                dim,
                tol,
                grid,
                ..base
            },
            Commands::Profile { dim, k, samples, csv } => RunConfig {
                command: CommandKind::Profile,
                dim,
                k,
                samples,
                csv,
                ..base
            },
            Commands::Verify { dim, trials, seed } => RunConfig {
                command: CommandKind::Verify,
                dim,
                trials,
                seed,
                ..base
            },
            Commands::Threshold(m) => with_model(
                m,
                RunConfig {
                    command: CommandKind::Threshold,
                    ..base
                },
            ),
            Commands::Minimize { args, alpha, csv } => with_minimize(
                args,
                RunConfig {
                    command: CommandKind::Minimize,
                    alpha: Some(alpha),
                    csv,
                    ..base
                },
            ),
            Commands::Sweep {
                args,
                alphas,
                independent,
            } => with_minimize(
                args,
                RunConfig {
                    command: CommandKind::Sweep,
                    alphas,
                    independent,
                    ..base
                },
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(invalid("--dim must be at least 1"));
        }
        let positive = |name: &str, x: Option<f64>| match x {
            Some(v) if !(v > 0.0 && v.is_finite()) => Err(invalid(format!("--{name} must be positive, got {v}"))),
            _ => Ok(()),
        };
        positive("radius", self.radius)?;
        positive("length", self.length)?;
        positive("side", self.side)?;
        positive("tol", self.tol)?;
        positive("alpha", self.alpha)?;
        positive("k", Some(self.k))?;
        if let Some(e) = self.eps {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(invalid(format!("--eps must be nonnegative, got {e}")));
            }
        }
        if let Some(a0) = self.alpha0 {
            if !a0.is_finite() {
                return Err(invalid("--alpha0 must be finite"));
            }
        }
        if !self.alpha0_margin.is_finite() {
            return Err(invalid("--alpha0-margin must be finite"));
        }
        for a in &self.alphas {
            positive("alphas", Some(*a))?;
        }
        match self.command {
            CommandKind::Verify if self.trials == 0 => Err(invalid("--trials must be at least 1")),
            CommandKind::Profile if self.samples < 2 => Err(invalid("--samples must be at least 2")),
            CommandKind::Threshold | CommandKind::Minimize | CommandKind::Sweep if self.model.is_none() => {
                Err(invalid("--model is required"))
            }
            CommandKind::Minimize if self.alpha.is_none() => Err(invalid("--alpha is required")),
            CommandKind::Sweep if self.alphas.is_empty() => Err(invalid("--alphas is required")),
            CommandKind::Minimize | CommandKind::Sweep if self.max_iter == 0 => {
                Err(invalid("--max-iter must be at least 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn manifold(&self) -> Result<ManifoldModel> {
        match self.model {
            Some(ModelArg::Circle) => {
                if self.dim != 1 {
                    return Err(invalid("the circle model has dim 1"));
                }
                ManifoldModel::circle(self.length.unwrap_or(2.0 * std::f64::consts::PI))
            }
            Some(ModelArg::Sphere) => ManifoldModel::round_sphere(self.dim, self.radius.unwrap_or(1.0)),
            Some(ModelArg::Torus) => ManifoldModel::flat_torus(self.dim, self.side.unwrap_or(1.0)),
            None => Err(invalid("--model is required")),
        }
    }
}

/// Default penalty base: `Vol^{-2/n} / A0` on flat models, and
/// `(max(T, Vol^{-2/n}) + margin) / A0` on spheres.
pub fn default_alpha0(consts: &NashConstants, model: &ManifoldModel, margin: f64) -> Result<f64> {
    let check = corollary_check(consts, model)?;
    if model.max_scalar_curvature == 0.0 {
        Ok(check.volume_bound * consts.inv_a0())
    } else {
        Ok((check.threshold.max(check.volume_bound) + margin) * consts.inv_a0())
    }
}

fn constants_for(dim: usize) -> Result<NashConstants> {
    compute_constants(dim, &solve_default(dim)?)
}

#[derive(Serialize)]
struct ConstantsReport<'a> {
    config: &'a RunConfig,
    #[serde(flatten)]
    constants: NashConstants,
    inv_a0: f64,
    lambda0_squared: f64,
}

#[derive(Serialize)]
struct EigenReport<'a> {
    config: &'a RunConfig,
    dim: usize,
    lambda1: f64,
    u_at_1: f64,
    derivative_at_1: f64,
    grid_size: usize,
    sign_changes: usize,
}

#[derive(Serialize)]
struct ProfileReport<'a> {
    config: &'a RunConfig,
    dim: usize,
    k: f64,
    lambda0: f64,
    support_radius: f64,
    phi_at_0: f64,
    gradient_term: f64,
    l1_term: f64,
    l2_term: f64,
    normalized: f64,
    samples: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    config: &'a RunConfig,
    #[serde(flatten)]
    suite: SuiteReport,
}

#[derive(Serialize)]
struct ThresholdReport<'a> {
    config: &'a RunConfig,
    model: ManifoldModel,
    threshold: f64,
    corollary: Verdict,
    margin: f64,
    volume_bound: f64,
}

/// One JSON trajectory record per alpha.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub alpha: f64,
    pub eps_alpha: f64,
    pub mu_alpha: f64,
    #[serde(rename = "A_alpha")]
    pub a_alpha: f64,
    #[serde(rename = "B_alpha")]
    pub b_alpha: f64,
    pub k_alpha: f64,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub x_max_index: usize,
    pub mass_in_ball: BTreeMap<String, f64>,
    pub l2_mass_in_ball: BTreeMap<String, f64>,
    pub decay_sup: f64,
    pub profile_deviation: f64,
    pub a_dirichlet: f64,
    pub b_mass: f64,
}

impl From<&SweepPoint> for TrajectoryRecord {
    fn from(p: &SweepPoint) -> Self {
        Self {
            alpha: p.state.alpha,
            eps_alpha: p.state.eps_alpha,
            mu_alpha: p.state.mu_alpha,
            a_alpha: p.state.a_alpha,
            b_alpha: p.state.b_alpha,
            k_alpha: p.state.k_alpha,
            residual: p.state.residual,
            converged: p.state.converged,
            iterations: p.state.iterations,
            x_max_index: p.state.x_max_index,
            mass_in_ball: p.report.mass_in_ball.clone(),
            l2_mass_in_ball: p.report.l2_mass_in_ball.clone(),
            decay_sup: p.report.decay_sup,
            profile_deviation: p.report.profile_deviation,
            a_dirichlet: p.a_dirichlet,
            b_mass: p.b_mass,
        }
    }
}

#[derive(Serialize)]
struct MinimizeReport<'a> {
    config: &'a RunConfig,
    model: ManifoldModel,
    alpha0: f64,
    inv_a0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    caveat: Option<&'static str>,
    trajectory: Vec<TrajectoryRecord>,
}

fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&t| t > 0)
}

fn run_minimization(config: &RunConfig, alphas: &[f64]) -> Result<(String, Vec<SweepPoint>, usize)> {
    let model = config.manifold()?;
    let eig = solve_default(model.dim)?;
    let consts = compute_constants(model.dim, &eig)?;
    let grid = build_grid(&model, config.resolution)?;
    let alpha0 = match config.alpha0 {
        Some(a) => a,
        None => default_alpha0(&consts, &model, config.alpha0_margin)?,
    };
    let schedule = match config.eps {
        Some(e) => EpsSchedule::Fixed(e),
        None => EpsSchedule::Proportional(consts.a0),
    };
    let init = initial_state(
        &grid,
        match config.init {
            InitArg::Constant => InitKind::Constant,
            InitArg::Bump => InitKind::Bump {
                width: DEFAULT_BUMP_WIDTH * model.size_param,
            },
            InitArg::Random => InitKind::Random { seed: config.seed },
        },
    )?;
    let reference = unit_height_phi(&eig, &consts)?;
    let options = SweepOptions {
        max_iter: config.max_iter,
        tol: config.tol.unwrap_or(DEFAULT_TOL),
        warm_start: !config.independent,
        threads: threads_from_env(),
    };
    let points = alpha_sweep(
        &grid,
        alphas,
        alpha0,
        schedule,
        &init,
        &reference,
        &DEFAULT_DELTAS,
        options,
    )?;
    let report = MinimizeReport {
        config,
        model,
        alpha0,
        inv_a0: consts.inv_a0(),
        caveat: (model.dim >= 2).then_some(ZONAL_CAVEAT),
        trajectory: points.iter().map(TrajectoryRecord::from).collect(),
    };
    Ok((to_json(&report)?, points, grid.len()))
}

/// Executes `config` and returns the JSON report. CSV side outputs are written
/// here; the caller decides where the JSON goes.
pub fn run(config: &RunConfig) -> Result<String> {
    config.validate()?;
    let dim = config.dim;
    match config.command {
        CommandKind::Constants => {
            let c = constants_for(dim)?;
            to_json(&ConstantsReport {
                config,
                constants: c,
                inv_a0: c.inv_a0(),
                lambda0_squared: c.lambda0 * c.lambda0,
            })
        }
        CommandKind::Eigen => {
            let grid_size = config.grid.unwrap_or(DEFAULT_GRID_SIZE);
            let tol = config.tol.unwrap_or(crate::ball_eigen::DEFAULT_TOL);
            let eig = solve_lambda1_on_grid(dim, default_bracket(dim), tol, grid_size)?;
            to_json(&EigenReport {
                config,
                dim,
                lambda1: eig.lambda1,
                u_at_1: eig.u_at_1,
                derivative_at_1: eig.derivative_at_1,
                grid_size,
                sign_changes: eig.sign_changes(),
            })
        }
        CommandKind::Profile => {
            let eig = solve_default(dim)?;
            let consts = compute_constants(dim, &eig)?;
            let phi = build_phi(&eig, &consts, config.k)?;
            let nash = evaluate(&phi, &consts)?;
            let samples = phi.resample(config.samples);
            if let Some(path) = &config.csv {
                let (r, v): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
                let resampled = RadialFunction {
                    dim,
                    grid: r,
                    values: v,
                    support_radius: phi.support_radius,
                };
                let mut out = BufWriter::new(File::create(path)?);
                resampled.write_csv(&mut out)?;
                out.flush()?;
            }
            to_json(&ProfileReport {
                config,
                dim,
                k: config.k,
                lambda0: consts.lambda0,
                support_radius: phi.support_radius,
                phi_at_0: phi.values[0],
                gradient_term: nash.gradient_term,
                l1_term: nash.l1_term,
                l2_term: nash.l2_term,
                normalized: nash.normalized,
                samples: samples.iter().map(|&(r, v)| [r, v]).collect(),
            })
        }
        CommandKind::Verify => {
            let consts = constants_for(dim)?;
            let suite = property_suite(dim, &consts, config.trials, config.seed)?;
            to_json(&VerifyReport { config, suite })
        }
        CommandKind::Threshold => {
            let model = config.manifold()?;
            let consts = constants_for(dim)?;
            let check = corollary_check(&consts, &model)?;
            to_json(&ThresholdReport {
                config,
                model,
                threshold: check.threshold,
                corollary: check.verdict,
                margin: check.margin,
                volume_bound: check.volume_bound,
            })
        }
        CommandKind::Minimize => {
            let alpha = config.alpha.expect("validated");
            let (json, points, _) = run_minimization(config, &[alpha])?;
            if let Some(path) = &config.csv {
                let mut out = BufWriter::new(File::create(path)?);
                writeln!(out, "node,value")?;
                let grid = build_grid(&config.manifold()?, config.resolution)?;
                for (x, u) in grid.nodes.iter().zip(&points[0].state.u) {
                    writeln!(out, "{x:.17e},{u:.17e}")?;
                }
                out.flush()?;
            }
            Ok(json)
        }
        CommandKind::Sweep => Ok(run_minimization(config, &config.alphas)?.0),
    }
}

/// Formatter that writes every float with 17 significant digits.
struct RoundTripFloats(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for RoundTripFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with 17-significant-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, RoundTripFloats(Default::default()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Parses arguments, runs, and writes the report. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = cli.into_config().and_then(|config| {
        let json = run(&config)?;
        match &config.output_path {
            Some(path) => std::fs::write(path, json)?,
            None => std::io::stdout().write_all(json.as_bytes())?,
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
