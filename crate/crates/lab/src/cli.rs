//! Command-line interface: argument parsing and one runner per subcommand.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rmtlab_core::compiler::{compile_diagonal, verify_circuit};
use rmtlab_core::complexity::{complexity_jump_curve, GateSet, WordTable};
use rmtlab_core::concentration::{
    ball_avoidance_estimate, concentration_tail_probe, expected_torus_distance,
    gaussian_approximation_check, gaussian_average_fit, haar_second_moment_check,
    lipschitz_probe,
};
use rmtlab_core::ensembles::{EnsembleKind, EnsembleSpec};
use rmtlab_core::experiments::{
    equidistribution_scan, escape_curve, escape_scaling_fit, jump_figure, state_escape_curve,
    BallKind, EscapeCurve,
};
use rmtlab_core::linalg::{eig_hermitian, evolve};
use rmtlab_core::metrics::Metric;
use rmtlab_core::rng::SeedStream;
use rmtlab_core::spectral::{
    check_variance_bounds, estimate_form_factor, trace_concentration_tail, VarianceSlack,
};
use rmtlab_core::UnitaryMatrix;

use crate::config::load_config_args;
use crate::error::{LabError, LabResult};
use crate::formats::{emit_circuit, load_matrix, parse_circuit, read_gate_set, save_matrix};
use crate::grid::{parse_grid, parse_usize_list};
use crate::output::{num, opt, OutputDir};

const GRID_HELP: &str = "\
Grids: `start:stop:step` expands to start, start + step, ... up to and including
stop (points below stop + step/2 are kept, so rounding never drops or adds the
endpoint). A comma list `0.1,0.2,0.4` or a single number is taken literally.

Seeds: --seed, else the RMTLAB_SEED environment variable, else 0. Trial i of an
experiment always draws from stream i of its seed, so results do not depend on
--jobs.

Config: --config FILE reads TOML `key = value` pairs naming long flags, plus
optional per-subcommand tables. Flags given on the command line win.

Exit codes: 0 success, 1 a verification bound failed (the bound is named on
stderr) or a runtime fault, 2 usage or input error.";

#[derive(Debug, Parser)]
#[command(name = "rmtlab", version, about = "Random Hamiltonian evolution and complexity experiments", after_help = GRID_HELP)]
pub struct RunConfig {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML file supplying default values for long flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads. Defaults to the number of available cores.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".", value_name = "DIR")]
    pub out: PathBuf,
    /// Base seed.
    #[arg(long, global = true, env = "RMTLAB_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnsembleArg {
    Gue,
    DiagGaussian,
    RandomBasisGaussian,
}

impl From<EnsembleArg> for EnsembleKind {
    fn from(e: EnsembleArg) -> Self {
        match e {
            EnsembleArg::Gue => EnsembleKind::Gue,
            EnsembleArg::DiagGaussian => EnsembleKind::DiagGaussian,
            EnsembleArg::RandomBasisGaussian => EnsembleKind::RandomBasisGaussian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Diamond,
    Opnorm,
    Hs,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Diamond => Metric::Diamond,
            MetricArg::Opnorm => Metric::OpNormProj,
            MetricArg::Hs => Metric::HsProj,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GateArg {
    /// diag(-1, 1, ..., 1)
    Flip,
    /// diag(1, w, w^2, ...) with w = exp(2 pi i / d), traceless
    Roots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BallArg {
    Torus,
    Diamond,
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("`{s}` is not a positive integer")),
    }
}

fn finite(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match finite(s)? {
        x if x > 0.0 => Ok(x),
        _ => Err("must be positive".into()),
    }
}

/// A parsed value grid, kept as one argument value.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl std::ops::Deref for Grid {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A parsed list of dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Dims(pub Vec<usize>);

impl std::ops::Deref for Dims {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

fn grid(s: &str) -> Result<Grid, String> {
    parse_grid(s).map(Grid).map_err(|e| e.to_string())
}

fn dims(s: &str) -> Result<Dims, String> {
    parse_usize_list(s).map(Dims).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    #[arg(long, value_enum, default_value = "gue")]
    pub ensemble: EnsembleArg,
    /// Hilbert space dimension.
    #[arg(long, value_parser = positive_usize)]
    pub d: usize,
    /// GUE entry variance. Defaults to 1/d.
    #[arg(long, value_parser = positive)]
    pub sigma2: Option<f64>,
}

impl EnsembleArgs {
    fn spec(&self) -> LabResult<EnsembleSpec> {
        Ok(EnsembleSpec::new(
            self.ensemble.into(),
            self.d,
            self.sigma2,
        )?)
    }
}

/// A real diagonal Hamiltonian given inline or as a matrix file.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct DiagonalSource {
    /// CMPX file holding a real diagonal Hamiltonian.
    #[arg(long, value_name = "FILE")]
    pub hamiltonian: Option<PathBuf>,
    /// Diagonal entries as a comma list or grid.
    #[arg(long, value_parser = grid, allow_hyphen_values = true)]
    pub diag: Option<Grid>,
}

impl DiagonalSource {
    fn load(&self) -> LabResult<Vec<f64>> {
        if let Some(d) = &self.diag {
            return Ok(d.0.clone());
        }
        let path = self
            .hamiltonian
            .as_ref()
            .expect("clap group guarantees one source");
        let m = load_matrix(path)?;
        let d = m.dim();
        let mut diag = Vec::with_capacity(d);
        for i in 0..d {
            for j in 0..d {
                let z = m.row(i)[j];
                if i == j {
                    if z.im != 0.0 {
                        return Err(LabError::Usage(format!(
                            "Hamiltonian entry ({i}, {i}) is not real"
                        )));
                    }
                    diag.push(z.re);
                } else if z != rmtlab_core::C64::new(0.0, 0.0) {
                    return Err(LabError::Usage(format!(
                        "Hamiltonian is not diagonal: entry ({i}, {j}) is nonzero"
                    )));
                }
            }
        }
        Ok(diag)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GateSetArgs {
    /// Gate-set file. Defaults to {R = diag(1, e^{i pi/8}), H}.
    #[arg(long, value_name = "FILE")]
    pub gate_set: Option<PathBuf>,
    /// Longest word enumerated.
    #[arg(long, default_value_t = 10)]
    pub max_len: usize,
    /// Words within this projective operator distance of a shorter word are dropped.
    #[arg(long, default_value_t = 1e-9, value_parser = finite)]
    pub dedup_tol: f64,
}

impl GateSetArgs {
    fn table(&self) -> LabResult<WordTable> {
        let gs = match &self.gate_set {
            Some(p) => read_gate_set(&mut std::io::BufReader::new(
                std::fs::File::open(p).map_err(|e| {
                    LabError::Usage(format!("cannot open gate-set file {}: {e}", p.display()))
                })?,
            ))?,
            None => GateSet::default_pair(),
        };
        Ok(WordTable::build(&gs, self.max_len, self.dedup_tol)?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw Hamiltonians, write them as CMPX files and list their spectra.
    Sample {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long, default_value_t = 1, value_parser = positive_usize)]
        count: usize,
        /// Also write U_t = exp(-i H t) for this t.
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        t: Option<f64>,
    },
    /// Monte Carlo form factor (1/d) E tr U_t with its closed form.
    FormFactor {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long, value_parser = grid)]
        t: Grid,
        #[arg(long, value_parser = positive_usize)]
        samples: usize,
    },
    /// Check Var tr U_t against its bounds and, optionally, the trace tail bound.
    VarianceCheck {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long, value_parser = grid)]
        t: Grid,
        #[arg(long, value_parser = positive_usize)]
        samples: usize,
        /// Time at which to probe the tail of tr cos(Ht).
        #[arg(long, value_parser = positive, requires = "deltas")]
        tail_t: Option<f64>,
        /// Relative deviations for the tail probe.
        #[arg(long, value_parser = grid, requires = "tail_t")]
        deltas: Option<Grid>,
    },
    /// Stay probability P(D(U_t, I) < eps) along a time grid.
    Escape {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long, value_parser = positive)]
        eps: f64,
        #[arg(long, value_parser = grid)]
        t: Grid,
        #[arg(long, value_parser = positive_usize)]
        samples: usize,
        #[arg(long, value_enum, default_value = "diamond")]
        metric: MetricArg,
    },
    /// Escape times over eps and d grids with slope and collapse fits.
    EscapeScaling {
        #[arg(long, value_enum, default_value = "gue")]
        ensemble: EnsembleArg,
        /// Dimensions as a comma list.
        #[arg(long, value_parser = dims)]
        d: Dims,
        #[arg(long, value_parser = grid)]
        eps: Grid,
        #[arg(long, value_parser = positive_usize)]
        samples: usize,
        #[arg(long, value_enum, default_value = "diamond")]
        metric: MetricArg,
    },
    /// Stay probability of U_t|0> within trace distance eps of |0>.
    StateEscape {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long, value_parser = positive)]
        eps: f64,
        #[arg(long, value_parser = grid)]
        t: Grid,
        #[arg(long, value_parser = positive_usize)]
        samples: usize,
    },
    /// Mean distance of V G V^dag from the diagonal torus against dhs(G, I).
    TorusDistance {
        #[arg(long, value_parser = positive_usize)]
        d: usize,
        #[arg(long, value_enum, default_value = "flip", conflicts_with = "gate_file")]
        gate: GateArg,
        /// CMPX file holding G instead of a named gate.
        #[arg(long, value_name = "FILE")]
        gate_file: Option<PathBuf>,
        #[arg(long, value_parser = positive_usize)]
        samples: usize,
    },
    /// Haar concentration probes for the torus distance function.
    Concentration {
        #[arg(long, value_parser = positive_usize)]
        d: usize,
        #[arg(
            long,
            value_enum,
            default_value = "roots",
            conflicts_with = "gate_file"
        )]
        gate: GateArg,
        #[arg(long, value_name = "FILE")]
        gate_file: Option<PathBuf>,
        #[arg(long, value_parser = positive_usize)]
        samples: usize,
        /// Pairs for the Lipschitz probe.
        #[arg(long, default_value_t = 1000, value_parser = positive_usize)]
        pairs: usize,
        /// Deviations for the two-sided tail probe.
        #[arg(long, value_parser = grid, default_value = "0.25,0.5,1")]
        a: Grid,
        /// Radius parameter for the ball-avoidance probe.
        #[arg(long, value_parser = positive)]
        eps: Option<f64>,
    },
    /// The Gaussian pair average A(beta) and its gap 1 - A(beta)^2.
    GaussAverage {
        #[arg(long, value_parser = grid, default_value = "0.05:1:0.05")]
        beta: Grid,
        /// Monte Carlo draws per beta. Zero skips the Monte Carlo column.
        #[arg(long, default_value_t = 0)]
        mc_samples: usize,
        /// Also compare d E|<k|V|0>||<k|V|phi>| with A(beta) at this dimension.
        #[arg(long, value_parser = positive_usize, requires = "haar_samples")]
        haar_d: Option<usize>,
        #[arg(long, value_parser = positive_usize)]
        haar_samples: Option<usize>,
    },
    /// Exact epsilon-complexity of sampled evolutions or of a target unitary.
    Complexity {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[command(flatten)]
        gates: GateSetArgs,
        #[arg(long, value_parser = positive)]
        eps: f64,
        #[arg(long, value_enum, default_value = "diamond")]
        metric: MetricArg,
        #[arg(long, value_parser = grid, required_unless_present = "target")]
        t: Option<Grid>,
        #[arg(long, value_parser = positive_usize, required_unless_present = "target")]
        samples: Option<usize>,
        /// CMPX file with a single unitary to evaluate instead of sampling.
        #[arg(long, value_name = "FILE")]
        target: Option<PathBuf>,
    },
    /// Escape curve, exact complexity and ball avoidance on one time grid.
    JumpFigure {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[command(flatten)]
        gates: GateSetArgs,
        #[arg(long, value_parser = positive)]
        eps: f64,
        #[arg(long, value_enum, default_value = "diamond")]
        metric: MetricArg,
        #[arg(long, value_parser = grid)]
        t: Grid,
        #[arg(long, value_parser = positive_usize)]
        samples: usize,
        /// Ball avoidance covers words shorter than this.
        #[arg(long, default_value_t = 3)]
        avoidance_k: usize,
        /// Skip the complexity and avoidance panels.
        #[arg(long)]
        escape_only: bool,
    },
    /// Compile exp(-i t H) for diagonal H into CNOT and RZ gates.
    Compile {
        #[command(flatten)]
        source: DiagonalSource,
        /// Expected qubit count; checked against the Hamiltonian size.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, value_parser = positive)]
        eps: f64,
        /// Name of the circuit file written to the output directory.
        #[arg(long, default_value = "circuit.txt")]
        circuit: String,
    },
    /// Check a circuit file against exp(-i t H) within eps.
    VerifyCircuit {
        #[arg(long, value_name = "FILE")]
        circuit: PathBuf,
        #[command(flatten)]
        source: DiagonalSource,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, value_parser = positive)]
        eps: f64,
    },
    /// Ball measures of the Gaussian phase flow and their log-log slope in eps.
    Equidist {
        #[arg(long, value_enum, default_value = "torus")]
        ball: BallArg,
        #[arg(long, value_parser = positive_usize)]
        d: usize,
        #[arg(long, value_parser = positive)]
        t: f64,
        #[arg(long, value_parser = grid)]
        eps: Grid,
        /// Ball centre phases. Defaults to the origin.
        #[arg(long, value_parser = grid, allow_hyphen_values = true)]
        center: Option<Grid>,
        #[arg(long, value_parser = positive_usize)]
        samples: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sample { .. } => "sample",
            Command::FormFactor { .. } => "form-factor",
            Command::VarianceCheck { .. } => "variance-check",
            Command::Escape { .. } => "escape",
            Command::EscapeScaling { .. } => "escape-scaling",
            Command::StateEscape { .. } => "state-escape",
            Command::TorusDistance { .. } => "torus-distance",
            Command::Concentration { .. } => "concentration",
            Command::GaussAverage { .. } => "gauss-average",
            Command::Complexity { .. } => "complexity",
            Command::JumpFigure { .. } => "jump-figure",
            Command::Compile { .. } => "compile",
            Command::VerifyCircuit { .. } => "verify-circuit",
            Command::Equidist { .. } => "equidist",
        }
    }
}

/// A parsed invocation together with the argument list it came from,
/// config-file values included.
#[derive(Debug)]
pub struct Invocation {
    pub config: RunConfig,
    pub args: Vec<String>,
}

impl Invocation {
    pub fn command_line(&self) -> String {
        let quote = |a: &String| {
            if a.is_empty() || a.contains(|c: char| c.is_whitespace() || c == '"') {
                format!("{a:?}")
            } else {
                a.clone()
            }
        };
        std::iter::once("rmtlab".to_string())
            .chain(self.args.iter().map(quote))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn config_path(args: &[String]) -> Option<PathBuf> {
    args.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            args.get(i + 1).map(PathBuf::from)
        } else {
            a.strip_prefix("--config=").map(PathBuf::from)
        }
    })
}

/// Parses `argv` (without the program name), merging config-file defaults.
pub fn parse_args<I, S>(argv: I) -> LabResult<Invocation>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let mut args: Vec<String> = argv
        .into_iter()
        .map(|s| {
            s.into()
                .into_string()
                .map_err(|s| LabError::Usage(format!("argument {s:?} is not valid UTF-8")))
        })
        .collect::<LabResult<_>>()?;
    if let Some(path) = config_path(&args) {
        let cmd = RunConfig::command();
        let names: Vec<&str> = cmd.get_subcommands().map(|c| c.get_name()).collect();
        let sub = args
            .iter()
            .find(|a| names.contains(&a.as_str()))
            .cloned()
            .unwrap_or_default();
        let extra = load_config_args(&path, &sub, &args)?;
        args.extend(extra);
    }
    let config = RunConfig::try_parse_from(
        std::iter::once("rmtlab".to_string()).chain(args.iter().cloned()),
    )?;
    Ok(Invocation { config, args })
}

/// Executes the invocation, writing artifacts to the output directory and a
/// short summary to `log`.
pub fn run(inv: &Invocation, log: &mut (dyn Write + Send)) -> LabResult<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = inv.config.global.jobs {
        pool = pool.num_threads(j as usize);
    }
    let pool = pool
        .build()
        .map_err(|e| LabError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| dispatch(inv, log))
}

struct Ctx<'a> {
    out: OutputDir,
    seed: u64,
    log: &'a mut (dyn Write + Send),
}

impl Ctx<'_> {
    fn say(&mut self, line: impl AsRef<str>) -> LabResult<()> {
        writeln!(self.log, "{}", line.as_ref())?;
        Ok(())
    }
}

fn dispatch(inv: &Invocation, log: &mut (dyn Write + Send)) -> LabResult<()> {
    let cfg = &inv.config;
    let mut ctx = Ctx {
        out: OutputDir::create(&cfg.global.out, inv.command_line())?,
        seed: cfg.global.seed,
        log,
    };
    let name = cfg.command.name();
    let (summary, verdict) = match &cfg.command {
        Command::Sample { ens, count, t } => (cmd_sample(&mut ctx, ens, *count, *t)?, Ok(())),
        Command::FormFactor { ens, t, samples } => {
            (cmd_form_factor(&mut ctx, ens, t, *samples)?, Ok(()))
        }
        Command::VarianceCheck {
            ens,
            t,
            samples,
            tail_t,
            deltas,
        } => cmd_variance(&mut ctx, ens, t, *samples, tail_t.zip(deltas.as_deref()))?,
        Command::Escape {
            ens,
            eps,
            t,
            samples,
            metric,
        } => {
            let spec = ens.spec()?;
            let c = escape_curve(&spec, *eps, (*metric).into(), t, *samples, ctx.seed)?;
            (write_escape(&mut ctx, "escape.csv", &c)?, Ok(()))
        }
        Command::EscapeScaling {
            ensemble,
            d,
            eps,
            samples,
            metric,
        } => (
            cmd_escape_scaling(&mut ctx, *ensemble, d, eps, *samples, *metric)?,
            Ok(()),
        ),
        Command::StateEscape {
            ens,
            eps,
            t,
            samples,
        } => {
            let spec = ens.spec()?;
            let c = state_escape_curve(&spec, *eps, t, *samples, ctx.seed)?;
            (write_escape(&mut ctx, "state_escape.csv", &c)?, Ok(()))
        }
        Command::TorusDistance {
            d,
            gate,
            gate_file,
            samples,
        } => cmd_torus_distance(&mut ctx, *d, *gate, gate_file.as_deref(), *samples)?,
        Command::Concentration {
            d,
            gate,
            gate_file,
            samples,
            pairs,
            a,
            eps,
        } => cmd_concentration(
            &mut ctx,
            *d,
            *gate,
            gate_file.as_deref(),
            *samples,
            *pairs,
            a,
            *eps,
        )?,
        Command::GaussAverage {
            beta,
            mc_samples,
            haar_d,
            haar_samples,
        } => cmd_gauss_average(&mut ctx, beta, *mc_samples, haar_d.zip(*haar_samples))?,
        Command::Complexity {
            ens,
            gates,
            eps,
            metric,
            t,
            samples,
            target,
        } => (
            cmd_complexity(
                &mut ctx,
                ens,
                gates,
                *eps,
                *metric,
                t.as_deref(),
                *samples,
                target.as_deref(),
            )?,
            Ok(()),
        ),
        Command::JumpFigure {
            ens,
            gates,
            eps,
            metric,
            t,
            samples,
            avoidance_k,
            escape_only,
        } => (
            cmd_jump_figure(
                &mut ctx,
                ens,
                (!*escape_only).then_some(gates),
                *eps,
                *metric,
                t,
                *samples,
                *avoidance_k,
            )?,
            Ok(()),
        ),
        Command::Compile {
            source,
            n,
            t,
            eps,
            circuit,
        } => cmd_compile(&mut ctx, source, *n, *t, *eps, circuit)?,
        Command::VerifyCircuit {
            circuit,
            source,
            t,
            eps,
        } => cmd_verify(&mut ctx, circuit, source, *t, *eps)?,
        Command::Equidist {
            ball,
            d,
            t,
            eps,
            center,
            samples,
        } => (
            cmd_equidist(&mut ctx, *ball, *d, *t, eps, center.as_deref(), *samples)?,
            Ok(()),
        ),
    };
    let seed = ctx.seed;
    let manifest = ctx.out.finish(name, Some(seed), summary)?;
    writeln!(ctx.log, "manifest: {}", manifest.display())?;
    verdict
}

type Verdict = LabResult<()>;

fn first_failure(checks: Vec<(bool, String, String)>) -> Verdict {
    match checks.into_iter().find(|(ok, _, _)| !ok) {
        Some((_, bound, detail)) => Err(LabError::verification(bound, detail)),
        None => Ok(()),
    }
}

fn cmd_sample(ctx: &mut Ctx, ens: &EnsembleArgs, count: usize, t: Option<f64>) -> LabResult<Value> {
    let spec = ens.spec()?;
    let mut rows = Vec::new();
    for i in 0..count {
        let h = spec.sample_stream(SeedStream::new(ctx.seed, i as u64))?;
        let name = format!("h_{i:04}.cmpx");
        save_matrix(&ctx.out.path(&name), h.matrix())?;
        ctx.out.register(&name, "cmpx", Some(ctx.seed));
        let s = eig_hermitian(&h)?;
        if let Some(t) = t {
            let name = format!("u_{i:04}.cmpx");
            save_matrix(&ctx.out.path(&name), evolve(&s, t).matrix())?;
            ctx.out.register(&name, "cmpx", Some(ctx.seed));
        }
        for (k, &l) in s.eigenvalues().iter().enumerate() {
            rows.push(vec![
                i.to_string(),
                k.to_string(),
                num(l),
                ctx.seed.to_string(),
            ]);
        }
    }
    ctx.out.csv(
        "eigenvalues.csv",
        &["stream", "k", "eigenvalue", "seed"],
        rows,
        Some(ctx.seed),
    )?;
    ctx.say(format!(
        "sampled {count} {} matrices of dimension {}",
        spec.kind.name(),
        spec.dim
    ))?;
    Ok(
        json!({"ensemble": spec.kind.name(), "d": spec.dim, "sigma2": spec.variance, "count": count, "t": t}),
    )
}

fn cmd_form_factor(
    ctx: &mut Ctx,
    ens: &EnsembleArgs,
    t: &[f64],
    samples: usize,
) -> LabResult<Value> {
    let spec = ens.spec()?;
    let est = estimate_form_factor(&spec, t, samples, ctx.seed)?;
    let rows = est.iter().map(|e| {
        vec![
            num(e.t),
            num(e.mean.re),
            num(e.mean.im),
            num(e.variance),
            num(e.std_error),
            e.n_samples.to_string(),
            num(e.theory_mean),
            opt(e.theory_variance),
            ctx.seed.to_string(),
        ]
    });
    let cols = [
        "t",
        "mean_re",
        "mean_im",
        "variance",
        "std_error",
        "n_samples",
        "theory_mean",
        "theory_variance",
        "seed",
    ];
    let rows: Vec<_> = rows.collect();
    ctx.out
        .csv("form_factor.csv", &cols, rows, Some(ctx.seed))?;
    let worst = est
        .iter()
        .map(|e| (e.mean - rmtlab_core::C64::new(e.theory_mean, 0.0)).norm())
        .fold(0.0, f64::max);
    ctx.say(format!(
        "form factor at {} times, max |mean - theory| = {worst:.3e}",
        est.len()
    ))?;
    Ok(
        json!({"ensemble": spec.kind.name(), "d": spec.dim, "samples": samples, "max_abs_deviation": worst}),
    )
}

fn cmd_variance(
    ctx: &mut Ctx,
    ens: &EnsembleArgs,
    t: &[f64],
    samples: usize,
    tail: Option<(f64, &[f64])>,
) -> LabResult<(Value, Verdict)> {
    let spec = ens.spec()?;
    let est = estimate_form_factor(&spec, t, samples.max(2), ctx.seed)?;
    let report = check_variance_bounds(&est, &spec, VarianceSlack::for_samples(samples));
    let rows: Vec<_> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.t),
                num(r.variance),
                num(r.global.bound),
                num(r.global.slack),
                opt(r.small_t.map(|c| c.bound)),
                opt(r.small_t.map(|c| c.slack)),
                opt(r.small_t_dimensional),
                opt(r.theory.map(|x| x.0)),
                opt(r.theory.map(|x| x.1)),
                r.flagged.to_string(),
                samples.to_string(),
                ctx.seed.to_string(),
            ]
        })
        .collect();
    let cols = [
        "t",
        "variance",
        "global_bound",
        "global_slack",
        "small_t_bound",
        "small_t_slack",
        "small_t_dimensional",
        "theory_variance",
        "theory_rel_error",
        "flagged",
        "n_samples",
        "seed",
    ];
    ctx.out.csv("variance.csv", &cols, rows, Some(ctx.seed))?;
    let mut checks = vec![
        (
            report.global_ok(),
            "variance bound Var tr U_t <= d".to_string(),
            flagged_times(&report, |r| r.global.violated()),
        ),
        (
            report.small_t_ok(),
            "small-t variance bound Var tr U_t <= 4 t^2 sigma^2".to_string(),
            flagged_times(&report, |r| r.small_t.is_some_and(|c| c.violated())),
        ),
        (
            report.theory_ok(),
            "closed-form variance".to_string(),
            flagged_times(&report, |r| {
                r.theory
                    .is_some_and(|(_, e)| e > report.slack.theory_rel_tol)
            }),
        ),
    ];
    let mut tail_summary = Value::Null;
    if let Some((tt, deltas)) = tail {
        let tr =
            trace_concentration_tail(&spec, tt, deltas, samples, SeedStream::derive(ctx.seed, 1))?;
        let rows: Vec<_> = tr
            .rows
            .iter()
            .map(|r| {
                vec![
                    num(tr.t),
                    num(r.delta),
                    num(r.check.empirical),
                    num(r.check.bound),
                    num(r.check.slack),
                    tr.n_samples.to_string(),
                    SeedStream::derive(ctx.seed, 1).to_string(),
                ]
            })
            .collect();
        let tail_seed = SeedStream::derive(ctx.seed, 1);
        ctx.out.csv(
            "trace_tail.csv",
            &[
                "t",
                "delta",
                "frequency",
                "bound",
                "slack",
                "n_samples",
                "seed",
            ],
            rows,
            Some(tail_seed),
        )?;
        checks.push((
            tr.all_within(),
            "trace concentration bound 2 exp(-d^2 delta^2 / (4 t^2))".to_string(),
            tr.rows
                .iter()
                .filter(|r| r.check.violated())
                .map(|r| {
                    format!(
                        "delta={}: {} > {}",
                        r.delta, r.check.empirical, r.check.bound
                    )
                })
                .collect::<Vec<_>>()
                .join("; "),
        ));
        tail_summary = json!({"t": tt, "all_within": tr.all_within(), "seed": tail_seed});
    }
    let flagged = report.rows.iter().filter(|r| r.flagged).count();
    ctx.say(format!(
        "{} of {} times flagged",
        flagged,
        report.rows.len()
    ))?;
    let summary = json!({
        "ensemble": spec.kind.name(), "d": spec.dim, "samples": samples,
        "global_ok": report.global_ok(), "small_t_ok": report.small_t_ok(), "theory_ok": report.theory_ok(),
        "tail": tail_summary,
    });
    Ok((summary, first_failure(checks)))
}

fn flagged_times(
    r: &rmtlab_core::spectral::VarianceReport,
    f: impl Fn(&rmtlab_core::spectral::VarianceRow) -> bool,
) -> String {
    let ts: Vec<String> = r
        .rows
        .iter()
        .filter(|x| f(x))
        .map(|x| format!("{}", x.t))
        .collect();
    format!("violated at t = {}", ts.join(", "))
}

fn write_escape(ctx: &mut Ctx, name: &str, c: &EscapeCurve) -> LabResult<Value> {
    let rows: Vec<_> = c
        .t_grid
        .iter()
        .zip(&c.stay)
        .zip(&c.stderr)
        .map(|((&t, &p), &se)| {
            vec![
                num(t),
                num(p),
                num(se),
                c.n_samples.to_string(),
                c.spec.kind.name().to_string(),
                c.spec.dim.to_string(),
                num(c.epsilon),
                c.metric.name().to_string(),
                c.seed.to_string(),
            ]
        })
        .collect();
    let cols = [
        "t",
        "stay_prob",
        "stderr",
        "n_samples",
        "ensemble",
        "d",
        "epsilon",
        "metric",
        "seed",
    ];
    ctx.out.csv(name, &cols, rows, Some(c.seed))?;
    ctx.say(format!(
        "{name}: t_escape = {}",
        c.t_escape.map_or("not reached".to_string(), num)
    ))?;
    Ok(
        json!({"file": name, "ensemble": c.spec.kind.name(), "d": c.spec.dim, "epsilon": c.epsilon,
              "metric": c.metric.name(), "samples": c.n_samples, "t_escape": c.t_escape}),
    )
}

fn cmd_escape_scaling(
    ctx: &mut Ctx,
    ensemble: EnsembleArg,
    d: &[usize],
    eps: &[f64],
    samples: usize,
    metric: MetricArg,
) -> LabResult<Value> {
    let r = escape_scaling_fit(ensemble.into(), metric.into(), eps, d, samples, ctx.seed)?;
    let mut rows = Vec::new();
    for (i, &dim) in r.d_grid.iter().enumerate() {
        for (j, &e) in r.eps_grid.iter().enumerate() {
            rows.push(vec![
                dim.to_string(),
                num(e),
                opt(r.t_escape[i][j]),
                opt(r.collapsed[i][j]),
                samples.to_string(),
                r.kind.name().to_string(),
                r.metric.name().to_string(),
                SeedStream::derive(ctx.seed, dim as u64).to_string(),
            ]);
        }
    }
    let cols = [
        "d",
        "epsilon",
        "t_escape",
        "t_escape_sqrt_ln_d",
        "n_samples",
        "ensemble",
        "metric",
        "seed",
    ];
    ctx.out
        .csv("escape_scaling.csv", &cols, rows, Some(ctx.seed))?;
    let slopes: Vec<Value> = r
        .eps_slopes
        .iter()
        .zip(&r.d_grid)
        .map(|(f, d)| json!({"d": d, "slope": f.map(|f| f.slope), "slope_ci": f.map(|f| [f.slope_ci.0, f.slope_ci.1])}))
        .collect();
    for s in &slopes {
        ctx.say(format!(
            "d = {}: slope of ln t_escape in ln eps = {}",
            s["d"], s["slope"]
        ))?;
    }
    Ok(
        json!({"ensemble": r.kind.name(), "metric": r.metric.name(), "slopes": slopes, "collapse_spread": r.collapse_spread}),
    )
}

fn named_gate(d: usize, gate: GateArg, file: Option<&Path>) -> LabResult<(UnitaryMatrix, String)> {
    if let Some(p) = file {
        let g = UnitaryMatrix::new(load_matrix(p)?)
            .map_err(|e| LabError::Usage(format!("{}: {e}", p.display())))?;
        if g.dim() != d {
            return Err(LabError::Usage(format!(
                "gate file has dimension {}, expected {d}",
                g.dim()
            )));
        }
        return Ok((g, p.display().to_string()));
    }
    Ok(match gate {
        GateArg::Flip => {
            let mut phases = vec![0.0; d];
            phases[0] = PI;
            (UnitaryMatrix::diagonal_phases(&phases), "flip".into())
        }
        GateArg::Roots => {
            let phases: Vec<f64> = (0..d).map(|k| 2.0 * PI * k as f64 / d as f64).collect();
            (UnitaryMatrix::diagonal_phases(&phases), "roots".into())
        }
    })
}

fn cmd_torus_distance(
    ctx: &mut Ctx,
    d: usize,
    gate: GateArg,
    file: Option<&Path>,
    samples: usize,
) -> LabResult<(Value, Verdict)> {
    let (g, label) = named_gate(d, gate, file)?;
    let s = expected_torus_distance(&g, &label, samples.max(2), ctx.seed)?;
    let row = vec![
        s.gate_label.clone(),
        d.to_string(),
        num(s.dhs_g_i),
        num(s.mc_mean),
        num(s.mc_std),
        num(s.std_error()),
        num(s.dhs_g_i / 3.0),
        num(s.lipschitz_bound),
        s.n_samples.to_string(),
        ctx.seed.to_string(),
    ];
    let cols = [
        "gate",
        "d",
        "dhs_G_I",
        "mc_mean",
        "mc_std",
        "std_error",
        "lower_bound",
        "lipschitz",
        "n_samples",
        "seed",
    ];
    ctx.out
        .csv("torus_distance.csv", &cols, vec![row], Some(ctx.seed))?;
    ctx.say(format!(
        "E dist = {} (dhs(G, I) = {})",
        s.mc_mean, s.dhs_g_i
    ))?;
    let verdict = first_failure(vec![
        (
            s.upper_bound_holds(1e-9),
            "upper bound E dist <= dhs(G, I)".into(),
            format!("{} > {}", s.mc_mean, s.dhs_g_i),
        ),
        (
            s.lower_bound_holds(),
            "lower bound E dist >= dhs(G, I) / 3".into(),
            format!(
                "{} + 3 * {} < {}",
                s.mc_mean,
                s.std_error(),
                s.dhs_g_i / 3.0
            ),
        ),
    ]);
    Ok((
        json!({"gate": label, "d": d, "dhs_G_I": s.dhs_g_i, "mc_mean": s.mc_mean, "std_error": s.std_error()}),
        verdict,
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_concentration(
    ctx: &mut Ctx,
    d: usize,
    gate: GateArg,
    file: Option<&Path>,
    samples: usize,
    pairs: usize,
    a: &[f64],
    eps: Option<f64>,
) -> LabResult<(Value, Verdict)> {
    let (g, label) = named_gate(d, gate, file)?;
    let seeds: Vec<u64> = (0..4).map(|i| SeedStream::derive(ctx.seed, i)).collect();
    let dhs = rmtlab_core::metrics::hs_proj_distance(&g, &UnitaryMatrix::identity(d))?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let row = |probe: &str,
               param: String,
               mean: f64,
               bound: f64,
               slack: f64,
               viol: usize,
               n: usize,
               seed: u64| {
        vec![
            probe.to_string(),
            param,
            num(dhs),
            num(mean),
            num(bound),
            num(slack),
            viol.to_string(),
            n.to_string(),
            seed.to_string(),
        ]
    };

    let m = haar_second_moment_check(&g, 0, samples.max(2), seeds[0])?;
    rows.push(row(
        "second_moment",
        "index=0".into(),
        m.mc_mean,
        m.closed_form,
        3.0 * m.std_error,
        usize::from(!m.within(3.0)),
        samples,
        seeds[0],
    ));
    checks.push((
        m.within(3.0),
        "Haar second moment (1 + |tr G|^2 / d) / (d + 1)".to_string(),
        format!("{} vs {}", m.mc_mean, m.closed_form),
    ));

    let l = lipschitz_probe(&g, pairs, seeds[1])?;
    rows.push(row(
        "lipschitz",
        "pairs".into(),
        l.max_ratio,
        l.bound,
        0.0,
        l.violations,
        l.n_pairs,
        seeds[1],
    ));
    checks.push((
        l.holds(),
        "Lipschitz constant 2 ||G - I||".to_string(),
        format!("{} violating pairs", l.violations),
    ));

    let tail = concentration_tail_probe(&g, a, samples, seeds[2])?;
    for r in &tail.rows {
        for (side, c) in [("tail_lower", r.lower), ("tail_upper", r.upper)] {
            rows.push(row(
                side,
                format!("a={}", r.a),
                c.empirical,
                c.bound,
                c.slack,
                usize::from(c.violated()),
                tail.n_samples,
                seeds[2],
            ));
        }
    }
    checks.push((
        tail.all_within(),
        "concentration bound exp(-(d - 2) a^2 / (12 L^2))".to_string(),
        "empirical tail above bound plus 3 binomial errors".to_string(),
    ));

    let mut ball = Value::Null;
    if let Some(eps) = eps {
        let b = ball_avoidance_estimate(&g, eps, samples, seeds[3])?;
        rows.push(row(
            "ball_avoidance",
            format!("eps={eps}"),
            b.check.empirical,
            b.check.bound,
            b.check.slack,
            usize::from(b.check.violated()),
            b.n_samples,
            seeds[3],
        ));
        checks.push((
            !b.check.violated(),
            "ball avoidance bound exp(-eps^2 d^2 / 384)".to_string(),
            format!("{} hits of {}", b.hits, b.n_samples),
        ));
        ball = json!({"epsilon": eps, "hits": b.hits, "bound": b.check.bound});
    }
    let cols = [
        "probe",
        "parameter",
        "dhs_G_I",
        "mc_mean",
        "bound",
        "slack",
        "violations",
        "n_samples",
        "seed",
    ];
    ctx.out
        .csv("concentration.csv", &cols, rows, Some(ctx.seed))?;
    let passed = checks.iter().filter(|c| c.0).count();
    ctx.say(format!(
        "{passed} of {} concentration checks passed",
        checks.len()
    ))?;
    let summary = json!({"gate": label, "d": d, "dhs_G_I": dhs, "second_moment": {"mc": m.mc_mean, "closed_form": m.closed_form},
        "lipschitz": {"bound": l.bound, "max_ratio": l.max_ratio, "violations": l.violations}, "ball_avoidance": ball});
    Ok((summary, first_failure(checks)))
}

fn cmd_gauss_average(
    ctx: &mut Ctx,
    beta: &[f64],
    mc_samples: usize,
    haar: Option<(usize, usize)>,
) -> LabResult<(Value, Verdict)> {
    let r = gaussian_average_fit(beta, mc_samples, ctx.seed)?;
    let rows: Vec<_> = (0..r.beta_grid.len())
        .map(|i| {
            let mc = r.mc_values.get(i);
            vec![
                num(r.beta_grid[i]),
                num(r.a_values[i]),
                opt(mc.map(|x| x.0)),
                opt(mc.map(|x| x.1)),
                num(r.gaps[i]),
                mc_samples.to_string(),
                ctx.seed.to_string(),
            ]
        })
        .collect();
    ctx.out.csv(
        "gauss_average.csv",
        &[
            "beta",
            "A",
            "mc_mean",
            "mc_stderr",
            "gap",
            "mc_samples",
            "seed",
        ],
        rows,
        Some(ctx.seed),
    )?;
    let mut checks = vec![
        (
            r.gaps_positive(),
            "gap 1 - A(beta)^2 > 0".to_string(),
            "non-positive gap on the grid".to_string(),
        ),
        (
            r.gaps_monotone(),
            "gap monotone in beta".to_string(),
            "gap decreases somewhere on the grid".to_string(),
        ),
    ];
    ctx.say(format!("c = {} at beta0 = {}", r.c, r.beta0))?;
    let mut haar_summary = Value::Null;
    if let Some((d, n)) = haar {
        let hs = SeedStream::derive(ctx.seed, 1);
        let mut rows = Vec::new();
        for &b in &r.beta_grid {
            let h = gaussian_approximation_check(b, 0, d, n, hs)?;
            rows.push(vec![
                num(b),
                d.to_string(),
                num(h.mc_mean),
                num(h.std_error),
                num(h.quadrature),
                num(h.rate_allowance),
                n.to_string(),
                hs.to_string(),
            ]);
            checks.push((
                h.within(),
                "Gaussian approximation |d E - A(beta)| <= 5 / sqrt(d)".to_string(),
                format!("beta={b}: difference {}", h.difference()),
            ));
        }
        ctx.out.csv(
            "haar_overlap.csv",
            &[
                "beta",
                "d",
                "d_mc_mean",
                "std_error",
                "A",
                "allowance",
                "n_samples",
                "seed",
            ],
            rows,
            Some(hs),
        )?;
        haar_summary = json!({"d": d, "samples": n, "seed": hs});
    }
    Ok((
        json!({"c": r.c, "beta0": r.beta0, "candidates": r.candidates, "haar": haar_summary}),
        first_failure(checks),
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_complexity(
    ctx: &mut Ctx,
    ens: &EnsembleArgs,
    gates: &GateSetArgs,
    eps: f64,
    metric: MetricArg,
    t: Option<&[f64]>,
    samples: Option<usize>,
    target: Option<&Path>,
) -> LabResult<Value> {
    let table = gates.table()?;
    let metric: Metric = metric.into();
    if let Some(p) = target {
        let u = UnitaryMatrix::new(load_matrix(p)?)
            .map_err(|e| LabError::Usage(format!("{}: {e}", p.display())))?;
        let a = table.unitary_complexity(&u, eps, metric)?;
        let witness = a.witness.map_or_else(
            || "none".to_string(),
            |i| table.words[i].label(&table.gate_set),
        );
        let row = vec![
            p.display().to_string(),
            num(eps),
            metric.name().into(),
            a.value.to_string(),
            witness.clone(),
            num(a.guard),
            table.max_len.to_string(),
        ];
        ctx.out.csv(
            "complexity.csv",
            &[
                "target",
                "epsilon",
                "metric",
                "complexity",
                "witness",
                "guard",
                "max_len",
            ],
            vec![row],
            None,
        )?;
        ctx.say(format!("complexity {} (witness {witness})", a.value))?;
        return Ok(
            json!({"target": p.display().to_string(), "complexity": a.value.to_string(), "witness": witness, "guard": a.guard}),
        );
    }
    let (t, samples) = (t.unwrap_or_default(), samples.unwrap_or(1));
    let spec = ens.spec()?;
    let r = complexity_jump_curve(&spec, &table, eps, metric, t, samples, ctx.seed)?;
    let mut rows = Vec::new();
    for (i, c) in r.curves.iter().enumerate() {
        for (&tt, v) in c.t_grid.iter().zip(&c.values) {
            rows.push(vec![
                i.to_string(),
                num(tt),
                v.to_string(),
                num(eps),
                metric.name().into(),
                ctx.seed.to_string(),
            ]);
        }
    }
    ctx.out.csv(
        "complexity.csv",
        &["stream", "t", "complexity", "epsilon", "metric", "seed"],
        rows,
        Some(ctx.seed),
    )?;
    let rows: Vec<_> = t
        .iter()
        .zip(&r.median)
        .map(|(&tt, m)| {
            vec![
                num(tt),
                m.to_string(),
                samples.to_string(),
                ctx.seed.to_string(),
            ]
        })
        .collect();
    ctx.out.csv(
        "complexity_median.csv",
        &["t", "median_complexity", "n_samples", "seed"],
        rows,
        Some(ctx.seed),
    )?;
    ctx.say(format!("jump fraction {}", r.jump_fraction))?;
    Ok(
        json!({"words": table.words.len(), "jump_fraction": r.jump_fraction, "thresholds": r.thresholds}),
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_jump_figure(
    ctx: &mut Ctx,
    ens: &EnsembleArgs,
    gates: Option<&GateSetArgs>,
    eps: f64,
    metric: MetricArg,
    t: &[f64],
    samples: usize,
    avoidance_k: usize,
) -> LabResult<Value> {
    let spec = ens.spec()?;
    let table = gates.map(|g| g.table()).transpose()?;
    let fig = jump_figure(
        &spec,
        table.as_ref(),
        eps,
        metric.into(),
        t,
        avoidance_k,
        samples,
        ctx.seed,
    )?;
    let escape = write_escape(ctx, "jump_escape.csv", &fig.escape)?;
    let mut members = vec!["jump_escape.csv"];
    if let Some(c) = &fig.complexity {
        let rows: Vec<_> = t
            .iter()
            .enumerate()
            .map(|(k, &tt)| {
                let zero = c.curves.iter().filter(|cv| cv.values[k].is_zero()).count();
                vec![
                    num(tt),
                    c.median[k].to_string(),
                    num(zero as f64 / c.curves.len() as f64),
                    samples.to_string(),
                    ctx.seed.to_string(),
                ]
            })
            .collect();
        ctx.out.csv(
            "jump_complexity.csv",
            &[
                "t",
                "median_complexity",
                "zero_fraction",
                "n_samples",
                "seed",
            ],
            rows,
            Some(ctx.seed),
        )?;
        let rows: Vec<_> = fig
            .avoidance
            .iter()
            .map(|a| {
                vec![
                    num(a.t),
                    num(a.identity),
                    num(a.other_words),
                    avoidance_k.to_string(),
                    samples.to_string(),
                    ctx.seed.to_string(),
                ]
            })
            .collect();
        ctx.out.csv(
            "jump_avoidance.csv",
            &[
                "t",
                "identity_ball",
                "other_word_balls",
                "k",
                "n_samples",
                "seed",
            ],
            rows,
            Some(ctx.seed),
        )?;
        members.extend(["jump_complexity.csv", "jump_avoidance.csv"]);
    }
    let mut bundle = format!(
        "seed = {}\nensemble = {}\nd = {}\nepsilon = {}\nmetric = {}\nn_samples = {}\n",
        ctx.seed,
        spec.kind.name(),
        spec.dim,
        num(eps),
        Metric::from(metric).name(),
        samples
    );
    for (i, m) in members.iter().enumerate() {
        bundle.push_str(&format!(
            "member.{i} = {m}\nmember.{i}.seed = {}\n",
            ctx.seed
        ));
    }
    ctx.out
        .text("jump_bundle.txt", &bundle, "bundle", Some(ctx.seed))?;
    Ok(json!({"escape": escape, "members": members}))
}

fn cmd_compile(
    ctx: &mut Ctx,
    source: &DiagonalSource,
    n: Option<usize>,
    t: f64,
    eps: f64,
    circuit_name: &str,
) -> LabResult<(Value, Verdict)> {
    let diag = source.load()?;
    if let Some(n) = n {
        if 1usize.checked_shl(n as u32) != Some(diag.len()) {
            return Err(LabError::Usage(format!(
                "--n {n} does not match a Hamiltonian of size {}",
                diag.len()
            )));
        }
    }
    let (circuit, ledger) = compile_diagonal(&diag, t, eps)?;
    ctx.out
        .text(circuit_name, &emit_circuit(&circuit), "circuit", None)?;
    let err = verify_circuit(&circuit, &diag, t)
        .map_err(|e| LabError::verification("verify_circuit", e.to_string()))?;
    let row = vec![
        ledger.n.to_string(),
        num(t),
        num(eps),
        ledger.terms.to_string(),
        num(ledger.delta),
        ledger.cnots.to_string(),
        ledger.rotations.to_string(),
        ledger.rotation_bits.to_string(),
        ledger.weighted_cost().to_string(),
        num(ledger.budget()),
        num(err),
    ];
    let cols = [
        "n",
        "t",
        "epsilon",
        "terms",
        "delta",
        "cnots",
        "rotations",
        "rotation_bits",
        "weighted_cost",
        "budget",
        "certified_error",
    ];
    ctx.out.csv("compile.csv", &cols, vec![row], None)?;
    ctx.say(format!(
        "verify_circuit: error {err:e} (eps {eps:e}), {} gates, weighted cost {}",
        circuit.len(),
        ledger.weighted_cost()
    ))?;
    let verdict = first_failure(vec![
        (
            err <= eps,
            "verify_circuit".into(),
            format!("operator-norm error {err:e} exceeds eps {eps:e}"),
        ),
        (
            ledger.weighted_cost() as f64 <= ledger.budget(),
            "gate budget 4 n 2^n (n + log2(1/eps))".into(),
            format!(
                "weighted cost {} > {}",
                ledger.weighted_cost(),
                ledger.budget()
            ),
        ),
    ]);
    Ok((
        json!({"n": ledger.n, "gates": circuit.len(), "weighted_cost": ledger.weighted_cost(), "budget": ledger.budget(), "error": err}),
        verdict,
    ))
}

fn cmd_verify(
    ctx: &mut Ctx,
    path: &Path,
    source: &DiagonalSource,
    t: f64,
    eps: f64,
) -> LabResult<(Value, Verdict)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Usage(format!("cannot read circuit {}: {e}", path.display())))?;
    let diag = source.load()?;
    let circuit = parse_circuit(&text)
        .map_err(|e| LabError::verification("verify_circuit", e.to_string()))?;
    let err = verify_circuit(&circuit, &diag, t)
        .map_err(|e| LabError::verification("verify_circuit", e.to_string()))?;
    ctx.say(format!("verify_circuit: error {err:e} (eps {eps:e})"))?;
    let verdict = if err <= eps {
        Ok(())
    } else {
        Err(LabError::verification(
            "verify_circuit",
            format!("operator-norm error {err:e} exceeds eps {eps:e}"),
        ))
    };
    Ok((
        json!({"circuit": path.display().to_string(), "error": err, "epsilon": eps, "ok": err <= eps}),
        verdict,
    ))
}

fn cmd_equidist(
    ctx: &mut Ctx,
    ball: BallArg,
    d: usize,
    t: f64,
    eps: &[f64],
    center: Option<&[f64]>,
    samples: usize,
) -> LabResult<Value> {
    let center = center.map_or_else(|| vec![0.0; d], <[f64]>::to_vec);
    let kind = match ball {
        BallArg::Torus => BallKind::Torus,
        BallArg::Diamond => BallKind::Diamond,
    };
    let r = equidistribution_scan(kind, d, t, &center, eps, samples, ctx.seed)?;
    let rows: Vec<_> = r
        .estimates
        .iter()
        .map(|e| {
            vec![
                e.d.to_string(),
                num(e.t),
                num(e.epsilon),
                num(e.estimate),
                num(e.std_error),
                e.n_samples.to_string(),
                ctx.seed.to_string(),
            ]
        })
        .collect();
    ctx.out.csv(
        "equidist.csv",
        &[
            "d",
            "t",
            "epsilon",
            "estimate",
            "std_error",
            "n_samples",
            "seed",
        ],
        rows,
        Some(ctx.seed),
    )?;
    let slope = r.fit.map(|f| f.slope);
    ctx.say(format!(
        "log-log slope {} (volume argument predicts {})",
        opt(slope),
        r.expected_slope
    ))?;
    Ok(
        json!({"ball": format!("{ball:?}").to_lowercase(), "d": d, "t": t, "slope": slope, "expected_slope": r.expected_slope}),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> LabResult<Invocation> {
        parse_args(s.split_whitespace())
    }

    #[test]
    fn form_factor_invocation_parses() {
        let inv = parse("form-factor --ensemble gue --d 128 --t 0:8:0.25 --samples 100 --seed 7")
            .unwrap();
        assert_eq!(inv.config.global.seed, 7);
        match inv.config.command {
            Command::FormFactor { ens, t, samples } => {
                assert_eq!(ens.d, 128);
                assert_eq!(t.len(), 33);
                assert_eq!(samples, 100);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn usage_errors_exit_with_two() {
        for s in [
            "form-factor --d -3 --t 0 --samples 1",
            "form-factor --d 0 --t 0 --samples 1",
            "form-factor --d 4 --t 0:1 --samples 1",
            "form-factor --d 4 --t 0 --samples 1 --bogus",
            "form-factor --t 0 --samples 1",
            "compile --diag 1,2 --hamiltonian h.cmpx --t 1 --eps 0.1",
            "escape --d 4 --eps 0.1 --t 0 --samples 100 --jobs 0",
        ] {
            let err = parse(s).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{s}: {err}");
        }
    }

    #[test]
    fn config_values_yield_to_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        std::fs::write(
            &cfg,
            "seed = 3\nd = 16\nsamples = 5\n[form-factor]\nt = \"0:1:0.5\"\n",
        )
        .unwrap();
        let inv = parse(&format!("form-factor --config {} --seed 11", cfg.display())).unwrap();
        assert_eq!(inv.config.global.seed, 11);
        match &inv.config.command {
            Command::FormFactor { ens, t, samples } => {
                assert_eq!((ens.d, *samples), (16, 5));
                assert_eq!(t.0, vec![0.0, 0.5, 1.0]);
            }
            other => panic!("{other:?}"),
        }
        assert!(inv.command_line().contains("--d 16"));
    }

    #[test]
    fn every_subcommand_has_a_name() {
        let cmd = RunConfig::command();
        let names: Vec<&str> = cmd.get_subcommands().map(|c| c.get_name()).collect();
        assert_eq!(names.len(), 14);
        for n in [
            "sample",
            "form-factor",
            "variance-check",
            "escape",
            "escape-scaling",
            "state-escape",
            "torus-distance",
            "concentration",
            "gauss-average",
            "complexity",
            "jump-figure",
            "compile",
            "verify-circuit",
            "equidist",
        ] {
            assert!(names.contains(&n), "{n}");
        }
        RunConfig::command().debug_assert();
    }
}
