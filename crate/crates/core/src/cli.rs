//! `masersim` command line: config loading, command dispatch and artifact
//! output. Exit codes: 0 success, 1 numerical failure or hard validity flag,
//! 2 usage or configuration error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::circuit::{
    analytic_photon_number, coupling_for_ratio, dressed_analysis, effective_model, masing_ratio, validity_report, CircuitDesign,
};
use crate::config::{parse_config, ConfigError, OutputFormat, RunConfig};
use crate::maser::{default_truncation, solve_effective_capped, MaserState, SolveError, SolveSummary};
use crate::observables::{variance_profile, wigner, GridSpec};
use crate::output::{resolve_out_dir, ArtifactWriter, OUT_DIR_ENV};
use crate::sweep::{self, SweepSettings, SweepTable};
use crate::units::to_linear_mhz;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "masersim", version, about = "Steady states of a flux-tunable single-atom maser")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML or JSON); the built-in reference design when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides MASERSIM_OUT and the config).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Exit 0 even when some sweep points fail.
    #[arg(long, global = true)]
    pub keep_going: bool,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Use the full-resolution grids of the config.
    #[arg(long, global = true)]
    pub full_scale: bool,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Run configuration; same as --config.
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FluxArgs {
    pub config: Option<PathBuf>,
    /// Coupler flux in units of the flux quantum.
    #[arg(long, allow_negative_numbers = true)]
    pub flux: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WignerArgs {
    pub config: Option<PathBuf>,
    /// Coupler flux values in units of the flux quantum.
    #[arg(long, allow_negative_numbers = true, num_args = 1.., value_delimiter = ',')]
    pub flux: Vec<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the validity report of the design; exit 1 on hard flags.
    Validate(FluxArgs),
    /// Steady state of the target reservoir at one flux point.
    Steady(FluxArgs),
    /// Photon statistics against coupler flux.
    FluxSweep(ConfigArg),
    /// Controllability Δg²(0) over a pump/loss grid.
    PhaseDiagram(ConfigArg),
    /// Emission-range error under pump/loss deviations.
    Robustness(ConfigArg),
    /// Two-reservoir addressing over source frequency and flux.
    Multires(ConfigArg),
    /// Coupling-curve Hausdorff distances over detuning and capacitance scale.
    Hausdorff(ConfigArg),
    /// Photon-number sensitivity to small flux excursions.
    Noise(ConfigArg),
    /// Circuit-independent sweep over the effective coupling.
    CouplingSweep(ConfigArg),
    /// Reservoir Wigner functions at selected fluxes.
    Wigner(WignerArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Validate(_) => "validate",
            Self::Steady(_) => "steady",
            Self::FluxSweep(_) => "flux-sweep",
            Self::PhaseDiagram(_) => "phase-diagram",
            Self::Robustness(_) => "robustness",
            Self::Multires(_) => "multires",
            Self::Hausdorff(_) => "hausdorff",
            Self::Noise(_) => "noise",
            Self::CouplingSweep(_) => "coupling-sweep",
            Self::Wigner(_) => "wigner",
        }
    }

    fn config_path(&self) -> Option<&Path> {
        match self {
            Self::Validate(a) | Self::Steady(a) => a.config.as_deref(),
            Self::Wigner(a) => a.config.as_deref(),
            Self::FluxSweep(a)
            | Self::PhaseDiagram(a)
            | Self::Robustness(a)
            | Self::Multires(a)
            | Self::Hausdorff(a)
            | Self::Noise(a)
            | Self::CouplingSweep(a) => a.config.as_deref(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Solve(#[from] SolveError),
    #[error("{0}")]
    Circuit(#[from] crate::circuit::CircuitError),
    #[error("{0}")]
    Observable(#[from] crate::observables::ObservableError),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Usage(_) | Self::Io(_) => EXIT_USAGE,
            Self::Solve(_) | Self::Circuit(_) | Self::Observable(_) => EXIT_NUMERICAL,
        }
    }
}

/// Outcome of a command: the one-line summary, manifest summary and failed
/// point count.
struct Outcome {
    line: String,
    summary: Value,
    failures: usize,
    hard_flags: bool,
}

impl Outcome {
    fn new(line: String, summary: Value) -> Self {
        Self { line, summary, failures: 0, hard_flags: false }
    }
}

struct Context {
    cfg: RunConfig,
    settings: SweepSettings,
    full_scale: bool,
    writer: ArtifactWriter,
}

impl Context {
    fn add_tables(&mut self, tables: &[&SweepTable]) -> Result<usize, CliError> {
        let mut failures = 0;
        for t in tables {
            self.writer.add_table(t)?;
            failures += t.failures().len();
        }
        Ok(failures)
    }

    fn design(&self) -> &CircuitDesign {
        &self.cfg.design
    }

    fn target_truncation(&self) -> usize {
        let d = self.design();
        self.settings
            .truncation
            .unwrap_or_else(|| default_truncation(d.gamma_pump, d.reservoirs[self.settings.target_reservoir].loss_rate))
    }

    /// Resonant steady state of the target reservoir at `flux`.
    fn steady_at(&self, flux: f64) -> Result<(MaserState, f64, usize), CliError> {
        let single = sweep::single_reservoir(self.design(), self.settings.target_reservoir);
        let model = effective_model(&single, flux, self.settings.convention)?;
        let model = if self.settings.resonant_source { model.tuned_to_reservoir(0) } else { model };
        let n = self.target_truncation();
        let state = solve_effective_capped(&model, &[n], &self.settings.solver, self.settings.dimension_cap)?;
        Ok((state, model.g_eff[0], n))
    }
}

/// Runs the CLI on `args` and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let positional = cli.command.config_path();
    match (cli.config.as_deref(), positional) {
        (Some(a), Some(b)) if a != b => Err(CliError::Usage("conflicting --config and positional config".into())),
        (Some(p), _) | (None, Some(p)) => Ok(parse_config(p)?),
        (None, None) => Ok(RunConfig::reference()),
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let cfg = load_config(cli)?;
    for w in &cfg.warnings {
        log::warn!("{w}");
    }
    let settings = SweepSettings {
        solver: cfg.file.solver.clone(),
        threads: cli.threads,
        convention: cfg.convention,
        truncation: cfg.file.sweep.truncation,
        keep_distributions: cfg.file.sweep.flux_sweep.keep_distributions,
        ..SweepSettings::default()
    };
    let env = std::env::var(OUT_DIR_ENV).ok();
    let dir = resolve_out_dir(cli.out_dir.as_deref(), env.as_deref(), &cfg.file.output.directory);
    let format = cli.format.unwrap_or(cfg.file.output.format);
    let command = cli.command.name();
    let writer = ArtifactWriter::new(&dir, format, command, &cfg.design, cfg.convention)?;
    let mut ctx = Context { cfg, settings, full_scale: cli.full_scale, writer };

    let outcome = match &cli.command {
        Command::Validate(a) => validate(&mut ctx, a.flux)?,
        Command::Steady(a) => steady(&mut ctx, a.flux)?,
        Command::FluxSweep(_) => flux_sweep(&mut ctx)?,
        Command::PhaseDiagram(_) => phase_diagram(&mut ctx)?,
        Command::Robustness(_) => robustness(&mut ctx)?,
        Command::Multires(_) => multires(&mut ctx)?,
        Command::Hausdorff(_) => hausdorff(&mut ctx)?,
        Command::Noise(_) => noise(&mut ctx)?,
        Command::CouplingSweep(_) => coupling_sweep(&mut ctx)?,
        Command::Wigner(a) => wigner_cmd(&mut ctx, &a.flux)?,
    };
    let Context { cfg, full_scale, writer, .. } = ctx;
    let mut summary = outcome.summary;
    summary["failed_points"] = json!(outcome.failures);
    let path = writer.finish(&cfg.file, full_scale, summary)?;
    println!("{command}: {} -> {}", outcome.line, path.display());
    if outcome.hard_flags || (outcome.failures > 0 && !cli.keep_going) {
        if outcome.failures > 0 {
            eprintln!("{} point(s) failed; rerun with --keep-going to accept partial results", outcome.failures);
        }
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

fn validate(ctx: &mut Context, flux: Option<f64>) -> Result<Outcome, CliError> {
    let flux = flux.unwrap_or(ctx.cfg.file.sweep.steady.flux.base());
    let report = validity_report(ctx.design(), flux, ctx.settings.convention)?;
    let dressed = dressed_analysis(ctx.design(), flux, 50)?;
    let dressed_max = dressed.iter().map(|r| r.upper_splitting_ratio).fold(0.0, f64::max);
    println!("flux: {flux} phi0");
    println!("g_eff/2pi: {:.4} MHz", to_linear_mhz(report.g_eff));
    println!("lambda: {:.4}", report.lambda);
    println!("n_ph_max: {:.2}", report.n_ph_max);
    println!("n_cr: {:.2}", report.n_cr);
    println!("n_max/n_cr: {:.4}", report.ratio_max_cr);
    println!("N*: {:.1}", report.n_star);
    println!("|K_r|/2pi: {:.4} kHz", report.kerr_khz);
    println!("|K_r|/kappa: {:.3e}", report.kerr_ratio);
    for d in &report.dispersive_ratios {
        println!("g/Delta ({}): {:.4}", d.element, d.ratio);
    }
    println!("max dressed splitting / Delta (n <= 50): {:.4}%", 100.0 * dressed_max);
    for f in &report.flags {
        println!("flag [{:?}] {}: {}", f.severity, f.code, f.message);
    }
    for w in &ctx.cfg.warnings {
        println!("design warning: {w}");
    }
    let hard = report.has_hard_flags();
    ctx.writer.add_value("report", json!(report));
    ctx.writer.add_value("dressed", json!(dressed));
    let line = format!(
        "n_max/n_cr = {:.3}, |K_r| = {:.4} kHz, lambda = {:.4}, {} flag(s){}",
        report.ratio_max_cr,
        report.kerr_khz,
        report.lambda,
        report.flags.len(),
        if hard { " (hard)" } else { "" }
    );
    let summary = json!({
        "ratio_max_cr": report.ratio_max_cr,
        "kerr_khz": report.kerr_khz,
        "lambda": report.lambda,
        "dressed_max": dressed_max,
        "hard_flags": hard,
    });
    let mut outcome = Outcome::new(line, summary);
    outcome.hard_flags = hard;
    Ok(outcome)
}

fn steady(ctx: &mut Context, flux: Option<f64>) -> Result<Outcome, CliError> {
    let flux = flux.unwrap_or(ctx.cfg.file.sweep.steady.flux.base());
    let (state, g, n) = ctx.steady_at(flux)?;
    let d = ctx.design();
    let (gamma, kappa) = (d.gamma_pump, d.reservoirs[ctx.settings.target_reservoir].loss_rate);
    let stats = &state.reservoirs[0];
    let record = json!({
        "flux": flux,
        "truncation": n,
        "g_eff_mhz": to_linear_mhz(g),
        "lambda": masing_ratio(gamma, kappa, g).ok(),
        "n_mean": stats.mean,
        "n_mean_eq": analytic_photon_number(gamma, kappa, g),
        "variance": stats.variance,
        "g2": stats.g2,
        "fano": stats.fano(),
        "tail_mass": stats.tail_mass,
        "under_truncated": stats.under_truncated,
        "source_excited": state.source_excited,
        "solver": SolveSummary::from(&state.solution),
        "fock": stats.fock,
    });
    ctx.writer.add_value("steady", record);
    if ctx.cfg.file.sweep.steady.wigner {
        let reduced = state.solution.rho.partial_trace(1).map_err(SolveError::from)?;
        let grid = wigner(&reduced, &GridSpec::for_truncation(n))?;
        ctx.writer.add_wigner(&format!("phi{flux}"), &grid)?;
    }
    let g2 = stats.g2.map_or("absent".to_string(), |v| format!("{v:.4}"));
    let line = format!("flux = {flux}, n_mean = {:.4}, g2 = {g2}", stats.mean);
    Ok(Outcome::new(line, json!({ "n_mean": stats.mean, "g2": stats.g2 })))
}

fn max_of(values: &[Option<f64>]) -> Option<f64> {
    values.iter().flatten().copied().reduce(f64::max)
}

fn flux_sweep(ctx: &mut Context) -> Result<Outcome, CliError> {
    let fluxes = ctx.cfg.file.sweep.flux_sweep.flux.values(ctx.full_scale);
    let table = sweep::flux_sweep(ctx.design(), &fluxes, &ctx.settings);
    let failures = ctx.add_tables(&[&table])?;
    let profile = variance_profile(&table);
    ctx.writer.add_value("variance_profile", json!(profile));
    let n_max = max_of(&table.column("n_mean"));
    let line = format!("{} points, max n_mean = {}", table.rows.len(), fmt_opt(n_max));
    let mut o = Outcome::new(line, json!({ "points": table.rows.len(), "max_n_mean": n_max }));
    o.failures = failures;
    Ok(o)
}

fn phase_diagram(ctx: &mut Context) -> Result<Outcome, CliError> {
    let b = &ctx.cfg.file.sweep.phase_diagram;
    let gammas = b.pump_rate.angular(ctx.full_scale);
    let kappas = b.loss_rate.angular(ctx.full_scale);
    let pd = sweep::phase_diagram(&gammas, &kappas, b.lambda_min, b.lambda_max, &ctx.settings);
    let failures = ctx.add_tables(&[&pd.table, &pd.diagonal])?;
    let max = max_of(&pd.table.column("delta_g2"));
    let excluded = pd.table.rows.iter().filter(|r| matches!(r.status, sweep::PointStatus::Excluded { .. })).count();
    let line = format!("{} points ({excluded} excluded), max delta_g2 = {}", pd.table.rows.len(), fmt_opt(max));
    let mut o = Outcome::new(line, json!({ "points": pd.table.rows.len(), "excluded": excluded, "max_delta_g2": max }));
    o.failures = failures;
    Ok(o)
}

fn robustness(ctx: &mut Context) -> Result<Outcome, CliError> {
    let b = &ctx.cfg.file.sweep.robustness;
    let steps = if ctx.full_scale { b.full_steps } else { b.steps };
    let d = ctx.design();
    let table = sweep::robustness_map(d.gamma_pump, d.reservoirs[0].loss_rate, b.range, steps, &ctx.settings);
    let failures = ctx.add_tables(&[&table])?;
    let worst = table.column("relative_error").iter().flatten().map(|x| x.abs()).reduce(f64::max);
    let line = format!("{steps}x{steps} grid, max |relative error| = {}%", fmt_opt(worst));
    let mut o = Outcome::new(line, json!({ "steps": steps, "max_abs_relative_error_percent": worst }));
    o.failures = failures;
    Ok(o)
}

/// Two-reservoir design of the multires block: the config design, with a
/// second reservoir copied from the first when only one is given and the
/// scaled pump rate applied.
pub fn multires_design(cfg: &RunConfig) -> CircuitDesign {
    let b = &cfg.file.sweep.multires;
    let mut d = cfg.design.clone();
    if d.reservoirs.len() == 1 {
        let mut second = d.reservoirs[0].clone();
        second.frequency = b.second_reservoir.angular();
        d.reservoirs.push(second);
    }
    if let Some(p) = b.pump_rate {
        d.gamma_pump = p.angular();
    }
    d
}

fn multires(ctx: &mut Context) -> Result<Outcome, CliError> {
    let design = multires_design(&ctx.cfg);
    design.validate()?;
    let b = &ctx.cfg.file.sweep.multires;
    let sources = b.source.angular(ctx.full_scale);
    let fluxes = b.flux.values(ctx.full_scale);
    let tables = sweep::multires_map(&design, &sources, &fluxes, &b.options(), &ctx.settings);
    let refs: Vec<&SweepTable> = tables.iter().collect();
    let failures = ctx.add_tables(&refs)?;
    let maxima: Vec<Option<f64>> = tables.iter().map(|t| max_of(&t.column("n_mean"))).collect();
    let line = format!(
        "{} points, max n_mean per reservoir = [{}]",
        sources.len() * fluxes.len(),
        maxima.iter().map(|m| fmt_opt(*m)).collect::<Vec<_>>().join(", ")
    );
    let mut o = Outcome::new(line, json!({ "max_n_mean": maxima, "gamma_pump_mhz": to_linear_mhz(design.gamma_pump) }));
    o.failures = failures;
    Ok(o)
}

fn hausdorff(ctx: &mut Context) -> Result<Outcome, CliError> {
    let b = &ctx.cfg.file.sweep.hausdorff;
    let deltas = b.detuning.angular(ctx.full_scale);
    let alphas = b.alpha.values(ctx.full_scale);
    let map = sweep::hausdorff_map(ctx.design(), &deltas, &alphas, &b.options(), &ctx.settings);
    let failures = ctx.add_tables(&[&map.table, &map.ridge])?;
    let argmin = map.ridge.column("alpha_argmin");
    let theory = map.ridge.column("alpha_theory");
    let worst = argmin
        .iter()
        .zip(&theory)
        .filter_map(|(a, t)| Some((a.as_ref()? - t.as_ref()?).abs()))
        .reduce(f64::max);
    let line = format!("{}x{} grid, max |alpha_argmin - alpha_theory| = {}", deltas.len(), alphas.len(), fmt_opt(worst));
    let mut o = Outcome::new(line, json!({ "max_ridge_deviation": worst }));
    o.failures = failures;
    Ok(o)
}

fn noise(ctx: &mut Context) -> Result<Outcome, CliError> {
    let b = &ctx.cfg.file.sweep.noise;
    let fluxes = b.flux.values(ctx.full_scale);
    let delta = b.delta_flux.base();
    let table = sweep::flux_noise_sensitivity(ctx.design(), &fluxes, delta, &ctx.settings);
    let failures = ctx.add_tables(&[&table])?;
    let worst = max_of(&table.column("relative_deviation"));
    let line = format!("delta_flux = {delta} phi0, max relative deviation = {}", fmt_opt(worst));
    let mut o = Outcome::new(line, json!({ "max_relative_deviation": worst }));
    o.failures = failures;
    Ok(o)
}

fn coupling_sweep(ctx: &mut Context) -> Result<Outcome, CliError> {
    let lambdas = ctx.cfg.file.sweep.coupling_sweep.lambda.values(ctx.full_scale);
    let d = ctx.design();
    let (gamma, kappa) = (d.gamma_pump, d.reservoirs[ctx.settings.target_reservoir].loss_rate);
    let couplings: Vec<f64> = lambdas.iter().map(|&l| coupling_for_ratio(gamma, kappa, l)).collect();
    let n = ctx.target_truncation();
    let table = sweep::effective_coupling_sweep(gamma, kappa, &couplings, n, &ctx.settings);
    let failures = ctx.add_tables(&[&table])?;
    let n_max = max_of(&table.column("n_mean"));
    let line = format!("{} couplings, N = {n}, max n_mean = {}", couplings.len(), fmt_opt(n_max));
    let mut o = Outcome::new(line, json!({ "points": couplings.len(), "truncation": n, "max_n_mean": n_max }));
    o.failures = failures;
    Ok(o)
}

fn wigner_cmd(ctx: &mut Context, fluxes: &[f64]) -> Result<Outcome, CliError> {
    let fluxes: Vec<f64> = if fluxes.is_empty() {
        ctx.cfg.file.sweep.wigner.fluxes.iter().map(|f| f.base()).collect()
    } else {
        fluxes.to_vec()
    };
    let points = ctx.cfg.file.sweep.wigner.points;
    if points < 2 {
        return Err(CliError::Usage("sweep.wigner.points must be at least 2".into()));
    }
    let mut records = Vec::new();
    for &flux in &fluxes {
        let (state, _, n) = ctx.steady_at(flux)?;
        let reduced = state.solution.rho.partial_trace(1).map_err(SolveError::from)?;
        let spec = GridSpec { points, ..GridSpec::for_truncation(n) };
        let grid = wigner(&reduced, &spec)?;
        for w in &grid.warnings {
            log::warn!("flux {flux}: {w}");
        }
        ctx.writer.add_wigner(&format!("phi{flux}"), &grid)?;
        records.push(json!({ "flux": flux, "n_mean": state.reservoirs[0].mean, "normalization": grid.normalization }));
    }
    let line = format!("{} grid(s) of {points}x{points}", fluxes.len());
    Ok(Outcome::new(line, json!({ "grids": records })))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |x| format!("{x:.4}"))
}
