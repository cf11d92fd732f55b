//! The `levymult` command line: config-driven runs that write CSV, grid and
//! JSON artifacts.
//!
//! Exit codes: 0 on success, 1 when a verification fails, 2 on usage,
//! configuration or I/O errors.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::{pv_convolve, PvOptions, SingularKernel};
use crate::levy_measure::{Atom, DiscreteLevyMeasure, JumpModulator, LevyMeasure};
use crate::schema::{
    read_json, CompensatorDoc, FunctionDoc, FunctionalDoc, MeasureDoc, Real, ScenarioDoc, SymbolDoc,
};
use crate::stochastic::{
    burkholder_bound_check, jump_time_uniformity, l1_mass_check, levy_system_check,
    martingale_property_check, projection_identity_check, run_ensemble, sample_path,
    shipped_functionals, shipped_scenarios, BurkholderRow, KsReport, L1Report, LevySystemReport,
    MartingaleReport, ProjectionReport, Scenario,
};
use crate::symbol::SymbolKind;
use crate::transform::{
    apply_multiplier, build_corpus, norm_ratio_sweep_with_table, write_sweep_csv, CorpusConfig,
    GridFunction, SymbolTable, DEFAULT_N_2D,
};

#[derive(Debug, Parser)]
#[command(
    name = "levymult",
    version,
    about = "Fourier multipliers from modulated Lévy jumps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate a symbol on a frequency grid.
    Symbol,
    /// Apply a symbol to a grid function file.
    Apply,
    /// Sweep ‖Mf‖_p/‖f‖_p over a corpus against p* − 1.
    Normratio,
    /// Tabulate the singular kernel and optionally run a p.v. convolution.
    Kernel {
        /// Inner time cutoff ε of a truncated kernel.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Outer time cutoff T of a truncated kernel; `inf` allowed.
        #[arg(long)]
        t_max: Option<f64>,
        /// Excluded ball radius of the p.v. convolution.
        #[arg(long)]
        rho: Option<f64>,
        /// Quadrature tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the Monte Carlo verification suite.
    Verify,
}

/// A run's failure mode, mapped to the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(Error::Json(e))
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(Error::Io(e))
    }
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run_from_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

pub fn run(cli: &Cli) -> std::result::Result<(), Failure> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(invalid("--workers must be positive").into());
        }
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| invalid(e.to_string()))?;
    std::fs::create_dir_all(&cli.out)?;
    pool.install(|| match &cli.command {
        Command::Symbol => cmd_symbol(cli),
        Command::Apply => cmd_apply(cli),
        Command::Normratio => cmd_normratio(cli),
        Command::Kernel {
            epsilon,
            t_max,
            rho,
            tol,
        } => cmd_kernel(cli, *epsilon, *t_max, *rho, *tol),
        Command::Verify => cmd_verify(cli),
    })
}

fn load<T: serde::de::DeserializeOwned + Default>(cli: &Cli) -> Result<T> {
    match &cli.config {
        Some(p) => read_json(p),
        None => Ok(T::default()),
    }
}

fn load_required<T: serde::de::DeserializeOwned>(cli: &Cli, what: &str) -> Result<T> {
    let p = cli
        .config
        .as_ref()
        .ok_or_else(|| invalid(format!("{what} needs --config")))?;
    read_json(p)
}

fn config_dir(cli: &Cli) -> Option<&Path> {
    cli.config.as_deref().and_then(Path::parent)
}

fn create(cli: &Cli, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(cli.out.join(name))?))
}

fn periods(p: &Option<Vec<Real>>, d: usize) -> Vec<f64> {
    match p {
        Some(v) => v.iter().map(|r| r.0).collect(),
        None => vec![2.0 * PI; d],
    }
}

// ---------------------------------------------------------------------------
// symbol / apply

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolRun {
    pub symbol: SymbolDoc,
    pub dims: Vec<usize>,
    /// Spatial periods; frequencies are `2πk/L`. Defaults to `2π`.
    #[serde(default)]
    pub period: Option<Vec<Real>>,
    #[serde(default = "symbol_csv")]
    pub output: String,
}

fn symbol_csv() -> String {
    "symbol.csv".into()
}

fn cmd_symbol(cli: &Cli) -> std::result::Result<(), Failure> {
    let cfg: SymbolRun = load_required(cli, "symbol")?;
    let symbol = cfg.symbol.build()?;
    let table = SymbolTable::new(&symbol, &cfg.dims, &periods(&cfg.period, cfg.dims.len()))?;
    let mut w = create(cli, &cfg.output)?;
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ApplyRun {
    pub symbol: SymbolDoc,
    /// Grid function file, relative to the config file.
    pub input: PathBuf,
    #[serde(default = "applied_grid")]
    pub output: String,
}

fn applied_grid() -> String {
    "applied.lmgf".into()
}

fn read_grid(path: &Path) -> Result<GridFunction> {
    let file = File::open(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    GridFunction::read_binary(BufReader::new(file))
}

fn resolve(cli: &Cli, p: &Path) -> PathBuf {
    match config_dir(cli) {
        Some(d) if p.is_relative() => d.join(p),
        _ => p.to_path_buf(),
    }
}

fn cmd_apply(cli: &Cli) -> std::result::Result<(), Failure> {
    let cfg: ApplyRun = load_required(cli, "apply")?;
    let symbol = cfg.symbol.build()?;
    let f = read_grid(&resolve(cli, &cfg.input))?;
    let out = apply_multiplier(&f, &symbol)?;
    let mut w = create(cli, &cfg.output)?;
    out.write_binary(&mut w)?;
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// normratio

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NamedSymbol {
    pub id: String,
    pub symbol: SymbolDoc,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusDoc {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub period: Option<Vec<Real>>,
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NormRatioRun {
    #[serde(default = "default_norm_suite")]
    pub symbols: Vec<NamedSymbol>,
    #[serde(default = "default_p_list")]
    pub p: Vec<Real>,
    #[serde(default = "default_corpus")]
    pub corpus: CorpusDoc,
    #[serde(default = "sweep_csv")]
    pub output: String,
}

impl Default for NormRatioRun {
    fn default() -> Self {
        Self {
            symbols: default_norm_suite(),
            p: default_p_list(),
            corpus: default_corpus(),
            output: sweep_csv(),
        }
    }
}

fn sweep_csv() -> String {
    "normratio.csv".into()
}

pub fn default_p_list() -> Vec<Real> {
    [4.0 / 3.0, 1.5, 2.0, 3.0, 4.0]
        .into_iter()
        .map(Real)
        .collect()
}

fn default_corpus() -> CorpusDoc {
    CorpusDoc {
        dims: vec![DEFAULT_N_2D; 2],
        period: None,
        count: 40,
        seed: 0,
    }
}

fn discrete_plane_signs() -> MeasureDoc {
    let atoms = vec![
        Atom::new(vec![1.0, 0.0], 1.0),
        Atom::new(vec![-1.0, 0.0], 1.0),
        Atom::new(vec![0.0, 1.0], 1.0),
        Atom::new(vec![0.0, -1.0], 1.0),
        Atom::new(vec![1.0, 1.0], 0.5),
        Atom::new(vec![-1.0, -1.0], 0.5),
    ];
    let measure = LevyMeasure::Discrete(DiscreteLevyMeasure::new(2, atoms).expect("valid atoms"));
    MeasureDoc::from_parts(
        &measure,
        &JumpModulator::SignPattern(vec![1.0, 1.0, -1.0, -1.0, 1.0, 1.0]),
    )
}

/// Stable-power symbols, second-order Riesz transforms and their
/// combinations, and discrete measures with `±1` modulators, in the plane.
pub fn default_norm_suite() -> Vec<NamedSymbol> {
    let mut out = Vec::new();
    for alpha in [0.5, 1.0, 1.5] {
        out.push(NamedSymbol {
            id: format!("power-{alpha}"),
            symbol: SymbolDoc::from_kind(&SymbolKind::Power {
                alpha,
                axis: 0,
                dim: 2,
            }),
        });
    }
    out.push(NamedSymbol {
        id: "riesz2".into(),
        symbol: SymbolDoc::from_kind(&SymbolKind::Riesz2 { axis: 0, dim: 2 }),
    });
    out.push(NamedSymbol {
        id: "riesz-pair".into(),
        symbol: SymbolDoc::from_kind(&SymbolKind::RieszPair {
            axes: (0, 1),
            dim: 2,
        }),
    });
    out.push(NamedSymbol {
        id: "riesz-combo".into(),
        symbol: SymbolDoc::from_kind(&SymbolKind::RieszCombo {
            coefficients: vec![1.0, -1.0],
        }),
    });
    out.push(NamedSymbol {
        id: "discrete-signs".into(),
        symbol: SymbolDoc::General {
            measure: discrete_plane_signs(),
            tolerance: None,
        },
    });
    let nn =
        LevyMeasure::Discrete(DiscreteLevyMeasure::nearest_neighbour(2, 1.0, 1.0).expect("valid"));
    out.push(NamedSymbol {
        id: "discrete-axis-signs".into(),
        symbol: SymbolDoc::General {
            measure: MeasureDoc::from_parts(&nn, &JumpModulator::PerAxis(vec![1.0, -1.0])),
            tolerance: None,
        },
    });
    out
}

/// Runs the sweep; each row is `(symbol id, row)`.
pub fn run_norm_sweep(
    cfg: &NormRatioRun,
    seed: Option<u64>,
) -> Result<Vec<(String, crate::transform::SweepRow)>> {
    if cfg.corpus.count == 0 {
        return Err(invalid("corpus is empty"));
    }
    let d = cfg.corpus.dims.len();
    let corpus = build_corpus(&CorpusConfig {
        dims: cfg.corpus.dims.clone(),
        period: periods(&cfg.corpus.period, d),
        count: cfg.corpus.count,
        seed: seed.unwrap_or(cfg.corpus.seed),
    })?;
    let p_list: Vec<f64> = cfg.p.iter().map(|r| r.0).collect();
    let mut rows = Vec::new();
    for named in &cfg.symbols {
        let table = SymbolTable::new(
            &named.symbol.build()?,
            corpus[0].f.dims(),
            corpus[0].f.period(),
        )?;
        for row in norm_ratio_sweep_with_table(&table, &corpus, &p_list)? {
            rows.push((named.id.clone(), row));
        }
    }
    Ok(rows)
}

fn cmd_normratio(cli: &Cli) -> std::result::Result<(), Failure> {
    let cfg: NormRatioRun = load(cli)?;
    let rows = run_norm_sweep(&cfg, cli.seed)?;
    let mut w = create(cli, &cfg.output)?;
    write_sweep_csv(&mut w, &rows)?;
    w.flush()?;
    let violations: Vec<String> = rows
        .iter()
        .filter(|(_, r)| r.violated)
        .map(|(id, r)| format!("{id} at p={} (ratio {} > {})", r.p, r.max_ratio, r.bound))
        .collect();
    println!(
        "normratio: {} rows, {} violations",
        rows.len(),
        violations.len()
    );
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(violations.join("; ")))
    }
}

// ---------------------------------------------------------------------------
// kernel

#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum PvSchemeDoc {
    #[default]
    PeriodicCells,
    Midpoint,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PvRun {
    pub input: PathBuf,
    pub rho: Real,
    #[serde(default)]
    pub axis: usize,
    #[serde(default)]
    pub scheme: PvSchemeDoc,
    /// Periodic images for the midpoint scheme.
    #[serde(default = "default_images")]
    pub images: usize,
    #[serde(default = "pv_grid")]
    pub output: String,
}

fn default_images() -> usize {
    4
}

fn pv_grid() -> String {
    "pv.lmgf".into()
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KernelRun {
    /// Inner cutoff; with `t_max` selects the truncated kernel.
    #[serde(default)]
    pub epsilon: Option<Real>,
    /// Outer cutoff; `null` means `∞`.
    #[serde(default)]
    pub t_max: Option<Real>,
    #[serde(default = "default_kernel_tol")]
    pub tol: Real,
    #[serde(default = "default_axis_points")]
    pub x: Vec<Real>,
    #[serde(default = "default_axis_points")]
    pub y: Vec<Real>,
    #[serde(default = "kernel_csv")]
    pub output: String,
    #[serde(default)]
    pub pv: Option<PvRun>,
}

impl Default for KernelRun {
    fn default() -> Self {
        Self {
            epsilon: None,
            t_max: None,
            tol: default_kernel_tol(),
            x: default_axis_points(),
            y: default_axis_points(),
            output: kernel_csv(),
            pv: None,
        }
    }
}

fn default_kernel_tol() -> Real {
    Real(1e-12)
}

fn default_axis_points() -> Vec<Real> {
    [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]
        .into_iter()
        .map(Real)
        .collect()
}

fn kernel_csv() -> String {
    "kernel.csv".into()
}

fn cmd_kernel(
    cli: &Cli,
    epsilon: Option<f64>,
    t_max: Option<f64>,
    rho: Option<f64>,
    tol: Option<f64>,
) -> std::result::Result<(), Failure> {
    let mut cfg: KernelRun = load(cli)?;
    if let Some(e) = epsilon {
        cfg.epsilon = Some(Real(e));
    }
    if let Some(t) = t_max {
        cfg.t_max = Some(Real(t));
    }
    if let Some(t) = tol {
        cfg.tol = Real(t);
    }
    let kernel = match (cfg.epsilon, cfg.t_max) {
        (None, None) => SingularKernel {
            tol: cfg.tol.0,
            ..SingularKernel::closed_form()
        },
        (e, t) => SingularKernel::truncated(
            e.map_or(0.0, |r| r.0),
            t.map_or(f64::INFINITY, |r| r.0),
            cfg.tol.0,
        )?,
    };
    let xs: Vec<f64> = cfg.x.iter().map(|r| r.0).collect();
    let ys: Vec<f64> = cfg.y.iter().map(|r| r.0).collect();
    let mut w = create(cli, &cfg.output)?;
    kernel.write_table(&mut w, &xs, &ys)?;
    w.flush()?;
    if let Some(mut pv) = cfg.pv {
        if let Some(r) = rho {
            pv.rho = Real(r);
        }
        let f = read_grid(&resolve(cli, &pv.input))?;
        let opts = match pv.scheme {
            PvSchemeDoc::PeriodicCells => PvOptions::new(pv.rho.0),
            PvSchemeDoc::Midpoint => PvOptions::midpoint(pv.rho.0, pv.images),
        }
        .with_axis(pv.axis);
        let out = pv_convolve(&f, &opts)?;
        let mut w = create(cli, &pv.output)?;
        out.write_binary(&mut w)?;
        w.flush()?;
    } else if rho.is_some() {
        return Err(invalid("--rho needs a pv section in the config").into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// verify

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionDoc {
    pub name: String,
    pub measure: MeasureDoc,
    #[serde(default = "one")]
    pub step: Real,
    pub f: FunctionDoc,
    /// Window start `s < 0`; the window is `(s, 0]`.
    pub s: Real,
}

fn one() -> Real {
    Real(1.0)
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyRun {
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<ScenarioDoc>,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    /// Times as fractions of the window, in `[0, 1]`.
    #[serde(default = "default_checkpoints")]
    pub checkpoints: Vec<Real>,
    #[serde(default)]
    pub compensator: CompensatorDoc,
    #[serde(default = "default_burkholder_p")]
    pub p: Vec<Real>,
    /// Defaults to the shipped functionals of each scenario.
    #[serde(default)]
    pub functionals: Option<Vec<FunctionalDoc>>,
    #[serde(default = "default_projections")]
    pub projections: Vec<ProjectionDoc>,
    #[serde(default = "default_sigma")]
    pub sigma: Real,
    #[serde(default = "verify_json")]
    pub output: String,
}

impl Default for VerifyRun {
    fn default() -> Self {
        Self {
            scenarios: default_scenarios(),
            n_paths: default_paths(),
            seed: 0,
            checkpoints: default_checkpoints(),
            compensator: CompensatorDoc::Exact,
            p: default_burkholder_p(),
            functionals: None,
            projections: default_projections(),
            sigma: default_sigma(),
            output: verify_json(),
        }
    }
}

fn default_scenarios() -> Vec<ScenarioDoc> {
    shipped_scenarios()
        .expect("shipped scenarios are valid")
        .iter()
        .map(ScenarioDoc::from_scenario)
        .collect()
}

fn default_paths() -> usize {
    20_000
}

fn default_checkpoints() -> Vec<Real> {
    [0.25, 0.5, 1.0].into_iter().map(Real).collect()
}

fn default_burkholder_p() -> Vec<Real> {
    [1.5, 2.0, 3.0].into_iter().map(Real).collect()
}

fn default_sigma() -> Real {
    Real(3.0)
}

fn verify_json() -> String {
    "verify.json".into()
}

/// The lattice `±1` measure with `φ ≡ 1` and the `±1, ±2` sign pattern,
/// both on 32 sites with window `(−1, 0]`.
pub fn default_projections() -> Vec<ProjectionDoc> {
    let bump = |n: usize, c: f64, w: f64| -> FunctionDoc {
        FunctionDoc::Table {
            dims: vec![n],
            values: (0..n)
                .map(|i| {
                    let d = ((i as f64 - c + n as f64 / 2.0).rem_euclid(n as f64)) - n as f64 / 2.0;
                    crate::schema::SampleDoc::Real(Real((-d * d / (2.0 * w * w)).exp()))
                })
                .collect(),
        }
    };
    let pm1 =
        LevyMeasure::Discrete(DiscreteLevyMeasure::nearest_neighbour(1, 1.0, 1.0).expect("valid"));
    let line = crate::stochastic::sign_pattern_line().expect("valid");
    vec![
        ProjectionDoc {
            name: "line-unit".into(),
            measure: MeasureDoc::from_parts(
                &pm1,
                &JumpModulator::Constant(Complex64::new(1.0, 0.0)),
            ),
            step: Real(1.0),
            f: bump(32, 3.0, 2.0),
            s: Real(-1.0),
        },
        ProjectionDoc {
            name: "line-sign-pattern".into(),
            measure: MeasureDoc::from_parts(
                &LevyMeasure::Discrete(line.measure().clone()),
                line.modulator(),
            ),
            step: Real(1.0),
            f: bump(32, 3.0, 2.0),
            s: Real(-1.0),
        },
    ]
}

#[derive(Debug, Serialize)]
pub struct Checked<T: Serialize> {
    #[serde(flatten)]
    pub report: T,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct SubordinationReport {
    pub paths: usize,
    pub violations: usize,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub levy_system: Vec<Checked<LevySystemReport>>,
    pub martingale: Checked<MartingaleReport>,
    pub subordination: SubordinationReport,
    pub burkholder: Vec<Checked<BurkholderRow>>,
    pub l1_mass: Checked<L1Report>,
    pub jump_times: Checked<KsReport>,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct ProjectionRunReport {
    pub name: String,
    pub s: f64,
    pub l2_error: f64,
    pub stderr_norm: f64,
    pub relative_error: f64,
    pub n_paths: usize,
    pub h_mc: Vec<Complex64>,
    pub stderr: Vec<f64>,
    pub h_spec: Vec<Complex64>,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub n_paths: usize,
    pub sigma: f64,
    pub scenarios: Vec<ScenarioReport>,
    pub projections: Vec<ProjectionRunReport>,
    pub passed: bool,
}

/// Seed of check `check` on scenario `scenario` under the master seed.
/// Lévy-system functional `j` uses check `8 + j`; the martingale ensemble
/// uses 0, the L¹ check 1 and the jump-time test 2. Projection `i` uses
/// scenario slot `1000 + i`.
pub fn check_seed(seed: u64, scenario: usize, check: usize) -> u64 {
    seed.wrapping_add(((scenario * 16 + check) as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn verify_scenario(
    cfg: &VerifyRun,
    sc: &Scenario,
    index: usize,
    seed: u64,
) -> Result<ScenarioReport> {
    let k = cfg.sigma.0;
    let n = cfg.n_paths;
    let functionals: Vec<_> = match &cfg.functionals {
        Some(list) => list.iter().map(FunctionalDoc::build).collect(),
        None => shipped_functionals(&sc.system),
    };
    let levy_system = functionals
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let r = levy_system_check(&sc.system, f, sc.window, n, check_seed(seed, index, 8 + j))?;
            Ok(Checked {
                passed: r.passed(k),
                report: r,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let len = sc.window.length();
    let mut checkpoints: Vec<f64> = cfg
        .checkpoints
        .iter()
        .map(|c| sc.window.s + c.0 * len)
        .collect();
    if cfg.checkpoints.iter().any(|c| !(0.0..=1.0).contains(&c.0)) {
        return Err(invalid("checkpoints are window fractions in [0, 1]"));
    }
    checkpoints.sort_by(f64::total_cmp);
    let pairs = sc.simulate(
        n,
        check_seed(seed, index, 0),
        &checkpoints,
        cfg.compensator.rule(),
    )?;
    let m = martingale_property_check(sc, &pairs, 1e-14)?;
    let martingale = Checked {
        passed: m.passed(k),
        report: m,
    };
    let violations: usize = pairs.iter().map(|p| p.gap_violations).sum();
    let p_list: Vec<f64> = cfg.p.iter().map(|r| r.0).collect();
    let burkholder = burkholder_bound_check(&pairs, &p_list)?
        .into_iter()
        .map(|r| Checked {
            passed: !r.violated(k),
            report: r,
        })
        .collect::<Vec<_>>();
    let l1 = l1_mass_check(sc, n, check_seed(seed, index, 1))?;
    let paths = run_ensemble(n, check_seed(seed, index, 2), 0, |rng| {
        sample_path(sc.system.jumps(), sc.window, rng)
    })?;
    let ks = jump_time_uniformity(&paths)?;
    let report = ScenarioReport {
        name: sc.name.clone(),
        martingale,
        subordination: SubordinationReport {
            paths: n,
            violations,
            passed: violations == 0,
        },
        burkholder,
        l1_mass: Checked {
            passed: l1.passed(k),
            report: l1,
        },
        jump_times: Checked {
            passed: ks.passed(),
            report: ks,
        },
        levy_system,
        passed: false,
    };
    let passed = report.levy_system.iter().all(|c| c.passed)
        && report.martingale.passed
        && report.subordination.passed
        && report.burkholder.iter().all(|c| c.passed)
        && report.l1_mass.passed
        && report.jump_times.passed;
    Ok(ScenarioReport { passed, ..report })
}

fn verify_projection(
    doc: &ProjectionDoc,
    base: Option<&Path>,
    n: usize,
    seed: u64,
) -> Result<ProjectionRunReport> {
    let (measure, modulator) = doc.measure.build()?;
    let LevyMeasure::Discrete(measure) = measure else {
        return Err(Error::UnsupportedMeasure(
            "projection needs a lattice measure".into(),
        ));
    };
    let system = crate::stochastic::JumpSystem::new(measure, modulator, doc.step.0)?;
    let f = doc.f.build(doc.step.0, base)?;
    let r: ProjectionReport = projection_identity_check(&system, &f, doc.s.0, n, seed)?;
    let spec_norm = r.h_spec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(ProjectionRunReport {
        name: doc.name.clone(),
        s: doc.s.0,
        l2_error: r.l2_error,
        stderr_norm: r.stderr_norm,
        relative_error: r.l2_error / spec_norm,
        n_paths: r.n_paths,
        passed: r.passed(5.0),
        h_mc: r.h_mc,
        stderr: r.stderr,
        h_spec: r.h_spec,
    })
}

/// Runs every configured check.
pub fn run_verify(cfg: &VerifyRun, base: Option<&Path>) -> Result<VerifyReport> {
    let seed = cfg.seed;
    let scenarios = cfg
        .scenarios
        .iter()
        .enumerate()
        .map(|(i, doc)| verify_scenario(cfg, &doc.build(base)?, i, seed))
        .collect::<Result<Vec<_>>>()?;
    let projections = cfg
        .projections
        .iter()
        .enumerate()
        .map(|(i, doc)| verify_projection(doc, base, cfg.n_paths, check_seed(seed, 1000 + i, 0)))
        .collect::<Result<Vec<_>>>()?;
    let passed = scenarios.iter().all(|s| s.passed) && projections.iter().all(|p| p.passed);
    Ok(VerifyReport {
        seed,
        n_paths: cfg.n_paths,
        sigma: cfg.sigma.0,
        scenarios,
        projections,
        passed,
    })
}

#[derive(Debug, Serialize)]
struct Metadata {
    version: &'static str,
    command: &'static str,
    workers: usize,
    unix_time: u64,
}

fn cmd_verify(cli: &Cli) -> std::result::Result<(), Failure> {
    let mut cfg: VerifyRun = load(cli)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let report = run_verify(&cfg, config_dir(cli))?;
    let mut w = create(cli, &cfg.output)?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    let meta = Metadata {
        version: env!("CARGO_PKG_VERSION"),
        command: "verify",
        workers: rayon::current_num_threads(),
        unix_time: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    let stem = Path::new(&cfg.output)
        .file_stem()
        .map_or("verify".into(), |s| s.to_string_lossy().into_owned());
    let mut w = create(cli, &format!("{stem}.meta.json"))?;
    serde_json::to_writer_pretty(&mut w, &meta)?;
    w.flush()?;
    for sc in &report.scenarios {
        println!(
            "{:<28} {}",
            sc.name,
            if sc.passed { "pass" } else { "FAIL" }
        );
    }
    for p in &report.projections {
        println!("{:<28} {}", p.name, if p.passed { "pass" } else { "FAIL" });
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .scenarios
            .iter()
            .filter(|s| !s.passed)
            .map(|s| s.name.as_str())
            .chain(
                report
                    .projections
                    .iter()
                    .filter(|p| !p.passed)
                    .map(|p| p.name.as_str()),
            )
            .collect();
        Err(Failure::Verification(failed.join(", ")))
    }
}
