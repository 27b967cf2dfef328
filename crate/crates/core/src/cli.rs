//! Command-line pipeline: `fit` → `decompose` → `scan` / `density`.
//!
//! Intermediate results are files in the output directory (`state.toml`,
//! `expansion.csv`) so the expensive decomposition is done once. Settings
//! come from an optional TOML file, overridden by flags.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use exmex::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, Timescales};
use crate::evolution::{self, BasisTable, DEFAULT_GRID_POINTS, DEFAULT_R_MAX_FACTOR};
use crate::specfun::HydrogenLevel;
use crate::spectral::{decompose, RadialWavefunction, DEFAULT_DEFICIT_TOL};
use crate::squeezed::{fit_parameters, OrbitGeometry, PotentialMode, QuantumNumbers, RadialSqueezedState};
use crate::{EigenExpansion, Error, RadialGrid, Window};

pub const STATE_FILE: &str = "state.toml";
pub const FIT_REPORT_FILE: &str = "fit_report.toml";
pub const EXPANSION_FILE: &str = "expansion.csv";
pub const SCAN_FILE: &str = "scan.csv";
pub const PACKETS_FILE: &str = "packets.csv";

/// Snapshot times used by `density` when none are given.
pub const DEFAULT_DENSITY_TIMES: [&str; 10] = [
    "0",
    "0.5*Tcl",
    "Tcl",
    "2*Tcl",
    "4*Tcl",
    "trev/3",
    "trev/2",
    "trev/2+Tcl/2",
    "trev",
    "trev+Tcl",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScanGrid {
    /// Gauss–Legendre panels uniform in `√r`.
    #[default]
    Gauss,
    /// Equally spaced points, trapezoid weights.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub nbar: u32,
    pub l: u32,
    pub deficit_tol: f64,
    pub grid_points: usize,
    /// Grid extent in units of `n̄²`.
    pub r_max_factor: f64,
    pub potential: PotentialMode,
    pub prominence: f64,
    /// Width of the Gaussian applied to densities before counting packets.
    /// `None` uses the Airy length at the outer turning point; 0 disables.
    pub smoothing: Option<f64>,
    pub scan_grid: ScanGrid,
    pub output_dir: PathBuf,
    /// Explicit times; take precedence over `start`/`stop`/`steps`.
    pub times: Option<Vec<String>>,
    pub start: String,
    pub stop: String,
    pub steps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            nbar: 85,
            l: 1,
            deficit_tol: DEFAULT_DEFICIT_TOL,
            grid_points: DEFAULT_GRID_POINTS,
            r_max_factor: DEFAULT_R_MAX_FACTOR,
            potential: PotentialMode::default(),
            prominence: analysis::DEFAULT_PROMINENCE,
            smoothing: None,
            scan_grid: ScanGrid::default(),
            output_dir: PathBuf::from("."),
            times: None,
            start: "0".into(),
            stop: "3*ns".into(),
            steps: 1501,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.nbar < 2 {
            return bad(format!("nbar must be >= 2, got {}", self.nbar));
        }
        if self.l != 1 {
            return bad(format!("only l = 1 is supported, got {}", self.l));
        }
        if !(self.deficit_tol > 0.0 && self.deficit_tol < 1.0) {
            return bad(format!(
                "deficit_tol must lie in (0, 1), got {}",
                self.deficit_tol
            ));
        }
        if self.grid_points < 2 {
            return bad(format!("grid_points must be >= 2, got {}", self.grid_points));
        }
        if !(self.r_max_factor > 0.0 && self.r_max_factor.is_finite()) {
            return bad(format!(
                "r_max_factor must be positive, got {}",
                self.r_max_factor
            ));
        }
        if !(self.prominence > 0.0 && self.prominence < 1.0) {
            return bad(format!("prominence must lie in (0, 1), got {}", self.prominence));
        }
        if let Some(s) = self.smoothing {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!("smoothing must be >= 0, got {s}"));
            }
        }
        if self.steps == 0 {
            return bad("steps must be >= 1".into());
        }
        Ok(())
    }

    fn r_max(&self, nbar: u32) -> f64 {
        self.r_max_factor * (nbar as f64).powi(2)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    /// 1 usage or bad input, 2 numerical failure, 3 fit failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(Error::Numerical(_)) => 2,
            CliError::Core(Error::Fit { .. }) => 3,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "radsqueeze", version, about = "Radial squeezed states of hydrogen")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit alpha, gamma0 (gamma1 = 0) and write state.toml and fit_report.toml.
    Fit(Common),
    /// Project a state file onto l = 1 hydrogen levels; writes expansion.csv.
    Decompose {
        #[command(flatten)]
        common: Common,
        /// State record (default: <output-dir>/state.toml).
        #[arg(long)]
        state: Option<PathBuf>,
        /// Fixed window of principal quantum numbers instead of auto-growth.
        #[arg(long, num_args = 2, value_names = ["N_MIN", "N_MAX"])]
        window: Option<Vec<u32>>,
    },
    /// Uncertainties and autocorrelation over time; writes scan.csv.
    Scan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        times: TimeArgs,
    },
    /// Density snapshots and packet counts; writes density_NN.csv and packets.csv.
    Density {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: Source,
        /// Snapshot times (default: 0, 0.5*Tcl, Tcl, 2*Tcl, 4*Tcl, trev/3,
        /// trev/2, trev/2+Tcl/2, trev, trev+Tcl).
        #[arg(long, num_args = 1..)]
        times: Option<Vec<String>>,
    },
}

/// Flags mirroring [`RunConfig`].
#[derive(Debug, Args)]
pub struct Common {
    /// TOML file with RunConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nbar: Option<u32>,
    #[arg(long)]
    deficit_tol: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    r_max_factor: Option<f64>,
    #[arg(long, value_enum)]
    potential: Option<PotentialMode>,
    #[arg(long)]
    prominence: Option<f64>,
    /// Packet-counting smoothing width in bohr (0 disables).
    #[arg(long)]
    smoothing: Option<f64>,
    #[arg(long, value_enum)]
    scan_grid: Option<ScanGrid>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Expansion file (default: <output-dir>/expansion.csv).
    #[arg(long)]
    expansion: Option<PathBuf>,
}

/// Times are expressions in `Tcl`, `trev`, `tint`, `ns`, `ps`, `fs`;
/// bare numbers are atomic units.
#[derive(Debug, Args)]
pub struct TimeArgs {
    #[arg(long, num_args = 1..)]
    times: Option<Vec<String>>,
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    stop: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = &self.$f { cfg.$f = v.clone(); })* };
        }
        set!(
            nbar,
            deficit_tol,
            grid_points,
            r_max_factor,
            potential,
            prominence,
            scan_grid,
            output_dir
        );
        if self.smoothing.is_some() {
            cfg.smoothing = self.smoothing;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Evaluates a time expression to atomic units.
pub fn parse_time(expr: &str, ts: &Timescales) -> Result<f64, CliError> {
    let usage = |m: String| CliError::Usage(format!("time expression `{expr}`: {m}"));
    let parsed = exmex::parse::<f64>(expr).map_err(|e| usage(e.to_string()))?;
    let values = parsed
        .var_names()
        .iter()
        .map(|name| {
            Ok(match name.to_ascii_lowercase().as_str() {
                "tcl" => ts.t_cl,
                "trev" => ts.t_rev,
                "tint" => ts.t_int,
                "ns" => 1e-9 / crate::AU_TIME_SECONDS,
                "ps" => 1e-12 / crate::AU_TIME_SECONDS,
                "fs" => 1e-15 / crate::AU_TIME_SECONDS,
                _ => return Err(usage(format!("unknown name `{name}`"))),
            })
        })
        .collect::<Result<Vec<f64>, CliError>>()?;
    let t = parsed.eval(&values).map_err(|e| usage(e.to_string()))?;
    if !t.is_finite() {
        return Err(usage("not finite".into()));
    }
    Ok(t)
}

/// Flat record written by `fit` and read by `decompose`. A record with
/// `kind = "eigenstate"` stands for the single level `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub nbar: u32,
    pub l: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub gamma0: f64,
    #[serde(default)]
    pub gamma1: f64,
    #[serde(default)]
    pub log_norm: f64,
}

enum LoadedState {
    Squeezed(RadialSqueezedState),
    Eigenstate(HydrogenLevel),
}

impl StateRecord {
    fn load(path: &Path) -> Result<(Self, LoadedState), CliError> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let rec: Self =
            toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if rec.l != 1 {
            return Err(Error::Parse(format!("unsupported l={}", rec.l)).into());
        }
        let state = match rec.kind.as_deref() {
            None | Some("squeezed") => {
                let s = RadialSqueezedState::new(rec.alpha, rec.gamma0, rec.gamma1)?;
                if (s.log_norm - rec.log_norm).abs() > 1e-9 * s.log_norm.abs().max(1.0) {
                    return Err(Error::Parse(format!(
                        "log_norm {} inconsistent with parameters (expected {})",
                        rec.log_norm, s.log_norm
                    ))
                    .into());
                }
                LoadedState::Squeezed(s)
            }
            Some("eigenstate") => {
                let n = rec
                    .n
                    .ok_or_else(|| Error::Parse("eigenstate record needs `n`".into()))?;
                LoadedState::Eigenstate(HydrogenLevel::new(n, 1)?)
            }
            Some(k) => return Err(Error::Parse(format!("unknown state kind `{k}`")).into()),
        };
        Ok((rec, state))
    }
}

#[derive(Debug, Serialize)]
struct FitSummary {
    potential: PotentialMode,
    nbar: u32,
    r_out: f64,
    target_energy: f64,
    alpha: f64,
    gamma0: f64,
    gamma1: f64,
    r_residual: f64,
    energy_residual: f64,
    bracket_lo: f64,
    bracket_hi: f64,
    iterations: u32,
    dr: f64,
    dpr: f64,
    product: f64,
    ratio: f64,
    #[serde(rename = "dR")]
    d_r_big: f64,
    #[serde(rename = "dP")]
    d_p_big: f64,
    bound_half_rm2: f64,
}

fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn to_toml(v: &impl Serialize) -> String {
    toml::to_string(v).expect("plain records serialise")
}

fn cmd_fit(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let q = QuantumNumbers::new(cfg.nbar)?;
    let fit = fit_parameters(&q, cfg.potential)?;
    let s = fit.state;
    let (dr, dpr) = s.uncertainties_rp();
    let big = s.uncertainties_big_rp()?;
    let record = StateRecord {
        kind: None,
        nbar: cfg.nbar,
        l: 1,
        n: None,
        alpha: s.alpha,
        gamma0: s.gamma0,
        gamma1: s.gamma1,
        log_norm: s.log_norm,
    };
    let summary = FitSummary {
        potential: cfg.potential,
        nbar: cfg.nbar,
        r_out: fit.r_out,
        target_energy: fit.target_energy,
        alpha: s.alpha,
        gamma0: s.gamma0,
        gamma1: s.gamma1,
        r_residual: fit.r_residual,
        energy_residual: fit.energy_residual,
        bracket_lo: fit.bracket.0,
        bracket_hi: fit.bracket.1,
        iterations: fit.iterations,
        dr,
        dpr,
        product: dr * dpr,
        ratio: dr / dpr,
        d_r_big: big.d_r,
        d_p_big: big.d_p,
        bound_half_rm2: big.bound,
    };
    let report = to_toml(&summary);
    write_file(&cfg.path(STATE_FILE), |w| {
        w.write_all(to_toml(&record).as_bytes())
    })?;
    write_file(&cfg.path(FIT_REPORT_FILE), |w| w.write_all(report.as_bytes()))?;
    write!(out, "{report}").map_err(|e| Error::io("<stdout>", e))?;
    Ok(())
}

fn cmd_decompose(
    cfg: &RunConfig,
    state: Option<&Path>,
    window: Option<&[u32]>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let state_path = state
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.path(STATE_FILE));
    let (rec, loaded) = StateRecord::load(&state_path)?;
    let psi: &dyn RadialWavefunction = match &loaded {
        LoadedState::Squeezed(s) => s,
        LoadedState::Eigenstate(h) => h,
    };
    let centre = rec.n.unwrap_or(rec.nbar);
    let window = match window {
        Some([n_min, n_max]) => Window::Fixed {
            n_min: *n_min,
            n_max: *n_max,
        },
        Some(_) => return Err(CliError::Usage("--window takes N_MIN N_MAX".into())),
        None => Window::Auto {
            center: centre,
            tol: cfg.deficit_tol,
        },
    };
    let dec = decompose(psi, window)?;
    let exp = &dec.expansion;
    let (mean_n, delta_n) = exp.n_spread();
    let extra = [
        ("nbar", rec.nbar.to_string()),
        ("mean_n", format!("{mean_n:.16e}")),
        ("delta_n", format!("{delta_n:.16e}")),
    ];
    write_file(&cfg.path(EXPANSION_FILE), |w| exp.write_to(w, &extra))?;
    let io = |e| Error::io("<stdout>", e);
    writeln!(out, "n_min = {}\nn_max = {}", exp.n_min, exp.n_max).map_err(io)?;
    writeln!(
        out,
        "deficit = {:.6e}\nmean_n = {mean_n:.6}\ndelta_n = {delta_n:.6}",
        exp.deficit
    )
    .map_err(io)?;
    if exp.deficit >= cfg.deficit_tol {
        writeln!(
            err,
            "warning: deficit {:.6e} not below deficit_tol {:.1e}",
            exp.deficit, cfg.deficit_tol
        )
        .map_err(|e| Error::io("<stderr>", e))?;
    }
    Ok(())
}

struct Loaded {
    exp: EigenExpansion,
    nbar: u32,
    ts: Timescales,
}

fn load_expansion(cfg: &RunConfig, path: Option<&Path>) -> Result<Loaded, CliError> {
    let path = path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.path(EXPANSION_FILE));
    let f = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    let (exp, header) = EigenExpansion::read_from(f)?;
    let nbar = match header.get("nbar") {
        Some(v) => v
            .parse()
            .map_err(|_| Error::Parse(format!("bad nbar header `{v}`")))?,
        None => cfg.nbar,
    };
    let (_, delta_n) = exp.n_spread();
    let q = QuantumNumbers::with_spread(nbar, if delta_n > 0.0 { delta_n } else { 1.0 })?;
    Ok(Loaded {
        exp,
        nbar,
        ts: Timescales::new(&q),
    })
}

fn cmd_scan(cfg: &RunConfig, source: &Source, times: &TimeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let Loaded { exp, nbar, ts } = load_expansion(cfg, source.expansion.as_deref())?;
    if exp.deficit > 10.0 * cfg.deficit_tol {
        return Err(Error::Numerical(format!(
            "expansion deficit {:.3e} exceeds 10 x deficit_tol ({:.1e})",
            exp.deficit, cfg.deficit_tol
        ))
        .into());
    }
    let list = times.times.clone().or_else(|| cfg.times.clone());
    let mut ts_au: Vec<f64> = match list {
        Some(l) => l.iter().map(|e| parse_time(e, &ts)).collect::<Result<_, _>>()?,
        None => {
            let start = parse_time(times.start.as_deref().unwrap_or(&cfg.start), &ts)?;
            let stop = parse_time(times.stop.as_deref().unwrap_or(&cfg.stop), &ts)?;
            let steps = times.steps.unwrap_or(cfg.steps);
            if steps == 0 {
                return Err(CliError::Usage("steps must be >= 1".into()));
            }
            if steps == 1 {
                vec![start]
            } else {
                (0..steps)
                    .map(|k| start + (stop - start) * k as f64 / (steps - 1) as f64)
                    .collect()
            }
        }
    };
    ts_au.sort_by(f64::total_cmp);
    let r_max = cfg.r_max(nbar);
    let grid = match cfg.scan_grid {
        ScanGrid::Gauss => RadialGrid::gauss_panels(cfg.grid_points, r_max)?,
        ScanGrid::Uniform => RadialGrid::uniform(cfg.grid_points, r_max)?,
    };
    let table = BasisTable::new(&exp, &grid);
    let records = table.scan(&ts_au)?;
    write_file(&cfg.path(SCAN_FILE), |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "t_au",
            "t_ns",
            "dr",
            "dpr",
            "product",
            "ratio",
            "dR",
            "dP",
            "bound_half_rm2",
            "autocorrelation",
        ])?;
        for r in &records {
            let row = [
                r.t,
                analysis::to_nanoseconds(r.t),
                r.dr,
                r.dpr,
                r.product,
                r.ratio,
                r.d_r_big,
                r.d_p_big,
                r.bound_half_rm2,
                evolution::autocorrelation(&exp, r.t),
            ];
            csv.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
        }
        csv.flush()
    })?;
    let min_product = records.iter().map(|r| r.product).fold(f64::INFINITY, f64::min);
    writeln!(out, "rows = {}\nmin_product = {min_product:.6}", records.len())
        .map_err(|e| Error::io("<stdout>", e))?;
    Ok(())
}

fn cmd_density(
    cfg: &RunConfig,
    source: &Source,
    times: Option<&[String]>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let Loaded { exp, nbar, ts } = load_expansion(cfg, source.expansion.as_deref())?;
    let exprs: Vec<String> = match times.map(<[String]>::to_vec).or_else(|| cfg.times.clone()) {
        Some(l) => l,
        None => DEFAULT_DENSITY_TIMES.iter().map(|s| s.to_string()).collect(),
    };
    let t_au: Vec<f64> = exprs
        .iter()
        .map(|e| parse_time(e, &ts))
        .collect::<Result<_, _>>()?;
    let r_out = OrbitGeometry::new(nbar)?.r_out;
    let sigma = cfg.smoothing.unwrap_or_else(|| analysis::airy_length(r_out));
    let grid = RadialGrid::uniform(cfg.grid_points, cfg.r_max(nbar))?;
    let table = BasisTable::new(&exp, &grid);
    let mut reports = Vec::with_capacity(exprs.len());
    for (i, (expr, &t)) in exprs.iter().zip(&t_au).enumerate() {
        let d = table.density(t);
        write_file(&cfg.path(&format!("density_{i:02}.csv")), |w| {
            writeln!(w, "# t_expr={expr}\n# t_au={t:.16e}")?;
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["r", "f"])?;
            for (r, f) in &d {
                csv.write_record([format!("{r:.16e}"), format!("{f:.16e}")])?;
            }
            csv.flush()
        })?;
        let smooth = analysis::coarse_grain(&d, sigma)?;
        reports.push(analysis::count_packets(&smooth, cfg.prominence, t)?);
    }
    write_file(&cfg.path(PACKETS_FILE), |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "index",
            "t_expr",
            "t_au",
            "t_ns",
            "smoothing",
            "peak_count",
            "peak_positions",
        ])?;
        for (i, (expr, rep)) in exprs.iter().zip(&reports).enumerate() {
            let peaks: Vec<String> = rep.peak_positions.iter().map(|p| format!("{p:.16e}")).collect();
            csv.write_record([
                i.to_string(),
                expr.clone(),
                format!("{:.16e}", rep.t),
                format!("{:.16e}", analysis::to_nanoseconds(rep.t)),
                format!("{sigma:.16e}"),
                rep.peak_count.to_string(),
                peaks.join(";"),
            ])?;
        }
        csv.flush()
    })?;
    for (expr, rep) in exprs.iter().zip(&reports) {
        let peaks: Vec<String> = rep.peak_positions.iter().map(|p| format!("{p:.0}")).collect();
        writeln!(
            out,
            "{expr:>14}  packets = {}  at r = [{}]",
            rep.peak_count,
            peaks.join(", ")
        )
        .map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

/// Runs an already parsed command.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(common) => cmd_fit(&common.resolve()?, out),
        Command::Decompose {
            common,
            state,
            window,
        } => cmd_decompose(&common.resolve()?, state.as_deref(), window.as_deref(), out, err),
        Command::Scan {
            common,
            source,
            times,
        } => cmd_scan(&common.resolve()?, source, times, out),
        Command::Density {
            common,
            source,
            times,
        } => cmd_density(&common.resolve()?, source, times.as_deref(), out),
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts() -> Timescales {
        Timescales::new(&QuantumNumbers::new(85).unwrap())
    }

    #[test]
    fn time_expressions() {
        let ts = ts();
        let close = |e: &str, v: f64| {
            let t = parse_time(e, &ts).unwrap();
            assert!((t - v).abs() <= 1e-12 * v.abs().max(1.0), "{e}: {t} vs {v}");
        };
        close("0", 0.0);
        close("0.5*Tcl", 0.5 * ts.t_cl);
        close("trev/3", ts.t_rev / 3.0);
        close("trev/2+Tcl/2", 0.5 * (ts.t_rev + ts.t_cl));
        close("(1+2)*tcl", 3.0 * ts.t_cl);
        close("3*ns", 3e-9 / crate::AU_TIME_SECONDS);
        close("93.3*ps - Tcl", 93.3e-12 / crate::AU_TIME_SECONDS - ts.t_cl);
        close("1234.5", 1234.5);
        for bad in ["", "trev/", "foo*2", "2*(Tcl", "Tcl/0"] {
            assert!(matches!(parse_time(bad, &ts), Err(CliError::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::default().validate().is_ok());
        let bad = [
            RunConfig {
                nbar: 1,
                ..Default::default()
            },
            RunConfig {
                l: 2,
                ..Default::default()
            },
            RunConfig {
                deficit_tol: 0.0,
                ..Default::default()
            },
            RunConfig {
                prominence: 1.0,
                ..Default::default()
            },
            RunConfig {
                r_max_factor: -1.0,
                ..Default::default()
            },
            RunConfig {
                smoothing: Some(-3.0),
                ..Default::default()
            },
            RunConfig {
                steps: 0,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(CliError::Usage(_))), "{c:?}");
        }
    }

    #[test]
    fn config_toml_round_trip() {
        let c = RunConfig {
            nbar: 40,
            potential: PotentialMode::Literal,
            smoothing: Some(0.0),
            times: Some(vec!["Tcl".into(), "trev/2".into()]),
            ..Default::default()
        };
        let back: RunConfig = toml::from_str(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let partial: RunConfig = toml::from_str("nbar = 30\npotential = \"paper\"").unwrap();
        assert_eq!(partial.nbar, 30);
        assert_eq!(partial.grid_points, DEFAULT_GRID_POINTS);
        assert!(toml::from_str::<RunConfig>("nbr = 3").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::from(Error::Numerical("x".into())).exit_code(), 2);
        assert_eq!(
            CliError::from(Error::Fit {
                reason: "x".into(),
                lo: 0.0,
                hi: 1.0
            })
            .exit_code(),
            3
        );
        assert_eq!(CliError::from(Error::Parse("x".into())).exit_code(), 1);
    }

    #[test]
    fn state_record_round_trip() {
        let s = RadialSqueezedState::new(168.2251, 0.0117465, 0.0).unwrap();
        let rec = StateRecord {
            kind: None,
            nbar: 85,
            l: 1,
            n: None,
            alpha: s.alpha,
            gamma0: s.gamma0,
            gamma1: s.gamma1,
            log_norm: s.log_norm,
        };
        let text = to_toml(&rec);
        assert!(!text.contains("kind"));
        let back: StateRecord = toml::from_str(&text).unwrap();
        assert_eq!(back, rec);
    }
}
