//! Command-line front end. Data goes to the `out` stream as CSV, notes and
//! warnings to the `err` stream.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::figures;
use crate::perturb::{residual_at, run as run_series, sum_series};
use crate::potential::PadePotential;
use crate::precision::Precision;
use crate::solvable::{solve_general, solve_t1, ExactSolution, GeneralProblem};
use crate::spectrum::{convergence_table, matrix_spectrum, shoot_levels, ShootOptions};
use crate::tables;

#[derive(Debug, Parser)]
#[command(name = "pade-spect", version, about = "Solvable Padé oscillators, their spectra and perturbation series")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the solvable couplings for given t, q and parity.
    Exact(ExactArgs),
    /// Low-lying levels from the truncated quasi-Hamiltonian.
    Spectrum(SpectrumArgs),
    /// Perturbation series along the coupling path of the config.
    Perturb(PerturbArgs),
    /// Regenerate the published tables and diff them against the print.
    Tables(TablesArgs),
    /// Point sets behind the figures.
    FigureData(FigureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    #[arg(long, value_enum, conflicts_with = "ell")]
    pub parity: Option<Parity>,
    /// -1 (even) or 0 (odd).
    #[arg(long, allow_hyphen_values = true)]
    pub ell: Option<i32>,
}

impl ChannelArgs {
    fn ell(&self) -> Option<i32> {
        self.ell.or(self.parity.map(|p| match p {
            Parity::Even => -1,
            Parity::Odd => 0,
        }))
    }
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long, default_value_t = 1)]
    pub t: usize,
    #[arg(long)]
    pub q: usize,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Frozen parameters: `B=..` for t=1, `f=..,g=..` for t=2.
    #[arg(long)]
    pub freeze: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Coupling β; without `--config` the potential comes from these flags.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Numerator coefficients `A₀,A₁,...`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Vec<f64>,
    /// Denominator coefficients `B₀,B₁,...`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub b: Vec<f64>,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Cutoff M (basis of M+1 states).
    #[arg(long = "cutoff", short = 'M')]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Emit every cutoff from 0 to M.
    #[arg(long)]
    pub history: bool,
    /// Refine each level by shooting and report it on stderr.
    #[arg(long)]
    pub shoot: bool,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long, short = 'K')]
    pub order: Option<usize>,
    #[arg(long = "cutoff", short = 'M')]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub d_reg: Option<f64>,
    /// Points for partial sums, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Vec<f64>,
    /// Print the full series as JSON instead of the per-order CSV.
    #[arg(long)]
    pub json: bool,
    /// Directory for orders.csv, sums.csv and series.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// Table numbers (1..6); all when omitted.
    pub which: Vec<u8>,
    /// Directory for tableN.csv and tableN_diff.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// 1, 4, 5 or 6.
    pub which: u8,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn load_config(path: Option<&Path>) -> Result<Option<RunConfig>> {
    path.map(RunConfig::load).transpose()
}

/// Runs one command. `PADE_SPECT_PRECISION` is read here.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let precision = Precision::from_env().map_err(config_err)?;
    let config = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Exact(a) => cmd_exact(a, out),
        Command::Spectrum(a) => cmd_spectrum(a, config.as_ref(), out, err),
        Command::Perturb(a) => cmd_perturb(a, config.as_ref(), precision, out, err),
        Command::Tables(a) => cmd_tables(a, config.as_ref(), out, err),
        Command::FigureData(a) => cmd_figure_data(a, config.as_ref(), out, err),
    }
}

fn parse_freeze(text: Option<&str>, allowed: &[&str]) -> Result<Vec<f64>> {
    let mut vals = vec![1.0; allowed.len()];
    let Some(text) = text else { return Ok(vals) };
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| config_err(format!("--freeze entry '{item}' is not key=value")))?;
        let idx = allowed
            .iter()
            .position(|a| a.eq_ignore_ascii_case(k.trim()))
            .ok_or_else(|| config_err(format!("--freeze key '{k}' not among {allowed:?}")))?;
        vals[idx] = v
            .trim()
            .parse()
            .map_err(|_| config_err(format!("--freeze value '{v}' is not a number")))?;
    }
    Ok(vals)
}

fn parity_name(ell: i32) -> &'static str {
    if ell == -1 {
        "even"
    } else {
        "odd"
    }
}

/// Solvable states of the built-in families: `x² + β/(1 + Bx²)` for t=1,
/// the `(f, g)` model for t=2 and the `1 + x⁶` model for t=3.
pub fn exact_solutions(t: usize, q: usize, ell: i32, freeze: Option<&str>) -> Result<Vec<ExactSolution>> {
    match t {
        1 => {
            let v = parse_freeze(freeze, &["B"])?;
            Ok(solve_t1(q, ell, v[0])?.solutions)
        }
        2 => {
            let v = parse_freeze(freeze, &["f", "g"])?;
            Ok(solve_general(&GeneralProblem::two_parameter(q, ell, v[0], v[1])?, None)?.solutions)
        }
        3 => {
            parse_freeze(freeze, &[])?;
            Ok(solve_general(&GeneralProblem::quartic_over_sextic(q, ell)?, None)?.solutions)
        }
        _ => Err(config_err(format!("no built-in family for t = {t}; use 1, 2 or 3"))),
    }
}

fn coupling_names(t: usize) -> Vec<String> {
    match t {
        1 => vec!["beta".into()],
        2 => vec!["nu".into(), "mu".into()],
        3 => vec!["u".into(), "v".into(), "w".into()],
        _ => (0..t).map(|i| format!("A{i}")).collect(),
    }
}

fn cmd_exact(a: &ExactArgs, out: &mut dyn Write) -> Result<()> {
    let ell = a.channel.ell().unwrap_or(-1);
    let sols = exact_solutions(a.t, a.q, ell, a.freeze.as_deref())?;
    if sols.is_empty() {
        return Err(Error::NoSolution(format!("t={} q={} {}", a.t, a.q, parity_name(ell))));
    }
    let mut header = vec!["q".to_string(), "parity".into()];
    header.extend(coupling_names(a.t));
    header.extend(["excitation".into(), "E0".into()]);
    let rows: Vec<Vec<String>> = sols
        .iter()
        .map(|s| {
            let mut r = vec![s.q.to_string(), parity_name(s.ell).into()];
            if s.t == 1 {
                r.push(s.potential.beta.to_string());
            } else {
                r.extend(s.potential.a.iter().map(|c| (c * s.potential.beta).to_string()));
            }
            r.extend([s.excitation_label(), s.e0.to_string()]);
            r
        })
        .collect();
    let mut s = String::new();
    match a.format {
        Format::Csv => {
            let _ = writeln!(s, "{}", header.join(","));
            for r in &rows {
                let _ = writeln!(s, "{}", r.join(","));
            }
        }
        Format::Text => {
            let widths: Vec<usize> = (0..header.len())
                .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
                .collect();
            for r in std::iter::once(&header).chain(&rows) {
                let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
                let _ = writeln!(s, "{}", cells.join("  "));
            }
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn spectrum_potential(a: &SpectrumArgs, config: Option<&RunConfig>) -> Result<PadePotential> {
    if let Some(c) = config.filter(|c| c.potential.is_some()) {
        if a.beta.is_some() || !a.a.is_empty() || !a.b.is_empty() {
            return Err(config_err("give the potential either in --config or by flags, not both"));
        }
        return Ok(c.path()?.base());
    }
    let beta = a.beta.ok_or_else(|| config_err("spectrum needs --config or --beta"))?;
    let b = if a.b.is_empty() { vec![1.0, 1.0] } else { a.b.clone() };
    let t = b.len().saturating_sub(1);
    let num = match (a.a.is_empty(), t) {
        (true, 1) => vec![1.0],
        (true, _) => return Err(config_err("--a is required when the denominator has degree above 1")),
        (false, _) => a.a.clone(),
    };
    let ell = a.channel.ell().unwrap_or(-1);
    PadePotential::new(t, beta, num, b, ell).map_err(|e| config_err(e.to_string()))
}

fn cmd_spectrum(a: &SpectrumArgs, config: Option<&RunConfig>, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut p = spectrum_potential(a, config)?;
    if let Some(ell) = a.channel.ell() {
        p.ell = ell;
    }
    let ell = p.ell;
    let m = a.cutoff.or(config.and_then(|c| c.cutoff)).unwrap_or(40);
    let count = a.count.or(config.and_then(|c| c.count)).unwrap_or(4);
    let r = if a.history {
        convergence_table(&p, ell, m, count)?
    } else {
        matrix_spectrum(&p, ell, m, count)?
    };
    let mut s = String::from("level,M,energy\n");
    for (mm, row) in &r.history {
        for (i, e) in row.iter().enumerate() {
            let _ = writeln!(s, "{i},{mm},{e}");
        }
    }
    out.write_all(s.as_bytes())?;
    if r.partial {
        writeln!(err, "warning: only {} of {count} levels found at M={m}", r.energies.len())?;
    }
    if a.shoot {
        let refined = shoot_levels(&p, ell, &r.energies, 0.05, &ShootOptions::default()).map_err(|e| e.at("shooting"))?;
        for (i, (m_e, s_e)) in r.energies.iter().zip(&refined).enumerate() {
            writeln!(err, "level {i}: matrix {m_e} shooting {s_e} difference {:.2e}", m_e - s_e)?;
        }
    }
    Ok(())
}

fn cmd_perturb(
    a: &PerturbArgs,
    config: Option<&RunConfig>,
    env: Precision,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let mut c = config.cloned().ok_or_else(|| config_err("perturb needs --config"))?;
    c.order = a.order.or(c.order);
    c.cutoff = a.cutoff.or(c.cutoff);
    c.d_reg = a.d_reg.or(c.d_reg);
    if !a.lambda.is_empty() {
        c.lambdas = a.lambda.clone();
    }
    c.validate()?;
    let path = c.path().map_err(|e| e.at("load potential"))?;
    let base = ExactSolution::from_potential(&path.base(), c.q, c.tolerances.base_residual)
        .map_err(|e| e.at("zero-order solution"))?;
    let opts = c.perturb_options(env);
    let series = run_series(&base, &path, &opts).map_err(|e| e.at("perturbation orders"))?;
    for w in &series.warnings {
        writeln!(err, "warning: {w}")?;
    }
    let mut sums = String::from("lambda,K,energy,residual\n");
    for &lam in &c.lambdas {
        for k in 0..=series.max_order() {
            let (e, _) = sum_series(&series, lam, k).map_err(|e| e.at("partial sums"))?;
            let r = residual_at(&series, lam, k).map_err(|e| e.at("partial sums"))?;
            let _ = writeln!(sums, "{lam},{k},{e},{r:e}");
        }
    }
    let dir = a.out.clone().or(c.output.clone());
    if let Some(dir) = dir {
        let write = |name: &str, text: &str| -> Result<()> {
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join(name), text)?;
            Ok(())
        };
        write("orders.csv", &series.orders_csv()).map_err(|e| e.at("write output"))?;
        write("series.json", &series.to_json()?).map_err(|e| e.at("write output"))?;
        if !c.lambdas.is_empty() {
            write("sums.csv", &sums).map_err(|e| e.at("write output"))?;
        }
    }
    if a.json {
        out.write_all(series.to_json()?.as_bytes())?;
        out.write_all(b"\n")?;
    } else {
        out.write_all(series.orders_csv().as_bytes())?;
        if !c.lambdas.is_empty() && a.out.is_none() && c.output.is_none() {
            out.write_all(b"\n")?;
            out.write_all(sums.as_bytes())?;
        }
    }
    Ok(())
}

fn output_dir(flag: &Option<PathBuf>, config: Option<&RunConfig>) -> Option<PathBuf> {
    flag.clone().or(config.and_then(|c| c.output.clone()))
}

fn cmd_tables(a: &TablesArgs, config: Option<&RunConfig>, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let which: Vec<u8> = if a.which.is_empty() { (1..=6).collect() } else { a.which.clone() };
    if let Some(w) = which.iter().find(|w| !(1..=6).contains(*w)) {
        return Err(config_err(format!("no table {w}; expected 1..6")));
    }
    let dir = output_dir(&a.out, config);
    let mut failed = vec![];
    for w in which {
        let r = tables::table(w).map_err(|e| e.at("table regeneration"))?;
        let diff = r.diff_report();
        match &dir {
            Some(d) => {
                std::fs::create_dir_all(d)?;
                std::fs::write(d.join(format!("table{w}.csv")), &r.csv)?;
                std::fs::write(d.join(format!("table{w}_diff.txt")), &diff)?;
            }
            None => out.write_all(r.csv.as_bytes())?,
        }
        err.write_all(diff.as_bytes())?;
        if !r.passed() {
            failed.push(w);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Tolerance(format!("cells outside tolerance in table(s) {failed:?}")))
    }
}

fn cmd_figure_data(a: &FigureArgs, config: Option<&RunConfig>, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let data = figures::figure(a.which)?;
    for n in &data.notes {
        writeln!(err, "note: {n}")?;
    }
    match output_dir(&a.out, config) {
        Some(d) => {
            std::fs::create_dir_all(&d)?;
            for f in &data.files {
                std::fs::write(d.join(&f.name), &f.csv)?;
            }
        }
        None => {
            for (i, f) in data.files.iter().enumerate() {
                if i > 0 {
                    out.write_all(b"\n")?;
                }
                out.write_all(f.csv.as_bytes())?;
            }
        }
    }
    Ok(())
}
