//! `dirac`: command-line front end for the spectral library.
//!
//! Subcommands cover the forward problem (locating eigenvalue pairs of a
//! sampled potential), determinant evaluation from a potential or a stored
//! spectrum, summability diagnostics, the node/weight construction pipeline,
//! and the reconstruction-kernel solvability scan. Inputs and outputs are
//! the JSON documents of `dirac_spectra::io` plus CSV tables; everything is
//! deterministic byte for byte, and results go to stdout unless `--out`
//! names a file.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input, 3 structurally
//! invalid input or parameters, 4 numerical failure.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex;
use rayon::prelude::*;

use dirac_spectra::io as docs;
use dirac_spectra::{
    build, char_det, locate_spectrum, solvability_scan, summability_report,
    verify_dyadic, BoundaryKind, DeterminantModel, Error, KernelData, Result,
    SpectrumTable, Tolerances, Verdict, C64,
};

#[derive(Parser)]
#[command(
    name = "dirac",
    version,
    about = "Spectral toolbox for 1D Dirac systems with periodic boundary conditions"
)]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Worker threads for parallel scans (default: DIRAC_SPECTRA_THREADS,
    /// then all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(flatten)]
    tol: TolArgs,

    #[command(subcommand)]
    command: Command,
}

/// Overrides for the numerical defaults. Unset flags keep the documented
/// baseline of `Tolerances::default()`.
#[derive(Args)]
struct TolArgs {
    /// Integrator cells per period.
    #[arg(long, global = true, value_name = "N")]
    tol_integrator_steps: Option<usize>,
    /// Index ceiling for products and series over stored spectra.
    #[arg(long, global = true, value_name = "N")]
    tol_truncation: Option<usize>,
    /// Radius of the counting disks, in (0, 1).
    #[arg(long, global = true, value_name = "R")]
    tol_disk_radius: Option<f64>,
    /// Samples per contour and per quadrature axis.
    #[arg(long, global = true, value_name = "N")]
    tol_quadrature_points: Option<usize>,
    /// Target residual for root refinement.
    #[arg(long, global = true, value_name = "EPS")]
    tol_root: Option<f64>,
    /// Acceptable Wronskian drift of the integrator.
    #[arg(long, global = true, value_name = "EPS")]
    tol_wronskian: Option<f64>,
    /// Cutoff for analytically summed tails.
    #[arg(long, global = true, value_name = "EPS")]
    tol_tail: Option<f64>,
}

impl TolArgs {
    fn merge(&self) -> Result<Tolerances<f64>> {
        let mut t = Tolerances::default();
        if let Some(v) = self.tol_integrator_steps {
            t.integrator_steps = v;
        }
        if let Some(v) = self.tol_truncation {
            t.truncation = v;
        }
        if let Some(v) = self.tol_disk_radius {
            t.disk_radius = v;
        }
        if let Some(v) = self.tol_quadrature_points {
            t.quadrature_points = v;
        }
        if let Some(v) = self.tol_root {
            t.root_tol = v;
        }
        if let Some(v) = self.tol_wronskian {
            t.wronskian_tol = v;
        }
        if let Some(v) = self.tol_tail {
            t.tail_tol = v;
        }
        t.validate()?;
        Ok(t)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Locate the eigenvalue pairs of a sampled potential.
    Forward {
        /// Potential JSON: uniform samples of p and q over one period.
        #[arg(long, value_name = "FILE")]
        potential: PathBuf,
        /// Boundary condition: 0 periodic, 1 antiperiodic.
        #[arg(long)]
        theta: i64,
        /// Largest pair index; disks run over |n| <= nmax.
        #[arg(long, value_name = "N")]
        nmax: usize,
    },
    /// Evaluate the characteristic determinant of a potential on a real grid.
    Det {
        /// Potential JSON: uniform samples of p and q over one period.
        #[arg(long, value_name = "FILE")]
        potential: PathBuf,
        /// Boundary condition: 0 periodic, 1 antiperiodic.
        #[arg(long)]
        theta: i64,
        /// Real evaluation grid start:stop:step.
        #[arg(long, allow_hyphen_values = true)]
        grid: GridSpec,
    },
    /// Evaluate the determinant model of a stored spectrum on a real grid.
    DetFromSpectrum {
        /// Spectrum JSON (from `forward` or assembled by hand).
        #[arg(long, value_name = "FILE")]
        spectrum: PathBuf,
        /// Real evaluation grid start:stop:step.
        #[arg(long, allow_hyphen_values = true)]
        grid: GridSpec,
    },
    /// Residuals of the determinant model against the unperturbed
    /// determinant at integer points, with symmetric partial sums.
    FSums {
        /// Spectrum JSON (from `forward` or assembled by hand).
        #[arg(long, value_name = "FILE")]
        spectrum: PathBuf,
        /// Largest lattice index scanned.
        #[arg(long = "K", value_name = "K")]
        k_max: usize,
    },
    /// Shifted-average diagnostics and a summability verdict for a stored
    /// spectrum.
    Admissible {
        /// Spectrum JSON (from `forward` or assembled by hand).
        #[arg(long, value_name = "FILE")]
        spectrum: PathBuf,
        /// Largest shift scanned.
        #[arg(long = "K", value_name = "K")]
        k_max: usize,
    },
    /// Build node/multiplier/weight rows whose interpolant reproduces the
    /// determinant model of a target spectrum.
    Construct {
        /// Target spectrum JSON.
        #[arg(long, value_name = "FILE")]
        target: PathBuf,
        /// Clustering threshold; "auto" scans for the smallest workable
        /// index.
        #[arg(long = "N0", default_value = "auto", value_name = "auto|N")]
        n0: N0Spec,
        /// Node range; output rows cover |n| <= N.
        #[arg(long = "N", value_name = "N")]
        range: usize,
    },
    /// Scan the smallest singular value of the discretized reconstruction
    /// operator I + K_x over endpoints in (0, pi].
    GlmCheck {
        /// Construction JSON (from `construct`).
        #[arg(long, value_name = "FILE")]
        construction: PathBuf,
        /// Number of endpoints x = j*pi/xgrid, j = 1..=xgrid.
        #[arg(long, value_name = "J")]
        xgrid: usize,
        /// Nystrom points per component.
        #[arg(long, value_name = "G")]
        grid: usize,
        /// Kernel truncation; defaults to the stored range.
        #[arg(long = "N", value_name = "N")]
        truncation: Option<usize>,
        /// Smallest singular value counted as solvable. Calibrated per
        /// dataset family, not a mathematical constant.
        #[arg(long, default_value_t = 0.1, value_name = "S")]
        sigma_floor: f64,
    },
    /// Tabulate the dyadic shifted averages that exceed the summability
    /// threshold while their non-resonant part stays within it.
    Counterexample {
        /// Smallest dyadic exponent.
        #[arg(long, value_name = "P")]
        pmin: u32,
        /// Largest dyadic exponent.
        #[arg(long, value_name = "P")]
        pmax: u32,
    },
}

/// Real evaluation grid `start:stop:step`, both ends included (the top one
/// up to roundoff).
#[derive(Clone, Copy, Debug)]
struct GridSpec {
    start: f64,
    stop: f64,
    step: f64,
}

impl GridSpec {
    fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + self.step * k as f64).collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:step, got {s:?}"));
        }
        let mut v = [0.0f64; 3];
        for (slot, raw) in v.iter_mut().zip(&parts) {
            *slot = raw
                .trim()
                .parse()
                .map_err(|e| format!("bad number {raw:?}: {e}"))?;
        }
        let g = GridSpec { start: v[0], stop: v[1], step: v[2] };
        if !(g.start.is_finite() && g.stop.is_finite() && g.step > 0.0 && g.stop >= g.start) {
            return Err(format!("need start <= stop and step > 0, got {s:?}"));
        }
        Ok(g)
    }
}

/// Construction threshold argument: scan automatically or pin an index.
#[derive(Clone, Copy, Debug)]
enum N0Spec {
    Auto,
    Fixed(usize),
}

impl FromStr for N0Spec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(N0Spec::Auto);
        }
        s.parse()
            .map(N0Spec::Fixed)
            .map_err(|e| format!("expected \"auto\" or an index: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    init_threads(cli.threads)?;
    let tol = cli.tol.merge()?;
    let explicit_truncation = cli.tol.tol_truncation;
    let text = match cli.command {
        Command::Forward { potential, theta, nmax } => {
            cmd_forward(&potential, theta, nmax, &tol)?
        }
        Command::Det { potential, theta, grid } => cmd_det(&potential, theta, grid, &tol)?,
        Command::DetFromSpectrum { spectrum, grid } => {
            cmd_det_from_spectrum(&spectrum, grid, explicit_truncation)?
        }
        Command::FSums { spectrum, k_max } => {
            cmd_f_sums(&spectrum, k_max, explicit_truncation)?
        }
        Command::Admissible { spectrum, k_max } => cmd_admissible(&spectrum, k_max)?,
        Command::Construct { target, n0, range } => {
            cmd_construct(&target, n0, range, explicit_truncation)?
        }
        Command::GlmCheck { construction, xgrid, grid, truncation, sigma_floor } => {
            cmd_glm_check(&construction, xgrid, grid, truncation, sigma_floor)?
        }
        Command::Counterexample { pmin, pmax } => cmd_counterexample(pmin, pmax, &tol)?,
    };
    emit(cli.out.as_deref(), &text)
}

/// Pin the global worker pool: `--threads` wins, then the environment, then
/// rayon's own default (all cores).
fn init_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(0) => {
            return Err(Error::Validation("--threads must be at least 1".into()));
        }
        Some(n) => Some(n),
        None => match std::env::var("DIRAC_SPECTRA_THREADS") {
            Ok(raw) => match raw.trim().parse::<usize>() {
                Ok(n) if n >= 1 => Some(n),
                _ => {
                    eprintln!(
                        "warning: ignoring DIRAC_SPECTRA_THREADS={raw:?}; expected a positive integer"
                    );
                    None
                }
            },
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Computation(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Fixed-width float for CSV cells: 17 fractional digits in scientific
/// notation reproduce every f64 exactly.
fn num(v: f64) -> String {
    format!("{v:.17e}")
}

/// Index ceiling for a model read from disk: an explicit override wins,
/// otherwise enough to cover the stored range, never less than the default.
fn model_truncation(explicit: Option<usize>, range: i64) -> usize {
    explicit.unwrap_or_else(|| (range.max(0) as usize).max(64))
}

fn cmd_forward(
    potential: &Path,
    theta: i64,
    nmax: usize,
    tol: &Tolerances<f64>,
) -> Result<String> {
    let kind = BoundaryKind::from_theta(theta)?;
    let grid = docs::load_potential::<f64>(potential)?;
    let (table, locs) = locate_spectrum(&grid, kind, nmax, tol)?;
    let doubles = locs.iter().filter(|l| l.coincident).count();
    if doubles > 0 {
        eprintln!("note: {doubles} of {} disks carry a double eigenvalue", locs.len());
    }
    Ok(docs::spectrum_to_json(&table) + "\n")
}

fn cmd_det(
    potential: &Path,
    theta: i64,
    grid: GridSpec,
    tol: &Tolerances<f64>,
) -> Result<String> {
    let kind = BoundaryKind::from_theta(theta)?;
    let pot = docs::load_potential::<f64>(potential)?;
    let rows: Vec<(f64, C64)> = grid
        .points()
        .par_iter()
        .map(|&x| {
            let d = char_det(&pot, kind, Complex::new(x, 0.0), tol.integrator_steps)?;
            Ok((x, d))
        })
        .collect::<Result<_>>()?;
    Ok(det_csv(&rows))
}

fn cmd_det_from_spectrum(
    spectrum: &Path,
    grid: GridSpec,
    explicit_truncation: Option<usize>,
) -> Result<String> {
    let table = docs::load_spectrum::<f64>(spectrum)?;
    let truncation = model_truncation(explicit_truncation, table.range());
    let model = DeterminantModel::new(table, truncation)?;
    let rows: Vec<(f64, C64)> = grid
        .points()
        .par_iter()
        .map(|&x| Ok((x, model.eval(Complex::new(x, 0.0))?)))
        .collect::<Result<_>>()?;
    Ok(det_csv(&rows))
}

fn det_csv(rows: &[(f64, C64)]) -> String {
    let mut out = String::from("# schema=dirac.det.v1\nlambda_re,lambda_im,delta_re,delta_im\n");
    for &(x, d) in rows {
        writeln!(out, "{},{},{},{}", num(x), num(0.0), num(d.re), num(d.im))
            .expect("string write");
    }
    out
}

fn cmd_f_sums(
    spectrum: &Path,
    k_max: usize,
    explicit_truncation: Option<usize>,
) -> Result<String> {
    let table = docs::load_spectrum::<f64>(spectrum)?;
    let truncation = model_truncation(explicit_truncation, table.range());
    let model = DeterminantModel::new(table, truncation)?;
    let lattice = model.residuals_at_lattice(k_max)?;
    let mut out = String::from("# schema=dirac.fsums.v1\nk,f_re,f_im,partial_sum\n");
    for &(k, v) in &lattice.values {
        let partial = lattice.partial_sums[k.unsigned_abs() as usize];
        writeln!(out, "{k},{},{},{}", num(v.re), num(v.im), num(partial))
            .expect("string write");
    }
    Ok(out)
}

fn cmd_admissible(spectrum: &Path, k_max: usize) -> Result<String> {
    let table = docs::load_spectrum::<f64>(spectrum)?;
    let theta = table.kind().theta();
    let report = summability_report(&table, k_max);
    let verdict = match report.verdict {
        Verdict::Consistent => "consistent",
        Verdict::Inconsistent => "inconsistent",
        Verdict::Inconclusive => "inconclusive",
    };
    let averages: Vec<serde_json::Value> = report
        .averages
        .iter()
        .map(|(k, v)| serde_json::json!({ "k": k, "re": v.re, "im": v.im }))
        .collect();
    let doc = serde_json::json!({
        "schema_version": docs::SCHEMA_VERSION,
        "theta": theta,
        "k_max": report.k_max,
        "sup_offset": report.sup_offset,
        "offset_l2": report.offset_l2,
        "verdict": verdict,
        "witnesses": report.witnesses,
        "running_sup": report.running_sup,
        "averages": averages,
    });
    Ok(serde_json::to_string_pretty(&doc).expect("report serializes") + "\n")
}

fn cmd_construct(
    target: &Path,
    n0: N0Spec,
    range: usize,
    explicit_truncation: Option<usize>,
) -> Result<String> {
    let stored = docs::load_spectrum::<f64>(target)?;
    let kind = stored.kind();
    // The threshold scan samples the half-trace up to `range + 2`; extend
    // the table there with exact lattice pairs. Under the zero-offset
    // convention those rows are what the stored document already asserts
    // about indices beyond its range.
    let needed = range as i64 + 2;
    let table = if stored.range() >= needed {
        stored
    } else {
        SpectrumTable::tabulate(kind, needed as usize, |n| {
            if n.abs() <= stored.range() {
                stored.pair(n)
            } else {
                let c = Complex::new(kind.center::<f64>(n), 0.0);
                (c, c)
            }
        })
    };
    let truncation = model_truncation(explicit_truncation, table.range());
    let model = DeterminantModel::new(table, truncation)?;
    let shift = kind.det_shift::<f64>();
    let chi = |lambda: C64| Ok(model.eval(lambda)? - shift);
    let requested = match n0 {
        N0Spec::Auto => None,
        N0Spec::Fixed(v) => Some(v),
    };
    let (data, warnings) = build(kind, chi, requested, range)?;
    if !warnings.is_empty() {
        eprintln!(
            "note: {} multipliers landed outside their expected disks",
            warnings.len()
        );
    }
    let report = data.verify()?;
    Ok(docs::construction_report_json(&data, &report, &warnings) + "\n")
}

fn cmd_glm_check(
    construction: &Path,
    xgrid: usize,
    grid: usize,
    truncation: Option<usize>,
    sigma_floor: f64,
) -> Result<String> {
    if xgrid == 0 {
        return Err(Error::Validation("--xgrid must be at least 1".into()));
    }
    if !(sigma_floor.is_finite() && sigma_floor >= 0.0) {
        return Err(Error::Validation(format!(
            "--sigma-floor must be a finite non-negative number, got {sigma_floor}"
        )));
    }
    let data = docs::load_construction::<f64>(construction)?;
    let truncation = truncation.unwrap_or(data.range().max(0) as usize);
    let kernel = KernelData::from_construction(&data, truncation)?;
    let xs: Vec<f64> = (1..=xgrid)
        .map(|j| std::f64::consts::PI * j as f64 / xgrid as f64)
        .collect();
    let rows = solvability_scan(&kernel, &xs, grid)?;
    let mut out = String::from("# schema=dirac.glm.v1\nx,sigma_min,pass\n");
    for row in rows {
        writeln!(
            out,
            "{},{},{}",
            num(row.x),
            num(row.sigma_min),
            u8::from(row.sigma_min > sigma_floor)
        )
        .expect("string write");
    }
    Ok(out)
}

fn cmd_counterexample(pmin: u32, pmax: u32, tol: &Tolerances<f64>) -> Result<String> {
    let rows = verify_dyadic::<f64>(pmin, pmax, tol.tail_tol)?;
    let mut out = String::from(
        "# schema=dirac.dyadic.v1\np,average,resonant_term,side_sum,exceeds_threshold,side_sum_within\n",
    );
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.p,
            num(row.average),
            num(row.resonant_term),
            num(row.side_sum),
            u8::from(row.exceeds_threshold),
            u8::from(row.side_sum_within)
        )
        .expect("string write");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_parses_and_enumerates_inclusively() {
        let g: GridSpec = "-5:5:0.1".parse().unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 101, "inclusive endpoints at step 0.1");
        assert_eq!(pts[0], -5.0);
        assert!((pts[100] - 5.0).abs() < 1e-12, "top end {}", pts[100]);

        let single: GridSpec = "2:2:1".parse().unwrap();
        assert_eq!(single.points(), vec![2.0]);

        assert!("1:2".parse::<GridSpec>().is_err(), "two fields");
        assert!("2:1:0.5".parse::<GridSpec>().is_err(), "reversed ends");
        assert!("0:1:0".parse::<GridSpec>().is_err(), "zero step");
        assert!("a:1:0.5".parse::<GridSpec>().is_err(), "non-numeric");
    }

    #[test]
    fn threshold_spec_accepts_auto_and_indices() {
        assert!(matches!("auto".parse::<N0Spec>().unwrap(), N0Spec::Auto));
        assert!(matches!("AUTO".parse::<N0Spec>().unwrap(), N0Spec::Auto));
        assert!(matches!("7".parse::<N0Spec>().unwrap(), N0Spec::Fixed(7)));
        assert!("-1".parse::<N0Spec>().is_err());
        assert!("x".parse::<N0Spec>().is_err());
    }

    #[test]
    fn csv_numbers_carry_full_precision() {
        let v = 0.1 + 0.2;
        let parsed: f64 = num(v).parse().unwrap();
        assert_eq!(parsed, v, "17 fractional digits round-trip exactly");
    }

    #[test]
    fn cli_declaration_is_wellformed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
