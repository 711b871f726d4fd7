//! `tbg`: runs the magic-angle certificates and writes their artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tbg_core::fermi::check_zero_rows;
use tbg_core::gap::sweep::{CurveRow, SweepMode, SweepOptions, MIN_FULL_GRID};
use tbg_core::gap::xi::{build_xi, parse_site, verify_mu_choice, XiBasis};
use tbg_core::report::{run_pipeline, CertificationReport, PipelineOptions, Scope};
use tbg_core::scalar::rational_string;
use tbg_core::{build_envelopes, compute_series};

#[derive(Parser)]
#[command(name = "tbg", version, about = "Certified bracket of the first magic angle of chiral twisted bilayer graphene")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact numerator and denominator series with a dump of the Ψⁿ.
    Series {
        #[arg(long, default_value_t = 8)]
        order: usize,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Sign certificates at α = 0.57 and 0.61.
    CertifyZero {
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
    },
    /// Ξ checks and the spectral-gap sweep.
    CertifyGap(GapArgs),
    /// Everything; exit status 0 only when the bracket is certified.
    CertifyAll(GapArgs),
    /// CSV data for the numerator plot and the eigenvalue curves.
    Figures {
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 700)]
        grid: usize,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Prints Ξ and verifies it.
    Xi {
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        edit: XiEdit,
    },
}

#[derive(Args, Clone)]
struct XiEdit {
    /// Add the orbit of a site, e.g. "q1 - 2b1 - 2b2".
    #[arg(long = "xi-add", value_name = "SITE")]
    add: Vec<String>,
    /// Remove the orbit of a site, e.g. "-4b2".
    #[arg(long = "xi-remove", value_name = "SITE")]
    remove: Vec<String>,
}

#[derive(Args, Clone)]
struct GapArgs {
    /// Grid count N; spacing 7/(10N). Defaults to the smallest certifying grid,
    /// or 700 with --survey.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// Any grid, no certificate.
    #[arg(long)]
    survey: bool,
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    /// Write all eigenvalues and radii per grid point.
    #[arg(long)]
    curves: Option<PathBuf>,
    #[command(flatten)]
    edit: XiEdit,
}

fn edited_xi(edit: &XiEdit) -> Result<Option<XiBasis>> {
    if edit.add.is_empty() && edit.remove.is_empty() {
        return Ok(None);
    }
    let mut xi = build_xi()?;
    for s in &edit.add {
        xi = xi.with_orbit(parse_site(s).with_context(|| format!("cannot parse site {s:?}"))?);
    }
    for s in &edit.remove {
        xi = xi.without_orbit(parse_site(s).with_context(|| format!("cannot parse site {s:?}"))?);
    }
    Ok(Some(xi))
}

fn write_json(path: &Path, report: &CertificationReport) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(report)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn write_curves(path: &Path, rows: &[CurveRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    let width = rows.first().map_or(81, |r| r.values.len());
    let mut header = vec!["alpha".to_string()];
    header.extend((1..=width).map(|j| format!("lambda_{j}")));
    header.push("enclosure_radius".into());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![format!("{:.17e}", r.alpha)];
        rec.extend(r.values.iter().map(|v| format!("{v:.17e}")));
        rec.push(format!("{:e}", r.radius));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_series(order: usize, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let s = compute_series(order);
    let (num, den) = (s.numerator()?, s.denominator()?);
    let mut w = csv::Writer::from_path(out.join("series.csv"))?;
    w.write_record(["power", "numerator", "denominator"])?;
    for k in 0..=num.degree().max(den.degree()) {
        w.write_record([k.to_string(), rational_string(&num.coeff(k)), rational_string(&den.coeff(k))])?;
    }
    w.flush()?;
    let mut dump = String::new();
    for (n, t) in s.terms().iter().enumerate().take(order.min(8) + 1) {
        dump += &format!("Ψ^{n}  (‖Ψ^{n}‖² = {})\n{}\n", rational_string(&s.norm_sq_of_term(n)?), t.dump());
    }
    fs::write(out.join("psi.txt"), dump)?;
    println!("wrote {} and {}", out.join("series.csv").display(), out.join("psi.txt").display());
    Ok(())
}

fn report_and_exit(report: &CertificationReport, out: &Path) -> Result<ExitCode> {
    write_json(out, report)?;
    if let Some(f) = &report.failure {
        eprintln!("stage {} failed: {}", f.stage, f.message);
    }
    if let Some(g) = &report.gap {
        println!(
            "gap: N = {}, min certified lower bound {}, grid-min first positive eigenvalue {} at α ≈ {}",
            g.grid,
            g.min_lower_bound.map_or("none".into(), |x| x.to_string()),
            g.min_first_positive,
            g.min_first_positive_alpha
        );
    }
    if let Some(b) = &report.bracket {
        for c in &b.certificates {
            println!(
                "{} {:?} at α = {}: value {:.6e}, bound {:.2e}",
                c.envelope.map_or("-".into(), |k| format!("{k:?}")),
                c.form,
                rational_string(&c.alpha),
                c.value,
                c.bound
            );
        }
    }
    println!("{}", report.verdict_label);
    Ok(if report.verdict { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn sweep_options(a: &GapArgs, keep_curves: bool) -> SweepOptions {
    let mode = if a.survey { SweepMode::Survey } else { SweepMode::Full };
    let grid = a.grid.unwrap_or(if a.survey { 700 } else { MIN_FULL_GRID });
    SweepOptions { grid, threads: a.threads, mode, keep_curves }
}

fn cmd_certify(scope: Scope, a: &GapArgs) -> Result<ExitCode> {
    let mut opts = PipelineOptions::new(scope, sweep_options(a, a.curves.is_some()));
    opts.xi = edited_xi(&a.edit)?;
    let report = run_pipeline(&opts);
    if let (Some(path), Some(g)) = (&a.curves, &report.gap) {
        write_curves(path, &g.curves)?;
    }
    report_and_exit(&report, &a.out)
}

fn cmd_figures(out: &Path, grid: usize, threads: Option<usize>) -> Result<()> {
    fs::create_dir_all(out)?;
    let (worst, best) = build_envelopes(&compute_series(8))?;
    let mut w = csv::Writer::from_path(out.join("check_zero.csv"))?;
    w.write_record(["alpha", "worst", "base", "best"])?;
    for r in check_zero_rows(&worst, &best, 0.5, 0.65, 300) {
        w.write_record(r.iter().map(|x| format!("{x:.17e}")))?;
    }
    w.flush()?;
    let opts = PipelineOptions::new(Scope::Gap, SweepOptions { grid, threads, mode: SweepMode::Survey, keep_curves: true });
    let report = run_pipeline(&opts);
    if let Some(f) = report.failure {
        bail!("stage {} failed: {}", f.stage, f.message);
    }
    let g = report.gap.context("no gap data")?;
    write_curves(&out.join("curves.csv"), &g.curves)?;
    println!("wrote {} and {}", out.join("check_zero.csv").display(), out.join("curves.csv").display());
    Ok(())
}

fn cmd_xi(check: bool, edit: &XiEdit) -> Result<ExitCode> {
    let xi = match edited_xi(edit)? {
        Some(x) => x,
        None => build_xi()?,
    };
    let mut by_norm: Vec<(i64, Vec<String>)> = Vec::new();
    for s in xi.orbits() {
        match by_norm.last_mut() {
            Some((n, v)) if *n == s.norm_sq() => v.push(s.to_string()),
            _ => by_norm.push((s.norm_sq(), vec![s.to_string()])),
        }
    }
    println!("origin");
    for (n, v) in &by_norm {
        println!("|G|² = {n:>2}: {}", v.join(", "));
    }
    println!("{} orbits, {} basis functions", xi.orbits().len(), xi.len());
    if !check {
        return Ok(ExitCode::SUCCESS);
    }
    match verify_mu_choice(&xi, &compute_series(8)) {
        Ok(m) => {
            let dim_ok = xi.len() == 81;
            println!(
                "μ² = {}, boundary degree out {} / in {}, ‖P_Ξ H¹ P_Ξ⊥‖² ≤ {}, support {} indices, |Ξ| = {}",
                m.mu_sq,
                m.max_outgoing,
                m.max_incoming,
                m.boundary_norm_sq,
                m.support_size,
                xi.len()
            );
            Ok(if dim_ok && m.mu_sq == 49 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Err(e) => {
            eprintln!("verify_mu_choice failed: {e}");
            Ok(ExitCode::FAILURE)
        }
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Series { order, out } => cmd_series(*order, out).map(|_| ExitCode::SUCCESS),
        Command::CertifyZero { out } => {
            let report = run_pipeline(&PipelineOptions::new(Scope::Zero, SweepOptions::survey(0)));
            report_and_exit(&report, out)
        }
        Command::CertifyGap(a) => cmd_certify(Scope::Gap, a),
        Command::CertifyAll(a) => cmd_certify(Scope::All, a),
        Command::Figures { out, grid, threads } => cmd_figures(out, *grid, *threads).map(|_| ExitCode::SUCCESS),
        Command::Xi { check, edit } => cmd_xi(*check, edit),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
