// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line interface.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ndarray::Array1;
use num_complex::Complex64 as C64;

use rabi_core::coherent::{schrodinger_evolve, CoherentOptions, EvolutionRecord};
use rabi_core::dressed::{DissipationParams, StateTag};
use rabi_core::master::{master_evolve, pure_density, MasterOptions};
use rabi_core::scenario::{Scenario, ScenarioSpec};

use crate::config::{load_config, preset, Quantity, SweepSpec};
use crate::error::{Result, SweepError};
use crate::grid::GcGrid;
use crate::output::{emit_csv, format_value, write_meta};
use crate::sweep::{derivative_series, run_sweep, SweepResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "rabi-qpt", version, about = "Critical phenomena of the three-level quantum Rabi model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a sweep described by a configuration file, preset or flags.
    Sweep(SweepArgs),
    /// Reproduce a figure's data set.
    Figure {
        /// fig2a, fig2b, fig3, fig4, fig5a or fig5b.
        name: String,
        #[command(flatten)]
        args: SweepArgs,
    },
    /// Time series of one driven point.
    Evolve(EvolveArgs),
    /// Run the invariant suite.
    Validate,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named preset, applied before the configuration blocks.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Explicit g_c values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub gc: Option<Vec<f64>>,
    /// Frequency ratios Ω/ω, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ratio: Option<Vec<f64>>,
    /// Raman orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub l: Option<Vec<u32>>,
    /// Fixed Fock truncation.
    #[arg(long)]
    pub nfock: Option<usize>,
    /// Dressed-subspace size M.
    #[arg(long)]
    pub dressed_m: Option<usize>,
    /// Quantity to evaluate.
    #[arg(long, value_enum)]
    pub quantity: Option<Quantity>,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub gc: f64,
    #[arg(long, default_value_t = 1e6)]
    pub ratio: f64,
    #[arg(long, default_value_t = 2)]
    pub l: u32,
    /// Drive and dissipation parameters come from this preset.
    #[arg(long, default_value = "fig4")]
    pub preset: String,
    /// Include dissipation (Lindblad evolution).
    #[arg(long)]
    pub dissipative: bool,
    /// Final time; the effective-theory transfer time when omitted.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
    #[arg(long)]
    pub nfock: Option<usize>,
    #[arg(long)]
    pub dressed_m: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Resolves a sweep specification: preset, then file, then flags.
pub fn resolve_spec(args: &SweepArgs, figure: Option<&str>) -> Result<SweepSpec> {
    let mut spec = match (&args.config, figure.or(args.preset.as_deref())) {
        (Some(path), name) => {
            let mut s = load_config(path)?;
            if let (Some(name), None) = (name, &s.preset) {
                let base = preset(name)?;
                s = SweepSpec { preset: base.preset.clone(), ..s };
            }
            s
        }
        (None, Some(name)) => preset(name)?,
        (None, None) => SweepSpec::default(),
    };
    if let Some(name) = figure {
        if args.config.is_some() && spec.preset.as_deref() != Some(name) {
            return Err(SweepError::Config(format!("figure `{name}` conflicts with the configuration's preset")));
        }
    }
    if let Some(gc) = &args.gc {
        spec.gc = GcGrid::Values(gc.clone());
    }
    if let Some(r) = &args.ratio {
        spec.ratios = r.clone();
    }
    if let Some(l) = &args.l {
        spec.ls = l.clone();
    }
    if let Some(n) = args.nfock {
        spec.numerics.n_fock = Some(n);
    }
    if let Some(m) = args.dressed_m {
        spec.numerics.dressed_m = m;
    }
    if let Some(j) = args.jobs {
        spec.jobs = j;
    }
    if let Some(q) = args.quantity {
        spec.quantity = q;
    }
    spec.validate()?;
    Ok(spec)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| SweepError::Io { path: dir.to_path_buf(), source })
}

/// Runs a resolved sweep and writes one CSV per quantity plus `run.meta`.
/// Returns the written results.
pub fn execute_sweep(spec: &SweepSpec, out: &Path) -> Result<Vec<SweepResult>> {
    ensure_dir(out)?;
    let started = Instant::now();
    let mut notes = Vec::new();
    let results = if spec.quantity == Quantity::DphiOutSs {
        let base = run_sweep(&SweepSpec { quantity: Quantity::PhiOutSs, ..spec.clone() })?;
        let der = derivative_series(&base)?;
        notes.push("derivative: three-point differences within g_c < 1 and g_c >= 1 separately".into());
        vec![base, der]
    } else {
        vec![run_sweep(spec)?]
    };
    if spec.preset.as_deref() == Some("fig2b") {
        notes.push("g_c sampling: range 0.9..1.1 step 0.01 with automatic 1e-4 refinement within 0.01 of g_c = 1".into());
    }
    if spec.quantity.is_driven() {
        let nds: Vec<String> = spec.ls.iter().map(|&l| format!("l={l}: n_d={}", spec.n_d_for(l))).collect();
        notes.push(format!("detuning index {}", nds.join(", ")));
    }
    let mut files = Vec::new();
    for r in &results {
        let path = out.join(format!("{}.csv", r.quantity.name()));
        emit_csv(r, &path)?;
        files.push(path);
    }
    let refs: Vec<&SweepResult> = results.iter().collect();
    write_meta(out, spec, &refs, &files, notes, started.elapsed().as_secs_f64())?;
    Ok(results)
}

fn sweep_exit(results: &[SweepResult]) -> i32 {
    if results.iter().any(|r| r.failures() > 0) {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    }
}

fn evolve(args: &EvolveArgs) -> Result<()> {
    let spec = preset(&args.preset)?;
    let m = args.dressed_m.unwrap_or(spec.numerics.dressed_m);
    let sc = Scenario::build(ScenarioSpec {
        gc: args.gc,
        ratio: args.ratio,
        l: args.l,
        n_d: Some(spec.n_d_for(args.l)),
        pump_fraction: spec.pump_fraction,
        stokes_ratio: spec.stokes_ratio,
        n_fock: args.nfock,
        m,
    })?;
    let t_max = match args.t_max {
        Some(t) => t,
        None => rabi_core::analytics::transfer_time(&sc.triple, Some(spec.time_cap))?,
    };
    if !(t_max > 0.0 && t_max.is_finite()) || args.samples < 2 {
        return Err(SweepError::Config("need t_max > 0 and at least 2 samples".into()));
    }
    let grid: Vec<f64> = (0..args.samples).map(|k| t_max * k as f64 / (args.samples - 1) as f64).collect();
    let tracked = vec![StateTag::Mu(0), StateTag::Mu(2 * args.l as usize)];
    let rec: EvolutionRecord = if args.dissipative {
        let d = spec.dissipation;
        let diss = DissipationParams::new(d.kappa, d.gamma1, d.gamma2)?;
        let rho0 = pure_density(&sc.subspace, StateTag::Mu(0))?;
        master_evolve(&sc.subspace, Some(&sc.drive), &rho0, &grid, &diss, &MasterOptions { tracked, ..Default::default() })?
    } else {
        let mut psi = Array1::zeros(m);
        psi[sc.mu0()] = C64::new(1.0, 0.0);
        schrodinger_evolve(&sc.subspace, Some(&sc.drive), &psi, &grid, &CoherentOptions { tracked, ..Default::default() })?
    };
    ensure_dir(&args.out)?;
    let path = args.out.join("evolve.csv");
    let csv_err = |source| SweepError::Csv { path: path.clone(), source };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    let pop2l = format!("pop_mu{}", 2 * args.l);
    w.write_record(["t", "nbar", "phi_out", "norm", "pop_mu0", pop2l.as_str()]).map_err(csv_err)?;
    for k in 0..rec.times.len() {
        let phi = rec.phi_out.get(k).map(|v| format_value(*v)).unwrap_or_default();
        w.write_record([
            format_value(rec.times[k]),
            format_value(rec.nbar[k]),
            phi,
            format_value(rec.norm[k]),
            format_value(rec.populations[0].1[k]),
            format_value(rec.populations[1].1[k]),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| SweepError::Io { path: path.clone(), source })?;
    let meta = serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "g_c": args.gc,
        "ratio": args.ratio,
        "l": args.l,
        "n_d": spec.n_d_for(args.l),
        "preset": args.preset,
        "dissipative": args.dissipative,
        "n_fock": sc.n_fock,
        "dressed_m": m,
        "omega_mu": sc.omega_mu,
        "drive": {
            "amp_p": sc.drive.amp_p, "amp_s": sc.drive.amp_s,
            "freq_p": sc.drive.freq_p, "freq_s": sc.drive.freq_s,
        },
        "xi": sc.triple.xi,
        "degenerate_pairs": sc.subspace.degenerate_pairs().len(),
        "ode_steps": rec.stats.accepted,
    });
    let meta_path = args.out.join("run.meta");
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta).expect("serializes"))
        .map_err(|source| SweepError::Io { path: meta_path, source })?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Executes a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Sweep(args) => resolve_spec(args, None).and_then(|s| execute_sweep(&s, &args.out)).map(|r| sweep_exit(&r)),
        Command::Figure { name, args } => {
            let canonical = match name.as_str() {
                "fig2a" | "fig2b" | "fig3" | "fig4" | "fig5a" | "fig5b" => Ok(name.as_str()),
                other => Err(SweepError::Config(format!(
                    "unknown figure `{other}`; available: fig2a, fig2b, fig3, fig4, fig5a, fig5b"
                ))),
            };
            canonical
                .and_then(|n| resolve_spec(args, Some(n)))
                .and_then(|s| execute_sweep(&s, &args.out))
                .map(|r| sweep_exit(&r))
        }
        Command::Evolve(args) => evolve(args).map(|_| EXIT_OK),
        Command::Validate => {
            let checks = crate::validate::run_checks();
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_NUMERIC })
        }
    };
    match outcome {
        Ok(code) => {
            if code == EXIT_PARTIAL {
                eprintln!("some sweep points failed; see the status column and run.meta");
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("rabi-qpt").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_preset() {
        let cli = parse(&["figure", "fig5a", "--gc", "0.9,0.95", "--ratio", "100", "--dressed-m", "20", "--jobs", "2"]);
        let Command::Figure { name, args } = cli.command else { panic!() };
        let s = resolve_spec(&args, Some(&name)).unwrap();
        assert_eq!(s.gc, GcGrid::Values(vec![0.9, 0.95]));
        assert_eq!(s.ratios, vec![100.0]);
        assert_eq!(s.numerics.dressed_m, 20);
        assert_eq!(s.jobs, 2);
        assert_eq!(s.quantity, Quantity::PhiOutSs);
    }

    #[test]
    fn unknown_figure_is_a_config_error() {
        assert_eq!(run(parse(&["figure", "fig9", "--out", "/tmp/unused-rabi-qpt"])), EXIT_CONFIG);
    }

    #[test]
    fn invalid_override_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(run(parse(&["sweep", "--gc", "0.5,0.4", "--out", out])), EXIT_CONFIG);
    }
}
