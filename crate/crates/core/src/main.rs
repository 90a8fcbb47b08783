use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use geodynamo::audit::export_ledger;
use geodynamo::biot_savart::{biot_savart_reconstruct, CurrentDensity};
use geodynamo::config::{load_config, Config};
use geodynamo::driver::{run, seeded_initial_state, snapshot_of, RunOptions};
use geodynamo::dynamo::{project_initial_data, InitialData, Model, StateVector};
use geodynamo::par;
use geodynamo::snapshot::SnapshotFile;
use geodynamo::spectral::PolyFamily;
use geodynamo::verify::{curl_check_terms, run_suite, Suite};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "geodynamo", version, about = "Whole-core spectral geodynamo with an exact energy audit")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation, writing energy.csv and state_NNNN.gdyn snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Snapshot to continue from.
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Relative energy-identity tolerance; defaults to the config value.
        #[arg(long)]
        tol_energy: Option<f64>,
    },
    /// Run a verification suite and write its report CSV.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// basis, biotsavart, cancellations or decay.
        #[arg(long)]
        suite: Suite,
        /// Report path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct B from a current density stored as snapshot coefficients.
    BiotSavart {
        #[arg(long)]
        config: PathBuf,
        /// Snapshot whose magnetic block holds c_j with h = Σ c_j curl(μ⁻¹ B_j).
        #[arg(long)]
        input: PathBuf,
        /// Output snapshot of the projected field.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    match par::with_threads(threads, move || dispatch(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Simulate {
            config,
            resume,
            out,
            tol_energy,
        } => simulate(&config, resume.as_deref(), &out, tol_energy),
        Command::Verify { config, suite, out } => verify(&config, suite, out.as_deref()),
        Command::BiotSavart { config, input, out } => biot_savart(&config, &input, &out),
    }
}

fn load(path: &Path) -> Result<Config> {
    load_config(path).with_context(|| format!("loading {}", path.display()))
}

fn read_compatible(path: &Path, cfg: &Config, model: &Model, check_hash: bool) -> Result<SnapshotFile> {
    let snap = SnapshotFile::read(path).with_context(|| format!("reading {}", path.display()))?;
    let r = &cfg.run.resolution;
    let hash = if check_hash { cfg.params_hash() } else { snap.params_hash };
    snap.check_compatible(r.l_max, [r.n_r_inner, r.n_r_outer], model.sizes(), hash)
        .with_context(|| format!("{} does not match {}", path.display(), "the configured model"))?;
    Ok(snap)
}

fn simulate(config: &Path, resume: Option<&Path>, out: &Path, tol: Option<f64>) -> Result<ExitCode> {
    let cfg = load(config)?;
    let model = Model::from_config(&cfg)?;
    let start: StateVector = match resume {
        Some(p) => read_compatible(p, &cfg, &model, true)?.state,
        None => seeded_initial_state(&model, cfg.run.seed),
    };
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut opts = RunOptions::from_config(&cfg);
    opts.snapshot_dir = Some(out.to_path_buf());
    if let Some(t) = tol {
        opts.tolerance = t;
    }
    let result = run(&cfg, &model, start, &opts)?;
    export_ledger(&result.ledger, &out.join("energy.csv"))?;
    let flagged = result.flagged();
    let worst = result.reports.iter().map(|r| r.relative_residual).fold(0.0, f64::max);
    println!(
        "steps={} rows={} snapshots={} worst_relative_residual={worst:e} flagged={flagged} gronwall_holds={}",
        result.reports.len(),
        result.ledger.rows.len(),
        result.snapshots.len(),
        result.certificate.holds
    );
    if flagged > 0 {
        let first = result.reports.iter().find(|r| r.flagged).expect("flagged row");
        eprintln!(
            "energy identity breached at step {} (t={}): relative residual {:e} > {:e}",
            first.step, first.t, first.relative_residual, opts.tolerance
        );
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(config: &Path, suite: Suite, out: Option<&Path>) -> Result<ExitCode> {
    let cfg = load(config)?;
    let report = run_suite(&cfg, suite)?;
    let csv = report.to_csv();
    match out {
        Some(p) => std::fs::write(p, &csv).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{csv}"),
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {}: measured {:e}, threshold {:e}", c.name, c.measured, c.threshold);
    }
    Ok(if report.all_pass() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn biot_savart(config: &Path, input: &Path, out: &Path) -> Result<ExitCode> {
    let cfg = load(config)?;
    let model = Model::from_config(&cfg)?;
    let snap = read_compatible(input, &cfg, &model, false)?;
    let c = &snap.state.g_b;
    if !c.iter().all(|x| x.is_finite()) {
        bail!("{} holds non-finite current coefficients", input.display());
    }
    let h = CurrentDensity::from_magnetic(&model.sp.mag, c, PolyFamily::Chebyshev);
    let f = biot_savart_reconstruct(&h, model.params())?;
    let (normal, tangential) = f.interface_residuals();
    let curl = f.curl_residual(curl_check_terms(&cfg.run.resolution), 100);
    let projected = project_initial_data(
        &model.sp,
        &InitialData {
            b: Some(&f),
            ..Default::default()
        },
        snap.state.t,
    );
    let mut state = StateVector::zeros(model.sizes(), snap.state.t);
    state.g_b = projected.state.g_b;
    snapshot_of(&cfg, &state).write(out).with_context(|| format!("writing {}", out.display()))?;
    let mut summary = String::from("quantity,value\n");
    let _ = writeln!(summary, "curl_residual_relative,{curl:?}");
    let _ = writeln!(summary, "normal_jump_relative,{normal:?}");
    let _ = writeln!(summary, "tangential_jump_relative,{tangential:?}");
    let summary_path = out.with_extension("residuals.csv");
    std::fs::write(&summary_path, &summary).with_context(|| format!("writing {}", summary_path.display()))?;
    print!("{summary}");
    Ok(ExitCode::SUCCESS)
}
