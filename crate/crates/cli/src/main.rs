use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use critlab_core::harness::write_atomic;
use critlab_core::{
    analyze_level, default_delta, detect_critical_points, exit_code, level_svg, load_dir, records_to_csv, run_scenario,
    solve, sweep, write_outputs, Error, OracleReport, Overrides, ScenarioConfig, VerdictRecord,
};

#[derive(Parser)]
#[command(name = "critlab", version, about = "Critical point laboratory for planar elliptic Dirichlet problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Override the mesh size.
    #[arg(long, global = true)]
    h: Option<f64>,
    /// Override the gradient threshold used to seed critical point candidates.
    #[arg(long = "grad-tol", global = true)]
    grad_tol: Option<f64>,
    /// Override the level band half-width.
    #[arg(long = "band-delta", global = true)]
    band_delta: Option<f64>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write level-line SVGs.
    #[arg(long, global = true)]
    svg: bool,
    /// Write the critical point CSV.
    #[arg(long, global = true)]
    csv: bool,
    /// Run sequentially (default; output is bit-reproducible).
    #[arg(long, global = true, conflicts_with = "par")]
    seq: bool,
    /// Parallelise element kernels and sweeps.
    #[arg(long, global = true)]
    par: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Mesh and solve; writes mesh.json and solution.json.
    Solve { config: PathBuf },
    /// Closed-form critical points for a Laplace scenario.
    Oracle { config: PathBuf },
    /// Level-set topology at a given level.
    Analyze {
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        level: f64,
    },
    /// Full pipeline and counting-relation verdict.
    Verify { config: PathBuf },
    /// Verify every *.json config in a directory.
    Sweep { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn load(path: &Path, c: &Common) -> critlab_core::Result<ScenarioConfig> {
    let o = Overrides { h: c.h, grad_tol: c.grad_tol, band_delta: c.band_delta, svg: c.svg, csv: c.csv };
    let cfg = ScenarioConfig::load(path)?.with_overrides(&o);
    cfg.validate()?;
    Ok(cfg)
}

fn put(out: &Path, id: &str, name: &str, text: &str) -> critlab_core::Result<()> {
    let p = out.join(id).join(name);
    write_atomic(&p, text.as_bytes())?;
    eprintln!("wrote {}", p.display());
    Ok(())
}

/// Serialized name of a unit enum variant.
fn name<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|j| j.as_str().map(str::to_owned)).unwrap_or_default()
}

fn run(cli: &Cli) -> critlab_core::Result<i32> {
    let c = &cli.common;
    let out = c.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    match &cli.command {
        Command::Solve { config } => {
            let cfg = load(config, c)?;
            let mesh = Arc::new(cfg.mesh()?);
            let sol = solve(mesh, &cfg.coefficient.field(), &cfg.dirichlet(), &cfg.newton(c.par))?;
            put(&out, &cfg.id, "mesh.json", &serde_json::to_string(&sol.mesh().to_export())?)?;
            put(&out, &cfg.id, "solution.json", &serde_json::to_string(&sol.to_export())?)?;
            let n = sol.newton();
            println!(
                "{}: {} vertices, newton iters {} residual {:.3e}",
                cfg.id,
                sol.mesh().vertices().len(),
                n.iters,
                n.residual
            );
            Ok(0)
        }
        Command::Oracle { config } => {
            let cfg = load(config, c)?;
            let rep = cfg
                .oracle()?
                .ok_or_else(|| Error::Config("the closed-form oracle covers the Laplace coefficient only".into()))?;
            let report =
                OracleReport { critical_points: critlab_core::oracle_critical_points(&rep)?, coefficients: rep };
            let text = serde_json::to_string_pretty(&report)? + "\n";
            if c.out.is_some() {
                put(&out, &cfg.id, "oracle.json", &text)?;
            }
            print!("{text}");
            Ok(0)
        }
        Command::Analyze { config, level } => {
            let cfg = load(config, c)?;
            let mesh = Arc::new(cfg.mesh()?);
            let h = mesh.h();
            let sol = solve(mesh, &cfg.coefficient.field(), &cfg.dirichlet(), &cfg.newton(c.par))?;
            let copts = cfg.critical_options();
            let records = detect_critical_points(&sol, &copts)?;
            let delta = cfg.tolerances.band_delta.unwrap_or_else(|| default_delta(&sol));
            let report = analyze_level(&sol, &records, *level, delta, cfg.inner_constant, copts.merge_radius(h))?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            if c.out.is_some() {
                put(&out, &cfg.id, "level.json", &text)?;
            }
            if cfg.outputs.svg {
                put(&out, &cfg.id, "level.svg", &level_svg(&sol, *level)?)?;
            }
            if cfg.outputs.csv {
                put(&out, &cfg.id, "critical_points.csv", &records_to_csv(&records)?)?;
            }
            print!("{text}");
            Ok(0)
        }
        Command::Verify { config } => {
            let cfg = load(config, c)?;
            let outcome = run_scenario(&cfg, c.par)?;
            if c.out.is_some() {
                for p in write_outputs(&outcome, &out)? {
                    eprintln!("wrote {}", p.display());
                }
            }
            print!("{}", outcome.verdict.to_json()?);
            Ok(exit_code([Ok(&outcome.verdict)]))
        }
        Command::Sweep { dir } => {
            let entries = load_dir(dir)?;
            let mut cfgs = Vec::new();
            let mut slots: Vec<Result<usize, String>> = Vec::new();
            for (path, cfg) in entries {
                match cfg.and_then(|cfg| {
                    let o =
                        Overrides { h: c.h, grad_tol: c.grad_tol, band_delta: c.band_delta, svg: c.svg, csv: c.csv };
                    let cfg = cfg.with_overrides(&o);
                    cfg.validate().map(|_| cfg)
                }) {
                    Ok(cfg) => {
                        slots.push(Ok(cfgs.len()));
                        cfgs.push(cfg);
                    }
                    Err(e) => slots.push(Err(format!("{}: {e}", path.display()))),
                }
            }
            let results = sweep(&cfgs, c.par);
            let mut verdicts: Vec<Result<&VerdictRecord, ()>> = Vec::new();
            for slot in &slots {
                match slot {
                    Err(msg) => {
                        eprintln!("error: {msg}");
                        verdicts.push(Err(()));
                    }
                    Ok(i) => match &results[*i] {
                        Ok(o) => {
                            if c.out.is_some() {
                                write_outputs(o, &out)?;
                            }
                            let v = &o.verdict;
                            let rel = v.relation.map(|r| name(&r));
                            println!(
                                "{:<24} {:<16} sum_m={} N_local_max={} N_global_max={} {}{}",
                                v.scenario,
                                rel.unwrap_or_else(|| "-".into()),
                                v.sum_m,
                                v.n_local_max,
                                v.n_global_max,
                                name(&v.verdict),
                                v.flags.iter().map(|f| format!(" {}", name(f))).collect::<String>(),
                            );
                            verdicts.push(Ok(v));
                        }
                        Err(e) => {
                            eprintln!("error: {e}");
                            verdicts.push(Err(()));
                        }
                    },
                }
            }
            Ok(exit_code(verdicts))
        }
    }
}
