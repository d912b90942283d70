use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ffscale_cli::converge::{converge, Table, TABLE_FILE, TABLE_SUMMARY_FILE};
use ffscale_cli::output::{to_json, write_atomic, write_outcome};
use ffscale_cli::run::run;
use ffscale_cli::validate::validate;
use ffscale_cli::{CliError, Scenario};

#[derive(Parser)]
#[command(name = "ffscale", version, about = "Fast-forward scaling scenarios: validate, run, converge")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory; overrides output.directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario without running it.
    Validate(Common),
    /// Run a scenario and write its artifacts.
    Run(Common),
    /// Rerun a scenario over refinement levels and fit the convergence order.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
}

fn out_dir(common: &Common, s: &Scenario) -> PathBuf {
    common.out.clone().unwrap_or_else(|| s.output.directory.clone())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:e}"))
}

fn cmd_validate(common: &Common) -> Result<(), CliError> {
    let s = Scenario::load(&common.scenario)?;
    let report = validate(&s);
    if !report.is_empty() {
        return Err(CliError::Validation(report));
    }
    if !common.quiet {
        println!("{}: ok ({})", s.name, s.run_kind);
    }
    Ok(())
}

fn cmd_run(common: &Common) -> Result<(), CliError> {
    let s = Scenario::load(&common.scenario)?;
    let outcome = run(&s)?;
    let dir = out_dir(common, &s);
    let written = write_outcome(&dir, &s, &outcome)?;
    if !common.quiet {
        let sm = &outcome.summary;
        println!("{} ({})", sm.scenario, sm.run_kind);
        println!("  route: {}", sm.route);
        println!("  max_l2 {}  final_l2 {}", fmt_opt(sm.max_l2), fmt_opt(sm.final_l2));
        for (k, v) in &sm.residuals {
            println!("  {k} {v:e}");
        }
        if let Some(ok) = sm.within_tolerance {
            println!("  within tolerance: {ok}");
        }
        for w in &sm.warnings {
            println!("  warning: {w}");
        }
        for p in written {
            println!("  wrote {}", p.display());
        }
    }
    Ok(())
}

fn save_table(dir: &Path, table: &Table) -> Result<(), CliError> {
    write_atomic(dir, TABLE_FILE, &table.to_csv())?;
    write_atomic(dir, TABLE_SUMMARY_FILE, &to_json(table))?;
    Ok(())
}

fn cmd_converge(common: &Common, levels: u32) -> Result<(), CliError> {
    let s = Scenario::load(&common.scenario)?;
    let dir = out_dir(common, &s);
    let mut printed = 0;
    let table = converge(&s, levels, |t| {
        if !common.quiet {
            for r in &t.rows[printed..] {
                println!("level {} dx {:e} dt {:e} error {:e} order {:.3}", r.level, r.dx, r.dt, r.error, r.order);
            }
        }
        printed = t.rows.len();
        save_table(&dir, t)
    })?;
    if !common.quiet {
        match table.order_flag {
            Some(flag) => println!("fitted order: NaN ({flag})"),
            None => println!("fitted order: {:.3}", table.fitted_order),
        }
        println!("wrote {}", dir.join(TABLE_FILE).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(c) => cmd_validate(c),
        Command::Run(c) => cmd_run(c),
        Command::Converge { common, levels } => cmd_converge(common, *levels),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
