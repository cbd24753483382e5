use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hermite_fourier::schemes::BUILTIN_NAMES;
use hermite_fourier::SplittingScheme;
use hf_experiments::check::{order_check, OrderCheckSpec};
use hf_experiments::config::{ConfigError, ExperimentConfig, MagnusName, SplitName};
use hf_experiments::output::{write_order_fit, write_table};
use hf_experiments::plot::{emit_plot, PlotKind};
use hf_experiments::presets::{preset, PRESET_NAMES};
use hf_experiments::runner::{RunError, Runner};

#[derive(Parser)]
#[command(name = "hfx", version, about = "Hermite-Fourier split-step experiments")]
#[command(after_help = "The worker count is read from HF_WORKERS (default: available cores).")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a JSON configuration and write the result CSV.
    Run {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        preset: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Dotted-path override, e.g. `study.t_final=5`; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        plot: Option<PlotKind>,
    },
    /// Inspect the scheme catalog.
    Schemes {
        #[command(subcommand)]
        action: SchemesAction,
    },
    /// List presets or print one as a JSON configuration.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
    /// Fit the empirical order of a scheme on a preset problem.
    OrderCheck {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        problem: String,
        #[arg(long, default_value = "hf", value_parser = parse_split)]
        split: SplitName,
        #[arg(long, default_value = "exact", value_parser = parse_magnus)]
        magnus: MagnusName,
        #[arg(long)]
        basis_size: Option<usize>,
        /// Coarsest step count of the geometric sweep.
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 8)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        plot: Option<PlotKind>,
    },
}

#[derive(Subcommand)]
enum SchemesAction {
    List,
    Validate { name: String },
}

#[derive(Subcommand)]
enum PresetsAction {
    List,
    Show { name: String },
}

fn parse_split(s: &str) -> Result<SplitName, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| "expected f, hf or hermite".into())
}

fn parse_magnus(s: &str) -> Result<MagnusName, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| "expected exact, magnus4 or magnus6".into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn unknown_preset(name: &str) -> RunError {
    RunError::Config(ConfigError::Field {
        path: "preset".into(),
        message: format!("unknown preset '{name}' (known: {})", PRESET_NAMES.join(", ")),
    })
}

fn execute(command: Command) -> Result<(), RunError> {
    match command {
        Command::Run {
            preset: name,
            config,
            overrides,
            out,
            plot,
        } => {
            let base = match (&name, &config) {
                (Some(n), _) => preset(n).ok_or_else(|| unknown_preset(n))?,
                (None, Some(path)) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
                (None, None) => unreachable!("clap requires one of them"),
            };
            let config = base.with_overrides(&overrides)?;
            config.validate()?;
            let out = out.unwrap_or_else(|| PathBuf::from(format!("{}.csv", config.name)));
            let table = Runner::from_env()?.run(&config)?;
            write_table(&table, BufWriter::new(File::create(&out)?))?;
            println!("wrote {} rows to {}", table.len(), out.display());
            maybe_plot(&out, plot)
        }
        Command::Schemes { action } => match action {
            SchemesAction::List => {
                println!("{:<22}{:>7}{:>7}{:>11}{:>13}", "name", "stages", "order", "effective", "max|a_i|");
                for name in BUILTIN_NAMES {
                    let s = SplittingScheme::builtin(name).expect("builtin");
                    let eff = s.effective_order().map(|(r, p)| format!("({r},{p})")).unwrap_or("-".into());
                    println!(
                        "{:<22}{:>7}{:>7}{:>11}{:>13.6}",
                        name,
                        s.stages(),
                        s.order(),
                        eff,
                        s.max_abs_drift()
                    );
                }
                Ok(())
            }
            SchemesAction::Validate { name } => {
                let scheme = SplittingScheme::builtin(&name).map_err(|_| {
                    RunError::Config(ConfigError::Field {
                        path: "scheme".into(),
                        message: format!("unknown scheme '{name}' (known: {})", BUILTIN_NAMES.join(", ")),
                    })
                })?;
                let r = scheme.validate();
                print!("{}", scheme.catalog_entry());
                println!("sum_kicks = {:.17}", r.sum_kicks);
                println!("sum_drifts = {:.17}", r.sum_drifts);
                println!("palindromic = {}", r.palindromic);
                println!("all_positive = {}", r.all_positive);
                println!("drifts_positive = {}", r.drifts_positive);
                if r.is_ok() {
                    println!("ok");
                    Ok(())
                } else {
                    Err(RunError::Config(ConfigError::Field {
                        path: format!("scheme {name}"),
                        message: r.findings.join("; "),
                    }))
                }
            }
        },
        Command::Presets { action } => {
            match action {
                PresetsAction::List => PRESET_NAMES.iter().for_each(|n| println!("{n}")),
                PresetsAction::Show { name } => println!("{}", preset(&name).ok_or_else(|| unknown_preset(&name))?.to_json()),
            }
            Ok(())
        }
        Command::OrderCheck {
            scheme,
            problem,
            split,
            magnus,
            basis_size,
            steps,
            points,
            out,
            plot,
        } => {
            let spec = OrderCheckSpec {
                split,
                magnus,
                basis_size,
                first_steps: steps,
                points,
                ..OrderCheckSpec::new(&scheme, &problem)
            };
            let check = order_check(&spec)?;
            for (n, h, e) in &check.samples {
                println!("{n:>8} {h:>12.6e} {e:>12.6e}");
            }
            println!(
                "{}: slope {:.3} over {} points ({} below the round-off floor)",
                check.method,
                check.fit.slope,
                check.fit.used.len(),
                check.fit.excluded
            );
            if let Some(out) = out {
                write_order_fit(&check.rows(), BufWriter::new(File::create(&out)?))?;
                maybe_plot(&out, plot)?;
            }
            Ok(())
        }
    }
}

fn maybe_plot(csv: &Path, plot: Option<PlotKind>) -> Result<(), RunError> {
    if let Some(kind) = plot {
        let script = emit_plot(csv, kind).map_err(|e| {
            RunError::Config(ConfigError::Field {
                path: "plot".into(),
                message: e.to_string(),
            })
        })?;
        println!("wrote {}", script.display());
    }
    Ok(())
}

