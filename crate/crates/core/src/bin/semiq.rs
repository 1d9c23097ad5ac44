use std::process::ExitCode;

use anyhow::{anyhow, Context};
use semiq::cli::{self, Experiment, KEYS};

const USAGE: &str = "usage: semiq <simulate|limit|lyapunov|poincare|sweep> [--config <path>] [--key=value ...]
       semiq keys    list every configuration key with its default";

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("semiq: {err:#}");
            let code = err.downcast_ref::<semiq::Error>().map_or(1, |e| e.exit_code());
            ExitCode::from(code as u8)
        }
    }
}

fn real_main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return Err(semiq::Error::Validation("missing experiment".into()).into());
    };
    match command.as_str() {
        "-h" | "--help" | "help" => {
            println!("{USAGE}");
            return Ok(());
        }
        "keys" => {
            for (key, default, doc) in KEYS {
                println!("{key:28} {default:34} {doc}");
            }
            return Ok(());
        }
        _ => {}
    }
    let experiment = Experiment::parse(command)?;

    let mut config_path = None;
    let mut rest = Vec::new();
    let mut it = args[1..].iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            let path = it.next().ok_or_else(|| anyhow!(semiq::Error::Validation("--config needs a path".into())))?;
            config_path = Some(path.clone());
        } else if let Some(path) = arg.strip_prefix("--config=") {
            config_path = Some(path.to_string());
        } else {
            rest.push(arg.clone());
        }
    }
    let text = match &config_path {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| semiq::Error::Io(format!("{path}: {e}")))
            .with_context(|| "reading configuration")?,
        None => String::new(),
    };
    let overrides = cli::parse_overrides(&rest)?;
    let config = cli::parse_config(experiment, &text, &overrides)?;
    let summary = cli::run(&config)?;
    println!("{}: {}", experiment.name(), summary.headline);
    println!("wrote {} ({} rows) and {}", summary.csv.display(), summary.rows, summary.manifest.display());
    Ok(())
}
