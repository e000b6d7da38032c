//! Batch runner. `cavitypress SUBCOMMAND --spec FILE [--out DIR]
//! [--seed U64] [--threads N] [--budget STATES] [--tol FLOAT]`, or
//! `cavitypress cache (verify|gc|stats)`.

use std::path::PathBuf;
use std::process::ExitCode;

use cavitypress::run::{execute, execute_cache, Flags, SUBCOMMANDS};
use cavitypress::{Error, Result};

fn usage() -> String {
    format!(
        "usage: cavitypress <{}> --spec FILE [--out DIR] [--seed U64] \
         [--threads N] [--budget STATES] [--tol FLOAT]\n       \
         cavitypress cache <verify|gc|stats>",
        SUBCOMMANDS.join("|")
    )
}

fn arg_err(msg: impl Into<String>) -> Error {
    Error::Parse { line: 0, msg: msg.into() }
}

fn parse_args(args: &[String]) -> Result<(String, Option<String>, Flags)> {
    let mut flags = Flags::default();
    let sub = args.first().ok_or_else(|| arg_err(usage()))?.clone();
    let mut action = None;
    let mut i = 1;
    if sub == "cache" {
        action = Some(
            args.get(1)
                .ok_or_else(|| arg_err("cache needs an action: verify, gc, or stats"))?
                .clone(),
        );
        i = 2;
    } else if !SUBCOMMANDS.contains(&sub.as_str()) {
        return Err(arg_err(format!("unknown subcommand {sub:?}\n{}", usage())));
    }
    while i < args.len() {
        let flag = &args[i];
        let value = args
            .get(i + 1)
            .ok_or_else(|| arg_err(format!("{flag} needs a value")))?;
        match flag.as_str() {
            "--spec" => flags.spec = Some(PathBuf::from(value)),
            "--out" => flags.out = Some(PathBuf::from(value)),
            "--seed" => {
                flags.seed =
                    Some(value.parse().map_err(|_| arg_err(format!("bad --seed {value:?}")))?)
            }
            "--threads" => {
                flags.threads =
                    Some(value.parse().map_err(|_| arg_err(format!("bad --threads {value:?}")))?)
            }
            "--budget" => {
                flags.budget =
                    Some(value.parse().map_err(|_| arg_err(format!("bad --budget {value:?}")))?)
            }
            "--tol" => {
                flags.tol =
                    Some(value.parse().map_err(|_| arg_err(format!("bad --tol {value:?}")))?)
            }
            other => return Err(arg_err(format!("unknown flag {other:?}\n{}", usage()))),
        }
        i += 2;
    }
    Ok((sub, action, flags))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (sub, action, flags) = match parse_args(&args) {
        Ok(parsed) => parsed,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(n) = flags.threads {
        // A second initialization in the same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match action {
        Some(act) => execute_cache(&act, &flags),
        None => execute(&sub, &flags),
    };
    match result {
        Ok(verdict) => {
            println!("{verdict}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
