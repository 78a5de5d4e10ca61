use std::process::ExitCode;

use mccdma::cli::parse_cli;
use mccdma::link::{sweep, Link};
use mccdma::results::{emit_results, overlay_theory, render};

fn run() -> mccdma::Result<()> {
    let plan = parse_cli(std::env::args_os())?;
    if plan.print_codebook {
        let link = Link::new(plan.configs[0].clone())?;
        print!("{}", link.codebook());
        return Ok(());
    }
    let mut curves = plan.configs.iter().map(sweep).collect::<mccdma::Result<Vec<_>>>()?;
    if let Some(theory) = plan.theory {
        overlay_theory(&mut curves, theory)?;
    }
    match &plan.out {
        Some(path) => emit_results(&curves, plan.format, path)?,
        None => print!("{}", render(&curves, plan.format)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(mccdma::Error::Help(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
