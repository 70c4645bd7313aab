//! `rkpair` — derive, verify, analyze, integrate, and benchmark embedded
//! (4,5) pairs of explicit 7-stage Runge-Kutta methods.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input or degeneracy
//! error, 3 numerical failure.

mod commands;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "rkpair", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a pair of a given family and write its tableau file.
    Derive(commands::DeriveArgs),
    /// Check the order conditions of a pair; nonzero exit on violation.
    Verify(commands::VerifyArgs),
    /// Print the full analysis report of a pair.
    Report(commands::ReportArgs),
    /// Integrate a benchmark problem and export the trajectory.
    Integrate(commands::IntegrateArgs),
    /// Work-precision sweep over a tolerance grid; writes CSV.
    Bench(commands::BenchArgs),
    /// Family-curve scan in the (c3, c'3) plane; writes CSV.
    Scan(commands::ScanArgs),
    /// Stability polynomial and region boundary of a pair.
    Stability(commands::StabilityArgs),
}

fn main() {
    // die quietly on a closed pipe instead of panicking mid-print
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Derive(args) => commands::derive(args),
        Command::Verify(args) => commands::verify(args),
        Command::Report(args) => commands::report(args),
        Command::Integrate(args) => commands::integrate(args),
        Command::Bench(args) => commands::bench(args),
        Command::Scan(args) => commands::scan(args),
        Command::Stability(args) => commands::stability(args),
    };
    match outcome {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code);
        }
    }
}
