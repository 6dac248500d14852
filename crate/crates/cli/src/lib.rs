//! Command-line front end of `ymblowup`.
//!
//! Every command reads one [`config::RunConfig`] (TOML file plus flag
//! overrides), validates the section it uses, and writes a JSON report and
//! plot-ready CSV files into the output directory.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}

use std::ffi::OsString;

use clap::Parser;

use crate::args::Cli;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Output;

/// Parses `argv`, runs the command and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &cli.output_dir {
        cfg.output_dir = Some(d.clone());
    }
    cli.command.apply(&mut cfg)?;
    let name = cli.command.name();
    cfg.validate(name)?;
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs: must be at least 1".into()));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    cfg.output_dir = Some(cfg.resolved_output_dir());
    let mut out = Output::create(cfg.output_dir.clone().unwrap())?;
    let res = match name {
        "validate" => commands::validate(&cfg, &mut out),
        "spectrum" => commands::spectrum(&cfg, &mut out),
        "linear-decay" => commands::linear_decay(&cfg, &mut out),
        "evolve-sim" => commands::evolve_sim(&cfg, &mut out),
        "tune-T" => commands::tune_t(&cfg, &mut out),
        "evolve-phys" => commands::evolve_phys(&cfg, &mut out),
        "fit-rate" => commands::fit_rate_cmd(&cfg, &mut out),
        _ => unreachable!("clap restricts the command set"),
    };
    for p in &out.written {
        eprintln!("wrote {}", p.display());
    }
    res
}
