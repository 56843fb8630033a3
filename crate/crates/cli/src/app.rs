//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::compare::{compare, ratios_csv};
use crate::config::{RunConfig, KEYS};
use crate::error::{CliError, CliResult};
use crate::render::write_svg;
use crate::results::read_results;
use crate::run::{execute, run, with_pool};

fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

fn with_config_args(cmd: Command) -> Command {
    let cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .short('c')
            .value_name("FILE")
            .help("key = value configuration file"),
    );
    KEYS.iter().fold(cmd, |cmd, &key| {
        cmd.arg(
            Arg::new(key)
                .long(flag_name(key))
                .value_name("VALUE")
                .help(format!("overrides `{key}`")),
        )
    })
}

pub fn command() -> Command {
    Command::new("hbaca")
        .about("Hierarchical-matrix BEM experiments with ACA and block-adaptive ACA")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            with_config_args(Command::new("mesh").about("Generate the configured mesh as OFF")).arg(
                Arg::new("out")
                    .long("out")
                    .short('o')
                    .value_name("FILE")
                    .default_value("mesh.off"),
            ),
        )
        .subcommand(
            with_config_args(Command::new("run").about("Run a pipeline and write results.csv, trace.csv, blocks.svg, mesh.off"))
                .arg(
                    Arg::new("print-config")
                        .long("print-config")
                        .action(ArgAction::SetTrue)
                        .help("print the effective configuration and exit"),
                ),
        )
        .subcommand(
            with_config_args(Command::new("render").about("Run a pipeline and draw only its block structure")).arg(
                Arg::new("out")
                    .long("out")
                    .short('o')
                    .value_name("FILE")
                    .default_value("blocks.svg"),
            ),
        )
        .subcommand(
            Command::new("compare")
                .about("Ratios b/a of time, storage, entries and CG iterations of two results.csv files")
                .arg(Arg::new("a").required(true).value_name("A.csv"))
                .arg(Arg::new("b").required(true).value_name("B.csv")),
        )
}

/// Configuration file (if any) with flag overrides applied on top.
pub fn config_from_matches(m: &ArgMatches) -> CliResult<RunConfig> {
    let mut cfg = match m.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read config {path}: {e}")))?;
            RunConfig::parse_str(&text)?
        }
        None => RunConfig::default(),
    };
    for key in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(m: &ArgMatches, out: &mut dyn Write) -> CliResult<()> {
    match m.subcommand() {
        Some(("mesh", sub)) => {
            let cfg = config_from_matches(sub)?;
            let mesh = cfg.build_mesh()?;
            let path = PathBuf::from(sub.get_one::<String>("out").unwrap());
            hbaca::mesh::save_off(&mesh, &path)?;
            writeln!(out, "N = {} panels, {} vertices -> {}", mesh.num_triangles(), mesh.num_vertices(), path.display())?;
        }
        Some(("run", sub)) => {
            let cfg = config_from_matches(sub)?;
            if sub.get_flag("print-config") {
                write!(out, "{}", cfg.to_config_string())?;
                return Ok(());
            }
            let row = run(&cfg)?;
            writeln!(
                out,
                "{} N={} e_h={:.6e} storage={:.3} MB entries={} cg={} k={} time={:.3}s -> {}",
                row.pipeline,
                row.n,
                row.e_h,
                row.storage_mb,
                row.entries,
                row.cg_iterations,
                row.outer_iterations,
                row.wall_seconds,
                cfg.output.display()
            )?;
        }
        Some(("render", sub)) => {
            let cfg = config_from_matches(sub)?;
            let res = with_pool(cfg.threads, || execute(&cfg))??;
            let path = PathBuf::from(sub.get_one::<String>("out").unwrap());
            write_svg(&path, res.row.n, &res.rects)?;
            writeln!(out, "{} blocks -> {}", res.rects.len(), path.display())?;
        }
        Some(("compare", sub)) => {
            let a = read_results(&PathBuf::from(sub.get_one::<String>("a").unwrap()))?;
            let b = read_results(&PathBuf::from(sub.get_one::<String>("b").unwrap()))?;
            write!(out, "{}", ratios_csv(&compare(&a, &b)?))?;
        }
        _ => unreachable!("subcommand_required"),
    }
    Ok(())
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn main_with_args<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return e.exit_code();
        }
    };
    match dispatch(&matches, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
