//! `frame-module`: conformal modules of stretched rectangular frames from
//! the command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frame_module::harness::{
    cmd_module, cmd_quad, cmd_sweep, parse_methods, run_validation, CommandError, Fault, Format,
    HRange, ModuleArgs, Number, OracleGrid, Output, Profile, QuadArgs, QuadKind, RunOptions,
    Spacing, SweepArgs, ValidateOptions,
};

#[derive(Debug, Parser)]
#[command(
    name = "frame-module",
    version,
    about = "Conformal modules of stretched rectangular frames"
)]
struct Cli {
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format: csv, json or text.
    #[arg(long, global = true, default_value = "text")]
    format: Format,
    /// Relative tolerance for root finding and oracle linear solves.
    #[arg(long, global = true, value_name = "FLOAT")]
    tol: Option<f64>,
    /// Write the finest oracle potential as a whitespace-separated matrix.
    #[arg(long, global = true, value_name = "PATH")]
    dump_field: Option<PathBuf>,
    /// Report wall-clock time per estimate (makes output non-reproducible).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Coarsest oracle mesh spacing, e.g. 1/32 (default: chosen from the geometry).
    #[arg(long, value_name = "RATIONAL")]
    h0: Option<Number>,
    /// Number of oracle grids, each halving the previous spacing.
    #[arg(long, default_value_t = 3)]
    levels: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Module of one frame by one or more methods.
    Module {
        #[arg(long)]
        sigma: Number,
        #[arg(long = "H")]
        h: Number,
        /// Comma-separated: exact, bowman, leading, large-h, oracle.
        #[arg(long)]
        methods: String,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Modules over a list of σ values and a range of H.
    Sweep {
        /// Comma-separated σ values.
        #[arg(long, value_delimiter = ',', required = true)]
        sigma: Vec<Number>,
        /// H range as start:stop:count.
        #[arg(long = "H")]
        h: HRange,
        /// Spacing of the H range: linear or log.
        #[arg(long, default_value = "linear")]
        spacing: Spacing,
        #[arg(long)]
        methods: String,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Module of the slit quadrilateral Q_H or the slitted square G_n.
    Quad {
        /// slit or slitted-square.
        kind: QuadKind,
        #[arg(long)]
        c: Number,
        #[arg(long = "H")]
        h: Option<Number>,
        #[arg(long)]
        n: Option<u32>,
        /// Comma-separated: leading, oracle.
        #[arg(long, default_value = "leading")]
        methods: String,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run the acceptance checks.
    Validate {
        /// fast (analytic only) or full (adds oracle comparisons).
        #[arg(long, default_value = "fast")]
        profile: Profile,
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
}

fn oracle_grid(g: &GridArgs) -> Result<OracleGrid, CommandError> {
    let h0 = match &g.h0 {
        None => None,
        Some(n) => match n.exact() {
            Some(r) if n.value() > 0.0 => Some(r),
            _ => {
                return Err(CommandError::Usage(format!(
                    "--h0 must be a positive exact rational, got {n}"
                )))
            }
        },
    };
    if g.levels == 0 {
        return Err(CommandError::Usage("--levels must be at least 1".into()));
    }
    Ok(OracleGrid {
        h0,
        levels: g.levels,
    })
}

fn run(cli: &Cli) -> Result<Output, CommandError> {
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(CommandError::Usage(format!(
                "--tol must lie in (0, 1), got {t}"
            )));
        }
    }
    let opts = RunOptions {
        format: cli.format,
        tol: cli.tol,
        want_field: cli.dump_field.is_some(),
        timings: cli.timings,
    };
    match &cli.command {
        Command::Module {
            sigma,
            h,
            methods: m,
            grid,
        } => cmd_module(
            &ModuleArgs {
                sigma: *sigma,
                h: *h,
                methods: parse_methods(m)?,
                grid: oracle_grid(grid)?,
            },
            &opts,
        ),
        Command::Sweep {
            sigma,
            h,
            spacing,
            methods: m,
            grid,
        } => cmd_sweep(
            &SweepArgs {
                sigmas: sigma.clone(),
                h_range: *h,
                spacing: *spacing,
                methods: parse_methods(m)?,
                grid: oracle_grid(grid)?,
            },
            &opts,
        ),
        Command::Quad {
            kind,
            c,
            h,
            n,
            methods: m,
            grid,
        } => cmd_quad(
            &QuadArgs {
                kind: *kind,
                c: *c,
                h: *h,
                n: *n,
                methods: parse_methods(m)?,
                grid: oracle_grid(grid)?,
            },
            &opts,
        ),
        Command::Validate {
            profile,
            inject_fault,
        } => {
            if opts.want_field {
                return Err(CommandError::Usage(
                    "--dump-field is not supported for validate".into(),
                ));
            }
            let report = run_validation(ValidateOptions {
                profile: *profile,
                fault: *inject_fault,
                timings: cli.timings,
            });
            Ok(Output {
                body: report.render(cli.format),
                exit_code: report.exit_code(),
                field: None,
            })
        }
    }
}

fn write_to(
    path: Option<&PathBuf>,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> io::Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()
        }
        None => {
            let mut w = io::stdout().lock();
            f(&mut w)?;
            w.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("frame-module: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Err(e) = write_to(cli.out.as_ref(), |w| w.write_all(output.body.as_bytes())) {
        eprintln!("frame-module: cannot write report: {e}");
        return ExitCode::from(1);
    }
    if let (Some(path), Some(field)) = (&cli.dump_field, &output.field) {
        if let Err(e) = write_to(Some(path), |w| field.write_matrix(&mut *w)) {
            eprintln!("frame-module: cannot write field: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(output.exit_code as u8)
}
