//! `supergeom`: catalogs of spinor bilinear forms, Poincaré super algebra
//! dumps and Killing-field verification runs.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check fails,
//! 2 on usage or I/O errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Failure, Report};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "supergeom", version, about = "Spinor supergeometry checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan signatures for non-degenerate suitable forms.
    Catalog {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        m_max: Option<usize>,
        /// -1, 1 or auto (both).
        #[arg(long, allow_hyphen_values = true)]
        convention: Option<String>,
        /// real, complex or auto (both).
        #[arg(long)]
        module: Option<String>,
    },
    /// Dump the Poincaré super algebra of one signature.
    Algebra {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        rep: RepArgs,
        /// Index into the suitable forms of the signature.
        #[arg(long)]
        form: Option<usize>,
    },
    /// Check that X_s is a Killing field exactly when s is a twistor spinor.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        rep: RepArgs,
        /// flat or sphere.
        #[arg(long)]
        space: Option<String>,
        /// Sphere dimension.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        radius: Option<f64>,
        /// parallel, flat_twistor, sphere_killing or random.
        #[arg(long)]
        field: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Sign of the Killing number for sphere_killing.
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<f64>,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        extent: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        form: Option<usize>,
    },
    /// Dimension of equivariant maps ∨²S → V against the suitable form count.
    EquivariantDim {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        rep: RepArgs,
    },
}

#[derive(Args)]
struct Common {
    /// JSON file with default settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// json or csv (catalog only).
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct RepArgs {
    /// k,l
    #[arg(long)]
    signature: Option<String>,
    /// -1 or 1; auto selects -1.
    #[arg(long, allow_hyphen_values = true)]
    convention: Option<String>,
    /// real or complex; auto selects real.
    #[arg(long)]
    module: Option<String>,
}

impl Common {
    fn base(&self) -> anyhow::Result<RunConfig> {
        let file = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        Ok(file)
    }

    fn flags(&self) -> RunConfig {
        RunConfig {
            output: self.output.clone(),
            format: self.format.clone(),
            ..Default::default()
        }
    }
}

impl RepArgs {
    fn flags(&self, base: RunConfig) -> RunConfig {
        RunConfig {
            signature: self.signature.clone(),
            convention: self.convention.clone(),
            module: self.module.clone(),
            ..base
        }
    }
}

type Runner = fn(&RunConfig) -> Result<Report, Failure>;

fn resolve(command: Command) -> anyhow::Result<(RunConfig, Runner)> {
    let (common, flags, run): (Common, RunConfig, Runner) = match command {
        Command::Catalog { common, m_max, convention, module } => {
            let flags = RunConfig { m_max, convention, module, ..common.flags() };
            (common, flags, commands::catalog)
        }
        Command::Algebra { common, rep, form } => {
            let flags = rep.flags(RunConfig { form, ..common.flags() });
            (common, flags, commands::algebra)
        }
        Command::EquivariantDim { common, rep } => {
            let flags = rep.flags(common.flags());
            (common, flags, commands::equivariant_dim)
        }
        Command::Verify {
            common,
            rep,
            space,
            dim,
            radius,
            field,
            seed,
            sign,
            resolution,
            extent,
            h,
            tol,
            form,
        } => {
            let flags = rep.flags(RunConfig {
                space,
                dim,
                radius,
                field,
                seed,
                sign,
                resolution,
                extent,
                h,
                tol,
                form,
                ..common.flags()
            });
            (common, flags, commands::verify)
        }
    };
    Ok((common.base()?.overlay(flags), run))
}

fn write_report(cfg: &RunConfig, report: &Report) -> anyhow::Result<()> {
    match &cfg.output {
        Some(path) => std::fs::write(path, &report.body)
            .map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display())),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(report.body.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, run) = match resolve(cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(report) => {
            if let Err(e) = write_report(&cfg, &report) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed (see report)");
                ExitCode::from(1)
            }
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
