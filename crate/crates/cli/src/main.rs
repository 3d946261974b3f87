mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{FileConfig, Format, RunConfig};
use report::{write_artifact, Report};

#[derive(Parser)]
#[command(name = "fcpi", version, about = "Presentation and braid-monodromy pipelines for the F_C singular locus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML file of run settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports and artifacts.
    #[arg(long, global = true, env = "FCPI_OUT")]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    root_tol: Option<f64>,
    #[arg(long, global = true)]
    residual_tol: Option<f64>,
    #[arg(long, global = true)]
    match_tol: Option<f64>,
    #[arg(long, global = true)]
    consequence_depth: Option<usize>,
    #[arg(long, global = true)]
    conjugator_length: Option<usize>,
    #[arg(long, global = true)]
    search_nodes: Option<usize>,
    #[arg(long, global = true)]
    hom_budget: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print a catalog presentation.
    Present {
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Expand the defining polynomial of the singular locus.
    FcPoly {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Count the conjugate-commutator relators.
    RijCount {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Derive the covering presentation by Reidemeister-Schreier and Tietze.
    CoverDerive {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Isolate the critical values of the plane-cut pencil.
    MonodromyCriticals,
    /// Braid monodromy events and van Kampen relations.
    MonodromyRelations {
        /// Also write the tracked fiber around this critical value as CSV.
        #[arg(long)]
        trajectory: Option<usize>,
    },
    /// Full monodromy pipeline checked against the reference table and pi1-x3.
    MonodromyVerify,
    /// Compare two presentations (catalog labels or JSON files).
    Equiv {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Every check of the suite.
    VerifyAll,
    /// Replay the Tietze trace stored in a cover-derive report.
    Replay {
        #[arg(long)]
        report: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Present { .. } => "present",
            Command::FcPoly { .. } => "fc-poly",
            Command::RijCount { .. } => "rij-count",
            Command::CoverDerive { .. } => "cover-derive",
            Command::MonodromyCriticals => "monodromy-criticals",
            Command::MonodromyRelations { .. } => "monodromy-relations",
            Command::MonodromyVerify => "monodromy-verify",
            Command::Equiv { .. } => "equiv",
            Command::VerifyAll => "verify-all",
            Command::Replay { .. } => "replay",
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::defaults(cli.command.name());
    if let Some(path) = &cli.common.config {
        cfg.merge(FileConfig::load(path)?);
    }
    let c = &cli.common;
    let (n, label) = match &cli.command {
        Command::Present { label, n } => (*n, label.clone()),
        Command::FcPoly { n } | Command::RijCount { n } | Command::CoverDerive { n } => (*n, None),
        _ => (None, None),
    };
    cfg.merge(FileConfig {
        n,
        label,
        root_tol: c.root_tol,
        residual_tol: c.residual_tol,
        match_tol: c.match_tol,
        consequence_depth: c.consequence_depth,
        conjugator_length: c.conjugator_length,
        search_nodes: c.search_nodes,
        hom_budget: c.hom_budget,
        out_dir: c.out_dir.clone(),
        format: c.format,
        jobs: c.jobs,
    });
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<Report> {
    match &cli.command {
        Command::Present { .. } => commands::present(cfg),
        Command::FcPoly { .. } => commands::fc_poly(cfg),
        Command::RijCount { .. } => commands::rij_count(cfg),
        Command::CoverDerive { .. } => commands::cover_derive(cfg),
        Command::MonodromyCriticals => commands::monodromy_criticals(cfg),
        Command::MonodromyRelations { trajectory } => commands::monodromy_relations(cfg, *trajectory),
        Command::MonodromyVerify => commands::monodromy_verify(cfg),
        Command::Equiv { left, right } => commands::equiv(cfg, left, right),
        Command::VerifyAll => commands::verify_all(cfg),
        Command::Replay { report } => commands::replay(cfg, report),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(&cli).and_then(|cfg| {
        if let Some(j) = cfg.jobs {
            rayon::ThreadPoolBuilder::new().num_threads(j).build_global()?;
        }
        let report = run(&cli, &cfg)?;
        let rendered = report.render(cfg.format);
        if let Some(dir) = &cfg.out_dir {
            let suffix = cfg.n.map(|n| format!("-{n}")).unwrap_or_default();
            let ext = match cfg.format {
                Format::Json => "json",
                Format::Text => "txt",
            };
            write_artifact(dir, &format!("{}{suffix}.{ext}", cfg.command), &rendered)?;
        }
        print!("{rendered}");
        Ok(report.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
