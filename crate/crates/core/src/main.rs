use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xfmr_fem::cli::{self, compare_reports, read_report, write_comparison, RunConfig, ScenarioSource};
use xfmr_fem::extraction::{MeshOptions, Study};
use xfmr_fem::geometry::PRESETS;
use xfmr_fem::materials::MaterialCatalog;
use xfmr_fem::mesh::write_vtk;

#[derive(Parser)]
#[command(version, about = "2D finite-element extraction of transformer parasitics")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the studies listed in a configuration file.
    Run {
        config: PathBuf,
        /// Overrides the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Side-by-side comparison of two reports with a/b ratios.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Pair rows by position instead of by scenario id.
        #[arg(long)]
        by_order: bool,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in structures.
    Presets,
    /// Mesh a scenario and write it as legacy VTK.
    ExportMesh {
        /// Preset id, `ID:ARRANGEMENT` or scenario file.
        scenario: String,
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        h_mm: f64,
        #[arg(long, default_value_t = 1.3)]
        grading: f64,
        #[arg(long, default_value_t = 0)]
        refinements: u32,
    },
}

fn run(config: PathBuf, out: Option<PathBuf>) -> xfmr_fem::Result<i32> {
    let mut cfg = RunConfig::load(&config)?;
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    let outcome = cli::run(&cfg)?;
    for (id, e) in outcome.errors() {
        eprintln!("error: {id}: {e}");
    }
    for (id, (material, margin)) in outcome.dielectric_failures() {
        eprintln!("dielectric failure: {id}: {material} margin {margin:.3}");
    }
    let n = outcome.rows().len();
    eprintln!(
        "wrote {n} report rows to {}",
        cfg.output_dir.join("report.csv").display()
    );
    Ok(outcome.exit_code())
}

fn compare(a: PathBuf, b: PathBuf, by_order: bool, out: Option<PathBuf>) -> xfmr_fem::Result<i32> {
    let ra = read_report(File::open(&a)?)?;
    let rb = read_report(File::open(&b)?)?;
    let rows = compare_reports(&ra, &rb, by_order)?;
    match out {
        Some(p) => write_comparison(&rows, BufWriter::new(File::create(p)?))?,
        None => write_comparison(&rows, io::stdout().lock())?,
    }
    Ok(cli::EXIT_OK)
}

fn presets() -> xfmr_fem::Result<i32> {
    let mut o = io::stdout().lock();
    for (id, what) in PRESETS {
        writeln!(o, "{id}\t{what}")?;
    }
    Ok(cli::EXIT_OK)
}

fn export_mesh(scenario: &str, out: PathBuf, h_mm: f64, grading: f64, refinements: u32) -> xfmr_fem::Result<i32> {
    let s = ScenarioSource::parse(scenario, &std::env::current_dir()?).load()?;
    let opts = MeshOptions {
        h: h_mm * 1e-3,
        grading,
        refinements,
    };
    let study = Study::new(&s, &MaterialCatalog::builtin(), opts)?;
    let mut w = BufWriter::new(File::create(&out)?);
    write_vtk(&study.mesh, &s.id, &[], &[], &mut w)?;
    w.flush()?;
    eprintln!(
        "{}: {} nodes, {} elements -> {}",
        s.id,
        study.mesh.nodes.len(),
        study.mesh.elements.len(),
        out.display()
    );
    Ok(cli::EXIT_OK)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match args.command {
        Command::Run { config, out } => run(config, out),
        Command::Compare { a, b, by_order, out } => compare(a, b, by_order, out),
        Command::Presets => presets(),
        Command::ExportMesh {
            scenario,
            out,
            h_mm,
            grading,
            refinements,
        } => export_mesh(&scenario, out, h_mm, grading, refinements),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::EXIT_ERROR as u8)
        }
    }
}
