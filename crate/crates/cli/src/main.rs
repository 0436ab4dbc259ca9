//! `corrtree` command-line tool.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use corrtree::dynamics::rolling_trees;
use corrtree::error::Error;
use corrtree::export::{export_dot, export_graphml, export_newick};
use corrtree::ingest::{load_panel, LoadOptions};
use corrtree::pipeline::{
    analyze_returns, run_pipeline, tree_json, write_artifacts, ExportFormat, PipelineConfig, Rebase,
};
use corrtree::synthgen::{generate, to_prices, FactorModelSpec};
use corrtree::transform::{apply, rebase};
use corrtree::ultrametric::dendrogram_from_tree;
use corrtree::{ReturnsMatrix, SignalKind, SpanningTree, WindowSpec};

const USAGE: u8 = 1;
const DATA: u8 = 2;
const INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "corrtree", version, about = "Correlation networks, spanning trees and dendrograms for panels of time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pearson correlation matrix as CSV
    Corr(MatrixArgs),
    /// Metric distance matrix as CSV
    Dist(MatrixArgs),
    /// Minimal spanning tree
    Mst(MstArgs),
    /// Single-linkage dendrogram (Newick) or its ultrametric matrix (CSV)
    Dendro(DendroArgs),
    /// Census of correlation signs and strength as one JSON line
    Census(InputArgs),
    /// Rolling-window trees and their edge survival
    Dynamics(DynamicsArgs),
    /// Synthetic factor-model panel
    Synth(SynthArgs),
    /// Full pipeline: every artifact into one directory
    Run(RunArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Input panel, delimited text with a header row
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Signal::LogReturn)]
    signal: Signal,
    /// Re-quote every series in units of this asset
    #[arg(long, value_name = "LABEL")]
    rebase: Option<String>,
    /// Label given to the old common unit after --rebase
    #[arg(long, default_value = "NUMERAIRE", requires = "rebase")]
    numeraire: String,
    /// Field delimiter, a single byte
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    delimiter: u8,
    /// Cell value treated as missing; repeat for several markers
    #[arg(long = "missing", value_name = "MARKER")]
    missing: Vec<String>,
    /// The first column is data, not timestamps
    #[arg(long)]
    no_time_column: bool,
    /// Minimum joint observations per pair
    #[arg(long, default_value_t = corrtree::DEFAULT_MIN_OVERLAP)]
    min_overlap: usize,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output file; standard output when omitted
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeFormat {
    Dot,
    Graphml,
    Json,
}

#[derive(Args)]
struct MstArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = TreeFormat::Dot)]
    format: TreeFormat,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DendroFormat {
    Newick,
    Csv,
}

#[derive(Args)]
struct DendroArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = DendroFormat::Newick)]
    format: DendroFormat,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WindowArgs {
    /// Window width in observations
    #[arg(long)]
    width: usize,
    /// Offset between consecutive window starts
    #[arg(long, default_value_t = 1)]
    step: usize,
}

#[derive(Args)]
struct DynamicsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    window: WindowArgs,
    /// Output directory
    #[arg(long, short)]
    out: PathBuf,
    /// Per-window tree formats, comma separated
    #[arg(long, value_delimiter = ',', default_values = ["dot"], value_parser = parse_format)]
    format: Vec<ExportFormat>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Prices,
    Returns,
}

#[derive(Args)]
struct SynthArgs {
    /// Group layout COUNTxSIZE, e.g. 3x10
    #[arg(long, default_value = "3x10", value_parser = parse_groups)]
    groups: (usize, usize),
    #[arg(long, default_value_t = 0.8)]
    loading: f64,
    #[arg(long, default_value_t = 0.6)]
    noise: f64,
    /// Loading on a market-wide factor shared by all groups
    #[arg(long, default_value_t = 0.0)]
    global: f64,
    #[arg(long, default_value_t = 1000)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write price levels (whose log returns are the model) or the returns
    #[arg(long, value_enum, default_value_t = Emit::Prices)]
    emit: Emit,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output directory
    #[arg(long, short)]
    out: PathBuf,
    /// Artifact formats, comma separated
    #[arg(long, value_delimiter = ',', default_values = ["dot", "graphml", "newick", "csv", "json"], value_parser = parse_format)]
    format: Vec<ExportFormat>,
    /// Also roll windows of this width
    #[arg(long)]
    width: Option<usize>,
    #[arg(long, default_value_t = 1, requires = "width")]
    step: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Signal {
    LogReturn,
    Raw,
    Rank,
    Zscore,
}

impl From<Signal> for SignalKind {
    fn from(s: Signal) -> Self {
        match s {
            Signal::LogReturn => SignalKind::LogReturn,
            Signal::Raw => SignalKind::Raw,
            Signal::Rank => SignalKind::Rank,
            Signal::Zscore => SignalKind::ZScore,
        }
    }
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "\\t" | "tab" => Ok(b'\t'),
        _ if s.len() == 1 => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be a single byte, got {s:?}")),
    }
}

fn parse_format(s: &str) -> Result<ExportFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_groups(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected COUNTxSIZE, got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_data_error() { DATA } else { USAGE },
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure {
        code: DATA,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

impl InputArgs {
    fn options(&self) -> LoadOptions {
        let mut opts = LoadOptions {
            delimiter: self.delimiter,
            time_column: !self.no_time_column,
            ..LoadOptions::default()
        };
        if !self.missing.is_empty() {
            opts.missing_markers = self.missing.clone();
        }
        opts
    }

    fn rebase(&self) -> Option<Rebase> {
        self.rebase.as_ref().map(|base| Rebase {
            base: base.clone(),
            numeraire: self.numeraire.clone(),
        })
    }

    fn returns(&self) -> Result<ReturnsMatrix, Error> {
        let panel = load_panel(&self.input, &self.options())?;
        let panel = match self.rebase() {
            Some(r) => rebase(&panel, &r.base, &r.numeraire)?,
            None => panel,
        };
        apply(&panel, self.signal.into())
    }
}

/// Text to a file, or to standard output when no path is given.
fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| io_failure(parent, e))?;
            }
            fs::write(path, text).map_err(|e| io_failure(path, e))
        }
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn tree_text(t: &SpanningTree, f: ExportFormat) -> Option<(&'static str, String)> {
    match f {
        ExportFormat::Dot => Some(("dot", export_dot(t))),
        ExportFormat::GraphMl => Some(("graphml", export_graphml(t))),
        ExportFormat::Newick => Some(("nwk", export_newick(&dendrogram_from_tree(t)) + "\n")),
        ExportFormat::Json => Some(("json", tree_json(t))),
        ExportFormat::Csv => None,
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Corr(a) => {
            let y = a.input.returns()?;
            let c = corrtree::correlation::pearson_matrix(&y, a.input.min_overlap)?;
            emit(a.out.as_deref(), &c.matrix().to_csv_string())
        }
        Command::Dist(a) => {
            let y = a.input.returns()?;
            let c = corrtree::correlation::pearson_matrix(&y, a.input.min_overlap)?;
            let d = corrtree::metric::to_distance(&c)?;
            emit(a.out.as_deref(), &d.matrix().to_csv_string())
        }
        Command::Mst(a) => {
            let an = analyze_returns(a.input.returns()?, None, a.input.min_overlap)?;
            let text = match a.format {
                TreeFormat::Dot => export_dot(&an.tree),
                TreeFormat::Graphml => export_graphml(&an.tree),
                TreeFormat::Json => tree_json(&an.tree),
            };
            emit(a.out.as_deref(), &text)
        }
        Command::Dendro(a) => {
            let an = analyze_returns(a.input.returns()?, None, a.input.min_overlap)?;
            let text = match a.format {
                DendroFormat::Newick => export_newick(&an.dendrogram) + "\n",
                DendroFormat::Csv => an.ultrametric.matrix().to_csv_string(),
            };
            emit(a.out.as_deref(), &text)
        }
        Command::Census(a) => {
            let y = a.returns()?;
            let c = corrtree::correlation::pearson_matrix(&y, a.min_overlap)?;
            emit(None, &(c.census().to_json() + "\n"))
        }
        Command::Dynamics(a) => {
            if a.input.no_time_column {
                return Err(Error::Config("rolling windows need a timestamp column".into()).into());
            }
            let w = WindowSpec::new(a.window.width, a.window.step)?;
            let seq = rolling_trees(&a.input.returns()?, w, a.input.min_overlap)?;
            let formats: BTreeSet<ExportFormat> = a.format.into_iter().collect();
            let mut files = Vec::new();
            for (k, tree) in seq.trees.iter().enumerate() {
                for f in &formats {
                    if let Some((ext, text)) = tree_text(tree, *f) {
                        files.push((PathBuf::from(format!("{k:04}.{ext}")), text));
                    }
                }
            }
            files.push(("survival.csv".into(), seq.survival_csv()));
            write_artifacts(&a.out, &files)?;
            Ok(())
        }
        Command::Synth(a) => {
            let (count, size) = a.groups;
            let mut spec = FactorModelSpec::uniform(count, size, a.loading, a.noise, a.length, a.seed);
            spec.global_loading = a.global;
            let y = generate(&spec)?;
            let panel = match a.emit {
                Emit::Prices => to_prices(&y, 100.0)?,
                Emit::Returns => {
                    let rows: Vec<Vec<f64>> = (0..y.n_obs()).map(|t| y.row(t).to_vec()).collect();
                    corrtree::TimeSeriesPanel::from_rows(y.assets().to_vec(), &rows)?
                }
            };
            let mut buf = Vec::new();
            panel.write_csv(&mut buf, &LoadOptions::default())?;
            emit(a.out.as_deref(), &String::from_utf8(buf).expect("csv output is utf-8"))
        }
        Command::Run(a) => {
            let mut cfg = PipelineConfig::new(&a.input.input, &a.out);
            cfg.load = a.input.options();
            cfg.signal = a.input.signal.into();
            cfg.rebase = a.input.rebase();
            cfg.min_overlap = a.input.min_overlap;
            cfg.formats = a.format.into_iter().collect();
            cfg.window = a.width.map(|w| WindowSpec::new(w, a.step)).transpose()?;
            let report = run_pipeline(&cfg)?;
            emit(None, &(report.census.to_json() + "\n"))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match std::panic::catch_unwind(|| execute(cli.command)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("corrtree: {}", f.message);
            ExitCode::from(f.code)
        }
        Err(_) => ExitCode::from(INTERNAL),
    }
}
