//! End-to-end run: load, transform, correlate, build the tree and dendrogram,
//! optionally roll windows, then write the requested artifacts.
//!
//! All artifacts are rendered in memory first; nothing touches the output
//! directory unless every step succeeded.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::correlation::{pearson_matrix, CorrelationCensus, CorrelationMatrix};
use crate::dynamics::{rolling_trees, TreeSequence, WindowSpec};
use crate::error::{Error, Result};
use crate::export::{export_dot, export_graphml, export_newick};
use crate::ingest::{load_panel, LoadOptions, TimeSeriesPanel};
use crate::metric::{to_distance, DistanceMatrix};
use crate::mst::{build_mst, SpanningTree};
use crate::transform::{apply, rebase, ReturnsMatrix, SignalKind};
use crate::ultrametric::{dendrogram_from_tree, subdominant_ultrametric, Dendrogram, UltrametricMatrix};
use crate::DEFAULT_MIN_OVERLAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExportFormat {
    Dot,
    GraphMl,
    Newick,
    Csv,
    Json,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 5] = [
        ExportFormat::Dot,
        ExportFormat::GraphMl,
        ExportFormat::Newick,
        ExportFormat::Csv,
        ExportFormat::Json,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExportFormat::Dot => "dot",
            ExportFormat::GraphMl => "graphml",
            ExportFormat::Newick => "newick",
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExportFormat::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown export format {s:?}")))
    }
}

/// Rebase request: quote everything in `base`; the panel's common numeraire
/// is called `numeraire`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rebase {
    pub base: String,
    pub numeraire: String,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub load: LoadOptions,
    pub signal: SignalKind,
    pub rebase: Option<Rebase>,
    pub window: Option<WindowSpec>,
    pub min_overlap: usize,
    pub out_dir: PathBuf,
    pub formats: BTreeSet<ExportFormat>,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            input: input.into(),
            load: LoadOptions::default(),
            signal: SignalKind::LogReturn,
            rebase: None,
            window: None,
            min_overlap: DEFAULT_MIN_OVERLAP,
            out_dir: out_dir.into(),
            formats: ExportFormat::ALL.into_iter().collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.formats.is_empty() {
            return Err(Error::Config("at least one export format is required".into()));
        }
        if self.window.is_some() && !self.load.time_column {
            return Err(Error::Config(
                "rolling windows need time-ordered input with a timestamp column".into(),
            ));
        }
        Ok(())
    }
}

/// Everything computed by one run.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub returns: ReturnsMatrix,
    pub correlation: CorrelationMatrix,
    pub census: CorrelationCensus,
    pub distance: DistanceMatrix,
    pub tree: SpanningTree,
    pub dendrogram: Dendrogram,
    pub ultrametric: UltrametricMatrix,
    pub dynamics: Option<TreeSequence>,
}

pub fn analyze_panel(panel: &TimeSeriesPanel, cfg: &PipelineConfig) -> Result<Analysis> {
    cfg.validate()?;
    let rebased;
    let panel = match &cfg.rebase {
        Some(r) => {
            rebased = rebase(panel, &r.base, &r.numeraire)?;
            &rebased
        }
        None => panel,
    };
    let returns = apply(panel, cfg.signal)?;
    analyze_returns(returns, cfg.window, cfg.min_overlap)
}

pub fn analyze_returns(
    returns: ReturnsMatrix,
    window: Option<WindowSpec>,
    min_overlap: usize,
) -> Result<Analysis> {
    let correlation = pearson_matrix(&returns, min_overlap)?;
    let census = correlation.census();
    let distance = to_distance(&correlation)?;
    let tree = build_mst(&distance)?;
    let dendrogram = dendrogram_from_tree(&tree);
    let ultrametric = subdominant_ultrametric(&tree);
    let dynamics = window
        .map(|w| rolling_trees(&returns, w, min_overlap))
        .transpose()?;
    Ok(Analysis {
        returns,
        correlation,
        census,
        distance,
        tree,
        dendrogram,
        ultrametric,
        dynamics,
    })
}

#[derive(Serialize)]
struct JsonEdge<'a> {
    a: &'a str,
    b: &'a str,
    weight: f64,
    order: usize,
}

#[derive(Serialize)]
struct JsonTree<'a> {
    assets: &'a [String],
    edges: Vec<JsonEdge<'a>>,
}

pub fn tree_json(t: &SpanningTree) -> String {
    let doc = JsonTree {
        assets: t.labels(),
        edges: t
            .edges()
            .iter()
            .map(|e| {
                let (a, b) = t.edge_labels(e);
                JsonEdge {
                    a,
                    b,
                    weight: e.weight,
                    order: e.order,
                }
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("tree serializes") + "\n"
}

/// Artifact files as `(relative path, contents)`, in a fixed order.
pub fn render(analysis: &Analysis, formats: &BTreeSet<ExportFormat>) -> Vec<(PathBuf, String)> {
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    for f in formats {
        match f {
            ExportFormat::Dot => files.push(("mst.dot".into(), export_dot(&analysis.tree))),
            ExportFormat::GraphMl => {
                files.push(("mst.graphml".into(), export_graphml(&analysis.tree)))
            }
            ExportFormat::Newick => files.push((
                "dendrogram.nwk".into(),
                export_newick(&analysis.dendrogram) + "\n",
            )),
            ExportFormat::Csv => {
                files.push(("correlation.csv".into(), analysis.correlation.matrix().to_csv_string()));
                files.push(("distance.csv".into(), analysis.distance.matrix().to_csv_string()));
                files.push(("ultrametric.csv".into(), analysis.ultrametric.matrix().to_csv_string()));
            }
            ExportFormat::Json => {
                files.push(("census.json".into(), analysis.census.to_json() + "\n"));
                files.push(("mst.json".into(), tree_json(&analysis.tree)));
            }
        }
    }
    if let Some(seq) = &analysis.dynamics {
        let dir = Path::new("windows");
        for (k, tree) in seq.trees.iter().enumerate() {
            for f in formats {
                match f {
                    ExportFormat::Dot => files.push((dir.join(format!("{k:04}.dot")), export_dot(tree))),
                    ExportFormat::GraphMl => {
                        files.push((dir.join(format!("{k:04}.graphml")), export_graphml(tree)))
                    }
                    ExportFormat::Newick => files.push((
                        dir.join(format!("{k:04}.nwk")),
                        export_newick(&dendrogram_from_tree(tree)) + "\n",
                    )),
                    ExportFormat::Json => {
                        files.push((dir.join(format!("{k:04}.json")), tree_json(tree)))
                    }
                    ExportFormat::Csv => {}
                }
            }
        }
        files.push(("survival.csv".into(), seq.survival_csv()));
    }
    files
}

pub fn write_artifacts(out_dir: &Path, files: &[(PathBuf, String)]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(files.len());
    for (rel, body) in files {
        let path = out_dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub census: CorrelationCensus,
    pub written: Vec<PathBuf>,
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport> {
    cfg.validate()?;
    let panel = load_panel(&cfg.input, &cfg.load)?;
    let analysis = analyze_panel(&panel, cfg)?;
    let files = render(&analysis, &cfg.formats);
    let written = write_artifacts(&cfg.out_dir, &files)?;
    Ok(PipelineReport {
        census: analysis.census,
        written,
    })
}
