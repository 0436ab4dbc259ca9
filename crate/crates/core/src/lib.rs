//! Correlation-based hierarchical taxonomies for panels of time series.
//!
//! The pipeline runs signal panel → transformed returns → Pearson correlation
//! matrix → metric distance `d = sqrt(2 (1 - rho))` → minimal spanning tree →
//! subdominant ultrametric / single-linkage dendrogram. Rolling windows over
//! the same pipeline give a sequence of trees whose edge survival measures how
//! the taxonomy changes in time.
//!
//! ```
//! use corrtree::{correlation, metric, mst, transform, ReturnsMatrix, SignalKind};
//!
//! let y = ReturnsMatrix::from_columns(
//!     vec!["A".into(), "B".into(), "C".into()],
//!     &[vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 4.0, 3.0], vec![4.0, 1.0, 3.0, 2.0]],
//!     SignalKind::Raw,
//! )
//! .unwrap();
//! let rho = correlation::pearson_matrix(&y, 3).unwrap();
//! let d = metric::to_distance(&rho).unwrap();
//! let tree = mst::build_mst(&d).unwrap();
//! assert_eq!(tree.edges().len(), 2);
//! # let _ = transform::log_returns;
//! ```

pub mod correlation;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod ingest;
pub mod matrix;
pub mod metric;
pub mod mst;
pub mod pipeline;
pub mod synthgen;
pub mod transform;
pub mod ultrametric;
mod union_find;

pub use correlation::{CorrelationCensus, CorrelationMatrix};
pub use dynamics::{TreeSequence, WindowSpec};
pub use error::{Error, Result};
pub use ingest::{LoadOptions, Timestamp, TimeSeriesPanel};
pub use matrix::SymMatrix;
pub use metric::{AxiomViolation, DistanceMatrix};
pub use mst::{SpanningTree, TreeEdge};
pub use synthgen::FactorModelSpec;
pub use transform::{ReturnsMatrix, SignalKind};
pub use ultrametric::{Dendrogram, Merge, UltrametricMatrix};

/// Default minimum number of jointly present observations per asset pair.
pub const DEFAULT_MIN_OVERLAP: usize = 3;
