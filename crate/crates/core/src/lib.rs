//! Markoff graphs over prime fields.
//!
//! The vertices of 𝒢_p are the nonzero solutions of
//! `x1² + x2² + x3² = 3·x1·x2·x3` over F_p, and each vertex is joined to
//! its three Vieta images. This crate enumerates 𝒢_p, decomposes it into
//! connected components, checks that every component size is divisible by
//! p together with the Penner-coordinate identities behind that fact, and
//! lifts vertices to integer Markoff triples.
//!
//! ```
//! use markoff::{MarkoffGraph, Prime};
//!
//! let graph = MarkoffGraph::build(Prime::new(7).unwrap()).unwrap();
//! assert_eq!(graph.vertex_count(), 28);
//! assert!(graph.is_connected() && graph.chen_ok_all());
//! ```

pub mod census;
pub mod dot;
pub mod field;
pub mod graph;
pub mod penner;
pub mod surface;
pub mod verify;

pub use census::{CensusConfig, CensusRecord, CensusSummary, OutputFormat};
pub use field::{is_prime, FieldElement, Prime};
pub use graph::{ComponentSummary, IntegerTriple, Lift, MarkoffGraph, MovePath};
pub use penner::{chen_verdict, penner_map, ComponentSums, PennerTriple};
pub use surface::{MarkoffTriple, VertexIndex, VietaMove};
