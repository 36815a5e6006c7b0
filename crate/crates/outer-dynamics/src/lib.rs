//! Combinatorial machinery of exponentially growing outer automorphisms of
//! free groups, realized as self-maps of marked graphs.
//!
//! The crate provides:
//!
//! * marked graphs, reduced edge paths and circuits ([`graph`]);
//! * Stallings-style core graphs for finitely generated subgroups,
//!   peripherality and intersections ([`cores`]);
//! * graph self-maps with derived strata, transition matrices,
//!   Perron-Frobenius data, turn legality and structural validation
//!   ([`graph_map`]);
//! * Nielsen path search, the polynomially growing subgraph and its finite
//!   Nielsen family, growth classification of circuits ([`nielsen`]);
//! * exponential lengths, splittings and goodness bounds ([`lengths`]);
//! * occurrence-count currents and their linear functionals ([`currents`]);
//! * standalone substitution dynamics with letter/word frequency limits
//!   ([`substitution`]);
//! * attracting currents, stretch factors and North-South iteration
//!   experiments ([`dynamics`]);
//! * JSON/CSV file formats and the bundled example corpus ([`formats`],
//!   [`corpus`]).

pub mod cores;
pub mod corpus;
pub mod currents;
pub mod dynamics;
pub mod error;
pub mod formats;
pub mod graph;
pub mod graph_map;
pub mod lengths;
pub mod matrix;
pub mod nielsen;
pub mod substitution;

pub use error::{Error, Result};
pub use graph::{Circuit, EdgePath, MarkedGraph, OrientedEdge};
pub use graph_map::{GraphMap, Stratum, StratumKind, Turn, TurnLegality};
pub use nielsen::{Analysis, Growth, InpRecord, PgStructure};
