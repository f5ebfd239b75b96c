//! Core library for mining temporal dietary patterns from meal-level food
//! logs, materializing them as an RDF personal health knowledge graph,
//! evaluating encoded dietary guidelines against that graph, and answering
//! competency questions with constraint-filtered recipe recommendation.
//!
//! The pipeline runs: food log → pattern mining ([`tss`]) → graph
//! construction ([`phkg`]) → guideline evaluation ([`reasoner`]) → queries
//! ([`query`]) and recommendations ([`recommend`]).

pub mod foodlog;
pub mod guidelines;
pub mod phkg;
pub mod query;
pub mod rdf;
pub mod reasoner;
pub mod recommend;
pub mod tss;
pub mod vocab;
