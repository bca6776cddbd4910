pub mod benchmark;
pub mod cli;
pub mod data;
pub mod generators;
pub mod molgraph;
pub mod orchestrator;
pub mod scoring;
