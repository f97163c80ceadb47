//! Catch-test generation pipeline: corpus model, mutation operators, test
//! generation, workflows, assessors, statistics and report assembly.

pub mod assessors;
pub mod config;
pub mod corpus;
pub mod generation;
pub mod mutation;
pub mod pipeline;
pub mod report;
pub mod runner;
pub mod stats;
pub mod workflows;
