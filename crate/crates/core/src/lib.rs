//! Retrieval-augmented generation of school-based speech-language case files.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`knowledge_base`]: chunking, embedding and exact cosine retrieval
//! - [`case_model`]: the case-file wire format, disorder taxonomy and validators
//! - [`prompt_engine`]: premium/focused templates and placeholder rendering
//! - [`llm_gateway`]: provider adapters, retry policy and JSON extraction
//! - [`orchestrator`]: single, batch and group generation modes
//! - [`quality`]: deterministic rubric scorers, LLM judge and aggregation
//! - [`transcript`]: de-identification, disfluency and language metrics
//! - [`persistence`]: SQLite-backed case, feedback and error-tag store

pub mod case_model;
pub mod knowledge_base;
pub mod llm_gateway;
pub mod orchestrator;
pub mod persistence;
pub mod prompt_engine;
pub mod quality;
pub mod transcript;

mod util;

pub use case_model::{
    AnnualGoal, AssessmentResult, CaseFile, DisorderCategory, DisorderType, GradeLevel,
    SessionNote, Severity, ValidationReport,
};
