//! HTTP API and command-line front end for the case-file engine.

pub mod api;
pub mod app;
pub mod config;
pub mod error;
pub mod export;
pub mod jobs;
