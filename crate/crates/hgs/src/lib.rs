//! IO, CLI, and orchestration companion to `hgs-core`.
//!
//! This crate carries everything the algorithmic core keeps out:
//! sandboxed execution of candidate programs against their unit tests
//! ([`sandbox`]), step-level reward dataset construction ([`dataset`]),
//! HTTP clients for remote generation and scoring endpoints ([`remote`]),
//! benchmark orchestration with answer extraction and grading ([`bench`]),
//! file formats ([`files`]), trace rendering ([`render`]), and the `hgs`
//! command-line tool ([`cli`]).

pub mod bench;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod files;
pub mod remote;
pub mod render;
pub mod sandbox;
pub mod util;
