//! File formats, the λ cache, verification suites and certificate reports
//! built on [`wachfam_core`].

pub mod cache;
pub mod config;
pub mod error;
pub mod format;
pub mod report;
pub mod suites;

pub use cache::LambdaCache;
pub use config::{build_family, parse_alpha, OutputFormat, RunConfig};
pub use error::{AppError, Result};
pub use format::{FamilyFile, LoadedFamily, ProfileHeader};
pub use report::{Certificate, Report};
pub use wachfam_core as core_api;
