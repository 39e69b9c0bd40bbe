pub mod config;
pub mod discrete_ops;
pub mod domains;
pub mod experiments;
pub mod generators;
pub mod mesh;
pub mod optimizer;
mod parallel;
pub mod properties;
