pub mod commands;
pub mod config;
pub mod dec;
pub mod error;
pub mod heisenberg;
pub mod hopf;
pub mod maps;
