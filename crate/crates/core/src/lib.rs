//! Polynomial-delay enumeration of homomorphisms between finite relational
//! structures.

pub mod cli;
pub mod cqe;
pub mod delay;
pub mod endoseq;
pub mod error;
pub mod structures;
pub mod extension;
pub mod kcore;
pub mod oracle;
pub mod treewidth;

pub use error::{Error, Result};
