//! Regenerating codes for storage networks whose links form an arbitrary
//! connected graph.

pub mod channel;
pub mod codes;
pub mod engine;
pub mod error;
pub mod field;
pub mod matrix;
pub mod multilinear;
pub mod retrieval;
pub mod topology;

pub use codes::{CodeParams, Codeword, Family, RegeneratingCode, RepairSession};
pub use error::{Error, Result};
pub use field::{Field, Symbol, DEFAULT_MODULUS};
pub use matrix::Matrix;
pub use topology::{build_repair_tree, select_helpers, Graph, RepairTree};
pub use channel::{resilient_ip_transmit, EdgeChannel, RsCodec};
pub use engine::{simulate_repair, BandwidthReport, Rational, Strategy};
pub use retrieval::{plan_retrieval, select_retrieval_set, RetrievalPlan};
