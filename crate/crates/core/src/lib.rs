pub mod chain;
pub mod config;
pub mod error;
pub mod gamma;
pub mod group;
pub mod linalg;
pub mod locus;

pub use chain::{build_chain, verify_chain, Chain, ChainCertificate, PhiValue, SlopeValue, VerifyOptions};
pub use error::{Error, Result};
pub use group::{GroupModel, ModelConfig, Point, RankProfile, Subgroup};
