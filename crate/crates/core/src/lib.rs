//! Deep clustering that explains itself with tags.
//!
//! A small fully connected network is trained with a mutual-information
//! clustering loss. After each round of training, an integer program picks a
//! short, mostly non-overlapping set of tags for every cluster; the tags it
//! uses define a mask over tag space, and instances that look alike in the
//! masked tag space but are predicted differently are pulled together by a
//! pairwise KL term.
//!
//! The pieces are usable on their own:
//!
//! - [`data`]: CSV loading, mean imputation of missing tags, synthetic blobs
//! - [`net`] and [`loss`]: the network, its gradients and the training losses
//! - [`ilp`]: an exact binary integer program solver
//! - [`explain`]: cluster descriptions and the tag mask
//! - [`pairing`]: self-generated together constraints
//! - [`trainer`]: the alternating training loop
//! - [`metrics`] and [`ontology`]: evaluation and the cluster graph
//! - [`cli`]: the commands behind the `descluster` binary
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod cli;
pub mod data;
pub mod error;
pub mod explain;
pub mod ilp;
pub mod loss;
pub mod metrics;
pub mod net;
pub mod ontology;
pub mod pairing;
pub mod trainer;

pub use error::{Error, Result};
