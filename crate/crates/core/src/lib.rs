//! Semidefinite embeddings of second-order conic problems.
//!
//! A SOCO problem over a product of Lorentz cones is rewritten as a
//! standard-form SDO problem on either side: the dual side keeps the slack
//! as a block arrow-head matrix, the primal side forces the primal matrix
//! into that shape with extra linear rows. Solutions move in both directions
//! through admissible maps of selectable rank, and optimal partitions are
//! routed between the two problem classes.
//!
//! ```
//! use conic_embed::{embed_dual, generator, partition::ConePartitionLabel as L, verify};
//!
//! let g = generator::generate_instance(&[3, 2], &[L::B, L::R], 2, 7).unwrap();
//! let sdo = embed_dual::build_dual_embedding(&g.problem);
//! let spec = "simzhao".parse().unwrap();
//! let mapped = embed_dual::map_solution_dual(&g.problem, &g.solution, &spec, 1e-8).unwrap();
//! let report = verify::check_admissibility(&g.problem, &g.solution, &sdo, &mapped, 1e-8).unwrap();
//! assert!(report.passed());
//! ```

pub mod embed_dual;
pub mod embed_primal;
pub mod error;
pub mod generator;
pub mod io;
pub mod linalg;
pub mod partition;
pub mod sdo;
pub mod soco;
pub mod verify;

pub use embed_dual::{RankChoice, RankSpec};
pub use error::{Error, Result};
pub use linalg::{Matrix, SymMatrix, DEFAULT_TOL, RANK_TOL};
pub use partition::{ConePartitionLabel, SdoPartition};
pub use sdo::{SdoProblem, SdoSolution, Side};
pub use soco::{ConePosition, SocoProblem, SocoSolution};
