//! Finite-index subgroups of the Hecke groups G_q.

pub mod algebra;
pub mod builder;
pub mod congruence;
pub mod builtins;
pub mod error;
pub mod farey;
pub mod invariants;
pub mod maps;
pub mod moebius;
pub mod oracle;
pub mod perm;
pub mod permrep;

pub use error::{Error, Infeasibility, Result};
