//! Three-pass key transport over public finite Abelian permutation groups,
//! together with the passive eavesdropper that recovers the key from the
//! three public messages alone.
//!
//! Groups are given by pairwise-commuting generator permutations
//! ([`AbelianActionGroup`]); elements are exponent vectors over them
//! ([`GroupElement`]). The [`protocol`] module runs Alice and Bob, the
//! [`attack`] module runs Eve, and [`statcheck`] measures what a single
//! message leaks against what the whole transcript leaks.

pub mod attack;
pub mod error;
pub mod group;
pub mod perm;
pub mod protocol;
pub mod schreier;
pub mod statcheck;
pub mod verify;
pub mod zoo;

pub use attack::{eve_find_h_prime, eve_recover_key, AttackCost, AttackMethod, EveResult};
pub use error::{Error, Result};
pub use group::{parse_group, AbelianActionGroup, GroupElement, KernelReport, PermSet, DEFAULT_CAP};
pub use perm::{Perm, Point};
pub use protocol::{KeyDistribution, Session, SessionSecrets, Transcript};
pub use schreier::{SchreierEdge, SchreierTable};
