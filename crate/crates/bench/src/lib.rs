//! Fixtures shared by the benchmarks.

use threepass_core::protocol::run_forced_session;
use threepass_core::{zoo, AbelianActionGroup, Point, Transcript};

/// Cyclic group of order `n` and one honest transcript over it. The secrets
/// are chosen so that `c2` sits as far from `c1` as the orbit tree allows.
pub fn cyclic_fixture(n: usize) -> (AbelianActionGroup, Transcript) {
    let group = zoo::cyclic(n);
    let g = group.realize(&[1]).expect("rank one");
    let h = group.realize(&[n as u64 - 1]).expect("rank one");
    let session = run_forced_session(&group, Point(0), g, h, &mut []).expect("honest session");
    (group, session.transcript)
}
