//! Eve, the passive eavesdropper.
//!
//! Any element `h'` with `c1∘h' = c2` differs from Bob's `h` by an element of
//! the stabilizer of `c1`, and because the group is Abelian that difference
//! washes out: `c3∘h'⁻¹ = k`. Finding one such `h'` only takes a BFS over the
//! orbit of `c1`, so the cost is linear in the number of points whatever the
//! order of the group.

use crate::error::{Error, Result};
use crate::group::{AbelianActionGroup, GroupElement, PermSet};
use crate::perm::{Perm, Point};
use crate::protocol::Transcript;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackMethod {
    SchreierWord,
    BruteForce,
}

#[derive(Debug, Clone)]
pub struct EveResult {
    pub h_prime: GroupElement,
    pub recovered_k: Point,
    pub method: AttackMethod,
}

/// Work done by one Schreier-word attack, in point images evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AttackCost {
    /// Generator images evaluated while building the orbit tree.
    pub generator_applications: usize,
    /// Edges walked from `c2` back to `c1`.
    pub path_steps: usize,
    /// Images computed while realizing `h'`, inverting it and applying it.
    pub images_computed: usize,
}

impl AttackCost {
    pub fn total(&self) -> usize {
        self.generator_applications + self.path_steps + self.images_computed
    }
}

/// Some element sending `c1` to `c2`, read off the orbit tree of `c1`.
pub fn eve_find_h_prime(group: &AbelianActionGroup, c1: Point, c2: Point) -> Result<GroupElement> {
    eve_find_h_prime_counted(group, c1, c2).map(|(h, _)| h)
}

pub fn eve_find_h_prime_counted(
    group: &AbelianActionGroup,
    c1: Point,
    c2: Point,
) -> Result<(GroupElement, AttackCost)> {
    group.check_point(c1)?;
    group.check_point(c2)?;
    let table = group.orbit(c1)?;
    let (word, path_steps) = table.transversal_word_counted(c2)?;
    let h_prime = group.realize(&word)?;
    // pow walks the cycles and writes the images, compose writes them again.
    let realized_gens = word.iter().filter(|&&e| e != 0).count();
    let cost = AttackCost {
        generator_applications: table.generator_applications(),
        path_steps,
        images_computed: 3 * group.degree() * realized_gens,
    };
    Ok((h_prime, cost))
}

fn check_transcript(group: &AbelianActionGroup, t: &Transcript) -> Result<()> {
    if t.group_id != group.id() {
        return Err(Error::GroupMismatch {
            expected: group.id().to_string(),
            found: t.group_id.clone(),
        });
    }
    group.check_point(t.c3)
}

/// Recovers the key from the public transcript alone: `k = c3∘h'⁻¹`.
pub fn eve_recover_key(group: &AbelianActionGroup, t: &Transcript) -> Result<EveResult> {
    eve_recover_key_counted(group, t).map(|(r, _)| r)
}

pub fn eve_recover_key_counted(
    group: &AbelianActionGroup,
    t: &Transcript,
) -> Result<(EveResult, AttackCost)> {
    check_transcript(group, t)?;
    let (h_prime, mut cost) = eve_find_h_prime_counted(group, t.c1, t.c2)?;
    let recovered_k = h_prime.realized().inverse().apply(t.c3)?;
    cost.images_computed += group.degree() + 1;
    Ok((
        EveResult {
            h_prime,
            recovered_k,
            method: AttackMethod::SchreierWord,
        },
        cost,
    ))
}

/// Same recovery, but `h'` is the first exponent vector (in counting order)
/// that sends `c1` to `c2`. Exponential in the rank; an oracle only.
pub fn eve_recover_key_brute_force(
    group: &AbelianActionGroup,
    t: &Transcript,
    cap: usize,
) -> Result<EveResult> {
    check_transcript(group, t)?;
    group.check_point(t.c1)?;
    group.check_point(t.c2)?;
    for e in group.exponent_vectors(cap)? {
        let candidate = group.realize(&e)?;
        if candidate.realized().images()[t.c1.0] == t.c2.0 {
            let recovered_k = candidate.realized().inverse().apply(t.c3)?;
            return Ok(EveResult {
                h_prime: candidate,
                recovered_k,
                method: AttackMethod::BruteForce,
            });
        }
    }
    Err(Error::NotInOrbit {
        point: t.c2.0,
        base: t.c1.0,
    })
}

/// All realized permutations sending `a` to `b`.
pub fn brute_force_senders(
    group: &AbelianActionGroup,
    a: Point,
    b: Point,
    cap: usize,
) -> Result<PermSet> {
    group.check_point(a)?;
    group.check_point(b)?;
    Ok(group
        .enumerate_elements(cap)?
        .filter(|p| p.images()[a.0] == b.0))
}

/// Number of exponent vectors sending `a` to `b`.
pub fn abstract_sender_count(
    group: &AbelianActionGroup,
    a: Point,
    b: Point,
    cap: usize,
) -> Result<u64> {
    group.check_point(a)?;
    group.check_point(b)?;
    group.count_abstract(cap, |p| p.images()[a.0] == b.0)
}

/// The pieces of the coset argument for one pair `(a, b)`.
#[derive(Debug, Clone)]
pub struct CosetReport {
    pub senders: PermSet,
    pub stabilizer: PermSet,
    pub h_prime: GroupElement,
    /// `senders == { s * h' : s ∈ G_a }`.
    pub coset_matches: bool,
    /// `g1 * g2⁻¹ ∈ G_a` for every pair of senders.
    pub differences_in_stabilizer: bool,
    /// A single sender permutation exactly when `G_a` is trivial.
    pub uniqueness_consistent: bool,
    pub abstract_senders: u64,
    pub abstract_stabilizer: u64,
}

impl CosetReport {
    pub fn holds(&self) -> bool {
        self.coset_matches
            && self.differences_in_stabilizer
            && self.uniqueness_consistent
            && self.abstract_senders == self.abstract_stabilizer
    }
}

/// Enumerated elements shared across many coset checks on one group.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub realized: PermSet,
    pub abstract_elements: Vec<GroupElement>,
}

impl Enumeration {
    pub fn new(group: &AbelianActionGroup, cap: usize) -> Result<Self> {
        Ok(Enumeration {
            realized: group.enumerate_elements(cap)?,
            abstract_elements: group.abstract_elements(cap)?,
        })
    }

    pub fn senders(&self, a: Point, b: Point) -> PermSet {
        self.realized
            .iter()
            .filter(|p| p.images()[a.0] == b.0)
            .cloned()
            .collect()
    }

    pub fn abstract_senders(&self, a: Point, b: Point) -> u64 {
        self.abstract_elements
            .iter()
            .filter(|e| e.realized().images()[a.0] == b.0)
            .count() as u64
    }
}

pub fn coset_structure(
    group: &AbelianActionGroup,
    a: Point,
    b: Point,
    cap: usize,
) -> Result<CosetReport> {
    group.check_point(a)?;
    group.check_point(b)?;
    coset_structure_in(&Enumeration::new(group, cap)?, group, a, b)
}

/// [`coset_structure`] against a precomputed enumeration of `group`.
pub fn coset_structure_in(
    en: &Enumeration,
    group: &AbelianActionGroup,
    a: Point,
    b: Point,
) -> Result<CosetReport> {
    let senders = en.senders(a, b);
    let stabilizer = en.senders(a, a);
    let h_prime = eve_find_h_prime(group, a, b)?;

    let coset: PermSet = stabilizer
        .iter()
        .map(|s| s.compose(h_prime.realized()))
        .collect::<Result<_>>()?;
    let coset_matches = coset == senders;

    let mut differences_in_stabilizer = true;
    for g1 in &senders {
        for g2 in &senders {
            let diff: Perm = g1.compose(&g2.inverse())?;
            if !stabilizer.contains(&diff) {
                differences_in_stabilizer = false;
            }
        }
    }
    let uniqueness_consistent = (senders.len() == 1) == stabilizer.is_trivial();

    Ok(CosetReport {
        abstract_senders: en.abstract_senders(a, b),
        abstract_stabilizer: en.abstract_senders(a, a),
        senders,
        stabilizer,
        h_prime,
        coset_matches,
        differences_in_stabilizer,
        uniqueness_consistent,
    })
}

/// Whether the senders from `a` to `b` form the coset `G_a * h'`.
pub fn verify_coset_structure(
    group: &AbelianActionGroup,
    a: Point,
    b: Point,
    cap: usize,
) -> Result<bool> {
    coset_structure(group, a, b, cap).map(|r| r.holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::run_forced_session;
    use crate::zoo;

    #[test]
    fn klein_h_prime_is_bobs_element() {
        let v = zoo::klein();
        // Labels 4 -> 2.
        let h = eve_find_h_prime(&v, Point(3), Point(1)).unwrap();
        assert_eq!(h.realized(), &zoo::klein_tau(2));
    }

    #[test]
    fn equal_points_give_identity() {
        let g = zoo::cyclic(9);
        let h = eve_find_h_prime(&g, Point(4), Point(4)).unwrap();
        assert!(h.realized().is_identity());
        assert_eq!(h.exponents(), &[0]);
    }

    #[test]
    fn cyclic_101_shift() {
        let g = zoo::cyclic(101);
        let h = eve_find_h_prime(&g, Point(7), Point(30)).unwrap();
        assert_eq!(h.exponents(), &[(30 - 7) % 101]);
        assert_eq!(h.realized().apply(Point(7)).unwrap(), Point(30));
    }

    #[test]
    fn klein_transcript_recovery() {
        let v = zoo::klein();
        let t: Transcript = "klein 3 1 0".parse().unwrap();
        let r = eve_recover_key(&v, &t).unwrap();
        assert_eq!(r.recovered_k, Point(2));
        assert_eq!(r.method, AttackMethod::SchreierWord);
        let b = eve_recover_key_brute_force(&v, &t, 100).unwrap();
        assert_eq!(b.recovered_k, Point(2));
        assert_eq!(b.method, AttackMethod::BruteForce);
    }

    #[test]
    fn trivial_group_recovery() {
        let g = crate::AbelianActionGroup::trivial(4).with_id("t");
        let t: Transcript = "t 2 2 2".parse().unwrap();
        assert_eq!(eve_recover_key(&g, &t).unwrap().recovered_k, Point(2));
    }

    #[test]
    fn exhaustive_cyclic_12() {
        let g = zoo::cyclic(12);
        let elems = g.abstract_elements(100).unwrap();
        let mut sessions = 0;
        for k in 0..12 {
            for a in &elems {
                for b in &elems {
                    let s = run_forced_session(&g, Point(k), a.clone(), b.clone(), &mut []).unwrap();
                    let r = eve_recover_key(&g, &s.transcript).unwrap();
                    assert_eq!(r.recovered_k, Point(k));
                    sessions += 1;
                }
            }
        }
        assert_eq!(sessions, 12 * 12 * 12);
    }

    #[test]
    fn malformed_transcripts_are_errors() {
        let g = zoo::two_orbit_cyclic(3);
        let t = Transcript {
            group_id: g.id().to_string(),
            c1: Point(0),
            c2: Point(4),
            c3: Point(1),
        };
        assert_eq!(
            eve_recover_key(&g, &t).unwrap_err(),
            Error::NotInOrbit { point: 4, base: 0 }
        );
        let wrong: Transcript = "klein 0 0 0".parse().unwrap();
        assert!(matches!(
            eve_recover_key(&g, &wrong),
            Err(Error::GroupMismatch { .. })
        ));
        let out_of_range = Transcript { c3: Point(6), ..t };
        assert!(matches!(
            eve_recover_key(&g, &out_of_range),
            Err(Error::PointOutOfRange { .. })
        ));
    }

    #[test]
    fn brute_force_sender_examples() {
        let v = zoo::klein();
        let s = brute_force_senders(&v, Point(0), Point(3), 100).unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![&zoo::klein_tau(3)]);

        let t = crate::AbelianActionGroup::trivial(2);
        assert!(brute_force_senders(&t, Point(1), Point(1), 10).unwrap().is_trivial());

        let nf = zoo::nonfaithful_z2z2();
        let s = brute_force_senders(&nf, Point(0), Point(1), 10).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.iter().next().unwrap().images(), &[1, 0]);
        assert_eq!(abstract_sender_count(&nf, Point(0), Point(1), 10).unwrap(), 2);
    }

    #[test]
    fn coset_examples() {
        let v = zoo::klein();
        for a in 0..4 {
            for b in 0..4 {
                let r = coset_structure(&v, Point(a), Point(b), 100).unwrap();
                assert!(r.holds());
                assert_eq!(r.senders.len(), 1);
            }
        }
        let t = crate::AbelianActionGroup::trivial(1);
        assert!(verify_coset_structure(&t, Point(0), Point(0), 10).unwrap());

        let nf = zoo::nonfaithful_z2z2();
        let r = coset_structure(&nf, Point(0), Point(1), 10).unwrap();
        assert!(r.holds());
        assert_eq!(r.abstract_senders, 2);
        assert_eq!(r.senders.len(), 1);
    }

    #[test]
    fn cost_is_linear_in_degree() {
        for n in [10usize, 100, 1000] {
            let g = zoo::cyclic(n);
            let t = Transcript {
                group_id: g.id().to_string(),
                c1: Point(0),
                c2: Point(n - 1),
                c3: Point(1),
            };
            let (_, cost) = eve_recover_key_counted(&g, &t).unwrap();
            assert_eq!(cost.generator_applications, n);
            assert_eq!(cost.path_steps, n - 1);
            assert!(cost.total() <= 8 * n);
        }
    }
}
