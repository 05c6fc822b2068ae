//! Finite Abelian groups acting on `{0, .., n-1}` through generator permutations.
//!
//! A group is presented by pairwise-commuting generators. Elements are
//! exponent vectors over those generators; the permutation an element
//! realizes is what the protocol and the attack actually observe, so element
//! equality is equality of realized permutations.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::perm::{Perm, Point};

/// Default bound on the number of elements any exhaustive operation visits.
pub const DEFAULT_CAP: usize = 1_000_000;

const DEFAULT_ID: &str = "custom";

/// A public Abelian group together with its permutation representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianActionGroup {
    id: String,
    degree: usize,
    generators: Vec<Perm>,
    orders: Vec<u64>,
}

impl AbelianActionGroup {
    /// Validates degrees and pairwise commutation, then computes generator
    /// orders. Commuting generators are enough: the group they generate is
    /// Abelian.
    pub fn new(degree: usize, generators: Vec<Perm>) -> Result<Self> {
        let group = Self::new_unchecked(degree, generators)?;
        for i in 0..group.generators.len() {
            for j in (i + 1)..group.generators.len() {
                if !group.generators[i].commutes_with(&group.generators[j])? {
                    return Err(Error::NonCommutingGenerators(i, j));
                }
            }
        }
        Ok(group)
    }

    /// Skips the commutation check. Only useful for demonstrating what goes
    /// wrong when the group is not Abelian; every other operation assumes it is.
    pub fn new_unchecked(degree: usize, generators: Vec<Perm>) -> Result<Self> {
        if let Some(bad) = generators.iter().find(|g| g.degree() != degree) {
            return Err(Error::DegreeMismatch {
                expected: degree,
                found: bad.degree(),
            });
        }
        let orders = generators.iter().map(Perm::order).collect();
        Ok(AbelianActionGroup {
            id: DEFAULT_ID.to_string(),
            degree,
            generators,
            orders,
        })
    }

    /// The trivial group acting on `degree` points.
    pub fn trivial(degree: usize) -> Self {
        AbelianActionGroup {
            id: DEFAULT_ID.to_string(),
            degree,
            generators: Vec::new(),
            orders: Vec::new(),
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    /// Number of generators.
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// `Π orders[i]`, the order of the abstract group `Z_{o_1} × … × Z_{o_m}`.
    /// `None` on overflow.
    pub fn abstract_order(&self) -> Option<u128> {
        self.orders
            .iter()
            .try_fold(1u128, |acc, &o| acc.checked_mul(o as u128))
    }

    pub fn check_point(&self, a: Point) -> Result<()> {
        if a.0 < self.degree {
            Ok(())
        } else {
            Err(Error::PointOutOfRange {
                point: a.0,
                degree: self.degree,
            })
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            exponents: vec![0; self.rank()],
            realized: Perm::identity(self.degree),
        }
    }

    /// The element `Π generators[i]^exponents[i]`, with exponents reduced
    /// modulo the generator orders.
    pub fn realize(&self, exponents: &[u64]) -> Result<GroupElement> {
        if exponents.len() != self.rank() {
            return Err(Error::ArityMismatch {
                expected: self.rank(),
                found: exponents.len(),
            });
        }
        let exponents: Vec<u64> = exponents
            .iter()
            .zip(&self.orders)
            .map(|(&e, &o)| e % o)
            .collect();
        let mut realized = Perm::identity(self.degree);
        for (gen, &e) in self.generators.iter().zip(&exponents) {
            if e != 0 {
                realized = realized.compose(&gen.pow(e))?;
            }
        }
        Ok(GroupElement {
            exponents,
            realized,
        })
    }

    /// Draws each exponent independently and uniformly from `[0, orders[i])`.
    ///
    /// The exponent map `Z_{o_1} × … × Z_{o_m} → φ(G)` is a surjective
    /// homomorphism, so the realized permutation is exactly uniform on `φ(G)`.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        let exponents: Vec<u64> = self
            .orders
            .iter()
            .map(|&o| rng.random_range(0..o))
            .collect();
        self.realize(&exponents)
            .expect("sampled exponents have the group's arity")
    }

    /// Iterates every exponent vector of the abstract group, failing up front
    /// if there are more than `cap` of them.
    pub fn exponent_vectors(&self, cap: usize) -> Result<ExponentVectors> {
        match self.abstract_order() {
            Some(n) if n <= cap as u128 => Ok(ExponentVectors {
                orders: self.orders.clone(),
                next: Some(vec![0; self.rank()]),
            }),
            _ => Err(Error::CapExceeded(cap)),
        }
    }

    /// Every abstract element, realized. Fails if the abstract order exceeds `cap`.
    pub fn abstract_elements(&self, cap: usize) -> Result<Vec<GroupElement>> {
        self.exponent_vectors(cap)?
            .map(|e| self.realize(&e))
            .collect()
    }

    /// `φ(G)`: breadth-first closure of the identity under right
    /// multiplication by the generators.
    pub fn enumerate_elements(&self, cap: usize) -> Result<PermSet> {
        let identity = Perm::identity(self.degree);
        let mut seen = BTreeSet::new();
        seen.insert(identity.clone());
        let mut queue = VecDeque::from([identity]);
        while let Some(p) = queue.pop_front() {
            for gen in &self.generators {
                let next = p.compose(gen)?;
                if !seen.contains(&next) {
                    if seen.len() >= cap {
                        return Err(Error::CapExceeded(cap));
                    }
                    seen.insert(next.clone());
                    queue.push_back(next);
                }
            }
        }
        Ok(PermSet::from_set(seen))
    }

    /// Realized elements fixing `a`.
    pub fn stabilizer(&self, a: Point, cap: usize) -> Result<PermSet> {
        self.check_point(a)?;
        let all = self.enumerate_elements(cap)?;
        Ok(all.filter(|p| p.images()[a.0] == a.0))
    }

    /// Number of exponent vectors whose realization fixes `a`.
    pub fn stabilizer_abstract_size(&self, a: Point, cap: usize) -> Result<u64> {
        self.check_point(a)?;
        self.count_abstract(cap, |p| p.images()[a.0] == a.0)
    }

    /// The kernel of the action, both as realized permutations (always just
    /// the identity) and as the number of exponent vectors acting trivially.
    pub fn kernel(&self, cap: usize) -> Result<KernelReport> {
        let mut realized = self.enumerate_elements(cap)?;
        for x in 0..self.degree {
            realized = realized.filter(|p| p.images()[x] == x);
        }
        let abstract_size = self.count_abstract(cap, Perm::is_identity)?;
        Ok(KernelReport {
            realized,
            abstract_size,
        })
    }

    /// True iff the orbit of point 0 is everything. A group on zero points
    /// is reported transitive.
    pub fn is_transitive(&self) -> bool {
        if self.degree == 0 {
            return true;
        }
        self.orbit(Point(0))
            .map(|t| t.orbit_len() == self.degree)
            .unwrap_or(false)
    }

    pub(crate) fn count_abstract(&self, cap: usize, pred: impl Fn(&Perm) -> bool) -> Result<u64> {
        let mut count = 0;
        for e in self.exponent_vectors(cap)? {
            if pred(self.realize(&e)?.realized()) {
                count += 1;
            }
        }
        Ok(count)
    }

    /// Serializes to the line-oriented group file format.
    pub fn to_group_file(&self) -> String {
        let mut out = format!("degree {}\n", self.degree);
        for gen in &self.generators {
            let imgs: Vec<String> = gen.images().iter().map(|i| i.to_string()).collect();
            out.push_str("gen ");
            out.push_str(&imgs.join(" "));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for AbelianActionGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {} points, generators [", self.id, self.degree)?;
        for (i, (g, o)) in self.generators.iter().zip(&self.orders).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g} of order {o}")?;
        }
        write!(f, "]")
    }
}

/// Parses a group file:
///
/// ```text
/// # Klein four-group
/// degree 4
/// gen 1 0 3 2
/// gen 2 3 0 1
/// ```
pub fn parse_group(text: &str) -> Result<AbelianActionGroup> {
    let mut degree = None;
    let mut generators = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().unwrap_or_default();
        match (keyword, degree) {
            ("degree", None) => {
                let n: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err("expected `degree <n>`".into()))?;
                if n == 0 || tokens.next().is_some() {
                    return Err(parse_err("expected `degree <n>` with n >= 1".into()));
                }
                degree = Some(n);
            }
            ("degree", Some(_)) => return Err(parse_err("duplicate `degree` line".into())),
            ("gen", Some(n)) => {
                let images = tokens
                    .map(|t| t.parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| parse_err(format!("bad image: {e}")))?;
                if images.len() != n {
                    return Err(parse_err(format!(
                        "expected {n} images, found {}",
                        images.len()
                    )));
                }
                let perm = Perm::new(images).map_err(|e| parse_err(e.to_string()))?;
                generators.push(perm);
            }
            ("gen", None) => return Err(parse_err("`gen` before `degree`".into())),
            (other, _) => return Err(parse_err(format!("unknown directive `{other}`"))),
        }
    }
    let degree = degree.ok_or(Error::Parse {
        line: 1,
        message: "missing `degree` line".into(),
    })?;
    AbelianActionGroup::new(degree, generators)
}

/// An element of the abstract group: an exponent vector plus the permutation
/// it realizes. Compares equal when the realized permutations are equal.
#[derive(Debug, Clone)]
pub struct GroupElement {
    exponents: Vec<u64>,
    realized: Perm,
}

impl GroupElement {
    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn realized(&self) -> &Perm {
        &self.realized
    }

    pub fn inverse(&self, group: &AbelianActionGroup) -> Result<GroupElement> {
        let exps: Vec<u64> = self
            .exponents
            .iter()
            .zip(group.orders())
            .map(|(&e, &o)| (o - e) % o)
            .collect();
        group.realize(&exps)
    }

    pub fn compose(&self, other: &GroupElement, group: &AbelianActionGroup) -> Result<GroupElement> {
        if other.exponents.len() != self.exponents.len() {
            return Err(Error::ArityMismatch {
                expected: self.exponents.len(),
                found: other.exponents.len(),
            });
        }
        let exps: Vec<u64> = self
            .exponents
            .iter()
            .zip(&other.exponents)
            .map(|(a, b)| a + b)
            .collect();
        group.realize(&exps)
    }

    /// Exponents joined by commas, or `-` for the trivial group.
    pub fn exponent_string(&self) -> String {
        if self.exponents.is_empty() {
            return "-".to_string();
        }
        self.exponents
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.realized == other.realized
    }
}

impl Eq for GroupElement {}

/// Mixed-radix counter over `[0, o_1) × … × [0, o_m)`.
#[derive(Debug, Clone)]
pub struct ExponentVectors {
    orders: Vec<u64>,
    next: Option<Vec<u64>>,
}

impl Iterator for ExponentVectors {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for (digit, &o) in succ.iter_mut().zip(&self.orders) {
            *digit += 1;
            if *digit < o {
                self.next = Some(succ);
                return Some(current);
            }
            *digit = 0;
        }
        Some(current)
    }
}

/// A deduplicated set of permutations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PermSet {
    members: BTreeSet<Perm>,
    closed: bool,
}

impl PermSet {
    pub fn new() -> Self {
        Self::default()
    }

    fn from_set(members: BTreeSet<Perm>) -> Self {
        PermSet {
            members,
            closed: false,
        }
    }

    pub fn insert(&mut self, p: Perm) -> bool {
        let added = self.members.insert(p);
        if added {
            self.closed = false;
        }
        added
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, p: &Perm) -> bool {
        self.members.contains(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Perm> {
        self.members.iter()
    }

    /// Whether closure under composition has been verified.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Checks every product of two members exhaustively and records the result.
    pub fn verify_closure(&mut self) -> bool {
        let closed = self.members.iter().all(|p| {
            self.members
                .iter()
                .all(|q| p.compose(q).is_ok_and(|pq| self.members.contains(&pq)))
        });
        self.closed = closed;
        closed
    }

    pub fn filter(self, pred: impl Fn(&Perm) -> bool) -> PermSet {
        PermSet::from_set(self.members.into_iter().filter(|p| pred(p)).collect())
    }

    /// True iff the only member is an identity permutation.
    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1 && self.members.iter().all(Perm::is_identity)
    }
}

impl FromIterator<Perm> for PermSet {
    fn from_iter<I: IntoIterator<Item = Perm>>(iter: I) -> Self {
        PermSet::from_set(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a PermSet {
    type Item = &'a Perm;
    type IntoIter = std::collections::btree_set::Iter<'a, Perm>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelReport {
    /// Realized permutations acting trivially; the identity alone.
    pub realized: PermSet,
    /// Exponent vectors acting trivially.
    pub abstract_size: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn s3_generators() -> Vec<Perm> {
        vec![
            Perm::from_cycles(3, &[&[0, 1]]).unwrap(),
            Perm::from_cycles(3, &[&[0, 1, 2]]).unwrap(),
        ]
    }

    #[test]
    fn build_klein() {
        let v = zoo::klein();
        assert_eq!(v.orders(), &[2, 2]);
        assert_eq!(v.abstract_order(), Some(4));
    }

    #[test]
    fn build_trivial_from_empty_generators() {
        let g = AbelianActionGroup::new(5, vec![]).unwrap();
        assert_eq!(g.rank(), 0);
        assert_eq!(g.enumerate_elements(10).unwrap().len(), 1);
    }

    #[test]
    fn build_rejects_s3() {
        let gens = s3_generators();
        // (0 1) then (0 1 2) sends 0 -> 2; the other order sends 0 -> 0.
        assert_eq!(gens[0].compose(&gens[1]).unwrap().images()[0], 2);
        assert_eq!(gens[1].compose(&gens[0]).unwrap().images()[0], 0);
        assert_eq!(
            AbelianActionGroup::new(3, gens).unwrap_err(),
            Error::NonCommutingGenerators(0, 1)
        );
    }

    #[test]
    fn build_rejects_degree_mismatch() {
        let err = AbelianActionGroup::new(4, vec![Perm::identity(3)]).unwrap_err();
        assert_eq!(err, Error::DegreeMismatch { expected: 4, found: 3 });
    }

    #[test]
    fn realize_examples() {
        let v = zoo::klein();
        assert!(v.realize(&[0, 0]).unwrap().realized().is_identity());
        assert_eq!(v.realize(&[1, 1]).unwrap().realized(), &zoo::klein_tau(3));
        let e = v.realize(&[3, 2]).unwrap();
        assert_eq!(e.exponents(), &[1, 0]);
        assert_eq!(e.realized(), &zoo::klein_tau(1));
        assert_eq!(
            v.realize(&[1]).unwrap_err(),
            Error::ArityMismatch { expected: 2, found: 1 }
        );
    }

    #[test]
    fn element_equality_is_by_action() {
        let g = zoo::nonfaithful_z2z2();
        let a = g.realize(&[1, 0]).unwrap();
        let b = g.realize(&[0, 1]).unwrap();
        assert_ne!(a.exponents(), b.exponents());
        assert_eq!(a, b);
    }

    #[test]
    fn element_inverse_and_compose() {
        let g = zoo::product_regular(&[2, 4]);
        for e in g.abstract_elements(100).unwrap() {
            let inv = e.inverse(&g).unwrap();
            assert!(e.compose(&inv, &g).unwrap().realized().is_identity());
            assert_eq!(inv.realized(), &e.realized().inverse());
        }
    }

    #[test]
    fn exponent_vectors_cover_product_space() {
        let g = zoo::product_regular(&[2, 3]);
        let all: Vec<_> = g.exponent_vectors(10).unwrap().collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all.first().unwrap(), &vec![0, 0]);
        assert_eq!(all.last().unwrap(), &vec![1, 2]);
        let trivial: Vec<_> = zoo::cyclic(1).exponent_vectors(1).unwrap().collect();
        assert_eq!(trivial.len(), 1);
        assert_eq!(
            zoo::cyclic(12).exponent_vectors(11).unwrap_err(),
            Error::CapExceeded(11)
        );
    }

    #[test]
    fn sample_uniform_trivial_is_identity() {
        let g = AbelianActionGroup::trivial(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert!(g.sample_uniform(&mut rng).realized().is_identity());
        }
    }

    // Exact pushforward of the uniform exponent distribution onto realized perms.
    fn pushforward(g: &AbelianActionGroup) -> BTreeMap<Perm, u64> {
        let mut counts = BTreeMap::new();
        for e in g.exponent_vectors(1000).unwrap() {
            *counts.entry(g.realize(&e).unwrap().realized().clone()).or_insert(0) += 1;
        }
        counts
    }

    #[test]
    fn sample_uniform_pushforward_klein() {
        let counts = pushforward(&zoo::klein());
        assert_eq!(counts.len(), 4);
        assert!(counts.values().all(|&c| c == 1));
    }

    #[test]
    fn sample_uniform_pushforward_nonfaithful() {
        let counts = pushforward(&zoo::nonfaithful_z2z2());
        assert_eq!(counts.len(), 2);
        assert!(counts.values().all(|&c| c == 2));
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(zoo::klein().enumerate_elements(100).unwrap().len(), 4);
        let t = AbelianActionGroup::trivial(4).enumerate_elements(1).unwrap();
        assert!(t.is_trivial());
        assert_eq!(zoo::cyclic(12).enumerate_elements(100).unwrap().len(), 12);
        assert_eq!(
            zoo::cyclic(12).enumerate_elements(11).unwrap_err(),
            Error::CapExceeded(11)
        );
    }

    #[test]
    fn enumerated_groups_are_closed() {
        for g in [zoo::klein(), zoo::cyclic(7), zoo::product_regular(&[2, 4])] {
            let mut set = g.enumerate_elements(1000).unwrap();
            assert!(!set.is_closed());
            assert!(set.verify_closure());
            assert!(set.is_closed());
        }
    }

    #[test]
    fn stabilizer_examples() {
        let v = zoo::klein();
        assert!(v.stabilizer(Point(0), 100).unwrap().is_trivial());
        assert!(AbelianActionGroup::trivial(3)
            .stabilizer(Point(2), 10)
            .unwrap()
            .is_trivial());
        let nf = zoo::nonfaithful_z2z2();
        assert!(nf.stabilizer(Point(0), 10).unwrap().is_trivial());
        assert_eq!(nf.stabilizer_abstract_size(Point(0), 10).unwrap(), 2);
        assert!(matches!(
            v.stabilizer(Point(4), 100),
            Err(Error::PointOutOfRange { .. })
        ));
    }

    #[test]
    fn kernel_examples() {
        let k = zoo::klein().kernel(100).unwrap();
        assert!(k.realized.is_trivial());
        assert_eq!(k.abstract_size, 1);
        let k = AbelianActionGroup::trivial(2).kernel(10).unwrap();
        assert!(k.realized.is_trivial());
        assert_eq!(k.abstract_size, 1);
        let k = zoo::nonfaithful_z2z2().kernel(10).unwrap();
        assert!(k.realized.is_trivial());
        assert_eq!(k.abstract_size, 2);
    }

    #[test]
    fn transitivity_examples() {
        assert!(zoo::klein().is_transitive());
        assert!(AbelianActionGroup::trivial(1).is_transitive());
        assert!(!zoo::two_orbit_cyclic(3).is_transitive());
        assert!(!AbelianActionGroup::trivial(2).is_transitive());
    }

    #[test]
    fn parse_klein_file() {
        let text = "# Klein four-group\ndegree 4\ngen 1 0 3 2\n\ngen 2 3 0 1\n";
        let g = parse_group(text).unwrap();
        assert_eq!(g.degree(), 4);
        assert_eq!(g.generators(), &[zoo::klein_tau(1), zoo::klein_tau(2)]);
        assert_eq!(parse_group(&g.to_group_file()).unwrap().generators(), g.generators());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_group("degree 3\n# comment\ngen 0 0 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_group("degree 3\ngen 0 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_group("gen 0 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_group("degree 3\nfoo\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_group("# nothing\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = parse_group("degree 3\ngen 1 0 2\ngen 1 2 0\n").unwrap_err();
        assert_eq!(err, Error::NonCommutingGenerators(0, 1));
    }
}
