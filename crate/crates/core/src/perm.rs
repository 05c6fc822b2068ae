//! Points and permutations of a finite set `{0, .., n-1}`.
//!
//! Permutations act on the right: `a.apply(p)` is the image of `a` under `p`,
//! and `p.compose(&q)` means "apply `p`, then `q`", so that
//! `a ∘ (p * q) = (a ∘ p) ∘ q`.

use std::fmt;

use crate::error::{Error, Result};

/// An element of the acted-on set, labelled `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(pub usize);

impl Point {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for Point {
    fn from(i: usize) -> Self {
        Point(i)
    }
}

/// A bijection on `{0, .., n-1}` stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    /// Builds a permutation from its image list, rejecting anything that is
    /// not a bijection.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let degree = images.len();
        let mut seen = vec![false; degree];
        for (i, &img) in images.iter().enumerate() {
            if img >= degree {
                return Err(Error::NotABijection {
                    degree,
                    reason: format!("image of {i} is {img}"),
                });
            }
            if std::mem::replace(&mut seen[img], true) {
                return Err(Error::NotABijection {
                    degree,
                    reason: format!("{img} appears more than once"),
                });
            }
        }
        Ok(Perm { images })
    }

    pub fn identity(degree: usize) -> Self {
        Perm {
            images: (0..degree).collect(),
        }
    }

    /// Builds a permutation from disjoint cycles, e.g. `[[0, 1, 2], [3, 4]]`.
    pub fn from_cycles(degree: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut moved = vec![false; degree];
        for cycle in cycles {
            for (j, &from) in cycle.iter().enumerate() {
                let to = cycle[(j + 1) % cycle.len()];
                if from >= degree || to >= degree {
                    return Err(Error::PointOutOfRange {
                        point: from.max(to),
                        degree,
                    });
                }
                if std::mem::replace(&mut moved[from], true) {
                    return Err(Error::NotABijection {
                        degree,
                        reason: format!("cycles are not disjoint at {from}"),
                    });
                }
                images[from] = to;
            }
        }
        Perm::new(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &img)| i == img)
    }

    /// Image of `a`. Errors if `a` is outside the permutation's domain.
    pub fn apply(&self, a: Point) -> Result<Point> {
        self.images
            .get(a.0)
            .map(|&img| Point(img))
            .ok_or(Error::PointOutOfRange {
                point: a.0,
                degree: self.degree(),
            })
    }

    /// `self` first, then `other`: `result[i] = other[self[i]]`.
    pub fn compose(&self, other: &Perm) -> Result<Perm> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                expected: self.degree(),
                found: other.degree(),
            });
        }
        Ok(Perm {
            images: self.images.iter().map(|&i| other.images[i]).collect(),
        })
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.degree()];
        for (i, &img) in self.images.iter().enumerate() {
            images[img] = i;
        }
        Perm { images }
    }

    /// Disjoint cycles of length at least two, each starting at its least point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut next = self.images[start];
            while next != start {
                seen[next] = true;
                cycle.push(next);
                next = self.images[next];
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    /// Least `t >= 1` with `self^t = identity`: the lcm of the cycle lengths.
    pub fn order(&self) -> u64 {
        self.cycles()
            .iter()
            .fold(1, |acc, c| lcm(acc, c.len() as u64))
    }

    /// `self^e`, computed cycle by cycle in linear time.
    pub fn pow(&self, e: u64) -> Perm {
        let mut images: Vec<usize> = (0..self.degree()).collect();
        for cycle in self.cycles() {
            let len = cycle.len() as u64;
            let shift = (e % len) as usize;
            for (j, &p) in cycle.iter().enumerate() {
                images[p] = cycle[(j + shift) % cycle.len()];
            }
        }
        Perm { images }
    }

    pub fn commutes_with(&self, other: &Perm) -> Result<bool> {
        Ok(self.compose(other)? == other.compose(self)?)
    }

    /// `r⁻¹ * self * r`.
    pub fn conjugate_by(&self, r: &Perm) -> Result<Perm> {
        r.inverse().compose(self)?.compose(r)
    }
}

impl fmt::Display for Perm {
    /// Cycle notation, `()` for the identity.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let body: Vec<String> = c.iter().map(|p| p.to_string()).collect();
            write!(f, "({})", body.join(" "))?;
        }
        Ok(())
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}
