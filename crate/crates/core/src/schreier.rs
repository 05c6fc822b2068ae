//! Orbits as breadth-first Schreier trees.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::group::AbelianActionGroup;
use crate::perm::Point;

/// How a point of the orbit was first reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchreierEdge {
    Root,
    Step { parent: Point, generator: usize },
}

/// BFS tree of the orbit of `base`: each reached point records its parent
/// and the generator that maps the parent onto it.
#[derive(Debug, Clone)]
pub struct SchreierTable {
    base: Point,
    orders: Vec<u64>,
    entries: Vec<Option<SchreierEdge>>,
    bfs_order: Vec<Point>,
    generator_applications: usize,
}

impl AbelianActionGroup {
    /// Orbit of `a`. The queue is FIFO and generators are tried in index
    /// order, so the table is deterministic. Inverses are never applied
    /// separately: in a finite group they are positive generator powers.
    pub fn orbit(&self, a: Point) -> Result<SchreierTable> {
        self.check_point(a)?;
        let mut entries = vec![None; self.degree()];
        entries[a.0] = Some(SchreierEdge::Root);
        let mut bfs_order = vec![a];
        let mut queue = VecDeque::from([a]);
        let mut generator_applications = 0;
        while let Some(p) = queue.pop_front() {
            for (gi, gen) in self.generators().iter().enumerate() {
                generator_applications += 1;
                let q = gen.images()[p.0];
                if entries[q].is_none() {
                    entries[q] = Some(SchreierEdge::Step {
                        parent: p,
                        generator: gi,
                    });
                    bfs_order.push(Point(q));
                    queue.push_back(Point(q));
                }
            }
        }
        Ok(SchreierTable {
            base: a,
            orders: self.orders().to_vec(),
            entries,
            bfs_order,
            generator_applications,
        })
    }
}

impl SchreierTable {
    pub fn base(&self) -> Point {
        self.base
    }

    pub fn contains(&self, b: Point) -> bool {
        matches!(self.entries.get(b.0), Some(Some(_)))
    }

    pub fn edge(&self, b: Point) -> Option<SchreierEdge> {
        self.entries.get(b.0).copied().flatten()
    }

    /// Orbit points in the order BFS discovered them.
    pub fn orbit(&self) -> &[Point] {
        &self.bfs_order
    }

    pub fn orbit_len(&self) -> usize {
        self.bfs_order.len()
    }

    /// Generator images evaluated while building the table.
    pub fn generator_applications(&self) -> usize {
        self.generator_applications
    }

    /// Exponent vector `e` with `base ∘ realize(e) = b`. Generator edges on
    /// the tree path are counted per generator; the order they were taken in
    /// does not matter because the generators commute.
    pub fn transversal_word(&self, b: Point) -> Result<Vec<u64>> {
        self.transversal_word_counted(b).map(|(word, _)| word)
    }

    /// As [`Self::transversal_word`], also returning the length of the tree path.
    pub fn transversal_word_counted(&self, b: Point) -> Result<(Vec<u64>, usize)> {
        let not_in_orbit = Error::NotInOrbit {
            point: b.0,
            base: self.base.0,
        };
        let mut word = vec![0u64; self.orders.len()];
        let mut steps = 0;
        let mut current = b;
        loop {
            match self.edge(current) {
                None => return Err(not_in_orbit),
                Some(SchreierEdge::Root) => break,
                Some(SchreierEdge::Step { parent, generator }) => {
                    word[generator] = (word[generator] + 1) % self.orders[generator];
                    steps += 1;
                    current = parent;
                }
            }
        }
        Ok((word, steps))
    }
}
