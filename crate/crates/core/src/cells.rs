//! Cells (finite vertex subsets), colexicographic ranking, and the
//! orientation algebra that fixes the sign structure of signed adjacency
//! matrices.
//!
//! Vertices are 1-based: a j-cell is a strictly increasing tuple of j+1
//! integers from 1..=n. The positive orientation of a cell is its ascending
//! vertex order.

use std::cmp::Ordering;
use std::fmt;

use crate::combin::binom;
use crate::error::{Error, Result};

/// A j-cell: strictly increasing vertices, dimension = len - 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cell {
    vertices: Vec<u32>,
}

impl Cell {
    /// Builds a cell from strictly increasing, positive vertex ids.
    pub fn new(vertices: Vec<u32>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidDimension(
                "cells of dimension -1 are not materialized".into(),
            ));
        }
        if vertices[0] == 0 {
            return Err(Error::Index("vertex ids are 1-based".into()));
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Index(format!(
                "vertices must be strictly increasing, got {vertices:?}"
            )));
        }
        Ok(Self { vertices })
    }

    /// Builds a cell from an unsorted list of distinct vertices.
    pub fn from_unsorted(mut vertices: Vec<u32>) -> Result<Self> {
        vertices.sort_unstable();
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn contains(&self, v: u32) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// True iff every vertex of `self` is a vertex of `other`.
    pub fn is_subset_of(&self, other: &Cell) -> bool {
        self.vertices.iter().all(|&v| other.contains(v))
    }

    /// Union of two cells as a cell.
    pub fn union(&self, other: &Cell) -> Cell {
        let mut v: Vec<u32> = self
            .vertices
            .iter()
            .chain(other.vertices.iter())
            .copied()
            .collect();
        v.sort_unstable();
        v.dedup();
        Cell { vertices: v }
    }

    /// All sub-cells of the given dimension (u+1-subsets), colex order.
    pub fn subcells(&self, u: usize) -> Vec<Cell> {
        let mut out = Vec::new();
        let k = u + 1;
        if k > self.vertices.len() {
            return out;
        }
        // indices into self.vertices, advanced in colex order
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(Cell {
                vertices: idx.iter().map(|&i| self.vertices[i]).collect(),
            });
            let mut i = 0;
            while i < k {
                let limit = if i + 1 < k {
                    idx[i + 1]
                } else {
                    self.vertices.len()
                };
                if idx[i] + 1 < limit {
                    idx[i] += 1;
                    for (r, slot) in idx.iter_mut().enumerate().take(i) {
                        *slot = r;
                    }
                    break;
                }
                i += 1;
            }
            if i == k {
                return out;
            }
        }
    }

    /// The facet omitting the i-th vertex (0-indexed in ascending order).
    pub fn facet(&self, i: usize) -> Cell {
        let mut v = self.vertices.clone();
        v.remove(i);
        Cell { vertices: v }
    }

    /// Colexicographic comparison: compare largest vertices first.
    pub fn colex_cmp(&self, other: &Cell) -> Ordering {
        self.vertices
            .iter()
            .rev()
            .cmp(other.vertices.iter().rev())
            .then(self.vertices.len().cmp(&other.vertices.len()))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total order = colexicographic, so sorted containers agree with the
/// ranking used by [`CellIndexer`].
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.colex_cmp(other)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.vertices.iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A cell together with an orientation parity relative to ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedCell {
    pub cell: Cell,
    /// +1 for the ascending (positive) orientation, -1 for its reverse.
    pub parity: i8,
}

impl OrientedCell {
    pub fn new(cell: Cell, parity: i8) -> Result<Self> {
        if parity != 1 && parity != -1 {
            return Err(Error::InvalidArgument(format!(
                "orientation parity must be +1 or -1, got {parity}"
            )));
        }
        Ok(Self { cell, parity })
    }

    pub fn positive(cell: Cell) -> Self {
        Self { cell, parity: 1 }
    }

    pub fn opposite(&self) -> Self {
        Self {
            cell: self.cell.clone(),
            parity: -self.parity,
        }
    }
}

/// Bijective colexicographic ranking of j-cells on {1..n}.
///
/// rank(c) = sum_i C(v_i - 1, i) over sorted vertices v_1 < ... < v_{j+1};
/// ranks run over {0, ..., C(n, j+1) - 1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellIndexer {
    n: u32,
    j: usize,
}

impl CellIndexer {
    pub fn new(n: u32, j: usize) -> Result<Self> {
        if j as u32 >= n {
            return Err(Error::InvalidDimension(format!(
                "j-cells need j <= n - 1, got j = {j}, n = {n}"
            )));
        }
        Ok(Self { n, j })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn j(&self) -> usize {
        self.j
    }

    /// Number of j-cells on {1..n}.
    pub fn count(&self) -> usize {
        binom(self.n as u64, self.j as u64 + 1) as usize
    }

    pub fn rank(&self, c: &Cell) -> Result<usize> {
        if c.dim() != self.j {
            return Err(Error::Index(format!(
                "expected a {}-cell, got dimension {}",
                self.j,
                c.dim()
            )));
        }
        if *c.vertices().last().unwrap() > self.n {
            return Err(Error::Index(format!(
                "vertex {} out of range for n = {}",
                c.vertices().last().unwrap(),
                self.n
            )));
        }
        let mut r = 0u64;
        for (i, &v) in c.vertices().iter().enumerate() {
            r += binom(v as u64 - 1, i as u64 + 1);
        }
        Ok(r as usize)
    }

    pub fn unrank(&self, rank: usize) -> Result<Cell> {
        if rank >= self.count() {
            return Err(Error::Index(format!(
                "rank {rank} out of range, only {} {}-cells on [{}]",
                self.count(),
                self.j,
                self.n
            )));
        }
        let mut rest = rank as u64;
        let mut vertices = vec![0u32; self.j + 1];
        for i in (0..=self.j).rev() {
            // largest v with C(v - 1, i + 1) <= rest
            let mut v = i as u32 + 1;
            while v < self.n && binom(v as u64, i as u64 + 1) <= rest {
                v += 1;
            }
            rest -= binom(v as u64 - 1, i as u64 + 1);
            vertices[i] = v;
        }
        Ok(Cell { vertices })
    }
}

/// All j-cells on {1..n} in colexicographic order.
pub fn enumerate_cells(n: u32, j: usize) -> Result<Vec<Cell>> {
    let indexer = CellIndexer::new(n, j)?;
    let k = j + 1;
    let mut out = Vec::with_capacity(indexer.count());
    let mut cur: Vec<u32> = (1..=k as u32).collect();
    loop {
        out.push(Cell {
            vertices: cur.clone(),
        });
        let mut i = 0;
        while i < k {
            let limit = if i + 1 < k { cur[i + 1] } else { n + 1 };
            if cur[i] + 1 < limit {
                cur[i] += 1;
                for (r, slot) in cur.iter_mut().enumerate().take(i) {
                    *slot = r as u32 + 1;
                }
                break;
            }
            i += 1;
        }
        if i == k {
            return Ok(out);
        }
    }
}

/// Facets of an oriented cell with their induced orientations: the facet
/// omitting the i-th sorted vertex carries sign parity * (-1)^i.
pub fn boundary_with_signs(oc: &OrientedCell) -> Result<Vec<(Cell, i8)>> {
    if oc.cell.dim() == 0 {
        return Err(Error::EmptyBoundary);
    }
    let mut out = Vec::with_capacity(oc.cell.dim() + 1);
    for i in 0..=oc.cell.dim() {
        let sign = if i % 2 == 0 { oc.parity } else { -oc.parity };
        out.push((oc.cell.facet(i), sign));
    }
    Ok(out)
}

/// Sign of the adjacency relation between two (d-1)-cells through their
/// union, in the convention that makes the assembled signed matrix satisfy
/// A+ = D - L exactly.
///
/// Returns 0 unless the union is a d-cell; otherwise, with i and j the
/// 0-indexed positions (in the sorted union) of the vertices missing from
/// the first and second cell respectively, returns -(-1)^(i+j).
pub fn sign_entry(a: &Cell, b: &Cell, d: usize) -> Result<i8> {
    if d < 1 || a.dim() != d - 1 || b.dim() != d - 1 {
        return Err(Error::InvalidArgument(format!(
            "sign_entry expects two ({})-cells, got dims {} and {}",
            d as i64 - 1,
            a.dim(),
            b.dim()
        )));
    }
    let tau = a.union(b);
    if tau.dim() != d {
        return Ok(0);
    }
    let mut i = usize::MAX;
    let mut j = usize::MAX;
    for (pos, &v) in tau.vertices().iter().enumerate() {
        if !a.contains(v) {
            i = pos;
        }
        if !b.contains(v) {
            j = pos;
        }
    }
    Ok(if (i + j) % 2 == 0 { -1 } else { 1 })
}
