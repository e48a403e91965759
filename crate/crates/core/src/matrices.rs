//! Assembly of adjacency-type matrices over (d-1)-cells: restricted and
//! extended, signed and unsigned, Hadamard factors, centered/normalized
//! variants, the boundary operator and its Laplacian, plus the exact
//! entry-covariance formula.
//!
//! Extended matrices are indexed by all of K^{d-1} in colex rank order and
//! have non-random dimension C(n, d); restricted matrices are indexed by
//! the member list of the view's (d-1)-cells in colex order.

use std::collections::HashMap;
use std::io::Write;

use crate::cells::boundary_with_signs;
use crate::cells::{enumerate_cells, sign_entry, Cell, CellIndexer, OrientedCell};
use crate::combin::binom_f64;
use crate::error::{Error, Result};
use crate::sampler::{ComplexView, ModelParams, OutcomeOracle};

/// Sparse symmetric matrix stored as upper-triangle coordinates
/// (row <= col, sorted, merged, zero entries dropped).
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    triplets: Vec<(u32, u32, f64)>,
}

impl SymMatrix {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            triplets: Vec::new(),
        }
    }

    /// Builds from arbitrary coordinates; mirror-image duplicates are
    /// folded together and exact zeros dropped.
    pub fn from_triplets(dim: usize, raw: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut triplets: Vec<(u32, u32, f64)> = Vec::with_capacity(raw.len());
        for (a, b, v) in raw {
            if a >= dim || b >= dim {
                return Err(Error::Index(format!(
                    "entry ({a}, {b}) out of range for dim {dim}"
                )));
            }
            let (r, c) = if a <= b { (a, b) } else { (b, a) };
            triplets.push((r as u32, c as u32, v));
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(u32, u32, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != 0.0);
        Ok(Self {
            dim,
            triplets: merged,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    /// Stored upper-triangle entries (row <= col).
    pub fn triplets(&self) -> &[(u32, u32, f64)] {
        &self.triplets
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        let (r, c) = if a <= b { (a, b) } else { (b, a) };
        match self
            .triplets
            .binary_search_by_key(&(r as u32, c as u32), |&(x, y, _)| (x, y))
        {
            Ok(i) => self.triplets[i].2,
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut m = vec![0.0; n * n];
        for &(r, c, v) in &self.triplets {
            m[r as usize * n + c as usize] = v;
            m[c as usize * n + r as usize] = v;
        }
        m
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        y.fill(0.0);
        for &(r, c, v) in &self.triplets {
            let (r, c) = (r as usize, c as usize);
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
    }

    pub fn trace(&self) -> f64 {
        self.triplets
            .iter()
            .filter(|&&(r, c, _)| r == c)
            .map(|&(_, _, v)| v)
            .sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.triplets
            .iter()
            .map(|&(r, c, v)| if r == c { v * v } else { 2.0 * v * v })
            .sum()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.triplets
            .iter()
            .map(|&(_, _, v)| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            triplets: self
                .triplets
                .iter()
                .map(|&(r, c, v)| (r, c, v * factor))
                .collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim, other.dim
            )));
        }
        let mut raw: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() + other.nnz());
        for &(r, c, v) in self.triplets.iter().chain(other.triplets.iter()) {
            raw.push((r as usize, c as usize, v));
        }
        SymMatrix::from_triplets(self.dim, raw)
    }

    /// Number of nonzero off-diagonal entries in each row.
    pub fn row_support(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.dim];
        for &(r, c, _) in &self.triplets {
            if r != c {
                counts[r as usize] += 1;
                counts[c as usize] += 1;
            }
        }
        counts
    }

    pub fn has_zero_diagonal(&self) -> bool {
        self.triplets.iter().all(|&(r, c, _)| r != c)
    }
}

/// Row/column labels of a cell-indexed matrix.
#[derive(Debug, Clone)]
pub enum RowIndex {
    /// All of K^{d-1} in colex rank order; dimension C(n, d).
    Extended(CellIndexer),
    /// The view's (d-1)-cell member list in colex order.
    Restricted(Vec<Cell>),
}

impl RowIndex {
    pub fn len(&self) -> usize {
        match self {
            RowIndex::Extended(ix) => ix.count(),
            RowIndex::Restricted(cells) => cells.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell(&self, i: usize) -> Result<Cell> {
        match self {
            RowIndex::Extended(ix) => ix.unrank(i),
            RowIndex::Restricted(cells) => cells
                .get(i)
                .cloned()
                .ok_or_else(|| Error::Index(format!("row {i} out of range"))),
        }
    }

    pub fn position(&self, c: &Cell) -> Option<usize> {
        match self {
            RowIndex::Extended(ix) => ix.rank(c).ok(),
            RowIndex::Restricted(cells) => cells.binary_search(c).ok(),
        }
    }
}

/// A symmetric matrix together with its cell index and a short label.
#[derive(Debug, Clone)]
pub struct CellMatrix {
    pub mat: SymMatrix,
    pub index: RowIndex,
    pub label: String,
}

impl CellMatrix {
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }
}

/// Iterates all d-cells tau on [n] and their facet pairs, calling
/// `value(tau)` once per tau and emitting one triplet per unordered facet
/// pair. Pairs whose value is zero are skipped.
fn assemble_extended<F>(n: u32, d: usize, label: &str, mut value: F) -> Result<CellMatrix>
where
    F: FnMut(&Cell) -> Result<f64>,
{
    let facets_ix = CellIndexer::new(n, d - 1)?;
    let mut raw: Vec<(usize, usize, f64)> = Vec::new();
    for tau in enumerate_cells(n, d)? {
        let v = value(&tau)?;
        if v == 0.0 {
            continue;
        }
        let ranks: Vec<usize> = (0..=d)
            .map(|i| facets_ix.rank(&tau.facet(i)))
            .collect::<Result<_>>()?;
        for a in 0..ranks.len() {
            for b in (a + 1)..ranks.len() {
                raw.push((ranks[a], ranks[b], v));
            }
        }
    }
    Ok(CellMatrix {
        mat: SymMatrix::from_triplets(facets_ix.count(), raw)?,
        index: RowIndex::Extended(facets_ix),
        label: label.to_string(),
    })
}

/// Signed variant: the per-tau value is further multiplied by the sign of
/// each facet pair.
fn assemble_extended_signed<F>(n: u32, d: usize, label: &str, mut value: F) -> Result<CellMatrix>
where
    F: FnMut(&Cell) -> Result<f64>,
{
    let facets_ix = CellIndexer::new(n, d - 1)?;
    let mut raw: Vec<(usize, usize, f64)> = Vec::new();
    for tau in enumerate_cells(n, d)? {
        let v = value(&tau)?;
        if v == 0.0 {
            continue;
        }
        let facets: Vec<Cell> = (0..=d).map(|i| tau.facet(i)).collect();
        let ranks: Vec<usize> = facets
            .iter()
            .map(|f| facets_ix.rank(f))
            .collect::<Result<_>>()?;
        for a in 0..facets.len() {
            for b in (a + 1)..facets.len() {
                let s = sign_entry(&facets[a], &facets[b], d)? as f64;
                raw.push((ranks[a], ranks[b], v * s));
            }
        }
    }
    Ok(CellMatrix {
        mat: SymMatrix::from_triplets(facets_ix.count(), raw)?,
        index: RowIndex::Extended(facets_ix),
        label: label.to_string(),
    })
}

/// Adjacency of the complete d-dimensional complex on {1..n}: entry 1 exactly
/// when two (d-1)-cells share d-1 vertices.
pub fn complete_adjacency(n: u32, d: usize) -> Result<CellMatrix> {
    assemble_extended(n, d, "complete", |_| Ok(1.0))
}

/// The non-random sign matrix sgn(K^d).
pub fn sgn_matrix(n: u32, d: usize) -> Result<CellMatrix> {
    assemble_extended_signed(n, d, "sgn", |_| Ok(1.0))
}

/// Hadamard factor A(j): entry over sigma, sigma' with union tau in K^d is
/// the product of chi over the j-cells inside tau.
pub fn hadamard_factor(oracle: &OutcomeOracle, j: usize) -> Result<CellMatrix> {
    let params = oracle.params();
    if j < 1 || j > params.d {
        return Err(Error::InvalidDimension(format!(
            "Hadamard factors exist for j in 1..={}, got {j}",
            params.d
        )));
    }
    assemble_extended(params.n, params.d, &format!("A({j})"), |tau| {
        for omega in tau.subcells(j) {
            if oracle.chi(&omega)? == 0 {
                return Ok(0.0);
            }
        }
        Ok(1.0)
    })
}

/// Product of the sub-top Hadamard factors, entrywise over K^{d-1}:
/// (A(1) o ... o A(d-1)).
pub fn hadamard_prefix(oracle: &OutcomeOracle) -> Result<CellMatrix> {
    let params = oracle.params();
    assemble_extended(params.n, params.d, "A(1..d-1)", |tau| {
        for u in 1..params.d {
            for omega in tau.subcells(u) {
                if oracle.chi(&omega)? == 0 {
                    return Ok(0.0);
                }
            }
        }
        Ok(1.0)
    })
}

/// Extended unsigned adjacency of a view: entry 1 when the facet-pair union
/// is a d-cell of the view, indexed by all of K^{d-1}.
pub fn extended_unsigned(view: &ComplexView) -> Result<CellMatrix> {
    let params = view.params();
    assemble_extended(params.n, params.d, "A_hat", |tau| {
        Ok(f64::from(view.member(tau)?))
    })
}

/// Extended signed adjacency: sgn(K^d) applied entrywise to the extended
/// unsigned adjacency.
pub fn extended_signed(view: &ComplexView) -> Result<CellMatrix> {
    let params = view.params();
    assemble_extended_signed(params.n, params.d, "A_hat+", |tau| {
        Ok(f64::from(view.member(tau)?))
    })
}

/// Restricted adjacency over the view's own (d-1)-cells.
pub fn restricted(view: &ComplexView, signed: bool) -> Result<CellMatrix> {
    let params = view.params();
    let rows = view.list_cells(params.d - 1)?;
    let pos: HashMap<Cell, usize> = rows
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect();
    let mut raw: Vec<(usize, usize, f64)> = Vec::new();
    for tau in view.list_cells(params.d)? {
        let facets: Vec<Cell> = (0..=params.d).map(|i| tau.facet(i)).collect();
        for a in 0..facets.len() {
            for b in (a + 1)..facets.len() {
                let (ra, rb) = (pos[&facets[a]], pos[&facets[b]]);
                let v = if signed {
                    sign_entry(&facets[a], &facets[b], params.d)? as f64
                } else {
                    1.0
                };
                raw.push((ra, rb, v));
            }
        }
    }
    Ok(CellMatrix {
        mat: SymMatrix::from_triplets(rows.len(), raw)?,
        index: RowIndex::Restricted(rows),
        label: if signed { "A+" } else { "A" }.to_string(),
    })
}

/// Centered extended matrix B = (A(1) o ... o A(d-1)) o (A(d) - p_d A(d)
/// of the complete complex); the signed variant multiplies by sgn(K^d).
pub fn centered(oracle: &OutcomeOracle, signed: bool) -> Result<CellMatrix> {
    let params = oracle.params();
    let p_d = params.p[params.d - 1];
    let value = |tau: &Cell| -> Result<f64> {
        for u in 1..params.d {
            for omega in tau.subcells(u) {
                if oracle.chi(&omega)? == 0 {
                    return Ok(0.0);
                }
            }
        }
        Ok(oracle.chi(tau)? as f64 - p_d)
    };
    if signed {
        assemble_extended_signed(params.n, params.d, "B+", value)
    } else {
        assemble_extended(params.n, params.d, "B", value)
    }
}

/// The normalization scalar of the spectral pipeline:
/// sqrt(n d prod_r p_r^beta_r (1 - p_d)) with beta_r = C(d, r).
pub fn normalization_denominator(params: &ModelParams) -> Result<f64> {
    let mut prod = 1.0;
    for r in 1..=params.d {
        prod *= params.p[r - 1].powf(binom_f64(params.d as u64, r as u64));
    }
    let sq = params.n as f64 * params.d as f64 * prod * (1.0 - params.p[params.d - 1]);
    if sq <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(sq.sqrt())
}

/// Scales every entry by the reciprocal normalization denominator.
pub fn normalize(m: &CellMatrix, params: &ModelParams) -> Result<CellMatrix> {
    let denom = normalization_denominator(params)?;
    Ok(CellMatrix {
        mat: m.mat.scaled(1.0 / denom),
        index: m.index.clone(),
        label: format!("{}~", m.label),
    })
}

/// Boundary operator of a view: rows are its (d-1)-cells, columns its
/// d-cells, entries the induced orientation signs.
#[derive(Debug, Clone)]
pub struct BoundaryMatrix {
    pub rows: Vec<Cell>,
    pub cols: Vec<Cell>,
    entries: Vec<(u32, u32, i8)>,
}

impl BoundaryMatrix {
    pub fn entries(&self) -> &[(u32, u32, i8)] {
        &self.entries
    }

    pub fn nnz_per_column(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.cols.len()];
        for &(_, c, _) in &self.entries {
            counts[c as usize] += 1;
        }
        counts
    }
}

/// Assembles the boundary operator, the Laplacian L = boundary boundary^t,
/// and the degree diagonal D (number of d-cells containing each (d-1)-cell).
pub fn boundary_and_laplacian(
    view: &ComplexView,
) -> Result<(BoundaryMatrix, CellMatrix, Vec<f64>)> {
    let params = view.params();
    let rows = view.list_cells(params.d - 1)?;
    let cols = view.list_cells(params.d)?;
    let pos: HashMap<Cell, usize> = rows
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect();

    let mut entries = Vec::with_capacity(cols.len() * (params.d + 1));
    let mut lap: HashMap<(u32, u32), f64> = HashMap::new();
    let mut degree = vec![0.0; rows.len()];
    for (cj, tau) in cols.iter().enumerate() {
        let faces = boundary_with_signs(&OrientedCell::positive(tau.clone()))?;
        let indexed: Vec<(usize, i8)> = faces.iter().map(|(f, s)| (pos[f], *s)).collect();
        for &(ri, s) in &indexed {
            entries.push((ri as u32, cj as u32, s));
            degree[ri] += 1.0;
        }
        for a in 0..indexed.len() {
            for b in a..indexed.len() {
                let (ra, sa) = indexed[a];
                let (rb, sb) = indexed[b];
                let key = if ra <= rb {
                    (ra as u32, rb as u32)
                } else {
                    (rb as u32, ra as u32)
                };
                *lap.entry(key).or_insert(0.0) += (sa * sb) as f64;
            }
        }
    }
    let raw: Vec<(usize, usize, f64)> = lap
        .into_iter()
        .map(|((r, c), v)| (r as usize, c as usize, v))
        .collect();
    let lap = CellMatrix {
        mat: SymMatrix::from_triplets(rows.len(), raw)?,
        index: RowIndex::Restricted(rows.clone()),
        label: "L".to_string(),
    };
    Ok((
        BoundaryMatrix {
            rows,
            cols,
            entries,
        },
        lap,
        degree,
    ))
}

/// Exact covariance between two extended-adjacency entries, each given by
/// the facet pair whose union is a d-cell.
///
/// Writing T_1, T_2 for the two unions, the value is
///   prod over sub-cells lying in exactly one of T_1, T_2 of E chi
///   times Var of the product of chi over sub-cells of T_1 intersect T_2,
/// and 0 when the unions share no vertex (all products over sub-cells of
/// dimension >= 1).
pub fn entry_covariance(
    pair1: (&Cell, &Cell),
    pair2: (&Cell, &Cell),
    params: &ModelParams,
) -> Result<f64> {
    let t1 = pair1.0.union(pair1.1);
    let t2 = pair2.0.union(pair2.1);
    if t1.dim() != params.d || t2.dim() != params.d {
        return Err(Error::InvalidArgument(
            "each pair must union to a d-cell".into(),
        ));
    }
    let shared: Vec<u32> = t1
        .vertices()
        .iter()
        .copied()
        .filter(|&v| t2.contains(v))
        .collect();
    if shared.is_empty() {
        return Ok(0.0);
    }

    // product of E chi over cells inside exactly one of the two unions
    let mut outer = 1.0;
    for u in 1..=params.d {
        for omega in t1.subcells(u) {
            if !omega.is_subset_of(&t2) {
                outer *= params.p[u - 1];
            }
        }
        for omega in t2.subcells(u) {
            if !omega.is_subset_of(&t1) {
                outer *= params.p[u - 1];
            }
        }
    }

    // Var of the chi-product over cells inside the intersection; the
    // second moment of a 0/1 product equals its mean, so Var = m - m^2.
    let mut mean = 1.0;
    if shared.len() >= 2 {
        let inter = Cell::new(shared)?;
        for u in 1..=inter.dim().min(params.d) {
            for _ in inter.subcells(u) {
                mean *= params.p[u - 1];
            }
        }
    }
    Ok(outer * (mean - mean * mean))
}

/// Writes a matrix in coordinate text form: a "dim nnz" header, then one
/// "row col value" line per stored upper-triangle entry.
pub fn write_coordinate<W: Write>(m: &CellMatrix, w: &mut W) -> Result<()> {
    writeln!(w, "{} {}", m.dim(), m.mat.nnz())?;
    for &(r, c, v) in m.mat.triplets() {
        writeln!(w, "{r} {c} {v}")?;
    }
    Ok(())
}

/// Writes the row index sidecar: one "row v1,v2,..." line per row.
pub fn write_index_sidecar<W: Write>(m: &CellMatrix, w: &mut W) -> Result<()> {
    for i in 0..m.dim() {
        let cell = m.index.cell(i)?;
        let verts: Vec<String> = cell.vertices().iter().map(|v| v.to_string()).collect();
        writeln!(w, "{i} {}", verts.join(","))?;
    }
    Ok(())
}
