//! Reproducible sampling of multi-parameter random complexes.
//!
//! Every cell outcome is a pure function of (seed, cell), independent of the
//! ambient vertex count, so complexes sampled at different n from the same
//! seed agree on their common cells. The lower model keeps a cell when all
//! of its sub-cells (dimension >= 1) were drawn; the upper model keeps a
//! cell when some super-cell of dimension <= d was drawn.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::cells::{enumerate_cells, Cell};
use crate::combin::{binom, binom_f64};
use crate::error::{Error, Result};

/// Model parameters: n vertices, top dimension d >= 2, inclusion
/// probabilities p = (p_1, ..., p_d) with p_i in (0, 1], and a 64-bit seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub n: u32,
    pub d: usize,
    pub p: Vec<f64>,
    pub seed: u64,
}

impl ModelParams {
    pub fn new(n: u32, d: usize, p: Vec<f64>, seed: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(format!(
                "top dimension must be >= 2, got {d}"
            )));
        }
        if (n as u64) < d as u64 + 1 {
            return Err(Error::InvalidArgument(format!(
                "need n >= d + 1, got n = {n}, d = {d}"
            )));
        }
        if p.len() != d {
            return Err(Error::InvalidArgument(format!(
                "need {} probabilities, got {}",
                d,
                p.len()
            )));
        }
        if p.iter().any(|&q| !(q > 0.0 && q <= 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "every p_i must lie in (0, 1], got {p:?}"
            )));
        }
        Ok(Self { n, d, p, seed })
    }

    /// The limit constant of the parameter regime:
    /// prod_{i=1}^{d-1} p_i^C(d, i+1).
    pub fn dom_c_value(&self) -> f64 {
        let mut c = 1.0;
        for i in 1..self.d {
            c *= self.p[i - 1].powf(binom_f64(self.d as u64, i as u64 + 1));
        }
        c
    }

    /// E[f_{d-1}] = C(n, d) * prod_{i=1}^{d-1} p_i^C(d, i+1).
    pub fn expected_fdminus1(&self) -> f64 {
        binom_f64(self.n as u64, self.d as u64) * self.dom_c_value()
    }

    /// Expected number of maximal (d-1)-cells:
    /// C(n, d) * prod_{i<d} p_i^C(d, i+1) * (1 - prod_{i<=d} p_i^C(d, i))^(n-d).
    pub fn expected_maximal(&self) -> f64 {
        let mut cover = 1.0;
        for i in 1..=self.d {
            cover *= self.p[i - 1].powf(binom_f64(self.d as u64, i as u64));
        }
        self.expected_fdminus1() * (1.0 - cover).powi(self.n as i32 - self.d as i32)
    }
}

/// SplitMix64 finalizer; the avalanche step of the cell mixer.
#[inline]
fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The documented cell mixer. Starting from
/// h = avalanche(seed XOR 0x9E3779B97F4A7C15), absorb the cell dimension
/// plus one and then each vertex id in ascending order, each with
/// h = avalanche(h XOR value). The final h is the 64-bit digest.
pub fn mix_cell(seed: u64, cell: &Cell) -> u64 {
    let mut h = avalanche(seed ^ 0x9E37_79B9_7F4A_7C15);
    h = avalanche(h ^ (cell.dim() as u64 + 1));
    for &v in cell.vertices() {
        h = avalanche(h ^ v as u64);
    }
    h
}

/// Parses a seed given as decimal or 0x-prefixed hex.
pub fn parse_seed(s: &str) -> Result<u64> {
    let t = s.trim();
    let parsed = if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else {
        t.parse::<u64>()
    };
    parsed.map_err(|e| Error::InvalidArgument(format!("bad seed {s:?}: {e}")))
}

/// Deterministic map cell -> Bernoulli outcome chi_tau.
///
/// chi_tau = 1 iff mix_cell(seed, tau) < floor(p_dim(tau) * 2^64), so the
/// inclusion probability is exact to the resolution of the mixer and the
/// outcome does not depend on the ambient n (the coupling across n).
#[derive(Debug)]
pub struct OutcomeOracle {
    params: ModelParams,
    thresholds: Vec<u128>,
}

impl OutcomeOracle {
    pub fn new(params: ModelParams) -> Self {
        let thresholds = params
            .p
            .iter()
            .map(|&q| (q * 2f64.powi(64)) as u128)
            .collect();
        Self { params, thresholds }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// The Bernoulli outcome for a cell of dimension 1..=d.
    pub fn chi(&self, tau: &Cell) -> Result<u8> {
        let dim = tau.dim();
        if dim < 1 || dim > self.params.d {
            return Err(Error::InvalidDimension(format!(
                "chi is defined for dimensions 1..={}, got {dim}",
                self.params.d
            )));
        }
        let h = mix_cell(self.params.seed, tau) as u128;
        Ok(u8::from(h < self.thresholds[dim - 1]))
    }

    fn chi_bool(&self, tau: &Cell) -> Result<bool> {
        Ok(self.chi(tau)? == 1)
    }
}

/// Which simplicial complex a view exposes for a fixed oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Largest complex inside the sampled hypergraph.
    Lower,
    /// Smallest complex containing the sampled hypergraph (cells of
    /// dimension <= d retained).
    Upper,
}

/// A queryable complex: an oracle together with a model choice.
/// Membership answers are memoized; the memo table never changes results,
/// so shared references may be queried from concurrent workers.
#[derive(Debug)]
pub struct ComplexView<'a> {
    oracle: &'a OutcomeOracle,
    model: Model,
    memo: RwLock<HashMap<Cell, bool>>,
}

impl<'a> ComplexView<'a> {
    pub fn new(oracle: &'a OutcomeOracle, model: Model) -> Self {
        Self {
            oracle,
            model,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn lower(oracle: &'a OutcomeOracle) -> Self {
        Self::new(oracle, Model::Lower)
    }

    pub fn upper(oracle: &'a OutcomeOracle) -> Self {
        Self::new(oracle, Model::Upper)
    }

    pub fn oracle(&self) -> &OutcomeOracle {
        self.oracle
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn params(&self) -> &ModelParams {
        self.oracle.params()
    }

    /// Membership of a cell in the viewed complex. Vertices are always
    /// members; dimensions above d are rejected.
    ///
    /// Lower-model membership recurses through facets, so each shared
    /// sub-cell is decided once; only dimensions 2..d-1 are memoized (a
    /// single chi is cheaper than a map lookup, and top cells are rarely
    /// revisited).
    pub fn member(&self, sigma: &Cell) -> Result<bool> {
        let params = self.oracle.params();
        if sigma.dim() == 0 {
            return Ok(*sigma.vertices().last().unwrap() <= params.n);
        }
        if sigma.dim() > params.d {
            return Err(Error::InvalidDimension(format!(
                "membership is defined for dimensions 0..={}, got {}",
                params.d,
                sigma.dim()
            )));
        }
        match self.model {
            Model::Lower => self.member_lower(sigma),
            Model::Upper => self.member_upper(sigma),
        }
    }

    fn member_lower(&self, sigma: &Cell) -> Result<bool> {
        let dim = sigma.dim();
        if dim == 1 {
            return self.oracle.chi_bool(sigma);
        }
        let d = self.oracle.params().d;
        let memoize = dim < d;
        if memoize {
            if let Some(&hit) = self.memo.read().unwrap().get(sigma) {
                return Ok(hit);
            }
        }
        let mut value = self.oracle.chi_bool(sigma)?;
        if value {
            for i in 0..=dim {
                if !self.member_lower(&sigma.facet(i))? {
                    value = false;
                    break;
                }
            }
        }
        if memoize {
            self.memo.write().unwrap().insert(sigma.clone(), value);
        }
        Ok(value)
    }

    fn member_upper(&self, sigma: &Cell) -> Result<bool> {
        let params = self.oracle.params();
        if sigma.dim() == params.d {
            return self.oracle.chi_bool(sigma);
        }
        if let Some(&hit) = self.memo.read().unwrap().get(sigma) {
            return Ok(hit);
        }
        let mut found = self.oracle.chi_bool(sigma)?;
        if !found {
            let complement: Vec<u32> = (1..=params.n).filter(|&v| !sigma.contains(v)).collect();
            let max_extra = params.d - sigma.dim();
            'sizes: for extra in 1..=max_extra {
                let mut hit = false;
                for_each_combination(&complement, extra, &mut |chosen| {
                    if hit {
                        return;
                    }
                    let mut verts: Vec<u32> = sigma
                        .vertices()
                        .iter()
                        .chain(chosen.iter())
                        .copied()
                        .collect();
                    verts.sort_unstable();
                    let tau = Cell::new(verts).expect("distinct sorted vertices");
                    if self.oracle.chi_bool(&tau).unwrap_or(false) {
                        hit = true;
                    }
                });
                if hit {
                    found = true;
                    break 'sizes;
                }
            }
        }
        self.memo.write().unwrap().insert(sigma.clone(), found);
        Ok(found)
    }

    /// All j-cells of the view in colex order; j = 0 lists the vertices.
    pub fn list_cells(&self, j: usize) -> Result<Vec<Cell>> {
        let params = self.oracle.params();
        if j == 0 {
            return (1..=params.n).map(|v| Cell::new(vec![v])).collect();
        }
        if j > params.d {
            return Err(Error::InvalidDimension(format!(
                "view has no cells above dimension {}",
                params.d
            )));
        }
        let mut out = Vec::new();
        for c in enumerate_cells(params.n, j)? {
            if self.member(&c)? {
                out.push(c);
            }
        }
        Ok(out)
    }

    /// f_{d-1}: the number of (d-1)-cells of the view.
    pub fn count_dminus1(&self) -> Result<usize> {
        Ok(self.list_cells(self.oracle.params().d - 1)?.len())
    }

    /// Number of maximal (d-1)-cells: members contained in no d-cell of the
    /// view. One pass over the d-cells marks covered facets.
    pub fn count_maximal(&self) -> Result<usize> {
        let params = self.oracle.params();
        let members = self.list_cells(params.d - 1)?;
        let mut covered = vec![false; members.len()];
        for tau in self.list_cells(params.d)? {
            for i in 0..=params.d {
                if let Ok(slot) = members.binary_search(&tau.facet(i)) {
                    covered[slot] = true;
                }
            }
        }
        Ok(covered.iter().filter(|&&c| !c).count())
    }
}

/// Calls f once per k-subset of items, in colex order.
fn for_each_combination(items: &[u32], k: usize, f: &mut dyn FnMut(&[u32])) {
    if k > items.len() {
        return;
    }
    if k == 0 {
        f(&[]);
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut chosen = vec![0u32; k];
    loop {
        for (slot, &i) in chosen.iter_mut().zip(idx.iter()) {
            *slot = items[i];
        }
        f(&chosen);
        let mut i = 0;
        while i < k {
            let limit = if i + 1 < k { idx[i + 1] } else { items.len() };
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
            return;
        }
    }
}

/// Exact membership probability of a j-cell in the lower model:
/// prod_{i=1}^{j} p_i^C(j+1, i+1).
pub fn lower_membership_probability(params: &ModelParams, j: usize) -> f64 {
    let mut q = 1.0;
    for i in 1..=j {
        q *= params.p[i - 1].powf(binom(j as u64 + 1, i as u64 + 1) as f64);
    }
    q
}
