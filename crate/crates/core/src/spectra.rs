//! Empirical spectral distributions, reference laws (semicircle and its
//! Bernoulli tensor), moment estimators, Kolmogorov-Smirnov distances, and
//! the Frobenius perturbation sandwich.

use serde::Serialize;

use crate::combin::catalan;
use crate::eigen::eigenvalues_sym;
use crate::error::{Error, Result};
use crate::matrices::{CellMatrix, SymMatrix};
use crate::sampler::ModelParams;

/// Right-continuous step CDF with finitely many jumps.
#[derive(Debug, Clone)]
pub struct StepCdf {
    /// (x, cumulative mass through x), strictly increasing in x.
    points: Vec<(f64, f64)>,
}

impl StepCdf {
    /// Builds from (location, mass) pairs; equal locations are merged.
    pub fn from_masses(mut masses: Vec<(f64, f64)>) -> Self {
        masses.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut points: Vec<(f64, f64)> = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for (x, m) in masses {
            acc += m;
            match points.last_mut() {
                Some(last) if last.0 == x => last.1 = acc,
                _ => points.push((x, acc)),
            }
        }
        Self { points }
    }

    /// P(X <= x).
    pub fn eval(&self, x: f64) -> f64 {
        match self
            .points
            .binary_search_by(|p| p.0.partial_cmp(&x).unwrap())
        {
            Ok(i) => self.points[i].1,
            Err(0) => 0.0,
            Err(i) => self.points[i - 1].1,
        }
    }

    /// P(X < x).
    pub fn eval_left(&self, x: f64) -> f64 {
        match self
            .points
            .binary_search_by(|p| p.0.partial_cmp(&x).unwrap())
        {
            Ok(0) => 0.0,
            Ok(i) => self.points[i - 1].1,
            Err(0) => 0.0,
            Err(i) => self.points[i - 1].1,
        }
    }

    pub fn jump_locations(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.1)
    }
}

/// Rounds eigenvalues within tol of zero to exactly zero. Dense solves
/// resolve eigenvalues to absolute accuracy on the order of
/// epsilon * ||M||, so kernel eigenvalues come back as jitter on both
/// sides of zero; snapping them restores the spectral atom before an ESD
/// is built.
pub fn snap_zero_eigenvalues(eigs: &mut [f64], tol: f64) {
    for v in eigs.iter_mut() {
        if v.abs() <= tol {
            *v = 0.0;
        }
    }
}

/// A snap tolerance proportional to the spectral scale of the solve.
pub fn zero_snap_tolerance(eigs: &[f64]) -> f64 {
    let max = eigs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    1e-10 * max.max(1e-300)
}

/// Empirical spectral distribution: each eigenvalue carries mass
/// 1/scale_dim, plus an atom at zero for the padding of block-extended
/// views when scale_dim exceeds the eigenvalue count.
pub fn esd(eigs: &[f64], scale_dim: usize) -> Result<StepCdf> {
    if scale_dim < eigs.len() {
        return Err(Error::InvalidArgument(format!(
            "scale dimension {} below eigenvalue count {}",
            scale_dim,
            eigs.len()
        )));
    }
    if scale_dim == 0 {
        return Ok(StepCdf::from_masses(vec![(0.0, 1.0)]));
    }
    let w = 1.0 / scale_dim as f64;
    let mut masses: Vec<(f64, f64)> = eigs.iter().map(|&x| (x, w)).collect();
    let pad = scale_dim - eigs.len();
    if pad > 0 {
        masses.push((0.0, pad as f64 * w));
    }
    Ok(StepCdf::from_masses(masses))
}

/// CDF of the normalized semicircle law on [-2, 2].
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * std::f64::consts::PI)
            + (x / 2.0).asin() / std::f64::consts::PI
    }
}

/// Density of the normalized semicircle law.
pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * std::f64::consts::PI)
    }
}

/// Moments of the semicircle law: Catalan numbers at even orders.
pub fn semicircle_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        catalan(k as u64 / 2) as f64
    }
}

/// A reference law for KS comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceLaw {
    Semicircle,
    /// Law of (Bernoulli(c) independent of semicircle) products: the
    /// semicircle scaled by c plus an atom of mass 1 - c at zero.
    BernoulliTensor {
        c: f64,
    },
}

impl ReferenceLaw {
    pub fn tensor(c: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tensor law needs c in (0, 1], got {c}"
            )));
        }
        Ok(ReferenceLaw::BernoulliTensor { c })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ReferenceLaw::Semicircle => semicircle_cdf(x),
            ReferenceLaw::BernoulliTensor { c } => {
                c * semicircle_cdf(x) + if x >= 0.0 { 1.0 - c } else { 0.0 }
            }
        }
    }

    /// Left limit of the CDF (differs from cdf only at the zero atom).
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x) - if x == 0.0 { self.atom_at_zero() } else { 0.0 }
    }

    /// Continuous part of the density (the atom is reported separately).
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            ReferenceLaw::Semicircle => semicircle_density(x),
            ReferenceLaw::BernoulliTensor { c } => c * semicircle_density(x),
        }
    }

    pub fn atom_at_zero(&self) -> f64 {
        match *self {
            ReferenceLaw::Semicircle => 0.0,
            ReferenceLaw::BernoulliTensor { c } => 1.0 - c,
        }
    }

    pub fn moment(&self, k: usize) -> f64 {
        match *self {
            ReferenceLaw::Semicircle => semicircle_moment(k),
            ReferenceLaw::BernoulliTensor { c } => c * semicircle_moment(k),
        }
    }
}

/// sup_x |F_emp(x) - F_ref(x)|, evaluated from both sides of every jump of
/// the empirical CDF and of the reference atom.
pub fn ks_distance(emp: &StepCdf, law: &ReferenceLaw) -> f64 {
    let mut sup: f64 = 0.0;
    let candidates = emp.jump_locations().chain(std::iter::once(0.0));
    for x in candidates {
        let right = (emp.eval(x) - law.cdf(x)).abs();
        let left = (emp.eval_left(x) - law.cdf_left(x)).abs();
        sup = sup.max(right).max(left);
    }
    sup
}

/// A moment estimate with its standard error (zero in exact mode).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// Estimates m_k = trace(M^k) / dim for k = 1..=max_order.
///
/// With probes == dim the probe vectors are the standard basis and the
/// result is exact. Otherwise Rademacher probes drawn deterministically
/// from the seed give the Hutchinson estimator with a sample standard
/// error.
pub fn trace_moments(
    m: &SymMatrix,
    max_order: usize,
    probes: usize,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    if max_order == 0 || max_order > 12 {
        return Err(Error::InvalidArgument(format!(
            "moment order must be 1..=12, got {max_order}"
        )));
    }
    if probes == 0 {
        return Err(Error::InvalidArgument("need at least one probe".into()));
    }
    let dim = m.dim();
    if dim == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let exact = probes == dim;
    let mut samples = vec![Vec::with_capacity(probes); max_order];
    let mut z = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    let mut next = vec![0.0; dim];
    let mut state = seed;
    for probe in 0..probes {
        if exact {
            z.fill(0.0);
            z[probe] = 1.0;
        } else {
            for slot in z.iter_mut() {
                state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
                let mut h = state;
                h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
                h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
                h ^= h >> 31;
                *slot = if h & 1 == 1 { 1.0 } else { -1.0 };
            }
        }
        v.copy_from_slice(&z);
        for k in 1..=max_order {
            m.matvec(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
            let quad: f64 = z.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            samples[k - 1].push(quad);
        }
    }
    let out = samples
        .into_iter()
        .map(|vals| {
            if exact {
                MomentEstimate {
                    value: vals.iter().sum::<f64>() / dim as f64,
                    stderr: 0.0,
                }
            } else {
                let nf = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / nf;
                let stderr = if vals.len() > 1 {
                    let var =
                        vals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
                    (var / nf).sqrt() / dim as f64
                } else {
                    f64::INFINITY
                };
                MomentEstimate {
                    value: mean / dim as f64,
                    stderr,
                }
            }
        })
        .collect();
    Ok(out)
}

/// m_k for k = 1..=max_order directly from eigenvalues, dividing by a
/// possibly larger ambient dimension.
pub fn moments_from_eigenvalues(eigs: &[f64], scale_dim: usize, max_order: usize) -> Vec<f64> {
    (1..=max_order)
        .map(|k| eigs.iter().map(|x| x.powi(k as i32)).sum::<f64>() / scale_dim.max(1) as f64)
        .collect()
}

/// Exact (m_2, m_4) of a sparse symmetric matrix without an eigensolve:
/// m_2 from the Frobenius norm and m_4 by accumulating squared rows of
/// M^2 one row at a time.
pub fn second_and_fourth_moment(m: &SymMatrix) -> (f64, f64) {
    let dim = m.dim();
    if dim == 0 {
        return (0.0, 0.0);
    }
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); dim];
    for &(r, c, v) in m.triplets() {
        rows[r as usize].push((c, v));
        if r != c {
            rows[c as usize].push((r, v));
        }
    }
    let m2 = m.frobenius_sq() / dim as f64;
    let mut trace4 = 0.0;
    let mut acc = vec![0.0f64; dim];
    let mut touched: Vec<u32> = Vec::new();
    for i in 0..dim {
        for &(j, v) in &rows[i] {
            for &(k, w) in &rows[j as usize] {
                if acc[k as usize] == 0.0 {
                    touched.push(k);
                }
                acc[k as usize] += v * w;
            }
        }
        for &k in &touched {
            let x = acc[k as usize];
            trace4 += x * x;
            acc[k as usize] = 0.0;
        }
        touched.clear();
    }
    (m2, trace4 / dim as f64)
}

/// Checks both inequalities of the Frobenius perturbation sandwich for the
/// ESDs of (A+B)/sqrt(np_d) against A/sqrt(np_d): the CDF at lambda is
/// bounded by the CDF at lambda +- eps sqrt(N/np_d) up to ||B||_F^2 /
/// (eps^2 N^2).
pub fn perturbation_sandwich_check(
    a: &SymMatrix,
    b: &SymMatrix,
    lambda: f64,
    eps: f64,
    np_d: f64,
) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    if eps <= 0.0 || np_d <= 0.0 {
        return Err(Error::InvalidArgument(
            "eps and np_d must be positive".into(),
        ));
    }
    let n = a.dim() as f64;
    let scale = np_d.sqrt();
    let eigs_sum = eigenvalues_sym(&a.add(b)?)?;
    let eigs_a = eigenvalues_sym(a)?;
    let frac_below = |eigs: &[f64], t: f64| -> f64 {
        eigs.iter().filter(|&&x| x / scale < t).count() as f64 / n
    };
    let shift = eps * (n / np_d).sqrt();
    let slack = b.frobenius_sq() / (eps * eps * n * n);
    let mid = frac_below(&eigs_sum, lambda);
    let upper = frac_below(&eigs_a, lambda + shift) + slack;
    let lower = frac_below(&eigs_a, lambda - shift) - slack;
    let fuzz = 1e-12;
    Ok(mid <= upper + fuzz && mid >= lower - fuzz)
}

/// Histogram over uniform bins.
#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 || !lo.is_finite() || !hi.is_finite() || hi <= lo {
            return Err(Error::InvalidArgument(format!(
                "bad histogram spec: bins = {bins}, range = [{lo}, {hi}]"
            )));
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            if v < lo || v > hi {
                continue;
            }
            let mut idx = ((v - lo) / width) as usize;
            if idx >= bins {
                idx = bins - 1;
            }
            counts[idx] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    /// Density normalized by the total number of values supplied (so bins
    /// outside the range lower the integral below one).
    pub fn densities(&self, total: usize) -> Vec<f64> {
        let width = self.edges[1] - self.edges[0];
        self.counts
            .iter()
            .map(|&c| c as f64 / (total.max(1) as f64 * width))
            .collect()
    }
}

/// Default histogram geometry for normalized spectra.
pub const DEFAULT_BINS: usize = 61;
pub const DEFAULT_RANGE: (f64, f64) = (-2.5, 2.5);

/// Eigenvalues, ESD summaries, and reference comparisons for one matrix.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralSummary {
    pub matrix: String,
    pub n: u32,
    pub d: usize,
    pub p: Vec<f64>,
    pub seed: u64,
    pub dim: usize,
    pub moments: Vec<f64>,
    pub ks_semicircle: f64,
    pub ks_tensor: f64,
    pub c_hat: f64,
    #[serde(skip)]
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub histogram: Histogram,
}

/// Knobs for summary construction.
#[derive(Debug, Clone, Copy)]
pub struct SummaryOptions {
    pub bins: usize,
    pub range: (f64, f64),
    pub max_order: usize,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            range: DEFAULT_RANGE,
            max_order: 8,
        }
    }
}

impl SpectralSummary {
    /// Solves for the spectrum and verifies the trace identities before
    /// summarizing; c_hat is the observed (d-1)-cell fraction.
    pub fn compute(
        m: &CellMatrix,
        params: &ModelParams,
        c_hat: f64,
        opts: SummaryOptions,
    ) -> Result<Self> {
        let mut eigenvalues = eigenvalues_sym(&m.mat)?;
        verify_trace_identities(&m.mat, &eigenvalues)?;
        let tol = zero_snap_tolerance(&eigenvalues);
        snap_zero_eigenvalues(&mut eigenvalues, tol);
        let dim = m.dim();
        let moments = moments_from_eigenvalues(&eigenvalues, dim, opts.max_order);
        let cdf = esd(&eigenvalues, dim)?;
        let tensor = ReferenceLaw::tensor(params.dom_c_value().clamp(f64::MIN_POSITIVE, 1.0))?;
        let histogram = Histogram::new(&eigenvalues, opts.bins, opts.range.0, opts.range.1)?;
        Ok(Self {
            matrix: m.label.clone(),
            n: params.n,
            d: params.d,
            p: params.p.clone(),
            seed: params.seed,
            dim,
            moments,
            ks_semicircle: ks_distance(&cdf, &ReferenceLaw::Semicircle),
            ks_tensor: ks_distance(&cdf, &tensor),
            c_hat,
            eigenvalues,
            histogram,
        })
    }
}

/// Health check: the eigenvalue sum must match the trace to
/// 1e-8 * dim * max|entry| and the square sum must match the squared
/// Frobenius norm to 1e-8 relative.
pub fn verify_trace_identities(m: &SymMatrix, eigs: &[f64]) -> Result<()> {
    let sum: f64 = eigs.iter().sum();
    let sum_sq: f64 = eigs.iter().map(|x| x * x).sum();
    let trace = m.trace();
    let fro = m.frobenius_sq();
    let tol_sum = 1e-8 * m.dim().max(1) as f64 * m.max_abs_entry().max(1e-300);
    if (sum - trace).abs() > tol_sum {
        return Err(Error::SpectralHealth(format!(
            "eigenvalue sum {sum} vs trace {trace} (tol {tol_sum})"
        )));
    }
    let tol_sq = 1e-8 * fro.max(f64::MIN_POSITIVE);
    if (sum_sq - fro).abs() > tol_sq {
        return Err(Error::SpectralHealth(format!(
            "eigenvalue square sum {sum_sq} vs Frobenius {fro}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::SymMatrix;

    #[test]
    fn semicircle_cdf_values() {
        assert_eq!(semicircle_cdf(-2.0), 0.0);
        assert_eq!(semicircle_cdf(2.0), 1.0);
        assert!((semicircle_cdf(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(semicircle_cdf(-3.0), 0.0);
        assert_eq!(semicircle_cdf(3.0), 1.0);
    }

    #[test]
    fn semicircle_moments_are_catalan() {
        assert_eq!(semicircle_moment(1), 0.0);
        assert_eq!(semicircle_moment(2), 1.0);
        assert_eq!(semicircle_moment(4), 2.0);
        assert_eq!(semicircle_moment(6), 5.0);
        assert_eq!(semicircle_moment(3), 0.0);
    }

    /// Quadrature oracle: integrate the density with the substitution
    /// x = 2 sin(theta), which removes the edge singularities, and compare
    /// with the closed-form CDF at 100 points.
    #[test]
    fn semicircle_cdf_matches_quadrature() {
        let integral_to = |x: f64| {
            // F(x) = (2/pi) * int_{-pi/2}^{asin(x/2)} cos^2 theta dtheta
            let a = -std::f64::consts::FRAC_PI_2;
            let b = (x / 2.0).asin();
            let steps = 2000;
            let h = (b - a) / steps as f64;
            let f = |t: f64| (2.0 / std::f64::consts::PI) * t.cos() * t.cos();
            // composite Simpson
            let mut acc = f(a) + f(b);
            for i in 1..steps {
                let t = a + i as f64 * h;
                acc += f(t) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        for i in 0..100 {
            let x = -2.0 + 4.0 * (i as f64 + 0.5) / 100.0;
            assert!(
                (semicircle_cdf(x) - integral_to(x)).abs() < 1e-10,
                "x = {x}"
            );
        }
    }

    #[test]
    fn tensor_law_basics() {
        let t = ReferenceLaw::tensor(0.8).unwrap();
        assert!((t.moment(2) - 0.8).abs() < 1e-15);
        assert_eq!(t.moment(3), 0.0);
        assert!((t.atom_at_zero() - 0.2).abs() < 1e-15);
        // c = 1 degenerates to the semicircle
        let one = ReferenceLaw::tensor(1.0).unwrap();
        for i in 0..50 {
            let x = -2.5 + 5.0 * i as f64 / 49.0;
            assert!((one.cdf(x) - semicircle_cdf(x)).abs() < 1e-15);
        }
        assert!(ReferenceLaw::tensor(0.0).is_err());
        assert!(ReferenceLaw::tensor(1.5).is_err());
    }

    #[test]
    fn esd_basics() {
        let cdf = esd(&[-1.0, 1.0], 2).unwrap();
        assert_eq!(cdf.eval(0.0), 0.5);
        assert_eq!(cdf.eval(1.0), 1.0);
        assert_eq!(cdf.eval(-1.5), 0.0);
        assert_eq!(cdf.eval_left(-1.0), 0.0);
        assert_eq!(cdf.eval_left(1.0), 0.5);

        // padding adds the zero atom
        let padded = esd(&[-1.0, 1.0], 4).unwrap();
        assert_eq!(padded.eval(0.0), 0.75);
        assert_eq!(padded.eval_left(0.0), 0.25);

        // empty spectrum with positive scale is a point mass at zero
        let delta = esd(&[], 3).unwrap();
        assert_eq!(delta.eval(0.0), 1.0);
        assert_eq!(delta.eval(-0.1), 0.0);

        assert!(esd(&[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn padded_restricted_esd_equals_extended_esd() {
        use crate::matrices::{extended_unsigned, restricted};
        use crate::sampler::{ComplexView, ModelParams, OutcomeOracle};
        let params = ModelParams::new(7, 2, vec![0.6, 0.5], 5).unwrap();
        let oracle = OutcomeOracle::new(params);
        let view = ComplexView::lower(&oracle);
        let a = restricted(&view, false).unwrap();
        let a_hat = extended_unsigned(&view).unwrap();
        let small = eigenvalues_sym(&a.mat).unwrap();
        let full = eigenvalues_sym(&a_hat.mat).unwrap();
        // padding the restricted spectrum into the extended dimension
        // reproduces the extended ESD at every jump point
        let lhs = esd(&small, a_hat.dim()).unwrap();
        let rhs = esd(&full, a_hat.dim()).unwrap();
        for x in lhs.jump_locations().chain(rhs.jump_locations()) {
            for probe in [x - 1e-7, x + 1e-7] {
                assert!(
                    (lhs.eval(probe) - rhs.eval(probe)).abs() < 1e-9,
                    "mismatch near {x}"
                );
            }
        }
    }

    #[test]
    fn ks_distance_examples() {
        // delta_0 against the semicircle: sup is 1/2 at the atom
        let delta = esd(&[], 1).unwrap();
        assert!((ks_distance(&delta, &ReferenceLaw::Semicircle) - 0.5).abs() < 1e-15);
        // delta_0 against the tensor law with c = 0.8
        let t = ReferenceLaw::tensor(0.8).unwrap();
        assert!((ks_distance(&delta, &t) - 0.4).abs() < 1e-15);
        // sampling the law exactly at its own quantiles gives a small sup
        let qs: Vec<f64> = (1..=200)
            .map(|i| {
                let target = i as f64 / 201.0;
                // crude inverse by bisection
                let mut lo = -2.0;
                let mut hi = 2.0;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if semicircle_cdf(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();
        let cdf = esd(&qs, 200).unwrap();
        assert!(ks_distance(&cdf, &ReferenceLaw::Semicircle) < 0.02);
    }

    #[test]
    fn trace_moments_exact_mode() {
        let m =
            SymMatrix::from_triplets(4, vec![(0, 0, 2.0), (1, 1, -1.0), (2, 2, 0.5), (3, 3, 3.0)])
                .unwrap();
        let est = trace_moments(&m, 3, 4, 7).unwrap();
        let expect =
            |k: i32| (2.0f64.powi(k) + (-1.0f64).powi(k) + 0.5f64.powi(k) + 3.0f64.powi(k)) / 4.0;
        for (k, e) in est.iter().enumerate() {
            assert!((e.value - expect(k as i32 + 1)).abs() < 1e-12);
            assert_eq!(e.stderr, 0.0);
        }
        // zero-diagonal first moment is exactly zero in exact mode
        let adj = SymMatrix::from_triplets(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let est = trace_moments(&adj, 2, 3, 0).unwrap();
        assert_eq!(est[0].value, 0.0);
        assert!((est[1].value - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn trace_moments_rademacher_matches_eigen() {
        // deterministic pseudo-random sym matrix
        let n = 120;
        let mut raw = Vec::new();
        let mut state = 5u64;
        for i in 0..n {
            for j in i..n {
                state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
                let mut h = state;
                h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
                h ^= h >> 31;
                if h % 10 < 2 && i != j {
                    raw.push((i, j, if h.is_multiple_of(2) { 1.0 } else { -1.0 }));
                }
            }
        }
        let m = SymMatrix::from_triplets(n, raw).unwrap();
        let eigs = eigenvalues_sym(&m).unwrap();
        let exact = moments_from_eigenvalues(&eigs, n, 4);
        let est = trace_moments(&m, 4, 64, 99).unwrap();
        for k in [2usize, 4] {
            let e = &est[k - 1];
            assert!(
                (e.value - exact[k - 1]).abs() <= 3.0 * e.stderr,
                "k = {k}: {} vs {} +- {}",
                e.value,
                exact[k - 1],
                e.stderr
            );
        }
        assert!(trace_moments(&m, 13, 8, 0).is_err());
        assert!(trace_moments(&m, 4, 0, 0).is_err());
    }

    #[test]
    fn sandwich_trivial_cases() {
        let a = SymMatrix::from_triplets(6, vec![(0, 1, 1.0), (2, 3, -1.0), (4, 5, 0.5)]).unwrap();
        let zero = SymMatrix::zero(6);
        for lambda in [-1.0, 0.0, 0.3, 2.0] {
            assert!(perturbation_sandwich_check(&a, &zero, lambda, 0.5, 4.0).unwrap());
        }
        // A = 0, B = I with tiny eps: the bound is vacuous but still true
        let eye = SymMatrix::from_triplets(4, (0..4).map(|i| (i, i, 1.0)).collect()).unwrap();
        let zero4 = SymMatrix::zero(4);
        assert!(perturbation_sandwich_check(&zero4, &eye, 0.1, 1e-3, 1.0).unwrap());
        assert!(perturbation_sandwich_check(&a, &eye, 0.0, 0.5, 1.0).is_err());
        assert!(perturbation_sandwich_check(&a, &zero, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn sandwich_random_pairs() {
        let mut state = 11u64;
        let mut unit = || {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut h = state;
            h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            h ^= h >> 31;
            (h >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let n = 12;
            let mut ra = Vec::new();
            let mut rb = Vec::new();
            for i in 0..n {
                for j in i..n {
                    if unit() < 0.3 {
                        ra.push((i, j, unit() * 2.0 - 1.0));
                    }
                    if unit() < 0.3 {
                        rb.push((i, j, unit() * 2.0 - 1.0));
                    }
                }
            }
            let a = SymMatrix::from_triplets(n, ra).unwrap();
            let b = SymMatrix::from_triplets(n, rb).unwrap();
            let lambda = unit() * 4.0 - 2.0;
            let eps = unit() + 0.05;
            assert!(perturbation_sandwich_check(&a, &b, lambda, eps, 3.0).unwrap());
        }
    }

    #[test]
    fn histogram_shape() {
        let h = Histogram::new(&[-1.0, 1.0], 2, -2.0, 2.0).unwrap();
        assert_eq!(h.counts, vec![1, 1]);
        assert_eq!(h.edges.len(), 3);
        let d = h.densities(2);
        assert!((d.iter().sum::<f64>() * 2.0 - 1.0).abs() < 1e-12);
        assert!(Histogram::new(&[0.0], 0, 0.0, 1.0).is_err());
        assert!(Histogram::new(&[0.0], 4, 1.0, 1.0).is_err());
    }

    #[test]
    fn trace_identity_check_flags_corruption() {
        let m = SymMatrix::from_triplets(2, vec![(0, 1, 1.0)]).unwrap();
        let eigs = eigenvalues_sym(&m).unwrap();
        assert!(verify_trace_identities(&m, &eigs).is_ok());
        assert!(verify_trace_identities(&m, &[0.0, 5.0]).is_err());
    }
}
