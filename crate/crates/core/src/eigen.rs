//! Dense symmetric eigenvalue solver: Householder reduction to tridiagonal
//! form followed by the implicit-shift QL iteration, eigenvalues only.
//!
//! The reduction keeps the full leading block symmetric so every inner loop
//! walks contiguous rows; this is the classic EISPACK-style algorithm with
//! the eigenvector accumulation dropped.

use crate::error::{Error, Result};
use crate::matrices::SymMatrix;

/// Largest dimension accepted for a dense eigensolve by default.
pub const DEFAULT_DENSE_CUTOFF: usize = 4000;

const MAX_QL_SWEEPS: usize = 50;

/// Eigenvalues of a sparse symmetric matrix, sorted ascending, densifying
/// internally. Fails with a pointer to trace moments above the cutoff.
pub fn eigenvalues_sym(m: &SymMatrix) -> Result<Vec<f64>> {
    eigenvalues_sym_with_cutoff(m, DEFAULT_DENSE_CUTOFF)
}

pub fn eigenvalues_sym_with_cutoff(m: &SymMatrix, cutoff: usize) -> Result<Vec<f64>> {
    if m.dim() > cutoff {
        return Err(Error::DenseCutoff {
            dim: m.dim(),
            cutoff,
        });
    }
    let mut dense = m.to_dense();
    symmetric_eigenvalues_in_place(&mut dense, m.dim())
}

/// Eigenvalues of a dense symmetric matrix given row-major; the buffer is
/// used as scratch space.
pub fn symmetric_eigenvalues_in_place(a: &mut [f64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n, "buffer must be n x n");
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(a, n, &mut d, &mut e);
    ql_implicit_shift(&mut d, &mut e)?;
    d.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    let chunks = x.len() / 4;
    for i in 0..chunks {
        let b = 4 * i;
        s0 += x[b] * y[b];
        s1 += x[b + 1] * y[b + 1];
        s2 += x[b + 2] * y[b + 2];
        s3 += x[b + 3] * y[b + 3];
    }
    for i in 4 * chunks..x.len() {
        s0 += x[i] * y[i];
    }
    s0 + s1 + s2 + s3
}

/// Householder reduction; on return d holds the diagonal and e[i] the
/// subdiagonal coupling d[i] and d[i+1] (e[n-1] unused).
fn tridiagonalize(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    let mut w = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i; // active block is a[0..l][0..l], reducing row i
        if l == 1 {
            e[0] = a[n]; // a[1][0]
            continue;
        }
        let scale: f64 = (0..l).map(|k| a[i * n + k].abs()).sum();
        if scale == 0.0 {
            e[l - 1] = a[i * n + (l - 1)];
            continue;
        }
        for k in 0..l {
            a[i * n + k] /= scale;
        }
        let mut h: f64 = (0..l).map(|k| a[i * n + k] * a[i * n + k]).sum();
        let f = a[i * n + (l - 1)];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[l - 1] = scale * g;
        h -= f * g;
        a[i * n + (l - 1)] = f - g;

        // p = A v / h over the block, using full contiguous rows
        let mut f_acc = 0.0;
        for j in 0..l {
            let (head, tail) = a.split_at(i * n);
            let row_j = &head[j * n..j * n + l];
            let v = &tail[..l];
            let g2 = dot(row_j, v) / h;
            w[j] = g2;
            f_acc += g2 * a[i * n + j];
        }
        let hh = f_acc / (2.0 * h);
        for j in 0..l {
            w[j] -= hh * a[i * n + j];
        }
        // rank-2 update A := A - v w^T - w v^T on the full block
        for j in 0..l {
            let vj = a[i * n + j];
            let wj = w[j];
            let (head, tail) = a.split_at_mut(i * n);
            let row_j = &mut head[j * n..j * n + l];
            let v = &tail[..l];
            for k in 0..l {
                row_j[k] -= vj * w[k] + wj * v[k];
            }
        }
    }
    for k in 0..n {
        d[k] = a[k * n + k];
    }
    e[n - 1] = 0.0;
}

/// Implicit-shift QL on a symmetric tridiagonal (d, e).
fn ql_implicit_shift(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd || e[m].abs() < f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::NoConvergence(MAX_QL_SWEEPS));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn splitmix(state: &mut u64) -> f64 {
        *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    fn random_dense_sym(n: usize, seed: u64) -> Vec<f64> {
        let mut state = seed;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = splitmix(&mut state);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        a
    }

    fn dense_trace_power(a: &[f64], n: usize, k: usize) -> f64 {
        // trace of A^k via repeated dense multiplication
        let mut acc = a.to_vec();
        for _ in 1..k {
            let mut next = vec![0.0; n * n];
            for i in 0..n {
                for l in 0..n {
                    let v = acc[i * n + l];
                    if v == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        next[i * n + j] += v * a[l * n + j];
                    }
                }
            }
            acc = next;
        }
        (0..n).map(|i| acc[i * n + i]).sum()
    }

    #[test]
    fn diagonal_matrix() {
        let mut a = vec![0.0; 16];
        for (i, v) in [3.0, -1.0, 2.0, 0.5].iter().enumerate() {
            a[i * 4 + i] = *v;
        }
        let eigs = symmetric_eigenvalues_in_place(&mut a, 4).unwrap();
        assert_eq!(eigs, vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_swap() {
        let mut a = vec![0.0, 1.0, 1.0, 0.0];
        let eigs = symmetric_eigenvalues_in_place(&mut a, 2).unwrap();
        assert!((eigs[0] + 1.0).abs() < 1e-14);
        assert!((eigs[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn path_graph_spectrum() {
        // P3 adjacency: eigenvalues -sqrt(2), 0, sqrt(2)
        let mut a = vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let eigs = symmetric_eigenvalues_in_place(&mut a, 3).unwrap();
        let s = 2f64.sqrt();
        assert!((eigs[0] + s).abs() < 1e-12);
        assert!(eigs[1].abs() < 1e-12);
        assert!((eigs[2] - s).abs() < 1e-12);
    }

    #[test]
    fn trace_identities_random() {
        for (n, seed) in [(20usize, 1u64), (35, 2), (50, 3)] {
            let a = random_dense_sym(n, seed);
            let mut work = a.clone();
            let eigs = symmetric_eigenvalues_in_place(&mut work, n).unwrap();
            for k in 1..=4usize {
                let lhs: f64 = eigs.iter().map(|x| x.powi(k as i32)).sum();
                let rhs = dense_trace_power(&a, n, k);
                let tol = 1e-8 * rhs.abs().max(1.0);
                assert!(
                    (lhs - rhs).abs() < tol,
                    "n={n} seed={seed} k={k}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn sparse_entry_point_and_cutoff() {
        let m = SymMatrix::from_triplets(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let eigs = eigenvalues_sym(&m).unwrap();
        assert!((eigs[0] + 2f64.sqrt()).abs() < 1e-12);

        let big = SymMatrix::zero(10);
        let err = eigenvalues_sym_with_cutoff(&big, 5).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("trace_moments"), "{msg}");
    }

    #[test]
    fn empty_and_singleton() {
        let eigs = symmetric_eigenvalues_in_place(&mut [], 0).unwrap();
        assert!(eigs.is_empty());
        let eigs = symmetric_eigenvalues_in_place(&mut [7.0], 1).unwrap();
        assert_eq!(eigs, vec![7.0]);
    }

    #[test]
    fn rank_one_matrix() {
        // all-ones 5x5: eigenvalues {5, 0, 0, 0, 0}
        let n = 5;
        let mut a = vec![1.0; n * n];
        let eigs = symmetric_eigenvalues_in_place(&mut a, n).unwrap();
        for e in &eigs[..n - 1] {
            assert!(e.abs() < 1e-12, "{eigs:?}");
        }
        assert!((eigs[n - 1] - 5.0).abs() < 1e-12);
    }
}
