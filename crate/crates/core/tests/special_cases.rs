//! Spectral behavior of degenerate parameter choices.

use rayon::prelude::*;

use simplicial_spectra::eigen::eigenvalues_sym;
use simplicial_spectra::matrices::{normalize, restricted};
use simplicial_spectra::sampler::{ComplexView, ModelParams, OutcomeOracle};
use simplicial_spectra::spectra::{
    esd, ks_distance, snap_zero_eigenvalues, zero_snap_tolerance, ReferenceLaw,
};

fn skeleton_complete_ks(n: u32, p2: f64, seed: u64, signed: bool) -> f64 {
    let params = ModelParams::new(n, 2, vec![1.0, p2], seed).unwrap();
    let oracle = OutcomeOracle::new(params.clone());
    let view = ComplexView::lower(&oracle);
    let a = restricted(&view, signed).unwrap();
    let at = normalize(&a, &params).unwrap();
    let mut eigs = eigenvalues_sym(&at.mat).unwrap();
    let tol = zero_snap_tolerance(&eigs);
    snap_zero_eigenvalues(&mut eigs, tol);
    ks_distance(
        &esd(&eigs, at.mat.dim()).unwrap(),
        &ReferenceLaw::Semicircle,
    )
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    0.5 * (xs[xs.len() / 2 - 1] + xs[xs.len() / 2])
}

/// With a complete skeleton (p = (1, p_2)) the normalized adjacency
/// spectra approach the semicircle: both signed and unsigned KS distances
/// stay small and shrink from n = 12 to n = 48.
#[test]
fn complete_skeleton_spectra_approach_semicircle() {
    for signed in [true, false] {
        let at = |n: u32| {
            median(
                (0..6u64)
                    .into_par_iter()
                    .map(|s| skeleton_complete_ks(n, 0.3, s, signed))
                    .collect(),
            )
        };
        let (small, large) = (at(12), at(48));
        assert!(large < small, "signed={signed}: {large} !< {small}");
        assert!(small < 0.15, "signed={signed}: {small}");
        assert!(large < 0.06, "signed={signed}: {large}");
    }
}
