//! Minimal pipeline walkthrough: sample a complex, normalize its centered
//! adjacency, and print how close the spectrum sits to its limit law.

use simplicial_spectra::matrices::{centered, normalize};
use simplicial_spectra::sampler::{ModelParams, OutcomeOracle};
use simplicial_spectra::spectra::{SpectralSummary, SummaryOptions};
use simplicial_spectra::words::{exact_expected_moment, predicted_moment};

fn main() -> simplicial_spectra::Result<()> {
    let params = ModelParams::new(40, 2, vec![0.8, 0.7], 1)?;
    let oracle = OutcomeOracle::new(params.clone());
    let b = centered(&oracle, false)?;
    let h = normalize(&b, &params)?;

    let summary = SpectralSummary::compute(&h, &params, f64::NAN, SummaryOptions::default())?;
    println!("matrix {} of dimension {}", summary.matrix, summary.dim);
    println!(
        "m2 = {:.4} (dominant-class prediction {:.4}, exact expectation {:.4})",
        summary.moments[1],
        predicted_moment(2, &params)?,
        exact_expected_moment(2, &params)?
    );
    println!(
        "m4 = {:.4} (dominant-class prediction {:.4}, exact expectation {:.4})",
        summary.moments[3],
        predicted_moment(4, &params)?,
        exact_expected_moment(4, &params)?
    );
    println!(
        "KS to semicircle = {:.4}, KS to Ber(c) tensor semicircle = {:.4} (c = {:.3})",
        summary.ks_semicircle,
        summary.ks_tensor,
        params.dom_c_value()
    );
    Ok(())
}
