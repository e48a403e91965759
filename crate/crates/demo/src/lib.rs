//! Browser bindings for the spectral explorer page: three operations that
//! take plain form values and hand back SVG or JSON strings. The logic
//! lives in plain-error functions that also run natively in tests; the
//! thin wasm-bindgen wrappers only translate errors at the boundary.

use wasm_bindgen::prelude::*;

use simplicial_spectra::combin::binom_f64;
use simplicial_spectra::error::Error;
use simplicial_spectra::experiment::{
    render_histogram_svg, words_verify, ExperimentConfig, MatrixKind, ModelKind, OutputFormat,
};
use simplicial_spectra::sampler::{parse_seed, ComplexView, ModelParams, OutcomeOracle};
use simplicial_spectra::spectra::{Histogram, ReferenceLaw};

/// Keeps interactive solves near-instant in the browser.
const DEMO_MAX_N: u32 = 50;

fn parse_probs(p_csv: &str) -> Result<Vec<f64>, Error> {
    p_csv
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("bad probability {t:?}: {e}")))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn spectrum_svg_impl(
    n: u32,
    d: usize,
    p_csv: &str,
    seed: &str,
    model: &str,
    matrix: &str,
    normalize: bool,
    realizations: u32,
) -> Result<String, Error> {
    if n > DEMO_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "demo caps n at {DEMO_MAX_N} to stay responsive, got {n}"
        )));
    }
    let config = ExperimentConfig {
        n,
        d,
        p: parse_probs(p_csv)?,
        model: model.parse::<ModelKind>()?,
        matrix: matrix.parse::<MatrixKind>()?,
        normalize,
        realizations: realizations.clamp(1, 10),
        seed: parse_seed(seed)?,
        out_dir: None,
        format: OutputFormat::Svg,
        bins: 61,
        range: None,
        max_order: 6,
    };
    let report = simplicial_spectra::experiment::run(&config)?;
    let all: Vec<f64> = report
        .details
        .iter()
        .flat_map(|o| o.summary.eigenvalues.iter().copied())
        .collect();
    let range = if config.normalize {
        (-2.5, 2.5)
    } else {
        let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo < hi {
            (lo - 0.5, hi + 0.5)
        } else {
            (-1.0, 1.0)
        }
    };
    let hist = Histogram::new(&all, config.bins, range.0, range.1)?;
    let law = if config.normalize {
        match config.matrix {
            MatrixKind::Unsigned | MatrixKind::Signed => Some(ReferenceLaw::Semicircle),
            _ => ReferenceLaw::tensor(report.dom_c.clamp(1e-300, 1.0)).ok(),
        }
    } else {
        None
    };
    let title = format!(
        "{} n={} d={} p={:?} seed={} x{} | m2={:.3} KS(sc)={:.3} KS(tensor)={:.3}",
        config.matrix,
        config.n,
        config.d,
        config.p,
        config.seed,
        config.realizations,
        report.mean_moments[1],
        report.median_ks_semicircle,
        report.median_ks_tensor
    );
    Ok(render_histogram_svg(&hist, all.len(), law.as_ref(), &title))
}

fn words_table_impl(kmax: usize, d: usize) -> Result<String, Error> {
    let table = words_verify(kmax, d)?;
    Ok(serde_json::to_string(&table)?)
}

fn cell_stats_impl(
    n: u32,
    d: usize,
    p_csv: &str,
    seed: &str,
    model: &str,
    realizations: u32,
) -> Result<String, Error> {
    if n > 200 {
        return Err(Error::InvalidArgument(
            "demo caps n at 200 for statistics".into(),
        ));
    }
    let p = parse_probs(p_csv)?;
    let base_seed = parse_seed(seed)?;
    let model = model.parse::<ModelKind>()?;
    let realizations = realizations.clamp(1, 50);
    let mut rows = Vec::new();
    for i in 0..realizations {
        let params = ModelParams::new(n, d, p.clone(), base_seed.wrapping_add(i as u64))?;
        let oracle = OutcomeOracle::new(params);
        let view = ComplexView::new(&oracle, model.to_model());
        rows.push((view.count_dminus1()?, view.count_maximal()?));
    }
    let params = ModelParams::new(n, d, p.clone(), base_seed)?;
    let total = binom_f64(n as u64, d as u64);
    let mean_ratio = rows.iter().map(|r| r.0 as f64 / total).sum::<f64>() / rows.len() as f64;
    let mean_max = rows.iter().map(|r| r.1 as f64).sum::<f64>() / rows.len() as f64;
    let doc = serde_json::json!({
        "n": n, "d": d, "p": p, "realizations": realizations,
        "mean_fdm1_ratio": mean_ratio,
        "dom_c": params.dom_c_value(),
        "expected_fdm1": params.expected_fdminus1(),
        "expected_fdm1_ratio": params.expected_fdminus1() / total,
        "mean_maximal": mean_max,
        "expected_maximal": params.expected_maximal(),
        "per_realization": rows.iter().map(|r| serde_json::json!({
            "fdm1": r.0, "maximal": r.1,
        })).collect::<Vec<_>>(),
    });
    Ok(serde_json::to_string(&doc)?)
}

fn to_js(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Runs the spectral pipeline and renders the aggregate histogram as a
/// standalone SVG, with the matching reference-law overlay.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn spectrum_svg(
    n: u32,
    d: usize,
    p_csv: &str,
    seed: &str,
    model: &str,
    matrix: &str,
    normalize: bool,
    realizations: u32,
) -> Result<String, JsValue> {
    spectrum_svg_impl(n, d, p_csv, seed, model, matrix, normalize, realizations).map_err(to_js)
}

/// Word-class counts against the Catalan closed form, as a JSON table.
#[wasm_bindgen]
pub fn words_table(kmax: usize, d: usize) -> Result<String, JsValue> {
    words_table_impl(kmax, d).map_err(to_js)
}

/// Sampled cell statistics against the exact expectation formulas, as
/// JSON.
#[wasm_bindgen]
pub fn cell_stats(
    n: u32,
    d: usize,
    p_csv: &str,
    seed: &str,
    model: &str,
    realizations: u32,
) -> Result<String, JsValue> {
    cell_stats_impl(n, d, p_csv, seed, model, realizations).map_err(to_js)
}
