//! Experiment runner: realization batches, aggregate reports, histogram
//! artifacts (CSV and SVG), and the word-count verification table.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combin::binom_f64;
use crate::error::{Error, Result};
use crate::matrices::{self, CellMatrix};
use crate::sampler::{ComplexView, Model, ModelParams, OutcomeOracle};
use crate::spectra::{
    Histogram, ReferenceLaw, SpectralSummary, SummaryOptions, DEFAULT_BINS, DEFAULT_RANGE,
};
use crate::words::{
    enumerate_classes, exact_expected_moment, maximal_class_count, predicted_moment, WordClass,
};

/// Which complex the realizations sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lower,
    Upper,
}

impl ModelKind {
    pub fn to_model(self) -> Model {
        match self {
            ModelKind::Lower => Model::Lower,
            ModelKind::Upper => Model::Upper,
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" => Ok(ModelKind::Lower),
            "upper" => Ok(ModelKind::Upper),
            other => Err(Error::InvalidArgument(format!(
                "unknown model {other:?}; expected lower or upper"
            ))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Lower => "lower",
            ModelKind::Upper => "upper",
        })
    }
}

/// Which matrix the spectral pipeline assembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    Unsigned,
    Signed,
    Extended,
    ExtendedSigned,
    Centered,
    CenteredSigned,
}

impl FromStr for MatrixKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unsigned" => Ok(MatrixKind::Unsigned),
            "signed" => Ok(MatrixKind::Signed),
            "extended" => Ok(MatrixKind::Extended),
            "extended-signed" => Ok(MatrixKind::ExtendedSigned),
            "centered" => Ok(MatrixKind::Centered),
            "centered-signed" => Ok(MatrixKind::CenteredSigned),
            other => Err(Error::InvalidArgument(format!(
                "unknown matrix kind {other:?}"
            ))),
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixKind::Unsigned => "unsigned",
            MatrixKind::Signed => "signed",
            MatrixKind::Extended => "extended",
            MatrixKind::ExtendedSigned => "extended-signed",
            MatrixKind::Centered => "centered",
            MatrixKind::CenteredSigned => "centered-signed",
        })
    }
}

/// Output formats for histogram artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Svg,
    Both,
}

impl OutputFormat {
    pub fn wants_csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
    pub fn wants_svg(self) -> bool {
        matches!(self, OutputFormat::Svg | OutputFormat::Both)
    }
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            "both" => Ok(OutputFormat::Both),
            other => Err(Error::InvalidArgument(format!(
                "unknown format {other:?}; expected csv, svg or both"
            ))),
        }
    }
}

fn default_realizations() -> u32 {
    1
}
fn default_bins() -> usize {
    DEFAULT_BINS
}
fn default_max_order() -> usize {
    8
}
fn default_model() -> ModelKind {
    ModelKind::Lower
}
fn default_matrix() -> MatrixKind {
    MatrixKind::Unsigned
}
fn default_format() -> OutputFormat {
    OutputFormat::Both
}
fn default_normalize() -> bool {
    true
}

/// One experiment: fixed parameters, a batch of realizations, optional
/// file outputs. Deserializes from the JSON config file; CLI flags
/// override individual fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: u32,
    pub d: usize,
    pub p: Vec<f64>,
    #[serde(default = "default_model")]
    pub model: ModelKind,
    #[serde(default = "default_matrix")]
    pub matrix: MatrixKind,
    #[serde(default = "default_normalize")]
    pub normalize: bool,
    #[serde(default = "default_realizations")]
    pub realizations: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Histogram range; defaults to [-2.5, 2.5] for normalized spectra and
    /// to a data-driven range otherwise.
    #[serde(default)]
    pub range: Option<(f64, f64)>,
    #[serde(default = "default_max_order")]
    pub max_order: usize,
}

impl ExperimentConfig {
    pub fn params(&self, realization: u32) -> Result<ModelParams> {
        if self.realizations == 0 {
            return Err(Error::InvalidArgument("realizations must be >= 1".into()));
        }
        ModelParams::new(
            self.n,
            self.d,
            self.p.clone(),
            self.seed.wrapping_add(realization as u64),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Builds the configured matrix for one realization.
pub fn assemble_matrix(config: &ExperimentConfig, params: &ModelParams) -> Result<CellMatrix> {
    let oracle = OutcomeOracle::new(params.clone());
    let view = ComplexView::new(&oracle, config.model.to_model());
    let raw = match config.matrix {
        MatrixKind::Unsigned => matrices::restricted(&view, false)?,
        MatrixKind::Signed => matrices::restricted(&view, true)?,
        MatrixKind::Extended => matrices::extended_unsigned(&view)?,
        MatrixKind::ExtendedSigned => matrices::extended_signed(&view)?,
        MatrixKind::Centered => matrices::centered(&oracle, false)?,
        MatrixKind::CenteredSigned => matrices::centered(&oracle, true)?,
    };
    if config.normalize {
        matrices::normalize(&raw, params)
    } else {
        Ok(raw)
    }
}

/// Per-realization artifacts kept for the report.
#[derive(Debug, Clone, Serialize)]
pub struct RealizationOutcome {
    #[serde(flatten)]
    pub summary: SpectralSummary,
    pub fdm1: usize,
    pub maximal: usize,
}

/// Reference values for an even moment of the centered normalized
/// pipeline: the dominant-class closed form and the full enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct MomentPrediction {
    pub k: usize,
    /// Dominant support class only; short by O(1/(n p_d (1 - p_d))).
    pub dominant: f64,
    /// All word classes enumerated.
    pub exact: f64,
}

/// Aggregate over realizations; all statistics are plain folds of the
/// per-realization list.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub n: u32,
    pub d: usize,
    pub p: Vec<f64>,
    pub model: ModelKind,
    pub matrix: MatrixKind,
    pub normalize: bool,
    pub realizations: u32,
    pub seed: u64,
    pub dom_c: f64,
    pub expected_fdm1: f64,
    pub expected_maximal: f64,
    pub mean_moments: Vec<f64>,
    pub stderr_moments: Vec<f64>,
    pub mean_fdm1_ratio: f64,
    pub mean_maximal: f64,
    pub median_ks_semicircle: f64,
    pub median_ks_tensor: f64,
    /// Present for the centered normalized pipeline at even orders <= 4.
    pub moment_predictions: Vec<MomentPrediction>,
    pub details: Vec<RealizationOutcome>,
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Runs the batch (realization i uses seed base + i), writes requested
/// outputs, and returns the aggregate report.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    let outcomes: Result<Vec<RealizationOutcome>> = (0..config.realizations)
        .into_par_iter()
        .map(|i| run_realization(config, i))
        .collect();
    let outcomes = outcomes?;

    let kmax = config.max_order;
    let rf = outcomes.len() as f64;
    let mut mean_moments = vec![0.0; kmax];
    for o in &outcomes {
        for (k, m) in o.summary.moments.iter().enumerate() {
            mean_moments[k] += m / rf;
        }
    }
    let mut stderr_moments = vec![0.0; kmax];
    if outcomes.len() > 1 {
        for (k, target) in stderr_moments.iter_mut().enumerate() {
            let var = outcomes
                .iter()
                .map(|o| {
                    let dev = o.summary.moments[k] - mean_moments[k];
                    dev * dev
                })
                .sum::<f64>()
                / (rf - 1.0);
            *target = (var / rf).sqrt();
        }
    }
    let total = binom_f64(config.n as u64, config.d as u64);
    let mean_fdm1_ratio = outcomes.iter().map(|o| o.fdm1 as f64 / total).sum::<f64>() / rf;
    let mean_maximal = outcomes.iter().map(|o| o.maximal as f64).sum::<f64>() / rf;
    let mut ks_sc: Vec<f64> = outcomes.iter().map(|o| o.summary.ks_semicircle).collect();
    let mut ks_tensor: Vec<f64> = outcomes.iter().map(|o| o.summary.ks_tensor).collect();

    let params0 = config.params(0)?;
    let centered_pipeline = config.normalize
        && matches!(
            config.matrix,
            MatrixKind::Centered | MatrixKind::CenteredSigned
        );
    let mut moment_predictions = Vec::new();
    if centered_pipeline {
        for k in [2usize, 4] {
            if k <= config.max_order {
                moment_predictions.push(MomentPrediction {
                    k,
                    dominant: predicted_moment(k, &params0)?,
                    exact: exact_expected_moment(k, &params0)?,
                });
            }
        }
    }
    let report = Report {
        n: config.n,
        d: config.d,
        p: config.p.clone(),
        model: config.model,
        matrix: config.matrix,
        normalize: config.normalize,
        realizations: config.realizations,
        seed: config.seed,
        dom_c: params0.dom_c_value(),
        expected_fdm1: params0.expected_fdminus1(),
        expected_maximal: params0.expected_maximal(),
        mean_moments,
        stderr_moments,
        mean_fdm1_ratio,
        mean_maximal,
        median_ks_semicircle: median(&mut ks_sc),
        median_ks_tensor: median(&mut ks_tensor),
        moment_predictions,
        details: outcomes,
    };

    if let Some(dir) = &config.out_dir {
        write_outputs(config, &report, dir)?;
    }
    Ok(report)
}

fn run_realization(config: &ExperimentConfig, index: u32) -> Result<RealizationOutcome> {
    let params = config.params(index)?;
    let matrix = assemble_matrix(config, &params)?;

    let oracle = OutcomeOracle::new(params.clone());
    let view = ComplexView::new(&oracle, config.model.to_model());
    let fdm1 = view.count_dminus1()?;
    let maximal = view.count_maximal()?;
    let total = binom_f64(params.n as u64, params.d as u64);
    let c_hat = fdm1 as f64 / total;

    let range = config.range.unwrap_or(if config.normalize {
        DEFAULT_RANGE
    } else {
        (-(config.n as f64), config.n as f64)
    });
    let opts = SummaryOptions {
        bins: config.bins,
        range,
        max_order: config.max_order,
    };
    let summary = SpectralSummary::compute(&matrix, &params, c_hat, opts)?;
    Ok(RealizationOutcome {
        summary,
        fdm1,
        maximal,
    })
}

/// Writes bytes through a temp file and a rename, so readers never see a
/// half-written artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("part");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_outputs(config: &ExperimentConfig, report: &Report, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut eig = String::from("realization,eigenvalue\n");
    for (i, o) in report.details.iter().enumerate() {
        for v in &o.summary.eigenvalues {
            eig.push_str(&format!("{i},{v}\n"));
        }
    }
    write_atomic(&dir.join("eigenvalues.csv"), eig.as_bytes())?;

    let json = serde_json::to_string_pretty(report)?;
    write_atomic(&dir.join("summary.json"), json.as_bytes())?;

    // aggregate histogram over all realizations
    let all: Vec<f64> = report
        .details
        .iter()
        .flat_map(|o| o.summary.eigenvalues.iter().copied())
        .collect();
    let range = config.range.unwrap_or_else(|| {
        if config.normalize {
            DEFAULT_RANGE
        } else {
            data_range(&all)
        }
    });
    let hist = Histogram::new(&all, config.bins, range.0, range.1)?;
    let law = overlay_law(config, report);
    if config.format.wants_csv() {
        let mut csv = Vec::new();
        write_histogram_csv(&hist, all.len(), &mut csv)?;
        write_atomic(&dir.join("histogram.csv"), &csv)?;
    }
    if config.format.wants_svg() {
        let title = format!(
            "{} n={} d={} p={:?} x{}",
            config.matrix, config.n, config.d, config.p, config.realizations
        );
        let svg = render_histogram_svg(&hist, all.len(), law.as_ref(), &title);
        write_atomic(&dir.join("histogram.svg"), svg.as_bytes())?;
    }
    Ok(())
}

fn data_range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() || lo == hi {
        return (-1.0, 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Reference overlay for the configured pipeline: the tensor law for
/// extended/centered spectra, the semicircle for restricted ones, none
/// when the spectrum is not normalized.
fn overlay_law(config: &ExperimentConfig, report: &Report) -> Option<ReferenceLaw> {
    if !config.normalize {
        return None;
    }
    let c = report.dom_c.clamp(f64::MIN_POSITIVE, 1.0);
    match config.matrix {
        MatrixKind::Unsigned | MatrixKind::Signed => Some(ReferenceLaw::Semicircle),
        _ => ReferenceLaw::tensor(c).ok(),
    }
}

/// CSV rows "bin_left,bin_right,count,density".
pub fn write_histogram_csv<W: Write>(hist: &Histogram, total: usize, w: &mut W) -> Result<()> {
    writeln!(w, "bin_left,bin_right,count,density")?;
    let dens = hist.densities(total);
    for i in 0..hist.bin_count() {
        writeln!(
            w,
            "{},{},{},{}",
            hist.edges[i],
            hist.edges[i + 1],
            hist.counts[i],
            dens[i]
        )?;
    }
    Ok(())
}

/// Standalone SVG bar chart with an optional reference-law overlay curve.
pub fn render_histogram_svg(
    hist: &Histogram,
    total: usize,
    law: Option<&ReferenceLaw>,
    title: &str,
) -> String {
    let (w, h) = (640.0, 400.0);
    let (ml, mr, mt, mb) = (50.0, 15.0, 30.0, 40.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);
    let lo = hist.edges[0];
    let hi = *hist.edges.last().unwrap();
    let dens = hist.densities(total);
    let mut ymax = dens.iter().copied().fold(0.0, f64::max);
    if let Some(l) = law {
        ymax = ymax.max(l.density(0.0));
    }
    if ymax <= 0.0 {
        ymax = 1.0;
    }
    ymax *= 1.1;
    let x = |v: f64| ml + (v - lo) / (hi - lo) * pw;
    let y = |v: f64| mt + ph - (v / ymax) * ph;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        w / 2.0,
        title
    ));
    for (i, d) in dens.iter().enumerate() {
        if *d <= 0.0 {
            continue;
        }
        let x0 = x(hist.edges[i]);
        let x1 = x(hist.edges[i + 1]);
        let y0 = y(*d);
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#7ba7d7\" stroke=\"#4a76a8\" stroke-width=\"0.5\"/>\n",
            x0,
            y0,
            x1 - x0,
            mt + ph - y0
        ));
    }
    if let Some(l) = law {
        let mut pts = Vec::new();
        for i in 0..=256 {
            let v = lo + (hi - lo) * i as f64 / 256.0;
            pts.push(format!("{:.2},{:.2}", x(v), y(l.density(v))));
        }
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.8\"/>\n",
            pts.join(" ")
        ));
        let atom = l.atom_at_zero();
        if atom > 0.0 {
            svg.push_str(&format!(
                "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{0:.2}\" y2=\"{2:.2}\" stroke=\"#c0392b\" stroke-width=\"1.8\" stroke-dasharray=\"4 3\"/>\n",
                x(0.0),
                y(0.0),
                y(ymax / 1.1 * atom.min(1.0))
            ));
        }
    }
    // axes
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        mt + ph,
        ml + pw
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{0}\" stroke=\"black\"/>\n",
        mt + ph
    ));
    let mut tick = lo.ceil();
    while tick <= hi {
        svg.push_str(&format!(
            "<line x1=\"{0:.2}\" y1=\"{1}\" x2=\"{0:.2}\" y2=\"{2}\" stroke=\"black\"/>\n",
            x(tick),
            mt + ph,
            mt + ph + 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            x(tick),
            mt + ph + 16.0,
            tick
        ));
        tick += 1.0;
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.3}</text>\n",
        ml - 4.0,
        mt + 10.0,
        ymax / 1.1
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Writes the histogram of a single summary to `path` in the requested
/// format(s), with the overlay implied by the law argument.
pub fn emit_histogram(
    summary: &SpectralSummary,
    law: Option<&ReferenceLaw>,
    path: &Path,
    format: OutputFormat,
) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let total = summary.eigenvalues.len();
    if format.wants_csv() {
        let mut out = Vec::new();
        write_histogram_csv(&summary.histogram, total, &mut out)?;
        write_atomic(&path.with_extension("csv"), &out)?;
    }
    if format.wants_svg() {
        let title = format!(
            "{} n={} d={} seed={}",
            summary.matrix, summary.n, summary.d, summary.seed
        );
        let svg = render_histogram_svg(&summary.histogram, total, law, &title);
        write_atomic(&path.with_extension("svg"), svg.as_bytes())?;
    }
    Ok(())
}

/// One row of the word-count verification table.
#[derive(Debug, Clone, Serialize)]
pub struct WordsVerifyRow {
    pub k: usize,
    pub enumerated: u64,
    pub formula: u64,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WordsVerifyTable {
    pub d: usize,
    pub rows: Vec<WordsVerifyRow>,
    pub all_match: bool,
}

/// Enumerates maximal-support classes for even k <= kmax and compares the
/// counts with Catalan(k/2) d^(k/2).
pub fn words_verify(kmax: usize, d: usize) -> Result<WordsVerifyTable> {
    if kmax > 8 {
        return Err(Error::ResourceGuard(format!(
            "word verification is limited to kmax <= 8, got {kmax}"
        )));
    }
    let mut rows = Vec::new();
    let mut k = 2;
    while k <= kmax {
        let enumerated = enumerate_classes(k, k / 2 + d, d)?.len() as u64;
        let formula = maximal_class_count(k, d)?;
        rows.push(WordsVerifyRow {
            k,
            enumerated,
            formula,
            matches: enumerated == formula,
        });
        k += 2;
    }
    let all_match = rows.iter().all(|r| r.matches);
    Ok(WordsVerifyTable { d, rows, all_match })
}

/// Writes enumerated classes one canonical word per line.
pub fn write_word_dump<W: Write>(classes: &[WordClass], w: &mut W) -> Result<()> {
    for wc in classes {
        writeln!(w, "{}", wc.canon.to_line())?;
    }
    Ok(())
}

/// The standard four-panel histogram pipeline: extended, centered,
/// restricted unsigned, and restricted signed spectra at n = 40, d = 2,
/// p = (0.8, 0.7), ten realizations each.
pub fn reproduce_fig(out_dir: &Path, seed: u64, format: OutputFormat) -> Result<Vec<Report>> {
    let panels = [
        ("extended", MatrixKind::Extended),
        ("centered", MatrixKind::Centered),
        ("unsigned", MatrixKind::Unsigned),
        ("signed", MatrixKind::Signed),
    ];
    let mut reports = Vec::new();
    for (name, matrix) in panels {
        let config = ExperimentConfig {
            n: 40,
            d: 2,
            p: vec![0.8, 0.7],
            model: ModelKind::Lower,
            matrix,
            normalize: true,
            realizations: 10,
            seed,
            out_dir: Some(out_dir.join(name)),
            format,
            bins: DEFAULT_BINS,
            range: None,
            max_order: 8,
        };
        reports.push(run(&config)?);
    }
    Ok(reports)
}
