use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use simplicial_spectra::error::Error;
use simplicial_spectra::experiment::{
    emit_histogram, run, words_verify, write_atomic, write_word_dump, ExperimentConfig, MatrixKind,
    ModelKind, OutputFormat,
};
use simplicial_spectra::matrices::{write_coordinate, write_index_sidecar};
use simplicial_spectra::sampler::{parse_seed, ComplexView, ModelParams, OutcomeOracle};
use simplicial_spectra::words::enumerate_classes;
use simplicial_spectra_cli::verify::run_all;

/// Random simplicial complexes: sampling, adjacency spectra, and exact
/// verification at desk scale.
#[derive(Parser)]
#[command(name = "simplicial-spectra", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Vertex count
    #[arg(long)]
    n: Option<u32>,
    /// Top dimension (>= 2)
    #[arg(long)]
    d: Option<usize>,
    /// Probabilities p_1,...,p_d (comma separated)
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// lower or upper
    #[arg(long)]
    model: Option<ModelKind>,
    /// Base seed, decimal or 0x-hex; realization i uses seed + i
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a complex and write its cells per dimension
    Generate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Also export this matrix in coordinate form with a cell sidecar
        #[arg(long)]
        export_matrix: Option<MatrixKind>,
    },
    /// Run the spectral pipeline and write eigenvalues, summary, histogram
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// JSON config file mirroring the experiment fields; flags win
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        matrix: Option<MatrixKind>,
        /// on or off
        #[arg(long)]
        normalize: Option<String>,
        #[arg(long)]
        realizations: Option<u32>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// csv, svg or both
        #[arg(long)]
        format: Option<OutputFormat>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        max_order: Option<usize>,
    },
    /// Verify word-class counts against the closed form; dump classes
    Words {
        #[arg(long, default_value_t = 6)]
        kmax: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Write enumerated classes (one canonical word per line) here
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Cell statistics against the exact expectation formulas
    Stats {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 20)]
        realizations: u32,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Reproduce the four-panel spectral histogram pipeline
    ReproduceFig {
        #[arg(long, default_value = "out/fig")]
        out_dir: PathBuf,
        #[arg(long, value_parser = parse_seed, default_value = "1")]
        seed: u64,
        #[arg(long, default_value = "both")]
        format: OutputFormat,
    },
    /// Run the acceptance suite; exit 0 only if every criterion passes
    Verify {
        /// Where the machine-readable report goes
        #[arg(long, default_value = "acceptance_report.json")]
        out: PathBuf,
    },
}

fn model_params(args: &ModelArgs, realization: u32) -> Result<ModelParams, Error> {
    let n = args
        .n
        .ok_or_else(|| Error::InvalidArgument("--n is required".into()))?;
    let d = args.d.unwrap_or(2);
    let p = args
        .p
        .clone()
        .ok_or_else(|| Error::InvalidArgument("--p is required".into()))?;
    ModelParams::new(
        n,
        d,
        p,
        args.seed.unwrap_or(0).wrapping_add(realization as u64),
    )
}

fn cmd_generate(
    args: &ModelArgs,
    out_dir: &PathBuf,
    export: Option<MatrixKind>,
) -> Result<(), Error> {
    let params = model_params(args, 0)?;
    let oracle = OutcomeOracle::new(params.clone());
    let view = ComplexView::new(&oracle, args.model.unwrap_or(ModelKind::Lower).to_model());
    fs::create_dir_all(out_dir)?;
    for j in 0..=params.d {
        let cells = view.list_cells(j)?;
        let mut text = String::new();
        for c in &cells {
            let verts: Vec<String> = c.vertices().iter().map(|v| v.to_string()).collect();
            text.push_str(&verts.join(","));
            text.push('\n');
        }
        write_atomic(&out_dir.join(format!("cells_dim{j}.txt")), text.as_bytes())?;
        println!("dim {j}: {} cells", cells.len());
    }
    println!(
        "f_{} = {} (expected {:.3}), maximal = {} (expected {:.3}), dom c = {:.6}",
        params.d - 1,
        view.count_dminus1()?,
        params.expected_fdminus1(),
        view.count_maximal()?,
        params.expected_maximal(),
        params.dom_c_value()
    );
    if let Some(kind) = export {
        let config = ExperimentConfig {
            n: params.n,
            d: params.d,
            p: params.p.clone(),
            model: args.model.unwrap_or(ModelKind::Lower),
            matrix: kind,
            normalize: false,
            realizations: 1,
            seed: params.seed,
            out_dir: None,
            format: OutputFormat::Csv,
            bins: 61,
            range: None,
            max_order: 4,
        };
        let m = simplicial_spectra::experiment::assemble_matrix(&config, &params)?;
        let mut coord = Vec::new();
        write_coordinate(&m, &mut coord)?;
        write_atomic(&out_dir.join(format!("{kind}.mtx")), &coord)?;
        let mut side = Vec::new();
        write_index_sidecar(&m, &mut side)?;
        write_atomic(&out_dir.join(format!("{kind}.rows")), &side)?;
        println!(
            "exported {kind} ({} x {}, {} entries)",
            m.dim(),
            m.dim(),
            m.mat.nnz()
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_spectrum(
    args: &ModelArgs,
    config_path: Option<&PathBuf>,
    matrix: Option<MatrixKind>,
    normalize: Option<&str>,
    realizations: Option<u32>,
    out_dir: Option<&PathBuf>,
    format: Option<OutputFormat>,
    bins: Option<usize>,
    max_order: Option<usize>,
) -> Result<(), Error> {
    let mut config = match config_path {
        Some(path) => ExperimentConfig::from_json(&fs::read_to_string(path)?)?,
        None => ExperimentConfig {
            n: 0,
            d: 2,
            p: Vec::new(),
            model: ModelKind::Lower,
            matrix: MatrixKind::Unsigned,
            normalize: true,
            realizations: 1,
            seed: 0,
            out_dir: None,
            format: OutputFormat::Both,
            bins: 61,
            range: None,
            max_order: 8,
        },
    };
    // flags win over the config file
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(d) = args.d {
        config.d = d;
    }
    if let Some(p) = &args.p {
        config.p = p.clone();
    }
    if let Some(m) = args.model {
        config.model = m;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(m) = matrix {
        config.matrix = m;
    }
    if let Some(norm) = normalize {
        config.normalize = match norm {
            "on" | "true" => true,
            "off" | "false" => false,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "--normalize takes on/off, got {other:?}"
                )))
            }
        };
    }
    if let Some(r) = realizations {
        config.realizations = r;
    }
    if let Some(dir) = out_dir {
        config.out_dir = Some(dir.clone());
    }
    if config.out_dir.is_none() {
        config.out_dir = Some(PathBuf::from("out"));
    }
    if let Some(f) = format {
        config.format = f;
    }
    if let Some(b) = bins {
        config.bins = b;
    }
    if let Some(k) = max_order {
        config.max_order = k;
    }
    if config.n == 0 || config.p.is_empty() {
        return Err(Error::InvalidArgument(
            "--n and --p are required (flags or config file)".into(),
        ));
    }

    let report = run(&config)?;
    println!(
        "{} x{} at n={} d={} p={:?}: dim {} mean(m2)={:.4} ks_sc(med)={:.4} ks_tensor(med)={:.4}",
        config.matrix,
        config.realizations,
        config.n,
        config.d,
        config.p,
        report.details[0].summary.dim,
        report.mean_moments.get(1).copied().unwrap_or(f64::NAN),
        report.median_ks_semicircle,
        report.median_ks_tensor
    );
    if let Some(dir) = &config.out_dir {
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn cmd_words(kmax: usize, d: usize, dump: Option<&PathBuf>) -> Result<bool, Error> {
    let table = words_verify(kmax, d)?;
    println!("k  enumerated  formula  match");
    for row in &table.rows {
        println!(
            "{:<2} {:>10}  {:>7}  {}",
            row.k,
            row.enumerated,
            row.formula,
            if row.matches { "yes" } else { "NO" }
        );
    }
    if let Some(dir) = dump {
        fs::create_dir_all(dir)?;
        let mut k = 2;
        while k <= kmax {
            for s in (d + 1)..=(k / 2 + d) {
                let classes = enumerate_classes(k, s, d)?;
                let mut out = Vec::new();
                write_word_dump(&classes, &mut out)?;
                write_atomic(&dir.join(format!("words_d{d}_k{k}_s{s}.txt")), &out)?;
            }
            k += 2;
        }
        println!("dumped classes to {}", dir.display());
    }
    Ok(table.all_match)
}

fn cmd_stats(args: &ModelArgs, realizations: u32, out_dir: Option<&PathBuf>) -> Result<(), Error> {
    use rayon::prelude::*;
    let base = model_params(args, 0)?;
    let model = args.model.unwrap_or(ModelKind::Lower);
    let rows: Result<Vec<(usize, usize)>, Error> = (0..realizations)
        .into_par_iter()
        .map(|i| {
            let params = model_params(args, i)?;
            let oracle = OutcomeOracle::new(params);
            let view = ComplexView::new(&oracle, model.to_model());
            Ok((view.count_dminus1()?, view.count_maximal()?))
        })
        .collect();
    let rows = rows?;
    let total = simplicial_spectra::combin::binom_f64(base.n as u64, base.d as u64);
    let mean_ratio = rows.iter().map(|r| r.0 as f64 / total).sum::<f64>() / realizations as f64;
    let mean_max = rows.iter().map(|r| r.1 as f64).sum::<f64>() / realizations as f64;
    println!(
        "f_{}/C(n,d): mean {:.5} vs dom c {:.5}; E[f] = {:.3}",
        base.d - 1,
        mean_ratio,
        base.dom_c_value(),
        base.expected_fdminus1()
    );
    println!(
        "maximal cells: mean {:.3} vs expected {:.3}",
        mean_max,
        base.expected_maximal()
    );
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        let doc = serde_json::json!({
            "n": base.n, "d": base.d, "p": base.p, "model": model,
            "realizations": realizations, "seed": base.seed,
            "mean_fdm1_ratio": mean_ratio,
            "dom_c": base.dom_c_value(),
            "expected_fdm1": base.expected_fdminus1(),
            "mean_maximal": mean_max,
            "expected_maximal": base.expected_maximal(),
            "per_realization": rows.iter().map(|r| serde_json::json!({
                "fdm1": r.0, "maximal": r.1
            })).collect::<Vec<_>>(),
        });
        write_atomic(
            &dir.join("stats.json"),
            serde_json::to_string_pretty(&doc)?.as_bytes(),
        )?;
        println!("wrote {}", dir.join("stats.json").display());
    }
    Ok(())
}

fn cmd_reproduce_fig(
    out_dir: &std::path::Path,
    seed: u64,
    format: OutputFormat,
) -> Result<(), Error> {
    let reports = simplicial_spectra::experiment::reproduce_fig(out_dir, seed, format)?;
    for report in &reports {
        println!(
            "{:<16} dim {:>5}  mean m2 {:.4}  ks_sc {:.4}  ks_tensor {:.4}",
            report.matrix.to_string(),
            report.details[0].summary.dim,
            report.mean_moments[1],
            report.median_ks_semicircle,
            report.median_ks_tensor
        );
        let first = &report.details[0].summary;
        emit_histogram(
            first,
            None,
            &out_dir.join(format!("{}_first", report.matrix)),
            format,
        )?;
    }
    println!("wrote {}", out_dir.display());
    Ok(())
}

fn cmd_verify(out: &std::path::Path) -> Result<bool, Error> {
    let results = run_all();
    let mut all = true;
    for r in &results {
        println!(
            "criterion {:>2} [{}] {} ({:.1}s): {}",
            r.id,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.seconds,
            r.detail
        );
        all &= r.passed;
    }
    let doc = serde_json::json!({
        "passed": all,
        "criteria": results,
    });
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    write_atomic(out, serde_json::to_string_pretty(&doc)?.as_bytes())?;
    println!("report: {}", out.display());
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Generate {
            model,
            out_dir,
            export_matrix,
        } => cmd_generate(model, out_dir, *export_matrix).map(|()| true),
        Command::Spectrum {
            model,
            config,
            matrix,
            normalize,
            realizations,
            out_dir,
            format,
            bins,
            max_order,
        } => cmd_spectrum(
            model,
            config.as_ref(),
            *matrix,
            normalize.as_deref(),
            *realizations,
            out_dir.as_ref(),
            *format,
            *bins,
            *max_order,
        )
        .map(|()| true),
        Command::Words { kmax, d, dump } => cmd_words(*kmax, *d, dump.as_ref()),
        Command::Stats {
            model,
            realizations,
            out_dir,
        } => cmd_stats(model, *realizations, out_dir.as_ref()).map(|()| true),
        Command::ReproduceFig {
            out_dir,
            seed,
            format,
        } => cmd_reproduce_fig(out_dir, *seed, *format).map(|()| true),
        Command::Verify { out } => cmd_verify(out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
