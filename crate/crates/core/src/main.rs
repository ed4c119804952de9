//! `rpls` command line interface.
//!
//! Subcommands: `fit` (one GLM fit summary), `selftrain` (one loop, trace to
//! JSON lines), `bench` (experiment config to report files), `gsd`
//! (dominance instance file to nondominated set), `oracle` (reference
//! implementations for the property suite), `make-data` (write the pinned
//! banknote-style surrogate CSV).
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure.
//! `RPLS_THREADS` caps the bench worker pool.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use rpls::bench::{self, ExperimentConfig, ReportFormat, SelfTrainConfig};
use rpls::dataset;
use rpls::error::Error;
use rpls::glm::ModelSpec;
use rpls::{criteria, evidence, gsd, oracle, selftrain};

const USAGE: &str = "usage:
  rpls fit <data.csv> --label <column> [--levels a,b] [--ridge x]
  rpls selftrain <config.json> [--out trace.jsonl]
  rpls bench <config.json> <out_dir>
  rpls gsd <instance.json>
  rpls oracle [irls|ppp-fidelity|mc-generator|k1-dominance]
  rpls make-data <out.csv>";

enum CliError {
    Config(String),
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidInput(_) | Error::Csv { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let result = match args.first().map(String::as_str) {
        Some("fit") => cmd_fit(&args[1..]),
        Some("selftrain") => cmd_selftrain(&args[1..]),
        Some("bench") => cmd_bench(&args[1..]),
        Some("gsd") => cmd_gsd(&args[1..]),
        Some("oracle") => cmd_oracle(&args[1..]),
        Some("make-data") => cmd_make_data(&args[1..]),
        _ => {
            eprintln!("{USAGE}");
            return ExitCode::from(1);
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("runtime failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn flag_value<'a>(args: &'a [String], flag: &str) -> Option<&'a str> {
    args.iter()
        .position(|a| a == flag)
        .and_then(|i| args.get(i + 1))
        .map(String::as_str)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("cannot parse {path}: {e}")))
}

fn cmd_fit(args: &[String]) -> Result<(), CliError> {
    let path = args
        .first()
        .ok_or_else(|| CliError::Config(USAGE.into()))?;
    let label = flag_value(args, "--label")
        .ok_or_else(|| CliError::Config("fit requires --label <column>".into()))?;
    let levels: Option<Vec<String>> =
        flag_value(args, "--levels").map(|v| v.split(',').map(str::to_string).collect());
    let ridge: f64 = flag_value(args, "--ridge")
        .map(|v| v.parse().map_err(|_| CliError::Config("bad --ridge".into())))
        .transpose()?
        .unwrap_or(0.0);

    let data = dataset::load_csv(Path::new(path), label, levels.as_deref())?;
    let rows: Vec<(usize, usize)> = (0..data.n_rows())
        .filter_map(|r| data.ground_truth(r).map(|l| (r, l)))
        .collect();
    let view = dataset::LabeledView::from_rows(&data, rows);
    let fit = rpls::glm::fit(&view, &ModelSpec::full(data.n_features(), 0), ridge)?;
    let summary = serde_json::json!({
        "theta": fit.theta,
        "log_lik": fit.log_lik,
        "converged": fit.converged,
        "n_obs": fit.n_obs,
        "feature_names": data.feature_names(),
        "classes": data.class_names(),
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
    Ok(())
}

fn cmd_selftrain(args: &[String]) -> Result<(), CliError> {
    let path = args
        .first()
        .ok_or_else(|| CliError::Config(USAGE.into()))?;
    let config: SelfTrainConfig = read_json(path)?;
    if config.version != bench::CONFIG_VERSION {
        return Err(CliError::Config(format!(
            "config version {} unsupported",
            config.version
        )));
    }
    let data = config.dataset.load()?;
    let split = dataset::make_split(
        &data,
        config.unlabeled_fraction,
        config.test_fraction,
        config.split_seed,
    )?;
    let trace = selftrain::run(&data, &split, &config.loop_config)?;
    let lines = trace.to_json_lines()?;
    match flag_value(args, "--out") {
        Some(out) => std::fs::write(out, &lines)
            .map_err(|e| CliError::Runtime(format!("cannot write {out}: {e}")))?,
        None => print!("{lines}"),
    }
    let metrics = selftrain::evaluate(&trace, &data, &split)?;
    eprintln!(
        "{}",
        serde_json::to_string(&metrics).expect("metrics serialize")
    );
    if let Some(failure) = &trace.failure {
        return Err(CliError::Runtime(failure.clone()));
    }
    Ok(())
}

fn cmd_bench(args: &[String]) -> Result<(), CliError> {
    let (config_path, out_dir) = match args {
        [c, o, ..] => (c, PathBuf::from(o)),
        _ => return Err(CliError::Config(USAGE.into())),
    };
    let config: ExperimentConfig = read_json(config_path)?;
    let report = bench::run_experiment(&config)?;
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    bench::emit_report(&report, ReportFormat::Csv, &out_dir.join("report.csv"))?;
    bench::emit_report(&report, ReportFormat::Markdown, &out_dir.join("report.md"))?;
    bench::emit_report(&report, ReportFormat::Json, &out_dir.join("report.json"))?;
    std::fs::write(
        out_dir.join("curves.csv"),
        bench::render_curves_csv(&report),
    )
    .map_err(|e| CliError::Runtime(format!("cannot write curves: {e}")))?;
    println!(
        "{}",
        bench::render_report(&report, ReportFormat::Markdown)?
    );
    Ok(())
}

#[derive(serde::Deserialize)]
struct GsdInstanceFile {
    version: u32,
    /// `utilities[candidate][state][dimension]`
    utilities: Vec<Vec<Vec<f64>>>,
    /// `weights[prior][state]`
    weights: Vec<Vec<f64>>,
    #[serde(default)]
    xi: f64,
    /// "raw" (default) or "log"
    #[serde(default)]
    scale: Option<String>,
    /// Optional alpha-cut: retain priors by these indices.
    #[serde(default)]
    retained_priors: Option<Vec<usize>>,
}

fn cmd_gsd(args: &[String]) -> Result<(), CliError> {
    let path = args
        .first()
        .ok_or_else(|| CliError::Config(USAGE.into()))?;
    let file: GsdInstanceFile = read_json(path)?;
    if file.version != bench::CONFIG_VERSION {
        return Err(CliError::Config(format!(
            "instance version {} unsupported",
            file.version
        )));
    }
    let instance = match file.scale.as_deref() {
        Some("log") => gsd::DominanceInstance::from_log_utilities(&file.utilities, file.weights)?,
        None | Some("raw") => {
            gsd::DominanceInstance::from_raw_utilities(&file.utilities, file.weights)?
        }
        Some(other) => {
            return Err(CliError::Config(format!(
                "unknown scale '{other}' (expected raw or log)"
            )))
        }
    };
    let verdict =
        gsd::solution_set_big_pi(&instance, file.retained_priors.as_deref(), file.xi)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&verdict).expect("verdict serialize")
    );
    Ok(())
}

fn cmd_oracle(args: &[String]) -> Result<(), CliError> {
    let which = args.first().map(String::as_str);
    let mut ran = false;
    let all = which.is_none();

    if all || which == Some("irls") {
        ran = true;
        let data = dataset::banknote_surrogate();
        let split = dataset::make_split(&data, 0.8, 0.2, 1)?;
        let view = dataset::LabeledView::from_split(&data, &split);
        let spec = ModelSpec::full(data.n_features(), 0);
        let newton = rpls::glm::fit(&view, &spec, 1e-6)?;
        let (_, irls_ll) = oracle::irls_fit(&view, &spec, 1e-6)?;
        println!(
            "{}",
            serde_json::json!({
                "oracle": "irls",
                "newton_log_lik": newton.log_lik,
                "irls_log_lik": irls_ll,
                "abs_diff": (newton.log_lik - irls_ll).abs(),
            })
        );
    }
    if all || which == Some("ppp-fidelity") {
        ran = true;
        let (agree, tau) = ppp_fidelity_check(42)?;
        println!(
            "{}",
            serde_json::json!({
                "oracle": "ppp-fidelity",
                "top1_agree": agree,
                "kendall_tau": tau,
            })
        );
    }
    if all || which == Some("mc-generator") {
        ran = true;
        let rate = oracle::mc_conditional_logistic_rate(5.0, 1.0, 1_000_000, 13);
        println!(
            "{}",
            serde_json::json!({
                "oracle": "mc-generator",
                "conditional_rate": rate,
            })
        );
    }
    if all || which == Some("k1-dominance") {
        ran = true;
        let scalars = vec![vec![0.0, 0.25, 0.5, 0.75, 1.0], vec![0.5, 0.5, 0.0, 1.0, 0.25]];
        let weights = vec![0.1, 0.2, 0.3, 0.25, 0.15];
        let raw: Vec<Vec<Vec<f64>>> = scalars
            .iter()
            .map(|c| c.iter().map(|&v| vec![v]).collect())
            .collect();
        let inst = gsd::DominanceInstance::from_raw_utilities(&raw, vec![weights.clone()])?;
        let dlp = gsd::build_lp(&inst, 0, 1, 0, 0.0)?;
        let (lp_value, _) = gsd::solve_lp(&dlp)?;
        let affine = oracle::k1_affine_degree(&scalars, &weights, 0, 1);
        println!(
            "{}",
            serde_json::json!({
                "oracle": "k1-dominance",
                "lp_degree": lp_value,
                "affine_degree": affine,
                "abs_diff": (lp_value - affine).abs(),
            })
        );
    }
    if !ran {
        return Err(CliError::Config(format!(
            "unknown oracle '{}'",
            which.unwrap_or_default()
        )));
    }
    Ok(())
}

/// Top-1 agreement and rank correlation between the PPP approximation and
/// the quadrature oracle on one seeded one-parameter problem.
fn ppp_fidelity_check(seed: u64) -> Result<(bool, f64), CliError> {
    let data = dataset::generate_binomial(30, &[1.5], 0.0, seed)?;
    let rows: Vec<(usize, usize)> = (0..20)
        .map(|r| (r, data.ground_truth(r).unwrap()))
        .collect();
    let view = dataset::LabeledView::from_rows(&data, rows);
    let spec = ModelSpec::new(vec![0], false, 1).map_err(Error::from)?;
    let fit = rpls::glm::fit(&view, &spec, 0.0)?;
    let prior = rpls::credal::PriorSpec::new(0, vec![0.0], 10.0)?;
    let grid = evidence::QuadratureGrid::default();
    let mut approx = Vec::new();
    let mut exact = Vec::new();
    for r in 20..30 {
        let x = data.features(r);
        let label = fit.predict_label(x)?;
        approx.push(
            evidence::ppp_approx(&fit, r, x, label, evidence::PppVariant::PointAugmented)?.value,
        );
        exact.push(evidence::ppp_exact(&view, x, label, &spec, &prior, &grid)?);
    }
    let top_a = criteria::rank_scores(&approx)[0].0;
    let top_e = criteria::rank_scores(&exact)[0].0;
    Ok((top_a == top_e, oracle::kendall_tau(&approx, &exact)))
}

fn cmd_make_data(args: &[String]) -> Result<(), CliError> {
    let out = args
        .first()
        .ok_or_else(|| CliError::Config(USAGE.into()))?;
    let data = dataset::banknote_surrogate();
    dataset::write_csv(&data, Path::new(out))?;
    eprintln!(
        "wrote {} rows x {} features to {out}",
        data.n_rows(),
        data.n_features()
    );
    Ok(())
}
