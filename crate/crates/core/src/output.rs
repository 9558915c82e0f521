//! CSV outputs of an experiment run and their read-back.
//!
//! Floating-point fields are written with 17 significant digits
//! (`{:.16e}`), which round-trips every `f64` exactly. Missing values are
//! `NaN`. Files are UTF-8 with `\n` line endings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiment::{
    check_first_order, check_small_models, CellComplexity, ExperimentResult, TrialRecord, COVERAGE_LADDER,
};

pub const TRIALS_FILE: &str = "trials.csv";
pub const COMPLEXITY_FILE: &str = "complexity.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const BOUNDS_FILE: &str = "bounds.csv";
pub const SMALL_MODELS_FILE: &str = "small_models.csv";
pub const PLOT_RATIO_FILE: &str = "plot_ratio_vs_n.csv";
pub const PLOT_COVERAGE_FILE: &str = "plot_coverage_vs_n.csv";
pub const PLOT_SUP_RATE_FILE: &str = "plot_sup_rate.csv";
pub const RATE_FIT_FILE: &str = "rate_fit.csv";
pub const CONFIG_ECHO_FILE: &str = "config.toml";
pub const MANIFEST_FILE: &str = "manifest.toml";

pub const TRIALS_HEADER: &str = "n,D,r,trial,true_excess,empirical_excess,ratio,sup_dist,chi,degenerate";
const COMPLEXITY_HEADER: &str = "n,D,r,K1M_sq,target,closed_form_histogram,bias";

/// 17 significant digits; `NaN`, `inf`, `-inf` for non-finite values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ladder_header(prefix: &str) -> String {
    COVERAGE_LADDER
        .iter()
        .map(|e| format!("{prefix}_{e}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn join_f64(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(",")
}

pub fn trials_csv(result: &ExperimentResult) -> String {
    let mut s = format!("{TRIALS_HEADER}\n");
    for r in result.cells.iter().flat_map(|c| &c.records) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.dimension,
            r.degree,
            r.trial,
            fmt_f64(r.true_excess),
            fmt_f64(r.empirical_excess),
            fmt_f64(r.ratio()),
            fmt_f64(r.sup_dist),
            fmt_f64(r.chi),
            u8::from(r.degenerate)
        );
    }
    s
}

pub fn complexity_csv(result: &ExperimentResult) -> String {
    let mut s = format!("{COMPLEXITY_HEADER}\n");
    for c in result.cells.iter().map(|c| &c.complexity) {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            c.n,
            c.dimension,
            c.degree,
            join_f64(&[c.k1m_sq, c.target, c.closed_form, c.bias])
        );
    }
    s
}

pub fn summary_csv(result: &ExperimentResult) -> String {
    let mut s = format!(
        "n,D,r,trials,degenerate,K1M_sq,target,mean_true,mean_emp,se_emp,\
         true_q25,true_q50,true_q75,emp_q25,emp_q50,emp_q75,median_ratio,mean_ratio,\
         mean_sup,q99_sup,mean_chi_sq,se_chi_sq,chi_sq_expected,{},{}\n",
        ladder_header("cov_true"),
        ladder_header("cov_emp")
    );
    for c in result.cells.iter().map(|c| &c.summary) {
        let mut values = vec![c.k1m_sq, c.target, c.mean_true, c.mean_emp, c.se_emp];
        values.extend(c.true_quartiles);
        values.extend(c.emp_quartiles);
        values.extend([
            c.median_ratio,
            c.mean_ratio,
            c.mean_sup,
            c.q99_sup,
            c.mean_chi_sq,
            c.se_chi_sq,
            c.chi_sq_expected,
        ]);
        values.extend(c.coverage_true);
        values.extend(c.coverage_emp);
        let _ = writeln!(s, "{},{},{},{},{},{}", c.n, c.dimension, c.degree, c.trials, c.degenerate, join_f64(&values));
    }
    s
}

fn bounds_csv(result: &ExperimentResult) -> String {
    let mut s = String::from("n,D,r,nondegenerate,median_ratio,mean_ratio,deviation_q90,rate_proxy\n");
    if let Ok(report) = check_first_order(result) {
        for c in &report.cells {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                c.n,
                c.dimension,
                c.degree,
                c.nondegenerate,
                join_f64(&[c.median_ratio, c.mean_ratio, c.deviation_q90, c.rate_proxy])
            );
        }
    }
    s
}

fn small_models_csv(result: &ExperimentResult) -> String {
    let mut s = String::from("n,D,max_true_scaled,max_emp_scaled\n");
    for c in check_small_models(result).cells {
        let _ = writeln!(s, "{},{},{}", c.n, c.dimension, join_f64(&[c.max_true_scaled, c.max_emp_scaled]));
    }
    s
}

fn plot_ratio_csv(result: &ExperimentResult) -> String {
    let mut s = String::from("n,D,r,median_ratio,mean_ratio,true_q25,true_q50,true_q75,emp_q25,emp_q50,emp_q75\n");
    for c in result.cells.iter().map(|c| &c.summary) {
        let mut values = vec![c.median_ratio, c.mean_ratio];
        values.extend(c.true_quartiles);
        values.extend(c.emp_quartiles);
        let _ = writeln!(s, "{},{},{},{}", c.n, c.dimension, c.degree, join_f64(&values));
    }
    s
}

fn plot_coverage_csv(result: &ExperimentResult) -> String {
    let mut s = String::from("n,D,r,e,coverage_true,coverage_emp\n");
    for c in result.cells.iter().map(|c| &c.summary) {
        for (i, &e) in COVERAGE_LADDER.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                c.n,
                c.dimension,
                c.degree,
                join_f64(&[e, c.coverage_true[i], c.coverage_emp[i]])
            );
        }
    }
    s
}

fn plot_sup_rate_csv(result: &ExperimentResult) -> (String, String) {
    let mut points = String::from("n,D,r,log_abscissa,log_q99_sup\n");
    let mut fit = String::from("rho,kappa\n");
    if let Some(rate) = &result.sup_rate {
        for p in &rate.points {
            let _ = writeln!(points, "{},{},{},{}", p.n, p.dimension, p.degree, join_f64(&[p.log_abscissa, p.log_q99]));
        }
        let _ = writeln!(fit, "{}", join_f64(&[rate.rho, rate.kappa]));
    }
    (points, fit)
}

/// Files derived from trial records and cell complexities; rewritten
/// identically by `report`.
pub fn write_summaries(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let (sup_points, sup_fit) = plot_sup_rate_csv(result);
    let files = [
        (SUMMARY_FILE, summary_csv(result)),
        (BOUNDS_FILE, bounds_csv(result)),
        (SMALL_MODELS_FILE, small_models_csv(result)),
        (PLOT_RATIO_FILE, plot_ratio_csv(result)),
        (PLOT_COVERAGE_FILE, plot_coverage_csv(result)),
        (PLOT_SUP_RATE_FILE, sup_points),
        (RATE_FIT_FILE, sup_fit),
    ];
    files
        .into_iter()
        .map(|(name, contents)| {
            let path = dir.join(name);
            write_file(&path, &contents)?;
            Ok(path)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config_echo: String,
    pub version: String,
    pub wall_clock_seconds: f64,
    pub seed: u64,
    pub files: Vec<PathBuf>,
}

impl RunManifest {
    fn to_toml(&self) -> String {
        let files: Vec<String> = self
            .files
            .iter()
            .map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default())
            .collect();
        let table = toml::toml! {
            version = (self.version.clone())
            seed = (self.seed as i64)
            wall_clock_seconds = (self.wall_clock_seconds)
            files = (files)
        };
        toml::to_string(&table).expect("manifest serializes")
    }
}

/// Writes trial records, cell complexities, summaries, plot data, the
/// configuration echo and a manifest into `dir` (created if missing). Only
/// the manifest carries run-dependent data (wall-clock time).
pub fn emit_outputs(
    result: &ExperimentResult,
    dir: &Path,
    config_echo: &str,
    seed: u64,
    wall_clock_seconds: f64,
) -> Result<RunManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for (name, contents) in [
        (TRIALS_FILE, trials_csv(result)),
        (COMPLEXITY_FILE, complexity_csv(result)),
        (CONFIG_ECHO_FILE, config_echo.to_string()),
    ] {
        let path = dir.join(name);
        write_file(&path, &contents)?;
        files.push(path);
    }
    files.extend(write_summaries(result, dir)?);
    let manifest = RunManifest {
        config_echo: config_echo.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds,
        seed,
        files,
    };
    write_file(&dir.join(MANIFEST_FILE), &manifest.to_toml())?;
    Ok(manifest)
}

fn read_lines(path: &Path, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let parse_err = |line: usize, detail: String| Error::Parse {
        path: path.display().to_string(),
        line,
        detail,
    };
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_err(1, format!("{other:?}")),
        })?;
    let found = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
    if found.iter().collect::<Vec<_>>().join(",") != header {
        return Err(parse_err(1, format!("expected header `{header}`")));
    }
    reader
        .records()
        .map(|rec| {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                parse_err(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            Ok((line, rec.iter().map(str::to_string).collect()))
        })
        .collect()
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, fields: &[String], idx: usize) -> Result<T> {
    fields
        .get(idx)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line,
            detail: format!("field {} is missing or malformed", idx + 1),
        })
}

pub fn read_trials(path: &Path) -> Result<Vec<TrialRecord>> {
    read_lines(path, TRIALS_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let degenerate: u8 = field(path, line, &f, 9)?;
            Ok(TrialRecord {
                n: field(path, line, &f, 0)?,
                dimension: field(path, line, &f, 1)?,
                degree: field(path, line, &f, 2)?,
                trial: field(path, line, &f, 3)?,
                true_excess: field(path, line, &f, 4)?,
                empirical_excess: field(path, line, &f, 5)?,
                sup_dist: field(path, line, &f, 7)?,
                chi: field(path, line, &f, 8)?,
                degenerate: degenerate != 0,
            })
        })
        .collect()
}

pub fn read_complexity(path: &Path) -> Result<Vec<CellComplexity>> {
    read_lines(path, COMPLEXITY_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            Ok(CellComplexity {
                n: field(path, line, &f, 0)?,
                dimension: field(path, line, &f, 1)?,
                degree: field(path, line, &f, 2)?,
                k1m_sq: field(path, line, &f, 3)?,
                target: field(path, line, &f, 4)?,
                closed_form: field(path, line, &f, 5)?,
                bias: field(path, line, &f, 6)?,
            })
        })
        .collect()
}

/// Rebuilds an experiment result from the per-trial and complexity files
/// of a run directory.
pub fn load_run(dir: &Path) -> Result<ExperimentResult> {
    let complexities = read_complexity(&dir.join(COMPLEXITY_FILE))?;
    let trials = read_trials(&dir.join(TRIALS_FILE))?;
    let cells = complexities
        .into_iter()
        .map(|c| {
            let records: Vec<TrialRecord> = trials
                .iter()
                .filter(|r| r.n == c.n && r.dimension == c.dimension && r.degree == c.degree)
                .copied()
                .collect();
            (c, records)
        })
        .collect();
    Ok(ExperimentResult::from_records(cells))
}
