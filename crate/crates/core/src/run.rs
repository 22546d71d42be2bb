//! Executes a [`RunConfig`] and writes its artifacts.
//!
//! Every command produces one primary CSV named after the command, a
//! `run-meta.json` holding the resolved config, warnings and summary results,
//! and optionally an SVG plot and BPM image exports. Numbers are written as
//! `{:.8e}` (9 significant digits, locale independent). Files are written to
//! a temporary name and renamed into place.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::bpm::analysis::{crosstalk_study, measure_crosstalk_field, trench_variants, CrosstalkReport};
use crate::bpm::export::{self, GrayScale};
use crate::bpm::{build_index_map, FiberCrossSection};
use crate::config::{
    has_errors, validate, BpmCrosstalkParams, CommandKind, Diagnostic, Parameters, PsrMapParams, RunConfig,
    SceneConfig, Severity, SigmaAxis, SweepParams, TrenchStudyParams, VisibilityMethod, VisibilityParams,
};
use crate::error::{BpmError, ModelError};
use crate::noise::McConfig;
use crate::plot::LinePlot;
use crate::psr;
use crate::threshold::{self, SweepGrid, ThresholdPoint, ThresholdResult};
use crate::visibility;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "MCF_QKD_OUTPUT_DIR";

/// Used when neither the config, the command line nor the environment names
/// an output directory.
pub const DEFAULT_OUTPUT_DIR: &str = "mcf-qkd-output";

pub const META_FILE: &str = "run-meta.json";

/// Floor of the decibel gray scale used for intensity images.
pub const INTENSITY_FLOOR_DB: f64 = -120.0;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration:\n{}", join_lines(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn join_lines(d: &[Diagnostic]) -> String {
    d.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
}

impl RunError {
    /// Process exit status: 1 for configuration and I/O problems, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<ModelError> for RunError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Bracketing(_) => RunError::Numerical(e.to_string()),
            _ => RunError::Config(e.to_string()),
        }
    }
}

impl From<BpmError> for RunError {
    fn from(e: BpmError) -> Self {
        match e {
            BpmError::Unstable { .. } | BpmError::DegenerateField => RunError::Numerical(e.to_string()),
            BpmError::Io(source) => RunError::Io {
                path: PathBuf::new(),
                source,
            },
            _ => RunError::Config(e.to_string()),
        }
    }
}

/// A CSV table with a header row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory write")
    }

    /// Cells of the named column, top to bottom.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

/// Fixed 9-significant-digit scientific notation.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.8e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// A secondary artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Everything a run computes, before anything is written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub table: Table,
    pub plot: Option<LinePlot>,
    pub extra: Vec<OutputFile>,
    /// Command-specific summary stored in the meta document.
    pub results: Value,
    pub warnings: Vec<Diagnostic>,
}

impl RunOutput {
    pub fn command(&self) -> CommandKind {
        self.config.command()
    }

    pub fn csv_name(&self) -> String {
        format!("{}.csv", self.command())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Also write `<command>.svg`.
    pub plot: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<Diagnostic>,
}

/// The config's directory, else `$MCF_QKD_OUTPUT_DIR`, else
/// [`DEFAULT_OUTPUT_DIR`].
pub fn resolve_output_dir(config: &RunConfig) -> PathBuf {
    config
        .output_dir
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

/// Validates and executes `config` and writes all artifacts.
pub fn run(config: &RunConfig, options: &RunOptions) -> Result<RunSummary, RunError> {
    let mut config = config.clone();
    let dir = resolve_output_dir(&config);
    config.output_dir = Some(dir.clone());
    let out = execute(&config)?;
    let files = write_outputs(&out, &dir, options)?;
    Ok(RunSummary {
        output_dir: dir,
        files,
        warnings: out.warnings,
    })
}

/// Validates and executes `config` without touching the file system.
pub fn execute(config: &RunConfig) -> Result<RunOutput, RunError> {
    let diagnostics = validate(config);
    if has_errors(&diagnostics) {
        return Err(RunError::Invalid(
            diagnostics.into_iter().filter(|d| d.severity == Severity::Error).collect(),
        ));
    }
    let mut out = match &config.parameters {
        Parameters::Visibility(p) => run_visibility(p, config.seed)?,
        Parameters::Threshold(p) => run_threshold(p, false)?,
        Parameters::SnrCurve(p) => run_threshold(p, true)?,
        Parameters::PsrSweep(p) => run_psr_sweep(p)?,
        Parameters::PsrMap(p) => run_psr_map(p)?,
        Parameters::BpmCrosstalk(p) => run_bpm(p)?,
        Parameters::TrenchStudy(p) => run_trench_study(p)?,
    };
    let mut warnings = diagnostics;
    warnings.append(&mut out.warnings);
    Ok(RunOutput {
        config: config.clone(),
        table: out.table,
        plot: out.plot,
        extra: out.extra,
        results: out.results,
        warnings,
    })
}

/// Writes the CSV, the meta document, any extra files and, with
/// `options.plot`, the SVG. Returns the written paths.
pub fn write_outputs(out: &RunOutput, dir: &Path, options: &RunOptions) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<(String, Vec<u8>)> = vec![(out.csv_name(), out.table.to_csv())];
    if options.plot {
        if let Some(p) = &out.plot {
            files.push((format!("{}.svg", out.command()), p.to_svg().into_bytes()));
        }
    }
    files.extend(out.extra.iter().map(|f| (f.name.clone(), f.bytes.clone())));
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    let meta = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": out.command().name(),
        "config": out.config,
        "outputs": names,
        "warnings": out.warnings,
        "results": out.results,
    });
    let meta = serde_json::to_vec_pretty(&meta).expect("meta serializes");
    files.push((META_FILE.to_string(), meta));
    let mut written = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let path = dir.join(name);
        write_atomic(&path, &bytes).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}

/// Writes `bytes` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

struct Partial {
    table: Table,
    plot: Option<LinePlot>,
    extra: Vec<OutputFile>,
    results: Value,
    warnings: Vec<Diagnostic>,
}

impl Partial {
    fn new(table: Table, plot: Option<LinePlot>, results: Value) -> Self {
        Partial {
            table,
            plot,
            extra: Vec::new(),
            results,
            warnings: Vec::new(),
        }
    }
}

fn sigmas(axis: &SigmaAxis, scene: &SceneConfig) -> Vec<f64> {
    axis.resolve().unwrap_or_else(|| vec![scene.sigma_hz])
}

fn log_axis(values: &[f64]) -> bool {
    values.len() > 1 && values.iter().all(|&v| v > 0.0)
}

fn run_visibility(p: &VisibilityParams, seed: Option<u64>) -> Result<Partial, RunError> {
    let mut table = Table::new(&["scene_id", "sigma_hz", "v_mean", "v_stderr", "qber"]);
    let axis = p.axis();
    let mut plot = LinePlot::new("Visibility vs phase noise", "sigma (Hz)", "visibility", false);
    let mut log_x = true;
    for (i, sc) in p.scenes.iter().enumerate() {
        let id = sc.id.clone().unwrap_or_else(|| format!("scene{i}"));
        let values = sigmas(&axis, sc);
        log_x &= log_axis(&values);
        let base = sc.scene();
        let sd = sc.params.click_sum();
        let e0 = p.baseline_qber.unwrap_or(sc.params.d1 / sd);
        let mut curve = Vec::with_capacity(values.len());
        for &sigma in &values {
            let scene = base.with_sigma(sigma);
            let (mean, err) = match p.method {
                VisibilityMethod::Averaged => (visibility::visibility_avg(&scene)?, 0.0),
                VisibilityMethod::MonteCarlo => {
                    let mc = McConfig::new(p.n_samples, seed.expect("validated"));
                    let est = visibility::visibility_mc(&scene, &mc);
                    (est.mean, est.std_err)
                }
            };
            let qber = visibility::qber_estimate(&scene, e0)?;
            table.rows.push(vec![id.clone(), fmt_num(sigma), fmt_num(mean), fmt_num(err), fmt_num(qber)]);
            curve.push((sigma, mean));
        }
        plot.add(&id, curve);
    }
    plot.log_x = log_x;
    let rows = table.rows.len();
    Ok(Partial::new(table, Some(plot), json!({ "rows": rows })))
}

fn threshold_row(p: &ThresholdPoint) -> Vec<String> {
    let crossing = p.result.scale();
    vec![
        fmt_num(p.sigma_hz),
        p.result.kind_name().to_string(),
        fmt_opt(crossing),
        fmt_opt(crossing.map(|_| p.scale_db())),
        fmt_opt(crossing.map(|_| p.normalized)),
    ]
}

const THRESHOLD_COLUMNS: [&str; 5] = ["sigma_hz", "kind", "s_star", "s_star_db", "normalized"];

fn sweep(p: &SweepParams) -> Result<(SweepGrid, Vec<ThresholdPoint>), RunError> {
    let grid = SweepGrid::new(sigmas(&p.axis(), &p.scene), p.scene.scene())?;
    let points = threshold::threshold_vs_noise(&grid)?;
    Ok((grid, points))
}

fn kind_counts(points: &[ThresholdPoint]) -> Value {
    let count = |k: &str| points.iter().filter(|p| p.result.kind_name() == k).count();
    json!({
        "Crossing": count("Crossing"),
        "NoEffect": count("NoEffect"),
        "AlwaysBelow": count("AlwaysBelow"),
    })
}

fn run_threshold(p: &SweepParams, snr: bool) -> Result<Partial, RunError> {
    let (grid, points) = sweep(p)?;
    let mut table = Table::new(&THRESHOLD_COLUMNS);
    table.rows = points.iter().map(threshold_row).collect();
    let s_inf = threshold::infinite_noise_threshold(&grid.scene_template.params)?;
    let mut plot = if snr {
        LinePlot::new("Key-loss threshold (SNR)", "sigma (Hz)", "threshold crosstalk (dB)", false)
    } else {
        LinePlot::new("Normalized key-loss threshold", "sigma (Hz)", "s*/s_inf", false)
    };
    plot.log_x = log_axis(&grid.sigma_values);
    plot.add(
        "threshold",
        points
            .iter()
            .map(|pt| (pt.sigma_hz, if snr { pt.scale_db() } else { pt.normalized }))
            .collect(),
    );
    Ok(Partial::new(
        table,
        Some(plot),
        json!({ "s_inf": s_inf, "kinds": kind_counts(&points) }),
    ))
}

fn run_psr_sweep(p: &SweepParams) -> Result<Partial, RunError> {
    let (grid, points) = sweep(p)?;
    let mut header = THRESHOLD_COLUMNS.to_vec();
    header.push("c_bar");
    let mut table = Table::new(&header);
    for pt in &points {
        let mut row = threshold_row(pt);
        let c_bar = grid.scene_template.with_sigma(pt.sigma_hz).mean_harmonic()?;
        row.push(fmt_num(c_bar));
        table.rows.push(row);
    }
    let sigma_star = psr::find_psr(&grid)?;
    let window: Vec<f64> = points
        .iter()
        .filter(|p| matches!(p.result, ThresholdResult::NoEffect))
        .map(|p| p.sigma_hz)
        .collect();
    let mut plot = LinePlot::new("Phase stochastic resonance", "sigma (Hz)", "s*/s_inf", log_axis(&grid.sigma_values));
    plot.add("normalized threshold", points.iter().map(|pt| (pt.sigma_hz, pt.normalized)).collect());
    Ok(Partial::new(
        table,
        Some(plot),
        json!({
            "sigma_star_hz": sigma_star,
            "kinds": kind_counts(&points),
            "no_effect_sigma_min_hz": window.first(),
            "no_effect_sigma_max_hz": window.last(),
        }),
    ))
}

fn run_psr_map(p: &PsrMapParams) -> Result<Partial, RunError> {
    let values = p.axis().resolve().expect("validated");
    let map = psr::psr_map(&p.v_w1, &p.v_w2, &p.scene.scene(), &values)?;
    let mut table = Table::new(&["v_w1", "v_w2", "sigma_star_hz"]);
    for (a, b, s) in map.entries() {
        table.rows.push(vec![fmt_num(a), fmt_num(b), fmt_opt(s)]);
    }
    let mut plot = LinePlot::new("PSR position", "V_w2", "sigma* (Hz)", false);
    for (i, &a) in map.v_w1.iter().enumerate() {
        let pts = map
            .v_w2
            .iter()
            .zip(&map.sigma_star[i])
            .map(|(&b, s)| (b, s.unwrap_or(f64::NAN)))
            .collect();
        plot.add(&format!("V_w1 = {a}"), pts);
    }
    let found = map.entries().filter(|e| e.2.is_some()).count();
    let cells = table.rows.len();
    Ok(Partial::new(table, Some(plot), json!({ "cells": cells, "with_resonance": found })))
}

fn bpm_table(reports: &[CrosstalkReport], cores: usize) -> Table {
    let mut header = vec!["variant".to_string(), "trench_width_um".into(), "dn".into()];
    header.extend((0..cores).map(|k| format!("xt_core{k}_db")));
    header.push("absorbed_fraction".into());
    let rows = reports
        .iter()
        .map(|r| {
            let mut row = vec![r.label.clone(), fmt_num(r.trench_width_um), fmt_num(r.trench_dn)];
            row.extend(r.crosstalk_db.iter().map(|x| fmt_opt(*x)));
            row.push(fmt_num(r.absorbed_fraction));
            row
        })
        .collect();
    Table { header, rows }
}

fn guidance_warnings(reports: &[CrosstalkReport]) -> Vec<Diagnostic> {
    reports
        .iter()
        .filter(|r| !r.guided)
        .map(|r| Diagnostic {
            severity: Severity::Warning,
            key: "parameters.fiber".into(),
            message: format!("{}: the fundamental mode is not guided; crosstalk is meaningless", r.label),
        })
        .collect()
}

fn encode<F: FnOnce(&mut Vec<u8>) -> io::Result<()>>(name: &str, f: F) -> Result<OutputFile, RunError> {
    let mut bytes = Vec::new();
    f(&mut bytes).map_err(|source| RunError::Io {
        path: PathBuf::from(name),
        source,
    })?;
    Ok(OutputFile {
        name: name.into(),
        bytes,
    })
}

fn run_bpm(p: &BpmCrosstalkParams) -> Result<Partial, RunError> {
    let (report, field) = measure_crosstalk_field(&p.fiber, &p.grid, p.launch_core, p.distance_um)?;
    let reports = vec![report];
    let mut out = Partial::new(bpm_table(&reports, p.fiber.core_count()), None, json!({ "report": reports[0] }));
    out.warnings = guidance_warnings(&reports);
    if p.exports.index {
        let map = build_index_map(&p.fiber, &p.grid)?;
        out.extra.push(encode("index.csv", |w| export::write_index_csv(w, &map))?);
        out.extra.push(encode("index.pgm", |w| export::write_index_pgm(w, &map))?);
    }
    if p.exports.intensity {
        // the launched isolated-core mode has unit power
        let values = export::normalized_intensity(&field, 1.0);
        let (nx, ny) = (p.grid.nx, p.grid.ny);
        out.extra.push(encode("intensity.csv", |w| export::write_csv_grid(w, nx, ny, &values))?);
        out.extra.push(encode("intensity.pgm", |w| {
            export::write_pgm(w, nx, ny, &values, GrayScale::Decibel { floor_db: INTENSITY_FLOOR_DB })
        })?);
    }
    Ok(out)
}

/// The variants of a trench study: the no-trench fiber when `widths_um`
/// holds 0, then every nonzero width at each depression.
pub fn study_variants(p: &TrenchStudyParams) -> Vec<FiberCrossSection> {
    let mut v = trench_variants(&p.fiber, &p.widths_um, &p.trench_dn, p.trench_gap_um);
    if !p.widths_um.contains(&0.0) {
        v.remove(0);
    }
    v
}

fn run_trench_study(p: &TrenchStudyParams) -> Result<Partial, RunError> {
    let variants = study_variants(p);
    let reports = crosstalk_study(&variants, p.distance_um, &p.grid)?;
    let table = bpm_table(&reports, p.fiber.core_count());
    let mut plot = LinePlot::new("Crosstalk vs trench width", "trench width (um)", "worst crosstalk (dB)", false);
    let reference = reports.iter().find(|r| r.trench_width_um == 0.0);
    for &dn in &p.trench_dn {
        let mut pts: Vec<(f64, f64)> = reference.iter().map(|r| (0.0, r.worst_crosstalk_db())).collect();
        pts.extend(
            reports
                .iter()
                .filter(|r| r.trench_width_um > 0.0 && r.trench_dn == dn)
                .map(|r| (r.trench_width_um, r.worst_crosstalk_db())),
        );
        plot.add(&format!("dn {dn}"), pts);
    }
    let summary: Vec<Value> = reports
        .iter()
        .map(|r| json!({ "variant": r.label, "worst_crosstalk_db": r.worst_crosstalk_db() }))
        .collect();
    let mut out = Partial::new(table, Some(plot), json!({ "variants": summary, "reports": reports }));
    out.warnings = guidance_warnings(&reports);
    Ok(out)
}
