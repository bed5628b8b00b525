//! Command dispatch and the files each command writes.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use log::info;
use serde::{Deserialize, Serialize};

use landau_core::io::{load_snapshot, save_snapshot, write_atomic, write_energy_csv, write_ladder_csv, Snapshot};
use landau_core::verify::VerificationReport;
use landau_core::LandauError;

use crate::config::{ConfigError, RunConfig, Suite};
use crate::lab::{add_stability, Lab};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Coeffs,
    Evolve,
    Ladder,
    Verify,
    Report,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Coeffs => "coeffs",
            Command::Evolve => "evolve",
            Command::Ladder => "ladder",
            Command::Verify => "verify",
            Command::Report => "report",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numerical(LandauError),
    /// Suites whose checks did not all pass.
    SuiteFailure(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::SuiteFailure(_) => 4,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(LandauError::Io(_)) | CliError::Numerical(LandauError::Format(_)) => "io",
            CliError::Numerical(_) => "numerical",
            CliError::SuiteFailure(_) => "suite",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::SuiteFailure(s) => write!(f, "failing suites: {}", s.join(", ")),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<LandauError> for CliError {
    fn from(e: LandauError) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(e.into())
    }
}

/// Resolved locations; the cache directory honours `LANDAU_CACHE`.
#[derive(Debug, Clone)]
pub struct Paths {
    pub cache_dir: PathBuf,
    pub out_dir: PathBuf,
}

impl Paths {
    pub fn resolve(cfg: &RunConfig, out_override: Option<&Path>) -> Paths {
        let cache_dir = std::env::var_os("LANDAU_CACHE")
            .map(PathBuf::from)
            .unwrap_or_else(|| cfg.io.cache_dir.clone());
        let out_dir = out_override.map(Path::to_path_buf).unwrap_or_else(|| cfg.io.out_dir.clone());
        Paths { cache_dir, out_dir }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SnapshotEntry {
    t: f64,
    step: u64,
    file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EvolveManifest {
    config_fingerprint: String,
    dt: f64,
    steps: u64,
    snapshots: Vec<SnapshotEntry>,
}

/// Timestamps are kept out of every result file and written here.
#[derive(Debug, Serialize)]
struct Meta<'a> {
    command: &'a str,
    config_fingerprint: String,
    version: &'a str,
    started_unix: f64,
    finished_unix: f64,
    cache_hit: bool,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes())?;
    info!("wrote {}", path.display());
    Ok(())
}

fn write_report(dir: &Path, report: &VerificationReport) -> Result<(), CliError> {
    let mut text = report.to_json();
    text.push('\n');
    write_text(&dir.join(format!("report-{}.json", report.suite)), &text)
}

/// Runs `cmd`; `suites` overrides `verify.suites` for `verify`.
pub fn run_command(cmd: Command, cfg: &RunConfig, paths: &Paths, suites: Option<&[Suite]>) -> Result<(), CliError> {
    let started = now();
    fs::create_dir_all(&paths.out_dir)?;
    let out = paths.out_dir.as_path();
    let fp = cfg.fingerprint();
    let mut cache_hit = false;
    match cmd {
        Command::Coeffs => {
            let lab = Lab::open(cfg.clone(), Some(&paths.cache_dir))?;
            cache_hit = lab.cache_hit;
            let report = lab.coefficient_self_check();
            write_report(out, &report)?;
            if !report.passed() {
                return Err(CliError::SuiteFailure(vec![report.suite]));
            }
        }
        Command::Evolve => {
            let mut lab = Lab::open(cfg.clone(), Some(&paths.cache_dir))?;
            cache_hit = lab.cache_hit;
            write_evolution(&mut lab, out)?;
        }
        Command::Ladder => {
            let mut lab = Lab::open(cfg.clone(), Some(&paths.cache_dir))?;
            cache_hit = lab.cache_hit;
            let snaps = match read_manifest(out, &fp) {
                Some(s) => s,
                None => {
                    info!("no matching evolution output; evolving first");
                    write_evolution(&mut lab, out)?
                }
            };
            let model = cfg.source_model(cfg.velocity_grid())?;
            for &t in &cfg.ladder.eval_times {
                let snap = snaps
                    .iter()
                    .find(|s| s.t == t)
                    .ok_or_else(|| LandauError::InvalidArgument(format!("no snapshot at t = {t}")))?;
                let f = load_snapshot(&out.join(&snap.file))?.field;
                let ladder = landau_core::evolution::derivative_ladder(&f, t, cfg.ladder.kmax, &model, &lab.op)?;
                let mut buf = Vec::new();
                write_ladder_csv(&mut buf, &ladder, Some(&fp))?;
                write_atomic(&out.join(format!("ladder-t{t}.csv")), &buf)?;
            }
        }
        Command::Verify => {
            let suites = suites.map(<[Suite]>::to_vec).unwrap_or_else(|| cfg.verify.suites.clone());
            let mut lab = Lab::open(cfg.clone(), Some(&paths.cache_dir))?;
            cache_hit = lab.cache_hit;
            let mut coarse = match cfg.verify.coarse_n {
                Some(n) => Some(Lab::open(cfg.with_grid_size(n), Some(&paths.cache_dir))?),
                None => None,
            };
            let mut failing = Vec::new();
            for suite in suites {
                info!("suite {suite}");
                let mut report = lab.run_suite(suite)?;
                if let (Some(c), true) = (coarse.as_mut(), suite != Suite::Kernel) {
                    let coarse_report = c.run_suite(suite)?;
                    add_stability(&mut report, &coarse_report);
                }
                write_report(out, &report)?;
                if !report.passed() {
                    failing.push(report.suite.clone());
                }
            }
            if !failing.is_empty() {
                return Err(CliError::SuiteFailure(failing));
            }
        }
        Command::Report => {
            let text = summarize(out)?;
            write_text(&out.join("summary.md"), &text)?;
        }
    }
    let meta = Meta {
        command: cmd.name(),
        config_fingerprint: fp,
        version: env!("CARGO_PKG_VERSION"),
        started_unix: started,
        finished_unix: now(),
        cache_hit,
    };
    let text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    write_atomic(&out.join(format!("meta-{}.json", cmd.name())), text.as_bytes())?;
    Ok(())
}

fn write_evolution(lab: &mut Lab, out: &Path) -> Result<Vec<SnapshotEntry>, CliError> {
    let fp = lab.cfg.fingerprint();
    let gamma = lab.cfg.gamma;
    let tr = lab.reference_run()?;
    let mut entries = Vec::new();
    for (step, t, field) in &tr.snapshots {
        let file = format!("snapshot-{step:08}.fld");
        save_snapshot(
            &out.join(&file),
            &Snapshot {
                gamma,
                step_index: *step,
                t: *t,
                field: field.clone(),
            },
        )?;
        entries.push(SnapshotEntry {
            t: *t,
            step: *step,
            file,
        });
    }
    let mut buf = Vec::new();
    write_energy_csv(&mut buf, &tr.state.energy_log, Some(&fp))?;
    write_atomic(&out.join("energy.csv"), &buf)?;
    let manifest = EvolveManifest {
        config_fingerprint: fp,
        dt: tr.dt,
        steps: tr.state.step_index,
        snapshots: entries.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_text(&out.join("evolve.json"), &text)?;
    Ok(entries)
}

fn read_manifest(out: &Path, fp: &str) -> Option<Vec<SnapshotEntry>> {
    let text = fs::read_to_string(out.join("evolve.json")).ok()?;
    let m: EvolveManifest = serde_json::from_str(&text).ok()?;
    (m.config_fingerprint == fp && m.snapshots.iter().all(|s| out.join(&s.file).exists())).then_some(m.snapshots)
}

/// Markdown summary of every `report-*.json` in `dir`, sorted by name.
pub fn summarize(dir: &Path) -> Result<String, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.starts_with("report-") && name.ends_with(".json")
        })
        .collect();
    files.sort();
    let mut reports = Vec::new();
    for p in &files {
        let text = fs::read_to_string(p)?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| LandauError::Format(format!("{}: {e}", p.display())))?;
        reports.push(value);
    }
    let mut s = String::from("# Verification summary\n\n");
    if let Some(fp) = reports.first().and_then(|r| r["config_fingerprint"].as_str()) {
        s.push_str(&format!("Config fingerprint: `{fp}`\n\n"));
    }
    s.push_str("| suite | checks | passed |\n|---|---|---|\n");
    for r in &reports {
        let checks = r["checks"].as_array().map(Vec::as_slice).unwrap_or(&[]);
        let passed = checks.iter().filter(|c| c["verdict"].as_bool() == Some(true)).count();
        s.push_str(&format!(
            "| {} | {} | {} |\n",
            r["suite"].as_str().unwrap_or("?"),
            checks.len(),
            passed
        ));
    }
    s.push_str("\n## Constants\n\n| name | value | N | ensemble | refinement change |\n|---|---|---|---|---|\n");
    for r in &reports {
        for c in r["constants"].as_array().map(Vec::as_slice).unwrap_or(&[]) {
            let stab = c["stability"].as_f64().map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
            s.push_str(&format!(
                "| {} | {:.6e} | {} | {} | {} |\n",
                c["name"].as_str().unwrap_or("?"),
                c["value"].as_f64().unwrap_or(f64::NAN),
                c["grid"]["N"],
                c["ensemble_size"],
                stab
            ));
        }
    }
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            let suite = r["suite"].as_str().unwrap_or("?").to_string();
            r["checks"]
                .as_array()
                .cloned()
                .unwrap_or_default()
                .into_iter()
                .filter(|c| c["verdict"].as_bool() != Some(true))
                .map(move |c| format!("- {suite}: `{}` = {} (tol {})", c["id"].as_str().unwrap_or("?"), c["value"], c["tol"]))
        })
        .collect();
    if !failed.is_empty() {
        s.push_str("\n## Failing checks\n\n");
        for line in failed {
            s.push_str(&line);
            s.push('\n');
        }
    }
    Ok(s)
}
