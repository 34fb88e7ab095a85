//! One (algorithm, seed) run and its artifact directory.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use ledma_core::llm::{
    ChatBackend, HttpBackend, LlmOperator, MockBackend, OperatorTranscript, PROMPT_TEMPLATE_VERSION,
};
use ledma_core::metrics::{hypervolume_2d, FrontNormalization, NORMALIZED_REFERENCE};
use ledma_core::model::{decode, is_penalized, Scenario};
use ledma_core::moead::{self, ArchiveEntry, GenerationRecord, RunResult};
use ledma_core::operators::{DeOperator, GaOperator, RandomOperator};
use ledma_core::ObjectiveVector;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{AlgoId, BackendKind, RunConfig};

pub const CONFIG_FILE: &str = "config.json";
pub const FRONT_FILE: &str = "front.csv";
pub const POPULATION_FILE: &str = "population.csv";
pub const EP_HISTORY_FILE: &str = "ep_history.csv";
pub const HV_LOG_FILE: &str = "hv_log.csv";
pub const TRANSCRIPTS_FILE: &str = "transcripts.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMING_FILE: &str = "timing.json";

/// Hex SHA-256 of the scenario's JSON form (positions, RCS, constants).
pub fn scenario_hash(scn: &Scenario) -> String {
    let bytes = serde_json::to_vec(scn).expect("scenario serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Normalization bounds used inside a single run: min/max over every
/// non-penalized archive point seen in any generation.
///
/// Falls back to a unit box anchored at the minimum when a coordinate never
/// varies, and to the unit square when every point is penalized.
pub fn run_bounds(trace: &[GenerationRecord]) -> FrontNormalization {
    let pts: Vec<[f64; 2]> = trace
        .iter()
        .flat_map(|r| r.archive.iter())
        .filter(|e| !is_penalized(&e.f))
        .map(|e| e.f.as_array())
        .collect();
    bounds_with_fallback(&pts)
}

pub(crate) fn bounds_with_fallback(pts: &[[f64; 2]]) -> FrontNormalization {
    if pts.is_empty() {
        return FrontNormalization::new([0.0, 0.0], [1.0, 1.0]).expect("unit box");
    }
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in pts {
        for a in 0..2 {
            min[a] = min[a].min(p[a]);
            max[a] = max[a].max(p[a]);
        }
    }
    for a in 0..2 {
        if max[a] <= min[a] {
            max[a] = min[a] + 1.0;
        }
    }
    FrontNormalization::new(min, max).expect("non-degenerate after widening")
}

/// HV of the non-penalized part of `front` under `norm`, reference (1.1, 1.1).
pub fn normalized_hv(front: &[ObjectiveVector], norm: &FrontNormalization) -> f64 {
    let pts: Vec<[f64; 2]> = front
        .iter()
        .filter(|f| !is_penalized(f))
        .map(|f| norm.apply(&f.as_array()))
        .collect();
    hypervolume_2d(&pts, NORMALIZED_REFERENCE)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl From<&FrontNormalization> for Bounds {
    fn from(n: &FrontNormalization) -> Self {
        Self { min: n.min, max: n.max }
    }
}

/// Deterministic run summary; wall time lives in `timing.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algo: AlgoId,
    pub seed: u64,
    pub scenario_hash: String,
    pub evaluations: usize,
    pub generations: usize,
    pub ep_size: usize,
    /// HV of the final archive under this run's own bounds.
    pub final_hv: f64,
    pub normalization: Bounds,
    pub operator_calls: usize,
    pub operator_failures: usize,
    /// Share of LLM calls answered entirely by the fallback operator.
    pub fallback_rate: Option<f64>,
    pub prompt_template_version: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub wall_time_s: f64,
    pub finished_at: String,
}

#[derive(Serialize)]
struct ConfigSnapshot<'a> {
    config: &'a RunConfig,
    scenario: &'a Scenario,
    scenario_hash: &'a str,
}

/// Everything a finished run produced.
#[derive(Debug)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub scenario: Scenario,
    pub summary: Summary,
    pub result: RunResult,
    pub transcripts: Vec<OperatorTranscript>,
    pub wall_time_s: f64,
}

/// Runs the optimizer without touching the filesystem.
pub fn execute(cfg: &RunConfig) -> Result<(Scenario, RunResult, Vec<OperatorTranscript>)> {
    let scenario = cfg
        .scenario
        .sample(cfg.file.placement_seed)
        .context("building scenario")?;
    let params = &cfg.params;
    let (result, transcripts) = match cfg.algo() {
        AlgoId::Ledma => {
            let backend: Box<dyn ChatBackend> = match cfg.backend() {
                BackendKind::Mock => Box::new(MockBackend::default()),
                BackendKind::Http => Box::new(HttpBackend::new(cfg.file.llm.clone()).context("starting HTTP backend")?),
            };
            let mut op = LlmOperator::new(backend, cfg.file.llm.max_retries);
            op.fallback = GaOperator {
                params: cfg.file.ga.clone(),
            };
            let res = moead::run(&scenario, &mut op, params)?;
            (res, op.into_transcripts())
        }
        AlgoId::MoeadGa => {
            let mut op = GaOperator {
                params: cfg.file.ga.clone(),
            };
            (moead::run(&scenario, &mut op, params)?, Vec::new())
        }
        AlgoId::MoeadDe => {
            let mut op = DeOperator {
                params: cfg.file.de.clone(),
            };
            (moead::run(&scenario, &mut op, params)?, Vec::new())
        }
        AlgoId::Random => (moead::run(&scenario, &mut RandomOperator, params)?, Vec::new()),
    };
    Ok((scenario, result, transcripts))
}

/// Runs one experiment and writes its artifacts into a fresh subdirectory of
/// the configured output directory.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunArtifacts> {
    let started = Instant::now();
    let (scenario, result, transcripts) = execute(cfg)?;
    let wall_time_s = started.elapsed().as_secs_f64();
    let hash = scenario_hash(&scenario);

    let norm = run_bounds(&result.trace);
    let final_front = result.archive.objectives();
    let summary = Summary {
        algo: cfg.algo(),
        seed: cfg.params.seed,
        scenario_hash: hash.clone(),
        evaluations: result.evaluations,
        generations: cfg.params.iterations,
        ep_size: result.archive.len(),
        final_hv: normalized_hv(&final_front, &norm),
        normalization: Bounds::from(&norm),
        operator_calls: cfg.params.iterations * cfg.params.population,
        operator_failures: result.operator_failures,
        fallback_rate: (cfg.algo() == AlgoId::Ledma).then(|| {
            if transcripts.is_empty() {
                0.0
            } else {
                transcripts.iter().filter(|t| t.fallback).count() as f64 / transcripts.len() as f64
            }
        }),
        prompt_template_version: (cfg.algo() == AlgoId::Ledma).then(|| PROMPT_TEMPLATE_VERSION.to_string()),
    };

    let out_root = cfg.output_dir();
    fs::create_dir_all(out_root).with_context(|| format!("creating {}", out_root.display()))?;
    let stamp = chrono::Utc::now();
    let base = format!(
        "{}-seed{}-{}",
        cfg.algo(),
        cfg.params.seed,
        stamp.format("%Y%m%dT%H%M%S%.3fZ")
    );
    let tmp = out_root.join(format!(".{base}.partial"));
    if tmp.exists() {
        fs::remove_dir_all(&tmp)?;
    }
    fs::create_dir(&tmp).with_context(|| format!("creating {}", tmp.display()))?;

    let snapshot = ConfigSnapshot {
        config: cfg,
        scenario: &scenario,
        scenario_hash: &hash,
    };
    write_json(&tmp.join(CONFIG_FILE), &snapshot)?;
    write_front(&tmp.join(FRONT_FILE), &result.archive.sorted(), &scenario, &norm)?;
    write_population(&tmp.join(POPULATION_FILE), &result)?;
    write_ep_history(&tmp.join(EP_HISTORY_FILE), &result.trace)?;
    write_hv_log(&tmp.join(HV_LOG_FILE), &result.trace, &norm)?;
    if cfg.algo() == AlgoId::Ledma {
        let mut f = fs::File::create(tmp.join(TRANSCRIPTS_FILE))?;
        for t in &transcripts {
            serde_json::to_writer(&mut f, t)?;
            f.write_all(b"\n")?;
        }
    }
    write_json(&tmp.join(SUMMARY_FILE), &summary)?;
    write_json(
        &tmp.join(TIMING_FILE),
        &Timing {
            wall_time_s,
            finished_at: stamp.to_rfc3339(),
        },
    )?;

    let mut dir = out_root.join(&base);
    let mut n = 1;
    while dir.exists() {
        dir = out_root.join(format!("{base}-{n}"));
        n += 1;
    }
    fs::rename(&tmp, &dir).with_context(|| format!("moving results to {}", dir.display()))?;
    log::info!("run finished: {} (HV {:.4})", dir.display(), summary.final_hv);

    Ok(RunArtifacts {
        dir,
        scenario,
        summary,
        result,
        transcripts,
        wall_time_s,
    })
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn front_header(k: usize) -> Vec<String> {
    let mut h: Vec<String> = ["f1_utility", "f2_log_crb", "f1_tilde", "f2_tilde"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for i in 1..=k {
        for name in ["x", "y", "p_rad", "p_com"] {
            h.push(format!("{name}_{i}"));
        }
    }
    h.push("f1_norm".into());
    h.push("f2_norm".into());
    h
}

/// Writes archive entries with raw, minimization-form and normalized
/// objectives plus the decoded deployment. Penalized points get empty
/// normalized cells.
fn write_front(path: &Path, entries: &[ArchiveEntry], scn: &Scenario, norm: &FrontNormalization) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(front_header(scn.num_uavs))?;
    for e in entries {
        let dep = decode(&e.x, scn)?;
        let mut row = vec![
            (-e.f.f1).to_string(),
            e.f.f2.to_string(),
            e.f.f1.to_string(),
            e.f.f2.to_string(),
        ];
        for k in 0..scn.num_uavs {
            row.push(dep.uav_xy[k][0].to_string());
            row.push(dep.uav_xy[k][1].to_string());
            row.push(dep.p_rad_mw[k].to_string());
            row.push(dep.p_com_mw[k].to_string());
        }
        if is_penalized(&e.f) {
            row.push(String::new());
            row.push(String::new());
        } else {
            let n = norm.apply(&e.f.as_array());
            row.push(n[0].to_string());
            row.push(n[1].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_population(path: &Path, result: &RunResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let dim = result.population.first().map_or(0, |s| s.incumbent_x.len());
    let mut header: Vec<String> = ["subproblem", "w1", "w2", "f1_tilde", "f2_tilde"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..dim).map(|i| format!("g{i}")));
    w.write_record(&header)?;
    for sp in &result.population {
        let mut row = vec![
            sp.index.to_string(),
            sp.weight.w1.to_string(),
            sp.weight.w2.to_string(),
            sp.incumbent_f.f1.to_string(),
            sp.incumbent_f.f2.to_string(),
        ];
        row.extend(sp.incumbent_x.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_ep_history(path: &Path, trace: &[GenerationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["generation", "evaluations", "f1_tilde", "f2_tilde"])?;
    for r in trace {
        for e in &r.archive {
            w.write_record([
                r.generation.to_string(),
                r.evaluations.to_string(),
                e.f.f1.to_string(),
                e.f.f2.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_hv_log(path: &Path, trace: &[GenerationRecord], norm: &FrontNormalization) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["generation", "evaluations", "hv", "ep_size"])?;
    for r in trace {
        let front: Vec<ObjectiveVector> = r.archive.iter().map(|e| e.f).collect();
        w.write_record([
            r.generation.to_string(),
            r.evaluations.to_string(),
            normalized_hv(&front, norm).to_string(),
            r.archive.len().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
