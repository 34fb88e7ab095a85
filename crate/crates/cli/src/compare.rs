//! Cross-run comparison under shared normalization bounds.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ledma_core::metrics::{FrontNormalization, NORMALIZED_REFERENCE};
use ledma_core::model::is_penalized;
use ledma_core::ObjectiveVector;
use serde::Serialize;

use crate::experiment::{
    bounds_with_fallback, normalized_hv, write_json, Bounds, Summary, EP_HISTORY_FILE, FRONT_FILE, SUMMARY_FILE,
};

pub const HV_TABLE_FILE: &str = "hv_table.csv";
pub const MERGED_FRONT_FILE: &str = "merged_front.csv";
pub const HV_CURVES_FILE: &str = "hv_curves.csv";
pub const NORMALIZATION_FILE: &str = "normalization.json";
pub const SCATTER_FILE: &str = "fronts.svg";

/// A finished run read back from disk.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub label: String,
    pub summary: Summary,
    pub front: Vec<ObjectiveVector>,
    /// (generation, evaluations, archive objectives).
    pub history: Vec<(usize, usize, Vec<ObjectiveVector>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HvRow {
    pub rank: usize,
    pub run: String,
    pub algo: String,
    pub seed: u64,
    pub hv: f64,
    pub front_size: usize,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub scenario_hash: String,
    pub normalization: FrontNormalization,
    /// Sorted by HV, best first.
    pub table: Vec<HvRow>,
}

#[derive(Serialize)]
struct NormalizationRecord<'a> {
    scenario_hash: &'a str,
    bounds: Bounds,
    reference: [f64; 2],
    runs: Vec<&'a str>,
}

/// Objective rows, tagged with (generation, evaluations) when those columns exist.
type ObjectiveRows = Vec<(Option<(usize, usize)>, ObjectiveVector)>;

fn read_objective_csv(path: &Path) -> Result<ObjectiveRows> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("{} lacks column {name}", path.display()))
    };
    let (i1, i2) = (col("f1_tilde")?, col("f2_tilde")?);
    let gen_cols = col("generation").ok().zip(col("evaluations").ok());
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = ObjectiveVector::new(rec[i1].parse()?, rec[i2].parse()?);
        let tag = match gen_cols {
            Some((g, e)) => Some((rec[g].parse()?, rec[e].parse()?)),
            None => None,
        };
        out.push((tag, f));
    }
    Ok(out)
}

pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    let summary: Summary = serde_json::from_str(
        &fs::read_to_string(dir.join(SUMMARY_FILE)).with_context(|| format!("reading summary in {}", dir.display()))?,
    )?;
    let front = read_objective_csv(&dir.join(FRONT_FILE))?
        .into_iter()
        .map(|(_, f)| f)
        .collect();
    let mut history: Vec<(usize, usize, Vec<ObjectiveVector>)> = Vec::new();
    for (tag, f) in read_objective_csv(&dir.join(EP_HISTORY_FILE))? {
        let (g, e) = tag.context("ep history row without generation")?;
        match history.last_mut() {
            Some(last) if last.0 == g => last.2.push(f),
            _ => history.push((g, e, vec![f])),
        }
    }
    let label = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    Ok(LoadedRun {
        label,
        summary,
        front,
        history,
    })
}

/// Scores runs on one scenario under bounds taken from the union of their
/// final fronts (penalized points excluded).
pub fn compare_runs(runs: &[LoadedRun]) -> Result<Comparison> {
    if runs.len() < 2 {
        bail!("compare needs at least two runs, got {}", runs.len());
    }
    let hash = &runs[0].summary.scenario_hash;
    if let Some(other) = runs.iter().find(|r| &r.summary.scenario_hash != hash) {
        bail!(
            "run {} was produced on a different scenario ({} vs {})",
            other.label,
            other.summary.scenario_hash,
            hash
        );
    }
    let union: Vec<[f64; 2]> = runs
        .iter()
        .flat_map(|r| r.front.iter())
        .filter(|f| !is_penalized(f))
        .map(|f| f.as_array())
        .collect();
    let norm = bounds_with_fallback(&union);
    let mut table: Vec<HvRow> = runs
        .iter()
        .map(|r| HvRow {
            rank: 0,
            run: r.label.clone(),
            algo: r.summary.algo.to_string(),
            seed: r.summary.seed,
            hv: normalized_hv(&r.front, &norm),
            front_size: r.front.len(),
        })
        .collect();
    table.sort_by(|a, b| b.hv.total_cmp(&a.hv).then_with(|| a.run.cmp(&b.run)));
    for (i, row) in table.iter_mut().enumerate() {
        row.rank = i + 1;
    }
    Ok(Comparison {
        scenario_hash: hash.clone(),
        normalization: norm,
        table,
    })
}

/// Loads runs, compares them and writes the comparison artifacts into `out`.
pub fn compare(run_dirs: &[PathBuf], out: &Path) -> Result<Comparison> {
    let mut runs = run_dirs.iter().map(|d| load_run(d)).collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| a.label.cmp(&b.label));
    let cmp = compare_runs(&runs)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let norm = &cmp.normalization;

    let mut w = csv::Writer::from_path(out.join(HV_TABLE_FILE))?;
    for row in &cmp.table {
        w.serialize(row)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(out.join(MERGED_FRONT_FILE))?;
    w.write_record(["algo", "run", "f1_tilde", "f2_tilde", "f1_norm", "f2_norm"])?;
    for r in &runs {
        for f in &r.front {
            let (n1, n2) = if is_penalized(f) {
                (String::new(), String::new())
            } else {
                let n = norm.apply(&f.as_array());
                (n[0].to_string(), n[1].to_string())
            };
            w.write_record([
                r.summary.algo.to_string(),
                r.label.clone(),
                f.f1.to_string(),
                f.f2.to_string(),
                n1,
                n2,
            ])?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(out.join(HV_CURVES_FILE))?;
    w.write_record(["algo", "run", "generation", "evaluations", "hv"])?;
    for r in &runs {
        for (g, e, front) in &r.history {
            w.write_record([
                r.summary.algo.to_string(),
                r.label.clone(),
                g.to_string(),
                e.to_string(),
                normalized_hv(front, norm).to_string(),
            ])?;
        }
    }
    w.flush()?;

    write_json(
        &out.join(NORMALIZATION_FILE),
        &NormalizationRecord {
            scenario_hash: &cmp.scenario_hash,
            bounds: Bounds::from(norm),
            reference: NORMALIZED_REFERENCE,
            runs: runs.iter().map(|r| r.label.as_str()).collect(),
        },
    )?;
    fs::write(out.join(SCATTER_FILE), scatter_svg(&runs, norm))?;
    Ok(cmp)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Normalized fronts as an SVG scatter, one color per run.
fn scatter_svg(runs: &[LoadedRun], norm: &FrontNormalization) -> String {
    let (w, h, pad) = (480.0, 480.0, 40.0);
    let sx = |v: f64| pad + v.clamp(-0.05, 1.15) / 1.15 * (w - 2.0 * pad);
    let sy = |v: f64| h - pad - v.clamp(-0.05, 1.15) / 1.15 * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="#888"/>"##,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12">f1 (normalized)</text>"#,
        w / 2.0 - 40.0,
        h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="12" y="{}" font-size="12" transform="rotate(-90 12 {})">f2 (normalized)</text>"#,
        h / 2.0 + 40.0,
        h / 2.0 + 40.0
    );
    for (i, r) in runs.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
            pad + 6.0,
            pad + 14.0 + 13.0 * i as f64,
            r.label
        );
        for f in r.front.iter().filter(|f| !is_penalized(f)) {
            let n = norm.apply(&f.as_array());
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(n[0]),
                sy(n[1])
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
