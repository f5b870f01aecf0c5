use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::{IterationTrace, RunRecord};
use crate::{Evaluation, HvCurve};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("encode error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("unknown problem '{0}'")]
    UnknownProblem(String),
    #[error("record at {0} is incomplete")]
    IncompleteRecord(PathBuf),
    #[error("{0}")]
    Invalid(String),
}

/// Run-level metadata document, stored next to the evaluation lines.
#[derive(Debug, Serialize, Deserialize)]
struct RunMeta {
    variant: String,
    problem: String,
    seed: u64,
    budget_steps: u64,
    n_evaluations: usize,
    total_sim_steps: u64,
    total_overhead_steps: u64,
    total_overhead_secs: f64,
    total_overhead_secs_wall: f64,
    total_eval_secs: f64,
    complete: bool,
}

/// One evaluation per line: parameters, crash flag, objectives, steps and
/// cumulative accounting.
#[derive(Debug, Serialize, Deserialize)]
struct EvalLine {
    theta: Vec<f64>,
    l: u8,
    objectives: Option<Vec<f64>>,
    sim_steps: u64,
    wall_time: f64,
    cum_steps: u64,
}

pub fn record_dir(out: &Path, problem: &str, variant: &str, seed: u64) -> PathBuf {
    out.join(problem).join(variant).join(format!("seed_{seed}"))
}

/// Persists a record as line-delimited evaluations plus metadata and
/// columnar curve files.
pub fn save_record(out: &Path, record: &RunRecord) -> Result<PathBuf, HarnessError> {
    let dir = record_dir(out, &record.problem, &record.variant, record.seed);
    fs::create_dir_all(&dir)?;

    let meta = RunMeta {
        variant: record.variant.clone(),
        problem: record.problem.clone(),
        seed: record.seed,
        budget_steps: record.budget_steps,
        n_evaluations: record.evaluations.len(),
        total_sim_steps: record.total_sim_steps,
        total_overhead_steps: record.total_overhead_steps,
        total_overhead_secs: record.total_overhead_secs,
        total_overhead_secs_wall: record.total_overhead_secs_wall,
        total_eval_secs: record.total_eval_secs,
        complete: true,
    };
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;

    let mut w = BufWriter::new(fs::File::create(dir.join("evals.jsonl"))?);
    for (ev, &cum) in record.evaluations.iter().zip(&record.eval_cum_steps) {
        let line = EvalLine {
            theta: ev.theta.values().to_vec(),
            l: ev.crash_ok() as u8,
            objectives: ev.objectives.as_ref().map(|o| o.values().to_vec()),
            sim_steps: ev.sim_steps,
            wall_time: ev.wall_time,
            cum_steps: cum,
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;

    let mut w = BufWriter::new(fs::File::create(dir.join("hv_curve.csv"))?);
    writeln!(w, "steps,hv")?;
    for &(s, hv) in &record.hv_curve.points {
        writeln!(w, "{s},{hv}")?;
    }
    w.flush()?;

    let mut w = BufWriter::new(fs::File::create(dir.join("iterations.jsonl"))?);
    for trace in &record.iterations {
        serde_json::to_writer(&mut w, trace)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(dir)
}

/// Reloads a persisted record. The stored curve and accounting round-trip
/// losslessly; the originating problem is only needed for its bounds.
pub fn load_record(dir: &Path, bounds: &crate::BoxBounds) -> Result<RunRecord, HarnessError> {
    let meta_path = dir.join("meta.json");
    if !meta_path.exists() {
        return Err(HarnessError::IncompleteRecord(dir.to_path_buf()));
    }
    let meta: RunMeta = serde_json::from_str(&fs::read_to_string(&meta_path)?)?;
    if !meta.complete {
        return Err(HarnessError::IncompleteRecord(dir.to_path_buf()));
    }

    let mut evaluations = Vec::with_capacity(meta.n_evaluations);
    let mut eval_cum_steps = Vec::with_capacity(meta.n_evaluations);
    let reader = BufReader::new(fs::File::open(dir.join("evals.jsonl"))?);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: EvalLine = serde_json::from_str(&line)?;
        let theta = crate::ParameterVector::new(parsed.theta, bounds)
            .map_err(|e| HarnessError::Invalid(e.to_string()))?;
        let ev = match parsed.objectives {
            Some(obj) => Evaluation::success(
                theta,
                crate::ObjectiveVector::new(obj)
                    .map_err(|e| HarnessError::Invalid(e.to_string()))?,
                parsed.sim_steps,
                parsed.wall_time,
            ),
            None => Evaluation::crashed(theta, parsed.sim_steps, parsed.wall_time),
        };
        evaluations.push(ev);
        eval_cum_steps.push(parsed.cum_steps);
    }

    let mut points = Vec::new();
    let reader = BufReader::new(fs::File::open(dir.join("hv_curve.csv"))?);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let s: u64 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| HarnessError::Invalid(format!("bad curve line: {line}")))?;
        let hv: f64 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| HarnessError::Invalid(format!("bad curve line: {line}")))?;
        points.push((s, hv));
    }

    let mut iterations: Vec<IterationTrace> = Vec::new();
    let iter_path = dir.join("iterations.jsonl");
    if iter_path.exists() {
        let reader = BufReader::new(fs::File::open(iter_path)?);
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            iterations.push(serde_json::from_str(&line)?);
        }
    }

    Ok(RunRecord {
        variant: meta.variant,
        problem: meta.problem,
        seed: meta.seed,
        budget_steps: meta.budget_steps,
        evaluations,
        eval_cum_steps,
        iterations,
        hv_curve: HvCurve::new(points),
        total_sim_steps: meta.total_sim_steps,
        total_overhead_steps: meta.total_overhead_steps,
        total_overhead_secs: meta.total_overhead_secs,
        total_overhead_secs_wall: meta.total_overhead_secs_wall,
        total_eval_secs: meta.total_eval_secs,
    })
}

/// Loads every complete seed record under `out/problem/variant/`.
pub fn load_all_records(
    out: &Path,
    problem: &str,
    variant: &str,
    bounds: &crate::BoxBounds,
) -> Result<Vec<RunRecord>, HarnessError> {
    let dir = out.join(problem).join(variant);
    let mut records = Vec::new();
    if !dir.exists() {
        return Ok(records);
    }
    let mut entries: Vec<PathBuf> = fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    entries.sort();
    for entry in entries {
        match load_record(&entry, bounds) {
            Ok(rec) => records.push(rec),
            Err(HarnessError::IncompleteRecord(p)) => {
                log::warn!("skipping incomplete record at {}", p.display());
            }
            Err(e) => return Err(e),
        }
    }
    Ok(records)
}

/// Marks a seed directory as failed so reloads skip it.
pub fn mark_failed(out: &Path, problem: &str, variant: &str, seed: u64) {
    let dir = record_dir(out, problem, variant, seed);
    let _ = fs::create_dir_all(&dir);
    let _ = fs::write(
        dir.join("meta.json"),
        serde_json::json!({
            "variant": variant,
            "problem": problem,
            "seed": seed,
            "complete": false,
        })
        .to_string(),
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::run_random;
    use crate::benchmarks::{zdt1_problem, Problem};

    #[test]
    fn record_round_trips_losslessly() {
        let p = zdt1_problem(5);
        let rec = run_random(&p, 3, 30 * 8_400);
        let tmp = std::env::temp_dir().join(format!("motune-test-{}", std::process::id()));
        let dir = save_record(&tmp, &rec).unwrap();
        let loaded = load_record(&dir, p.bounds()).unwrap();
        assert_eq!(rec, loaded);
        std::fs::remove_dir_all(&tmp).unwrap();
    }
}
