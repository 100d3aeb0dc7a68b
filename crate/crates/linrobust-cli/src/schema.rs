//! File schemas: problem JSON, weight vectors, and training traces.
//!
//! Problems serialize as {"n_plus", "n_minus", "labels", "X"}; weight
//! vectors are bare JSON arrays; traces are JSON lines. Readers go through
//! serde; writers emit the pinned 17-significant-digit float format.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use linrobust_core::linalg::{Matrix, Vector};
use linrobust_core::optim::TrainingTrace;
use linrobust_core::problem::SyntheticProblem;

use crate::emit::{atomic_write, g17, json_f64_array};

#[derive(Debug, Deserialize)]
pub struct ProblemFile {
    pub n_plus: usize,
    pub n_minus: usize,
    pub labels: Vec<f64>,
    #[serde(rename = "X")]
    pub x: Vec<Vec<f64>>,
}

/// A problem loaded from disk: the raw matrix plus, when the contents match
/// the synthetic family exactly, the structured form.
pub struct LoadedProblem {
    pub x: Matrix,
    pub y: Vector,
    pub synthetic: Option<SyntheticProblem>,
}

pub fn problem_to_json(prob: &SyntheticProblem) -> String {
    let rows: Vec<String> = (0..prob.n())
        .map(|i| format!("    {}", json_f64_array(prob.x().row(i))))
        .collect();
    format!(
        "{{\n  \"n_plus\": {},\n  \"n_minus\": {},\n  \"labels\": {},\n  \"X\": [\n{}\n  ]\n}}\n",
        prob.n_plus(),
        prob.n_minus(),
        json_f64_array(prob.labels()),
        rows.join(",\n"),
    )
}

pub fn write_problem(path: &Path, prob: &SyntheticProblem) -> Result<()> {
    atomic_write(path, problem_to_json(prob).as_bytes())
}

pub fn load_problem(path: &Path) -> Result<LoadedProblem> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading problem file {}", path.display()))?;
    let file: ProblemFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing problem file {}", path.display()))?;
    if file.labels.is_empty() || file.x.len() != file.labels.len() {
        bail!("problem file {}: need one matrix row per label", path.display());
    }
    if file.labels.iter().any(|&l| l != 1.0 && l != -1.0) {
        bail!("problem file {}: labels must be +1 or -1", path.display());
    }
    let x = Matrix::from_rows(&file.x)
        .with_context(|| format!("problem file {}: ragged matrix", path.display()))?;
    let y = Vector::new(file.labels.clone())?;

    // Structured when the file is exactly a synthetic instance.
    let synthetic = SyntheticProblem::from_labels(&file.labels).ok().filter(|p| {
        p.n_plus() == file.n_plus
            && p.n_minus() == file.n_minus
            && p.x().rows() == x.rows()
            && p.x().cols() == x.cols()
            && (0..x.rows()).all(|i| p.x().row(i) == x.row(i))
    });
    Ok(LoadedProblem { x, y, synthetic })
}

pub fn weights_to_json(w: &Vector) -> String {
    let values: Vec<f64> = (0..w.len()).map(|j| w[j]).collect();
    let mut s = json_f64_array(&values);
    s.push('\n');
    s
}

pub fn write_weights(path: &Path, w: &Vector) -> Result<()> {
    atomic_write(path, weights_to_json(w).as_bytes())
}

pub fn load_weights(path: &Path) -> Result<Vector> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading weights file {}", path.display()))?;
    let values: Vec<f64> = serde_json::from_str(&text)
        .with_context(|| format!("parsing weights file {}", path.display()))?;
    if values.is_empty() {
        bail!("weights file {} is empty", path.display());
    }
    Ok(Vector::new(values)?)
}

/// JSON lines, one record per sampled step; weights included on request.
pub fn trace_to_json_lines(trace: &TrainingTrace, include_weights: bool) -> String {
    let mut out = String::new();
    for s in &trace.samples {
        if include_weights {
            let w: Vec<f64> = (0..s.w.len()).map(|j| s.w[j]).collect();
            out.push_str(&format!(
                "{{\"step\": {}, \"loss\": {}, \"grad_norm\": {}, \"w\": {}}}\n",
                s.step,
                g17(s.loss),
                g17(s.grad_norm),
                json_f64_array(&w),
            ));
        } else {
            out.push_str(&format!(
                "{{\"step\": {}, \"loss\": {}, \"grad_norm\": {}}}\n",
                s.step,
                g17(s.loss),
                g17(s.grad_norm),
            ));
        }
    }
    out
}
