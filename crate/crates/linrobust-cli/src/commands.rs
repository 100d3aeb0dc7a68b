//! Subcommand implementations. Validation failures surface as `UsageError`
//! (exit 2); failed checks and runtime faults exit 1.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linrobust_core::attack::{sweep_curve, uniform_grid, SweepSettings};
use linrobust_core::closed_form::{adaptive_weight, label_coordinate_weight, min_norm_weight};
use linrobust_core::landscape::{demo_spec, landscape_grid};
use linrobust_core::linalg::{Norm, Vector};
use linrobust_core::optim::{
    lambda_max, Optimizer, OptimizerConfig, OptimizerKind, TraceSample, TrainingTrace,
};
use linrobust_core::problem::{canonical_test_input, SyntheticProblem, TestPoint};
use linrobust_core::radii::{margin_radius, radius_report_grid};
use linrobust_core::robust_loss::RobustLossSpec;

use crate::emit::{atomic_write, csv_line, g17};
use crate::manifest::RunManifest;
use crate::schema::{
    load_problem, load_weights, trace_to_json_lines, write_problem, write_weights, LoadedProblem,
};
use crate::verify::run_suite;

/// A bad invocation: wrong flags or invalid input files. Exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

// ------------------------------------------------------------------ gen --

pub struct GenArgs {
    pub n_plus: Option<usize>,
    pub n_minus: Option<usize>,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    let counts_given = args.n_plus.is_some() || args.n_minus.is_some();
    let random_given = args.n.is_some() || args.p.is_some() || args.seed.is_some();
    if counts_given == random_given {
        return Err(usage(
            "pass either --n-plus with --n-minus, or --n with --p and --seed",
        ));
    }
    let (prob, seed) = if counts_given {
        let n_plus = args.n_plus.ok_or_else(|| usage("--n-plus requires --n-minus"))?;
        let n_minus = args.n_minus.ok_or_else(|| usage("--n-minus requires --n-plus"))?;
        if n_plus == 0 || n_minus == 0 {
            return Err(usage("class counts must be at least 1"));
        }
        (SyntheticProblem::generate(n_plus, n_minus).map_err(|e| usage(e.to_string()))?, 0)
    } else {
        let n = args.n.ok_or_else(|| usage("random generation needs --n, --p, and --seed"))?;
        let p = args.p.ok_or_else(|| usage("random generation needs --n, --p, and --seed"))?;
        let seed = args.seed.ok_or_else(|| usage("random generation needs --n, --p, and --seed"))?;
        (SyntheticProblem::generate_random(n, p, seed).map_err(|e| usage(e.to_string()))?, seed)
    };
    write_problem(&args.out, &prob)?;
    let mut manifest = RunManifest::new("gen", seed);
    manifest
        .param("n_plus", prob.n_plus())
        .param("n_minus", prob.n_minus())
        .output(&args.out);
    if let Some(p) = args.p {
        manifest.param("p", g17(p));
        manifest.param("n", prob.n());
    }
    manifest.write_beside(&args.out)?;
    println!(
        "wrote {} ({} samples, {} features)",
        args.out.display(),
        prob.n(),
        prob.dim()
    );
    Ok(())
}

// ---------------------------------------------------------------- radii --

pub fn cmd_radii(grid: usize, out: &Path) -> Result<()> {
    if grid == 0 {
        return Err(usage("--grid must be at least 1"));
    }
    let rows = radius_report_grid(grid)?;
    let mut csv = String::from(
        "n_plus,n_minus,solution,y_test,norm,radius_printed,radius_oracle,matches_oracle,imbalance_warning\n",
    );
    for r in &rows {
        let solution = match r.solution {
            linrobust_core::closed_form::SolutionKind::Adaptive => "ada",
            linrobust_core::closed_form::SolutionKind::MinNorm => "sgd",
        };
        csv.push_str(&csv_line(&[
            r.n_plus.to_string(),
            r.n_minus.to_string(),
            solution.to_string(),
            g17(r.y_test),
            r.norm.label().to_string(),
            g17(r.radius_printed),
            g17(r.radius_oracle),
            r.matches_oracle().to_string(),
            r.imbalance_warning.to_string(),
        ]));
        csv.push('\n');
    }
    atomic_write(out, csv.as_bytes())?;
    let mut manifest = RunManifest::new("radii", 0);
    manifest.param("grid", grid).output(out);
    manifest.write_beside(out)?;
    println!("wrote {} ({} rows)", out.display(), rows.len());
    Ok(())
}

// ------------------------------------------------------------ landscape --

pub struct LandscapeArgs {
    pub problem: Option<PathBuf>,
    pub demo_2d: bool,
    pub eps: f64,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_steps: usize,
    pub out: PathBuf,
}

pub fn cmd_landscape(args: &LandscapeArgs) -> Result<()> {
    if args.demo_2d == args.problem.is_some() {
        return Err(usage("pass exactly one of --problem FILE or --demo-2d"));
    }
    if !(args.eps > 0.0) {
        return Err(usage("--eps must be positive"));
    }
    let spec = if args.demo_2d {
        demo_spec(args.eps)?
    } else {
        let loaded = load_problem(args.problem.as_deref().expect("checked"))
            .map_err(|e| usage(e.to_string()))?;
        if loaded.x.cols() != 2 {
            return Err(usage(format!(
                "surface export is 2-D only; the problem has {} features",
                loaded.x.cols()
            )));
        }
        RobustLossSpec::new(loaded.x, loaded.y, args.eps).map_err(|e| usage(e.to_string()))?
    };
    let rows = landscape_grid(&spec, args.grid_min, args.grid_max, args.grid_steps)
        .map_err(|e| usage(e.to_string()))?;
    let mut csv = String::from("w1,w2,l1_term,eps_term,full_loss,signature_code\n");
    for r in &rows {
        csv.push_str(&csv_line(&[
            g17(r.w1),
            g17(r.w2),
            g17(r.l1_term),
            g17(r.eps_term),
            g17(r.full_loss),
            r.signature_code.to_string(),
        ]));
        csv.push('\n');
    }
    atomic_write(&args.out, csv.as_bytes())?;
    let mut manifest = RunManifest::new("landscape", 0);
    manifest
        .param("eps", g17(args.eps))
        .param("grid_min", g17(args.grid_min))
        .param("grid_max", g17(args.grid_max))
        .param("grid_steps", args.grid_steps)
        .param(
            "source",
            args.problem
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "demo-2d".to_string()),
        )
        .output(&args.out);
    manifest.write_beside(&args.out)?;
    println!("wrote {} ({} grid points)", args.out.display(), rows.len());
    Ok(())
}

// --------------------------------------------------------------- verify --

pub fn cmd_verify(suite: &str, report: &Path) -> Result<()> {
    let result = run_suite(suite).map_err(|e| usage(e.to_string()))?;
    atomic_write(report, result.to_json().as_bytes())?;
    let mut manifest = RunManifest::new("verify", 0);
    manifest.param("suite", suite).output(report);
    manifest.write_beside(report)?;
    for c in &result.checks {
        println!("[{}] criterion {} {}: {}", c.status.label(), c.criterion, c.name, c.detail);
    }
    if result.failed() > 0 {
        Err(anyhow!("{} check(s) failed; see {}", result.failed(), report.display()))
    } else {
        println!("all checks passed ({} documented discrepancies)", result
            .checks
            .iter()
            .filter(|c| c.status == crate::verify::Status::DocumentedDiscrepancy)
            .count());
        Ok(())
    }
}

// ---------------------------------------------------------- bound-curve --

pub fn cmd_bound_curve(c_min: f64, c_max: f64, steps: usize, out: &Path) -> Result<()> {
    if !(c_min > 0.0) {
        return Err(usage("--c-min must be positive"));
    }
    if !(c_max > c_min) || steps < 2 {
        return Err(usage("need --c-max > --c-min and --steps at least 2"));
    }
    let mut csv = String::from("c,bound\n");
    for k in 0..steps {
        let c = c_min + (c_max - c_min) * k as f64 / (steps - 1) as f64;
        let bound = (2.0 * c / (1.0 + c)).min(2.0 / (1.0 + c));
        csv.push_str(&csv_line(&[g17(c), g17(bound)]));
        csv.push('\n');
    }
    atomic_write(out, csv.as_bytes())?;
    let mut manifest = RunManifest::new("bound-curve", 0);
    manifest
        .param("c_min", g17(c_min))
        .param("c_max", g17(c_max))
        .param("steps", steps)
        .output(out);
    manifest.write_beside(out)?;
    println!("wrote {} ({} rows)", out.display(), steps);
    Ok(())
}

// ---------------------------------------------------------------- train --

pub struct TrainArgs {
    pub problem: PathBuf,
    pub optimizer: String,
    pub eps: Option<f64>,
    pub adversarial: bool,
    pub pgd_inner: bool,
    pub steps: usize,
    pub tol: f64,
    pub learning_rate: Option<f64>,
    pub seed: u64,
    pub init_seed: Option<u64>,
    pub trace: Option<PathBuf>,
    pub trace_weights: bool,
    pub out: PathBuf,
}

fn parse_kind(s: &str) -> Result<OptimizerKind> {
    s.parse::<OptimizerKind>().map_err(|_| {
        usage(format!(
            "unknown optimizer '{s}' (expected one of {})",
            OptimizerKind::ALL.map(|k| k.as_str()).join(", ")
        ))
    })
}

fn initial_point(dim: usize, init_seed: Option<u64>) -> Vector {
    match init_seed {
        None => Vector::zeros(dim),
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Vector::from_fn(dim, |_| rng.random_range(-1.0..1.0))
        }
    }
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let kind = parse_kind(&args.optimizer)?;
    if args.pgd_inner && !args.adversarial {
        return Err(usage("--pgd-inner only applies to --adversarial training"));
    }
    if args.eps.is_some() != args.adversarial {
        return Err(usage("--eps goes with --adversarial (and is required by it)"));
    }
    let loaded = load_problem(&args.problem).map_err(|e| usage(e.to_string()))?;
    let mut cfg = if args.adversarial {
        OptimizerConfig::adversarial_default(kind)
    } else {
        OptimizerConfig::natural_default(kind)
    };
    cfg.seed = args.seed;
    if let Some(lr) = args.learning_rate {
        if !(lr > 0.0) {
            return Err(usage("--learning-rate must be positive"));
        }
        cfg.learning_rate = Some(lr);
    }
    let init = initial_point(loaded.x.cols(), args.init_seed);

    let trace = if args.adversarial {
        let eps = args.eps.expect("checked above");
        if !(eps > 0.0) {
            return Err(usage("--eps must be positive"));
        }
        let spec = RobustLossSpec::new(loaded.x.clone(), loaded.y.clone(), eps)
            .map_err(|e| usage(e.to_string()))?;
        if args.pgd_inner {
            pgd_inner_train(&spec, &cfg, &init, args.steps, args.tol)?
        } else {
            linrobust_core::optim::train_adversarial(&spec, &cfg, &init, args.steps, args.tol)?
        }
    } else {
        let synthetic = loaded.synthetic.as_ref().ok_or_else(|| {
            usage("natural training expects a problem file from `gen` (synthetic family)")
        })?;
        linrobust_core::optim::train_natural(synthetic, &cfg, &init, args.steps, args.tol)?
    };

    write_weights(&args.out, &trace.final_w)?;
    let mut manifest = RunManifest::new("train", args.seed);
    manifest
        .param("problem", args.problem.display().to_string())
        .param("optimizer", kind.as_str())
        .param("adversarial", args.adversarial)
        .param("pgd_inner", args.pgd_inner)
        .param("steps", args.steps)
        .param("tol", g17(args.tol))
        .param("converged", trace.converged)
        .param("steps_taken", trace.steps_taken)
        .output(&args.out);
    if let Some(eps) = args.eps {
        manifest.param("eps", g17(eps));
    }
    if let Some(init_seed) = args.init_seed {
        manifest.param("init_seed", init_seed);
    }
    if let Some(trace_path) = &args.trace {
        atomic_write(trace_path, trace_to_json_lines(&trace, args.trace_weights).as_bytes())?;
        manifest.output(trace_path);
    }
    manifest.write_beside(&args.out)?;
    println!(
        "wrote {} (converged: {}, steps: {})",
        args.out.display(),
        trace.converged,
        trace.steps_taken
    );
    Ok(())
}

/// Adversarial training with a sampled inner maximization instead of the
/// closed-form worst case: per sample, a few ascent steps on the squared
/// error inside the L2 ball find the perturbation, and the outer step
/// follows the gradient at that perturbed point.
fn pgd_inner_train(
    spec: &RobustLossSpec,
    cfg: &OptimizerConfig,
    init: &Vector,
    steps: usize,
    tol: f64,
) -> Result<TrainingTrace> {
    const INNER_STEPS: usize = 20;
    let x = spec.x();
    let y = spec.y();
    let n = spec.n();
    let dim = spec.dim();
    let base_rate = cfg.learning_rate.unwrap_or_else(|| {
        if cfg.kind.is_adaptive() {
            1e-2
        } else {
            0.1 / lambda_max(x)
        }
    });
    let mut optimizer = Optimizer::new(cfg.clone(), dim, base_rate)?;
    let mut w = init.clone();
    let stride = (steps / 512).max(1);
    let mut samples = Vec::new();
    let mut converged = false;
    let mut taken = 0usize;
    let loss0 = spec.loss(&w)?;
    let ceiling = 1e6 * loss0.max(1.0);
    let mut window: Vec<Vector> = Vec::new();
    for step in 0..steps {
        // Inner maximization of (the per-sample squared error) over the ball.
        let mut grad = Vector::zeros(dim);
        let wn = w.norm(Norm::L2).max(1e-300);
        let inner_rate = spec.epsilon() / (INNER_STEPS as f64 / 4.0);
        for i in 0..n {
            let xi = x.row_vector(i);
            let mut delta = Vector::zeros(dim);
            for _ in 0..INNER_STEPS {
                let r = xi.dot(&w) + delta.dot(&w) - y[i];
                // Ascent direction of 1/2 r^2 in the input is r * w.
                delta.add_scaled(inner_rate * r.signum() / wn, &w);
                let dn = delta.norm(Norm::L2);
                if dn > spec.epsilon() {
                    delta.scale(spec.epsilon() / dn);
                }
            }
            let r = xi.dot(&w) + delta.dot(&w) - y[i];
            let mut attacked = xi.clone();
            attacked.add_scaled(1.0, &delta);
            grad.add_scaled(r, &attacked);
        }
        let grad_norm = grad.norm(Norm::L2);
        if step % stride == 0 {
            let loss = spec.loss(&w)?;
            if !loss.is_finite() || loss > ceiling {
                return Err(anyhow!("training diverged at step {step} (loss {loss})"));
            }
            samples.push(TraceSample { step, w: w.clone(), loss, grad_norm });
        }
        optimizer.step(&mut w, &grad);
        taken = step + 1;
        window.push(w.clone());
        if window.len() > 100 {
            window.remove(0);
            let moved = window.last().unwrap().sub(&window[0]).norm(Norm::L2);
            if moved <= tol {
                converged = true;
                break;
            }
        }
    }
    let final_loss = spec.loss(&w)?;
    let final_grad = samples.last().map(|s| s.grad_norm).unwrap_or(0.0);
    samples.push(TraceSample { step: taken, w: w.clone(), loss: final_loss, grad_norm: final_grad });
    Ok(TrainingTrace { samples, converged, final_w: w, steps_taken: taken })
}

// ------------------------------------------------------------- evaluate --

pub struct EvaluateArgs {
    pub problem: PathBuf,
    pub weights: Option<PathBuf>,
    pub solution: Option<String>,
    pub norm: String,
    pub eps_max: Option<f64>,
    pub grid: usize,
    pub attack_steps: usize,
    pub restarts: usize,
    pub seed: u64,
    pub step_factors: String,
    pub out: PathBuf,
}

fn canonical_testset(prob: &SyntheticProblem) -> Result<Vec<TestPoint>> {
    Ok(vec![
        TestPoint { x: canonical_test_input(prob.n(), 1.0)?, y: 1.0 },
        TestPoint { x: canonical_test_input(prob.n(), -1.0)?, y: -1.0 },
    ])
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let norm = match args.norm.as_str() {
        "l2" => Norm::L2,
        "linf" => Norm::Linf,
        other => return Err(usage(format!("unknown norm '{other}' (expected l2 or linf)"))),
    };
    let loaded: LoadedProblem = load_problem(&args.problem).map_err(|e| usage(e.to_string()))?;
    let synthetic = loaded.synthetic.as_ref().ok_or_else(|| {
        usage("evaluation expects a problem file from `gen` (the test pair is defined by the family)")
    })?;
    let w = match (&args.weights, &args.solution) {
        (Some(path), None) => load_weights(path).map_err(|e| usage(e.to_string()))?,
        (None, Some(kind)) => match kind.as_str() {
            "sgd" => min_norm_weight(synthetic.labels())?,
            "ada" => adaptive_weight(synthetic.labels(), 0.25)?,
            "ideal" => label_coordinate_weight(synthetic.dim())?,
            other => {
                return Err(usage(format!(
                    "unknown solution '{other}' (expected sgd, ada, or ideal)"
                )))
            }
        },
        _ => return Err(usage("pass exactly one of --weights FILE or --solution KIND")),
    };
    if w.len() != synthetic.dim() {
        return Err(usage(format!(
            "weights have {} entries but the problem has {} features",
            w.len(),
            synthetic.dim()
        )));
    }
    if args.grid < 2 {
        return Err(usage("--grid needs at least 2 points"));
    }
    let testset = canonical_testset(synthetic)?;
    let eps_max = match args.eps_max {
        Some(e) if e > 0.0 => e,
        Some(_) => return Err(usage("--eps-max must be positive")),
        None => {
            let mut r_max = 0.0_f64;
            for p in &testset {
                if p.y * w.dot(&p.x) > 0.0 {
                    r_max = r_max.max(margin_radius(&w, &p.x, norm)?);
                }
            }
            if r_max == 0.0 {
                return Err(usage(
                    "no correctly classified test point to size the budget; pass --eps-max",
                ));
            }
            2.0 * r_max
        }
    };
    let step_factors: Vec<f64> = args
        .step_factors
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage("--step-factors must be a comma-separated list of numbers"))?;
    if step_factors.is_empty() || step_factors.iter().any(|&f| !(f > 0.0)) {
        return Err(usage("--step-factors must be positive numbers"));
    }
    let settings = SweepSettings {
        steps: args.attack_steps,
        restarts: args.restarts,
        seed: args.seed,
        step_factors,
    };
    let grid = uniform_grid(eps_max, args.grid)?;
    let curve = sweep_curve(&w, &testset, norm, &grid, &settings)?;

    let mut csv = String::from("epsilon,acc_pgd,acc_exact,norm\n");
    for (k, &eps) in curve.eps_grid.iter().enumerate() {
        csv.push_str(&csv_line(&[
            g17(eps),
            g17(curve.accuracy[k]),
            g17(curve.accuracy_exact[k]),
            norm.label().to_string(),
        ]));
        csv.push('\n');
    }
    atomic_write(&args.out, csv.as_bytes())?;
    let summary = format!(
        "{{\"nauc_pgd\": {}, \"nauc_exact\": {}}}\n",
        g17(curve.nauc),
        g17(curve.nauc_exact)
    );
    let mut summary_name = args.out.as_os_str().to_owned();
    summary_name.push(".summary.json");
    let summary_path = PathBuf::from(summary_name);
    atomic_write(&summary_path, summary.as_bytes())?;

    let mut manifest = RunManifest::new("evaluate", args.seed);
    manifest
        .param("problem", args.problem.display().to_string())
        .param("norm", norm.label())
        .param("eps_max", g17(eps_max))
        .param("grid", args.grid)
        .param("attack_steps", args.attack_steps)
        .param("restarts", args.restarts)
        .param("step_factors", &args.step_factors)
        .output(&args.out)
        .output(&summary_path);
    if let Some(weights) = &args.weights {
        manifest.param("weights", weights.display().to_string());
    }
    if let Some(solution) = &args.solution {
        manifest.param("solution", solution);
    }
    manifest.write_beside(&args.out)?;
    println!(
        "wrote {} (nauc_pgd {}, nauc_exact {})",
        args.out.display(),
        g17(curve.nauc),
        g17(curve.nauc_exact)
    );
    Ok(())
}
