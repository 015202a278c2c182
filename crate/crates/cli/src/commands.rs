use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use lagonn::baselines::{sasat_run_traced, walksat_run, SasatTraceRow};
use lagonn::bench::{
    fit_exp_scaling, median, run_campaign, BoxStats, CampaignResult, ScalingFit, ScalingModel, SizeSummary,
    SolverSpec, TmaxSchedule, TtsEstimate,
};
use lagonn::cnf::{load_dimacs, random_satisfiable_3sat, write_dimacs};
use lagonn::copy_demo::{run_copy_demo, CopyMode};
use lagonn::integrator::{run_trial_from, StepRecord};
use lagonn::rng::{derive_seed, initial_state};
use lagonn::{evaluate_assignment, Instance, Mode, Real, SystemConfig, TrialOptions, TrialResult};

use crate::args::*;
use crate::output::{fmt_f64, input_err, internal_err, CliResult, Outputs};

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    NoSolution,
}

pub struct Ctx<'a> {
    pub out: &'a Path,
    pub argv: &'a [String],
}

pub fn load_instance(path: &Path) -> CliResult<Instance> {
    load_dimacs(path).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

/// Files as given, directories expanded to their `*.cnf` entries in name order.
pub fn load_inputs(inputs: &[PathBuf]) -> CliResult<Vec<Instance>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| input_err(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "cnf"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(input_err("no CNF files found"));
    }
    files.iter().map(|f| load_instance(f)).collect()
}

#[derive(Serialize)]
struct TrialRow<'a> {
    instance: &'a str,
    trial: usize,
    seed: u64,
    solved: bool,
    verified: bool,
    stop: String,
    stop_time: f64,
    first_solution: Option<f64>,
    final_cost: f64,
    min_cost: f64,
    unsat: usize,
    steps: u64,
    rejected_steps: u64,
}

fn trial_row<'a>(inst: &'a Instance, trial: usize, seed: u64, r: &TrialResult) -> CliResult<TrialRow<'a>> {
    let unsat = evaluate_assignment(inst, &r.assignment).map_err(internal_err)?;
    Ok(TrialRow {
        instance: inst.name(),
        trial,
        seed,
        solved: r.solved,
        verified: unsat == 0,
        stop: serde_json::to_value(r.stop)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default(),
        stop_time: r.stop_time,
        first_solution: r.first_solution,
        final_cost: r.final_cost,
        min_cost: r.min_cost,
        unsat: r.unsat,
        steps: r.steps,
        rejected_steps: r.rejected_steps,
    })
}

fn print_trials(rows: &[TrialRow<'_>]) {
    for r in rows {
        println!(
            "trial {:>3}  solved={}  stop={}  stop_time={}  final_cost={}",
            r.trial, r.solved, r.stop, r.stop_time, r.final_cost
        );
    }
}

#[derive(Serialize)]
struct TrialsSummary {
    instance: String,
    trials: usize,
    solved: usize,
    median_first_solution: Option<f64>,
}

fn summarize(inst: &Instance, results: &[TrialResult]) -> TrialsSummary {
    let firsts: Vec<f64> = results.iter().filter_map(|r| r.first_solution).collect();
    TrialsSummary {
        instance: inst.name().to_string(),
        trials: results.len(),
        solved: results.iter().filter(|r| r.solved).count(),
        median_first_solution: median(&firsts),
    }
}

fn status_of(results: &[TrialResult]) -> Status {
    if results.iter().any(|r| r.solved) {
        Status::Ok
    } else {
        Status::NoSolution
    }
}

type TraceRows = Vec<Vec<String>>;

fn solve_one<T: Real>(
    inst: &Instance,
    config: &SystemConfig<T>,
    opts: &TrialOptions<T>,
    trial: usize,
    seed: u64,
    trace: bool,
    phases: bool,
) -> CliResult<(TrialResult, TraceRows)> {
    let init = initial_state::<T>(inst, seed);
    let mut rows = Vec::new();
    let mut observe = |rec: &StepRecord<'_, T>| {
        let mut row = vec![
            trial.to_string(),
            rec.step.to_string(),
            fmt_f64(rec.t.to_f64_lossy()),
            fmt_f64(rec.dt.to_f64_lossy()),
            fmt_f64(rec.kappa.to_f64_lossy()),
            fmt_f64(rec.lagrange.to_f64_lossy()),
        ];
        if phases {
            row.extend(rec.phases.iter().map(|p| fmt_f64(p.to_f64_lossy())));
        }
        rows.push(row);
    };
    let observer: Option<&mut dyn FnMut(&StepRecord<'_, T>)> = if trace { Some(&mut observe) } else { None };
    let r = run_trial_from(inst, config, opts, &init, observer).map_err(input_err)?;
    Ok((r, rows))
}

fn solve_trials<T: Real>(
    inst: &Instance,
    a: &SolveArgs,
) -> CliResult<Vec<(TrialResult, TraceRows)>> {
    let config: SystemConfig<T> = a.osc.config().cast();
    config.validate().map_err(input_err)?;
    let opts: TrialOptions<T> = a.osc.options(a.tmax).cast();
    let trace = a.trace.is_some();
    (0..a.trials)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(a.seed, inst.name(), i as u64);
            solve_one(inst, &config, &opts, i, seed, trace, a.trace_phases)
        })
        .collect()
}

pub fn solve(ctx: &Ctx, a: &SolveArgs) -> CliResult<Status> {
    let inst = load_instance(&a.cnf)?;
    let runs = match a.precision {
        Precision::F64 => solve_trials::<f64>(&inst, a)?,
        Precision::F32 => solve_trials::<f32>(&inst, a)?,
    };
    let results: Vec<TrialResult> = runs.iter().map(|(r, _)| r.clone()).collect();
    let rows = results
        .iter()
        .enumerate()
        .map(|(i, r)| trial_row(&inst, i, derive_seed(a.seed, inst.name(), i as u64), r))
        .collect::<CliResult<Vec<_>>>()?;
    print_trials(&rows);

    let mut out = Outputs::new(ctx.out, "solve")?;
    out.csv("solve.csv", &rows)?;
    if let Some(path) = &a.trace {
        let mut header: Vec<String> = ["trial", "step", "t", "dt", "kappa", "lagrange"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        if a.trace_phases {
            header.extend((0..inst.num_vars()).map(|i| format!("phi_x_{i}")));
            header.extend((0..inst.num_clauses()).map(|m| format!("phi_lambda_{m}")));
        }
        let all: Vec<Vec<String>> = runs.into_iter().flat_map(|(_, t)| t).collect();
        out.csv_records(out.resolve(path), &header, &all)?;
    }
    out.json("solve_summary.json", &summarize(&inst, &results))?;
    out.finish(ctx.argv, Some(a.seed), a)?;
    Ok(status_of(&results))
}

fn oscillator_spec(osc: &OscArgs, mode: Mode) -> CliResult<SolverSpec> {
    let config = osc.config();
    config.validate().map_err(input_err)?;
    let options = TrialOptions {
        mode,
        ..osc.options(1.0)
    };
    Ok(match mode {
        Mode::Lagonn => SolverSpec::Lagonn { config, options },
        Mode::OnnOnly => SolverSpec::OnnOnly { config, options },
    })
}

fn schedule(ladder: &LadderArgs, default_t0: f64) -> TmaxSchedule {
    TmaxSchedule::new(ladder.tmax0.unwrap_or(default_t0), ladder.rungs)
}

/// Default first budget: 10 cycles for oscillators, 100 flips otherwise.
fn default_t0(solver: SolverArg) -> f64 {
    match solver {
        SolverArg::Lagonn | SolverArg::Onn => 10.0,
        SolverArg::Sasat | SolverArg::Walksat => 100.0,
    }
}

#[derive(Serialize)]
struct CampaignSummary<'a> {
    solver: &'a str,
    instances: usize,
    median_tts: Option<f64>,
    by_size: &'a [SizeSummary],
    fit_exp_linear: Option<ScalingFit>,
    fit_exp_sqrt: Option<ScalingFit>,
}

#[derive(Serialize)]
struct CampaignTrialRow<'a> {
    instance: &'a str,
    trial: usize,
    solved: bool,
    first_solution: Option<f64>,
    stop_time: Option<f64>,
    final_cost: Option<f64>,
    error: Option<&'a str>,
}

fn write_estimates(out: &mut Outputs, name: &str, result: &CampaignResult) -> CliResult<()> {
    let header: Vec<String> = [
        "instance", "solver", "num_vars", "num_clauses", "t_max", "trials", "successes", "p_s", "tts", "errors",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<String>> = result.estimates().map(estimate_record).collect();
    out.csv_records(out.dir().join(name), &header, &rows)?;
    Ok(())
}

fn estimate_record(e: &TtsEstimate) -> Vec<String> {
    vec![
        e.instance_name.clone(),
        e.solver.clone(),
        e.num_vars.to_string(),
        e.num_clauses.to_string(),
        fmt_f64(e.t_max),
        e.trials.to_string(),
        e.successes.to_string(),
        fmt_f64(e.p_s),
        fmt_f64(e.tts),
        e.errors.to_string(),
    ]
}

pub fn bench(ctx: &Ctx, a: &BenchArgs) -> CliResult<Status> {
    let instances = load_inputs(&a.inputs)?;
    let spec = match a.solver {
        SolverArg::Lagonn => oscillator_spec(&a.osc, Mode::Lagonn)?,
        SolverArg::Onn => oscillator_spec(&a.osc, Mode::OnnOnly)?,
        SolverArg::Sasat => {
            let cfg = a.sasat.config(None);
            cfg.validate().map_err(input_err)?;
            SolverSpec::Sasat(cfg)
        }
        SolverArg::Walksat => SolverSpec::Walksat(a.walk.config(1)),
    };
    let sched = schedule(&a.ladder, default_t0(a.solver));
    let result = run_campaign(&instances, &spec, a.ladder.trials, &sched, a.ladder.seed).map_err(input_err)?;

    let mut out = Outputs::new(ctx.out, "bench")?;
    write_estimates(&mut out, "bench.csv", &result)?;
    let trial_rows: Vec<CampaignTrialRow> = result
        .instances
        .iter()
        .flat_map(|o| {
            o.trials.iter().enumerate().map(move |(i, t)| match t {
                Ok(r) => CampaignTrialRow {
                    instance: &o.estimate.instance_name,
                    trial: i,
                    solved: r.solved,
                    first_solution: r.first_solution,
                    stop_time: Some(r.stop_time),
                    final_cost: Some(r.final_cost),
                    error: None,
                },
                Err(e) => CampaignTrialRow {
                    instance: &o.estimate.instance_name,
                    trial: i,
                    solved: false,
                    first_solution: None,
                    stop_time: None,
                    final_cost: None,
                    error: Some(e),
                },
            })
        })
        .collect();
    out.csv("bench_trials.csv", &trial_rows)?;

    let points = result.scaling_points();
    let summary = CampaignSummary {
        solver: &result.solver,
        instances: result.instances.len(),
        median_tts: result.median_tts(),
        by_size: &result.by_size,
        fit_exp_linear: fit_exp_scaling(&points, ScalingModel::ExpLinear).ok(),
        fit_exp_sqrt: fit_exp_scaling(&points, ScalingModel::ExpSqrt).ok(),
    };
    for s in &result.by_size {
        println!(
            "N={:<4} instances={:<3} median_tts={} q1={} q3={}",
            s.num_vars, s.instances, s.tts.median, s.tts.q1, s.tts.q3
        );
    }
    out.json("bench_summary.json", &summary)?;
    out.finish(ctx.argv, Some(a.ladder.seed), a)?;
    Ok(Status::Ok)
}

pub fn anneal(ctx: &Ctx, a: &AnnealArgs) -> CliResult<Status> {
    let inst = load_instance(&a.cnf)?;
    let cfg = a.sasat.config(a.max_steps);
    cfg.validate().map_err(input_err)?;
    let tracing = a.trace.is_some();
    let runs: Vec<(TrialResult, Vec<SasatTraceRow>)> = (0..a.trials)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(a.seed, inst.name(), i as u64);
            let mut rows = Vec::new();
            let mut push = |r: SasatTraceRow| rows.push(r);
            let trace: Option<&mut dyn FnMut(SasatTraceRow)> = if tracing { Some(&mut push) } else { None };
            let r = sasat_run_traced(&inst, &cfg, seed, trace).map_err(input_err)?;
            Ok((r, rows))
        })
        .collect::<CliResult<_>>()?;
    let results: Vec<TrialResult> = runs.iter().map(|(r, _)| r.clone()).collect();
    let rows = results
        .iter()
        .enumerate()
        .map(|(i, r)| trial_row(&inst, i, derive_seed(a.seed, inst.name(), i as u64), r))
        .collect::<CliResult<Vec<_>>>()?;
    print_trials(&rows);

    let mut out = Outputs::new(ctx.out, "anneal")?;
    out.csv("anneal.csv", &rows)?;
    if let Some(path) = &a.trace {
        let header: Vec<String> = ["trial", "step", "cost", "temperature"].iter().map(|s| s.to_string()).collect();
        let all: Vec<Vec<String>> = runs
            .iter()
            .enumerate()
            .flat_map(|(i, (_, t))| {
                t.iter().map(move |r| {
                    vec![i.to_string(), r.step.to_string(), r.cost.to_string(), fmt_f64(r.temperature)]
                })
            })
            .collect();
        out.csv_records(out.resolve(path), &header, &all)?;
    }
    out.json("anneal_summary.json", &summarize(&inst, &results))?;
    out.finish(ctx.argv, Some(a.seed), a)?;
    Ok(status_of(&results))
}

pub fn walksat(ctx: &Ctx, a: &WalksatArgs) -> CliResult<Status> {
    let inst = load_instance(&a.cnf)?;
    let cfg = a.walk.config(a.max_flips);
    let results: Vec<TrialResult> = (0..a.trials)
        .into_par_iter()
        .map(|i| walksat_run(&inst, &cfg, derive_seed(a.seed, inst.name(), i as u64)).map_err(input_err))
        .collect::<CliResult<_>>()?;
    let rows = results
        .iter()
        .enumerate()
        .map(|(i, r)| trial_row(&inst, i, derive_seed(a.seed, inst.name(), i as u64), r))
        .collect::<CliResult<Vec<_>>>()?;
    print_trials(&rows);
    let mut out = Outputs::new(ctx.out, "walksat")?;
    out.csv("walksat.csv", &rows)?;
    out.json("walksat_summary.json", &summarize(&inst, &results))?;
    out.finish(ctx.argv, Some(a.seed), a)?;
    Ok(status_of(&results))
}

#[derive(Serialize)]
struct SweepPoint {
    value: Option<f64>,
    median_tts: f64,
    tts: BoxStats,
}

fn sweep_rows(label: &str, value: Option<f64>, result: &CampaignResult, rows: &mut Vec<Vec<String>>) {
    for e in result.estimates() {
        let mut r = vec![value.map(fmt_f64).unwrap_or_else(|| label.to_string())];
        r.extend(estimate_record(e));
        rows.push(r);
    }
}

fn sweep_point(value: Option<f64>, result: &CampaignResult) -> SweepPoint {
    let tts: Vec<f64> = result.estimates().map(|e| e.tts).collect();
    let stats = BoxStats::from_values(&tts).expect("campaign has instances");
    SweepPoint {
        value,
        median_tts: stats.median,
        tts: stats,
    }
}

fn sweep_header(first: &str) -> Vec<String> {
    [
        first, "instance", "solver", "num_vars", "num_clauses", "t_max", "trials", "successes", "p_s", "tts", "errors",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

pub fn sweep_tau(ctx: &Ctx, a: &SweepTauArgs) -> CliResult<Status> {
    let instances = load_inputs(&a.inputs)?;
    let sched = schedule(&a.ladder, 10.0);
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &tau_lambda in &a.grid {
        let osc = OscArgs {
            tau_lambda,
            ..a.osc.clone()
        };
        let spec = oscillator_spec(&osc, a.osc.mode.into())?;
        let result = run_campaign(&instances, &spec, a.ladder.trials, &sched, a.ladder.seed).map_err(input_err)?;
        sweep_rows("", Some(tau_lambda), &result, &mut rows);
        let p = sweep_point(Some(tau_lambda), &result);
        println!("tau_lambda={tau_lambda:<6} median_tts={}", p.median_tts);
        points.push(p);
    }
    let mut out = Outputs::new(ctx.out, "sweep_tau")?;
    out.csv_records(out.dir().join("sweep_tau.csv"), &sweep_header("tau_lambda"), &rows)?;
    out.json("sweep_tau_summary.json", &points)?;
    out.finish(ctx.argv, Some(a.ladder.seed), a)?;
    Ok(Status::Ok)
}

pub fn discretize(ctx: &Ctx, a: &DiscretizeArgs) -> CliResult<Status> {
    let instances = load_inputs(&a.inputs)?;
    let sched = schedule(&a.ladder, 10.0);
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let levels = std::iter::once(None).chain(a.grid.iter().map(|&n| Some(n)));
    for n_states in levels {
        let osc = OscArgs {
            nstates: n_states,
            ..a.osc.clone()
        };
        let spec = oscillator_spec(&osc, a.osc.mode.into())?;
        let result = run_campaign(&instances, &spec, a.ladder.trials, &sched, a.ladder.seed).map_err(input_err)?;
        let value = n_states.map(|n| n as f64);
        sweep_rows("continuous", value, &result, &mut rows);
        let p = sweep_point(value, &result);
        match n_states {
            Some(n) => println!("n_states={n:<6} median_tts={}", p.median_tts),
            None => println!("continuous      median_tts={}", p.median_tts),
        }
        points.push(p);
    }
    let mut out = Outputs::new(ctx.out, "discretize")?;
    out.csv_records(out.dir().join("discretize.csv"), &sweep_header("n_states"), &rows)?;
    out.json("discretize_summary.json", &points)?;
    out.finish(ctx.argv, Some(a.ladder.seed), a)?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct CopySummary {
    mode: CopyModeArg,
    strength: f64,
    final_residuals: Vec<f64>,
    final_phases: Vec<f64>,
    final_lambda: Vec<f64>,
}

pub fn copy_demo(ctx: &Ctx, a: &CopyDemoArgs) -> CliResult<Status> {
    let mode = match a.mode {
        CopyModeArg::Penalty => CopyMode::Penalty { j_c: a.strength },
        CopyModeArg::Lagrange => CopyMode::Lagrange { strength: a.strength },
    };
    let trace = run_copy_demo::<f64>(mode, a.seed, a.tmax, a.dt).map_err(input_err)?;
    let nodes = trace.final_phases.len();
    let pairs = trace.final_residuals().len();
    let mut header = vec!["t".to_string()];
    header.extend((0..nodes).map(|i| format!("cos_phi_{i}")));
    header.extend((0..pairs).map(|k| format!("res_{k}")));
    let rows: Vec<Vec<String>> = trace
        .rows
        .iter()
        .map(|r| {
            std::iter::once(fmt_f64(r.t))
                .chain(r.cos_phi.iter().map(|&c| fmt_f64(c)))
                .chain(r.residuals.iter().map(|&c| fmt_f64(c)))
                .collect()
        })
        .collect();
    let res = trace.final_residuals().to_vec();
    println!("final residuals: {res:?}");
    let mut out = Outputs::new(ctx.out, "copy_demo")?;
    out.csv_records(out.dir().join("copy_demo.csv"), &header, &rows)?;
    out.json(
        "copy_demo_summary.json",
        &CopySummary {
            mode: a.mode,
            strength: a.strength,
            final_residuals: res,
            final_phases: trace.final_phases.clone(),
            final_lambda: trace.final_lambda.clone(),
        },
    )?;
    out.finish(ctx.argv, Some(a.seed), a)?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct GeneratedRow {
    file: String,
    num_vars: usize,
    num_clauses: usize,
    seed: u64,
    rejected_draws: usize,
}

pub fn generate(ctx: &Ctx, a: &GenerateArgs) -> CliResult<Status> {
    if a.vars < 3 {
        return Err(input_err("need at least 3 variables"));
    }
    let mut out = Outputs::new(ctx.out, "generate")?;
    let dir = a.dir.clone().unwrap_or_else(|| ctx.out.to_path_buf());
    fs::create_dir_all(&dir).map_err(|e| input_err(format!("{}: {e}", dir.display())))?;
    let made: Vec<(String, Instance, u64, usize)> = (a.start..a.start + a.count)
        .into_par_iter()
        .map(|idx| {
            let name = format!("{}{idx:02}", a.prefix);
            let seed = derive_seed(a.seed, &name, idx as u64);
            let (inst, rejected) = random_satisfiable_3sat(a.vars, a.clauses, seed);
            (name.clone(), inst.with_name(name), seed, rejected)
        })
        .collect();
    let mut rows = Vec::new();
    for (name, inst, seed, rejected) in made {
        let path = dir.join(format!("{name}.cnf"));
        fs::write(&path, write_dimacs(&inst)).map_err(internal_err)?;
        println!("{}", path.display());
        out.record(path.clone());
        rows.push(GeneratedRow {
            file: path.display().to_string(),
            num_vars: a.vars,
            num_clauses: a.clauses,
            seed,
            rejected_draws: rejected,
        });
    }
    out.csv("generate.csv", &rows)?;
    out.finish(ctx.argv, Some(a.seed), a)?;
    Ok(Status::Ok)
}
