use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::{AssociateArgs, Cli, Command, MemorySource, PrintArgs, RecallArgs, VerifyArgs};
use crate::capacity::config::{ExperimentConfig, ExperimentKind};
use crate::capacity::output::{fmt_f64, ArtifactDir, Table};
use crate::capacity::{
    self, association_graph, capacity_sweep, fidelity_matrix, forgetting_curve, recall, CodeSource, FidelityMatrix,
    Registry, ThetaRange, RECALL_CONVENTION, SCHEMA_VERSION,
};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::fock::DEFAULT_DIM;
use crate::su11::{Code, MemoryState, ModeList};
use crate::{thermo, verify};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Success,
    VerificationFailed { failures: usize },
}

struct Context<'a> {
    cli: &'a Cli,
    exec: Execution,
    config: Option<ExperimentConfig>,
    out: ArtifactDir,
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

impl<'a> Context<'a> {
    fn config(&self) -> Result<&ExperimentConfig> {
        self.config
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs --config".into()))
    }

    fn config_of(&self, kinds: &[ExperimentKind]) -> Result<&ExperimentConfig> {
        let c = self.config()?;
        if kinds.contains(&c.kind) {
            Ok(c)
        } else {
            Err(Error::Config(format!(
                "config kind {:?} does not fit this command (expected one of {kinds:?})",
                c.kind
            )))
        }
    }

    fn epsilon(&self) -> f64 {
        self.config
            .as_ref()
            .map(|c| c.epsilon)
            .or(self.cli.global.epsilon)
            .unwrap_or(capacity::DEFAULT_EPSILON)
    }

    fn seed(&self) -> u64 {
        self.config.as_ref().map(|c| c.seed).or(self.cli.global.seed).unwrap_or(0)
    }

    /// The summary written next to every experiment's tables.
    fn summary(&self, command: &str, results: Value) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "config": self.config,
            "seed": self.seed(),
            "epsilon": self.epsilon(),
            "results": results,
        })
    }
}

fn load_config(cli: &Cli) -> Result<Option<ExperimentConfig>> {
    let Some(path) = &cli.global.config else {
        return Ok(None);
    };
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.global.seed {
        cfg.seed = seed;
    }
    if let Some(eps) = cli.global.epsilon {
        cfg.epsilon = eps;
    }
    cfg.validate()?;
    Ok(Some(cfg))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Print(_) => "print",
        Command::Recall(_) => "recall",
        Command::Evolve => "evolve",
        Command::Forgetting => "forgetting",
        Command::Capacity => "capacity",
        Command::Associate(_) => "associate",
        Command::ThermoTrace => "thermo-trace",
        Command::OracleVerify(_) => "oracle-verify",
    }
}

pub fn run(cli: &Cli) -> Result<RunOutcome> {
    let started = Instant::now();
    if let Some(eps) = cli.global.epsilon {
        capacity::check_epsilon(eps)?;
    }
    let exec = match cli.global.threads {
        Some(0) => return Err(Error::domain("--threads must be >= 1")),
        Some(1) => Execution::Sequential,
        Some(n) => {
            exec::init_threads(n);
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let config = load_config(cli)?;
    let prefix = config.as_ref().map(|c| c.output.prefix.clone()).unwrap_or_default();
    let out = ArtifactDir::create(&cli.global.out, &prefix)?;
    let mut ctx = Context { cli, exec, config, out };

    let result = match &cli.command {
        Command::Print(a) => cmd_print(&mut ctx, a),
        Command::Recall(a) => cmd_recall(&mut ctx, a),
        Command::Evolve => cmd_evolve(&mut ctx),
        Command::Forgetting => cmd_forgetting(&mut ctx),
        Command::Capacity => cmd_capacity(&mut ctx),
        Command::Associate(a) => cmd_associate(&mut ctx, a),
        Command::ThermoTrace => cmd_thermo(&mut ctx),
        Command::OracleVerify(a) => cmd_verify(&mut ctx, a),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            mark_partial(&ctx.out);
            return Err(e);
        }
    };
    write_manifest(&mut ctx, started, outcome)?;
    if !cli.global.quiet {
        println!(
            "{}: wrote {} artifacts to {}",
            command_name(&cli.command),
            ctx.out.written().len() + 1,
            ctx.out.root().display()
        );
    }
    Ok(outcome)
}

/// Renames whatever a failed run managed to write to `<name>.partial`.
fn mark_partial(out: &ArtifactDir) {
    for name in out.written() {
        let p = out.root().join(name);
        let mut q = p.clone().into_os_string();
        q.push(".partial");
        let _ = std::fs::rename(&p, q);
    }
}

fn write_manifest(ctx: &mut Context, started: Instant, outcome: RunOutcome) -> Result<()> {
    let manifest = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command_name(&ctx.cli.command),
        "config": ctx.config,
        "config_path": ctx.cli.global.config,
        "seed": ctx.seed(),
        "epsilon": ctx.epsilon(),
        "threads": ctx.cli.global.threads,
        "parallel": ctx.exec.is_parallel(),
        "dim": ctx.cli.global.dim,
        "outcome": match outcome {
            RunOutcome::Success => "success",
            RunOutcome::VerificationFailed { .. } => "verification-failed",
        },
        "artifacts": ctx.out.written(),
        "wall_time_seconds": started.elapsed().as_secs_f64(),
    });
    let path = ctx.out.root().join("manifest.json");
    crate::capacity::output::write_atomic(&path, &crate::capacity::output::to_json_bytes(&manifest)?)
}

fn new_registry_modes(ctx: &Context, a: &PrintArgs) -> Result<Arc<ModeList>> {
    if let Some(c) = &ctx.config {
        return c.mode_list();
    }
    match a.modes {
        Some(k) => Ok(Arc::new(ModeList::uniform(k, a.omega, a.gamma)?)),
        None => Err(Error::Config(format!(
            "registry {} does not exist; give --modes or --config to create it",
            a.registry.display()
        ))),
    }
}

fn cmd_print(ctx: &mut Context, a: &PrintArgs) -> Result<RunOutcome> {
    let before = if a.registry.exists() {
        Registry::load(&a.registry)?
    } else {
        Registry::new(new_registry_modes(ctx, a)?)
    };
    let source = match (&a.thetas, a.beta) {
        (Some(t), None) => CodeSource::Thetas(t.clone()),
        (None, Some(b)) => CodeSource::Beta(b),
        _ => return Err(Error::Config("give exactly one of --thetas or --beta".into())),
    };
    let after = before.print(&a.id, &source, a.at)?;
    let entry = after.get(&a.id)?.clone();
    let new_state = after.state_at(&entry, 0.0)?;
    let mut overlaps = Table::new(["id", "log_fidelity", "fidelity"]);
    for e in before.entries() {
        let l = crate::su11::log_overlap(&new_state, &after.state_at(e, 0.0)?)?;
        overlaps.push(vec![e.id.clone(), f(l), f(l.exp())]);
    }
    ctx.out.write_csv("print_overlaps.csv", &overlaps)?;
    let summary = ctx.summary(
        "print",
        json!({
            "entry": entry,
            "entries_before": before.len(),
            "entries_after": after.len(),
        }),
    );
    ctx.out.write_json("print.json", &summary)?;
    after.save(&a.registry)?;
    Ok(RunOutcome::Success)
}

struct Memories {
    registry: Registry,
    time: f64,
    clock: capacity::Clock,
}

fn memories(ctx: &Context, src: &MemorySource) -> Result<Memories> {
    let registry = match &src.registry {
        Some(p) => Registry::load(p)?,
        None => ctx
            .config_of(&[ExperimentKind::FidelityMatrix, ExperimentKind::AssociationGraph])?
            .registry()?,
    };
    let eval = ctx.config.as_ref().map(|c| c.evaluation.clone()).unwrap_or_default();
    let time = src.time.unwrap_or(eval.time);
    if !(time.is_finite() && time >= 0.0) {
        return Err(Error::domain(format!("evaluation time must be finite and >= 0, got {time}")));
    }
    let clock = if src.staggered { capacity::Clock::Staggered } else { eval.clock() };
    Ok(Memories { registry, time, clock })
}

fn fidelity_table(fm: &FidelityMatrix) -> Table {
    let mut t = Table::new(["id_a", "id_b", "log_fidelity", "fidelity"]);
    for i in 0..fm.len() {
        for j in 0..fm.len() {
            t.push(vec![
                fm.ids[i].clone(),
                fm.ids[j].clone(),
                f(fm.log_values[i][j]),
                f(fm.values[i][j]),
            ]);
        }
    }
    t
}

fn cmd_recall(ctx: &mut Context, a: &RecallArgs) -> Result<RunOutcome> {
    let m = memories(ctx, &a.source)?;
    let fm = fidelity_matrix(&m.registry, m.time, m.clock, ctx.exec)?;
    ctx.out.write_csv("fidelity_matrix.csv", &fidelity_table(&fm))?;
    let probe = match (&a.probe, &a.probe_id) {
        (Some(p), _) => Some(Code::new(p.clone())?),
        (None, Some(id)) => Some(m.registry.get(id)?.code.clone()),
        (None, None) => None,
    };
    let mut scores_json = Value::Null;
    if let Some(probe) = probe {
        let scores = recall(&m.registry, &probe, m.time, m.clock, ctx.exec)?;
        let mut t = Table::new(["rank", "id", "log_fidelity", "fidelity"]);
        for (i, s) in scores.iter().enumerate() {
            t.push(vec![(i + 1).to_string(), s.id.clone(), f(s.log_fidelity), f(s.fidelity)]);
        }
        ctx.out.write_csv("recall.csv", &t)?;
        scores_json = json!({ "probe": probe, "best": scores.first().map(|s| &s.id) });
    }
    let summary = ctx.summary(
        "recall",
        json!({
            "recall_convention": RECALL_CONVENTION,
            "time": m.time,
            "clock": m.clock,
            "ids": fm.ids,
            "max_off_diagonal_fidelity": fm.max_off_diagonal(),
            "probe": scores_json,
        }),
    );
    ctx.out.write_json("recall.json", &summary)?;
    Ok(RunOutcome::Success)
}

fn cmd_associate(ctx: &mut Context, a: &AssociateArgs) -> Result<RunOutcome> {
    let m = memories(ctx, &a.source)?;
    let threshold = a
        .threshold
        .or_else(|| ctx.config.as_ref().map(|c| c.association_threshold()))
        .unwrap_or_else(|| ctx.epsilon());
    let fm = fidelity_matrix(&m.registry, m.time, m.clock, ctx.exec)?;
    let g = association_graph(&fm, threshold)?;
    let mut edges = Table::new(["id_a", "id_b", "fidelity"]);
    for e in &g.edges {
        edges.push(vec![g.ids[e.a].clone(), g.ids[e.b].clone(), f(e.fidelity)]);
    }
    let mut clusters = Table::new(["cluster", "id"]);
    for (c, members) in g.clusters.iter().enumerate() {
        for &i in members {
            clusters.push(vec![c.to_string(), g.ids[i].clone()]);
        }
    }
    ctx.out.write_csv("association_edges.csv", &edges)?;
    ctx.out.write_csv("association_clusters.csv", &clusters)?;
    let summary = ctx.summary(
        "associate",
        json!({
            "time": m.time,
            "clock": m.clock,
            "threshold": threshold,
            "edge_count": g.edges.len(),
            "cluster_count": g.clusters.len(),
        }),
    );
    ctx.out.write_json("association.json", &summary)?;
    Ok(RunOutcome::Success)
}

fn configured_states(ctx: &Context, kinds: &[ExperimentKind]) -> Result<(Arc<ModeList>, Vec<(String, Code)>, Vec<f64>)> {
    let c = ctx.config_of(kinds)?;
    let modes = c.mode_list()?;
    let rc = c.resolved_codes()?;
    let grid = c.time_grid()?;
    Ok((modes, rc.ids.into_iter().zip(rc.codes).collect(), grid))
}

const ANY_KIND: [ExperimentKind; 5] = [
    ExperimentKind::FidelityMatrix,
    ExperimentKind::CapacitySweep,
    ExperimentKind::ForgettingCurve,
    ExperimentKind::AssociationGraph,
    ExperimentKind::ThermoTrace,
];

fn cmd_evolve(ctx: &mut Context) -> Result<RunOutcome> {
    let (modes, codes, grid) = configured_states(ctx, &ANY_KIND)?;
    let mut t = Table::new([
        "id", "time", "mode", "theta_eff", "occupation", "dx2", "dy2", "dxt2", "dyt2", "j", "m", "entropy", "beta",
    ]);
    for (id, code) in &codes {
        let origin = MemoryState::new(modes.clone(), code.clone())?;
        let rows = exec::map_slice(ctx.exec, &grid, |&time| -> Result<Vec<Vec<String>>> {
            let s = origin.with_time(time)?;
            let ent = thermo::entropy(&s);
            (0..s.len())
                .map(|k| {
                    let v = s.variances(k)?;
                    let q = s.quantum_numbers(k)?;
                    let beta = thermo::effective_beta(&s, k).map_or(f64::INFINITY, |b| b);
                    Ok(vec![
                        id.clone(),
                        f(time),
                        k.to_string(),
                        f(s.effective_theta(k)?),
                        f(s.occupation(k)?),
                        f(v.dx2),
                        f(v.dy2),
                        f(v.dxt2),
                        f(v.dyt2),
                        f(q.j),
                        f(q.m),
                        f(ent.per_mode[k]),
                        f(beta),
                    ])
                })
                .collect()
        });
        for r in rows {
            for row in r? {
                t.push(row);
            }
        }
    }
    ctx.out.write_csv("observables.csv", &t)?;
    let summary = ctx.summary("evolve", json!({ "codes": codes.len(), "times": grid.len(), "modes": modes.len() }));
    ctx.out.write_json("evolve.json", &summary)?;
    Ok(RunOutcome::Success)
}

fn cmd_forgetting(ctx: &mut Context) -> Result<RunOutcome> {
    let (modes, codes, grid) = configured_states(ctx, &[ExperimentKind::ForgettingCurve])?;
    let mut t = Table::new([
        "id",
        "time",
        "log_self_overlap",
        "self_overlap",
        "log_vacuum_overlap",
        "vacuum_overlap",
        "total_occupation",
        "after_tau",
    ]);
    let mut per_code = Vec::new();
    for (id, code) in &codes {
        let c = forgetting_curve(&modes, code, &grid, ctx.exec)?;
        for p in &c.points {
            let after = c.tau.map_or(false, |tau| p.time >= tau);
            t.push(vec![
                id.clone(),
                f(p.time),
                f(p.log_self_overlap),
                f(p.self_overlap),
                f(p.log_vacuum_overlap),
                f(p.vacuum_overlap),
                f(p.total_occupation),
                u8::from(after).to_string(),
            ]);
        }
        let peak = c
            .points
            .iter()
            .max_by(|a, b| a.log_vacuum_overlap.total_cmp(&b.log_vacuum_overlap))
            .map(|p| p.time);
        per_code.push(json!({ "id": id, "tau": c.tau, "vacuum_overlap_peak_time": peak }));
    }
    ctx.out.write_csv("forgetting.csv", &t)?;
    let summary = ctx.summary(
        "forgetting",
        json!({ "total_gamma": modes.total_gamma(), "codes": per_code }),
    );
    ctx.out.write_json("forgetting.json", &summary)?;
    Ok(RunOutcome::Success)
}

#[derive(Serialize)]
struct SweepRow {
    mode_count: usize,
    accepted: usize,
    candidate_count: usize,
    theory: capacity::OverlapSummary,
}

fn cmd_capacity(ctx: &mut Context) -> Result<RunOutcome> {
    let c = ctx.config_of(&[ExperimentKind::CapacitySweep])?;
    let sweep = c.sweep.clone().ok_or_else(|| Error::Config("missing [sweep]".into()))?;
    let full = c.modes.build()?;
    let range = ThetaRange::new(sweep.range[0], sweep.range[1])?;
    let (eps, seed) = (c.epsilon, c.seed);
    let reports = capacity_sweep(&full, &sweep.mode_counts, range, eps, sweep.candidate_count, seed, ctx.exec)?;
    let mut table = Table::new([
        "mode_count",
        "candidate_count",
        "epsilon",
        "accepted",
        "theory_log_overlap_mean",
        "theory_log_overlap_std",
        "theory_epsilon_z",
    ]);
    let mut curve = Table::new(["mode_count", "candidate", "accepted_so_far"]);
    let mut rows = Vec::new();
    for r in &reports {
        table.push(vec![
            r.mode_count.to_string(),
            r.candidate_count.to_string(),
            f(r.epsilon),
            r.accepted.to_string(),
            f(r.theory.log_overlap_mean),
            f(r.theory.log_overlap_std),
            f(r.theory.epsilon_z),
        ]);
        for (i, n) in r.packing.curve.iter().enumerate() {
            curve.push(vec![r.mode_count.to_string(), i.to_string(), n.to_string()]);
        }
        rows.push(SweepRow {
            mode_count: r.mode_count,
            accepted: r.accepted,
            candidate_count: r.candidate_count,
            theory: r.theory,
        });
    }
    ctx.out.write_csv("capacity.csv", &table)?;
    ctx.out.write_csv("acceptance_curve.csv", &curve)?;
    let summary = ctx.summary("capacity", json!({ "range": range, "sweep": rows }));
    ctx.out.write_json("capacity.json", &summary)?;
    Ok(RunOutcome::Success)
}

fn cmd_thermo(ctx: &mut Context) -> Result<RunOutcome> {
    let (modes, codes, grid) = configured_states(ctx, &[ExperimentKind::ThermoTrace])?;
    let mut totals = Table::new(["id", "time", "entropy", "energy", "beta_fit", "beta_fit_rms"]);
    let mut per_mode = Table::new(["id", "time", "mode", "theta_eff", "entropy", "beta"]);
    let mut ledger = Table::new(["id", "t0", "t1", "d_energy", "d_entropy", "heat", "residual", "flagged"]);
    let mut per_code = Vec::new();
    for (id, code) in &codes {
        let origin = MemoryState::new(modes.clone(), code.clone())?;
        let snaps = thermo::snapshots(&origin, &grid, ctx.exec)?;
        for s in &snaps {
            let (bf, rms) = s.beta_fit.map_or((f64::NAN, f64::NAN), |b| (b.beta, b.rms_residual));
            totals.push(vec![id.clone(), f(s.time), f(s.entropy), f(s.energy), f(bf), f(rms)]);
            let state = origin.with_time(s.time)?;
            for (k, th) in state.effective_thetas().into_iter().enumerate() {
                per_mode.push(vec![
                    id.clone(),
                    f(s.time),
                    k.to_string(),
                    f(th),
                    f(s.per_mode_entropy[k]),
                    f(s.betas[k].unwrap_or(f64::INFINITY)),
                ]);
            }
        }
        let l = thermo::first_law_ledger(&origin, &grid, ctx.exec)?;
        for st in &l.steps {
            ledger.push(vec![
                id.clone(),
                f(st.t0),
                f(st.t1),
                f(st.d_energy),
                f(st.d_entropy),
                f(st.heat),
                f(st.residual),
                u8::from(st.flagged).to_string(),
            ]);
        }
        let min = snaps
            .iter()
            .min_by(|a, b| a.entropy.total_cmp(&b.entropy))
            .map(|s| json!({ "time": s.time, "entropy": s.entropy }));
        per_code.push(json!({
            "id": id,
            "tau": crate::su11::forgetting_time(&modes, code).finite(),
            "entropy_minimum": min,
            "ledger_max_abs_residual": l.max_abs_residual(),
            "ledger_flagged_steps": l.flagged_count(),
        }));
    }
    ctx.out.write_csv("thermo.csv", &totals)?;
    ctx.out.write_csv("thermo_modes.csv", &per_mode)?;
    ctx.out.write_csv("first_law.csv", &ledger)?;
    let summary = ctx.summary("thermo-trace", json!({ "codes": per_code }));
    ctx.out.write_json("thermo.json", &summary)?;
    Ok(RunOutcome::Success)
}

fn residual_table(rows: &[verify::CheckRow]) -> Table {
    let mut t = Table::new([
        "suite",
        "check",
        "theta",
        "gamma",
        "time",
        "theta_eff",
        "analytic",
        "oracle",
        "residual",
        "tolerance",
        "passed",
    ]);
    for r in rows {
        t.push(vec![
            r.suite.to_string(),
            r.check.clone(),
            f(r.theta),
            f(r.gamma),
            f(r.time),
            f(r.theta_eff),
            f(r.analytic),
            f(r.oracle),
            f(r.residual),
            f(r.tolerance),
            u8::from(r.passed).to_string(),
        ]);
    }
    t
}

fn cmd_verify(ctx: &mut Context, a: &VerifyArgs) -> Result<RunOutcome> {
    let dim = ctx.cli.global.dim.unwrap_or(DEFAULT_DIM);
    let names: Vec<&str> = if a.suites.is_empty() {
        verify::SUITES.to_vec()
    } else {
        a.suites.iter().map(String::as_str).collect()
    };
    let rows = verify::run_suites(&names, dim, ctx.exec)?;
    ctx.out.write_csv("oracle_residuals.csv", &residual_table(&rows))?;
    let failed: Vec<verify::CheckRow> = rows.iter().filter(|r| !r.passed).cloned().collect();
    if !failed.is_empty() {
        ctx.out.write_csv("oracle_failures.csv", &residual_table(&failed))?;
    }
    let summary = ctx.summary(
        "oracle-verify",
        json!({
            "dim": dim,
            "suites": names,
            "checks": rows.len(),
            "failures": failed.len(),
            "worst_residual_over_tolerance": rows.iter().map(|r| r.residual / r.tolerance).fold(0.0, f64::max),
        }),
    );
    ctx.out.write_json("oracle_verify.json", &summary)?;
    Ok(if failed.is_empty() {
        RunOutcome::Success
    } else {
        RunOutcome::VerificationFailed { failures: failed.len() }
    })
}
