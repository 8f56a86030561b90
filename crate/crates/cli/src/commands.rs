use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use planted_mst::bp::{mc_overlap, simulate_extinction, BranchingConfig, Caps, Side};
use planted_mst::experiment::{run_trials, TrialPlan, TrialSummary};
use planted_mst::fixed_point::{default_grid, iterate, IterationOptions, LimitModel};
use planted_mst::hypothesis::{error_rates, HypothesisConfig};
use planted_mst::instance::{gen_instance_with_guard, PlantedInstance};
use planted_mst::mst::recover;
use planted_mst::table1::REFERENCE_ROWS;
use planted_mst::theory::{predict, TheoryOptions};
use planted_mst::{EdgeLaw, Error, PlantedKind, WeightFamily};

use crate::args::{Cli, Command, Common, Format, ModelArg, SideArg};
use crate::output::{versioned, Sink};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{}", m.trim_end()),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Lib(Error::Json(e))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Lib(Error::Csv(e))
    }
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) | CliError::Lib(Error::Domain(_)) => "usage",
            CliError::Lib(e) if e.is_numeric() => "numeric",
            CliError::Lib(Error::Capacity { .. }) => "capacity",
            CliError::Lib(Error::EdgeSet(_)) => "input",
            _ => "io",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            "usage" => 2,
            "numeric" => 3,
            "capacity" => 4,
            _ => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn validate(c: &Common) -> Result<(), CliError> {
    if !(c.mu > 0.0 && c.mu.is_finite()) {
        return Err(usage(format!("--mu must be positive and finite, got {}", c.mu)));
    }
    if c.n < 2 {
        return Err(usage(format!("--n must be at least 2, got {}", c.n)));
    }
    if c.trials == Some(0) {
        return Err(usage("--trials must be positive"));
    }
    if !(c.epsilon > 0.0 && c.epsilon.is_finite()) {
        return Err(usage(format!("--epsilon must be positive, got {}", c.epsilon)));
    }
    if c.threads == Some(0) {
        return Err(usage("--threads must be positive"));
    }
    Ok(())
}

fn limit_model(c: &Common) -> Result<LimitModel, CliError> {
    match c.model {
        ModelArg::Tree => Ok(LimitModel::Tree(c.tree_system.into())),
        ModelArg::Path => Ok(LimitModel::Path),
        ModelArg::Null => Err(usage("this command needs --model tree or --model path")),
    }
}

fn law(c: &Common) -> Result<WeightFamily, CliError> {
    Ok(WeightFamily::exponential(c.mu)?)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    validate(&cli.common)?;
    let threads = cli
        .common
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| usage(format!("cannot start {threads} threads: {e}")))?;
    pool.install(|| dispatch(&cli.command, &cli.common))
}

fn dispatch(command: &Command, c: &Common) -> Result<(), CliError> {
    match command {
        Command::Gen => gen(c),
        Command::Mst { input } => mst(c, input.as_deref()),
        Command::Simulate => simulate(c),
        Command::Fp { points, s_max } => fp(c, *points, *s_max),
        Command::Theory => theory(c),
        Command::Bp {
            s,
            side,
            depth_cap,
            population_cap,
        } => bp(
            c,
            *s,
            *side,
            Caps {
                depth: *depth_cap,
                population: *population_cap,
            },
        ),
        Command::Hyptest => hyptest(c),
        Command::Table1 => table1(c),
    }
}

fn instance(c: &Common) -> Result<PlantedInstance, CliError> {
    Ok(gen_instance_with_guard(c.n, c.model.into(), law(c)?, c.seed, c.max_n)?)
}

fn gen(c: &Common) -> Result<(), CliError> {
    let inst = instance(c)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => match &c.out {
            Some(path) => Ok(inst.dump(path)?),
            None => {
                let mut sink = Sink::open(None)?;
                inst.write_csv(sink.writer())?;
                sink.finish()
            }
        },
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                u: usize,
                v: usize,
                weight: f64,
                planted: bool,
            }
            let edges: Vec<Row> = planted_mst::instance::pairs(inst.n)
                .zip(&inst.weights)
                .map(|((u, v), &weight)| Row {
                    u,
                    v,
                    weight,
                    planted: inst.planted.contains(planted_mst::Edge::new(u as u32, v as u32)),
                })
                .collect();
            Sink::open(c.out.as_deref())?.json_compact(json!({
                "instance": inst.sidecar(),
                "planted": inst.planted,
                "edges": edges,
            }))
        }
    }
}

fn mst(c: &Common, input: Option<&Path>) -> Result<(), CliError> {
    let inst = match input {
        Some(path) => {
            let inst = PlantedInstance::load(path)?;
            if inst.n > c.max_n {
                return Err(Error::Capacity {
                    what: "n",
                    requested: inst.n,
                    limit: c.max_n,
                }
                .into());
            }
            inst
        }
        None => instance(c)?,
    };
    let r = recover(&inst);
    let sink = Sink::open(c.out.as_deref())?;
    match c.format.unwrap_or(Format::Json) {
        Format::Json => sink.json_compact(json!({ "result": r, "mst": r.mst })),
        Format::Csv => sink.csv_rows([r]),
    }
}

fn simulate(c: &Common) -> Result<(), CliError> {
    let kind: PlantedKind = c.model.into();
    let mut plan = TrialPlan::new(c.n, kind, law(c)?, c.trials.unwrap_or(100), c.seed);
    plan.max_n = c.max_n;
    let records = run_trials(&plan)?;
    let summary = TrialSummary::from_records(c.n, kind, &records);
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let summary_text = versioned(json!({ "summary": summary, "mu": c.mu, "seed": c.seed }))?;
            match &c.out {
                Some(path) => {
                    let side = summary_path(path);
                    std::fs::write(&side, summary_text + "\n").map_err(|e| CliError::io(&side, e))?;
                }
                None => eprintln!("{summary_text}"),
            }
            Sink::open(c.out.as_deref())?.csv_rows(&records)
        }
        Format::Json => Sink::open(c.out.as_deref())?.json_compact(json!({
            "summary": summary,
            "mu": c.mu,
            "seed": c.seed,
            "trials": records,
        })),
    }
}

/// `<out>.summary.json` next to a per-trial CSV.
pub fn summary_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".summary.json");
    s.into()
}

fn fp(c: &Common, points: usize, s_max: Option<f64>) -> Result<(), CliError> {
    let model = limit_model(c)?;
    let law = law(c)?;
    if points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    let s_max = s_max.unwrap_or_else(|| law.tail_cutoff(1e-12).max(20.0));
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(usage("--s-max must be positive and finite"));
    }
    let grid = default_grid(points, s_max);
    let sol = iterate(model, |s| law.cdf(s), &grid, &IterationOptions::default())?;

    #[derive(Serialize)]
    struct Row {
        s: f64,
        p_minus: f64,
        p_plus: f64,
        aux: Option<f64>,
    }
    let rows: Vec<Row> = (0..grid.len())
        .map(|i| Row {
            s: grid[i],
            p_minus: sol.minus.values()[i],
            p_plus: sol.plus.values()[i],
            aux: sol.aux.as_ref().map(|a| a.values()[i]),
        })
        .collect();
    let sink = Sink::open(c.out.as_deref())?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => sink.csv_rows(rows),
        Format::Json => sink.json(json!({
            "model": model,
            "mu": c.mu,
            "iterations_used": sol.iterations_used,
            "residual_sup_norm": sol.residual_sup_norm,
            "monotone_violations": sol.monotone_violations,
            "analytic_points": sol.analytic_points,
            "rows": rows,
        })),
    }
}

fn theory(c: &Common) -> Result<(), CliError> {
    let model = limit_model(c)?;
    let p = predict(model, &law(c)?, &TheoryOptions::default())?;
    let sink = Sink::open(c.out.as_deref())?;
    match c.format.unwrap_or(Format::Json) {
        Format::Json => sink.json(json!({
            "model": model.name(),
            "tree_system": tree_system_name(model),
            "mu": p.mu,
            "overlap_limit": p.overlap_limit,
            "weight_limit": p.weight_limit,
            "planted_weight": p.planted_weight,
            "unplanted_weight": p.unplanted_weight,
            "s_max": { "planted": p.diagnostics.s_max_planted, "lebesgue": p.diagnostics.s_max_lebesgue },
            "diagnostics": p.diagnostics,
        })),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                model: &'static str,
                mu: f64,
                overlap_limit: f64,
                weight_limit: f64,
            }
            sink.csv_rows([Row {
                model: model.name(),
                mu: p.mu,
                overlap_limit: p.overlap_limit,
                weight_limit: p.weight_limit,
            }])
        }
    }
}

fn tree_system_name(model: LimitModel) -> Option<&'static str> {
    match model {
        LimitModel::Tree(sys) => Some(sys.as_str()),
        LimitModel::Path => None,
    }
}

fn bp(c: &Common, s: Option<f64>, side: SideArg, caps: Caps) -> Result<(), CliError> {
    let model = limit_model(c)?;
    let law = law(c)?;
    let trials = c.trials.unwrap_or(100_000);
    let (threshold, side_name, est) = match s {
        Some(s) => {
            let side = match side {
                SideArg::Minus => Side::Minus,
                SideArg::Plus => Side::Plus,
            };
            let config = BranchingConfig {
                model,
                side,
                s,
                caps,
                trials,
                seed: c.seed,
            };
            (json!(s), json!(side), simulate_extinction(&config, &law)?)
        }
        None => (json!("integrated"), json!(null), mc_overlap(model, &law, trials, caps, c.seed)?),
    };
    let sink = Sink::open(c.out.as_deref())?;
    match c.format.unwrap_or(Format::Json) {
        Format::Json => sink.json(json!({
            "model": model.name(),
            "tree_system": tree_system_name(model),
            "mu": c.mu,
            "s": threshold,
            "side": side_name,
            "estimate": est.point_estimate,
            "std_error": est.std_error,
            "trials": est.trials,
            "truncated": est.truncated_count,
            "caps": caps,
        })),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                model: &'static str,
                mu: f64,
                s: String,
                estimate: f64,
                std_error: f64,
                trials: u64,
                truncated: u64,
            }
            sink.csv_rows([Row {
                model: model.name(),
                mu: c.mu,
                s: match threshold {
                    serde_json::Value::String(t) => t,
                    other => other.to_string(),
                },
                estimate: est.point_estimate,
                std_error: est.std_error,
                trials: est.trials,
                truncated: est.truncated_count,
            }])
        }
    }
}

fn hyptest(c: &Common) -> Result<(), CliError> {
    if c.model == ModelArg::Null {
        return Err(usage("hyptest needs a planted alternative: --model tree or --model path"));
    }
    if c.n > c.max_n {
        return Err(Error::Capacity {
            what: "n",
            requested: c.n,
            limit: c.max_n,
        }
        .into());
    }
    let rates = error_rates(&HypothesisConfig {
        n: c.n,
        trials: c.trials.unwrap_or(50),
        kind: c.model.into(),
        planted: law(c)?,
        epsilon: c.epsilon,
        seed: c.seed,
        tree_system: c.tree_system.into(),
    })?;
    let sink = Sink::open(c.out.as_deref())?;
    match c.format.unwrap_or(Format::Json) {
        Format::Json => sink.json(json!({ "model": c.model.to_string(), "mu": c.mu, "rates": rates, "total": rates.total() })),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                n: usize,
                trials: u64,
                epsilon: f64,
                type1: f64,
                type2: f64,
                ci1_lo: f64,
                ci1_hi: f64,
                ci2_lo: f64,
                ci2_hi: f64,
                mean_w_h0: f64,
                mean_w_h1: f64,
            }
            sink.csv_rows([Row {
                n: rates.n,
                trials: rates.trials,
                epsilon: rates.epsilon,
                type1: rates.type1,
                type2: rates.type2,
                ci1_lo: rates.ci1[0],
                ci1_hi: rates.ci1[1],
                ci2_lo: rates.ci2[0],
                ci2_hi: rates.ci2[1],
                mean_w_h0: rates.mean_w_h0,
                mean_w_h1: rates.mean_w_h1,
            }])
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub mu: f64,
    pub model: &'static str,
    pub metric: &'static str,
    pub paper: f64,
    pub computed: f64,
    pub abs_err: f64,
}

fn table1(c: &Common) -> Result<(), CliError> {
    use rayon::prelude::*;
    let opts = TheoryOptions::default();
    let tree = LimitModel::Tree(c.tree_system.into());
    let per_row: Vec<Vec<ComparisonRow>> = REFERENCE_ROWS
        .par_iter()
        .map(|row| -> Result<Vec<ComparisonRow>, CliError> {
            let law = WeightFamily::exponential(row.mu)?;
            let mut out = Vec::with_capacity(4);
            for (model, kind) in [(tree, PlantedKind::Tree), (LimitModel::Path, PlantedKind::Path)] {
                let p = predict(model, &law, &opts)?;
                for (metric, paper, computed) in [
                    ("overlap", row.overlap(kind), p.overlap_limit),
                    ("weight", row.weight(kind), p.weight_limit),
                ] {
                    let paper = paper.expect("planted kind");
                    out.push(ComparisonRow {
                        mu: row.mu,
                        model: model.name(),
                        metric,
                        paper,
                        computed,
                        abs_err: (computed - paper).abs(),
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<ComparisonRow> = per_row.into_iter().flatten().collect();
    let sink = Sink::open(c.out.as_deref())?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => sink.csv_rows(rows),
        Format::Json => {
            let max_abs_err = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
            sink.json(json!({ "tree_system": tree_system_name(tree), "max_abs_err": max_abs_err, "rows": rows }))
        }
    }
}

impl std::fmt::Display for ModelArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(PlantedKind::from(*self).as_str())
    }
}
