//! Subcommand bodies: simulate, analyze, classify, reproduce.
//!
//! Every command renders its outputs into memory first and writes each file
//! once, so reruns with the same inputs give byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analytics::{chain_delay, predict_hit_curve, CheProblem, HitPrediction};
use crate::cache::Policy;
use crate::config::{parse_config, ExperimentConfig};
use crate::ergodicity::{
    check_recurrence, classify_protective, enumerate_with_budget, reorder_cost, symbol, AbstractCacheState,
    DEFAULT_STATE_BUDGET,
};
use crate::sim::{run_simulation, Metrics, Topology};
use crate::workload::{fnv1a, TtuLaw};
use crate::{ContentId, Error, NodeId, Result};

/// Column order of simulation CSVs.
pub const RESULT_HEADER: &str =
    "experiment_id,node,content,rank,requests,hits,hit_ratio,predicted_lru,predicted_tlru,policy,cache_size,seed";
pub const PREDICTION_HEADER: &str = "node,content,rank,rate_lru,predicted_lru,rate_tlru,admit_prob,predicted_tlru";
pub const TRACE_HEADER: &str = "node,curve,iteration,t,residual";
pub const WITNESS_HEADER: &str = "policy,catalog,cache,state,content";

pub const FIGURES: [&str; 4] = ["fig5", "fig6", "fig7", "fig8"];

/// Bundled recipe document for `figure`.
pub fn recipe(figure: &str) -> Result<&'static str> {
    Ok(match figure {
        "fig5" => include_str!("../recipes/fig5.toml"),
        "fig6" => include_str!("../recipes/fig6.toml"),
        "fig7" => include_str!("../recipes/fig7.toml"),
        "fig8" => include_str!("../recipes/fig8.toml"),
        other => return Err(Error::UnknownFigure(other.to_string())),
    })
}

pub fn recipe_config(figure: &str) -> Result<ExperimentConfig> {
    parse_config(recipe(figure)?)
}

/// Nine significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

/// What a command produced: files written plus text for stdout and stderr.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CommandReport {
    pub files: Vec<PathBuf>,
    pub summary: String,
    pub warnings: Vec<String>,
}

impl CommandReport {
    fn write(&mut self, dir: &Path, name: &str, contents: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        std::fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub experiment_id: String,
    pub node: String,
    pub content: ContentId,
    pub rank: u32,
    pub requests: u64,
    pub hits: u64,
    pub hit_ratio: f64,
    pub predicted_lru: f64,
    pub predicted_tlru: f64,
    pub policy: Policy,
    pub cache_size: u64,
    pub seed: u64,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment_id,
            self.node,
            self.content,
            self.rank,
            self.requests,
            self.hits,
            fmt_float(self.hit_ratio),
            fmt_float(self.predicted_lru),
            fmt_float(self.predicted_tlru),
            self.policy,
            self.cache_size,
            self.seed
        )
    }
}

/// One simulation run of a config, possibly with every cache switched to a
/// single policy.
#[derive(Clone, Debug)]
pub struct PolicyRun {
    pub policy: Option<Policy>,
    pub topology: Topology,
    pub metrics: Metrics,
    pub rows: Vec<ResultRow>,
}

impl PolicyRun {
    pub fn aggregate_hit_ratio(&self, node: NodeId) -> f64 {
        self.metrics.node_totals(node).hit_ratio()
    }

    pub fn csv(&self) -> String {
        let mut s = String::with_capacity(self.rows.len() * 96);
        s.push_str(RESULT_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.to_csv());
            s.push('\n');
        }
        s
    }
}

pub fn config_digest(cfg: &ExperimentConfig) -> String {
    let text = toml::to_string(cfg).unwrap_or_default();
    format!("{:016x}", fnv1a(text.as_bytes()))
}

/// TTU law as seen at `node`, scaled once per level below the first cache.
fn node_law(cfg: &ExperimentConfig, topology: &Topology, node: NodeId) -> TtuLaw {
    let level = topology.depth(node).saturating_sub(1) as i32;
    let s = cfg.topology.ttu_level_scale.powi(level);
    match cfg.ttu_law() {
        TtuLaw::Constant { value } => TtuLaw::Constant { value: value * s },
        TtuLaw::Normal { mean, stddev, floor } => TtuLaw::Normal {
            mean: mean * s,
            stddev: stddev * s,
            floor,
        },
        TtuLaw::Absent => TtuLaw::Absent,
    }
}

fn capacity_items(cfg: &ExperimentConfig, topology: &Topology, node: NodeId) -> u64 {
    topology.node(node).capacity / cfg.catalog.content_size
}

/// Che predictions for a node from its measured total request rates.
fn measured_predictions(
    cfg: &ExperimentConfig,
    topology: &Topology,
    metrics: &Metrics,
    node: NodeId,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = cfg.catalog.size;
    let span = metrics.measured_duration();
    let cap = capacity_items(cfg, topology, node);
    if span <= 0.0 || cap == 0 {
        return Ok((vec![0.0; k], vec![0.0; k]));
    }
    let rates: Vec<f64> = metrics
        .node_counters(node)
        .iter()
        .map(|c| (c.exogenous + c.endogenous) as f64 / span)
        .collect();
    if rates.iter().all(|r| *r == 0.0) {
        return Ok((vec![0.0; k], vec![0.0; k]));
    }
    let problem = CheProblem::new(cap as f64, rates)?;
    let h = predict_hit_curve(
        &problem,
        &node_law(cfg, topology, node),
        cfg.analytics.tolerance,
        cfg.analytics.max_iter,
    )?;
    Ok((h.lru, h.tlru))
}

/// Runs `cfg` once, optionally forcing every cache to `policy`.
pub fn simulate_policy(cfg: &ExperimentConfig, policy: Option<Policy>) -> Result<PolicyRun> {
    let cfg = match policy {
        Some(p) => cfg.with_policy(p),
        None => cfg.clone(),
    };
    let topology = cfg.topology()?;
    let catalog = cfg.catalog()?;
    let sources = cfg.sources(&topology);
    let mut metrics = run_simulation(&topology, &catalog, &sources, &cfg.sim_config())?;
    metrics.config_digest = config_digest(&cfg);
    let mut rows = Vec::new();
    for node in topology.cache_ids() {
        let spec = topology.node(node);
        let (lru, tlru) = measured_predictions(&cfg, &topology, &metrics, node)?;
        for meta in catalog.contents() {
            let c = metrics.counters(node, meta.id);
            let i = meta.id.index();
            rows.push(ResultRow {
                experiment_id: cfg.experiment_id.clone(),
                node: spec.name.clone(),
                content: meta.id,
                rank: meta.popularity_rank,
                requests: c.requests,
                hits: c.hits,
                hit_ratio: c.hit_ratio(),
                predicted_lru: lru[i],
                predicted_tlru: tlru[i],
                policy: spec.policy,
                cache_size: spec.capacity,
                seed: cfg.workload.seed,
            });
        }
    }
    // Cache nodes are visited in config order; sort by node name then rank.
    rows.sort_by(|a, b| a.node.cmp(&b.node).then(a.rank.cmp(&b.rank)));
    Ok(PolicyRun {
        policy,
        topology,
        metrics,
        rows,
    })
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Invariant(format!("cannot start worker pool: {e}")))
}

/// Runs every policy listed in `run.compare` (or the config as written) on
/// paired request streams.
pub fn simulate_runs(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<PolicyRun>> {
    let variants: Vec<Option<Policy>> = if cfg.run.compare.is_empty() {
        vec![None]
    } else {
        cfg.run.compare.iter().copied().map(Some).collect()
    };
    let runs: Vec<PolicyRun> = thread_pool(workers)?
        .install(|| variants.par_iter().map(|p| simulate_policy(cfg, *p)).collect::<Result<_>>())?;
    if let Some(first) = runs.first() {
        if let Some(r) = runs.iter().find(|r| r.metrics.stream_digest != first.metrics.stream_digest) {
            return Err(Error::Invariant(format!(
                "paired runs consumed different request streams ({:?} vs {:?})",
                first.policy, r.policy
            )));
        }
    }
    Ok(runs)
}

fn run_label(run: &PolicyRun) -> String {
    run.policy.map_or_else(|| "as-configured".to_string(), |p| p.to_string())
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path, workers: usize) -> Result<CommandReport> {
    let runs = simulate_runs(cfg, workers)?;
    let mut report = CommandReport::default();
    for run in &runs {
        let name = match run.policy {
            Some(p) if !cfg.run.compare.is_empty() => format!("{}-{p}.csv", cfg.experiment_id),
            _ => format!("{}.csv", cfg.experiment_id),
        };
        report.write(out, &name, &run.csv())?;
        if run.metrics.exogenous_requests == 0 {
            report.warnings.push(format!(
                "{}: no requests fell inside the measurement interval (horizon {} with warmup fraction {})",
                run_label(run),
                cfg.run.horizon,
                cfg.run.warmup_fraction
            ));
        }
        if run.metrics.expired_hit_violations != 0 {
            return Err(Error::Invariant(format!(
                "{} hits were served from expired entries",
                run.metrics.expired_hit_violations
            )));
        }
        for node in run.topology.cache_ids() {
            let t = run.metrics.node_totals(node);
            let _ = writeln!(
                report.summary,
                "{} policy={} node={} requests={} hits={} hit_ratio={}",
                cfg.experiment_id,
                run_label(run),
                run.topology.node(node).name,
                t.requests,
                t.hits,
                fmt_float(t.hit_ratio())
            );
        }
    }
    if runs.len() > 1 {
        let _ = writeln!(
            report.summary,
            "{} paired request streams identical (digest {:016x})",
            cfg.experiment_id, runs[0].metrics.stream_digest
        );
    }
    Ok(report)
}

/// Analytical model of one curve (LRU or TLRU) at one node.
#[derive(Clone, Debug)]
pub struct NodeModel {
    pub node: NodeId,
    pub rates: Vec<f64>,
    pub prediction: HitPrediction,
}

impl NodeModel {
    /// Request-weighted hit probability.
    pub fn aggregate(&self, tlru: bool) -> f64 {
        let h = if tlru { &self.prediction.tlru } else { &self.prediction.lru };
        let total: f64 = self.rates.iter().sum();
        if total <= 0.0 {
            return 0.0;
        }
        self.rates.iter().zip(h).map(|(r, h)| r * h).sum::<f64>() / total
    }
}

/// Per-node Che models for both curves. Exogenous rates follow the streams;
/// each node also receives its children's predicted miss streams.
pub fn analyze_models(cfg: &ExperimentConfig) -> Result<(Topology, Vec<NodeModel>, Vec<NodeModel>)> {
    let topology = cfg.topology()?;
    let catalog = cfg.catalog()?;
    let n = topology.len();
    let mut exo = vec![vec![0.0; catalog.len()]; n];
    for s in cfg.sources(&topology) {
        for (r, p) in exo[s.node.index()].iter_mut().zip(catalog.popularity()) {
            *r += s.rate * p;
        }
    }
    let mut order: Vec<NodeId> = topology.cache_ids().collect();
    order.sort_by_key(|&id| (std::cmp::Reverse(topology.depth(id)), id));

    let mut curves = Vec::with_capacity(2);
    for tlru in [false, true] {
        let mut incoming = exo.clone();
        let mut models: Vec<Option<NodeModel>> = vec![None; n];
        for &node in &order {
            let rates = incoming[node.index()].clone();
            let cap = capacity_items(cfg, &topology, node) as f64;
            let law = node_law(cfg, &topology, node);
            let problem = CheProblem::new(cap.max(f64::MIN_POSITIVE), rates.clone())?;
            problem.check_well_posed().map_err(|e| {
                Error::Domain(format!("node `{}`: {e}", topology.node(node).name))
            })?;
            let prediction = predict_hit_curve(&problem, &law, cfg.analytics.tolerance, cfg.analytics.max_iter)?;
            if let Some(parent) = topology.parent(node).filter(|p| !topology.is_publisher(*p)) {
                let h = if tlru { &prediction.tlru } else { &prediction.lru };
                for ((up, r), h) in incoming[parent.index()].iter_mut().zip(&rates).zip(h) {
                    *up += r * (1.0 - h);
                }
            }
            models[node.index()] = Some(NodeModel {
                node,
                rates,
                prediction,
            });
        }
        curves.push(models.into_iter().flatten().collect::<Vec<_>>());
    }
    let tlru = curves.pop().expect("two curves");
    let lru = curves.pop().expect("two curves");
    Ok((topology, lru, tlru))
}

pub fn cmd_analyze(cfg: &ExperimentConfig, out: &Path) -> Result<CommandReport> {
    let (topology, lru, tlru) = analyze_models(cfg)?;
    let catalog = cfg.catalog()?;
    let id = &cfg.experiment_id;

    let mut pred = String::from(PREDICTION_HEADER);
    pred.push('\n');
    let mut trace = String::from(TRACE_HEADER);
    trace.push('\n');
    let mut diag = String::new();
    for (l, t) in lru.iter().zip(&tlru) {
        let name = &topology.node(l.node).name;
        for meta in catalog.contents() {
            let i = meta.id.index();
            let _ = writeln!(
                pred,
                "{name},{},{},{},{},{},{},{}",
                meta.id,
                meta.popularity_rank,
                fmt_float(l.rates[i]),
                fmt_float(l.prediction.lru[i]),
                fmt_float(t.rates[i]),
                fmt_float(t.prediction.admit[i]),
                fmt_float(t.prediction.tlru[i])
            );
        }
        for (curve, m) in [("lru", l), ("tlru", t)] {
            let s = m.prediction.solution.as_ref().expect("well-posed node");
            let _ = writeln!(
                diag,
                "node={name} curve={curve} capacity={} T={} iterations={} residual={} converged={} method={:?} aggregate_hit={}",
                capacity_items(cfg, &topology, m.node),
                fmt_float(s.t),
                s.iterations,
                fmt_float(s.residual),
                s.converged,
                s.method,
                fmt_float(m.aggregate(curve == "tlru"))
            );
            for r in &s.trace {
                let _ = writeln!(trace, "{name},{curve},{},{},{}", r.iteration, fmt_float(r.t), fmt_float(r.residual));
            }
        }
    }
    if let Some(mu) = cfg.analytics.service_rate {
        for leaf in topology.cache_ids().filter(|n| topology.children(*n).is_empty()) {
            let path: Vec<NodeId> = topology
                .path_up(leaf, topology.depth(leaf))
                .into_iter()
                .filter(|n| !topology.is_publisher(*n))
                .collect();
            let mut line = format!("delay leaf={} hops={}", topology.node(leaf).name, path.len());
            for (curve, models) in [("lru", &lru), ("tlru", &tlru)] {
                let model = |n: NodeId| models.iter().find(|m| m.node == n).expect("cache node model");
                let hops: Vec<(f64, f64)> = path.iter().map(|&n| (model(n).rates.iter().sum(), mu)).collect();
                let hits: Vec<f64> = path.iter().map(|&n| model(n).aggregate(curve == "tlru")).collect();
                let d = chain_delay(&hops, &hits, cfg.analytics.delay_product_mode)?;
                let _ = write!(line, " {curve}={}", fmt_float(d));
            }
            let _ = writeln!(diag, "{line}");
        }
    }

    let mut report = CommandReport::default();
    report.write(out, &format!("{id}-prediction.csv"), &pred)?;
    report.write(out, &format!("{id}-che.txt"), &diag)?;
    report.write(out, &format!("{id}-trace.csv"), &trace)?;
    report.summary = diag;
    Ok(report)
}

/// Sizes and policies examined by `classify`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyRequest {
    pub policies: Vec<Policy>,
    pub catalogs: Vec<u8>,
    pub caches: Vec<u8>,
    pub ttu_levels: u8,
    pub max_states: usize,
}

impl Default for ClassifyRequest {
    fn default() -> Self {
        Self {
            policies: Policy::ALL.to_vec(),
            catalogs: vec![3, 4, 5],
            caches: vec![2, 3],
            ttu_levels: 2,
            max_states: DEFAULT_STATE_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyLine {
    pub policy: Policy,
    pub catalog: u8,
    pub cache: u8,
    pub class: crate::ergodicity::Classification,
    pub text: String,
    pub witnesses: String,
}

fn classify_one(req: &ClassifyRequest, policy: Policy, catalog: u8, cache: u8) -> Result<ClassifyLine> {
    let g = enumerate_with_budget(policy, catalog, cache, req.ttu_levels, req.max_states)?;
    let c = classify_protective(&g);
    let r = check_recurrence(&g);
    let text = format!(
        "policy={policy} catalog={catalog} cache={cache} states={} full={} class={} pairs={} one_step={} preserving={} eventual={} witnesses={} closed_classes={} ergodic_set={} covers_placements={}",
        g.len(),
        g.full_states().count(),
        c.class,
        c.pairs,
        c.one_step,
        c.preserving,
        c.eventual,
        c.witnesses.len(),
        r.closed_classes.len(),
        r.is_ergodic_set,
        r.covers_placements
    );
    let mut witnesses = String::new();
    for w in &c.witnesses {
        let _ = writeln!(
            witnesses,
            "{policy},{catalog},{cache},\"{}\",{}",
            g.states[w.state],
            symbol(w.content)
        );
    }
    Ok(ClassifyLine {
        policy,
        catalog,
        cache,
        class: c.class,
        text,
        witnesses,
    })
}

/// Fewest requests to swap a cached pair's eviction order (d,c) -> (c,d)
/// with four contents and two slots.
pub fn pair_reorder_cost(policy: Policy) -> Result<usize> {
    let g = enumerate_with_budget(policy, 4, 2, 2, DEFAULT_STATE_BUDGET)?;
    let from = AbstractCacheState::from_order(policy, &[3, 2], 2);
    let to = AbstractCacheState::from_order(policy, &[2, 3], 2);
    reorder_cost(&g, &from, &to)
}

pub fn classify_lines(req: &ClassifyRequest, workers: usize) -> Result<Vec<ClassifyLine>> {
    let mut jobs = Vec::new();
    for &p in &req.policies {
        for &k in &req.catalogs {
            for &c in &req.caches {
                jobs.push((p, k, c));
            }
        }
    }
    thread_pool(workers)?.install(|| {
        jobs.par_iter()
            .map(|&(p, k, c)| classify_one(req, p, k, c))
            .collect::<Result<Vec<_>>>()
    })
}

pub fn cmd_classify(req: &ClassifyRequest, out: &Path, workers: usize) -> Result<CommandReport> {
    let lines = classify_lines(req, workers)?;
    let mut text = String::new();
    let mut csv = String::from(WITNESS_HEADER);
    csv.push('\n');
    for l in &lines {
        let _ = writeln!(text, "{}", l.text);
        csv.push_str(&l.witnesses);
    }
    for p in [Policy::Fifo, Policy::Lru] {
        let steps = pair_reorder_cost(p)?;
        let _ = writeln!(text, "reorder policy={p} catalog=4 cache=2 from=(d,c) to=(c,d) steps={steps}");
    }
    let mut report = CommandReport::default();
    report.write(out, "classification.txt", &text)?;
    report.write(out, "witnesses.csv", &csv)?;
    report.summary = text;
    Ok(report)
}

/// Columnar plot data for a figure recipe.
pub fn cmd_reproduce(figure: &str, out: &Path, seed: Option<u64>, workers: usize) -> Result<CommandReport> {
    let mut cfg = recipe_config(figure)?;
    if let Some(s) = seed {
        cfg.workload.seed = s;
    }
    let mut report = CommandReport::default();
    if figure == "fig5" {
        let (_, lru, _) = analyze_models(&cfg)?;
        let s = lru[0].prediction.solution.as_ref().expect("well-posed recipe");
        let mut dat = String::from("# iteration T residual\n");
        for r in &s.trace {
            let _ = writeln!(dat, "{} {} {}", r.iteration, fmt_float(r.t), fmt_float(r.residual));
        }
        report.write(out, "fig5.dat", &dat)?;
        report.summary = format!(
            "fig5 T={} iterations={} residual={}\n",
            fmt_float(s.t),
            s.iterations,
            fmt_float(s.residual)
        );
        return Ok(report);
    }

    let runs = simulate_runs(&cfg, workers)?;
    let by_policy = |p: Policy| {
        runs.iter()
            .find(|r| r.policy == Some(p))
            .ok_or_else(|| Error::Invariant(format!("recipe {figure} lacks a {p} run")))
    };
    let (l, t) = (by_policy(Policy::Lru)?, by_policy(Policy::Tlru)?);
    let mut dat = String::from("# rank sim_lru sim_tlru pred_lru pred_tlru\n");
    for (a, b) in l.rows.iter().zip(&t.rows) {
        let _ = writeln!(
            dat,
            "{} {} {} {} {}",
            a.rank,
            fmt_float(a.hit_ratio),
            fmt_float(b.hit_ratio),
            fmt_float(a.predicted_lru),
            fmt_float(a.predicted_tlru)
        );
    }
    report.write(out, &format!("{figure}.dat"), &dat)?;
    let node = l.topology.cache_ids().next().expect("recipe has a cache");
    report.summary = format!(
        "{figure} lru={} tlru={} gap={}\n",
        fmt_float(l.aggregate_hit_ratio(node)),
        fmt_float(t.aggregate_hit_ratio(node)),
        fmt_float(t.aggregate_hit_ratio(node) - l.aggregate_hit_ratio(node))
    );
    Ok(report)
}
