//! The three-layer replay: orientation, EDCS, matching, with bound checks,
//! validators and checkpoints.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use dynmatch_core::edcs_general::GeneralReport;
use dynmatch_core::edcs_weighted::WeightedReport;
use dynmatch_core::oracle::{self, ValidationReport};
use dynmatch_core::orientation::OrientOutcome;
use dynmatch_core::{
    AlternatingPath, DynBipartiteGraph, EdcsError, Edge, GeneralEdcs, GeneralParams, HChange, MaintainedMatching,
    OrientationState, Scheme, VertexId, VertexSpace, WeightedEdcs,
};

use crate::config::{plan_parameters, ConfigError, Mode, PipelineConfig, ResolvedParams};
use crate::stream::{Op, StreamError, UpdateStream};

/// Most violation messages kept in the summary.
const MESSAGE_LIMIT: usize = 20;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("step {step}: {message}")]
    Step { step: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub step: usize,
    pub m: usize,
    pub mu_g: usize,
    pub mu_h: usize,
    pub matching: usize,
    pub ratio: f64,
    /// Largest load over all vertices at this step.
    pub max_load: usize,
    /// Longest alternating path since the previous checkpoint.
    pub max_path_len: usize,
    /// H changes caused by this step's update.
    pub h_changes: usize,
    /// Mean wall time per update since the previous checkpoint; 0 with
    /// timing off.
    pub us_per_update: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub params: Option<ResolvedParams>,
    pub steps: usize,
    pub final_m: usize,
    pub checkpoints: usize,
    pub validations: usize,
    pub max_load: usize,
    pub max_flips: usize,
    pub max_path_len: usize,
    pub max_h_changes: usize,
    pub max_unit_changes: usize,
    pub max_update_changes: usize,
    pub orientation_rebuilds: usize,
    pub matching_rebuilds: usize,
    pub min_mu_h_fraction: Option<f64>,
    pub max_ratio: Option<f64>,
    /// Violation counts by category; every category is listed.
    pub violations: BTreeMap<String, usize>,
    pub messages: Vec<String>,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub rows: Vec<MetricsRow>,
    pub summary: Summary,
}

pub const CATEGORIES: &[&str] = &[
    "edcs_validator",
    "path_length",
    "path_structure",
    "h_change_bound",
    "unit_change_bound",
    "update_change_bound",
    "load_bound",
    "flip_bound",
    "estimate_accuracy",
    "structure_audit",
    "invariant_audit",
    "matching_audit",
    "mu_h_bound",
    "ratio_bound",
    "sanity",
];

enum Edcs {
    General(GeneralEdcs),
    Weighted(WeightedEdcs),
}

/// Outcome of one update, before checks.
#[derive(Default)]
struct StepEffects {
    h_changes: Vec<HChange>,
    paths: Vec<AlternatingPath>,
    flips: usize,
    max_unit_changes: usize,
    unit_deltas: usize,
}

impl From<GeneralReport> for StepEffects {
    fn from(r: GeneralReport) -> Self {
        StepEffects { h_changes: r.h_changes, paths: r.paths, ..Default::default() }
    }
}

impl From<WeightedReport> for StepEffects {
    fn from(r: WeightedReport) -> Self {
        StepEffects {
            h_changes: r.h_changes,
            paths: r.paths,
            max_unit_changes: r.max_unit_changes,
            unit_deltas: r.deltas.len(),
            ..Default::default()
        }
    }
}

/// Live state of one run.
pub struct Pipeline {
    params: ResolvedParams,
    graph: DynBipartiteGraph,
    orientation: OrientationState,
    edcs: Edcs,
    matching: MaintainedMatching,
    audit: bool,
    summary: Summary,
}

impl Pipeline {
    pub fn new(params: ResolvedParams, space: VertexSpace, audit: bool) -> Result<Self, PipelineError> {
        let graph = DynBipartiteGraph::new(space.n_left, space.n_right);
        let to_cfg = |e: EdcsError| ConfigError::Invalid(e.to_string());
        let scheme = match params.mode {
            Mode::General => Scheme::SqrtLoad,
            Mode::SmallArboricity => Scheme::Arboricity { cap: params.load_cap.expect("arboricity mode has a cap") },
        };
        let orientation = OrientationState::new(space, scheme);
        let edcs = match params.mode {
            Mode::General => {
                let gp = GeneralParams::new(params.beta, params.slack.expect("general mode has a slack")).map_err(to_cfg)?;
                let mut h = GeneralEdcs::new(space, gp, orientation.m_bar());
                h.set_audit(audit);
                Edcs::General(h)
            }
            Mode::SmallArboricity => Edcs::Weighted(WeightedEdcs::new(space, params.beta).map_err(to_cfg)?),
        };
        let matching = MaintainedMatching::new(space, params.matching_eps).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let mut summary = Summary { params: Some(params.clone()), ..Default::default() };
        for c in CATEGORIES {
            summary.violations.insert(c.to_string(), 0);
        }
        Ok(Pipeline {
            params,
            graph,
            orientation,
            edcs,
            matching,
            audit,
            summary,
        })
    }

    pub fn graph(&self) -> &DynBipartiteGraph {
        &self.graph
    }

    pub fn matching(&self) -> &MaintainedMatching {
        &self.matching
    }

    pub fn orientation(&self) -> &OrientationState {
        &self.orientation
    }

    pub fn summary(&self) -> &Summary {
        &self.summary
    }

    /// Edges of `H`, sorted.
    pub fn h_edges(&self) -> Vec<Edge> {
        match &self.edcs {
            Edcs::General(h) => h.h_edges(),
            Edcs::Weighted(h) => h.used_edges(),
        }
    }

    fn violation(&mut self, category: &str, step: usize, message: String) {
        *self.summary.violations.get_mut(category).expect("known category") += 1;
        if self.summary.messages.len() < MESSAGE_LIMIT {
            self.summary.messages.push(format!("step {step} [{category}] {message}"));
        }
    }

    fn load_ok(&self, load: usize) -> bool {
        match self.params.mode {
            Mode::General => self.orientation.within_sqrt_bound(load),
            Mode::SmallArboricity => load <= self.params.load_cap.expect("cap"),
        }
    }

    /// Applies one update through all three layers and checks the per-step
    /// bounds.
    pub fn apply(&mut self, step: usize, op: Op, e: Edge) -> Result<StepReport, PipelineError> {
        let fail = |message: String| PipelineError::Step { step, message };
        let outcome: OrientOutcome = match op {
            Op::Insert => {
                self.graph.insert_edge(e).map_err(|err| fail(err.to_string()))?;
                self.orientation.orient_insert(&self.graph, e).map_err(|err| fail(err.to_string()))?
            }
            Op::Delete => {
                self.graph.delete_edge(e).map_err(|err| fail(err.to_string()))?;
                self.orientation.orient_delete(&self.graph, e).map_err(|err| fail(err.to_string()))?
            }
        };
        let edcs_fail = |err: EdcsError| PipelineError::Step { step, message: err.to_string() };
        let mut touched: Vec<VertexId> = vec![e.left(), e.right()];
        match &mut self.edcs {
            Edcs::General(h) => {
                if outcome.rebuilt {
                    h.resync(&self.orientation).map_err(edcs_fail)?;
                }
                for f in &outcome.flips {
                    h.on_flip(*f).map_err(edcs_fail)?;
                }
            }
            Edcs::Weighted(h) => {
                if outcome.rebuilt {
                    h.resync(&self.orientation).map_err(edcs_fail)?;
                }
                for f in &outcome.flips {
                    h.on_flip(*f).map_err(edcs_fail)?;
                }
            }
        }
        for f in &outcome.flips {
            touched.extend([f.edge.left(), f.edge.right()]);
        }
        let mut effects: StepEffects = match (&mut self.edcs, op) {
            (Edcs::General(h), Op::Insert) => {
                let owner = self.orientation.owner(e).expect("oriented");
                h.on_graph_insert(e, owner).map_err(edcs_fail)?.into()
            }
            (Edcs::General(h), Op::Delete) => h.on_graph_delete(e).map_err(edcs_fail)?.into(),
            (Edcs::Weighted(h), Op::Insert) => {
                let owner = self.orientation.owner(e).expect("oriented");
                h.on_graph_insert(e, owner).map_err(edcs_fail)?.into()
            }
            (Edcs::Weighted(h), Op::Delete) => h.on_graph_delete(e).map_err(edcs_fail)?.into(),
        };
        effects.flips = outcome.flips.len();
        for &c in &effects.h_changes {
            self.matching.on_h_change(c).map_err(|err| fail(err.to_string()))?;
        }
        if let Edcs::General(h) = &mut self.edcs {
            for v in h.take_violations() {
                self.violation("invariant_audit", step, v);
            }
        }

        // orientation bounds
        self.summary.max_flips = self.summary.max_flips.max(effects.flips);
        if self.params.mode == Mode::General && effects.flips > 10 {
            self.violation("flip_bound", step, format!("{} flips", effects.flips));
        }
        if outcome.rebuilt {
            self.summary.orientation_rebuilds += 1;
            let max = self.orientation.max_load();
            self.summary.max_load = self.summary.max_load.max(max);
            if !self.load_ok(max) {
                self.violation("load_bound", step, format!("load {max} after rebuild"));
            }
        }
        for v in touched {
            let load = self.orientation.load(v);
            self.summary.max_load = self.summary.max_load.max(load);
            if !self.load_ok(load) {
                self.violation("load_bound", step, format!("load {load} at {v}, m_bar {}", self.orientation.m_bar()));
            }
        }

        // EDCS bounds
        let mut longest = 0;
        for p in &effects.paths {
            longest = longest.max(p.len());
            if p.len() > self.params.max_path_len {
                self.violation("path_length", step, format!("path of {} edges", p.len()));
            }
            if let Err(m) = p.check(usize::MAX) {
                self.violation("path_structure", step, m);
            }
        }
        self.summary.max_path_len = self.summary.max_path_len.max(longest);
        let changes = effects.h_changes.len();
        self.summary.max_h_changes = self.summary.max_h_changes.max(changes);
        if let Some(bound) = self.params.max_h_changes {
            if changes > bound {
                self.violation("h_change_bound", step, format!("{changes} H changes, bound {bound}"));
            }
        }
        self.summary.max_unit_changes = self.summary.max_unit_changes.max(effects.max_unit_changes);
        self.summary.max_update_changes = self.summary.max_update_changes.max(effects.unit_deltas);
        if let Some(bound) = self.params.max_unit_changes {
            if effects.max_unit_changes > bound {
                self.violation("unit_change_bound", step, format!("{} changes for one unit", effects.max_unit_changes));
            }
        }
        if let Some(bound) = self.params.max_update_changes {
            if effects.unit_deltas > bound {
                self.violation("update_change_bound", step, format!("{} unit changes", effects.unit_deltas));
            }
        }
        self.summary.steps = step;
        self.summary.final_m = self.graph.edge_count();
        Ok(StepReport { h_changes: changes, longest_path: longest })
    }

    /// Full validators plus, with auditing on, the structural audits.
    pub fn validate(&mut self, step: usize) -> ValidationReport {
        self.summary.validations += 1;
        let g = self.graph.edges();
        let report = match &self.edcs {
            Edcs::General(h) => {
                oracle::validate_edcs_unweighted(&g, &h.h_edges(), self.params.beta, self.params.lambda.expect("lambda"))
            }
            Edcs::Weighted(h) => oracle::validate_edcs_weighted(&g, &h.weights(), self.params.beta),
        };
        for v in report.violations.iter().take(MESSAGE_LIMIT) {
            let msg = format!("{:?} on {} (edge degree {})", v.constraint, v.edge, v.edge_degree);
            self.violation("edcs_validator", step, msg);
        }
        if report.violations.len() > MESSAGE_LIMIT {
            *self.summary.violations.get_mut("edcs_validator").expect("category") += report.violations.len() - MESSAGE_LIMIT;
        }
        let matching_audit = self.matching.audit();
        let mut h_sorted = self.h_edges();
        h_sorted.sort();
        let mut extra = Vec::new();
        if self.matching.h_edges() != h_sorted {
            extra.push(("matching_audit", "matching layer's H differs from the EDCS".to_string()));
        }
        for m in matching_audit {
            extra.push(("matching_audit", m));
        }
        if self.audit {
            match &self.edcs {
                Edcs::General(h) => {
                    for m in h.audit_estimates() {
                        extra.push(("estimate_accuracy", m));
                    }
                    for m in h.audit_structure() {
                        extra.push(("structure_audit", m));
                    }
                }
                Edcs::Weighted(h) => {
                    for m in h.audit() {
                        extra.push(("structure_audit", m));
                    }
                }
            }
            for m in self.orientation.audit(&self.graph) {
                extra.push(("structure_audit", m));
            }
        }
        for (c, m) in extra {
            self.violation(c, step, m);
        }
        report
    }

    /// Oracle values and approximation checks at a checkpoint.
    pub fn checkpoint(&mut self, step: usize) -> (usize, usize, usize) {
        let (nl, nr) = (self.graph.n_left(), self.graph.n_right());
        let mu_g = oracle::hopcroft_karp(nl, nr, &self.graph.edges()).0;
        let mu_h = oracle::hopcroft_karp(nl, nr, &self.h_edges()).0;
        let size = self.matching.size();
        if mu_h > mu_g || size > mu_h {
            self.violation("sanity", step, format!("mu_G {mu_g}, mu_H {mu_h}, |M| {size}"));
        }
        let fraction = self.params.mu_h_fraction();
        if (mu_h as f64) < fraction * mu_g as f64 {
            self.violation("mu_h_bound", step, format!("mu_H {mu_h} < {fraction:.4} * mu_G {mu_g}"));
        }
        let ratio = oracle::ratio(mu_g, size);
        if ratio > self.params.ratio_bound() + 1e-12 {
            self.violation("ratio_bound", step, format!("ratio {ratio:.4} above {:.4}", self.params.ratio_bound()));
        }
        if mu_g > 0 {
            let f = mu_h as f64 / mu_g as f64;
            self.summary.min_mu_h_fraction = Some(self.summary.min_mu_h_fraction.map_or(f, |x: f64| x.min(f)));
        }
        self.summary.max_ratio = Some(self.summary.max_ratio.map_or(ratio, |x: f64| x.max(ratio)));
        self.summary.checkpoints += 1;
        (mu_g, mu_h, size)
    }

    pub fn finish(mut self) -> Summary {
        self.summary.matching_rebuilds = self.matching.rebuild_count();
        self.summary.ok = self.summary.violations.values().all(|&c| c == 0);
        self.summary
    }
}

pub struct StepReport {
    pub h_changes: usize,
    pub longest_path: usize,
}

/// Vertex space of a run: the configured sides, widened to fit the stream.
pub fn run_space(cfg: &PipelineConfig, stream: &UpdateStream) -> VertexSpace {
    let inferred = stream.inferred_space();
    VertexSpace::new(cfg.stream.n_left.max(inferred.n_left), cfg.stream.n_right.max(inferred.n_right))
}

/// Replays `stream` under `cfg`: plans parameters from the stream's peak
/// edge count, then applies every update, validating every
/// `validate_every` steps and recording a row every `checkpoint_every`
/// steps and at the last step.
pub fn run_pipeline(cfg: &PipelineConfig, stream: &UpdateStream) -> Result<RunOutput, PipelineError> {
    let space = run_space(cfg, stream);
    let m_max = stream.validate(space)?;
    let params = plan_parameters(cfg, m_max, space.total())?;
    let mut pipe = Pipeline::new(params, space, cfg.audit)?;
    let mut rows = Vec::new();
    let mut interval_ns: u128 = 0;
    let mut interval_updates = 0usize;
    let mut interval_path = 0usize;
    let total = stream.len();
    for (i, u) in stream.updates.iter().enumerate() {
        let step = i + 1;
        let started = cfg.timing.then(Instant::now);
        let rep = pipe.apply(step, u.op, u.edge)?;
        if let Some(t) = started {
            interval_ns += t.elapsed().as_nanos();
        }
        interval_updates += 1;
        interval_path = interval_path.max(rep.longest_path);
        if cfg.validate_every > 0 && (step % cfg.validate_every == 0 || step == total) {
            pipe.validate(step);
        }
        if cfg.checkpoint_every > 0 && (step % cfg.checkpoint_every == 0 || step == total) {
            let (mu_g, mu_h, size) = pipe.checkpoint(step);
            let us = if cfg.timing { interval_ns as f64 / 1000.0 / interval_updates as f64 } else { 0.0 };
            rows.push(MetricsRow {
                step,
                m: pipe.graph().edge_count(),
                mu_g,
                mu_h,
                matching: size,
                ratio: oracle::ratio(mu_g, size),
                max_load: pipe.orientation().max_load(),
                max_path_len: interval_path,
                h_changes: rep.h_changes,
                us_per_update: us,
            });
            interval_ns = 0;
            interval_updates = 0;
            interval_path = 0;
        }
    }
    let summary = pipe.finish();
    Ok(RunOutput { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{StreamKind, StreamSpec};
    use crate::stream::generate_stream;

    fn quick(mode: Mode, kind: StreamKind) -> PipelineConfig {
        PipelineConfig {
            mode,
            eps: 0.5,
            alpha_cap: 2,
            timing: false,
            audit: true,
            checkpoint_every: 50,
            stream: StreamSpec { kind, n_left: 25, n_right: 25, steps: 600, density: 0.3, forests: 2, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn empty_stream() {
        let cfg = quick(Mode::General, StreamKind::Random);
        let out = run_pipeline(&cfg, &UpdateStream::default()).unwrap();
        assert!(out.rows.is_empty());
        assert_eq!(out.summary.steps, 0);
        assert!(out.summary.ok);
    }

    #[test]
    fn general_random_run_is_clean() {
        let cfg = quick(Mode::General, StreamKind::Random);
        let stream = generate_stream(&cfg.stream, 1).unwrap();
        let out = run_pipeline(&cfg, &stream).unwrap();
        assert!(out.summary.ok, "{:?}", out.summary.messages);
        assert_eq!(out.rows.len(), 12);
        assert_eq!(out.summary.validations, 600);
    }

    #[test]
    fn small_beta_override_exercises_repairs() {
        let mut cfg = quick(Mode::General, StreamKind::Random);
        cfg.beta = Some(24);
        cfg.lambda = Some(0.5);
        cfg.stream.density = 0.6;
        let stream = generate_stream(&cfg.stream, 2).unwrap();
        let out = run_pipeline(&cfg, &stream).unwrap();
        assert_eq!(out.summary.params.as_ref().unwrap().beta, 24);
        assert!(out.summary.ok, "{:?}", out.summary.messages);
        assert!(out.summary.max_path_len > 0);
    }

    #[test]
    fn arboricity_run_is_clean() {
        let cfg = quick(Mode::SmallArboricity, StreamKind::ForestUnion);
        let stream = generate_stream(&cfg.stream, 3).unwrap();
        let out = run_pipeline(&cfg, &stream).unwrap();
        assert!(out.summary.ok, "{:?}", out.summary.messages);
    }

    #[test]
    fn inconsistent_stream_is_rejected_with_step() {
        let cfg = quick(Mode::General, StreamKind::Random);
        let stream = UpdateStream::parse("+ L0 R0\n- L1 R1\n").unwrap();
        let err = run_pipeline(&cfg, &stream).unwrap_err();
        assert!(err.to_string().contains("step 2"), "{err}");
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = quick(Mode::General, StreamKind::Random);
        cfg.eps = 0.7;
        assert!(matches!(run_pipeline(&cfg, &UpdateStream::default()), Err(PipelineError::Config(_))));
    }
}
