use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{
    BuiltSystem, Configurable, ExperimentConfig, PartitionConfig, SetFunctionConfig,
};
use crate::decomposition::{decompose_entropy, ergodic_components, m_function, Decomposable};
use crate::engine::{
    conditional_block_entropy, entropy_rate, verify_exhaustion, verify_partition_identities,
    verify_rate_inequalities, CheckKind, EngineOptions, PropertyCheck,
};
use crate::error::{Error, Result};
use crate::group::{
    verify_subadditive_hypotheses, FolnerSubset, GroupElement, HypothesisCheck,
    SubadditivityOptions,
};
use crate::measure::{
    conditional_entropy, disintegrate, entropy, nats_to_bits, FiniteProbabilitySpace, Partition,
    MASS_TOLERANCE,
};
use crate::sampling::{random_mass_preserving, random_partition, random_space};
use crate::systems::{FinitePMPAction, ShiftMixture};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

const DEFAULT_TRIALS: usize = 500;

/// Command-line overrides shared by every verb.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub bits: bool,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub max_window: Option<u64>,
}

/// A failure with its exit code and machine-readable body.
#[derive(Clone, Debug)]
pub struct Failure {
    pub code: i32,
    pub body: Value,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            e if e.is_resource_cap() => EXIT_RESOURCE,
            Error::NotFixed { .. } => EXIT_VIOLATION,
            _ => EXIT_VALIDATION,
        };
        let mut detail = json!({ "kind": error_kind(&e), "message": e.to_string() });
        if let Error::NotFixed { block, generator } = e {
            detail["witness"] = json!({ "block": block, "generator": generator });
        }
        Failure {
            code,
            body: json!({ "error": detail }),
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::SpaceMismatch => "space_mismatch",
        Error::InvalidSpace(_) => "invalid_space",
        Error::InvalidPartition(_) => "invalid_partition",
        Error::DegenerateFiber(_) => "degenerate_fiber",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::EmptySet => "empty_set",
        Error::OutOfSchedule { .. } => "out_of_schedule",
        Error::SizeCap { .. } => "size_cap",
        Error::EnumerationCap { .. } => "enumeration_cap",
        Error::GapCap { .. } => "gap_cap",
        Error::InvalidSystem(_) => "invalid_system",
        Error::InvalidWeights(_) => "invalid_weights",
        Error::Incompatible(_) => "incompatible",
        Error::NotFixed { .. } => "not_fixed",
        Error::ChainNotIncreasing(_) => "chain_not_increasing",
        Error::EmptyList => "empty_list",
        Error::NoConvergence(_) => "no_convergence",
    }
}

#[derive(Clone, Copy)]
struct Units {
    bits: bool,
}

impl Units {
    fn x(self, nats: f64) -> f64 {
        if self.bits {
            nats_to_bits(nats)
        } else {
            nats
        }
    }

    fn name(self) -> &'static str {
        if self.bits {
            "bits"
        } else {
            "nats"
        }
    }

    fn key(self, stem: &str) -> String {
        format!("{stem}_{}", self.name())
    }
}

/// Shared state for one invocation.
pub struct Context {
    pub cfg: ExperimentConfig,
    opts: RunOptions,
    units: Units,
    out_dir: PathBuf,
}

impl Context {
    pub fn new(cfg: ExperimentConfig, opts: RunOptions) -> Result<Self> {
        if let Some(t) = opts.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidSystem("--tol must be positive".into()));
            }
        }
        let bits = opts.bits || cfg.log_base == super::config::LogBase::Two;
        let out_dir = opts
            .out
            .clone()
            .or_else(|| cfg.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Self {
            cfg,
            opts,
            units: Units { bits },
            out_dir,
        })
    }

    fn engine_options(&self) -> Result<EngineOptions> {
        let mut e = self.cfg.engine_options()?;
        if let Some(t) = self.opts.tol {
            e.tol = t;
        }
        if let Some(cap) = self.opts.max_window {
            e.enumeration_cap = cap;
        }
        Ok(e)
    }

    fn seed(&self) -> u64 {
        self.opts.seed.unwrap_or(self.cfg.seed)
    }

    fn trials(&self) -> usize {
        self.opts.trials.or(self.cfg.trials).unwrap_or(DEFAULT_TRIALS)
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed());
        rng.set_stream(stream);
        rng
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        write_atomic(&self.out_dir, name, bytes)
    }

    fn write_json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value)
            .map_err(|e| Error::InvalidSystem(format!("json: {e}")))?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }
}

/// Write `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let io = |e: std::io::Error| Error::InvalidSystem(format!("output {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| io(e.error))?;
    Ok(path)
}

macro_rules! dispatch {
    ($sys:expr, $s:ident => $body:expr) => {
        match $sys {
            BuiltSystem::Finite($s) => $body,
            BuiltSystem::Shift($s) => $body,
            BuiltSystem::ShiftMixture($s) => $body,
            BuiltSystem::FiniteMixture($s) => $body,
        }
    };
}

// ---------------------------------------------------------------- entropy

pub fn cmd_entropy(ctx: &Context) -> std::result::Result<i32, Failure> {
    let sys = ctx.cfg.system()?;
    let u = ctx.units;
    let report = match &sys {
        BuiltSystem::Finite(f) => finite_entropy_report(ctx, f)?,
        BuiltSystem::FiniteMixture(m) => finite_entropy_report(ctx, m.union())?,
        BuiltSystem::Shift(s) => window_entropy_report(ctx, s)?,
        BuiltSystem::ShiftMixture(s) => window_entropy_report(ctx, s)?,
    };
    let mut report = report;
    report["units"] = json!(u.name());
    ctx.write_json("entropy.json", &report)?;
    Ok(EXIT_OK)
}

fn finite_entropy_report(ctx: &Context, sys: &FinitePMPAction) -> Result<Value> {
    let u = ctx.units;
    let space = sys.space();
    let alpha = sys.partition(&ctx.cfg.partition)?;
    let beta = match &ctx.cfg.beta {
        Some(b) => sys.partition(b)?,
        None => Partition::trivial(space),
    };
    let h = entropy(&alpha, space)?;
    let h_cond = conditional_entropy(&alpha, &beta, space)?;
    let dis = disintegrate(space, &beta)?;
    let integrated = dis.integrated_entropy(&alpha)?;
    let fibers: Vec<Value> = (0..beta.len())
        .map(|i| match dis.restrict(&alpha, i) {
            Ok(local) => {
                let fiber = dis.conditionals[i].as_ref().expect("positive block");
                json!(u.x(entropy(&local, fiber).unwrap_or(f64::NAN)))
            }
            Err(_) => Value::Null,
        })
        .collect();
    let m = m_function(space, &alpha, &beta)?;
    let mut out = serde_json::Map::new();
    out.insert(u.key("entropy"), json!(u.x(h)));
    out.insert(u.key("conditional_entropy"), json!(u.x(h_cond)));
    out.insert(
        "disintegration".into(),
        json!({
            "blocks": beta.len(),
            "weights": (0..beta.len()).map(|i| dis.weight(i)).collect::<Vec<_>>(),
            u.key("fiber_entropies"): fibers,
            u.key("integrated"): u.x(integrated),
            "route_gap": u.x((integrated - h_cond).abs()),
        }),
    );
    out.insert(
        "m_function".into(),
        json!({
            "values": m.values,
            "excluded": m.excluded,
            "residual": u.x(m.residual),
            "holds": m.holds,
        }),
    );
    Ok(Value::Object(out))
}

fn window_entropy_report<S: Configurable>(ctx: &Context, sys: &S) -> Result<Value> {
    let u = ctx.units;
    let opts = ctx.engine_options()?;
    let (seq, n_max) = ctx.cfg.folner(sys.dimension())?;
    let window = seq.box_at(n_max)?;
    let alpha = sys.partition(&ctx.cfg.partition)?;
    let sub = sys.subalgebra(&ctx.cfg.subalgebra)?;
    let h = conditional_block_entropy(sys, &alpha, &window, &sub, &opts)?;
    let mut out = serde_json::Map::new();
    out.insert("window_size".into(), json!(window.len()));
    out.insert(
        "conditioning_window".into(),
        json!(sys.conditioning_size(&window, &sub, &opts)),
    );
    out.insert(u.key("block_entropy"), json!(u.x(h)));
    Ok(Value::Object(out))
}

// ---------------------------------------------------------------- rate

pub fn cmd_rate(ctx: &Context) -> std::result::Result<i32, Failure> {
    let sys = ctx.cfg.system()?;
    dispatch!(&sys, s => rate_job(ctx, s))
}

fn rate_job<S: Configurable>(ctx: &Context, sys: &S) -> std::result::Result<i32, Failure> {
    let u = ctx.units;
    let opts = ctx.engine_options()?;
    let (seq, n_max) = ctx.cfg.folner(sys.dimension())?;
    let alpha = sys.partition(&ctx.cfg.partition)?;
    let sub = sys.subalgebra(&ctx.cfg.subalgebra)?;
    let out = entropy_rate(sys, &alpha, &sub, &seq, n_max, &opts)?;
    ctx.write("rate.csv", &out.trace.to_csv(u.bits)?)?;
    let r = &out.report;
    let report = json!({
        "paper_property": "thm3_rate",
        "units": u.name(),
        "estimate": u.x(r.estimate),
        "inf_value": u.x(r.inf_value),
        "last_gap": u.x(r.last_gap),
        "converged": r.converged,
        "tolerance": r.tolerance,
        "limit": r.limit,
        "conditioning_window": r.conditioning_window,
        "entries": out.trace.len(),
        "truncated": out.truncated,
        "truncation": out.truncation,
    });
    ctx.write_json("rate.json", &report)?;
    Ok(if out.truncated { EXIT_RESOURCE } else { EXIT_OK })
}

// ---------------------------------------------------------------- verify

#[derive(Serialize)]
struct PropertySummary {
    paper_property: String,
    kind: CheckKind,
    tolerance: f64,
    checks: usize,
    violations: usize,
    min_slack: Option<f64>,
    max_abs_slack: Option<f64>,
    slacks: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    witnesses: Vec<Value>,
}

#[derive(Default)]
struct Summaries {
    by_key: BTreeMap<(String, u8), PropertySummary>,
    inconclusive: Vec<String>,
}

impl Summaries {
    fn add(&mut self, check: &PropertyCheck, units: Units, witness: impl FnOnce() -> Value) {
        self.record(check, units, true, witness);
    }

    /// Record the slack without scoring it, for checks on unconverged limits.
    fn add_unscored(&mut self, check: &PropertyCheck, units: Units) {
        self.record(check, units, false, || Value::Null);
    }

    fn record(
        &mut self,
        check: &PropertyCheck,
        units: Units,
        scored: bool,
        witness: impl FnOnce() -> Value,
    ) {
        let kind_key = match check.kind {
            CheckKind::Inequality => 0,
            CheckKind::Equality => 1,
        };
        let s = self
            .by_key
            .entry((check.paper_property.clone(), kind_key))
            .or_insert_with(|| PropertySummary {
                paper_property: check.paper_property.clone(),
                kind: check.kind,
                tolerance: check.tolerance,
                checks: 0,
                violations: 0,
                min_slack: None,
                max_abs_slack: None,
                slacks: Vec::new(),
                witnesses: Vec::new(),
            });
        let v = units.x(check.value);
        s.checks += 1;
        s.min_slack = Some(s.min_slack.map_or(v, |m| m.min(v)));
        s.max_abs_slack = Some(s.max_abs_slack.map_or(v.abs(), |m| m.max(v.abs())));
        s.slacks.push(v);
        if scored && check.violated() {
            s.violations += 1;
            if s.witnesses.len() < 16 {
                s.witnesses.push(witness());
            }
        }
    }

    fn add_hypothesis(&mut self, label: &str, h: &HypothesisCheck, tolerance: f64, units: Units) {
        let s = self
            .by_key
            .entry((label.to_string(), 0))
            .or_insert_with(|| PropertySummary {
                paper_property: label.to_string(),
                kind: CheckKind::Inequality,
                tolerance,
                checks: 0,
                violations: 0,
                min_slack: None,
                max_abs_slack: None,
                slacks: Vec::new(),
                witnesses: Vec::new(),
            });
        s.checks += h.checks as usize;
        s.violations += h.violations as usize;
        if h.checks > 0 {
            s.min_slack = Some(units.x(h.min_slack));
        }
        s.witnesses
            .extend(h.witnesses.iter().map(|w| serde_json::to_value(w).expect("witness")));
    }

    fn total_violations(&self) -> usize {
        self.by_key.values().map(|s| s.violations).sum()
    }
}

fn partition_json(p: &Partition) -> Value {
    json!(p.blocks())
}

pub fn cmd_verify(ctx: &Context) -> std::result::Result<i32, Failure> {
    let sys = match &ctx.cfg.system {
        Some(_) => Some(ctx.cfg.system()?),
        None => None,
    };
    let properties: Vec<String> = match &ctx.cfg.verify.properties {
        Some(p) => p.clone(),
        None if sys.is_some() => vec!["thm7".into(), "thm52".into()],
        None => vec!["prop22".into(), "thm4".into(), "thm5".into()],
    };
    let mut sums = Summaries::default();
    for (i, prop) in properties.iter().enumerate() {
        let stream = i as u64;
        match prop.as_str() {
            "prop22" => verify_partition_suite(ctx, stream, &mut sums)?,
            "thm4" => verify_exhaustion_suite(ctx, stream, &mut sums)?,
            "thm5" => verify_disintegration_suite(ctx, stream, &mut sums)?,
            "thm7" | "thm52" => {
                let sys = sys.as_ref().ok_or_else(|| {
                    Error::InvalidSystem(format!("config: {prop} needs a system"))
                })?;
                if prop == "thm7" {
                    dispatch!(sys, s => verify_rate_suite(ctx, s, &mut sums))?;
                } else {
                    dispatch!(sys, s => verify_subadditivity_suite(ctx, s, &mut sums))?;
                }
            }
            other => {
                return Err(Error::InvalidSystem(format!("config: unknown property {other}")).into())
            }
        }
    }
    let violations = sums.total_violations();
    let report = json!({
        "units": ctx.units.name(),
        "seed": ctx.seed(),
        "trials": ctx.trials(),
        "properties": sums.by_key.values().collect::<Vec<_>>(),
        "violations": violations,
        "inconclusive": sums.inconclusive,
    });
    ctx.write_json("verify.json", &report)?;
    Ok(if violations > 0 { EXIT_VIOLATION } else { EXIT_OK })
}

fn verify_partition_suite(ctx: &Context, stream: u64, sums: &mut Summaries) -> Result<()> {
    let v = &ctx.cfg.verify;
    let mut rng = ctx.rng(stream);
    for trial in 0..ctx.trials() {
        let space = random_space(&mut rng, v.max_atoms);
        let a = random_partition(&mut rng, &space, v.max_blocks);
        let b = random_partition(&mut rng, &space, v.max_blocks);
        let g = random_partition(&mut rng, &space, v.max_blocks);
        let action = FinitePMPAction::cyclic(space.clone(), random_mass_preserving(&mut rng, &space))?;
        let map = random_mass_preserving(&mut rng, &space);
        let checks = verify_partition_identities(&space, &a, &b, &g, Some(&action), Some(&map))?;
        for c in &checks {
            sums.add(c, ctx.units, || {
                json!({
                    "trial": trial,
                    "masses": space.masses(),
                    "alpha": partition_json(&a),
                    "beta": partition_json(&b),
                    "gamma": partition_json(&g),
                    "slack": c.value,
                })
            });
        }
    }
    Ok(())
}

/// A random increasing chain ending at the discrete partition.
fn random_chain(rng: &mut ChaCha8Rng, space: &FiniteProbabilitySpace, max_blocks: usize) -> Result<Vec<Partition>> {
    let mut chain = vec![random_partition(rng, space, max_blocks)];
    for _ in 0..2 {
        let next = chain
            .last()
            .expect("nonempty")
            .join(&random_partition(rng, space, max_blocks))?;
        chain.push(next);
    }
    chain.push(Partition::discrete(space));
    Ok(chain)
}

fn verify_exhaustion_suite(ctx: &Context, stream: u64, sums: &mut Summaries) -> Result<()> {
    let v = &ctx.cfg.verify;
    let mut rng = ctx.rng(stream);
    for trial in 0..ctx.trials() {
        let space = random_space(&mut rng, v.max_atoms);
        let chain = random_chain(&mut rng, &space, v.max_blocks)?;
        let xi = random_partition(&mut rng, &space, v.max_blocks);
        let c = random_partition(&mut rng, &space, v.max_blocks);
        let r = verify_exhaustion(&space, &chain, &xi, &c)?;
        for check in &r.checks {
            sums.add(check, ctx.units, || json!({ "trial": trial, "values": r.values }));
        }
    }
    Ok(())
}

fn verify_disintegration_suite(ctx: &Context, stream: u64, sums: &mut Summaries) -> Result<()> {
    let v = &ctx.cfg.verify;
    let mut rng = ctx.rng(stream);
    for trial in 0..ctx.trials() {
        let space = random_space(&mut rng, v.max_atoms);
        let a = random_partition(&mut rng, &space, v.max_blocks);
        let c = random_partition(&mut rng, &space, v.max_blocks);
        let set = random_partition(&mut rng, &space, 2).blocks()[0].clone();
        let dis = disintegrate(&space, &c)?;
        let direct = conditional_entropy(&a, &c, &space)?;
        let checks = [
            PropertyCheck::equality(
                "disintegration_reconstruction",
                dis.reconstruct(&set) - space.measure(&set)?,
                MASS_TOLERANCE,
            ),
            PropertyCheck::equality(
                "eq42_two_routes",
                dis.integrated_entropy(&a)? - direct,
                MASS_TOLERANCE,
            ),
            PropertyCheck::equality("thm5_mfunction", m_function(&space, &a, &c)?.residual, MASS_TOLERANCE),
        ];
        for check in &checks {
            sums.add(check, ctx.units, || {
                json!({ "trial": trial, "masses": space.masses(), "alpha": partition_json(&a), "c": partition_json(&c) })
            });
        }
    }
    Ok(())
}

fn verify_rate_suite<S: Configurable>(ctx: &Context, sys: &S, sums: &mut Summaries) -> Result<()> {
    let opts = ctx.engine_options()?;
    let (seq, n_max) = ctx.cfg.folner(sys.dimension())?;
    let alpha = sys.partition(&ctx.cfg.partition)?;
    let beta = sys.partition(ctx.cfg.beta.as_ref().unwrap_or(&PartitionConfig::Trivial))?;
    let sub = sys.subalgebra(&ctx.cfg.subalgebra)?;
    let r = verify_rate_inequalities(sys, &alpha, &beta, &sub, &seq, n_max, &opts)?;
    for c in &r.checks {
        if r.inconclusive {
            sums.add_unscored(c, ctx.units);
        } else {
            sums.add(c, ctx.units, || json!({ "slack": c.value, "detail": c.detail }));
        }
    }
    if r.inconclusive {
        sums.inconclusive.push("thm7".into());
    }
    Ok(())
}

fn verify_subadditivity_suite<S: Configurable>(ctx: &Context, sys: &S, sums: &mut Summaries) -> Result<()> {
    let opts = ctx.engine_options()?;
    let d = sys.dimension();
    let side = ctx.cfg.verify.domain_side.unwrap_or(if d == 1 { 8 } else { 3 });
    let domain = FolnerSubset::cube(d, side);
    let sa = SubadditivityOptions {
        samples: ctx.cfg.verify.samples,
        seed: ctx.seed(),
        ..SubadditivityOptions::default()
    };
    let report = match &ctx.cfg.verify.set_function {
        SetFunctionConfig::BlockEntropy => {
            let alpha = sys.partition(&ctx.cfg.partition)?;
            let sub = sys.subalgebra(&ctx.cfg.subalgebra)?;
            crate::engine::ensure_invariant(sys, &sub)?;
            verify_subadditive_hypotheses(|f| sys.block_entropy(&alpha, f, &sub, &opts), &domain, &sa)?
        }
        SetFunctionConfig::CardinalityPower { exponent } => {
            let e = *exponent;
            verify_subadditive_hypotheses(|f| Ok((f.len() as f64).powf(e)), &domain, &sa)?
        }
    };
    let u = ctx.units;
    sums.add_hypothesis("thm52_monotone", &report.monotonicity, sa.tolerance, u);
    sums.add_hypothesis("thm52_ssa", &report.strong_subadditivity, sa.tolerance, u);
    sums.add_hypothesis("thm51_1", &report.translation_invariance, sa.tolerance, u);
    sums.add_hypothesis("thm51_2", &report.k_cover, sa.tolerance, u);
    Ok(())
}

// ---------------------------------------------------------------- decompose

pub fn cmd_decompose(ctx: &Context) -> std::result::Result<i32, Failure> {
    let sys = ctx.cfg.system()?;
    match sys {
        BuiltSystem::Finite(f) => decompose_finite(ctx, &f),
        BuiltSystem::FiniteMixture(m) => {
            let beta = match &ctx.cfg.beta {
                Some(b) => m.partition(b)?,
                None => m.tag_partition().clone(),
            };
            decompose_job(ctx, m.union(), &beta, m.partition(&ctx.cfg.partition)?, m.subalgebra(&ctx.cfg.subalgebra)?)
        }
        BuiltSystem::ShiftMixture(m) => decompose_shift(ctx, &m),
        BuiltSystem::Shift(s) => decompose_shift(ctx, &ShiftMixture::new(vec![s], vec![1.0])?),
    }
}

fn decompose_finite(ctx: &Context, f: &FinitePMPAction) -> std::result::Result<i32, Failure> {
    let beta = match &ctx.cfg.beta {
        Some(b) => f.partition(b)?,
        None => ergodic_components(f),
    };
    decompose_job(ctx, f, &beta, f.partition(&ctx.cfg.partition)?, f.subalgebra(&ctx.cfg.subalgebra)?)
}

fn decompose_shift(ctx: &Context, m: &ShiftMixture) -> std::result::Result<i32, Failure> {
    let tags = m.tag_space();
    let beta = match &ctx.cfg.beta {
        None | Some(PartitionConfig::Base) | Some(PartitionConfig::Discrete) => m.tag_partition(),
        Some(PartitionConfig::Trivial) => Partition::trivial(tags),
        Some(PartitionConfig::Blocks { blocks }) => Partition::new(tags, blocks.clone())?,
        Some(PartitionConfig::Labels { labels }) => Partition::from_labels(tags, labels)?,
        Some(_) => {
            return Err(Error::Incompatible("mixture fixed partitions are partitions of the tags".into()).into())
        }
    };
    decompose_job(ctx, m, &beta, m.partition(&ctx.cfg.partition)?, m.subalgebra(&ctx.cfg.subalgebra)?)
}

fn decompose_job<S: Decomposable>(
    ctx: &Context,
    sys: &S,
    beta: &Partition,
    alpha: S::Partition,
    sub: crate::systems::SubAlgebraSpec,
) -> std::result::Result<i32, Failure> {
    let u = ctx.units;
    let opts = ctx.engine_options()?;
    let (seq, n_max) = ctx.cfg.folner(sys.dimension())?;
    let r = decompose_entropy(sys, beta, &alpha, &sub, &seq, n_max, &opts)?;
    let report = json!({
        "paper_property": r.paper_property,
        "units": u.name(),
        "lhs": u.x(r.lhs),
        "rhs": u.x(r.rhs),
        "gap": u.x(r.gap),
        "converged": r.converged,
        "truncated": r.truncated,
        "components": r.components.iter().map(|c| json!({
            "weight": c.weight,
            "estimate": u.x(c.estimate),
            "converged": c.converged,
        })).collect::<Vec<_>>(),
        "trace_gaps": r.trace_gaps().into_iter().map(|(size, gap)| json!({
            "F_size": size,
            "gap": u.x(gap),
        })).collect::<Vec<_>>(),
    });
    ctx.write_json("decompose.json", &report)?;
    Ok(if r.truncated { EXIT_RESOURCE } else { EXIT_OK })
}

// ---------------------------------------------------------------- folner

pub fn cmd_folner(ctx: &Context) -> std::result::Result<i32, Failure> {
    let default_d = match &ctx.cfg.system {
        Some(_) => ctx.cfg.system()?.dimension(),
        None => 1,
    };
    let (seq, n_max) = ctx.cfg.folner(default_d)?;
    let d = seq.dim();
    let translations: Vec<GroupElement> = match &ctx.cfg.translations {
        Some(ts) => ts.iter().map(|t| GroupElement::new(t.clone())).collect(),
        None => (0..d).map(|i| GroupElement::axis(d, i, 1)).collect(),
    };
    let io = |e: csv::Error| Error::InvalidSystem(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "F_size", "generator", "defect"]).map_err(io)?;
    for n in 1..=n_max {
        let f = seq.box_at(n)?;
        for (i, g) in translations.iter().enumerate() {
            let defect = f.invariance_defect(g)?;
            w.write_record([n.to_string(), f.len().to_string(), i.to_string(), defect.to_string()])
                .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidSystem(format!("csv: {e}")))?;
    ctx.write("folner.csv", &bytes)?;
    Ok(EXIT_OK)
}
