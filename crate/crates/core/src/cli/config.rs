//! Experiment configuration: one JSON document, `"schema": 1`.

use std::path::PathBuf;

use serde::Deserialize;

use crate::decomposition::ergodic_components;
use crate::engine::{Conditioning, EngineOptions, EntropySystem, DEFAULT_RATE_TOLERANCE};
use crate::error::{Error, Result};
use crate::group::{FolnerSequence, FolnerSubset, GroupElement};
use crate::measure::{FiniteProbabilitySpace, Partition};
use crate::systems::{
    mixture, stationarity_residual, CellPartition, FiniteMixture, FinitePMPAction, MixtureSystem,
    Permutation, ShiftMixture, ShiftSystem, SubAlgebraSpec, SystemComponent,
    DEFAULT_ENUMERATION_CAP, DEFAULT_GAP_CAP, STATIONARITY_TOLERANCE,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(default)]
    pub system: Option<SystemConfig>,
    #[serde(default)]
    pub subalgebra: SubAlgebraConfig,
    #[serde(default)]
    pub partition: PartitionConfig,
    #[serde(default)]
    pub beta: Option<PartitionConfig>,
    #[serde(default)]
    pub folner: Option<FolnerConfig>,
    #[serde(default)]
    pub conditioning: ConditioningConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub log_base: LogBase,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub output: OutputConfig,
    /// Translations swept by the folner verb; the axis generators by default.
    #[serde(default)]
    pub translations: Option<Vec<Vec<i64>>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    Bernoulli {
        #[serde(default = "one")]
        d: usize,
        p: Vec<f64>,
    },
    Markov {
        transition: Vec<Vec<f64>>,
        #[serde(default)]
        pi: Option<Vec<f64>>,
    },
    Finite {
        masses: Vec<f64>,
        #[serde(default)]
        atoms: Option<Vec<usize>>,
        generators: Vec<Vec<usize>>,
    },
    Mixture {
        components: Vec<SystemConfig>,
        weights: Vec<f64>,
    },
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubAlgebraConfig {
    #[default]
    Trivial,
    InvariantPartition {
        blocks: Vec<Vec<usize>>,
    },
    /// The orbit partition of a finite action.
    Orbits,
    SymbolFactor {
        map: Vec<usize>,
    },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionConfig {
    /// The generating partition: atoms of a finite space, symbols of a shift.
    #[default]
    Base,
    Trivial,
    Discrete,
    Blocks {
        blocks: Vec<Vec<usize>>,
    },
    Labels {
        labels: Vec<usize>,
    },
    /// A partition of the alphabet, one cell label per symbol.
    Cells {
        map: Vec<usize>,
    },
    /// The orbit partition of a finite action.
    Orbits,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    #[default]
    Linear,
    Doubling,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FolnerConfig {
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub sides: Option<Vec<usize>>,
    pub n_max: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConditioningConfig {
    Exact,
    Margin {
        r: usize,
    },
    Window {
        elements: Vec<Vec<i64>>,
    },
}

impl Default for ConditioningConfig {
    fn default() -> Self {
        Self::Margin { r: 0 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_rate_tol")]
    pub rate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rate: DEFAULT_RATE_TOLERANCE,
        }
    }
}

fn default_rate_tol() -> f64 {
    DEFAULT_RATE_TOLERANCE
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
pub enum LogBase {
    #[default]
    #[serde(rename = "e")]
    Natural,
    #[serde(rename = "2")]
    Two,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub properties: Option<Vec<String>>,
    #[serde(default = "default_max_atoms")]
    pub max_atoms: usize,
    #[serde(default = "default_max_blocks")]
    pub max_blocks: usize,
    #[serde(default)]
    pub set_function: SetFunctionConfig,
    #[serde(default)]
    pub domain_side: Option<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            properties: None,
            max_atoms: default_max_atoms(),
            max_blocks: default_max_blocks(),
            set_function: SetFunctionConfig::default(),
            domain_side: None,
            samples: default_samples(),
        }
    }
}

fn default_max_atoms() -> usize {
    10
}

fn default_max_blocks() -> usize {
    4
}

fn default_samples() -> usize {
    1000
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetFunctionConfig {
    /// F ↦ H(α^F | 𝒞) on the configured system.
    #[default]
    BlockEntropy,
    /// F ↦ |F|^exponent; fails subadditivity for exponent > 1.
    CardinalityPower { exponent: f64 },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    #[serde(default)]
    pub enumeration_cap: Option<u64>,
    #[serde(default)]
    pub gap_cap: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::InvalidSystem(format!("config: {e}")))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(Error::InvalidSystem(format!(
                "config: unsupported schema {}, expected {SCHEMA_VERSION}",
                cfg.schema
            )));
        }
        if !(cfg.tolerances.rate.is_finite() && cfg.tolerances.rate > 0.0) {
            return Err(Error::InvalidSystem("config: rate tolerance must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn system(&self) -> Result<BuiltSystem> {
        let spec = self
            .system
            .as_ref()
            .ok_or_else(|| Error::InvalidSystem("config: no system given".into()))?;
        build_system(spec)
    }

    pub fn engine_options(&self) -> Result<EngineOptions> {
        let conditioning = match &self.conditioning {
            ConditioningConfig::Exact => Conditioning::Exact,
            ConditioningConfig::Margin { r } => Conditioning::Margin(*r),
            ConditioningConfig::Window { elements } => {
                let d = elements.first().map_or(1, |e| e.len());
                Conditioning::Window(FolnerSubset::new(
                    d,
                    elements.iter().map(|e| GroupElement::new(e.clone())),
                )?)
            }
        };
        Ok(EngineOptions {
            conditioning,
            enumeration_cap: self.limits.enumeration_cap.unwrap_or(DEFAULT_ENUMERATION_CAP),
            gap_cap: self.limits.gap_cap.unwrap_or(DEFAULT_GAP_CAP),
            tol: self.tolerances.rate,
        })
    }

    /// The Følner schedule and n_max; `d` defaults to `default_d`.
    pub fn folner(&self, default_d: usize) -> Result<(FolnerSequence, usize)> {
        let f = self
            .folner
            .as_ref()
            .ok_or_else(|| Error::InvalidSystem("config: no folner schedule given".into()))?;
        let d = f.d.unwrap_or(default_d);
        if f.n_max == 0 {
            return Err(Error::InvalidSystem("config: n_max must be at least 1".into()));
        }
        let seq = match &f.sides {
            Some(sides) => FolnerSequence::new(d, sides.clone())?,
            None => match f.schedule {
                Schedule::Linear => FolnerSequence::linear(d, f.n_max)?,
                Schedule::Doubling => FolnerSequence::doubling(d, f.n_max)?,
            },
        };
        if f.n_max > seq.len() {
            return Err(Error::OutOfSchedule {
                index: f.n_max,
                len: seq.len(),
            });
        }
        Ok((seq, f.n_max))
    }
}

/// A validated system of one of the supported kinds.
#[derive(Clone, Debug)]
pub enum BuiltSystem {
    Finite(FinitePMPAction),
    Shift(ShiftSystem),
    ShiftMixture(ShiftMixture),
    FiniteMixture(FiniteMixture),
}

impl BuiltSystem {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Finite(_) => "finite",
            Self::Shift(s) if s.is_bernoulli() => "bernoulli",
            Self::Shift(_) => "markov",
            Self::ShiftMixture(_) | Self::FiniteMixture(_) => "mixture",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Finite(s) => EntropySystem::dimension(s),
            Self::Shift(s) => EntropySystem::dimension(s),
            Self::ShiftMixture(s) => EntropySystem::dimension(s),
            Self::FiniteMixture(s) => EntropySystem::dimension(s),
        }
    }
}

fn build_component(spec: &SystemConfig) -> Result<SystemComponent> {
    match build_system(spec)? {
        BuiltSystem::Finite(f) => Ok(SystemComponent::Finite(f)),
        BuiltSystem::Shift(s) => Ok(SystemComponent::Shift(s)),
        _ => Err(Error::InvalidSystem("nested mixtures are not supported".into())),
    }
}

pub fn build_system(spec: &SystemConfig) -> Result<BuiltSystem> {
    match spec {
        SystemConfig::Bernoulli { d, p } => ShiftSystem::bernoulli(*d, p.clone()).map(BuiltSystem::Shift),
        SystemConfig::Markov { transition, pi } => {
            let sys = match pi {
                Some(pi) => {
                    if pi.len() == transition.len()
                        && transition.iter().all(|r| r.len() == pi.len())
                    {
                        let residual = stationarity_residual(pi, transition);
                        if residual > STATIONARITY_TOLERANCE {
                            return Err(Error::InvalidSystem(format!(
                                "stationarity residual {residual:e} exceeds {STATIONARITY_TOLERANCE:e}"
                            )));
                        }
                    }
                    ShiftSystem::markov(pi.clone(), transition.clone())?
                }
                None => ShiftSystem::markov_stationary(transition.clone())?,
            };
            Ok(BuiltSystem::Shift(sys))
        }
        SystemConfig::Finite {
            masses,
            atoms,
            generators,
        } => {
            let space = match atoms {
                Some(ids) => FiniteProbabilitySpace::new(ids.clone(), masses.clone())?,
                None => FiniteProbabilitySpace::from_masses(masses.clone())?,
            };
            let generators = generators
                .iter()
                .map(|g| Permutation::new(g.clone()))
                .collect::<Result<Vec<_>>>()?;
            FinitePMPAction::new(space, generators).map(BuiltSystem::Finite)
        }
        SystemConfig::Mixture {
            components,
            weights,
        } => {
            let parts = components
                .iter()
                .map(build_component)
                .collect::<Result<Vec<_>>>()?;
            Ok(match mixture(parts, weights.clone())? {
                MixtureSystem::Shift(m) => BuiltSystem::ShiftMixture(m),
                MixtureSystem::Finite(m) => BuiltSystem::FiniteMixture(m),
            })
        }
    }
}

/// Turning configuration into partitions and conditioning algebras of a
/// particular system kind.
pub trait Configurable: EntropySystem {
    fn partition(&self, cfg: &PartitionConfig) -> Result<Self::Partition>;
    fn subalgebra(&self, cfg: &SubAlgebraConfig) -> Result<SubAlgebraSpec>;
}

fn finite_partition(sys: &FinitePMPAction, cfg: &PartitionConfig) -> Result<Partition> {
    let space = sys.space();
    match cfg {
        PartitionConfig::Base | PartitionConfig::Discrete => Ok(Partition::discrete(space)),
        PartitionConfig::Trivial => Ok(Partition::trivial(space)),
        PartitionConfig::Blocks { blocks } => Partition::new(space, blocks.clone()),
        PartitionConfig::Labels { labels } => Partition::from_labels(space, labels),
        PartitionConfig::Orbits => Ok(ergodic_components(sys)),
        PartitionConfig::Cells { .. } => Err(Error::Incompatible(
            "cell partitions apply to shift systems".into(),
        )),
    }
}

fn finite_subalgebra(sys: &FinitePMPAction, cfg: &SubAlgebraConfig) -> Result<SubAlgebraSpec> {
    match cfg {
        SubAlgebraConfig::Trivial => Ok(SubAlgebraSpec::Trivial),
        SubAlgebraConfig::InvariantPartition { blocks } => Ok(SubAlgebraSpec::invariant_partition(
            Partition::new(sys.space(), blocks.clone())?,
        )),
        SubAlgebraConfig::Orbits => Ok(SubAlgebraSpec::invariant_partition(ergodic_components(sys))),
        SubAlgebraConfig::SymbolFactor { .. } => Err(Error::Incompatible(
            "symbol factors apply to shift systems".into(),
        )),
    }
}

fn shift_partition(alphabet: usize, cfg: &PartitionConfig) -> Result<CellPartition> {
    match cfg {
        PartitionConfig::Base | PartitionConfig::Discrete => Ok(CellPartition::symbols(alphabet)),
        PartitionConfig::Trivial => Ok(CellPartition::trivial(alphabet)),
        PartitionConfig::Cells { map } | PartitionConfig::Labels { labels: map } => {
            if map.len() != alphabet {
                return Err(Error::InvalidPartition(format!(
                    "cell map has {} entries, alphabet has {alphabet}",
                    map.len()
                )));
            }
            CellPartition::new(map)
        }
        PartitionConfig::Blocks { .. } | PartitionConfig::Orbits => Err(Error::Incompatible(
            "shift partitions are given as cell maps".into(),
        )),
    }
}

fn shift_subalgebra(alphabet: usize, cfg: &SubAlgebraConfig) -> Result<SubAlgebraSpec> {
    match cfg {
        SubAlgebraConfig::Trivial => Ok(SubAlgebraSpec::Trivial),
        SubAlgebraConfig::SymbolFactor { map } => {
            if map.len() != alphabet {
                return Err(Error::Incompatible(format!(
                    "factor map has {} entries, alphabet has {alphabet}",
                    map.len()
                )));
            }
            SubAlgebraSpec::symbol_factor(map)
        }
        _ => Err(Error::Incompatible(
            "shift systems condition on symbol factors".into(),
        )),
    }
}

impl Configurable for FinitePMPAction {
    fn partition(&self, cfg: &PartitionConfig) -> Result<Partition> {
        finite_partition(self, cfg)
    }

    fn subalgebra(&self, cfg: &SubAlgebraConfig) -> Result<SubAlgebraSpec> {
        finite_subalgebra(self, cfg)
    }
}

impl Configurable for FiniteMixture {
    fn partition(&self, cfg: &PartitionConfig) -> Result<Partition> {
        finite_partition(self.union(), cfg)
    }

    fn subalgebra(&self, cfg: &SubAlgebraConfig) -> Result<SubAlgebraSpec> {
        finite_subalgebra(self.union(), cfg)
    }
}

impl Configurable for ShiftSystem {
    fn partition(&self, cfg: &PartitionConfig) -> Result<CellPartition> {
        shift_partition(self.alphabet(), cfg)
    }

    fn subalgebra(&self, cfg: &SubAlgebraConfig) -> Result<SubAlgebraSpec> {
        shift_subalgebra(self.alphabet(), cfg)
    }
}

impl Configurable for ShiftMixture {
    fn partition(&self, cfg: &PartitionConfig) -> Result<CellPartition> {
        shift_partition(self.alphabet(), cfg)
    }

    fn subalgebra(&self, cfg: &SubAlgebraConfig) -> Result<SubAlgebraSpec> {
        shift_subalgebra(self.alphabet(), cfg)
    }
}
