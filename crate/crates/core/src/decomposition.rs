//! Fixed partitions, restriction to invariant pieces, and the weighted-sum
//! form of the entropy decomposition over a fixed partition.

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::engine::{entropy_rate, EngineOptions, EntropySystem, RateTrace};
use crate::error::{Error, Result};
use crate::group::FolnerSequence;
use crate::measure::{conditional_entropy, FiniteProbabilitySpace, Partition, MASS_TOLERANCE};
use crate::systems::{FinitePMPAction, ShiftMixture, SubAlgebraSpec};

/// A block moved off itself by a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FixedWitness {
    pub block: usize,
    pub generator: usize,
    pub inverse: bool,
}

/// First block of `beta` that some generator (or inverse) does not map onto
/// itself.
pub fn fixed_partition_witness(
    system: &FinitePMPAction,
    beta: &Partition,
    with_inverses: bool,
) -> Result<Option<FixedWitness>> {
    let space = system.space();
    beta.ensure_on(space)?;
    let labels = beta.labels(space)?;
    for (gi, g) in system.generators().iter().enumerate() {
        let mut maps = vec![(g.clone(), false)];
        if with_inverses {
            maps.push((g.inverse(), true));
        }
        for (m, inverse) in maps {
            if let Some(i) = (0..space.len()).find(|&i| labels[m.apply(i)] != labels[i]) {
                return Ok(Some(FixedWitness {
                    block: labels[i],
                    generator: gi,
                    inverse,
                }));
            }
        }
    }
    Ok(None)
}

/// Every block of `beta` is setwise invariant under the generators.
pub fn fixed_partition_check(
    system: &FinitePMPAction,
    beta: &Partition,
    with_inverses: bool,
) -> Result<bool> {
    fixed_partition_witness(system, beta, with_inverses).map(|w| w.is_none())
}

/// Orbits of the generated permutation group.
pub fn ergodic_components(system: &FinitePMPAction) -> Partition {
    let space = system.space();
    let mut uf = UnionFind::<usize>::new(space.len());
    for g in system.generators() {
        for i in 0..space.len() {
            uf.union(i, g.apply(i));
        }
    }
    let roots = uf.into_labeling();
    Partition::from_labels(space, &roots).expect("labels cover the space")
}

/// Systems that split along a fixed partition into restricted systems of the
/// same kind.
pub trait Decomposable: EntropySystem + Sized {
    /// The space that fixed partitions live on.
    fn fixed_space(&self) -> FiniteProbabilitySpace;

    fn fixed_witness(&self, beta: &Partition, with_inverses: bool) -> Result<Option<FixedWitness>>;

    /// The restriction to a positive-mass block of a fixed partition, with α
    /// and 𝒞 restricted along.
    fn restrict(
        &self,
        block: &[usize],
        alpha: &Self::Partition,
        sub: &SubAlgebraSpec,
    ) -> Result<(Self, Self::Partition, SubAlgebraSpec)>;

    /// 𝒞 is comparable with β.
    fn compatible(&self, beta: &Partition, sub: &SubAlgebraSpec) -> Result<bool>;
}

impl Decomposable for FinitePMPAction {
    fn fixed_space(&self) -> FiniteProbabilitySpace {
        self.space().clone()
    }

    fn fixed_witness(&self, beta: &Partition, with_inverses: bool) -> Result<Option<FixedWitness>> {
        fixed_partition_witness(self, beta, with_inverses)
    }

    fn restrict(
        &self,
        block: &[usize],
        alpha: &Partition,
        sub: &SubAlgebraSpec,
    ) -> Result<(Self, Partition, SubAlgebraSpec)> {
        let part = self.restrict_to(block)?;
        let alpha_b = alpha.trace(part.space())?;
        let sub_b = match sub {
            SubAlgebraSpec::InvariantPartition { partition } => {
                SubAlgebraSpec::invariant_partition(partition.trace(part.space())?)
            }
            other => other.clone(),
        };
        Ok((part, alpha_b, sub_b))
    }

    fn compatible(&self, beta: &Partition, sub: &SubAlgebraSpec) -> Result<bool> {
        match sub {
            SubAlgebraSpec::Trivial => Ok(true),
            SubAlgebraSpec::InvariantPartition { partition } => {
                let s = self.space();
                Ok(beta.is_coarser(partition, s)? || partition.is_coarser(beta, s)?)
            }
            SubAlgebraSpec::SymbolFactor { .. } => Ok(false),
        }
    }
}

impl Decomposable for ShiftMixture {
    fn fixed_space(&self) -> FiniteProbabilitySpace {
        self.tag_space().clone()
    }

    fn fixed_witness(&self, beta: &Partition, _with_inverses: bool) -> Result<Option<FixedWitness>> {
        // The shift preserves every tag.
        beta.ensure_on(self.tag_space())?;
        Ok(None)
    }

    fn restrict(
        &self,
        block: &[usize],
        alpha: &Self::Partition,
        sub: &SubAlgebraSpec,
    ) -> Result<(Self, Self::Partition, SubAlgebraSpec)> {
        Ok((self.sub_mixture(block)?, alpha.clone(), sub.clone()))
    }

    fn compatible(&self, beta: &Partition, sub: &SubAlgebraSpec) -> Result<bool> {
        beta.ensure_on(self.tag_space())?;
        Ok(!matches!(sub, SubAlgebraSpec::InvariantPartition { .. }))
    }
}

/// The restricted systems over the positive-mass blocks of a fixed partition.
#[derive(Clone, Debug)]
pub struct ComponentDecomposition<S: Decomposable> {
    pub beta: Partition,
    pub blocks: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
    pub components: Vec<S>,
    pub alphas: Vec<S::Partition>,
    pub subs: Vec<SubAlgebraSpec>,
}

pub fn decompose<S: Decomposable>(
    system: &S,
    beta: &Partition,
    alpha: &S::Partition,
    sub: &SubAlgebraSpec,
) -> Result<ComponentDecomposition<S>> {
    let space = system.fixed_space();
    beta.ensure_on(&space)?;
    if let Some(w) = system.fixed_witness(beta, true)? {
        return Err(Error::NotFixed {
            block: w.block,
            generator: w.generator,
        });
    }
    if !system.check_invariant(sub, true)? {
        return Err(Error::Incompatible(
            "conditioning algebra is not invariant in both directions".into(),
        ));
    }
    if !system.compatible(beta, sub)? {
        return Err(Error::Incompatible(
            "conditioning partition is not comparable with the fixed partition".into(),
        ));
    }
    let masses = beta.block_masses(&space)?;
    let mut out = ComponentDecomposition {
        beta: beta.clone(),
        blocks: Vec::new(),
        weights: Vec::new(),
        components: Vec::new(),
        alphas: Vec::new(),
        subs: Vec::new(),
    };
    for (block, &mass) in beta.blocks().iter().zip(&masses) {
        if mass <= 0.0 {
            continue;
        }
        let (c, a, s) = system.restrict(block, alpha, sub)?;
        out.blocks.push(block.clone());
        out.weights.push(mass);
        out.components.push(c);
        out.alphas.push(a);
        out.subs.push(s);
    }
    let total: f64 = out.weights.iter().sum();
    debug_assert!((total - 1.0).abs() <= MASS_TOLERANCE);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentEstimate {
    pub weight: f64,
    pub estimate: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub paper_property: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub converged: bool,
    pub truncated: bool,
    pub components: Vec<ComponentEstimate>,
    #[serde(skip)]
    pub lhs_trace: RateTrace,
    #[serde(skip)]
    pub component_traces: Vec<RateTrace>,
}

impl DecompositionReport {
    /// |rate_n − rhs| along the whole-system trace.
    pub fn trace_gaps(&self) -> Vec<(usize, f64)> {
        self.lhs_trace
            .entries
            .iter()
            .map(|e| (e.f_size, (e.rate - self.rhs).abs()))
            .collect()
    }
}

/// lhs: rate estimate on the whole system; rhs: Σ_B μ(B)·(rate estimate on B).
pub fn decompose_entropy<S: Decomposable>(
    system: &S,
    beta: &Partition,
    alpha: &S::Partition,
    sub: &SubAlgebraSpec,
    sequence: &FolnerSequence,
    n_max: usize,
    opts: &EngineOptions,
) -> Result<DecompositionReport> {
    let parts = decompose(system, beta, alpha, sub)?;
    let whole = entropy_rate(system, alpha, sub, sequence, n_max, opts)?;
    let mut components = Vec::new();
    let mut traces = Vec::new();
    let mut rhs = 0.0;
    let mut converged = whole.report.converged;
    let mut truncated = whole.truncated;
    for i in 0..parts.components.len() {
        let out = entropy_rate(
            &parts.components[i],
            &parts.alphas[i],
            &parts.subs[i],
            sequence,
            n_max,
            opts,
        )?;
        rhs += parts.weights[i] * out.report.estimate;
        converged &= out.report.converged;
        truncated |= out.truncated;
        components.push(ComponentEstimate {
            weight: parts.weights[i],
            estimate: out.report.estimate,
            converged: out.report.converged,
        });
        traces.push(out.trace);
    }
    let lhs = whole.report.estimate;
    Ok(DecompositionReport {
        paper_property: "thm31_decomp",
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        converged,
        truncated,
        components,
        lhs_trace: whole.trace,
        component_traces: traces,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MFunction {
    /// m(x) per atom, None for atoms in a null 𝒞-block
    pub values: Vec<Option<f64>>,
    /// atom ids left out because their 𝒞-block is null
    pub excluded: Vec<usize>,
    /// −Σ μ(x) log m(x) over positive-mass atoms
    pub integral: f64,
    pub conditional_entropy: f64,
    pub residual: f64,
    pub holds: bool,
}

/// m(x) = μ_{𝒞(x)}(α(x) ∩ 𝒞(x)) and the check −∫ log m dμ = H(α|𝒞).
pub fn m_function(
    space: &FiniteProbabilitySpace,
    alpha: &Partition,
    c: &Partition,
) -> Result<MFunction> {
    let a_labels = alpha.labels(space)?;
    let c_labels = c.labels(space)?;
    let masses = space.masses();
    let mut c_mass = vec![0.0; c.len()];
    let mut joint = std::collections::HashMap::new();
    for i in 0..space.len() {
        c_mass[c_labels[i]] += masses[i];
        *joint.entry((a_labels[i], c_labels[i])).or_insert(0.0) += masses[i];
    }
    let mut values = Vec::with_capacity(space.len());
    let mut excluded = Vec::new();
    let mut integral = 0.0;
    for i in 0..space.len() {
        let cm = c_mass[c_labels[i]];
        if cm <= 0.0 {
            values.push(None);
            excluded.push(space.atom_ids()[i]);
            continue;
        }
        let m = joint[&(a_labels[i], c_labels[i])] / cm;
        values.push(Some(m));
        if masses[i] > 0.0 {
            integral -= masses[i] * m.ln();
        }
    }
    let h = conditional_entropy(alpha, c, space)?;
    let residual = integral - h;
    Ok(MFunction {
        values,
        excluded,
        integral,
        conditional_entropy: h,
        residual,
        holds: residual.abs() <= MASS_TOLERANCE,
    })
}
