use super::exchangeable::{product_mixture_entropy, SiteGroup};
use super::{Conditioning, EngineOptions, EntropySystem};
use crate::error::{Error, Result};
use crate::group::{FolnerSubset, GroupElement};
use crate::measure::{conditional_entropy, fiber_entropy, Partition};
use crate::systems::{
    enumerate_patterns, CellPartition, FiniteMixture, FinitePMPAction, ShiftMixture, ShiftSystem,
    Site, SubAlgebraSpec,
};

impl FinitePMPAction {
    fn conditioning_partition(&self, sub: &SubAlgebraSpec) -> Result<Partition> {
        match sub {
            SubAlgebraSpec::Trivial => Ok(Partition::trivial(self.space())),
            SubAlgebraSpec::InvariantPartition { partition } => {
                if partition.belongs_to(self.space()) {
                    Ok(partition.clone())
                } else {
                    Err(Error::SpaceMismatch)
                }
            }
            SubAlgebraSpec::SymbolFactor { .. } => Err(Error::Incompatible(
                "symbol factors apply to shift systems only".into(),
            )),
        }
    }

    /// α^F = ⋁_{g∈F} T_g^{-1} α.
    pub fn window_join(&self, alpha: &Partition, window: &FolnerSubset) -> Result<Partition> {
        window
            .iter()
            .try_fold(Partition::trivial(self.space()), |acc, g| {
                acc.join(&self.act(&g.neg(), alpha)?)
            })
    }
}

impl EntropySystem for FinitePMPAction {
    type Partition = Partition;

    fn dimension(&self) -> usize {
        FinitePMPAction::dimension(self)
    }

    fn trivial_partition(&self) -> Partition {
        Partition::trivial(self.space())
    }

    fn generating_partition(&self) -> Partition {
        Partition::discrete(self.space())
    }

    fn join(&self, a: &Partition, b: &Partition) -> Result<Partition> {
        a.join(b)
    }

    fn is_coarser(&self, a: &Partition, b: &Partition) -> Result<bool> {
        a.is_coarser(b, self.space())
    }

    fn check_invariant(&self, sub: &SubAlgebraSpec, with_inverses: bool) -> Result<bool> {
        let c = self.conditioning_partition(sub)?;
        for g in self.generators() {
            let mut maps = vec![g.clone()];
            if with_inverses {
                maps.push(g.inverse());
            }
            for m in maps {
                let image = m.image(self.space(), &c)?;
                if !image.is_coarser(&c, self.space())? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn block_entropy(
        &self,
        alpha: &Partition,
        window: &FolnerSubset,
        sub: &SubAlgebraSpec,
        _opts: &EngineOptions,
    ) -> Result<f64> {
        check_window_dim(window, self.dimension())?;
        let c = self.conditioning_partition(sub)?;
        let joined = self.window_join(alpha, window)?;
        conditional_entropy(&joined, &c, self.space())
    }

    fn block_entropy_given(
        &self,
        alpha: &Partition,
        beta: &Partition,
        window: &FolnerSubset,
        sub: &SubAlgebraSpec,
        _opts: &EngineOptions,
    ) -> Result<f64> {
        check_window_dim(window, self.dimension())?;
        let c = self.conditioning_partition(sub)?;
        let a = self.window_join(alpha, window)?;
        let b = self.window_join(beta, window)?;
        conditional_entropy(&a, &b.join(&c)?, self.space())
    }

    fn bounded_numerator(&self) -> Option<f64> {
        Some((self.space().len() as f64).ln())
    }
}

impl EntropySystem for FiniteMixture {
    type Partition = Partition;

    fn dimension(&self) -> usize {
        self.union().dimension()
    }

    fn trivial_partition(&self) -> Partition {
        self.union().trivial_partition()
    }

    fn generating_partition(&self) -> Partition {
        self.union().generating_partition()
    }

    fn join(&self, a: &Partition, b: &Partition) -> Result<Partition> {
        a.join(b)
    }

    fn is_coarser(&self, a: &Partition, b: &Partition) -> Result<bool> {
        self.union().is_coarser(a, b)
    }

    fn check_invariant(&self, sub: &SubAlgebraSpec, with_inverses: bool) -> Result<bool> {
        self.union().check_invariant(sub, with_inverses)
    }

    fn block_entropy(
        &self,
        alpha: &Partition,
        window: &FolnerSubset,
        sub: &SubAlgebraSpec,
        opts: &EngineOptions,
    ) -> Result<f64> {
        self.union().block_entropy(alpha, window, sub, opts)
    }

    fn block_entropy_given(
        &self,
        alpha: &Partition,
        beta: &Partition,
        window: &FolnerSubset,
        sub: &SubAlgebraSpec,
        opts: &EngineOptions,
    ) -> Result<f64> {
        self.union().block_entropy_given(alpha, beta, window, sub, opts)
    }

    fn bounded_numerator(&self) -> Option<f64> {
        self.union().bounded_numerator()
    }
}

fn check_window_dim(window: &FolnerSubset, d: usize) -> Result<()> {
    if window.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: window.dim(),
        });
    }
    Ok(())
}

/// The non-trivial symbol factor of `sub`, if any.
fn factor_of(sub: &SubAlgebraSpec, alphabet: usize) -> Result<Option<&CellPartition>> {
    match sub {
        SubAlgebraSpec::Trivial => Ok(None),
        SubAlgebraSpec::SymbolFactor { factor } => {
            if factor.alphabet() != alphabet {
                return Err(Error::Incompatible(format!(
                    "factor map covers {} symbols, alphabet has {alphabet}",
                    factor.alphabet()
                )));
            }
            Ok((!factor.is_trivial()).then_some(factor))
        }
        SubAlgebraSpec::InvariantPartition { .. } => Err(Error::Incompatible(
            "invariant partitions apply to finite systems only".into(),
        )),
    }
}

/// The conditioning window W ⊇ F for a shift with a symbol factor.
fn conditioning_window(
    window: &FolnerSubset,
    components: &[(f64, &ShiftSystem)],
    opts: &EngineOptions,
) -> Result<FolnerSubset> {
    match &opts.conditioning {
        Conditioning::Margin(r) => Ok(window.thicken(*r)),
        Conditioning::Window(w) => {
            if window.is_subset(w) {
                Ok(w.clone())
            } else {
                Err(Error::Incompatible(
                    "conditioning window must contain the block window".into(),
                ))
            }
        }
        Conditioning::Exact => {
            if components.len() == 1 && components[0].1.is_bernoulli() {
                Ok(window.clone())
            } else {
                Err(Error::Incompatible(
                    "exact conditioning on a symbol factor needs a single Bernoulli measure; \
                     supply a conditioning window"
                        .into(),
                ))
            }
        }
    }
}

fn shift_block_entropy(
    components: &[(f64, &ShiftSystem)],
    alpha: &CellPartition,
    window: &FolnerSubset,
    sub: &SubAlgebraSpec,
    opts: &EngineOptions,
) -> Result<f64> {
    let first = components[0].1;
    check_window_dim(window, first.dimension())?;
    if alpha.alphabet() != first.alphabet() {
        return Err(Error::SpaceMismatch);
    }
    let factor = factor_of(sub, first.alphabet())?;
    let cond_window = match factor {
        Some(_) => conditioning_window(window, components, opts)?,
        None => window.clone(),
    };
    let weights: Vec<f64> = components.iter().map(|(w, _)| *w).collect();

    if components.iter().all(|(_, s)| s.is_bernoulli()) {
        let masses = |cells: &CellPartition| -> Vec<Vec<f64>> {
            components
                .iter()
                .map(|(_, s)| cells.cell_masses(s.marginal()))
                .collect()
        };
        return match factor {
            None => product_mixture_entropy(
                &weights,
                &[SiteGroup {
                    sites: window.len(),
                    cell_masses: masses(alpha),
                }],
                opts.enumeration_cap,
            ),
            Some(phi) => {
                let joint = alpha.join(phi)?;
                let both = product_mixture_entropy(
                    &weights,
                    &[
                        SiteGroup {
                            sites: window.len(),
                            cell_masses: masses(&joint),
                        },
                        SiteGroup {
                            sites: cond_window.len() - window.len(),
                            cell_masses: masses(phi),
                        },
                    ],
                    opts.enumeration_cap,
                )?;
                let given = product_mixture_entropy(
                    &weights,
                    &[SiteGroup {
                        sites: cond_window.len(),
                        cell_masses: masses(phi),
                    }],
                    opts.enumeration_cap,
                )?;
                Ok((both - given).max(0.0))
            }
        };
    }

    let positions: Vec<GroupElement> = cond_window.iter().cloned().collect();
    let sites: Vec<Site> = match factor {
        None => vec![Site::unconditioned(alpha.clone()); positions.len()],
        Some(phi) => {
            let inside = Site::conditioned(alpha.join(phi)?, phi);
            let outside = Site::conditioned(phi.clone(), phi);
            positions
                .iter()
                .map(|g| {
                    if window.contains(g) {
                        inside.clone()
                    } else {
                        outside.clone()
                    }
                })
                .collect()
        }
    };
    let mut cells = Vec::new();
    enumerate_patterns(
        components,
        &positions,
        &sites,
        opts.enumeration_cap,
        opts.gap_cap,
        |_, key, mass| cells.push((key, mass)),
    )?;
    Ok(fiber_entropy(cells))
}

fn shift_conditioning_size(
    components: &[(f64, &ShiftSystem)],
    window: &FolnerSubset,
    sub: &SubAlgebraSpec,
    opts: &EngineOptions,
) -> Option<usize> {
    match factor_of(sub, components[0].1.alphabet()) {
        Ok(Some(_)) => conditioning_window(window, components, opts)
            .ok()
            .map(|w| w.len()),
        _ => None,
    }
}

fn shift_check_invariant(sub: &SubAlgebraSpec, alphabet: usize) -> Result<bool> {
    factor_of(sub, alphabet).map(|_| true)
}

fn positive_symbols(marginal: &[f64]) -> Vec<bool> {
    marginal.iter().map(|&p| p > 0.0).collect()
}

impl EntropySystem for ShiftSystem {
    type Partition = CellPartition;

    fn dimension(&self) -> usize {
        ShiftSystem::dimension(self)
    }

    fn trivial_partition(&self) -> CellPartition {
        CellPartition::trivial(self.alphabet())
    }

    fn generating_partition(&self) -> CellPartition {
        self.base_partition()
    }

    fn join(&self, a: &CellPartition, b: &CellPartition) -> Result<CellPartition> {
        a.join(b)
    }

    fn is_coarser(&self, a: &CellPartition, b: &CellPartition) -> Result<bool> {
        a.is_coarser(b, &positive_symbols(self.marginal()))
    }

    fn check_invariant(&self, sub: &SubAlgebraSpec, _with_inverses: bool) -> Result<bool> {
        shift_check_invariant(sub, self.alphabet())
    }

    fn block_entropy(
        &self,
        alpha: &CellPartition,
        window: &FolnerSubset,
        sub: &SubAlgebraSpec,
        opts: &EngineOptions,
    ) -> Result<f64> {
        shift_block_entropy(&[(1.0, self)], alpha, window, sub, opts)
    }

    fn conditioning_size(
        &self,
        window: &FolnerSubset,
        sub: &SubAlgebraSpec,
        opts: &EngineOptions,
    ) -> Option<usize> {
        shift_conditioning_size(&[(1.0, self)], window, sub, opts)
    }
}

impl EntropySystem for ShiftMixture {
    type Partition = CellPartition;

    fn dimension(&self) -> usize {
        ShiftMixture::dimension(self)
    }

    fn trivial_partition(&self) -> CellPartition {
        CellPartition::trivial(self.alphabet())
    }

    fn generating_partition(&self) -> CellPartition {
        CellPartition::symbols(self.alphabet())
    }

    fn join(&self, a: &CellPartition, b: &CellPartition) -> Result<CellPartition> {
        a.join(b)
    }

    fn is_coarser(&self, a: &CellPartition, b: &CellPartition) -> Result<bool> {
        a.is_coarser(b, &positive_symbols(&self.marginal()))
    }

    fn check_invariant(&self, sub: &SubAlgebraSpec, _with_inverses: bool) -> Result<bool> {
        shift_check_invariant(sub, self.alphabet())
    }

    fn block_entropy(
        &self,
        alpha: &CellPartition,
        window: &FolnerSubset,
        sub: &SubAlgebraSpec,
        opts: &EngineOptions,
    ) -> Result<f64> {
        shift_block_entropy(&self.weighted(), alpha, window, sub, opts)
    }

    fn conditioning_size(
        &self,
        window: &FolnerSubset,
        sub: &SubAlgebraSpec,
        opts: &EngineOptions,
    ) -> Option<usize> {
        shift_conditioning_size(&self.weighted(), window, sub, opts)
    }
}
