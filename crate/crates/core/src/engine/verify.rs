use serde::Serialize;

use super::rate::entropy_rate;
use super::{ensure_invariant, EngineOptions, EntropySystem, LIMIT_TOLERANCE};
use crate::error::{Error, Result};
use crate::group::{FolnerSequence, FolnerSubset, GroupElement};
use crate::measure::{conditional_entropy, FiniteProbabilitySpace, Partition, ENTROPY_TOLERANCE, MASS_TOLERANCE};
use crate::systems::{FinitePMPAction, Permutation, SubAlgebraSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// violated when slack < −tolerance
    Inequality,
    /// violated when |slack| > tolerance
    Equality,
}

/// One evaluated property: `value` is the signed slack (rhs − lhs).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub paper_property: String,
    pub kind: CheckKind,
    pub value: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl PropertyCheck {
    pub fn inequality(label: &str, value: f64, tolerance: f64) -> Self {
        Self {
            paper_property: label.to_string(),
            kind: CheckKind::Inequality,
            value,
            tolerance,
            detail: None,
        }
    }

    pub fn equality(label: &str, value: f64, tolerance: f64) -> Self {
        Self {
            kind: CheckKind::Equality,
            ..Self::inequality(label, value, tolerance)
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn violated(&self) -> bool {
        match self.kind {
            CheckKind::Inequality => self.value < -self.tolerance,
            CheckKind::Equality => self.value.abs() > self.tolerance,
        }
    }
}

/// Signed slacks for the conditional-entropy identities and inequalities on
/// one finite space. Item 2 runs over the generators of `action`, item 4 over
/// `map`; both are skipped when absent.
pub fn verify_partition_identities(
    space: &FiniteProbabilitySpace,
    alpha: &Partition,
    beta: &Partition,
    gamma: &Partition,
    action: Option<&FinitePMPAction>,
    map: Option<&Permutation>,
) -> Result<Vec<PropertyCheck>> {
    for p in [alpha, beta, gamma] {
        p.ensure_on(space)?;
    }
    let h = |a: &Partition, b: &Partition| conditional_entropy(a, b, space);
    let mut out = Vec::new();

    let ab = alpha.join(beta)?;
    let h_ab_g = h(&ab, gamma)?;
    let h_a_g = h(alpha, gamma)?;
    let h_b_g = h(beta, gamma)?;
    out.push(PropertyCheck::inequality(
        "prop22_1",
        h_a_g + h_b_g - h_ab_g,
        ENTROPY_TOLERANCE,
    ));

    if let Some(action) = action {
        if action.space().id() != space.id() {
            return Err(Error::SpaceMismatch);
        }
        for (i, g) in action.generators().iter().enumerate() {
            let lhs = h(&g.image(space, alpha)?, &g.image(space, gamma)?)?;
            out.push(
                PropertyCheck::equality("prop22_2", lhs - h_a_g, MASS_TOLERANCE)
                    .with_detail(format!("generator {i}")),
            );
        }
    }

    // γ ≤ β is needed; when it fails the pair (γ, β ∨ γ) is used.
    let (beta3, note) = if gamma.is_coarser(beta, space)? {
        (beta.clone(), "gamma <= beta")
    } else {
        (beta.join(gamma)?, "gamma <= beta v gamma")
    };
    out.push(
        PropertyCheck::inequality("prop22_3", h_a_g - h(alpha, &beta3)?, ENTROPY_TOLERANCE)
            .with_detail(format!("{note}: H(a|b) <= H(a|g)")),
    );
    out.push(
        PropertyCheck::inequality(
            "prop22_3",
            h(&beta3, alpha)? - h(gamma, alpha)?,
            ENTROPY_TOLERANCE,
        )
        .with_detail(format!("{note}: H(g|a) <= H(b|a)")),
    );

    if let Some(f) = map {
        let lhs = h(&f.image(space, alpha)?, &f.image(space, gamma)?)?;
        out.push(PropertyCheck::equality("prop22_4", lhs - h_a_g, MASS_TOLERANCE));
    }

    let bg = beta.join(gamma)?;
    out.push(PropertyCheck::equality(
        "prop22_5",
        h_b_g + h(alpha, &bg)? - h_ab_g,
        ENTROPY_TOLERANCE,
    ));

    // γ ≤ γ ∨ β ≤ ε: conditional entropies of α decrease down the chain.
    let eps = Partition::discrete(space);
    let chain = [gamma.clone(), bg, eps];
    let values = chain
        .iter()
        .map(|c| h(alpha, c))
        .collect::<Result<Vec<_>>>()?;
    let slack = values
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min);
    out.push(PropertyCheck::inequality("prop22_6", slack, ENTROPY_TOLERANCE));
    out.push(
        PropertyCheck::equality("prop22_6", values[2], ENTROPY_TOLERANCE)
            .with_detail("limit at the discrete partition"),
    );
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateInequalityReport {
    pub checks: Vec<PropertyCheck>,
    pub h_alpha: f64,
    pub h_beta: f64,
    pub h_join: f64,
    pub static_alpha: f64,
    pub static_alpha_given_beta: f64,
    pub converged: bool,
    /// set when some trace did not converge; violations are then not reported
    pub inconclusive: bool,
}

impl RateInequalityReport {
    pub fn violations(&self) -> Vec<&PropertyCheck> {
        if self.inconclusive {
            return Vec::new();
        }
        self.checks.iter().filter(|c| c.violated()).collect()
    }
}

/// The four rate inequalities for partitions α and β, at `LIMIT_TOLERANCE`.
pub fn verify_rate_inequalities<S: EntropySystem>(
    system: &S,
    alpha: &S::Partition,
    beta: &S::Partition,
    sub: &SubAlgebraSpec,
    sequence: &FolnerSequence,
    n_max: usize,
    opts: &EngineOptions,
) -> Result<RateInequalityReport> {
    ensure_invariant(system, sub)?;
    let rate = |p: &S::Partition| entropy_rate(system, p, sub, sequence, n_max, opts);
    let joint = system.join(alpha, beta)?;
    let a = rate(alpha)?;
    let b = rate(beta)?;
    let ab = rate(&joint)?;
    let alpha_le_beta = system.is_coarser(alpha, beta)?;
    let upper = if alpha_le_beta { b.clone() } else { ab.clone() };

    let identity = FolnerSubset::new(
        system.dimension(),
        [GroupElement::identity(system.dimension())],
    )?;
    let static_alpha = system.block_entropy(alpha, &identity, sub, opts)?;
    let static_given = system.block_entropy_given(alpha, beta, &identity, sub, opts)?;

    let (ha, hb, hab) = (a.report.estimate, b.report.estimate, ab.report.estimate);
    let checks = vec![
        PropertyCheck::inequality("thm7_1", static_alpha - ha, LIMIT_TOLERANCE),
        PropertyCheck::inequality("thm7_2", ha + hb - hab, LIMIT_TOLERANCE),
        PropertyCheck::inequality("thm7_3", upper.report.estimate - ha, LIMIT_TOLERANCE)
            .with_detail(if alpha_le_beta { "alpha <= beta" } else { "alpha <= alpha v beta" }),
        PropertyCheck::inequality("thm7_4", hb + static_given - ha, LIMIT_TOLERANCE),
    ];
    let converged = [&a, &b, &ab].iter().all(|o| o.report.converged);
    Ok(RateInequalityReport {
        checks,
        h_alpha: ha,
        h_beta: hb,
        h_join: hab,
        static_alpha,
        static_alpha_given_beta: static_given,
        converged,
        inconclusive: !converged,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExhaustionReport {
    /// H(ξ | α_n ∨ 𝒞) down the chain
    pub values: Vec<f64>,
    /// first index where α_n ∨ 𝒞 is the discrete partition
    pub exhausted_at: Option<usize>,
    pub checks: Vec<PropertyCheck>,
}

/// Conditional entropies of ξ along an increasing chain α_1 ≤ α_2 ≤ ⋯,
/// joined with 𝒞.
pub fn verify_exhaustion(
    space: &FiniteProbabilitySpace,
    chain: &[Partition],
    xi: &Partition,
    c: &Partition,
) -> Result<ExhaustionReport> {
    if chain.is_empty() {
        return Err(Error::EmptyList);
    }
    for (i, w) in chain.windows(2).enumerate() {
        if !w[0].is_coarser(&w[1], space)? {
            return Err(Error::ChainNotIncreasing(i + 1));
        }
    }
    let eps = Partition::discrete(space);
    let mut values = Vec::with_capacity(chain.len());
    let mut exhausted_at = None;
    for (i, a) in chain.iter().enumerate() {
        let joined = a.join(c)?;
        values.push(conditional_entropy(xi, &joined, space)?);
        if exhausted_at.is_none() && joined.equivalent(&eps, space)? {
            exhausted_at = Some(i);
        }
    }
    let slack = values
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min);
    let mut checks = Vec::new();
    if slack.is_finite() {
        checks.push(PropertyCheck::inequality("thm4_monotone", slack, MASS_TOLERANCE));
    }
    if let Some(i) = exhausted_at {
        checks.push(PropertyCheck::equality("thm4_exhaustion", values[i], MASS_TOLERANCE));
    }
    Ok(ExhaustionReport {
        values,
        exhausted_at,
        checks,
    })
}
