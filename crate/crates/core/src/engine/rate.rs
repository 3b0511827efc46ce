use serde::Serialize;

use super::{ensure_invariant, EngineOptions, EntropySystem};
use crate::error::{Error, Result};
use crate::group::FolnerSequence;
use crate::measure::nats_to_bits;
use crate::systems::SubAlgebraSpec;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateEntry {
    pub n: usize,
    #[serde(rename = "F_size")]
    pub f_size: usize,
    pub block_entropy: f64,
    pub rate: f64,
    pub running_inf: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RateTrace {
    pub entries: Vec<RateEntry>,
}

impl RateTrace {
    pub fn push(&mut self, n: usize, f_size: usize, block_entropy: f64) {
        let rate = block_entropy / f_size as f64;
        let running_inf = self
            .entries
            .last()
            .map_or(rate, |e| e.running_inf.min(rate));
        self.entries.push(RateEntry {
            n,
            f_size,
            block_entropy,
            rate,
            running_inf,
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&RateEntry> {
        self.entries.last()
    }

    pub fn running_inf(&self) -> Option<f64> {
        self.last().map(|e| e.running_inf)
    }

    /// Minimum over every computed rate.
    pub fn min_rate(&self) -> Option<f64> {
        self.entries.iter().map(|e| e.rate).reduce(f64::min)
    }

    /// Whether the last two entries sit within `tol` of the running infimum.
    pub fn is_stable(&self, tol: f64) -> bool {
        self.entries.len() >= 2
            && self.entries[self.entries.len() - 2..]
                .iter()
                .all(|e| (e.rate - e.running_inf).abs() < tol)
    }

    /// CSV with columns n, F_size, block_entropy_nats, rate, running_inf
    /// (block_entropy_bits and bit-scaled rates when `bits`).
    pub fn to_csv(&self, bits: bool) -> Result<Vec<u8>> {
        let scale = |x: f64| if bits { nats_to_bits(x) } else { x };
        let mut w = csv::Writer::from_writer(Vec::new());
        let entropy_col = if bits {
            "block_entropy_bits"
        } else {
            "block_entropy_nats"
        };
        let io = |e: csv::Error| Error::InvalidSystem(format!("csv: {e}"));
        w.write_record(["n", "F_size", entropy_col, "rate", "running_inf"])
            .map_err(io)?;
        for e in &self.entries {
            w.write_record([
                e.n.to_string(),
                e.f_size.to_string(),
                scale(e.block_entropy).to_string(),
                scale(e.rate).to_string(),
                scale(e.running_inf).to_string(),
            ])
            .map_err(io)?;
        }
        w.into_inner()
            .map_err(|e| Error::InvalidSystem(format!("csv: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    /// The estimate is the running infimum of the trace.
    RunningInfimum,
    /// Block entropies are bounded, so the rate is exactly zero.
    BoundedNumerator,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub estimate: f64,
    pub inf_value: f64,
    pub last_gap: f64,
    pub converged: bool,
    pub tolerance: f64,
    pub limit: LimitKind,
    /// |W| for the last entry, when the conditioning is windowed.
    pub conditioning_window: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateOutcome {
    #[serde(skip)]
    pub trace: RateTrace,
    pub report: ConvergenceReport,
    pub truncated: bool,
    pub truncation: Option<String>,
}

/// Følner trace of (1/|F_n|) H_μ(α^{F_n} | 𝒞) for n = 1..=n_max.
///
/// A resource cap hit after the first entry ends the trace early and flags it
/// as truncated.
pub fn entropy_rate<S: EntropySystem>(
    system: &S,
    alpha: &S::Partition,
    sub: &SubAlgebraSpec,
    sequence: &FolnerSequence,
    n_max: usize,
    opts: &EngineOptions,
) -> Result<RateOutcome> {
    if n_max == 0 {
        return Err(Error::OutOfSchedule {
            index: 0,
            len: sequence.len(),
        });
    }
    if sequence.dim() != system.dimension() {
        return Err(Error::DimensionMismatch {
            expected: system.dimension(),
            found: sequence.dim(),
        });
    }
    ensure_invariant(system, sub)?;

    let mut trace = RateTrace::default();
    let mut truncation = None;
    let mut cond_size = None;
    for n in 1..=n_max {
        let f = sequence.box_at(n)?;
        match system.block_entropy(alpha, &f, sub, opts) {
            Ok(h) => {
                trace.push(n, f.len(), h);
                cond_size = system.conditioning_size(&f, sub, opts);
            }
            Err(e) if e.is_resource_cap() && !trace.is_empty() => {
                truncation = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let last = trace.last().expect("non-empty trace");
    let inf_value = last.running_inf;
    let last_gap = (last.rate - inf_value).abs();
    let report = match system.bounded_numerator() {
        Some(_) => ConvergenceReport {
            estimate: 0.0,
            inf_value,
            last_gap,
            converged: true,
            tolerance: opts.tol,
            limit: LimitKind::BoundedNumerator,
            conditioning_window: cond_size,
        },
        None => ConvergenceReport {
            estimate: inf_value,
            inf_value,
            last_gap,
            converged: trace.is_stable(opts.tol),
            tolerance: opts.tol,
            limit: LimitKind::RunningInfimum,
            conditioning_window: cond_size,
        },
    };
    Ok(RateOutcome {
        trace,
        report,
        truncated: truncation.is_some(),
        truncation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HConditional {
    /// max over the supplied partitions
    pub value: f64,
    pub estimates: Vec<f64>,
    /// estimates non-decreasing down the list, at the rate tolerance
    pub monotone: bool,
    pub converged: bool,
    pub truncated: bool,
}

/// sup over the supplied partitions of the rate estimates.
pub fn h_conditional<S: EntropySystem>(
    system: &S,
    sub: &SubAlgebraSpec,
    partitions: &[S::Partition],
    sequence: &FolnerSequence,
    n_max: usize,
    opts: &EngineOptions,
) -> Result<HConditional> {
    if partitions.is_empty() {
        return Err(Error::EmptyList);
    }
    let mut estimates = Vec::with_capacity(partitions.len());
    let mut converged = true;
    let mut truncated = false;
    for alpha in partitions {
        let out = entropy_rate(system, alpha, sub, sequence, n_max, opts)?;
        estimates.push(out.report.estimate);
        converged &= out.report.converged;
        truncated |= out.truncated;
    }
    let monotone = estimates.windows(2).all(|w| w[1] >= w[0] - opts.tol);
    Ok(HConditional {
        value: estimates.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        estimates,
        monotone,
        converged,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{FiniteProbabilitySpace, Partition};
    use crate::systems::{FinitePMPAction, Permutation, ShiftSystem};

    fn h(p: &[f64]) -> f64 {
        -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
    }

    #[test]
    fn bernoulli_trace_is_constant() {
        let b = ShiftSystem::bernoulli(1, vec![0.9, 0.1]).unwrap();
        let seq = FolnerSequence::linear(1, 8).unwrap();
        let out = entropy_rate(&b, &b.base_partition(), &SubAlgebraSpec::Trivial, &seq, 8, &EngineOptions::default()).unwrap();
        for e in &out.trace.entries {
            assert!((e.rate - h(&[0.9, 0.1])).abs() < 1e-12);
        }
        assert!(out.report.converged);
        assert_eq!(out.report.estimate, out.trace.min_rate().unwrap());
        assert_eq!(out.report.limit, LimitKind::RunningInfimum);
    }

    #[test]
    fn markov_rates_decrease() {
        let m = ShiftSystem::markov(vec![2.0 / 3.0, 1.0 / 3.0], vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let seq = FolnerSequence::linear(1, 10).unwrap();
        let out = entropy_rate(&m, &m.base_partition(), &SubAlgebraSpec::Trivial, &seq, 10, &EngineOptions::default()).unwrap();
        let hp = (2.0 / 3.0) * h(&[0.9, 0.1]) + (1.0 / 3.0) * h(&[0.2, 0.8]);
        let hpi = h(&[2.0 / 3.0, 1.0 / 3.0]);
        for (i, e) in out.trace.entries.iter().enumerate() {
            let n = (i + 1) as f64;
            assert!((e.block_entropy - (hpi + (n - 1.0) * hp)).abs() < 1e-9);
            assert_eq!(e.rate, e.running_inf);
        }
    }

    #[test]
    fn finite_rate_is_zero() {
        let s = FiniteProbabilitySpace::uniform(4).unwrap();
        let sys = FinitePMPAction::cyclic(s, Permutation::new(vec![1, 2, 3, 0]).unwrap()).unwrap();
        let seq = FolnerSequence::doubling(1, 5).unwrap();
        let eps = Partition::discrete(sys.space());
        let out = entropy_rate(&sys, &eps, &SubAlgebraSpec::Trivial, &seq, 5, &EngineOptions::default()).unwrap();
        assert_eq!(out.report.estimate, 0.0);
        assert_eq!(out.report.limit, LimitKind::BoundedNumerator);
        for e in &out.trace.entries {
            assert!(e.rate <= 4f64.ln() / e.f_size as f64 + 1e-12);
        }
    }

    #[test]
    fn cap_truncates() {
        let b = ShiftSystem::markov_stationary(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let seq = FolnerSequence::linear(1, 12).unwrap();
        let opts = EngineOptions {
            enumeration_cap: 1 << 6,
            ..EngineOptions::default()
        };
        let out = entropy_rate(&b, &b.base_partition(), &SubAlgebraSpec::Trivial, &seq, 12, &opts).unwrap();
        assert!(out.truncated);
        assert_eq!(out.trace.len(), 6);
        let tiny = EngineOptions {
            enumeration_cap: 1,
            ..EngineOptions::default()
        };
        assert!(entropy_rate(&b, &b.base_partition(), &SubAlgebraSpec::Trivial, &seq, 12, &tiny).is_err());
    }

    #[test]
    fn h_conditional_chain() {
        let b = ShiftSystem::bernoulli(1, vec![0.5, 0.25, 0.25]).unwrap();
        let seq = FolnerSequence::linear(1, 4).unwrap();
        let chain = [
            crate::systems::CellPartition::trivial(3),
            crate::systems::CellPartition::new(&[0, 1, 1]).unwrap(),
            b.base_partition(),
        ];
        let out = h_conditional(&b, &SubAlgebraSpec::Trivial, &chain, &seq, 4, &EngineOptions::default()).unwrap();
        assert_eq!(out.estimates[0], 0.0);
        assert!(out.monotone);
        assert!((out.value - h(&[0.5, 0.25, 0.25])).abs() < 1e-12);
        assert!(h_conditional(&b, &SubAlgebraSpec::Trivial, &[], &seq, 4, &EngineOptions::default()).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut t = RateTrace::default();
        t.push(1, 2, 2.0);
        t.push(2, 4, 3.0);
        let text = String::from_utf8(t.to_csv(false).unwrap()).unwrap();
        assert_eq!(text, "n,F_size,block_entropy_nats,rate,running_inf\n1,2,2,1,1\n2,4,3,0.75,0.75\n");
    }
}
