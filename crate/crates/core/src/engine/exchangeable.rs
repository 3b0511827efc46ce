//! Block entropies for mixtures of product measures, summed over type classes.
//!
//! Under a product law the mass of a pattern depends only on how many sites
//! fall in each cell, so the entropy is a sum over compositions of the window
//! size weighted by multinomial counts. All masses are carried in log space;
//! windows of a few thousand sites stay exact.

use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

/// A block of `sites` exchangeable positions observing a cell partition; one
/// cell-mass vector per mixture component.
pub(crate) struct SiteGroup {
    pub sites: usize,
    pub cell_masses: Vec<Vec<f64>>,
}

/// Compositions of `n` into `parts` nonnegative parts, in lexicographic order.
fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=n {
            prefix.push(first);
            rec(n - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

fn ln_binomial_count(n: usize, parts: usize) -> f64 {
    // log C(n + parts − 1, parts − 1)
    ln_factorial((n + parts - 1) as u64)
        - ln_factorial(n as u64)
        - ln_factorial((parts - 1) as u64)
}

struct Class {
    ln_count: f64,
    /// per component: Σ n_c log q_c (−∞ when a used cell has zero mass)
    ln_mass: Vec<f64>,
}

fn classes(group: &SiteGroup, components: usize) -> Vec<Class> {
    // Cells carrying mass under some component; the rest never appear.
    let cells = group.cell_masses[0].len();
    let live: Vec<usize> = (0..cells)
        .filter(|&c| group.cell_masses.iter().any(|m| m[c] > 0.0))
        .collect();
    let logs: Vec<Vec<f64>> = group
        .cell_masses
        .iter()
        .map(|m| live.iter().map(|&c| m[c].ln()).collect())
        .collect();
    compositions(group.sites, live.len())
        .into_iter()
        .map(|counts| {
            let ln_count = ln_factorial(group.sites as u64)
                - counts.iter().map(|&k| ln_factorial(k as u64)).sum::<f64>();
            let ln_mass = (0..components)
                .map(|j| {
                    counts
                        .iter()
                        .zip(&logs[j])
                        .filter(|(&k, _)| k > 0)
                        .map(|(&k, &l)| k as f64 * l)
                        .sum()
                })
                .collect();
            Class { ln_count, ln_mass }
        })
        .collect()
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Entropy of the joint pattern over all groups under Σ_j w_j Π μ_j.
pub(crate) fn product_mixture_entropy(
    weights: &[f64],
    groups: &[SiteGroup],
    enumeration_cap: u64,
) -> Result<f64> {
    let live = |g: &SiteGroup| {
        (0..g.cell_masses[0].len())
            .filter(|&c| g.cell_masses.iter().any(|m| m[c] > 0.0))
            .count()
            .max(1)
    };
    let ln_total: f64 = groups
        .iter()
        .map(|g| ln_binomial_count(g.sites, live(g)))
        .sum();
    if ln_total > (enumeration_cap as f64).ln() + 1e-9 {
        return Err(Error::EnumerationCap {
            patterns: ln_total.exp().min(u128::MAX as f64) as u128,
            cap: enumeration_cap,
        });
    }
    let ln_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let per_group: Vec<Vec<Class>> = groups.iter().map(|g| classes(g, weights.len())).collect();

    let mut total = 0.0;
    let mut index = vec![0usize; groups.len()];
    loop {
        let ln_count: f64 = per_group.iter().zip(&index).map(|(cs, &i)| cs[i].ln_count).sum();
        let ln_mu = log_sum_exp((0..weights.len()).map(|j| {
            ln_w[j]
                + per_group
                    .iter()
                    .zip(&index)
                    .map(|(cs, &i)| cs[i].ln_mass[j])
                    .sum::<f64>()
        }));
        if ln_mu > f64::NEG_INFINITY {
            total -= (ln_count + ln_mu).exp() * ln_mu;
        }
        // Odometer over the class lists.
        let mut k = 0;
        loop {
            if k == index.len() {
                return Ok(total.max(0.0));
            }
            index[k] += 1;
            if index[k] < per_group[k].len() {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(3, 2).len(), 4);
        assert_eq!(compositions(4, 3).len(), 15);
        assert_eq!(compositions(0, 3), vec![vec![0, 0, 0]]);
        assert!((ln_binomial_count(4, 3) - 15f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn iid_entropy_is_linear() {
        let g = SiteGroup {
            sites: 7,
            cell_masses: vec![vec![0.9, 0.1]],
        };
        let h = product_mixture_entropy(&[1.0], &[g], 1 << 20).unwrap();
        let h1 = -(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln());
        assert!((h - 7.0 * h1).abs() < 1e-12);
    }

    #[test]
    fn two_groups_add() {
        let groups = [
            SiteGroup {
                sites: 3,
                cell_masses: vec![vec![0.5, 0.5]],
            },
            SiteGroup {
                sites: 2,
                cell_masses: vec![vec![0.2, 0.3, 0.5]],
            },
        ];
        let h = product_mixture_entropy(&[1.0], &groups, 1 << 20).unwrap();
        let h3 = -(0.2f64 * 0.2f64.ln() + 0.3 * 0.3f64.ln() + 0.5 * 0.5f64.ln());
        assert!((h - (3.0 * 2f64.ln() + 2.0 * h3)).abs() < 1e-12);
    }

    #[test]
    fn mixture_matches_brute_force() {
        // Oracle: enumerate all 2^5 words directly.
        let (w, p, q): ([f64; 2], [f64; 2], [f64; 2]) = ([0.3, 0.7], [0.5, 0.5], [0.9, 0.1]);
        let n = 5;
        let mut oracle = 0.0;
        for word in 0..1u32 << n {
            let ones = word.count_ones() as i32;
            let zeros = n as i32 - ones;
            let m = w[0] * p[0].powi(zeros) * p[1].powi(ones) + w[1] * q[0].powi(zeros) * q[1].powi(ones);
            oracle -= m * f64::ln(m);
        }
        let g = SiteGroup {
            sites: n,
            cell_masses: vec![p.to_vec(), q.to_vec()],
        };
        let h = product_mixture_entropy(&w, &[g], 1 << 20).unwrap();
        assert!((h - oracle).abs() < 1e-12);
    }

    #[test]
    fn zero_mass_cells_skipped() {
        let g = SiteGroup {
            sites: 4,
            cell_masses: vec![vec![0.5, 0.0, 0.5]],
        };
        let h = product_mixture_entropy(&[1.0], &[g], 1 << 20).unwrap();
        assert!((h - 4.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn large_windows_do_not_underflow() {
        let g = SiteGroup {
            sites: 2048,
            cell_masses: vec![vec![0.5, 0.5], vec![0.9, 0.1]],
        };
        let h = product_mixture_entropy(&[0.3, 0.7], &[g], 1 << 20).unwrap();
        let comp = 0.3 * 2f64.ln() + 0.7 * -(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln());
        let hw = -(0.3f64 * 0.3f64.ln() + 0.7 * 0.7f64.ln());
        let rate = h / 2048.0;
        assert!(rate >= comp - 1e-12 && rate <= comp + hw / 2048.0 + 1e-12);
    }
}
