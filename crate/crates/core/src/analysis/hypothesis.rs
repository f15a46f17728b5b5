use rand::Rng;
use rand_distr::{Binomial as BinomialSampler, Distribution};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal};

use super::{check_probability, kl_divergence, AnalysisError};

pub const DEFAULT_FALSE_ALARM: f64 = 0.05;

/// Flags raised out of all flag observations collected from one candidate
/// tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeCounts {
    pub flags: u64,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisSample {
    trees: Vec<TreeCounts>,
}

impl HypothesisSample {
    pub fn new(trees: Vec<TreeCounts>) -> Result<Self, AnalysisError> {
        if let Some(t) = trees.iter().find(|t| t.flags > t.samples) {
            return Err(AnalysisError::InvalidArgument(format!(
                "{} flags out of {} samples",
                t.flags, t.samples
            )));
        }
        Ok(Self { trees })
    }

    pub fn trees(&self) -> &[TreeCounts] {
        &self.trees
    }
}

/// How the H0 rejection threshold is set. Both split the false-alarm rate
/// evenly over the trees (Bonferroni).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    /// Standardised log-likelihood ratio against a normal quantile.
    Gaussian { false_alarm: f64 },
    /// Exact binomial upper tail of the flag count.
    ExactBinomial { false_alarm: f64 },
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::Gaussian {
            false_alarm: DEFAULT_FALSE_ALARM,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Tree declared infected, or `None` to keep H0.
    pub tree: Option<usize>,
    /// Log-likelihood ratio of each tree; 0 for trees without samples.
    pub llr: Vec<f64>,
}

fn llr(c: TreeCounts, p: f64, q: f64) -> f64 {
    let quiet = c.samples - c.flags;
    let up = if c.flags > 0 {
        c.flags as f64 * (p / q).ln()
    } else {
        0.0
    };
    if up == f64::INFINITY {
        return up;
    }
    let down = if quiet > 0 {
        quiet as f64 * ((1.0 - p) / (1.0 - q)).ln()
    } else {
        0.0
    };
    up + down
}

/// Decides whether one of the trees carries infected nodes, flagging at
/// rate `p`, while the others flag at the false-alarm rate `q`.
pub fn detect_infected_tree(
    sample: &HypothesisSample,
    p: f64,
    q: f64,
    policy: ThresholdPolicy,
) -> Result<Detection, AnalysisError> {
    check_probability("p", p)?;
    check_probability("q", q)?;
    if p <= q {
        return Err(AnalysisError::InvalidArgument(format!(
            "need p > q, got p = {p}, q = {q}"
        )));
    }
    let trees = sample.trees();
    if trees.is_empty() {
        return Err(AnalysisError::EmptySample);
    }
    let llr: Vec<f64> = trees.iter().map(|&c| llr(c, p, q)).collect();
    let alpha = match policy {
        ThresholdPolicy::Gaussian { false_alarm }
        | ThresholdPolicy::ExactBinomial { false_alarm } => false_alarm,
    };
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(AnalysisError::InvalidArgument(format!(
            "false-alarm rate {alpha}"
        )));
    }
    let per_tree = alpha / trees.len() as f64;

    // Evidence score per tree, larger is stronger; `None` means no samples.
    let score: Vec<Option<f64>> = match policy {
        ThresholdPolicy::Gaussian { .. } => {
            let z_cut = Normal::standard().inverse_cdf(1.0 - per_tree);
            let spread = (p / q).ln() - ((1.0 - p) / (1.0 - q)).ln();
            let d0 = kl_divergence(q, p)?;
            trees
                .iter()
                .zip(&llr)
                .map(|(c, &l)| {
                    (c.samples > 0).then(|| {
                        let n = c.samples as f64;
                        let mean = -n * d0;
                        let sd = (n * q * (1.0 - q)).sqrt() * spread;
                        let z = if sd.is_finite() && sd > 0.0 {
                            (l - mean) / sd
                        } else if l > mean {
                            f64::INFINITY
                        } else {
                            f64::NEG_INFINITY
                        };
                        z - z_cut
                    })
                })
                .collect()
        }
        ThresholdPolicy::ExactBinomial { .. } => trees
            .iter()
            .map(|c| {
                (c.samples > 0).then(|| {
                    let tail = if c.flags == 0 {
                        1.0
                    } else {
                        Binomial::new(q, c.samples)
                            .expect("q checked")
                            .sf(c.flags - 1)
                    };
                    per_tree.ln() - tail.ln()
                })
            })
            .collect(),
    };

    let mut best: Option<(usize, f64)> = None;
    for (i, s) in score.iter().enumerate() {
        if let Some(s) = *s {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
    }
    let tree = best.and_then(|(i, s)| (s > 0.0).then_some(i));
    Ok(Detection { tree, llr })
}

/// Draws flag counts for `r` trees with `n` samples each; the tree
/// `infected` (if any) flags at rate `p`, the rest at `q`.
pub fn simulate_sample<R: Rng + ?Sized>(
    n: u64,
    r: usize,
    infected: Option<usize>,
    p: f64,
    q: f64,
    rng: &mut R,
) -> Result<HypothesisSample, AnalysisError> {
    let hit =
        BinomialSampler::new(n, p).map_err(|e| AnalysisError::InvalidArgument(e.to_string()))?;
    let miss =
        BinomialSampler::new(n, q).map_err(|e| AnalysisError::InvalidArgument(e.to_string()))?;
    let trees = (0..r)
        .map(|i| TreeCounts {
            flags: if Some(i) == infected {
                hit.sample(rng)
            } else {
                miss.sample(rng)
            },
            samples: n,
        })
        .collect();
    HypothesisSample::new(trees)
}

/// Fraction of H1 draws (infected tree chosen uniformly) in which the
/// test fails to name the infected tree.
pub fn miss_rate<R: Rng + ?Sized>(
    n: u64,
    r: usize,
    p: f64,
    q: f64,
    policy: ThresholdPolicy,
    reps: u64,
    rng: &mut R,
) -> Result<f64, AnalysisError> {
    if reps == 0 || r == 0 {
        return Err(AnalysisError::InvalidArgument(
            "reps and r must be positive".into(),
        ));
    }
    let mut misses = 0u64;
    for _ in 0..reps {
        let infected = rng.random_range(0..r);
        let sample = simulate_sample(n, r, Some(infected), p, q, rng)?;
        if detect_infected_tree(&sample, p, q, policy)?.tree != Some(infected) {
            misses += 1;
        }
    }
    Ok(misses as f64 / reps as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfMissFit {
    /// `(n, miss rate)` for each grid point.
    pub curve: Vec<(u64, f64)>,
    /// Interpolated sample size at which the miss rate crosses one half.
    pub n50: f64,
    /// `n50 D(p || q) / sqrt(ln r)`.
    pub kappa: f64,
}

/// Sweeps per-tree sample sizes and locates the 50% miss point.
#[allow(clippy::too_many_arguments)]
pub fn fit_half_miss<R: Rng + ?Sized>(
    grid: &[u64],
    r: usize,
    p: f64,
    q: f64,
    policy: ThresholdPolicy,
    reps: u64,
    rng: &mut R,
) -> Result<HalfMissFit, AnalysisError> {
    if r < 2 {
        return Err(AnalysisError::InvalidArgument(
            "need at least two trees".into(),
        ));
    }
    let mut curve = Vec::with_capacity(grid.len());
    for &n in grid {
        curve.push((n, miss_rate(n, r, p, q, policy, reps, rng)?));
    }
    let cross = curve
        .iter()
        .position(|&(_, m)| m <= 0.5)
        .ok_or_else(|| AnalysisError::InvalidArgument("miss rate never reaches 1/2".into()))?;
    let n50 = if cross == 0 {
        curve[0].0 as f64
    } else {
        let (n0, m0) = curve[cross - 1];
        let (n1, m1) = curve[cross];
        n0 as f64 + (m0 - 0.5) / (m0 - m1) * (n1 - n0) as f64
    };
    let kappa = n50 * kl_divergence(p, q)? / (r as f64).ln().sqrt();
    Ok(HalfMissFit { curve, n50, kappa })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn counts(v: &[(u64, u64)]) -> HypothesisSample {
        HypothesisSample::new(
            v.iter()
                .map(|&(flags, samples)| TreeCounts { flags, samples })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn perfect_flags_find_the_tree() {
        let s = counts(&[(0, 5), (0, 5), (0, 5), (1, 5), (0, 5)]);
        for policy in [
            ThresholdPolicy::default(),
            ThresholdPolicy::ExactBinomial { false_alarm: 0.05 },
        ] {
            let d = detect_infected_tree(&s, 1.0, 0.0, policy).unwrap();
            assert_eq!(d.tree, Some(3));
            assert_eq!(d.llr[3], f64::INFINITY);
        }
    }

    #[test]
    fn no_samples_keeps_null() {
        let s = counts(&[(0, 0); 8]);
        let d = detect_infected_tree(&s, 0.6, 0.5, ThresholdPolicy::default()).unwrap();
        assert_eq!(d.tree, None);
    }

    #[test]
    fn empty_and_invalid() {
        let empty = HypothesisSample::new(vec![]).unwrap();
        assert_eq!(
            detect_infected_tree(&empty, 0.6, 0.5, ThresholdPolicy::default()),
            Err(AnalysisError::EmptySample)
        );
        assert!(HypothesisSample::new(vec![TreeCounts {
            flags: 3,
            samples: 2
        }])
        .is_err());
        let s = counts(&[(1, 2)]);
        assert!(detect_infected_tree(&s, 0.5, 0.6, ThresholdPolicy::default()).is_err());
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let s = counts(&[(0, 5), (5, 5), (5, 5)]);
        let d = detect_infected_tree(&s, 0.9, 0.1, ThresholdPolicy::default()).unwrap();
        assert_eq!(d.tree, Some(1));
    }

    #[test]
    fn llr_matches_per_sample_sum() {
        let (p, q) = (0.6, 0.5);
        let s = counts(&[(7, 12)]);
        let d = detect_infected_tree(&s, p, q, ThresholdPolicy::default()).unwrap();
        let direct: f64 = (0..12)
            .map(|i| {
                if i < 7 {
                    (p / q).ln()
                } else {
                    ((1.0 - p) / (1.0 - q)).ln()
                }
            })
            .sum();
        assert!((d.llr[0] - direct).abs() < 1e-12);
    }

    #[test]
    fn false_alarm_rate_is_controlled() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let reps = 4_000;
        for policy in [
            ThresholdPolicy::default(),
            ThresholdPolicy::ExactBinomial { false_alarm: 0.05 },
        ] {
            let alarms = (0..reps)
                .filter(|_| {
                    let s = simulate_sample(200, 8, None, 0.6, 0.5, &mut rng).unwrap();
                    detect_infected_tree(&s, 0.6, 0.5, policy)
                        .unwrap()
                        .tree
                        .is_some()
                })
                .count();
            let rate = alarms as f64 / reps as f64;
            let sigma = (0.05f64 * 0.95 / reps as f64).sqrt();
            assert!(rate <= 0.05 + 3.0 * sigma, "{policy:?}: {rate}");
        }
    }

    #[test]
    fn miss_rate_falls_with_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let policy = ThresholdPolicy::default();
        let small = miss_rate(10, 8, 0.6, 0.5, policy, 2_000, &mut rng).unwrap();
        let large = miss_rate(400, 8, 0.6, 0.5, policy, 2_000, &mut rng).unwrap();
        assert!(small > 0.8, "{small}");
        assert!(large < 0.1, "{large}");
    }
}
