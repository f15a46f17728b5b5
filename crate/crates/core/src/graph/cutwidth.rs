use std::collections::HashMap;

use super::{Crusade, GraphError, GraphTopology};

/// Largest graph `cutwidth_exact` accepts unless a different limit is given.
pub const DEFAULT_EXACT_LIMIT: usize = 16;

/// Subsets are tracked as bitmasks.
const HARD_LIMIT: usize = 63;

/// Exact CutWidth with the default size limit.
pub fn cutwidth_exact(topology: &GraphTopology) -> Result<usize, GraphError> {
    cutwidth_exact_with_limit(topology, DEFAULT_EXACT_LIMIT).map(|(w, _)| w)
}

/// Exact CutWidth by branch-and-bound over orderings. Returns the width
/// and a crusade attaining it.
///
/// A partial ordering is abandoned as soon as its running maximum prefix
/// cut reaches the best complete ordering found so far. Two partial
/// orderings with the same prefix set have the same future, so a prefix set
/// is only re-expanded when reached with a strictly smaller running
/// maximum.
pub fn cutwidth_exact_with_limit(
    topology: &GraphTopology,
    limit: usize,
) -> Result<(usize, Crusade), GraphError> {
    let n = topology.node_count();
    if n > limit.min(HARD_LIMIT) {
        return Err(GraphError::TooLarge {
            node_count: n,
            limit: limit.min(HARD_LIMIT),
        });
    }
    let nbr_masks: Vec<u64> = (0..n)
        .map(|v| {
            topology
                .neighbors(v)
                .iter()
                .fold(0u64, |m, &u| m | (1u64 << u))
        })
        .collect();

    let mut search = Search {
        n,
        nbr_masks,
        degrees: (0..n).map(|v| topology.degree(v)).collect(),
        best: usize::MAX,
        best_order: Vec::new(),
        seen: HashMap::new(),
        prefix: Vec::with_capacity(n),
    };
    search.expand(0, 0, 0);
    let order = Crusade::new(search.best_order)?;
    Ok((search.best, order))
}

struct Search {
    n: usize,
    nbr_masks: Vec<u64>,
    degrees: Vec<usize>,
    best: usize,
    best_order: Vec<usize>,
    /// Smallest running maximum with which each prefix set was expanded.
    seen: HashMap<u64, usize>,
    prefix: Vec<usize>,
}

impl Search {
    fn expand(&mut self, set: u64, cut: usize, running_max: usize) {
        if self.prefix.len() == self.n {
            if running_max < self.best {
                self.best = running_max;
                self.best_order = self.prefix.clone();
            }
            return;
        }
        match self.seen.get(&set) {
            Some(&m) if m <= running_max => return,
            _ => {
                self.seen.insert(set, running_max);
            }
        }
        // Try nodes that shrink the cut first; good witnesses early make
        // the bound bite sooner.
        let mut candidates: Vec<(usize, usize)> = (0..self.n)
            .filter(|&v| set & (1u64 << v) == 0)
            .map(|v| {
                let inside = (self.nbr_masks[v] & set).count_ones() as usize;
                (v, cut + self.degrees[v] - 2 * inside)
            })
            .collect();
        candidates.sort_by_key(|&(_, c)| c);
        for (v, next_cut) in candidates {
            let next_max = running_max.max(next_cut);
            if next_max >= self.best {
                continue;
            }
            self.prefix.push(v);
            self.expand(set | (1u64 << v), next_cut, next_max);
            self.prefix.pop();
            if self.best <= running_max {
                // Nothing below can beat a max we already carry.
                return;
            }
        }
    }
}
