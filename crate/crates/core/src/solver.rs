//! Least-cost paths from the first to the last note of a [`ReductionGraph`].
//!
//! Node indices are already a topological order, so the exact solver is a
//! single forward pass. Ties are broken by fewer edges, then by the
//! lexicographically smallest index sequence.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeCategory, ReductionGraph};

/// Largest graph [`brute_force_shortest`] will enumerate.
pub const BRUTE_FORCE_MAX_NODES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionPath {
    pub nodes: Vec<usize>,
    pub total_cost: f64,
    pub categories: Vec<EdgeCategory>,
}

impl ReductionPath {
    /// Path through `nodes`, with its cost summed edge by edge from the start.
    pub fn from_nodes(g: &ReductionGraph, nodes: Vec<usize>) -> Self {
        let total_cost = nodes
            .windows(2)
            .fold(0.0, |acc, w| acc + g.cost(w[0], w[1]));
        let categories = nodes.windows(2).map(|w| g.category(w[0], w[1])).collect();
        ReductionPath {
            nodes,
            total_cost,
            categories,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    pub fn edge_costs(&self, g: &ReductionGraph) -> Vec<f64> {
        self.nodes.windows(2).map(|w| g.cost(w[0], w[1])).collect()
    }

    /// The ordering used for every tie-break in this module.
    pub fn rank(&self, other: &Self) -> Ordering {
        rank(
            (self.total_cost, &self.nodes),
            (other.total_cost, &other.nodes),
        )
    }
}

fn rank(a: (f64, &[usize]), b: (f64, &[usize])) -> Ordering {
    a.0.total_cmp(&b.0)
        .then(a.1.len().cmp(&b.1.len()))
        .then_with(|| a.1.cmp(b.1))
}

/// Best path from `source` to the last node, skipping `banned` edges.
fn forward_pass(
    g: &ReductionGraph,
    source: usize,
    banned: &HashSet<(usize, usize)>,
) -> Option<(f64, Vec<usize>)> {
    let n = g.node_count();
    let mut best: Vec<Option<(f64, Vec<usize>)>> = vec![None; n];
    best[source] = Some((0.0, vec![source]));
    for j in source + 1..n {
        let mut here: Option<(f64, Vec<usize>)> = None;
        for (i, entry) in best.iter().enumerate().take(j).skip(source) {
            if banned.contains(&(i, j)) {
                continue;
            }
            let Some((cost_i, path_i)) = entry else {
                continue;
            };
            let cost = cost_i + g.cost(i, j);
            let mut path = path_i.clone();
            path.push(j);
            let replace = match &here {
                None => true,
                Some((c, p)) => rank((cost, &path), (*c, p)) == Ordering::Less,
            };
            if replace {
                here = Some((cost, path));
            }
        }
        best[j] = here;
    }
    best.pop().flatten()
}

/// Minimum-cost path from node 0 to node N−1.
pub fn shortest_path(g: &ReductionGraph) -> ReductionPath {
    if g.node_count() == 0 {
        return ReductionPath {
            nodes: vec![],
            total_cost: 0.0,
            categories: vec![],
        };
    }
    let (_, nodes) = forward_pass(g, 0, &HashSet::new()).expect("complete DAG always has a path");
    ReductionPath::from_nodes(g, nodes)
}

/// Up to `k` distinct paths in nondecreasing cost (Yen's deviation scheme).
pub fn k_shortest_paths(g: &ReductionGraph, k: usize) -> Vec<ReductionPath> {
    if k == 0 || g.node_count() == 0 {
        return vec![];
    }
    let mut accepted = vec![shortest_path(g)];
    let mut candidates: Vec<ReductionPath> = Vec::new();
    while accepted.len() < k {
        let last = accepted.last().unwrap().nodes.clone();
        for spur_at in 0..last.len().saturating_sub(1) {
            let root = &last[..=spur_at];
            let spur = last[spur_at];
            let banned: HashSet<(usize, usize)> = accepted
                .iter()
                .filter(|p| p.nodes.len() > spur_at + 1 && p.nodes[..=spur_at] == *root)
                .map(|p| (spur, p.nodes[spur_at + 1]))
                .collect();
            let Some((_, tail)) = forward_pass(g, spur, &banned) else {
                continue;
            };
            let nodes: Vec<usize> = root.iter().chain(&tail[1..]).copied().collect();
            let known = accepted.iter().chain(&candidates).any(|p| p.nodes == nodes);
            if !known {
                candidates.push(ReductionPath::from_nodes(g, nodes));
            }
        }
        let Some(best) = candidates
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.rank(b))
            .map(|(i, _)| i)
        else {
            break;
        };
        accepted.push(candidates.swap_remove(best));
    }
    accepted
}

/// Exhaustive search over every subset of interior nodes. Test oracle.
pub fn brute_force_shortest(g: &ReductionGraph) -> Result<ReductionPath> {
    let n = g.node_count();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_NODES,
        });
    }
    if n <= 1 {
        return Ok(ReductionPath {
            nodes: (0..n).collect(),
            total_cost: 0.0,
            categories: vec![],
        });
    }
    let interior = n - 2;
    let mut best: Option<ReductionPath> = None;
    for mask in 0u32..(1u32 << interior) {
        let mut nodes = vec![0];
        nodes.extend(
            (0..interior)
                .filter(|b| mask & (1 << b) != 0)
                .map(|b| b + 1),
        );
        nodes.push(n - 1);
        let candidate = ReductionPath::from_nodes(g, nodes);
        if best
            .as_ref()
            .is_none_or(|b| candidate.rank(b) == Ordering::Less)
        {
            best = Some(candidate);
        }
    }
    Ok(best.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::ingest::{detect_anticipations, AnticipationConfig};
    use crate::model::{beats, ChordEvent, Chroma, Note, Phrase, TimeSignature};
    use approx::assert_abs_diff_eq;

    /// C4 D4 C4 quarters over one 4-beat C major chord.
    fn cdc() -> Phrase {
        Phrase::new(
            vec![
                Note::new(beats(0, 1), 60, beats(1, 1)),
                Note::new(beats(1, 1), 62, beats(1, 1)),
                Note::new(beats(2, 1), 60, beats(1, 1)),
            ],
            vec![ChordEvent::new(
                beats(0, 1),
                beats(4, 1),
                Chroma::from_pitch_classes(&[0, 4, 7]),
            )],
            TimeSignature::COMMON,
        )
    }

    fn graph(p: &Phrase) -> ReductionGraph {
        let m = detect_anticipations(p, &AnticipationConfig::default());
        build_graph(p, &m, &Default::default()).unwrap()
    }

    #[test]
    fn single_and_pair() {
        let g = ReductionGraph::from_fn(1, |_, _| unreachable!());
        let p = shortest_path(&g);
        assert_eq!((p.nodes, p.total_cost), (vec![0], 0.0));
        let g = ReductionGraph::from_fn(2, |_, _| (EdgeCategory::Linear, 1.5));
        assert_eq!(shortest_path(&g).nodes, vec![0, 1]);
        assert_eq!(k_shortest_paths(&g, 5).len(), 1);
    }

    #[test]
    fn worked_example() {
        let g = graph(&cdc());
        // frozen from a hand computation of alpha and the edge formula
        assert_abs_diff_eq!(g.cost(0, 1), 1.2817756, epsilon = 1e-6);
        assert_abs_diff_eq!(g.cost(1, 2), 0.9473994, epsilon = 1e-6);
        assert_abs_diff_eq!(g.cost(0, 2), 2.2820906, epsilon = 1e-6);
        let p = shortest_path(&g);
        assert_eq!(p.nodes, vec![0, 1, 2]);
        assert_abs_diff_eq!(p.total_cost, 2.22918, epsilon = 1e-4);
        assert_eq!(
            p.categories,
            vec![EdgeCategory::Linear, EdgeCategory::Linear]
        );
        assert_eq!(brute_force_shortest(&g).unwrap(), p);

        let ks = k_shortest_paths(&g, 2);
        assert_eq!(ks.len(), 2);
        assert_eq!(ks[0], p);
        assert_eq!(ks[1].nodes, vec![0, 2]);
        assert_abs_diff_eq!(ks[1].total_cost, 2.2820906, epsilon = 1e-6);
    }

    #[test]
    fn ties_prefer_fewer_edges_then_lexicographic() {
        // every edge costs 1 except the direct edge, which equals the two-step sum
        let g = ReductionGraph::from_fn(3, |i, j| {
            (
                EdgeCategory::Unclassified,
                if (i, j) == (0, 2) { 2.0 } else { 1.0 },
            )
        });
        assert_eq!(shortest_path(&g).nodes, vec![0, 2]);
        assert_eq!(brute_force_shortest(&g).unwrap().nodes, vec![0, 2]);
        // uniform cost per edge: [0,1,3] and [0,2,3] tie, lexicographic wins
        let g = ReductionGraph::from_fn(4, |_, j| {
            (EdgeCategory::Unclassified, if j == 3 { 1.0 } else { 0.5 })
        });
        let direct = ReductionGraph::from_fn(4, |i, j| {
            (
                EdgeCategory::Unclassified,
                if (i, j) == (0, 3) {
                    9.0
                } else if j == 3 {
                    1.0
                } else {
                    0.5
                },
            )
        });
        assert_eq!(shortest_path(&g).nodes, vec![0, 3]);
        assert_eq!(shortest_path(&direct).nodes, vec![0, 1, 3]);
        assert_eq!(brute_force_shortest(&direct).unwrap().nodes, vec![0, 1, 3]);
    }

    #[test]
    fn brute_force_size_limit() {
        let g = ReductionGraph::from_fn(21, |_, _| (EdgeCategory::Unclassified, 1.0));
        assert!(matches!(
            brute_force_shortest(&g),
            Err(Error::TooLarge { n: 21, max: 20 })
        ));
    }

    #[test]
    fn k_best_enumerates_all_paths_of_small_graph() {
        let g = graph(&cdc());
        let all = k_shortest_paths(&g, 10);
        assert_eq!(all.len(), 2);
        let g = ReductionGraph::from_fn(5, |i, j| {
            (
                EdgeCategory::Unclassified,
                ((i * 7 + j * 3) % 5) as f64 + 1.0,
            )
        });
        let all = k_shortest_paths(&g, 100);
        assert_eq!(all.len(), 8);
        for w in all.windows(2) {
            assert_ne!(w[0].rank(&w[1]), Ordering::Greater);
        }
    }

    mod props {
        use super::*;
        use crate::graph::CostConfig;
        use crate::synth::{random_phrase, PhraseSpec};
        use proptest::prelude::*;
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;

        fn random_graph(seed: u64, cfg: &CostConfig) -> ReductionGraph {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_phrase(&mut rng, &PhraseSpec::default());
            let m = detect_anticipations(&p, &AnticipationConfig::default());
            build_graph(&p, &m, cfg).unwrap()
        }

        proptest! {
            #[test]
            fn dp_matches_brute_force(seed in any::<u64>()) {
                let g = random_graph(seed, &CostConfig::default());
                let dp = shortest_path(&g);
                let bf = brute_force_shortest(&g).unwrap();
                prop_assert_eq!(&dp.nodes, &bf.nodes);
                prop_assert!((dp.total_cost - bf.total_cost).abs() < 1e-9);
                let melody = ReductionPath::from_nodes(&g, (0..g.node_count()).collect());
                prop_assert!(dp.total_cost <= melody.total_cost + 1e-12);
            }

            #[test]
            fn k_best_is_sorted_distinct_and_starts_optimal(seed in any::<u64>(), k in 1usize..8) {
                let g = random_graph(seed, &CostConfig::default());
                let ks = k_shortest_paths(&g, k);
                prop_assert!(!ks.is_empty() && ks.len() <= k);
                prop_assert_eq!(&ks[0], &shortest_path(&g));
                for w in ks.windows(2) {
                    prop_assert!(w[0].total_cost <= w[1].total_cost);
                    prop_assert_ne!(&w[0].nodes, &w[1].nodes);
                }
                let possible = 1usize << g.node_count().saturating_sub(2);
                prop_assert_eq!(ks.len(), k.min(possible));
                for p in &ks {
                    prop_assert_eq!(p.nodes[0], 0);
                    prop_assert_eq!(*p.nodes.last().unwrap(), g.node_count() - 1);
                }
            }

            #[test]
            fn steep_eta_keeps_every_note(seed in any::<u64>()) {
                let cfg = CostConfig { eta: 5.0, ..Default::default() };
                let g = random_graph(seed, &cfg);
                let p = shortest_path(&g);
                prop_assert_eq!(p.nodes, (0..g.node_count()).collect::<Vec<_>>());
            }
        }
    }
}
