use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{admit_pair, family_id, CandidateSpace, InductionConfig, Mode, RawFamily, UnionFind};

/// The strict-mode graph over candidate indices. Edges are `(a, b)` with
/// `a < b`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StrictGraph {
    /// Every admitted pair proposed by some seed's neighbour list.
    pub admitted: BTreeSet<(usize, usize)>,
    /// Admitted pairs that survived the degree cap.
    pub installed: BTreeSet<(usize, usize)>,
}

impl StrictGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.installed.iter().filter(|&&(a, b)| a == v || b == v).count()
    }
}

/// Builds the capped graph.
///
/// Each seed proposes edges to the admitted members of its `strict_topn`
/// nearest neighbours, strongest first. Seeds are processed in sorted
/// token order; an edge is installed only if both endpoints are still below
/// `degree_cap`.
pub fn strict_graph(space: &CandidateSpace, config: &InductionConfig) -> StrictGraph {
    let proposals: Vec<Vec<usize>> = (0..space.len())
        .into_par_iter()
        .map(|seed| {
            // top_neighbors is ordered by descending cosine, then token.
            space
                .space()
                .top_neighbors(seed, config.strict_topn)
                .into_iter()
                .filter(|&(j, _)| admit_pair(space, seed, j, config.strict_th, config.jaccard_th).is_some())
                .map(|(j, _)| j)
                .collect()
        })
        .collect();

    let mut graph = StrictGraph::default();
    let mut degree = vec![0usize; space.len()];
    for (seed, targets) in proposals.iter().enumerate() {
        for &j in targets {
            let edge = (seed.min(j), seed.max(j));
            graph.admitted.insert(edge);
            if graph.installed.contains(&edge) {
                continue;
            }
            if degree[seed] < config.degree_cap && degree[j] < config.degree_cap {
                graph.installed.insert(edge);
                degree[seed] += 1;
                degree[j] += 1;
            }
        }
    }
    graph
}

/// Connected components of the capped graph with at least `snn_min`
/// members, each carrying the scores of all its member pairs. Sorted by
/// family id.
pub fn induce_strict(space: &CandidateSpace, config: &InductionConfig) -> Vec<RawFamily> {
    let graph = strict_graph(space, config);
    let mut uf = UnionFind::new(space.len());
    for &(a, b) in &graph.installed {
        uf.union(a, b);
    }
    let mut families: Vec<RawFamily> = uf
        .components()
        .into_par_iter()
        .filter(|component| component.len() >= config.snn_min)
        .map(|component| {
            let members: Vec<String> = component.iter().map(|&i| space.token(i).to_owned()).collect();
            let pairs = space.all_pairs(&component, |a, b| graph.installed.contains(&(a, b)));
            RawFamily {
                family_id: family_id(&members),
                mode: Mode::Strict,
                members,
                pairs,
                seed: None,
            }
        })
        .collect();
    families.sort_by(|a, b| a.family_id.cmp(&b.family_id));
    families
}
