use rayon::prelude::*;

use super::{admit_pair, open_family_id, CandidateSpace, InductionConfig, Mode, RawFamily};

/// One star per seed: the seed plus every admitted neighbour among its
/// `open_topn` nearest. Stars are not merged, so a token can belong to
/// several. Output is ordered by seed.
pub fn induce_open(space: &CandidateSpace, config: &InductionConfig) -> Vec<RawFamily> {
    (0..space.len())
        .into_par_iter()
        .filter_map(|seed| {
            let spokes: Vec<usize> = space
                .space()
                .top_neighbors(seed, config.open_topn)
                .into_iter()
                .filter(|&(j, _)| admit_pair(space, seed, j, config.open_th, config.jaccard_th).is_some())
                .map(|(j, _)| j)
                .collect();
            if spokes.len() + 1 < config.snn_min {
                return None;
            }
            let mut members_idx = spokes.clone();
            members_idx.push(seed);
            members_idx.sort_unstable();
            let members: Vec<String> = members_idx.iter().map(|&i| space.token(i).to_owned()).collect();
            let pairs = space.all_pairs(&members_idx, |a, b| {
                (a == seed && spokes.contains(&b)) || (b == seed && spokes.contains(&a))
            });
            let seed_token = space.token(seed).to_owned();
            Some(RawFamily {
                family_id: open_family_id(&seed_token, &members),
                mode: Mode::Open,
                members,
                pairs,
                seed: Some(seed_token),
            })
        })
        .collect()
}
