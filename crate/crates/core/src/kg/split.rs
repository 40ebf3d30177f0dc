use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{FxHashMap, LabeledTriple};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitSpec {
    pub valid_size: usize,
    pub test_size: usize,
    pub seed: u64,
}

/// Random train/valid/test split where every entity and relation of the
/// held-out splits also occurs in train.
///
/// Held-out triples that would be uncovered are swapped with a train triple
/// whose removal leaves every label covered. Each output split keeps input
/// order.
pub fn random_split<'a>(
    triples: &'a [LabeledTriple],
    spec: SplitSpec,
) -> Result<(Vec<LabeledTriple>, Vec<LabeledTriple>, Vec<LabeledTriple>)> {
    let n = triples.len();
    let held = spec.valid_size + spec.test_size;
    if held >= n {
        return Err(Error::InfeasibleSplit(format!(
            "valid ({}) + test ({}) must be smaller than the {} input triples",
            spec.valid_size, spec.test_size, n
        )));
    }

    // Local label ids: entities and relations in separate spaces.
    let mut entity_ids: FxHashMap<&str, usize> = FxHashMap::default();
    let mut relation_ids: FxHashMap<&str, usize> = FxHashMap::default();
    let ids: Vec<[usize; 3]> = triples
        .iter()
        .map(|t| {
            let mut ent = |l: &'a str| {
                let next = entity_ids.len();
                *entity_ids.entry(l).or_insert(next)
            };
            let s = ent(&t.subject);
            let o = ent(&t.object);
            let next = relation_ids.len();
            let p = *relation_ids.entry(&t.predicate).or_insert(next);
            [s, p, o]
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(spec.seed, &[rng::tag::SPLIT]));
    let (held_out, train) = order.split_at_mut(held);

    let mut entity_count = vec![0usize; entity_ids.len()];
    let mut relation_count = vec![0usize; relation_ids.len()];
    let adjust = |i: usize, add: bool, ec: &mut [usize], rc: &mut [usize]| {
        let [s, p, o] = ids[i];
        if add {
            ec[s] += 1;
            ec[o] += 1;
            rc[p] += 1;
        } else {
            ec[s] -= 1;
            ec[o] -= 1;
            rc[p] -= 1;
        }
    };
    for &i in train.iter() {
        adjust(i, true, &mut entity_count, &mut relation_count);
    }

    let covered = |i: usize, ec: &[usize], rc: &[usize]| {
        let [s, p, o] = ids[i];
        ec[s] > 0 && ec[o] > 0 && rc[p] > 0
    };
    // Removing `i` from train keeps all of its labels covered.
    let removable = |i: usize, ec: &[usize], rc: &[usize]| {
        let [s, p, o] = ids[i];
        let need = |x: usize| if s == o && x == s { 3 } else { 2 };
        ec[s] >= need(s) && ec[o] >= need(o) && rc[p] >= 2
    };

    let mut cursor = 0usize;
    for slot in held_out.iter_mut() {
        let h = *slot;
        if covered(h, &entity_count, &relation_count) {
            continue;
        }
        adjust(h, true, &mut entity_count, &mut relation_count);
        let mut found = None;
        for step in 0..train.len() {
            let j = (cursor + step) % train.len();
            if removable(train[j], &entity_count, &relation_count) {
                found = Some(j);
                break;
            }
        }
        let Some(j) = found else {
            return Err(Error::InfeasibleSplit(format!(
                "no train triple can be exchanged to keep `{}` covered; try smaller valid/test sizes",
                triples[h].subject
            )));
        };
        adjust(train[j], false, &mut entity_count, &mut relation_count);
        *slot = train[j];
        train[j] = h;
        cursor = j + 1;
    }

    let (valid_idx, test_idx) = held_out.split_at(spec.valid_size);
    let collect = |idx: &[usize]| {
        let mut idx = idx.to_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| triples[i].clone()).collect::<Vec<_>>()
    };
    Ok((collect(train), collect(valid_idx), collect(test_idx)))
}
