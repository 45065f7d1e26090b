//! Stratified fold assignment and the inner validation split.

use hdlvq_core::seed;
use log::warn;
use rand::seq::SliceRandom;

use crate::error::{HarnessError, Result};

fn by_class(labels: &[usize], l: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); l];
    for (i, &c) in labels.iter().enumerate() {
        groups[c].push(i);
    }
    groups
}

/// Assigns every sample to one of `k` folds. Each class is shuffled with
/// the seed and dealt round-robin; dealing continues where the previous
/// class stopped, so fold sizes also differ by at most one overall.
pub fn stratified_folds(labels: &[usize], l: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(HarnessError::Usage(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    if k > labels.len() {
        return Err(HarnessError::Usage(format!(
            "{k} folds requested for {} samples",
            labels.len()
        )));
    }
    let mut rng = seed::rng(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for (class, mut members) in by_class(labels, l).into_iter().enumerate() {
        if !members.is_empty() && members.len() < k {
            warn!(
                "class {class} has {} samples for {k} folds; some folds will lack it",
                members.len()
            );
        }
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(assignment)
}

/// Indices of the training and test parts of one fold.
pub fn fold_indices(assignment: &[usize], fold: usize) -> (Vec<usize>, Vec<usize>) {
    let (test, train): (Vec<usize>, Vec<usize>) =
        (0..assignment.len()).partition(|&i| assignment[i] == fold);
    (train, test)
}

/// Stratified holdout: about `fraction` of each class goes to validation,
/// but every class keeps at least one training sample. Returns positions
/// into `labels`.
pub fn holdout_split(
    labels: &[usize],
    l: usize,
    fraction: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut rng = seed::rng(seed);
    let mut train = Vec::new();
    let mut val = Vec::new();
    for mut members in by_class(labels, l) {
        members.shuffle(&mut rng);
        let n = members.len();
        let take = ((fraction * n as f64 + 0.5).floor() as usize).min(n.saturating_sub(1));
        val.extend_from_slice(&members[..take]);
        train.extend_from_slice(&members[take..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}
