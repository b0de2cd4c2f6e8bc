use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::rng::{prng, shuffle};

/// Train/validation/test partition of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSplit {
    pub seed: u64,
    pub n: usize,
    #[serde(default)]
    pub stratified: bool,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl DataSplit {
    /// Checks that the three lists partition `0..n`.
    pub fn validate(&self) -> Result<(), DatasetError> {
        let mut seen = vec![false; self.n];
        for &i in self.train.iter().chain(&self.val).chain(&self.test) {
            if i >= self.n || seen[i] {
                return Err(DatasetError::InvalidSplit(format!(
                    "index {i} out of range or repeated"
                )));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(DatasetError::InvalidSplit("indices do not cover the dataset".into()));
        }
        Ok(())
    }
}

fn sizes(n: usize) -> (usize, usize) {
    (n * 8 / 10, n / 10)
}

/// Shuffles `0..n` with the seeded stream and cuts it into
/// `floor(0.8 n)`, `floor(0.1 n)` and the remainder.
pub fn split(n: usize, seed: u64) -> Result<DataSplit, DatasetError> {
    if n < 10 {
        return Err(DatasetError::TooSmall { n, needed: 10 });
    }
    let mut order: Vec<usize> = (0..n).collect();
    shuffle(&mut order, &mut prng(seed));
    let (n_train, n_val) = sizes(n);
    Ok(DataSplit {
        seed,
        n,
        stratified: false,
        train: order[..n_train].to_vec(),
        val: order[n_train..n_train + n_val].to_vec(),
        test: order[n_train + n_val..].to_vec(),
    })
}

/// Like [`split`] but applies the floor rule within each class, so every
/// part keeps the class ratio. Class 0 is shuffled first, then class 1,
/// from one stream; each part lists class 0 indices before class 1.
pub fn split_stratified(labels: &[u8], seed: u64) -> Result<DataSplit, DatasetError> {
    let n = labels.len();
    if n < 10 {
        return Err(DatasetError::TooSmall { n, needed: 10 });
    }
    let mut rng = prng(seed);
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for class in [0u8, 1] {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        shuffle(&mut members, &mut rng);
        let (n_train, n_val) = sizes(members.len());
        train.extend_from_slice(&members[..n_train]);
        val.extend_from_slice(&members[n_train..n_train + n_val]);
        test.extend_from_slice(&members[n_train + n_val..]);
    }
    if val.is_empty() || test.is_empty() {
        return Err(DatasetError::InvalidSplit(
            "stratified split leaves an empty validation or test part".into(),
        ));
    }
    Ok(DataSplit {
        seed,
        n,
        stratified: true,
        train,
        val,
        test,
    })
}

/// `k` (train, validation) pairs. The shuffled indices are cut into folds
/// whose sizes differ by at most one, the first `n % k` folds taking the
/// extra element.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>, DatasetError> {
    if k < 2 || n < k {
        return Err(DatasetError::TooSmall { n, needed: k.max(2) });
    }
    let mut order: Vec<usize> = (0..n).collect();
    shuffle(&mut order, &mut prng(seed));
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = n / k + usize::from(f < n % k);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok((0..k)
        .map(|f| {
            let train = (0..k)
                .filter(|&g| g != f)
                .flat_map(|g| folds[g].iter().copied())
                .collect();
            (train, folds[f].clone())
        })
        .collect())
}
