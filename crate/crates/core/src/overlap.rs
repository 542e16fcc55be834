//! Thumb-finger overlap sets and voxel-wise reachable-configuration statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::Digit;
use crate::scalar::Scalar;
use crate::voxelize::{VoxelKey, VoxelSet};

/// Intersection of two digits' voxel sets, with each side's counts kept per voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapResult<T> {
    pub pair: (Digit, Digit),
    pub delta: T,
    pub keys: Vec<VoxelKey>,
    pub volume: T,
    /// Counts of the first set (the thumb) on the shared voxels, aligned with `keys`.
    pub thumb_vwrc: Vec<u64>,
    /// Counts of the second set on the shared voxels, aligned with `keys`.
    pub finger_vwrc: Vec<u64>,
}

impl<T: Scalar> OverlapResult<T> {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn thumb_set(&self) -> VoxelSet<T> {
        self.side_set(&self.thumb_vwrc)
    }

    pub fn finger_set(&self) -> VoxelSet<T> {
        self.side_set(&self.finger_vwrc)
    }

    fn side_set(&self, counts: &[u64]) -> VoxelSet<T> {
        VoxelSet::from_counts(self.delta, self.keys.iter().copied().zip(counts.iter().copied()))
            .expect("overlap counts are positive and delta valid")
    }
}

/// `V_a ∩ V_b` and its volume `|V_a ∩ V_b| * delta^3`.
pub fn overlap<T: Scalar>(
    thumb_set: &VoxelSet<T>,
    finger_set: &VoxelSet<T>,
) -> Result<OverlapResult<T>> {
    overlap_labeled(thumb_set, finger_set, (Digit::Thumb, Digit::Index))
}

pub fn overlap_labeled<T: Scalar>(
    first: &VoxelSet<T>,
    second: &VoxelSet<T>,
    pair: (Digit, Digit),
) -> Result<OverlapResult<T>> {
    if first.delta() != second.delta() {
        return Err(Error::config(format!(
            "overlap needs equal voxel sizes, got {} and {}",
            first.delta(),
            second.delta()
        )));
    }
    let (small, large, swapped) = if first.len() <= second.len() {
        (first, second, false)
    } else {
        (second, first, true)
    };
    let mut keys = Vec::new();
    let mut thumb_vwrc = Vec::new();
    let mut finger_vwrc = Vec::new();
    for (key, &n_small) in small.iter() {
        if let Some(n_large) = large.count(key) {
            let (a, b) = if swapped {
                (n_large, n_small)
            } else {
                (n_small, n_large)
            };
            keys.push(*key);
            thumb_vwrc.push(a);
            finger_vwrc.push(b);
        }
    }
    let delta = first.delta();
    let volume = T::from_usize(keys.len()).unwrap() * (delta * delta * delta);
    Ok(OverlapResult {
        pair,
        delta,
        keys,
        volume,
        thumb_vwrc,
        finger_vwrc,
    })
}

/// Mean and lower 10th percentile of per-voxel configuration counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VwrcStats {
    pub voxels: usize,
    pub mean: f64,
    /// Nearest-rank 10th percentile: the `ceil(0.1 * n)`-th smallest count.
    pub p10: u64,
}

pub fn vwrc(counts: &[u64]) -> Result<VwrcStats> {
    if counts.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    let n = counts.len();
    let total: u128 = counts.iter().map(|&c| u128::from(c)).sum();
    let mean = total as f64 / n as f64;
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    // ceil(n / 10) in integers, 1-based
    let rank = n.div_ceil(10).max(1);
    Ok(VwrcStats {
        voxels: n,
        mean,
        p10: sorted[rank - 1],
    })
}

/// `100 * overlap / reachable`, in percent.
pub fn overlap_ratio(overlap_vol: f64, reachable_vol: f64) -> Result<f64> {
    if reachable_vol == 0.0 || !reachable_vol.is_finite() {
        return Err(Error::Division("reachable volume is zero"));
    }
    Ok(100.0 * overlap_vol / reachable_vol)
}
