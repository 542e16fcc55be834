//! Fingertip point sets quantized into voxel occupancy with per-voxel sample counts.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{KinematicChain, Theta, Transform, Vec3};
use crate::sampling::JointGrid;
use crate::scalar::Scalar;

/// Integer cell index `floor(p / delta)` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VoxelKey {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

impl VoxelKey {
    pub const fn new(x: i64, y: i64, z: i64) -> Self {
        Self { x, y, z }
    }

    /// Cell center `(k + 0.5) * delta`.
    pub fn center<T: Scalar>(&self, delta: T) -> Vec3<T> {
        let half = T::lit(0.5);
        [self.x, self.y, self.z].map(|k| (T::from_i64(k).unwrap() + half) * delta)
    }
}

fn check_delta<T: Scalar>(delta: T) -> Result<()> {
    if delta > T::zero() && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "voxel size must be positive and finite, got {delta}"
        )))
    }
}

/// Cell containing `p`. Exact multiples of `delta` belong to the upper cell and
/// negative coordinates floor toward negative infinity.
pub fn voxel_index<T: Scalar>(p: &Vec3<T>, delta: T) -> Result<VoxelKey> {
    check_delta(delta)?;
    key_unchecked(p, delta).ok_or_else(|| {
        Error::Input(format!(
            "cannot voxelize point ({}, {}, {})",
            p[0], p[1], p[2]
        ))
    })
}

#[inline]
fn key_unchecked<T: Scalar>(p: &Vec3<T>, delta: T) -> Option<VoxelKey> {
    let axis = |v: T| -> Option<i64> {
        if v.is_finite() {
            (v / delta).floor().to_i64()
        } else {
            None
        }
    };
    Some(VoxelKey::new(axis(p[0])?, axis(p[1])?, axis(p[2])?))
}

/// Occupied voxels with the number of samples that landed in each.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelSet<T> {
    delta: T,
    counts: BTreeMap<VoxelKey, u64>,
}

impl<T: Scalar> VoxelSet<T> {
    pub fn new(delta: T) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self {
            delta,
            counts: BTreeMap::new(),
        })
    }

    pub fn from_counts(delta: T, counts: impl IntoIterator<Item = (VoxelKey, u64)>) -> Result<Self> {
        let mut set = Self::new(delta)?;
        for (key, n) in counts {
            set.add(key, n)?;
        }
        Ok(set)
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, key: &VoxelKey) -> Option<u64> {
        self.counts.get(key).copied()
    }

    pub fn contains(&self, key: &VoxelKey) -> bool {
        self.counts.contains_key(key)
    }

    /// Keys in ascending order.
    pub fn keys(&self) -> impl Iterator<Item = &VoxelKey> + '_ {
        self.counts.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VoxelKey, &u64)> + '_ {
        self.counts.iter()
    }

    /// Sum of all per-voxel counts, i.e. the number of samples absorbed.
    pub fn total_count(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn accumulate(&mut self, p: &Vec3<T>) -> Result<VoxelKey> {
        let key = voxel_index(p, self.delta)?;
        *self.counts.entry(key).or_insert(0) += 1;
        Ok(key)
    }

    pub fn add(&mut self, key: VoxelKey, n: u64) -> Result<()> {
        if n == 0 {
            return Err(Error::Input(format!("zero count for voxel {key:?}")));
        }
        *self.counts.entry(key).or_insert(0) += n;
        Ok(())
    }

    /// Per-key sum with another set of the same voxel size.
    pub fn merge(&mut self, other: &VoxelSet<T>) -> Result<()> {
        if other.delta != self.delta {
            return Err(Error::config(format!(
                "cannot merge voxel sets with sizes {} and {}",
                self.delta, other.delta
            )));
        }
        for (&k, &n) in &other.counts {
            *self.counts.entry(k).or_insert(0) += n;
        }
        Ok(())
    }

    /// `|keys| * delta^3`.
    pub fn volume(&self) -> T {
        volume(self)
    }
}

pub fn accumulate<T: Scalar>(mut set: VoxelSet<T>, p: &Vec3<T>) -> Result<VoxelSet<T>> {
    set.accumulate(p)?;
    Ok(set)
}

pub fn volume<T: Scalar>(set: &VoxelSet<T>) -> T {
    let cell = set.delta * set.delta * set.delta;
    T::from_usize(set.len()).unwrap() * cell
}

/// Voxelized reachable workspace of `chain` over every admitted sample of `grid`.
///
/// Runs on the current rayon pool; the result does not depend on the number
/// of threads.
pub fn workspace<T: Scalar>(
    chain: &KinematicChain<T>,
    grid: &JointGrid<T>,
    delta: T,
) -> Result<VoxelSet<T>> {
    Sweep::new(chain, grid, delta)?.run(true)
}

/// Single-threaded [`workspace`].
pub fn workspace_serial<T: Scalar>(
    chain: &KinematicChain<T>,
    grid: &JointGrid<T>,
    delta: T,
) -> Result<VoxelSet<T>> {
    Sweep::new(chain, grid, delta)?.run(false)
}

/// Rows between two joints, plus the joint row sampled at every axis value.
struct Level<T> {
    fixed_before: Vec<Transform<T>>,
    table: Vec<Transform<T>>,
}

/// Nested-loop sweep that reuses the partial product of the outer joints.
///
/// Products are formed row by row in the same order as
/// [`chain_fk`](crate::kinematics::chain_fk), so every tip is bit-identical to
/// the per-sample evaluation.
struct Sweep<'a, T> {
    grid: &'a JointGrid<T>,
    base: Transform<T>,
    levels: Vec<Level<T>>,
    tail: Vec<Transform<T>>,
    delta: T,
    bounds: Option<Bounds>,
    coupling: Option<(usize, usize)>,
}

#[derive(Clone, Copy)]
struct Bounds {
    lo: [i64; 3],
    dims: [usize; 3],
}

impl Bounds {
    const MAX_CELLS: usize = 1 << 24;

    fn for_radius<T: Scalar>(radius: T, delta: T) -> Option<Self> {
        let r = (radius / delta).ceil().to_i64()? + 1;
        let side = usize::try_from(2 * r + 1).ok()?;
        if side.checked_mul(side)?.checked_mul(side)? > Self::MAX_CELLS {
            return None;
        }
        Some(Self {
            lo: [-r; 3],
            dims: [side; 3],
        })
    }

    #[inline]
    fn slot(&self, k: &VoxelKey) -> Option<usize> {
        let ix = usize::try_from(k.x - self.lo[0]).ok()?;
        let iy = usize::try_from(k.y - self.lo[1]).ok()?;
        let iz = usize::try_from(k.z - self.lo[2]).ok()?;
        if ix < self.dims[0] && iy < self.dims[1] && iz < self.dims[2] {
            Some((ix * self.dims[1] + iy) * self.dims[2] + iz)
        } else {
            None
        }
    }

    fn key(&self, slot: usize) -> VoxelKey {
        let iz = slot % self.dims[2];
        let iy = (slot / self.dims[2]) % self.dims[1];
        let ix = slot / (self.dims[1] * self.dims[2]);
        VoxelKey::new(
            self.lo[0] + ix as i64,
            self.lo[1] + iy as i64,
            self.lo[2] + iz as i64,
        )
    }
}

/// Per-worker counts: a dense box around the reach sphere with a hash map for spill.
struct Tally {
    bounds: Option<Bounds>,
    dense: Vec<u64>,
    spill: HashMap<VoxelKey, u64>,
    rejected: u64,
}

impl Tally {
    fn new(bounds: Option<Bounds>) -> Self {
        let cells = bounds.map_or(0, |b| b.dims.iter().product());
        Self {
            bounds,
            dense: vec![0; cells],
            spill: HashMap::new(),
            rejected: 0,
        }
    }

    #[inline]
    fn hit(&mut self, key: Option<VoxelKey>) {
        let Some(key) = key else {
            self.rejected += 1;
            return;
        };
        match self.bounds.and_then(|b| b.slot(&key)) {
            Some(slot) => self.dense[slot] += 1,
            None => *self.spill.entry(key).or_insert(0) += 1,
        }
    }

    fn absorb(mut self, other: Tally) -> Tally {
        for (a, b) in self.dense.iter_mut().zip(&other.dense) {
            *a += *b;
        }
        for (k, n) in other.spill {
            *self.spill.entry(k).or_insert(0) += n;
        }
        self.rejected += other.rejected;
        self
    }

    fn into_set<T: Scalar>(self, delta: T) -> Result<VoxelSet<T>> {
        if self.rejected > 0 {
            return Err(Error::Input(format!(
                "{} fingertip positions were not finite",
                self.rejected
            )));
        }
        let mut counts = BTreeMap::new();
        if let Some(b) = self.bounds {
            for (slot, &n) in self.dense.iter().enumerate() {
                if n > 0 {
                    counts.insert(b.key(slot), n);
                }
            }
        }
        for (k, n) in self.spill {
            *counts.entry(k).or_insert(0) += n;
        }
        Ok(VoxelSet { delta, counts })
    }
}

impl<'a, T: Scalar> Sweep<'a, T> {
    fn new(chain: &KinematicChain<T>, grid: &'a JointGrid<T>, delta: T) -> Result<Self> {
        check_delta(delta)?;
        if grid.dof() != chain.dof() {
            return Err(Error::config(format!(
                "{} chain has {} joints but the grid samples {}",
                chain.label(),
                chain.dof(),
                grid.dof()
            )));
        }
        let mut levels = Vec::with_capacity(chain.dof());
        let mut pending = Vec::new();
        for row in chain.rows() {
            match row.theta {
                Theta::Fixed(_) => pending.push(row.transform_at(T::zero())),
                Theta::Variable { joint, .. } => {
                    let table = grid.axes()[joint]
                        .iter()
                        .map(|&q| row.transform_at(q))
                        .collect();
                    levels.push(Level {
                        fixed_before: std::mem::take(&mut pending),
                        table,
                    });
                }
            }
        }
        let coupling = grid.coupling().map(|c| (c.first.min(c.second), c.first.max(c.second)));
        Ok(Self {
            grid,
            base: *chain.base(),
            levels,
            tail: pending,
            delta,
            bounds: Bounds::for_radius(chain.reach_bound(), delta),
            coupling,
        })
    }

    fn run(&self, parallel: bool) -> Result<VoxelSet<T>> {
        let mut q = vec![T::zero(); self.levels.len()];
        if self.levels.is_empty() || !parallel {
            let mut tally = Tally::new(self.bounds);
            self.descend(0, &self.base, &mut q, &mut tally);
            return tally.into_set(self.delta);
        }
        // Split the outer one or two joints into independent tasks.
        let split = if self.levels.len() > 1 && self.levels[0].table.len() < 64 {
            2
        } else {
            1
        };
        let sizes: Vec<usize> = self.levels[..split].iter().map(|l| l.table.len()).collect();
        let tasks: usize = sizes.iter().product();
        let tally = (0..tasks)
            .into_par_iter()
            .fold(
                || (Tally::new(self.bounds), vec![T::zero(); self.levels.len()]),
                |(mut tally, mut q), task| {
                    let mut idx = [0usize; 2];
                    let mut rem = task;
                    for (slot, &n) in idx[..split].iter_mut().zip(&sizes).rev() {
                        *slot = rem % n;
                        rem /= n;
                    }
                    self.descend_fixed(0, &self.base, &idx[..split], &mut q, &mut tally);
                    (tally, q)
                },
            )
            .map(|(t, _)| t)
            .reduce(|| Tally::new(self.bounds), Tally::absorb);
        tally.into_set(self.delta)
    }

    /// Descend with the outermost joints pinned to `pinned` indices.
    fn descend_fixed(
        &self,
        level: usize,
        acc: &Transform<T>,
        pinned: &[usize],
        q: &mut [T],
        tally: &mut Tally,
    ) {
        let Some((&i, rest)) = pinned.split_first() else {
            self.descend(level, acc, q, tally);
            return;
        };
        let lvl = &self.levels[level];
        let pre = lvl.fixed_before.iter().fold(*acc, |a, f| a.compose(f));
        q[level] = self.grid.axes()[level][i];
        if !self.coupled_ok(level, q) {
            return;
        }
        let next = pre.compose(&lvl.table[i]);
        self.descend_fixed(level + 1, &next, rest, q, tally);
    }

    fn descend(&self, level: usize, acc: &Transform<T>, q: &mut [T], tally: &mut Tally) {
        if level == self.levels.len() {
            tally.hit(self.tip_key(acc));
            return;
        }
        let lvl = &self.levels[level];
        let pre = lvl.fixed_before.iter().fold(*acc, |a, f| a.compose(f));
        let axis = &self.grid.axes()[level];
        for (i, t) in lvl.table.iter().enumerate() {
            q[level] = axis[i];
            if !self.coupled_ok(level, q) {
                continue;
            }
            let next = pre.compose(t);
            self.descend(level + 1, &next, q, tally);
        }
    }

    #[inline]
    fn coupled_ok(&self, level: usize, q: &[T]) -> bool {
        match (self.coupling, self.grid.coupling()) {
            (Some((first, second)), Some(c)) if second == level => c.admits(q[first], q[second]),
            _ => true,
        }
    }

    #[inline]
    fn tip_key(&self, acc: &Transform<T>) -> Option<VoxelKey> {
        let tip = match self.tail.split_last() {
            None => acc.translation,
            Some((last, inner)) => {
                let frame = inner.iter().fold(*acc, |a, f| a.compose(f));
                frame.apply(&last.translation)
            }
        };
        key_unchecked(&tip, self.delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{DhRow, Digit};
    use crate::sampling::JointRange;

    #[test]
    fn index_examples() {
        assert_eq!(voxel_index(&[0.12, -0.03, 0.07], 0.05).unwrap(), VoxelKey::new(2, -1, 1));
        assert_eq!(voxel_index(&[0.05, 0.0499999, -0.05], 0.05).unwrap(), VoxelKey::new(1, 0, -1));
        assert!(voxel_index(&[0.0, 0.0, 0.0], 0.0).is_err());
        assert!(voxel_index(&[f64::NAN, 0.0, 0.0], 0.05).is_err());
    }

    #[test]
    fn volume_examples() {
        let cube = VoxelSet::<f64>::from_counts(
            0.05,
            (0..5).flat_map(|x| (0..5).flat_map(move |y| (0..5).map(move |z| (VoxelKey::new(x, y, z), 1)))),
        )
        .unwrap();
        assert_eq!(cube.len(), 125);
        assert!((volume(&cube) - 0.015625).abs() < 1e-15);
        let line = VoxelSet::<f64>::from_counts(0.05, (0..13).map(|x| (VoxelKey::new(x, 0, 0), 2))).unwrap();
        assert!((line.volume() - 0.001625).abs() < 1e-15);
        assert_eq!(line.total_count(), 26);
    }

    #[test]
    fn accumulate_counts_repeats() {
        let mut set = VoxelSet::new(0.1).unwrap();
        set = accumulate(set, &[0.01, 0.01, 0.01]).unwrap();
        set = accumulate(set, &[0.02, 0.03, 0.09]).unwrap();
        set.accumulate(&[-0.01, 0.0, 0.0]).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.count(&VoxelKey::new(0, 0, 0)), Some(2));
        assert_eq!(set.count(&VoxelKey::new(-1, 0, 0)), Some(1));
    }

    #[test]
    fn merge_requires_same_delta() {
        let mut a = VoxelSet::<f64>::new(0.1).unwrap();
        let b = VoxelSet::<f64>::new(0.2).unwrap();
        assert!(a.merge(&b).is_err());
    }

    #[test]
    fn center_is_mid_cell() {
        assert_eq!(VoxelKey::new(-1, 0, 2).center(0.05), [-0.025, 0.025, 0.125]);
    }

    #[test]
    fn zero_dof_chain_is_one_voxel() {
        let chain = KinematicChain::new(Digit::Index, vec![DhRow::fixed(0.0, 0.3, 0.1, 0.0)]).unwrap();
        let grid = JointGrid::new(vec![], None).unwrap();
        let set = workspace(&chain, &grid, 0.05).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.total_count(), 1);
    }

    #[test]
    fn parallel_matches_serial() {
        let rows = vec![
            DhRow::revolute(0.0, 0.0, 0.0, 0, 0.0),
            DhRow::revolute(0.0, 0.3, 0.0, 1, 0.0),
            DhRow::fixed(0.0, 0.2, 0.0, 0.0),
        ];
        let chain = KinematicChain::new(Digit::Index, rows).unwrap();
        let r = JointRange::new(-1.0, 1.0, 0.05).unwrap();
        let grid = JointGrid::new(vec![r, r], None).unwrap();
        let a = workspace(&chain, &grid, 0.05).unwrap();
        let b = workspace_serial(&chain, &grid, 0.05).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total_count(), grid.len() as u64);
    }

    #[test]
    fn dof_mismatch_rejected() {
        let chain = KinematicChain::new(
            Digit::Index,
            vec![DhRow::revolute(0.0, 0.0, 0.0, 0, 0.0), DhRow::fixed(0.0, 0.2, 0.0, 0.0)],
        )
        .unwrap();
        let grid = JointGrid::new(vec![], None).unwrap();
        assert!(workspace(&chain, &grid, 0.05).is_err());
    }
}
