//! Uniform joint-space sampling with an optional pairwise sum constraint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Slack applied to the coupling bound so samples landing on it are kept.
pub const COUPLING_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointRange<T> {
    pub lo: T,
    pub hi: T,
    pub step: T,
}

impl<T: Scalar> JointRange<T> {
    pub fn new(lo: T, hi: T, step: T) -> Result<Self> {
        let r = Self { lo, hi, step };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > T::zero()) {
            return Err(Error::Parameter(format!(
                "joint step must be positive and finite, got {}",
                self.step
            )));
        }
        if !self.lo.is_finite() || !self.hi.is_finite() || self.lo > self.hi {
            return Err(Error::Parameter(format!(
                "joint range [{}, {}] is not a finite interval",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    /// Number of samples: `round((hi - lo) / step) + 1`.
    pub fn count(&self) -> usize {
        let intervals = ((self.hi - self.lo) / self.step).round();
        intervals.to_usize().unwrap_or(0) + 1
    }
}

/// `round(span / step) + 1` evenly spaced angles from `lo` to `hi`, both ends included.
pub fn sample_axis<T: Scalar>(range: &JointRange<T>) -> Result<Vec<T>> {
    range.validate()?;
    let n = range.count();
    if n == 1 {
        return Ok(vec![range.lo]);
    }
    let spacing = (range.hi - range.lo) / T::from_usize(n - 1).unwrap();
    let mut out = Vec::with_capacity(n);
    for i in 0..n - 1 {
        out.push(range.lo + T::from_usize(i).unwrap() * spacing);
    }
    out.push(range.hi);
    Ok(out)
}

/// Keeps only tuples with `q[first] + q[second] <= bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling<T> {
    pub first: usize,
    pub second: usize,
    pub bound: T,
}

impl<T: Scalar> Coupling<T> {
    #[inline]
    pub fn admits(&self, a: T, b: T) -> bool {
        a + b <= self.bound + T::lit(COUPLING_TOLERANCE)
    }
}

/// Cartesian product of per-joint sample lists, filtered by an optional coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct JointGrid<T> {
    ranges: Vec<JointRange<T>>,
    coupling: Option<Coupling<T>>,
    axes: Vec<Vec<T>>,
}

impl<T: Scalar> JointGrid<T> {
    pub fn new(ranges: Vec<JointRange<T>>, coupling: Option<Coupling<T>>) -> Result<Self> {
        let axes = ranges.iter().map(sample_axis).collect::<Result<Vec<_>>>()?;
        if let Some(c) = &coupling {
            if c.first == c.second || c.first >= ranges.len() || c.second >= ranges.len() {
                return Err(Error::config(format!(
                    "coupling joints ({}, {}) invalid for a {}-joint grid",
                    c.first,
                    c.second,
                    ranges.len()
                )));
            }
        }
        Ok(Self {
            ranges,
            coupling,
            axes,
        })
    }

    pub fn ranges(&self) -> &[JointRange<T>] {
        &self.ranges
    }

    pub fn coupling(&self) -> Option<&Coupling<T>> {
        self.coupling.as_ref()
    }

    pub fn axes(&self) -> &[Vec<T>] {
        &self.axes
    }

    pub fn dof(&self) -> usize {
        self.axes.len()
    }

    pub fn axis_counts(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    /// Size of the unfiltered Cartesian product.
    pub fn raw_len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    /// Number of tuples the grid yields after the coupling filter.
    pub fn len(&self) -> usize {
        match &self.coupling {
            None => self.raw_len(),
            Some(c) => {
                let a = &self.axes[c.first];
                let b = &self.axes[c.second];
                let admitted = a
                    .iter()
                    .map(|&x| b.iter().filter(|&&y| c.admits(x, y)).count())
                    .sum::<usize>();
                self.raw_len() / (a.len() * b.len()) * admitted
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn admits(&self, q: &[T]) -> bool {
        self.coupling
            .as_ref()
            .is_none_or(|c| c.admits(q[c.first], q[c.second]))
    }

    /// All admitted tuples in lexicographic order (last joint varies fastest).
    pub fn iter(&self) -> GridIter<'_, T> {
        self.iter_range(0, self.raw_len())
    }

    /// Admitted tuples whose raw Cartesian index lies in `start..end`.
    ///
    /// Disjoint index ranges enumerate disjoint tuple sets, so a grid can be
    /// split across workers.
    pub fn iter_range(&self, start: usize, end: usize) -> GridIter<'_, T> {
        GridIter {
            grid: self,
            next: start,
            end: end.min(self.raw_len()),
        }
    }

    /// Joint vector at a raw Cartesian index (no coupling check).
    pub fn tuple_at(&self, mut index: usize) -> Vec<T> {
        let mut q = vec![T::zero(); self.axes.len()];
        for (slot, axis) in q.iter_mut().zip(&self.axes).rev() {
            *slot = axis[index % axis.len()];
            index /= axis.len();
        }
        q
    }
}

pub struct GridIter<'a, T> {
    grid: &'a JointGrid<T>,
    next: usize,
    end: usize,
}

impl<T: Scalar> Iterator for GridIter<'_, T> {
    type Item = Vec<T>;

    fn next(&mut self) -> Option<Vec<T>> {
        while self.next < self.end {
            let q = self.grid.tuple_at(self.next);
            self.next += 1;
            if self.grid.admits(&q) {
                return Some(q);
            }
        }
        None
    }
}

/// Stream of joint vectors for `grid`; see [`JointGrid::iter`].
pub fn grid_samples<T: Scalar>(grid: &JointGrid<T>) -> GridIter<'_, T> {
    grid.iter()
}
