use std::fmt;

use serde::{Deserialize, Serialize};

use super::dh::{DhRow, Theta};
use super::transform::{Transform, Vec3};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Digit {
    Thumb,
    Index,
    Middle,
    Ring,
    Little,
}

impl Digit {
    pub const ALL: [Digit; 5] = [
        Digit::Thumb,
        Digit::Index,
        Digit::Middle,
        Digit::Ring,
        Digit::Little,
    ];

    /// The four digits that oppose the thumb.
    pub const FINGERS: [Digit; 4] = [Digit::Index, Digit::Middle, Digit::Ring, Digit::Little];

    pub fn name(self) -> &'static str {
        match self {
            Digit::Thumb => "thumb",
            Digit::Index => "index",
            Digit::Middle => "middle",
            Digit::Ring => "ring",
            Digit::Little => "little",
        }
    }

    /// Position in [`Digit::ALL`].
    pub fn ordinal(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Digit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Digit::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown digit '{s}'")))
    }
}

/// Serial chain of modified-DH rows ending in a fixed tool-tip row.
///
/// Joint variables are numbered `0..dof` in row order. `base` places the
/// first frame relative to the hand frame and is the identity for every
/// digit except an offset thumb.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicChain<T> {
    label: Digit,
    base: Transform<T>,
    rows: Vec<DhRow<T>>,
    dof: usize,
}

impl<T: Scalar> KinematicChain<T> {
    pub fn new(label: Digit, rows: Vec<DhRow<T>>) -> Result<Self> {
        Self::with_base(label, Transform::identity(), rows)
    }

    pub fn with_base(label: Digit, base: Transform<T>, rows: Vec<DhRow<T>>) -> Result<Self> {
        let last = rows
            .last()
            .ok_or_else(|| Error::config(format!("{label} chain has no rows")))?;
        match last.theta {
            Theta::Fixed(angle) if angle == T::zero() => {}
            _ => {
                return Err(Error::config(format!(
                    "{label} chain must end in a fixed tool-tip row with zero theta"
                )))
            }
        }
        let mut dof = 0;
        for (i, row) in rows.iter().enumerate() {
            for (name, v) in [("a_prev", row.a_prev), ("d", row.d)] {
                if !v.is_finite() || v < T::zero() {
                    return Err(Error::config(format!(
                        "{label} row {}: {name} must be finite and non-negative, got {v}",
                        i + 1
                    )));
                }
            }
            let angle_ok = row.alpha_prev.is_finite()
                && match row.theta {
                    Theta::Fixed(a) => a.is_finite(),
                    Theta::Variable { offset, .. } => offset.is_finite(),
                };
            if !angle_ok {
                return Err(Error::config(format!("{label} row {}: non-finite angle", i + 1)));
            }
            if let Some(joint) = row.theta.joint() {
                if joint != dof {
                    return Err(Error::config(format!(
                        "{label} row {}: joint variables must be numbered 0.. in row order (expected {dof}, got {joint})",
                        i + 1
                    )));
                }
                dof += 1;
            }
        }
        Ok(Self {
            label,
            base,
            rows,
            dof,
        })
    }

    pub fn label(&self) -> Digit {
        self.label
    }

    pub fn base(&self) -> &Transform<T> {
        &self.base
    }

    pub fn rows(&self) -> &[DhRow<T>] {
        &self.rows
    }

    pub fn dof(&self) -> usize {
        self.dof
    }

    /// Full base-to-tip transform.
    pub fn tip_transform(&self, q: &[T]) -> Result<Transform<T>> {
        if q.len() != self.dof {
            return Err(Error::Dimension {
                expected: self.dof,
                actual: q.len(),
            });
        }
        let mut acc = self.base;
        for row in &self.rows {
            let value = row.theta.joint().map_or(T::zero(), |j| q[j]);
            acc = acc.compose(&row.transform_at(value));
        }
        Ok(acc)
    }

    /// Upper bound on the distance from the hand origin to any point the tip can reach.
    pub fn reach_bound(&self) -> T {
        let t = &self.base.translation;
        let base = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
        self.rows
            .iter()
            .fold(base, |acc, row| acc + row.a_prev.abs() + row.d.abs())
    }
}

/// Fingertip position for the joint vector `q`, in the hand frame.
pub fn chain_fk<T: Scalar>(chain: &KinematicChain<T>, q: &[T]) -> Result<Vec3<T>> {
    chain.tip_transform(q).map(|t| t.translation)
}
