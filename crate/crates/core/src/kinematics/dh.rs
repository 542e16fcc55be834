use serde::{Deserialize, Serialize};

use super::transform::Transform;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Joint angle of a DH row: a constant, or a joint variable plus a constant offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theta<T> {
    Fixed(T),
    Variable { joint: usize, offset: T },
}

impl<T: Scalar> Theta<T> {
    pub fn variable(joint: usize) -> Self {
        Theta::Variable {
            joint,
            offset: T::zero(),
        }
    }

    pub fn joint(&self) -> Option<usize> {
        match *self {
            Theta::Fixed(_) => None,
            Theta::Variable { joint, .. } => Some(joint),
        }
    }
}

/// One row of a modified-DH table: `alpha_{i-1}`, `a_{i-1}`, `d_i`, `theta_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhRow<T> {
    pub alpha_prev: T,
    pub a_prev: T,
    pub d: T,
    pub theta: Theta<T>,
}

impl<T: Scalar> DhRow<T> {
    pub fn fixed(alpha_prev: T, a_prev: T, d: T, theta: T) -> Self {
        Self {
            alpha_prev,
            a_prev,
            d,
            theta: Theta::Fixed(theta),
        }
    }

    pub fn revolute(alpha_prev: T, a_prev: T, d: T, joint: usize, offset: T) -> Self {
        Self {
            alpha_prev,
            a_prev,
            d,
            theta: Theta::Variable { joint, offset },
        }
    }

    pub fn is_variable(&self) -> bool {
        matches!(self.theta, Theta::Variable { .. })
    }

    /// Transform for an explicit joint angle, ignoring the row's own theta descriptor
    /// except for its constant offset.
    pub fn transform_at(&self, joint_value: T) -> Transform<T> {
        let theta = match self.theta {
            Theta::Fixed(angle) => angle,
            Theta::Variable { offset, .. } => joint_value + offset,
        };
        Transform::modified_dh(self.alpha_prev, self.a_prev, self.d, theta)
    }
}

/// Link transform of one row for the given joint vector.
pub fn dh_transform<T: Scalar>(row: &DhRow<T>, joint_values: &[T]) -> Result<Transform<T>> {
    match row.theta {
        Theta::Fixed(_) => Ok(row.transform_at(T::zero())),
        Theta::Variable { joint, .. } => {
            let q = joint_values.get(joint).copied().ok_or(Error::Index {
                index: joint,
                len: joint_values.len(),
            })?;
            Ok(row.transform_at(q))
        }
    }
}
