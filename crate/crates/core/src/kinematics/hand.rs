use serde::{Deserialize, Serialize};

use super::chain::{Digit, KinematicChain};
use super::dh::DhRow;
use super::transform::Transform;
use crate::cases::{CaseSpec, PalmJoint};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Link lengths of the hand, normalized by hand length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandParams<T> {
    pub hand_length: T,
    pub hand_width: T,
    /// Lateral spacing between adjacent finger bases (`a_w`).
    pub finger_spacing: T,
    /// Distance from the palm origin to the finger bases along the finger axis (`d_a`).
    pub palm_depth: T,
    /// Proximal, middle and distal phalanges of a finger with three flexion joints.
    pub three_flexion_links: [T; 3],
    /// Proximal and merged distal phalanges of a finger with two flexion joints.
    pub two_flexion_links: [T; 2],
    /// Offset between the two thumb CMC axes (`l_t1`).
    pub thumb_offset: T,
    pub thumb_links: [T; 3],
    /// Translation of the thumb's first joint frame from the hand origin.
    pub thumb_base: [T; 3],
}

impl<T: Scalar> HandParams<T> {
    pub fn validate(&self) -> Result<()> {
        let mut values = vec![
            ("hand_length", self.hand_length),
            ("hand_width", self.hand_width),
            ("finger_spacing", self.finger_spacing),
            ("palm_depth", self.palm_depth),
            ("thumb_offset", self.thumb_offset),
        ];
        values.extend(self.three_flexion_links.iter().map(|&v| ("three_flexion_links", v)));
        values.extend(self.two_flexion_links.iter().map(|&v| ("two_flexion_links", v)));
        values.extend(self.thumb_links.iter().map(|&v| ("thumb_links", v)));
        for (name, v) in values {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::Parameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if self.thumb_base.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("thumb_base must be finite".into()));
        }
        let tol = T::lit(1e-9);
        if (self.hand_width - T::lit(3.0) * self.finger_spacing).abs() > tol {
            return Err(Error::Parameter(format!(
                "hand_width ({}) must equal three finger spacings ({})",
                self.hand_width,
                T::lit(3.0) * self.finger_spacing
            )));
        }
        Ok(())
    }

    /// Lateral offset of a finger base along the palm (index at zero).
    pub fn finger_lateral(&self, digit: Digit) -> T {
        let slots = match digit {
            Digit::Thumb | Digit::Index => 0.0,
            Digit::Middle => 1.0,
            Digit::Ring => 2.0,
            Digit::Little => 3.0,
        };
        T::lit(slots) * self.finger_spacing
    }

    /// Lateral position of a palm fold axis, halfway between the fingers it separates.
    pub fn palm_joint_lateral(&self, joint: PalmJoint) -> T {
        let slots = match joint {
            PalmJoint::RingSide => 1.5,
            PalmJoint::LittleSide => 2.5,
        };
        T::lit(slots) * self.finger_spacing
    }
}

/// Thumb: five revolute joints on a base rotated by -pi/3 about x.
pub fn thumb_chain<T: Scalar>(params: &HandParams<T>) -> Result<KinematicChain<T>> {
    let z = T::zero();
    let half_pi = T::FRAC_PI_2();
    let rows = vec![
        DhRow::revolute(-T::FRAC_PI_3(), z, z, 0, z),
        DhRow::revolute(-half_pi, params.thumb_offset, z, 1, z),
        DhRow::revolute(half_pi, params.thumb_links[0], z, 2, z),
        DhRow::revolute(-half_pi, z, z, 3, z),
        DhRow::revolute(z, params.thumb_links[1], z, 4, z),
        DhRow::fixed(z, params.thumb_links[2], z, z),
    ];
    KinematicChain::with_base(
        Digit::Thumb,
        Transform::from_translation(params.thumb_base),
        rows,
    )
}

fn flexion_rows<T: Scalar>(
    params: &HandParams<T>,
    flexion_dof: u8,
    first_joint: usize,
) -> Result<Vec<DhRow<T>>> {
    let z = T::zero();
    let links: &[T] = match flexion_dof {
        3 => &params.three_flexion_links,
        2 => &params.two_flexion_links,
        n => {
            return Err(Error::config(format!(
                "fingers support 2 or 3 flexion joints, got {n}"
            )))
        }
    };
    // The first flexion joint sits on the abduction frame; each following
    // joint sits at the end of the preceding phalanx, the last phalanx ends
    // at the fixed tip row.
    let mut rows = Vec::with_capacity(links.len());
    for (k, &len) in links[..links.len() - 1].iter().enumerate() {
        rows.push(DhRow::revolute(z, len, z, first_joint + k, z));
    }
    rows.push(DhRow::fixed(z, links[links.len() - 1], z, z));
    Ok(rows)
}

/// Finger rooted directly on the palm frame (no palm joints).
pub fn plain_finger_chain<T: Scalar>(
    params: &HandParams<T>,
    digit: Digit,
    flexion_dof: u8,
) -> Result<KinematicChain<T>> {
    let z = T::zero();
    let half_pi = T::FRAC_PI_2();
    let mut rows = vec![
        DhRow::fixed(z, z, params.finger_lateral(digit), half_pi),
        DhRow::revolute(half_pi, params.palm_depth, z, 0, z),
        DhRow::revolute(-half_pi, z, z, 1, z),
    ];
    rows.extend(flexion_rows(params, flexion_dof, 2)?);
    KinematicChain::new(digit, rows)
}

/// Finger carried by one or two palm fold joints whose axes run parallel to the fingers.
pub fn palm_finger_chain<T: Scalar>(
    params: &HandParams<T>,
    digit: Digit,
    palm_joints: &[PalmJoint],
    flexion_dof: u8,
) -> Result<KinematicChain<T>> {
    let z = T::zero();
    let half_pi = T::FRAC_PI_2();
    let finger_at = params.finger_lateral(digit);
    let mut joints: Vec<PalmJoint> = palm_joints.to_vec();
    joints.sort();
    joints.dedup();

    let mut rows = vec![DhRow::fixed(-half_pi, z, z, -half_pi)];
    let mut reached = z;
    for (k, &joint) in joints.iter().enumerate() {
        let at = params.palm_joint_lateral(joint);
        if at <= reached || at >= finger_at {
            return Err(Error::config(format!(
                "palm joint {joint:?} does not lie between the palm origin and the {digit} base"
            )));
        }
        rows.push(DhRow::revolute(z, at - reached, z, k, z));
        reached = at;
    }
    rows.push(DhRow::fixed(z, finger_at - reached, params.palm_depth, z));
    let abduction = joints.len();
    rows.push(DhRow::revolute(-half_pi, z, z, abduction, -half_pi));
    rows.push(DhRow::revolute(-half_pi, z, z, abduction + 1, z));
    rows.extend(flexion_rows(params, flexion_dof, abduction + 2)?);
    KinematicChain::new(digit, rows)
}

/// Palm joints that sit between the palm origin and a finger's base.
pub fn palm_joints_for<T: Scalar>(
    params: &HandParams<T>,
    case: &CaseSpec<T>,
    digit: Digit,
) -> Vec<PalmJoint> {
    let finger_at = params.finger_lateral(digit);
    case.palm_joints
        .iter()
        .copied()
        .filter(|&j| params.palm_joint_lateral(j) < finger_at)
        .collect()
}

pub fn digit_chain<T: Scalar>(
    case: &CaseSpec<T>,
    params: &HandParams<T>,
    digit: Digit,
) -> Result<KinematicChain<T>> {
    let flexion = case.flexion_dof(digit);
    match digit {
        Digit::Thumb => thumb_chain(params),
        _ => {
            let palm = palm_joints_for(params, case, digit);
            if palm.is_empty() {
                plain_finger_chain(params, digit, flexion)
            } else {
                palm_finger_chain(params, digit, &palm, flexion)
            }
        }
    }
}

/// Chains for thumb, index, middle, ring and little, in that order.
pub fn build_hand<T: Scalar>(
    case: &CaseSpec<T>,
    params: &HandParams<T>,
) -> Result<Vec<KinematicChain<T>>> {
    case.validate()?;
    params.validate()?;
    Digit::ALL
        .iter()
        .map(|&d| digit_chain(case, params, d))
        .collect()
}
