//! The seven palm/finger DoF configurations, their joint limits and the
//! declarative config format for parameters and custom cases.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{palm_joints_for, Digit, HandParams, KinematicChain};
use crate::sampling::{Coupling, JointGrid, JointRange};
use crate::scalar::Scalar;

/// Palm fold axis, named by the finger gap it sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PalmJoint {
    /// Between middle and ring (`theta_2r`).
    RingSide,
    /// Between ring and little (`theta_2l`).
    LittleSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn with_step(&self, step: T) -> Result<JointRange<T>> {
        JointRange::new(self.lo, self.hi, step)
    }
}

/// Joint limits shared by all cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointLimits<T> {
    pub thumb: [Interval<T>; 5],
    pub finger_abduction: Interval<T>,
    /// First flexion joint of a finger (MCP).
    pub finger_proximal_flexion: Interval<T>,
    /// Every further flexion joint.
    pub finger_distal_flexion: Interval<T>,
    pub ring_side_palm: Interval<T>,
    pub little_side_palm: Interval<T>,
    /// Upper bound on the sum of both palm angles when a finger carries both.
    pub palm_coupling_bound: T,
}

impl<T: Scalar> Default for JointLimits<T> {
    fn default() -> Self {
        let pi = T::PI();
        let z = T::zero();
        let half = T::FRAC_PI_2();
        let iv = Interval::new;
        Self {
            thumb: [
                iv(z, half),
                iv(-half, z),
                iv(-T::FRAC_PI_6(), T::FRAC_PI_6()),
                iv(-half, z),
                iv(-half, z),
            ],
            finger_abduction: iv(-pi / T::lit(12.0), pi / T::lit(12.0)),
            finger_proximal_flexion: iv(-half, pi / T::lit(9.0)),
            finger_distal_flexion: iv(-half, z),
            ring_side_palm: iv(z, pi / T::lit(9.0)),
            little_side_palm: iv(z, T::FRAC_PI_6()),
            palm_coupling_bound: T::lit(11.0) * pi / T::lit(45.0),
        }
    }
}

/// One hand configuration: which palm joints exist and how many flexion
/// joints the ring and little fingers keep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CaseSpec<T> {
    pub id: u32,
    #[serde(default)]
    pub palm_joints: Vec<PalmJoint>,
    pub ring_flexion_dof: u8,
    pub little_flexion_dof: u8,
    #[serde(default)]
    pub limits: JointLimits<T>,
}

pub const CASE_IDS: std::ops::RangeInclusive<u32> = 1..=7;

impl<T: Scalar> CaseSpec<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("ring_flexion_dof", self.ring_flexion_dof),
            ("little_flexion_dof", self.little_flexion_dof),
        ] {
            if !(2..=3).contains(&n) {
                return Err(Error::config(format!(
                    "case {}: {name} must be 2 or 3, got {n}",
                    self.id
                )));
            }
        }
        let mut seen = self.palm_joints.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.palm_joints.len() {
            return Err(Error::config(format!(
                "case {}: palm joint listed twice",
                self.id
            )));
        }
        let l = &self.limits;
        let mut all: Vec<&Interval<T>> = l.thumb.iter().collect();
        all.extend([
            &l.finger_abduction,
            &l.finger_proximal_flexion,
            &l.finger_distal_flexion,
            &l.ring_side_palm,
            &l.little_side_palm,
        ]);
        if all.iter().any(|iv| !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo <= iv.hi)) {
            return Err(Error::config(format!(
                "case {}: joint limits must be finite with lo <= hi",
                self.id
            )));
        }
        if !l.palm_coupling_bound.is_finite() {
            return Err(Error::config(format!("case {}: coupling bound not finite", self.id)));
        }
        Ok(())
    }

    pub fn has_palm_joint(&self, joint: PalmJoint) -> bool {
        self.palm_joints.contains(&joint)
    }

    pub fn flexion_dof(&self, digit: Digit) -> u8 {
        match digit {
            Digit::Thumb => 0,
            Digit::Index | Digit::Middle => 3,
            Digit::Ring => self.ring_flexion_dof,
            Digit::Little => self.little_flexion_dof,
        }
    }

    /// Total actuated joints of the hand.
    pub fn total_dof(&self) -> usize {
        5 + 4 + 4
            + (1 + self.ring_flexion_dof as usize)
            + (1 + self.little_flexion_dof as usize)
            + self.palm_joints.len()
    }

    /// Joint grid matching the chain built for `digit` under this case.
    pub fn grid(&self, params: &HandParams<T>, digit: Digit, step: T) -> Result<JointGrid<T>> {
        let l = &self.limits;
        if digit == Digit::Thumb {
            let ranges = l
                .thumb
                .iter()
                .map(|iv| iv.with_step(step))
                .collect::<Result<Vec<_>>>()?;
            return JointGrid::new(ranges, None);
        }
        let mut palm = palm_joints_for(params, self, digit);
        palm.sort();
        let mut ranges = Vec::new();
        for &joint in &palm {
            let iv = match joint {
                PalmJoint::RingSide => &l.ring_side_palm,
                PalmJoint::LittleSide => &l.little_side_palm,
            };
            ranges.push(iv.with_step(step)?);
        }
        ranges.push(l.finger_abduction.with_step(step)?);
        ranges.push(l.finger_proximal_flexion.with_step(step)?);
        for _ in 1..self.flexion_dof(digit) {
            ranges.push(l.finger_distal_flexion.with_step(step)?);
        }
        let coupling = (palm.len() == 2).then_some(Coupling {
            first: 0,
            second: 1,
            bound: l.palm_coupling_bound,
        });
        JointGrid::new(ranges, coupling)
    }

    /// Chain and grid for every digit, thumb first.
    pub fn digits(
        &self,
        params: &HandParams<T>,
        step: T,
    ) -> Result<Vec<(KinematicChain<T>, JointGrid<T>)>> {
        let chains = crate::kinematics::build_hand(self, params)?;
        chains
            .into_iter()
            .map(|c| {
                let g = self.grid(params, c.label(), step)?;
                Ok((c, g))
            })
            .collect()
    }
}

/// Built-in configuration `id` (1 to 7).
pub fn case_spec<T: Scalar>(id: u32) -> Result<CaseSpec<T>> {
    use PalmJoint::*;
    let (palm, ring, little): (&[PalmJoint], u8, u8) = match id {
        1 => (&[], 3, 3),
        2 => (&[LittleSide], 3, 3),
        3 => (&[RingSide], 3, 3),
        4 => (&[RingSide, LittleSide], 3, 3),
        5 => (&[LittleSide], 3, 2),
        6 => (&[RingSide], 2, 3),
        7 => (&[RingSide, LittleSide], 2, 2),
        _ => {
            return Err(Error::config(format!(
                "unknown case {id}; built-in cases are 1 to 7"
            )))
        }
    };
    Ok(CaseSpec {
        id,
        palm_joints: palm.to_vec(),
        ring_flexion_dof: ring,
        little_flexion_dof: little,
        limits: JointLimits::default(),
    })
}

/// All seven built-in cases.
pub fn catalog<T: Scalar>() -> Vec<CaseSpec<T>> {
    CASE_IDS.map(|id| case_spec(id).expect("built-in id")).collect()
}

/// Hand proportions normalized to unit hand length.
pub fn normalized_params<T: Scalar>() -> HandParams<T> {
    let l = T::lit;
    HandParams {
        hand_length: l(1.0),
        hand_width: l(0.54),
        finger_spacing: l(0.18),
        palm_depth: l(0.46),
        three_flexion_links: [l(0.18); 3],
        // distal joint removed, distal phalanges merged
        two_flexion_links: [l(0.18), l(0.36)],
        thumb_offset: l(0.10),
        thumb_links: [l(0.20); 3],
        thumb_base: DEFAULT_THUMB_BASE.map(l),
    }
}

/// Default thumb base translation, in hand lengths.
pub const DEFAULT_THUMB_BASE: [f64; 3] = [0.0, 0.0, 0.0];

/// Contents of a `--params` file: hand parameters and optional custom cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct HandConfig<T> {
    pub hand: HandParams<T>,
    #[serde(default, rename = "case", skip_serializing_if = "Vec::is_empty")]
    pub cases: Vec<CaseSpec<T>>,
}

impl<T: Scalar> Default for HandConfig<T> {
    fn default() -> Self {
        Self {
            hand: normalized_params(),
            cases: Vec::new(),
        }
    }
}

impl<T: Scalar> HandConfig<T> {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.hand.validate()?;
        self.cases.iter().try_for_each(CaseSpec::validate)
    }

    /// A custom case with this id if the file defines one, else the built-in case.
    pub fn case(&self, id: u32) -> Result<CaseSpec<T>> {
        match self.cases.iter().find(|c| c.id == id) {
            Some(c) => Ok(c.clone()),
            None => case_spec(id),
        }
    }
}
