use serde::{Deserialize, Serialize};

use super::{percent_change, Analyzer};
use crate::cases::case_spec;
use crate::error::{Error, Result};
use crate::kinematics::{Digit, HandParams};

/// Refinement is considered settled once the volume moves by less than this.
pub const CONVERGENCE_THRESHOLD_PCT: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub case_id: u32,
    pub digit: Digit,
    pub delta: f64,
    pub step: f64,
    pub volume: f64,
}

/// Per (case, digit, delta): how the volume moves as the step is refined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFlag {
    pub case_id: u32,
    pub digit: Digit,
    pub delta: f64,
    /// Steps from coarse to fine.
    pub steps: Vec<f64>,
    /// Absolute percent change between consecutive steps.
    pub changes_pct: Vec<f64>,
    /// Coarsest step whose refinement changes the volume by less than the threshold.
    pub converged_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub flags: Vec<ConvergenceFlag>,
}

impl ConvergenceStudy {
    pub fn volume(&self, case_id: u32, digit: Digit, delta: f64, step: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.case_id == case_id && r.digit == digit && r.delta == delta && r.step == step)
            .map(|r| r.volume)
    }

    pub fn flag(&self, case_id: u32, digit: Digit, delta: f64) -> Option<&ConvergenceFlag> {
        self.flags
            .iter()
            .find(|f| f.case_id == case_id && f.digit == digit && f.delta == delta)
    }
}

/// Volume of each `(case, digit)` target for every combination of voxel size and step.
pub fn convergence_study(
    params: &HandParams<f64>,
    targets: &[(u32, Digit)],
    deltas: &[f64],
    steps: &[f64],
    threads: Option<usize>,
) -> Result<ConvergenceStudy> {
    if targets.is_empty() || deltas.is_empty() || steps.is_empty() {
        return Err(Error::Parameter(
            "convergence study needs at least one target, voxel size and step".into(),
        ));
    }
    let mut ordered = steps.to_vec();
    ordered.sort_by(|a, b| b.total_cmp(a));

    let mut rows = Vec::new();
    let mut flags = Vec::new();
    for &delta in deltas {
        let mut volumes = vec![Vec::with_capacity(ordered.len()); targets.len()];
        for &step in &ordered {
            let analyzer = Analyzer::new(params.clone(), delta, step, threads)?;
            for (t, &(case_id, digit)) in targets.iter().enumerate() {
                let volume = analyzer.digit_volume(&case_spec(case_id)?, digit)?;
                log::info!("case {case_id} {digit} delta {delta} step {step}: {volume}");
                rows.push(ConvergenceRow { case_id, digit, delta, step, volume });
                volumes[t].push(volume);
            }
        }
        for (t, &(case_id, digit)) in targets.iter().enumerate() {
            let changes_pct: Vec<f64> = volumes[t]
                .windows(2)
                .map(|w| percent_change(w[1], w[0]).map_or(0.0, f64::abs))
                .collect();
            let converged_step = changes_pct
                .iter()
                .position(|&c| c < CONVERGENCE_THRESHOLD_PCT)
                .map(|i| ordered[i]);
            flags.push(ConvergenceFlag {
                case_id,
                digit,
                delta,
                steps: ordered.clone(),
                changes_pct,
                converged_step,
            });
        }
    }
    Ok(ConvergenceStudy { rows, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::normalized_params;
    use std::f64::consts::PI;

    #[test]
    fn identical_step_twice_is_zero_change() {
        let s = convergence_study(
            &normalized_params(),
            &[(1, Digit::Index)],
            &[0.1],
            &[PI / 12.0, PI / 12.0],
            Some(1),
        )
        .unwrap();
        let f = s.flag(1, Digit::Index, 0.1).unwrap();
        assert_eq!(f.changes_pct, vec![0.0]);
        assert_eq!(f.converged_step, Some(PI / 12.0));
        assert_eq!(s.rows.len(), 2);
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(convergence_study(&normalized_params(), &[], &[0.1], &[0.1], None).is_err());
        assert!(convergence_study(&normalized_params(), &[(1, Digit::Index)], &[], &[0.1], None).is_err());
    }
}
