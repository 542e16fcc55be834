//! Case runs, the resolution study, reference comparison and file output.

mod convergence;
mod export;
mod reference;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::cases::{case_spec, normalized_params, CaseSpec, PalmJoint};
use crate::error::{Error, Result};
use crate::kinematics::{digit_chain, Digit, HandParams, KinematicChain};
use crate::overlap::{overlap_labeled, overlap_ratio, vwrc, OverlapResult, VwrcStats};
use crate::sampling::JointGrid;
use crate::voxelize::{workspace, VoxelSet};

pub use convergence::{convergence_study, ConvergenceFlag, ConvergenceRow, ConvergenceStudy, CONVERGENCE_THRESHOLD_PCT};
pub use export::{
    read_csv, read_report, write_csv, write_json, write_ply, write_run, ExportFormat,
};
pub use reference::{compare, ComparisonRow, Metric, ReferenceEntry, ReferenceTable};

/// Default voxel edge length.
pub const DEFAULT_DELTA: f64 = 0.05;
/// Default joint sampling step is `pi / DEFAULT_STEP_DIVISOR`.
pub const DEFAULT_STEP_DIVISOR: f64 = 60.0;

pub fn default_step() -> f64 {
    std::f64::consts::PI / DEFAULT_STEP_DIVISOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitReport {
    pub digit: Digit,
    pub dof: usize,
    pub axis_counts: Vec<usize>,
    pub samples: u64,
    pub voxels: usize,
    pub volume: f64,
}

/// Thumb-to-finger overlap figures for one finger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub finger: Digit,
    pub overlap_voxels: usize,
    pub overlap_volume: f64,
    pub reachable_volume: f64,
    /// Overlap as a percentage of this case's reachable volume of the finger.
    pub ratio_own_pct: f64,
    pub baseline_reachable_volume: f64,
    pub baseline_overlap_volume: f64,
    /// Overlap as a percentage of the baseline (case 1) reachable volume.
    pub ratio_baseline_pct: f64,
    /// Percent change of the overlap volume against case 1; absent when the baseline overlap is empty.
    pub overlap_change_pct: Option<f64>,
    pub reachable_change_pct: f64,
    pub thumb_vwrc: Option<VwrcStats>,
    pub finger_vwrc: Option<VwrcStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case_id: u32,
    pub total_dof: usize,
    pub palm_joints: Vec<PalmJoint>,
    pub ring_flexion_dof: u8,
    pub little_flexion_dof: u8,
    pub delta: f64,
    pub step: f64,
    pub digits: Vec<DigitReport>,
    pub pairs: Vec<PairReport>,
    /// Wall-clock time of the run. Not serialized, so reports stay byte-stable.
    #[serde(skip)]
    pub duration: Duration,
}

impl CaseReport {
    pub fn digit(&self, digit: Digit) -> Option<&DigitReport> {
        self.digits.iter().find(|d| d.digit == digit)
    }

    pub fn pair(&self, finger: Digit) -> Option<&PairReport> {
        self.pairs.iter().find(|p| p.finger == finger)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Input(e.to_string()))
    }
}

/// Percent change from `baseline` to `value`.
pub fn percent_change(value: f64, baseline: f64) -> Option<f64> {
    (baseline != 0.0).then(|| 100.0 * (value - baseline) / baseline)
}

/// Everything computed for one case: the report plus the voxel sets behind it.
#[derive(Debug, Clone)]
pub struct CaseRun {
    pub report: CaseReport,
    /// Workspaces in [`Digit::ALL`] order.
    pub workspaces: Vec<Arc<VoxelSet<f64>>>,
    /// Thumb overlaps with index, middle, ring, little.
    pub overlaps: Vec<OverlapResult<f64>>,
}

impl CaseRun {
    pub fn workspace(&self, digit: Digit) -> &VoxelSet<f64> {
        &self.workspaces[digit.ordinal()]
    }

    pub fn overlap(&self, finger: Digit) -> Option<&OverlapResult<f64>> {
        self.overlaps.iter().find(|o| o.pair.1 == finger)
    }
}

type DigitSets = (Vec<DigitReport>, Vec<Arc<VoxelSet<f64>>>);

/// Runs cases at one resolution, memoizing workspaces shared between cases.
pub struct Analyzer {
    params: HandParams<f64>,
    delta: f64,
    step: f64,
    pool: rayon::ThreadPool,
    cache: Mutex<HashMap<String, Arc<VoxelSet<f64>>>>,
}

impl Analyzer {
    /// `threads = None` uses one worker per core.
    pub fn new(params: HandParams<f64>, delta: f64, step: f64, threads: Option<usize>) -> Result<Self> {
        params.validate()?;
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Parameter(format!("voxel size must be positive, got {delta}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Parameter(format!("joint step must be positive, got {step}")));
        }
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            if n == 0 {
                return Err(Error::Parameter("thread count must be at least 1".into()));
            }
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?;
        Ok(Self {
            params,
            delta,
            step,
            pool,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_defaults() -> Result<Self> {
        Self::new(normalized_params(), DEFAULT_DELTA, default_step(), None)
    }

    pub fn params(&self) -> &HandParams<f64> {
        &self.params
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    fn digit_workspace(
        &self,
        chain: &KinematicChain<f64>,
        grid: &JointGrid<f64>,
    ) -> Result<Arc<VoxelSet<f64>>> {
        let key = format!("{chain:?}|{grid:?}|{}", self.delta);
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        log::info!(
            "{}: axis counts {:?}, {} samples",
            chain.label(),
            grid.axis_counts(),
            grid.len()
        );
        let set = Arc::new(self.pool.install(|| workspace(chain, grid, self.delta))?);
        self.cache
            .lock()
            .expect("cache lock")
            .insert(key, Arc::clone(&set));
        Ok(set)
    }

    fn case_workspaces(
        &self,
        case: &CaseSpec<f64>,
    ) -> Result<DigitSets> {
        case.validate()?;
        let mut reports = Vec::with_capacity(5);
        let mut sets = Vec::with_capacity(5);
        for digit in Digit::ALL {
            let chain = digit_chain(case, &self.params, digit)?;
            let grid = case.grid(&self.params, digit, self.step)?;
            let set = self.digit_workspace(&chain, &grid)?;
            reports.push(DigitReport {
                digit,
                dof: chain.dof(),
                axis_counts: grid.axis_counts(),
                samples: set.total_count(),
                voxels: set.len(),
                volume: set.volume(),
            });
            sets.push(set);
        }
        Ok((reports, sets))
    }

    /// Workspaces, overlaps, ratios and VWRC statistics for one case.
    pub fn run(&self, case: &CaseSpec<f64>) -> Result<CaseRun> {
        let started = Instant::now();
        let (digits, sets) = self.case_workspaces(case)?;
        let baseline = if case.id == 1 && *case == case_spec(1)? {
            None
        } else {
            Some(self.case_workspaces(&case_spec(1)?)?)
        };
        let thumb = &sets[Digit::Thumb.ordinal()];
        let mut pairs = Vec::with_capacity(4);
        let mut overlaps = Vec::with_capacity(4);
        for finger in Digit::FINGERS {
            let fs = &sets[finger.ordinal()];
            let ov = overlap_labeled(thumb, fs, (Digit::Thumb, finger))?;
            let (base_reach, base_overlap) = match &baseline {
                None => (fs.volume(), ov.volume),
                Some((_, bsets)) => {
                    let bf = &bsets[finger.ordinal()];
                    let bt = &bsets[Digit::Thumb.ordinal()];
                    (bf.volume(), overlap_labeled(bt, bf, (Digit::Thumb, finger))?.volume)
                }
            };
            let reach = fs.volume();
            pairs.push(PairReport {
                finger,
                overlap_voxels: ov.len(),
                overlap_volume: ov.volume,
                reachable_volume: reach,
                ratio_own_pct: overlap_ratio(ov.volume, reach)?,
                baseline_reachable_volume: base_reach,
                baseline_overlap_volume: base_overlap,
                ratio_baseline_pct: overlap_ratio(ov.volume, base_reach)?,
                overlap_change_pct: percent_change(ov.volume, base_overlap),
                reachable_change_pct: percent_change(reach, base_reach)
                    .ok_or(Error::Division("baseline reachable volume is zero"))?,
                thumb_vwrc: vwrc(&ov.thumb_vwrc).ok(),
                finger_vwrc: vwrc(&ov.finger_vwrc).ok(),
            });
            overlaps.push(ov);
        }
        let report = CaseReport {
            case_id: case.id,
            total_dof: case.total_dof(),
            palm_joints: case.palm_joints.clone(),
            ring_flexion_dof: case.ring_flexion_dof,
            little_flexion_dof: case.little_flexion_dof,
            delta: self.delta,
            step: self.step,
            digits,
            pairs,
            duration: started.elapsed(),
        };
        Ok(CaseRun {
            report,
            workspaces: sets,
            overlaps,
        })
    }

    pub fn run_id(&self, id: u32) -> Result<CaseRun> {
        self.run(&case_spec(id)?)
    }

    /// Reachable volume of one digit under one case.
    pub fn digit_volume(&self, case: &CaseSpec<f64>, digit: Digit) -> Result<f64> {
        let chain = digit_chain(case, &self.params, digit)?;
        let grid = case.grid(&self.params, digit, self.step)?;
        Ok(self.digit_workspace(&chain, &grid)?.volume())
    }
}

/// Report for built-in case `id` with the default hand at the given resolution.
pub fn run_case(id: u32, delta: f64, step: f64) -> Result<CaseReport> {
    let analyzer = Analyzer::new(normalized_params(), delta, step, None)?;
    Ok(analyzer.run_id(id)?.report)
}
