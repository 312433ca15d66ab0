// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Coupling grids with an optional fine window near `g_c = 1`.

use serde::{Deserialize, Serialize};

use crate::error::SweepError;

/// Half-width of the automatic refinement window around `g_c = 1`.
pub const AUTO_REFINE_HALF_WIDTH: f64 = 1e-2;
/// Step of the automatic refinement window.
pub const AUTO_REFINE_STEP: f64 = 1e-4;

/// Closed range `start..=stop` sampled every `step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    fn validate(&self, what: &str) -> Result<(), SweepError> {
        let ok = [self.start, self.stop, self.step].iter().all(|v| v.is_finite())
            && self.step > 0.0
            && self.stop >= self.start;
        if !ok {
            return Err(SweepError::Config(format!(
                "{what}: need finite start <= stop and step > 0, got {}..{} step {}",
                self.start, self.stop, self.step
            )));
        }
        Ok(())
    }

    /// Sample points, snapped to 12 significant digits so that overlapping
    /// ranges produce identical values.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| snap(self.start + i as f64 * self.step)).collect()
    }
}

/// Refinement window near the critical point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    /// Step `1e-4` within `|g_c − 1| ≤ 1e-2`, clipped to the coarse range.
    Auto,
    Off,
    Window(Range),
}

/// `g_c` sampling: an explicit list or a range with refinement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GcGrid {
    Values(Vec<f64>),
    Range { range: Range, refine: Refinement },
}

fn snap(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

impl GcGrid {
    /// Resolved, strictly increasing points.
    pub fn points(&self) -> Result<Vec<f64>, SweepError> {
        let pts = match self {
            GcGrid::Values(v) => {
                if v.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(SweepError::Config("g_c values must be strictly increasing".into()));
                }
                v.clone()
            }
            GcGrid::Range { range, refine } => {
                range.validate("g_c range")?;
                let mut pts = range.points();
                let window = match refine {
                    Refinement::Off => None,
                    Refinement::Auto => {
                        let lo = (1.0 - AUTO_REFINE_HALF_WIDTH).max(range.start);
                        let hi = (1.0 + AUTO_REFINE_HALF_WIDTH).min(range.stop);
                        (lo < hi).then(|| {
                            let first = (lo / AUTO_REFINE_STEP - 1e-9).ceil() * AUTO_REFINE_STEP;
                            Range { start: snap(first), stop: hi, step: AUTO_REFINE_STEP }
                        })
                    }
                    Refinement::Window(w) => {
                        w.validate("refinement window")?;
                        if w.start < range.start || w.stop > range.stop {
                            return Err(SweepError::Config(format!(
                                "refinement window {}..{} lies outside the range {}..{}",
                                w.start, w.stop, range.start, range.stop
                            )));
                        }
                        Some(*w)
                    }
                };
                if let Some(w) = window {
                    pts.extend(w.points());
                }
                pts.sort_by(f64::total_cmp);
                pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
                pts
            }
        };
        if pts.is_empty() {
            return Err(SweepError::Config("g_c grid is empty".into()));
        }
        if pts.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(SweepError::Config("g_c values must be finite and non-negative".into()));
        }
        Ok(pts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_with_window_merges_overlap() {
        let g = GcGrid::Range {
            range: Range { start: 0.9, stop: 1.1, step: 0.01 },
            refine: Refinement::Window(Range { start: 0.99, stop: 1.01, step: 0.001 }),
        };
        let p = g.points().unwrap();
        assert_eq!(p.len(), 21 + 21 - 3);
        assert!(p.windows(2).all(|w| w[1] > w[0]));
        assert!(p.contains(&1.0) && p.contains(&0.995));
    }

    #[test]
    fn auto_refinement_is_clipped() {
        let g = GcGrid::Range { range: Range { start: 0.5, stop: 1.0, step: 0.1 }, refine: Refinement::Auto };
        let p = g.points().unwrap();
        assert_eq!(p.len(), 6 + 100);
        assert_eq!(*p.last().unwrap(), 1.0);
        let far = GcGrid::Range { range: Range { start: 0.1, stop: 0.5, step: 0.1 }, refine: Refinement::Auto };
        assert_eq!(far.points().unwrap().len(), 5);
    }

    #[test]
    fn invalid_grids() {
        assert!(GcGrid::Values(vec![]).points().is_err());
        assert!(GcGrid::Values(vec![0.5, 0.5]).points().is_err());
        assert!(GcGrid::Values(vec![-0.1, 0.5]).points().is_err());
        let outside = GcGrid::Range {
            range: Range { start: 0.9, stop: 1.0, step: 0.01 },
            refine: Refinement::Window(Range { start: 0.99, stop: 1.01, step: 0.001 }),
        };
        assert!(outside.points().is_err());
        let bad_step = GcGrid::Range { range: Range { start: 0.9, stop: 1.0, step: 0.0 }, refine: Refinement::Off };
        assert!(bad_step.points().is_err());
    }
}
