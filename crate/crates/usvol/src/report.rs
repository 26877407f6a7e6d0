//! Machine-readable evaluation outputs and frame-sample selection.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use usvol_core::evaluate::{sample_evenly, sample_every, CenterlineFit, IoUReport};
use usvol_core::segment::CircleFit;

use crate::frameio::write_json;
use crate::{Error, Result};

/// Which frames to score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleSpec {
    All,
    /// `every:N`: indices `0, N, 2N, …`.
    Every(usize),
    /// `even:K`: `K` indices spread over the stack, first and last included.
    Even(usize),
    /// Comma-separated explicit indices.
    List(Vec<usize>),
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec::Even(20)
    }
}

impl FromStr for SampleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "invalid sample spec {s:?}; expected all, every:N, even:K or a comma list"
            ))
        };
        let s = s.trim();
        if s == "all" {
            return Ok(SampleSpec::All);
        }
        let positive = |n: &str| {
            n.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(bad)
        };
        if let Some(n) = s.strip_prefix("every:") {
            return Ok(SampleSpec::Every(positive(n)?));
        }
        if let Some(n) = s.strip_prefix("even:") {
            return Ok(SampleSpec::Even(positive(n)?));
        }
        let list = s
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        Ok(SampleSpec::List(list))
    }
}

impl SampleSpec {
    pub fn indices(&self, len: usize) -> Vec<usize> {
        match self {
            SampleSpec::All => (0..len).collect(),
            SampleSpec::Every(n) => sample_every(len, *n),
            SampleSpec::Even(k) => sample_evenly(len, *k),
            SampleSpec::List(v) => v.clone(),
        }
    }
}

/// `frame_index,iou` rows in sample order, then a `mean,<value>` row.
pub fn iou_csv(report: &IoUReport) -> String {
    let mut out = String::from("frame_index,iou\n");
    for (k, v) in &report.per_frame {
        writeln!(out, "{k},{v:.6}").unwrap();
    }
    writeln!(out, "mean,{:.6}", report.mean_iou).unwrap();
    out
}

pub fn write_iou_csv(path: &Path, report: &IoUReport) -> Result<()> {
    fs::write(path, iou_csv(report)).map_err(Error::io(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleRecord {
    pub frame: usize,
    pub cx: usize,
    pub cy: usize,
    pub r: usize,
    pub votes: u32,
}

impl CircleRecord {
    pub fn new(frame: usize, c: &CircleFit) -> Self {
        CircleRecord {
            frame,
            cx: c.cx,
            cy: c.cy,
            r: c.r,
            votes: c.votes,
        }
    }

    pub fn fit(&self) -> CircleFit {
        CircleFit {
            cx: self.cx,
            cy: self.cy,
            r: self.r,
            votes: self.votes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterlineRecord {
    pub frames_used: usize,
    pub slope_px_per_frame: [f64; 2],
    pub intercept_px: [f64; 2],
    pub rms_residual_px: f64,
}

impl CenterlineRecord {
    pub fn new(fit: &CenterlineFit, frames_used: usize) -> Self {
        CenterlineRecord {
            frames_used,
            slope_px_per_frame: fit.slope,
            intercept_px: fit.intercept,
            rms_residual_px: fit.rms_residual,
        }
    }
}

pub fn write_circles(path: &Path, circles: &[CircleRecord]) -> Result<()> {
    write_json(path, &circles)
}

pub fn write_centerline(path: &Path, record: &CenterlineRecord) -> Result<()> {
    write_json(path, record)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sample_specs() {
        assert_eq!(
            "every:8".parse::<SampleSpec>().unwrap().indices(150).len(),
            19
        );
        assert_eq!(
            "even:20".parse::<SampleSpec>().unwrap().indices(150).len(),
            20
        );
        assert_eq!(
            "all".parse::<SampleSpec>().unwrap().indices(7),
            (0..7).collect::<Vec<_>>()
        );
        assert_eq!(
            "3, 1,4".parse::<SampleSpec>().unwrap(),
            SampleSpec::List(vec![3, 1, 4])
        );
        for bad in ["every:0", "every:x", "even:", "1,,2", ""] {
            assert!(bad.parse::<SampleSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn csv_layout() {
        let rep = IoUReport {
            per_frame: vec![(0, 1.0), (8, 0.5)],
            mean_iou: 0.75,
            sampled_indices: vec![0, 8],
        };
        assert_eq!(
            iou_csv(&rep),
            "frame_index,iou\n0,1.000000\n8,0.500000\nmean,0.750000\n"
        );
    }
}
