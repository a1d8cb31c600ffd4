use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::fmt17;

/// Samples of a parametric solution `θ ↦ (z(θ), w(θ))` together with the
/// exact slope `dw/dz` at each sample.
///
/// `z(θ)` need not be monotone. The samples are split into maximal runs on
/// which `z` is strictly monotone, and each run is a single-valued branch of
/// `w(z)` interpolated by cubic Hermite polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCurve", into = "RawCurve")]
pub struct ParametricCurve {
    theta: Vec<f64>,
    z: Vec<f64>,
    w: Vec<f64>,
    slope: Vec<f64>,
    /// End of the θ range when the builder had to stop early.
    truncated_at: Option<f64>,
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    /// Inclusive sample indices.
    first: usize,
    last: usize,
    increasing: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    theta: Vec<f64>,
    z: Vec<f64>,
    w: Vec<f64>,
    slope: Vec<f64>,
    #[serde(default)]
    truncated_at: Option<f64>,
}

impl TryFrom<RawCurve> for ParametricCurve {
    type Error = Error;
    fn try_from(raw: RawCurve) -> Result<Self> {
        let mut c = ParametricCurve::new(raw.theta, raw.z, raw.w, raw.slope)?;
        c.truncated_at = raw.truncated_at;
        Ok(c)
    }
}

impl From<ParametricCurve> for RawCurve {
    fn from(c: ParametricCurve) -> Self {
        RawCurve {
            theta: c.theta,
            z: c.z,
            w: c.w,
            slope: c.slope,
            truncated_at: c.truncated_at,
        }
    }
}

impl ParametricCurve {
    pub fn new(theta: Vec<f64>, z: Vec<f64>, w: Vec<f64>, slope: Vec<f64>) -> Result<Self> {
        let n = theta.len();
        if n < 2 || z.len() != n || w.len() != n || slope.len() != n {
            return Err(Error::Config("curve needs ≥ 2 samples and equal-length columns".into()));
        }
        let increasing = theta[1] > theta[0];
        if theta.windows(2).any(|p| (p[1] > p[0]) != increasing || p[1] == p[0]) {
            return Err(Error::Config("curve θ samples must be strictly monotone".into()));
        }
        if z.iter().chain(&w).chain(&slope).chain(&theta).any(|x| !x.is_finite()) {
            return Err(Error::Config("curve samples must be finite".into()));
        }
        if z.iter().any(|&x| x <= 0.0) {
            return Err(Error::Config("curve z samples must be positive".into()));
        }
        let segments = split_monotone(&z);
        Ok(ParametricCurve {
            theta,
            z,
            w,
            slope,
            truncated_at: None,
            segments,
        })
    }

    pub(crate) fn with_truncation(mut self, at: Option<f64>) -> Self {
        self.truncated_at = at;
        self
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }
    pub fn z(&self) -> &[f64] {
        &self.z
    }
    pub fn w(&self) -> &[f64] {
        &self.w
    }
    pub fn slope(&self) -> &[f64] {
        &self.slope
    }
    pub fn truncated_at(&self) -> Option<f64> {
        self.truncated_at
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    /// `(z_min, z_max)` covered by a monotone segment.
    pub fn z_range(&self, segment: usize) -> Result<(f64, f64)> {
        let seg = self.segment(segment)?;
        let (a, b) = (self.z[seg.first], self.z[seg.last]);
        Ok((a.min(b), a.max(b)))
    }

    /// Sample index range `(first, last)` of a segment, inclusive.
    pub fn segment_indices(&self, segment: usize) -> Result<(usize, usize)> {
        self.segment(segment).map(|s| (s.first, s.last))
    }

    fn segment(&self, segment: usize) -> Result<&Segment> {
        self.segments
            .get(segment)
            .ok_or_else(|| Error::Config(format!("curve has no segment {segment}")))
    }

    /// Interpolated `w(z)` on a monotone segment.
    pub fn eval(&self, segment: usize, z: f64) -> Result<f64> {
        self.eval_with_derivatives(segment, z).map(|(w, _, _)| w)
    }

    /// `(w, w_z, w_zz)` of the interpolant.
    pub fn eval_with_derivatives(&self, segment: usize, z: f64) -> Result<(f64, f64, f64)> {
        let i = self.cell(segment, z)?;
        Ok(hermite(
            (self.z[i], self.w[i], self.slope[i]),
            (self.z[i + 1], self.w[i + 1], self.slope[i + 1]),
            z,
        ))
    }

    /// Index `i` of the cell `[z_i, z_{i+1}]` of a segment containing `z`.
    pub fn cell(&self, segment: usize, z: f64) -> Result<usize> {
        let seg = *self.segment(segment)?;
        let (lo, hi) = self.z_range(segment)?;
        if !(z >= lo && z <= hi) {
            return Err(Error::OutsideSupport { z, lo, hi });
        }
        let zs = &self.z[seg.first..=seg.last];
        let k = if seg.increasing {
            zs.partition_point(|&x| x <= z)
        } else {
            zs.partition_point(|&x| x >= z)
        };
        Ok(seg.first + k.clamp(1, zs.len() - 1) - 1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,z,w,dw_dz\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt17(self.theta[i]),
                fmt17(self.z[i]),
                fmt17(self.w[i]),
                fmt17(self.slope[i])
            ));
        }
        out
    }
}

fn split_monotone(z: &[f64]) -> Vec<Segment> {
    let mut segments = Vec::new();
    let mut first = 0;
    while first + 1 < z.len() {
        if z[first + 1] == z[first] {
            first += 1;
            continue;
        }
        let increasing = z[first + 1] > z[first];
        let mut last = first + 1;
        while last + 1 < z.len() && (z[last + 1] > z[last]) == increasing && z[last + 1] != z[last] {
            last += 1;
        }
        segments.push(Segment {
            first,
            last,
            increasing,
        });
        first = last;
    }
    segments
}

/// Cubic Hermite value and first two derivatives.
fn hermite(a: (f64, f64, f64), b: (f64, f64, f64), x: f64) -> (f64, f64, f64) {
    let (x0, y0, m0) = a;
    let (x1, y1, m1) = b;
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (t2, t3) = (t * t, t * t * t);
    let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * m1;
    let d1 = ((6.0 * t2 - 6.0 * t) * y0 + (-6.0 * t2 + 6.0 * t) * y1) / h
        + (3.0 * t2 - 4.0 * t + 1.0) * m0
        + (3.0 * t2 - 2.0 * t) * m1;
    let d2 =
        ((12.0 * t - 6.0) * y0 + (-12.0 * t + 6.0) * y1) / (h * h) + ((6.0 * t - 4.0) * m0 + (6.0 * t - 2.0) * m1) / h;
    (value, d1, d2)
}
