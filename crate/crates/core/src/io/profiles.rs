//! Normalized daily demand shapes, 48 half-hour samples each, peak 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandProfile {
    LongPeak,
    ShortPeak,
    SgscSummer,
    SgscWinter,
    Flat,
}

pub const SAMPLES: usize = 48;

#[rustfmt::skip]
const LONG_PEAK: [f64; SAMPLES] = [
    0.351, 0.351, 0.351, 0.351, 0.351, 0.352, 0.353, 0.355, 0.358, 0.364, 0.374, 0.392,
    0.422, 0.469, 0.539, 0.628, 0.725, 0.814, 0.883, 0.931, 0.961, 0.979, 0.989, 0.995,
    0.998, 0.999, 1.0, 1.0, 0.999, 0.998, 0.995, 0.989, 0.979, 0.961, 0.931, 0.883,
    0.814, 0.725, 0.628, 0.539, 0.469, 0.422, 0.392, 0.374, 0.364, 0.358, 0.355, 0.353,
];

#[rustfmt::skip]
const SHORT_PEAK: [f64; SAMPLES] = [
    0.295, 0.295, 0.295, 0.296, 0.297, 0.298, 0.299, 0.301, 0.303, 0.306, 0.309, 0.313,
    0.317, 0.323, 0.329, 0.335, 0.342, 0.35, 0.357, 0.364, 0.371, 0.378, 0.383, 0.387,
    0.39, 0.392, 0.392, 0.39, 0.387, 0.384, 0.381, 0.387, 0.419, 0.505, 0.664, 0.86,
    1.0, 0.993, 0.84, 0.631, 0.461, 0.363, 0.321, 0.306, 0.301, 0.299, 0.298, 0.297,
];

#[rustfmt::skip]
const SGSC_SUMMER: [f64; SAMPLES] = [
    0.282, 0.282, 0.282, 0.282, 0.282, 0.284, 0.286, 0.292, 0.304, 0.325, 0.359, 0.407,
    0.468, 0.532, 0.588, 0.623, 0.629, 0.607, 0.565, 0.515, 0.47, 0.438, 0.422, 0.421,
    0.432, 0.453, 0.484, 0.525, 0.576, 0.639, 0.712, 0.791, 0.868, 0.934, 0.981, 1.0,
    0.987, 0.943, 0.872, 0.784, 0.688, 0.594, 0.51, 0.441, 0.387, 0.348, 0.321, 0.304,
];

#[rustfmt::skip]
const SGSC_WINTER: [f64; SAMPLES] = [
    0.32, 0.32, 0.32, 0.32, 0.321, 0.322, 0.325, 0.334, 0.354, 0.393, 0.459, 0.551,
    0.658, 0.756, 0.816, 0.816, 0.756, 0.658, 0.551, 0.459, 0.393, 0.354, 0.334, 0.326,
    0.324, 0.325, 0.33, 0.341, 0.363, 0.399, 0.455, 0.534, 0.634, 0.748, 0.86, 0.95,
    1.0, 1.0, 0.95, 0.86, 0.748, 0.634, 0.534, 0.455, 0.399, 0.363, 0.341, 0.33,
];

const FLAT: [f64; SAMPLES] = [1.0; SAMPLES];

impl DemandProfile {
    pub const ALL: [DemandProfile; 5] = [
        DemandProfile::LongPeak,
        DemandProfile::ShortPeak,
        DemandProfile::SgscSummer,
        DemandProfile::SgscWinter,
        DemandProfile::Flat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DemandProfile::LongPeak => "long_peak",
            DemandProfile::ShortPeak => "short_peak",
            DemandProfile::SgscSummer => "sgsc_summer",
            DemandProfile::SgscWinter => "sgsc_winter",
            DemandProfile::Flat => "flat",
        }
    }

    pub fn samples(self) -> &'static [f64; SAMPLES] {
        match self {
            DemandProfile::LongPeak => &LONG_PEAK,
            DemandProfile::ShortPeak => &SHORT_PEAK,
            DemandProfile::SgscSummer => &SGSC_SUMMER,
            DemandProfile::SgscWinter => &SGSC_WINTER,
            DemandProfile::Flat => &FLAT,
        }
    }

    /// The profile on a grid of `intervals` equal intervals: each value is
    /// the mean of the half-hour step function over its interval.
    pub fn resample(self, intervals: usize) -> Vec<f64> {
        assert!(intervals > 0, "at least one interval");
        let samples = self.samples();
        if intervals == SAMPLES {
            return samples.to_vec();
        }
        // Work in units of 1/(48 T) of a day so every breakpoint is an integer.
        (0..intervals)
            .map(|t| {
                let (start, end) = (t * SAMPLES, (t + 1) * SAMPLES);
                let mut acc = 0.0;
                let mut pos = start;
                while pos < end {
                    let sample = pos / intervals;
                    let next = ((sample + 1) * intervals).min(end);
                    acc += samples[sample] * (next - pos) as f64;
                    pos = next;
                }
                acc / SAMPLES as f64
            })
            .collect()
    }

    /// `peak * resample(intervals)`.
    pub fn demand(self, peak: f64, intervals: usize) -> Vec<f64> {
        self.resample(intervals).into_iter().map(|v| peak * v).collect()
    }
}

impl fmt::Display for DemandProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DemandProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DemandProfile::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = DemandProfile::ALL.iter().map(|p| p.name()).collect();
            format!("unknown profile '{s}' (expected one of {})", names.join(", "))
        })
    }
}
