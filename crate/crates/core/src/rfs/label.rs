use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Multi-sensor measurement index: one entry per sensor, `0` meaning the
/// sensor missed and `j >= 1` selecting the `j`-th measurement (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasurementTuple(pub Vec<usize>);

impl MeasurementTuple {
    pub fn all_miss(sensors: usize) -> Self {
        Self(vec![0; sensors])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn is_all_miss(&self) -> bool {
        self.0.iter().all(|&j| j == 0)
    }

    pub fn detections(&self) -> usize {
        self.0.iter().filter(|&&j| j != 0).count()
    }
}

impl fmt::Display for MeasurementTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, j) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{j}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabelOrigin {
    /// Static birth index, also used for ground-truth targets.
    Static(usize),
    /// Measurement tuple that spawned an adaptive birth.
    Tuple(MeasurementTuple),
}

/// Track label: birth time paired with origin. Ordered by birth time, then
/// origin.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub birth_time: usize,
    pub origin: LabelOrigin,
}

impl Label {
    pub fn fixed(birth_time: usize, index: usize) -> Self {
        Self {
            birth_time,
            origin: LabelOrigin::Static(index),
        }
    }

    pub fn adaptive(birth_time: usize, tuple: MeasurementTuple) -> Self {
        Self {
            birth_time,
            origin: LabelOrigin::Tuple(tuple),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.origin {
            LabelOrigin::Static(i) => write!(f, "{}:s{}", self.birth_time, i),
            LabelOrigin::Tuple(t) => write!(f, "{}:t{}", self.birth_time, t),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Config(format!("malformed label `{s}`"));
        let (time, origin) = s.split_once(':').ok_or_else(bad)?;
        let birth_time = time.parse().map_err(|_| bad())?;
        let origin = if let Some(rest) = origin.strip_prefix('s') {
            LabelOrigin::Static(rest.parse().map_err(|_| bad())?)
        } else if let Some(rest) = origin.strip_prefix('t') {
            let idx = rest
                .split('-')
                .map(|p| p.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad())?;
            LabelOrigin::Tuple(MeasurementTuple(idx))
        } else {
            return Err(bad());
        };
        Ok(Label { birth_time, origin })
    }
}
