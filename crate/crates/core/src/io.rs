//! Plain-text measurement, truth and estimate files.
//!
//! Every file starts with a header line naming its kind and sizes, followed
//! by one whitespace-separated record per line. Reals are written with nine
//! significant digits.
//!
//! ```text
//! measurements <sensors> <horizon>
//! <k> <sensor> <j> <x> <y>
//!
//! truth <horizon>
//! <k> <target> <p_x> <v_x> <p_y> <v_y>
//!
//! estimates <horizon>
//! <k> <label> <p_x> <v_x> <p_y> <v_y>
//! ```
//!
//! Sensors and targets are 0-based, measurement indices `j` are 1-based.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::{position, TrajectorySet};
use crate::models::MeasurementFrame;
use crate::rfs::{Estimate, Label, Measurement, StateVector};

fn real(x: f64) -> String {
    format!("{x:.8e}")
}

fn state_fields(x: &StateVector) -> String {
    x.iter().map(|&v| real(v)).collect::<Vec<_>>().join(" ")
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn field<T: FromStr>(fields: &[&str], i: usize, line: usize, name: &str) -> Result<T> {
    let raw = fields
        .get(i)
        .ok_or_else(|| parse_err(line, format!("missing field '{name}'")))?;
    raw.parse()
        .map_err(|_| parse_err(line, format!("invalid {name} '{raw}'")))
}

fn finite(x: f64, line: usize) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(parse_err(line, "non-finite value"))
    }
}

/// Parse the header line and return its numeric fields.
fn header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    kind: &str,
    sizes: usize,
) -> Result<Vec<usize>> {
    let (n, text) = lines
        .next()
        .ok_or_else(|| parse_err(1, format!("missing '{kind}' header")))?;
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.first() != Some(&kind) || fields.len() != sizes + 1 {
        return Err(parse_err(n, format!("expected header '{kind}' with {sizes} size field(s)")));
    }
    (1..=sizes).map(|i| field(&fields, i, n, "size")).collect()
}

fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub fn format_measurements(sensors: usize, frames: &[MeasurementFrame]) -> String {
    let mut out = format!("measurements {sensors} {}\n", frames.len());
    for (k, frame) in frames.iter().enumerate() {
        for (s, zs) in frame.per_sensor.iter().enumerate() {
            for (j, z) in zs.iter().enumerate() {
                out.push_str(&format!("{k} {s} {} {} {}\n", j + 1, real(z[0]), real(z[1])));
            }
        }
    }
    out
}

/// Returns the sensor count and one frame per step.
pub fn parse_measurements(text: &str) -> Result<(usize, Vec<MeasurementFrame>)> {
    let mut lines = records(text);
    let sizes = header(&mut lines, "measurements", 2)?;
    let (sensors, horizon) = (sizes[0], sizes[1]);
    let mut frames: Vec<MeasurementFrame> = (0..horizon)
        .map(|k| MeasurementFrame::new(k, vec![Vec::new(); sensors]))
        .collect();
    for (n, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(parse_err(n, format!("expected 5 fields, found {}", f.len())));
        }
        let k: usize = field(&f, 0, n, "step")?;
        let s: usize = field(&f, 1, n, "sensor")?;
        let j: usize = field(&f, 2, n, "index")?;
        if k >= horizon {
            return Err(parse_err(n, format!("step {k} outside horizon {horizon}")));
        }
        if s >= sensors {
            return Err(parse_err(n, format!("sensor {s} outside sensor count {sensors}")));
        }
        let list = &mut frames[k].per_sensor[s];
        if j != list.len() + 1 {
            return Err(parse_err(n, format!("expected index {}, found {j}", list.len() + 1)));
        }
        let x = finite(field(&f, 3, n, "x")?, n)?;
        let y = finite(field(&f, 4, n, "y")?, n)?;
        list.push(Measurement::new(x, y));
    }
    Ok((sensors, frames))
}

pub fn format_truth(truth: &[Vec<(usize, StateVector)>]) -> String {
    let mut out = format!("truth {}\n", truth.len());
    for (k, live) in truth.iter().enumerate() {
        for (i, x) in live {
            out.push_str(&format!("{k} {i} {}\n", state_fields(x)));
        }
    }
    out
}

fn parse_state(f: &[&str], n: usize) -> Result<StateVector> {
    let mut x = StateVector::zeros();
    for (i, name) in ["p_x", "v_x", "p_y", "v_y"].iter().enumerate() {
        x[i] = finite(field(f, 2 + i, n, name)?, n)?;
    }
    Ok(x)
}

pub fn parse_truth(text: &str) -> Result<Vec<Vec<(usize, StateVector)>>> {
    let mut lines = records(text);
    let horizon = header(&mut lines, "truth", 1)?[0];
    let mut truth = vec![Vec::new(); horizon];
    for (n, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            return Err(parse_err(n, format!("expected 6 fields, found {}", f.len())));
        }
        let k: usize = field(&f, 0, n, "step")?;
        if k >= horizon {
            return Err(parse_err(n, format!("step {k} outside horizon {horizon}")));
        }
        let i: usize = field(&f, 1, n, "target")?;
        truth[k].push((i, parse_state(&f, n)?));
    }
    Ok(truth)
}

pub fn format_estimates(estimates: &[Vec<Estimate>]) -> String {
    let mut out = format!("estimates {}\n", estimates.len());
    for (k, step) in estimates.iter().enumerate() {
        for e in step {
            out.push_str(&format!("{k} {} {}\n", e.label, state_fields(&e.state)));
        }
    }
    out
}

pub fn parse_estimates(text: &str) -> Result<Vec<Vec<Estimate>>> {
    let mut lines = records(text);
    let horizon = header(&mut lines, "estimates", 1)?[0];
    let mut estimates = vec![Vec::new(); horizon];
    for (n, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            return Err(parse_err(n, format!("expected 6 fields, found {}", f.len())));
        }
        let k: usize = field(&f, 0, n, "step")?;
        if k >= horizon {
            return Err(parse_err(n, format!("step {k} outside horizon {horizon}")));
        }
        let label: Label = field(&f, 1, n, "label")?;
        estimates[k].push(Estimate {
            label,
            state: parse_state(&f, n)?,
        });
    }
    Ok(estimates)
}

/// Truth positions keyed by target, labelled `0:sI` for target `I`.
pub fn truth_trajectories(truth: &[Vec<(usize, StateVector)>]) -> TrajectorySet {
    let mut set: TrajectorySet = BTreeMap::new();
    for (k, live) in truth.iter().enumerate() {
        for (i, x) in live {
            set.entry(Label::fixed(0, *i)).or_default().insert(k, position(x));
        }
    }
    set
}

pub fn estimate_trajectories(estimates: &[Vec<Estimate>]) -> TrajectorySet {
    let mut set: TrajectorySet = BTreeMap::new();
    for (k, step) in estimates.iter().enumerate() {
        for e in step {
            set.entry(e.label.clone()).or_default().insert(k, position(&e.state));
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rfs::MeasurementTuple;

    #[test]
    fn measurements_round_trip() {
        let frames = vec![
            MeasurementFrame::new(0, vec![vec![Measurement::new(1.5, -2.25)], vec![]]),
            MeasurementFrame::new(1, vec![vec![], vec![Measurement::new(1e-3, 123456.789), Measurement::new(0.0, 0.0)]]),
        ];
        let text = format_measurements(2, &frames);
        assert!(text.starts_with("measurements 2 2\n0 0 1 1.50000000e0 -2.25000000e0\n"));
        let (v, back) = parse_measurements(&text).unwrap();
        assert_eq!(v, 2);
        assert_eq!(back, frames);
        assert_eq!(format_measurements(2, &back), text);
    }

    #[test]
    fn measurement_errors_carry_lines() {
        let cases = [
            ("measurements 2 1\n0 0 2 1 1\n", 2),
            ("measurements 2 1\n0 0 1 1 1\n1 0 1 1 1\n", 3),
            ("measurements 2 1\n\n0 5 1 1 1\n", 3),
            ("measurements 2 1\n0 0 1 x 1\n", 2),
            ("truth 2\n", 1),
        ];
        for (text, expected) in cases {
            match parse_measurements(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, expected, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn estimates_round_trip() {
        let est = vec![
            vec![],
            vec![
                Estimate {
                    label: Label::fixed(0, 2),
                    state: StateVector::new(1.0, 2.0, 3.0, 4.0),
                },
                Estimate {
                    label: Label::adaptive(3, MeasurementTuple(vec![0, 4])),
                    state: StateVector::new(-1.0, 0.5, 1e6, -7.25),
                },
            ],
        ];
        let text = format_estimates(&est);
        assert_eq!(parse_estimates(&text).unwrap(), est);
        let traj = estimate_trajectories(&est);
        assert_eq!(traj.len(), 2);
        assert_eq!(traj[&Label::fixed(0, 2)][&1], vec![1.0, 3.0]);
    }

    #[test]
    fn truth_round_trip() {
        let truth = vec![vec![(0, StateVector::new(1.0, 2.0, 3.0, 4.0))], vec![]];
        assert_eq!(parse_truth(&format_truth(&truth)).unwrap(), truth);
        assert_eq!(format_truth(&[]), "truth 0\n");
    }
}
