use crate::error::{Error, Result};
use crate::gibbs::ConditionalEvaluator;

/// Log-score matrix for one parent hypothesis and one sensor.
///
/// Rows are tracks. Columns are `0` (alive, missed), `1..=m` (alive,
/// generated measurement `j`) and `m + 1` (not alive). Structurally
/// impossible pairs hold `-inf`. A valid assignment gives every row one
/// column and uses no measurement column twice.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentProblem {
    measurements: usize,
    scores: Vec<Vec<f64>>,
}

impl AssignmentProblem {
    pub fn new(measurements: usize, scores: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(row) = scores.iter().find(|r| r.len() != measurements + 2) {
            return Err(Error::DimensionMismatch {
                expected: measurements + 2,
                found: row.len(),
            });
        }
        Ok(Self {
            measurements,
            scores,
        })
    }

    pub fn rows(&self) -> usize {
        self.scores.len()
    }

    pub fn measurements(&self) -> usize {
        self.measurements
    }

    pub fn columns(&self) -> usize {
        self.measurements + 2
    }

    pub const fn miss_column(&self) -> usize {
        0
    }

    pub fn death_column(&self) -> usize {
        self.measurements + 1
    }

    pub fn is_measurement(&self, column: usize) -> bool {
        (1..=self.measurements).contains(&column)
    }

    pub fn score(&self, row: usize, column: usize) -> f64 {
        self.scores[row][column]
    }

    pub fn is_valid(&self, assignment: &[usize]) -> bool {
        if assignment.len() != self.rows() {
            return false;
        }
        let mut used = vec![false; self.measurements + 1];
        for (row, &c) in assignment.iter().enumerate() {
            if c >= self.columns() || self.scores[row][c] == f64::NEG_INFINITY {
                return false;
            }
            if self.is_measurement(c) {
                if used[c] {
                    return false;
                }
                used[c] = true;
            }
        }
        true
    }

    /// Sum of selected log scores; `-inf` for invalid assignments.
    pub fn log_weight(&self, assignment: &[usize]) -> f64 {
        if !self.is_valid(assignment) {
            return f64::NEG_INFINITY;
        }
        assignment
            .iter()
            .enumerate()
            .map(|(row, &c)| self.scores[row][c])
            .sum()
    }

    /// Each row takes the better of miss and death; rows where both are
    /// impossible greedily take their best free measurement.
    pub fn initial_assignment(&self) -> Option<Vec<usize>> {
        let miss = self.miss_column();
        let death = self.death_column();
        let mut used = vec![false; self.measurements + 1];
        let mut out = Vec::with_capacity(self.rows());
        for row in &self.scores {
            let c = if row[miss] >= row[death] { miss } else { death };
            if row[c] > f64::NEG_INFINITY {
                out.push(c);
                continue;
            }
            let best = (1..=self.measurements)
                .filter(|&j| !used[j] && row[j] > f64::NEG_INFINITY)
                .max_by(|&a, &b| row[a].total_cmp(&row[b]).then(b.cmp(&a)))?;
            used[best] = true;
            out.push(best);
        }
        Some(out)
    }
}

impl ConditionalEvaluator for AssignmentProblem {
    fn coordinates(&self) -> usize {
        self.rows()
    }

    fn conditional(&self, state: &[usize], row: usize) -> Result<Vec<f64>> {
        let mut taken = vec![false; self.measurements + 1];
        for (other, &c) in state.iter().enumerate() {
            if other != row && self.is_measurement(c) {
                taken[c] = true;
            }
        }
        let scores = &self.scores[row];
        let allowed = |c: usize| !(self.is_measurement(c) && taken[c]);
        let max = (0..self.columns())
            .filter(|&c| allowed(c))
            .map(|c| scores[c])
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::DegenerateConditional { coordinate: row });
        }
        Ok((0..self.columns())
            .map(|c| if allowed(c) { (scores[c] - max).exp() } else { 0.0 })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NEG: f64 = f64::NEG_INFINITY;

    #[test]
    fn validity_and_weights() {
        let p = AssignmentProblem::new(1, vec![vec![-1.0, 0.0, NEG], vec![-2.0, 1.0, -0.5]]).unwrap();
        assert!(p.is_valid(&[0, 1]));
        assert!(!p.is_valid(&[1, 1]));
        assert!(!p.is_valid(&[2, 0]));
        assert_eq!(p.log_weight(&[0, 1]), 0.0);
        assert_eq!(p.initial_assignment(), Some(vec![0, 2]));
    }

    #[test]
    fn conditional_forbids_taken_measurements() {
        let p = AssignmentProblem::new(2, vec![vec![0.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 0.0]]).unwrap();
        let c = p.conditional(&[0, 1], 0).unwrap();
        assert_eq!(c, vec![1.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn forced_detection_initial_state() {
        let p = AssignmentProblem::new(2, vec![vec![NEG, -3.0, -1.0, NEG], vec![NEG, -0.5, -2.0, NEG]]).unwrap();
        assert_eq!(p.initial_assignment(), Some(vec![2, 1]));
        let q = AssignmentProblem::new(0, vec![vec![NEG, NEG]]).unwrap();
        assert_eq!(q.initial_assignment(), None);
    }
}
