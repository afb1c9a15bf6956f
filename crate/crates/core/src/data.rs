//! Experimental observations, randomization probabilities, and synthetic
//! ground truth.
//!
//! Labels are stored as [`Sign`] values; raw integer labels are only accepted
//! at construction time, where anything other than ±1 is rejected.

use std::fmt;
use std::ops::{Mul, Neg};

use crate::error::{Error, Result};

/// A ±1 label, treatment indicator, or classifier output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Neg,
    Pos,
}

impl Sign {
    /// Sign of a real number with the tie `sign(0) = +1`.
    pub fn of(value: f64) -> Sign {
        if value >= 0.0 {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    pub fn from_int(value: i64) -> Option<Sign> {
        match value {
            1 => Some(Sign::Pos),
            -1 => Some(Sign::Neg),
            _ => None,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Pos => 1.0,
            Sign::Neg => -1.0,
        }
    }

    pub fn as_int(self) -> i8 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    pub fn is_pos(self) -> bool {
        self == Sign::Pos
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_int())
    }
}

/// False-positive weight of the misclassification loss, in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Theta(f64);

impl Theta {
    pub const HALF: Theta = Theta(0.5);

    pub fn new(value: f64) -> Result<Theta> {
        if (0.0..=1.0).contains(&value) {
            Ok(Theta(value))
        } else {
            Err(Error::InvalidTheta(value))
        }
    }

    /// Clamps into `[0, 1]`. NaN maps to 0.
    pub fn clamped(value: f64) -> Theta {
        if value.is_nan() {
            Theta(0.0)
        } else {
            Theta(value.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Probability of treatment given features, known by experimental design.
#[derive(Clone, Debug, PartialEq)]
pub enum Propensity {
    Constant(f64),
    PerObservation(Vec<f64>),
}

impl Default for Propensity {
    fn default() -> Self {
        Propensity::Constant(0.5)
    }
}

impl Propensity {
    /// Treatment probability for a row.
    pub fn at(&self, row: usize) -> Result<f64> {
        match self {
            Propensity::Constant(e) => Ok(*e),
            Propensity::PerObservation(es) => es
                .get(row)
                .copied()
                .ok_or(Error::RowOutOfRange { index: row, len: es.len() }),
        }
    }

    fn check(&self, rows: usize) -> Result<()> {
        let inside = |e: f64| e > 0.0 && e < 1.0;
        match self {
            Propensity::Constant(e) if !inside(*e) => Err(Error::PropensityOutOfRange { value: *e }),
            Propensity::Constant(_) => Ok(()),
            Propensity::PerObservation(es) => {
                if es.len() != rows {
                    return Err(Error::PropensityLength { expected: rows, found: es.len() });
                }
                match es.iter().find(|e| !inside(**e)) {
                    Some(e) => Err(Error::PropensityOutOfRange { value: *e }),
                    None => Ok(()),
                }
            }
        }
    }
}

/// Probability of the assignment a unit actually received: `1/2 + (e - 1/2) t`.
pub fn assignment_probability(e: f64, t: Sign) -> f64 {
    0.5 + (e - 0.5) * t.value()
}

/// Borrowed view of one row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation<'a> {
    pub x: &'a [f64],
    pub t: Sign,
    pub y: Sign,
}

/// `Q` for an observation at `row` under `prop`.
pub fn q_of(obs: &Observation<'_>, prop: &Propensity, row: usize) -> Result<f64> {
    Ok(assignment_probability(prop.at(row)?, obs.t))
}

/// Counts of rows by treatment and outcome cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub n: usize,
    pub d: usize,
    /// Indexed `[t is +1][y is +1]`.
    cells: [[usize; 2]; 2],
}

impl ValidationReport {
    pub fn count(&self, t: Sign, y: Sign) -> usize {
        self.cells[t.is_pos() as usize][y.is_pos() as usize]
    }

    pub fn treated(&self) -> usize {
        self.cells[1][0] + self.cells[1][1]
    }

    pub fn control(&self) -> usize {
        self.cells[0][0] + self.cells[0][1]
    }
}

/// Rows of `(x, t, y)` with dense row-major features and a known propensity.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    d: usize,
    features: Vec<f64>,
    treatment: Vec<Sign>,
    outcome: Vec<Sign>,
    propensity: Propensity,
}

impl Dataset {
    /// Builds a dataset from raw integer labels, rejecting anything but ±1.
    pub fn new(
        d: usize,
        features: Vec<f64>,
        treatment: &[i64],
        outcome: &[i64],
        propensity: Propensity,
    ) -> Result<Dataset> {
        let treatment = treatment
            .iter()
            .enumerate()
            .map(|(row, &t)| Sign::from_int(t).ok_or(Error::InvalidTreatment { row }))
            .collect::<Result<Vec<_>>>()?;
        let outcome = outcome
            .iter()
            .enumerate()
            .map(|(row, &y)| Sign::from_int(y).ok_or(Error::InvalidOutcome { row }))
            .collect::<Result<Vec<_>>>()?;
        Dataset::from_signs(d, features, treatment, outcome, propensity)
    }

    pub fn from_signs(
        d: usize,
        features: Vec<f64>,
        treatment: Vec<Sign>,
        outcome: Vec<Sign>,
        propensity: Propensity,
    ) -> Result<Dataset> {
        let ds = Dataset { d, features, treatment, outcome, propensity };
        ds.check()?;
        Ok(ds)
    }

    fn check(&self) -> Result<()> {
        let n = self.treatment.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if self.d == 0 {
            return Err(Error::InvalidConfig("feature dimension must be at least 1".into()));
        }
        if self.outcome.len() != n {
            return Err(Error::LengthMismatch { left: n, right: self.outcome.len() });
        }
        if self.features.len() != n * self.d {
            return Err(Error::DimensionMismatch { expected: n * self.d, found: self.features.len() });
        }
        if let Some(pos) = self.features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { row: pos / self.d, col: pos % self.d });
        }
        self.propensity.check(n)
    }

    pub fn len(&self) -> usize {
        self.treatment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.treatment.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn treatment(&self, i: usize) -> Sign {
        self.treatment[i]
    }

    pub fn outcome(&self, i: usize) -> Sign {
        self.outcome[i]
    }

    pub fn propensity(&self) -> &Propensity {
        &self.propensity
    }

    pub fn observation(&self, i: usize) -> Observation<'_> {
        Observation { x: self.row(i), t: self.treatment[i], y: self.outcome[i] }
    }

    pub fn observations(&self) -> impl Iterator<Item = Observation<'_>> + '_ {
        (0..self.len()).map(move |i| self.observation(i))
    }

    /// `Q_i`, the probability of the assignment row `i` received.
    pub fn q(&self, i: usize) -> f64 {
        let e = match &self.propensity {
            Propensity::Constant(e) => *e,
            Propensity::PerObservation(es) => es[i],
        };
        assignment_probability(e, self.treatment[i])
    }

    /// `y t / Q` for row `i`, the unbiased single-row effect signal.
    pub fn effect_signal(&self, i: usize) -> f64 {
        (self.outcome[i] * self.treatment[i]).value() / self.q(i)
    }

    /// Rows at `indices`, in that order; repeated indices are allowed.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let mut features = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            if i >= self.len() {
                return Err(Error::RowOutOfRange { index: i, len: self.len() });
            }
            features.extend_from_slice(self.row(i));
        }
        let propensity = match &self.propensity {
            Propensity::Constant(e) => Propensity::Constant(*e),
            Propensity::PerObservation(es) => Propensity::PerObservation(indices.iter().map(|&i| es[i]).collect()),
        };
        Dataset::from_signs(
            self.d,
            features,
            indices.iter().map(|&i| self.treatment[i]).collect(),
            indices.iter().map(|&i| self.outcome[i]).collect(),
            propensity,
        )
    }

    pub fn report(&self) -> ValidationReport {
        let mut cells = [[0usize; 2]; 2];
        for (t, y) in self.treatment.iter().zip(&self.outcome) {
            cells[t.is_pos() as usize][y.is_pos() as usize] += 1;
        }
        ValidationReport { n: self.len(), d: self.d, cells }
    }
}

/// Re-checks every dataset invariant and tallies the `(t, y)` cells.
pub fn validate_dataset(ds: &Dataset) -> Result<ValidationReport> {
    ds.check()?;
    Ok(ds.report())
}

/// Synthetic unit with both potential outcomes known.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthUnit {
    pub x: Vec<f64>,
    pub y_plus: Sign,
    pub y_minus: Sign,
    /// Responder label.
    pub r: Sign,
    /// Non-responder outcome draw.
    pub a: Sign,
}

impl GroundTruthUnit {
    /// Builds the unit's potential outcomes from its responder and
    /// non-responder draws. Monotonicity holds by construction.
    pub fn from_draws(x: Vec<f64>, r: Sign, a: Sign) -> GroundTruthUnit {
        let (y_plus, y_minus) = match r {
            Sign::Pos => (Sign::Pos, Sign::Neg),
            Sign::Neg => (a, a),
        };
        GroundTruthUnit { x, y_plus, y_minus, r, a }
    }

    /// Outcome the unit would show under assignment `t`.
    pub fn outcome(&self, t: Sign) -> Sign {
        match t {
            Sign::Pos => self.y_plus,
            Sign::Neg => self.y_minus,
        }
    }

    pub fn causal_effect(&self) -> f64 {
        self.y_plus.value() - self.y_minus.value()
    }

    pub fn is_monotone(&self) -> bool {
        self.y_plus >= self.y_minus
    }
}
