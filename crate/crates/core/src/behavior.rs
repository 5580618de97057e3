//! Outcome-probability tables for the three-party protocol.
//!
//! Two blocks are kept:
//!
//! * the steering block `P(a, bob, c | x, z)` for Alice's setting `x`,
//!   Charlie's setting `z` (both in `1..=3`), Alice's outcome `a`, Bob's
//!   partial-BSM answer and Charlie's outcome `c`;
//! * the self-testing block `P(b, c | y, z)` for Bob's six CHSH settings `y`
//!   against Charlie's three settings.

use core::fmt;

use thiserror::Error;

use crate::model::Outcome;
use crate::tol;

pub const ALICE_SETTINGS: usize = 3;
pub const CHARLIE_SETTINGS: usize = 3;
pub const BOB_CHSH_SETTINGS: usize = 6;
pub const STEERING_SETTINGS: usize = ALICE_SETTINGS * CHARLIE_SETTINGS;
pub const CHSH_SETTINGS: usize = BOB_CHSH_SETTINGS * CHARLIE_SETTINGS;

pub type SteeringTable = [[f64; 8]; STEERING_SETTINGS];
pub type ChshTable = [[f64; 4]; CHSH_SETTINGS];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BobAnswer {
    Yes,
    No,
}

impl BobAnswer {
    pub const ALL: [BobAnswer; 2] = [BobAnswer::Yes, BobAnswer::No];

    pub fn index(self) -> usize {
        match self {
            BobAnswer::Yes => 0,
            BobAnswer::No => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BobAnswer::Yes => "yes",
            BobAnswer::No => "no",
        }
    }
}

impl fmt::Display for BobAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Row of the steering block for settings `x, z` in `1..=3`.
pub fn steering_setting(x: usize, z: usize) -> usize {
    assert!((1..=3).contains(&x) && (1..=3).contains(&z), "setting ({x}, {z}) out of range");
    (x - 1) * CHARLIE_SETTINGS + (z - 1)
}

pub fn steering_cell(a: Outcome, bob: BobAnswer, c: Outcome) -> usize {
    a.index() * 4 + bob.index() * 2 + c.index()
}

/// Row of the self-testing block for `y` in `1..=6`, `z` in `1..=3`.
pub fn chsh_setting(y: usize, z: usize) -> usize {
    assert!((1..=6).contains(&y) && (1..=3).contains(&z), "setting ({y}, {z}) out of range");
    (y - 1) * CHARLIE_SETTINGS + (z - 1)
}

pub fn chsh_cell(b: Outcome, c: Outcome) -> usize {
    b.index() * 2 + c.index()
}

/// Inverse of [`steering_setting`].
pub fn steering_labels(setting: usize) -> (usize, usize) {
    (setting / CHARLIE_SETTINGS + 1, setting % CHARLIE_SETTINGS + 1)
}

/// Inverse of [`chsh_setting`].
pub fn chsh_labels(setting: usize) -> (usize, usize) {
    (setting / CHARLIE_SETTINGS + 1, setting % CHARLIE_SETTINGS + 1)
}

/// Inverse of [`steering_cell`].
pub fn steering_cell_labels(cell: usize) -> (Outcome, BobAnswer, Outcome) {
    let o = |i| if i == 0 { Outcome::Plus } else { Outcome::Minus };
    let bob = if (cell / 2) % 2 == 0 { BobAnswer::Yes } else { BobAnswer::No };
    (o(cell / 4), bob, o(cell % 2))
}

/// Inverse of [`chsh_cell`].
pub fn chsh_cell_labels(cell: usize) -> (Outcome, Outcome) {
    let o = |i| if i == 0 { Outcome::Plus } else { Outcome::Minus };
    (o(cell / 2), o(cell % 2))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BehaviorError {
    #[error("{block} setting {setting} sums to {sum}, expected 1")]
    NotNormalized { block: &'static str, setting: usize, sum: f64 },
    #[error("{block} setting {setting} cell {cell} has probability {p} outside [0, 1]")]
    OutOfRange { block: &'static str, setting: usize, cell: usize, p: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    pub steering: SteeringTable,
    pub chsh: ChshTable,
    pub steering_stderr: Option<SteeringTable>,
    pub chsh_stderr: Option<ChshTable>,
}

impl Behavior {
    pub fn new(steering: SteeringTable, chsh: ChshTable) -> Result<Self, BehaviorError> {
        let b = Self { steering, chsh, steering_stderr: None, chsh_stderr: None };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), BehaviorError> {
        check_block("steering", self.steering.iter().map(|r| &r[..]))?;
        check_block("chsh", self.chsh.iter().map(|r| &r[..]))
    }

    pub fn p_steering(&self, x: usize, z: usize, a: Outcome, bob: BobAnswer, c: Outcome) -> f64 {
        self.steering[steering_setting(x, z)][steering_cell(a, bob, c)]
    }

    pub fn p_chsh(&self, y: usize, z: usize, b: Outcome, c: Outcome) -> f64 {
        self.chsh[chsh_setting(y, z)][chsh_cell(b, c)]
    }

    /// `E_{y,z} = sum_{b,c} b c P(b, c | y, z)`.
    pub fn correlator(&self, y: usize, z: usize) -> f64 {
        let row = &self.chsh[chsh_setting(y, z)];
        row[0] - row[1] - row[2] + row[3]
    }

    /// `sum_{a,c} a c P(a, Yes, c | x, z)`.
    pub fn yes_correlator(&self, x: usize, z: usize) -> f64 {
        let mut acc = 0.0;
        for a in Outcome::ALL {
            for c in Outcome::ALL {
                acc += a.value() * c.value() * self.p_steering(x, z, a, BobAnswer::Yes, c);
            }
        }
        acc
    }

    /// `sum_{a,c} P(a, Yes, c | x, z)`.
    pub fn yes_probability(&self, x: usize, z: usize) -> f64 {
        let mut acc = 0.0;
        for a in Outcome::ALL {
            for c in Outcome::ALL {
                acc += self.p_steering(x, z, a, BobAnswer::Yes, c);
            }
        }
        acc
    }
}

fn check_block<'a>(
    block: &'static str,
    rows: impl Iterator<Item = &'a [f64]>,
) -> Result<(), BehaviorError> {
    for (setting, row) in rows.enumerate() {
        for (cell, &p) in row.iter().enumerate() {
            if !p.is_finite() || p < -tol::STRUCTURAL || p > 1.0 + tol::STRUCTURAL {
                return Err(BehaviorError::OutOfRange { block, setting, cell, p });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > tol::PROBABILITY {
            return Err(BehaviorError::NotNormalized { block, setting, sum });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> Behavior {
        Behavior::new([[0.125; 8]; STEERING_SETTINGS], [[0.25; 4]; CHSH_SETTINGS]).unwrap()
    }

    #[test]
    fn index_round_trips() {
        for s in 0..STEERING_SETTINGS {
            let (x, z) = steering_labels(s);
            assert_eq!(steering_setting(x, z), s);
        }
        for s in 0..CHSH_SETTINGS {
            let (y, z) = chsh_labels(s);
            assert_eq!(chsh_setting(y, z), s);
        }
        for cell in 0..8 {
            let (a, bob, c) = steering_cell_labels(cell);
            assert_eq!(steering_cell(a, bob, c), cell);
        }
        for cell in 0..4 {
            let (b, c) = chsh_cell_labels(cell);
            assert_eq!(chsh_cell(b, c), cell);
        }
    }

    #[test]
    fn uniform_behavior_has_vanishing_correlators() {
        let b = uniform();
        assert_eq!(b.correlator(4, 2), 0.0);
        assert_eq!(b.yes_correlator(1, 1), 0.0);
        assert!((b.yes_probability(2, 3) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized_rows() {
        let mut chsh = [[0.25; 4]; CHSH_SETTINGS];
        chsh[5][0] = 0.3;
        let err = Behavior::new([[0.125; 8]; STEERING_SETTINGS], chsh).unwrap_err();
        assert!(matches!(err, BehaviorError::NotNormalized { block: "chsh", setting: 5, .. }));
    }

    #[test]
    fn rejects_negative_cells() {
        let mut st = [[0.125; 8]; STEERING_SETTINGS];
        st[0][0] = -0.125;
        st[0][1] = 0.375;
        let err = Behavior::new(st, [[0.25; 4]; CHSH_SETTINGS]).unwrap_err();
        assert!(matches!(err, BehaviorError::OutOfRange { block: "steering", setting: 0, cell: 0, .. }));
    }
}
