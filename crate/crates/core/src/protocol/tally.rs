use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::primitives::IntensityLabel;

/// Raw counters for one intensity class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassTally {
    pub sent: u64,
    /// Gates with at least one click, before sifting.
    pub clicked: u64,
    /// Clicks whose resolved basis matched the preparation basis.
    pub sifted: u64,
    pub sifted_errors: u64,
}

impl ClassTally {
    pub fn is_consistent(&self) -> bool {
        self.sifted_errors <= self.sifted
            && self.sifted <= self.clicked
            && self.clicked <= self.sent
    }
}

impl Add for ClassTally {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            sent: self.sent + rhs.sent,
            clicked: self.clicked + rhs.clicked,
            sifted: self.sifted + rhs.sifted,
            sifted_errors: self.sifted_errors + rhs.sifted_errors,
        }
    }
}

/// Per-class counters for a session, mergeable by component-wise addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TallySet {
    pub cycles: u64,
    pub signal: ClassTally,
    pub decoy: ClassTally,
    pub vacuum: ClassTally,
}

impl TallySet {
    pub fn class(&self, label: IntensityLabel) -> &ClassTally {
        match label {
            IntensityLabel::Signal => &self.signal,
            IntensityLabel::Decoy => &self.decoy,
            IntensityLabel::Vacuum => &self.vacuum,
        }
    }

    pub fn class_mut(&mut self, label: IntensityLabel) -> &mut ClassTally {
        match label {
            IntensityLabel::Signal => &mut self.signal,
            IntensityLabel::Decoy => &mut self.decoy,
            IntensityLabel::Vacuum => &mut self.vacuum,
        }
    }

    pub fn is_consistent(&self) -> bool {
        IntensityLabel::ALL
            .iter()
            .all(|&l| self.class(l).is_consistent())
            && self.signal.sent + self.decoy.sent + self.vacuum.sent == self.cycles
    }

    /// Counts that reproduce the given per-class gains and QBERs, with
    /// `sent` pulses per class and sifted clicks at half the gain.
    pub fn synthesize(sent: [u64; 3], gains: [f64; 3], qbers: [f64; 3]) -> Self {
        let mut t = TallySet::default();
        for label in IntensityLabel::ALL {
            let i = label.index();
            let sifted = (gains[i] * sent[i] as f64 / 2.0).round() as u64;
            let errors = (qbers[i] * sifted as f64).round() as u64;
            *t.class_mut(label) = ClassTally {
                sent: sent[i],
                clicked: 2 * sifted,
                sifted,
                sifted_errors: errors,
            };
            t.cycles += sent[i];
        }
        t
    }
}

impl Add for TallySet {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            cycles: self.cycles + rhs.cycles,
            signal: self.signal + rhs.signal,
            decoy: self.decoy + rhs.decoy,
            vacuum: self.vacuum + rhs.vacuum,
        }
    }
}

impl AddAssign for TallySet {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}
