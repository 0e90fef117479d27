use serde::{Deserialize, Serialize};

/// Measurement/preparation basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Rectilinear,
    Diagonal,
}

impl Basis {
    pub fn other(self) -> Self {
        match self {
            Basis::Rectilinear => Basis::Diagonal,
            Basis::Diagonal => Basis::Rectilinear,
        }
    }
}

/// The four BB84 polarization states.
///
/// Bit convention: H and + encode 0, V and − encode 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
    /// |+⟩
    P,
    /// |−⟩
    M,
}

impl Polarization {
    pub const ALL: [Polarization; 4] = [
        Polarization::H,
        Polarization::V,
        Polarization::P,
        Polarization::M,
    ];

    pub fn new(basis: Basis, bit: bool) -> Self {
        match (basis, bit) {
            (Basis::Rectilinear, false) => Polarization::H,
            (Basis::Rectilinear, true) => Polarization::V,
            (Basis::Diagonal, false) => Polarization::P,
            (Basis::Diagonal, true) => Polarization::M,
        }
    }

    pub fn basis(self) -> Basis {
        match self {
            Polarization::H | Polarization::V => Basis::Rectilinear,
            Polarization::P | Polarization::M => Basis::Diagonal,
        }
    }

    pub fn bit(self) -> bool {
        matches!(self, Polarization::V | Polarization::M)
    }

    /// Index of the detector that registers this state in a four-detector
    /// passive receiver (H, V, +, − in that order).
    pub fn detector_index(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
            Polarization::P => 2,
            Polarization::M => 3,
        }
    }

    pub fn from_detector_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityLabel {
    Signal,
    Decoy,
    Vacuum,
}

impl IntensityLabel {
    pub const ALL: [IntensityLabel; 3] = [
        IntensityLabel::Signal,
        IntensityLabel::Decoy,
        IntensityLabel::Vacuum,
    ];

    pub fn index(self) -> usize {
        match self {
            IntensityLabel::Signal => 0,
            IntensityLabel::Decoy => 1,
            IntensityLabel::Vacuum => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IntensityLabel::Signal => "signal",
            IntensityLabel::Decoy => "decoy",
            IntensityLabel::Vacuum => "vacuum",
        }
    }
}

/// An intensity setting of the source: mean photon number per pulse and the
/// probability of emitting it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityClass {
    pub label: IntensityLabel,
    pub mean_photon_number: f64,
    pub emission_probability: f64,
}

impl IntensityClass {
    pub fn signal(mu: f64, probability: f64) -> Self {
        Self {
            label: IntensityLabel::Signal,
            mean_photon_number: mu,
            emission_probability: probability,
        }
    }

    pub fn decoy(nu: f64, probability: f64) -> Self {
        Self {
            label: IntensityLabel::Decoy,
            mean_photon_number: nu,
            emission_probability: probability,
        }
    }

    pub fn vacuum(probability: f64) -> Self {
        Self {
            label: IntensityLabel::Vacuum,
            mean_photon_number: 0.0,
            emission_probability: probability,
        }
    }
}

/// One emitted pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub index: u64,
    pub bit: bool,
    pub basis: Basis,
    pub class: IntensityLabel,
    pub photon_count: u32,
}

impl PulseRecord {
    pub fn polarization(&self) -> Polarization {
        Polarization::new(self.basis, self.bit)
    }
}
