use serde::{Deserialize, Serialize};

use super::tally::{ClassTally, TallySet};
use crate::error::{Error, Result};
use crate::primitives::IntensityLabel;

/// How per-class gains are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainNormalization {
    /// 2 × sifted clicks / sent; undoes the 1/2 loss of basis sifting.
    #[default]
    SiftedDoubled,
    /// All clicks before sifting / sent.
    AllClicks,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassEstimate {
    pub gain: f64,
    pub gain_std_error: f64,
    /// `None` when the class has no sifted clicks.
    pub qber: Option<f64>,
    pub qber_std_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainEstimates {
    pub signal: ClassEstimate,
    pub decoy: ClassEstimate,
    pub vacuum: ClassEstimate,
}

impl GainEstimates {
    pub fn class(&self, label: IntensityLabel) -> &ClassEstimate {
        match label {
            IntensityLabel::Signal => &self.signal,
            IntensityLabel::Decoy => &self.decoy,
            IntensityLabel::Vacuum => &self.vacuum,
        }
    }
}

fn estimate_class(
    label: IntensityLabel,
    t: &ClassTally,
    norm: GainNormalization,
) -> Result<ClassEstimate> {
    if t.sent == 0 {
        return Err(Error::Domain {
            what: match label {
                IntensityLabel::Signal => "signal.sent",
                IntensityLabel::Decoy => "decoy.sent",
                IntensityLabel::Vacuum => "vacuum.sent",
            },
            value: 0.0,
            expected: "> 0 pulses sent",
        });
    }
    let n = t.sent as f64;
    let (scale, count) = match norm {
        GainNormalization::SiftedDoubled => (2.0, t.sifted),
        GainNormalization::AllClicks => (1.0, t.clicked),
    };
    let p = count as f64 / n;
    let (qber, qber_std_error) = if t.sifted > 0 {
        let k = t.sifted as f64;
        let e = t.sifted_errors as f64 / k;
        (Some(e), Some((e * (1.0 - e) / k).sqrt()))
    } else {
        (None, None)
    };
    Ok(ClassEstimate {
        gain: scale * p,
        gain_std_error: scale * (p * (1.0 - p) / n).sqrt(),
        qber,
        qber_std_error,
    })
}

/// Per-class gain and QBER with binomial standard errors.
pub fn estimate_gains(t: &TallySet, norm: GainNormalization) -> Result<GainEstimates> {
    Ok(GainEstimates {
        signal: estimate_class(IntensityLabel::Signal, &t.signal, norm)?,
        decoy: estimate_class(IntensityLabel::Decoy, &t.decoy, norm)?,
        vacuum: estimate_class(IntensityLabel::Vacuum, &t.vacuum, norm)?,
    })
}
