use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Kind of signal carried by a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Modality {
    Ecg,
    Eda,
    Resp,
    Eog,
    Eeg,
    Metric,
}

impl Modality {
    pub const ALL: [Modality; 6] = [
        Modality::Ecg,
        Modality::Eda,
        Modality::Resp,
        Modality::Eog,
        Modality::Eeg,
        Modality::Metric,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Ecg => "ECG",
            Modality::Eda => "EDA",
            Modality::Resp => "RESP",
            Modality::Eog => "EOG",
            Modality::Eeg => "EEG",
            Modality::Metric => "METRIC",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Modality::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown modality {s:?}")))
    }
}

/// Identity and shape of a signal stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamMeta {
    pub name: String,
    pub modality: Modality,
    pub channel_labels: Vec<String>,
    /// Samples per second; 0 marks an irregular (event) stream.
    pub nominal_rate: f64,
    pub unit: String,
    pub source_id: String,
}

impl StreamMeta {
    pub fn new(
        name: impl Into<String>,
        modality: Modality,
        channel_labels: impl IntoIterator<Item = impl Into<String>>,
        nominal_rate: f64,
        unit: impl Into<String>,
        source_id: impl Into<String>,
    ) -> Self {
        StreamMeta {
            name: name.into(),
            modality,
            channel_labels: channel_labels.into_iter().map(Into::into).collect(),
            nominal_rate,
            unit: unit.into(),
            source_id: source_id.into(),
        }
    }

    pub fn channel_count(&self) -> usize {
        self.channel_labels.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.channel_labels.is_empty() {
            return Err(Error::Contract(format!(
                "stream {:?} has no channel labels",
                self.name
            )));
        }
        let mut seen = HashSet::new();
        for label in &self.channel_labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::Contract(format!(
                    "stream {:?} repeats channel label {label:?}",
                    self.name
                )));
            }
        }
        if !(self.nominal_rate >= 0.0 && self.nominal_rate.is_finite()) {
            return Err(Error::Contract(format!(
                "stream {:?} has invalid nominal rate {}",
                self.name, self.nominal_rate
            )));
        }
        if self.source_id.is_empty() {
            return Err(Error::Contract(format!(
                "stream {:?} has an empty source_id",
                self.name
            )));
        }
        Ok(())
    }
}
