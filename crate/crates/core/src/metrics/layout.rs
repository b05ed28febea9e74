use crate::{Error, Result};

/// Electrode labels in stream order.
pub const LABELS: [&str; 8] = ["O1", "P7", "F7", "FP1", "F8", "T8", "P8", "O2"];

pub const FRONTAL: [&str; 4] = ["F7", "FP1", "F8", "T8"];
pub const PARIETAL_OCCIPITAL: [&str; 4] = ["P8", "P7", "O2", "O1"];
pub const FRONT: [&str; 3] = ["FP1", "F7", "F8"];
pub const REAR: [&str; 3] = ["O1", "P7", "P8"];
pub const LEFT: [&str; 3] = ["F7", "P7", "O1"];
pub const RIGHT: [&str; 3] = ["F8", "P8", "O2"];

/// Maps electrode names to channel indices of an EEG stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelLayout {
    labels: Vec<String>,
}

impl Default for ChannelLayout {
    fn default() -> Self {
        ChannelLayout {
            labels: LABELS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl ChannelLayout {
    /// Layout of a stream whose channels may come in any order; every
    /// standard electrode must be present.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_uppercase()).collect();
        for l in LABELS {
            if !labels.iter().any(|x| x == l) {
                return Err(Error::config(format!("EEG stream lacks electrode {l}")));
            }
        }
        Ok(ChannelLayout { labels })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.eq_ignore_ascii_case(label))
    }

    pub fn indices(&self, set: &[&str]) -> Vec<usize> {
        set.iter().filter_map(|l| self.index(l)).collect()
    }

    /// Indices of the eight standard electrodes.
    pub fn all(&self) -> Vec<usize> {
        self.indices(&LABELS)
    }

    pub fn frontal(&self) -> Vec<usize> {
        self.indices(&FRONTAL)
    }

    pub fn parietal_occipital(&self) -> Vec<usize> {
        self.indices(&PARIETAL_OCCIPITAL)
    }

    pub fn front(&self) -> Vec<usize> {
        self.indices(&FRONT)
    }

    pub fn rear(&self) -> Vec<usize> {
        self.indices(&REAR)
    }

    pub fn left(&self) -> Vec<usize> {
        self.indices(&LEFT)
    }

    pub fn right(&self) -> Vec<usize> {
        self.indices(&RIGHT)
    }
}
