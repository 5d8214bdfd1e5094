//! Run-scale presets shared by the CLI and the acceptance runner.

use serde::{Deserialize, Serialize};

use crate::ann::TrainConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Full-scale protocol: 3 x 20000 states, 5000 epochs, batch 500.
    Paper,
    /// Laptop-scale protocol: 3 x 2000 states, 500 epochs, batch 100.
    Desk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresetValues {
    pub records_per_subset: usize,
    pub squeezed_count: usize,
    pub squeezed_steps: usize,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Preset {
    pub fn values(self) -> PresetValues {
        match self {
            Preset::Paper => PresetValues {
                records_per_subset: 20_000,
                squeezed_count: 30_000,
                squeezed_steps: 500,
                epochs: 5000,
                batch_size: 500,
            },
            Preset::Desk => PresetValues {
                records_per_subset: 2000,
                squeezed_count: 3000,
                squeezed_steps: 500,
                epochs: 500,
                batch_size: 100,
            },
        }
    }

    pub fn train_config(self, seed: u64) -> TrainConfig {
        let v = self.values();
        TrainConfig {
            batch_size: v.batch_size,
            epochs: v.epochs,
            seed,
            ..TrainConfig::default()
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Paper => "paper",
            Preset::Desk => "desk",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            other => Err(crate::Error::InvalidInput(format!("unknown preset {other:?}"))),
        }
    }
}
