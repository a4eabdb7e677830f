use std::fmt;

use super::profile::to_coulombs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    LoraTx,
    LoraRx,
    Ble,
    Compute,
    Leakage,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::LoraTx,
        Category::LoraRx,
        Category::Ble,
        Category::Compute,
        Category::Leakage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::LoraTx => "lora_tx",
            Category::LoraRx => "lora_rx",
            Category::Ble => "ble",
            Category::Compute => "compute",
            Category::Leakage => "leakage",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Charge drawn per category, in integer attocoulombs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnergyLedger {
    drawn: [i128; 5],
}

impl EnergyLedger {
    pub fn add(&mut self, category: Category, ac: i128) {
        self.drawn[category as usize] += ac;
    }

    pub fn attocoulombs(&self, category: Category) -> i128 {
        self.drawn[category as usize]
    }

    pub fn total_attocoulombs(&self) -> i128 {
        self.drawn.iter().sum()
    }

    /// Coulombs drawn in `category`.
    pub fn get(&self, category: Category) -> f64 {
        to_coulombs(self.attocoulombs(category))
    }

    pub fn total(&self) -> f64 {
        to_coulombs(self.total_attocoulombs())
    }
}
