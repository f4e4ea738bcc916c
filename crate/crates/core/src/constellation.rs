//! Unit-power constellations with uniform input distribution.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Complex, Error};

/// Built-in constellation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Bpsk,
    #[serde(rename = "16qam")]
    Qam16,
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Modulation::Bpsk),
            "16qam" | "qam16" | "16-qam" => Ok(Modulation::Qam16),
            other => Err(Error::InvalidParameter(format!("unknown constellation '{other}'"))),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qam16 => "16qam",
        })
    }
}

/// A finite complex alphabet normalized to unit average power.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    modulation: Modulation,
    points: Vec<Complex>,
    labels: Vec<u32>,
    bits_per_symbol: u32,
}

impl Constellation {
    pub fn new(modulation: Modulation) -> Self {
        match modulation {
            Modulation::Bpsk => Self::bpsk(),
            Modulation::Qam16 => Self::qam16(),
        }
    }

    /// `{+1, -1}` with bit 0 mapped to `+1`.
    pub fn bpsk() -> Self {
        Self {
            modulation: Modulation::Bpsk,
            points: vec![Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)],
            labels: vec![0, 1],
            bits_per_symbol: 1,
        }
    }

    /// Square 16-QAM with per-axis Gray labeling, scaled to unit power.
    pub fn qam16() -> Self {
        // Gray pairs per axis: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
        const AXIS: [(u32, f64); 4] = [(0b00, -3.0), (0b01, -1.0), (0b11, 1.0), (0b10, 3.0)];
        let scale = 1.0 / 10f64.sqrt();
        let mut points = Vec::with_capacity(16);
        let mut labels = Vec::with_capacity(16);
        for &(bi, re) in &AXIS {
            for &(bq, im) in &AXIS {
                points.push(Complex::new(re * scale, im * scale));
                labels.push((bi << 2) | bq);
            }
        }
        Self { modulation: Modulation::Qam16, points, labels, bits_per_symbol: 4 }
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn points(&self) -> &[Complex] {
        &self.points
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn average_power(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    pub fn is_bpsk(&self) -> bool {
        self.modulation == Modulation::Bpsk
    }
}
