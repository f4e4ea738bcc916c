//! CSV output: header row, comma separated, '.' decimals, scientific
//! notation for probabilities below 1e-4.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};

pub fn probability(p: f64) -> String {
    if p != 0.0 && p.abs() < 1e-4 {
        format!("{p:.6e}")
    } else {
        trim(format!("{p:.8}"))
    }
}

pub fn decibels(x: f64) -> String {
    if x.is_finite() {
        trim(format!("{x:.4}"))
    } else {
        x.to_string()
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        t.to_string()
    } else {
        s
    }
}

pub struct Table {
    writer: csv::Writer<Box<dyn Write>>,
}

impl Table {
    pub fn create(path: Option<&Path>, header: &[&str]) -> Result<Self> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
            None => Box::new(io::stdout()),
        };
        let mut writer = csv::Writer::from_writer(sink);
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) -> Result<()> {
        self.writer.write_record(fields.into_iter().collect::<Vec<_>>())?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}
