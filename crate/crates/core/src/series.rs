//! Per-step observable records shared by every backend.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One recorded step: collision index (or grid index), physical time, the
/// labeled observable values and the active phase label.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub n: u64,
    pub t: f64,
    pub values: Vec<f64>,
    pub phase: String,
}

/// A time series of labeled real observables with strictly increasing step
/// index and a consistent label set.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    labels: Vec<String>,
    records: Vec<Record>,
}

impl ObservableSeries {
    pub fn new(labels: Vec<String>) -> Self {
        Self { labels, records: Vec::new() }
    }

    pub fn push(&mut self, record: Record) -> Result<()> {
        if record.values.len() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.labels.len(),
                got: record.values.len(),
                context: "ObservableSeries::push",
            });
        }
        if let Some(last) = self.records.last() {
            if record.n <= last.n {
                return Err(Error::Invalid("record index must increase".into()));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// All values of one labeled column, in record order.
    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(label)?;
        Some(self.records.iter().map(|r| r.values[idx]).collect())
    }
}
