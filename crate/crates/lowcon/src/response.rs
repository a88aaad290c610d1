use std::cell::Cell;

/// Hands out response values by index and counts every value revealed, so
/// a run can prove it only looked at the responses of selected rows.
#[derive(Debug)]
pub struct ResponseOracle<'a> {
    y: &'a [f64],
    reads: Cell<usize>,
}

impl<'a> ResponseOracle<'a> {
    pub fn new(y: &'a [f64]) -> Self {
        Self { y, reads: Cell::new(0) }
    }

    pub fn reveal(&self, indices: &[usize]) -> Vec<f64> {
        self.reads.set(self.reads.get() + indices.len());
        indices.iter().map(|&i| self.y[i]).collect()
    }

    pub fn reads(&self) -> usize {
        self.reads.get()
    }
}
