//! Carrier type for convergence series: one (index, interval) row per
//! scale, serializable to CSV and JSON.

use serde::Serialize;

/// One row of a convergence series. Point values have `lo == hi`.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesEntry {
    pub n: usize,
    pub h_count: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceSeries {
    pub estimator: String,
    pub entries: Vec<SeriesEntry>,
}

impl ConvergenceSeries {
    pub fn new(estimator: impl Into<String>) -> Self {
        ConvergenceSeries { estimator: estimator.into(), entries: Vec::new() }
    }

    pub fn push(&mut self, n: usize, h_count: usize, lo: f64, hi: f64) {
        debug_assert!(self.entries.last().map_or(true, |e| e.n < n));
        self.entries.push(SeriesEntry { n, h_count, lo, hi });
    }

    pub fn push_point(&mut self, n: usize, h_count: usize, value: f64) {
        self.push(n, h_count, value, value);
    }

    pub fn last_value(&self) -> Option<f64> {
        self.entries.last().map(|e| 0.5 * (e.lo + e.hi))
    }

    pub fn to_csv(&self, metadata_hash: &str) -> String {
        let mut out = String::from("n,h-count,lo,hi,metadata-hash\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{:.17e},{:.17e},{}\n",
                e.n, e.h_count, e.lo, e.hi, metadata_hash
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_shape() {
        let mut s = ConvergenceSeries::new("demo");
        s.push_point(1, 3, 0.5);
        s.push(2, 5, 0.25, 0.75);
        let csv = s.to_csv("abc123");
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "n,h-count,lo,hi,metadata-hash");
        assert!(lines[1].starts_with("1,3,"));
        assert!(lines[2].ends_with(",abc123"));
        assert_eq!(s.last_value(), Some(0.5));
    }
}
