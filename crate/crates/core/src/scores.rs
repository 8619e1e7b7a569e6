//! Posterior score matrices and their TSV form.
//!
//! ```text
//! utt_id<TAB>label1<TAB>...<TAB>labelK
//! yes/a<TAB>0.912000000<TAB>...
//! ```
//!
//! Probabilities are written with nine significant digits.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::{Error, Result};

/// Row sums must land within this distance of one when a file is loaded.
pub const LOAD_SUM_TOLERANCE: f64 = 1e-4;

/// Utterances × classes posterior matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub utt_ids: Vec<String>,
    pub class_labels: Vec<String>,
    /// Row-major, `utt_ids.len() * class_labels.len()` entries.
    pub probs: Vec<f64>,
}

impl ScoreMatrix {
    /// Build and validate: unique non-empty ids and labels free of tabs and line breaks,
    /// nonnegative rows summing to one within [`LOAD_SUM_TOLERANCE`].
    pub fn new(utt_ids: Vec<String>, class_labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        let m = Self {
            utt_ids,
            class_labels,
            probs,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.class_labels.len();
        if k == 0 {
            return Err(Error::Scores("no classes".into()));
        }
        if self.probs.len() != self.utt_ids.len() * k {
            return Err(Error::Scores(format!(
                "{} values for {} utterances x {k} classes",
                self.probs.len(),
                self.utt_ids.len()
            )));
        }
        let unwritable = |s: &String| s.is_empty() || s.contains(['\t', '\r', '\n']);
        if let Some(bad) = self.utt_ids.iter().chain(&self.class_labels).find(|s| unwritable(s)) {
            return Err(Error::Scores(format!("empty name or name with tab or line break: {bad:?}")));
        }
        let mut seen = HashSet::new();
        for id in &self.utt_ids {
            if !seen.insert(id) {
                return Err(Error::Scores(format!("duplicate utterance id {id}")));
            }
        }
        let mut labels = HashSet::new();
        for l in &self.class_labels {
            if !labels.insert(l) {
                return Err(Error::Scores(format!("duplicate class label {l}")));
            }
        }
        for (i, row) in self.rows().enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::Scores(format!(
                    "row {} has a negative or non-finite probability",
                    self.utt_ids[i]
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > LOAD_SUM_TOLERANCE {
                return Err(Error::Scores(format!(
                    "row {} sums to {sum}",
                    self.utt_ids[i]
                )));
            }
        }
        Ok(())
    }

    pub fn n_utts(&self) -> usize {
        self.utt_ids.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.n_classes();
        &self.probs[i * k..(i + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks_exact(self.n_classes().max(1))
    }

    pub fn index_of(&self) -> HashMap<&str, usize> {
        self.utt_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("utt_id");
        for l in &self.class_labels {
            out.push('\t');
            out.push_str(l);
        }
        out.push('\n');
        for (id, row) in self.utt_ids.iter().zip(self.rows()) {
            out.push_str(id);
            for &p in row {
                out.push('\t');
                out.push_str(&format_sig9(p));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
        let header = lines.next().ok_or_else(|| Error::Scores("empty file".into()))?;
        let mut cols = header.split('\t');
        if cols.next() != Some("utt_id") {
            return Err(Error::Scores("header must start with utt_id".into()));
        }
        let class_labels: Vec<String> = cols.map(str::to_string).collect();
        let mut utt_ids = Vec::new();
        let mut probs = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            let id = cols.next().unwrap_or_default();
            if id.is_empty() {
                return Err(Error::Scores(format!("line {}: empty utterance id", n + 2)));
            }
            let before = probs.len();
            for c in cols {
                let v: f64 = c
                    .parse()
                    .map_err(|_| Error::Scores(format!("line {}: bad number {c:?}", n + 2)))?;
                probs.push(v);
            }
            if probs.len() - before != class_labels.len() {
                return Err(Error::Scores(format!(
                    "line {}: expected {} probabilities",
                    n + 2,
                    class_labels.len()
                )));
            }
            utt_ids.push(id.to_string());
        }
        Self::new(utt_ids, class_labels, probs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text).map_err(|e| Error::Scores(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }
}

/// Nine significant digits: fixed notation for moderate magnitudes, scientific otherwise.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..=8).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.8e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_must_survive_the_text_format() {
        for (ids, labels) in [(vec!["u"], vec!["a\r", "b"]), (vec!["u\tv"], vec!["a", "b"]), (vec!["u"], vec!["", "b"])] {
            let ids = ids.into_iter().map(String::from).collect();
            let labels = labels.into_iter().map(String::from).collect();
            assert!(ScoreMatrix::new(ids, labels, vec![0.5, 0.5]).is_err());
        }
        assert!(ScoreMatrix::parse_tsv("utt_id\t\tb\nu\t1\t0\n").is_err());
    }

    fn sample() -> ScoreMatrix {
        ScoreMatrix::new(
            vec!["u1".into(), "u2".into()],
            vec!["yes".into(), "no".into()],
            vec![0.45, 0.55, 1.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn tsv_layout() {
        let t = sample().to_tsv();
        assert_eq!(t, "utt_id\tyes\tno\nu1\t0.450000000\t0.550000000\nu2\t1.00000000\t0\n");
        assert_eq!(ScoreMatrix::parse_tsv(&t).unwrap(), sample());
    }

    #[test]
    fn sig9() {
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(1e-7), "1.00000000e-7");
        assert_eq!(format_sig9(0.000123456789123), "0.000123456789");
    }

    #[test]
    fn rejects_bad_files() {
        assert!(ScoreMatrix::parse_tsv("").is_err());
        assert!(ScoreMatrix::parse_tsv("id\ta\n").is_err());
        assert!(ScoreMatrix::parse_tsv("utt_id\ta\tb\nx\t0.5\t0.6\n").is_err());
        assert!(ScoreMatrix::parse_tsv("utt_id\ta\tb\nx\t0.5\n").is_err());
        assert!(ScoreMatrix::parse_tsv("utt_id\ta\tb\nx\t0.5\t0.5\nx\t0.5\t0.5\n").is_err());
        assert!(ScoreMatrix::parse_tsv("utt_id\ta\tb\nx\t1.5\t-0.5\n").is_err());
        assert!(ScoreMatrix::parse_tsv("utt_id\ta\tb\nx\tNaN\t0.5\n").is_err());
        // within the load tolerance
        assert!(ScoreMatrix::parse_tsv("utt_id\ta\tb\nx\t0.50004\t0.5\n").is_ok());
    }
}
