use std::collections::HashMap;
use std::fmt::Write as _;

use super::{predict, truth_for, Truth};
use crate::scores::ScoreMatrix;
use crate::{Error, Result};

/// Class-by-class counts; rows are predictions, columns are true labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    /// `counts[predicted][true]`
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn column_sum(&self, truth: usize) -> u64 {
        self.counts.iter().map(|r| r[truth]).sum()
    }

    /// Diagonal over column sum; `None` for classes that never occur.
    pub fn class_accuracy(&self, class: usize) -> Option<f64> {
        let n = self.column_sum(class);
        (n > 0).then(|| self.counts[class][class] as f64 / n as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("predicted\\true");
        for l in &self.labels {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.counts) {
            out.push_str(l);
            for c in row {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }

    /// Standalone SVG heatmap, cells shaded by their share of the true-label column.
    pub fn to_svg(&self, title: &str) -> String {
        const CELL: usize = 24;
        const MARGIN: usize = 90;
        let n = self.n_classes();
        let size = MARGIN + n * CELL + 10;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{}" font-family="sans-serif" font-size="10">"#,
            size + 20
        );
        let _ = writeln!(s, r#"<text x="{MARGIN}" y="14" font-size="12">{}</text>"#, xml_escape(title));
        for (j, l) in self.labels.iter().enumerate() {
            let x = MARGIN + j * CELL + CELL / 2;
            let _ = writeln!(
                s,
                r#"<text x="{x}" y="{}" transform="rotate(-60 {x} {})" text-anchor="start">{}</text>"#,
                MARGIN - 4,
                MARGIN - 4,
                xml_escape(l)
            );
        }
        for (i, l) in self.labels.iter().enumerate() {
            let y = MARGIN + i * CELL;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                MARGIN - 4,
                y + CELL / 2 + 4,
                xml_escape(l)
            );
            for j in 0..n {
                let col = self.column_sum(j);
                let share = if col == 0 { 0.0 } else { self.counts[i][j] as f64 / col as f64 };
                let shade = (255.0 * (1.0 - share)).round() as u8;
                let _ = writeln!(
                    s,
                    r#"<rect x="{}" y="{y}" width="{CELL}" height="{CELL}" fill="rgb({shade},{shade},255)" stroke="grey"><title>{} -> {}: {}</title></rect>"#,
                    MARGIN + j * CELL,
                    xml_escape(&self.labels[j]),
                    xml_escape(l),
                    self.counts[i][j]
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Count `(predicted, true)` pairs over all utterances.
pub fn confusion(m: &ScoreMatrix, truth: &Truth) -> Result<ConfusionMatrix> {
    let k = m.n_classes();
    let pos: HashMap<&str, usize> = m
        .class_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut counts = vec![vec![0u64; k]; k];
    for (id, pred) in m.utt_ids.iter().zip(predict(m)) {
        let label = truth_for(truth, id)?;
        let t = *pos
            .get(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        counts[pred][t] += 1;
    }
    Ok(ConfusionMatrix {
        labels: m.class_labels.clone(),
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellMarker {
    /// Diagonal: first matrix has the higher per-class accuracy.
    ABetter,
    BBetter,
    Tie,
    /// Off-diagonal error present only in the first matrix.
    AUniqueError,
    BUniqueError,
}

impl CellMarker {
    pub fn as_str(self) -> &'static str {
        match self {
            CellMarker::ABetter => "A-better",
            CellMarker::BBetter => "B-better",
            CellMarker::Tie => "tie",
            CellMarker::AUniqueError => "A-unique-error",
            CellMarker::BUniqueError => "B-unique-error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffCell {
    pub predicted: usize,
    pub truth: usize,
    pub marker: CellMarker,
}

/// Every diagonal cell plus the off-diagonal cells where only one matrix errs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffReport {
    pub labels: Vec<String>,
    pub cells: Vec<DiffCell>,
}

impl DiffReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("predicted\ttrue\tmarker\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                self.labels[c.predicted],
                self.labels[c.truth],
                c.marker.as_str()
            );
        }
        out
    }

    pub fn count(&self, marker: CellMarker) -> usize {
        self.cells.iter().filter(|c| c.marker == marker).count()
    }
}

/// Compare two confusion matrices over the same classes and utterance count.
pub fn confusion_diff(a: &ConfusionMatrix, b: &ConfusionMatrix) -> Result<DiffReport> {
    if a.labels != b.labels || a.counts.len() != b.counts.len() {
        return Err(Error::Dimension {
            expected: a.n_classes(),
            found: b.n_classes(),
        });
    }
    if a.total() != b.total() {
        return Err(Error::Fusion(format!(
            "matrices cover {} and {} utterances",
            a.total(),
            b.total()
        )));
    }
    let n = a.n_classes();
    let mut cells = Vec::new();
    for p in 0..n {
        for t in 0..n {
            let marker = if p == t {
                let (x, y) = (a.class_accuracy(t).unwrap_or(0.0), b.class_accuracy(t).unwrap_or(0.0));
                Some(if x > y {
                    CellMarker::ABetter
                } else if y > x {
                    CellMarker::BBetter
                } else {
                    CellMarker::Tie
                })
            } else {
                match (a.counts[p][t], b.counts[p][t]) {
                    (x, 0) if x > 0 => Some(CellMarker::AUniqueError),
                    (0, y) if y > 0 => Some(CellMarker::BUniqueError),
                    _ => None,
                }
            };
            if let Some(marker) = marker {
                cells.push(DiffCell {
                    predicted: p,
                    truth: t,
                    marker,
                });
            }
        }
    }
    Ok(DiffReport {
        labels: a.labels.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn onehots(ids: &[&str], preds: &[usize], k: usize) -> ScoreMatrix {
        let mut probs = vec![0.0; ids.len() * k];
        for (i, &p) in preds.iter().enumerate() {
            probs[i * k + p] = 1.0;
        }
        ScoreMatrix::new(
            ids.iter().map(|s| s.to_string()).collect(),
            (0..k).map(|c| format!("c{c}")).collect(),
            probs,
        )
        .unwrap()
    }

    fn truth(pairs: &[(&str, usize)]) -> Truth {
        pairs.iter().map(|(u, c)| (u.to_string(), format!("c{c}"))).collect()
    }

    #[test]
    fn perfect_is_diagonal() {
        let m = onehots(&["a", "b", "c"], &[0, 1, 2], 3);
        let cm = confusion(&m, &truth(&[("a", 0), ("b", 1), ("c", 2)])).unwrap();
        for p in 0..3 {
            for t in 0..3 {
                assert_eq!(cm.counts[p][t], (p == t) as u64);
            }
        }
        assert_eq!(cm.total(), 3);
        assert_eq!(cm.class_accuracy(1), Some(1.0));
    }

    #[test]
    fn single_wrong() {
        let m = onehots(&["a"], &[2], 3);
        let cm = confusion(&m, &truth(&[("a", 0)])).unwrap();
        assert_eq!(cm.counts[2][0], 1);
        assert_eq!(cm.total(), 1);
        assert_eq!(cm.class_accuracy(0), Some(0.0));
        assert_eq!(cm.class_accuracy(1), None);
        assert!(cm.to_csv().starts_with("predicted\\true,c0,c1,c2\nc0,0,0,0\n"));
        let svg = cm.to_svg("demo <1>");
        assert!(svg.starts_with("<svg") && svg.contains("demo &lt;1&gt;"));
        assert_eq!(svg.matches("<rect").count(), 9);
    }

    #[test]
    fn unknown_truth_label() {
        let m = onehots(&["a"], &[0], 2);
        let t: Truth = [("a".to_string(), "zzz".to_string())].into_iter().collect();
        assert!(matches!(confusion(&m, &t), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn diff_of_equal_matrices_is_all_ties() {
        let m = onehots(&["a", "b"], &[0, 0], 2);
        let cm = confusion(&m, &truth(&[("a", 0), ("b", 1)])).unwrap();
        let d = confusion_diff(&cm, &cm).unwrap();
        assert_eq!(d.count(CellMarker::Tie), 2);
        assert_eq!(d.cells.len(), 2);
    }

    #[test]
    fn diff_perfect_vs_one_error() {
        let t = truth(&[("a", 0), ("b", 1), ("c", 2)]);
        let a = confusion(&onehots(&["a", "b", "c"], &[0, 1, 2], 3), &t).unwrap();
        let b = confusion(&onehots(&["a", "b", "c"], &[0, 0, 2], 3), &t).unwrap();
        let d = confusion_diff(&a, &b).unwrap();
        assert_eq!(d.count(CellMarker::ABetter), 1);
        assert!(d.cells.contains(&DiffCell { predicted: 1, truth: 1, marker: CellMarker::ABetter }));
        assert_eq!(d.count(CellMarker::BUniqueError), 1);
        assert!(d.cells.contains(&DiffCell { predicted: 0, truth: 1, marker: CellMarker::BUniqueError }));
        assert_eq!(d.count(CellMarker::AUniqueError), 0);
        assert!(d.to_tsv().contains("c0\tc1\tB-unique-error\n"));
    }

    #[test]
    fn diff_shape_mismatch() {
        let a = confusion(&onehots(&["a"], &[0], 2), &truth(&[("a", 0)])).unwrap();
        let b = confusion(&onehots(&["a"], &[0], 3), &truth(&[("a", 0)])).unwrap();
        assert!(confusion_diff(&a, &b).is_err());
    }
}
