use std::fmt::Write as _;

use super::{accuracy, format_accuracy, fuse, FusionSpec, Truth};
use crate::scores::ScoreMatrix;
use crate::Result;

/// Index subsets of `0..n` with 1..=`max_size` members, by size then lexicographically.
pub fn subsets_up_to(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    fn extend(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            extend(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for size in 1..=max_size.min(n) {
        extend(0, n, size, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Member names joined with `&`.
    pub name: String,
    pub members: Vec<usize>,
    pub accuracy: f64,
}

/// Accuracy of every single source and every equal-weight pair and triple.
pub fn sweep_combinations(sources: &[(String, ScoreMatrix)], truth: &Truth) -> Result<Vec<SweepRow>> {
    if sources.is_empty() {
        return Err(crate::Error::Fusion("no score sources to sweep".into()));
    }
    subsets_up_to(sources.len(), 3)
        .into_iter()
        .map(|members| {
            let mats: Vec<&ScoreMatrix> = members.iter().map(|&i| &sources[i].1).collect();
            let fused = fuse(&FusionSpec::equal(mats)?)?;
            Ok(SweepRow {
                name: members
                    .iter()
                    .map(|&i| sources[i].0.as_str())
                    .collect::<Vec<_>>()
                    .join("&"),
                accuracy: accuracy(&fused, truth)?,
                members,
            })
        })
        .collect()
}

/// Subset rows × condition columns of accuracy percentages.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyTable {
    pub conditions: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl AccuracyTable {
    /// Combine per-condition sweeps that share the same row order.
    pub fn from_sweeps(sweeps: &[(String, Vec<SweepRow>)]) -> Self {
        let conditions = sweeps.iter().map(|(c, _)| c.clone()).collect();
        let rows = match sweeps.first() {
            None => Vec::new(),
            Some((_, first)) => first
                .iter()
                .enumerate()
                .map(|(i, r)| (r.name.clone(), sweeps.iter().map(|(_, s)| s[i].accuracy).collect()))
                .collect(),
        };
        Self { conditions, rows }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("features");
        for c in &self.conditions {
            let _ = write!(out, "\t{c}");
        }
        out.push('\n');
        for (name, accs) in &self.rows {
            out.push_str(name);
            for a in accs {
                let _ = write!(out, "\t{}", format_accuracy(*a));
            }
            out.push('\n');
        }
        out
    }
}
