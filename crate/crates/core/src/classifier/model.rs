use std::path::Path;

use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"SMX1";

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Linear softmax classifier over standardized inputs.
///
/// `forward(x) = softmax(W z + b)` with `z = (x - input_shift) * input_scale`. A freshly
/// constructed model has the identity input transform.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel {
    /// classes × dims, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub class_labels: Vec<String>,
    pub input_shift: Vec<f64>,
    pub input_scale: Vec<f64>,
}

/// Gradient of the mean cross-entropy with respect to weights and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl SoftmaxModel {
    pub fn zeros(class_labels: Vec<String>, dims: usize) -> Self {
        let k = class_labels.len();
        Self {
            weights: vec![0.0; k * dims],
            bias: vec![0.0; k],
            class_labels,
            input_shift: vec![0.0; dims],
            input_scale: vec![1.0; dims],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn dims(&self) -> usize {
        self.input_shift.len()
    }

    fn check_dims(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dims() {
            return Err(Error::Dimension {
                expected: self.dims(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.input_shift)
            .zip(&self.input_scale)
            .map(|((v, s), c)| (v - s) * c)
            .collect()
    }

    fn logits_of_standardized(&self, z: &[f64]) -> Vec<f64> {
        let d = self.dims();
        self.bias
            .iter()
            .enumerate()
            .map(|(c, b)| b + self.weights[c * d..(c + 1) * d].iter().zip(z).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dims(x)?;
        Ok(self.logits_of_standardized(&self.standardize(x)))
    }

    /// Class posterior for one input.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.logits(x)?))
    }

    /// Mean cross-entropy over `batch` of `(input, class index)` pairs.
    pub fn loss(&self, batch: &[(&[f64], usize)]) -> Result<f64> {
        let mut total = 0.0;
        for &(x, y) in batch {
            let p = self.forward(x)?;
            total -= p[y].max(f64::MIN_POSITIVE).ln();
        }
        Ok(total / batch.len().max(1) as f64)
    }

    /// Mean cross-entropy and its analytic gradient: `(p - onehot(y)) z^T` per example.
    pub fn loss_and_gradient(&self, batch: &[(&[f64], usize)]) -> Result<(f64, Gradient)> {
        let (k, d) = (self.n_classes(), self.dims());
        let mut g = Gradient {
            weights: vec![0.0; k * d],
            bias: vec![0.0; k],
        };
        let mut loss = 0.0;
        for &(x, y) in batch {
            self.check_dims(x)?;
            if y >= k {
                return Err(Error::Dimension { expected: k, found: y });
            }
            let z = self.standardize(x);
            let p = softmax(&self.logits_of_standardized(&z));
            loss -= p[y].max(f64::MIN_POSITIVE).ln();
            for (c, &pc) in p.iter().enumerate() {
                let delta = pc - if c == y { 1.0 } else { 0.0 };
                g.bias[c] += delta;
                for (gw, zv) in g.weights[c * d..(c + 1) * d].iter_mut().zip(&z) {
                    *gw += delta * zv;
                }
            }
        }
        let n = batch.len().max(1) as f64;
        g.weights.iter_mut().chain(g.bias.iter_mut()).for_each(|v| *v /= n);
        Ok((loss / n, g))
    }

    /// `SMX1` container: magic, u32 classes, u32 dims, length-prefixed UTF-8 labels, then
    /// little-endian f64 weights, bias, input shift and input scale.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.n_classes() as u32).to_le_bytes());
        out.extend_from_slice(&(self.dims() as u32).to_le_bytes());
        for l in &self.class_labels {
            out.extend_from_slice(&(l.len() as u32).to_le_bytes());
            out.extend_from_slice(l.as_bytes());
        }
        for v in self
            .weights
            .iter()
            .chain(&self.bias)
            .chain(&self.input_shift)
            .chain(&self.input_scale)
        {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("missing SMX1 header".into()));
        }
        let k = r.u32()? as usize;
        let d = r.u32()? as usize;
        let mut class_labels = Vec::new();
        for _ in 0..k {
            let len = r.u32()? as usize;
            let raw = r.take(len)?;
            let label = std::str::from_utf8(raw)
                .map_err(|_| Error::Format("SMX1 label is not UTF-8".into()))?;
            class_labels.push(label.to_string());
        }
        let weights = r.f64s(k.checked_mul(d).ok_or_else(|| Error::Format("SMX1 size overflow".into()))?)?;
        let bias = r.f64s(k)?;
        let input_shift = r.f64s(d)?;
        let input_scale = r.f64s(d)?;
        if r.pos != bytes.len() {
            return Err(Error::Format("trailing bytes after SMX1 model".into()));
        }
        let model = Self {
            weights,
            bias,
            class_labels,
            input_shift,
            input_scale,
        };
        if model
            .weights
            .iter()
            .chain(&model.bias)
            .chain(&model.input_shift)
            .chain(&model.input_scale)
            .any(|v| !v.is_finite())
        {
            return Err(Error::Format("SMX1 holds non-finite parameters".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format("SMX1 truncated".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::Format("SMX1 size overflow".into()))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_and_closed_form() {
        let m = SoftmaxModel::zeros(vec!["a".into(), "b".into(), "c".into(), "d".into()], 3);
        assert_eq!(m.forward(&[1.0, 2.0, 3.0]).unwrap(), vec![0.25; 4]);
        let p = softmax(&[2f64.ln(), 0.0]);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12 && (p[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn shift_invariance_and_extremes() {
        let z = [3.0, -1.0, 0.5];
        let a = softmax(&z);
        let b = softmax(&z.map(|v| v + 1000.0));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        let p = softmax(&[1e308, -1e308]);
        assert_eq!(p, vec![1.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let m = SoftmaxModel::zeros(vec!["a".into(), "b".into()], 3);
        assert!(matches!(m.forward(&[1.0]), Err(Error::Dimension { expected: 3, found: 1 })));
    }

    #[test]
    fn smx1_round_trip_and_rejects() {
        let mut m = SoftmaxModel::zeros(vec!["yes".into(), "no".into()], 2);
        m.weights = vec![0.5, -1.0, 2.0, 0.25];
        m.bias = vec![0.1, -0.1];
        m.input_shift = vec![1.0, 2.0];
        m.input_scale = vec![0.5, 4.0];
        let bytes = m.to_bytes();
        assert_eq!(SoftmaxModel::from_bytes(&bytes).unwrap(), m);
        assert!(SoftmaxModel::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(SoftmaxModel::from_bytes(&extra).is_err());
        assert!(SoftmaxModel::from_bytes(b"SMX1\xff\xff\xff\xff\xff\xff\xff\xff").is_err());
    }
}
