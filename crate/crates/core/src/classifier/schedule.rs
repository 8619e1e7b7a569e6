use crate::{Error, Result};

/// Optimizer and schedule settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub momentum: f64,
    /// Peak learning rate of the first period.
    pub lr0: f64,
    /// Epochs at which the schedule restarts.
    pub restart_epochs: Vec<usize>,
    /// Peak multiplier applied at every restart, compounding.
    pub restart_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 16,
            momentum: 0.9,
            lr0: 0.05,
            restart_epochs: vec![5, 15, 35, 75, 155],
            restart_decay: 0.76,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("momentum {} not in [0, 1)", self.momentum)));
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.lr0)));
        }
        if !(self.restart_decay > 0.0 && self.restart_decay <= 1.0) {
            return Err(Error::Config(format!("restart decay {} not in (0, 1]", self.restart_decay)));
        }
        if self.restart_epochs.windows(2).any(|w| w[0] >= w[1]) || self.restart_epochs.first() == Some(&0) {
            return Err(Error::Config("restart epochs must be positive and strictly increasing".into()));
        }
        Ok(())
    }
}

/// Cosine-annealed learning rate with warm restarts.
///
/// Restart boundaries (plus 0 and `epochs`) split training into periods; period `k` starts
/// at `lr0 * decay^k` and anneals toward zero along half a cosine.
pub fn sgdr_lr(epoch: usize, cfg: &TrainConfig) -> f64 {
    let mut start = 0;
    let mut end = cfg.epochs.max(1);
    let mut period = 0;
    for &r in cfg.restart_epochs.iter().filter(|&&r| r < cfg.epochs) {
        if epoch >= r {
            start = r;
            period += 1;
        } else {
            end = r;
            break;
        }
    }
    let peak = cfg.lr0 * cfg.restart_decay.powi(period);
    let span = (end - start) as f64;
    let progress = (epoch.min(end) - start) as f64 / span;
    peak * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restart_peaks() {
        let cfg = TrainConfig::default();
        assert_eq!(sgdr_lr(0, &cfg), 0.05);
        assert_eq!(sgdr_lr(5, &cfg), 0.05 * 0.76);
        assert!((sgdr_lr(5, &cfg) - 0.038).abs() < 1e-15);
        assert!((sgdr_lr(155, &cfg) - 0.012_677_626_88).abs() < 1e-12);
        for (k, &r) in cfg.restart_epochs.iter().enumerate() {
            assert_eq!(sgdr_lr(r, &cfg), 0.05 * 0.76f64.powi(k as i32 + 1));
        }
    }

    #[test]
    fn anneals_within_a_period() {
        let cfg = TrainConfig::default();
        for e in 15..34 {
            assert!(sgdr_lr(e + 1, &cfg) < sgdr_lr(e, &cfg));
        }
        assert!(sgdr_lr(199, &cfg) > 0.0);
        assert!(sgdr_lr(199, &cfg) < 1e-4);
    }

    #[test]
    fn validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            restart_epochs: vec![5, 5],
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            restart_decay: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
