use serde::{Deserialize, Serialize};

/// Halves the learning rate whenever validation loss rises above the
/// previous epoch's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub lr: f64,
    pub enabled: bool,
    pub previous: Option<f64>,
    pub halvings: usize,
}

impl LrSchedule {
    pub fn new(lr: f64, enabled: bool) -> Self {
        LrSchedule { lr, enabled, previous: None, halvings: 0 }
    }

    /// Records one epoch's validation loss; returns whether the rate halved.
    pub fn observe(&mut self, val_loss: f64) -> bool {
        let halve = self.enabled && self.previous.is_some_and(|p| val_loss > p);
        if halve {
            self.lr /= 2.0;
            self.halvings += 1;
        }
        self.previous = Some(val_loss);
        halve
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(seq: &[f64]) -> LrSchedule {
        let mut s = LrSchedule::new(0.001, true);
        for &v in seq {
            s.observe(v);
        }
        s
    }

    #[test]
    fn first_epoch_never_halves() {
        assert_eq!(run(&[5.0]).lr, 0.001);
    }

    #[test]
    fn single_increase() {
        assert_eq!(run(&[1.0, 1.1]).lr, 0.0005);
    }

    #[test]
    fn trace_with_two_increases() {
        let s = run(&[1.0, 0.9, 0.95, 1.2]);
        assert_eq!(s.halvings, 2);
        assert_eq!(s.lr, 0.00025);
    }

    #[test]
    fn disabled_never_halves() {
        let mut s = LrSchedule::new(0.001, false);
        s.observe(1.0);
        s.observe(2.0);
        assert_eq!(s.lr, 0.001);
    }
}
