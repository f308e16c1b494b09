//! Bounded motivational drive (hunger only).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriveKind {
    Appetitive,
    Aversive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveState {
    pub value: f64,
    pub max: f64,
    pub growth: f64,
    pub kind: DriveKind,
}

impl DriveState {
    pub fn hunger(value: f64, max: f64, growth: f64) -> Self {
        assert!(max > 0.0, "drive ceiling must be positive");
        assert!(growth > 0.0 && growth < 1.0, "growth factor must lie in (0, 1)");
        Self { value: value.clamp(0.0, max), max, growth, kind: DriveKind::Appetitive }
    }

    /// One tick: growth toward the ceiling, reduction proportional to the current
    /// level, and incentive proportional to the remaining headroom.
    pub fn update(&self, reduction: f64, incentive: f64) -> Self {
        assert!(reduction.is_finite() && incentive.is_finite(), "drive inputs must be finite");
        let headroom = (self.max - self.value).abs();
        let next = self.value + self.growth * headroom - reduction * self.value.abs() + incentive * headroom;
        Self { value: next.clamp(0.0, self.max), ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_point_at_ceiling() {
        let d = DriveState::hunger(1.0, 1.0, 0.1);
        assert_eq!(d.update(0.0, 0.0).value, 1.0);
    }

    #[test]
    fn growth_from_empty() {
        let d = DriveState::hunger(0.0, 1.0, 0.1);
        assert_eq!(d.update(0.0, 0.0).value, 0.1);
    }

    #[test]
    fn full_reduction_on_capture() {
        let d = DriveState::hunger(1.0, 1.0, 0.1);
        assert_eq!(d.update(1.0, 0.0).value, 0.0);
    }

    proptest! {
        #[test]
        fn stays_bounded(
            start in 0.0f64..5.0,
            max in 0.1f64..5.0,
            growth in 0.001f64..0.999,
            inputs in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..200),
        ) {
            let mut d = DriveState::hunger(start, max, growth);
            for (a, i) in inputs {
                d = d.update(a, i);
                prop_assert!(d.value >= 0.0 && d.value <= max);
            }
        }

        #[test]
        fn incentive_is_monotone(
            start in 0.0f64..1.0,
            growth in 0.001f64..0.999,
            i1 in 0.0f64..3.0,
            extra in 0.0f64..3.0,
        ) {
            let d = DriveState::hunger(start, 1.0, growth);
            prop_assert!(d.update(0.0, i1 + extra).value >= d.update(0.0, i1).value);
        }
    }
}
