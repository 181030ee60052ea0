//! Fixed-point seconds.
//!
//! Manifest times carry at most four fractional digits, so spans are kept as
//! integer counts of 100 µs. Sums and differences of spans are then exact,
//! which the segmentation stage relies on when it partitions a parent span.

use core::fmt;
use core::ops::{Add, Sub};

/// Ticks per second.
pub const TICKS_PER_SECOND: i64 = 10_000;

/// A time offset or duration in units of 100 µs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Seconds(i64);

impl Seconds {
    pub const ZERO: Seconds = Seconds(0);

    pub const fn from_ticks(ticks: i64) -> Self {
        Seconds(ticks)
    }

    /// Rounds to the nearest tick. Non-finite input maps to zero.
    pub fn from_secs_f64(secs: f64) -> Self {
        if !secs.is_finite() {
            return Seconds(0);
        }
        Seconds(libm::round(secs * TICKS_PER_SECOND as f64) as i64)
    }

    /// Converts a sample count at `rate_hz` to the nearest tick.
    pub fn from_samples(samples: usize, rate_hz: u32) -> Self {
        let num = samples as i128 * TICKS_PER_SECOND as i128;
        let den = rate_hz as i128;
        Seconds(((2 * num + den) / (2 * den)) as i64)
    }

    pub const fn ticks(self) -> i64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / TICKS_PER_SECOND as f64
    }

    /// Sample index at `rate_hz` nearest to this time.
    pub fn to_samples(self, rate_hz: u32) -> usize {
        if self.0 <= 0 {
            return 0;
        }
        let num = self.0 as i128 * rate_hz as i128;
        let den = TICKS_PER_SECOND as i128;
        ((2 * num + den) / (2 * den)) as usize
    }
}

impl Add for Seconds {
    type Output = Seconds;
    fn add(self, rhs: Seconds) -> Seconds {
        Seconds(self.0 + rhs.0)
    }
}

impl Sub for Seconds {
    type Output = Seconds;
    fn sub(self, rhs: Seconds) -> Seconds {
        Seconds(self.0 - rhs.0)
    }
}

impl fmt::Display for Seconds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / TICKS_PER_SECOND as u64;
        let frac = abs % TICKS_PER_SECOND as u64;
        write!(f, "{sign}{whole}.{frac:04}")
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Seconds {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_secs_f64())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Seconds {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let secs = <f64 as serde::Deserialize>::deserialize(d)?;
        if !secs.is_finite() {
            return Err(serde::de::Error::custom("time must be finite"));
        }
        Ok(Seconds::from_secs_f64(secs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn rounds_to_four_digits() {
        assert_eq!(Seconds::from_secs_f64(7.1).ticks(), 71_000);
        assert_eq!(Seconds::from_secs_f64(0.00004).ticks(), 0);
        assert_eq!(Seconds::from_secs_f64(0.00005).ticks(), 1);
        assert_eq!(Seconds::from_secs_f64(f64::NAN), Seconds::ZERO);
    }

    #[test]
    fn sample_conversion() {
        assert_eq!(Seconds::from_samples(44_100, 44_100).ticks(), 10_000);
        assert_eq!(Seconds::from_ticks(5_000).to_samples(48_000), 24_000);
        assert_eq!(Seconds::from_ticks(-3).to_samples(48_000), 0);
    }

    #[test]
    fn display() {
        assert_eq!(Seconds::from_ticks(71_000).to_string(), "7.1000");
        assert_eq!(Seconds::from_ticks(-5).to_string(), "-0.0005");
    }
}
