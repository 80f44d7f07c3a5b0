//! Chronological train / validation / test partitioning.

use chrono::NaiveDate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Partition {
    Train,
    Validation,
    Test,
}

impl Partition {
    pub const ALL: [Partition; 3] = [Partition::Train, Partition::Validation, Partition::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Validation => "validation",
            Partition::Test => "test",
        }
    }
}

/// Half-open interval of unix seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Range {
    pub start: i64,
    pub end: i64,
}

impl Range {
    pub fn contains(&self, ts: i64) -> bool {
        self.start <= ts && ts < self.end
    }
}

/// Three disjoint, ordered ranges. Anything outside all of them is
/// excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeSplit {
    pub train: Range,
    pub validation: Range,
    pub test: Range,
}

/// Unix seconds at midnight UTC of the given date.
pub fn midnight(year: i32, month: u32, day: u32) -> Option<i64> {
    Some(
        NaiveDate::from_ymd_opt(year, month, day)?
            .and_hms_opt(0, 0, 0)?
            .and_utc()
            .timestamp(),
    )
}

impl Default for TimeSplit {
    fn default() -> Self {
        let d = |y, m, day| midnight(y, m, day).expect("valid date");
        TimeSplit::new([d(2015, 5, 1), d(2016, 3, 1), d(2016, 5, 1), d(2016, 7, 1)])
            .expect("default boundaries are ordered")
    }
}

impl TimeSplit {
    /// Contiguous split from four increasing boundaries.
    pub fn new(bounds: [i64; 4]) -> Option<Self> {
        if !bounds.windows(2).all(|w| w[0] < w[1]) {
            return None;
        }
        Some(TimeSplit {
            train: Range {
                start: bounds[0],
                end: bounds[1],
            },
            validation: Range {
                start: bounds[1],
                end: bounds[2],
            },
            test: Range {
                start: bounds[2],
                end: bounds[3],
            },
        })
    }

    pub fn range(&self, p: Partition) -> Range {
        match p {
            Partition::Train => self.train,
            Partition::Validation => self.validation,
            Partition::Test => self.test,
        }
    }

    pub fn assign(&self, ts: i64) -> Option<Partition> {
        Partition::ALL
            .into_iter()
            .find(|&p| self.range(p).contains(ts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn boundary_examples() {
        let s = TimeSplit::default();
        let at = |y, m, d, secs: i64| midnight(y, m, d).unwrap() + secs;
        assert_eq!(s.assign(at(2016, 2, 29, 86_399)), Some(Partition::Train));
        assert_eq!(s.assign(at(2016, 3, 1, 0)), Some(Partition::Validation));
        assert_eq!(s.assign(at(2015, 4, 30, 43_200)), None);
        assert_eq!(s.assign(at(2015, 5, 1, 0)), Some(Partition::Train));
        assert_eq!(s.assign(at(2016, 5, 1, 0)), Some(Partition::Test));
        assert_eq!(s.assign(at(2016, 7, 1, 0)), None);
    }

    #[test]
    fn unordered_bounds_rejected() {
        assert!(TimeSplit::new([0, 2, 1, 3]).is_none());
    }

    proptest! {
        #[test]
        fn at_most_one_partition(ts in 1_400_000_000i64..1_500_000_000) {
            let s = TimeSplit::default();
            let hits = Partition::ALL.iter().filter(|&&p| s.range(p).contains(ts)).count();
            let inside = s.train.start <= ts && ts < s.test.end;
            prop_assert_eq!(hits, inside as usize);
        }
    }
}
