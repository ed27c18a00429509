//! Proleptic Gregorian calendar arithmetic on integer day offsets.
//!
//! Day 0 is 1900-01-01. The supported range is 1900-01-01 through
//! 2049-12-31; conversions outside it are still well defined, range checks
//! happen at the normalizer boundary.

use std::fmt;

pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2049;

/// Day offset of 1900-01-01 counted from 0000-03-01 in the civil algorithm below.
const EPOCH_SHIFT: i64 = 693_901;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date {
    pub year: i32,
    pub month: u32,
    pub day: u32,
}

impl Date {
    /// Returns `None` when the triple is not a real calendar date.
    pub fn new(year: i32, month: u32, day: u32) -> Option<Self> {
        if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
            return None;
        }
        Some(Date { year, month, day })
    }

    pub fn to_days(self) -> i32 {
        days_from_civil(self.year, self.month, self.day)
    }

    pub fn from_days(days: i32) -> Self {
        civil_from_days(days)
    }

    pub fn add_days(self, n: i32) -> Self {
        Date::from_days(self.to_days() + n)
    }

    /// Shifts by whole months, clamping the day to the target month's length.
    pub fn add_months(self, n: i32) -> Self {
        let zero_based = self.year * 12 + (self.month as i32 - 1) + n;
        let year = zero_based.div_euclid(12);
        let month = zero_based.rem_euclid(12) as u32 + 1;
        let day = self.day.min(days_in_month(year, month));
        Date { year, month, day }
    }

    /// Shifts by whole years; Feb 29 clamps to Feb 28 in common years.
    pub fn add_years(self, n: i32) -> Self {
        let year = self.year + n;
        let day = self.day.min(days_in_month(year, self.month));
        Date { year, month: self.month, day }
    }

    /// Parses `YYYY-MM-DD`.
    pub fn parse_iso(s: &str) -> Option<Self> {
        let mut parts = s.trim().splitn(3, '-');
        let year = parts.next()?.parse().ok()?;
        let month = parts.next()?.parse().ok()?;
        let day = parts.next()?.parse().ok()?;
        Date::new(year, month, day)
    }

    pub fn in_supported_range(self) -> bool {
        (MIN_YEAR..=MAX_YEAR).contains(&self.year)
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

/// First and last day offsets of a calendar year.
pub fn year_bounds(year: i32) -> (i32, i32) {
    (
        days_from_civil(year, 1, 1),
        days_from_civil(year, 12, 31),
    )
}

/// First and last day offsets of a calendar month.
pub fn month_bounds(year: i32, month: u32) -> (i32, i32) {
    (
        days_from_civil(year, month, 1),
        days_from_civil(year, month, days_in_month(year, month)),
    )
}

// Civil-from-days and days-from-civil after H. Hinnant's era decomposition.
fn days_from_civil(year: i32, month: u32, day: u32) -> i32 {
    let y = i64::from(year) - i64::from(month <= 2);
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let m = i64::from(month);
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + i64::from(day) - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    (era * 146_097 + doe - EPOCH_SHIFT) as i32
}

fn civil_from_days(days: i32) -> Date {
    let z = i64::from(days) + EPOCH_SHIFT;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let month = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    let year = (yoe + era * 400 + i64::from(month <= 2)) as i32;
    Date { year, month, day }
}
