//! Timex normalization onto the shared day timeline, and interval comparison.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{self, Date, MAX_YEAR, MIN_YEAR};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("unparseable timex: {0:?}")]
    Unparseable(String),
    #[error("timex {0:?} resolves outside {MIN_YEAR}-{MAX_YEAR}")]
    OutOfRange(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Day,
    Month,
    Year,
    /// A single instant resolved from the reference anchor.
    Point,
    /// An anchor-relative stretch such as "past 5 weeks".
    Span,
}

/// A timex resolved to inclusive day offsets from 1900-01-01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeInterval {
    pub start_day: i32,
    pub end_day: i32,
    pub granularity: Granularity,
}

impl TimeInterval {
    pub fn day(date: Date) -> Self {
        let d = date.to_days();
        TimeInterval { start_day: d, end_day: d, granularity: Granularity::Day }
    }

    pub fn point(day: i32) -> Self {
        TimeInterval { start_day: day, end_day: day, granularity: Granularity::Point }
    }

    pub fn month(year: i32, month: u32) -> Self {
        let (start_day, end_day) = calendar::month_bounds(year, month);
        TimeInterval { start_day, end_day, granularity: Granularity::Month }
    }

    pub fn year(year: i32) -> Self {
        let (start_day, end_day) = calendar::year_bounds(year);
        TimeInterval { start_day, end_day, granularity: Granularity::Year }
    }

    pub fn span(start_day: i32, end_day: i32) -> Self {
        debug_assert!(start_day <= end_day);
        TimeInterval { start_day, end_day, granularity: Granularity::Span }
    }

    pub fn start_date(&self) -> Date {
        Date::from_days(self.start_day)
    }

    pub fn end_date(&self) -> Date {
        Date::from_days(self.end_day)
    }

    fn in_supported_range(&self) -> bool {
        self.start_date().in_supported_range() && self.end_date().in_supported_range()
    }
}

/// The document "now" that relative timexes resolve against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReferenceAnchor {
    pub anchor_day: i32,
}

impl ReferenceAnchor {
    pub fn from_date(date: Date) -> Option<Self> {
        date.in_supported_range().then(|| ReferenceAnchor { anchor_day: date.to_days() })
    }

    pub fn parse_iso(s: &str) -> Option<Self> {
        Date::parse_iso(s).and_then(Self::from_date)
    }

    pub fn date(&self) -> Date {
        Date::from_days(self.anchor_day)
    }

    pub fn shifted(&self, days: i32) -> Option<Self> {
        Self::from_date(self.date().add_days(days))
    }
}

impl Default for ReferenceAnchor {
    /// 1998-06-15.
    fn default() -> Self {
        ReferenceAnchor::from_date(Date { year: 1998, month: 6, day: 15 }).unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Before,
    After,
    Simultaneous,
    /// Overlapping but unequal intervals.
    Ambiguous,
}

pub fn compare(a: &TimeInterval, b: &TimeInterval) -> Relation {
    if a.end_day < b.start_day {
        Relation::Before
    } else if a.start_day > b.end_day {
        Relation::After
    } else if a.start_day == b.start_day && a.end_day == b.end_day {
        Relation::Simultaneous
    } else {
        Relation::Ambiguous
    }
}

/// Two-digit years pivot at 50: `00..=49` are 2000s, `50..=99` are 1900s.
pub fn resolve_two_digit_year(yy: u32) -> i32 {
    assert!(yy <= 99, "two-digit year out of range: {yy}");
    if yy < 50 {
        2000 + yy as i32
    } else {
        1900 + yy as i32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    Day,
    Week,
    Month,
    Year,
}

impl TimeUnit {
    pub const ALL: [TimeUnit; 4] = [TimeUnit::Day, TimeUnit::Week, TimeUnit::Month, TimeUnit::Year];

    pub fn singular(self) -> &'static str {
        match self {
            TimeUnit::Day => "day",
            TimeUnit::Week => "week",
            TimeUnit::Month => "month",
            TimeUnit::Year => "year",
        }
    }

    pub fn plural(self) -> &'static str {
        match self {
            TimeUnit::Day => "days",
            TimeUnit::Week => "weeks",
            TimeUnit::Month => "months",
            TimeUnit::Year => "years",
        }
    }

    fn parse(token: &str) -> Option<Self> {
        TimeUnit::ALL
            .into_iter()
            .find(|u| token == u.singular() || token == u.plural())
    }

    /// Moves `date` by `n` units (negative is backwards).
    pub fn shift(self, date: Date, n: i32) -> Date {
        match self {
            TimeUnit::Day => date.add_days(n),
            TimeUnit::Week => date.add_days(7 * n),
            TimeUnit::Month => date.add_months(n),
            TimeUnit::Year => date.add_years(n),
        }
    }
}

pub const MONTH_FULL: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September",
    "October", "November", "December",
];

pub const MONTH_SHORT: [&str; 12] = [
    "Jan.", "Feb.", "Mar.", "Apr.", "May", "June", "July", "Aug.", "Sept.", "Oct.", "Nov.", "Dec.",
];

pub const NUMBER_WORDS: [&str; 20] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
    "nineteen",
];

pub const TENS_WORDS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];

/// Spells `1..=99` in English words, hyphenating compound numbers.
pub fn number_to_words(n: u32) -> Option<String> {
    match n {
        1..=19 => Some(NUMBER_WORDS[n as usize].to_string()),
        20..=99 => {
            let tens = TENS_WORDS[(n / 10) as usize];
            Some(match n % 10 {
                0 => tens.to_string(),
                ones => format!("{tens}-{}", NUMBER_WORDS[ones as usize]),
            })
        }
        _ => None,
    }
}

fn parse_number(token: &str) -> Option<u32> {
    if !token.is_empty() && token.bytes().all(|b| b.is_ascii_digit()) {
        return token.parse().ok();
    }
    if let Some(i) = NUMBER_WORDS.iter().position(|w| *w == token) {
        return (i > 0).then_some(i as u32);
    }
    let (tens, ones) = match token.split_once('-') {
        Some((t, o)) => (t, Some(o)),
        None => (token, None),
    };
    let t = TENS_WORDS.iter().position(|w| !w.is_empty() && *w == tens)? as u32;
    let o = match ones {
        None => 0,
        Some(o) => match NUMBER_WORDS.iter().position(|w| *w == o)? {
            i @ 1..=9 => i as u32,
            _ => return None,
        },
    };
    Some(t * 10 + o)
}

fn parse_month_name(token: &str) -> Option<u32> {
    let t = token.trim_end_matches('.');
    let m = match t {
        "jan" | "january" => 1,
        "feb" | "february" => 2,
        "mar" | "march" => 3,
        "apr" | "april" => 4,
        "may" => 5,
        "jun" | "june" => 6,
        "jul" | "july" => 7,
        "aug" | "august" => 8,
        "sep" | "sept" | "september" => 9,
        "oct" | "october" => 10,
        "nov" | "november" => 11,
        "dec" | "december" => 12,
        _ => return None,
    };
    Some(m)
}

fn all_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Day of month, optionally with an ordinal suffix ("9th", "21st").
fn parse_day_token(token: &str) -> Option<u32> {
    let digits = token.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    let suffix = &token[digits.len()..];
    if !all_digits(digits) || digits.len() > 2 {
        return None;
    }
    let d: u32 = digits.parse().ok()?;
    let expected = match (d % 10, d % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    (suffix.is_empty() || suffix == expected).then_some(d)
}

fn parse_year_token(token: &str) -> Option<i32> {
    if all_digits(token) && token.len() == 4 {
        return token.parse().ok();
    }
    let rest = token.strip_prefix('\'').or_else(|| token.strip_prefix('\u{2019}'))?;
    (all_digits(rest) && rest.len() == 2).then(|| resolve_two_digit_year(rest.parse().unwrap()))
}

/// Numeric forms such as `9/12/93`, `10-12-2014` or `9/93`.
fn parse_numeric_date(token: &str) -> Option<(i32, u32, Option<u32>)> {
    let sep = if token.contains('/') { '/' } else { '-' };
    let parts: Vec<&str> = token.split(sep).collect();
    if parts.iter().any(|p| !all_digits(p)) {
        return None;
    }
    let year_of = |p: &str| -> Option<i32> {
        match p.len() {
            2 => Some(resolve_two_digit_year(p.parse().ok()?)),
            4 => p.parse().ok(),
            _ => None,
        }
    };
    match parts.as_slice() {
        [m, y] if m.len() <= 2 => Some((year_of(y)?, m.parse().ok()?, None)),
        [m, d, y] if m.len() <= 2 && d.len() <= 2 => {
            Some((year_of(y)?, m.parse().ok()?, Some(d.parse().ok()?)))
        }
        _ => None,
    }
}

fn explicit_interval(
    surface: &str,
    year: i32,
    month: Option<u32>,
    day: Option<u32>,
) -> Result<TimeInterval, NormalizeError> {
    let unparseable = || NormalizeError::Unparseable(surface.to_string());
    if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
        return Err(NormalizeError::OutOfRange(surface.to_string()));
    }
    match (month, day) {
        (None, _) => Ok(TimeInterval::year(year)),
        (Some(m), None) if (1..=12).contains(&m) => Ok(TimeInterval::month(year, m)),
        (Some(m), Some(d)) => Date::new(year, m, d).map(TimeInterval::day).ok_or_else(unparseable),
        _ => Err(unparseable()),
    }
}

/// Resolves a surface string from the template language to a day interval.
///
/// Explicit dates expand to their calendar granularity. Relative forms are
/// resolved against `anchor`: "ago"/"before" subtract, "later"/"after" add,
/// "now" is the anchor itself, and "past N units" covers
/// `[anchor - N units, anchor]`.
pub fn parse_timex(surface: &str, anchor: ReferenceAnchor) -> Result<TimeInterval, NormalizeError> {
    let unparseable = || NormalizeError::Unparseable(surface.to_string());
    let lowered = surface.trim().to_lowercase().replace(',', " ");
    let tokens: Vec<&str> = lowered.split_whitespace().collect();

    let relative = |n: u32, unit: TimeUnit, sign: i32| -> Result<Date, NormalizeError> {
        let date = unit.shift(anchor.date(), sign * n as i32);
        if date.in_supported_range() {
            Ok(date)
        } else {
            Err(NormalizeError::OutOfRange(surface.to_string()))
        }
    };

    let interval = match tokens.as_slice() {
        [] => return Err(unparseable()),
        ["now"] => TimeInterval::point(anchor.anchor_day),
        ["past", n, unit] | ["the", "past", n, unit] => {
            let n = parse_number(n).filter(|&n| n > 0).ok_or_else(unparseable)?;
            let unit = TimeUnit::parse(unit).ok_or_else(unparseable)?;
            let start = relative(n, unit, -1)?;
            TimeInterval::span(start.to_days(), anchor.anchor_day)
        }
        [n, unit, direction] if TimeUnit::parse(unit).is_some() => {
            let n = parse_number(n).filter(|&n| n > 0).ok_or_else(unparseable)?;
            let unit = TimeUnit::parse(unit).unwrap();
            let sign = match *direction {
                "ago" | "before" | "earlier" => -1,
                "later" | "after" => 1,
                _ => return Err(unparseable()),
            };
            TimeInterval::point(relative(n, unit, sign)?.to_days())
        }
        [single] => {
            if let Some(year) = parse_year_token(single) {
                explicit_interval(surface, year, None, None)?
            } else if all_digits(single) {
                // wrong-width bare numbers are not years in this grammar
                return Err(unparseable());
            } else {
                let (y, m, d) = parse_numeric_date(single).ok_or_else(unparseable)?;
                explicit_interval(surface, y, Some(m), d)?
            }
        }
        [month, year] => {
            let m = parse_month_name(month).ok_or_else(unparseable)?;
            let y = parse_year_token(year).ok_or_else(unparseable)?;
            explicit_interval(surface, y, Some(m), None)?
        }
        [a, b, year] => {
            let y = parse_year_token(year).ok_or_else(unparseable)?;
            let (m, d) = match (parse_month_name(a), parse_month_name(b)) {
                (Some(m), None) => (m, parse_day_token(b).ok_or_else(unparseable)?),
                (None, Some(m)) => (m, parse_day_token(a).ok_or_else(unparseable)?),
                _ => return Err(unparseable()),
            };
            explicit_interval(surface, y, Some(m), Some(d))?
        }
        _ => return Err(unparseable()),
    };
    debug_assert!(interval.start_day <= interval.end_day);
    if !interval.in_supported_range() {
        return Err(NormalizeError::OutOfRange(surface.to_string()));
    }
    Ok(interval)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anchor(y: i32, m: u32, d: u32) -> ReferenceAnchor {
        ReferenceAnchor::from_date(Date::new(y, m, d).unwrap()).unwrap()
    }

    fn days(y: i32, m: u32, d: u32) -> i32 {
        Date::new(y, m, d).unwrap().to_days()
    }

    #[test]
    fn whole_year() {
        let iv = parse_timex("1992", ReferenceAnchor::default()).unwrap();
        assert_eq!((iv.start_day, iv.end_day), (days(1992, 1, 1), days(1992, 12, 31)));
        assert_eq!(iv.granularity, Granularity::Year);
    }

    #[test]
    fn whole_month() {
        let iv = parse_timex("August 2013", ReferenceAnchor::default()).unwrap();
        assert_eq!((iv.start_day, iv.end_day), (days(2013, 8, 1), days(2013, 8, 31)));
        assert_eq!(iv.granularity, Granularity::Month);
    }

    #[test]
    fn two_months_ago() {
        let iv = parse_timex("two months ago", anchor(1998, 6, 15)).unwrap();
        assert_eq!(iv, TimeInterval::point(days(1998, 4, 15)));
    }

    #[test]
    fn explicit_forms() {
        let a = ReferenceAnchor::default();
        let day = |s| parse_timex(s, a).unwrap();
        assert_eq!(day("Sept. 12, 1993"), TimeInterval::day(Date::new(1993, 9, 12).unwrap()));
        assert_eq!(day("September 12th 1993"), day("Sept. 12, 1993"));
        assert_eq!(day("12th September 1993"), day("Sept. 12, 1993"));
        assert_eq!(day("9/12/93"), day("Sept. 12, 1993"));
        assert_eq!(day("10-12-2014"), TimeInterval::day(Date::new(2014, 10, 12).unwrap()));
        assert_eq!(day("9th January 1998"), TimeInterval::day(Date::new(1998, 1, 9).unwrap()));
        assert_eq!(day("9/93"), TimeInterval::month(1993, 9));
        assert_eq!(day("'63"), TimeInterval::year(1963));
        assert_eq!(day("'05"), TimeInterval::year(2005));
    }

    #[test]
    fn relative_forms() {
        let a = anchor(1998, 6, 15);
        let p = |s| parse_timex(s, a).unwrap();
        assert_eq!(p("now"), TimeInterval::point(a.anchor_day));
        assert_eq!(p("5 weeks ago"), TimeInterval::point(a.anchor_day - 35));
        assert_eq!(p("3 days later"), TimeInterval::point(a.anchor_day + 3));
        assert_eq!(p("1 year before"), TimeInterval::point(days(1997, 6, 15)));
        assert_eq!(p("twenty-one days later"), TimeInterval::point(a.anchor_day + 21));
        assert_eq!(p("past 2 weeks"), TimeInterval::span(a.anchor_day - 14, a.anchor_day));
    }

    #[test]
    fn errors() {
        let a = ReferenceAnchor::default();
        assert!(matches!(parse_timex("", a), Err(NormalizeError::Unparseable(_))));
        assert!(matches!(parse_timex("yesterday", a), Err(NormalizeError::Unparseable(_))));
        assert!(matches!(parse_timex("Feb. 30, 1993", a), Err(NormalizeError::Unparseable(_))));
        assert!(matches!(parse_timex("1850", a), Err(NormalizeError::OutOfRange(_))));
        assert!(matches!(parse_timex("99 years later", a), Err(NormalizeError::OutOfRange(_))));
        assert!(matches!(parse_timex("123", a), Err(NormalizeError::Unparseable(_))));
        assert!(matches!(parse_timex("9th Sept", a), Err(NormalizeError::Unparseable(_))));
        assert!(matches!(parse_timex("Sept. 12nd 1993", a), Err(NormalizeError::Unparseable(_))));
    }

    #[test]
    fn compare_cases() {
        let y1992 = TimeInterval::year(1992);
        let y1963 = TimeInterval::year(1963);
        assert_eq!(compare(&y1992, &y1963), Relation::After);
        assert_eq!(compare(&y1963, &y1992), Relation::Before);
        assert_eq!(compare(&y1992, &y1992), Relation::Simultaneous);
        assert_eq!(compare(&TimeInterval::month(2013, 8), &TimeInterval::year(2013)), Relation::Ambiguous);
    }

    #[test]
    fn pivot() {
        assert_eq!(resolve_two_digit_year(63), 1963);
        assert_eq!(resolve_two_digit_year(5), 2005);
        assert_eq!(resolve_two_digit_year(49), 2049);
        assert_eq!(resolve_two_digit_year(50), 1950);
    }

    #[test]
    fn number_words_round_trip() {
        for n in 1..=99 {
            let w = number_to_words(n).unwrap();
            assert_eq!(parse_number(&w), Some(n), "{w}");
        }
        assert_eq!(parse_number("zero"), None);
        assert_eq!(parse_number("twenty-ten"), None);
    }
}
