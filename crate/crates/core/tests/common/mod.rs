//! Shared test support. The root is a brute-force calendar oracle over
//! `(year, month, day)` tuples.
//!
//! Deliberately shares nothing with the library's calendar: dates are plain
//! tuples, days are stepped one at a time, and intervals are compared
//! lexicographically.

#![allow(dead_code)]

use tempo_core::grammar::{SlotValue, TimexSample};
use tempo_core::Relation;

pub type Ymd = (i32, u32, u32);

pub const ANCHOR: Ymd = (1998, 6, 15);

pub fn leap(y: i32) -> bool {
    (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
}

pub fn month_len(y: i32, m: u32) -> u32 {
    const LEN: [u32; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
    if m == 2 && leap(y) { 29 } else { LEN[m as usize - 1] }
}

pub fn next_day((y, m, d): Ymd) -> Ymd {
    if d < month_len(y, m) {
        (y, m, d + 1)
    } else if m < 12 {
        (y, m + 1, 1)
    } else {
        (y + 1, 1, 1)
    }
}

pub fn prev_day((y, m, d): Ymd) -> Ymd {
    if d > 1 {
        (y, m, d - 1)
    } else if m > 1 {
        (y, m - 1, month_len(y, m - 1))
    } else {
        (y - 1, 12, 31)
    }
}

pub fn step_days(mut t: Ymd, n: i64) -> Ymd {
    for _ in 0..n.abs() {
        t = if n > 0 { next_day(t) } else { prev_day(t) };
    }
    t
}

pub fn step_months((y, m, d): Ymd, n: i64) -> Ymd {
    let total = y as i64 * 12 + (m as i64 - 1) + n;
    let (ny, nm) = (total.div_euclid(12) as i32, total.rem_euclid(12) as u32 + 1);
    (ny, nm, d.min(month_len(ny, nm)))
}

pub fn shift(t: Ymd, unit: &str, n: i64) -> Ymd {
    match unit {
        "days" => step_days(t, n),
        "weeks" => step_days(t, 7 * n),
        "months" => step_months(t, n),
        "years" => step_months(t, 12 * n),
        other => panic!("unknown unit {other}"),
    }
}

fn int(s: &TimexSample, k: &str) -> Option<i64> {
    match s.slots.get(k)? {
        SlotValue::Int(v) => Some(*v),
        SlotValue::Sym(_) => None,
    }
}

fn sym<'a>(s: &'a TimexSample, k: &str) -> Option<&'a str> {
    match s.slots.get(k)? {
        SlotValue::Sym(v) => Some(v),
        SlotValue::Int(_) => None,
    }
}

/// Inclusive tuple bounds of a generated sample, computed from its slots.
pub fn bounds(s: &TimexSample, anchor: Ymd) -> (Ymd, Ymd) {
    let id = s.template_id.as_str();
    let sign = if id.ends_with("later") { 1 } else { -1 };
    if id == "now" {
        return (anchor, anchor);
    }
    if id.starts_with("xx") || id.starts_with("past") {
        let n = int(s, "xx").unwrap();
        let moved = shift(anchor, sym(s, "units").unwrap(), sign * n);
        return if id.starts_with("past") { (moved, anchor) } else { (moved, moved) };
    }
    let year = match (int(s, "yyyy"), int(s, "yy")) {
        (Some(y), _) => y as i32,
        (None, Some(yy)) if yy < 50 => 2000 + yy as i32,
        (None, Some(yy)) => 1900 + yy as i32,
        _ => panic!("no year in {id}"),
    };
    let month = int(s, "mmm").or_else(|| int(s, "mm")).map(|m| m as u32);
    match (month, int(s, "dd")) {
        (None, _) => ((year, 1, 1), (year, 12, 31)),
        (Some(m), None) => ((year, m, 1), (year, m, month_len(year, m))),
        (Some(m), Some(d)) => ((year, m, d as u32), (year, m, d as u32)),
    }
}

pub fn compare_bounds(a: (Ymd, Ymd), b: (Ymd, Ymd)) -> Relation {
    if a == b {
        Relation::Simultaneous
    } else if a.1 < b.0 {
        Relation::Before
    } else if a.0 > b.1 {
        Relation::After
    } else {
        Relation::Ambiguous
    }
}

pub fn oracle_relation(a: &TimexSample, b: &TimexSample, anchor: Ymd) -> Relation {
    compare_bounds(bounds(a, anchor), bounds(b, anchor))
}

/// Every date from 1900-01-01 through 2049-12-31, built by stepping one day at a time.
pub fn day_table() -> &'static [Ymd] {
    static TABLE: std::sync::OnceLock<Vec<Ymd>> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = vec![(1900, 1, 1)];
        while *out.last().unwrap() != (2049, 12, 31) {
            out.push(next_day(*out.last().unwrap()));
        }
        out
    })
}

/// Tuple of a day offset from 1900-01-01.
pub fn ymd_of_offset(days: i32) -> Ymd {
    day_table()[usize::try_from(days).expect("offset within the supported range")]
}

pub mod fuzz;
pub mod gradchecks;
