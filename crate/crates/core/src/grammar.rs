//! Template grammar of time expressions and seeded sampling of labeled surfaces.
//!
//! A template is a sequence of literals and typed slots. Sampling picks a
//! template uniformly within a category, fills every slot uniformly from its
//! domain (rejecting impossible calendar dates), renders the surface, and
//! resolves the interval directly from the slot values.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{days_in_month, Date, MAX_YEAR, MIN_YEAR};
use crate::normalize::{
    compare, number_to_words, resolve_two_digit_year, ReferenceAnchor, Relation, TimeInterval,
    TimeUnit, MONTH_FULL, MONTH_SHORT,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("template {template} is missing slot {slot}")]
    MissingSlot { template: String, slot: String },
    #[error("slot {slot} value {value} is outside its domain")]
    OutOfDomain { slot: String, value: String },
    #[error("unknown template id {0:?}")]
    UnknownTemplate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimexCategory {
    ExplicitDatetime,
    NaturalLanguage,
}

/// Three-way gold label of a timex pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimexLabel {
    Before,
    After,
    Simultaneous,
}

impl TimexLabel {
    pub const ALL: [TimexLabel; 3] = [TimexLabel::Before, TimexLabel::After, TimexLabel::Simultaneous];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn from_relation(rel: Relation) -> Option<Self> {
        match rel {
            Relation::Before => Some(TimexLabel::Before),
            Relation::After => Some(TimexLabel::After),
            Relation::Simultaneous => Some(TimexLabel::Simultaneous),
            Relation::Ambiguous => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TimexLabel::Before => "before",
            TimexLabel::After => "after",
            TimexLabel::Simultaneous => "simultaneous",
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            TimexLabel::Before => TimexLabel::After,
            TimexLabel::After => TimexLabel::Before,
            TimexLabel::Simultaneous => TimexLabel::Simultaneous,
        }
    }
}

/// A typed slot in a template pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    /// Four-digit year, slot `yyyy`.
    Year4,
    /// Two-digit year, slot `yy`, rendered zero padded.
    Year2,
    /// Numeric month, slot `mm`.
    MonthNumber,
    /// Month name, slots `mmm` and `mmm_style`.
    MonthName,
    /// Plain numeric day, slot `dd`.
    DayNumber,
    /// Day in prose, slots `dd` and `dd_style` (plain or ordinal).
    DayText,
    /// Optional comma, slot `comma`.
    Comma,
    /// Numeric date separator, slot `sep`.
    Separator,
    /// Magnitude, slots `xx` and `xx_style` (digits or words).
    Magnitude,
    /// Time unit, slot `units`; singular when the magnitude is one.
    Unit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternPart {
    Literal(String),
    Slot(SlotKind),
}

/// Slot values are integers or style symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SlotValue {
    Int(i64),
    Sym(String),
}

impl SlotValue {
    fn sym(s: &str) -> Self {
        SlotValue::Sym(s.to_string())
    }
}

impl std::fmt::Display for SlotValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SlotValue::Int(v) => write!(f, "{v}"),
            SlotValue::Sym(s) => write!(f, "{s}"),
        }
    }
}

pub type Slots = BTreeMap<String, SlotValue>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlotDomain {
    Int { name: String, min: i64, max: i64 },
    Symbol { name: String, values: Vec<String> },
}

impl SlotDomain {
    pub fn name(&self) -> &str {
        match self {
            SlotDomain::Int { name, .. } | SlotDomain::Symbol { name, .. } => name,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            SlotDomain::Int { min, max, .. } => min > max,
            SlotDomain::Symbol { values, .. } => values.is_empty(),
        }
    }

    fn contains(&self, value: &SlotValue) -> bool {
        match (self, value) {
            (SlotDomain::Int { min, max, .. }, SlotValue::Int(v)) => (min..=max).contains(&v),
            (SlotDomain::Symbol { values, .. }, SlotValue::Sym(s)) => values.contains(s),
            _ => false,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SlotValue {
        match self {
            SlotDomain::Int { min, max, .. } => SlotValue::Int(rng.gen_range(*min..=*max)),
            SlotDomain::Symbol { values, .. } => {
                SlotValue::Sym(values[rng.gen_range(0..values.len())].clone())
            }
        }
    }
}

const MAGNITUDE_WORDS_MAX: i64 = 10;

impl SlotKind {
    fn domains(self) -> Vec<SlotDomain> {
        let int = |name: &str, min: i64, max: i64| SlotDomain::Int { name: name.into(), min, max };
        let sym = |name: &str, values: &[&str]| SlotDomain::Symbol {
            name: name.into(),
            values: values.iter().map(|v| v.to_string()).collect(),
        };
        match self {
            SlotKind::Year4 => vec![int("yyyy", MIN_YEAR.into(), MAX_YEAR.into())],
            SlotKind::Year2 => vec![int("yy", 0, 99)],
            SlotKind::MonthNumber => vec![int("mm", 1, 12)],
            SlotKind::MonthName => vec![int("mmm", 1, 12), sym("mmm_style", &["short", "full"])],
            SlotKind::DayNumber => vec![int("dd", 1, 31)],
            SlotKind::DayText => vec![int("dd", 1, 31), sym("dd_style", &["plain", "ordinal"])],
            SlotKind::Comma => vec![sym("comma", &["yes", "no"])],
            SlotKind::Separator => vec![sym("sep", &["slash", "dash"])],
            SlotKind::Magnitude => vec![int("xx", 1, 99), sym("xx_style", &["digits", "words"])],
            SlotKind::Unit => vec![sym("units", &["days", "weeks", "months", "years"])],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimexTemplate {
    pub id: String,
    pub category: TimexCategory,
    pub pattern: Vec<PatternPart>,
    pub slot_domains: Vec<SlotDomain>,
}

/// The resolved meaning of a template, independent of surface styling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Semantics {
    Year,
    Month,
    Day,
    Now,
    Shift(i32),
    Past,
}

impl TimexTemplate {
    fn new(id: &str, category: TimexCategory, pattern: Vec<PatternPart>) -> Self {
        let mut slot_domains: Vec<SlotDomain> = Vec::new();
        for part in &pattern {
            if let PatternPart::Slot(kind) = part {
                for d in kind.domains() {
                    if !slot_domains.iter().any(|e| e.name() == d.name()) {
                        slot_domains.push(d);
                    }
                }
            }
        }
        TimexTemplate { id: id.to_string(), category, pattern, slot_domains }
    }

    fn has_slot(&self, kind: SlotKind) -> bool {
        self.pattern.contains(&PatternPart::Slot(kind))
    }

    fn semantics(&self) -> Semantics {
        match self.id.as_str() {
            "now" => Semantics::Now,
            "past xx units" => Semantics::Past,
            "xx units later" => Semantics::Shift(1),
            "xx units before" | "xx units ago" => Semantics::Shift(-1),
            _ if self.has_slot(SlotKind::DayNumber) || self.has_slot(SlotKind::DayText) => Semantics::Day,
            _ if self.has_slot(SlotKind::MonthNumber) || self.has_slot(SlotKind::MonthName) => Semantics::Month,
            _ => Semantics::Year,
        }
    }

    pub fn slot_names(&self) -> impl Iterator<Item = &str> {
        self.slot_domains.iter().map(SlotDomain::name)
    }

    /// Checks presence and domain of every slot plus calendar validity.
    pub fn validate(&self, slots: &Slots) -> Result<(), GrammarError> {
        for domain in &self.slot_domains {
            let value = slots.get(domain.name()).ok_or_else(|| GrammarError::MissingSlot {
                template: self.id.clone(),
                slot: domain.name().to_string(),
            })?;
            if !domain.contains(value) {
                return Err(out_of_domain(domain.name(), value));
            }
        }
        if let (Some(SlotValue::Int(xx)), Some(SlotValue::Sym(style))) = (slots.get("xx"), slots.get("xx_style")) {
            if style == "words" && *xx > MAGNITUDE_WORDS_MAX {
                return Err(out_of_domain("xx_style", &slots["xx_style"]));
            }
        }
        if let Some(SlotValue::Int(dd)) = slots.get("dd") {
            let (year, month) = self.year_month(slots).expect("validated date slots");
            if *dd as u32 > days_in_month(year, month) {
                return Err(out_of_domain("dd", &slots["dd"]));
            }
        }
        Ok(())
    }

    fn int(slots: &Slots, name: &str) -> Option<i64> {
        match slots.get(name)? {
            SlotValue::Int(v) => Some(*v),
            SlotValue::Sym(_) => None,
        }
    }

    fn sym<'a>(slots: &'a Slots, name: &str) -> Option<&'a str> {
        match slots.get(name)? {
            SlotValue::Sym(s) => Some(s),
            SlotValue::Int(_) => None,
        }
    }

    fn year(&self, slots: &Slots) -> Option<i32> {
        if let Some(y) = Self::int(slots, "yyyy") {
            return Some(y as i32);
        }
        Self::int(slots, "yy").map(|yy| resolve_two_digit_year(yy as u32))
    }

    fn year_month(&self, slots: &Slots) -> Option<(i32, u32)> {
        let month = Self::int(slots, "mm").or_else(|| Self::int(slots, "mmm"))?;
        Some((self.year(slots)?, month as u32))
    }

    fn unit(slots: &Slots) -> Option<TimeUnit> {
        Some(match Self::sym(slots, "units")? {
            "days" => TimeUnit::Day,
            "weeks" => TimeUnit::Week,
            "months" => TimeUnit::Month,
            "years" => TimeUnit::Year,
            _ => return None,
        })
    }

    /// Renders the surface string for `slots`.
    pub fn render(&self, slots: &Slots) -> Result<String, GrammarError> {
        self.validate(slots)?;
        let mut out = String::new();
        for part in &self.pattern {
            match part {
                PatternPart::Literal(s) => out.push_str(s),
                PatternPart::Slot(kind) => self.render_slot(*kind, slots, &mut out),
            }
        }
        Ok(out)
    }

    fn render_slot(&self, kind: SlotKind, slots: &Slots, out: &mut String) {
        let int = |n| Self::int(slots, n).unwrap();
        let sym = |n| Self::sym(slots, n).unwrap();
        match kind {
            SlotKind::Year4 => out.push_str(&int("yyyy").to_string()),
            SlotKind::Year2 => out.push_str(&format!("{:02}", int("yy"))),
            SlotKind::MonthNumber => out.push_str(&int("mm").to_string()),
            SlotKind::MonthName => {
                let table = if sym("mmm_style") == "short" { &MONTH_SHORT } else { &MONTH_FULL };
                out.push_str(table[int("mmm") as usize - 1]);
            }
            SlotKind::DayNumber => out.push_str(&int("dd").to_string()),
            SlotKind::DayText => {
                let dd = int("dd");
                out.push_str(&dd.to_string());
                if sym("dd_style") == "ordinal" {
                    out.push_str(ordinal_suffix(dd as u32));
                }
            }
            SlotKind::Comma => {
                if sym("comma") == "yes" {
                    out.push(',');
                }
            }
            SlotKind::Separator => out.push(if sym("sep") == "slash" { '/' } else { '-' }),
            SlotKind::Magnitude => {
                let xx = int("xx") as u32;
                if sym("xx_style") == "words" {
                    out.push_str(&number_to_words(xx).unwrap());
                } else {
                    out.push_str(&xx.to_string());
                }
            }
            SlotKind::Unit => {
                let unit = Self::unit(slots).unwrap();
                let one = Self::int(slots, "xx") == Some(1);
                out.push_str(if one { unit.singular() } else { unit.plural() });
            }
        }
    }

    /// Resolves the slots to an interval by direct calendar arithmetic.
    /// Returns `None` when a relative shift leaves the supported year range.
    pub fn interpret(&self, slots: &Slots, anchor: ReferenceAnchor) -> Result<Option<TimeInterval>, GrammarError> {
        self.validate(slots)?;
        let shifted = |sign: i32| -> Option<Date> {
            let unit = Self::unit(slots)?;
            let xx = Self::int(slots, "xx")? as i32;
            Some(unit.shift(anchor.date(), sign * xx)).filter(|d| d.in_supported_range())
        };
        let interval = match self.semantics() {
            Semantics::Year => TimeInterval::year(self.year(slots).unwrap()),
            Semantics::Month => {
                let (y, m) = self.year_month(slots).unwrap();
                TimeInterval::month(y, m)
            }
            Semantics::Day => {
                let (y, m) = self.year_month(slots).unwrap();
                let d = Self::int(slots, "dd").unwrap() as u32;
                TimeInterval::day(Date::new(y, m, d).unwrap())
            }
            Semantics::Now => TimeInterval::point(anchor.anchor_day),
            Semantics::Shift(sign) => match shifted(sign) {
                Some(d) => TimeInterval::point(d.to_days()),
                None => return Ok(None),
            },
            Semantics::Past => match shifted(-1) {
                Some(d) => TimeInterval::span(d.to_days(), anchor.anchor_day),
                None => return Ok(None),
            },
        };
        let in_range = interval.start_date().in_supported_range() && interval.end_date().in_supported_range();
        Ok(in_range.then_some(interval))
    }

    fn sample_slots<R: Rng + ?Sized>(&self, rng: &mut R) -> Slots {
        loop {
            let mut slots = Slots::new();
            for domain in &self.slot_domains {
                slots.insert(domain.name().to_string(), domain.sample(rng));
            }
            // digit style is the only option above ten
            if let Some(SlotValue::Int(xx)) = slots.get("xx") {
                if *xx > MAGNITUDE_WORDS_MAX {
                    slots.insert("xx_style".into(), SlotValue::sym("digits"));
                }
            }
            if self.validate(&slots).is_ok() {
                return slots;
            }
        }
    }
}

fn out_of_domain(slot: &str, value: &SlotValue) -> GrammarError {
    GrammarError::OutOfDomain { slot: slot.to_string(), value: value.to_string() }
}

pub fn ordinal_suffix(day: u32) -> &'static str {
    match (day % 10, day % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    }
}

/// The built-in template set, in stable order.
pub fn list_templates() -> Vec<TimexTemplate> {
    use PatternPart::{Literal, Slot};
    use SlotKind::*;
    use TimexCategory::{ExplicitDatetime as E, NaturalLanguage as N};
    let lit = |s: &str| Literal(s.to_string());
    vec![
        TimexTemplate::new("yyyy", E, vec![Slot(Year4)]),
        TimexTemplate::new("'yy", E, vec![lit("'"), Slot(Year2)]),
        TimexTemplate::new("mm dd yy", E, vec![Slot(MonthNumber), Slot(Separator), Slot(DayNumber), Slot(Separator), Slot(Year2)]),
        TimexTemplate::new("mm yy", E, vec![Slot(MonthNumber), Slot(Separator), Slot(Year2)]),
        TimexTemplate::new("mmm yyyy", E, vec![Slot(MonthName), lit(" "), Slot(Year4)]),
        TimexTemplate::new("mmm dd yyyy", E, vec![Slot(MonthName), lit(" "), Slot(DayText), Slot(Comma), lit(" "), Slot(Year4)]),
        TimexTemplate::new("dd mmm yyyy", E, vec![Slot(DayText), lit(" "), Slot(MonthName), lit(" "), Slot(Year4)]),
        TimexTemplate::new("mm dd yyyy", E, vec![Slot(MonthNumber), Slot(Separator), Slot(DayNumber), Slot(Separator), Slot(Year4)]),
        TimexTemplate::new("xx units later", N, vec![Slot(Magnitude), lit(" "), Slot(Unit), lit(" later")]),
        TimexTemplate::new("xx units before", N, vec![Slot(Magnitude), lit(" "), Slot(Unit), lit(" before")]),
        TimexTemplate::new("xx units ago", N, vec![Slot(Magnitude), lit(" "), Slot(Unit), lit(" ago")]),
        TimexTemplate::new("now", N, vec![lit("now")]),
        TimexTemplate::new("past xx units", N, vec![lit("past "), Slot(Magnitude), lit(" "), Slot(Unit)]),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimexSample {
    pub surface: String,
    pub template_id: String,
    pub slots: Slots,
    pub interval: TimeInterval,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimexPairExample {
    pub t1: TimexSample,
    pub t2: TimexSample,
    pub label: TimexLabel,
}

/// Template set plus the anchor that relative samples resolve against.
#[derive(Debug, Clone)]
pub struct TimexGrammar {
    templates: Vec<TimexTemplate>,
    anchor: ReferenceAnchor,
}

impl Default for TimexGrammar {
    fn default() -> Self {
        TimexGrammar::new(ReferenceAnchor::default())
    }
}

impl TimexGrammar {
    pub fn new(anchor: ReferenceAnchor) -> Self {
        TimexGrammar { templates: list_templates(), anchor }
    }

    pub fn anchor(&self) -> ReferenceAnchor {
        self.anchor
    }

    pub fn templates(&self) -> &[TimexTemplate] {
        &self.templates
    }

    pub fn template(&self, id: &str) -> Result<&TimexTemplate, GrammarError> {
        self.templates
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| GrammarError::UnknownTemplate(id.to_string()))
    }

    pub fn render(&self, template_id: &str, slots: &Slots) -> Result<String, GrammarError> {
        self.template(template_id)?.render(slots)
    }

    pub fn sample_timex<R: Rng + ?Sized>(&self, rng: &mut R, category: TimexCategory) -> TimexSample {
        let candidates: Vec<&TimexTemplate> =
            self.templates.iter().filter(|t| t.category == category).collect();
        loop {
            let template = candidates[rng.gen_range(0..candidates.len())];
            let slots = template.sample_slots(rng);
            let Some(interval) = template.interpret(&slots, self.anchor).expect("sampled slots are valid") else {
                continue;
            };
            let surface = template.render(&slots).expect("sampled slots are valid");
            return TimexSample { surface, template_id: template.id.clone(), slots, interval };
        }
    }

    /// Draws a same-category pair, resampling until the intervals are orderable.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R, explicit_fraction: f64) -> TimexPairExample {
        assert!((0.0..=1.0).contains(&explicit_fraction), "explicit_fraction must be a probability");
        let category = if rng.gen_bool(explicit_fraction) {
            TimexCategory::ExplicitDatetime
        } else {
            TimexCategory::NaturalLanguage
        };
        loop {
            let t1 = self.sample_timex(rng, category);
            let t2 = self.sample_timex(rng, category);
            if let Some(label) = TimexLabel::from_relation(compare(&t1.interval, &t2.interval)) {
                return TimexPairExample { t1, t2, label };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::parse_timex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn slots(pairs: &[(&str, SlotValue)]) -> Slots {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn builtin_set_covers_required_templates() {
        let ids: Vec<String> = list_templates().into_iter().map(|t| t.id).collect();
        for required in [
            "yyyy", "'yy", "mm dd yy", "mm yy", "mmm yyyy", "mmm dd yyyy", "xx units later",
            "xx units before", "now", "past xx units",
        ] {
            assert!(ids.iter().any(|i| i == required), "missing {required}");
        }
        assert!(ids.len() >= 10);
        for t in list_templates() {
            for part in &t.pattern {
                if let PatternPart::Slot(kind) = part {
                    for d in kind.domains() {
                        let dom = t.slot_domains.iter().find(|x| x.name() == d.name()).unwrap();
                        assert!(!dom.is_empty());
                    }
                }
            }
        }
    }

    #[test]
    fn render_examples() {
        let g = TimexGrammar::default();
        let s = slots(&[
            ("mmm", SlotValue::Int(9)),
            ("mmm_style", SlotValue::sym("short")),
            ("dd", SlotValue::Int(12)),
            ("dd_style", SlotValue::sym("plain")),
            ("comma", SlotValue::sym("yes")),
            ("yyyy", SlotValue::Int(1993)),
        ]);
        assert_eq!(g.render("mmm dd yyyy", &s).unwrap(), "Sept. 12, 1993");
        assert_eq!(g.render("yyyy", &slots(&[("yyyy", SlotValue::Int(1998))])).unwrap(), "1998");
        let ago = slots(&[
            ("xx", SlotValue::Int(5)),
            ("xx_style", SlotValue::sym("digits")),
            ("units", SlotValue::sym("weeks")),
        ]);
        assert_eq!(g.render("xx units ago", &ago).unwrap(), "5 weeks ago");
    }

    #[test]
    fn render_errors() {
        let g = TimexGrammar::default();
        assert!(matches!(g.render("yyyy", &Slots::new()), Err(GrammarError::MissingSlot { .. })));
        assert!(matches!(
            g.render("yyyy", &slots(&[("yyyy", SlotValue::Int(1850))])),
            Err(GrammarError::OutOfDomain { .. })
        ));
        let feb30 = slots(&[
            ("mm", SlotValue::Int(2)),
            ("dd", SlotValue::Int(30)),
            ("sep", SlotValue::sym("slash")),
            ("yyyy", SlotValue::Int(1993)),
        ]);
        assert!(matches!(g.render("mm dd yyyy", &feb30), Err(GrammarError::OutOfDomain { .. })));
        let words = slots(&[
            ("xx", SlotValue::Int(40)),
            ("xx_style", SlotValue::sym("words")),
            ("units", SlotValue::sym("days")),
        ]);
        assert!(matches!(g.render("xx units ago", &words), Err(GrammarError::OutOfDomain { .. })));
    }

    #[test]
    fn sampling_is_deterministic_and_parseable() {
        let g = TimexGrammar::default();
        let a = g.sample_timex(&mut ChaCha8Rng::seed_from_u64(7), TimexCategory::ExplicitDatetime);
        let b = g.sample_timex(&mut ChaCha8Rng::seed_from_u64(7), TimexCategory::ExplicitDatetime);
        assert_eq!(a, b);
        assert_eq!(parse_timex(&a.surface, g.anchor()).unwrap(), a.interval);
    }

    #[test]
    fn natural_language_samples_stay_in_category() {
        let g = TimexGrammar::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let s = g.sample_timex(&mut rng, TimexCategory::NaturalLanguage);
            assert_eq!(g.template(&s.template_id).unwrap().category, TimexCategory::NaturalLanguage);
        }
    }

    #[test]
    fn explicit_pairs_only_when_fraction_is_one() {
        let g = TimexGrammar::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let p = g.sample_pair(&mut rng, 1.0);
            for t in [&p.t1, &p.t2] {
                assert_eq!(g.template(&t.template_id).unwrap().category, TimexCategory::ExplicitDatetime);
            }
            assert_ne!(compare(&p.t1.interval, &p.t2.interval), Relation::Ambiguous);
        }
    }

    #[test]
    fn year_pair_label() {
        let g = TimexGrammar::default();
        let y = |v| {
            let s = slots(&[("yyyy", SlotValue::Int(v))]);
            g.template("yyyy").unwrap().interpret(&s, g.anchor()).unwrap().unwrap()
        };
        assert_eq!(TimexLabel::from_relation(compare(&y(1992), &y(1963))), Some(TimexLabel::After));
    }
}
