mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempo_core::dataset::generate_timex_pairs;
use tempo_core::grammar::{TimexCategory, TimexGrammar};
use tempo_core::normalize::{Granularity, TimeInterval};
use tempo_core::{compare, parse_timex, Date, ReferenceAnchor, Relation};

use common::{bounds, oracle_relation, ymd_of_offset, ANCHOR};

fn to_ymd(d: Date) -> common::Ymd {
    (d.year, d.month, d.day)
}

#[test]
fn calendar_matches_stepping_oracle_everywhere() {
    for (i, &ymd) in common::day_table().iter().enumerate() {
        let d = Date::from_days(i as i32);
        assert_eq!(to_ymd(d), ymd, "offset {i}");
        assert_eq!(d.to_days(), i as i32);
    }
}

#[test]
fn default_anchor_is_oracle_anchor() {
    assert_eq!(to_ymd(ReferenceAnchor::default().date()), ANCHOR);
}

#[test]
fn generated_labels_and_intervals_match_oracle() {
    let pairs = generate_timex_pairs(20_000, 41, 0.75);
    for p in &pairs {
        assert_eq!(Some(p.label), tempo_core::TimexLabel::from_relation(oracle_relation(&p.t1, &p.t2, ANCHOR)), "{p:?}");
        for t in [&p.t1, &p.t2] {
            let (lo, hi) = bounds(t, ANCHOR);
            assert_eq!((ymd_of_offset(t.interval.start_day), ymd_of_offset(t.interval.end_day)), (lo, hi), "{t:?}");
        }
    }
}

#[test]
fn two_months_ago_matches_oracle() {
    let got = parse_timex("two months ago", ReferenceAnchor::default()).unwrap();
    let want = common::shift(ANCHOR, "months", -2);
    assert_eq!(want, (1998, 4, 15));
    assert_eq!(ymd_of_offset(got.start_day), want);
    assert_eq!(got.start_day, got.end_day);
}

fn grammar() -> TimexGrammar {
    TimexGrammar::default()
}

fn category(explicit: bool) -> TimexCategory {
    if explicit { TimexCategory::ExplicitDatetime } else { TimexCategory::NaturalLanguage }
}

fn interval_strategy() -> impl Strategy<Value = TimeInterval> {
    (0i32..54_000, 0i32..400, 0usize..3).prop_map(|(s, len, k)| {
        let g = [Granularity::Day, Granularity::Month, Granularity::Year][k];
        let len = if g == Granularity::Day { 0 } else { len };
        TimeInterval { start_day: s, end_day: s + len, granularity: g }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn render_round_trip_and_parse_agree(seed in any::<u64>(), explicit in any::<bool>()) {
        let g = grammar();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = g.sample_timex(&mut rng, category(explicit));
        prop_assert_eq!(&g.render(&s.template_id, &s.slots).unwrap(), &s.surface);
        prop_assert_eq!(parse_timex(&s.surface, g.anchor()).unwrap(), s.interval);
        prop_assert_eq!(g.template(&s.template_id).unwrap().category, category(explicit));
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>()) {
        let g = grammar();
        let a = g.sample_pair(&mut ChaCha8Rng::seed_from_u64(seed), 0.75);
        let b = g.sample_pair(&mut ChaCha8Rng::seed_from_u64(seed), 0.75);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn pairs_are_never_ambiguous(seed in any::<u64>(), frac in 0.0f64..=1.0) {
        let p = grammar().sample_pair(&mut ChaCha8Rng::seed_from_u64(seed), frac);
        prop_assert_ne!(compare(&p.t1.interval, &p.t2.interval), Relation::Ambiguous);
        prop_assert_eq!(p.t1.interval.granularity == Granularity::Point || p.t1.interval.granularity == Granularity::Span,
            p.t2.interval.granularity == Granularity::Point || p.t2.interval.granularity == Granularity::Span);
    }

    #[test]
    fn compare_is_antisymmetric(a in interval_strategy(), b in interval_strategy()) {
        let ab = compare(&a, &b);
        let ba = compare(&b, &a);
        prop_assert_eq!(ab == Relation::Before, ba == Relation::After);
        prop_assert_eq!(ab == Relation::Simultaneous, ba == Relation::Simultaneous);
        prop_assert_eq!(compare(&a, &a), Relation::Simultaneous);
    }

    #[test]
    fn before_is_transitive_on_samples(seed in any::<u64>()) {
        let g = grammar();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<_> = (0..3).map(|_| g.sample_timex(&mut rng, TimexCategory::ExplicitDatetime).interval).collect();
        if compare(&xs[0], &xs[1]) == Relation::Before && compare(&xs[1], &xs[2]) == Relation::Before {
            prop_assert_eq!(compare(&xs[0], &xs[2]), Relation::Before);
        }
    }

    #[test]
    fn anchor_shift_covariance(seed in any::<u64>(), explicit in any::<bool>(), d in -3000i32..3000) {
        let g = grammar();
        let s = g.sample_timex(&mut ChaCha8Rng::seed_from_u64(seed), category(explicit));
        let shifted = g.anchor().shifted(d).unwrap();
        let moved_anchor = common::step_days(ANCHOR, d as i64);
        match parse_timex(&s.surface, shifted) {
            Ok(iv) if explicit => prop_assert_eq!(iv, s.interval),
            Ok(iv) => {
                let (lo, hi) = bounds(&s, moved_anchor);
                prop_assert_eq!((ymd_of_offset(iv.start_day), ymd_of_offset(iv.end_day)), (lo, hi));
                let unit = s.slots.get("units").map(|u| u.to_string());
                if matches!(unit.as_deref(), None | Some("days") | Some("weeks")) {
                    prop_assert_eq!(iv.start_day, s.interval.start_day + d);
                    prop_assert_eq!(iv.end_day, s.interval.end_day + d);
                }
            }
            Err(_) => prop_assert!(!explicit),
        }
    }
}
