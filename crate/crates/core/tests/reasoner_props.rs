//! Properties of rule materialization and the `@lte_dates` builtin.

mod common;

use chrono::{Datelike, Duration, NaiveDate};
use proptest::prelude::*;

use qaplan::asp::{Atom, FactSet};
use qaplan::pipeline::{Pipeline, BUNDLED_RULES};
use qaplan::reasoner::{lte_dates, materialize, materialize_naive, parse_date, parse_rules, BuiltinRegistry};

fn fmt(d: NaiveDate) -> String {
    format!("{:02}/{:02}/{:04}", d.month(), d.day(), d.year())
}

#[test]
fn materialization_properties() {
    let builtins = BuiltinRegistry::default();
    let rules = parse_rules(BUNDLED_RULES).unwrap();
    let mut reversed = rules.clone();
    reversed.reverse();
    let sets = common::fact_sets(1000);
    for (i, facts) in sets.iter().enumerate() {
        let m = materialize(facts, &rules, &builtins).unwrap();
        // inflationary and idempotent
        assert!(m.is_superset(facts));
        assert_eq!(materialize(&m, &rules, &builtins).unwrap(), m, "{facts}");
        // independent of rule order and evaluation strategy
        assert_eq!(materialize(facts, &reversed, &builtins).unwrap(), m);
        assert_eq!(materialize_naive(facts, &rules, &builtins).unwrap(), m);
        // monotone: dropping every other atom cannot add consequences
        let subset: FactSet = facts.iter().step_by(2).cloned().collect();
        assert!(m.is_superset(&materialize(&subset, &rules, &builtins).unwrap()), "{facts}");
        // and the union with another set keeps everything
        let other = &sets[(i + 1) % sets.len()];
        let union: FactSet = facts.iter().chain(other.iter()).cloned().collect::<Vec<Atom>>().into_iter().collect();
        assert!(materialize(&union, &rules, &builtins).unwrap().is_superset(&m));
    }
}

#[test]
fn materialization_agrees_with_pipeline() {
    let p = Pipeline::bundled();
    let builtins = BuiltinRegistry::default();
    let rules = parse_rules(BUNDLED_RULES).unwrap();
    for facts in common::fact_sets(50) {
        assert_eq!(p.materialize(&facts).unwrap(), materialize(&facts, &rules, &builtins).unwrap());
    }
}

#[test]
fn date_validity_is_exhaustively_correct() {
    for year in 1900..=2100 {
        for month in 1..=12u32 {
            for day in 1..=31u32 {
                let text = format!("{month:02}/{day:02}/{year:04}");
                let valid = NaiveDate::from_ymd_opt(year, month, day).is_some();
                assert_eq!(parse_date(&text).is_ok(), valid, "{text}");
            }
        }
    }
}

/// Day by day, each date is strictly before the next; with reflexivity this
/// fixes the order of every pair in the range.
#[test]
fn lte_dates_matches_day_count() {
    let start = NaiveDate::from_ymd_opt(1900, 1, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(2100, 12, 31).unwrap();
    let mut d = start;
    let mut prev: Option<String> = None;
    while d <= end {
        let s = fmt(d);
        assert_eq!(lte_dates(&s, &s), Ok(true));
        if let Some(p) = &prev {
            assert_eq!(lte_dates(p, &s), Ok(true), "{p} {s}");
            assert_eq!(lte_dates(&s, p), Ok(false), "{s} {p}");
        }
        prev = Some(s);
        d += Duration::days(1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20_000))]

    #[test]
    fn lte_dates_random_pairs(a in 0i64..73_413, b in 0i64..73_413) {
        let start = NaiveDate::from_ymd_opt(1900, 1, 1).unwrap();
        let (da, db) = (start + Duration::days(a), start + Duration::days(b));
        prop_assert_eq!(lte_dates(&fmt(da), &fmt(db)), Ok(da <= db));
    }
}
