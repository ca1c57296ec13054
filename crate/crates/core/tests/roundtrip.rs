//! Render ↔ parse round trips for facts and task PDDL.

mod common;

use common::{atom, task};
use proptest::collection::vec;
use proptest::prelude::*;

use qaplan::asp::{parse_facts, render_facts, FactSet};
use qaplan::pddl::{parse_task, render_task};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn facts_round_trip(atoms in vec(atom(), 0..10)) {
        let facts: FactSet = atoms.into_iter().collect();
        let text = render_facts(&facts);
        let parsed = parse_facts(&text).unwrap();
        prop_assert_eq!(&parsed, &facts);
        prop_assert_eq!(render_facts(&parsed), text);
    }

    #[test]
    fn rendering_ignores_insertion_order(mut atoms in vec(atom(), 0..10)) {
        let a: FactSet = atoms.iter().cloned().collect();
        atoms.reverse();
        let b: FactSet = atoms.into_iter().collect();
        prop_assert_eq!(render_facts(&a), render_facts(&b));
    }

    #[test]
    fn task_round_trip(t in task()) {
        let text = render_task(&t);
        let parsed = parse_task(&text).unwrap();
        prop_assert_eq!(&parsed, &t);
        prop_assert_eq!(render_task(&parsed), text);
    }
}
