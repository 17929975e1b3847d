mod common;

use common::inertia::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn narrative_has_one_model_matching_simulation((h, records) in arb_narrative()) {
        one_model_matching_simulation(h, &records)?;
    }

    #[test]
    fn fluents_persist_without_events((h, records) in arb_narrative()) {
        persistence_without_events(h, &records)?;
    }

    #[test]
    fn nothing_holds_at_the_start_unless_stated((h, records) in arb_narrative()) {
        empty_start_unless_stated(h, &records)?;
    }

    #[test]
    fn disjunction_gives_one_model_per_nonempty_choice((h, records) in arb_narrative(), group in arb_group()) {
        one_model_per_nonempty_choice(h, records, group)?;
    }
}
