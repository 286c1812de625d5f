mod common;

use depm::discovery::discover_model;
use depm::enhancement::{enhance, recompute_for_variant, AggregationRequest};
use depm::export::{from_json, to_dot, to_json, to_json_value, RankDirection, RenderOptions, SCHEMA_VERSION};
use depm::variants::{filter_variant, Bins, Level, VariantKey};
use depm::Error;
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::Rng;

use common::dot_grammar::validate;
use common::{brute_values, functions_for, random_log, Shape};

fn random_dep(seed: u64) -> depm::enhancement::DataEnhancedProcessModel {
    let mut rng = common::rng(seed);
    let log = random_log(
        &mut rng,
        Shape {
            nasty_text: true,
            ..Shape::default()
        },
    );
    let model = discover_model(&log, rng.random_range(0.0..0.5), rng.random_range(0.0..0.5)).unwrap();
    let requests: Vec<AggregationRequest> = (0..rng.random_range(0..12))
        .map(|_| {
            let activity = *common::ACTIVITIES.choose(&mut rng).unwrap();
            let attribute = *["n", "x", "c", "b", "t"].choose(&mut rng).unwrap();
            let (values, _, _) = brute_values(&log, activity, attribute);
            let function = functions_for(&values).choose(&mut rng).unwrap().clone();
            AggregationRequest::new(activity, attribute, function)
        })
        .collect();
    let dep = enhance(&model, &log, &requests).dep;
    match rng.random_range(0..3) {
        0 => dep,
        1 => {
            let key = VariantKey::event("c", "q");
            recompute_for_variant(&dep, &filter_variant(&log, &key), Some(key))
        }
        _ => {
            let bins = Bins::new(vec![30.0, 60.0]).unwrap();
            let key = VariantKey::binned("k", Level::Trace, bins, 1);
            recompute_for_variant(&dep, &filter_variant(&log, &key), Some(key))
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let dep = random_dep(seed);
        let text = to_json(&dep);
        prop_assert_eq!(from_json(&text).unwrap(), dep);
    }

    #[test]
    fn dot_is_valid_and_complete(seed in any::<u64>(), left_right in any::<bool>(), show_support in any::<bool>()) {
        let dep = random_dep(seed);
        let options = RenderOptions {
            rank_direction: if left_right { RankDirection::LeftRight } else { RankDirection::TopBottom },
            show_support,
        };
        let dot = to_dot(&dep, &options);
        if let Err(e) = validate(&dot) {
            return Err(TestCaseError::fail(format!("{e}\n{dot}")));
        }
        prop_assert_eq!(dot.matches(" -> ").count(), dep.model.edges.len());
        for (i, _) in dep.model.activities.iter().enumerate() {
            let declaration = format!("  a{i} [");
            prop_assert_eq!(dot.matches(&declaration).count(), 1);
        }
        let rows: usize = dot.lines().map(|l| l.matches("<TR>").count()).sum();
        prop_assert_eq!(rows, dep.aggregations().count() + dep.enhancements.len());
    }
}

#[test]
fn grammar_checker_rejects_broken_graphs() {
    assert!(validate("digraph { a -> b [label=\"x\"]; }").is_ok());
    assert!(validate("graph g { a -- b; c; x = y }").is_ok());
    assert!(validate("digraph { a [label=<<B>x</B> &amp; y<BR/>>]; }").is_ok());
    assert!(validate("digraph { subgraph s { a } -> b:n:ne }").is_ok());
    for broken in [
        "digraph { a -- b }",
        "graph { a -> b }",
        "digraph { a -> }",
        "digraph { a [label=<<B>x</I>>]; }",
        "digraph { a [label=<x & y>]; }",
        "digraph { a [label=\"open]; }",
        "digraph { a [label] }",
        "digraph { 1a; }",
        "digraph { a }  }",
        "digraph { node; }",
    ] {
        assert!(validate(broken).is_err(), "{broken}");
    }
}

#[test]
fn json_document_shape() {
    let value = to_json_value(&random_dep(3));
    assert_eq!(value["version"], SCHEMA_VERSION);
    for key in ["provenance", "model", "enhancements", "absent_activities"] {
        assert!(value.get(key).is_some(), "{key}");
    }
    let mut wrong = value.clone();
    wrong["version"] = "dep.v0".into();
    assert!(matches!(from_json(&wrong.to_string()), Err(Error::Version { .. })));
    let mut extra = value;
    extra["model"]["colour"] = "red".into();
    assert!(matches!(from_json(&extra.to_string()), Err(Error::Json(_))));
}
