mod common;

use std::collections::BTreeMap;

use depm::aggregation::{aggregate, extract_values};
use depm::discovery::discover_model;
use depm::enhancement::{
    add_aggregation, enhance, recompute_for_variant, remove_aggregation, AggregationRequest,
    DataEnhancedProcessModel, Outcome,
};
use depm::variants::{filter_variant, VariantKey};
use depm::{Error, EventLog};
use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use common::{brute_values, functions_for, random_log, Shape};

fn random_requests(rng: &mut impl Rng, log: &EventLog, count: usize) -> Vec<AggregationRequest> {
    (0..count)
        .map(|_| {
            let activity = *common::ACTIVITIES.choose(rng).unwrap();
            let attribute = *["n", "x", "c", "b", "t", "sparse"].choose(rng).unwrap();
            let (values, _, _) = brute_values(log, activity, attribute);
            let function = functions_for(&values).choose(rng).unwrap().clone();
            AggregationRequest::new(activity, attribute, function)
        })
        .collect()
}

/// Aggregations per activity, ignoring insertion order.
fn as_sets(dep: &DataEnhancedProcessModel) -> BTreeMap<String, Vec<String>> {
    dep.enhancements
        .iter()
        .map(|(activity, list)| {
            let mut rows: Vec<String> = list
                .iter()
                .map(|a| format!("{} = {:?}", a.request(), a.result))
                .collect();
            rows.sort();
            (activity.clone(), rows)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn request_order_is_irrelevant(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let log = random_log(&mut rng, Shape::default());
        let model = discover_model(&log, 0.0, 0.0).unwrap();
        let mut requests = random_requests(&mut rng, &log, 12);
        let a = enhance(&model, &log, &requests);
        requests.shuffle(&mut rng);
        let b = enhance(&model, &log, &requests);
        prop_assert_eq!(as_sets(&a.dep), as_sets(&b.dep));
        prop_assert_eq!(a.rejected.len(), b.rejected.len());
    }

    #[test]
    fn enhancing_in_two_steps_equals_one(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let log = random_log(&mut rng, Shape::default());
        let model = discover_model(&log, 0.0, 0.0).unwrap();
        let first = random_requests(&mut rng, &log, 6);
        let second = random_requests(&mut rng, &log, 6);
        let all: Vec<_> = first.iter().chain(&second).cloned().collect();
        let mut stepwise = enhance(&model, &log, &first).dep;
        for request in &second {
            if let Ok(next) = add_aggregation(&stepwise, &log, request) {
                stepwise = next;
            }
        }
        prop_assert_eq!(stepwise, enhance(&model, &log, &all).dep);
    }

    #[test]
    fn attached_values_match_direct_aggregation(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let log = random_log(&mut rng, Shape::default());
        let model = discover_model(&log, 0.0, 0.0).unwrap();
        let dep = enhance(&model, &log, &random_requests(&mut rng, &log, 10)).dep;
        for a in dep.aggregations() {
            let values = extract_values(&log, &a.activity, &a.attribute);
            match &a.result {
                Outcome::NoData => prop_assert!(values.is_empty()),
                Outcome::Value(v) => prop_assert_eq!(v, &aggregate(&values, &a.function).unwrap()),
            }
            prop_assert_eq!(a.source_event_count, values.source_event_count);
        }
    }

    #[test]
    fn model_never_changes(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let log = random_log(&mut rng, Shape::default());
        let model = discover_model(&log, 0.2, 0.1).unwrap();
        let mut dep = enhance(&model, &log, &random_requests(&mut rng, &log, 8)).dep;
        let requests = dep.requests();
        if let Some(r) = requests.first() {
            dep = remove_aggregation(&dep, r).0;
        }
        let key = VariantKey::trace("group", "g3");
        let variant = recompute_for_variant(&dep, &filter_variant(&log, &key), Some(key));
        prop_assert_eq!(&variant.model, &model);
        prop_assert_eq!(&dep.model, &model);
        prop_assert_eq!(recompute_for_variant(&variant, &log, None), dep);
    }
}

#[test]
fn errors_name_the_problem() {
    let log = random_log(&mut common::rng(1), Shape::default());
    let model = discover_model(&log, 0.0, 0.0).unwrap();
    let dep = DataEnhancedProcessModel::new(model, &log);
    let try_add = |spec: &str| add_aggregation(&dep, &log, &spec.parse().unwrap());
    assert!(matches!(try_add("Nope:n:max"), Err(Error::UnknownActivity(a)) if a == "Nope"));
    assert!(matches!(try_add("A:nope:max"), Err(Error::UnknownAttribute(_))));
    assert!(matches!(try_add("A:group:frequency:g1"), Err(Error::UnknownAttribute(_))));
    match try_add("A:c:median") {
        Err(Error::Inapplicable { applicable, .. }) => assert_eq!(applicable.len(), 2),
        other => panic!("unexpected {other:?}"),
    }
    assert!(try_add("A:n:median").is_ok());
}

#[test]
fn request_strings_round_trip() {
    for spec in [
        "Analyse Troponin T Value:flag:percentage:abnormal_high",
        "A:t:frequency:2020-01-01T00:00:00.000+00:00",
        r"A\:B:x\\y:max",
    ] {
        let request: AggregationRequest = spec.parse().unwrap();
        let again: AggregationRequest = request.to_string().parse().unwrap();
        assert_eq!(request, again);
    }
    assert_eq!(
        "A:t:frequency:2020-01-01T00:00:00Z".parse::<AggregationRequest>().unwrap().function.to_string(),
        "frequency(2020-01-01T00:00:00Z)"
    );
    for bad in ["A:n", "A::max", ":n:max", "A:n:sum", "A:n:percentage", "A:n:max:1", r"A\x:n:max"] {
        assert!(bad.parse::<AggregationRequest>().is_err(), "{bad}");
    }
}
