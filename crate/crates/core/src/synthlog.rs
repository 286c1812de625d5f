//! Deterministic synthetic event logs for a heart-failure diagnosis process.
//!
//! Each generated trace is one hospital admission: a chest X-ray first, an
//! optional ECG, then a shuffled set of laboratory analyses, some of them
//! repeated. Every distribution parameter lives in [`GeneratorConfig`]; the
//! defaults are scenario parameters, not clinical facts. Two of them mirror
//! published targets: troponin T is abnormally high for 60% of measurements,
//! and 20% of chest X-rays are read as normal.
//!
//! Alongside the log the generator returns a [`GeneratorManifest`] tallying
//! what it emitted, which tests use as ground truth.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eventlog::{AttributeValue, Event, EventLog, Timestamp, Trace};
use crate::{Error, Result};

pub const XRAY_ACTIVITY: &str = "Perform General X-Ray";
pub const ECG_ACTIVITY: &str = "Perform ECG";
pub const TROPONIN_ACTIVITY: &str = "Analyse Troponin T Value";
pub const SOURCE_NAME: &str = "synthetic-heart-failure";

/// Probabilities of the three laboratory flags; must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagDistribution {
    pub normal: f64,
    pub abnormal_high: f64,
    pub abnormal_low: f64,
}

impl FlagDistribution {
    pub const fn new(normal: f64, abnormal_high: f64, abnormal_low: f64) -> Self {
        FlagDistribution {
            normal,
            abnormal_high,
            abnormal_low,
        }
    }

    fn validate(&self, context: &str) -> Result<()> {
        for p in [self.normal, self.abnormal_high, self.abnormal_low] {
            check_probability(p, context)?;
        }
        let sum = self.normal + self.abnormal_high + self.abnormal_low;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "{context}: flag probabilities sum to {sum}, not 1"
            )));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut impl Rng) -> &'static str {
        let u: f64 = rng.random();
        if u < self.normal {
            "normal"
        } else if u < self.normal + self.abnormal_high {
            "abnormal_high"
        } else {
            "abnormal_low"
        }
    }
}

fn check_probability(p: f64, context: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config(format!("{context}: probability {p} outside [0, 1]")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XRaySpec {
    /// Probability that the X-ray is read as normal.
    pub normal_probability: f64,
    /// Per-finding probability, given an abnormal X-ray. Each finding becomes
    /// a boolean attribute.
    pub findings: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EcgSpec {
    pub probability: f64,
    pub atrial_fibrillation_probability: f64,
    /// Inclusive heart-rate range, beats per minute.
    pub heart_rate: (i64, i64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabSpec {
    pub activity: String,
    /// Probability that the analysis happens during an admission.
    pub probability: f64,
    /// Probability of each further repetition (at most three repeats).
    pub repeat_probability: f64,
    pub flags: FlagDistribution,
    /// Reference interval; normal values are drawn uniformly inside it.
    pub reference_range: (f64, f64),
    pub unit: String,
}

/// A patient group with its own laboratory flag distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cohort {
    pub name: String,
    /// Share of traces; cohort weights must sum to 1.
    pub weight: f64,
    /// Replacement flag distributions, keyed by lab activity.
    #[serde(default)]
    pub flag_overrides: BTreeMap<String, FlagDistribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub trace_count: usize,
    pub start: Timestamp,
    pub xray: XRaySpec,
    pub ecg: EcgSpec,
    pub labs: Vec<LabSpec>,
    pub cohorts: Vec<Cohort>,
    /// Inclusive patient age range.
    pub age: (i64, i64),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        let lab = |activity: &str, probability, repeat_probability, flags, range, unit: &str| LabSpec {
            activity: activity.to_owned(),
            probability,
            repeat_probability,
            flags,
            reference_range: range,
            unit: unit.to_owned(),
        };
        GeneratorConfig {
            seed: 42,
            trace_count: 1000,
            // 2150-01-01T00:00:00Z
            start: Timestamp::from_millis(5_680_281_600_000),
            xray: XRaySpec {
                normal_probability: 0.20,
                findings: BTreeMap::from([
                    ("atelectasis".to_owned(), 0.35),
                    ("cardiomegaly".to_owned(), 0.55),
                    ("pleural_effusion".to_owned(), 0.45),
                ]),
            },
            ecg: EcgSpec {
                probability: 0.85,
                atrial_fibrillation_probability: 0.3,
                heart_rate: (55, 130),
            },
            labs: vec![
                lab(
                    TROPONIN_ACTIVITY,
                    1.0,
                    0.3,
                    FlagDistribution::new(0.40, 0.60, 0.0),
                    (0.0, 0.01),
                    "ng/mL",
                ),
                lab(
                    "Analyse NT-proBNP Value",
                    0.9,
                    0.1,
                    FlagDistribution::new(0.15, 0.85, 0.0),
                    (0.0, 125.0),
                    "pg/mL",
                ),
                lab(
                    "Analyse TSH Value",
                    0.6,
                    0.0,
                    FlagDistribution::new(0.80, 0.13, 0.07),
                    (0.27, 4.2),
                    "uIU/mL",
                ),
                lab(
                    "Analyse Creatinine Value",
                    0.95,
                    0.2,
                    FlagDistribution::new(0.55, 0.40, 0.05),
                    (0.5, 1.2),
                    "mg/dL",
                ),
            ],
            cohorts: vec![Cohort {
                name: "heart_failure".to_owned(),
                weight: 1.0,
                flag_overrides: BTreeMap::new(),
            }],
            age: (45, 95),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        check_probability(self.xray.normal_probability, "xray.normal_probability")?;
        for (finding, &p) in &self.xray.findings {
            check_probability(p, &format!("xray.findings.{finding}"))?;
        }
        check_probability(self.ecg.probability, "ecg.probability")?;
        check_probability(
            self.ecg.atrial_fibrillation_probability,
            "ecg.atrial_fibrillation_probability",
        )?;
        if self.ecg.heart_rate.0 > self.ecg.heart_rate.1 {
            return Err(Error::Config("ecg.heart_rate: empty range".into()));
        }
        if self.age.0 > self.age.1 {
            return Err(Error::Config("age: empty range".into()));
        }
        for lab in &self.labs {
            check_probability(lab.probability, &lab.activity)?;
            check_probability(lab.repeat_probability, &lab.activity)?;
            lab.flags.validate(&lab.activity)?;
            let (low, high) = lab.reference_range;
            if !(low.is_finite() && high.is_finite() && low <= high) {
                return Err(Error::Config(format!("{}: invalid reference range", lab.activity)));
            }
        }
        if self.cohorts.is_empty() {
            return Err(Error::Config("at least one cohort is required".into()));
        }
        let mut total = 0.0;
        for cohort in &self.cohorts {
            check_probability(cohort.weight, &format!("cohort {}", cohort.name))?;
            total += cohort.weight;
            for (activity, flags) in &cohort.flag_overrides {
                if !self.labs.iter().any(|l| &l.activity == activity) {
                    return Err(Error::Config(format!(
                        "cohort {}: override for unknown lab `{activity}`",
                        cohort.name
                    )));
                }
                flags.validate(&format!("cohort {} {activity}", cohort.name))?;
            }
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("cohort weights sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Every activity name the generator can emit.
    pub fn activity_alphabet(&self) -> Vec<String> {
        let mut names = vec![XRAY_ACTIVITY.to_owned()];
        if self.ecg.probability > 0.0 {
            names.push(ECG_ACTIVITY.to_owned());
        }
        names.extend(
            self.labs
                .iter()
                .filter(|l| l.probability > 0.0)
                .map(|l| l.activity.clone()),
        );
        names.sort();
        names
    }
}

pub type Tallies = BTreeMap<String, BTreeMap<String, BTreeMap<String, u64>>>;

/// Ground truth recorded while generating.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GeneratorManifest {
    pub trace_count: u64,
    pub event_count: u64,
    pub activity_event_counts: BTreeMap<String, u64>,
    pub activity_case_counts: BTreeMap<String, u64>,
    /// activity → categorical attribute → rendered value → count.
    pub value_tallies: Tallies,
    pub cohort_sizes: BTreeMap<String, u64>,
    /// Same tallies restricted to each cohort.
    pub cohort_tallies: BTreeMap<String, Tallies>,
}

impl GeneratorManifest {
    pub fn tally(&self, activity: &str, attribute: &str, value: &str) -> u64 {
        lookup(&self.value_tallies, activity, attribute, value)
    }

    pub fn cohort_tally(&self, cohort: &str, activity: &str, attribute: &str, value: &str) -> u64 {
        self.cohort_tallies
            .get(cohort)
            .map_or(0, |t| lookup(t, activity, attribute, value))
    }

    /// Share of `activity` events whose `attribute` equals `value`.
    pub fn share(&self, activity: &str, attribute: &str, value: &str) -> f64 {
        let total: u64 = self
            .value_tallies
            .get(activity)
            .and_then(|a| a.get(attribute))
            .map_or(0, |v| v.values().sum());
        self.tally(activity, attribute, value) as f64 / total as f64
    }
}

fn lookup(tallies: &Tallies, activity: &str, attribute: &str, value: &str) -> u64 {
    tallies
        .get(activity)
        .and_then(|a| a.get(attribute))
        .and_then(|v| v.get(value))
        .copied()
        .unwrap_or(0)
}

struct Recorder<'a> {
    manifest: &'a mut GeneratorManifest,
    cohort: String,
}

impl Recorder<'_> {
    fn categorical(&mut self, activity: &str, attribute: &str, value: &AttributeValue) {
        let rendered = value.to_string();
        for tallies in [
            &mut self.manifest.value_tallies,
            self.manifest
                .cohort_tallies
                .entry(self.cohort.clone())
                .or_default(),
        ] {
            *tallies
                .entry(activity.to_owned())
                .or_default()
                .entry(attribute.to_owned())
                .or_default()
                .entry(rendered.clone())
                .or_default() += 1;
        }
    }
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Generates a log and its manifest. The same config always yields the same
/// log.
pub fn generate(config: &GeneratorConfig) -> Result<(EventLog, GeneratorManifest)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut manifest = GeneratorManifest::default();
    let mut traces = Vec::with_capacity(config.trace_count);
    const MINUTE: i64 = 60_000;

    for index in 0..config.trace_count {
        let case_id = format!("admission-{:05}", index + 1);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let cohort = config
            .cohorts
            .iter()
            .find(|c| {
                acc += c.weight;
                u < acc
            })
            .unwrap_or_else(|| config.cohorts.last().unwrap());
        let age = rng.random_range(config.age.0..=config.age.1);
        let gender = if rng.random_bool(0.5) { "F" } else { "M" };

        let mut recorder = Recorder {
            manifest: &mut manifest,
            cohort: cohort.name.clone(),
        };
        let mut clock = config.start.millis() + index as i64 * 360 * MINUTE
            + rng.random_range(0..120) * MINUTE;
        let mut events = Vec::new();

        let xray_normal = rng.random_bool(config.xray.normal_probability);
        let xray_flag = AttributeValue::from(if xray_normal { "normal" } else { "abnormal" });
        recorder.categorical(XRAY_ACTIVITY, "flag", &xray_flag);
        let mut xray = Event::new(&case_id, XRAY_ACTIVITY, Timestamp::from_millis(clock))
            .with("flag", xray_flag);
        for (finding, &p) in &config.xray.findings {
            let present = AttributeValue::Flag(!xray_normal && rng.random_bool(p));
            recorder.categorical(XRAY_ACTIVITY, finding, &present);
            xray = xray.with(finding, present);
        }
        events.push(xray);

        if rng.random_bool(config.ecg.probability) {
            clock += rng.random_range(10..90) * MINUTE;
            let rhythm = AttributeValue::from(
                if rng.random_bool(config.ecg.atrial_fibrillation_probability) {
                    "atrial_fibrillation"
                } else {
                    "sinus"
                },
            );
            recorder.categorical(ECG_ACTIVITY, "rhythm", &rhythm);
            let heart_rate = rng.random_range(config.ecg.heart_rate.0..=config.ecg.heart_rate.1);
            events.push(
                Event::new(&case_id, ECG_ACTIVITY, Timestamp::from_millis(clock))
                    .with("rhythm", rhythm)
                    .with("heart_rate", heart_rate),
            );
        }

        let mut order: Vec<&LabSpec> = config
            .labs
            .iter()
            .filter(|lab| rng.random_bool(lab.probability))
            .collect();
        order.shuffle(&mut rng);
        let mut measurements = Vec::new();
        for lab in order {
            measurements.push(lab);
            let mut repeats = 0;
            while repeats < 3 && rng.random_bool(lab.repeat_probability) {
                measurements.push(lab);
                repeats += 1;
            }
        }
        for lab in measurements {
            clock += rng.random_range(10..240) * MINUTE;
            let flags = cohort.flag_overrides.get(&lab.activity).unwrap_or(&lab.flags);
            let flag = flags.draw(&mut rng);
            let (low, high) = lab.reference_range;
            let value = match flag {
                "normal" => rng.random_range(low..=high),
                "abnormal_high" => high.max(f64::EPSILON) * rng.random_range(1.05..4.0),
                _ => low * rng.random_range(0.2..0.95),
            };
            let flag = AttributeValue::from(flag);
            recorder.categorical(&lab.activity, "flag", &flag);
            events.push(
                Event::new(&case_id, &lab.activity, Timestamp::from_millis(clock))
                    .with("flag", flag)
                    .with("value", AttributeValue::Real(round3(value)))
                    .with("unit", lab.unit.as_str()),
            );
        }

        let trace = Trace::new(case_id, events)
            .with_attribute("cohort", cohort.name.as_str())
            .with_attribute("age", age)
            .with_attribute("gender", gender);
        manifest.trace_count += 1;
        *manifest.cohort_sizes.entry(cohort.name.clone()).or_default() += 1;
        let mut seen = std::collections::BTreeSet::new();
        for activity in trace.activities() {
            manifest.event_count += 1;
            *manifest
                .activity_event_counts
                .entry(activity.to_owned())
                .or_default() += 1;
            if seen.insert(activity) {
                *manifest
                    .activity_case_counts
                    .entry(activity.to_owned())
                    .or_default() += 1;
            }
        }
        traces.push(trace);
    }

    Ok((EventLog::new(SOURCE_NAME, traces), manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventlog::serialize_xes;

    fn small() -> GeneratorConfig {
        GeneratorConfig {
            trace_count: 100,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn same_seed_same_log() {
        let (a, ma) = generate(&small()).unwrap();
        let (b, mb) = generate(&small()).unwrap();
        assert_eq!(serialize_xes(&a), serialize_xes(&b));
        assert_eq!(ma, mb);
        let (c, _) = generate(&GeneratorConfig { seed: 7, ..small() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_traces() {
        let (log, manifest) = generate(&GeneratorConfig {
            trace_count: 0,
            ..GeneratorConfig::default()
        })
        .unwrap();
        assert!(log.is_empty());
        assert_eq!(manifest, GeneratorManifest::default());
    }

    #[test]
    fn generated_log_is_valid() {
        let (log, manifest) = generate(&small()).unwrap();
        log.validate().unwrap();
        assert_eq!(manifest.trace_count, 100);
        assert_eq!(manifest.event_count as usize, log.event_count());
        assert_eq!(log.traces[0].events[0].activity(), Some(XRAY_ACTIVITY));
    }

    #[test]
    fn invalid_probabilities_are_rejected() {
        let mut config = small();
        config.labs[0].flags = FlagDistribution::new(0.5, 0.6, 0.0);
        assert!(matches!(generate(&config), Err(Error::Config(_))));
        let mut config = small();
        config.ecg.probability = 1.5;
        assert!(matches!(generate(&config), Err(Error::Config(_))));
        let mut config = small();
        config.cohorts[0].weight = 0.5;
        assert!(matches!(generate(&config), Err(Error::Config(_))));
    }

    #[test]
    fn normal_xray_has_no_findings() {
        let (log, _) = generate(&small()).unwrap();
        for trace in &log.traces {
            let xray = &trace.events[0];
            if xray.get("flag") == Some(&"normal".into()) {
                assert_eq!(xray.get("cardiomegaly"), Some(&AttributeValue::Flag(false)));
            }
        }
    }

    #[test]
    fn config_json_round_trip_and_partial_override() {
        let config = GeneratorConfig::default();
        let text = serde_json::to_string(&config).unwrap();
        assert_eq!(serde_json::from_str::<GeneratorConfig>(&text).unwrap(), config);
        let partial: GeneratorConfig =
            serde_json::from_str(r#"{"seed": 7, "trace_count": 3}"#).unwrap();
        assert_eq!(partial.seed, 7);
        assert_eq!(partial.labs, config.labs);
    }
}
