//! Directly-follows process model discovery.
//!
//! The discovered model is a directly-follows graph over activity names with
//! two synthetic nodes, [`Node::Start`] and [`Node::End`]. It carries no
//! gateways: nodes are activities, edges are immediate successions annotated
//! with how often they were traversed.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::eventlog::EventLog;
use crate::{Error, Result};

/// A node of the process model.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Start,
    Activity(String),
    End,
}

impl Node {
    pub fn activity(name: &str) -> Self {
        Node::Activity(name.to_owned())
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Node::Activity(name) => Some(name),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ActivityStatistics {
    /// Number of events carrying the activity name.
    pub absolute_frequency: u64,
    /// Number of traces containing at least one such event.
    pub case_coverage: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivityNode {
    pub name: String,
    pub absolute_frequency: u64,
    pub case_coverage: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub source: Node,
    pub target: Node,
    pub count: u64,
    /// Added after filtering to keep an activity connected to start or end.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub repaired: bool,
}

/// Process model `(N, E)` with frequency annotations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessModel {
    pub trace_count: u64,
    pub activities: BTreeMap<String, ActivityNode>,
    /// Sorted by `(source, target)`.
    pub edges: Vec<Edge>,
}

impl ProcessModel {
    pub fn contains_activity(&self, name: &str) -> bool {
        self.activities.contains_key(name)
    }

    pub fn edge_count(&self, source: &Node, target: &Node) -> Option<u64> {
        self.edges
            .binary_search_by(|e| (&e.source, &e.target).cmp(&(source, target)))
            .ok()
            .map(|i| self.edges[i].count)
    }

    pub fn incoming(&self, node: &Node) -> u64 {
        self.edges.iter().filter(|e| &e.target == node).map(|e| e.count).sum()
    }

    pub fn outgoing(&self, node: &Node) -> u64 {
        self.edges.iter().filter(|e| &e.source == node).map(|e| e.count).sum()
    }
}

pub type DirectlyFollows = BTreeMap<(Node, Node), u64>;

/// Counts immediate successions in every trace, including `(Start, first)`
/// and `(last, End)`. An empty trace contributes `(Start, End)`.
pub fn directly_follows(log: &EventLog) -> DirectlyFollows {
    let mut counts = DirectlyFollows::new();
    for trace in &log.traces {
        count_sequence(&mut counts, trace.activities());
    }
    counts
}

fn count_sequence<'a>(counts: &mut DirectlyFollows, activities: impl Iterator<Item = &'a str>) {
    let mut previous = Node::Start;
    for activity in activities {
        let current = Node::activity(activity);
        *counts.entry((previous, current.clone())).or_default() += 1;
        previous = current;
    }
    *counts.entry((previous, Node::End)).or_default() += 1;
}

/// Event frequency and case coverage for every activity.
pub fn activity_statistics(log: &EventLog) -> BTreeMap<String, ActivityStatistics> {
    let mut stats: BTreeMap<String, ActivityStatistics> = BTreeMap::new();
    for trace in &log.traces {
        let mut seen = BTreeSet::new();
        for activity in trace.activities() {
            let entry = stats.entry(activity.to_owned()).or_default();
            entry.absolute_frequency += 1;
            if seen.insert(activity) {
                entry.case_coverage += 1;
            }
        }
    }
    stats
}

/// Discovers a frequency-filtered directly-follows model.
///
/// Activities are kept when they occur in at least `activity_threshold` of
/// the traces. The directly-follows relation is then computed on the log
/// projected onto the kept activities, and edges are kept when their count
/// reaches `edge_threshold` times the largest edge count. Any kept activity
/// left unreachable from start (or unable to reach end) is connected to it by
/// a repaired edge.
pub fn discover_model(
    log: &EventLog,
    activity_threshold: f64,
    edge_threshold: f64,
) -> Result<ProcessModel> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    for (name, value) in [
        ("activity_threshold", activity_threshold),
        ("edge_threshold", edge_threshold),
    ] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Threshold { name, value });
        }
    }

    let trace_count = log.len() as u64;
    let activities: BTreeMap<String, ActivityNode> = activity_statistics(log)
        .into_iter()
        .filter(|(_, s)| s.case_coverage as f64 / trace_count as f64 >= activity_threshold)
        .map(|(name, s)| {
            let node = ActivityNode {
                name: name.clone(),
                absolute_frequency: s.absolute_frequency,
                case_coverage: s.case_coverage,
            };
            (name, node)
        })
        .collect();

    let mut projected = DirectlyFollows::new();
    for trace in &log.traces {
        count_sequence(
            &mut projected,
            trace.activities().filter(|a| activities.contains_key(*a)),
        );
    }
    let max_count = projected.values().copied().max().unwrap_or(0);
    let cutoff = edge_threshold * max_count as f64;
    let mut kept: DirectlyFollows = projected
        .iter()
        .filter(|(_, &count)| count as f64 >= cutoff)
        .map(|(edge, &count)| (edge.clone(), count))
        .collect();

    let mut repaired = BTreeSet::new();
    let names: Vec<&String> = activities.keys().collect();
    // Reconnect one orphan at a time (smallest name first); each repair can
    // make further activities reachable.
    while let Some(orphan) = {
        let reachable = reach(&kept, Node::Start, false);
        names
            .iter()
            .find(|n| !reachable.contains(&Node::activity(n)))
            .copied()
    } {
        let edge = (Node::Start, Node::activity(orphan));
        let count = projected.get(&edge).copied().unwrap_or(0).max(1);
        kept.insert(edge.clone(), count);
        repaired.insert(edge);
    }
    while let Some(orphan) = {
        let reaching = reach(&kept, Node::End, true);
        names
            .iter()
            .find(|n| !reaching.contains(&Node::activity(n)))
            .copied()
    } {
        let edge = (Node::activity(orphan), Node::End);
        let count = projected.get(&edge).copied().unwrap_or(0).max(1);
        kept.insert(edge.clone(), count);
        repaired.insert(edge);
    }

    let edges = kept
        .into_iter()
        .map(|((source, target), count)| {
            let repaired = repaired.contains(&(source.clone(), target.clone()));
            Edge {
                source,
                target,
                count,
                repaired,
            }
        })
        .collect();
    Ok(ProcessModel {
        trace_count,
        activities,
        edges,
    })
}

/// Nodes reachable from `from` (or, with `reverse`, nodes that reach it).
fn reach(edges: &DirectlyFollows, from: Node, reverse: bool) -> BTreeSet<Node> {
    let mut seen = BTreeSet::from([from.clone()]);
    let mut stack = vec![from];
    while let Some(node) = stack.pop() {
        for (source, target) in edges.keys() {
            let (a, b) = if reverse { (target, source) } else { (source, target) };
            if *a == node && seen.insert(b.clone()) {
                stack.push(b.clone());
            }
        }
    }
    seen
}
