//! Event logs of past project executions: CSV ingestion, trace grouping, variant statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, FixedOffset, NaiveDateTime, Utc};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::hours::Hours;

/// Silent activity, never recorded in a log.
pub const TAU: &str = "τ";
/// Dummy start node of a directly-follows graph.
pub const START_SYMBOL: &str = "▶";
/// Dummy end node of a directly-follows graph.
pub const END_SYMBOL: &str = "■";

pub fn is_reserved_label(label: &str) -> bool {
    matches!(label, TAU | START_SYMBOL | END_SYMBOL)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LogError {
    #[error("missing mandatory column `{0}`")]
    MissingColumn(&'static str),
    #[error("row {row}: unparseable timestamp `{value}`")]
    BadTimestamp { row: usize, value: String },
    #[error("row {row}: unparseable duration `{value}`")]
    BadDuration { row: usize, value: String },
    #[error("row {row}: negative duration `{value}`")]
    NegativeDuration { row: usize, value: String },
    #[error("row {row}: missing duration")]
    MissingDuration { row: usize },
    #[error("row {row}: reserved symbol `{label}` used as activity")]
    ReservedLabel { row: usize, label: String },
    #[error("row {row}: empty activity label")]
    EmptyActivity { row: usize },
    #[error("row {row}: empty project id")]
    EmptyProject { row: usize },
    #[error("row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("project `{project}`: timestamps are not in chronological order")]
    Unordered { project: String },
}

impl LogError {
    /// 1-based data row the error refers to, when there is one.
    pub fn row(&self) -> Option<usize> {
        match self {
            LogError::BadTimestamp { row, .. }
            | LogError::BadDuration { row, .. }
            | LogError::NegativeDuration { row, .. }
            | LogError::MissingDuration { row }
            | LogError::ReservedLabel { row, .. }
            | LogError::EmptyActivity { row }
            | LogError::EmptyProject { row }
            | LogError::Csv { row, .. } => Some(*row),
            LogError::MissingColumn(_) | LogError::Unordered { .. } => None,
        }
    }
}

/// Scalar project/event attribute.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum FeatureValue {
    Number(f64),
    Text(String),
}

impl std::fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureValue::Number(v) => write!(f, "{v}"),
            FeatureValue::Text(s) => f.write_str(s),
        }
    }
}

fn serialize_timestamp<S: Serializer>(ts: &DateTime<FixedOffset>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&ts.to_rfc3339())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventRecord {
    pub project_id: String,
    pub event_id: String,
    pub activity: String,
    #[serde(serialize_with = "serialize_timestamp")]
    pub timestamp: DateTime<FixedOffset>,
    pub duration: Hours,
    pub features: BTreeMap<String, FeatureValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trace {
    pub project_id: String,
    pub events: Vec<EventRecord>,
}

impl Trace {
    pub fn activities(&self) -> Vec<String> {
        self.events.iter().map(|e| e.activity.clone()).collect()
    }

    /// Project-level features: those of the first event.
    pub fn case_features(&self) -> BTreeMap<String, FeatureValue> {
        self.events.first().map(|e| e.features.clone()).unwrap_or_default()
    }
}

/// Multiset of traces over a finite activity alphabet.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EventLog {
    traces: Vec<Trace>,
    alphabet: BTreeSet<String>,
}

impl EventLog {
    /// Builds a log from already grouped traces, checking the log invariants.
    pub fn from_traces(traces: Vec<Trace>) -> Result<Self, LogError> {
        let mut alphabet = BTreeSet::new();
        for trace in &traces {
            for (pos, event) in trace.events.iter().enumerate() {
                if event.activity.is_empty() {
                    return Err(LogError::EmptyActivity { row: pos + 1 });
                }
                if is_reserved_label(&event.activity) {
                    return Err(LogError::ReservedLabel { row: pos + 1, label: event.activity.clone() });
                }
                if event.duration.is_negative() {
                    return Err(LogError::NegativeDuration { row: pos + 1, value: event.duration.to_string() });
                }
                alphabet.insert(event.activity.clone());
            }
            if trace.events.windows(2).any(|w| w[1].timestamp < w[0].timestamp) {
                return Err(LogError::Unordered { project: trace.project_id.clone() });
            }
        }
        Ok(EventLog { traces, alphabet })
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn alphabet(&self) -> &BTreeSet<String> {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn trace(&self, project_id: &str) -> Option<&Trace> {
        self.traces.iter().find(|t| t.project_id == project_id)
    }

    pub fn variant_log(&self) -> VariantLog {
        VariantLog::from_traces(self.traces.iter().map(Trace::activities))
    }

    /// Keeps the traces the predicate accepts.
    pub fn filter_traces(&self, mut keep: impl FnMut(&Trace) -> bool) -> EventLog {
        let traces: Vec<Trace> = self.traces.iter().filter(|t| keep(t)).cloned().collect();
        let alphabet = traces.iter().flat_map(|t| t.events.iter().map(|e| e.activity.clone())).collect();
        EventLog { traces, alphabet }
    }
}

/// Activity-sequence view of a log: variant to multiplicity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VariantLog {
    variants: BTreeMap<Vec<String>, u64>,
}

impl VariantLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_traces<I, T>(traces: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<Vec<String>>,
    {
        let mut log = VariantLog::new();
        for t in traces {
            log.add(t.into(), 1);
        }
        log
    }

    /// Convenience for tests and literals: `[(&["a", "b"][..], 2)]`.
    pub fn from_pairs<'a, I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (&'a [&'a str], u64)>,
    {
        let mut log = VariantLog::new();
        for (trace, count) in pairs {
            log.add(trace.iter().map(|s| s.to_string()).collect(), count);
        }
        log
    }

    pub fn add(&mut self, trace: Vec<String>, count: u64) {
        if count > 0 {
            *self.variants.entry(trace).or_insert(0) += count;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<String>, u64)> {
        self.variants.iter().map(|(t, c)| (t, *c))
    }

    pub fn cases(&self) -> u64 {
        self.variants.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }

    pub fn alphabet(&self) -> BTreeSet<String> {
        self.variants.keys().flatten().cloned().collect()
    }

    pub fn count(&self, trace: &[String]) -> u64 {
        self.variants.get(trace).copied().unwrap_or(0)
    }

    pub fn empty_traces(&self) -> u64 {
        self.variants.get(&Vec::new()).copied().unwrap_or(0)
    }
}

/// Exact variant histogram.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LogStats {
    pub cases: u64,
    pub variants: BTreeMap<Vec<String>, u64>,
}

impl LogStats {
    pub fn count(&self, trace: &[&str]) -> u64 {
        let key: Vec<String> = trace.iter().map(|s| s.to_string()).collect();
        self.variants.get(&key).copied().unwrap_or(0)
    }

    /// Variants by descending count, ties by activity sequence.
    pub fn ranked(&self) -> Vec<(&Vec<String>, u64)> {
        let mut out: Vec<_> = self.variants.iter().map(|(t, c)| (t, *c)).collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        out
    }
}

impl Serialize for LogStats {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Variant<'a> {
            trace: &'a [String],
            count: u64,
        }
        #[derive(Serialize)]
        struct Repr<'a> {
            cases: u64,
            distinct_variants: usize,
            variants: Vec<Variant<'a>>,
        }
        Repr {
            cases: self.cases,
            distinct_variants: self.variants.len(),
            variants: self.ranked().into_iter().map(|(trace, count)| Variant { trace, count }).collect(),
        }
        .serialize(serializer)
    }
}

pub fn log_stats(log: &EventLog) -> LogStats {
    let mut variants = BTreeMap::new();
    for trace in log.traces() {
        *variants.entry(trace.activities()).or_insert(0) += 1;
    }
    LogStats { cases: log.len() as u64, variants }
}

#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    /// Replace an empty duration cell with the mean duration of the same activity.
    pub impute_missing_durations: bool,
}

pub fn parse_event_log(csv_text: &str) -> Result<EventLog, LogError> {
    parse_event_log_with(csv_text, &ParseOptions::default())
}

/// RFC-3339, or a naive `YYYY-MM-DDTHH:MM[:SS]` read as UTC.
pub fn parse_timestamp(text: &str) -> Option<DateTime<FixedOffset>> {
    let text = text.trim();
    if let Ok(ts) = DateTime::parse_from_rfc3339(text) {
        return Some(ts);
    }
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(text, fmt).ok())
        .map(|naive| DateTime::<Utc>::from_naive_utc_and_offset(naive, Utc).fixed_offset())
}

struct RawRow {
    row: usize,
    project_id: String,
    event_id: String,
    activity: String,
    timestamp: DateTime<FixedOffset>,
    duration: Option<Hours>,
    features: Vec<(usize, String)>,
}

pub fn parse_event_log_with(csv_text: &str, options: &ParseOptions) -> Result<EventLog, LogError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(csv_text.as_bytes());
    let headers = reader.headers().map_err(|e| LogError::Csv { row: 0, message: e.to_string() })?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let project_col = find("project_id").ok_or(LogError::MissingColumn("project_id"))?;
    let activity_col = find("activity").ok_or(LogError::MissingColumn("activity"))?;
    let timestamp_col = find("timestamp").ok_or(LogError::MissingColumn("timestamp"))?;
    let duration_col = find("duration").ok_or(LogError::MissingColumn("duration"))?;
    let event_col = find("event_id");
    let reserved = [Some(project_col), Some(activity_col), Some(timestamp_col), Some(duration_col), event_col];
    let feature_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| !reserved.contains(&Some(*i)))
        .map(|(i, h)| (i, h.to_string()))
        .collect();

    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|e| LogError::Csv { row, message: e.to_string() })?;
        let cell = |col: usize| record.get(col).unwrap_or("").to_string();
        let project_id = cell(project_col);
        if project_id.is_empty() {
            return Err(LogError::EmptyProject { row });
        }
        let activity = cell(activity_col);
        if activity.is_empty() {
            return Err(LogError::EmptyActivity { row });
        }
        if is_reserved_label(&activity) {
            return Err(LogError::ReservedLabel { row, label: activity });
        }
        let ts_text = cell(timestamp_col);
        let timestamp = parse_timestamp(&ts_text).ok_or(LogError::BadTimestamp { row, value: ts_text })?;
        let dur_text = cell(duration_col);
        let duration = if dur_text.is_empty() {
            if !options.impute_missing_durations {
                return Err(LogError::MissingDuration { row });
            }
            None
        } else {
            let d = Hours::parse(&dur_text).ok_or_else(|| LogError::BadDuration { row, value: dur_text.clone() })?;
            if d.is_negative() {
                return Err(LogError::NegativeDuration { row, value: dur_text });
            }
            Some(d)
        };
        rows.push(RawRow {
            row,
            project_id,
            event_id: event_col.map(&cell).unwrap_or_default(),
            activity,
            timestamp,
            duration,
            features: feature_cols.iter().map(|(i, _)| (*i, cell(*i))).collect(),
        });
    }

    // a column is numeric iff every non-empty cell parses as a number
    let numeric: HashMap<usize, bool> = feature_cols
        .iter()
        .map(|(col, _)| {
            let cells: Vec<&str> = rows
                .iter()
                .filter_map(|r| r.features.iter().find(|(c, _)| c == col).map(|(_, v)| v.as_str()))
                .filter(|v| !v.is_empty())
                .collect();
            let is_num = !cells.is_empty() && cells.iter().all(|v| v.parse::<f64>().is_ok_and(f64::is_finite));
            (*col, is_num)
        })
        .collect();

    let imputed = impute_means(&rows)?;
    let names: HashMap<usize, &String> = feature_cols.iter().map(|(i, n)| (*i, n)).collect();

    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, Vec<(usize, EventRecord)>> = HashMap::new();
    for (input_pos, raw) in rows.into_iter().enumerate() {
        let features = raw
            .features
            .into_iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(col, v)| {
                let value =
                    if numeric[&col] { FeatureValue::Number(v.parse().unwrap()) } else { FeatureValue::Text(v) };
                (names[&col].clone(), value)
            })
            .collect();
        let duration = raw.duration.unwrap_or_else(|| imputed[&raw.activity]);
        let event = EventRecord {
            project_id: raw.project_id.clone(),
            event_id: raw.event_id,
            activity: raw.activity,
            timestamp: raw.timestamp,
            duration,
            features,
        };
        if !grouped.contains_key(&raw.project_id) {
            order.push(raw.project_id.clone());
        }
        grouped.entry(raw.project_id).or_default().push((input_pos, event));
    }

    let traces = order
        .into_iter()
        .map(|project_id| {
            let mut events = grouped.remove(&project_id).unwrap_or_default();
            events.sort_by(|(pa, a), (pb, b)| {
                a.timestamp.cmp(&b.timestamp).then_with(|| a.event_id.cmp(&b.event_id)).then(pa.cmp(pb))
            });
            Trace { project_id, events: events.into_iter().map(|(_, e)| e).collect() }
        })
        .collect();
    EventLog::from_traces(traces)
}

fn impute_means(rows: &[RawRow]) -> Result<HashMap<String, Hours>, LogError> {
    let mut sums: HashMap<&str, (Hours, i64)> = HashMap::new();
    for r in rows {
        if let Some(d) = r.duration {
            let entry = sums.entry(&r.activity).or_insert((Hours::ZERO, 0));
            entry.0 += d;
            entry.1 += 1;
        }
    }
    let mut means = HashMap::new();
    for r in rows.iter().filter(|r| r.duration.is_none()) {
        let (sum, n) = sums.get(r.activity.as_str()).ok_or(LogError::MissingDuration { row: r.row })?;
        means.insert(r.activity.clone(), *sum / *n);
    }
    Ok(means)
}

/// Writes the log back in the CSV layout [`parse_event_log`] reads.
pub fn write_event_log(log: &EventLog) -> String {
    let feature_names: BTreeSet<&String> =
        log.traces().iter().flat_map(|t| t.events.iter().flat_map(|e| e.features.keys())).collect();
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["project_id", "event_id", "activity", "timestamp", "duration"];
    header.extend(feature_names.iter().map(|s| s.as_str()));
    writer.write_record(&header).expect("in-memory write");
    for trace in log.traces() {
        for e in &trace.events {
            let mut record = vec![
                e.project_id.clone(),
                e.event_id.clone(),
                e.activity.clone(),
                e.timestamp.to_rfc3339(),
                e.duration.to_string(),
            ];
            record.extend(
                feature_names.iter().map(|name| e.features.get(*name).map(|v| v.to_string()).unwrap_or_default()),
            );
            writer.write_record(&record).expect("in-memory write");
        }
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const TABLE_ONE: &str = "\
project_id,event_id,activity,timestamp,duration,client
1,e1,a,2022-01-13T12:00:00Z,2:00,CO
1,e2,b,2022-01-13T14:55:00Z,4:00,CO
1,e3,c,2022-01-14T08:39:00Z,3:30,CO
1,e4,e,2022-02-03T11:47:00Z,5:00,CO
2,e1,a,2020-09-12T11:07:00Z,2:15,IZ
2,e2,d,2020-09-20T08:40:00Z,1:30,IZ
2,e3,e,2020-09-20T11:32:00Z,4:30,IZ
3,e1,a,2021-12-10T13:00:00Z,2:30,TA
3,e2,c,2021-12-28T10:40:00Z,3:00,TA
3,e3,b,2022-01-10T08:55:00Z,4:00,TA
3,e4,e,2022-02-13T09:47:00Z,3:30,TA
4,e1,a,2021-11-10T15:05:00Z,2:00,IZ
4,e2,d,2022-02-03T11:40:00Z,1:30,IZ
4,e3,e,2022-02-05T16:22:00Z,4:30,IZ
";

    fn seq(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn table_one_groups_into_running_example() {
        let log = parse_event_log(TABLE_ONE).unwrap();
        assert_eq!(log.len(), 4);
        let stats = log_stats(&log);
        assert_eq!(stats.cases, 4);
        assert_eq!(stats.count(&["a", "b", "c", "e"]), 1);
        assert_eq!(stats.count(&["a", "c", "b", "e"]), 1);
        assert_eq!(stats.count(&["a", "d", "e"]), 2);
        assert_eq!(log.alphabet().len(), 5);
        let p1 = log.trace("1").unwrap();
        assert_eq!(p1.events[2].duration, Hours::new(7, 2));
        assert_eq!(p1.case_features()["client"], FeatureValue::Text("CO".into()));
    }

    #[test]
    fn empty_body_gives_empty_log() {
        let log = parse_event_log("project_id,activity,timestamp,duration\n").unwrap();
        assert!(log.is_empty());
        let stats = log_stats(&log);
        assert_eq!(stats.cases, 0);
        assert!(stats.variants.is_empty());
    }

    #[test]
    fn row_order_does_not_matter() {
        let sorted = parse_event_log(TABLE_ONE).unwrap();
        let mut lines: Vec<&str> = TABLE_ONE.lines().collect();
        let header = lines.remove(0);
        lines.reverse();
        let shuffled = format!("{header}\n{}\n", lines.join("\n"));
        let reversed = parse_event_log(&shuffled).unwrap();
        for t in sorted.traces() {
            assert_eq!(reversed.trace(&t.project_id).unwrap(), t);
        }
    }

    #[test]
    fn equal_timestamps_break_ties_by_event_id_then_input_order() {
        let text = "\
project_id,event_id,activity,timestamp,duration
p,e2,b,2022-01-01T00:00:00Z,1
p,e1,a,2022-01-01T00:00:00Z,1
p,,y,2022-01-02T00:00:00Z,1
p,,x,2022-01-02T00:00:00Z,1
";
        let log = parse_event_log(text).unwrap();
        assert_eq!(log.traces()[0].activities(), seq(&["a", "b", "y", "x"]));
    }

    #[test]
    fn mandatory_columns_are_enforced() {
        let err = parse_event_log("project_id,activity,timestamp\n1,a,2022-01-01T00:00:00Z\n").unwrap_err();
        assert_eq!(err, LogError::MissingColumn("duration"));
    }

    #[test]
    fn bad_cells_are_reported_with_rows() {
        let head = "project_id,activity,timestamp,duration\n";
        let err = parse_event_log(&format!("{head}1,a,2022-01-01T00:00:00Z,1\n1,b,yesterday,1\n")).unwrap_err();
        assert_eq!(err, LogError::BadTimestamp { row: 2, value: "yesterday".into() });
        assert_eq!(err.row(), Some(2));
        let err = parse_event_log(&format!("{head}1,a,2022-01-01T00:00:00Z,-2\n")).unwrap_err();
        assert!(matches!(err, LogError::NegativeDuration { row: 1, .. }));
        let err = parse_event_log(&format!("{head}1,τ,2022-01-01T00:00:00Z,1\n")).unwrap_err();
        assert!(matches!(err, LogError::ReservedLabel { row: 1, .. }));
        let err = parse_event_log(&format!("{head}1,■,2022-01-01T00:00:00Z,1\n")).unwrap_err();
        assert!(matches!(err, LogError::ReservedLabel { .. }));
        let err = parse_event_log(&format!("{head}1,a,2022-01-01T00:00:00Z,\n")).unwrap_err();
        assert_eq!(err, LogError::MissingDuration { row: 1 });
    }

    #[test]
    fn missing_durations_can_be_imputed() {
        let text = "\
project_id,activity,timestamp,duration
1,a,2022-01-01T00:00:00Z,1
2,a,2022-01-01T00:00:00Z,2
3,a,2022-01-01T00:00:00Z,
";
        let options = ParseOptions { impute_missing_durations: true };
        let log = parse_event_log_with(text, &options).unwrap();
        assert_eq!(log.trace("3").unwrap().events[0].duration, Hours::new(3, 2));
        let lonely = "project_id,activity,timestamp,duration\n1,z,2022-01-01T00:00:00Z,\n";
        assert!(parse_event_log_with(lonely, &options).is_err());
    }

    #[test]
    fn feature_columns_are_typed() {
        let text = "\
project_id,activity,timestamp,duration,budget,client
1,a,2022-01-01T00:00:00Z,1,50000,CO
2,a,2022-01-01T00:00:00Z,1,,7
3,a,2022-01-01T00:00:00Z,1,10000.5,IZ
";
        let log = parse_event_log(text).unwrap();
        let f = log.trace("1").unwrap().case_features();
        assert_eq!(f["budget"], FeatureValue::Number(50000.0));
        assert_eq!(f["client"], FeatureValue::Text("CO".into()));
        let f2 = log.trace("2").unwrap().case_features();
        assert!(!f2.contains_key("budget"));
        assert_eq!(f2["client"], FeatureValue::Text("7".into()));
    }

    #[test]
    fn naive_timestamps_read_as_utc() {
        let ts = parse_timestamp("2022-01-13T12:00").unwrap();
        assert_eq!(ts, parse_timestamp("2022-01-13T12:00:00Z").unwrap());
        assert!(parse_timestamp("13-01-2022").is_none());
    }

    #[test]
    fn csv_round_trip_on_table_one() {
        let log = parse_event_log(TABLE_ONE).unwrap();
        let again = parse_event_log(&write_event_log(&log)).unwrap();
        assert_eq!(log, again);
    }

    #[test]
    fn variant_log_counts() {
        let log = parse_event_log(TABLE_ONE).unwrap();
        let v = log.variant_log();
        assert_eq!(v.cases(), 4);
        assert_eq!(v.distinct(), 3);
        assert_eq!(v.count(&seq(&["a", "d", "e"])), 2);
    }

    #[test]
    fn stats_json_is_ranked() {
        let stats = log_stats(&parse_event_log(TABLE_ONE).unwrap());
        let json = serde_json::to_string(&stats).unwrap();
        assert!(json.starts_with(r#"{"cases":4,"distinct_variants":3,"variants":[{"trace":["a","d","e"],"count":2}"#));
    }
}
