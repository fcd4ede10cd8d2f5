//! Run manifests, their CSV and JSON encodings, and golden comparisons.
//!
//! CSV output starts with `#key=value` header lines followed by a fixed set
//! of columns. Floats are written with 17 significant digits so that every
//! value round-trips exactly. In JSON, non-finite floats are written as the
//! strings `"inf"`, `"-inf"` and `"NaN"`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::Method;
use crate::error::{Error, Result};

/// Version of the row schema written by this crate.
pub const SCHEMA_VERSION: u32 = 1;

/// Column order of CSV output.
pub const COLUMNS: [&str; 8] = [
    "family",
    "n_or_t",
    "x_or_c",
    "method",
    "value",
    "error_note",
    "exact",
    "ratio_to_exact",
];

const HEADER_KEYS: [&str; 6] = [
    "schema_version",
    "command",
    "config_digest",
    "tool_version",
    "seed",
    "timestamp",
];

mod float_repr {
    use serde::de::{self, Deserializer};
    use serde::ser::Serializer;
    use serde::Deserialize;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn to_repr(v: f64) -> Option<&'static str> {
        if v.is_nan() {
            Some("NaN")
        } else if v == f64::INFINITY {
            Some("inf")
        } else if v == f64::NEG_INFINITY {
            Some("-inf")
        } else {
            None
        }
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) => match to_repr(*x) {
                Some(text) => s.serialize_str(text),
                None => s.serialize_f64(*x),
            },
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Num(x)) => Ok(Some(x)),
            Some(Repr::Text(t)) => t
                .parse::<f64>()
                .map(Some)
                .map_err(|_| de::Error::custom(format!("invalid float `{t}`"))),
        }
    }

    /// The same encoding for fields that are always present.
    pub mod required {
        use serde::de::{self, Deserializer};
        use serde::ser::Serializer;

        pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
            super::serialize(&Some(*v), s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
            super::deserialize(d)?.ok_or_else(|| de::Error::custom("missing float"))
        }
    }
}

/// One computed quantity.
///
/// `method` is an estimation [`Method`] tag for tail rows, or the name of the
/// reported quantity (`h`, `alpha`, `c0`, ...) for rate and series rows. A
/// row whose computation failed has no value and an `error_note` of the form
/// `error:CODE: message`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub family: String,
    #[serde(with = "float_repr::required")]
    pub n_or_t: f64,
    #[serde(with = "float_repr::required")]
    pub x_or_c: f64,
    pub method: String,
    #[serde(with = "float_repr")]
    pub value: Option<f64>,
    pub error_note: String,
    #[serde(with = "float_repr")]
    pub exact: Option<f64>,
    #[serde(with = "float_repr")]
    pub ratio_to_exact: Option<f64>,
}

impl ResultRow {
    pub fn new(
        family: impl Into<String>,
        n_or_t: f64,
        x_or_c: f64,
        method: impl Into<String>,
        value: f64,
        error_note: impl Into<String>,
    ) -> Self {
        ResultRow {
            family: family.into(),
            n_or_t,
            x_or_c,
            method: method.into(),
            value: Some(value),
            error_note: error_note.into(),
            exact: None,
            ratio_to_exact: None,
        }
    }

    /// A row recording a failed computation.
    pub fn failed(family: impl Into<String>, n_or_t: f64, x_or_c: f64, method: impl Into<String>, err: &Error) -> Self {
        ResultRow {
            family: family.into(),
            n_or_t,
            x_or_c,
            method: method.into(),
            value: None,
            error_note: format!("error:{}: {err}", err.code()),
            exact: None,
            ratio_to_exact: None,
        }
    }

    /// Attaches an exact comparator; successful rows also get the ratio
    /// `value / exact`.
    pub fn with_exact(mut self, exact: f64) -> Self {
        if let Some(v) = self.value {
            self.exact = Some(exact);
            self.ratio_to_exact = Some(v / exact);
        }
        self
    }

    pub fn is_error(&self) -> bool {
        self.value.is_none()
    }

    /// Whether the row holds a random estimate.
    pub fn is_stochastic(&self) -> bool {
        self.method.parse::<Method>().is_ok_and(Method::is_stochastic)
    }

    /// Standard error recorded in a stochastic row's `se=...` note.
    pub fn std_error(&self) -> Option<f64> {
        self.error_note
            .split(';')
            .find_map(|part| part.strip_prefix("se="))
            .and_then(|s| s.parse().ok())
    }

    fn key(&self) -> (&str, u64, u64, &str) {
        (&self.family, self.n_or_t.to_bits(), self.x_or_c.to_bits(), &self.method)
    }
}

/// Error note for a stochastic row.
pub fn stochastic_note(std_error: f64, seed: u64) -> String {
    format!("se={};seed={seed}", format_float(std_error))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestHeader {
    pub schema_version: u32,
    pub command: String,
    pub config_digest: String,
    pub tool_version: String,
    pub seed: u64,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub header: ManifestHeader,
    pub rows: Vec<ResultRow>,
}

impl RunManifest {
    /// A manifest for `command` run on the resolved configuration `config`.
    ///
    /// The timestamp comes from `SOURCE_DATE_EPOCH` when that variable holds
    /// a Unix time, so that reruns can be made byte-identical, and from the
    /// system clock otherwise.
    pub fn new(command: &str, config: &serde_json::Value, seed: u64, rows: Vec<ResultRow>) -> Self {
        RunManifest {
            header: ManifestHeader {
                schema_version: SCHEMA_VERSION,
                command: command.to_string(),
                config_digest: config_digest(config),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
                timestamp: timestamp(),
            },
            rows,
        }
    }

    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(ResultRow::is_error)
    }
}

fn timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    let time = pinned.unwrap_or_else(chrono::Utc::now);
    time.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// SHA-256 of the canonical (key-sorted, compact) JSON encoding of `config`.
pub fn config_digest(config: &serde_json::Value) -> String {
    // serde_json maps are ordered by key, so re-encoding a parsed value is
    // canonical.
    let canonical = serde_json::to_string(config).expect("JSON values always serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    /// Format implied by a file extension, if recognized.
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Parse(format!("unknown format `{s}` (expected csv or json)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_float(v: f64) -> String {
    match float_repr::to_repr(v) {
        Some(text) => text.to_string(),
        None => format!("{v:.16e}"),
    }
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// Encodes a manifest. Fails with [`Error::EmptyResult`] when there are no
/// rows.
pub fn emit(manifest: &RunManifest, format: Format) -> Result<Vec<u8>> {
    if manifest.rows.is_empty() {
        return Err(Error::EmptyResult);
    }
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(manifest).map_err(|e| Error::Parse(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let h = &manifest.header;
            let mut out = String::new();
            for (key, value) in HEADER_KEYS.iter().zip([
                h.schema_version.to_string(),
                h.command.clone(),
                h.config_digest.clone(),
                h.tool_version.clone(),
                h.seed.to_string(),
                h.timestamp.clone(),
            ]) {
                out.push_str(&format!("#{key}={value}\n"));
            }
            let mut writer = csv::Writer::from_writer(out.into_bytes());
            writer.write_record(COLUMNS).map_err(csv_error)?;
            for row in &manifest.rows {
                writer
                    .write_record([
                        row.family.clone(),
                        format_float(row.n_or_t),
                        format_float(row.x_or_c),
                        row.method.clone(),
                        format_opt(row.value),
                        row.error_note.clone(),
                        format_opt(row.exact),
                        format_opt(row.ratio_to_exact),
                    ])
                    .map_err(csv_error)?;
            }
            writer.into_inner().map_err(|e| Error::Parse(e.to_string()))
        }
    }
}

/// Encodes `manifest` and writes it to `path`.
pub fn write_manifest(path: &Path, manifest: &RunManifest, format: Format) -> Result<()> {
    let bytes = emit(manifest, format)?;
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Decodes a manifest, detecting JSON by a leading `{`.
pub fn parse(bytes: &[u8]) -> Result<RunManifest> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse(format!("manifest is not UTF-8: {e}")))?;
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("json manifest: {e}")))
    } else {
        parse_csv(text)
    }
}

/// Reads and decodes the manifest at `path`.
pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&bytes)
}

fn parse_float(field: &str, what: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: invalid float `{field}`")))
}

fn parse_opt(field: &str, what: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_float(field, what).map(Some)
    }
}

fn parse_csv(text: &str) -> Result<RunManifest> {
    let mut fields = std::collections::BTreeMap::new();
    let mut body_start = 0;
    for line in text.split_inclusive('\n') {
        let Some(entry) = line.strip_prefix('#') else { break };
        let (key, value) = entry
            .trim_end_matches(['\n', '\r'])
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("malformed header line `{}`", line.trim_end())))?;
        fields.insert(key.to_string(), value.to_string());
        body_start += line.len();
    }
    let mut take = |key: &str| {
        fields
            .remove(key)
            .ok_or_else(|| Error::SchemaMismatch(format!("csv header lacks `{key}`")))
    };
    let schema_version = take("schema_version")?
        .parse()
        .map_err(|_| Error::Parse("schema_version is not an integer".into()))?;
    let header = ManifestHeader {
        schema_version,
        command: take("command")?,
        config_digest: take("config_digest")?,
        tool_version: take("tool_version")?,
        seed: take("seed")?
            .parse()
            .map_err(|_| Error::Parse("seed is not an integer".into()))?,
        timestamp: take("timestamp")?,
    };
    if let Some(key) = fields.keys().next() {
        return Err(Error::SchemaMismatch(format!("unknown csv header key `{key}`")));
    }
    let mut reader = csv::Reader::from_reader(&text.as_bytes()[body_start..]);
    let columns = reader.headers().map_err(csv_error)?.clone();
    if columns.iter().ne(COLUMNS) {
        return Err(Error::SchemaMismatch(format!("unexpected csv columns {columns:?}")));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let r = record.map_err(csv_error)?;
        let what = |col: &str| format!("row {} column {col}", i + 1);
        rows.push(ResultRow {
            family: r[0].to_string(),
            n_or_t: parse_float(&r[1], &what("n_or_t"))?,
            x_or_c: parse_float(&r[2], &what("x_or_c"))?,
            method: r[3].to_string(),
            value: parse_opt(&r[4], &what("value"))?,
            error_note: r[5].to_string(),
            exact: parse_opt(&r[6], &what("exact"))?,
            ratio_to_exact: parse_opt(&r[7], &what("ratio_to_exact"))?,
        });
    }
    Ok(RunManifest { header, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareRule {
    /// `|current - baseline| / max(|baseline|, 1e-300) <= rel_tol`.
    Relative,
    /// `|current - baseline| <= 5 * sqrt(se_current^2 + se_baseline^2)`.
    PooledStdError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowDiff {
    pub index: usize,
    pub family: String,
    pub n_or_t: f64,
    pub x_or_c: f64,
    pub method: String,
    pub baseline: Option<f64>,
    pub current: Option<f64>,
    /// Relative difference, or the difference in pooled standard errors.
    pub diff: f64,
    pub limit: f64,
    pub rule: CompareRule,
    pub pass: bool,
}

impl RowDiff {
    pub fn describe(&self) -> String {
        format!(
            "row {} ({} n_or_t={} x_or_c={} {}): diff {:e} vs limit {:e} [{}]",
            self.index,
            self.family,
            self.n_or_t,
            self.x_or_c,
            self.method,
            self.diff,
            self.limit,
            if self.pass { "ok" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub pass: bool,
    pub rows: Vec<RowDiff>,
}

impl DiffReport {
    pub fn failures(&self) -> impl Iterator<Item = &RowDiff> {
        self.rows.iter().filter(|r| !r.pass)
    }
}

/// Pooled-SE multiple allowed between stochastic rows.
pub const STOCHASTIC_SE_MULTIPLE: f64 = 5.0;

/// Compares `manifest` with a baseline encoded as CSV or JSON.
///
/// Rows are matched by position and must agree on family, `n_or_t`,
/// `x_or_c` and method; any structural difference is a schema mismatch.
pub fn compare_golden(manifest: &RunManifest, baseline: &[u8], rel_tol: f64) -> Result<DiffReport> {
    if rel_tol.is_nan() || rel_tol < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance {rel_tol} must be non-negative"
        )));
    }
    let base = parse(baseline)?;
    if base.header.schema_version != manifest.header.schema_version {
        return Err(Error::SchemaMismatch(format!(
            "baseline schema version {} differs from {}",
            base.header.schema_version, manifest.header.schema_version
        )));
    }
    if base.rows.len() != manifest.rows.len() {
        return Err(Error::SchemaMismatch(format!(
            "baseline has {} rows, current run has {}",
            base.rows.len(),
            manifest.rows.len()
        )));
    }
    let mut rows = Vec::with_capacity(base.rows.len());
    for (index, (b, c)) in base.rows.iter().zip(&manifest.rows).enumerate() {
        if b.key() != c.key() {
            return Err(Error::SchemaMismatch(format!(
                "row {index} is ({}, {}, {}, {}) in the baseline but ({}, {}, {}, {}) now",
                b.family, b.n_or_t, b.x_or_c, b.method, c.family, c.n_or_t, c.x_or_c, c.method
            )));
        }
        let (rule, limit, scale) = if c.is_stochastic() {
            let se = b.std_error().unwrap_or(0.0).hypot(c.std_error().unwrap_or(0.0));
            (CompareRule::PooledStdError, STOCHASTIC_SE_MULTIPLE, se)
        } else {
            (CompareRule::Relative, rel_tol, 0.0)
        };
        let (diff, pass) = match (b.value, c.value) {
            (None, None) => (0.0, true),
            (Some(bv), Some(cv)) => {
                let delta = (cv - bv).abs();
                let diff = if bv.to_bits() == cv.to_bits() {
                    0.0
                } else {
                    match rule {
                        CompareRule::Relative => delta / bv.abs().max(1e-300),
                        CompareRule::PooledStdError => delta / scale,
                    }
                };
                (diff, diff <= limit)
            }
            _ => (f64::INFINITY, false),
        };
        rows.push(RowDiff {
            index,
            family: c.family.clone(),
            n_or_t: c.n_or_t,
            x_or_c: c.x_or_c,
            method: c.method.clone(),
            baseline: b.value,
            current: c.value,
            diff,
            limit,
            rule,
            pass,
        });
    }
    Ok(DiffReport {
        pass: rows.iter().all(|r| r.pass),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(rows: Vec<ResultRow>) -> RunManifest {
        RunManifest::new("tail", &serde_json::json!({"n": [50], "methods": ["thm6"]}), 0, rows)
    }

    fn sample_rows() -> Vec<ResultRow> {
        vec![
            ResultRow::new(
                "gaussian[sigma=1]",
                25.0,
                2.0,
                "thm6",
                1.0 / 3.0 * 1e-22,
                "relative O(1/n)",
            )
            .with_exact(1.1e-22),
            ResultRow::new(
                "centered_bernoulli[p=0.3]",
                100.0,
                0.5,
                "is",
                2.2e-5,
                stochastic_note(3.1e-7, 4),
            ),
            ResultRow::failed(
                "centered_bernoulli[p=0.3]",
                100.0,
                9.0,
                "thm6",
                &Error::TargetOutOfRange {
                    target: 9.0,
                    limits: "(-0.3, 0.7)".into(),
                },
            ),
            ResultRow::new("gaussian[sigma=1]", 1.0, 40.0, "exact", 0.0, "").with_exact(0.0),
        ]
    }

    #[test]
    fn empty_manifest_is_rejected() {
        assert!(matches!(emit(&manifest(vec![]), Format::Csv), Err(Error::EmptyResult)));
        assert!(matches!(emit(&manifest(vec![]), Format::Json), Err(Error::EmptyResult)));
    }

    #[test]
    fn single_row_csv_layout() {
        let m = manifest(vec![ResultRow::new(
            "gaussian[sigma=1]",
            25.0,
            2.0,
            "thm6",
            1.5e-23,
            "relative O(1/n)",
        )]);
        let text = String::from_utf8(emit(&m, Format::Csv).unwrap()).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body.len(), 2);
        assert_eq!(body[0], COLUMNS.join(","));
        assert!(body[1].contains("1.5000000000000000e-23"));
    }

    #[test]
    fn round_trips_are_exact() {
        let m = manifest(sample_rows());
        for format in [Format::Csv, Format::Json] {
            let back = parse(&emit(&m, format).unwrap()).unwrap();
            assert_eq!(back.header, m.header);
            assert_eq!(back.rows.len(), m.rows.len());
            for (a, b) in back.rows.iter().zip(&m.rows) {
                assert_eq!(a.family, b.family);
                assert_eq!(a.error_note, b.error_note);
                let bits = |v: Option<f64>| v.map(|x| if x.is_nan() { f64::NAN.to_bits() } else { x.to_bits() });
                assert_eq!(bits(a.value), bits(b.value));
                assert_eq!(bits(a.exact), bits(b.exact));
                assert_eq!(bits(a.ratio_to_exact), bits(b.ratio_to_exact));
            }
        }
    }

    #[test]
    fn ratio_present_iff_exact_present() {
        for row in sample_rows() {
            assert_eq!(row.exact.is_some(), row.ratio_to_exact.is_some());
        }
        let failed = sample_rows()[2].clone().with_exact(1.0);
        assert!(failed.exact.is_none());
    }

    #[test]
    fn digest_ignores_key_order() {
        let a: serde_json::Value = serde_json::from_str(r#"{"a":1,"b":{"x":[1,2],"y":"z"}}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"b":{"y":"z","x":[1,2]},"a":1}"#).unwrap();
        assert_eq!(config_digest(&a), config_digest(&b));
        let c: serde_json::Value = serde_json::from_str(r#"{"a":2,"b":{"x":[1,2],"y":"z"}}"#).unwrap();
        assert_ne!(config_digest(&a), config_digest(&c));
        assert_eq!(config_digest(&a).len(), 64);
    }

    #[test]
    fn golden_identical_passes() {
        let m = manifest(sample_rows());
        let report = compare_golden(&m, &emit(&m, Format::Csv).unwrap(), 1e-12).unwrap();
        assert!(report.pass);
        assert!(report.rows.iter().all(|r| r.diff == 0.0));
    }

    #[test]
    fn golden_names_perturbed_row() {
        let m = manifest(sample_rows());
        let baseline = emit(&m, Format::Json).unwrap();
        let mut perturbed = m.clone();
        let v = perturbed.rows[0].value.unwrap();
        perturbed.rows[0].value = Some(v * (1.0 + 2e-9));
        let report = compare_golden(&perturbed, &baseline, 1e-9).unwrap();
        assert!(!report.pass);
        let failures: Vec<_> = report.failures().collect();
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].index, 0);
        assert!(failures[0].describe().contains("gaussian[sigma=1]"));
    }

    #[test]
    fn golden_stochastic_rows_use_pooled_se() {
        let m = manifest(sample_rows());
        let baseline = emit(&m, Format::Csv).unwrap();
        let mut other = m.clone();
        // Pooled SE is sqrt(2) * 3.1e-7; a shift of 3 single SEs is about 2.1 pooled.
        other.rows[1].value = Some(2.2e-5 + 3.0 * 3.1e-7);
        other.rows[1].error_note = stochastic_note(3.1e-7, 5);
        assert!(compare_golden(&other, &baseline, 1e-12).unwrap().pass);
        other.rows[1].value = Some(2.2e-5 + 8.0 * 3.1e-7);
        assert!(!compare_golden(&other, &baseline, 1e-12).unwrap().pass);
    }

    #[test]
    fn golden_schema_mismatch() {
        let m = manifest(sample_rows());
        let mut short = m.clone();
        short.rows.pop();
        let baseline = emit(&short, Format::Csv).unwrap();
        assert!(matches!(
            compare_golden(&m, &baseline, 1e-9),
            Err(Error::SchemaMismatch(_))
        ));
        let mut bumped = m.clone();
        bumped.header.schema_version = 2;
        let baseline = emit(&bumped, Format::Json).unwrap();
        assert!(matches!(
            compare_golden(&m, &baseline, 1e-9),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn stochastic_note_parses() {
        let row = &sample_rows()[1];
        assert!(row.is_stochastic());
        assert_eq!(row.std_error(), Some(3.1e-7));
        assert!(!sample_rows()[0].is_stochastic());
    }
}
