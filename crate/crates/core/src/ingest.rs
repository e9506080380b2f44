//! Newform coefficient records: JSON files, an on-disk cache and an LMFDB
//! client.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::express::TargetForm;

pub const DEFAULT_LMFDB_URL: &str = "https://www.lmfdb.org";
pub const LMFDB_URL_ENV: &str = "ETAFORGE_LMFDB_URL";
pub const CACHE_ENV: &str = "ETAFORGE_CACHE";
pub const DEFAULT_TIMEOUT_SECS: u64 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormSource {
    Lmfdb,
    File,
    Fixture,
}

/// Parts of a newform label `<level>.<weight>.<char>.<iso>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewformLabel {
    pub level: u64,
    pub weight: u64,
    pub character: String,
    pub orbit: String,
}

impl FromStr for NewformLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed newform label {s:?}"));
        let parts: Vec<&str> = s.split('.').collect();
        let [level, weight, character, orbit] = parts[..] else {
            return Err(bad());
        };
        let level: u64 = level.parse().map_err(|_| bad())?;
        let weight: u64 = weight.parse().map_err(|_| bad())?;
        let lower = |t: &str| !t.is_empty() && t.chars().all(|c| c.is_ascii_lowercase());
        if level == 0 || !lower(character) || !lower(orbit) {
            return Err(bad());
        }
        Ok(NewformLabel {
            level,
            weight,
            character: character.to_string(),
            orbit: orbit.to_string(),
        })
    }
}

impl fmt::Display for NewformLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}.{}", self.level, self.weight, self.character, self.orbit)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormRecord {
    pub label: String,
    pub level: u64,
    pub weight: u64,
    /// `an[i]` holds `a_{i+1}`.
    pub an: Vec<i64>,
    pub source: FormSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fetched_at: Option<DateTime<Utc>>,
}

impl FormRecord {
    /// Label/level/weight agreement, `a_1 = 1` and multiplicativity.
    pub fn validate(&self) -> Result<()> {
        let invalid = |message: String| Error::InvalidRecord {
            label: self.label.clone(),
            message,
        };
        let parsed: NewformLabel = self.label.parse()?;
        if parsed.level != self.level || parsed.weight != self.weight {
            return Err(invalid(format!(
                "label says level {} weight {}, record has level {} weight {}",
                parsed.level, parsed.weight, self.level, self.weight
            )));
        }
        match self.an.first() {
            Some(1) => {}
            Some(a1) => return Err(invalid(format!("a_1 = {a1}, expected 1"))),
            None => return Err(invalid("no coefficients".into())),
        }
        if let Some((m, n)) = multiplicativity_failure(&self.an) {
            return Err(invalid(format!("a_{} != a_{m} * a_{n}", m * n)));
        }
        Ok(())
    }

    pub fn target(&self) -> Result<TargetForm> {
        TargetForm::new(self.label.clone(), self.level, self.weight, self.an.clone())
    }

    /// Copy keeping only `a_1..a_len`.
    pub fn truncated(&self, len: usize) -> FormRecord {
        let mut r = self.clone();
        r.an.truncate(len);
        r
    }
}

/// First coprime pair `(m, n)` with `m, n > 1`, `mn <= an.len()` and
/// `a_{mn} != a_m a_n`.
pub fn multiplicativity_failure(an: &[i64]) -> Option<(usize, usize)> {
    let len = an.len();
    for m in 2..=len {
        for n in m + 1..=len / m {
            if gcd(m as u64, n as u64) == 1 && an[m * n - 1] as i128 != an[m - 1] as i128 * an[n - 1] as i128 {
                return Some((m, n));
            }
        }
    }
    None
}

pub fn load_form_file(path: impl AsRef<Path>) -> Result<FormRecord> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let record: FormRecord = serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    record.validate()?;
    Ok(record)
}

/// Writes through a temporary file in the same directory, so readers never
/// see a partial record.
pub fn save_form_file(record: &FormRecord, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string(record).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// `$ETAFORGE_CACHE`, else the platform data directory.
pub fn default_cache_dir() -> PathBuf {
    match std::env::var_os(CACHE_ENV) {
        Some(dir) => PathBuf::from(dir),
        None => dirs::data_dir()
            .unwrap_or_else(std::env::temp_dir)
            .join("etaforge"),
    }
}

/// One `<label>.json` per form.
#[derive(Clone, Debug)]
pub struct FormCache {
    dir: PathBuf,
}

impl FormCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FormCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, label: &str) -> PathBuf {
        self.dir.join(format!("{label}.json"))
    }

    /// Cached record with at least `min_coeffs` coefficients.
    pub fn load(&self, label: &str, min_coeffs: usize) -> Result<Option<FormRecord>> {
        let path = self.path_for(label);
        if !path.exists() {
            return Ok(None);
        }
        let record = load_form_file(&path)?;
        Ok((record.an.len() >= min_coeffs).then_some(record))
    }

    /// Stores without the timestamp so equal fetches give equal bytes.
    pub fn store(&self, record: &FormRecord) -> Result<()> {
        let mut r = record.clone();
        r.fetched_at = None;
        save_form_file(&r, self.path_for(&record.label))
    }
}

/// Directory of committed fixture records.
pub fn load_fixture(dir: impl AsRef<Path>, label: &str) -> Result<FormRecord> {
    let path = dir.as_ref().join(format!("{label}.json"));
    if !path.exists() {
        return Err(Error::LabelNotFound(label.to_string()));
    }
    load_form_file(path)
}

#[derive(Clone, Debug)]
pub struct LmfdbClient {
    base_url: String,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct ApiPage {
    data: Vec<ApiNewform>,
}

#[derive(Deserialize)]
struct ApiNewform {
    label: String,
    level: u64,
    weight: u64,
    dim: u64,
    #[serde(default)]
    traces: Vec<serde_json::Value>,
}

impl LmfdbClient {
    pub fn new(base_url: impl Into<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        LmfdbClient {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            agent,
        }
    }

    /// Base URL from `$ETAFORGE_LMFDB_URL` when set.
    pub fn from_env(timeout: Duration) -> Self {
        let base = std::env::var(LMFDB_URL_ENV).unwrap_or_else(|_| DEFAULT_LMFDB_URL.to_string());
        LmfdbClient::new(base, timeout)
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    /// Coefficients `a_1..a_{min_coeffs}` of a rational newform.
    pub fn fetch(&self, label: &str, min_coeffs: usize) -> Result<FormRecord> {
        let parsed: NewformLabel = label.parse()?;
        let url = format!(
            "{}/api/mf_newforms/?label={}&_format=json&_fields=label,level,weight,dim,traces",
            self.base_url, parsed
        );
        let mut resp = self
            .agent
            .get(&url)
            .call()
            .map_err(|e| Error::Network(format!("{url}: {e}")))?;
        let status = resp.status().as_u16();
        if status == 404 {
            return Err(Error::LabelNotFound(label.to_string()));
        }
        if status != 200 {
            return Err(Error::Network(format!("{url}: HTTP {status}")));
        }
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::Network(format!("{url}: {e}")))?;
        let page: ApiPage =
            serde_json::from_str(&body).map_err(|e| Error::Network(format!("{url}: bad response: {e}")))?;
        let form = page
            .data
            .into_iter()
            .find(|f| f.label == label)
            .ok_or_else(|| Error::LabelNotFound(label.to_string()))?;
        let invalid = |message: String| Error::InvalidRecord {
            label: label.to_string(),
            message,
        };
        if form.dim != 1 {
            return Err(invalid(format!("coefficient field has degree {}, only rational forms are supported", form.dim)));
        }
        let an: Vec<i64> = form
            .traces
            .iter()
            .map(|v| v.as_i64().ok_or_else(|| invalid(format!("coefficient {v} is not a rational integer"))))
            .collect::<Result<_>>()?;
        if an.len() < min_coeffs {
            return Err(Error::InsufficientCoefficients {
                label: label.to_string(),
                required: min_coeffs,
                available: an.len(),
            });
        }
        let record = FormRecord {
            label: form.label,
            level: form.level,
            weight: form.weight,
            an,
            source: FormSource::Lmfdb,
            fetched_at: Some(Utc::now()),
        }
        .truncated(min_coeffs);
        record.validate()?;
        Ok(record)
    }
}

/// Cache in front of the LMFDB client.
#[derive(Clone, Debug)]
pub struct Fetcher {
    pub client: LmfdbClient,
    pub cache: FormCache,
}

impl Fetcher {
    pub fn new(client: LmfdbClient, cache: FormCache) -> Self {
        Fetcher { client, cache }
    }

    /// Cached record if long enough, else fetched and cached.
    pub fn fetch_newform(&self, label: &str, min_coeffs: usize) -> Result<FormRecord> {
        label.parse::<NewformLabel>()?;
        if let Some(hit) = self.cache.load(label, min_coeffs)? {
            return Ok(hit);
        }
        let record = self.client.fetch(label, min_coeffs)?;
        self.cache.store(&record)?;
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> FormRecord {
        FormRecord {
            label: "11.2.a.a".into(),
            level: 11,
            weight: 2,
            an: vec![1, -2, -1, 2, 1, 2, -2, 0, -2, -2],
            source: FormSource::File,
            fetched_at: None,
        }
    }

    #[test]
    fn labels() {
        let l: NewformLabel = "35.2.a.a".parse().unwrap();
        assert_eq!((l.level, l.weight), (35, 2));
        assert_eq!(l.to_string(), "35.2.a.a");
        for bad in ["xyz", "11.2.a", "0.2.a.a", "11.2.A.a", "11.x.a.a", "11.2.a.a.b"] {
            assert!(matches!(bad.parse::<NewformLabel>(), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let mut r = record();
        r.fetched_at = Some(Utc::now());
        save_form_file(&r, &path).unwrap();
        assert_eq!(load_form_file(&path).unwrap(), r);
    }

    #[test]
    fn invariant_violations() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        let mut r = record();
        r.an[0] = 2;
        fs::write(&path, serde_json::to_string(&r).unwrap()).unwrap();
        assert!(matches!(load_form_file(&path), Err(Error::InvalidRecord { .. })));

        let mut r = record();
        r.an[5] = 3; // a_6 = a_2 a_3 = 2
        assert!(matches!(r.validate(), Err(Error::InvalidRecord { .. })));

        let mut r = record();
        r.label = "12.2.a.a".into();
        assert!(r.validate().is_err());

        fs::write(&path, "{\"label\": \"11.2.a.a\",\n \"level\": 11, \"weight\": 2, \"source\": \"file\"}").unwrap();
        match load_form_file(&path) {
            Err(Error::Schema { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("an"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn multiplicativity() {
        assert_eq!(multiplicativity_failure(&record().an), None);
        assert_eq!(multiplicativity_failure(&[1, 2, 3, 4, 5, 7]), Some((2, 3)));
    }

    #[test]
    fn cache_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FormCache::new(dir.path());
        let mut r = record();
        r.fetched_at = Some(Utc::now());
        cache.store(&r).unwrap();
        let first = fs::read(cache.path_for("11.2.a.a")).unwrap();
        r.fetched_at = Some(Utc::now() + chrono::Duration::seconds(5));
        cache.store(&r).unwrap();
        assert_eq!(fs::read(cache.path_for("11.2.a.a")).unwrap(), first);
        assert!(cache.load("11.2.a.a", 10).unwrap().is_some());
        assert!(cache.load("11.2.a.a", 11).unwrap().is_none());
    }
}
