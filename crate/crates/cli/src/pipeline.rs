//! Table loading, per-page extraction and the features file format.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use webcred::features::{
    assemble_features, parse_timestamp, query_archive, ArchiveClient, CdxArchive, DomainVocab, Extraction,
    FeatureConfig, FixtureArchive, LexiconTable, OpenSourcesList, RankTable, Resources,
};
use webcred::ingest::{parse_html, ParsedPage, RawDocument};
use webcred::learn::schema_fingerprint;

use crate::config::TablesConfig;
use crate::Failure;

pub const FEATURES_FORMAT: &str = "webcred-features/1";
pub const TABLE_NAMES: [&str; 5] = ["gi", "valence", "opensources", "pagerank", "archive"];

/// External tables; `None` when disabled.
pub struct Tables {
    pub gi: Option<LexiconTable>,
    pub valence: Option<LexiconTable>,
    pub opensources: Option<OpenSourcesList>,
    pub ranks: Option<RankTable>,
    pub archive: Option<Box<dyn ArchiveClient>>,
    pub as_of: Option<DateTime<Utc>>,
}

fn read_table(dir: &Path, file: &str, name: &str) -> Result<String, Failure> {
    let path: PathBuf = dir.join(file);
    std::fs::read_to_string(&path).map_err(|e| {
        Failure::usage(format!(
            "table {name} not readable at {} ({e}); pass --disable {name} to run without it",
            path.display()
        ))
    })
}

impl Tables {
    pub fn load(cfg: &TablesConfig, timeout_secs: u64) -> Result<Self, Failure> {
        if let Some(bad) = cfg.disable.iter().find(|d| !TABLE_NAMES.contains(&d.as_str())) {
            return Err(Failure::usage(format!(
                "unknown table {bad:?} for --disable (expected one of {})",
                TABLE_NAMES.join(", ")
            )));
        }
        let on = |name: &str| !cfg.disable.iter().any(|d| d == name);
        let bad = |e: webcred::features::FeatureError| Failure::usage(e.to_string());
        let dir = &cfg.dir;
        let gi = on("gi")
            .then(|| LexiconTable::general_inquirer(&read_table(dir, &cfg.gi, "gi")?).map_err(bad))
            .transpose()?;
        let valence = on("valence")
            .then(|| LexiconTable::valence("valence", &read_table(dir, &cfg.valence, "valence")?).map_err(bad))
            .transpose()?;
        let opensources = on("opensources")
            .then(|| Ok::<_, Failure>(OpenSourcesList::parse(&read_table(dir, &cfg.opensources, "opensources")?)))
            .transpose()?;
        let ranks = on("pagerank")
            .then(|| RankTable::parse(&read_table(dir, &cfg.pagerank, "pagerank")?).map_err(bad))
            .transpose()?;
        let archive: Option<Box<dyn ArchiveClient>> = if !on("archive") {
            None
        } else if let Some(endpoint) = &cfg.archive_endpoint {
            Some(Box::new(CdxArchive::new(endpoint, timeout_secs).map_err(bad)?))
        } else {
            Some(Box::new(FixtureArchive::parse(&read_table(dir, &cfg.archive, "archive")?).map_err(bad)?))
        };
        let as_of = cfg
            .as_of
            .as_deref()
            .map(|s| parse_timestamp(s).ok_or_else(|| Failure::usage(format!("cannot parse as_of time {s:?}"))))
            .transpose()?;
        Ok(Tables {
            gi,
            valence,
            opensources,
            ranks,
            archive,
            as_of,
        })
    }

    pub fn resources<'a>(&'a self, vocab: &'a DomainVocab) -> Resources<'a> {
        Resources {
            gi: self.gi.as_ref(),
            valence: self.valence.as_ref(),
            opensources: self.opensources.as_ref(),
            ranks: self.ranks.as_ref(),
            ..Resources::bundled(vocab)
        }
    }

    /// Archive reference time: the configured one, else the latest fetch
    /// time among `docs`, so reruns over the same cache agree.
    pub fn reference_time<'d>(&self, docs: impl Iterator<Item = &'d RawDocument>) -> DateTime<Utc> {
        self.as_of
            .or_else(|| docs.filter_map(|d| d.fetched_at).max())
            .unwrap_or(DateTime::<Utc>::UNIX_EPOCH)
    }
}

/// Parses a document and extracts its features.
pub fn extract_page(
    doc: &RawDocument,
    tables: &Tables,
    res: &Resources<'_>,
    features: &FeatureConfig,
    as_of: DateTime<Utc>,
) -> Result<(ParsedPage, Extraction), String> {
    let page = parse_html(doc).map_err(|e| e.to_string())?;
    let timeline = tables.archive.as_deref().and_then(|client| match query_archive(&page.url, client, as_of) {
        Ok(t) => Some(t),
        Err(e) => {
            log::warn!("{}: {e}", page.url);
            None
        }
    });
    let ex = assemble_features(&page, timeline.as_ref(), res, features);
    Ok((page, ex))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturesHeader {
    pub format: String,
    pub schema: Vec<String>,
    pub schema_version: String,
    pub domain_vocab: BTreeMap<String, u32>,
    pub as_of: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub url: String,
    pub schema_version: String,
    pub values: Vec<f64>,
    pub provenance: Vec<String>,
}

pub struct FeaturesFile {
    pub header: FeaturesHeader,
    pub records: Vec<FeatureRecord>,
}

impl FeaturesFile {
    pub fn new(schema: Vec<String>, vocab: &DomainVocab, as_of: DateTime<Utc>) -> Self {
        FeaturesFile {
            header: FeaturesHeader {
                format: FEATURES_FORMAT.into(),
                schema_version: schema_fingerprint(&schema),
                schema,
                domain_vocab: vocab.as_map().clone(),
                as_of: as_of.to_rfc3339_opts(SecondsFormat::Secs, true),
            },
            records: Vec::new(),
        }
    }

    /// Header line then records sorted by URL, one JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut records: Vec<&FeatureRecord> = self.records.iter().collect();
        records.sort_by(|a, b| a.url.cmp(&b.url));
        let mut s = serde_json::to_string(&self.header).expect("header serializes");
        s.push('\n');
        for r in records {
            s.push_str(&serde_json::to_string(r).expect("record serializes"));
            s.push('\n');
        }
        s
    }

    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read features file {}: {e}", path.display())))?;
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let bad = |n: usize, e: String| Failure::usage(format!("{} line {}: {e}", path.display(), n + 1));
        let (n, first) = lines.next().ok_or_else(|| bad(0, "empty features file".into()))?;
        let header: FeaturesHeader = serde_json::from_str(first).map_err(|e| bad(n, e.to_string()))?;
        if header.format != FEATURES_FORMAT {
            return Err(bad(n, format!("unsupported format {:?}", header.format)));
        }
        if header.schema_version != schema_fingerprint(&header.schema) {
            return Err(bad(n, "schema_version does not match schema".into()));
        }
        let mut records = Vec::new();
        for (n, line) in lines {
            let r: FeatureRecord = serde_json::from_str(line).map_err(|e| bad(n, e.to_string()))?;
            if r.schema_version != header.schema_version || r.values.len() != header.schema.len() {
                return Err(bad(n, format!("record for {} does not match the header schema", r.url)));
            }
            records.push(r);
        }
        Ok(FeaturesFile { header, records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip_sorts_records() {
        let schema = vec!["a".to_string(), "b".to_string()];
        let vocab = DomainVocab::build(&["https://x.org/"]);
        let mut f = FeaturesFile::new(schema.clone(), &vocab, DateTime::<Utc>::UNIX_EPOCH);
        for url in ["https://b.org/", "https://a.org/"] {
            f.records.push(FeatureRecord {
                url: url.into(),
                schema_version: f.header.schema_version.clone(),
                values: vec![0.1, 1e-300],
                provenance: vec![],
            });
        }
        let text = f.to_jsonl();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.jsonl");
        std::fs::write(&p, &text).unwrap();
        let back = FeaturesFile::read(&p).unwrap();
        assert_eq!(back.records[0].url, "https://a.org/");
        assert_eq!(back.records[0].values, [0.1, 1e-300]);
        assert_eq!(back.to_jsonl(), text);
    }
}
