//! Rated URL corpora, claim-evidence files and the fact-checking impact
//! report.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{normalize_url, parse_html, IngestError, SnapshotStore};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct RowError {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Row(#[from] RowError),
    #[error("missing column {0:?} in header")]
    Header(String),
    #[error("no ratings to aggregate")]
    EmptyRatings,
    #[error("no prediction for {} annotated URL(s): {}", urls.len(), urls.join(", "))]
    IncompleteReport { urls: Vec<String> },
    #[error("unknown corpus format {0:?} (expected microsoft or c3)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatedFormat {
    /// `url,rating`: one rating per URL.
    Microsoft,
    /// `url,rating,rater_id`: one row per rater.
    C3,
}

impl RatedFormat {
    pub fn from_name(name: &str) -> Result<Self, CorpusError> {
        match name {
            "microsoft" => Ok(RatedFormat::Microsoft),
            "c3" => Ok(RatedFormat::C3),
            other => Err(CorpusError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Mean rounded half-up.
    #[default]
    Mean,
    /// Median; an even count averages the middle pair, rounded half-up.
    Median,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatedUrl {
    pub url: String,
    pub ratings: Vec<i64>,
    pub aggregated: i64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadedCorpus {
    /// Grouped by URL, in order of first appearance.
    pub items: Vec<RatedUrl>,
    /// Rows dropped when skipping is enabled.
    pub skipped: Vec<RowError>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    pub skip_bad_rows: bool,
    pub aggregation: Aggregation,
}

fn half_up(num: i64, den: i64) -> i64 {
    (2 * num + den).div_euclid(2 * den)
}

/// Aggregated Likert rating, always within 1..=5.
pub fn aggregate_ratings(ratings: &[i64], how: Aggregation) -> Result<i64, CorpusError> {
    if ratings.is_empty() {
        return Err(CorpusError::EmptyRatings);
    }
    let v = match how {
        Aggregation::Mean => half_up(ratings.iter().sum(), ratings.len() as i64),
        Aggregation::Median => {
            let mut s = ratings.to_vec();
            s.sort_unstable();
            let n = s.len();
            if n % 2 == 1 {
                s[n / 2]
            } else {
                half_up(s[n / 2 - 1] + s[n / 2], 2)
            }
        }
    };
    Ok(v.clamp(1, 5))
}

fn sniff_delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    [b'\t', b';', b','].into_iter().max_by_key(|&d| header.bytes().filter(|&b| b == d).count()).filter(|&d| header.as_bytes().contains(&d)).unwrap_or(b',')
}

struct Table {
    columns: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

fn read_table(text: &str) -> Result<Table, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(text))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let columns = rdr
        .headers()
        .map_err(|e| RowError { line: 1, reason: e.to_string() })?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| RowError {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, rec));
    }
    Ok(Table { columns, rows })
}

impl Table {
    fn column(&self, name: &str) -> Result<usize, CorpusError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CorpusError::Header(name.to_string()))
    }
}

fn field<'a>(rec: &'a csv::StringRecord, i: usize, line: u64, name: &str) -> Result<&'a str, RowError> {
    rec.get(i).filter(|s| !s.is_empty()).ok_or_else(|| RowError {
        line,
        reason: format!("missing {name}"),
    })
}

fn parse_rating(s: &str, line: u64) -> Result<i64, RowError> {
    let v = s
        .parse::<i64>()
        .ok()
        .or_else(|| s.parse::<f64>().ok().filter(|f| f.fract() == 0.0).map(|f| f as i64))
        .ok_or_else(|| RowError {
            line,
            reason: format!("rating {s:?} is not an integer"),
        })?;
    if !(1..=5).contains(&v) {
        return Err(RowError {
            line,
            reason: format!("rating {v} outside 1..=5"),
        });
    }
    Ok(v)
}

fn parse_url(s: &str, line: u64) -> Result<String, RowError> {
    normalize_url(s).map_err(|e| RowError {
        line,
        reason: e.to_string(),
    })
}

/// Parses a rated corpus from delimiter-separated text with a header.
pub fn parse_rated_corpus(text: &str, format: RatedFormat, opts: LoadOptions) -> Result<LoadedCorpus, CorpusError> {
    let table = read_table(text)?;
    let url_col = table.column("url")?;
    let rating_col = table.column("rating")?;
    if format == RatedFormat::C3 {
        table.column("rater_id")?;
    }
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<i64>> = HashMap::new();
    let mut skipped = Vec::new();
    for (line, rec) in &table.rows {
        let parsed = field(rec, url_col, *line, "url")
            .and_then(|u| parse_url(u, *line))
            .and_then(|u| Ok((u, parse_rating(field(rec, rating_col, *line, "rating")?, *line)?)));
        match parsed {
            Ok((url, rating)) => {
                groups
                    .entry(url.clone())
                    .or_insert_with(|| {
                        order.push(url);
                        Vec::new()
                    })
                    .push(rating);
            }
            Err(e) if opts.skip_bad_rows => skipped.push(e),
            Err(e) => return Err(e.into()),
        }
    }
    let items = order
        .into_iter()
        .map(|url| {
            let ratings = groups.remove(&url).expect("grouped");
            let aggregated = aggregate_ratings(&ratings, opts.aggregation)?;
            Ok(RatedUrl {
                url,
                ratings,
                aggregated,
            })
        })
        .collect::<Result<_, CorpusError>>()?;
    Ok(LoadedCorpus { items, skipped })
}

fn read_file(path: &Path) -> Result<String, CorpusError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

pub fn load_rated_corpus(path: &Path, format: RatedFormat, opts: LoadOptions) -> Result<LoadedCorpus, CorpusError> {
    parse_rated_corpus(&read_file(path)?, format, opts)
}

/// Normalized URLs from the `url` column of any delimited file with a
/// header, deduplicated in order of first appearance.
pub fn parse_url_list(text: &str) -> Result<Vec<String>, CorpusError> {
    let table = read_table(text)?;
    let col = table.column("url")?;
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (line, rec) in &table.rows {
        let url = parse_url(field(rec, col, *line, "url")?, *line)?;
        if seen.insert(url.clone()) {
            out.push(url);
        }
    }
    Ok(out)
}

/// Why a rated URL cannot be used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub url: String,
    pub reason: String,
}

/// Splits a corpus into URLs whose cached page loads and parses, and an
/// exclusion list for the rest.
pub fn validate_corpus(items: &[RatedUrl], store: &SnapshotStore) -> (Vec<RatedUrl>, Vec<Exclusion>) {
    let mut usable = Vec::new();
    let mut excluded = Vec::new();
    for item in items {
        let reason = match store.load(&item.url) {
            Err(IngestError::NotCached(_)) => Some("not cached".to_string()),
            Err(e) => Some(e.to_string()),
            Ok(doc) => match parse_html(&doc) {
                Err(e) => Some(format!("invalid file format: {e}")),
                Ok(_) => None,
            },
        };
        match reason {
            None => usable.push(item.clone()),
            Some(reason) => excluded.push(Exclusion {
                url: item.url.clone(),
                reason,
            }),
        }
    }
    (usable, excluded)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Credibility {
    Credible,
    NonCredible,
}

impl Credibility {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "credible" | "cred" => Some(Credibility::Credible),
            "non-credible" | "noncredible" | "non-cred" => Some(Credibility::NonCredible),
            _ => None,
        }
    }

    /// Two-class mapping: low is non-credible.
    pub fn from_two_class(label: &str) -> Option<Self> {
        match label {
            "low" => Some(Credibility::NonCredible),
            "high" => Some(Credibility::Credible),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub url: String,
    pub annotation: Option<Credibility>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimEvidence {
    pub claim_id: String,
    pub truth: bool,
    pub evidence: Vec<Evidence>,
}

/// Parses `claim_id,truth,url[,annotation]` rows, grouped by claim in
/// order of first appearance.
pub fn parse_claim_evidence(text: &str) -> Result<Vec<ClaimEvidence>, CorpusError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let table = read_table(text)?;
    let (id_col, truth_col, url_col) = (table.column("claim_id")?, table.column("truth")?, table.column("url")?);
    let ann_col = table.column("annotation").ok();
    let mut claims: Vec<ClaimEvidence> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (line, rec) in &table.rows {
        let line = *line;
        let id = field(rec, id_col, line, "claim_id")?;
        let truth = match field(rec, truth_col, line, "truth")?.to_ascii_lowercase().as_str() {
            "true" => true,
            "false" => false,
            other => {
                return Err(RowError {
                    line,
                    reason: format!("unknown truth label {other:?}"),
                }
                .into())
            }
        };
        let url = parse_url(field(rec, url_col, line, "url")?, line)?;
        let annotation = match ann_col.and_then(|c| rec.get(c)).filter(|s| !s.is_empty()) {
            None => None,
            Some(a) => Some(Credibility::parse(a).ok_or_else(|| RowError {
                line,
                reason: format!("unknown annotation {a:?}"),
            })?),
        };
        let slot = *index.entry(id.to_string()).or_insert_with(|| {
            claims.push(ClaimEvidence {
                claim_id: id.to_string(),
                truth,
                evidence: Vec::new(),
            });
            claims.len() - 1
        });
        if claims[slot].truth != truth {
            return Err(RowError {
                line,
                reason: format!("claim {id} has conflicting truth labels"),
            }
            .into());
        }
        claims[slot].evidence.push(Evidence { url, annotation });
    }
    Ok(claims)
}

pub fn load_claim_evidence(path: &Path) -> Result<Vec<ClaimEvidence>, CorpusError> {
    parse_claim_evidence(&read_file(path)?)
}

/// Annotated and correctly predicted counts for one annotation class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub annotated: usize,
    pub correct: usize,
}

impl Agreement {
    /// Exact share of annotated URLs the model labels correctly; 0 when
    /// nothing is annotated.
    pub fn fraction(&self) -> f64 {
        if self.annotated == 0 {
            0.0
        } else {
            self.correct as f64 / self.annotated as f64
        }
    }

    /// The fraction truncated to two decimals.
    pub fn display(&self) -> String {
        if self.annotated == 0 {
            return "-".into();
        }
        let hundredths = 100 * self.correct / self.annotated;
        format!("{}.{:02}", hundredths / 100, hundredths % 100)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactcheckRow {
    pub truth: bool,
    pub claims: usize,
    pub sites: usize,
    pub non_credible: Agreement,
    pub credible: Agreement,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FactcheckReport {
    /// `true` row first, then `false`; labels without claims are omitted.
    pub rows: Vec<FactcheckRow>,
}

/// Agreement between human annotations and model predictions per claim
/// truth label.
pub fn factcheck_report(
    evidence: &[ClaimEvidence],
    predictions: &HashMap<String, Credibility>,
) -> Result<FactcheckReport, CorpusError> {
    let mut missing: Vec<String> = evidence
        .iter()
        .flat_map(|c| &c.evidence)
        .filter(|e| e.annotation.is_some() && !predictions.contains_key(&e.url))
        .map(|e| e.url.clone())
        .collect();
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(CorpusError::IncompleteReport { urls: missing });
    }
    let mut rows: BTreeMap<std::cmp::Reverse<bool>, FactcheckRow> = BTreeMap::new();
    for claim in evidence {
        let row = rows.entry(std::cmp::Reverse(claim.truth)).or_insert(FactcheckRow {
            truth: claim.truth,
            claims: 0,
            sites: 0,
            non_credible: Agreement::default(),
            credible: Agreement::default(),
        });
        row.claims += 1;
        row.sites += claim.evidence.len();
        for e in &claim.evidence {
            let Some(ann) = e.annotation else { continue };
            let slot = match ann {
                Credibility::Credible => &mut row.credible,
                Credibility::NonCredible => &mut row.non_credible,
            };
            slot.annotated += 1;
            slot.correct += usize::from(predictions[&e.url] == ann);
        }
    }
    Ok(FactcheckReport {
        rows: rows.into_values().collect(),
    })
}

impl FactcheckReport {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<6} {:>6} {:>6} {:>9} {:>5} {:>9} {:>5}", "label", "claims", "sites", "non-cred", "%", "cred", "%");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<6} {:>6} {:>6} {:>4}/{:<4} {:>5} {:>4}/{:<4} {:>5}",
                r.truth,
                r.claims,
                r.sites,
                r.non_credible.correct,
                r.non_credible.annotated,
                r.non_credible.display(),
                r.credible.correct,
                r.credible.annotated,
                r.credible.display()
            );
        }
        if self.rows.is_empty() {
            s.push_str("no annotated evidence\n");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn c3_grouping_and_aggregation() {
        let c = parse_rated_corpus(
            "url,rating,rater_id\nhttp://A.org/x#frag,4,r1\nhttp://a.org/x,5,r2\nhttp://b.org/,3,r1\n",
            RatedFormat::C3,
            LoadOptions::default(),
        )
        .unwrap();
        assert_eq!(c.items.len(), 2);
        assert_eq!(c.items[0].url, "http://a.org/x");
        assert_eq!(c.items[0].ratings, [4, 5]);
        assert_eq!(c.items[0].aggregated, 5);
        assert_eq!(c.items[1].aggregated, 3);
    }

    #[test]
    fn microsoft_rows_and_guards() {
        let c = parse_rated_corpus("url\trating\nhttps://x.com/?q=1\t3\n", RatedFormat::Microsoft, LoadOptions::default()).unwrap();
        assert_eq!(c.items, [RatedUrl { url: "https://x.com/?q=1".into(), ratings: vec![3], aggregated: 3 }]);
        let err = parse_rated_corpus("url,rating\nhttps://x.com/,7\n", RatedFormat::Microsoft, LoadOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::Row(RowError { line: 2, .. })), "{err}");
        let skip = LoadOptions { skip_bad_rows: true, ..LoadOptions::default() };
        let c = parse_rated_corpus("url,rating\nhttps://x.com/,7\nhttps://y.com/,2\n,3\n", RatedFormat::Microsoft, skip).unwrap();
        assert_eq!(c.items.len(), 1);
        assert_eq!(c.skipped.iter().map(|e| e.line).collect::<Vec<_>>(), [2, 4]);
        assert!(matches!(
            parse_rated_corpus("url,score\n", RatedFormat::Microsoft, LoadOptions::default()),
            Err(CorpusError::Header(_))
        ));
        assert!(parse_rated_corpus("url,rating\n", RatedFormat::C3, LoadOptions::default()).is_err());
    }

    #[test]
    fn aggregation_rules() {
        assert_eq!(aggregate_ratings(&[4, 5], Aggregation::Mean).unwrap(), 5);
        assert_eq!(aggregate_ratings(&[3], Aggregation::Mean).unwrap(), 3);
        assert_eq!(aggregate_ratings(&[1, 2, 2], Aggregation::Mean).unwrap(), 2);
        assert_eq!(aggregate_ratings(&[1, 1, 2], Aggregation::Mean).unwrap(), 1);
        assert_eq!(aggregate_ratings(&[1, 5, 5, 1, 1], Aggregation::Median).unwrap(), 1);
        assert_eq!(aggregate_ratings(&[2, 3], Aggregation::Median).unwrap(), 3);
        assert!(matches!(aggregate_ratings(&[], Aggregation::Mean), Err(CorpusError::EmptyRatings)));
    }

    #[test]
    fn url_list_dedups() {
        let urls = parse_url_list("claim_id,url\nc1,http://A.com/#x\nc2,http://a.com/\nc3,https://b.org/p\n").unwrap();
        assert_eq!(urls, ["http://a.com/", "https://b.org/p"]);
        assert!(parse_url_list("id\n1\n").is_err());
    }

    #[test]
    fn claim_grouping() {
        let text = "claim_id,truth,url\nc1,true,http://a.com/\nc1,true,http://b.com/\nc1,true,http://c.com/\n\
                    c2,false,http://d.com/\nc2,false,http://e.com/\nc2,false,http://f.com/\n";
        let claims = parse_claim_evidence(text).unwrap();
        assert_eq!(claims.len(), 2);
        assert!(claims.iter().all(|c| c.evidence.len() == 3 && c.evidence.iter().all(|e| e.annotation.is_none())));
        assert!(parse_claim_evidence("claim_id,truth,url\nc1,unknown,http://a.com/\n").is_err());
        assert!(parse_claim_evidence("").unwrap().is_empty());
    }

    fn synthetic(truth: bool, start: usize, nc: (usize, usize), c: (usize, usize)) -> (ClaimEvidence, Vec<(String, Credibility)>) {
        let mut ev = Vec::new();
        let mut preds = Vec::new();
        let mut add = |ann: Credibility, total: usize, correct: usize, tag: &str| {
            for i in 0..total {
                let url = format!("https://{tag}{}.example/{i}", start);
                let other = if ann == Credibility::Credible { Credibility::NonCredible } else { Credibility::Credible };
                preds.push((url.clone(), if i < correct { ann } else { other }));
                ev.push(Evidence { url, annotation: Some(ann) });
            }
        };
        add(Credibility::NonCredible, nc.0, nc.1, "n");
        add(Credibility::Credible, c.0, c.1, "c");
        (ClaimEvidence { claim_id: format!("claim{start}"), truth, evidence: ev }, preds)
    }

    #[test]
    fn report_counts_and_truncation() {
        let (t, mut p) = synthetic(true, 1, (57, 40), (39, 31));
        let (f, p2) = synthetic(false, 2, (48, 34), (32, 24));
        p.extend(p2);
        let preds: HashMap<String, Credibility> = p.into_iter().collect();
        let r = factcheck_report(&[t, f], &preds).unwrap();
        assert!(r.rows[0].truth && !r.rows[1].truth);
        assert_eq!(r.rows[0].credible.display(), "0.79");
        assert_eq!(r.rows[1].non_credible.display(), "0.70");
        assert_eq!(r.rows[1].credible.display(), "0.75");
        assert!((r.rows[0].non_credible.fraction() - 40.0 / 57.0).abs() < 1e-15);
        assert_eq!(r.rows[0].non_credible.display(), "0.70");
    }

    #[test]
    fn missing_predictions_are_listed() {
        let (t, _) = synthetic(true, 1, (2, 1), (0, 0));
        let err = factcheck_report(&[t], &HashMap::new()).unwrap_err();
        let CorpusError::IncompleteReport { urls } = err else { panic!() };
        assert_eq!(urls.len(), 2);
        assert_eq!(factcheck_report(&[], &HashMap::new()).unwrap().rows.len(), 0);
    }

    proptest! {
        #[test]
        fn loader_is_lossless(rows in prop::collection::vec((0usize..6, 1i64..=5), 1..40)) {
            let mut text = String::from("url,rating,rater_id\n");
            for (i, (u, r)) in rows.iter().enumerate() {
                text.push_str(&format!("https://site{u}.org/,{r},rater{i}\n"));
            }
            let c = parse_rated_corpus(&text, RatedFormat::C3, LoadOptions::default()).unwrap();
            prop_assert_eq!(c.items.iter().map(|i| i.ratings.len()).sum::<usize>(), rows.len());
            for item in &c.items {
                prop_assert!((1..=5).contains(&item.aggregated));
            }
        }

        #[test]
        fn single_rating_is_fixed_point(r in 1i64..=5) {
            prop_assert_eq!(aggregate_ratings(&[r], Aggregation::Mean).unwrap(), r);
            prop_assert_eq!(aggregate_ratings(&[r], Aggregation::Median).unwrap(), r);
        }
    }
}
