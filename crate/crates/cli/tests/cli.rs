use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{TimeZone, Utc};
use webcred::ingest::{RawDocument, SnapshotStore};

fn tables_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../tables")
}

fn webcred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_webcred"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

/// Minimal HTTP/1.1 server answering from a fixed route table; `/loop`
/// redirects to itself.
fn serve(routes: HashMap<String, (u16, String)>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut first = String::new();
            if reader.read_line(&mut first).is_err() {
                continue;
            }
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).map_or(true, |n| n == 0) || line == "\r\n" {
                    break;
                }
            }
            let path = first.split_whitespace().nth(1).unwrap_or("/").to_string();
            let (status, extra, body) = if path == "/loop" {
                (302, "Location: /loop\r\n".to_string(), String::new())
            } else {
                match routes.get(&path) {
                    Some((s, b)) => (*s, "Content-Type: text/html; charset=utf-8\r\n".to_string(), b.clone()),
                    None => (404, String::new(), "missing".to_string()),
                }
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\n{extra}Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    base
}

fn config(dir: &Path) -> PathBuf {
    let p = dir.join("webcred.toml");
    std::fs::write(
        &p,
        format!(
            "cache_dir = \"cache\"\n[fetch]\nper_host_rps = 0.0\ntimeout_secs = 5\nmax_redirects = 3\n[tables]\ndir = {:?}\n",
            tables_dir()
        ),
    )
    .unwrap();
    p
}

fn page(i: usize, credible: bool) -> String {
    let topic = ["river ecology", "city budgets", "school meals", "rail timetables"][i % 4];
    let extra = if credible {
        "<p>Contact the editors at <a href=\"mailto:desk@example.org\">desk</a>.</p>\
         <footer>Copyright 2019 Example Press. <a href=\"/about\">About us</a> 12 Main Street</footer>"
    } else {
        "<p>Share this now!!! You will not believe it.</p>"
    };
    format!(
        "<html><head><title>Notes on {topic} {i}</title></head><body><h1>{topic}</h1>\
         <p>This report covers {topic} in some detail. Readers asked about {topic} last week.</p>{extra}</body></html>"
    )
}

/// Caches `n` pages, alternating labels, and writes a microsoft-format label file.
fn planted(dir: &Path, n: usize) -> (PathBuf, Vec<String>) {
    let mut store = SnapshotStore::open(dir.join("cache")).unwrap();
    let mut labels = String::from("url,rating\n");
    let mut urls = Vec::new();
    for i in 0..n {
        let credible = i % 2 == 0;
        let url = format!("https://site{i}.example.org/article");
        let mut doc = RawDocument::from_html(&url, &page(i, credible));
        doc.fetched_at = Some(Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap());
        store.store(&doc).unwrap();
        labels.push_str(&format!("{url},{}\n", if credible { 5 } else { 1 }));
        urls.push(url);
    }
    let lp = dir.join("labels.csv");
    std::fs::write(&lp, labels).unwrap();
    (lp, urls)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ingest_fetches_then_reuses_cache() {
    let routes = (0..3)
        .map(|i| (format!("/p{i}"), (200, page(i, true))))
        .collect::<HashMap<_, _>>();
    let base = serve(routes);
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let corpus = dir.path().join("urls.csv");
    std::fs::write(&corpus, format!("url\n{base}/p0\n{base}/p1\n{base}/p2\n")).unwrap();

    let o = webcred(&["--config", s(&cfg), "ingest", s(&corpus)]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(stdout(&o).starts_with("3 fetched, 0 cached"), "{}", stdout(&o));
    let o = webcred(&["--config", s(&cfg), "ingest", s(&corpus)]);
    assert!(stdout(&o).starts_with("0 fetched, 3 cached"), "{}", stdout(&o));

    std::fs::write(&corpus, format!("url\n{base}/gone\n{base}/loop\n")).unwrap();
    let o = webcred(&["--config", s(&cfg), "--cache-dir", s(&dir.path().join("other")), "ingest", s(&corpus)]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("failed") && out.contains("404") && out.contains("redirect"), "{out}");

    let o = webcred(&["--config", s(&cfg), "ingest", "/nonexistent/urls.csv"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn extract_is_deterministic_and_checks_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    planted(dir.path(), 3);
    let out = dir.path().join("f.jsonl");
    let o = webcred(&["--config", s(&cfg), "extract", "--disable", "archive", "-o", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<serde_json::Value> = first.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    let width = lines[0]["schema"].as_array().unwrap().len();
    for rec in &lines[1..] {
        assert_eq!(rec["values"].as_array().unwrap().len(), width);
        assert_eq!(rec["values"][0].as_f64(), Some(0.0));
        assert!(rec["provenance"].as_array().unwrap().iter().any(|n| n == "archive: unavailable, f_arc=0"));
    }
    let o = webcred(&["--config", s(&cfg), "extract", "--disable", "archive", "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), first);

    let o = webcred(&["--config", s(&cfg), "extract", "--tables", s(dir.path()), "-o", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--disable"));
}

#[test]
fn train_eval_score_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let (labels, urls) = planted(dir.path(), 30);
    let feats = dir.path().join("f.jsonl");
    assert_eq!(code(&webcred(&["--config", s(&cfg), "extract", "-o", s(&feats)])), 0);

    let record = dir.path().join("runs.jsonl");
    let o = webcred(&[
        "--config", s(&cfg), "eval", s(&feats), s(&labels), "--folds", "5", "--record", s(&record),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rec: serde_json::Value = serde_json::from_str(std::fs::read_to_string(&record).unwrap().trim()).unwrap();
    assert_eq!(rec["metrics"]["weighted"]["f1"].as_f64(), Some(1.0), "{}", stdout(&o));

    let (a1, a2) = (dir.path().join("m1.json"), dir.path().join("m2.json"));
    for a in [&a1, &a2] {
        let o = webcred(&["--config", s(&cfg), "--seed", "3", "train", s(&feats), s(&labels), "-o", s(a)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a1).unwrap(), std::fs::read(&a2).unwrap());

    let o = webcred(&["--config", s(&cfg), "eval", s(&feats), s(&labels), "--scheme", "four_class"]);
    assert_eq!(code(&o), 2);

    let score = |url: &str| webcred(&["--config", s(&cfg), "score", s(&a1), url, "--no-fetch"]);
    let (o1, o2) = (score(&urls[0]), score(&urls[0]));
    assert_eq!(code(&o1), 0, "{}", String::from_utf8_lossy(&o1.stderr));
    assert_eq!(stdout(&o1), stdout(&o2));
    assert!(stdout(&o1).contains("prediction high"), "{}", stdout(&o1));
    assert!(stdout(&score(&urls[1])).contains("prediction low"));
    assert_eq!(code(&score("https://uncached.example.org/")), 1);

    let other = dir.path().join("other.toml");
    let text = std::fs::read_to_string(&cfg).unwrap();
    std::fs::write(&other, format!("{text}[features]\nsocial_markers = [\"share\"]\n")).unwrap();
    let o = webcred(&["--config", s(&other), "score", s(&a1), &urls[0]]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn score_fetches_uncached_pages() {
    let base = serve(HashMap::from([("/new".to_string(), (200, page(1, true)))]));
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let (labels, _) = planted(dir.path(), 12);
    let feats = dir.path().join("f.jsonl");
    let model = dir.path().join("m.json");
    assert_eq!(code(&webcred(&["--config", s(&cfg), "extract", "-o", s(&feats)])), 0);
    let o = webcred(&["--config", s(&cfg), "train", s(&feats), s(&labels), "--learner", "nb", "-o", s(&model)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = webcred(&["--config", s(&cfg), "score", s(&model), &format!("{base}/new")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("p(high)"));
    assert_eq!(code(&webcred(&["--config", s(&cfg), "score", s(&model), &format!("{base}/none")])), 1);
}

#[test]
fn sweep_rows_and_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let (labels, _) = planted(dir.path(), 20);
    let plot = dir.path().join("plot.dat");
    let o = webcred(&[
        "--config", s(&cfg), "sweep", s(&labels), "--grid", "100,25", "--folds", "5", "--plot", s(&plot),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<String> = stdout(&o).lines().skip(2).map(str::to_string).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].trim_start().starts_with("25 "));
    assert_eq!(std::fs::read_to_string(&plot).unwrap().lines().count(), 3);
    let o = webcred(&["--config", s(&cfg), "sweep", s(&labels), "--grid"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn factcheck_table_and_missing_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let (labels, urls) = planted(dir.path(), 12);
    let feats = dir.path().join("f.jsonl");
    let model = dir.path().join("m.json");
    assert_eq!(code(&webcred(&["--config", s(&cfg), "extract", "-o", s(&feats)])), 0);
    assert_eq!(code(&webcred(&["--config", s(&cfg), "train", s(&feats), s(&labels), "-o", s(&model)])), 0);

    let ev = dir.path().join("evidence.csv");
    let mut text = String::from("claim_id,truth,url,annotation\n");
    for (i, u) in urls.iter().enumerate() {
        let ann = if i % 2 == 0 { "credible" } else { "non-credible" };
        text.push_str(&format!("c{},{},{u},{ann}\n", i % 3, if i % 3 == 0 { "true" } else { "false" }));
    }
    std::fs::write(&ev, &text).unwrap();
    let o = webcred(&["--config", s(&cfg), "factcheck", s(&ev), s(&model)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.lines().next().unwrap().contains("non-cred"));
    assert!(out.lines().any(|l| l.starts_with("true ")) && out.lines().any(|l| l.starts_with("false ")), "{out}");

    text.push_str("c9,true,https://uncached.example.org/,credible\n");
    std::fs::write(&ev, &text).unwrap();
    let o = webcred(&["--config", s(&cfg), "factcheck", s(&ev), s(&model)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("https://uncached.example.org/"));

    std::fs::write(&ev, "").unwrap();
    let o = webcred(&["--config", s(&cfg), "factcheck", s(&ev), s(&model)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("no annotated evidence"));
}
