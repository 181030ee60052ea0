//! Catalog metadata client for a LibriVox-style JSON API.
//!
//! Pages are requested as `GET {base_url}?format=json&offset=N&limit=M`
//! (plus `language=` when filtering) and are expected to look like
//!
//! ```json
//! {"books": [{"id": "52", "title": "...", "language": "English",
//!             "sections": [{"id": "7", "listen_url": "https://...",
//!                           "readers": [{"reader_id": "123"}]}]}]}
//! ```
//!
//! Ids may be strings or integers. A response without `books` is an empty
//! page. Sections lacking an audio URL or readers are skipped with a
//! warning.

use std::collections::BTreeMap;
use std::thread;
use std::time::Duration;

use curate_core::catalog::{CatalogChapter, CatalogEntry};
use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogQuery {
    pub language: Option<String>,
    pub page_size: usize,
    /// Pages requested at once.
    pub concurrency: usize,
    /// Total attempts per page, including the first.
    pub max_attempts: u32,
    /// Delay before the first retry; doubles on each further retry.
    pub backoff: Duration,
    pub timeout: Duration,
}

impl Default for CatalogQuery {
    fn default() -> Self {
        CatalogQuery {
            language: None,
            page_size: 50,
            concurrency: 4,
            max_attempts: 3,
            backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchReport {
    pub pages: usize,
    pub retries: usize,
    pub duplicate_books: usize,
    pub chapters_skipped: usize,
    pub books_without_chapters: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Id {
    Text(String),
    Number(u64),
}

impl Id {
    fn into_string(self) -> String {
        match self {
            Id::Text(s) => s,
            Id::Number(n) => n.to_string(),
        }
    }
}

#[derive(Deserialize)]
struct Page {
    #[serde(default)]
    books: Vec<RawBook>,
}

#[derive(Deserialize)]
struct RawBook {
    id: Id,
    #[serde(default)]
    title: String,
    #[serde(default)]
    language: String,
    #[serde(default)]
    sections: Vec<RawSection>,
}

#[derive(Deserialize)]
struct RawSection {
    id: Id,
    #[serde(default)]
    listen_url: Option<String>,
    #[serde(default)]
    readers: Vec<RawReader>,
}

#[derive(Deserialize)]
struct RawReader {
    reader_id: Id,
}

enum Failure {
    Transient(String),
    Fatal(Error),
}

fn agent(q: &CatalogQuery) -> ureq::Agent {
    ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(q.timeout))
        .build()
        .into()
}

fn is_transient(e: &ureq::Error) -> bool {
    matches!(
        e,
        ureq::Error::Io(_)
            | ureq::Error::Timeout(_)
            | ureq::Error::ConnectionFailed
            | ureq::Error::HostNotFound
            | ureq::Error::BodyStalled
    )
}

fn get_once(
    agent: &ureq::Agent,
    base_url: &str,
    q: &CatalogQuery,
    offset: usize,
) -> std::result::Result<String, Failure> {
    let mut req = agent
        .get(base_url)
        .query("format", "json")
        .query("offset", offset.to_string())
        .query("limit", q.page_size.to_string());
    if let Some(lang) = &q.language {
        req = req.query("language", lang);
    }
    let fatal = |message: String| {
        Failure::Fatal(Error::HttpTransport {
            url: base_url.to_string(),
            attempts: 1,
            message,
        })
    };
    let mut resp = match req.call() {
        Ok(r) => r,
        Err(e) if is_transient(&e) => return Err(Failure::Transient(e.to_string())),
        Err(e) => return Err(fatal(e.to_string())),
    };
    let status = resp.status().as_u16();
    if status == 429 || status >= 500 {
        return Err(Failure::Transient(format!("HTTP {status}")));
    }
    if !(200..300).contains(&status) {
        return Err(Failure::Fatal(Error::HttpStatus {
            url: base_url.to_string(),
            status,
        }));
    }
    match resp.body_mut().read_to_string() {
        Ok(body) => Ok(body),
        Err(e) if is_transient(&e) => Err(Failure::Transient(e.to_string())),
        Err(e) => Err(fatal(e.to_string())),
    }
}

/// Fetches one page with retries; returns the body and the retry count.
fn get_page(agent: &ureq::Agent, base_url: &str, q: &CatalogQuery, offset: usize) -> Result<(String, usize)> {
    let mut delay = q.backoff;
    let attempts = q.max_attempts.max(1);
    let mut last = String::new();
    for attempt in 1..=attempts {
        match get_once(agent, base_url, q, offset) {
            Ok(body) => return Ok((body, attempt as usize - 1)),
            Err(Failure::Fatal(e)) => return Err(e),
            Err(Failure::Transient(msg)) => {
                warn!("offset {offset}: attempt {attempt}/{attempts} failed: {msg}");
                last = msg;
                if attempt < attempts {
                    thread::sleep(delay);
                    delay *= 2;
                }
            }
        }
    }
    Err(Error::HttpTransport {
        url: format!("{base_url} (offset {offset})"),
        attempts,
        message: last,
    })
}

fn parse_page(body: &str, url: &str, report: &mut FetchReport) -> Result<Vec<CatalogEntry>> {
    let page: Page = serde_json::from_str(body).map_err(|e| Error::Malformed {
        url: url.to_string(),
        message: e.to_string(),
    })?;
    let mut out = Vec::with_capacity(page.books.len());
    for b in page.books {
        let book_id = b.id.into_string();
        let mut chapters = Vec::with_capacity(b.sections.len());
        for s in b.sections {
            let chapter_id = s.id.into_string();
            let url = s.listen_url.filter(|u| !u.trim().is_empty());
            let reader_ids: Vec<String> = s.readers.into_iter().map(|r| r.reader_id.into_string()).collect();
            match url {
                Some(audio_url) if !reader_ids.is_empty() => chapters.push(CatalogChapter {
                    chapter_id,
                    audio_url,
                    reader_ids,
                }),
                Some(_) => {
                    warn!("book {book_id} chapter {chapter_id}: no readers, skipped");
                    report.chapters_skipped += 1;
                }
                None => {
                    warn!("book {book_id} chapter {chapter_id}: no audio URL, skipped");
                    report.chapters_skipped += 1;
                }
            }
        }
        out.push(CatalogEntry {
            book_id,
            title: b.title,
            language: b.language,
            chapters,
        });
    }
    Ok(out)
}

/// Orders numeric ids by value, before any non-numeric ids.
fn id_key(id: &str) -> (u8, u64, &str) {
    match id.parse::<u64>() {
        Ok(n) => (0, n, ""),
        Err(_) => (1, 0, id),
    }
}

/// Drains every page of the catalog. Entries are deduplicated by `book_id`
/// (first occurrence wins) and returned in id order.
pub fn fetch_catalog(base_url: &str, q: &CatalogQuery) -> Result<(Vec<CatalogEntry>, FetchReport)> {
    let agent = agent(q);
    let page_size = q.page_size.max(1);
    let q = &CatalogQuery { page_size, ..q.clone() };
    let mut report = FetchReport::default();
    let mut books: BTreeMap<String, CatalogEntry> = BTreeMap::new();
    let mut next_page = 0usize;
    loop {
        let wave: Vec<usize> = (next_page..next_page + q.concurrency.max(1)).collect();
        next_page += wave.len();
        let bodies: Vec<Result<(String, usize)>> = thread::scope(|s| {
            let handles: Vec<_> = wave
                .iter()
                .map(|&p| {
                    let agent = &agent;
                    s.spawn(move || get_page(agent, base_url, q, p * page_size))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("fetch thread")).collect()
        });
        let mut exhausted = false;
        for (page, body) in wave.iter().zip(bodies) {
            let (body, retries) = body?;
            report.pages += 1;
            report.retries += retries;
            let entries = parse_page(&body, &format!("{base_url} (offset {})", page * page_size), &mut report)?;
            if entries.len() < page_size {
                exhausted = true;
            }
            for e in entries {
                if books.contains_key(&e.book_id) {
                    report.duplicate_books += 1;
                } else {
                    books.insert(e.book_id.clone(), e);
                }
            }
        }
        if exhausted {
            break;
        }
    }
    let mut out: Vec<CatalogEntry> = books.into_values().collect();
    let before = out.len();
    out.retain(|e| !e.chapters.is_empty());
    report.books_without_chapters = before - out.len();
    out.sort_by(|a, b| id_key(&a.book_id).cmp(&id_key(&b.book_id)));
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn page_parsing() {
        let body = r#"{"books":[
            {"id":"1","title":"A","language":"English","sections":[
                {"id":10,"listen_url":"http://x/1.mp3","readers":[{"reader_id":5}]},
                {"id":11,"listen_url":"","readers":[{"reader_id":5}]},
                {"id":12,"listen_url":"http://x/3.mp3","readers":[]}]},
            {"id":2,"sections":[]}]}"#;
        let mut rep = FetchReport::default();
        let got = parse_page(body, "u", &mut rep).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].chapters.len(), 1);
        assert_eq!(got[0].chapters[0].reader_ids, ["5"]);
        assert_eq!(got[1].book_id, "2");
        assert_eq!(rep.chapters_skipped, 2);

        assert!(parse_page(r#"{"error":"No books found"}"#, "u", &mut rep)
            .unwrap()
            .is_empty());
        assert!(matches!(parse_page("{", "u", &mut rep), Err(Error::Malformed { .. })));
    }

    #[test]
    fn numeric_ids_sort_by_value() {
        let mut ids = vec!["10", "9", "b", "100", "a"];
        ids.sort_by_key(|s| id_key(s));
        assert_eq!(ids, ["9", "10", "100", "a", "b"]);
    }
}
