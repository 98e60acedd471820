//! arXiv Atom listing client with a serialized, rate-limited request queue.

use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use quick_xml::events::Event;
use quick_xml::Reader;
use tracing::debug;

use super::{ArticleMeta, CorpusError, DateWindow, Domain};

pub const ARXIV_API_URL: &str = "https://export.arxiv.org/api/query";

/// Monotonic time source; swapped for a virtual clock in tests.
pub trait Clock: Send + Sync {
    /// Time elapsed since an arbitrary fixed origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

#[derive(Debug, Clone)]
pub struct TransportError {
    pub message: String,
    pub retryable: bool,
}

/// Byte-level GET, abstracted so feeds can come from fixtures.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> Result<Vec<u8>, TransportError>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .user_agent(concat!("arxivroll/", env!("CARGO_PKG_VERSION")))
            .build()
            .into();
        Self { agent }
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &str) -> Result<Vec<u8>, TransportError> {
        let mut resp = self.agent.get(url).call().map_err(|e| TransportError {
            message: e.to_string(),
            retryable: true,
        })?;
        let status = resp.status().as_u16();
        if status != 200 {
            return Err(TransportError {
                message: format!("HTTP {status}"),
                retryable: status == 429 || status >= 500,
            });
        }
        resp.body_mut()
            .with_config()
            .limit(256 * 1024 * 1024)
            .read_to_vec()
            .map_err(|e| TransportError {
                message: e.to_string(),
                retryable: true,
            })
    }
}

#[derive(Debug, Clone)]
pub struct ListingConfig {
    /// Query endpoint; point it at a mirror for offline use.
    pub base_url: String,
    /// Source endpoint, `<source_url>/<arxiv_id>` returns the e-print payload.
    pub source_url: String,
    pub page_size: usize,
    pub min_delay: Duration,
    pub max_attempts: u32,
}

impl Default for ListingConfig {
    fn default() -> Self {
        Self {
            base_url: ARXIV_API_URL.to_string(),
            source_url: "https://arxiv.org/e-print".to_string(),
            page_size: 100,
            min_delay: Duration::from_secs(3),
            max_attempts: 3,
        }
    }
}

/// One feed entry: article metadata plus its abstract.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListingEntry {
    pub meta: ArticleMeta,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListingPage {
    /// Entries inside the requested window, in feed order.
    pub entries: Vec<ListingEntry>,
    /// Entries present in the feed before window filtering; zero marks the
    /// end of the listing.
    pub raw_entries: usize,
}

pub struct ListingClient<T: Transport, C: Clock> {
    config: ListingConfig,
    transport: T,
    clock: Arc<C>,
    /// Time of the last request; holding the lock serializes all requests.
    last_request: Mutex<Option<Duration>>,
}

impl<T: Transport, C: Clock> ListingClient<T, C> {
    pub fn new(config: ListingConfig, transport: T, clock: Arc<C>) -> Self {
        Self {
            config,
            transport,
            clock,
            last_request: Mutex::new(None),
        }
    }

    pub fn config(&self) -> &ListingConfig {
        &self.config
    }

    /// Fetches one page of the listing for `domain`, keeping only entries
    /// whose submission date falls in `window`.
    pub fn fetch_listing(
        &self,
        domain: Domain,
        window: DateWindow,
        page: usize,
    ) -> Result<ListingPage, CorpusError> {
        let url = self.listing_url(domain, window, page);
        let body = self.get(&url)?;
        let entries = parse_feed(&body)?;
        let raw_entries = entries.len();
        let entries = entries
            .into_iter()
            .filter(|e| window.contains(e.meta.submitted))
            .map(|mut e| {
                e.meta.domain = domain;
                e
            })
            .collect();
        Ok(ListingPage {
            entries,
            raw_entries,
        })
    }

    /// Downloads the e-print payload of one article.
    pub fn fetch_source(&self, arxiv_id: &str) -> Result<Vec<u8>, CorpusError> {
        let url = format!(
            "{}/{}",
            self.config.source_url.trim_end_matches('/'),
            arxiv_id
        );
        self.get(&url)
    }

    pub fn listing_url(&self, domain: Domain, window: DateWindow, page: usize) -> String {
        let cats = domain
            .category_patterns()
            .iter()
            .map(|c| format!("cat:{c}"))
            .collect::<Vec<_>>()
            .join(" OR ");
        let query = format!(
            "({cats}) AND submittedDate:[{}0000 TO {}2359]",
            window.start.format("%Y%m%d"),
            window.end.format("%Y%m%d")
        );
        let start = page * self.config.page_size;
        let mut url = url::Url::parse(&self.config.base_url)
            .unwrap_or_else(|_| url::Url::parse(ARXIV_API_URL).expect("valid default url"));
        url.query_pairs_mut()
            .append_pair("search_query", &query)
            .append_pair("start", &start.to_string())
            .append_pair("max_results", &self.config.page_size.to_string())
            .append_pair("sortBy", "submittedDate")
            .append_pair("sortOrder", "ascending");
        url.to_string()
    }

    fn get(&self, url: &str) -> Result<Vec<u8>, CorpusError> {
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.throttled_get(url) {
                Ok(body) => return Ok(body),
                Err(e) if e.retryable && attempt < self.config.max_attempts => {
                    debug!(url, attempt, error = %e.message, "retrying request");
                }
                Err(e) => {
                    return Err(CorpusError::Network {
                        url: url.to_string(),
                        message: e.message,
                        retryable: e.retryable,
                    })
                }
            }
        }
    }

    fn throttled_get(&self, url: &str) -> Result<Vec<u8>, TransportError> {
        let mut last = self.last_request.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(prev) = *last {
            let elapsed = self.clock.now().saturating_sub(prev);
            if elapsed < self.config.min_delay {
                self.clock.sleep(self.config.min_delay - elapsed);
            }
        }
        *last = Some(self.clock.now());
        self.transport.get(url)
    }
}

/// Parses an arXiv Atom feed. Versions are stripped from ids so only the
/// latest version of each article is ever tracked.
pub fn parse_feed(bytes: &[u8]) -> Result<Vec<ListingEntry>, CorpusError> {
    #[derive(Default)]
    struct Partial {
        id: String,
        title: String,
        summary: String,
        published: String,
        primary: Option<String>,
    }

    let mut reader = Reader::from_reader(bytes);
    reader.config_mut().check_end_names = true;
    let mut entries = Vec::new();
    let mut current: Option<Partial> = None;
    let mut field: Option<&'static str> = None;

    let parse_err = |offset: u64, message: String| CorpusError::Parse { offset, message };

    loop {
        let event = reader
            .read_event()
            .map_err(|e| parse_err(reader.error_position(), e.to_string()))?;
        match event {
            Event::Start(e) => {
                let name = e.local_name();
                match name.as_ref() {
                    b"entry" => current = Some(Partial::default()),
                    b"id" if current.is_some() => field = Some("id"),
                    b"title" if current.is_some() => field = Some("title"),
                    b"summary" if current.is_some() => field = Some("summary"),
                    b"published" if current.is_some() => field = Some("published"),
                    _ => field = None,
                }
            }
            Event::Empty(e) => {
                if e.local_name().as_ref() == b"primary_category" {
                    if let Some(cur) = current.as_mut() {
                        if let Some(attr) = e
                            .try_get_attribute("term")
                            .map_err(|err| parse_err(reader.buffer_position(), err.to_string()))?
                        {
                            let value = attr.unescape_value().map_err(|err| {
                                parse_err(reader.buffer_position(), err.to_string())
                            })?;
                            cur.primary = Some(value.into_owned());
                        }
                    }
                }
            }
            Event::Text(t) => {
                if let (Some(cur), Some(f)) = (current.as_mut(), field) {
                    let text = t
                        .unescape()
                        .map_err(|err| parse_err(reader.buffer_position(), err.to_string()))?;
                    let slot = match f {
                        "id" => &mut cur.id,
                        "title" => &mut cur.title,
                        "summary" => &mut cur.summary,
                        _ => &mut cur.published,
                    };
                    slot.push_str(&text);
                }
            }
            Event::CData(t) => {
                if let (Some(cur), Some("summary")) = (current.as_mut(), field) {
                    cur.summary.push_str(&String::from_utf8_lossy(&t));
                }
            }
            Event::End(e) => {
                field = None;
                if e.local_name().as_ref() == b"entry" {
                    let offset = reader.buffer_position();
                    let p = current.take().unwrap_or_default();
                    let arxiv_id = normalize_id(&p.id);
                    if arxiv_id.is_empty() {
                        return Err(parse_err(offset, "entry without id".into()));
                    }
                    let submitted = p
                        .published
                        .trim()
                        .get(..10)
                        .and_then(|d| NaiveDate::parse_from_str(d, "%Y-%m-%d").ok())
                        .ok_or_else(|| {
                            parse_err(offset, format!("bad published date `{}`", p.published))
                        })?;
                    let domain = p
                        .primary
                        .as_deref()
                        .and_then(Domain::from_category)
                        .unwrap_or(Domain::Cs);
                    entries.push(ListingEntry {
                        meta: ArticleMeta {
                            arxiv_id,
                            domain,
                            submitted,
                            title: collapse(&p.title),
                        },
                        summary: collapse(&p.summary),
                    });
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if current.is_some() {
        return Err(parse_err(
            reader.buffer_position(),
            "unterminated entry".into(),
        ));
    }
    Ok(entries)
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn normalize_id(raw: &str) -> String {
    let raw = raw.trim();
    let id = raw.rsplit_once("/abs/").map_or(raw, |(_, id)| id);
    match id.rfind('v') {
        Some(pos) if pos + 1 < id.len() && id[pos + 1..].bytes().all(|b| b.is_ascii_digit()) => {
            id[..pos].to_string()
        }
        _ => id.to_string(),
    }
}
