use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feed {
    Top,
    New,
    Discussed,
}

impl Feed {
    pub const ALL: [Feed; 3] = [Feed::Top, Feed::New, Feed::Discussed];

    pub fn as_str(self) -> &'static str {
        match self {
            Feed::Top => "top",
            Feed::New => "new",
            Feed::Discussed => "discussed",
        }
    }
}

impl fmt::Display for Feed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Feed {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "top" => Ok(Feed::Top),
            "new" => Ok(Feed::New),
            "discussed" => Ok(Feed::Discussed),
            other => Err(format!("unknown feed {other:?} (expected top, new or discussed)")),
        }
    }
}

/// How a feed's page token is carried.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pagination {
    /// `?cursor=...`, next token from the response's `next_cursor`.
    #[default]
    Cursor,
    /// `?offset=N`, next token is N plus the ids received.
    Offset,
}

impl Pagination {
    pub fn path(self, feed: Feed, token: Option<&str>) -> String {
        let base = format!("/feed/{feed}");
        match (self, token) {
            (_, None) => base,
            (Pagination::Cursor, Some(t)) => format!("{base}?cursor={}", encode(t)),
            (Pagination::Offset, Some(t)) => format!("{base}?offset={}", encode(t)),
        }
    }
}

fn encode(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || b"-._~".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

/// One page of a feed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedPage {
    pub feed: Feed,
    /// Token that requested this page; `None` for the first page.
    pub page_token: Option<String>,
    pub post_ids: Vec<String>,
    pub has_more: bool,
    /// Token for the following page, when `has_more`.
    pub next_token: Option<String>,
}

#[derive(Deserialize)]
struct WirePage {
    post_ids: Vec<String>,
    #[serde(default)]
    next_cursor: Option<String>,
    has_more: bool,
}

impl FeedPage {
    /// Parses a feed response body.
    pub fn parse(
        feed: Feed,
        page_token: Option<String>,
        pagination: Pagination,
        body: &str,
    ) -> Result<FeedPage, String> {
        let wire: WirePage = serde_json::from_str(body).map_err(|e| e.to_string())?;
        if wire.has_more && wire.post_ids.is_empty() {
            return Err("page has no ids but claims more".into());
        }
        if wire.post_ids.iter().any(|id| id.is_empty()) {
            return Err("empty post id".into());
        }
        let next_token = match (wire.has_more, pagination) {
            (false, _) => None,
            (true, Pagination::Cursor) => Some(
                wire.next_cursor
                    .filter(|c| !c.is_empty())
                    .ok_or("has_more without next_cursor")?,
            ),
            (true, Pagination::Offset) => {
                let at: usize = match &page_token {
                    Some(t) => t.parse().map_err(|_| format!("bad offset token {t:?}"))?,
                    None => 0,
                };
                Some((at + wire.post_ids.len()).to_string())
            }
        };
        Ok(FeedPage {
            feed,
            page_token,
            post_ids: wire.post_ids,
            has_more: wire.has_more,
            next_token,
        })
    }
}
