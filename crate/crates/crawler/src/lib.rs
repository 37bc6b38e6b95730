//! Rate-limited crawler for the forum API, plus a mock server that speaks
//! the same contract.

pub mod clock;
pub mod config;
pub mod crawl;
pub mod feed;
pub mod log;
pub mod mock;
pub mod transport;

pub use clock::{Clock, TokioClock};
pub use config::{ConfigError, CrawlConfig};
pub use crawl::{crawl, CrawlAbort, CrawlError, CrawlOutput, Crawler, FetchError};
pub use feed::{Feed, FeedPage, Pagination};
pub use log::{CrawlEvent, CrawlLog, CrawlSummary};
pub use mock::{Fault, MockData, MockOptions, MockServer, Observed};
pub use transport::{HttpResponse, HttpTransport, RouterTransport, Transport, TransportError};
