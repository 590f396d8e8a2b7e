//! In-process mock market: a plain HTTP/1.1 server exposing an overview page
//! that links every product page, with optional per-request latency and
//! seeded transient failures for crawler testing.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use axum::body::Body;
use axum::extract::State;
use axum::http::{header, Request, StatusCode};
use axum::response::Response;
use axum::Router;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tokio::sync::oneshot;

use crate::generate::Corpus;
use crate::{MarketSimError, Result};

pub const OVERVIEW_URL: &str = "/";

/// Immutable page map plus request-behavior knobs.
#[derive(Debug, Clone)]
pub struct MockMarket {
    pub pages: BTreeMap<String, String>,
    pub overview_url: String,
    /// Uniform per-request delay range in milliseconds.
    pub latency_ms: (u64, u64),
    /// Probability a request fails with a transient 503.
    pub failure_rate: f64,
    pub seed: u64,
}

impl MockMarket {
    /// Build the market from a corpus: one page per listing plus an overview
    /// page whose anchors enumerate every product page.
    pub fn from_corpus(corpus: &Corpus) -> Result<MockMarket> {
        if corpus.is_empty() {
            return Err(MarketSimError::EmptyCorpus);
        }
        let mut pages = BTreeMap::new();
        let mut overview = String::from("<html><body><div>market directory</div><div>");
        for listing in &corpus.listings {
            overview.push_str(&format!(
                "<a href=\"{}\">{}</a> ",
                listing.url, listing.page_id
            ));
            pages.insert(listing.url.clone(), listing.html.clone());
        }
        overview.push_str("</div></body></html>");
        pages.insert(OVERVIEW_URL.to_string(), overview);
        Ok(MockMarket {
            pages,
            overview_url: OVERVIEW_URL.to_string(),
            latency_ms: (0, 0),
            failure_rate: 0.0,
            seed: 0,
        })
    }

    pub fn with_latency_ms(mut self, min: u64, max: u64) -> Self {
        self.latency_ms = (min, max.max(min));
        self
    }

    pub fn with_failures(mut self, rate: f64, seed: u64) -> Self {
        self.failure_rate = rate.clamp(0.0, 1.0);
        self.seed = seed;
        self
    }
}

struct ServiceState {
    pages: BTreeMap<String, String>,
    latency_ms: (u64, u64),
    failure_rate: f64,
    /// One stream for both latency and failure draws, in request-arrival
    /// order, so behavior replays under a fixed seed.
    rng: Mutex<ChaCha8Rng>,
}

/// Handle to a running service; dropping it (or calling `shutdown`) stops
/// the server and joins its thread.
pub struct ServiceHandle {
    addr: SocketAddr,
    shutdown_tx: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl ServiceHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        if let Some(tx) = self.shutdown_tx.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServiceHandle {
    fn drop(&mut self) {
        self.stop();
    }
}

async fn handle(State(state): State<Arc<ServiceState>>, req: Request<Body>) -> Response {
    let path = req.uri().path().to_string();
    let (delay_ms, fail) = {
        let mut rng = state.rng.lock().expect("service rng");
        let (lo, hi) = state.latency_ms;
        let delay = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let fail = state.failure_rate > 0.0 && rng.random_bool(state.failure_rate);
        (delay, fail)
    };
    if delay_ms > 0 {
        tokio::time::sleep(Duration::from_millis(delay_ms)).await;
    }
    if fail {
        return response(StatusCode::SERVICE_UNAVAILABLE, "transient failure");
    }
    match state.pages.get(&path) {
        Some(html) => response(StatusCode::OK, html),
        None => response(StatusCode::NOT_FOUND, "not found"),
    }
}

fn response(status: StatusCode, body: &str) -> Response {
    Response::builder()
        .status(status)
        .header(header::CONTENT_TYPE, "text/html; charset=utf-8")
        .body(Body::from(body.to_string()))
        .expect("static response")
}

/// Start the service on `bind` (e.g. "127.0.0.1:0") and return its handle.
/// The listener is bound before this returns, so a taken port is an error
/// here rather than a late panic.
pub fn serve(market: MockMarket, bind: &str) -> Result<ServiceHandle> {
    let listener = std::net::TcpListener::bind(bind).map_err(|source| MarketSimError::Bind {
        addr: bind.to_string(),
        source,
    })?;
    listener
        .set_nonblocking(true)
        .map_err(|source| MarketSimError::Bind {
            addr: bind.to_string(),
            source,
        })?;
    let addr = listener.local_addr().map_err(|source| MarketSimError::Bind {
        addr: bind.to_string(),
        source,
    })?;

    let state = Arc::new(ServiceState {
        pages: market.pages,
        latency_ms: market.latency_ms,
        failure_rate: market.failure_rate,
        rng: Mutex::new(ChaCha8Rng::seed_from_u64(market.seed)),
    });
    let (shutdown_tx, shutdown_rx) = oneshot::channel::<()>();

    let thread = std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_current_thread()
            .enable_all()
            .build()
            .expect("service runtime");
        rt.block_on(async move {
            let app = Router::new().fallback(handle).with_state(state);
            let listener = tokio::net::TcpListener::from_std(listener).expect("listener");
            axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = shutdown_rx.await;
                })
                .await
                .expect("serve");
        });
    });

    Ok(ServiceHandle {
        addr,
        shutdown_tx: Some(shutdown_tx),
        thread: Some(thread),
    })
}
