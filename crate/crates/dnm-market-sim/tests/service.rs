//! Mock market service behavior: overview links, 404s, deterministic
//! failure sequences, and concurrent reads.

use std::io::{Read, Write};
use std::net::TcpStream;

use dnm_market_sim::{generate_corpus, serve_market, GenConfig, MockMarket};

fn get(addr: &std::net::SocketAddr, path: &str) -> (u16, String) {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(stream, "GET {path} HTTP/1.1\r\nHost: mock\r\nConnection: close\r\n\r\n").unwrap();
    let mut buf = String::new();
    stream.read_to_string(&mut buf).unwrap();
    let status: u16 = buf
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let body = buf.split("\r\n\r\n").nth(1).unwrap_or("").to_string();
    (status, body)
}

fn small_corpus() -> dnm_market_sim::Corpus {
    generate_corpus(&GenConfig::default_six(2, 5).with_noise(0.0)).unwrap()
}

#[test]
fn overview_enumerates_every_product_page() {
    let corpus = small_corpus();
    let market = MockMarket::from_corpus(&corpus).unwrap();
    let handle = serve_market(market, "127.0.0.1:0").unwrap();
    let (status, body) = get(&handle.addr(), "/");
    assert_eq!(status, 200);
    for listing in &corpus.listings {
        assert!(body.contains(&listing.url), "missing link to {}", listing.url);
    }
    let (status, body) = get(&handle.addr(), &corpus.listings[0].url);
    assert_eq!(status, 200);
    assert_eq!(body, corpus.listings[0].html);
    handle.shutdown();
}

#[test]
fn unknown_path_is_not_found() {
    let market = MockMarket::from_corpus(&small_corpus()).unwrap();
    let handle = serve_market(market, "127.0.0.1:0").unwrap();
    let (status, _) = get(&handle.addr(), "/nope.html");
    assert_eq!(status, 404);
}

#[test]
fn failure_sequence_replays_under_a_fixed_seed() {
    let corpus = small_corpus();
    let url = corpus.listings[0].url.clone();
    let observe = || {
        let market = MockMarket::from_corpus(&corpus)
            .unwrap()
            .with_failures(0.3, 99);
        let handle = serve_market(market, "127.0.0.1:0").unwrap();
        let seq: Vec<u16> = (0..20).map(|_| get(&handle.addr(), &url).0).collect();
        seq
    };
    let a = observe();
    let b = observe();
    assert_eq!(a, b);
    assert!(a.contains(&503), "expected some transient failures: {a:?}");
    assert!(a.contains(&200));
}

#[test]
fn empty_corpus_is_rejected() {
    assert!(MockMarket::from_corpus(&dnm_market_sim::Corpus::default()).is_err());
}

#[test]
fn concurrent_requests_are_served() {
    let corpus = small_corpus();
    let market = MockMarket::from_corpus(&corpus).unwrap();
    let handle = serve_market(market, "127.0.0.1:0").unwrap();
    let addr = handle.addr();
    let urls: Vec<String> = corpus.listings.iter().map(|l| l.url.clone()).collect();
    let threads: Vec<_> = (0..4)
        .map(|i| {
            let urls = urls.clone();
            std::thread::spawn(move || {
                for url in urls.iter().cycle().skip(i).take(20) {
                    let (status, _) = get(&addr, url);
                    assert_eq!(status, 200);
                }
            })
        })
        .collect();
    for t in threads {
        t.join().unwrap();
    }
}
