use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use pdfcorpus_fetch::warc::WarcWriter;
use pdfcorpus_fetch::{fetch_from_warc, fetch_original, FetchConfig, FetchError, HttpRangeReader, Source};
use tiny_http::{Header, Response, Server};

struct TestServer {
    base: String,
    hits: Arc<AtomicUsize>,
    ranges: Arc<Mutex<Vec<String>>>,
}

fn header(name: &str, value: &str) -> Header {
    Header::from_bytes(name.as_bytes(), value.as_bytes()).unwrap()
}

fn serve(archive: Vec<u8>, honour_ranges: bool) -> TestServer {
    let server = Server::http("127.0.0.1:0").unwrap();
    let base = format!("http://{}", server.server_addr().to_ip().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let ranges = Arc::new(Mutex::new(Vec::new()));
    let (h, r) = (hits.clone(), ranges.clone());
    thread::spawn(move || {
        for req in server.incoming_requests() {
            let n = h.fetch_add(1, Ordering::SeqCst);
            let path = req.url().to_string();
            let resp = match path.as_str() {
                "/ok.pdf" => Response::from_data(b"%PDF-1.4\nbody\n%%EOF\n".to_vec()).boxed(),
                "/missing.pdf" => Response::from_string("nope").with_status_code(404).boxed(),
                // fails twice, then succeeds
                "/flaky.pdf" if n < 2 => Response::from_string("busy").with_status_code(503).boxed(),
                "/flaky.pdf" => Response::from_data(b"%PDF-1.4 flaky %%EOF".to_vec()).boxed(),
                "/always500.pdf" => Response::from_string("down").with_status_code(500).boxed(),
                "/big.pdf" => Response::from_data(vec![b'x'; 10_000]).boxed(),
                "/slow.pdf" => {
                    thread::sleep(Duration::from_millis(800));
                    Response::from_string("late").boxed()
                }
                p if p.starts_with("/hop/") => {
                    let k: usize = p[5..].parse().unwrap();
                    if k == 0 {
                        Response::from_data(b"%PDF-1.4 landed %%EOF".to_vec()).boxed()
                    } else {
                        Response::empty(302).with_header(header("Location", &format!("/hop/{}", k - 1))).boxed()
                    }
                }
                p if p.starts_with("/crawl/") => {
                    let range = req.headers().iter().find(|h| h.field.equiv("Range")).map(|h| h.value.to_string());
                    match range.filter(|_| honour_ranges) {
                        Some(range) => {
                            r.lock().unwrap().push(range.clone());
                            let (a, b) = range.trim_start_matches("bytes=").split_once('-').unwrap();
                            let (a, b): (usize, usize) = (a.parse().unwrap(), b.parse().unwrap());
                            Response::from_data(archive[a..=b].to_vec())
                                .with_status_code(206)
                                .with_header(header("Content-Range", &format!("bytes {a}-{b}/{}", archive.len())))
                                .boxed()
                        }
                        None => Response::from_data(archive.clone()).boxed(),
                    }
                }
                _ => Response::from_string("?").with_status_code(400).boxed(),
            };
            let _ = req.respond(resp);
        }
    });
    TestServer { base, hits, ranges }
}

fn quick() -> FetchConfig {
    FetchConfig {
        timeout: Duration::from_secs(5),
        backoff: Duration::from_millis(10),
        ..FetchConfig::default()
    }
}

#[test]
fn success_and_client_errors() {
    let s = serve(Vec::new(), true);
    let r = fetch_original(&format!("{}/ok.pdf", s.base), &quick()).unwrap();
    assert_eq!((r.source, r.truncated, r.http_status), (Source::Origin, false, 200));
    assert_eq!(r.bytes, b"%PDF-1.4\nbody\n%%EOF\n");
    let e = fetch_original(&format!("{}/missing.pdf", s.base), &quick()).unwrap_err();
    assert_eq!(e, FetchError::Http4xx(404));
    assert!(matches!(fetch_original("not a url", &quick()), Err(FetchError::InvalidUrl(_))));
}

#[test]
fn transient_errors_are_retried() {
    let s = serve(Vec::new(), true);
    let r = fetch_original(&format!("{}/flaky.pdf", s.base), &quick()).unwrap();
    assert_eq!(r.bytes, b"%PDF-1.4 flaky %%EOF");
    assert_eq!(s.hits.load(Ordering::SeqCst), 3);

    let s = serve(Vec::new(), true);
    let cfg = FetchConfig { max_retries: 2, ..quick() };
    assert_eq!(fetch_original(&format!("{}/always500.pdf", s.base), &cfg).unwrap_err(), FetchError::Http5xx(500));
    assert_eq!(s.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn redirect_limit() {
    let s = serve(Vec::new(), true);
    let r = fetch_original(&format!("{}/hop/5", s.base), &quick()).unwrap();
    assert_eq!(r.bytes, b"%PDF-1.4 landed %%EOF");
    let e = fetch_original(&format!("{}/hop/6", s.base), &quick()).unwrap_err();
    assert_eq!(e, FetchError::TooManyRedirects);
}

#[test]
fn oversize_and_timeout() {
    let s = serve(Vec::new(), true);
    let cfg = FetchConfig { max_bytes: 1000, ..quick() };
    assert_eq!(fetch_original(&format!("{}/big.pdf", s.base), &cfg).unwrap_err(), FetchError::Oversize(1000));
    let cfg = FetchConfig {
        timeout: Duration::from_millis(200),
        max_retries: 0,
        ..quick()
    };
    assert_eq!(fetch_original(&format!("{}/slow.pdf", s.base), &cfg).unwrap_err(), FetchError::Timeout);
}

#[test]
fn connection_refused() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let cfg = FetchConfig { max_retries: 0, ..quick() };
    let e = fetch_original(&format!("http://127.0.0.1:{port}/x.pdf"), &cfg).unwrap_err();
    assert_eq!(e.kind(), "connect", "{e:?}");
}

#[test]
fn range_requests_read_only_the_record() {
    let mut w = WarcWriter::new();
    let first = w.add_response("http://a.org/1.pdf", "2023-02-01T00:00:00Z", &[], b"%PDF-1.4 one %%EOF", None);
    let body: Vec<u8> = (0..100u8).collect();
    let second = w.add_response("http://a.org/2.pdf", "2023-02-01T00:00:00Z", &[], &body, None);
    let archive = w.into_bytes();
    let s = serve(archive.clone(), true);
    let reader = HttpRangeReader::new(&format!("{}/crawl", s.base), &quick());
    let r = fetch_from_warc(&reader, "seg/a.warc.gz", second.offset, second.length, &quick()).unwrap();
    assert_eq!(r.bytes, body);
    assert_eq!(r.url, "http://a.org/2.pdf");
    assert_eq!(
        s.ranges.lock().unwrap().as_slice(),
        [format!("bytes={}-{}", second.offset, second.offset + second.length - 1)]
    );
    assert_eq!(first.offset + first.length, second.offset);

    let ignoring = serve(archive, false);
    let reader = HttpRangeReader::new(&format!("{}/crawl", ignoring.base), &quick());
    let e = fetch_from_warc(&reader, "seg/a.warc.gz", first.offset, first.length, &quick()).unwrap_err();
    assert_eq!(e, FetchError::RangeUnsupported);
}
