mod common;

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::thread;

use vandalscore::harness::score_batch;
use vandalscore::http::serve_http;
use vandalscore::protocol::revision_payload;

use common::fixture;

fn request(addr: SocketAddr, method: &str, path: &str, body: &str) -> (u16, String) {
    let mut s = TcpStream::connect(addr).unwrap();
    write!(
        s,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\
         Content-Length: {}\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut resp = String::new();
    s.read_to_string(&mut resp).unwrap();
    let status = resp[9..12].parse().unwrap();
    let body = resp
        .split_once("\r\n\r\n")
        .map_or("", |(_, b)| b)
        .to_string();
    (status, body)
}

#[test]
fn scores_and_errors() {
    let f = fixture();
    let recs: Vec<_> = f.corpus.records.iter().take(20).cloned().collect();
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let addr = server.server_addr().to_ip().unwrap();
    let bad = 4;
    let handle = thread::spawn(move || serve_http(&server, &f.engine, Some(recs.len() + bad)));

    let recs: Vec<_> = f.corpus.records.iter().take(20).collect();
    let expect = score_batch(&f.engine, &f.corpus.records[..20]);
    for (r, want) in recs.iter().zip(&expect) {
        let (status, body) = request(
            addr,
            "POST",
            "/score",
            &revision_payload(&r.xml, &r.meta_line),
        );
        assert_eq!(status, 200, "{body}");
        let v: serde_json::Value = serde_json::from_str(&body).unwrap();
        assert_eq!(v["revisionId"].as_u64(), Some(r.rev.revision_id));
        // serde_json's default float parser may be off by an ulp; std's is exact.
        let text = body.split("\"score\":").nth(1).unwrap();
        let got: f64 = text.trim_end_matches(['}', '\n']).parse().unwrap();
        assert!(v["score"].is_f64());
        assert_eq!(got.to_bits(), want.to_bits());
    }
    assert_eq!(request(addr, "POST", "/score", "").0, 400);
    assert_eq!(request(addr, "POST", "/score", "<revision>broken").0, 400);
    assert_eq!(request(addr, "GET", "/score", "").0, 405);
    assert_eq!(request(addr, "POST", "/elsewhere", "x").0, 404);
    handle.join().unwrap();
}
