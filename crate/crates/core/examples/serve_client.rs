//! Starts the HTTP service on a free local port and queries it with a
//! bare-bones client.

use std::io::{Read, Write};
use std::net::TcpStream;

use lamp_motion::kinematics::ChainSpec;
use lamp_motion::planner::PlannerConfig;
use lamp_motion::serve::{router, ServeState};

fn request(addr: std::net::SocketAddr, method: &str, path: &str, body: &str) -> std::io::Result<String> {
    let mut s = TcpStream::connect(addr)?;
    write!(
        s,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    let mut out = String::new();
    s.read_to_string(&mut out)?;
    Ok(out)
}

fn main() -> std::io::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let addr = listener.local_addr()?;
    let app = router(ServeState::new(ChainSpec::default(), PlannerConfig::default()));
    rt.spawn(async move { axum::serve(listener, app).await });

    let list = request(addr, "GET", "/scenarios", "")?;
    println!("{}", list.lines().last().unwrap_or_default());

    let body = r#"{"scenario": "play_music", "variant": "E", "gamma": 0.5}"#;
    let plan = request(addr, "POST", "/plan", body)?;
    println!("{}", plan.lines().next().unwrap_or_default());
    println!("{} bytes of response", plan.len());

    let bad = request(addr, "POST", "/plan", r#"{"scenario": "play_music", "gamma": -1}"#)?;
    println!("{}", bad.lines().last().unwrap_or_default());
    Ok(())
}
