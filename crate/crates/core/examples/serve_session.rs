//! Runs the session service on a local port and drives it from a client
//! thread that answers queries like a scripted oracle would, printing the
//! protocol records as they arrive.
//!
//! cargo run --example serve_session

use std::thread;

use goci::advice::ScriptedOracle;
use goci::assets::{lshape_example, lshape_truth, BLOCKS_DOM, STD_CONSTRAINTS};
use goci::induction::LoopConfig;
use goci::session::client::SessionClient;
use goci::session::server::{ServeOptions, Server};
use goci::session::SessionInputs;

fn main() -> goci::Result<()> {
    let inputs =
        SessionInputs::new(vec![lshape_example()], vec![], BLOCKS_DOM, STD_CONSTRAINTS, LoopConfig::default())?;
    let server = Server::bind("127.0.0.1:0")?;
    let addr = server.local_addr()?;
    println!("listening on {addr}");
    let service = thread::spawn(move || server.run(&inputs, &ServeOptions::default(), None));

    let oracle = ScriptedOracle::new(lshape_truth());
    let mut client = SessionClient::connect(addr)?;
    let records = client.drive(|r| match r.to_query() {
        Ok(Some(q)) => oracle.choose(&q),
        _ => vec![],
    })?;
    for r in &records {
        let line = r.to_line().trim_end().to_string();
        let short: String = line.chars().take(110).collect();
        println!("{short}{}", if line.len() > 110 { "…" } else { "" });
    }
    let (result, _) = service.join().expect("service thread")?;
    println!("\nfinal theory:\n{}", result.theory.render());
    Ok(())
}
