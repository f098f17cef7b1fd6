use std::thread;
use std::time::Duration;

use goci::advice::ScriptedOracle;
use goci::assets::{blocks_domain, lshape_example, lshape_truth, std_library, BLOCKS_DOM, STD_CONSTRAINTS};
use goci::induction::{run_goci, LoopConfig};
use goci::session::client::SessionClient;
use goci::session::server::{ServeOptions, Server};
use goci::session::{Record, SessionInputs};

fn inputs() -> SessionInputs {
    SessionInputs::new(vec![lshape_example()], vec![], BLOCKS_DOM, STD_CONSTRAINTS, LoopConfig::default()).unwrap()
}

fn connect(addr: std::net::SocketAddr) -> SessionClient {
    let c = SessionClient::connect(addr).unwrap();
    c.set_read_timeout(Some(Duration::from_secs(30))).unwrap();
    c
}

/// Connects until the service admits the client (the previous client's
/// disconnect may not have been noticed yet); returns the greeting.
fn reconnect(addr: std::net::SocketAddr) -> (SessionClient, Vec<Record>) {
    for _ in 0..100 {
        let mut c = connect(addr);
        match c.recv().unwrap() {
            Some(hello @ Record::Hello { .. }) => {
                let mut rest = c.until_query().unwrap();
                rest.insert(0, hello);
                return (c, rest);
            }
            _ => thread::sleep(Duration::from_millis(20)),
        }
    }
    panic!("the service never admitted a new client");
}

#[test]
fn full_session_over_tcp() {
    let server = Server::bind("127.0.0.1:0").unwrap();
    let addr = server.local_addr().unwrap();
    let service = thread::spawn(move || server.run(&inputs(), &ServeOptions::default(), None));
    let oracle = ScriptedOracle::new(lshape_truth());

    // first client: greeting, then a query with rendered candidates
    let mut a = connect(addr);
    let first = a.until_query().unwrap();
    assert_eq!(first[0].kind(), "hello");
    let Some(Record::Query { id, candidates, rendered, witnesses, .. }) = first.last().cloned() else { panic!() };
    assert!(!candidates.is_empty());
    assert_eq!(rendered.len(), candidates.len());
    assert_eq!(witnesses.len(), candidates.len());
    assert!(rendered.iter().all(|s| !s.trim().is_empty()));

    // malformed input and bad choices are reported; the query stays pending
    a.send_raw("{this is not a record").unwrap();
    assert!(matches!(a.recv().unwrap(), Some(Record::Error { id: None, .. })));
    a.prefer(id, vec![candidates.len()]).unwrap();
    assert!(matches!(a.recv().unwrap(), Some(Record::Error { id: Some(e), .. }) if e == id));
    a.prefer(id + 1000, vec![0]).unwrap();
    assert!(matches!(a.recv().unwrap(), Some(Record::Error { .. })));

    // a second concurrent client is refused and closed
    let mut b = connect(addr);
    assert!(matches!(b.recv().unwrap(), Some(Record::Error { .. })));
    assert!(b.recv().unwrap().is_none());

    // disconnecting and coming back resumes at the same query
    drop(a);
    let (mut c, again) = reconnect(addr);
    assert_eq!(again[0].kind(), "hello");
    assert_eq!(again.first(), first.first());
    let Some(Record::Query { id: resumed, .. }) = again.last() else { panic!() };
    assert_eq!(*resumed, id);

    let q = again.last().unwrap().to_query().unwrap().unwrap();
    c.prefer(id, oracle.choose(&q)).unwrap();
    let rest = c
        .drive(|r| match r.to_query() {
            Ok(Some(q)) => oracle.choose(&q),
            _ => vec![],
        })
        .unwrap();
    let Some(Record::Done { theory, .. }) = rest.last() else { panic!("no done record") };
    let (served, _) = service.join().unwrap().unwrap();
    assert_eq!(theory, &served.theory.render());

    // the same preferences given in-process produce the same theory
    let mut direct_oracle = ScriptedOracle::new(lshape_truth());
    let direct =
        run_goci(&lshape_example(), &blocks_domain(), &std_library(), &LoopConfig::default(), &mut direct_oracle)
            .unwrap();
    assert_eq!(served.theory, direct.theory);
    assert_eq!(served.queries(), direct.queries());
}
