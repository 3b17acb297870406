// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use sftlock_core::{replay, Journal, Scenario, TokenId};

fn corpus() -> Vec<(String, Scenario)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "scenario"))
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (
                p.file_stem().unwrap().to_string_lossy().into_owned(),
                Scenario::parse(&text).unwrap(),
            )
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn every_bundled_scenario_replays_to_its_live_digest() {
    let corpus = corpus();
    assert_eq!(corpus.len(), 7);
    for (name, scenario) in corpus {
        let live = scenario.run();
        assert!(live.succeeded(), "{name}: {:?}", live.failure);
        let reloaded = Journal::from_text(&live.ledger.journal().to_text()).unwrap();
        let state = replay(&reloaded).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(state.digest(), live.ledger.digest(), "{name}");
        assert_eq!(&state, live.ledger.state(), "{name}");
    }
}

#[test]
fn trace_of_reloaded_journal_matches_live_trace() {
    for (name, scenario) in corpus() {
        let live = scenario.run().ledger;
        let reloaded = Journal::from_text(&live.journal().to_text()).unwrap();
        for id in 0..=5 {
            assert_eq!(
                live.journal().trace(TokenId(id)),
                reloaded.trace(TokenId(id)),
                "{name} token {id}"
            );
        }
    }
}
