//! Scenario runner and CLI behaviour.

use std::process::Command;

use lmqc::experiments::{run, run_to_dir, ResultTable, RunOptions, Scenario, ScenarioConfig};

fn csv_bytes(t: &ResultTable) -> Vec<u8> {
    let mut b = Vec::new();
    t.write_csv(&mut b).unwrap();
    b
}

#[test]
fn same_config_and_seed_give_identical_output() {
    let c = ScenarioConfig::new(Scenario::HomDelayScan).with("points", 21).unwrap().with("shots", 500).unwrap();
    let a = run(&c, 9).unwrap();
    let b = run(&c, 9).unwrap();
    assert_eq!(csv_bytes(&a), csv_bytes(&b));
    assert_eq!(a.metadata, b.metadata);
    let other = run(&c, 10).unwrap();
    assert_ne!(csv_bytes(&a), csv_bytes(&other));
    assert!(a.column("p_ee_shots").is_some());
}

#[test]
fn exact_runs_ignore_the_seed() {
    let c = ScenarioConfig::new(Scenario::HomWidthScan);
    assert_eq!(csv_bytes(&run(&c, 1).unwrap()), csv_bytes(&run(&c, 2).unwrap()));
}

#[test]
fn every_scenario_runs_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let sparams = dir.path().join("s.csv");
    std::fs::write(
        &sparams,
        "freq_ghz,re_s11,im_s11,re_s21,im_s21\n3.9,0,0.78,0.62,0\n3.95,0,0.78,0.62,0\n",
    )
    .unwrap();
    for s in Scenario::ALL {
        let mut c = ScenarioConfig::new(s);
        match s {
            Scenario::EtaFromVna => c.set("input", sparams.to_str().unwrap()).unwrap(),
            Scenario::SingleSplit | Scenario::BellTomography | Scenario::MzScan => c.set("sample_ns", "10").unwrap(),
            _ => {}
        }
        let out = run_to_dir(
            &c,
            &RunOptions {
                out_dir: dir.path().join(s.name()),
                plot: true,
                seed: 1,
            },
        )
        .unwrap_or_else(|e| panic!("{s}: {e}"));
        assert!(!out.table.rows().is_empty(), "{s}");
        let back = ResultTable::read_csv(std::fs::File::open(&out.result_csv).unwrap()).unwrap();
        assert_eq!(back.rows(), out.table.rows(), "{s}");
        let meta = std::fs::read_to_string(&out.metadata).unwrap();
        let parsed = ResultTable::parse_metadata(&meta).unwrap();
        assert_eq!(&parsed[..out.table.metadata.len()], &out.table.metadata[..], "{s}");
        assert!(parsed.last().unwrap().0 == "wall_time_s");
        let echo = out.table.get_meta("config").unwrap();
        assert_eq!(ScenarioConfig::parse(echo).unwrap().params(), c.params());
        assert!(std::fs::read_to_string(out.plot.unwrap()).unwrap().contains("<path"));
    }
}

fn lmqc(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lmqc")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr),
    )
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let ok = write("ok.cfg", "scenario = hom_width_scan\n");
    assert_eq!(lmqc(&["run", &ok, "--out", out]).0, 0);
    assert!(dir.path().join("out/result.csv").exists());

    let unknown = write("unknown.cfg", "scenario = teleport\n");
    assert_eq!(lmqc(&["run", &unknown, "--out", out]).0, 2);

    let bad = write("bad.cfg", "scenario = hom_delay_scan\neta = 1.7\n");
    let (code, text) = lmqc(&["run", &bad, "--out", out]);
    assert_eq!(code, 3, "{text}");
    assert!(text.contains("eta"));

    let blocker = write("file", "");
    assert_eq!(lmqc(&["run", &ok, "--out", &format!("{blocker}/sub")]).0, 4);
    assert_eq!(lmqc(&["run", "/nonexistent/x.cfg"]).0, 4);

    let (code, text) = lmqc(&["verify", "--filter", "unitarity"]);
    assert_eq!(code, 0);
    assert!(text.contains("[PASS] bs_unitarity"));

    let sp = write("s.csv", "freq_ghz,re_s11,im_s11,re_s21,im_s21\n3.925,0,0.6,0.8,0\n");
    let (code, text) = lmqc(&["eta", &sp, "--f0", "3.925"]);
    assert_eq!(code, 0);
    assert!(text.contains("eta = 0.360000"), "{text}");
}
