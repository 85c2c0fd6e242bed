use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::process::Command;

use hebundle::torus::read_csv;
use hebundle_cli::{load_config, read_journal, run, ConfigFile};

fn flags(kv: &[(&str, &str)]) -> BTreeMap<String, String> {
    kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[test]
fn one_record_per_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.jsonl");
    let mut cfg = load_config("farey", None, &flags(&[("triangle", "0/1,1/2,1/1")])).unwrap();
    cfg.out = Some(path.clone());
    let rec = run(&cfg).unwrap();
    assert!(rec.pass);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert_eq!(read_journal(&path).unwrap(), vec![rec]);
}

#[test]
fn repeated_runs_share_the_hash_not_the_clock() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.jsonl");
    let mut cfg = load_config("density", None, &flags(&[("samples", "500"), ("depth", "40")])).unwrap();
    cfg.out = Some(path.clone());
    run(&cfg).unwrap();
    std::thread::sleep(std::time::Duration::from_millis(5));
    run(&cfg).unwrap();
    let recs = read_journal(&path).unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0].config_hash, recs[1].config_hash);
    assert_ne!(recs[0].clock.timestamp, recs[1].clock.timestamp);
    assert_eq!(recs[0].without_clock(), recs[1].without_clock());
    assert_eq!(recs[0].schema_version, hebundle_cli::SCHEMA_VERSION);
}

#[test]
fn grid_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("k.csv");
    let mut cfg = load_config("torus-he", None, &flags(&[("N", "16"), ("rank", "3"), ("degree", "-2")])).unwrap();
    cfg.csv = Some(csv.clone());
    assert!(run(&cfg).unwrap().pass);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("N,tau_re,tau_im,rank,degree"));
    let grid = read_csv(BufReader::new(File::open(&csv).unwrap())).unwrap();
    assert_eq!((grid.n, grid.rank, grid.degree), (16, 3, -2));
    let field = grid.into_field::<f64>().unwrap();
    // the mean curvature of the model is 2πμ·Id
    let want = 2.0 * std::f64::consts::PI * (-2.0 / 3.0);
    for m in &field.data {
        assert!((m[(1, 1)].re - want).abs() < 1e-9 && m[(0, 1)].norm() < 1e-9);
    }
}

#[test]
fn config_file_sections() {
    let f = ConfigFile::parse("seed = 4\n[sequence]\nL = 3\ncount = 5\n").unwrap();
    let cfg = load_config("sequence", Some(&f), &flags(&[])).unwrap();
    let rec = run(&cfg).unwrap();
    assert!(!rec.pass, "at L = 3 the golden products exceed 1");
    assert_eq!(rec.inputs["L"], "3");
    assert_eq!(rec.outputs["entries"].as_array().unwrap().len(), 5);
}

fn exit(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_hebundle"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(exit(&["farey", "--triangle", "0/1,1/2,1/1"]), 0);
    assert_eq!(exit(&["farey", "--triangle", "0/1,1/3,1/1"]), 2);
    assert_eq!(exit(&["lagrange", "--theta", "periodic:1|"]), 1);
    assert_eq!(exit(&["frobnicate"]), 1);
    assert_eq!(exit(&["stability", "--sub", "3,2"]), 1);
    assert_eq!(exit(&["stability", "--sub", "3,2", "--sub0", "1,1"]), 0);
    assert_eq!(exit(&["torus-he", "--N", "16", "--degree", "-1", "--rank", "3"]), 0);
    assert_eq!(exit(&["chern-weil", "--rank", "2", "--degree", "1", "--N", "128"]), 0);
}

#[test]
fn lagrange_golden_record() {
    let cfg = load_config("lagrange", None, &flags(&[("theta", "periodic:1|1"), ("parity", "even")])).unwrap();
    let rec = run(&cfg).unwrap();
    assert_eq!(rec.outputs["exact"], "√5");
    assert!(rec.pass);
    let surd = load_config("lagrange", None, &flags(&[("theta", "surd:1,1,5,2")])).unwrap();
    assert_eq!(run(&surd).unwrap().outputs["exact"], "√5");
}
