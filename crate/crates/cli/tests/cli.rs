use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn corrtree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrtree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = corrtree(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn edge_lines(dot: &str) -> usize {
    dot.lines().filter(|l| l.contains(" -- ")).count()
}

fn node_lines(dot: &str) -> usize {
    dot.lines()
        .map(str::trim)
        .filter(|l| l.starts_with('"') && l.ends_with(';') && !l.contains(" -- "))
        .count()
}

#[test]
fn synthetic_three_groups_give_thirty_node_tree() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("panel.csv");
    ok(&["synth", "--groups", "3x10", "--loading", "0.8", "--noise", "0.6", "--length", "1000", "--seed", "7", "--out", p(&panel)]);
    let out = dir.path().join("out");
    let stdout = ok(&["run", p(&panel), "--out", p(&out)]);
    let dot = fs::read_to_string(out.join("mst.dot")).unwrap();
    assert_eq!(node_lines(&dot), 30);
    assert_eq!(edge_lines(&dot), 29);

    // census goes to standard output as one JSON record
    let census: Vec<&str> = stdout.lines().collect();
    assert_eq!(census.len(), 1);
    for key in ["\"n\":30", "\"strong\"", "\"weak\"", "\"negative\""] {
        assert!(census[0].contains(key), "{}", census[0]);
    }
    for f in ["mst.graphml", "dendrogram.nwk", "correlation.csv", "distance.csv", "ultrametric.csv", "census.json", "mst.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
}

#[test]
fn two_asset_panel_gives_single_edge() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("two.csv");
    fs::write(&panel, "time,A,B\n1,10,20\n2,11,19\n3,12,21\n4,11,22\n5,13,20\n").unwrap();
    let out = dir.path().join("out");
    ok(&["run", p(&panel), "--out", p(&out), "--format", "dot,newick"]);
    assert_eq!(edge_lines(&fs::read_to_string(out.join("mst.dot")).unwrap()), 1);
    let nwk = fs::read_to_string(out.join("dendrogram.nwk")).unwrap();
    assert!(nwk.trim_end().ends_with(';'));
    assert_eq!(nwk.matches(',').count(), 1);
    assert!(nwk.contains('A') && nwk.contains('B'));
    assert!(!out.join("mst.graphml").exists());
}

#[test]
fn unreadable_input_fails_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let res = corrtree(&["run", p(&dir.path().join("missing.csv")), "--out", p(&out)]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&res.stderr).is_empty());
    assert!(res.stdout.is_empty());
    assert!(!out.exists());
}

#[test]
fn exit_codes_distinguish_usage_from_data() {
    assert_eq!(corrtree(&["mst"]).status.code(), Some(1));
    assert_eq!(corrtree(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(corrtree(&["synth", "--groups", "three"]).status.code(), Some(1));
    assert_eq!(corrtree(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("bad.csv");
    fs::write(&panel, "time,A,B\n1,10,20\n2,11\n").unwrap();
    let res = corrtree(&["census", p(&panel)]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line"));
    // loading outside (0, 1) is a bad model, a data error
    assert_eq!(corrtree(&["synth", "--loading", "1.5"]).status.code(), Some(2));
    // empty format list is a configuration problem
    let res = corrtree(&["run", p(&panel), "--out", p(&dir.path().join("o")), "--format", ""]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn matrix_subcommands_print_csv() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("p.csv");
    fs::write(&panel, "t;X;Y;Z\n1;1;2;9\n2;2;4;8\n3;3;5;9\n4;4;9;7\n5;5;9;1\n").unwrap();
    let corr = ok(&["corr", p(&panel), "--delimiter", ";", "--signal", "raw"]);
    let mut lines = corr.lines();
    assert_eq!(lines.next(), Some(",X,Y,Z"));
    assert!(lines.next().unwrap().starts_with("X,1,"));
    let dist = ok(&["dist", p(&panel), "--delimiter", ";", "--signal", "raw"]);
    assert!(dist.lines().nth(1).unwrap().starts_with("X,0,"));
    let dendro = ok(&["dendro", p(&panel), "--delimiter", ";", "--signal", "rank"]);
    assert!(dendro.trim_end().ends_with(":0.0;"));
    let ultra = ok(&["dendro", p(&panel), "--delimiter", ";", "--signal", "zscore", "--format", "csv"]);
    assert_eq!(ultra.lines().count(), 4);
    let graphml = ok(&["mst", p(&panel), "--delimiter", ";", "--signal", "raw", "--format", "graphml"]);
    assert_eq!(graphml.matches("<edge ").count(), 2);
}

#[test]
fn missing_markers_are_configurable() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("gaps.csv");
    fs::write(&panel, "t,A,B,C\n1,1,3,2\n2,2,-,4\n3,3,1,1\n4,5,2,7\n5,4,5,3\n6,6,4,6\n").unwrap();
    assert_eq!(corrtree(&["census", p(&panel), "--signal", "raw"]).status.code(), Some(2));
    let out = ok(&["census", p(&panel), "--signal", "raw", "--missing", "-"]);
    assert!(out.contains("\"n\":3"));
}

#[test]
fn rebase_replaces_base_with_numeraire() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("fx.csv");
    fs::write(&panel, "t,EUR,GBP,JPY\n1,1.1,1.3,0.009\n2,1.2,1.25,0.0091\n3,1.15,1.32,0.0089\n4,1.17,1.31,0.0092\n5,1.1,1.28,0.0093\n").unwrap();
    let corr = ok(&["corr", p(&panel), "--rebase", "EUR", "--numeraire", "USD"]);
    assert_eq!(corr.lines().next(), Some(",GBP,JPY,USD"));
    let res = corrtree(&["corr", p(&panel), "--rebase", "CHF"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn dynamics_writes_padded_windows_and_survival() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("panel.csv");
    ok(&["synth", "--groups", "2x4", "--length", "300", "--seed", "3", "--out", p(&panel)]);
    let out = dir.path().join("dyn");
    ok(&["dynamics", p(&panel), "--width", "100", "--step", "50", "--out", p(&out), "--format", "dot,newick"]);
    let survival = fs::read_to_string(out.join("survival.csv")).unwrap();
    let lines: Vec<&str> = survival.lines().collect();
    assert_eq!(lines[0], "window_index,start,end,survival_vs_previous");
    assert_eq!(lines.len(), 1 + 5);
    assert_eq!(lines[1], "0,0,100,");
    assert!(lines[2].starts_with("1,50,150,"));
    for k in 0..5 {
        let dot = fs::read_to_string(out.join(format!("{k:04}.dot"))).unwrap();
        assert_eq!(edge_lines(&dot), 7);
        assert!(out.join(format!("{k:04}.nwk")).is_file());
    }
    assert!(!out.join("0005.dot").exists());
    // width beyond the series is a data error
    let res = corrtree(&["dynamics", p(&panel), "--width", "1000", "--out", p(&dir.path().join("x"))]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn run_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("panel.csv");
    ok(&["synth", "--groups", "3x5", "--length", "400", "--seed", "11", "--out", p(&panel)]);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["run", p(&panel), "--out", p(&a), "--width", "200", "--step", "100"]);
    ok(&["run", p(&panel), "--out", p(&b), "--width", "200", "--step", "100"]);
    for f in ["mst.dot", "mst.graphml", "dendrogram.nwk", "correlation.csv", "survival.csv", "windows/0002.dot"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn synth_prices_recover_model_returns() {
    let dir = tempfile::tempdir().unwrap();
    let (prices, returns) = (dir.path().join("p.csv"), dir.path().join("r.csv"));
    ok(&["synth", "--groups", "2x3", "--length", "50", "--seed", "5", "--out", p(&prices)]);
    ok(&["synth", "--groups", "2x3", "--length", "50", "--seed", "5", "--emit", "returns", "--out", p(&returns)]);
    let from_prices = ok(&["corr", p(&prices)]);
    let from_returns = ok(&["corr", p(&returns), "--signal", "raw"]);
    let parse = |s: &str| -> Vec<f64> {
        s.lines()
            .skip(1)
            .flat_map(|l| l.split(',').skip(1).map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
            .collect()
    };
    for (x, y) in parse(&from_prices).iter().zip(parse(&from_returns)) {
        assert!((x - y).abs() < 1e-9);
    }
    assert_eq!(fs::read_to_string(&prices).unwrap().lines().count(), 1 + 51);
    // same seed, same bytes
    let again = dir.path().join("p2.csv");
    ok(&["synth", "--groups", "2x3", "--length", "50", "--seed", "5", "--out", p(&again)]);
    assert_eq!(fs::read(&prices).unwrap(), fs::read(&again).unwrap());
}
