use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn harness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harness"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = harness(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn synth_run_replay_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let s = ok(&[
        "synth",
        "--out",
        p(d),
        "--sessions",
        "300",
        "--targets",
        "4",
    ]);
    assert!(s.contains("300 sessions"), "{s}");
    let (nodes, edges, log, targets) = (
        d.join("nodes.tsv"),
        d.join("edges.tsv"),
        d.join("log.txt"),
        d.join("targets"),
    );
    let results = d.join("results.tsv");
    let base = [
        "--graph-nodes",
        p(&nodes),
        "--graph-edges",
        p(&edges),
        "--log",
        p(&log),
        "--targets",
        p(&targets),
    ];
    let mut args = vec!["run"];
    args.extend(base);
    args.extend([
        "--ranker",
        "rdp,freq",
        "--seed",
        "3,4",
        "--cap",
        "200",
        "--out",
        p(&results),
    ]);
    let summary = ok(&args);
    assert!(summary.contains("# rdp"), "{summary}");
    assert!(summary.contains("# freq"), "{summary}");

    let text = fs::read_to_string(&results).unwrap();
    let records: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("rdp\t") || l.starts_with("freq\t"))
        .collect();
    let instances = records.len() / 4;
    assert!(instances >= 4, "{instances}");
    assert!(records.iter().all(|r| r.split('\t').count() == 11));
    assert!(text.contains("# summary"));

    let mut args = vec!["replay"];
    args.extend(&base[..4]);
    args.extend(&base[4..]);
    args.extend(["--results", p(&results)]);
    let out = ok(&args);
    assert!(
        out.contains(&format!("replayed {} records", records.len())),
        "{out}"
    );

    // a doctored count is caught
    let first = records[0];
    let mut fields: Vec<String> = first.split('\t').map(str::to_owned).collect();
    fields[5] = (fields[5].parse::<usize>().unwrap() + 1).to_string();
    fs::write(&results, text.replacen(first, &fields.join("\t"), 1)).unwrap();
    assert!(!harness(&args).status.success());
}

#[test]
fn sweep_prints_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&[
        "synth",
        "--out",
        p(d),
        "--sessions",
        "200",
        "--targets",
        "2",
    ]);
    let out = ok(&[
        "sweep",
        "--graph-nodes",
        p(&d.join("nodes.tsv")),
        "--graph-edges",
        p(&d.join("edges.tsv")),
        "--log",
        p(&d.join("log.txt")),
        "--targets",
        p(&d.join("targets")),
        "--n-paths",
        "1,5",
        "--tau",
        "2,10",
        "--seed",
        "1",
    ]);
    let rows: Vec<&str> = out
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("n_paths"))
        .collect();
    assert_eq!(rows.len(), 4, "{out}");
    assert!(rows[0].starts_with("1\t2\t"));
}

fn tiny_graph(d: &Path) -> (String, String) {
    let nodes = d.join("nodes.tsv");
    let edges = d.join("edges.tsv");
    fs::write(
        &nodes,
        "tc\tTom Cruise\tfilm\tFilmActor\ntg\tTop Gun\tfilm\tFilm\nh\tHarvard\tedu\tUniversity\nus\tUSA\tloc\tCountry\n",
    )
    .unwrap();
    fs::write(
        &edges,
        "tc\ttg\tstarring\ntc\th\teducation\ntc\tus\tnationality\ntg\tus\tcountry\n",
    )
    .unwrap();
    (p(&nodes).to_owned(), p(&edges).to_owned())
}

#[test]
fn simulate_log_methods() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (nodes, edges) = tiny_graph(d);
    let out = d.join("log.txt");
    let g = [
        "--graph-nodes",
        nodes.as_str(),
        "--graph-edges",
        edges.as_str(),
    ];

    // import keeps the positives and adds negatives unless told not to
    let sets = d.join("sets.txt");
    fs::write(&sets, "starring education\n").unwrap();
    let mut args = vec!["simulate-log"];
    args.extend(g);
    args.extend(["--method", "import", "--sets", p(&sets), "--out", p(&out)]);
    ok(&args);
    assert_eq!(
        fs::read_to_string(&out).unwrap(),
        "starring education ~nationality ~country\n"
    );
    args.push("--no-negatives");
    ok(&args);
    assert_eq!(fs::read_to_string(&out).unwrap(), "starring education\n");

    // the actor node alone carries three edge types
    let mut args = vec!["simulate-log"];
    args.extend(g);
    args.extend([
        "--method",
        "datapos",
        "--rho-d",
        "1",
        "--no-negatives",
        "--out",
        p(&out),
    ]);
    ok(&args);
    let text = fs::read_to_string(&out).unwrap();
    assert!(
        text.lines().any(|l| l == "starring education nationality"),
        "{text}"
    );

    // thresholds have no default
    let mut args = vec!["simulate-log"];
    args.extend(g);
    args.extend(["--method", "cooccur", "--out", p(&out)]);
    let failed = harness(&args);
    assert!(!failed.status.success());
    assert!(String::from_utf8_lossy(&failed.stderr).contains("--rho-w"));

    let windows = d.join("windows.txt");
    fs::write(&windows, "tc tg us\ntc ghost\n").unwrap();
    args.truncate(args.len() - 2);
    args.extend([
        "--rho-w",
        "1",
        "--windows",
        p(&windows),
        "--no-negatives",
        "--out",
        p(&out),
    ]);
    let out_text = harness(&args);
    assert!(out_text.status.success());
    assert!(String::from_utf8_lossy(&out_text.stderr).contains("1 unknown entity mentions skipped"));
    assert!(fs::read_to_string(&out)
        .unwrap()
        .lines()
        .any(|l| l == "starring nationality country"));
}

#[test]
fn bad_arguments_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (nodes, edges) = tiny_graph(d);
    fs::write(d.join("log.txt"), "starring\n").unwrap();
    fs::create_dir(d.join("t")).unwrap();
    let out = harness(&[
        "run",
        "--graph-nodes",
        &nodes,
        "--graph-edges",
        &edges,
        "--log",
        p(&d.join("log.txt")),
        "--targets",
        p(&d.join("t")),
        "--ranker",
        "magic",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown ranker `magic`"));
    assert!(!harness(&["run"]).status.success());
}
