// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.


use std::fs;
use std::path::Path;
use std::process::Command;

use resetwalk::graph::{load_edge_list, Graph};

fn resetwalk(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_resetwalk")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn body(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    body(path).lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn adjacency_of(g: &Graph) -> nalgebra::DMatrix<f64> {
    g.adjacency()
}

#[test]
fn edge_list_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.txt");
    let e = edges.to_str().unwrap();
    let (code, _) = resetwalk(&["graph", "--graph", "ba:60,3", "--seed", "5", "--emit-edgelist", e, "--out", dir.path().join("a.csv").to_str().unwrap()]);
    assert_eq!(code, 0);
    let first = load_edge_list(&fs::read_to_string(&edges).unwrap()).unwrap();
    let again = dir.path().join("h.txt");
    let (code, _) = resetwalk(&["graph", "--edgelist", e, "--emit-edgelist", again.to_str().unwrap(), "--out", dir.path().join("b.csv").to_str().unwrap()]);
    assert_eq!(code, 0);
    let second = load_edge_list(&fs::read_to_string(&again).unwrap()).unwrap();
    assert_eq!(adjacency_of(&first), adjacency_of(&second));
    assert_eq!(body(&dir.path().join("a.csv")), body(&dir.path().join("b.csv")));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs = [
        vec!["simulate", "--graph", "ws:30,2,0.5", "--law", "sibuya:0.4", "--targets", "frac:0.2", "--trials", "2000", "--horizon", "500"],
        vec!["mfht-sweep", "--graph", "ba:40,3", "--targets", "frac:0.1", "--reloc", "degree:0.5", "--agrid", "0.1:0.9:3"],
        vec!["survival", "--graph", "ws:20,2,0.5", "--law", "uniform:4", "--targets", "set:3", "--horizon", "30"],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        for k in 0..2 {
            let out = dir.path().join(format!("{}-{k}.csv", args[0]));
            let mut a = args.clone();
            a.extend(["--out", out.to_str().unwrap()]);
            assert_eq!(resetwalk(&a).0, 0, "{a:?}");
            outputs.push(body(&out));
        }
        assert_eq!(outputs[0], outputs[1]);
        assert!(!outputs[0].is_empty());
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# complete graph\ngraph = cc:10\npgrid = 0.1:0.9:9\n").unwrap();
    let out = dir.path().join("k.csv");
    let (code, _) = resetwalk(&["kemeny-sweep", "--config", cfg.to_str().unwrap(), "--pgrid", "0.5:0.5:1", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = rows(&out);
    assert_eq!(r.len(), 1);
    let k: f64 = r[0][1].parse().unwrap();
    assert!((k - 81.0 / 9.5).abs() < 1e-10);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("# pgrid = 0.5:0.5:1") && text.contains("# graph = cc:10"));
}

#[test]
fn kemeny_sweep_on_complete_graph() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.csv");
    assert_eq!(resetwalk(&["kemeny-sweep", "--graph", "cc:100", "--pgrid", "0.01:0.99:50", "--out", out.to_str().unwrap()]).0, 0);
    let r = rows(&out);
    assert_eq!(r.len(), 50);
    for row in r {
        let p: f64 = row[0].parse().unwrap();
        let k: f64 = row[1].parse().unwrap();
        let e: f64 = row[2].parse().unwrap();
        assert!((k - 99.0 * 99.0 / (100.0 - p)).abs() < 1e-10 * k);
        assert!((e - 1.0 / k * 100.0).abs() < 1e-10);
    }
}

#[test]
fn exit_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n.csv");
    let (code, _) = resetwalk(&["ness", "--graph", "ws:20,2,0.5", "--law", "sibuya:0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 3);
    let r = rows(&out);
    assert_eq!(r.len(), 20);
    assert!(r.iter().all(|row| row[2] == "false"));
    assert_eq!(resetwalk(&["ness", "--graph", "ws:20,2,0.5", "--law", "geom:0.2", "--out", out.to_str().unwrap()]).0, 0);
    assert!(rows(&out).iter().all(|row| row[2] == "true"));
    assert_eq!(resetwalk(&["ness", "--graph", "ws:20,2,0.5"]).0, 2);
    assert_eq!(resetwalk(&["ness", "--graph", "ws:20,2,0.5", "--law", "geom:0.2", "--unknown"]).0, 2);
    assert_eq!(resetwalk(&["graph", "--edgelist", dir.path().join("missing.txt").to_str().unwrap()]).0, 2);
    let bip = dir.path().join("square.txt");
    fs::write(&bip, "0 1\n1 2\n2 3\n3 0\n").unwrap();
    assert_eq!(resetwalk(&["graph", "--edgelist", bip.to_str().unwrap()]).0, 2);
    assert_eq!(resetwalk(&["mfpt-sweep", "--graph", "cc:5", "--pgrid", "0.5:0.1:3"]).0, 2);
    assert_eq!(resetwalk(&["--help"]).0, 0);
}

#[test]
fn infinite_mfht_is_written_as_inf() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let summary = dir.path().join("sum.csv");
    let args = [
        "survival", "--graph", "ws:40,2,0", "--law", "uniform:3", "--reloc", "node:0", "--targets", "set:20",
        "--horizon", "20", "--out", out.to_str().unwrap(), "--summary", summary.to_str().unwrap(),
    ];
    assert_eq!(resetwalk(&args).0, 0);
    let s = rows(&summary);
    assert_eq!(s.len(), 40);
    assert!(s.iter().all(|row| row[1] == "inf" && row[3] == "non-ergodic-hallmark"));
    assert_eq!(s[0][2].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows(&out).len(), 40 * 21);
}

#[test]
fn simulate_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("traj.csv");
    let out = dir.path().join("est.csv");
    let args = [
        "simulate", "--graph", "cc:5", "--law", "geom:0.5", "--reloc", "node:1", "--targets", "set:4", "--trials", "100",
        "--horizon", "50", "--dump", dump.to_str().unwrap(), "--dump-trials", "3", "--out", out.to_str().unwrap(),
    ];
    assert_eq!(resetwalk(&args).0, 0);
    let text = fs::read_to_string(&dump).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("trial,t,node,event"));
    let trials: std::collections::BTreeSet<&str> = lines.clone().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(trials.into_iter().collect::<Vec<_>>(), vec!["0", "1", "2"]);
    assert_eq!(lines.filter(|l| l.ends_with(",kill")).count(), 3);
    let r = rows(&out);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][3].parse::<usize>().unwrap() + r[0][4].parse::<usize>().unwrap(), 100);
}
