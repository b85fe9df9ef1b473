use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const THREE_CLASS: &str = "classes = [\"a\", \"b\", \"c\"]
metric = [[0, 0.3, 0.8], [0.3, 0, 0.6], [0.8, 0.6, 0]]
shape = \"one-minus-min\"
pi = [0.5, 0.3, 0.2]
";

fn attrnet(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_attrnet"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("run attrnet")
}

fn setup(model: &str, run: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("model.toml"), model).unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, format!("model = \"model.toml\"\n{run}")).unwrap();
    (dir, cfg)
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("{key} missing in\n{text}"))
}

#[test]
fn single_vertex_graph_has_no_edges() {
    let (dir, cfg) = setup(THREE_CLASS, "n = 1\n");
    let out = dir.path().join("out");
    let o = attrnet(&["generate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let graph = read(&out, "graph.txt");
    let body: Vec<&str> = graph.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(body[0].starts_with("1 3 "));
    assert_eq!(body.len(), 2, "{graph}");
}

#[test]
fn generated_density_tracks_marginal() {
    let (dir, cfg) = setup(THREE_CLASS, "n = 80\nreps = 100\n");
    let out = dir.path().join("out");
    let o = attrnet(&["generate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success());
    assert_eq!(value(&read(&out, "generate_summary.txt"), "within_3se"), "true");
}

#[test]
fn provenance_header_and_overrides() {
    let (dir, cfg) = setup(THREE_CLASS, "n = 40\nseed = 5\n");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let cfg = cfg.to_str().unwrap();
    assert!(attrnet(&["generate", "--config", cfg, "--out", a.to_str().unwrap()], &[]).status.success());
    assert!(attrnet(&["generate", "--config", cfg, "--out", b.to_str().unwrap()], &[("ATTRNET_SEED", "6")]).status.success());
    let ga = read(&a, "graph.txt");
    let gb = read(&b, "graph.txt");
    assert!(ga.contains("# seed 5\n") && gb.contains("# seed 6\n"));
    assert_ne!(value(&ga, "# config_hash"), value(&gb, "# config_hash"));

    // the flag beats the environment
    let c = dir.path().join("c");
    let o = attrnet(
        &["generate", "--config", cfg, "--seed", "5", "--out", c.to_str().unwrap()],
        &[("ATTRNET_SEED", "6")],
    );
    assert!(o.status.success());
    assert_eq!(read(&c, "graph.txt"), ga);
}

#[test]
fn sample_estimate_writes_error_table() {
    let (dir, cfg) = setup(THREE_CLASS, "n = 150\nn0 = 20\nreps = 3\n");
    let out = dir.path().join("out");
    let o = attrnet(&["sample-estimate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let errors = read(&out, "errors.csv");
    assert!(errors.contains("a,b,true,estimate,abs_error,status"));
    assert_eq!(errors.lines().filter(|l| !l.starts_with('#')).count(), 1 + 6);
    for section in ["[core]", "[frontier]", "[edges]"] {
        assert!(read(&out, "crawl.txt").contains(section));
    }
}

#[test]
fn statistical_rejection_keeps_exit_zero() {
    let (dir, cfg) = setup("classes = [\"x\"]\nkernel = [[0.3]]\npi = [1.0]\n", "n = 200\nreps = 4\nh0 = \"h0.toml\"\n");
    fs::write(dir.path().join("h0.toml"), "classes = [\"x\"]\nkernel = [[0.1]]\npi = [1.0]\n").unwrap();
    let out = dir.path().join("out");
    let o = attrnet(&["test", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(value(&read(&out, "degree_summary.txt"), "rejections"), "4");
    for name in ["degree_test.csv", "spectrum.csv", "semicircle.txt", "planarity.txt", "centrality.csv", "katz_limit.txt", "walk.csv", "walk.txt"] {
        assert!(read(&out, name).starts_with("# command test\n# config_hash "), "{name}");
    }
}

#[test]
fn sparse_planarity_verdict_from_cli() {
    let (dir, cfg) = setup("classes = [\"x\"]\nkernel = [[0.1]]\npi = [1.0]\n", "n = 10\n");
    let out = dir.path().join("out");
    let o = attrnet(&["test", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(&out, "planarity.txt").contains("planar-with-confidence"));
}

#[test]
fn compare_ranks_dominant_class_first() {
    let (dir, cfg) = setup(
        "classes = [\"big\", \"small\"]\nkernel = [[0.6, 0.2], [0.2, 0.1]]\npi = [0.5, 0.5]\n",
        "n = 120\nreps = 5\n",
    );
    let out = dir.path().join("out");
    let o = attrnet(&["compare", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read(&out, "compare_summary.txt");
    for key in ["top_expected", "top_eigen", "top_katz"] {
        assert_eq!(value(&summary, key), "0", "{key}");
    }
    assert_eq!(read(&out, "budget.csv").lines().filter(|l| !l.starts_with('#')).count(), 6);
}

#[test]
fn compare_single_class_agrees() {
    let (dir, cfg) = setup("classes = [\"x\"]\nkernel = [[0.3]]\npi = [1.0]\n", "n = 50\n");
    let out = dir.path().join("out");
    let o = attrnet(&["compare", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read(&out, "compare_summary.txt");
    assert_eq!(value(&summary, "kendall_expected_eigen"), "1");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let o = attrnet(&["generate", "--out", out], &[]);
    assert_eq!(o.status.code(), Some(2), "missing model");

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "beta = 2.0\n").unwrap();
    assert_eq!(attrnet(&["generate", "--config", bad.to_str().unwrap()], &[]).status.code(), Some(2));

    let (d2, cfg) = setup(THREE_CLASS, "graph = \"graph.txt\"\n");
    fs::write(d2.path().join("graph.txt"), "not a graph\n").unwrap();
    let o = attrnet(&["sample-estimate", "--config", cfg.to_str().unwrap(), "--out", out], &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));

    // a two-class graph against a three-class model
    fs::write(d2.path().join("graph.txt"), "3 2 0\nlabels 0 1 1\n0 1\n").unwrap();
    let o = attrnet(&["test", "--config", cfg.to_str().unwrap(), "--out", out], &[]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    let o = attrnet(&["generate", "--config", cfg.to_str().unwrap(), "--threads", "0"], &[]);
    assert_eq!(o.status.code(), Some(2));
}
