use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn tmp(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn treedet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treedet")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fig1_determinization_is_golden() {
    let out = tmp("fig1d.aut");
    let dict = tmp("fig1d.dict");
    let dot = tmp("fig1d.dot");
    let o = treedet(&[
        "aut",
        "determinize",
        "--in",
        s(&data("fig1.aut")),
        "--out",
        s(&out),
        "--dict",
        s(&dict),
        "--emit-dot",
        s(&dot),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let listing = std::fs::read_to_string(&dict).unwrap();
    assert_eq!(listing, std::fs::read_to_string(data("golden/fig1d.dict")).unwrap());
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        std::fs::read_to_string(data("golden/fig1d.aut")).unwrap()
    );
    let macrostates = listing.lines().take_while(|l| *l != "transitions").filter(|l| !l.starts_with(' ')).count();
    assert_eq!(macrostates, 4);
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));

    let o = treedet(&["aut", "accepts", "--in", s(&out), "--word", "(a)"]);
    assert_eq!((code(&o), o.stdout.as_slice()), (0, b"accepted\n".as_slice()));
    let o = treedet(&["aut", "run", "--in", s(&out), "--word", "(a)", "--steps", "4"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "m0 m1 m2 m3 m3\n");
    let o = treedet(&["aut", "compare", "--left", s(&data("fig1.aut")), "--right", s(&out), "--jobs", "3"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn compare_reports_disagreement() {
    let empty = tmp("empty.aut");
    let text = std::fs::read_to_string(data("fig1.aut")).unwrap().replace("F=q1", "F=");
    std::fs::write(&empty, text).unwrap();
    let o = treedet(&[
        "aut",
        "compare",
        "--left",
        s(&empty),
        "--right",
        s(&data("golden/fig1d.aut")),
        "--max-stem",
        "1",
        "--max-loop",
        "1",
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("disagree at (a)"));
    let o = treedet(&["aut", "accepts", "--in", s(&empty), "--word", "(a)"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn nu_box_proof_is_golden() {
    let golden = std::fs::read_to_string(data("golden/nu-box.btproof")).unwrap();
    let o = treedet(&["prove", "--formula", "nu x. [] x"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), golden);

    let out = tmp("nu-box.btproof");
    let o = treedet(&["proof", "translate", "--in", s(&data("nu-box.nwproof")), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), golden);

    let dot = tmp("nu-box.dot");
    let o = treedet(&["proof", "check", "--system", "bt", "--in", s(&data("golden/nu-box.btproof")), "--emit-dot", s(&dot)]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(&dot).unwrap().contains("fillcolor"));
    let o = treedet(&["proof", "check", "--system", "nw", "--in", s(&data("nu-box.nwproof"))]);
    assert_eq!(code(&o), 0);
}

#[test]
fn broken_proofs_are_rejected() {
    let golden = std::fs::read_to_string(data("golden/nu-box.btproof")).unwrap();
    let bad = tmp("flipped.btproof");
    std::fs::write(&bad, golden.replacen("\"11\"", "\"10\"", 1)).unwrap();
    let o = treedet(&["proof", "check", "--system", "bt", "--in", s(&bad)]);
    assert_eq!(code(&o), 1);

    let nw = std::fs::read_to_string(data("nu-box.nwproof")).unwrap();
    let mu = tmp("mu-box.nwproof");
    std::fs::write(&mu, nw.replace("nu x.", "mu x.").replace("\"nu\"", "\"mu\"")).unwrap();
    let o = treedet(&["proof", "check", "--system", "nw", "--in", s(&mu)]);
    assert_eq!(code(&o), 1);
    let o = treedet(&["proof", "translate", "--in", s(&mu), "--out", s(&tmp("mu-box.btproof"))]);
    assert_eq!(code(&o), 1);
}

#[test]
fn prover_exit_codes() {
    assert_eq!(code(&treedet(&["prove", "--formula", "mu x. <> x"])), 1);
    assert_eq!(code(&treedet(&["prove", "--formula", "p", "--formula", "~p"])), 0);
    let o = treedet(&["prove", "--formula", "nu x. [] x", "--depth", "2"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn formulas() {
    let o = treedet(&["formula", "parse", "--formula", "νx.□x"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "nu x. []x\n");
    let o = treedet(&["formula", "closure", "--formula", "nu x. [] x"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("[0]"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&treedet(&["formula", "parse", "--formula", "mu x. ~x"])), 2);
    assert_eq!(code(&treedet(&["aut", "accepts", "--in", "/nonexistent.aut", "--word", "(a)"])), 2);
    assert_eq!(code(&treedet(&["aut", "accepts", "--in", s(&data("fig1.aut")), "--word", "a a"])), 2);
    assert_eq!(code(&treedet(&["aut", "run", "--in", s(&data("fig1.aut")), "--word", "(a)"])), 2);
    assert_eq!(code(&treedet(&["proof", "check", "--system", "nw", "--in", s(&data("golden/nu-box.btproof"))])), 2);
    assert_eq!(code(&treedet(&["bogus"])), 2);
    let o = treedet(&["aut", "determinize", "--in", s(&data("golden/fig1d.aut")), "--out", s(&tmp("x.aut"))]);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
}
