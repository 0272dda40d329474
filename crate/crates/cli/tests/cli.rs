use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn regker(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regker"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn parity_dataset(dir: &Path, max_len: u32) -> std::path::PathBuf {
    let mut text = String::from("# alphabet ab\n");
    for len in 0..=max_len {
        for bits in 0..(1u32 << len) {
            let s: String = (0..len)
                .rev()
                .map(|i| if bits >> i & 1 == 0 { 'a' } else { 'b' })
                .collect();
            let label = if s.matches('a').count() % 2 == 0 { "+1" } else { "-1" };
            text.push_str(&format!("{label}\t{s}\n"));
        }
    }
    let path = dir.join(format!("parity{max_len}.tsv"));
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn sample_is_deterministic_given_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sample", "--states", "2", "--alphabet", "ab", "--count", "3", "--seed", "7"];
    let read_all = |sub: &str| -> Vec<String> {
        let out = regker(&[&args[..], &["--out", sub]].concat(), dir.path());
        assert!(out.status.success(), "{}", stderr(&out));
        let mut files: Vec<_> = fs::read_dir(dir.path().join(sub)).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.iter().map(|p| fs::read_to_string(p).unwrap()).collect()
    };
    let first = read_all("one");
    assert_eq!(first.len(), 3);
    assert!(first.iter().all(|t| t.starts_with("dfa v1\nstates 2\nalphabet ab\nstart 0\n")));
    assert_eq!(first, read_all("two"));
}

#[test]
fn sample_without_seed_reports_the_one_it_chose() {
    let dir = tempfile::tempdir().unwrap();
    let out = regker(&["sample", "--states", "1", "--alphabet", "a", "--out", "d"], dir.path());
    assert!(out.status.success());
    assert!(stderr(&out).contains("\"seed\":"), "{}", stderr(&out));
}

#[test]
fn zero_states_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = regker(&["sample", "--states", "0", "--alphabet", "ab", "--seed", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!stderr(&out).is_empty());
}

#[test]
fn exact_kernel_values() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["kernel", "--mode", "exact", "--scaling", "paper", "--alphabet", "ab"];
    let one = regker(&[&base[..], &["--nmax", "1", "a", "b"]].concat(), dir.path());
    assert_eq!(stdout(&one).trim(), "1");
    let two = regker(&[&base[..], &["--nmax", "2", "aa", "aa"]].concat(), dir.path());
    assert_eq!(stdout(&two).trim(), "34");
    // the sum stops at min(|x|, |y|), so single letters only reach n = 1
    let short = regker(&[&base[..], &["--nmax", "2", "a", "a"]].concat(), dir.path());
    assert_eq!(stdout(&short).trim(), "2");
}

#[test]
fn monte_carlo_prints_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["kernel", "--mode", "mc", "--eps", "0.1", "--delta", "0.05", "--seed", "5", "--alphabet", "ab", "ab", "b"];
    let out = regker(&args, dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("m=4427"), "{text}");
    assert!(text.contains("master_seed=5"));
    assert_eq!(text, stdout(&regker(&args, dir.path())));
}

#[test]
fn enumeration_cap_exits_three_with_hint() {
    let dir = tempfile::tempdir().unwrap();
    let out = regker(&["kernel", "--alphabet", "ab", "--nmax", "6", "aaaaaa", "bbbbbb"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("--mode mc"));
}

#[test]
fn unknown_symbol_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = regker(&["kernel", "--alphabet", "ab", "a", "c"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gram_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = parity_dataset(dir.path(), 3);
    let run = |name: &str| {
        let out = regker(
            &["gram", "--dataset", data.to_str().unwrap(), "--mode", "exact", "--nmax", "2", "--seed", "0", "--out", name],
            dir.path(),
        );
        assert!(out.status.success(), "{}", stderr(&out));
        (
            fs::read(dir.path().join(name)).unwrap(),
            fs::read_to_string(dir.path().join(format!("{name}.meta.json"))).unwrap(),
        )
    };
    let (csv, meta) = run("a.csv");
    assert_eq!((csv.clone(), meta.clone()), run("b.csv"));
    assert!(String::from_utf8(csv).unwrap().starts_with("s0,s1,"));
    assert!(meta.contains("\"master_seed\": 0"));
}

#[test]
fn train_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let data = parity_dataset(dir.path(), 4);
    let out = regker(
        &["train", "--dataset", data.to_str().unwrap(), "--mode", "exact", "--nmax", "3", "--epochs", "200", "--model", "parity.model"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "training_errors 0"), "{text}");
    let epochs = text.lines().filter(|l| l.starts_with("epoch ")).count();
    assert!((1..=50).contains(&epochs));

    fs::write(dir.path().join("strings.txt"), "aa\na\n\nbab\nab\n").unwrap();
    let out = regker(&["predict", "--model", "parity.model", "--in", "strings.txt"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "+1\n-1\n+1\n-1\n-1\n");
}

#[test]
fn verify_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["psd", "bounds"] {
        let out = regker(&["verify", "--suite", suite], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        assert!(stdout(&out).lines().all(|l| l.split('\t').nth(2) == Some("PASS")));
    }
    let psd = stdout(&regker(&["verify", "--suite", "psd"], dir.path()));
    assert!(psd.contains("min="));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(regker(&["verify", "--suite", "nope"], dir.path()).status.code(), Some(2));
}
