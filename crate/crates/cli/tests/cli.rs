//! Runs the `iwasawa` binary as a subprocess.

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

/// Runs with an empty config directory so user settings never leak in.
fn run(args: &[&str]) -> Run {
    run_with_config_dir(args, &scratch("empty-config"))
}

fn run_with_config_dir(args: &[&str], dir: &PathBuf) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_iwasawa"))
        .args(args)
        .env("IWASAWA_CONFIG_DIR", dir)
        .output()
        .expect("failed to run iwasawa");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("iwasawa-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn report(r: &Run) -> Value {
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    serde_json::from_str(&r.stdout).expect("report on stdout is JSON")
}

#[test]
fn help_lists_every_subcommand() {
    let r = run(&["--help"]);
    assert_eq!(r.code, 0);
    for cmd in [
        "cchi", "simplicity", "intertwine", "obstruction", "nilpotency", "nakayama", "bruhat", "induce", "duality",
        "selftest",
    ] {
        assert!(r.stdout.contains(cmd), "missing {cmd}");
    }
    for flag in ["--p", "--prec", "--trunc", "--level", "--char", "--k", "--ell", "--samples", "--out"] {
        assert!(run(&["cchi", "--help"]).stdout.contains(flag), "missing {flag}");
    }
}

#[test]
fn cchi_of_trivial_character() {
    let r = run(&["cchi"]);
    let v = report(&r);
    assert_eq!(v["schema"], "iwasawa-report/1");
    assert_eq!(v["command"], "cchi");
    assert_eq!(v["verdict"], "in_n0");
    assert_eq!(v["result"]["classification"]["in_n0_at"], 0);
    assert!(r.stderr.contains("c(chi) = 0"), "{}", r.stderr);
    assert!(r.stderr.contains("in N0 at 0"));
}

#[test]
fn cchi_reads_a_character_file() {
    let dir = scratch("char");
    let path = dir.join("quarter.txt");
    std::fs::write(&path, "p = 3\ntorsion_1 = a^0 d^0\ntorsion_2 = a^0 d^0\nprincipal_1 = a^0 d^0\nprincipal_2 = exp(c*log) c = 1/4\n")
        .unwrap();
    let v = report(&run(&["cchi", "--char", path.to_str().unwrap()]));
    assert_eq!(v["verdict"], "not_in_n0");
    assert_eq!(v["config"]["char_files"][0], path.to_str().unwrap());
}

#[test]
fn duality_on_diag_one_p() {
    let v = report(&run(&["duality", "--p", "5"]));
    assert_eq!(v["verdict"], "not_surjective_not_isometry");
    assert_eq!(v["result"]["exactness"]["elementary_divisors"], serde_json::json!(["1", "5"]));
}

#[test]
fn duality_reads_a_matrix_file() {
    let dir = scratch("matrix");
    let path = dir.join("m.txt");
    std::fs::write(&path, "# a unimodular map\n2 1\n1 1\n").unwrap();
    let v = report(&run(&["duality", "--p", "3", "--matrix", path.to_str().unwrap()]));
    assert_eq!(v["verdict"], "surjective_isometry");
}

#[test]
fn intertwine_shift_zero_and_one() {
    let v = report(&run(&["intertwine", "--p", "5", "--shift", "0"]));
    assert_eq!(v["verdict"], "nonzero_intertwiner");
    let v = report(&run(&["intertwine", "--p", "5", "--shift", "1"]));
    assert_eq!(v["verdict"], "zero");
    assert_eq!(v["result"]["analysis"]["exponent"], 1);
}

#[test]
fn finite_level_commands() {
    let v = report(&run(&["bruhat", "--p", "2", "--level", "2"]));
    assert_eq!(v["result"]["order"], 96);
    assert_eq!(v["verdict"], "partition");
    let v = report(&run(&["induce", "--p", "3"]));
    assert_eq!(v["result"]["dim"], 4);
    assert_eq!(v["verdict"], "nonsingular");
    let v = report(&run(&["nakayama", "--p", "2", "--subgroup", "unipotent"]));
    assert_eq!(v["result"]["coinvariants"]["coinvariant_rank"], 3);
    let v = report(&run(&["nilpotency", "--p", "3"]));
    assert_eq!(v["verdict"], "index_3");
}

#[test]
fn probe_and_obstruction() {
    let v = report(&run(&["simplicity", "--k", "0", "--ell", "1"]));
    assert_eq!(v["verdict"], "persistent_divisor");
    let v = report(&run(&["obstruction", "--ell", "4", "--c", "2", "--degree", "10"]));
    assert_eq!(v["verdict"], "vanishes");
    let v = report(&run(&["obstruction", "--ell", "4", "--c", "-1", "--degree", "10"]));
    assert_eq!(v["verdict"], "nonvanishing");
}

#[test]
fn reports_are_byte_identical_and_carry_the_config() {
    let dir = scratch("det");
    let (a, b) = (dir.join("a.json"), dir.join("b.json"));
    for path in [&a, &b] {
        let r = run(&["nilpotency", "--p", "2", "--level", "2", "--seed", "9", "--out", path.to_str().unwrap()]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert!(r.stdout.contains("report:"));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["config"]["level"], 2);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn config_dir_env_var_supplies_defaults() {
    let dir = scratch("cfgdir");
    std::fs::write(dir.join("config.json"), r#"{"p": 5, "level": 1}"#).unwrap();
    let v = report(&run_with_config_dir(&["bruhat"], &dir));
    assert_eq!(v["result"]["order"], 480);
    // Flags override the file.
    let v = report(&run_with_config_dir(&["bruhat", "--p", "2"], &dir));
    assert_eq!(v["result"]["order"], 6);
}

#[test]
fn errors_exit_nonzero() {
    let dir = scratch("bad");
    std::fs::write(dir.join("config.json"), r#"{"prime": 5}"#).unwrap();
    let r = run_with_config_dir(&["bruhat"], &dir);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("config"));
    assert_eq!(run(&["cchi", "--p", "4"]).code, 2);
    assert_eq!(run(&["cchi", "--char", "/nonexistent/chi.txt"]).code, 2);
    assert_eq!(run(&["nilpotency", "--p", "3", "--subgroup", "iwahori"]).code, 2);
}
