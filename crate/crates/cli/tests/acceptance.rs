//! Acceptance run: one PASS/FAIL line per criterion, with its time budget.
//!
//! Criteria 1-10 call the library checks directly; criterion 11 runs the
//! `iwasawa selftest` binary twice and compares the two report files byte
//! for byte. Runs without the libtest harness so the lines always print.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use iwasawa_core::report::{RunConfig, SCHEMA};
use iwasawa_core::selftest::{run_criterion, CRITERIA};

/// Runtime budgets in seconds, by criterion.
const BUDGETS: [(u32, u64); 10] = [(1, 10), (2, 10), (3, 20), (4, 1), (5, 30), (6, 60), (7, 60), (8, 120), (9, 30), (10, 30)];

fn line(id: u32, passed: bool, detail: &str) -> bool {
    let title = CRITERIA[id as usize - 1].1;
    println!("{} criterion {id:>2} ({title}): {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}

fn run_selftest(bin: &str, config_dir: &Path, out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(bin)
        .args(["selftest", "--out"])
        .arg(out)
        .env("IWASAWA_CONFIG_DIR", config_dir)
        .output()
        .map_err(|e| format!("cannot run {bin}: {e}"))?;
    if !status.status.success() {
        return Err(format!("selftest exited with {:?}", status.status.code()));
    }
    std::fs::read(out).map_err(|e| format!("cannot read {}: {e}", out.display()))
}

fn determinism() -> (bool, String) {
    let dir = std::env::temp_dir().join(format!("iwasawa-acceptance-{}", std::process::id()));
    let config_dir = dir.join("config");
    if let Err(e) = std::fs::create_dir_all(&config_dir) {
        return (false, format!("cannot create {}: {e}", dir.display()));
    }
    let bin = env!("CARGO_BIN_EXE_iwasawa");
    let first = run_selftest(bin, &config_dir, &dir.join("first.json"));
    let second = run_selftest(bin, &config_dir, &dir.join("second.json"));
    let _ = std::fs::remove_dir_all(&dir);
    match (first, second) {
        (Ok(a), Ok(b)) => {
            let schema = String::from_utf8_lossy(&a).contains(SCHEMA);
            (a == b && schema, format!("two selftest reports, {} and {} bytes, identical: {}, schema {SCHEMA}: {schema}", a.len(), b.len(), a == b))
        }
        (Err(e), _) | (_, Err(e)) => (false, e),
    }
}

fn main() -> ExitCode {
    let cfg = RunConfig::default();
    let mut all = true;
    for (id, budget) in BUDGETS {
        let start = Instant::now();
        let outcome = run_criterion(id, &cfg);
        let elapsed = start.elapsed();
        let in_budget = elapsed < Duration::from_secs(budget);
        all &= match outcome {
            Ok(o) => line(
                id,
                o.passed && in_budget,
                &format!("{} [{:.2} s, budget {budget} s]", o.summary, elapsed.as_secs_f64()),
            ),
            Err(e) => line(id, false, &format!("error: {e}")),
        };
    }
    let start = Instant::now();
    let (passed, detail) = determinism();
    all &= line(11, passed, &format!("{detail} [{:.2} s]", start.elapsed().as_secs_f64()));
    println!("acceptance: {}", if all { "all criteria pass" } else { "FAILURES" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
