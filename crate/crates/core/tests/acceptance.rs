//! Acceptance battery: one line per criterion, default (pinned) sizes.
//!
//! Run with `cargo test --release --test acceptance`.

use brickwall::harness::{report_bodies, run_experiment, ExperimentId, ExperimentSpec, Record, Report, Verdict};
use std::process::{Command, ExitCode};
use std::time::Instant;

struct Battery {
    cache: Vec<Report>,
    failures: usize,
}

impl Battery {
    fn report(&mut self, id: ExperimentId) -> &Report {
        if let Some(i) = self.cache.iter().position(|r| r.experiment == id) {
            return &self.cache[i];
        }
        let report = run_experiment(&ExperimentSpec::default_for(id)).expect("experiment runs");
        self.cache.push(report);
        self.cache.last().unwrap()
    }

    fn records(&mut self, id: ExperimentId, keep: impl Fn(&Record) -> bool) -> Vec<Record> {
        self.report(id).records.iter().filter(|r| keep(r)).cloned().collect()
    }

    fn line(&mut self, number: usize, name: &str, pass: bool, detail: String, started: Instant) {
        if !pass {
            self.failures += 1;
        }
        println!(
            "criterion {number:>2} {name:<28} {} {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    }

    fn check(&mut self, number: usize, name: &str, collect: impl FnOnce(&mut Self) -> Vec<Record>) {
        let started = Instant::now();
        let records = collect(self);
        let failed: Vec<String> = records
            .iter()
            .filter(|r| r.verdict == Verdict::Fail)
            .map(|r| {
                format!(
                    "{{{} {} est={:.5}{}}}",
                    r.law,
                    r.parameters,
                    r.estimate,
                    r.p_value.map(|p| format!(" p={p:.4}")).unwrap_or_default()
                )
            })
            .collect();
        let pass = !records.is_empty() && failed.is_empty();
        let detail =
            if failed.is_empty() { format!("({} checks)", records.len()) } else { format!("failed: {}", failed.join(" ")) };
        self.line(number, name, pass, detail, started);
    }
}

fn is_ks(r: &Record) -> bool {
    r.parameters.contains("KS(")
}

fn determinism() -> (bool, String) {
    let dir = tempfile::tempdir().expect("temp dir");
    let bin = env!("CARGO_BIN_EXE_brickwall");
    let run = |threads: &str, name: &str| -> String {
        let out = dir.path().join(name);
        let status = Command::new(bin)
            .args(["verify-all", "--seed", "424242", "--replicas", "40", "--threads", threads, "--format", "json", "--out"])
            .arg(&out)
            .stderr(std::process::Stdio::null())
            .status()
            .expect("spawn brickwall");
        // 1 only means some check failed at this reduced size.
        assert!(matches!(status.code(), Some(0 | 1)), "verify-all errored: {status}");
        let text = std::fs::read_to_string(&out).expect("report written");
        serde_json::to_string(&report_bodies(&text).expect("valid report")).unwrap()
    };
    let a = run("1", "a.json");
    let b = run("2", "b.json");
    (a == b, format!("({} bytes of report body, threads 1 vs 2)", a.len()))
}

fn main() -> ExitCode {
    use ExperimentId::*;
    let mut b = Battery { cache: Vec::new(), failures: 0 };

    b.check(1, "martingale identity", |b| b.records(Martingale, |_| true));
    b.check(2, "variance slope", |b| b.records(VarianceClt, |r| !is_ks(r)));
    b.check(3, "one-step CLT", |b| b.records(VarianceClt, is_ks));
    b.check(4, "covariance decay", |b| b.records(Covariance, |_| true));
    b.check(5, "Kolmogorov estimate", |b| b.records(Kolmogorov, |_| true));
    b.check(6, "Yaglom / dual exponentials", |b| {
        let mut r = b.records(Yaglom, is_ks);
        r.extend(b.records(DualExponentials, is_ks));
        r
    });
    b.check(7, "Feller marginal", |b| {
        let mut r = b.records(FellerMarginal, |_| true);
        r.extend(b.records(ExtinctionLaw, |_| true));
        r
    });
    b.check(8, "Feller internal consistency", |b| b.records(FellerConsistency, |_| true));
    b.check(9, "duality", |b| b.records(Duality, |_| true));
    b.check(10, "BGW cross-check", |b| b.records(BgwCrosscheck, |_| true));
    b.check(11, "brute-force oracle", |b| b.records(OracleEquivalence, |_| true));
    b.check(12, "meshing", |b| b.records(Meshing, |_| true));

    let started = Instant::now();
    let (pass, detail) = determinism();
    b.line(13, "determinism", pass, detail, started);

    if b.failures == 0 {
        println!("acceptance: all 13 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of 13 criteria failed", b.failures);
        ExitCode::FAILURE
    }
}
