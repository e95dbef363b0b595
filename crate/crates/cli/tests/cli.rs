use std::path::Path;
use std::process::{Command, Output};

use pbfree_core::theory::{lognormal_params, FitCoefficients};

fn pbfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbfree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn is_sig9(cell: &str) -> bool {
    if cell == "nan" {
        return true;
    }
    let digits: String = cell.trim_start_matches('-').chars().filter(|c| c.is_ascii_digit()).collect();
    let significant = digits.trim_start_matches('0');
    cell.parse::<f64>().is_ok() && (significant.len() == 9 || digits.chars().all(|c| c == '0'))
}

#[test]
fn pa_quadrature_table() {
    let o = pbfree(&["theory", "pa-quadrature"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("component,value\n"));
    assert!(out.contains("p_a1,0.0182291667\n"));
    assert!(out.contains("p_a,0.500000000\n"));
    assert_eq!(out.lines().count(), 12);
}

#[test]
fn rop_example() {
    let o = pbfree(&["theory", "rop", "--n", "2", "--pa", "0.5", "--nthr", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "n_thr,rop_lower,rop_upper,branch\n1,0.250000000,0.750000000,Linear\n");
    let all = pbfree(&["theory", "rop", "--n", "10", "--pa", "0.55"]);
    assert_eq!(stdout(&all).lines().count(), 12);
}

#[test]
fn outage_at_median_is_half() {
    let p = lognormal_params(500, &FitCoefficients::CORRELATED);
    let lrho = (2f64.powf(1.0) - 1.0) / p.mu.exp();
    let o = pbfree(&["theory", "outage", "--n", "500", "--regime", "correlated", "--rate", "1", "--lrho", &lrho.to_string()]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!(row.ends_with(",0.500000000"), "{row}");
}

#[test]
fn rate_bound_over_grid() {
    let o = pbfree(&["theory", "rate-bound", "--n", "100", "--power-dbm", "-10:5:10"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 6);
    let rates: Vec<f64> = out.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(rates.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(pbfree(&["theory", "rop", "--n", "2", "--pa", "1.5", "--nthr", "1"]).status.code(), Some(1));
    assert_eq!(pbfree(&["theory", "outage", "--n", "100", "--regime", "weird"]).status.code(), Some(1));
    assert_eq!(pbfree(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(pbfree(&["preset", "fig99", "--out", "."]).status.code(), Some(1));
    assert_eq!(pbfree(&[]).status.code(), Some(1));
    assert_eq!(pbfree(&["--help"]).status.code(), Some(0));
}

#[test]
fn run_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.cfg");
    std::fs::write(&cfg, "# small scenario\nn_elements=16\npower_grid_dbm=-30:10:10\nkappa=1\n").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    std::fs::create_dir_all(&a).unwrap();
    std::fs::create_dir_all(&b).unwrap();
    let cfg = cfg.to_str().unwrap();
    for out in [&a, &b] {
        let o = pbfree(&["run", "--config", cfg, "--trials", "300", "--seed", "5", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in ["run.csv", "activation.csv"] {
        assert_eq!(read(&a, name), read(&b, name));
    }
    let run = read(&a, "run.csv");
    assert!(!run.contains('\r'));
    let mut lines = run.lines();
    assert_eq!(lines.next().unwrap(), "tx_power_dbm,outage,outage_std_error,rate,rate_std_error");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 5);
        assert!(cells.iter().all(|c| is_sig9(c)), "{row}");
    }
}

#[test]
fn config_errors_exit_one_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "n_elements=40\nkappa=-1\n").unwrap();
    let o = pbfree(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 2") && err.contains("kappa"), "{err}");

    std::fs::write(&cfg, "n_elements=40\ncolour=blue\n").unwrap();
    let o = pbfree(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown key"));

    let missing = dir.path().join("missing.cfg");
    let o = pbfree(&["run", "--config", missing.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("does/not/exist");
    let o = pbfree(&["preset", "fig7a", "--trials", "50", "--out", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = dir.path().join("ok.cfg");
    std::fs::write(&cfg, "n_elements=8\n").unwrap();
    let o = pbfree(&["run", "--config", cfg.to_str().unwrap(), "--trials", "10", "--out", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn preset_fig7a_columns_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = pbfree(&["preset", "fig7a", "--trials", "500", "--seed", "3", "--out", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in ["fig7a_pa_half.csv", "fig7a_pa_sim.csv"] {
        let text = read(a.path(), name);
        assert_eq!(text, read(b.path(), name));
        assert!(text.starts_with("n_thr,rop_empirical,rop_lower,rop_upper\n"));
        assert_eq!(text.lines().count(), 102);
    }
}

#[test]
fn preset_fig4a_files() {
    let d = tempfile::tempdir().unwrap();
    let o = pbfree(&[
        "preset",
        "fig4a",
        "--trials",
        "200",
        "--power-grid-dbm",
        "-30:10:0",
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for n in [40, 100, 200] {
        for regime in ["iid", "correlated"] {
            let text = read(d.path(), &format!("fig4a_n{n}_{regime}.csv"));
            let mut lines = text.lines();
            assert_eq!(lines.next().unwrap(), "tx_power_dbm,scheme_or_theory,outage,std_error");
            let rows: Vec<&str> = lines.collect();
            assert_eq!(rows.len(), 8);
            assert!(rows[..4].iter().all(|r| r.contains(",phase_free,")));
            assert!(rows[4..].iter().all(|r| r.contains(",theory,")));
        }
    }
}

#[test]
fn preset_fig2b_has_slope_footer() {
    let d = tempfile::tempdir().unwrap();
    let o = pbfree(&["preset", "fig2b", "--trials", "100", "--out", d.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = read(d.path(), "fig2b.csv");
    assert!(text.starts_with("n,mean_gain\n"));
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("slope,"));
    let slope: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!(slope > 1.0 && slope < 2.5);
}
