use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use stvem_cli::rates::LineFit;
use stvem_cli::run::Summary;
use stvem_cli::table::read_csv;

fn stvem(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_stvem"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("STVEM_THREADS", t);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("study.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMOOTH: &str = "mode = \"h_uniform\"\ntest_case = 1\np = 1\n[mesh]\nnx = 2\nnt = 2\nlevels = 4\n";

#[test]
fn smooth_uniform_study_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMOOTH);
    let out = stvem(&["run", &cfg], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out_dir = dir.path().join("out");
    let rows = read_csv(fs::File::open(out_dir.join("study.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.windows(2).all(|w| w[1].ey < w[0].ey && w[1].n_dofs > w[0].n_dofs));
    assert!(rows.iter().all(|r| r.en.is_some() && r.seconds.is_none()));
    for k in 1..=4 {
        let text = fs::read_to_string(out_dir.join(format!("meshes/step_{k}.mesh"))).unwrap();
        assert!(text.starts_with("stvem-mesh/1\n"));
    }
    let summary: Summary = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.rows, 4);
    assert!(summary.quadrature_drift < 1e-3);
    let ey = &summary.rates.as_ref().unwrap().columns["EY"];
    assert!((ey.algebraic.slope + 0.5).abs() < 0.1, "{ey:?}");
}

/// Least squares through the 2x2 normal equations in raw sums.
fn normal_equations(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let det = n * sxx - sx * sx;
    ((n * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det)
}

#[test]
fn summary_rates_recompute_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMOOTH);
    assert!(stvem(&["run", &cfg], None).status.success());
    let out_dir = dir.path().join("out");
    let csv_path = out_dir.join("study.csv");
    let rows = read_csv(fs::File::open(&csv_path).unwrap()).unwrap();
    let summary: Summary = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let rates = summary.rates.unwrap();
    let n: Vec<f64> = rows.iter().map(|r| r.n_dofs as f64).collect();
    let ey: Vec<f64> = rows.iter().map(|r| r.ey).collect();
    let k = n.len() - 3;
    let lx: Vec<f64> = n[k..].iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ey[k..].iter().map(|v| v.ln()).collect();
    let (slope, icpt) = normal_equations(&lx, &ly);
    let fit: LineFit = rates.columns["EY"].algebraic;
    assert!((fit.slope - slope).abs() <= 1e-10 && (fit.intercept - icpt).abs() <= 1e-10);
    let cx: Vec<f64> = n.iter().map(|v| v.cbrt()).collect();
    let cy: Vec<f64> = ey.iter().map(|v| v.ln()).collect();
    let (slope, _) = normal_equations(&cx, &cy);
    assert!((rates.columns["EY"].exponential.slope - slope).abs() <= 1e-10);

    // the rates subcommand reproduces the same record
    let out = stvem(&["rates", csv_path.to_str().unwrap()], None);
    assert!(out.status.success());
    let again: stvem_cli::rates::RateSummary = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(again, rates);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let body = "mode = \"adaptive\"\ntest_case = 2\nalpha = 0.55\np = 2\n[adaptive]\ntheta = 0.99\nmax_steps = 6\n";
    let mut files = Vec::new();
    for threads in [None, Some("1"), Some("3")] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), body);
        let out = stvem(&["run", &cfg], threads);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        files.push(fs::read(dir.path().join("out/study.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
}

#[test]
fn invalid_theta_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "mode = \"adaptive\"\ntest_case = 1\np = 1\n[adaptive]\ntheta = 1.5\n",
    );
    let out = stvem(&["run", &cfg], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theta"));
    assert!(!dir.path().join("out").exists());

    let out = stvem(&["run", &cfg], Some("zero"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("STVEM_THREADS"));
}

#[test]
fn test_2_h_study_uses_the_halving_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "mode = \"h_uniform\"\ntest_case = 2\nalpha = 0.55\np = 1\ncompute_en = false\n[mesh]\nnx = 20\nnt = 1\nlevels = 6\n",
    );
    let out = stvem(&["run", &cfg], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out_dir = dir.path().join("out");
    let rows = read_csv(fs::File::open(out_dir.join("study.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.en.is_none() && r.ex.is_none()));
    for i in 1..=6 {
        let text = fs::read_to_string(out_dir.join(format!("meshes/step_{i}.mesh"))).unwrap();
        let dump = stvem::mesh::parse_mesh(&text).unwrap();
        let h_t = 0.2 * 0.5f64.powi(i);
        for e in &dump.elements {
            assert!((e.t.1 - e.t.0 - h_t).abs() < 1e-12);
            assert!((e.x.1 - e.x.0 - h_t / 2.0).abs() < 1e-12);
        }
    }
}

#[test]
fn mesh_dump_writes_without_solving() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mode = \"hp_graded\"\ntest_case = 3\n[mesh]\nlevels = 3\n");
    let out = stvem(&["mesh-dump", &cfg], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out_dir = dir.path().join("out");
    assert!(!out_dir.join("study.csv").exists());
    let text = fs::read_to_string(out_dir.join("meshes/step_3.mesh")).unwrap();
    let dump = stvem::mesh::parse_mesh(&text).unwrap();
    assert_eq!(dump.elements.len(), 18);
    let degrees: std::collections::BTreeSet<u32> = dump.elements.iter().map(|e| e.degree).collect();
    assert_eq!(degrees.into_iter().collect::<Vec<_>>(), vec![1, 2, 3]);
}

#[test]
fn rates_needs_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    fs::write(
        &csv,
        "step,N_dofs,EY,EN,EU,EX,eta1,eta2,eta3,eta4,eta5,eta,effectivity,n_elements,n_slabs,n_ref_elements,seconds\n\
         1,10,0.1,,0.1,,0,0,0,0,0,0.1,1,1,1,1,\n",
    )
    .unwrap();
    let out = stvem(&["rates", csv.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("3 rows"));
}
