use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use refractor::commands::{AgreementJson, EventJson, Golden, SolutionJson};
use refractor::{Problem, ProblemSpec};
use refractor_core::norms::{MediumPair, Norm};
use refractor_core::surfaces::UniformSurface;
use refractor_core::{Mat, Vector};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_refractor"));
    c.env_remove("REFRACTOR_THREADS");
    c
}

fn example() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/iso_5targets.json")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn snell_event(dir: &tempfile::TempDir, media: &str, x: [f64; 3], nu: [f64; 3]) -> Output {
    let f = write(
        dir,
        "event.json",
        &format!(r#"{{"media": {media}, "x": {x:?}, "nu": {nu:?}}}"#),
    );
    run(&["snell", &f])
}

#[test]
fn snell_normal_incidence() {
    let dir = tempfile::tempdir().unwrap();
    let out = snell_event(&dir, r#"{"n1": 1.5, "n2": 1.0}"#, [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]);
    let e: EventJson = serde_json::from_str(&ok(&out)).unwrap();
    assert_eq!(e.m, [0.0, 0.0, 1.0]);
    assert!((e.lambda + 0.5).abs() < 1e-15);
    assert!(e.constraint);
}

#[test]
fn snell_scalar_law() {
    let dir = tempfile::tempdir().unwrap();
    let s = 0.5f64.sqrt();
    let out = snell_event(&dir, r#"{"n1": 1.0, "n2": 1.5}"#, [s, 0.0, s], [0.0, 0.0, 1.0]);
    let e: EventJson = serde_json::from_str(&ok(&out)).unwrap();
    // m lies on the sphere of radius 1/n₂
    let unit = e.m.map(|c| c * 1.5);
    assert!((unit[0] - 0.47140).abs() < 1e-4);
    assert!(unit[1].abs() < 1e-15);
    assert!((unit[2] - 0.88192).abs() < 1e-4);
}

#[test]
fn snell_anisotropic_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let media = r#"{"A1": [[1,0,0],[0,1,0],[0,0,1]], "A2": [[0.5,0,0],[0,0.5,0],[0,0,0.4]]}"#;
    let pair = MediumPair::new(
        Norm::ellipsoidal(Mat::identity()).unwrap(),
        Norm::ellipsoidal(Mat::diag([0.5, 0.5, 0.4])).unwrap(),
    )
    .unwrap();
    let nu = Vector::new([0.1, -0.2, 1.0]).normalized();
    for x in [[0.05, 0.1, 1.0], [-0.2, 0.1, 1.0], [0.3, 0.3, 1.0]] {
        let out = snell_event(&dir, media, x, nu.0);
        let e: EventJson = serde_json::from_str(&ok(&out)).unwrap();
        let (x, m) = (Vector::new(e.x), Vector::new(e.m));
        assert!((pair.n1().eval(&x) - 1.0).abs() < 1e-10);
        assert!((pair.n2().eval(&m) - 1.0).abs() < 1e-10);
        let d = pair.n2().gradient(&m).unwrap() - pair.n1().gradient(&x).unwrap();
        assert!(d.rejection(&nu).norm() <= 1e-9);
        assert!(x.dot(&nu) >= 0.0 && m.dot(&nu) >= 0.0);
    }
}

#[test]
fn snell_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // past the critical angle
    let out = snell_event(&dir, r#"{"n1": 1.5, "n2": 1.0}"#, [1.0, 0.0, 0.2], [0.0, 0.0, 1.0]);
    assert_eq!(out.status.code(), Some(2));
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(payload["error"], "no_refraction");
    // incidence from the wrong side
    let out = snell_event(&dir, r#"{"n1": 1.5, "n2": 1.0}"#, [0.0, 0.0, -1.0], [0.0, 0.0, 1.0]);
    assert_eq!(out.status.code(), Some(1));
    let bad = write(&dir, "bad.json", r#"{"media": {"n1": 1.5}, "x": [0,0,1], "nu": [0,0,1]}"#);
    assert_eq!(run(&["snell", &bad]).status.code(), Some(1));
    assert_eq!(run(&["snell"]).status.code(), Some(1));
    assert_eq!(run(&["snell", "/nonexistent/event.json"]).status.code(), Some(1));
}

#[test]
fn packaged_example_matches_golden() {
    let out = ok(&run(&["design", example().to_str().unwrap()]));
    let sol: SolutionJson = serde_json::from_str(&out).unwrap();
    let golden: Golden = serde_json::from_str(
        &std::fs::read_to_string(example().with_file_name("iso_5targets.golden.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(sol.radii.len(), golden.radii.len());
    for (b, g) in sol.radii.iter().zip(&golden.radii) {
        assert!((b - g).abs() <= 1e-6 * g, "{b} vs {g}");
    }
    assert!(sol.residual <= 1e-3);
    assert_eq!(sol.radii[0], 1.0);
}

#[test]
fn regen_golden_writes_the_radii() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let out = ok(&run(&["design", example().to_str().unwrap(), "--regen-golden", g.to_str().unwrap()]));
    let sol: SolutionJson = serde_json::from_str(&out).unwrap();
    let golden: Golden = serde_json::from_str(&std::fs::read_to_string(&g).unwrap()).unwrap();
    assert_eq!(golden.radii, sol.radii);
}

#[test]
fn design_artifacts_and_convergence_log() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("m.obj");
    let report = dir.path().join("r.csv");
    let out = ok(&run(&[
        "design",
        example().to_str().unwrap(),
        "--tol",
        "5e-4",
        "--mesh",
        mesh.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]));
    let sol: SolutionJson = serde_json::from_str(&out).unwrap();
    assert!(sol.residual <= 5e-4);
    assert_eq!(sol.residual_history.len(), sol.iterations + 1);
    assert_eq!(*sol.residual_history.last().unwrap(), sol.residual);
    // after the first sweep every later one can only lower the residual
    for w in sol.residual_history[1..].windows(2) {
        assert!(w[1] <= w[0], "{:?}", sol.residual_history);
    }

    let csv = std::fs::read_to_string(&report).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,g,M,b"));
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], i.to_string());
        assert_eq!(f[1].parse::<f64>().unwrap(), sol.goals[i]);
        assert_eq!(f[2].parse::<f64>().unwrap(), sol.masses[i]);
        assert_eq!(f[3].parse::<f64>().unwrap(), sol.radii[i]);
    }

    let obj = std::fs::read_to_string(&mesh).unwrap();
    let verts = obj.lines().filter(|l| l.starts_with("v ")).count();
    let faces = obj.lines().filter(|l| l.starts_with("f ")).count();
    assert_eq!(verts, sol.node_count);
    assert!(faces > verts);
}

#[test]
fn single_target_mesh_is_one_surface_patch() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        &dir,
        "one.json",
        r#"{"media": {"n1": 1.5, "n2": 1.0},
            "source": {"axis": [0, 0, 1], "angle": 0.3, "node_count": 400, "density": "uniform"},
            "targets": [{"m": [0.1, 0, 1], "g": 7}], "b1": 2.0, "tol": 1e-3, "seed": 0}"#,
    );
    let mesh = dir.path().join("m.obj");
    let sol: SolutionJson =
        serde_json::from_str(&ok(&run(&["design", &p, "--mesh", mesh.to_str().unwrap()]))).unwrap();
    assert_eq!(sol.radii, vec![2.0]);
    assert_eq!(sol.masses, sol.goals);
    assert_eq!(sol.residual, 0.0);

    let pair = MediumPair::new(Norm::isotropic(1.5).unwrap(), Norm::isotropic(1.0).unwrap()).unwrap();
    let m = Vector::new([0.1, 0.0, 1.0]).normalized();
    let s = UniformSurface::new(&pair, m, 2.0).unwrap();
    for line in std::fs::read_to_string(&mesh).unwrap().lines().filter(|l| l.starts_with("v ")) {
        let c: Vec<f64> = line[2..].split(' ').map(|t| t.parse().unwrap()).collect();
        let v = Vector::new([c[0], c[1], c[2]]);
        let x = pair.n1().normalize(&v).unwrap();
        let r = pair.n1().eval(&v);
        assert!((r - s.radius(&x).unwrap()).abs() <= 1e-12 * r);
    }
}

#[test]
fn design_failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ex = example();
    let ex = ex.to_str().unwrap();
    let out = run(&["design", ex, "--tol", "1e-9", "--max-sweeps", "3"]);
    assert_eq!(out.status.code(), Some(3));
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(payload["error"], "non_convergence");
    assert!(payload["residual"].as_f64().unwrap() > 1e-9);

    // a target beyond the admissible cone
    let far = write(
        &dir,
        "far.json",
        r#"{"media": {"n1": 1.5, "n2": 1.0},
            "source": {"axis": [0, 0, 1], "angle": 0.3, "node_count": 100, "density": "uniform"},
            "targets": [{"m": [0, 0, 1], "g": 1}, {"m": [1, 0, 0], "g": 1}], "b1": 1.0, "tol": 1e-3, "seed": 0}"#,
    );
    let out = run(&["design", &far]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("pairs violate") && msg.contains("m_1"), "{msg}");
}

#[test]
fn fresnel_axis_rows_and_norm() {
    let dir = tempfile::tempdir().unwrap();
    let biaxial = write(&dir, "b.json", r#"{"eps": [[1,0,0],[0,2,0],[0,0,3]], "mu": [[1,0,0],[0,1,0],[0,0,1]]}"#);
    let csv = ok(&run(&["fresnel", &biaxial, "--samples", "10"]));
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 13);
    assert_eq!(&rows[0][..3], &[1.0, 0.0, 0.0]);
    assert!((rows[0][3] - 2f64.sqrt()).abs() < 1e-12);
    assert!((rows[0][4] - 3f64.sqrt()).abs() < 1e-12);
    // two sheets: no norm
    let norm = dir.path().join("n.json");
    let out = run(&["fresnel", &biaxial, "--norm", norm.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let iso = write(&dir, "i.json", r#"{"eps": [[2,0,0],[0,2,0],[0,0,2]], "mu": [[3,0,0],[0,3,0],[0,0,3]]}"#);
    let csv_path = dir.path().join("i.csv");
    let out = ok(&run(&[
        "fresnel",
        &iso,
        "--out",
        csv_path.to_str().unwrap(),
        "--norm",
        norm.to_str().unwrap(),
    ]));
    assert!(out.is_empty());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    // constant up to rounding in Φ and Ψ
    let radii: Vec<f64> = csv
        .lines()
        .skip(1)
        .flat_map(|l| l.split(',').skip(3).map(|t| t.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .collect();
    let r0 = (2.0f64 / 3.0).sqrt();
    assert!(radii.iter().all(|r| (r - r0).abs() <= 1e-15 * r0));
    let n: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&norm).unwrap()).unwrap();
    assert_eq!(n["kind"], "ellipsoidal");
    // refractive index √(εμ) = √6
    assert!((n["A"][0][0].as_f64().unwrap() - 6f64.sqrt()).abs() < 1e-12);
}

#[test]
fn induced_norm_plugs_back_into_a_problem() {
    let dir = tempfile::tempdir().unwrap();
    let mat = write(&dir, "m.json", r#"{"eps": [[2,0,0],[0,2,0],[0,0,3]], "mu": [[4,0,0],[0,4,0],[0,0,6]]}"#);
    let norm = dir.path().join("n.json");
    ok(&run(&["fresnel", &mat, "--samples", "0", "--norm", norm.to_str().unwrap()]));
    let n = std::fs::read_to_string(&norm).unwrap();
    let ev = write(
        &dir,
        "e.json",
        &format!(r#"{{"media": {{"N1": {n}, "N2": {{"kind": "lq", "q": 2}}}}, "x": [0,0,1], "nu": [0,0,1]}}"#),
    );
    let e: EventJson = serde_json::from_str(&ok(&run(&["snell", &ev]))).unwrap();
    assert!((e.m[2] - 1.0).abs() < 1e-12);
}

#[test]
fn verify_reports_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let ex = example();
    let ex = ex.to_str().unwrap();
    let sol = dir.path().join("s.json");
    ok(&run(&["design", ex, "-o", sol.to_str().unwrap()]));
    let a: AgreementJson =
        serde_json::from_str(&ok(&run(&["verify", ex, "--solution", sol.to_str().unwrap()]))).unwrap();
    assert_eq!((a.nodes, a.targets), (500, 5));
    assert_eq!(a.mismatched_mass, 0.0);
    assert!(a.tie_band_mass <= 1e-3 * a.total);
    assert!(a.relative_gap <= 1e-12);
    assert!(a.c_concave);
    // solving inside verify gives the same report
    let b: AgreementJson = serde_json::from_str(&ok(&run(&["verify", ex]))).unwrap();
    assert_eq!(a, b);
}

#[test]
fn export_surface_and_refractor() {
    let dir = tempfile::tempdir().unwrap();
    let ex = example();
    let ex = ex.to_str().unwrap();
    let obj = ok(&run(&["export", ex, "--m", "0,0.1,1", "--b", "2"]));
    assert!(obj.starts_with("# uniform surface"));
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 5000);
    let sol = dir.path().join("s.json");
    let mesh = dir.path().join("m.obj");
    ok(&run(&["design", ex, "-o", sol.to_str().unwrap(), "--mesh", mesh.to_str().unwrap()]));
    let exported = ok(&run(&["export", ex, "--solution", sol.to_str().unwrap()]));
    assert_eq!(exported, std::fs::read_to_string(&mesh).unwrap());
    assert_eq!(run(&["export", ex, "--m", "0,1", "--b", "2"]).status.code(), Some(1));
    assert_eq!(run(&["export", ex]).status.code(), Some(1));
}

#[test]
fn thread_override_and_determinism() {
    let ex = example();
    let ex = ex.to_str().unwrap();
    let one = ok(&run(&["design", ex, "--threads", "1"]));
    let many = ok(&bin().args(["design", ex, "--threads", "1"]).env("REFRACTOR_THREADS", "6").output().unwrap());
    assert_eq!(one, many);
    let bad = bin().args(["design", ex]).env("REFRACTOR_THREADS", "lots").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn problem_schema_matches_the_loader() {
    let schema: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/problem.schema.json")).unwrap(),
    )
    .unwrap();
    let spec = ProblemSpec::load(&example()).unwrap();
    let value = serde_json::to_value(&spec).unwrap();
    let mut fields: Vec<&String> = value.as_object().unwrap().keys().collect();
    let mut required: Vec<&str> = schema["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    fields.sort();
    required.sort();
    assert_eq!(fields, required);
    let p = Problem::new(spec).unwrap();
    assert_eq!(p.source.len(), 5000);
}
