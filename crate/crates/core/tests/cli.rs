use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use deriva::derivation::inner_derivation;
use deriva::{Family, FiniteGroup, GroupAlgebra, PrimeField, Rationals};
use serde_json::Value;

fn deriva(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deriva")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn dimensions_json() {
    let o = deriva(&["dimensions", "--family", "dihedral", "--n", "6", "--char", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["group"], "D_12");
    assert_eq!(v["dims"]["der"], 8);
    assert_eq!(v["dims"]["inner"], 6);
    assert_eq!(v["dims"]["outer"], 2);
}

#[test]
fn cayley_table_input() {
    let dir = tempfile::tempdir().unwrap();
    let c2 = write(dir.path(), "c2.csv", "# cyclic of order 2\n0,1\n1,0\n");
    let o = deriva(&["dimensions", "--cayley", &c2, "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",2,2,0,0,0"), "{}", stdout(&o));

    let bad = write(dir.path(), "bad.csv", "0,1\n0,1\n");
    assert_eq!(deriva(&["classes", "--cayley", &bad]).status.code(), Some(3));
    let ragged = write(dir.path(), "ragged.csv", "0,1\n1\n");
    assert_eq!(deriva(&["classes", "--cayley", &ragged]).status.code(), Some(3));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(deriva(&["verify", "--family", "dihedral", "--n", "3", "--char", "2"]).status.code(), Some(2));
    assert_eq!(deriva(&["dimensions", "--family", "dihedral", "--n", "3", "--char", "9"]).status.code(), Some(2));
    assert_eq!(deriva(&["dimensions", "--family", "dihedral", "--n", "2"]).status.code(), Some(2));
    assert_eq!(deriva(&["dimensions", "--family", "cyclic", "--n", "4"]).status.code(), Some(2));
}

#[test]
fn inner_only_accepts_characteristic_two() {
    let o = deriva(&["verify", "--family", "semidihedral", "--n", "2", "--char", "2", "--inner-only", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dims"]["inner"], 9);
}

#[test]
fn verify_reports_first_divergence() {
    let o = deriva(&["verify", "--family", "dihedral", "--n", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("first divergence: claimed basis extends to derivations"));
}

#[test]
fn witness_recovers_inner_derivation() {
    let dir = tempfile::tempdir().unwrap();
    let g = Arc::new(FiniteGroup::from_family(Family::Dihedral, 3, false).unwrap());
    let alg = GroupAlgebra::new(g.clone(), Rationals);
    let b = g.family_element(0, 1);
    let d = inner_derivation(&alg, &alg.basis(b));
    let path = write(dir.path(), "d.json", &d.to_json(&alg).to_string());
    let o = deriva(&["witness", "--family", "dihedral", "--n", "3", "--derivation", &path, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let beta = alg.from_json(&serde_json::from_str(&stdout(&o)).unwrap()).unwrap();
    assert_eq!(inner_derivation(&alg, &beta), d);
}

#[test]
fn witness_reports_outer() {
    let dir = tempfile::tempdir().unwrap();
    let g = Arc::new(FiniteGroup::from_family(Family::Dihedral, 3, false).unwrap());
    let alg = GroupAlgebra::new(g.clone(), PrimeField::new(3).unwrap());
    // (a(a - a^2), 0) extends in characteristic 3 and is not inner
    let a = g.family_element(1, 0);
    let f = deriva::GeneratorAssignment {
        images: vec![alg.from_terms(&[(1, g.power(a, 2)), (-1, g.identity())]), alg.zero()],
    };
    let d = deriva::derivation::extend_generator_map(&alg, &f).unwrap();
    let path = write(dir.path(), "d.json", &d.to_json(&alg).to_string());
    let o = deriva(&["witness", "--family", "dihedral", "--n", "3", "--char", "3", "--derivation", &path]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "OUTER\n");

    // not a derivation: d(a) = 1, everything else 0
    let mut bogus = deriva::DerivationMatrix::zero(&alg);
    bogus.columns[a] = alg.one();
    let path = write(dir.path(), "bogus.json", &bogus.to_json(&alg).to_string());
    let o = deriva(&["witness", "--family", "dihedral", "--n", "3", "--char", "3", "--derivation", &path]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("classes.txt");
    let o = deriva(&["classes", "--family", "dihedral", "--n", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("D_6: order 6, 3 conjugacy classes (1 central)\n"), "{text}");
}

#[test]
fn sweep_filters_and_grid_override() {
    let o = deriva(&["sweep", "--families", "dihedral", "--chars", "0", "--format", "csv"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.starts_with("dihedral,") && r.split(',').nth(2) == Some("0")));

    let o = Command::new(env!("CARGO_BIN_EXE_deriva"))
        .args(["sweep", "--format", "csv"])
        .env("DERIVA_GRID", r#"{"families": {"semidihedral": [1]}, "chars": [0, 3]}"#)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("# summary: 2 cells, 2 pass, 0 fail\n"), "{}", stdout(&o));

    let o = Command::new(env!("CARGO_BIN_EXE_deriva"))
        .args(["sweep"])
        .env("DERIVA_GRID", r#"{"families": {"dihedral": [3]}, "chars": [2]}"#)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_output_independent_of_thread_count() {
    let run = |k: &str| stdout(&deriva(&["sweep", "--families", "dicyclic", "--format", "json", "--parallel", k]));
    assert_eq!(run("1"), run("4"));
}
