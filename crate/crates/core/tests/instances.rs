mod common;

use std::fs;

use edo_core::instance_io::resolve_instance;
use edo_core::problems::ProblemKind;
use edo_core::Error;

use common::*;

#[test]
fn hamming_is_complemented_for_vertex_cover() {
    let dir = tempfile::tempdir().unwrap();
    write_dimacs(&dir.path().join("hamming6-2.clq"), &hamming_graph(6, 2));
    fs::write(dir.path().join("hamming6-2.meta"), "opt=32\n").unwrap();
    let inst = resolve_instance("hamming6-2", ProblemKind::MinVertexCover, dir.path()).unwrap();
    assert!(inst.complemented);
    assert_eq!(inst.n(), 64);
    // complement of hamming6-2 is the 6-cube
    assert_eq!(inst.graph.edge_count(), 192);
    assert!((0..64).all(|v| inst.graph.degree(v) == 6));
    assert_eq!(inst.known_opt, Some(32.0));
}

#[test]
fn coverage_threshold_from_name() {
    let dir = tempfile::tempdir().unwrap();
    let g = model_rb_clique(5, 4, 0.25, 2.0, 1);
    write_dimacs(&dir.path().join("rb.clq"), &g);
    fs::write(dir.path().join("rb.meta"), "opt=5\nopt.maxcut=11\n").unwrap();
    let inst = resolve_instance("rb-3", ProblemKind::MaxCoverage, dir.path()).unwrap();
    assert_eq!(inst.threshold, Some(3));
    assert!(inst.complemented);
    assert_eq!(inst.graph.edge_count(), 20 * 19 / 2 - g.edge_count());
    // the graph's optimum belongs to another problem
    assert_eq!(inst.known_opt, None);
    assert_eq!(inst.diversity_bound(4), Some(edo_core::diversity::diversity_bound(20, 3, 4).unwrap()));

    let cut = resolve_instance("rb", ProblemKind::MaxCut, dir.path()).unwrap();
    assert_eq!(cut.known_opt, Some(11.0));
    assert!(!cut.complemented);
}

#[test]
fn instance_level_sidecar_wins() {
    let dir = tempfile::tempdir().unwrap();
    write_dimacs(&dir.path().join("rb.clq"), &model_rb_clique(5, 4, 0.25, 2.0, 1));
    fs::write(dir.path().join("rb-3.meta"), "opt=14\nB=4\n").unwrap();
    let inst = resolve_instance("rb-3", ProblemKind::MaxCoverage, dir.path()).unwrap();
    assert_eq!(inst.threshold, Some(3));
    assert_eq!(inst.known_opt, Some(14.0));
}

#[test]
fn gset_by_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("G9.txt");
    write_gset(&path, &gnm(40, 100, 3));
    let inst = resolve_instance(path.to_str().unwrap(), ProblemKind::MaxCut, dir.path()).unwrap();
    assert_eq!(inst.name, "G9");
    assert_eq!(inst.graph.edge_count(), 100);
    assert_eq!(inst.diversity_bound(10), Some(100 * 25));
}

#[test]
fn failures() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        resolve_instance("nothing", ProblemKind::MaxCut, dir.path()),
        Err(Error::UnknownInstance(_))
    ));
    write_dimacs(&dir.path().join("rb.clq"), &model_rb_clique(4, 3, 0.25, 2.0, 2));
    assert!(matches!(
        resolve_instance("rb", ProblemKind::MaxCoverage, dir.path()),
        Err(Error::MissingMetadata { .. })
    ));
    fs::write(dir.path().join("bad.clq"), "p edge 3 1\ne 1 7\n").unwrap();
    assert!(resolve_instance("bad", ProblemKind::MaxCut, dir.path()).is_err());
}
