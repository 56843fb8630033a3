use std::path::Path;
use std::process::Command;

use hbaca_cli::compare::compare;
use hbaca_cli::render::{hmatrix_rects, partition_rects, svg_string};
use hbaca_cli::results::{read_results, ResultRow};
use hbaca_cli::run::{execute, run, with_pool, BLOCKS_FILE, MESH_FILE, RESULTS_FILE, TRACE_FILE};
use hbaca_cli::{Pipeline, RunConfig};
use hbaca::mesh::load_off;
use hbaca::pipeline::Setup;
use hbaca::{BacaParams, Vec3};

fn hbaca_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hbaca"))
}

fn config(level: usize, px: f64, pipeline: Pipeline) -> RunConfig {
    RunConfig {
        level,
        source: [px, 0.0, 0.0],
        pipeline,
        ..RunConfig::default()
    }
}

fn without_time(mut r: ResultRow) -> ResultRow {
    r.wall_seconds = 0.0;
    r
}

fn median(mut v: Vec<usize>) -> usize {
    v.sort_unstable();
    v[v.len() / 2]
}

#[test]
fn config_round_trips() {
    let mut cfg = config(2, 1.5, Pipeline::Aca);
    cfg.eps_aca = 1e-8;
    cfg.semiaxes = [1.0, 2.5, 3.0];
    let text = cfg.to_config_string();
    let parsed = RunConfig::parse_str(&text).unwrap();
    assert_eq!(parsed, cfg);
    let squash = |s: &str| s.split_whitespace().collect::<String>();
    let spaced = text.replace(" = ", "=").replace('\n', "\n\n  ");
    assert_eq!(squash(&RunConfig::parse_str(&spaced).unwrap().to_config_string()), squash(&text));
}

#[test]
fn example_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        RunConfig::parse_str(&text).unwrap().validate().unwrap();
        count += 1;
    }
    assert!(count >= 5);
}

#[test]
fn run_writes_all_artifacts_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(2, 1.5, Pipeline::Baca);
    cfg.output = dir.path().join("a");
    let first = run(&cfg).unwrap();
    for f in [RESULTS_FILE, TRACE_FILE, BLOCKS_FILE, MESH_FILE] {
        assert!(cfg.output.join(f).is_file(), "{f}");
    }
    assert_eq!(read_results(&cfg.output.join(RESULTS_FILE)).unwrap(), first);
    assert_eq!(load_off::<f64>(cfg.output.join(MESH_FILE)).unwrap().num_triangles(), 320);
    let trace = std::fs::read_to_string(cfg.output.join(TRACE_FILE)).unwrap();
    assert!(trace.starts_with("k,eta,delta,w_norm,marked,cg_iters,entries,storage_bytes,wall"));
    assert_eq!(trace.lines().count(), first.outer_iterations + 2);

    cfg.output = dir.path().join("b");
    let second = run(&cfg).unwrap();
    assert_eq!(without_time(first), without_time(second));
}

#[test]
fn dense_and_fine_aca_give_the_same_error() {
    let aca = with_pool(1, || {
        let mut c = config(2, 10.0, Pipeline::Aca);
        c.eps_aca = 1e-8;
        execute(&c)
    })
    .unwrap()
    .unwrap();
    let dense = execute(&config(2, 10.0, Pipeline::Dense)).unwrap();
    assert!((aca.row.e_h - dense.row.e_h).abs() <= 1e-3);
    assert_eq!(dense.row.compression_percent, 100.0);
}

#[test]
fn aca_storage_is_independent_of_the_source() {
    let rows: Vec<ResultRow> = [10.0, 1.5, 1.1, 1.05]
        .iter()
        .map(|&p| execute(&config(3, p, Pipeline::Aca)).unwrap().row)
        .collect();
    for r in &rows[1..] {
        assert_eq!(r.storage_mb, rows[0].storage_mb);
        assert_eq!(r.compression_percent, rows[0].compression_percent);
        assert_eq!(r.entries, rows[0].entries);
    }
}

#[test]
fn comparing_a_run_to_itself_gives_unit_ratios() {
    let row = execute(&config(1, 1.5, Pipeline::Aca)).unwrap().row;
    for r in compare(&row, &row).unwrap() {
        assert_eq!(r.ratio, 1.0, "{}", r.quantity);
    }
    let other = execute(&config(2, 1.5, Pipeline::Aca)).unwrap().row;
    assert!(compare(&row, &other).is_err());
}

#[test]
fn svg_rectangles_tile_the_matrix() {
    let cfg = config(2, 1.5, Pipeline::Aca);
    let mesh = cfg.build_mesh().unwrap();
    let setup = Setup::new(mesh, cfg.source_point(), cfg.leaf_size, cfg.beta, cfg.orders()).unwrap();
    let rects = partition_rects(&setup.partition);
    let n = setup.size();
    assert_eq!(rects.iter().map(|r| r.width * r.height).sum::<usize>(), n * n);
    let svg = svg_string(n, &rects).unwrap();
    assert_eq!(svg.matches("<rect").count(), rects.len());
    assert!(svg.contains(&format!("viewBox=\"0 0 {n} {n}\"")));
}

#[test]
fn baca_draws_lower_ranks_than_aca() {
    let aca = execute(&config(3, 10.0, Pipeline::Aca)).unwrap();
    let mut cfg = config(3, 10.0, Pipeline::Baca);
    cfg.eps_baca = 1e-8;
    cfg.r0 = 6;
    let baca = execute(&cfg).unwrap();
    let labels = |r: &[hbaca_cli::render::BlockRect]| r.iter().filter_map(|b| b.rank).collect::<Vec<_>>();
    let (la, lb) = (labels(&aca.rects), labels(&baca.rects));
    assert!(!la.is_empty() && !lb.is_empty());
    assert!(median(lb) < median(la));
}

#[test]
fn hmatrix_rects_label_only_low_rank_blocks() {
    let mesh = hbaca::mesh::generate_icosphere::<f64>(2, 1.0).unwrap();
    let setup = Setup::new(mesh, Vec3::new(1.5, 0.0, 0.0), 15, 2.0, Default::default()).unwrap();
    let (res, _) = setup.run_baca(&BacaParams::default()).unwrap();
    let rects = hmatrix_rects(&res.hmatrix);
    for (r, hb) in rects.iter().zip(res.hmatrix.blocks()) {
        if !hb.block.is_admissible() {
            assert!(r.rank.is_none());
        }
    }
    assert!(rects.iter().any(|r| r.rank.is_some()));
}

#[test]
fn ellipsoid_mesh_size_and_cg_savings() {
    let cfg = RunConfig::parse_str(&std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/ellipsoid.conf"),
    )
    .unwrap())
    .unwrap();
    let mesh = cfg.build_mesh().unwrap();
    assert!((3000..=4000).contains(&mesh.num_triangles()));
    mesh.check_closed().unwrap();
    let baca = execute(&cfg).unwrap().row;
    let aca = execute(&RunConfig {
        pipeline: Pipeline::Aca,
        ..cfg.clone()
    })
    .unwrap()
    .row;
    assert!(baca.cg_iterations < aca.cg_iterations);
    assert!(baca.storage_mb < aca.storage_mb);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = hbaca_bin()
        .args(["run", "--level", "1", "--pipeline", "aca", "--output"])
        .arg(dir.path().join("ok"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out = hbaca_bin().args(["run", "--theta", "1.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = hbaca_bin().args(["run", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = hbaca_bin().args(["run", "--beta", "abc"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = hbaca_bin()
        .args(["run", "--geometry", "off", "--off-path"])
        .arg(dir.path().join("missing.off"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn mesh_and_compare_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let off = dir.path().join("m.off");
    let out = hbaca_bin().args(["mesh", "--level", "2", "-o"]).arg(&off).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(load_off::<f64>(&off).unwrap().num_triangles(), 320);

    let run_dir = dir.path().join("r");
    let out = hbaca_bin()
        .args(["run", "--level", "1", "--pipeline", "aca", "--output"])
        .arg(&run_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let results = run_dir.join(RESULTS_FILE);
    let out = hbaca_bin().arg("compare").arg(&results).arg(&results).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("quantity,a,b,ratio"));
    assert_eq!(text.lines().skip(1).filter(|l| l.ends_with(",1")).count(), 4);

    let svg = dir.path().join("b.svg");
    let out = hbaca_bin().args(["render", "--level", "1", "-o"]).arg(&svg).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(svg).unwrap().starts_with("<svg"));
}
