mod common;

use mosaic_core::dynamics::{evolve, InitialState, TimeGrid};
use mosaic_core::error::Error;
use mosaic_core::hamiltonian::build;
use mosaic_core::io::{
    format_float, manifest_path, me_scan_to_string, parse_me_scan, parse_spectrum, parse_sweep,
    read_text, read_trace, spectrum_to_string, write_sweep, write_text, write_trace, RunManifest,
    ME_HEADER, SCHEMA_VERSION, SPECTRUM_HEADER, SWEEP_HEADER,
};
use mosaic_core::lattice::{LongRangeBond, MosaicParams};
use mosaic_core::spectral::eigensystem;
use mosaic_core::sweep::{
    fig3b_plan, fig4c_entries, me_quench_scan, mobility_edge_base, run_sweep,
};
use proptest::prelude::*;
use std::path::Path;

#[test]
fn trace_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs/trace.csv");
    let h = build(&MosaicParams::new(10, 4.0, 6.0)).unwrap();
    let rec = evolve(
        &h,
        &InitialState::Single(5),
        5,
        &TimeGrid::uniform(20.0, 1.0).unwrap(),
    )
    .unwrap();
    write_trace(&rec, &path).unwrap();
    let back = read_trace(&path).unwrap();
    assert_eq!(back.times, rec.times);
    assert_eq!(back.density, rec.density);
    assert_eq!(back.d_trace, rec.d_trace);
    let rebuilt = back.to_record(5);
    assert_eq!(rebuilt.d_bar, rec.d_bar);
    assert_eq!(rebuilt.m_integrated, rec.m_integrated);
    assert_eq!(rebuilt.n_r_bar, rec.n_r_bar);
}

#[test]
fn sweep_file_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig3b.csv");
    let plan = fig3b_plan();
    let table = run_sweep(&plan, None).unwrap();
    write_sweep(&table, &csv).unwrap();
    let text = read_text(&csv).unwrap();
    assert!(text.starts_with(SWEEP_HEADER));
    let rows = parse_sweep(&text).unwrap();
    assert_eq!(rows.len(), plan.grid.len());
    for (row, orig) in rows.iter().zip(&table.rows) {
        assert_eq!(row.param, orig.param);
        assert_eq!(row.d_bar, orig.outcome.as_ref().unwrap().d_bar);
    }

    let m = RunManifest::new("sweep", plan.base.clone(), "single:14").with_extra("preset", "fig3b");
    let mpath = manifest_path(&csv);
    assert_eq!(mpath, dir.path().join("fig3b.manifest"));
    m.write(&mpath).unwrap();
    assert_eq!(RunManifest::read(&mpath).unwrap(), m);
}

#[test]
fn spectrum_round_trip() {
    let spec = eigensystem(&build(&MosaicParams::new(8, 4.0, 2.0)).unwrap()).unwrap();
    let text = spectrum_to_string(&spec);
    assert!(text.starts_with(SPECTRUM_HEADER));
    let rows = parse_spectrum(&text).unwrap();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0].k, 1);
    for (r, k) in rows.iter().zip(0..) {
        assert_eq!(r.energy, spec.energies[k]);
        assert_eq!(r.d, spec.d_values[k]);
        assert_eq!(r.class, spec.classes[k]);
    }
}

#[test]
fn me_scan_round_trip() {
    let rows = me_quench_scan(&mobility_edge_base(), &fig4c_entries(), 30.0, 1.0, None).unwrap();
    let text = me_scan_to_string(&rows);
    assert!(text.starts_with(ME_HEADER));
    assert_eq!(parse_me_scan(&text).unwrap(), rows);
}

#[test]
fn rejects_foreign_schema_and_bad_headers() {
    let m = RunManifest::new("evolve", MosaicParams::new(24, 4.0, 10.0), "single:14");
    let text = m.serialize().unwrap();
    let bumped = text.replace(
        &format!("schema_version={SCHEMA_VERSION}"),
        &format!("schema_version={}", SCHEMA_VERSION + 1),
    );
    assert!(matches!(
        RunManifest::parse(&bumped),
        Err(Error::SchemaVersion { .. })
    ));
    assert!(parse_sweep("param,d_bar\n1,2\n").is_err());
    assert!(parse_sweep(&format!("{SWEEP_HEADER}\n1,2,3\n")).is_err());
}

#[test]
fn missing_file_names_the_path() {
    let err = read_text(Path::new("/nonexistent/dir/x.csv"))
        .unwrap_err()
        .to_string();
    assert!(err.contains("/nonexistent/dir/x.csv"), "{err}");
}

#[test]
fn write_text_creates_directories() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a/b/c.txt");
    write_text(&path, "x\n").unwrap();
    assert_eq!(read_text(&path).unwrap(), "x\n");
}

#[test]
fn long_range_survives_the_manifest() {
    let p = MosaicParams::new(24, 4.0, 10.0).with_long_range(vec![
        LongRangeBond::new(1, 3, 10.0),
        LongRangeBond::new(4, 20, 0.1),
    ]);
    let m = RunManifest::new("evolve", p.clone(), "comb:6:1");
    assert_eq!(
        RunManifest::parse(&m.serialize().unwrap()).unwrap().params,
        p
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn floats_round_trip(x in common::float_strategy()) {
        let s = format_float(x);
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn tables_and_manifests_round_trip(
        floats in prop::collection::vec(common::float_strategy(), 11..40),
        n in 2usize..100,
        rational in prop::option::of((1u64..1000, 1u64..1000)),
    ) {
        common::check_round_trip(&floats, n, rational)?;
    }
}
