use elastica::io::{self, Format};
use elastica::svg;
use elastica_core::{make_scenario, run_flow, EnergyParams, FlowConfig, Preset, Trajectory};

fn short_sinus(steps: usize) -> Trajectory {
    let preset = Preset::by_name("sinus").unwrap();
    let initial = make_scenario(&preset.scenario).unwrap();
    let params = EnergyParams::new(preset.epsilon, preset.tau).unwrap();
    run_flow(&initial, &FlowConfig::new(params).with_steps(steps)).unwrap()
}

#[test]
fn jsonl_round_trip_is_bit_exact() {
    let traj = short_sinus(3);
    let dir = tempfile::tempdir().unwrap();
    let files = io::write_trajectory(&traj, dir.path(), Format::Jsonl).unwrap();
    let records = io::read_jsonl(&files[0]).unwrap();
    assert_eq!(records.len(), traj.snapshots.len());
    for (rec, snap) in records.iter().zip(&traj.snapshots) {
        assert_eq!(rec.t.to_bits(), snap.time.to_bits());
        assert_eq!(rec.l.to_bits(), snap.curve.edge_len().to_bits());
        for (p, q) in rec.points.iter().zip(snap.curve.points()) {
            assert_eq!(p[0].to_bits(), q.x.to_bits());
            assert_eq!(p[1].to_bits(), q.y.to_bits());
        }
    }
}

#[test]
fn single_snapshot_gives_one_record() {
    let traj = short_sinus(0);
    let dir = tempfile::tempdir().unwrap();
    let files = io::write_trajectory(&traj, dir.path(), Format::Jsonl).unwrap();
    assert_eq!(io::read_jsonl(&files[0]).unwrap().len(), 1);
}

#[test]
fn csv_row_counts() {
    let traj = short_sinus(4);
    let dir = tempfile::tempdir().unwrap();
    io::write_trajectory(&traj, dir.path(), Format::Csv).unwrap();
    let count = |name: &str| {
        csv::Reader::from_path(dir.path().join(name))
            .unwrap()
            .records()
            .count()
    };
    let n = traj.final_curve().len();
    assert_eq!(count("points.csv"), traj.snapshots.len() * n);
    assert_eq!(count("scalars.csv"), traj.snapshots.len());
}

#[test]
fn svg_polyline_counts_and_determinism() {
    let traj = short_sinus(9);
    let curves: Vec<_> = traj.snapshots.iter().map(|s| &s.curve).collect();
    assert_eq!(curves.len(), 10);
    let polylines = |s: &str| s.matches("<polyline").count();
    assert_eq!(polylines(&svg::render(&curves[..1], 1)), 1);
    let strided = svg::render(&curves, 2);
    assert_eq!(polylines(&strided), 5);
    assert_eq!(strided, svg::render(&curves, 2));
    // violet first, red last
    assert!(strided.find("#6c00d9").unwrap() < strided.find("#d90000").unwrap());
}

#[test]
fn polyline_text_round_trip() {
    let text = "# comment\n0 0\n\n1.5 -2\n3 4e-1\n";
    let pts = io::parse_polyline(text).unwrap();
    assert_eq!(pts.len(), 3);
    assert_eq!(io::parse_polyline(&io::format_polyline(&pts)).unwrap(), pts);
    assert!(io::parse_polyline("1 2 3\n").is_err());
}
