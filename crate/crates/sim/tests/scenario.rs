use nlint_sim::scenario::{
    CrystalSection, GeometrySection, GridSection, KernelChoice, OutputSection, PumpSection, SampleSection, ScanSection,
};
use nlint_sim::{parse_scenario, run_scenario, Format, Scenario, Task};
use proptest::prelude::*;

fn sample() -> impl Strategy<Value = SampleSection> {
    prop_oneof![
        Just(SampleSection::Mirror),
        (0.0f64..0.7, -3.0f64..3.0).prop_map(|(m, p)| SampleSection::Uniform { r: [m * p.cos(), m * p.sin()] }),
        (-0.5f64..0.5, 0.0f64..0.5, 0.0f64..100.0, 1.0f64..3.0, proptest::option::of(0.5f64..3.0)).prop_map(
            |(r0, r1, thickness_um, index, carrier_rad_per_fs)| SampleSection::Bilayer {
                r0,
                r1,
                thickness_um,
                index,
                carrier_rad_per_fs
            }
        ),
        (1.0f64..1.5, 1.5f64..2.0, 1.0f64..1.5, 1.0f64..50.0).prop_map(|(a, l, s, d)| SampleSection::GlassSlab {
            thickness_um: d,
            ambient_index: a,
            layer_index: l,
            substrate_index: s,
        }),
        proptest::collection::vec((0.0f64..0.7, 0.0f64..0.7), 2..6).prop_map(|rs| SampleSection::Tabulated {
            table: rs.iter().enumerate().map(|(k, &(re, im))| [k as f64 - 2.0, re, im]).collect()
        }),
    ]
}

fn pump() -> impl Strategy<Value = PumpSection> {
    prop_oneof![
        (5.0f64..1e5).prop_map(|t| PumpSection { duration_fs: Some(t), ..PumpSection::default() }),
        (0.01f64..100.0).prop_map(|t| PumpSection { duration_ps: Some(t), ..PumpSection::default() }),
        (0.1f64..10.0).prop_map(|g| PumpSection { gamma: Some(g), ..PumpSection::default() }),
    ]
}

fn crystal() -> impl Strategy<Value = CrystalSection> {
    (0.1f64..12.0, proptest::option::of(0.0f64..1000.0), proptest::option::of(1.9f64..2.3)).prop_map(
        |(l, walk_off, n)| CrystalSection {
            walk_off_fs_per_mm: walk_off,
            idler_phase_index: n,
            ..CrystalSection::preset("mgo-ln", l)
        },
    )
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (
        proptest::option::of("[a-z][a-z0-9_-]{0,12}"),
        proptest::sample::subsequence(vec![Task::G1Scan, Task::OctScan, Task::Schmidt], 1..=3),
        crystal(),
        pump(),
        (-10.0f64..10.0, 0.0f64..50.0, proptest::option::of(-100.0f64..100.0)),
        sample(),
        (any::<bool>(), any::<bool>(), proptest::option::of(2usize..5000)),
        proptest::option::of((-500.0f64..-1.0, 1.0f64..500.0)),
    )
        .prop_map(|(name, tasks, crystal, pump, (z1, z2, zp2), sample, (gauss, json, points), bounds)| Scenario {
            name,
            description: None,
            tasks,
            crystal,
            pump,
            geometry: GeometrySection { z1_mm: z1, z2_mm: z2, zp1_mm: 0.0, zp2_mm: zp2 },
            sample,
            grid: GridSection {
                points: None,
                kernel: if gauss { KernelChoice::Gaussian } else { KernelChoice::Exact },
            },
            scan: ScanSection { start_um: bounds.map(|b| b.0), stop_um: bounds.map(|b| b.1), points, fringes: json },
            output: OutputSection { dir: None, format: if json { Format::Json } else { Format::Csv } },
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_render_round_trip(s in scenario()) {
        // only valid scenarios are required to round-trip
        prop_assume!(s.setup().is_ok());
        let text = s.render();
        let back = parse_scenario(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.digest(), s.digest());
        prop_assert_eq!(back.render(), text);
    }
}

#[test]
fn fig2b_scenario_has_mixed_envelope() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/fig2b.toml")).unwrap();
    let s = parse_scenario(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(&s, dir.path()).unwrap();
    assert!(!m.flagged);
    let csv = std::fs::read_to_string(dir.path().join("g1_scan.csv")).unwrap();
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (v[0], v[1])
        })
        .collect();
    let peak = rows.iter().cloned().fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    assert!(peak.0.abs() < 5e-3 && peak.1 > 0.99, "{peak:?}");
    // half of the triangle support: a pure triangle gives 0.5, the 2 ps
    // Gaussian factor pulls it well below
    let half = 263.5 * 5.0 * 2.997_924_58e-4 / 2.0;
    let at_half = rows.iter().min_by(|a, b| (a.0 - half).abs().total_cmp(&(b.0 - half).abs())).unwrap();
    assert!(at_half.1 > 0.1 && at_half.1 < 0.45, "{at_half:?}");
}

#[test]
fn fig3_bundle_writes_six_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = 0;
    for name in ["fig3a", "fig3b", "fig3c"] {
        let p = nlint_sim::presets::find(name).unwrap();
        let m = run_scenario(&p.scenario, &dir.path().join(name)).unwrap();
        assert!(m.tasks.iter().all(|t| !t.files.is_empty()));
        files += m.tasks.iter().map(|t| t.files.len()).sum::<usize>();
    }
    assert_eq!(files, 6);
}

#[test]
fn schmidt_json_coefficients_sum_to_one() {
    let p = nlint_sim::presets::find("separable").unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&p.scenario, dir.path()).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("schmidt.json")).unwrap()).unwrap();
    let sum: f64 = v["coefficients"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-6);
    assert!(v["schmidt_number"].as_f64().unwrap() <= 1.01);
}
