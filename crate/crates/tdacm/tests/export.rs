use nalgebra::DVector;
use proptest::prelude::*;
use tdacm::export::{
    csv_string, export, parse_csv, parse_file, rows_of, Layout, Row, EMPTY_HEADER,
};
use tdacm::AppError;
use tdacm_core::controllers::ControllerKind;
use tdacm_core::sim::{Record, TrajectoryLog};

fn record(t: f64, x: f64) -> Record {
    Record {
        t,
        q: DVector::from_vec(vec![x, -x, 0.5 * x, 1.0, 2.0]),
        qdot_des: DVector::from_vec(vec![x, 0.0, -0.0, 3.0, x * x]),
        s: DVector::from_element(8, x),
        e_s: DVector::from_element(8, -x),
        f_n: x.abs(),
        e_f: x,
        p_t: -x,
        delta_s: DVector::zeros(8),
        delta_f: 0.0,
        w_s_norm: 0.0,
        w_f_norm: 0.0,
        flags: (t as u8) & 3,
    }
}

fn log_of(records: Vec<Record>) -> TrajectoryLog {
    TrajectoryLog {
        scenario: "synthetic".into(),
        controller: ControllerKind::Cftsmc,
        seed: 0,
        dt: 1e-3,
        records,
    }
}

fn same_bits(a: &[Row], b: &[Row]) -> bool {
    let v = |x: &DVector<f64>| x.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
    a.len() == b.len()
        && a.iter().zip(b).all(|(a, b)| {
            a.t.to_bits() == b.t.to_bits()
                && v(&a.q) == v(&b.q)
                && v(&a.s) == v(&b.s)
                && v(&a.e_s) == v(&b.e_s)
                && a.f_n.to_bits() == b.f_n.to_bits()
                && a.e_f.to_bits() == b.e_f.to_bits()
                && a.p_t.to_bits() == b.p_t.to_bits()
                && v(&a.qdot_des) == v(&b.qdot_des)
                && a.flags == b.flags
        })
}

#[test]
fn header_has_the_documented_order() {
    let h = Layout {
        dof: 2,
        features: 1,
    }
    .header()
    .join(",");
    assert_eq!(
        h,
        "t,q_0,q_1,s_0,e_s_0,f_n,e_f,p_t,qdot_des_0,qdot_des_1,flags"
    );
}

#[test]
fn full_run_has_one_line_per_record_plus_header() {
    let log = log_of(
        (0..25001)
            .map(|k| record(k as f64 * 1e-3, (k as f64).sin()))
            .collect(),
    );
    let text = csv_string(&log);
    assert_eq!(text.lines().count(), 25002);
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
}

#[test]
fn extreme_values_round_trip_bit_exactly() {
    let xs = [
        0.0,
        -0.0,
        f64::MIN_POSITIVE,
        5e-324,
        f64::MAX,
        -f64::MAX,
        1e-300,
        0.1 + 0.2,
        -1.0 / 3.0,
    ];
    let log = log_of(
        xs.iter()
            .enumerate()
            .map(|(k, &x)| record(k as f64, x))
            .collect(),
    );
    let parsed = parse_csv(&csv_string(&log), "x").unwrap();
    assert!(same_bits(&parsed, &rows_of(&log)));
    assert!(parsed[1].e_f.is_sign_negative());
}

#[test]
fn empty_log_writes_header_only() {
    let log = log_of(Vec::new());
    let text = csv_string(&log);
    assert_eq!(text, format!("{EMPTY_HEADER}\n"));
    assert!(parse_csv(&text, "empty").unwrap().is_empty());
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.csv");
    let log = log_of(
        (0..50)
            .map(|k| record(k as f64 * 0.01, k as f64 * 0.37))
            .collect(),
    );
    export(&log, &path).unwrap();
    assert!(same_bits(&parse_file(&path).unwrap(), &rows_of(&log)));
}

#[test]
fn malformed_rows_report_their_line() {
    let log = log_of((0..3).map(|k| record(k as f64, 1.0)).collect());
    let mut lines: Vec<String> = csv_string(&log).lines().map(String::from).collect();
    lines[3] = lines[3].replacen("1.0", "one", 1);
    match parse_csv(&lines.join("\n"), "broken.csv") {
        Err(AppError::Csv { path, line, .. }) => {
            assert_eq!(path, "broken.csv");
            assert_eq!(line, 4);
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        parse_csv("a,b\n1,2\n", "h"),
        Err(AppError::Csv { line: 1, .. })
    ));
}

proptest! {
    #[test]
    fn arbitrary_finite_values_round_trip(xs in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..20)) {
        let log = log_of(xs.iter().enumerate().map(|(k, &x)| record(k as f64 * 1e-3, x)).collect());
        let parsed = parse_csv(&csv_string(&log), "p").unwrap();
        prop_assert!(same_bits(&parsed, &rows_of(&log)));
    }
}
