use hetlearn_harness::{emit_csv, read_csv, Cell, Table};
use proptest::prelude::*;

fn arb_cell() -> impl Strategy<Value = Cell> {
    prop_oneof![
        any::<f64>().prop_map(Cell::Num),
        Just(Cell::Num(f64::NAN)),
        (0usize..100_000).prop_map(|v| Cell::Num(v as f64)),
        "[a-z_]{1,12}".prop_map(Cell::Text),
    ]
}

fn same(a: &Cell, b: &Cell) -> bool {
    match (a, b) {
        (Cell::Num(x), Cell::Num(y)) => x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()),
        (Cell::Text(x), Cell::Text(y)) => x == y,
        _ => false,
    }
}

proptest! {
    #[test]
    fn file_round_trip_is_exact(rows in prop::collection::vec(prop::collection::vec(arb_cell(), 3), 0..20)) {
        let mut t = Table::new(&["a", "b", "c"]);
        for r in rows {
            t.push(r);
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested/t.csv");
        emit_csv(&t, &p).unwrap();
        let first = std::fs::read(&p).unwrap();
        let back = read_csv(&p).unwrap();
        prop_assert_eq!(&back.columns, &t.columns);
        for (x, y) in back.rows.iter().zip(&t.rows) {
            for (a, b) in x.iter().zip(y) {
                prop_assert!(same(a, b), "{:?} vs {:?}", a, b);
            }
        }
        emit_csv(&back, &p).unwrap();
        prop_assert_eq!(std::fs::read(&p).unwrap(), first);
    }
}

#[test]
fn header_and_separator() {
    let mut t = Table::new(&["n", "gamma", "median_error", "iqr", "replicates"]);
    t.push(vec![64usize.into(), 0.0.into(), 0.0123.into(), f64::NAN.into(), 50usize.into()]);
    assert_eq!(t.to_csv_string(), "n,gamma,median_error,iqr,replicates\n64,0,0.0123,nan,50\n");
}
