use cldiag_core::snapshot::{load, read_snapshot, save, write_snapshot};
use cldiag_core::{Field, Grid};
use proptest::prelude::*;

fn arb_field() -> impl Strategy<Value = Field> {
    (1usize..=3, any::<bool>(), 1usize..=3, 0u64..1000).prop_flat_map(|(k, has_time, n, seed)| {
        let naxes = k + usize::from(has_time);
        (
            prop::collection::vec(2usize..6, naxes),
            prop::collection::vec(1e-3f64..10.0, naxes),
            prop::collection::vec(any::<bool>(), naxes),
        )
            .prop_map(move |(ext, sp, mut per)| {
                if has_time {
                    per[0] = false;
                }
                let g = Grid::new(k, ext, sp, per, has_time).unwrap();
                let len = g.len() * n;
                let data = (0..len)
                    .map(|i| ((i as u64 * 2654435761 + seed) % 10007) as f64 * 1.37e-3 - 6.0)
                    .collect();
                let names = (0..n).map(|c| format!("c{c}")).collect();
                Field::new(g, names, data).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn round_trip_is_bit_exact(f in arb_field()) {
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f).unwrap();
        let back = read_snapshot(buf.as_slice()).unwrap();
        prop_assert_eq!(back.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                        f.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(back, f);
    }
}

#[test]
fn file_round_trip() {
    let dir = std::env::temp_dir().join(format!("cldiag-snap-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("f.fld");
    let g = Grid::unit_box(2, 4, &[true, false]).unwrap();
    let f = Field::from_fn(g, vec!["u".into()], |x, u| u[0] = x[0] - 2.0 * x[1]).unwrap();
    save(&path, &f).unwrap();
    assert_eq!(load(&path).unwrap(), f);
    std::fs::remove_dir_all(&dir).unwrap();
}
