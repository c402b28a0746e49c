use num_complex::Complex64 as C;
use proptest::prelude::*;
use tfwave_core::io::{read_probes, write_probes, GridFile, ProbeRow};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() }
}

fn any_cell() -> impl Strategy<Value = Option<C>> {
    prop_oneof![
        1 => Just(None),
        4 => (any::<f64>(), any::<f64>()).prop_map(|(a, b)| Some(C::new(a, b))),
    ]
}

fn any_grid() -> impl Strategy<Value = GridFile> {
    (1usize..6, 1usize..6, 1usize..4).prop_flat_map(|(nx, ny, nt)| {
        (
            prop::collection::vec(-1e3f64..1e3, 4),
            prop::collection::vec(0.0f64..1e3, nt),
            prop::collection::vec(any_cell(), nx * ny * nt),
        )
            .prop_map(move |(b, times, cells)| GridFile { nx, ny, x0: b[0], x1: b[1], y0: b[2], y1: b[3], times, cells })
    })
}

fn bits(g: &GridFile) -> Vec<Option<(u64, u64)>> {
    g.cells.iter().map(|c| c.map(|c| (c.re.to_bits(), c.im.to_bits()))).collect()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn grid_round_trip_is_bit_identical(g in any_grid()) {
        let mut bytes = Vec::new();
        g.write_to(&mut bytes).unwrap();
        let back = GridFile::read_from(bytes.as_slice()).unwrap();
        prop_assert_eq!((back.nx, back.ny), (g.nx, g.ny));
        prop_assert_eq!(&back.times, &g.times);
        prop_assert_eq!(bits(&back), bits(&g));
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        prop_assert_eq!(bytes, again);
    }

    #[test]
    fn truncated_grid_is_rejected(g in any_grid(), cut in 1usize..64) {
        let mut bytes = Vec::new();
        g.write_to(&mut bytes).unwrap();
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(GridFile::read_from(&bytes[..keep]).is_err());
    }

    #[test]
    fn probe_round_trip(rows in prop::collection::vec(prop::array::uniform7(-1e6f64..1e6), 0..40)) {
        let mut rows: Vec<ProbeRow> = rows
            .iter()
            .map(|v| ProbeRow { t: v[0].abs(), x: v[1], y: v[2], u: C::new(v[3], v[4]), utot: C::new(v[5], v[6]) })
            .collect();
        rows.sort_by(|a, b| (a.x, a.y, a.t).partial_cmp(&(b.x, b.y, b.t)).unwrap());
        let mut text = Vec::new();
        write_probes(&rows, &mut text).unwrap();
        let back = read_probes(text.as_slice()).unwrap();
        prop_assert_eq!(back, rows);
    }
}
