//! Design files preserve every coordinate bit for bit.

use ldod::csvio::{read_design, write_design};
use ldod_core::{Design, DesignRegion, Factor};
use proptest::prelude::*;

fn region() -> DesignRegion {
    DesignRegion::new(vec![
        Factor::new("a", -1e6, 1e6),
        Factor::new("b", 0.0, 1e-6),
        Factor::new("c", -3.0, 62.5),
    ])
    .unwrap()
}

fn rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec((-1e6f64..=1e6, 0.0f64..=1e-6, -3.0f64..=62.5).prop_map(|(a, b, c)| vec![a, b, c]), 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, ..ProptestConfig::default() })]

    #[test]
    fn write_then_read_is_bit_exact(rows in rows()) {
        let design = Design::new(rows, region()).unwrap();
        let mut buf = Vec::new();
        write_design(&mut buf, &design).unwrap();
        let back = read_design(buf.as_slice(), "mem", &region()).unwrap();
        for (x, y) in design.rows().iter().flatten().zip(back.rows().iter().flatten()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
        prop_assert_eq!(back.n_runs(), design.n_runs());
    }
}
