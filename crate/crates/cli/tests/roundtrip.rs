use extsum::{Point, TraceRow};
use extsum_cli::tracefile::{read_csv, write_csv};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    any::<f64>().prop_filter("finite", |v| v.is_finite())
}

fn rows(dim: usize) -> impl Strategy<Value = Vec<TraceRow>> {
    prop::collection::vec(
        (
            finite(),
            finite(),
            prop::collection::vec(finite(), dim),
            prop::collection::vec(finite(), dim),
            finite(),
            prop::option::of(finite()),
        ),
        1..20,
    )
    .prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(n, (lambda, eps, x, xbar, eps_u_norm, dist_to_solution))| TraceRow {
                n,
                lambda,
                eps,
                x: Point::new(x).unwrap(),
                xbar: Point::new(xbar).unwrap(),
                eps_u_norm,
                dist_to_solution,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn csv_round_trip_is_bit_exact(rows in (1usize..4).prop_flat_map(rows)) {
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        let bits = |r: &TraceRow| {
            let mut v = vec![r.lambda.to_bits(), r.eps.to_bits(), r.eps_u_norm.to_bits()];
            v.extend(r.x.coords().iter().chain(r.xbar.coords()).map(|c| c.to_bits()));
            (r.n, v, r.dist_to_solution.map(f64::to_bits))
        };
        prop_assert_eq!(rows.iter().map(bits).collect::<Vec<_>>(), back.iter().map(bits).collect::<Vec<_>>());
    }
}
