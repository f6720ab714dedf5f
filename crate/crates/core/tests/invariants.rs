//! Property tests for the structural invariants of the public API.

use lagdep_core::basis::BasisSpec;
use lagdep_core::coeffs::{estimate_coeffs, lag_sweep, CoeffTensor};
use lagdep_core::normalize::{gauss_normalize, NormKind, NormalizedSeries};
use lagdep_core::signal::{load_csv, select_window, write_csv, LoadOptions, Recording};
use lagdep_core::{eval_basis_matrix, Error};
use proptest::prelude::*;

fn finite_f64() -> impl Strategy<Value = f64> {
    prop::num::f64::POSITIVE
        | prop::num::f64::NEGATIVE
        | prop::num::f64::ZERO
        | prop::num::f64::SUBNORMAL
        | prop::num::f64::NORMAL
}

fn recording(max_channels: usize, min_len: usize, max_len: usize) -> impl Strategy<Value = Recording> {
    (1..=max_channels, min_len..=max_len).prop_flat_map(|(nc, len)| {
        prop::collection::vec(prop::collection::vec(finite_f64(), len), nc).prop_map(
            move |data| {
                let names = (0..nc).map(|i| format!("c{i}")).collect();
                Recording::new(names, data, 500.0).unwrap()
            },
        )
    })
}

fn unit_open_series(min_len: usize, max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    (min_len..=max_len)
        .prop_flat_map(|len| prop::collection::vec(1e-9..(1.0 - 1e-9f64), len))
}

fn normalized(values: Vec<f64>, burn_in: usize) -> NormalizedSeries {
    NormalizedSeries {
        values,
        burn_in,
        kind: NormKind::Basic,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_exact(rec in recording(4, 2, 40)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.csv");
        write_csv(&rec, &path).unwrap();
        let back = load_csv(&path, &LoadOptions::default()).unwrap();
        prop_assert_eq!(back.channel_names(), rec.channel_names());
        prop_assert_eq!(back.len(), rec.len());
        for i in 0..rec.num_channels() {
            prop_assert_eq!(back.channel(i), rec.channel(i));
        }
    }

    #[test]
    fn gauss_normalize_preserves_order_inside_unit_interval(
        xs in prop::collection::vec(prop::num::f64::NORMAL, 2..200)
    ) {
        match gauss_normalize(&xs) {
            Err(Error::ZeroVariance { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
            Ok(ns) => {
                prop_assert_eq!(ns.values.len(), xs.len());
                prop_assert_eq!(ns.burn_in, 0);
                for (a, b) in xs.iter().zip(&ns.values) {
                    prop_assert!(*b > 0.0 && *b < 1.0, "{} mapped to {}", a, b);
                }
                for i in 0..xs.len() {
                    for j in (i + 1)..xs.len() {
                        let raw = xs[i].partial_cmp(&xs[j]).unwrap();
                        let mapped = ns.values[i].partial_cmp(&ns.values[j]).unwrap();
                        prop_assert_eq!(raw, mapped, "pair ({},{})", i, j);
                    }
                }
            }
        }
    }

    #[test]
    fn window_of_window_composes(
        rec in recording(2, 10, 50),
        splits in (0usize..4, 2usize..6, 0usize..3, 2usize..4)
    ) {
        let (a, outer_len, c, inner_len) = splits;
        let b = (a + outer_len).min(rec.len());
        prop_assume!(b >= a + 4);
        let outer = select_window(&rec, a, b).unwrap();
        let d = (c + inner_len).min(outer.len());
        prop_assume!(d >= c + 2);
        let nested = select_window(&outer, c, d).unwrap();
        let direct = select_window(&rec, a + c, a + d).unwrap();
        prop_assert_eq!(nested.len(), direct.len());
        for i in 0..nested.num_channels() {
            prop_assert_eq!(nested.channel(i), direct.channel(i));
        }
    }

    #[test]
    fn coefficients_stay_inside_product_bound(
        ys in unit_open_series(1100, 1300),
        zs in unit_open_series(1100, 1300),
        by in 0usize..40,
        bz in 0usize..40,
        offset in -30i64..30,
        m in 1usize..6
    ) {
        let fy = eval_basis_matrix(&normalized(ys, by), &BasisSpec { max_degree: m });
        let fz = eval_basis_matrix(&normalized(zs, bz), &BasisSpec { max_degree: m });
        let c = estimate_coeffs(&fy, &fz, offset).unwrap();
        for j in 0..=m {
            for k in 0..=m {
                let bound = (((2 * j + 1) * (2 * k + 1)) as f64).sqrt();
                prop_assert!(c.get(j, k).abs() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn transposing_series_transposes_coefficients(
        ys in unit_open_series(1100, 1200),
        zs in unit_open_series(1100, 1200),
        offset in -20i64..20,
        m in 1usize..5
    ) {
        let spec = BasisSpec { max_degree: m };
        let fy = eval_basis_matrix(&normalized(ys, 0), &spec);
        let fz = eval_basis_matrix(&normalized(zs, 0), &spec);
        let ab = estimate_coeffs(&fy, &fz, offset).unwrap();
        let ba = estimate_coeffs(&fz, &fy, -offset).unwrap();
        for j in 0..=m {
            for k in 0..=m {
                prop_assert_eq!(ab.get(j, k), ba.get(k, j));
            }
        }
    }

    #[test]
    fn tensor_binary_round_trip_is_bit_exact(
        ys in unit_open_series(1100, 1200),
        zs in unit_open_series(1100, 1200),
        m in 1usize..5
    ) {
        let spec = BasisSpec { max_degree: m };
        let a = normalized(ys, 0);
        let b = normalized(zs, 0);
        let t = lag_sweep(&a, &b, &spec, -4..=4).unwrap();
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        let back = CoeffTensor::read_binary(buf.as_slice()).unwrap();
        prop_assert_eq!(&back.lags, &t.lags);
        for (ma, mb) in t.matrices().iter().zip(back.matrices()) {
            prop_assert_eq!(ma.as_slice(), mb.as_slice());
        }
    }
}
