//! Property tests for the algebraic invariants of the field operations.

use dcmd_core::fields::{
    normal_derivative, weighted_inner_product, FieldPair, Orientation, PhysicalParams,
};
use dcmd_core::grid::{Grid, SegmentTag};
use dcmd_core::spectral::{cocurrent_transform, TransformDirection};
use proptest::prelude::*;

fn arb_params() -> impl Strategy<Value = PhysicalParams> {
    (0.5f64..5.0, 0.5f64..5.0, 0.0f64..1.0, 0.0f64..1.0, 0.05f64..0.5, 0.05f64..0.5).prop_map(
        |(alpha_f, alpha_p, beta_f, beta_p, gamma_f, gamma_p)| PhysicalParams {
            alpha_f,
            alpha_p,
            beta_f,
            beta_p,
            gamma_f,
            gamma_p,
            orientation: Orientation::CoCurrent,
        },
    )
}

fn arb_field(grid: Grid) -> impl Strategy<Value = FieldPair> {
    let n = grid.n_nodes();
    (
        proptest::collection::vec(-10.0f64..10.0, n),
        proptest::collection::vec(-10.0f64..10.0, n),
    )
        .prop_map(|(f, p)| FieldPair { f, p })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_is_symmetric_and_bilinear(
        params in arb_params(),
        a in arb_field(Grid::new(6, 7, 1.5).unwrap()),
        b in arb_field(Grid::new(6, 7, 1.5).unwrap()),
        c in arb_field(Grid::new(6, 7, 1.5).unwrap()),
        s in -3.0f64..3.0,
    ) {
        let grid = Grid::new(6, 7, 1.5).unwrap();
        let ab = weighted_inner_product(&a, &b, &grid, &params).unwrap();
        let ba = weighted_inner_product(&b, &a, &grid, &params).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0));

        // <a + s c, b> = <a, b> + s <c, b>
        let asc = FieldPair {
            f: a.f.iter().zip(&c.f).map(|(x, y)| x + s * y).collect(),
            p: a.p.iter().zip(&c.p).map(|(x, y)| x + s * y).collect(),
        };
        let lhs = weighted_inner_product(&asc, &b, &grid, &params).unwrap();
        let cb = weighted_inner_product(&c, &b, &grid, &params).unwrap();
        prop_assert!((lhs - (ab + s * cb)).abs() <= 1e-10 * lhs.abs().max(1.0));

        // positivity on nonzero states
        let aa = weighted_inner_product(&a, &a, &grid, &params).unwrap();
        let nonzero = a.f.iter().chain(a.p.iter()).any(|v| *v != 0.0);
        if nonzero {
            prop_assert!(aa > 0.0);
        }
    }

    #[test]
    fn transform_roundtrip_recovers_fields(
        params in arb_params(),
        w in arb_field(Grid::new(6, 9, 2.0).unwrap()),
    ) {
        let grid = Grid::new(6, 9, 2.0).unwrap();
        let g = cocurrent_transform(&w, &params, &grid, TransformDirection::Forward).unwrap();
        let back = cocurrent_transform(&g, &params, &grid, TransformDirection::Inverse).unwrap();
        for (x, y) in w.f.iter().zip(&back.f).chain(w.p.iter().zip(&back.p)) {
            prop_assert!((x - y).abs() <= 1e-13 * x.abs().max(1.0));
        }
    }

    #[test]
    fn normal_derivative_is_exact_on_affine_fields(
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
        c in -5.0f64..5.0,
    ) {
        let grid = Grid::new(7, 9, 2.0).unwrap();
        let w = FieldPair::from_fn(&grid, |x, y| (a + b * x + c * y, a - c * x + b * y));
        for tag in [SegmentTag::Gamma1, SegmentTag::Gamma2, SegmentTag::Gamma3, SegmentTag::Gamma4] {
            let seg = grid.segment(tag);
            let (nx, ny) = seg.normal();
            let (df, dp) = normal_derivative(&w, &seg).unwrap();
            let exact_f = b * nx + c * ny;
            let exact_p = -c * nx + b * ny;
            for v in &df {
                prop_assert!((v - exact_f).abs() < 1e-10, "{tag}: {v} vs {exact_f}");
            }
            for v in &dp {
                prop_assert!((v - exact_p).abs() < 1e-10, "{tag}: {v} vs {exact_p}");
            }
        }
    }
}
